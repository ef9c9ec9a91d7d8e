#include "affgebroid/commands.hpp"

#include <cmath>
#include <random>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "affgebroid/checks.hpp"
#include "affgebroid/io.hpp"

namespace affgebroid {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json header(const Config& cfg) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["command"] = command_name(cfg.run.command);
    j["system"] = cfg.system.name;
    j["seed"] = cfg.run.seed;
    return j;
}

void append(std::vector<double>& row, const Eigen::VectorXd& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(v[k]);
}

// Initial state for simulate: configured or sampled, time coordinate set to t0.
PhasePoint initial_phase(const Config& cfg, std::mt19937_64& rng) {
    const ConstrainedSystem& sys = *cfg.system.system;
    PhasePoint p;
    if (cfg.run.x0) {
        p = {*cfg.run.x0, *cfg.run.y0};
    } else {
        p = sample_on_constraint(sys, rng);
    }
    if (auto ti = sys.time_index()) p.x[static_cast<Eigen::Index>(*ti)] = cfg.run.t0;
    return p;
}

CommandResult simulate(const Config& cfg) {
    const SystemConfig& sc = cfg.system;
    const RunSpec& run = cfg.run;
    auto sys = sc.system;
    const AffgebroidModel& model = sys->model();
    const std::size_t m = model.m();
    std::mt19937_64 rng(run.seed);

    json summary = header(cfg);
    summary["method"] = method_name(run.method);
    summary["step"] = run.step;
    summary["t0"] = run.t0;
    summary["t1"] = run.t1;
    summary["side"] = run.hamiltonian ? "hamiltonian" : "lagrangian";
    summary["project"] = run.project;

    std::optional<HamiltonianData> H;
    std::optional<HamiltonianConstraintSet> hc;
    Eigen::VectorXd s0;
    double correction = 0.0;
    if (run.hamiltonian) {
        H = sc.hamiltonian_data();
        hc.emplace(*sys, *H);
        MomentumPoint q;
        if (run.x0 && run.initial_is_momentum) {
            q = {*run.x0, *run.y0};
            if (auto ti = sys->time_index()) q.x[static_cast<Eigen::Index>(*ti)] = run.t0;
        } else {
            PhasePoint p = initial_phase(cfg, rng);
            PhasePoint pp = project_to_constraint(*sys, p);
            correction = (pp.y - p.y).lpNorm<Eigen::Infinity>();
            q = legendre_forward(model, sys->lagrangian(), pp).momentum;
        }
        MomentumPoint qp = project_momentum_to_constraint(*hc, q);
        correction = std::max(correction, (qp.p - q.p).lpNorm<Eigen::Infinity>());
        s0 = stack(qp);
    } else {
        PhasePoint p = initial_phase(cfg, rng);
        PhasePoint pp = project_to_constraint(*sys, p);
        correction = (pp.y - p.y).lpNorm<Eigen::Infinity>();
        s0 = stack(pp);
    }
    if (correction > sys->tolerances().on_constraint_tol)
        spdlog::warn("initial state was {:.3e} off the constraint set; projected onto it", correction);
    summary["initial_correction"] = correction;
    summary["initial_state"] = vec_json(s0);

    IntegrateOptions opt;
    opt.method = run.method;
    opt.system_id = sc.name;
    VectorField field;
    if (run.hamiltonian) {
        field = constrained_hamiltonian_field(sys, *H);
        opt.drift = [hc, m](const Eigen::VectorXd& s) {
            return hc->eval(unstack_momentum(s, m)).psi.lpNorm<Eigen::Infinity>();
        };
        if (run.project)
            opt.post_step = [hc, m](Eigen::VectorXd& s) {
                s = stack(project_momentum_to_constraint(*hc, unstack_momentum(s, m)));
            };
    } else {
        field = constrained_lagrangian_field(sys);
        opt.drift = [sys, m](const Eigen::VectorXd& s) {
            return constraint_values(*sys, unstack_phase(s, m)).lpNorm<Eigen::Infinity>();
        };
        if (run.project)
            opt.post_step = [sys, m](Eigen::VectorXd& s) {
                s = stack(project_to_constraint(*sys, unstack_phase(s, m)));
            };
    }

    CommandResult res;
    std::vector<std::string> cols{"t"};
    const auto ti = sys->time_index();
    for (std::size_t i = 0; i < m; ++i)
        if (!ti || *ti != i) cols.push_back(model.base_names()[i]);
    for (const auto& f : run.hamiltonian ? sc.momentum_names() : model.fiber_names()) cols.push_back(f);
    CsvTable csv(cols);

    Trajectory tr;
    bool failed = false;
    try {
        tr = integrate(field, s0, run.t0, run.t1, run.step, opt);
    } catch (const IntegrationError& e) {
        failed = true;
        summary["error"] = e.what();
        summary["failure_time"] = e.last_time();
        summary["last_state"] = vec_json(e.last_state());
        res.message = std::string("integration failed: ") + e.what();
    }
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k]};
        for (Eigen::Index i = 0; i < tr.states[k].size(); ++i)
            if (!ti || static_cast<Eigen::Index>(*ti) != i) row.push_back(tr.states[k][i]);
        csv.add_row(row);
    }
    double max_drift = 0.0;
    for (double d : tr.drift) max_drift = std::max(max_drift, d);
    const double tol = sc.checks.drift;
    summary["steps"] = tr.times.empty() ? 0 : tr.times.size() - 1;
    summary["max_drift"] = max_drift;
    summary["final_drift"] = tr.drift.empty() ? 0.0 : tr.drift.back();
    summary["drift_tolerance"] = tol;
    const bool drift_ok = !failed && max_drift <= tol;
    summary["pass"] = drift_ok;
    if (!tr.states.empty()) summary["final_state"] = vec_json(tr.states.back());

    const auto traj_path = run.out_dir / "trajectory.csv";
    const auto sum_path = run.out_dir / "summary.json";
    write_file_atomic(traj_path, csv.str());
    write_file_atomic(sum_path, dump(summary));
    res.written = {traj_path, sum_path};
    res.exit_code = drift_ok ? 0 : 1;
    if (!failed)
        res.message = "simulate: " + std::to_string(csv.rows()) + " rows, max drift " + format_double(max_drift) +
                      (drift_ok ? " (ok)" : " (exceeds " + format_double(tol) + ")");
    return res;
}

CommandResult check(const Config& cfg) {
    std::vector<CheckResult> results = run_invariant_suite(cfg.system, cfg.run.seed, cfg.run.samples);
    json report = header(cfg);
    report["samples"] = cfg.run.samples;
    report["checks"] = json::array();
    bool all = true;
    std::size_t failed = 0;
    for (const auto& r : results) {
        json c;
        c["name"] = r.name;
        // JSON has no infinity; a failed evaluation is reported as null.
        c["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
        c["tolerance"] = r.tolerance;
        c["pass"] = r.pass;
        c["detail"] = r.detail;
        report["checks"].push_back(c);
        all = all && r.pass;
        if (!r.pass) ++failed;
        spdlog::info("{:<32} residual {:<24} tol {:<8} {}", r.name, format_double(r.residual),
                     format_double(r.tolerance), r.pass ? "pass" : "FAIL");
    }
    report["pass"] = all;
    const auto path = cfg.run.out_dir / "report.json";
    write_file_atomic(path, dump(report));
    CommandResult res;
    res.written = {path};
    res.exit_code = all ? 0 : 1;
    res.message = "check: " + std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) +
                  " invariants pass";
    return res;
}

CommandResult bracket(const Config& cfg) {
    const SystemConfig& sc = cfg.system;
    const ConstrainedSystem& sys = *sc.system;
    const AffgebroidModel& model = sys.model();
    HamiltonianData H = sc.hamiltonian_data();
    HamiltonianConstraintSet hc(sys, H);
    MomentumFunction h1 = momentum_expression(cfg.run.h1, sc, H);
    MomentumFunction h2 = momentum_expression(cfg.run.h2, sc, H);

    std::vector<MomentumPoint> pts;
    if (!cfg.run.points.empty()) {
        for (const auto& [x, p] : cfg.run.points) pts.push_back({x, p});
    } else {
        std::mt19937_64 rng(cfg.run.seed);
        for (std::size_t k = 0; k < cfg.run.samples; ++k) {
            MomentumPoint q = legendre_forward(model, sys.lagrangian(), sample_on_constraint(sys, rng)).momentum;
            pts.push_back(project_momentum_to_constraint(hc, q));
        }
    }
    std::vector<std::string> cols = model.base_names();
    for (const auto& p : sc.momentum_names()) cols.push_back(p);
    cols.push_back("bracket");
    CsvTable csv(cols);
    for (const auto& q : pts) {
        const double off = hc.eval(q).psi.lpNorm<Eigen::Infinity>();
        if (off > sys.tolerances().on_constraint_tol)
            spdlog::warn("bracket point is {:.3e} off the constraint set", off);
        std::vector<double> row;
        append(row, q.x);
        append(row, q.p);
        row.push_back(nonholonomic_bracket(sys, H, q, h1, h2));
        csv.add_row(row);
    }
    const auto path = cfg.run.out_dir / "bracket.csv";
    write_file_atomic(path, csv.str());
    return {0, {path}, "bracket: " + std::to_string(pts.size()) + " points"};
}

CommandResult derive(const Config& cfg) {
    const SystemConfig& sc = cfg.system;
    const ConstrainedSystem& sys = *sc.system;
    const AffgebroidModel& model = sys.model();
    const std::size_t r = sys.constraints().r();

    std::vector<PhasePoint> pts;
    if (!cfg.run.points.empty()) {
        for (const auto& [x, y] : cfg.run.points) pts.push_back({x, y});
    } else {
        std::mt19937_64 rng(cfg.run.seed);
        for (std::size_t k = 0; k < cfg.run.samples; ++k) pts.push_back(sample_on_constraint(sys, rng));
    }
    std::vector<std::string> cols = model.base_names();
    for (const auto& f : model.fiber_names()) cols.push_back(f);
    for (std::size_t a = 0; a < r; ++a) cols.push_back("lambda" + std::to_string(a + 1));
    for (const auto& f : model.fiber_names()) cols.push_back("acc_" + f);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) cols.push_back("C" + std::to_string(a + 1) + std::to_string(b + 1));
    for (const char* c : {"cond_W", "cond_flat", "cond_C"}) cols.push_back(c);
    CsvTable csv(cols);
    for (const auto& p : pts) {
        ConstrainedDynamics d = constrained_dynamics(sys, p);
        ConstrainedState s = constrained_state(sys, p);
        std::vector<double> row;
        append(row, p.x);
        append(row, p.y);
        append(row, d.lambda);
        append(row, d.R_nh.v);
        for (Eigen::Index a = 0; a < s.C.rows(); ++a)
            for (Eigen::Index b = 0; b < s.C.cols(); ++b) row.push_back(s.C(a, b));
        row.push_back(s.ls.w_condition);
        row.push_back(s.ls.flat_condition);
        row.push_back(s.c_condition);
        csv.add_row(row);
    }
    const auto path = cfg.run.out_dir / "derive.csv";
    write_file_atomic(path, csv.str());
    return {0, {path}, "derive: " + std::to_string(pts.size()) + " points"};
}

}  // namespace

CommandResult run_command(const Config& cfg) {
    if (cfg.run.command == Command::Simulate && cfg.run.x0.has_value() != cfg.run.y0.has_value())
        throw InputError("simulate needs both x and y (or p) in run.initial");
    switch (cfg.run.command) {
        case Command::Simulate: return simulate(cfg);
        case Command::Check: return check(cfg);
        case Command::Bracket: return bracket(cfg);
        case Command::Derive: return derive(cfg);
    }
    throw InputError("unknown command");
}

}  // namespace affgebroid
