#include "affgebroid/checks.hpp"

#include <cmath>
#include <limits>

namespace affgebroid {

namespace {

class Accumulator {
public:
    Accumulator(std::string name, double tol) { r_.name = std::move(name), r_.tolerance = tol; }

    void add(double residual) {
        if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
        r_.residual = std::max(r_.residual, residual);
    }
    void fail(const std::string& why) {
        r_.residual = std::numeric_limits<double>::infinity();
        if (r_.detail.empty()) r_.detail = why;
    }
    CheckResult done() {
        r_.pass = r_.residual <= r_.tolerance;
        return r_;
    }

private:
    CheckResult r_;
};

double inf_norm(const Eigen::MatrixXd& m) { return m.size() ? m.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

MomentumFunction random_quadratic(std::size_t m, std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto k = static_cast<Eigen::Index>(m + n);
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        b[i] = nd(rng);
        for (Eigen::Index j = 0; j < k; ++j) A(i, j) = nd(rng);
    }
    A = 0.5 * (A + A.transpose()).eval();
    const auto mi = static_cast<Eigen::Index>(m);
    return [A, b, mi](const MomentumPoint& q) {
        Eigen::VectorXd z(A.rows());
        z << q.x, q.p;
        Eigen::VectorXd g = A * z + b;
        return MomentumFunctionEval{0.5 * z.dot(A * z) + b.dot(z), g.head(mi), g.tail(g.size() - mi)};
    };
}

MomentumFunction shifted_extension(const MomentumFunction& f, const HamiltonianConstraintSet& hc,
                                   const Eigen::VectorXd& c) {
    return [f, hc, c](const MomentumPoint& q) {
        MomentumFunctionEval e = f(q);
        HamiltonianConstraintSet::Eval ce = hc.eval(q);
        e.f += c.dot(ce.psi);
        e.fx += ce.psi_x.transpose() * c;
        e.fp += ce.psi_p.transpose() * c;
        return e;
    };
}

MomentumFunction sum(const MomentumFunction& f, const MomentumFunction& g) {
    return [f, g](const MomentumPoint& q) {
        MomentumFunctionEval a = f(q), b = g(q);
        return MomentumFunctionEval{a.f + b.f, a.fx + b.fx, a.fp + b.fp};
    };
}

std::vector<CheckResult> run_invariant_suite(const SystemConfig& cfg, std::uint64_t seed, std::size_t samples) {
    const ConstrainedSystem& sys = *cfg.system;
    const AffgebroidModel& model = sys.model();
    const CheckTolerances& tol = cfg.checks;
    const std::size_t m = model.m(), n = model.n();
    std::mt19937_64 rng(seed);

    std::vector<PhasePoint> states;
    std::vector<BasePoint> bases;
    for (std::size_t k = 0; k < samples; ++k) {
        states.push_back(sample_on_constraint(sys, rng));
        bases.push_back(states.back().x);
    }

    std::vector<CheckResult> out;

    {
        StructureIdentityReport rep = check_structure_identities(model, bases, tol.identities);
        out.push_back({"structure_identities", rep.max_residual, tol.identities, rep.pass,
                       "anchor and cyclic relations over the extended basis"});
    }

    {
        const RegularityDiagnostics& d = sys.diagnostics();
        Accumulator acc("regularity", sys.tolerances().cond_tol);
        acc.add(std::max(d.max_w_condition, d.max_c_condition));
        for (const auto& p : states) {
            try {
                ConstrainedState s = constrained_state(sys, p);
                acc.add(std::max({s.ls.w_condition, s.c_condition, s.ls.flat_condition}));
            } catch (const Error& e) {
                acc.fail(e.what());
            }
        }
        CheckResult r = acc.done();
        r.detail = "largest condition number of W, flat_L and C";
        out.push_back(r);
    }

    Accumulator el("euler_lagrange_section", tol.equations);
    Accumulator nh("constrained_section", tol.equations);
    Accumulator routes("projection_routes", tol.routes);
    Accumulator proj("projector_algebra", tol.projectors);
    Accumulator ref("reference_accelerations", tol.reference);
    bool have_reference = false;
    for (const auto& p : states) {
        try {
            ConstrainedState s = constrained_state(sys, p);
            const Eigen::Index N = s.dPsi.cols();
            const Eigen::VectorXd R = s.ls.el.R.flat();
            el.add(inf_norm(s.ls.contract(R)));
            el.add(std::abs(R[0] - 1.0));

            // i_{R_nh} Omega_L must lie in span{S* dPsi^a}; R_nh is a SODE tangent to the constraints.
            const Eigen::VectorXd iR = s.ls.contract(s.R_nh);
            nh.add(span_residual(s.sdual_dpsi().transpose(), iR));
            nh.add(std::abs(s.R_nh[0] - 1.0));
            nh.add(inf_norm(s.dPsi * s.R_nh));
            nh.add(inf_norm(constrained_two_section(sys, p).transpose() * s.R_nh));

            AffineProjector P = projector_affine(sys, p);
            const Eigen::MatrixXd Pc = projector_cosymplectic(sys, p);
            const Eigen::MatrixXd Pp = projector_poisson(sys, p);
            routes.add(inf_norm(P.P * R - s.R_nh));
            routes.add(inf_norm(Pc * R - s.R_nh));
            routes.add(inf_norm(Pp * R - s.R_nh));

            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
            proj.add(inf_norm(P.P * P.P - P.P));
            proj.add(inf_norm(P.P + P.Q - I));
            proj.add(inf_norm(Pc * Pc - Pc));
            proj.add(inf_norm(Pp * Pp - Pp));
            proj.add(span_residual(s.Z, P.Q * R));

            if (cfg.reference_accelerations) {
                if (auto acc = cfg.reference_accelerations(p)) {
                    have_reference = true;
                    ref.add(inf_norm(s.R_nh.tail(static_cast<Eigen::Index>(n)) - *acc));
                }
            }
        } catch (const Error& e) {
            el.fail(e.what());
            nh.fail(e.what());
            routes.fail(e.what());
            proj.fail(e.what());
        }
    }
    out.push_back(el.done());
    out.back().detail = "i_R Omega_L = 0 and phi0(R) = 1";
    out.push_back(nh.done());
    out.back().detail = "i_R Omega_L in span{mu theta}, phi0(R) = 1, dPsi(R) = 0, i_R omega = 0";
    out.push_back(routes.done());
    out.back().detail = "P(R_L), cosymplectic and Poisson projections against the multiplier solution";
    out.push_back(proj.done());
    out.back().detail = "idempotence, P + Q = Id, Q(R_L) in span{Z}";
    if (have_reference) {
        out.push_back(ref.done());
        out.back().detail = "fiber accelerations against the closed form";
    }

    Accumulator leg("legendre_round_trip", tol.legendre);
    for (const auto& p : states) {
        try {
            LegendreImage img = legendre_forward(model, sys.lagrangian(), p);
            PhasePoint back = legendre_inverse(model, sys.lagrangian(), img.momentum);
            leg.add(inf_norm(back.y - p.y) / std::max(1.0, inf_norm(p.y)));
        } catch (const Error& e) {
            leg.fail(e.what());
        }
    }
    out.push_back(leg.done());
    out.back().detail = "relative fiber error of leg_L^-1(leg_L(y))";

    Accumulator skew("bracket_skew_symmetry", tol.bracket_skew);
    Accumulator ext("bracket_extension_independence", tol.bracket_extension);
    try {
        HamiltonianData H = cfg.hamiltonian_data();
        HamiltonianConstraintSet hc(sys, H);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (const auto& p : states) {
            try {
                MomentumPoint q = legendre_forward(model, sys.lagrangian(), p).momentum;
                if (H.provenance() == HamiltonianData::Provenance::User) q = project_momentum_to_constraint(hc, q);
                MomentumFunction h1 = sum(H.function(), random_quadratic(m, n, rng));
                MomentumFunction h2 = sum(H.function(), random_quadratic(m, n, rng));
                Eigen::VectorXd c(static_cast<Eigen::Index>(hc.r()));
                for (Eigen::Index a = 0; a < c.size(); ++a) c[a] = nd(rng);
                const double b12 = nonholonomic_bracket(sys, H, q, h1, h2);
                const double b21 = nonholonomic_bracket(sys, H, q, h2, h1);
                const double scale = std::max(1.0, std::abs(b12));
                skew.add(std::abs(b12 + b21) / scale);
                const double shifted = nonholonomic_bracket(sys, H, q, shifted_extension(h1, hc, c), h2);
                ext.add(std::abs(shifted - b12) / scale);
            } catch (const Error& e) {
                skew.fail(e.what());
                ext.fail(e.what());
            }
        }
    } catch (const Error& e) {
        skew.fail(e.what());
        ext.fail(e.what());
    }
    out.push_back(skew.done());
    out.back().detail = "|{h1,h2} + {h2,h1}| relative to |{h1,h2}|";
    out.push_back(ext.done());
    out.back().detail = "h1 shifted by sum c_a psi^a, relative change";
    return out;
}

}  // namespace affgebroid
