#include "affgebroid/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace affgebroid {

const char* method_name(Method m) { return m == Method::RK4 ? "rk4" : "rk45"; }

Method parse_method(const std::string& s) {
    if (s == "rk4") return Method::RK4;
    if (s == "rk45") return Method::RK45;
    throw InputError("unknown integration method '" + s + "' (expected rk4 or rk45)");
}

namespace {

Eigen::VectorXd checked(const VectorField& f, const Eigen::VectorXd& x, double t, const Eigen::VectorXd& last) {
    Eigen::VectorXd d;
    try {
        d = f(x);
    } catch (const Error& e) {
        throw IntegrationError(std::string("field evaluation failed: ") + e.what(), t, last);
    }
    if (d.size() != x.size()) throw IntegrationError("field returned a vector of the wrong length", t, last);
    if (!d.allFinite()) throw IntegrationError("field returned a non-finite derivative", t, last);
    return d;
}

void record(Trajectory& tr, const IntegrateOptions& opt, double t, const Eigen::VectorXd& x) {
    tr.times.push_back(t);
    tr.states.push_back(x);
    if (opt.drift) tr.drift.push_back(opt.drift(x));
}

Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x, double t, double h) {
    Eigen::VectorXd k1 = checked(f, x, t, x);
    Eigen::VectorXd k2 = checked(f, x + 0.5 * h * k1, t, x);
    Eigen::VectorXd k3 = checked(f, x + 0.5 * h * k2, t, x);
    Eigen::VectorXd k4 = checked(f, x + h * k3, t, x);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory run_rk4(const VectorField& f, const Eigen::VectorXd& x0, double t0, double t1, double h,
                   const IntegrateOptions& opt, Trajectory tr) {
    const double span = t1 - t0;
    long long steps = std::llround(span / h);
    bool exact = steps > 0 && std::abs(t0 + double(steps) * h - t1) <= 1e-9 * h;
    if (!exact) steps = static_cast<long long>(std::floor(span / h));
    Eigen::VectorXd x = x0;
    double t = t0;
    for (long long k = 1; k <= steps; ++k) {
        x = rk4_step(f, x, t, h);
        if (opt.post_step) opt.post_step(x);
        t = (exact && k == steps) ? t1 : t0 + double(k) * h;
        record(tr, opt, t, x);
    }
    if (!exact && t < t1) {
        x = rk4_step(f, x, t, t1 - t);
        if (opt.post_step) opt.post_step(x);
        record(tr, opt, t1, x);
    }
    return tr;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

Trajectory run_rk45(const VectorField& f, const Eigen::VectorXd& x0, double t0, double t1, double h,
                    const IntegrateOptions& opt, Trajectory tr) {
    Eigen::VectorXd x = x0;
    double t = t0;
    Eigen::VectorXd k1 = checked(f, x, t, x);
    const double hmin = 1e-14 * std::max(1.0, std::abs(t1));
    int rejected_in_row = 0;
    while (t < t1) {
        h = std::min(h, t1 - t);
        Eigen::VectorXd k2 = checked(f, x + h * (a21 * k1), t, x);
        Eigen::VectorXd k3 = checked(f, x + h * (a31 * k1 + a32 * k2), t, x);
        Eigen::VectorXd k4 = checked(f, x + h * (a41 * k1 + a42 * k2 + a43 * k3), t, x);
        Eigen::VectorXd k5 = checked(f, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t, x);
        Eigen::VectorXd k6 = checked(f, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t, x);
        Eigen::VectorXd xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXd k7 = checked(f, xn, t, x);
        Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        Eigen::ArrayXd scale = opt.atol + opt.rtol * x.array().abs().max(xn.array().abs());
        double en = (err.array() / scale).abs().maxCoeff();
        if (en <= 1.0) {
            t = (t1 - t - h <= hmin) ? t1 : t + h;
            x = xn;
            k1 = k7;
            if (opt.post_step) {
                opt.post_step(x);
                k1 = checked(f, x, t, x);
            }
            record(tr, opt, t, x);
            rejected_in_row = 0;
        } else if (++rejected_in_row > 50) {
            throw IntegrationError("step size control failed to satisfy the tolerance", t, x);
        }
        double factor = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < hmin && t < t1) throw IntegrationError("step size underflow", t, x);
    }
    return tr;
}

}  // namespace

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double t0, double t1, double step,
                     const IntegrateOptions& opt) {
    if (!(step > 0.0)) throw InputError("integration step must be positive");
    if (!(t1 > t0)) throw InputError("integration needs t1 > t0");
    if (!x0.allFinite()) throw InputError("initial state is not finite");
    Trajectory tr;
    tr.step = step;
    tr.method = opt.method;
    tr.system_id = opt.system_id;
    Eigen::VectorXd x = x0;
    record(tr, opt, t0, x);
    return opt.method == Method::RK4 ? run_rk4(field, x, t0, t1, step, opt, std::move(tr))
                                     : run_rk45(field, x, t0, t1, step, opt, std::move(tr));
}

Eigen::VectorXd stack(const PhasePoint& p) {
    Eigen::VectorXd s(p.x.size() + p.y.size());
    s << p.x, p.y;
    return s;
}

Eigen::VectorXd stack(const MomentumPoint& q) {
    Eigen::VectorXd s(q.x.size() + q.p.size());
    s << q.x, q.p;
    return s;
}

PhasePoint unstack_phase(const Eigen::VectorXd& s, std::size_t m) {
    const auto mi = static_cast<Eigen::Index>(m);
    return {s.head(mi), s.tail(s.size() - mi)};
}

MomentumPoint unstack_momentum(const Eigen::VectorXd& s, std::size_t m) {
    const auto mi = static_cast<Eigen::Index>(m);
    return {s.head(mi), s.tail(s.size() - mi)};
}

VectorField free_lagrangian_field(std::shared_ptr<const AffgebroidModel> model, Lagrangian L, double cond_tol) {
    return [model, L, cond_tol](const Eigen::VectorXd& s) {
        return euler_lagrange_section(*model, L, unstack_phase(s, model->m()), cond_tol).field;
    };
}

VectorField constrained_lagrangian_field(std::shared_ptr<const ConstrainedSystem> sys) {
    return [sys](const Eigen::VectorXd& s) {
        PhasePoint p = unstack_phase(s, sys->model().m());
        ConstrainedState st = constrained_state(*sys, p);
        Eigen::VectorXd out(s.size());
        out << st.ls.anchor.rho0 + st.ls.anchor.rho * p.y, st.R_nh.tail(p.y.size());
        return out;
    };
}

VectorField free_hamiltonian_field(std::shared_ptr<const AffgebroidModel> model, HamiltonianData H) {
    return [model, H](const Eigen::VectorXd& s) { return hamilton_field(*model, H, unstack_momentum(s, model->m())); };
}

VectorField constrained_hamiltonian_field(std::shared_ptr<const ConstrainedSystem> sys, HamiltonianData H) {
    return [sys, H](const Eigen::VectorXd& s) {
        return constrained_hamilton_dynamics(*sys, H, unstack_momentum(s, sys->model().m())).field;
    };
}

DriftReport drift_report(const ConstrainedSystem& sys, const Trajectory& traj) {
    DriftReport r;
    for (const Eigen::VectorXd& s : traj.states) {
        double d = constraint_values(sys, unstack_phase(s, sys.model().m())).lpNorm<Eigen::Infinity>();
        r.per_step.push_back(d);
        r.max_drift = std::max(r.max_drift, d);
    }
    return r;
}

DriftReport drift_report(const ConstrainedSystem& sys, const HamiltonianData& H, const Trajectory& traj) {
    HamiltonianConstraintSet hc(sys, H);
    DriftReport r;
    for (const Eigen::VectorXd& s : traj.states) {
        double d = hc.eval(unstack_momentum(s, sys.model().m())).psi.lpNorm<Eigen::Infinity>();
        r.per_step.push_back(d);
        r.max_drift = std::max(r.max_drift, d);
    }
    return r;
}

PhasePoint project_to_constraint(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    Eigen::MatrixXd mu = sys.constraints().mu(p.x);
    if (numerical_rank(mu) < mu.rows()) throw RegularityError("constraint matrix is rank deficient at this point");
    Eigen::VectorXd psi = sys.constraints().mu0(p.x) + mu * p.y;
    return {p.x, p.y + min_norm_solve(mu, -psi)};
}

}  // namespace affgebroid
