#include "affgebroid/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace affgebroid {

namespace {

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

void check_momentum(const AffgebroidModel& model, const MomentumPoint& q) {
    model.check_point(q.x);
    if (q.p.size() != idx(model.n())) throw InputError("momentum point has wrong fiber dimension");
}

struct InverseResult {
    Eigen::VectorXd y;
    LagrangianEval le;
    int iterations = 0;
};

InverseResult newton_inverse(const Lagrangian& L, const MomentumPoint& q, const NewtonOptions& opt) {
    const Eigen::Index n = q.p.size();
    InverseResult res;
    LagrangianEval e0 = L.eval({q.x, Eigen::VectorXd::Zero(n)});
    Eigen::PartialPivLU<Eigen::MatrixXd> lu0(e0.W);
    if (!(lu0.rcond() > 0.0)) throw HyperregularityError("fiber Hessian is singular at the Newton start point");
    // One W-preconditioned step from y = 0 (exact for quadratic L).
    res.y = lu0.solve(q.p - e0.Ly);
    const double target = opt.tol * std::max(1.0, q.p.lpNorm<Eigen::Infinity>());
    for (int it = 0; it <= opt.max_iter; ++it) {
        res.le = L.eval({q.x, res.y});
        Eigen::VectorXd F = res.le.Ly - q.p;
        if (!F.allFinite()) break;
        if (F.lpNorm<Eigen::Infinity>() <= target) {
            res.iterations = it;
            return res;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(res.le.W);
        if (!(lu.rcond() > 0.0)) break;
        res.y -= lu.solve(F);
    }
    throw HyperregularityError("Legendre inversion did not converge within " + std::to_string(opt.max_iter) +
                               " Newton iterations");
}

double linear_bracket(const Anchor& an, const Eigen::MatrixXd& Cp, const Eigen::VectorXd& fx,
                      const Eigen::VectorXd& fp, const Eigen::VectorXd& gx, const Eigen::VectorXd& gp) {
    return (an.rho.transpose() * fx).dot(gp) - (an.rho.transpose() * gx).dot(fp) - fp.dot(Cp * gp);
}

// Cp(a, b) = C^g_{ab} p_g
Eigen::MatrixXd contract_structure(const Structure& st, const Eigen::VectorXd& p) {
    const Eigen::Index n = p.size();
    Eigen::MatrixXd Cp = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index g = 0; g < n; ++g) Cp += p[g] * st.c[static_cast<std::size_t>(g)];
    return Cp;
}

}  // namespace

MomentumFunction momentum_function(const ScalarField& f, std::size_t m) {
    return [f, m](const MomentumPoint& q) {
        const Eigen::Index mi = idx(m);
        if (q.x.size() != mi || f.arity() != m + static_cast<std::size_t>(q.p.size()))
            throw InputError("momentum function evaluated at a point of the wrong dimension");
        Eigen::VectorXd z(q.x.size() + q.p.size());
        z << q.x, q.p;
        Eigen::VectorXd g = f.gradient(z);
        return MomentumFunctionEval{f.value(z), g.head(mi), g.tail(q.p.size())};
    };
}

HamiltonianData::HamiltonianData(std::size_t m, std::size_t n, Fn fn, Provenance prov)
    : m_(m), n_(n), fn_(std::move(fn)), prov_(prov) {
    if (!fn_) throw InputError("Hamiltonian needs an evaluator");
}

HamiltonianData HamiltonianData::from_field(std::size_t m, std::size_t n, const ScalarField& f) {
    if (f.arity() != m + n) throw InputError("Hamiltonian field must have arity m + n");
    auto fn = [f, m, n](const MomentumPoint& q) {
        Eigen::VectorXd z(idx(m + n));
        z << q.x, q.p;
        HamiltonianEval e;
        e.H = f.value(z);
        Eigen::VectorXd g = f.gradient(z);
        e.Hx = g.head(idx(m));
        e.Hp = g.tail(idx(n));
        Eigen::MatrixXd h = f.hessian(z);
        e.Hpp = h.bottomRightCorner(idx(n), idx(n));
        e.Hxp = h.topRightCorner(idx(m), idx(n));
        return e;
    };
    return HamiltonianData(m, n, fn, Provenance::User);
}

HamiltonianEval HamiltonianData::eval(const MomentumPoint& q) const {
    if (q.x.size() != idx(m_) || q.p.size() != idx(n_)) throw InputError("momentum point has wrong dimension");
    return fn_(q);
}

MomentumFunction HamiltonianData::function() const {
    HamiltonianData self = *this;
    return [self](const MomentumPoint& q) {
        HamiltonianEval e = self.eval(q);
        return MomentumFunctionEval{e.H, e.Hx, e.Hp};
    };
}

LegendreImage legendre_forward(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p) {
    model.check_point(p);
    LagrangianEval e = L.first_order(p);
    return {{p.x, e.Ly}, e.L - p.y.dot(e.Ly)};
}

PhasePoint legendre_inverse(const AffgebroidModel& model, const Lagrangian& L, const MomentumPoint& q,
                            const NewtonOptions& opt) {
    check_momentum(model, q);
    return {q.x, newton_inverse(L, q, opt).y};
}

HamiltonianData hamiltonian_from_lagrangian(std::shared_ptr<const AffgebroidModel> model, Lagrangian L,
                                            NewtonOptions opt) {
    const std::size_t m = model->m(), n = model->n();
    auto fn = [model, L, opt](const MomentumPoint& q) {
        check_momentum(*model, q);
        InverseResult inv = newton_inverse(L, q, opt);
        CheckedInverse Winv = checked_inverse(inv.le.W);
        if (!Winv.regular) throw HyperregularityError("fiber Hessian is singular at the Legendre preimage");
        HamiltonianEval e;
        e.H = q.p.dot(inv.y) - inv.le.L;
        e.Hx = -inv.le.Lx;
        e.Hp = inv.y;
        e.Hpp = Winv.inverse;
        e.Hxp = -inv.le.Lxy * Winv.inverse;
        return e;
    };
    return HamiltonianData(m, n, fn, HamiltonianData::Provenance::Legendre);
}

Eigen::VectorXd hamilton_field(const AffgebroidModel& model, const HamiltonianData& H, const MomentumPoint& q) {
    check_momentum(model, q);
    HamiltonianEval e = H.eval(q);
    Anchor an = eval_anchor(model, q.x);
    Structure st = eval_structure(model, q.x);
    const Eigen::Index m = q.x.size(), n = q.p.size();
    // pdot_a = -rho^i_a H_x + p_g (C^g_{0a} + C^g_{ba} H_{p_b})
    Eigen::MatrixXd Cp = contract_structure(st, q.p);
    Eigen::VectorXd pdot = -an.rho.transpose() * e.Hx + st.c0.transpose() * q.p + Cp.transpose() * e.Hp;
    Eigen::VectorXd out(m + n);
    out << an.rho0 + an.rho * e.Hp, pdot;
    return out;
}

Eigen::VectorXd tangent_legendre(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                 const ProlongVector& X) {
    model.check_point(p);
    Anchor an = eval_anchor(model, p.x);
    LagrangianEval e = L.eval(p);
    Eigen::VectorXd base = X.z0 * an.rho0 + an.rho * X.z;
    Eigen::VectorXd out(1 + 2 * p.y.size());
    out << X.z0, X.z, e.Lxy.transpose() * base + e.W * X.v;
    return out;
}

// ---------------------------------------------------------------------------

HamiltonianConstraintSet::HamiltonianConstraintSet(const ConstrainedSystem& sys, HamiltonianData H)
    : constraints_(sys.constraints()), H_(std::move(H)) {
    if (H_.m() != sys.model().m() || H_.n() != sys.model().n())
        throw InputError("Hamiltonian dimensions do not match the system");
}

HamiltonianConstraintSet::Eval HamiltonianConstraintSet::eval(const MomentumPoint& q) const {
    return eval(q, H_.eval(q));
}

HamiltonianConstraintSet::Eval HamiltonianConstraintSet::eval(const MomentumPoint& q, const HamiltonianEval& he) const {
    ConstraintSet::Eval ce = constraints_.eval(q.x);
    const Eigen::VectorXd& y = he.Hp;
    Eval e;
    e.mu = ce.mu;
    e.psi = ce.mu0 + ce.mu * y;
    e.psi_p = ce.mu * he.Hpp;
    e.psi_x = ce.dmu0;
    for (std::size_t b = 0; b < ce.dmu.size(); ++b) e.psi_x += y[idx(b)] * ce.dmu[b];
    e.psi_x += ce.mu * he.Hxp.transpose();
    return e;
}

MomentumFunction HamiltonianConstraintSet::function(std::size_t a) const {
    if (a >= r()) throw InputError("constraint index out of range");
    HamiltonianConstraintSet self = *this;
    return [self, a](const MomentumPoint& q) {
        Eval e = self.eval(q);
        const Eigen::Index ai = idx(a);
        return MomentumFunctionEval{e.psi[ai], e.psi_x.row(ai).transpose(), e.psi_p.row(ai).transpose()};
    };
}

MomentumPoint project_momentum_to_constraint(const HamiltonianConstraintSet& hc, const MomentumPoint& q, double tol,
                                             int max_iter) {
    MomentumPoint out = q;
    for (int it = 0; it < max_iter; ++it) {
        HamiltonianConstraintSet::Eval e = hc.eval(out);
        if (e.psi.lpNorm<Eigen::Infinity>() <= tol) return out;
        out.p += min_norm_solve(e.psi_p, -e.psi);
    }
    if (hc.eval(out).psi.lpNorm<Eigen::Infinity>() <= tol) return out;
    throw RegularityError("momentum projection onto the constraint set did not converge");
}

HamiltonianConstraintSet hamiltonian_constraints(const ConstrainedSystem& sys, const HamiltonianData& H) {
    return HamiltonianConstraintSet(sys, H);
}

namespace {

struct HamiltonianConstrainedState {
    HamiltonianEval he;
    HamiltonianConstraintSet::Eval ce;
    Eigen::MatrixXd Hinv;  // inverse of d2H/dp dp
    Eigen::MatrixXd Cbar;
    Eigen::MatrixXd Cbar_inv;
    Eigen::MatrixXd Zbar;
    Anchor an;
    Structure st;
};

HamiltonianConstrainedState hamiltonian_state(const ConstrainedSystem& sys, const HamiltonianData& H,
                                              const MomentumPoint& q) {
    check_momentum(sys.model(), q);
    HamiltonianConstrainedState s;
    s.he = H.eval(q);
    s.ce = HamiltonianConstraintSet(sys, H).eval(q, s.he);
    CheckedInverse hi = checked_inverse(s.he.Hpp, sys.tolerances().cond_tol);
    if (!hi.regular) throw RegularityError("momentum Hessian of H is singular at this point");
    s.Hinv = hi.inverse;
    s.Cbar = -s.ce.psi_p * s.Hinv * s.ce.psi_p.transpose();
    s.Zbar = -s.Hinv * s.ce.psi_p.transpose();
    CheckedInverse ci = checked_inverse(s.Cbar, sys.tolerances().cond_tol);
    if (!ci.regular) throw RegularityError("Hamiltonian compatibility matrix is singular at this point");
    s.Cbar_inv = ci.inverse;
    s.an = eval_anchor(sys.model(), q.x);
    s.st = eval_structure(sys.model(), q.x);
    return s;
}

}  // namespace

HamiltonianCompatibility hamiltonian_compatibility(const ConstrainedSystem& sys, const HamiltonianData& H,
                                                   const MomentumPoint& q) {
    check_momentum(sys.model(), q);
    HamiltonianEval he = H.eval(q);
    HamiltonianConstraintSet::Eval ce = HamiltonianConstraintSet(sys, H).eval(q, he);
    CheckedInverse hi = checked_inverse(he.Hpp, sys.tolerances().cond_tol);
    if (!hi.regular) throw RegularityError("momentum Hessian of H is singular at this point");
    HamiltonianCompatibility out;
    out.Cbar = -ce.psi_p * hi.inverse * ce.psi_p.transpose();
    out.Zbar = -hi.inverse * ce.psi_p.transpose();
    CheckedInverse ci = checked_inverse(out.Cbar, sys.tolerances().cond_tol);
    out.regular = ci.regular;
    out.condition = ci.condition;
    if (ci.regular) out.Cbar_inv = ci.inverse;
    return out;
}

ConstrainedHamiltonDynamics constrained_hamilton_dynamics(const ConstrainedSystem& sys, const HamiltonianData& H,
                                                          const MomentumPoint& q) {
    HamiltonianConstrainedState s = hamiltonian_state(sys, H, q);
    const Eigen::Index m = q.x.size(), n = q.p.size();
    Eigen::MatrixXd Cp = contract_structure(s.st, q.p);
    Eigen::VectorXd xdot = s.an.rho0 + s.an.rho * s.he.Hp;
    Eigen::VectorXd pdot = -s.an.rho.transpose() * s.he.Hx + s.st.c0.transpose() * q.p + Cp.transpose() * s.he.Hp;
    Eigen::VectorXd psidot = s.ce.psi_x * xdot + s.ce.psi_p * pdot;
    ConstrainedHamiltonDynamics d;
    d.lambda_bar = -s.Cbar_inv * psidot;
    d.field.resize(m + n);
    d.field << xdot, pdot + s.Zbar * d.lambda_bar;
    return d;
}

double poisson_bracket_h(const AffgebroidModel& model, const MomentumPoint& q, const MomentumFunction& f,
                         const MomentumFunction& g) {
    check_momentum(model, q);
    MomentumFunctionEval fe = f(q), ge = g(q);
    Anchor an = eval_anchor(model, q.x);
    Eigen::MatrixXd Cp = contract_structure(eval_structure(model, q.x), q.p);
    return linear_bracket(an, Cp, fe.fx, fe.fp, ge.fx, ge.fp);
}

double affine_term(const AffgebroidModel& model, const MomentumPoint& q, const MomentumFunction& f) {
    check_momentum(model, q);
    MomentumFunctionEval fe = f(q);
    Anchor an = eval_anchor(model, q.x);
    Structure st = eval_structure(model, q.x);
    return an.rho0.dot(fe.fx) + (st.c0.transpose() * q.p).dot(fe.fp);
}

double nonholonomic_bracket(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                            const MomentumFunction& H1, const MomentumFunction& H2) {
    HamiltonianConstrainedState s = hamiltonian_state(sys, H, q);
    const MomentumFunctionEval h1 = H1(q), h2 = H2(q);
    const Eigen::MatrixXd Cp = contract_structure(s.st, q.p);
    const Eigen::VectorXd c0p = s.st.c0.transpose() * q.p;
    const Eigen::MatrixXd& px = s.ce.psi_x;
    const Eigen::MatrixXd& pp = s.ce.psi_p;
    const Eigen::Index r = pp.rows();

    auto d0 = [&](const Eigen::VectorXd& fx, const Eigen::VectorXd& fp) { return s.an.rho0.dot(fx) + c0p.dot(fp); };
    auto pb = [&](const Eigen::VectorXd& fx, const Eigen::VectorXd& fp, const Eigen::VectorXd& gx,
                  const Eigen::VectorXd& gp) { return linear_bracket(s.an, Cp, fx, fp, gx, gp); };

    double t1 = d0(h1.fx - h2.fx, h1.fp - h2.fp) + pb(h1.fx, h1.fp, h2.fx, h2.fp);

    Eigen::VectorXd mu1 = pp * s.Hinv * (h1.fp - s.he.Hp);
    Eigen::VectorXd mu2 = pp * s.Hinv * (h2.fp - s.he.Hp);

    Eigen::MatrixXd br(r, r);
    for (Eigen::Index b = 0; b < r; ++b)
        for (Eigen::Index d = 0; d < r; ++d)
            br(b, d) = pb(px.row(b).transpose(), pp.row(b).transpose(), px.row(d).transpose(), pp.row(d).transpose());
    double t2 = mu1.dot(s.Cbar_inv * br * s.Cbar_inv * mu2);

    // Derivative of psi^b along the Hamiltonian field of K.
    auto lie = [&](const MomentumFunctionEval& K) {
        Eigen::VectorXd out(r);
        for (Eigen::Index b = 0; b < r; ++b)
            out[b] = d0(px.row(b).transpose(), pp.row(b).transpose()) +
                     pb(px.row(b).transpose(), pp.row(b).transpose(), K.fx, K.fp);
        return out;
    };
    double t3 = mu1.dot(s.Cbar_inv * lie(h2));
    double t4 = -lie(h1).dot(s.Cbar_inv * mu2);
    return t1 + t2 + t3 + t4;
}

double nonholonomic_bracket(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                            const HamiltonianData& H1, const HamiltonianData& H2) {
    return nonholonomic_bracket(sys, H, q, H1.function(), H2.function());
}

double evolution_rate(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                      const MomentumFunction& f) {
    MomentumFunction h = H.function();
    MomentumFunction h_minus_f = [h, f](const MomentumPoint& z) {
        MomentumFunctionEval a = h(z), b = f(z);
        return MomentumFunctionEval{a.f - b.f, a.fx - b.fx, a.fp - b.fp};
    };
    return nonholonomic_bracket(sys, H, q, h, h_minus_f);
}

}  // namespace affgebroid
