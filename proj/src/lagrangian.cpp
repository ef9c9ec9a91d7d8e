#include "affgebroid/lagrangian.hpp"

#include <cmath>
#include <limits>

namespace affgebroid {

namespace {

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

// Omega_L from its local expression. Rows/columns follow the flat layout
// [T0, T_1..T_n, V_1..V_n].
Eigen::MatrixXd assemble_omega(const Anchor& an, const Structure& st, const LagrangianEval& le,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& xi0) {
    const Eigen::Index n = y.size();
    const Eigen::Index N = 2 * n + 1;
    const Eigen::VectorXd xdot = an.rho0 + an.rho * y;

    // C^g_{0a} + C^g_{ba} y^b, indexed (g, a)
    Eigen::MatrixXd cy = st.c0;
    for (Eigen::Index g = 0; g < n; ++g) cy.row(g) += y.transpose() * st.c[g];

    Eigen::VectorXd A = le.Lxy.transpose() * xdot + le.W * xi0 - cy.transpose() * le.Ly - an.rho.transpose() * le.Lx;

    // B(a, b) = rho^i_b Lxy(i, a) - rho^i_a Lxy(i, b) + Ly_g C^g_{ab}
    Eigen::MatrixXd rl = le.Lxy.transpose() * an.rho;  // (a, b) -> Lxy(i, a) rho^i_b
    Eigen::MatrixXd B = rl - rl.transpose();
    for (Eigen::Index g = 0; g < n; ++g) B += le.Ly[g] * st.c[g];

    // theta^a = T^a - y^a phi0, psi^b = V^b - xi0^b phi0
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(N, n);
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(N, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        theta(0, a) = -y[a];
        theta(1 + a, a) = 1.0;
        psi(0, a) = -xi0[a];
        psi(1 + n + a, a) = 1.0;
    }
    Eigen::VectorXd phi0 = Eigen::VectorXd::Zero(N);
    phi0[0] = 1.0;

    // sum_a A_a theta^a ^ phi0 + W_ab theta^a ^ psi^b + sum_{a<b} B_ab theta^a ^ theta^b,
    // with u ^ w represented by u w^T - w u^T.
    Eigen::VectorXd tA = theta * A;
    Eigen::MatrixXd O = tA * phi0.transpose();
    O += theta * le.W * psi.transpose();
    Eigen::MatrixXd Bu = B.triangularView<Eigen::StrictlyUpper>();
    O += theta * Bu * theta.transpose();
    return O - O.transpose();
}

Eigen::VectorXd el_acceleration(const Anchor& an, const Structure& st, const LagrangianEval& le,
                                const Eigen::VectorXd& y, const Eigen::MatrixXd& Winv) {
    const Eigen::Index n = y.size();
    const Eigen::VectorXd xdot = an.rho0 + an.rho * y;
    Eigen::MatrixXd cy = st.c0;
    for (Eigen::Index g = 0; g < n; ++g) cy.row(g) += y.transpose() * st.c[g];
    Eigen::VectorXd rhs = an.rho.transpose() * le.Lx - le.Lxy.transpose() * xdot + cy.transpose() * le.Ly;
    return Winv * rhs;
}

}  // namespace

Lagrangian::Lagrangian(std::size_t m, std::size_t n, ScalarField field) : m_(m), n_(n), field_(std::move(field)) {
    if (field_.arity() != m + n)
        throw InputError("Lagrangian field has arity " + std::to_string(field_.arity()) + ", expected m + n = " +
                         std::to_string(m + n));
}

Eigen::VectorXd Lagrangian::stack(const PhasePoint& p) const {
    if (static_cast<std::size_t>(p.x.size()) != m_ || static_cast<std::size_t>(p.y.size()) != n_)
        throw InputError("phase point does not match Lagrangian dimensions");
    Eigen::VectorXd z(idx(m_ + n_));
    z << p.x, p.y;
    return z;
}

double Lagrangian::value(const PhasePoint& p) const { return field_.value(stack(p)); }

LagrangianEval Lagrangian::first_order(const PhasePoint& p) const {
    Eigen::VectorXd z = stack(p);
    LagrangianEval e;
    e.L = field_.value(z);
    Eigen::VectorXd g = field_.gradient(z);
    e.Lx = g.head(idx(m_));
    e.Ly = g.tail(idx(n_));
    return e;
}

LagrangianEval Lagrangian::eval(const PhasePoint& p) const {
    LagrangianEval e = first_order(p);
    Eigen::MatrixXd h = field_.hessian(stack(p));
    const Eigen::Index m = idx(m_), n = idx(n_);
    Eigen::MatrixXd W = h.bottomRightCorner(n, n);
    e.W = 0.5 * (W + W.transpose());
    e.Lxy = h.topRightCorner(m, n);
    return e;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ProlongVector::flat() const {
    Eigen::VectorXd f(1 + z.size() + v.size());
    f << z0, z, v;
    return f;
}

ProlongVector ProlongVector::from_flat(const Eigen::VectorXd& f, std::size_t n) {
    if (f.size() != idx(2 * n + 1)) throw InputError("flat prolongation vector has wrong length");
    return {f[0], f.segment(1, idx(n)), f.tail(idx(n))};
}

ProlongVector ProlongVector::zero(std::size_t n) {
    return {0.0, Eigen::VectorXd::Zero(idx(n)), Eigen::VectorXd::Zero(idx(n))};
}

Eigen::VectorXd ProlongCovector::flat() const {
    Eigen::VectorXd f(1 + a.size() + b.size());
    f << a0, a, b;
    return f;
}

ProlongCovector ProlongCovector::from_flat(const Eigen::VectorXd& f, std::size_t n) {
    if (f.size() != idx(2 * n + 1)) throw InputError("flat prolongation covector has wrong length");
    return {f[0], f.segment(1, idx(n)), f.tail(idx(n))};
}

ProlongCovector ProlongCovector::zero(std::size_t n) {
    return {0.0, Eigen::VectorXd::Zero(idx(n)), Eigen::VectorXd::Zero(idx(n))};
}

ProlongCovector ProlongCovector::phi0(std::size_t n) {
    ProlongCovector c = zero(n);
    c.a0 = 1.0;
    return c;
}

double ProlongCovector::operator()(const ProlongVector& X) const { return a0 * X.z0 + a.dot(X.z) + b.dot(X.v); }

ProlongVector vertical_endomorphism(const PhasePoint& p, const ProlongVector& X) {
    if (X.z.size() != p.y.size() || X.v.size() != p.y.size()) throw InputError("dimension mismatch in S");
    return {0.0, Eigen::VectorXd::Zero(p.y.size()), X.z - X.z0 * p.y};
}

ProlongCovector vertical_endomorphism_dual(const PhasePoint& p, const ProlongCovector& alpha) {
    if (alpha.a.size() != p.y.size() || alpha.b.size() != p.y.size()) throw InputError("dimension mismatch in S*");
    return {-alpha.b.dot(p.y), alpha.b, Eigen::VectorXd::Zero(p.y.size())};
}

Eigen::MatrixXd vertical_endomorphism_matrix(const PhasePoint& p) {
    const Eigen::Index n = p.y.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
    S.block(1 + n, 0, n, 1) = -p.y;
    S.block(1 + n, 1, n, n).setIdentity();
    return S;
}

// ---------------------------------------------------------------------------

Regularity lagrangian_regularity(const Lagrangian& L, const PhasePoint& p, double cond_tol) {
    LagrangianEval e = L.eval(p);
    if (!e.W.allFinite()) throw EvaluationError("fiber Hessian of L is not finite");
    CheckedInverse inv = checked_inverse(e.W, cond_tol);
    Regularity r;
    r.regular = inv.regular;
    r.condition = inv.condition;
    r.W = e.W;
    if (inv.regular) r.Winv = inv.inverse;
    return r;
}

EulerLagrangeSection euler_lagrange_section(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                            double cond_tol) {
    model.check_point(p);
    Anchor an = eval_anchor(model, p.x);
    Structure st = eval_structure(model, p.x);
    LagrangianEval le = L.eval(p);
    CheckedInverse inv = checked_inverse(le.W, cond_tol);
    if (!inv.regular)
        throw RegularityError("Lagrangian is not regular at this point (cond(W) = " + std::to_string(inv.condition) +
                              ")");
    EulerLagrangeSection s;
    s.xi = el_acceleration(an, st, le, p.y, inv.inverse);
    s.field.resize(p.x.size() + p.y.size());
    s.field << an.rho0 + an.rho * p.y, s.xi;
    s.R = {1.0, p.y, s.xi};
    return s;
}

std::vector<Eigen::VectorXd> euler_lagrange_residual(const AffgebroidModel& model, const Lagrangian& L,
                                                     const std::vector<std::pair<double, PhasePoint>>& samples,
                                                     const std::vector<Eigen::VectorXd>& ydot) {
    if (samples.size() != ydot.size()) throw InputError("samples and ydot differ in length");
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const PhasePoint& p = samples[k].second;
        model.check_point(p);
        if (ydot[k].size() != p.y.size()) throw InputError("ydot sample has wrong length");
        Anchor an = eval_anchor(model, p.x);
        Structure st = eval_structure(model, p.x);
        LagrangianEval le = L.eval(p);
        const Eigen::Index n = p.y.size();
        Eigen::VectorXd xdot = an.rho0 + an.rho * p.y;
        Eigen::VectorXd dLy = le.Lxy.transpose() * xdot + le.W * ydot[k];
        Eigen::MatrixXd cy = st.c0;
        for (Eigen::Index g = 0; g < n; ++g) cy.row(g) += p.y.transpose() * st.c[g];
        out.push_back(dLy - an.rho.transpose() * le.Lx - cy.transpose() * le.Ly);
    }
    return out;
}

PoincareCartan poincare_cartan(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                               const std::optional<Eigen::VectorXd>& sode_xi0) {
    model.check_point(p);
    const std::size_t n = model.n();
    Eigen::VectorXd xi0 = sode_xi0.value_or(Eigen::VectorXd::Zero(idx(n)));
    if (xi0.size() != idx(n)) throw InputError("auxiliary SODE has wrong fiber length");
    Anchor an = eval_anchor(model, p.x);
    Structure st = eval_structure(model, p.x);
    LagrangianEval le = L.eval(p);
    PoincareCartan pc;
    pc.theta = {le.L - p.y.dot(le.Ly), le.Ly, Eigen::VectorXd::Zero(idx(n))};
    pc.Omega = assemble_omega(an, st, le, p.y, xi0);
    pc.phi0 = ProlongCovector::phi0(n);
    return pc;
}

Eigen::MatrixXd flat_L(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p) {
    Eigen::MatrixXd M = poincare_cartan(model, L, p).Omega.transpose();
    M(0, 0) += 1.0;
    return M;
}

ProlongVector sharp_Lambda(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                           const ProlongCovector& alpha, double cond_tol) {
    LagrangianState s = lagrangian_state(model, L, p, cond_tol);
    return ProlongVector::from_flat(s.sharp(alpha.flat()), model.n());
}

Eigen::VectorXd LagrangianState::sharp(const Eigen::VectorXd& alpha) const {
    Eigen::VectorXd R = el.R.flat();
    return -flat_inverse(alpha) + alpha.dot(R) * R;
}

LagrangianState lagrangian_state(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                 double cond_tol) {
    model.check_point(p);
    LagrangianState s;
    s.p = p;
    s.anchor = eval_anchor(model, p.x);
    s.structure = eval_structure(model, p.x);
    s.le = L.eval(p);
    CheckedInverse inv = checked_inverse(s.le.W, cond_tol);
    s.w_condition = inv.condition;
    if (!inv.regular)
        throw RegularityError("Lagrangian is not regular at this point (cond(W) = " + std::to_string(inv.condition) +
                              ")");
    s.Winv = inv.inverse;
    s.el.xi = el_acceleration(s.anchor, s.structure, s.le, p.y, s.Winv);
    s.el.field.resize(p.x.size() + p.y.size());
    s.el.field << s.anchor.rho0 + s.anchor.rho * p.y, s.el.xi;
    s.el.R = {1.0, p.y, s.el.xi};
    s.Omega = assemble_omega(s.anchor, s.structure, s.le, p.y, Eigen::VectorXd::Zero(p.y.size()));
    Eigen::MatrixXd M = s.Omega.transpose();
    M(0, 0) += 1.0;
    s.flat_lu.compute(M);
    double rc = s.flat_lu.rcond();
    s.flat_condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(s.flat_condition <= cond_tol))
        throw RegularityError("flat_L is singular at this point (cond = " + std::to_string(s.flat_condition) + ")");
    return s;
}

}  // namespace affgebroid
