#include "affgebroid/nonholonomic.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace affgebroid {

namespace {

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

std::vector<BasePoint> default_probe_points(std::size_t m) {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<BasePoint> pts;
    for (int k = 0; k < 8; ++k) {
        BasePoint x(idx(m));
        for (auto& v : x) v = u(rng);
        pts.push_back(x);
    }
    return pts;
}

// Columns of the best-conditioned r x r minor of mu.
std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& mu) {
    const Eigen::Index r = mu.rows(), n = mu.cols();
    double combos = 1.0;
    for (Eigen::Index k = 0; k < r; ++k) combos = combos * double(n - k) / double(k + 1);
    std::vector<Eigen::Index> best;
    if (combos <= 5000.0) {
        double best_cond = std::numeric_limits<double>::infinity();
        std::vector<Eigen::Index> cols(static_cast<std::size_t>(r));
        for (Eigen::Index k = 0; k < r; ++k) cols[k] = k;
        for (;;) {
            Eigen::MatrixXd minor(r, r);
            for (Eigen::Index k = 0; k < r; ++k) minor.col(k) = mu.col(cols[k]);
            double c = condition_number(minor);
            if (c < best_cond) {
                best_cond = c;
                best = cols;
            }
            Eigen::Index k = r - 1;
            while (k >= 0 && cols[k] == n - r + k) --k;
            if (k < 0) break;
            ++cols[k];
            for (Eigen::Index j = k + 1; j < r; ++j) cols[j] = cols[j - 1] + 1;
        }
        if (!std::isfinite(best_cond)) throw InputError("constraint matrix is rank deficient at this point");
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mu);
        if (qr.rank() < r) throw InputError("constraint matrix is rank deficient at this point");
        for (Eigen::Index k = 0; k < r; ++k) best.push_back(qr.colsPermutation().indices()[k]);
    }
    return best;
}

Eigen::VectorXd flat_differential(const Anchor& an, const Eigen::VectorXd& grad_x, const Eigen::VectorXd& grad_y) {
    const Eigen::Index n = grad_y.size();
    Eigen::VectorXd d(2 * n + 1);
    d << an.rho0.dot(grad_x), an.rho.transpose() * grad_x, grad_y;
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------

ConstraintSet::ConstraintSet(std::size_t m, std::size_t n, std::vector<ScalarField> mu0,
                             std::vector<std::vector<ScalarField>> mu, const std::vector<BasePoint>& rank_points)
    : m_(m), n_(n), mu0_(std::move(mu0)), mu_(std::move(mu)) {
    const std::size_t r = mu0_.size();
    if (r == 0) throw InputError("constraint set needs at least one constraint");
    if (r > n) throw InputError("constraint set has r = " + std::to_string(r) + " > n = " + std::to_string(n));
    if (mu_.size() != r) throw InputError("mu must have one row per constraint");
    for (std::size_t a = 0; a < r; ++a) {
        if (mu0_[a].arity() != m) throw InputError("mu0 field has wrong arity");
        if (mu_[a].size() != n) throw InputError("mu row has wrong length");
        for (const auto& f : mu_[a])
            if (f.arity() != m) throw InputError("mu field has wrong arity");
    }
    const std::vector<BasePoint> pts = rank_points.empty() ? default_probe_points(m) : rank_points;
    for (const BasePoint& x : pts) {
        Eigen::MatrixXd M = this->mu(x);
        if (numerical_rank(M) < idx(r))
            throw InputError("constraint matrix (mu^a_b) does not have full row rank " + std::to_string(r) +
                             " at a sampled base point");
    }
}

bool ConstraintSet::linear() const {
    const Eigen::VectorXd probe = Eigen::VectorXd::Zero(idx(m_));
    for (const auto& f : mu0_)
        if (!f.is_constant() || f.value(probe) != 0.0) return false;
    return true;
}

Eigen::VectorXd ConstraintSet::mu0(const BasePoint& x) const {
    Eigen::VectorXd v(idx(r()));
    for (std::size_t a = 0; a < r(); ++a) v[idx(a)] = mu0_[a].value(x);
    return v;
}

Eigen::MatrixXd ConstraintSet::mu(const BasePoint& x) const {
    Eigen::MatrixXd M(idx(r()), idx(n_));
    for (std::size_t a = 0; a < r(); ++a)
        for (std::size_t b = 0; b < n_; ++b) M(idx(a), idx(b)) = mu_[a][b].value(x);
    return M;
}

ConstraintSet::Eval ConstraintSet::eval(const BasePoint& x, bool with_derivatives) const {
    if (static_cast<std::size_t>(x.size()) != m_) throw InputError("base point has wrong dimension");
    Eval e;
    e.mu0 = mu0(x);
    e.mu = mu(x);
    if (!with_derivatives) return e;
    const Eigen::Index r = idx(this->r()), m = idx(m_);
    e.dmu0 = Eigen::MatrixXd::Zero(r, m);
    e.dmu.assign(n_, Eigen::MatrixXd::Zero(r, m));
    for (std::size_t a = 0; a < this->r(); ++a) {
        if (!mu0_[a].is_constant()) e.dmu0.row(idx(a)) = mu0_[a].gradient(x).transpose();
        for (std::size_t b = 0; b < n_; ++b)
            if (!mu_[a][b].is_constant()) e.dmu[b].row(idx(a)) = mu_[a][b].gradient(x).transpose();
    }
    return e;
}

Eigen::VectorXd ConstraintSet::values(const PhasePoint& p) const {
    if (static_cast<std::size_t>(p.y.size()) != n_) throw InputError("phase point has wrong fiber dimension");
    return mu0(p.x) + mu(p.x) * p.y;
}

// ---------------------------------------------------------------------------

ConstrainedSystem::ConstrainedSystem(std::shared_ptr<const AffgebroidModel> model, Lagrangian L,
                                     ConstraintSet constraints, Tolerances tol, std::string name,
                                     std::optional<std::size_t> time_index)
    : model_(std::move(model)),
      L_(std::move(L)),
      constraints_(std::move(constraints)),
      tol_(tol),
      name_(std::move(name)),
      time_index_(time_index) {
    if (!model_) throw InputError("constrained system needs a model");
    if (L_.m() != model_->m() || L_.n() != model_->n()) throw InputError("Lagrangian dimensions do not match model");
    if (constraints_.m() != model_->m() || constraints_.n() != model_->n())
        throw InputError("constraint dimensions do not match model");
    if (time_index_ && *time_index_ >= model_->m()) throw InputError("time index out of range");

    std::mt19937_64 rng(0x5eedULL);
    diag_.regular = true;
    for (int k = 0; k < 8; ++k) {
        ++diag_.sampled;
        try {
            PhasePoint p = sample_on_constraint(*this, rng);
            Regularity reg = lagrangian_regularity(L_, p, tol_.cond_tol);
            diag_.max_w_condition = std::max(diag_.max_w_condition, reg.condition);
            if (!reg.regular) {
                diag_.regular = false;
                continue;
            }
            Eigen::MatrixXd mu = constraints_.mu(p.x);
            Eigen::MatrixXd C = -mu * *reg.Winv * mu.transpose();
            double cc = condition_number(C);
            diag_.max_c_condition = std::max(diag_.max_c_condition, cc);
            if (!(cc <= tol_.cond_tol)) diag_.regular = false;
        } catch (const Error&) {
            diag_.regular = false;
        }
    }
}

void ConstrainedSystem::require_regular() const {
    if (!diag_.regular)
        throw RegularityError("system '" + name_ + "' is not regular on sampled constraint points (max cond W = " +
                              std::to_string(diag_.max_w_condition) +
                              ", max cond C = " + std::to_string(diag_.max_c_condition) + ")");
}

PhasePoint solve_on_constraint(const ConstrainedSystem& sys, const BasePoint& x, const Eigen::VectorXd& y0) {
    sys.model().check_point(x);
    if (y0.size() != idx(sys.model().n())) throw InputError("seed fiber vector has wrong length");
    Eigen::MatrixXd mu = sys.constraints().mu(x);
    Eigen::VectorXd mu0 = sys.constraints().mu0(x);
    std::vector<Eigen::Index> dep = dependent_columns(mu);
    const Eigen::Index r = mu.rows();
    Eigen::MatrixXd minor(r, r);
    Eigen::VectorXd y = y0;
    for (Eigen::Index k = 0; k < r; ++k) {
        minor.col(k) = mu.col(dep[static_cast<std::size_t>(k)]);
        y[dep[static_cast<std::size_t>(k)]] = 0.0;
    }
    Eigen::VectorXd rhs = -mu0 - mu * y;
    Eigen::VectorXd yd = minor.partialPivLu().solve(rhs);
    for (Eigen::Index k = 0; k < r; ++k) y[dep[static_cast<std::size_t>(k)]] = yd[k];
    return {x, y};
}

PhasePoint sample_on_constraint(const ConstrainedSystem& sys, std::mt19937_64& rng, double box) {
    std::uniform_real_distribution<double> u(-box, box);
    BasePoint x(idx(sys.model().m()));
    for (auto& v : x) v = u(rng);
    Eigen::VectorXd y(idx(sys.model().n()));
    for (auto& v : y) v = u(rng);
    return solve_on_constraint(sys, x, y);
}

Eigen::VectorXd constraint_values(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    return sys.constraints().values(p);
}

bool on_constraint(const ConstrainedSystem& sys, const PhasePoint& p) {
    return constraint_values(sys, p).lpNorm<Eigen::Infinity>() <= sys.tolerances().on_constraint_tol;
}

namespace {

// dPsi rows at p.
Eigen::MatrixXd differential_rows(const ConstraintSet::Eval& ce, const Anchor& an, const Eigen::VectorXd& y) {
    const Eigen::Index r = ce.mu.rows(), n = ce.mu.cols();
    Eigen::MatrixXd G = ce.dmu0;  // r x m, d mu0 + y^b d mu_b
    for (Eigen::Index b = 0; b < n; ++b) G += y[b] * ce.dmu[static_cast<std::size_t>(b)];
    Eigen::MatrixXd D(r, 2 * n + 1);
    for (Eigen::Index a = 0; a < r; ++a)
        D.row(a) = flat_differential(an, G.row(a).transpose(), ce.mu.row(a).transpose()).transpose();
    return D;
}

Eigen::MatrixXd reaction_columns(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& Winv) {
    const Eigen::Index r = mu.rows(), n = mu.cols();
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2 * n + 1, r);
    Z.bottomRows(n) = -Winv * mu.transpose();
    return Z;
}

}  // namespace

std::vector<ProlongCovector> constraint_differential(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    Anchor an = eval_anchor(sys.model(), p.x);
    Eigen::MatrixXd D = differential_rows(sys.constraints().eval(p.x), an, p.y);
    std::vector<ProlongCovector> out;
    for (Eigen::Index a = 0; a < D.rows(); ++a)
        out.push_back(ProlongCovector::from_flat(D.row(a).transpose(), sys.model().n()));
    return out;
}

std::vector<ProlongVector> reaction_basis(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    Regularity reg = lagrangian_regularity(sys.lagrangian(), p, sys.tolerances().cond_tol);
    if (!reg.regular) throw RegularityError("Lagrangian is not regular at this point");
    Eigen::MatrixXd Z = reaction_columns(sys.constraints().mu(p.x), *reg.Winv);
    std::vector<ProlongVector> out;
    for (Eigen::Index a = 0; a < Z.cols(); ++a) out.push_back(ProlongVector::from_flat(Z.col(a), sys.model().n()));
    return out;
}

Compatibility compatibility_matrix(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    Regularity reg = lagrangian_regularity(sys.lagrangian(), p, sys.tolerances().cond_tol);
    if (!reg.regular) throw RegularityError("Lagrangian is not regular at this point");
    Eigen::MatrixXd mu = sys.constraints().mu(p.x);
    Compatibility c;
    c.C = -mu * *reg.Winv * mu.transpose();
    CheckedInverse inv = checked_inverse(c.C, sys.tolerances().cond_tol);
    c.regular = inv.regular;
    c.condition = inv.condition;
    if (inv.regular) c.Cinv = inv.inverse;
    return c;
}

ConstrainedState constrained_state(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s;
    s.ls = lagrangian_state(sys.model(), sys.lagrangian(), p, sys.tolerances().cond_tol);
    ConstraintSet::Eval ce = sys.constraints().eval(p.x);
    s.mu = ce.mu;
    s.psi = ce.mu0 + ce.mu * p.y;
    s.dPsi = differential_rows(ce, s.ls.anchor, p.y);
    s.Z = reaction_columns(ce.mu, s.ls.Winv);
    s.C = s.dPsi * s.Z;
    s.C = 0.5 * (s.C + s.C.transpose()).eval();
    CheckedInverse inv = checked_inverse(s.C, sys.tolerances().cond_tol);
    s.c_condition = inv.condition;
    if (!inv.regular)
        throw RegularityError("compatibility matrix is singular at this point (cond = " +
                              std::to_string(inv.condition) + ")");
    s.Cinv = inv.inverse;
    const Eigen::VectorXd R = s.ls.el.R.flat();
    s.lambda = -s.Cinv * (s.dPsi * R);
    s.R_nh = R + s.Z * s.lambda;
    return s;
}

Eigen::MatrixXd ConstrainedState::grad_psi() const {
    Eigen::MatrixXd G(dPsi.cols(), dPsi.rows());
    for (Eigen::Index a = 0; a < dPsi.rows(); ++a) G.col(a) = ls.flat_inverse(dPsi.row(a).transpose());
    return G;
}

Eigen::MatrixXd ConstrainedState::hamiltonian_psi() const {
    Eigen::MatrixXd X(dPsi.cols(), dPsi.rows());
    for (Eigen::Index a = 0; a < dPsi.rows(); ++a) X.col(a) = -ls.sharp(dPsi.row(a).transpose());
    return X;
}

Eigen::MatrixXd ConstrainedState::sdual_dpsi() const {
    return dPsi * vertical_endomorphism_matrix(ls.p);
}

ConstrainedDynamics constrained_dynamics(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s = constrained_state(sys, p);
    ConstrainedDynamics d;
    d.on_constraint = s.psi.lpNorm<Eigen::Infinity>() <= sys.tolerances().on_constraint_tol;
    if (!d.on_constraint)
        spdlog::warn("constrained dynamics evaluated off the constraint set (max |Psi| = {:.3e})",
                     s.psi.lpNorm<Eigen::Infinity>());
    d.lambda = s.lambda;
    d.R_nh = ProlongVector::from_flat(s.R_nh, sys.model().n());
    d.field.resize(p.x.size() + p.y.size());
    d.field << s.ls.anchor.rho0 + s.ls.anchor.rho * p.y, d.R_nh.v;
    return d;
}

AffineProjector projector_affine(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s = constrained_state(sys, p);
    const Eigen::Index N = s.dPsi.cols();
    AffineProjector out;
    out.Q = s.Z * s.Cinv * s.dPsi;
    out.P = Eigen::MatrixXd::Identity(N, N) - out.Q;
    return out;
}

Eigen::MatrixXd projector_cosymplectic(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s = constrained_state(sys, p);
    const Eigen::Index N = s.dPsi.cols();
    const Eigen::MatrixXd grad = s.grad_psi();
    const Eigen::MatrixXd Sd = s.sdual_dpsi();
    // G(b, d) = {Psi^b, Psi^d}_L + dPsi^b(R_L) dPsi^d(R_L) = dPsi^b(grad Psi^d)
    const Eigen::MatrixXd G = s.dPsi * grad;
    return Eigen::MatrixXd::Identity(N, N) - s.Z * s.Cinv * G * s.Cinv * Sd + grad * s.Cinv * Sd -
           s.Z * s.Cinv * s.dPsi;
}

Eigen::MatrixXd projector_poisson(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s = constrained_state(sys, p);
    const Eigen::Index N = s.dPsi.cols();
    const Eigen::MatrixXd X = s.hamiltonian_psi();
    const Eigen::MatrixXd Sd = s.sdual_dpsi();
    // B(b, d) = {Psi^b, Psi^d}_L = -dPsi^d(X_b)
    const Eigen::MatrixXd B = -(s.dPsi * X).transpose();
    return Eigen::MatrixXd::Identity(N, N) - s.Z * s.Cinv * B * s.Cinv * Sd + X * s.Cinv * Sd -
           s.Z * s.Cinv * s.dPsi;
}

ProlongCovector function_differential(const AffgebroidModel& model, const PhasePoint& p, const ScalarField& f) {
    model.check_point(p);
    const Eigen::Index m = p.x.size(), n = p.y.size();
    if (f.arity() != static_cast<std::size_t>(m + n)) throw InputError("function on A must have arity m + n");
    Eigen::VectorXd z(m + n);
    z << p.x, p.y;
    Eigen::VectorXd g = f.gradient(z);
    Anchor an = eval_anchor(model, p.x);
    return ProlongCovector::from_flat(flat_differential(an, g.head(m), g.tail(n)), model.n());
}

BracketL bracket_L(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p, const ProlongCovector& df,
                   const ProlongCovector& dg, double cond_tol) {
    LagrangianState s = lagrangian_state(model, L, p, cond_tol);
    Eigen::VectorXd Xf = -s.sharp(df.flat());
    Eigen::VectorXd Xg = -s.sharp(dg.flat());
    BracketL b;
    b.value = -dg.flat().dot(Xf);
    b.via_omega = Xf.dot(s.Omega * Xg);
    return b;
}

BracketL bracket_L(const ConstrainedSystem& sys, const PhasePoint& p, const ScalarField& f, const ScalarField& g) {
    return bracket_L(sys.model(), sys.lagrangian(), p, function_differential(sys.model(), p, f),
                     function_differential(sys.model(), p, g), sys.tolerances().cond_tol);
}

Eigen::MatrixXd constrained_two_section(const ConstrainedSystem& sys, const PhasePoint& p) {
    ConstrainedState s = constrained_state(sys, p);
    const Eigen::VectorXd R = s.ls.el.R.flat();
    const Eigen::VectorXd QR = s.Z * (s.Cinv * (s.dPsi * R));
    const Eigen::VectorXd a = s.ls.contract(QR);
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(R.size());
    e0[0] = 1.0;
    return s.ls.Omega - (a * e0.transpose() - e0 * a.transpose());
}

Transversality transversality_check(const ConstrainedSystem& sys, const PhasePoint& p) {
    sys.model().check_point(p);
    Regularity reg = lagrangian_regularity(sys.lagrangian(), p, sys.tolerances().cond_tol);
    if (!reg.regular) throw RegularityError("Lagrangian is not regular at this point");
    Anchor an = eval_anchor(sys.model(), p.x);
    ConstraintSet::Eval ce = sys.constraints().eval(p.x);
    Eigen::MatrixXd D = differential_rows(ce, an, p.y);
    Eigen::MatrixXd Z = reaction_columns(ce.mu, *reg.Winv);
    for (Eigen::Index a = 0; a < Z.cols(); ++a) Z.col(a).normalize();
    const Eigen::Index N = D.cols(), r = D.rows();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    Eigen::MatrixXd M(N, N);
    M << Z, svd.matrixV().rightCols(N - r);
    Transversality t;
    t.condition = condition_number(M);
    t.transversal = t.condition <= sys.tolerances().cond_tol;
    return t;
}

}  // namespace affgebroid
