#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/linalg.hpp"
#include "affgebroid/model.hpp"

namespace affgebroid {

struct LagrangianEval {
    double L = 0.0;
    Eigen::VectorXd Lx;   // dL/dx^i
    Eigen::VectorXd Ly;   // dL/dy^a
    Eigen::MatrixXd W;    // d2L/dy^a dy^b, symmetrized
    Eigen::MatrixXd Lxy;  // (i, a) -> d2L/dx^i dy^a
};

/// L(x, y) as a field over the m + n coordinates (x first, then y).
class Lagrangian {
public:
    Lagrangian(std::size_t m, std::size_t n, ScalarField field);

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    const ScalarField& field() const { return field_; }

    double value(const PhasePoint& p) const;
    /// Value and gradient only; W and Lxy are left empty.
    LagrangianEval first_order(const PhasePoint& p) const;
    LagrangianEval eval(const PhasePoint& p) const;

private:
    Eigen::VectorXd stack(const PhasePoint& p) const;
    std::size_t m_;
    std::size_t n_;
    ScalarField field_;
};

/// Element of the prolongation fiber in the basis (T0, T_a, V_a).
struct ProlongVector {
    double z0 = 0.0;
    Eigen::VectorXd z;
    Eigen::VectorXd v;

    Eigen::VectorXd flat() const;
    static ProlongVector from_flat(const Eigen::VectorXd& f, std::size_t n);
    static ProlongVector zero(std::size_t n);
};

/// Element of the dual fiber in the basis (phi0, T^a, V^a).
struct ProlongCovector {
    double a0 = 0.0;
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    Eigen::VectorXd flat() const;
    static ProlongCovector from_flat(const Eigen::VectorXd& f, std::size_t n);
    static ProlongCovector zero(std::size_t n);
    static ProlongCovector phi0(std::size_t n);
    double operator()(const ProlongVector& X) const;
};

ProlongVector vertical_endomorphism(const PhasePoint& p, const ProlongVector& X);
ProlongCovector vertical_endomorphism_dual(const PhasePoint& p, const ProlongCovector& alpha);
/// Matrix of S acting on flat vectors.
Eigen::MatrixXd vertical_endomorphism_matrix(const PhasePoint& p);

struct Regularity {
    bool regular = false;
    double condition = 0.0;
    Eigen::MatrixXd W;
    std::optional<Eigen::MatrixXd> Winv;
};

Regularity lagrangian_regularity(const Lagrangian& L, const PhasePoint& p, double cond_tol = kDefaultCondTol);

struct EulerLagrangeSection {
    Eigen::VectorXd xi;     // fiber accelerations
    Eigen::VectorXd field;  // (xdot, ydot), length m + n
    ProlongVector R;        // (1, y, xi)
};

EulerLagrangeSection euler_lagrange_section(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                            double cond_tol = kDefaultCondTol);

/// d/dt(dL/dy) - rho^i_a dL/dx^i - (C^g_{0a} + C^g_{ba} y^b) dL/dy^g with the time
/// derivative expanded by the chain rule along an admissible curve.
std::vector<Eigen::VectorXd> euler_lagrange_residual(const AffgebroidModel& model, const Lagrangian& L,
                                                     const std::vector<std::pair<double, PhasePoint>>& samples,
                                                     const std::vector<Eigen::VectorXd>& ydot);

struct PoincareCartan {
    ProlongCovector theta;
    /// Omega(j, k) = Omega_L(e_j, e_k) in the flat basis.
    Eigen::MatrixXd Omega;
    ProlongCovector phi0;
};

/// `sode_xi0` is the fiber part of the auxiliary SODE; zero when absent.
PoincareCartan poincare_cartan(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                               const std::optional<Eigen::VectorXd>& sode_xi0 = std::nullopt);

/// Matrix of X -> i_X Omega_L + phi0(X) phi0 acting on flat vectors.
Eigen::MatrixXd flat_L(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p);

ProlongVector sharp_Lambda(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                           const ProlongCovector& alpha, double cond_tol = kDefaultCondTol);

/// Everything the constrained and Hamiltonian layers need at one phase point,
/// computed once.
struct LagrangianState {
    PhasePoint p;
    Anchor anchor;
    Structure structure;
    LagrangianEval le;
    Eigen::MatrixXd Winv;
    double w_condition = 0.0;
    EulerLagrangeSection el;
    Eigen::MatrixXd Omega;
    Eigen::PartialPivLU<Eigen::MatrixXd> flat_lu;
    double flat_condition = 0.0;

    std::size_t n() const { return static_cast<std::size_t>(p.y.size()); }
    /// Inverse of flat_L applied to a flat covector.
    Eigen::VectorXd flat_inverse(const Eigen::VectorXd& alpha) const { return flat_lu.solve(alpha); }
    /// i_X Omega_L as a flat covector.
    Eigen::VectorXd contract(const Eigen::VectorXd& X) const { return Omega.transpose() * X; }
    Eigen::VectorXd sharp(const Eigen::VectorXd& alpha) const;
};

/// Throws RegularityError if W or flat_L is singular at p.
LagrangianState lagrangian_state(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                 double cond_tol = kDefaultCondTol);

}  // namespace affgebroid
