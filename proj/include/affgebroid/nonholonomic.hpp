#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/lagrangian.hpp"

namespace affgebroid {

/// Affine constraints Psi^a = mu^a_0(x) + mu^a_b(x) y^b, a = 1..r.
class ConstraintSet {
public:
    struct Eval {
        Eigen::VectorXd mu0;               // r
        Eigen::MatrixXd mu;                // r x n
        Eigen::MatrixXd dmu0;              // r x m
        std::vector<Eigen::MatrixXd> dmu;  // dmu[b](a, i) = d mu^a_b / dx^i
    };

    /// `mu` is r rows of n fields. The row rank is checked at `rank_points`
    /// (or at a fixed set of sampled points in [-1, 1]^m when empty).
    ConstraintSet(std::size_t m, std::size_t n, std::vector<ScalarField> mu0,
                  std::vector<std::vector<ScalarField>> mu, const std::vector<BasePoint>& rank_points = {});

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    std::size_t r() const { return mu0_.size(); }
    const ScalarField& mu0_field(std::size_t a) const { return mu0_[a]; }
    const ScalarField& mu_field(std::size_t a, std::size_t b) const { return mu_[a][b]; }

    /// True when every mu^a_0 vanishes identically.
    bool linear() const;

    Eigen::VectorXd mu0(const BasePoint& x) const;
    Eigen::MatrixXd mu(const BasePoint& x) const;
    Eval eval(const BasePoint& x, bool with_derivatives = true) const;
    Eigen::VectorXd values(const PhasePoint& p) const;

private:
    std::size_t m_;
    std::size_t n_;
    std::vector<ScalarField> mu0_;
    std::vector<std::vector<ScalarField>> mu_;
};

struct Tolerances {
    double cond_tol = kDefaultCondTol;
    double on_constraint_tol = 1e-9;
};

struct RegularityDiagnostics {
    std::size_t sampled = 0;
    double max_w_condition = 0.0;
    double max_c_condition = 0.0;
    bool regular = false;
};

class ConstrainedSystem {
public:
    ConstrainedSystem(std::shared_ptr<const AffgebroidModel> model, Lagrangian L, ConstraintSet constraints,
                      Tolerances tol = {}, std::string name = {}, std::optional<std::size_t> time_index = {});

    const AffgebroidModel& model() const { return *model_; }
    std::shared_ptr<const AffgebroidModel> model_ptr() const { return model_; }
    const Lagrangian& lagrangian() const { return L_; }
    const ConstraintSet& constraints() const { return constraints_; }
    const Tolerances& tolerances() const { return tol_; }
    const std::string& name() const { return name_; }
    /// Base coordinate that plays the role of time, if any.
    std::optional<std::size_t> time_index() const { return time_index_; }
    /// W and C conditioning sampled on the constraint set at construction.
    const RegularityDiagnostics& diagnostics() const { return diag_; }
    /// Throws RegularityError unless the sampled diagnostics are regular.
    void require_regular() const;

private:
    std::shared_ptr<const AffgebroidModel> model_;
    Lagrangian L_;
    ConstraintSet constraints_;
    Tolerances tol_;
    std::string name_;
    std::optional<std::size_t> time_index_;
    RegularityDiagnostics diag_;
};

/// Draws x uniformly from [-box, box]^m and free fiber coordinates from
/// [-box, box], then solves the constraints for the r fiber coordinates of
/// the best-conditioned r x r minor of mu(x).
PhasePoint sample_on_constraint(const ConstrainedSystem& sys, std::mt19937_64& rng, double box = 1.0);
/// Same, at a given base point and free-coordinate seed vector y0.
PhasePoint solve_on_constraint(const ConstrainedSystem& sys, const BasePoint& x, const Eigen::VectorXd& y0);

Eigen::VectorXd constraint_values(const ConstrainedSystem& sys, const PhasePoint& p);
bool on_constraint(const ConstrainedSystem& sys, const PhasePoint& p);
std::vector<ProlongCovector> constraint_differential(const ConstrainedSystem& sys, const PhasePoint& p);
std::vector<ProlongVector> reaction_basis(const ConstrainedSystem& sys, const PhasePoint& p);

struct Compatibility {
    Eigen::MatrixXd C;
    std::optional<Eigen::MatrixXd> Cinv;
    bool regular = false;
    double condition = 0.0;
};
Compatibility compatibility_matrix(const ConstrainedSystem& sys, const PhasePoint& p);

struct ConstrainedDynamics {
    Eigen::VectorXd lambda;
    ProlongVector R_nh;
    Eigen::VectorXd field;  // (xdot, ydot)
    bool on_constraint = false;
};
/// Off the constraint set the same formulas are evaluated and a warning is logged.
ConstrainedDynamics constrained_dynamics(const ConstrainedSystem& sys, const PhasePoint& p);

struct AffineProjector {
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;
};
AffineProjector projector_affine(const ConstrainedSystem& sys, const PhasePoint& p);
Eigen::MatrixXd projector_cosymplectic(const ConstrainedSystem& sys, const PhasePoint& p);
Eigen::MatrixXd projector_poisson(const ConstrainedSystem& sys, const PhasePoint& p);

/// Flat covector d f for a function f on the m + n phase coordinates.
ProlongCovector function_differential(const AffgebroidModel& model, const PhasePoint& p, const ScalarField& f);

struct BracketL {
    double value = 0.0;       // -dg(X_f)
    double via_omega = 0.0;   // Omega_L(X_f, X_g)
};
BracketL bracket_L(const ConstrainedSystem& sys, const PhasePoint& p, const ScalarField& f, const ScalarField& g);
BracketL bracket_L(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p, const ProlongCovector& df,
                   const ProlongCovector& dg, double cond_tol = kDefaultCondTol);

Eigen::MatrixXd constrained_two_section(const ConstrainedSystem& sys, const PhasePoint& p);

/// Transversality: true when span{Z_a} meets ker dPsi only in 0,
/// decided from the rank of [Z | basis of ker dPsi] without forming C.
struct Transversality {
    bool transversal = false;
    double condition = 0.0;
};
Transversality transversality_check(const ConstrainedSystem& sys, const PhasePoint& p);

/// All constrained quantities at one phase point. Flat layout throughout;
/// dPsi has one covector per row, Z one vector per column.
struct ConstrainedState {
    LagrangianState ls;
    Eigen::VectorXd psi;
    Eigen::MatrixXd mu;     // r x n
    Eigen::MatrixXd dPsi;   // r x (2n+1)
    Eigen::MatrixXd Z;      // (2n+1) x r
    Eigen::MatrixXd C;      // r x r
    Eigen::MatrixXd Cinv;
    double c_condition = 0.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd R_nh;

    Eigen::MatrixXd grad_psi() const;      // columns flat_L^{-1} dPsi^a
    Eigen::MatrixXd hamiltonian_psi() const;  // columns X^Lambda_{Psi^a}
    Eigen::MatrixXd sdual_dpsi() const;    // rows S* dPsi^a
};

/// Throws RegularityError when W, flat_L or C is singular.
ConstrainedState constrained_state(const ConstrainedSystem& sys, const PhasePoint& p);

}  // namespace affgebroid
