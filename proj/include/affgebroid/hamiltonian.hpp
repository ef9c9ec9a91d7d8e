#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/nonholonomic.hpp"

namespace affgebroid {

struct MomentumPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd p;
};

/// Value and first derivatives of a function on V*.
struct MomentumFunctionEval {
    double f = 0.0;
    Eigen::VectorXd fx;
    Eigen::VectorXd fp;
};
using MomentumFunction = std::function<MomentumFunctionEval(const MomentumPoint&)>;

/// Wraps a field over the m + n coordinates (x, p).
MomentumFunction momentum_function(const ScalarField& f, std::size_t m);

struct HamiltonianEval {
    double H = 0.0;
    Eigen::VectorXd Hx;
    Eigen::VectorXd Hp;
    Eigen::MatrixXd Hpp;  // d2H/dp dp
    Eigen::MatrixXd Hxp;  // (i, a) -> d2H/dx^i dp_a
};

struct NewtonOptions {
    /// Residual |dL/dy - p| relative to max(1, |p|).
    double tol = 1e-12;
    int max_iter = 50;
};

class HamiltonianData {
public:
    enum class Provenance { Legendre, User };
    using Fn = std::function<HamiltonianEval(const MomentumPoint&)>;

    HamiltonianData(std::size_t m, std::size_t n, Fn fn, Provenance prov);

    /// User-supplied H given as a field over (x, p).
    static HamiltonianData from_field(std::size_t m, std::size_t n, const ScalarField& f);

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    Provenance provenance() const { return prov_; }
    HamiltonianEval eval(const MomentumPoint& q) const;
    MomentumFunction function() const;

private:
    std::size_t m_;
    std::size_t n_;
    Fn fn_;
    Provenance prov_;
};

struct LegendreImage {
    MomentumPoint momentum;
    double extended0 = 0.0;  // L - y dL/dy
};

LegendreImage legendre_forward(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p);
/// Newton on dL/dy(x, y) = p. Throws HyperregularityError on failure.
PhasePoint legendre_inverse(const AffgebroidModel& model, const Lagrangian& L, const MomentumPoint& q,
                            const NewtonOptions& opt = {});
HamiltonianData hamiltonian_from_lagrangian(std::shared_ptr<const AffgebroidModel> model, Lagrangian L,
                                            NewtonOptions opt = {});

/// (xdot, pdot) of the free Hamilton equations.
Eigen::VectorXd hamilton_field(const AffgebroidModel& model, const HamiltonianData& H, const MomentumPoint& q);

/// Tangent Legendre map on the prolongation: (z0, z, v) -> (z0, z, dp).
Eigen::VectorXd tangent_legendre(const AffgebroidModel& model, const Lagrangian& L, const PhasePoint& p,
                                 const ProlongVector& X);

/// psi^a(x, p) = Psi^a(x, dH/dp) with derivatives.
class HamiltonianConstraintSet {
public:
    struct Eval {
        Eigen::VectorXd psi;  // r
        Eigen::MatrixXd psi_x;  // r x m
        Eigen::MatrixXd psi_p;  // r x n
        Eigen::MatrixXd mu;     // mu(x), r x n
    };

    HamiltonianConstraintSet(const ConstrainedSystem& sys, HamiltonianData H);
    std::size_t r() const { return constraints_.r(); }
    Eval eval(const MomentumPoint& q) const;
    Eval eval(const MomentumPoint& q, const HamiltonianEval& he) const;
    /// psi^a as a function on V*.
    MomentumFunction function(std::size_t a) const;

private:
    ConstraintSet constraints_;
    HamiltonianData H_;
};

HamiltonianConstraintSet hamiltonian_constraints(const ConstrainedSystem& sys, const HamiltonianData& H);

/// Gauss-Newton with minimal-norm steps in p until |psi| <= tol; x is
/// unchanged. Throws RegularityError when it does not converge.
MomentumPoint project_momentum_to_constraint(const HamiltonianConstraintSet& hc, const MomentumPoint& q,
                                             double tol = 1e-12, int max_iter = 50);

struct HamiltonianCompatibility {
    Eigen::MatrixXd Cbar;                  // r x r
    std::optional<Eigen::MatrixXd> Cbar_inv;
    bool regular = false;
    double condition = 0.0;
    Eigen::MatrixXd Zbar;                  // n x r, fiber (dp) components
};

HamiltonianCompatibility hamiltonian_compatibility(const ConstrainedSystem& sys, const HamiltonianData& H,
                                                   const MomentumPoint& q);

struct ConstrainedHamiltonDynamics {
    Eigen::VectorXd lambda_bar;
    Eigen::VectorXd field;  // (xdot, pdot)
};

ConstrainedHamiltonDynamics constrained_hamilton_dynamics(const ConstrainedSystem& sys, const HamiltonianData& H,
                                                          const MomentumPoint& q);

/// Linear Poisson bracket on V*:
/// rho^i_a (f_x g_p - f_p g_x) - C^g_{ab} p_g f_{p_a} g_{p_b}.
double poisson_bracket_h(const AffgebroidModel& model, const MomentumPoint& q, const MomentumFunction& f,
                         const MomentumFunction& g);
/// Affine part rho^i_0 f_x + C^g_{0a} p_g f_{p_a}; df/dt = {f, H} + affine_term(f).
double affine_term(const AffgebroidModel& model, const MomentumPoint& q, const MomentumFunction& f);

/// The nonholonomic bracket of two extensions H1, H2 evaluated at q.
double nonholonomic_bracket(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                            const MomentumFunction& H1, const MomentumFunction& H2);
double nonholonomic_bracket(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                            const HamiltonianData& H1, const HamiltonianData& H2);

/// Rate of change of f along the constrained Hamilton flow, from the bracket.
double evolution_rate(const ConstrainedSystem& sys, const HamiltonianData& H, const MomentumPoint& q,
                      const MomentumFunction& f);

}  // namespace affgebroid
