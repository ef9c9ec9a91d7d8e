#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affgebroid/nonholonomic.hpp"

namespace affgebroid {

struct BallParameters {
    double m = 1.0;
    double r = 1.0;
    double k2 = 0.4;
};

/// Homogeneous sphere rolling without slipping on a table rotating with
/// angular velocity Omega(t). Base (t, x, y), fiber (xdot, ydot, wx, wy, wz).
/// `Omega` is a field of arity 1 in t.
ConstrainedSystem rolling_ball(double m, double r, double k2, const ScalarField& Omega);

/// The default table speed 1 + 0.5 sin t.
ScalarField default_table_speed();

/// Closed-form fiber accelerations of the ball at an on-constraint state.
Eigen::VectorXd ball_reference_accelerations(const BallParameters& bp, double Omega, double dOmega,
                                             const PhasePoint& p);

/// Linear nonholonomic system on a Lie algebroid, seen as an affgebroid whose
/// e_0 sector is inert. Rejects models with nonzero rho_0 or C_0 and
/// constraints with nonzero mu_0.
ConstrainedSystem linear_on_algebroid(std::shared_ptr<const AffgebroidModel> algebroid, Lagrangian L,
                                      ConstraintSet U, std::string name = "linear");

/// The ball with Omega = 0 rebuilt on its underlying Lie algebroid over (x, y).
ConstrainedSystem ball_on_algebroid(double m, double r, double k2);

/// Rigid body on so(3) (inertia I1, I2, I3) constrained to w3 = 0. The base is
/// a single inert coordinate s.
ConstrainedSystem euler_top(double I1, double I2, double I3);

/// Model of the first jet bundle of R x Q -> R with base (t, q^1..q^k) and
/// fiber (v^1..v^k).
std::shared_ptr<AffgebroidModel> jet_bundle_model(std::size_t k);

/// Time-dependent system on the jet bundle. `L` has arity 1 + 2k over
/// (t, q, v); constraint fields have arity 1 + k over (t, q).
ConstrainedSystem jet_bundle_system(std::size_t k, const ScalarField& L, std::vector<ScalarField> mu0,
                                    std::vector<std::vector<ScalarField>> mu, std::string name = "jet");

/// Two-dimensional demo: L = |v|^2/2 - |q|^2/2 with -0.5 cos t + v1 + q1 v2 = 0.
ConstrainedSystem jet_demo();

struct FreeSystem {
    std::shared_ptr<const AffgebroidModel> model;
    Lagrangian L;
};

/// Abelian m = n = 1 model with rho = 1 and L = y^2/2 - x^2/2.
FreeSystem harmonic_oscillator();

struct SystemDescriptor {
    std::string name;
    std::map<std::string, double> parameters;
    std::function<ConstrainedSystem()> build;
    /// Closed-form fiber accelerations at on-constraint states, when known.
    std::function<std::optional<Eigen::VectorXd>(const PhasePoint&)> reference_accelerations;
};

/// Catalog entries by name: "ball", "linear", "jet". `expressions` may carry
/// "Omega" (a formula in t) for the ball.
SystemDescriptor catalog_entry(const std::string& name, const std::map<std::string, double>& parameters = {},
                               const std::map<std::string, std::string>& expressions = {});
std::vector<std::string> catalog_names();

}  // namespace affgebroid
