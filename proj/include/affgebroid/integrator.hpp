#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/hamiltonian.hpp"

namespace affgebroid {

enum class Method { RK4, RK45 };

const char* method_name(Method m);
Method parse_method(const std::string& s);

/// Autonomous field on the stacked state (x, y) or (x, p). A time coordinate,
/// when the system has one, is just another base coordinate.
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct IntegrateOptions {
    Method method = Method::RK4;
    double atol = 1e-9;
    double rtol = 1e-9;
    /// Applied to the state after every accepted step when set.
    std::function<void(Eigen::VectorXd&)> post_step;
    /// Per-state drift measure recorded in the trajectory when set.
    std::function<double(const Eigen::VectorXd&)> drift;
    std::string system_id;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> drift;
    double step = 0.0;
    Method method = Method::RK4;
    std::string system_id;
};

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double t0, double t1, double step,
                     const IntegrateOptions& opt = {});

Eigen::VectorXd stack(const PhasePoint& p);
Eigen::VectorXd stack(const MomentumPoint& q);
PhasePoint unstack_phase(const Eigen::VectorXd& s, std::size_t m);
MomentumPoint unstack_momentum(const Eigen::VectorXd& s, std::size_t m);

VectorField free_lagrangian_field(std::shared_ptr<const AffgebroidModel> model, Lagrangian L,
                                  double cond_tol = kDefaultCondTol);
VectorField constrained_lagrangian_field(std::shared_ptr<const ConstrainedSystem> sys);
VectorField free_hamiltonian_field(std::shared_ptr<const AffgebroidModel> model, HamiltonianData H);
VectorField constrained_hamiltonian_field(std::shared_ptr<const ConstrainedSystem> sys, HamiltonianData H);

struct DriftReport {
    double max_drift = 0.0;
    std::vector<double> per_step;
};

/// max_a |Psi^a| at every state of a Lagrangian trajectory.
DriftReport drift_report(const ConstrainedSystem& sys, const Trajectory& traj);
/// max_a |psi^a| at every state of a Hamiltonian trajectory.
DriftReport drift_report(const ConstrainedSystem& sys, const HamiltonianData& H, const Trajectory& traj);

/// Minimal-norm fiber correction onto the constraint set; x is unchanged.
PhasePoint project_to_constraint(const ConstrainedSystem& sys, const PhasePoint& p);

}  // namespace affgebroid
