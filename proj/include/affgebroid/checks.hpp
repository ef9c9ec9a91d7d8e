#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affgebroid/config.hpp"

namespace affgebroid {

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

/// Invariant suite over `samples` seeded on-constraint states: structure
/// identities, regularity, defining equations of R_L and R_nh, projector
/// algebra, agreement of the projection routes, Legendre round trip and the
/// bracket properties. Closed-form accelerations are compared when known.
std::vector<CheckResult> run_invariant_suite(const SystemConfig& cfg, std::uint64_t seed, std::size_t samples);

/// Random quadratic function of (x, p): 0.5 z^T A z + b^T z with A symmetric.
MomentumFunction random_quadratic(std::size_t m, std::size_t n, std::mt19937_64& rng);

/// f + sum_a c_a psi^a as a function on V*.
MomentumFunction shifted_extension(const MomentumFunction& f, const HamiltonianConstraintSet& hc,
                                   const Eigen::VectorXd& c);

/// f + g.
MomentumFunction sum(const MomentumFunction& f, const MomentumFunction& g);

}  // namespace affgebroid
