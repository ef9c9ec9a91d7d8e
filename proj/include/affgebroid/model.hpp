#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/scalar_field.hpp"

namespace affgebroid {

using BasePoint = Eigen::VectorXd;

struct PhasePoint {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

struct Anchor {
    Eigen::VectorXd rho0;  // rho0[i] = rho^i_0
    Eigen::MatrixXd rho;   // rho(i, a) = rho^i_a
};

/// Structure functions at a point: c0(g, a) = C^g_{0a}, c[g](a, b) = C^g_{ab}.
struct Structure {
    Eigen::MatrixXd c0;
    std::vector<Eigen::MatrixXd> c;
};

/// A Lie affgebroid in local coordinates x^i (base) and y^a (affine fiber).
///
/// Every component defaults to zero. Set components before sharing the model;
/// evaluation is const and thread-safe. The lower indices of C^g_{ab} are kept
/// antisymmetric by storing only a < b.
class AffgebroidModel {
public:
    AffgebroidModel(std::vector<std::string> base_names, std::vector<std::string> fiber_names);

    std::size_t m() const { return base_names_.size(); }
    std::size_t n() const { return fiber_names_.size(); }
    const std::vector<std::string>& base_names() const { return base_names_; }
    const std::vector<std::string>& fiber_names() const { return fiber_names_; }

    void set_rho0(std::size_t i, ScalarField f);
    void set_rho(std::size_t i, std::size_t a, ScalarField f);
    void set_c0(std::size_t g, std::size_t a, ScalarField f);
    /// Sets C^g_{ab}; C^g_{ba} becomes its negative. a == b is rejected.
    void set_c(std::size_t g, std::size_t a, std::size_t b, ScalarField f);

    const ScalarField& rho0_field(std::size_t i) const { return rho0_[i]; }
    const ScalarField& rho_field(std::size_t i, std::size_t a) const { return rho_[i * n() + a]; }
    const ScalarField& c0_field(std::size_t g, std::size_t a) const { return c0_[g * n() + a]; }
    /// Stored field for a < b.
    const ScalarField& c_field(std::size_t g, std::size_t a, std::size_t b) const {
        return c_[(g * n() + a) * n() + b];
    }

    /// True when no component depends on x.
    bool constant_structure() const;
    /// True when rho^i_0 and C^g_{0a} vanish identically.
    bool trivial_affine_part() const;

    void check_point(const BasePoint& x) const;
    void check_point(const PhasePoint& p) const;

private:
    void check_field(const ScalarField& f) const;
    std::vector<std::string> base_names_;
    std::vector<std::string> fiber_names_;
    std::vector<ScalarField> rho0_;
    std::vector<ScalarField> rho_;
    std::vector<ScalarField> c0_;
    std::vector<ScalarField> c_;
};

Anchor eval_anchor(const AffgebroidModel& model, const BasePoint& x);
Structure eval_structure(const AffgebroidModel& model, const BasePoint& x);

struct StructureIdentityReport {
    bool pass = false;
    double tol = 0.0;
    double anchor_residual = 0.0;
    double cyclic_residual = 0.0;
    double max_residual = 0.0;
    /// max of both residuals at each point
    std::vector<double> per_point;
};

/// Samples the anchor-bracket compatibility and the cyclic identity with the
/// basis index running over {0, 1..n} and C^0 = 0.
StructureIdentityReport check_structure_identities(const AffgebroidModel& model,
                                                   const std::vector<BasePoint>& points, double tol);

/// xdot_k - rho_0(x_k) - rho(x_k) y_k for each sample.
std::vector<Eigen::VectorXd> admissibility_residual(const AffgebroidModel& model,
                                                    const std::vector<std::pair<double, PhasePoint>>& samples,
                                                    const std::vector<Eigen::VectorXd>& xdot);

}  // namespace affgebroid
