#pragma once

#include <Eigen/Dense>

namespace affgebroid {

inline constexpr double kDefaultCondTol = 1e12;

struct CheckedInverse {
    bool regular = false;
    /// Reciprocal of the LU condition estimate; +inf when the matrix is singular.
    double condition = 0.0;
    Eigen::MatrixXd inverse;
};

/// LU with partial pivoting. `inverse` is filled only when the estimated
/// 1-norm condition number is at most `cond_tol`.
CheckedInverse checked_inverse(const Eigen::MatrixXd& a, double cond_tol = kDefaultCondTol);

/// Estimated 1-norm condition number, +inf for singular or empty input.
double condition_number(const Eigen::MatrixXd& a);

/// Norm of v minus its least-squares projection onto the column span of b.
double span_residual(const Eigen::MatrixXd& b, const Eigen::VectorXd& v);

/// Minimal-norm solution of a x = rhs.
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs);

/// Numerical rank via column-pivoted QR with the given relative threshold.
Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

}  // namespace affgebroid
