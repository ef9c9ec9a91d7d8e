#include "affgebroid/linalg.hpp"

#include <cmath>
#include <limits>

namespace affgebroid {

double condition_number(const Eigen::MatrixXd& a) {
    if (a.size() == 0 || !a.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    double rc = lu.rcond();
    if (!(rc > 0.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / rc;
}

CheckedInverse checked_inverse(const Eigen::MatrixXd& a, double cond_tol) {
    CheckedInverse out;
    if (a.size() == 0 || !a.allFinite()) {
        out.condition = std::numeric_limits<double>::infinity();
        return out;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    double rc = lu.rcond();
    out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    out.regular = out.condition <= cond_tol;
    if (out.regular) out.inverse = lu.inverse();
    return out;
}

double span_residual(const Eigen::MatrixXd& b, const Eigen::VectorXd& v) {
    if (b.cols() == 0) return v.norm();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b);
    Eigen::VectorXd c = cod.solve(v);
    return (b * c - v).norm();
}

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    return cod.solve(rhs);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
    if (a.size() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(rel_tol);
    return qr.rank();
}

}  // namespace affgebroid
