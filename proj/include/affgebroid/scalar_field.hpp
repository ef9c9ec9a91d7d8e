#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affgebroid/expr.hpp"

namespace affgebroid {

/// A smooth real function of `arity` coordinates.
///
/// Expression fields are differentiated exactly with dual numbers. Callback
/// fields either supply their own gradient or fall back to central
/// differences; Hessians of callbacks are always central differences.
class ScalarField {
public:
    using ValueFn = std::function<double(const Eigen::VectorXd&)>;
    using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    ScalarField() : ScalarField(constant(0, 0.0)) {}

    static ScalarField constant(std::size_t arity, double c);
    static ScalarField expression(std::size_t arity, const Expr& e);
    static ScalarField parse(const std::string& text, const std::vector<std::string>& names,
                             const std::map<std::string, double>& constants = {});
    static ScalarField callback(std::size_t arity, ValueFn f);
    static ScalarField callback(std::size_t arity, ValueFn f, GradientFn g);

    std::size_t arity() const;
    bool is_constant() const;
    /// Returns nullptr unless the field is expression-backed.
    const Expr* expr() const;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

private:
    struct Impl;
    explicit ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    void check_arity(const Eigen::VectorXd& x) const;
    std::shared_ptr<const Impl> impl_;
};

/// Central-difference step used for first derivatives of callback fields.
inline double fd_step_first(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }
/// Step used for second derivatives, eps^(1/3) scaled.
double fd_step_second(double x);

}  // namespace affgebroid
