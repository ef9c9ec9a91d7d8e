#include "affgebroid/scalar_field.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace affgebroid {

struct ScalarField::Impl {
    std::size_t arity = 0;
    std::optional<double> constant;
    std::optional<Expr> expr;
    std::optional<Tape> tape;
    ValueFn value;
    GradientFn gradient;
};

double fd_step_second(double x) {
    static const double h = std::cbrt(std::numeric_limits<double>::epsilon());
    return h * std::max(1.0, std::abs(x));
}

ScalarField ScalarField::constant(std::size_t arity, double c) {
    auto impl = std::make_shared<Impl>();
    impl->arity = arity;
    impl->constant = c;
    return ScalarField(std::move(impl));
}

ScalarField ScalarField::expression(std::size_t arity, const Expr& e) {
    if (e.arity_hint() > arity)
        throw InputError("expression uses variable index " + std::to_string(e.arity_hint() - 1) +
                         " but field arity is " + std::to_string(arity));
    if (e.is_constant()) return constant(arity, e.constant_value());
    auto impl = std::make_shared<Impl>();
    impl->arity = arity;
    impl->expr = e;
    impl->tape.emplace(e);
    return ScalarField(std::move(impl));
}

ScalarField ScalarField::parse(const std::string& text, const std::vector<std::string>& names,
                               const std::map<std::string, double>& constants) {
    return expression(names.size(), parse_expression(text, names, constants));
}

ScalarField ScalarField::callback(std::size_t arity, ValueFn f) {
    if (!f) throw InputError("callback field needs a value function");
    auto impl = std::make_shared<Impl>();
    impl->arity = arity;
    impl->value = std::move(f);
    return ScalarField(std::move(impl));
}

ScalarField ScalarField::callback(std::size_t arity, ValueFn f, GradientFn g) {
    if (!f || !g) throw InputError("callback field needs value and gradient functions");
    auto impl = std::make_shared<Impl>();
    impl->arity = arity;
    impl->value = std::move(f);
    impl->gradient = std::move(g);
    return ScalarField(std::move(impl));
}

std::size_t ScalarField::arity() const { return impl_->arity; }
bool ScalarField::is_constant() const { return impl_->constant.has_value(); }
const Expr* ScalarField::expr() const { return impl_->expr ? &*impl_->expr : nullptr; }

void ScalarField::check_arity(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != impl_->arity)
        throw InputError("field of arity " + std::to_string(impl_->arity) + " evaluated at a point of size " +
                         std::to_string(x.size()));
}

double ScalarField::value(const Eigen::VectorXd& x) const {
    check_arity(x);
    if (impl_->constant) return *impl_->constant;
    double v = impl_->tape ? impl_->tape->eval(x.data()) : impl_->value(x);
    if (!std::isfinite(v)) throw EvaluationError("field value is not finite");
    return v;
}

Eigen::VectorXd ScalarField::gradient(const Eigen::VectorXd& x) const {
    check_arity(x);
    const std::size_t m = impl_->arity;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    if (impl_->constant) return g;
    if (impl_->tape) {
        const Tape& tape = *impl_->tape;
        std::vector<Dual<double>> seed(m);
        for (std::size_t k = 0; k < m; ++k) seed[k] = Dual<double>(x[k], 0.0);
        for (std::size_t i = 0; i < tape.depends().size(); ++i) {
            if (!tape.depends()[i]) continue;
            seed[i].d = 1.0;
            g[i] = tape.eval(seed.data()).d;
            seed[i].d = 0.0;
        }
    } else if (impl_->gradient) {
        g = impl_->gradient(x);
        if (static_cast<std::size_t>(g.size()) != m) throw EvaluationError("callback gradient has wrong size");
    } else {
        Eigen::VectorXd xp = x;
        for (std::size_t i = 0; i < m; ++i) {
            double h = fd_step_first(x[i]);
            xp[i] = x[i] + h;
            double fp = impl_->value(xp);
            xp[i] = x[i] - h;
            double fm = impl_->value(xp);
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
    }
    if (!g.allFinite()) throw EvaluationError("field gradient is not finite");
    return g;
}

Eigen::MatrixXd ScalarField::hessian(const Eigen::VectorXd& x) const {
    check_arity(x);
    const std::size_t m = impl_->arity;
    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(mi, mi);
    if (impl_->constant) return h;
    if (impl_->tape) {
        using D2 = Dual<Dual<double>>;
        const Tape& tape = *impl_->tape;
        const auto& dep = tape.depends();
        std::vector<D2> seed(m);
        for (std::size_t k = 0; k < m; ++k) seed[k] = D2(Dual<double>(x[k], 0.0), Dual<double>(0.0, 0.0));
        for (std::size_t i = 0; i < dep.size(); ++i) {
            if (!dep[i]) continue;
            seed[i].v.d = 1.0;
            for (std::size_t j = i; j < dep.size(); ++j) {
                if (!dep[j]) continue;
                seed[j].d.v = 1.0;
                double hij = tape.eval(seed.data()).d.d;
                seed[j].d.v = 0.0;
                h(i, j) = hij;
                h(j, i) = hij;
            }
            seed[i].v.d = 0.0;
        }
    } else if (impl_->gradient) {
        Eigen::VectorXd xp = x;
        for (std::size_t j = 0; j < m; ++j) {
            double s = fd_step_second(x[j]);
            xp[j] = x[j] + s;
            Eigen::VectorXd gp = impl_->gradient(xp);
            xp[j] = x[j] - s;
            Eigen::VectorXd gm = impl_->gradient(xp);
            xp[j] = x[j];
            h.col(j) = (gp - gm) / (2.0 * s);
        }
        h = 0.5 * (h + h.transpose()).eval();
    } else {
        Eigen::VectorXd xp = x;
        const double f0 = impl_->value(x);
        for (std::size_t i = 0; i < m; ++i) {
            double si = fd_step_second(x[i]);
            xp[i] = x[i] + si;
            double fp = impl_->value(xp);
            xp[i] = x[i] - si;
            double fm = impl_->value(xp);
            xp[i] = x[i];
            h(i, i) = (fp - 2.0 * f0 + fm) / (si * si);
            for (std::size_t j = i + 1; j < m; ++j) {
                double sj = fd_step_second(x[j]);
                auto at = [&](double a, double b) {
                    xp[i] = x[i] + a;
                    xp[j] = x[j] + b;
                    double v = impl_->value(xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    return v;
                };
                double hij = (at(si, sj) - at(si, -sj) - at(-si, sj) + at(-si, -sj)) / (4.0 * si * sj);
                h(i, j) = hij;
                h(j, i) = hij;
            }
        }
    }
    if (!h.allFinite()) throw EvaluationError("field Hessian is not finite");
    return h;
}

}  // namespace affgebroid
