#include "affgebroid/catalog.hpp"

#include <algorithm>

namespace affgebroid {

namespace {

Expr var(std::size_t k) { return Expr::variable(k); }
Expr num(double c) { return Expr::constant(c); }

ScalarField constant(std::size_t arity, double c) { return ScalarField::constant(arity, c); }

// Omega(t) * coord, where t is base coordinate 0 of a 3-coordinate base.
ScalarField table_term(const ScalarField& Omega, double sign, std::size_t coord) {
    if (const Expr* e = Omega.expr()) return ScalarField::expression(3, num(sign) * *e * var(coord));
    if (Omega.is_constant()) {
        double w = Omega.value(Eigen::VectorXd::Zero(1));
        return ScalarField::expression(3, num(sign * w) * var(coord));
    }
    auto f = [Omega, sign, coord](const Eigen::VectorXd& x) {
        return sign * Omega.value(x.head(1)) * x[static_cast<Eigen::Index>(coord)];
    };
    auto g = [Omega, sign, coord](const Eigen::VectorXd& x) {
        Eigen::VectorXd t = x.head(1);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
        grad[0] = sign * Omega.gradient(t)[0] * x[static_cast<Eigen::Index>(coord)];
        grad[static_cast<Eigen::Index>(coord)] = sign * Omega.value(t);
        return grad;
    };
    return ScalarField::callback(3, f, g);
}

std::shared_ptr<AffgebroidModel> ball_model(bool with_time) {
    std::vector<std::string> base = with_time ? std::vector<std::string>{"t", "x", "y"}
                                              : std::vector<std::string>{"x", "y"};
    auto model = std::make_shared<AffgebroidModel>(base, std::vector<std::string>{"xdot", "ydot", "wx", "wy", "wz"});
    const std::size_t m = base.size();
    const std::size_t ix = with_time ? 1 : 0;
    if (with_time) model->set_rho0(0, constant(m, 1.0));
    model->set_rho(ix, 0, constant(m, 1.0));
    model->set_rho(ix + 1, 1, constant(m, 1.0));
    // [e_wy, e_wx] = e_wz, [e_wz, e_wy] = e_wx, [e_wx, e_wz] = e_wy
    model->set_c(4, 3, 2, constant(m, 1.0));
    model->set_c(2, 4, 3, constant(m, 1.0));
    model->set_c(3, 2, 4, constant(m, 1.0));
    return model;
}

ScalarField ball_lagrangian(std::size_t m, double mass, double k2) {
    Expr L = num(0.0);
    for (std::size_t a = 0; a < 5; ++a) L = L + num(0.5 * (a < 2 ? mass : k2)) * pow(var(m + a), num(2.0));
    return ScalarField::expression(m + 5, L);
}

std::vector<std::vector<ScalarField>> ball_mu(std::size_t m, double r) {
    std::vector<std::vector<ScalarField>> mu(2, std::vector<ScalarField>(5, constant(m, 0.0)));
    mu[0][0] = constant(m, 1.0);
    mu[0][3] = constant(m, -r);
    mu[1][1] = constant(m, 1.0);
    mu[1][2] = constant(m, r);
    return mu;
}

void check_ball(double m, double r, double k2) {
    if (!(m > 0.0) || !(r > 0.0) || !(k2 > 0.0))
        throw InputError("rolling ball needs positive m, r and k2");
}

}  // namespace

ScalarField default_table_speed() { return ScalarField::parse("1 + 0.5*sin(t)", {"t"}); }

ConstrainedSystem rolling_ball(double m, double r, double k2, const ScalarField& Omega) {
    check_ball(m, r, k2);
    if (Omega.arity() != 1) throw InputError("table speed must be a field of t alone");
    auto model = ball_model(true);
    Lagrangian L(3, 5, ball_lagrangian(3, m, k2));
    ConstraintSet cs(3, 5, {table_term(Omega, 1.0, 2), table_term(Omega, -1.0, 1)}, ball_mu(3, r));
    ConstrainedSystem sys(model, L, cs, {}, "ball", 0);
    sys.require_regular();
    return sys;
}

Eigen::VectorXd ball_reference_accelerations(const BallParameters& bp, double Omega, double dOmega,
                                             const PhasePoint& p) {
    const double x = p.x[1], y = p.x[2];
    const double xd = p.y[0], yd = p.y[1];
    const double den = bp.k2 + bp.m * bp.r * bp.r;
    const double A = dOmega * y + Omega * yd;
    const double B = dOmega * x + Omega * xd;
    Eigen::VectorXd acc(5);
    acc << -bp.k2 / den * A, bp.k2 / den * B, bp.m * bp.r / den * B, bp.m * bp.r / den * A, 0.0;
    return acc;
}

ConstrainedSystem linear_on_algebroid(std::shared_ptr<const AffgebroidModel> algebroid, Lagrangian L,
                                      ConstraintSet U, std::string name) {
    if (!algebroid->trivial_affine_part())
        throw InputError("linear_on_algebroid needs a model with vanishing rho_0 and C_0");
    if (!U.linear()) throw InputError("linear_on_algebroid needs linear constraints (mu_0 = 0)");
    ConstrainedSystem sys(std::move(algebroid), std::move(L), std::move(U), {}, std::move(name));
    sys.require_regular();
    return sys;
}

ConstrainedSystem ball_on_algebroid(double m, double r, double k2) {
    check_ball(m, r, k2);
    auto model = ball_model(false);
    Lagrangian L(2, 5, ball_lagrangian(2, m, k2));
    ConstraintSet cs(2, 5, {constant(2, 0.0), constant(2, 0.0)}, ball_mu(2, r));
    return linear_on_algebroid(model, L, cs, "ball-linear");
}

ConstrainedSystem euler_top(double I1, double I2, double I3) {
    if (!(I1 > 0.0) || !(I2 > 0.0) || !(I3 > 0.0)) throw InputError("Euler top needs positive inertia");
    auto model = std::make_shared<AffgebroidModel>(std::vector<std::string>{"s"},
                                                   std::vector<std::string>{"w1", "w2", "w3"});
    model->set_c(2, 0, 1, constant(1, 1.0));
    model->set_c(0, 1, 2, constant(1, 1.0));
    model->set_c(1, 2, 0, constant(1, 1.0));
    Expr L = num(0.5 * I1) * pow(var(1), num(2.0)) + num(0.5 * I2) * pow(var(2), num(2.0)) +
             num(0.5 * I3) * pow(var(3), num(2.0));
    Lagrangian lag(1, 3, ScalarField::expression(4, L));
    ConstraintSet cs(1, 3, {constant(1, 0.0)}, {{constant(1, 0.0), constant(1, 0.0), constant(1, 1.0)}});
    return linear_on_algebroid(model, lag, cs, "linear");
}

std::shared_ptr<AffgebroidModel> jet_bundle_model(std::size_t k) {
    if (k == 0) throw InputError("jet bundle needs at least one q coordinate");
    std::vector<std::string> base{"t"}, fiber;
    for (std::size_t a = 0; a < k; ++a) {
        base.push_back("q" + std::to_string(a + 1));
        fiber.push_back("v" + std::to_string(a + 1));
    }
    auto model = std::make_shared<AffgebroidModel>(base, fiber);
    model->set_rho0(0, constant(k + 1, 1.0));
    for (std::size_t a = 0; a < k; ++a) model->set_rho(a + 1, a, constant(k + 1, 1.0));
    return model;
}

ConstrainedSystem jet_bundle_system(std::size_t k, const ScalarField& L, std::vector<ScalarField> mu0,
                                    std::vector<std::vector<ScalarField>> mu, std::string name) {
    auto model = jet_bundle_model(k);
    Lagrangian lag(k + 1, k, L);
    ConstraintSet cs(k + 1, k, std::move(mu0), std::move(mu));
    ConstrainedSystem sys(model, lag, cs, {}, std::move(name), 0);
    sys.require_regular();
    return sys;
}

ConstrainedSystem jet_demo() {
    const std::vector<std::string> vars{"t", "q1", "q2", "v1", "v2"};
    const std::vector<std::string> base{"t", "q1", "q2"};
    ScalarField L = ScalarField::parse("0.5*(v1^2 + v2^2) - 0.5*(q1^2 + q2^2)", vars);
    return jet_bundle_system(2, L, {ScalarField::parse("-0.5*cos(t)", base)},
                             {{ScalarField::parse("1", base), ScalarField::parse("q1", base)}}, "jet");
}

FreeSystem harmonic_oscillator() {
    auto model = std::make_shared<AffgebroidModel>(std::vector<std::string>{"x"}, std::vector<std::string>{"y"});
    model->set_rho(0, 0, constant(1, 1.0));
    Lagrangian L(1, 1, ScalarField::parse("0.5*y^2 - 0.5*x^2", {"x", "y"}));
    return {model, L};
}

std::vector<std::string> catalog_names() { return {"ball", "linear", "jet"}; }

SystemDescriptor catalog_entry(const std::string& name, const std::map<std::string, double>& parameters,
                               const std::map<std::string, std::string>& expressions) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = parameters.find(key);
        return it == parameters.end() ? fallback : it->second;
    };
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : parameters)
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
                throw InputError("unknown parameter '" + k + "' for catalog system '" + name + "'");
    };
    SystemDescriptor d;
    d.name = name;
    if (name == "ball") {
        check_keys({"m", "r", "k2"});
        BallParameters bp{get("m", 1.0), get("r", 1.0), get("k2", 0.4)};
        for (const auto& [k, v] : expressions)
            if (k != "Omega") throw InputError("unknown expression '" + k + "' for catalog system 'ball'");
        ScalarField Omega = default_table_speed();
        if (auto it = expressions.find("Omega"); it != expressions.end())
            Omega = ScalarField::parse(it->second, {"t"});
        d.parameters = {{"m", bp.m}, {"r", bp.r}, {"k2", bp.k2}};
        d.build = [bp, Omega] { return rolling_ball(bp.m, bp.r, bp.k2, Omega); };
        d.reference_accelerations = [bp, Omega](const PhasePoint& p) -> std::optional<Eigen::VectorXd> {
            Eigen::VectorXd t = p.x.head(1);
            return ball_reference_accelerations(bp, Omega.value(t), Omega.gradient(t)[0], p);
        };
    } else if (name == "linear") {
        check_keys({"I1", "I2", "I3"});
        if (!expressions.empty()) throw InputError("catalog system 'linear' takes no expressions");
        double I1 = get("I1", 1.0), I2 = get("I2", 2.0), I3 = get("I3", 3.0);
        d.parameters = {{"I1", I1}, {"I2", I2}, {"I3", I3}};
        d.build = [I1, I2, I3] { return euler_top(I1, I2, I3); };
        d.reference_accelerations = [](const PhasePoint&) { return std::optional<Eigen::VectorXd>{}; };
    } else if (name == "jet") {
        check_keys({});
        if (!expressions.empty()) throw InputError("catalog system 'jet' takes no expressions");
        d.build = [] { return jet_demo(); };
        d.reference_accelerations = [](const PhasePoint&) { return std::optional<Eigen::VectorXd>{}; };
    } else {
        throw InputError("unknown catalog system '" + name + "' (expected ball, linear or jet)");
    }
    return d;
}

}  // namespace affgebroid
