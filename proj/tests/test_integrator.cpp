#include <cmath>
#include <random>

#include <doctest.h>

#include "affgebroid/integrator.hpp"
#include "oracles.hpp"

using namespace affgebroid;
using Eigen::VectorXd;

namespace {

double oscillator_error(Method method, double h) {
    FreeSystem osc = harmonic_oscillator();
    VectorField f = free_lagrangian_field(osc.model, osc.L);
    VectorXd x0(2);
    x0 << 1.0, 0.0;
    IntegrateOptions opt;
    opt.method = method;
    Trajectory tr = integrate(f, x0, 0.0, 2.0, h, opt);
    VectorXd exact(2);
    exact << std::cos(2.0), -std::sin(2.0);
    return (tr.states.back() - exact).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_SUITE("integrator") {
TEST_CASE("RK4 is fourth order") {
    const double e1 = oscillator_error(Method::RK4, 0.02);
    const double e2 = oscillator_error(Method::RK4, 0.01);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("RK45 meets its tolerance") {
    CHECK(oscillator_error(Method::RK45, 0.1) <= 1e-7);
}

TEST_CASE("trajectories end exactly at t1") {
    VectorField f = [](const VectorXd& x) { return VectorXd::Ones(x.size()); };
    for (Method method : {Method::RK4, Method::RK45}) {
        IntegrateOptions opt;
        opt.method = method;
        Trajectory tr = integrate(f, VectorXd::Zero(1), 0.0, 1.05, 0.1, opt);
        CHECK(tr.times.front() == 0.0);
        CHECK(tr.times.back() == 1.05);
        CHECK(tr.states.back()[0] == doctest::Approx(1.05));
        CHECK(std::is_sorted(tr.times.begin(), tr.times.end()));
    }
    Trajectory tr = integrate(f, VectorXd::Zero(1), 0.0, 1.0, 0.1);
    CHECK(tr.times.size() == 11);
    CHECK(tr.times.back() == 1.0);
    CHECK_THROWS_AS(integrate(f, VectorXd::Zero(1), 1.0, 0.0, 0.1), InputError);
    CHECK_THROWS_AS(integrate(f, VectorXd::Zero(1), 0.0, 1.0, 0.0), InputError);
    CHECK(parse_method("rk45") == Method::RK45);
    CHECK_THROWS_AS(parse_method("euler"), InputError);
}

TEST_CASE("non-finite derivatives stop with the last good state") {
    VectorField f = [](const VectorXd& x) {
        VectorXd d = VectorXd::Ones(1);
        if (x[0] > 0.5) d[0] = std::nan("");
        return d;
    };
    try {
        integrate(f, VectorXd::Zero(1), 0.0, 1.0, 0.1);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.last_state().allFinite());
        CHECK(e.last_state()[0] <= 0.5 + 1e-12);
        CHECK(e.last_time() == doctest::Approx(e.last_state()[0]));
    }
}

TEST_CASE("free particle is integrated exactly") {
    auto model = jet_bundle_model(1);
    Lagrangian L(2, 1, ScalarField::parse("0.5*v^2", {"t", "q", "v"}));
    VectorXd s0(3);
    s0 << 0.0, 1.0, -0.3;
    Trajectory tr = integrate(free_lagrangian_field(model, L), s0, 0.0, 4.0, 0.25);
    CHECK(tr.states.back()[0] == doctest::Approx(4.0));
    CHECK(tr.states.back()[1] == doctest::Approx(1.0 - 1.2));
    CHECK(tr.states.back()[2] == doctest::Approx(-0.3));
}

TEST_CASE("constrained Euler top keeps its constraint and energy") {
    auto top = std::make_shared<const ConstrainedSystem>(euler_top(1.0, 2.0, 3.0));
    std::mt19937_64 rng(6);
    PhasePoint p = sample_on_constraint(*top, rng);
    Trajectory tr = integrate(constrained_lagrangian_field(top), stack(p), 0.0, 10.0, 1e-2);
    CHECK(drift_report(*top, tr).max_drift <= 1e-10);
    const double E0 = top->lagrangian().value(p);
    for (const auto& s : tr.states)
        CHECK(top->lagrangian().value(unstack_phase(s, 1)) == doctest::Approx(E0).epsilon(1e-10));
}

TEST_CASE("ball on a still table equals the ball on its Lie algebroid") {
    auto timed = std::make_shared<const ConstrainedSystem>(rolling_ball(1.2, 0.8, 0.3, ScalarField::constant(1, 0.0)));
    auto plain = std::make_shared<const ConstrainedSystem>(ball_on_algebroid(1.2, 0.8, 0.3));
    std::mt19937_64 rng(19);
    PhasePoint p = sample_on_constraint(*plain, rng);
    PhasePoint q{VectorXd(3), p.y};
    q.x << 0.0, p.x[0], p.x[1];
    REQUIRE(on_constraint(*timed, q));
    Trajectory a = integrate(constrained_lagrangian_field(plain), stack(p), 0.0, 2.0, 1e-2);
    Trajectory b = integrate(constrained_lagrangian_field(timed), stack(q), 0.0, 2.0, 1e-2);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        CHECK((a.states[k] - b.states[k].tail(7)).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(b.states[k][0] == doctest::Approx(a.times[k]));
    }
}

TEST_CASE("ball trajectory keeps the constraint and spin") {
    auto ball = std::make_shared<const ConstrainedSystem>(rolling_ball(1, 1, 0.4, default_table_speed()));
    oracle::Ball ob;
    std::mt19937_64 rng(2);
    PhasePoint p = oracle::ball_state(ob, rng);
    IntegrateOptions opt;
    opt.drift = [&](const VectorXd& s) { return constraint_values(*ball, unstack_phase(s, 3)).lpNorm<Eigen::Infinity>(); };
    Trajectory tr = integrate(constrained_lagrangian_field(ball), stack(p), 0.0, 5.0, 1e-3, opt);
    CHECK(tr.drift.size() == tr.states.size());
    CHECK(*std::max_element(tr.drift.begin(), tr.drift.end()) <= 1e-8);
    for (const auto& s : tr.states) CHECK(std::abs(s[7] - p.y[4]) <= 1e-12);
}

TEST_CASE("projection after each step") {
    auto ball = std::make_shared<const ConstrainedSystem>(rolling_ball(1, 1, 0.4, default_table_speed()));
    std::mt19937_64 rng(3);
    PhasePoint p = sample_on_constraint(*ball, rng);
    IntegrateOptions opt;
    opt.post_step = [&](VectorXd& s) { s = stack(project_to_constraint(*ball, unstack_phase(s, 3))); };
    Trajectory tr = integrate(constrained_lagrangian_field(ball), stack(p), 0.0, 2.0, 0.05, opt);
    CHECK(drift_report(*ball, tr).max_drift <= 1e-12);
}

TEST_CASE("Hamiltonian and Lagrangian trajectories correspond") {
    auto jet = std::make_shared<const ConstrainedSystem>(jet_demo());
    HamiltonianData H = hamiltonian_from_lagrangian(jet->model_ptr(), jet->lagrangian());
    std::mt19937_64 rng(10);
    PhasePoint p = sample_on_constraint(*jet, rng);
    MomentumPoint q = legendre_forward(jet->model(), jet->lagrangian(), p).momentum;
    Trajectory tl = integrate(constrained_lagrangian_field(jet), stack(p), 0.0, 3.0, 1e-2);
    Trajectory th = integrate(constrained_hamiltonian_field(jet, H), stack(q), 0.0, 3.0, 1e-2);
    REQUIRE(tl.states.size() == th.states.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < tl.states.size(); ++k) {
        PhasePoint back = legendre_inverse(jet->model(), jet->lagrangian(), unstack_momentum(th.states[k], 3));
        worst = std::max(worst, (stack(back) - tl.states[k]).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst <= 1e-8);
    CHECK(drift_report(*jet, H, th).max_drift <= 1e-8);
}
}
