#include <random>

#include <doctest.h>

#include "affgebroid/integrator.hpp"
#include "oracles.hpp"

using namespace affgebroid;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double inf(const MatrixXd& m) { return m.lpNorm<Eigen::Infinity>(); }

ScalarField zero(std::size_t m) { return ScalarField::constant(m, 0.0); }
ScalarField one(std::size_t m) { return ScalarField::constant(m, 1.0); }

// Two-dimensional fiber over x with W = diag(1, -1) and the constraint a + b = 0:
// the constraint directions are W-null, so C vanishes.
ConstrainedSystem indefinite_system() {
    auto model = std::make_shared<AffgebroidModel>(std::vector<std::string>{"x"}, std::vector<std::string>{"a", "b"});
    model->set_rho(0, 0, one(1));
    Lagrangian L(1, 2, ScalarField::parse("0.5*a^2 - 0.5*b^2", {"x", "a", "b"}));
    ConstraintSet cs(1, 2, {zero(1)}, {{one(1), one(1)}});
    return ConstrainedSystem(model, L, cs);
}

std::vector<ConstrainedSystem> catalog() {
    std::vector<ConstrainedSystem> out;
    for (const auto& name : catalog_names()) out.push_back(catalog_entry(name).build());
    return out;
}

}  // namespace

TEST_SUITE("nonholonomic") {
TEST_CASE("constraint sets are validated") {
    CHECK_THROWS_AS(ConstraintSet(1, 1, {zero(1), zero(1)}, {{one(1)}, {one(1)}}), InputError);
    CHECK_THROWS_AS(ConstraintSet(1, 2, {zero(1), zero(1)}, {{one(1), zero(1)}, {one(1), zero(1)}}), InputError);
    CHECK_THROWS_AS(ConstraintSet(1, 2, {zero(2)}, {{one(1), zero(1)}}), InputError);
    ConstraintSet ok(1, 2, {zero(1)}, {{one(1), ScalarField::parse("x", {"x"})}});
    CHECK(ok.linear());
    CHECK(ok.r() == 1);
}

TEST_CASE("ball reaction basis and compatibility matrix") {
    const double m = 1.7, r = 0.6, k2 = 0.3;
    ConstrainedSystem ball = rolling_ball(m, r, k2, default_table_speed());
    oracle::Ball b{m, r, k2};
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        PhasePoint p = oracle::ball_state(b, rng);
        CHECK(on_constraint(ball, p));
        std::vector<ProlongVector> Z = reaction_basis(ball, p);
        REQUIRE(Z.size() == 2);
        VectorXd z1 = VectorXd::Zero(5), z2 = VectorXd::Zero(5);
        z1[0] = -1.0 / m;
        z1[3] = r / k2;
        z2[1] = -1.0 / m;
        z2[2] = -r / k2;
        CHECK(Z[0].z0 == 0.0);
        CHECK(Z[0].z.norm() == 0.0);
        CHECK(inf(Z[0].v - z1) <= 1e-14);
        CHECK(inf(Z[1].v - z2) <= 1e-14);
        Compatibility C = compatibility_matrix(ball, p);
        CHECK(C.regular);
        CHECK(inf(C.C + (1.0 / m + r * r / k2) * MatrixXd::Identity(2, 2)) <= 1e-12);
        CHECK(transversality_check(ball, p).transversal);
    }
}

TEST_CASE("ball accelerations match the closed form") {
    ConstrainedSystem ball = rolling_ball(1, 1, 0.4, default_table_speed());
    oracle::Ball b;
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        PhasePoint p = oracle::ball_state(b, rng);
        ConstrainedDynamics d = constrained_dynamics(ball, p);
        CHECK(d.on_constraint);
        CHECK(inf(d.R_nh.v - oracle::ball_accelerations(b, p)) <= 1e-12);
        CHECK(d.R_nh.z0 == 1.0);
        CHECK(d.R_nh.z == p.y);
    }
}

TEST_CASE("multiplier solution agrees with a saddle-point solve") {
    std::mt19937_64 rng(21);
    for (const ConstrainedSystem& sys : catalog()) {
        for (int trial = 0; trial < 30; ++trial) {
            PhasePoint p = sample_on_constraint(sys, rng);
            auto [xi, lambda] = oracle::kkt(sys, p);
            ConstrainedDynamics d = constrained_dynamics(sys, p);
            CHECK(inf(d.R_nh.v - xi) <= 1e-10);
            CHECK(inf(d.lambda - lambda) <= 1e-10);
        }
    }
}

TEST_CASE("projectors") {
    std::mt19937_64 rng(3);
    for (const ConstrainedSystem& sys : catalog()) {
        for (int trial = 0; trial < 20; ++trial) {
            PhasePoint p = sample_on_constraint(sys, rng);
            ConstrainedState s = constrained_state(sys, p);
            const VectorXd R = s.ls.el.R.flat();
            const auto N = R.size();
            AffineProjector P = projector_affine(sys, p);
            MatrixXd Pc = projector_cosymplectic(sys, p), Pp = projector_poisson(sys, p);
            for (const MatrixXd* M : {&P.P, &Pc, &Pp}) {
                CHECK(inf(*M * R - s.R_nh) <= 1e-10);
                CHECK(inf(*M * *M - *M) <= 1e-10);
                // Vectors tangent to the constraints are left alone.
                CHECK(inf(*M * s.R_nh - s.R_nh) <= 1e-10);
            }
            CHECK(inf(P.P + P.Q - MatrixXd::Identity(N, N)) <= 1e-14);
            CHECK(inf(P.P * s.Z) <= 1e-10);
            CHECK(inf(s.dPsi * P.P) <= 1e-10);
        }
    }
}

TEST_CASE("constrained section satisfies its defining equations") {
    ConstrainedSystem ball = rolling_ball(1, 1, 0.4, default_table_speed());
    oracle::Ball b;
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        PhasePoint p = oracle::ball_state(b, rng);
        ConstrainedState s = constrained_state(ball, p);
        // i_R Omega_L = lambda_a S*(dPsi^a); S*(dPsi^a) = mu^a_b (T^b - y^b phi0).
        MatrixXd span = MatrixXd::Zero(11, 2);
        span.row(0) = -(s.mu * p.y).transpose();
        span.block(1, 0, 5, 2) = s.mu.transpose();
        VectorXd iR = s.ls.contract(s.R_nh);
        CHECK(span_residual(span, iR) <= 1e-12);
        CHECK(inf(s.dPsi * s.R_nh) <= 1e-12);
        MatrixXd w = constrained_two_section(ball, p);
        CHECK(inf(w + w.transpose()) <= 1e-14);
        CHECK(inf(w.transpose() * s.R_nh) <= 1e-12);
    }
}

TEST_CASE("jet constraint prescribing a velocity") {
    ConstrainedSystem jet = jet_bundle_system(2, ScalarField::parse("0.5*v1^2 + 0.5*v2^2 - 0.5*q2^2", {"t", "q1", "q2", "v1", "v2"}),
                                              {ScalarField::parse("-sin(t)", {"t", "q1", "q2"})},
                                              {{one(3), zero(3)}});
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        PhasePoint p = sample_on_constraint(jet, rng);
        CHECK(p.y[0] == doctest::Approx(std::sin(p.x[0])));
        ConstrainedDynamics d = constrained_dynamics(jet, p);
        CHECK(d.R_nh.v[0] == doctest::Approx(std::cos(p.x[0])).epsilon(1e-12));
        CHECK(d.R_nh.v[1] == doctest::Approx(-p.x[2]).epsilon(1e-12));
    }
}

TEST_CASE("constrained Euler top") {
    const double I1 = 1.0, I2 = 2.0, I3 = 3.5;
    ConstrainedSystem top = euler_top(I1, I2, I3);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        PhasePoint p = sample_on_constraint(top, rng);
        CHECK(std::abs(p.y[2]) <= 1e-15);
        ConstrainedDynamics d = constrained_dynamics(top, p);
        // With w3 = 0 the free torques on w1 and w2 vanish and the reaction holds w3 = 0.
        CHECK(inf(d.R_nh.v) <= 1e-12);
        CHECK(std::abs(d.lambda[0]) == doctest::Approx(std::abs((I1 - I2) * p.y[0] * p.y[1])));
        CHECK(d.R_nh.z0 == 1.0);
        CHECK(projector_affine(top, p).P(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("singular compatibility is detected") {
    ConstrainedSystem sys = indefinite_system();
    CHECK_FALSE(sys.diagnostics().regular);
    CHECK_THROWS_AS(sys.require_regular(), RegularityError);
    PhasePoint p{VectorXd::Constant(1, 0.2), VectorXd(2)};
    p.y << 0.5, -0.5;
    Compatibility C = compatibility_matrix(sys, p);
    CHECK_FALSE(C.regular);
    CHECK(std::abs(C.C(0, 0)) <= 1e-15);
    CHECK_FALSE(transversality_check(sys, p).transversal);
    CHECK_THROWS_AS(constrained_state(sys, p), RegularityError);
    CHECK_THROWS_AS(constrained_dynamics(sys, p), RegularityError);
}

TEST_CASE("off-constraint states are flagged") {
    ConstrainedSystem ball = rolling_ball(1, 1, 0.4, default_table_speed());
    PhasePoint p{VectorXd::Zero(3), VectorXd::Ones(5)};
    CHECK_FALSE(on_constraint(ball, p));
    CHECK_FALSE(constrained_dynamics(ball, p).on_constraint);
    PhasePoint q = project_to_constraint(ball, p);
    CHECK(on_constraint(ball, q));
    CHECK(q.x == p.x);
}

TEST_CASE("sampling solves for constrained coordinates") {
    std::mt19937_64 rng(77);
    for (const ConstrainedSystem& sys : catalog())
        for (int trial = 0; trial < 20; ++trial)
            CHECK(inf(constraint_values(sys, sample_on_constraint(sys, rng))) <= 1e-12);
}
}
