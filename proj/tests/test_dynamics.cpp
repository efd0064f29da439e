#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "softarm/dynamics.hpp"
#include "softarm/optimizer.hpp"

using namespace softarm;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

RobotSpec spatial_robot(int segments, double mass = 17.3, int links = 6) {
    SegmentSpec seg;
    seg.rest_length = 64.4;
    seg.links = links;
    seg.dl_min = -0.2 * seg.rest_length;
    seg.dl_max = 0.5 * seg.rest_length;
    RobotSpec robot;
    robot.segments.assign(segments, seg);
    robot.masses.assign(segments, mass);
    robot.gravity = Vec3(0, 0, -9810.0);
    return robot;
}

RobotSpec planar_robot(int segments, double mass = 17.3) {
    auto robot = spatial_robot(segments, mass);
    for (auto& s : robot.segments) {
        s.planar = true;
        s.theta_min = -kPi;
        s.theta_max = kPi;
    }
    return robot;
}

VectorXd random_state(const RobotSpec& robot, std::mt19937& rng, double strain_amp = 0.3,
                      double curve_amp = 0.012) {
    std::uniform_real_distribution<double> eps(-strain_amp, strain_amp);
    std::uniform_real_distribution<double> k(-curve_amp, curve_amp);
    VectorXd q(state_dim(robot));
    const int vps = robot.planar() ? 2 : 3;
    for (int i = 0; i < robot.segment_count(); ++i) {
        q[vps * i] = eps(rng);
        q[vps * i + 1] = k(rng);
        if (!robot.planar()) q[vps * i + 2] = k(rng);
    }
    return q;
}

}  // namespace

TEST_CASE("state mapping: reference values") {
    auto robot = spatial_robot(1);

    SUBCASE("straight rest state maps to zero") {
        const VectorXd q = state_from_config(robot, straight_config(robot));
        CHECK(q.norm() == 0.0);
    }

    SUBCASE("pure y-plane bend at rest length") {
        robot.segments[0].rest_length = 100.0;
        ConfigVector cfg(1);
        cfg[0] = {0.0, kPi / 2.0, kPi / 2.0};
        const VectorXd q = state_from_config(robot, cfg);
        CHECK(q[0] == doctest::Approx(0.0));
        CHECK(std::abs(q[1]) < 1e-17);
        CHECK(q[2] == doctest::Approx(0.015707963267948967).epsilon(1e-12));
    }

    SUBCASE("extension plus bend") {
        ConfigVector cfg(1);
        cfg[0] = {35.6, kPi / 4.0, 0.0};
        const VectorXd q = state_from_config(robot, cfg);
        CHECK(q[0] == doctest::Approx(0.5527950310559007).epsilon(1e-12));
        CHECK(q[1] == doctest::Approx(0.007853981633974483).epsilon(1e-12));
        CHECK(q[2] == doctest::Approx(0.0));
    }
}

TEST_CASE("state mapping: round trip identity") {
    std::mt19937 rng(99);
    for (bool planar : {false, true}) {
        RobotSpec robot = planar ? planar_robot(3) : spatial_robot(3);
        for (int trial = 0; trial < 200; ++trial) {
            const VectorXd q = random_state(robot, rng);
            const VectorXd back = state_from_config(robot, config_from_state(robot, q));
            CHECK((back - q).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
    // Config -> state -> config as well, theta > 0 branch.
    auto robot = spatial_robot(2);
    ConfigVector cfg(2);
    cfg[0] = {10.0, 1.2, 0.7};
    cfg[1] = {-5.0, 0.4, -2.2};
    const auto back = config_from_state(robot, state_from_config(robot, cfg));
    for (int i = 0; i < 2; ++i) {
        CHECK(back[i].delta_l == doctest::Approx(cfg[i].delta_l).epsilon(1e-12));
        CHECK(back[i].theta == doctest::Approx(cfg[i].theta).epsilon(1e-12));
        CHECK(back[i].phi == doctest::Approx(cfg[i].phi).epsilon(1e-12));
    }
}

TEST_CASE("state mapping: strain domain errors") {
    auto robot = spatial_robot(1);
    VectorXd q = VectorXd::Zero(3);
    q[0] = -1.0;
    CHECK_THROWS_AS(config_from_state(robot, q), std::domain_error);
    ConfigVector cfg(1);
    cfg[0].delta_l = -robot.segments[0].rest_length;
    CHECK_THROWS_AS(state_from_config(robot, cfg), std::domain_error);
    CHECK_THROWS_AS(config_from_state(robot, VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("mass matrix: symmetric positive definite at random states") {
    std::mt19937 rng(123);
    for (bool planar : {false, true}) {
        RobotSpec robot = planar ? planar_robot(2) : spatial_robot(2);
        for (int trial = 0; trial < 20; ++trial) {
            const VectorXd q = random_state(robot, rng);
            const MatrixXd M = mass_matrix(robot, q);
            CHECK((M - M.transpose()).norm() <= 1e-12);
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("coriolis: zero velocity gives zero force, skew-symmetry holds") {
    std::mt19937 rng(321);
    auto robot = spatial_robot(2);
    const VectorXd q = random_state(robot, rng);

    SUBCASE("C qdot vanishes at qdot = 0") {
        const VectorXd zero = VectorXd::Zero(q.size());
        CHECK((coriolis_matrix(robot, q, zero) * zero).norm() == 0.0);
    }

    SUBCASE("dM/dt - 2C is skew-symmetric along random velocities") {
        // Quasi-static velocity scale; the defect bound is absolute in ||M||.
        std::uniform_real_distribution<double> vel(-0.008, 0.008);
        for (int trial = 0; trial < 5; ++trial) {
            VectorXd qdot(q.size());
            for (int i = 0; i < q.size(); ++i) qdot[i] = vel(rng);

            // Directional derivative of M along qdot by central differences.
            const double h = 3e-4;
            const MatrixXd Mp = mass_matrix(robot, q + h * qdot);
            const MatrixXd Mm = mass_matrix(robot, q - h * qdot);
            const MatrixXd Mdot = (Mp - Mm) / (2.0 * h);

            const MatrixXd C = coriolis_matrix(robot, q, qdot);
            const MatrixXd W = Mdot - 2.0 * C;
            const double defect = (W + W.transpose()).norm();
            CHECK(defect <= 1e-6 * mass_matrix(robot, q).norm());
        }
    }
}

TEST_CASE("gravity: symmetry at the straight state and gradient consistency") {
    auto robot = spatial_robot(2);

    SUBCASE("hanging straight: curvature components vanish") {
        const VectorXd q = VectorXd::Zero(state_dim(robot));
        const VectorXd g = gravity_vector(robot, q);
        CHECK(std::abs(g[1]) < 1e-9);
        CHECK(std::abs(g[2]) < 1e-9);
        CHECK(std::abs(g[4]) < 1e-9);
        CHECK(std::abs(g[5]) < 1e-9);
        CHECK(g[0] != 0.0);  // extension works against gravity
    }

    SUBCASE("G matches finite differences of the potential") {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            const VectorXd q = random_state(robot, rng);
            const VectorXd g = gravity_vector(robot, q);
            const VectorXd fd = fd_gradient(
                [&](const VectorXd& x) { return gravity_potential(robot, x); }, q, 1e-6);
            CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
        }
    }

    SUBCASE("zero gravity gives a zero vector") {
        robot.gravity = Vec3::Zero();
        std::mt19937 rng(1);
        const VectorXd q = random_state(robot, rng);
        CHECK(gravity_vector(robot, q).norm() == 0.0);
    }
}

TEST_CASE("elastic potential: rest state, density values and gradient consistency") {
    StiffnessParams params;

    SUBCASE("rest state is stress free") {
        auto robot = spatial_robot(2);
        const VectorXd q = VectorXd::Zero(state_dim(robot));
        CHECK(elastic_potential(robot, q, params) == 0.0);
        CHECK(stiffness_vector(robot, q, params).norm() == 0.0);
    }

    SUBCASE("closed form for constant densities") {
        // With a2 = a5 = 0 the densities are constant and the energy is
        // quadratic: a1 eps^2/2 + asym(beta, phi) a4 beta^2/2.
        StiffnessParams flat;
        flat.a2 = 0.0;
        flat.a5 = 0.0;
        auto robot = spatial_robot(1);
        VectorXd q(3);
        q << 0.2, 0.008, -0.003;
        const double l = 64.4 * 1.2;
        const double beta = l * std::hypot(0.008, -0.003);
        const double phi = std::atan2(-0.003, 0.008);
        const double asym = 0.5 * beta * (std::sin(3.0 * phi) + 1.0) + 1.0;
        const double expect = flat.a1 * 0.2 * 0.2 / 2.0 + asym * flat.a4 * beta * beta / 2.0;
        CHECK(elastic_potential(robot, q, flat) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("elongation density at zero strain is a1 - a2") {
        // Probe through the energy of a tiny strain interval:
        // U(eps) ~ (a1 - a2) eps^2 / 2 for eps -> 0.
        auto robot = spatial_robot(1);
        VectorXd q = VectorXd::Zero(3);
        q[0] = 1e-5;
        const double u = elastic_potential(robot, q, params);
        CHECK(u == doctest::Approx((params.a1 - params.a2) * 0.5 * 1e-10).epsilon(1e-4));
    }

    SUBCASE("K matches finite differences of U_e") {
        std::mt19937 rng(47);
        for (bool planar : {false, true}) {
            RobotSpec robot = planar ? planar_robot(2) : spatial_robot(2);
            for (int trial = 0; trial < 20; ++trial) {
                const VectorXd q = random_state(robot, rng);
                const VectorXd K = stiffness_vector(robot, q, params);
                const VectorXd fd = fd_gradient(
                    [&](const VectorXd& x) { return elastic_potential(robot, x, params); }, q,
                    1e-7);
                CHECK((K - fd).norm() <= 1e-6 * std::max(1.0, K.norm()));
            }
        }
    }
}

TEST_CASE("damping: linearity and passivity") {
    auto d = DampingParams::uniform(0.3, 4);
    CHECK(damping_vector(d, VectorXd::Zero(4)).norm() == 0.0);

    VectorXd e1 = VectorXd::Zero(4);
    e1[0] = 1.0;
    CHECK((damping_vector(d, e1) - 0.3 * e1).norm() == 0.0);

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> vel(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd qdot(4);
        for (int i = 0; i < 4; ++i) qdot[i] = vel(rng);
        CHECK(qdot.dot(damping_vector(d, qdot)) >= 0.0);
    }

    CHECK_THROWS_AS(damping_vector(d, VectorXd::Zero(3)), std::invalid_argument);
    DampingParams bad{VectorXd::Constant(4, -0.1)};
    CHECK_THROWS_AS(damping_vector(bad, VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("input mapping: trigonometry, rank and the printed-form defect") {
    ActuationParams params;  // defaults: h1 = 8e-4, h2 = 7.91e-7, erratum fix on

    SUBCASE("bellows angles for m = 3") {
        const MatrixXd H = input_mapping(params);
        REQUIRE(H.rows() == 3);
        REQUIRE(H.cols() == 3);
        // cos(gamma) = (1, -1/2, -1/2), sin(gamma) = (0, sqrt(3)/2, -sqrt(3)/2)
        CHECK(H(1, 0) == doctest::Approx(-params.h2).epsilon(1e-12));
        CHECK(H(1, 1) == doctest::Approx(params.h2 / 2.0).epsilon(1e-12));
        CHECK(H(1, 2) == doctest::Approx(params.h2 / 2.0).epsilon(1e-12));
        CHECK(H(2, 0) == doctest::Approx(0.0));
        CHECK(H(2, 1) == doctest::Approx(params.h2 * std::sqrt(3.0) / 2.0).epsilon(1e-12));
        CHECK(H(2, 2) == doctest::Approx(-params.h2 * std::sqrt(3.0) / 2.0).epsilon(1e-12));
    }

    SUBCASE("printed form: rows 2 and 3 cancel, rank <= 2") {
        ActuationParams printed = params;
        printed.erratum_fix = false;
        const MatrixXd H = input_mapping(printed);
        CHECK((H.row(1) + H.row(2)).norm() == 0.0);
        Eigen::JacobiSVD<MatrixXd> svd(H);
        CHECK(svd.singularValues()(2) <= 1e-12 * svd.singularValues()(0));
    }

    SUBCASE("fixed form has full rank and pure-elongation row sums") {
        const MatrixXd H = input_mapping(params);
        Eigen::JacobiSVD<MatrixXd> svd(H);
        CHECK(svd.singularValues()(2) > 1e-10 * svd.singularValues()(0));
        const Vector3d v = H * Vector3d::Ones();
        CHECK(v[0] == doctest::Approx(3.0 * params.h1).epsilon(1e-15));
        CHECK(std::abs(v[1]) < 1e-18);
        CHECK(std::abs(v[2]) < 1e-18);
    }

    SUBCASE("preconditions") {
        ActuationParams bad = params;
        bad.bellows = 2;
        CHECK_THROWS_AS(input_mapping(bad), std::invalid_argument);
        bad = params;
        bad.h1 = 0.0;
        CHECK_THROWS_AS(input_mapping(bad), std::invalid_argument);
    }
}

TEST_CASE("pressures_from_tau: exact solves, clamping, out-of-range reporting") {
    ActuationParams params;
    const MatrixXd H = input_mapping(params);

    SUBCASE("achievable torque solves exactly") {
        const Vector3d tau = H * Vector3d(10.0, 20.0, 30.0);
        auto sol = pressures_from_tau(H, tau, 400.0);
        CHECK(sol.clamped == 0);
        CHECK(sol.residual < 1e-12);
        CHECK((H * sol.pressures - tau).norm() < 1e-12);
    }

    SUBCASE("negative demands clamp to zero and report") {
        const Vector3d tau = H * Vector3d(-50.0, 10.0, 10.0);
        auto sol = pressures_from_tau(H, tau, 400.0);
        CHECK(sol.clamped > 0);
        CHECK(sol.residual > 0.0);
        CHECK((sol.pressures.array() >= 0.0).all());
        CHECK((sol.pressures.array() <= 400.0).all());
    }

    SUBCASE("minimum-norm solution for redundant bellows") {
        ActuationParams six = params;
        six.bellows = 6;
        const MatrixXd H6 = input_mapping(six);
        const Vector3d tau(1e-3, 1e-7, -2e-7);
        auto sol = pressures_from_tau(H6, tau, 1e9);
        CHECK((H6 * sol.pressures - tau).norm() < 1e-12);
        // Any feasible solution bounds the minimum norm from below.
        Eigen::VectorXd some = H6.transpose() * (H6 * H6.transpose()).ldlt().solve(tau);
        CHECK(sol.pressures.norm() <= some.norm() + 1e-9);
    }
}

TEST_CASE("step_dynamics: equilibrium, energy conservation and passivity") {
    // Light test arm so the elastic defaults give a few oscillations per
    // second: natural frequencies near 20-40 rad/s.
    auto robot = spatial_robot(1, 1e-5, 6);
    robot.gravity = Vec3::Zero();
    DynParams params;
    params.damping = DampingParams::uniform(0.0, 3);

    SUBCASE("rest state with zero torque stays put") {
        DynState s{VectorXd::Zero(3), VectorXd::Zero(3)};
        for (int i = 0; i < 10; ++i) {
            s = step_dynamics(robot, s, VectorXd::Zero(3), 1e-3, params);
        }
        CHECK(s.q.norm() == 0.0);
        CHECK(s.qdot.norm() == 0.0);
    }

    SUBCASE("undamped free oscillation conserves energy to 0.1% over 1 s") {
        DynState s{VectorXd::Zero(3), VectorXd::Zero(3)};
        s.q << 0.05, 0.004, -0.002;
        const double e0 = total_energy(robot, s, params.stiffness);
        REQUIRE(e0 > 0.0);
        double max_dev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            s = step_dynamics(robot, s, VectorXd::Zero(3), 1e-3, params);
            max_dev = std::max(max_dev,
                               std::abs(total_energy(robot, s, params.stiffness) - e0));
        }
        CHECK(max_dev <= 1e-3 * e0);
    }

    SUBCASE("damped energy is non-increasing") {
        DynParams damped = params;
        damped.damping = DampingParams::uniform(20.0, 3);
        DynState s{VectorXd::Zero(3), VectorXd::Zero(3)};
        s.q << 0.05, 0.004, -0.002;
        const double e0 = total_energy(robot, s, damped.stiffness);
        double prev = e0;
        for (int i = 0; i < 500; ++i) {
            s = step_dynamics(robot, s, VectorXd::Zero(3), 1e-3, damped);
            const double e = total_energy(robot, s, damped.stiffness);
            CHECK(e <= prev * (1.0 + 1e-9) + 1e-15);
            prev = e;
        }
        CHECK(prev < 0.9 * e0);  // damping actually dissipates
    }

    SUBCASE("dt validation") {
        DynState s{VectorXd::Zero(3), VectorXd::Zero(3)};
        CHECK_THROWS_AS(step_dynamics(robot, s, VectorXd::Zero(3), 0.0, params),
                        std::invalid_argument);
        CHECK_THROWS_AS(step_dynamics(robot, s, VectorXd::Zero(3), 0.02, params),
                        std::invalid_argument);
    }
}

TEST_CASE("step_dynamics: fourth-order convergence") {
    auto robot = spatial_robot(1, 1e-5, 4);
    robot.gravity = Vec3::Zero();
    DynParams params;
    params.damping = DampingParams::uniform(0.0, 3);

    DynState s0{VectorXd::Zero(3), VectorXd::Zero(3)};
    s0.q << 0.08, 0.006, 0.0;

    auto integrate = [&](double dt, int steps) {
        DynState s = s0;
        for (int i = 0; i < steps; ++i) {
            s = step_dynamics(robot, s, VectorXd::Zero(3), dt, params);
        }
        return s;
    };

    // Reference with a much finer step over the same 0.08 s horizon.
    const DynState ref = integrate(1e-4, 800);
    const DynState coarse = integrate(8e-3, 10);
    const DynState fine = integrate(4e-3, 20);

    const double err_coarse = (coarse.q - ref.q).norm() + (coarse.qdot - ref.qdot).norm();
    const double err_fine = (fine.q - ref.q).norm() + (fine.qdot - ref.qdot).norm();
    const double ratio = err_coarse / err_fine;
    CHECK(ratio > 8.0);   // ~16x for a 4th-order scheme
    CHECK(ratio < 40.0);
}

TEST_CASE("acceleration: dimension checks and failure reporting") {
    auto robot = spatial_robot(1);
    DynParams params;
    DynState s{VectorXd::Zero(3), VectorXd::Zero(3)};
    CHECK_THROWS_AS(acceleration(robot, {VectorXd::Zero(2), VectorXd::Zero(2)},
                                 VectorXd::Zero(2), params),
                    std::invalid_argument);
    CHECK_THROWS_AS(acceleration(robot, s, VectorXd::Zero(4), params), std::invalid_argument);

    // Non-finite torque must surface as an integration error with the state.
    VectorXd bad = VectorXd::Constant(3, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(acceleration(robot, s, bad, params), IntegrationError);
}
