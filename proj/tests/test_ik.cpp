#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "softarm/ik.hpp"

using namespace softarm;

namespace {

constexpr double kPi = std::numbers::pi;

RobotSpec single_segment_robot() {
    SegmentSpec seg;
    seg.rest_length = 64.4;
    seg.links = 6;
    seg.dl_min = -0.2 * seg.rest_length;
    seg.dl_max = 0.5 * seg.rest_length;
    seg.theta_min = 0.0;
    seg.theta_max = kPi;
    RobotSpec robot;
    robot.segments = {seg};
    robot.masses = {17.3};
    return robot;
}

RobotSpec planar_robot(int segments) {
    SegmentSpec seg;
    seg.rest_length = 64.4;
    seg.links = 6;
    seg.dl_min = -0.2 * seg.rest_length;
    seg.dl_max = 0.5 * seg.rest_length;
    seg.theta_min = -kPi;
    seg.theta_max = kPi;
    seg.planar = true;
    RobotSpec robot;
    robot.segments.assign(segments, seg);
    robot.masses.assign(segments, 17.3);
    return robot;
}

}  // namespace

TEST_CASE("tip_angle_residual: arithmetic and planarity guard") {
    ConfigVector cfg(4);
    CHECK(tip_angle_residual(cfg, 0.0) == 0.0);

    cfg[0].theta = kPi / 12.0;
    cfg[1].theta = kPi / 12.0;
    CHECK(tip_angle_residual(cfg, kPi / 6.0) == doctest::Approx(0.0).epsilon(1e-15));

    cfg[0].theta = kPi / 6.0;
    cfg[1].theta = kPi / 6.0;
    CHECK(tip_angle_residual(cfg, kPi / 6.0) == doctest::Approx(-kPi / 6.0).epsilon(1e-12));

    cfg[2].phi = 0.3;
    CHECK_THROWS_AS(tip_angle_residual(cfg, 0.0), std::invalid_argument);
}

TEST_CASE("solve_point: pure extension target") {
    auto robot = single_segment_robot();
    const double dl = robot.segments[0].dl_max / 2.0;
    const Vec3 target(0, 0, robot.segments[0].rest_length + dl);
    auto res = solve_point(robot, target, straight_config(robot), SecondaryTask::none());
    CHECK(res.status == IkStatus::converged);
    CHECK(res.residual <= 1e-9);
    CHECK(res.config[0].delta_l == doctest::Approx(dl).epsilon(1e-8));
    CHECK(std::abs(res.config[0].theta) < 1e-6);
}

TEST_CASE("solve_point: matches the analytic oracle on random reachable targets") {
    auto robot = single_segment_robot();
    const auto& spec = robot.segments[0];
    std::mt19937 rng(90210);
    std::uniform_real_distribution<double> dl(spec.dl_min + 1.0, spec.dl_max - 1.0);
    std::uniform_real_distribution<double> theta(0.05, kPi - 0.2);
    std::uniform_real_distribution<double> phi(-kPi + 0.05, kPi - 0.05);

    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        ConfigVector truth(1);
        truth[0] = {dl(rng), theta(rng), phi(rng)};
        const Vec3 target = tip_position(robot, truth, true);

        auto res = solve_point(robot, target, straight_config(robot), SecondaryTask::none());
        REQUIRE(res.status == IkStatus::converged);
        CHECK(res.residual <= 1e-6);

        auto oracle = analytic_ik_single(target, spec);
        REQUIRE(oracle.status == AnalyticIkStatus::ok);
        if (std::abs(res.config[0].theta) < 1e-6) continue;  // phi-degenerate
        CHECK(std::abs(res.config[0].delta_l - oracle.config.delta_l) < 1e-5);
        CHECK(std::abs(res.config[0].theta - oracle.config.theta) < 1e-5);
        CHECK(std::abs(wrap_angle(res.config[0].phi - oracle.config.phi)) < 1e-5);
        ++checked;
    }
    CHECK(checked >= 190);
}

TEST_CASE("solve_point: returned configs respect the box bounds exactly") {
    auto robot = single_segment_robot();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> coord(-120.0, 120.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 target(coord(rng), coord(rng), std::abs(coord(rng)));
        auto res = solve_point(robot, target, straight_config(robot), SecondaryTask::none());
        const auto& seg = robot.segments[0];
        CHECK(res.config[0].delta_l >= seg.dl_min);
        CHECK(res.config[0].delta_l <= seg.dl_max);
        CHECK(res.config[0].theta >= seg.theta_min);
        CHECK(res.config[0].theta <= seg.theta_max);
        CHECK(res.config[0].phi > -kPi);
        CHECK(res.config[0].phi <= kPi);
    }
}

TEST_CASE("solve_point: unreachable target returns best effort, never throws") {
    auto robot = single_segment_robot();
    const double extent = workspace_extent(robot);
    const Vec3 target(0, 0, extent + 50.0);
    auto res = solve_point(robot, target, straight_config(robot), SecondaryTask::none());
    CHECK(res.status == IkStatus::max_iter);
    // Best effort: fully stretched straight toward the target, residual is
    // the reach shortfall.
    CHECK(res.residual == doctest::Approx(50.0).epsilon(1e-6));
    CHECK(res.config[0].delta_l == doctest::Approx(robot.segments[0].dl_max).epsilon(1e-9));
}

TEST_CASE("solve_point: target behind the base needs the reseed fallback") {
    auto robot = single_segment_robot();
    // Bending fully backward: azimuth pi from a straight warm start.
    ConfigVector truth(1);
    truth[0] = {5.0, 2.0, kPi * 0.9};
    const Vec3 target = tip_position(robot, truth, true);
    auto res = solve_point(robot, target, straight_config(robot), SecondaryTask::none());
    CHECK(res.status == IkStatus::converged);
    CHECK(res.residual <= 1e-6);
}

TEST_CASE("solve_trajectory: constant trajectory reuses the warm start") {
    auto robot = single_segment_robot();
    Trajectory traj;
    traj.shape = "constant";
    for (int k = 0; k < 10; ++k) {
        traj.points.push_back({0.1 * k, Vec3(20.0, 5.0, 70.0)});
    }
    auto results = solve_trajectory(robot, traj, SecondaryTask::none());
    REQUIRE(results.size() == 10);
    for (size_t k = 1; k < results.size(); ++k) {
        CHECK(results[k].iterations <= 1);
        CHECK(results[k].config[0].delta_l == doctest::Approx(results[0].config[0].delta_l));
        CHECK(results[k].config[0].theta == doctest::Approx(results[0].config[0].theta));
        CHECK(results[k].config[0].phi == doctest::Approx(results[0].config[0].phi));
    }
}

TEST_CASE("solve_trajectory: flower accuracy and warm-start smoothness") {
    auto robot = single_segment_robot();
    auto traj = make_flower(300);
    auto results = solve_trajectory(robot, traj, SecondaryTask::none());

    double mean = 0.0;
    for (const auto& r : results) {
        CHECK(r.status == IkStatus::converged);
        mean += r.residual;
    }
    mean /= results.size();
    CHECK(mean <= 1e-3);

    // Warm-start smoothness: no per-variable jump above 10x the median step.
    for (int v = 0; v < 3; ++v) {
        std::vector<double> steps;
        for (size_t k = 1; k < results.size(); ++k) {
            const auto& a = results[k - 1].config[0];
            const auto& b = results[k].config[0];
            double d = 0.0;
            if (v == 0) d = std::abs(b.delta_l - a.delta_l);
            if (v == 1) d = std::abs(b.theta - a.theta);
            if (v == 2) d = std::abs(wrap_angle(b.phi - a.phi));
            steps.push_back(d);
        }
        std::vector<double> sorted = steps;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double max_step = sorted.back();
        if (max_step > 1e-9) {
            CHECK(max_step <= 10.0 * median);
        }
    }
}

TEST_CASE("solve_trajectory: accepted objective never exceeds the warm start's") {
    auto robot = single_segment_robot();
    auto traj = make_flower(60);
    IkSettings settings;
    auto results = solve_trajectory(robot, traj, SecondaryTask::none(), settings);
    ConfigVector warm = straight_config(robot);
    for (size_t k = 0; k < results.size(); ++k) {
        const Vec3 target = world_target(traj, k);
        const double f_warm = (tip_position(robot, warm, true) - target).squaredNorm();
        const double f_acc = (tip_position(robot, results[k].config, true) - target).squaredNorm();
        CHECK(f_acc <= f_warm + 1e-18);
        warm = results[k].config;
    }
}

TEST_CASE("solve_point: planar tip-angle task meets both objectives") {
    auto robot = planar_robot(4);
    // Task-plane target within reach of the 4x64.4 mm arm.
    const Vec3 target = planar_to_world(200.0, 80.0);
    const auto task = SecondaryTask::hold_tip_angle(kPi / 6.0);

    auto res = solve_point(robot, target, straight_config(robot), task);
    CHECK(res.status == IkStatus::converged);
    CHECK(res.residual <= 1e-6);
    REQUIRE(res.secondary_residual.has_value());
    CHECK(*res.secondary_residual <= 1e-4);

    double theta_sum = 0.0;
    for (const auto& c : res.config) theta_sum += c.theta;
    CHECK(theta_sum == doctest::Approx(kPi / 6.0).epsilon(1e-3));
}

TEST_CASE("solve_point: infeasible secondary task keeps the position solution") {
    auto robot = planar_robot(2);
    // Point at full straight reach: any nonzero total bend loses contact, so
    // a 90 degree tip angle cannot be held.
    const double reach = 2 * 64.4 + 2 * robot.segments[0].dl_max;
    const Vec3 target = planar_to_world(reach, 0.0);
    const auto task = SecondaryTask::hold_tip_angle(kPi / 2.0);
    auto res = solve_point(robot, target, straight_config(robot), task);
    CHECK(res.status == IkStatus::infeasible_secondary);
    CHECK(res.residual <= 1e-6);  // position task never sacrificed
    REQUIRE(res.secondary_residual.has_value());
    CHECK(*res.secondary_residual > 0.1);
}

TEST_CASE("solve_point: tip-angle task rejected for spatial robots") {
    auto robot = single_segment_robot();
    CHECK_THROWS_AS(solve_point(robot, Vec3(10, 0, 60), straight_config(robot),
                                SecondaryTask::hold_tip_angle(0.5)),
                    std::invalid_argument);
}

TEST_CASE("solve_trajectory rejects an empty trajectory") {
    auto robot = single_segment_robot();
    Trajectory traj;
    CHECK_THROWS_AS(solve_trajectory(robot, traj, SecondaryTask::none()), std::invalid_argument);
}
