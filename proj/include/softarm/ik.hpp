#pragma once

#include <optional>
#include <vector>

#include "softarm/geometry.hpp"
#include "softarm/trajectory.hpp"

namespace softarm {

struct IkSettings {
    double position_tolerance = 1e-6;   // mm
    double gradient_tolerance = 1e-10;
    double step_tolerance = 1e-12;
    int max_iterations = 200;
    double secondary_weight = 1e3;
    double finite_difference_step = 1e-7;
    bool use_compensation = true;
    int max_reseeds = 4;  // extra deterministic starts tried when the warm start stalls
};

struct SecondaryTask {
    enum class Kind { none, tip_angle };
    Kind kind = Kind::none;
    double tip_angle = 0.0;  // rad, desired sum of bending angles (planar only)

    static SecondaryTask none() { return {}; }
    static SecondaryTask hold_tip_angle(double theta_d) {
        return SecondaryTask{Kind::tip_angle, theta_d};
    }
};

enum class IkStatus { converged, max_iter, infeasible_secondary, numerical_failure };

struct IkResult {
    ConfigVector config;
    double residual = 0.0;                      // mm, tip error norm
    std::optional<double> secondary_residual;   // rad, |theta_d - sum(theta_i)|
    int iterations = 0;
    IkStatus status = IkStatus::max_iter;
    double solve_time = 0.0;                    // s
};

/// Signed tip-angle residual theta_d - sum(theta_i) for a planar
/// configuration; throws for configurations with nonzero deflection.
double tip_angle_residual(const ConfigVector& config, double theta_d);

/// Minimizes the tip position error over the configuration variables inside
/// their box bounds, warm-started from `warm_start`. With a tip-angle task a
/// second pass adds the angle residual as a quadratic penalty; its result is
/// kept only when the position residual still meets the tolerance.
IkResult solve_point(const RobotSpec& robot, const Vec3& target,
                     const ConfigVector& warm_start, const SecondaryTask& task,
                     const IkSettings& settings = {});

/// Solves the trajectory in order, warm-starting each point from the
/// previous accepted configuration (the first from the straight pose).
/// Never aborts mid-trajectory; per-point statuses are reported.
std::vector<IkResult> solve_trajectory(const RobotSpec& robot, const Trajectory& trajectory,
                                       const SecondaryTask& task,
                                       const IkSettings& settings = {});

}  // namespace softarm
