#pragma once

#include <string>
#include <vector>

#include "softarm/geometry.hpp"

namespace softarm {

struct TrajectoryPoint {
    double t = 0.0;  // s
    Vec3 target = Vec3::Zero();
};

/// Ordered timed task-space targets. For planar trajectories the targets are
/// 2D task coordinates stored as (x, y, 0); see planar_to_world for the
/// embedding into the robot frame.
struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::string shape = "custom";
    bool planar = false;
    double characteristic_radius = 0.0;  // mm, denominator for %-of-radius metrics
};

/// Planar task coordinates (X, Y) map to the robot frame as x = Y, z = X:
/// the task X axis runs along the arm's base tangent and Y is the bending
/// direction.
Vec3 planar_to_world(double task_x, double task_y);
/// Inverse of planar_to_world.
void world_to_planar(const Vec3& p, double& task_x, double& task_y);

/// Target of a trajectory point in the robot frame (applies the planar
/// embedding when the trajectory is planar).
Vec3 world_target(const Trajectory& traj, size_t index);

struct Circle2dParams {
    double center_x = 175.0;
    double center_y = 100.0;
    double radius = 50.0;
};

struct Circle3dParams {
    double radius = 20.0;
    double omega = 6.0;  // rad/s, parameter rate
    double z = 60.0;
    double center_x = 0.0;
    double center_y = 0.0;
};

struct FlowerParams {
    double center_radius = 40.0;  // c
    double petal_amplitude = 15.0;  // a
    double z = 60.0;
    int petals = 4;
};

/// n_points samples over one closed period, end point included, timestamps
/// spanning [0, duration] uniformly. duration <= 0 picks the natural period
/// of the shape's parameterization.
Trajectory make_circle2d(int n_points, const Circle2dParams& p = {}, double duration = -1.0);
Trajectory make_circle3d(int n_points, const Circle3dParams& p = {}, double duration = -1.0);
Trajectory make_flower(int n_points, const FlowerParams& p = {}, double duration = -1.0);

/// Dispatch by shape name ("circle2d" | "circle3d" | "flower") with default
/// parameters; throws std::invalid_argument for unknown shapes.
Trajectory generate(const std::string& shape, int n_points, double duration = -1.0);

/// Arc-length-uniform linear resampling to n_points; end points preserved
/// exactly. Throws on degenerate (zero-length) input.
Trajectory resample(const Trajectory& traj, int n_points);

}  // namespace softarm
