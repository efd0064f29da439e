#include "softarm/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace softarm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_points(int n_points) {
    if (n_points < 2) throw std::invalid_argument("trajectory needs at least 2 points");
}

// Uniform parameter grid over [0, period] inclusive; timestamps rescaled to
// [0, duration].
template <typename F>
Trajectory sampled(int n_points, double period, double duration, F&& eval) {
    check_points(n_points);
    if (duration <= 0.0) duration = period;
    Trajectory out;
    out.points.resize(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double s = period * k / (n_points - 1);
        out.points[k].t = duration * k / (n_points - 1);
        out.points[k].target = eval(s);
    }
    return out;
}

}  // namespace

Vec3 planar_to_world(double task_x, double task_y) { return Vec3(task_y, 0.0, task_x); }

void world_to_planar(const Vec3& p, double& task_x, double& task_y) {
    task_x = p.z();
    task_y = p.x();
}

Vec3 world_target(const Trajectory& traj, size_t index) {
    const Vec3& p = traj.points[index].target;
    return traj.planar ? planar_to_world(p.x(), p.y()) : p;
}

Trajectory make_circle2d(int n_points, const Circle2dParams& p, double duration) {
    if (p.radius <= 0.0) throw std::invalid_argument("circle radius must be positive");
    Trajectory out = sampled(n_points, kTwoPi, duration, [&](double s) {
        return Vec3(p.center_x + p.radius * std::cos(s), p.center_y + p.radius * std::sin(s), 0.0);
    });
    out.shape = "circle2d";
    out.planar = true;
    out.characteristic_radius = p.radius;
    return out;
}

Trajectory make_circle3d(int n_points, const Circle3dParams& p, double duration) {
    if (p.radius <= 0.0) throw std::invalid_argument("circle radius must be positive");
    if (p.omega <= 0.0) throw std::invalid_argument("circle parameter rate must be positive");
    Trajectory out = sampled(n_points, kTwoPi / p.omega, duration, [&](double s) {
        return Vec3(p.center_x + p.radius * std::cos(p.omega * s),
                    p.center_y + p.radius * std::sin(p.omega * s), p.z);
    });
    out.shape = "circle3d";
    out.characteristic_radius = p.radius;
    return out;
}

Trajectory make_flower(int n_points, const FlowerParams& p, double duration) {
    if (p.center_radius <= 0.0) throw std::invalid_argument("flower radius must be positive");
    Trajectory out = sampled(n_points, kTwoPi, duration, [&](double s) {
        const double r = p.center_radius + p.petal_amplitude * std::cos(p.petals * s);
        return Vec3(r * std::cos(s), r * std::sin(s), p.z);
    });
    out.shape = "flower";
    out.characteristic_radius = p.center_radius + std::abs(p.petal_amplitude);
    return out;
}

Trajectory generate(const std::string& shape, int n_points, double duration) {
    if (shape == "circle2d") return make_circle2d(n_points, {}, duration);
    if (shape == "circle3d") return make_circle3d(n_points, {}, duration);
    if (shape == "flower") return make_flower(n_points, {}, duration);
    throw std::invalid_argument("unknown trajectory shape: " + shape);
}

Trajectory resample(const Trajectory& traj, int n_points) {
    check_points(n_points);
    const auto& pts = traj.points;
    if (pts.size() < 2) throw std::invalid_argument("cannot resample fewer than 2 points");

    std::vector<double> arc(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) {
        arc[i] = arc[i - 1] + (pts[i].target - pts[i - 1].target).norm();
    }
    const double total = arc.back();
    if (total <= 0.0) throw std::invalid_argument("cannot resample a zero-length trajectory");

    Trajectory out = traj;
    out.points.assign(n_points, TrajectoryPoint{});
    out.points.front() = pts.front();
    out.points.back() = pts.back();

    size_t seg = 0;
    for (int k = 1; k + 1 < n_points; ++k) {
        const double target_arc = total * k / (n_points - 1);
        while (seg + 2 < pts.size() && arc[seg + 1] < target_arc) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        double w = span > 0.0 ? (target_arc - arc[seg]) / span : 0.0;
        // Snap onto knots so resampling a chord-uniform trajectory at the same
        // count reproduces it bit for bit.
        if (std::abs(w) < 1e-12) w = 0.0;
        if (std::abs(w - 1.0) < 1e-12) w = 1.0;
        out.points[k].t = (1.0 - w) * pts[seg].t + w * pts[seg + 1].t;
        out.points[k].target = (1.0 - w) * pts[seg].target + w * pts[seg + 1].target;
    }
    return out;
}

}  // namespace softarm
