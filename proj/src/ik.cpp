#include "softarm/ik.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "softarm/optimizer.hpp"

namespace softarm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPhiFreezeTheta = 1e-6;

using Eigen::VectorXd;

// Variable packing: planar segments contribute (delta_l, theta), spatial
// segments (delta_l, theta, phi).
struct Packing {
    bool planar = false;
    int segments = 0;

    int vars_per_segment() const { return planar ? 2 : 3; }
    int size() const { return segments * vars_per_segment(); }

    VectorXd pack(const ConfigVector& cfg) const {
        VectorXd x(size());
        for (int i = 0; i < segments; ++i) {
            const int b = i * vars_per_segment();
            x[b] = cfg[i].delta_l;
            x[b + 1] = cfg[i].theta;
            if (!planar) x[b + 2] = cfg[i].phi;
        }
        return x;
    }

    ConfigVector unpack(const VectorXd& x) const {
        ConfigVector cfg(segments);
        for (int i = 0; i < segments; ++i) {
            const int b = i * vars_per_segment();
            cfg[i].delta_l = x[b];
            cfg[i].theta = x[b + 1];
            cfg[i].phi = planar ? 0.0 : (x[b + 2] == -kPi ? kPi : x[b + 2]);
        }
        return cfg;
    }

    void bounds(const RobotSpec& robot, VectorXd& lo, VectorXd& hi) const {
        lo.resize(size());
        hi.resize(size());
        for (int i = 0; i < segments; ++i) {
            const auto& seg = robot.segments[i];
            const int b = i * vars_per_segment();
            lo[b] = seg.dl_min;
            hi[b] = seg.dl_max;
            lo[b + 1] = seg.theta_min;
            hi[b + 1] = seg.theta_max;
            if (!planar) {
                lo[b + 2] = -kPi;
                hi[b + 2] = kPi;
            }
        }
    }
};

struct StageOutcome {
    VectorXd x;
    double objective = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool numerical_failure = false;
};

// One projected-BFGS run on ||tip - target||^2 (+ optional tip-angle
// penalty), from a single start.
StageOutcome run_stage(const RobotSpec& robot, const Packing& pk, const Vec3& target,
                       const VectorXd& x0, const VectorXd& lo, const VectorXd& hi,
                       const IkSettings& settings, bool with_secondary, double theta_d) {
    const double w = settings.secondary_weight;
    const int vps = pk.vars_per_segment();

    auto objective = [&](const VectorXd& x, VectorXd& grad) {
        const ConfigVector cfg = pk.unpack(x);
        const TipJacobian tj = tip_with_jacobian(robot, cfg, settings.use_compensation);
        const Vec3 r = tj.tip - target;
        double f = r.squaredNorm();
        for (int i = 0; i < pk.segments; ++i) {
            const int b = i * vps;
            grad[b] = 2.0 * r.dot(tj.jacobian.col(3 * i + 0));
            grad[b + 1] = 2.0 * r.dot(tj.jacobian.col(3 * i + 1));
            if (!pk.planar) grad[b + 2] = 2.0 * r.dot(tj.jacobian.col(3 * i + 2));
        }
        if (with_secondary) {
            double theta_sum = 0.0;
            for (int i = 0; i < pk.segments; ++i) theta_sum += x[i * vps + 1];
            const double h = theta_d - theta_sum;
            f += w * h * h;
            for (int i = 0; i < pk.segments; ++i) grad[i * vps + 1] -= 2.0 * w * h;
        }
        return f;
    };

    MinimizeOptions opts;
    opts.max_iterations = settings.max_iterations;
    opts.value_target = settings.position_tolerance * settings.position_tolerance;
    opts.gradient_tolerance = settings.gradient_tolerance;
    opts.step_tolerance = settings.step_tolerance;

    MinimizeResult res = minimize_box(objective, x0, lo, hi, opts);

    StageOutcome out;
    out.x = res.x;
    out.objective = res.value;
    out.residual = (tip_position(robot, pk.unpack(res.x), settings.use_compensation) - target).norm();
    out.iterations = res.iterations;
    out.numerical_failure = res.status == MinimizeStatus::numerical_failure;
    return out;
}

// Deterministic alternative starts used only when the warm start stalls:
// an aim-at-the-target seed plus deflection flips of the warm start.
std::vector<VectorXd> reseed_starts(const Packing& pk, const Vec3& target,
                                    const VectorXd& warm,
                                    const VectorXd& lo, const VectorXd& hi, int max_count) {
    std::vector<VectorXd> seeds;
    if (max_count <= 0) return seeds;
    const int vps = pk.vars_per_segment();

    const double rho = std::hypot(target.x(), target.y());
    const double bend_total = 2.0 * std::atan2(pk.planar ? target.x() : rho, target.z());

    VectorXd aim = warm;
    for (int i = 0; i < pk.segments; ++i) {
        const int b = i * vps;
        aim[b + 1] = std::clamp(bend_total / pk.segments, lo[b + 1], hi[b + 1]);
        if (!pk.planar) aim[b + 2] = std::clamp(std::atan2(target.y(), target.x()), lo[b + 2], hi[b + 2]);
    }
    seeds.push_back(aim);

    if (pk.planar) {
        VectorXd flip = aim;
        for (int i = 0; i < pk.segments; ++i) {
            const int b = i * vps;
            flip[b + 1] = std::clamp(-aim[b + 1], lo[b + 1], hi[b + 1]);
        }
        seeds.push_back(flip);
    } else {
        for (double shift : {kPi, kPi / 2.0, -kPi / 2.0}) {
            VectorXd alt = aim;
            for (int i = 0; i < pk.segments; ++i) {
                const int b = i * vps;
                alt[b + 2] = std::clamp(wrap_angle(aim[b + 2] + shift), lo[b + 2], hi[b + 2]);
                alt[b + 1] = std::clamp(std::max(alt[b + 1], 0.1), lo[b + 1], hi[b + 1]);
            }
            seeds.push_back(alt);
        }
    }
    if (static_cast<int>(seeds.size()) > max_count) seeds.resize(max_count);
    return seeds;
}

}  // namespace

double tip_angle_residual(const ConfigVector& config, double theta_d) {
    double sum = 0.0;
    for (const auto& c : config) {
        if (c.phi != 0.0) {
            throw std::invalid_argument("tip_angle_residual requires a planar configuration");
        }
        sum += c.theta;
    }
    return theta_d - sum;
}

IkResult solve_point(const RobotSpec& robot, const Vec3& target,
                     const ConfigVector& warm_start, const SecondaryTask& task,
                     const IkSettings& settings) {
    const auto t_start = std::chrono::steady_clock::now();
    if (!target.allFinite()) throw std::invalid_argument("IK target must be finite");
    if (warm_start.size() != robot.segments.size()) {
        throw std::invalid_argument("warm start does not match the robot");
    }
    if (task.kind == SecondaryTask::Kind::tip_angle && !robot.planar()) {
        throw std::invalid_argument("tip-angle task is defined for planar robots only");
    }

    Packing pk{robot.planar(), robot.segment_count()};
    VectorXd lo, hi;
    pk.bounds(robot, lo, hi);
    const VectorXd warm = pk.pack(warm_start);

    // The deflection is unidentifiable on a straight segment; pin it to the
    // warm-start value there so it cannot drift.
    VectorXd lo1 = lo, hi1 = hi;
    if (!pk.planar) {
        for (int i = 0; i < pk.segments; ++i) {
            if (std::abs(warm[3 * i + 1]) < kPhiFreezeTheta) {
                const double phi = std::clamp(warm[3 * i + 2], lo[3 * i + 2], hi[3 * i + 2]);
                lo1[3 * i + 2] = phi;
                hi1[3 * i + 2] = phi;
            }
        }
    }

    const bool with_task = task.kind == SecondaryTask::Kind::tip_angle;
    IkResult out;
    int total_iterations = 0;

    // With a secondary task the penalized problem is solved straight from the
    // warm start: the position-only pass would wander along the redundancy
    // manifold and make consecutive trajectory solutions chatter.
    if (with_task) {
        StageOutcome direct = run_stage(robot, pk, target, warm, lo1, hi1, settings, true,
                                        task.tip_angle);
        total_iterations += direct.iterations;
        if (direct.residual <= settings.position_tolerance) {
            out.config = pk.unpack(direct.x);
            out.residual = direct.residual;
            out.status = IkStatus::converged;
            out.secondary_residual = std::abs(tip_angle_residual(out.config, task.tip_angle));
            out.iterations = total_iterations;
            out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           t_start)
                                 .count();
            return out;
        }
    }

    // Position-only pass, warm start first, deterministic reseeds as a
    // fallback. The best objective wins, so the accepted value never exceeds
    // the warm start's.
    StageOutcome best = run_stage(robot, pk, target, warm, lo1, hi1, settings, false, 0.0);
    total_iterations += best.iterations;
    bool all_failed = best.numerical_failure;
    if (best.residual > settings.position_tolerance) {
        for (const VectorXd& seed : reseed_starts(pk, target, warm, lo, hi,
                                                  settings.max_reseeds)) {
            StageOutcome alt = run_stage(robot, pk, target, seed, lo, hi, settings, false, 0.0);
            total_iterations += alt.iterations;
            all_failed = all_failed && alt.numerical_failure;
            if (alt.objective < best.objective) best = alt;
            if (best.residual <= settings.position_tolerance) break;
        }
    }

    out.config = pk.unpack(best.x);
    out.residual = best.residual;
    out.status = best.residual <= settings.position_tolerance ? IkStatus::converged
                                                              : IkStatus::max_iter;
    if (all_failed) out.status = IkStatus::numerical_failure;

    // Retry the penalized solve from the position solution; keep it only if
    // the position task is still met.
    if (with_task && out.status == IkStatus::converged) {
        StageOutcome second = run_stage(robot, pk, target, best.x, lo1, hi1, settings, true,
                                        task.tip_angle);
        total_iterations += second.iterations;
        if (second.residual <= settings.position_tolerance) {
            out.config = pk.unpack(second.x);
            out.residual = second.residual;
        } else {
            out.status = IkStatus::infeasible_secondary;
        }
    }
    if (with_task) {
        out.secondary_residual = std::abs(tip_angle_residual(out.config, task.tip_angle));
    }

    out.iterations = total_iterations;
    out.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

std::vector<IkResult> solve_trajectory(const RobotSpec& robot, const Trajectory& trajectory,
                                       const SecondaryTask& task, const IkSettings& settings) {
    if (trajectory.points.empty()) throw std::invalid_argument("trajectory is empty");
    std::vector<IkResult> results;
    results.reserve(trajectory.points.size());
    ConfigVector warm = straight_config(robot);
    for (size_t k = 0; k < trajectory.points.size(); ++k) {
        IkResult r = solve_point(robot, world_target(trajectory, k), warm, task, settings);
        warm = r.config;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace softarm
