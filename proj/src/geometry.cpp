#include "softarm/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace softarm {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(x)/x with a series branch near zero.
double sinc(double x) {
    if (std::abs(x) < 1e-6) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

// d/dx [sin(x)/x]
double dsinc(double x) {
    if (std::abs(x) < 1e-6) {
        const double x2 = x * x;
        return -x / 3.0 * (1.0 - x2 / 10.0);
    }
    return (x * std::cos(x) - std::sin(x)) / (x * x);
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Mat3 drot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << -s, -c, 0, c, -s, 0, 0, 0, 0;
    return r;
}

Mat3 drot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << -s, 0, c, 0, 0, 0, -c, 0, -s;
    return r;
}

// Sums of the link direction components over one segment: the links point at
// angles (2j-1)*theta/(2n) from the segment tangent. Optionally also returns
// the derivatives of the sums w.r.t. theta.
void chord_sums(double theta, int n, double& sum_sin, double& sum_cos,
                double* dsum_sin = nullptr, double* dsum_cos = nullptr) {
    sum_sin = 0.0;
    sum_cos = 0.0;
    double ds = 0.0, dc = 0.0;
    const double half_step = theta / (2.0 * n);
    for (int j = 1; j <= n; ++j) {
        const double w = (2.0 * j - 1.0) / (2.0 * n);
        const double a = (2.0 * j - 1.0) * half_step;
        const double sa = std::sin(a), ca = std::cos(a);
        sum_sin += sa;
        sum_cos += ca;
        ds += ca * w;
        dc -= sa * w;
    }
    if (dsum_sin) *dsum_sin = ds;
    if (dsum_cos) *dsum_cos = dc;
}

void check_dims(const RobotSpec& robot, const ConfigVector& config) {
    if (config.size() != robot.segments.size()) {
        throw std::invalid_argument("config has " + std::to_string(config.size()) +
                                    " segments, robot expects " +
                                    std::to_string(robot.segments.size()));
    }
}

}  // namespace

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);   // -> [-pi, pi]
    if (a <= -kPi) a = kPi;
    return a;
}

void validate_robot(const RobotSpec& robot) {
    if (robot.segments.empty()) throw std::invalid_argument("robot has no segments");
    if (robot.masses.size() != robot.segments.size()) {
        throw std::invalid_argument("masses list must have one entry per segment");
    }
    if (robot.bellows < 1) throw std::invalid_argument("bellows count must be positive");
    const bool planar = robot.segments.front().planar;
    for (size_t i = 0; i < robot.segments.size(); ++i) {
        const auto& s = robot.segments[i];
        const std::string tag = "segment " + std::to_string(i) + ": ";
        if (s.links < 1) throw std::invalid_argument(tag + "links must be >= 1");
        if (!(s.rest_length > 0.0)) throw std::invalid_argument(tag + "rest_length must be > 0");
        if (!(s.dl_min > -s.rest_length)) {
            throw std::invalid_argument(tag + "dl_min must keep the segment length positive");
        }
        if (!(s.dl_min <= s.dl_max)) throw std::invalid_argument(tag + "dl bounds inverted");
        if (!std::isfinite(s.theta_min) || !std::isfinite(s.theta_max)) {
            throw std::invalid_argument(tag + "theta bounds must be finite");
        }
        if (!(s.theta_min <= s.theta_max)) throw std::invalid_argument(tag + "theta bounds inverted");
        if (s.theta_max > kPi + 1e-12 || s.theta_min < -kPi - 1e-12) {
            throw std::invalid_argument(tag + "theta bounds must lie within [-pi, pi]");
        }
        if (s.planar != planar) throw std::invalid_argument("planar flags must be uniform");
        if (!(robot.masses[i] > 0.0)) throw std::invalid_argument(tag + "mass must be > 0");
    }
}

ConfigVector straight_config(const RobotSpec& robot) {
    return ConfigVector(robot.segments.size());
}

double drift_ratio(double theta, int links) {
    if (links < 1) throw std::invalid_argument("drift_ratio: links must be >= 1");
    if (std::abs(theta) < 1e-8) return 1.0;
    const double x = theta / (2.0 * links);
    return x / std::sin(x);
}

FkResult forward_kinematics(const RobotSpec& robot, const ConfigVector& config,
                            bool compensated) {
    check_dims(robot, config);
    FkResult out;
    out.segment_ends.reserve(config.size());
    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    for (size_t i = 0; i < config.size(); ++i) {
        const auto& seg = robot.segments[i];
        const auto& c = config[i];
        const int n = seg.links;
        const double total_len = seg.rest_length + c.delta_l;
        double scale = total_len / n;
        if (compensated) scale *= sinc(c.theta / (2.0 * n));
        double sum_sin, sum_cos;
        chord_sums(c.theta, n, sum_sin, sum_cos);
        const Vec3 u(std::cos(c.phi) * sum_sin, std::sin(c.phi) * sum_sin, sum_cos);
        p += R * (scale * u);
        R = R * rot_z(c.phi) * rot_y(c.theta);
        out.segment_ends.push_back(Pose3{p, R});
    }
    out.tip = out.segment_ends.back();
    return out;
}

Vec3 tip_position(const RobotSpec& robot, const ConfigVector& config, bool compensated) {
    check_dims(robot, config);
    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    for (size_t i = 0; i < config.size(); ++i) {
        const auto& seg = robot.segments[i];
        const auto& c = config[i];
        const int n = seg.links;
        double scale = (seg.rest_length + c.delta_l) / n;
        if (compensated) scale *= sinc(c.theta / (2.0 * n));
        double sum_sin, sum_cos;
        chord_sums(c.theta, n, sum_sin, sum_cos);
        p += R * (scale * Vec3(std::cos(c.phi) * sum_sin, std::sin(c.phi) * sum_sin, sum_cos));
        R = R * rot_z(c.phi) * rot_y(c.theta);
    }
    return p;
}

TipJacobian tip_with_jacobian(const RobotSpec& robot, const ConfigVector& config,
                              bool compensated) {
    check_dims(robot, config);
    const int nseg = static_cast<int>(config.size());
    const int nv = 3 * nseg;

    TipJacobian out;
    out.jacobian = Eigen::Matrix3Xd::Zero(3, nv);

    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    std::vector<Mat3> dR(nv, Mat3::Zero());

    for (int i = 0; i < nseg; ++i) {
        const auto& seg = robot.segments[i];
        const auto& c = config[i];
        const int n = seg.links;
        const double total_len = seg.rest_length + c.delta_l;
        const double half = 1.0 / (2.0 * n);

        double kappa = 1.0, dkappa_dtheta = 0.0;
        if (compensated) {
            kappa = sinc(c.theta * half);
            dkappa_dtheta = dsinc(c.theta * half) * half;
        }
        const double scale = total_len / n * kappa;

        double sum_sin, sum_cos, dsum_sin, dsum_cos;
        chord_sums(c.theta, n, sum_sin, sum_cos, &dsum_sin, &dsum_cos);
        const double cphi = std::cos(c.phi), sphi = std::sin(c.phi);
        const Vec3 u(cphi * sum_sin, sphi * sum_sin, sum_cos);
        const Vec3 su = scale * u;

        const Vec3 dsu_ddl = (kappa / n) * u;
        const Vec3 dsu_dtheta =
            scale * Vec3(cphi * dsum_sin, sphi * dsum_sin, dsum_cos) +
            (total_len / n * dkappa_dtheta) * u;
        const Vec3 dsu_dphi = scale * Vec3(-sphi * sum_sin, cphi * sum_sin, 0.0);

        // Position update: vars of earlier segments act through dR.
        for (int v = 0; v < 3 * i; ++v) {
            out.jacobian.col(v) += dR[v] * su;
        }
        out.jacobian.col(3 * i + 0) += R * dsu_ddl;
        out.jacobian.col(3 * i + 1) += R * dsu_dtheta;
        out.jacobian.col(3 * i + 2) += R * dsu_dphi;
        p += R * su;

        // Orientation update.
        const Mat3 Rz = rot_z(c.phi), Ry = rot_y(c.theta);
        const Mat3 A = Rz * Ry;
        for (int v = 0; v < 3 * i; ++v) {
            dR[v] = dR[v] * A;
        }
        dR[3 * i + 1] = R * Rz * drot_y(c.theta);
        dR[3 * i + 2] = R * drot_z(c.phi) * Ry;
        R = R * A;
    }

    out.tip = p;
    return out;
}

std::vector<Pose3> backbone_points(const RobotSpec& robot, const ConfigVector& config,
                                   int samples_per_segment) {
    check_dims(robot, config);
    if (samples_per_segment < 1) {
        throw std::invalid_argument("samples_per_segment must be >= 1");
    }
    std::vector<Pose3> pts;
    pts.reserve(1 + config.size() * samples_per_segment);
    pts.push_back(Pose3{});

    // A compensated chain with s links per segment has its joints exactly on
    // the constant-curvature arc at arc fractions k/s, so resampling is just
    // re-walking each segment with s links.
    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    const int s = samples_per_segment;
    for (size_t i = 0; i < config.size(); ++i) {
        const auto& seg = robot.segments[i];
        const auto& c = config[i];
        const double scale = (seg.rest_length + c.delta_l) / s * sinc(c.theta / (2.0 * s));
        const double cphi = std::cos(c.phi), sphi = std::sin(c.phi);
        const Mat3 R_entry = R;
        for (int k = 1; k <= s; ++k) {
            const double a = (2.0 * k - 1.0) * c.theta / (2.0 * s);
            p += R_entry * (scale * Vec3(cphi * std::sin(a), sphi * std::sin(a), std::cos(a)));
            const double frac = static_cast<double>(k) / s;
            pts.push_back(Pose3{p, R_entry * rot_z(c.phi) * rot_y(frac * c.theta)});
        }
        R = R_entry * rot_z(c.phi) * rot_y(c.theta);
    }
    return pts;
}

std::vector<Vec3> link_midpoints(const RobotSpec& robot, const ConfigVector& config,
                                 bool compensated) {
    check_dims(robot, config);
    std::vector<Vec3> mids;
    Vec3 p = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    for (size_t i = 0; i < config.size(); ++i) {
        const auto& seg = robot.segments[i];
        const auto& c = config[i];
        const int n = seg.links;
        double scale = (seg.rest_length + c.delta_l) / n;
        if (compensated) scale *= sinc(c.theta / (2.0 * n));
        const double cphi = std::cos(c.phi), sphi = std::sin(c.phi);
        for (int k = 1; k <= n; ++k) {
            const double a = (2.0 * k - 1.0) * c.theta / (2.0 * n);
            const Vec3 dir(cphi * std::sin(a), sphi * std::sin(a), std::cos(a));
            mids.push_back(p + R * (0.5 * scale * dir));
            p += R * (scale * dir);
        }
        R = R * rot_z(c.phi) * rot_y(c.theta);
    }
    return mids;
}

AnalyticIkResult analytic_ik_single(const Vec3& target, const SegmentSpec& spec) {
    AnalyticIkResult out;
    const double x = target.x(), y = target.y(), z = target.z();
    const double d_xy = std::hypot(x, y);

    if (d_xy < 1e-9) {
        if (z <= 0.0) {
            out.status = AnalyticIkStatus::unreachable;
            return out;
        }
        // Straight-reach limit.
        out.config = SegmentConfig{z - spec.rest_length, 0.0, 0.0};
    } else {
        const double phi = std::atan2(y, x);
        const double theta = 2.0 * std::atan2(d_xy, z);
        const double radius = (d_xy * d_xy + z * z) / (2.0 * d_xy);
        out.config = SegmentConfig{theta * radius - spec.rest_length, theta, phi};
    }

    const auto& c = out.config;
    const double tol = 1e-12;
    if (c.theta < spec.theta_min - tol || c.theta > spec.theta_max + tol ||
        c.delta_l < spec.dl_min - tol || c.delta_l > spec.dl_max + tol) {
        out.status = AnalyticIkStatus::out_of_range;
    }
    return out;
}

double workspace_extent(const RobotSpec& robot) {
    double total = 0.0;
    for (const auto& seg : robot.segments) total += seg.rest_length + seg.dl_max;
    return total;
}

}  // namespace softarm
