#pragma once

#include <Eigen/Dense>
#include <vector>

namespace softarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One constant-curvature segment of the arm, discretized into `links`
/// straight links joined by uniform rotary + prismatic joints.
struct SegmentSpec {
    double rest_length = 64.4;   // mm
    int links = 6;
    double dl_min = -12.88;      // mm
    double dl_max = 32.2;        // mm
    double theta_min = 0.0;      // rad
    double theta_max = 3.141592653589793;
    bool planar = false;
};

/// Immutable description of the whole arm. Units: mm, rad, g, s.
struct RobotSpec {
    std::vector<SegmentSpec> segments;
    std::vector<double> masses;                 // g, one per segment
    Vec3 gravity = Vec3(0.0, 0.0, -9810.0);     // mm/s^2
    int bellows = 3;

    bool planar() const { return !segments.empty() && segments.front().planar; }
    int segment_count() const { return static_cast<int>(segments.size()); }
};

/// Per-segment configuration variables: extension, bending angle, deflection angle.
struct SegmentConfig {
    double delta_l = 0.0;  // mm
    double theta = 0.0;    // rad
    double phi = 0.0;      // rad, in (-pi, pi]; always 0 for planar segments
};

using ConfigVector = std::vector<SegmentConfig>;

/// Position plus tangent frame (orthonormal) at a point of the chain.
struct Pose3 {
    Vec3 position = Vec3::Zero();
    Mat3 frame = Mat3::Identity();
};

struct FkResult {
    Pose3 tip;
    std::vector<Pose3> segment_ends;
};

/// Tip position together with its Jacobian w.r.t. the packed configuration
/// variables, ordered (delta_l, theta, phi) per segment.
struct TipJacobian {
    Vec3 tip = Vec3::Zero();
    Eigen::Matrix3Xd jacobian;
};

enum class AnalyticIkStatus { ok, unreachable, out_of_range };

/// Closed-form single-segment inversion; `config` holds the raw solution
/// even when it violates the segment bounds.
struct AnalyticIkResult {
    SegmentConfig config;
    AnalyticIkStatus status = AnalyticIkStatus::ok;
};

/// Throws std::invalid_argument when the spec violates its invariants.
void validate_robot(const RobotSpec& robot);

/// All-zero (straight, rest-length) configuration for `robot`.
ConfigVector straight_config(const RobotSpec& robot);

/// Ratio of true arc length to the summed chord length of an `links`-link
/// discretization bent by `theta`. Returns exactly 1 for |theta| < 1e-8;
/// >= 1 otherwise.
double drift_ratio(double theta, int links);

/// Rigid-link forward kinematics. With `compensated` each link takes the
/// exact inscribed-chord length, so segment ends coincide with the
/// constant-curvature arc end points.
FkResult forward_kinematics(const RobotSpec& robot, const ConfigVector& config,
                            bool compensated = true);

/// Tip position only (no pose bookkeeping).
Vec3 tip_position(const RobotSpec& robot, const ConfigVector& config,
                  bool compensated = true);

/// Tip position and analytic Jacobian, 3 columns per segment.
TipJacobian tip_with_jacobian(const RobotSpec& robot, const ConfigVector& config,
                              bool compensated = true);

/// Backbone poses sampled at uniform arc length, `samples_per_segment`
/// points per segment; the first entry is the base origin.
std::vector<Pose3> backbone_points(const RobotSpec& robot, const ConfigVector& config,
                                   int samples_per_segment);

/// Midpoints of every link of the chain, base to tip. Used as lumped-mass
/// locations by the dynamics.
std::vector<Vec3> link_midpoints(const RobotSpec& robot, const ConfigVector& config,
                                 bool compensated = true);

/// Closed-form constant-curvature inversion for a single segment.
AnalyticIkResult analytic_ik_single(const Vec3& target, const SegmentSpec& spec);

/// Maximum straight reach, sum of (rest_length + dl_max); the denominator
/// for workspace-percentage error reporting.
double workspace_extent(const RobotSpec& robot);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace softarm
