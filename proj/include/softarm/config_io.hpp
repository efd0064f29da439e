#pragma once

#include <string>

#include "softarm/dynamics.hpp"
#include "softarm/geometry.hpp"
#include "softarm/trajectory.hpp"

namespace softarm {

/// Robot description file contents: the kinematic spec plus the dynamics
/// parameter blocks.
struct RobotFile {
    RobotSpec robot;
    DynParams params;
};

/// Unreadable or malformed input file.
class BadInputFile : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Loads a flat key=value robot file with repeated [segment] sections and
/// optional [stiffness]/[damping]/[actuation] blocks. Throws BadInputFile on
/// parse errors, std::invalid_argument on invariant violations.
RobotFile load_robot_file(const std::string& path);
RobotFile parse_robot_text(const std::string& text, const std::string& origin = "<string>");

/// Trajectory CSV, header mandatory: t,x,y[,z]. Two columns of coordinates
/// mark a planar trajectory.
Trajectory load_trajectory_csv(const std::string& path);
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Decimal formatting used for every CSV cell; round-trips doubles exactly.
std::string format_number(double value);

}  // namespace softarm
