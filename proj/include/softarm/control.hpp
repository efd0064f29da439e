#pragma once

#include <Eigen/Dense>
#include <vector>

#include "softarm/dynamics.hpp"
#include "softarm/geometry.hpp"

namespace softarm {

/// Diagonal PD gains; kp must be positive elementwise, kv non-negative.
struct Gains {
    Eigen::VectorXd kp;
    Eigen::VectorXd kv;

    static Gains uniform(double kp_value, double kv_value, int dim) {
        return Gains{Eigen::VectorXd::Constant(dim, kp_value),
                     Eigen::VectorXd::Constant(dim, kv_value)};
    }
};

/// Closed-loop simulation history sampled at the control rate.
struct TrackingTrace {
    double dt = 0.0;  // control tick period, s
    std::vector<double> t;
    std::vector<Eigen::VectorXd> q;
    std::vector<Eigen::VectorXd> qdot;
    std::vector<Eigen::VectorXd> q_desired;
    std::vector<Eigen::VectorXd> tau;
    std::vector<Eigen::VectorXd> pressures;  // empty rows unless pressure mode runs
    std::vector<Vec3> tip;
    std::vector<double> task_error;  // mm, ||tip(q) - tip(q_d)||
};

struct TrackingOptions {
    double control_rate_hz = 250.0;
    double dt = 1e-3;               // integrator step, s
    bool pressure_mode = false;     // route tau through the bellows mapping
    Eigen::VectorXd q0;             // empty -> zero state
};

struct TrackingMetrics {
    double mean_error = 0.0;
    double max_error = 0.0;
    double steady_state_mean = 0.0;
    double steady_state_max = 0.0;
    double steady_state_mean_pct = 0.0;  // % of the characteristic radius
    double steady_state_max_pct = 0.0;
};

/// PD feedback with stiffness/gravity feedforward evaluated at the desired
/// state: tau = kp (q_d - q) + kv (qdot_d - qdot) + K(q_d) + G(q_d).
Eigen::VectorXd control_law(const RobotSpec& robot, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot, const Eigen::VectorXd& q_d,
                            const Eigen::VectorXd& qdot_d, const Gains& gains,
                            const StiffnessParams& stiffness);

/// Closed-loop tracking of a desired-state sequence (uniform spacing
/// desired_dt, zero desired velocity). The control law runs at the tick
/// rate; between ticks the dynamics integrate with the torque held.
TrackingTrace simulate_tracking(const RobotSpec& robot,
                                const std::vector<Eigen::VectorXd>& desired_states,
                                double desired_dt, const Gains& gains,
                                const DynParams& params, const TrackingOptions& options = {});

/// Task-space error statistics; the first `transient_fraction` of the trace
/// is excluded from the steady-state numbers.
TrackingMetrics tracking_error_metrics(const TrackingTrace& trace,
                                       double characteristic_radius,
                                       double transient_fraction = 0.1);

}  // namespace softarm
