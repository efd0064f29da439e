#include "softarm/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softarm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_gains(const Gains& gains, int dim) {
    if (gains.kp.size() != dim || gains.kv.size() != dim) {
        throw std::invalid_argument("gain dimensions do not match the state");
    }
    if ((gains.kp.array() <= 0.0).any()) throw std::invalid_argument("kp must be positive");
    if ((gains.kv.array() < 0.0).any()) throw std::invalid_argument("kv must be non-negative");
}

}  // namespace

VectorXd control_law(const RobotSpec& robot, const VectorXd& q, const VectorXd& qdot,
                     const VectorXd& q_d, const VectorXd& qdot_d, const Gains& gains,
                     const StiffnessParams& stiffness) {
    const int dim = state_dim(robot);
    if (q.size() != dim || qdot.size() != dim || q_d.size() != dim || qdot_d.size() != dim) {
        throw std::invalid_argument("control_law dimension mismatch");
    }
    check_gains(gains, dim);

    VectorXd tau = gains.kp.cwiseProduct(q_d - q) + gains.kv.cwiseProduct(qdot_d - qdot);
    tau += stiffness_vector(robot, q_d, stiffness);
    tau += gravity_vector(robot, q_d);
    return tau;
}

TrackingTrace simulate_tracking(const RobotSpec& robot, const std::vector<VectorXd>& desired_states,
                                double desired_dt, const Gains& gains, const DynParams& params,
                                const TrackingOptions& options) {
    const int dim = state_dim(robot);
    if (desired_states.empty()) throw std::invalid_argument("desired state sequence is empty");
    for (const auto& qd : desired_states) {
        if (qd.size() != dim) throw std::invalid_argument("desired state dimension mismatch");
    }
    if (!(desired_dt > 0.0)) throw std::invalid_argument("desired_dt must be positive");
    check_gains(gains, dim);
    if (!(options.control_rate_hz > 0.0)) throw std::invalid_argument("control rate must be positive");
    if (options.pressure_mode && robot.planar()) {
        throw std::invalid_argument("pressure mode needs the 3-coordinate spatial state");
    }

    const double duration = desired_dt * static_cast<double>(desired_states.size() - 1);
    if (!(duration > 0.0)) throw std::invalid_argument("simulation duration is zero");

    const double tick_dt = 1.0 / options.control_rate_hz;
    const int ticks = static_cast<int>(std::ceil(duration / tick_dt - 1e-9));
    const int substeps = std::max(1, static_cast<int>(std::round(tick_dt / options.dt)));
    const double dt = tick_dt / substeps;

    const MatrixXd H = options.pressure_mode ? input_mapping(params.actuation) : MatrixXd();

    DynState state;
    state.q = options.q0.size() == dim ? options.q0 : VectorXd::Zero(dim);
    state.qdot = VectorXd::Zero(dim);

    TrackingTrace trace;
    trace.dt = tick_dt;
    const VectorXd qdot_d = VectorXd::Zero(dim);

    for (int tick = 0; tick <= ticks; ++tick) {
        const double t = tick * tick_dt;
        // Linear interpolation of the desired sequence; a staircase reference
        // would pump the structural modes at the sample rate.
        const double pos = std::min(t / desired_dt, static_cast<double>(desired_states.size() - 1));
        const size_t idx = std::min<size_t>(static_cast<size_t>(pos), desired_states.size() - 2);
        const double w = std::clamp(pos - static_cast<double>(idx), 0.0, 1.0);
        const VectorXd q_d = (1.0 - w) * desired_states[idx] + w * desired_states[idx + 1];

        VectorXd tau = control_law(robot, state.q, state.qdot, q_d, qdot_d, gains,
                                   params.stiffness);
        VectorXd pressures;
        if (options.pressure_mode) {
            // Per-segment mapping: realized torque is H u, channel by channel.
            pressures.resize(params.actuation.bellows * robot.segment_count());
            for (int i = 0; i < robot.segment_count(); ++i) {
                const Eigen::Vector3d tau_seg = tau.segment<3>(3 * i);
                const PressureSolve sol = pressures_from_tau(H, tau_seg, params.actuation.p_max);
                pressures.segment(params.actuation.bellows * i, params.actuation.bellows) =
                    sol.pressures;
                tau.segment<3>(3 * i) = H * sol.pressures;
            }
        }

        trace.t.push_back(t);
        trace.q.push_back(state.q);
        trace.qdot.push_back(state.qdot);
        trace.q_desired.push_back(q_d);
        trace.tau.push_back(tau);
        trace.pressures.push_back(pressures);
        const Vec3 tip = tip_position(robot, config_from_state(robot, state.q), true);
        const Vec3 tip_d = tip_position(robot, config_from_state(robot, q_d), true);
        trace.tip.push_back(tip);
        trace.task_error.push_back((tip - tip_d).norm());

        if (tick == ticks) break;
        try {
            for (int s = 0; s < substeps; ++s) {
                state = step_dynamics(robot, state, tau, dt, params);
            }
        } catch (const IntegrationError& err) {
            throw IntegrationError(std::string(err.what()) + " at control tick " +
                                       std::to_string(tick),
                                   err.state);
        }
    }
    return trace;
}

TrackingMetrics tracking_error_metrics(const TrackingTrace& trace, double characteristic_radius,
                                       double transient_fraction) {
    if (trace.task_error.empty()) throw std::invalid_argument("trace is empty");
    if (transient_fraction < 0.0 || transient_fraction >= 0.5) {
        throw std::invalid_argument("transient_fraction must lie in [0, 0.5)");
    }

    TrackingMetrics m;
    const size_t n = trace.task_error.size();
    const size_t skip = static_cast<size_t>(transient_fraction * n);
    double sum = 0.0, ss_sum = 0.0;
    size_t ss_count = 0;
    for (size_t i = 0; i < n; ++i) {
        const double e = trace.task_error[i];
        sum += e;
        m.max_error = std::max(m.max_error, e);
        if (i >= skip) {
            ss_sum += e;
            ++ss_count;
            m.steady_state_max = std::max(m.steady_state_max, e);
        }
    }
    m.mean_error = sum / n;
    m.steady_state_mean = ss_count > 0 ? ss_sum / ss_count : 0.0;
    if (characteristic_radius > 0.0) {
        m.steady_state_mean_pct = 100.0 * m.steady_state_mean / characteristic_radius;
        m.steady_state_max_pct = 100.0 * m.steady_state_max / characteristic_radius;
    }
    return m;
}

}  // namespace softarm
