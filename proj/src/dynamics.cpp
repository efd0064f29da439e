#include "softarm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace softarm {

namespace {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

// Finite-difference steps: position Jacobians are differenced tightly, the
// inertia tensor derivative uses a wider step to keep the quotient clean.
constexpr double kJacStep = 1e-6;
constexpr double kMassDerivStep = 3e-6;
constexpr double kRegularization = 1e-9;

// 16-node Gauss-Legendre rule on [-1, 1].
constexpr int kGaussN = 16;
constexpr double kGaussX[kGaussN / 2] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
};
constexpr double kGaussW[kGaussN / 2] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
};

// Integral of f(s)*s over [0, b] (signed b).
template <typename F>
double gauss_moment(double b, F&& f) {
    const double half = 0.5 * b;
    double acc = 0.0;
    for (int i = 0; i < kGaussN / 2; ++i) {
        const double sp = half * (1.0 + kGaussX[i]);
        const double sm = half * (1.0 - kGaussX[i]);
        acc += kGaussW[i] * (f(sp) * sp + f(sm) * sm);
    }
    return half * acc;
}

int vars_per_segment(const RobotSpec& robot) { return robot.planar() ? 2 : 3; }

void check_state(const RobotSpec& robot, const VectorXd& q) {
    if (q.size() != state_dim(robot)) {
        throw std::invalid_argument("state dimension does not match the robot");
    }
}

std::vector<Vec3> midpoints_at(const RobotSpec& robot, const VectorXd& q) {
    return link_midpoints(robot, config_from_state(robot, q), true);
}

// Central-difference Jacobians of every link midpoint w.r.t. q, stacked as
// one (3K) x n matrix.
MatrixXd midpoint_jacobian(const RobotSpec& robot, const VectorXd& q) {
    const int n = static_cast<int>(q.size());
    const int points = static_cast<int>(midpoints_at(robot, q).size());
    MatrixXd J(3 * points, n);
    VectorXd qp = q, qm = q;
    for (int k = 0; k < n; ++k) {
        const double h = kJacStep * (1.0 + std::abs(q[k]));
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        const auto pp = midpoints_at(robot, qp);
        const auto pm = midpoints_at(robot, qm);
        for (int i = 0; i < points; ++i) {
            J.block<3, 1>(3 * i, k) = (pp[i] - pm[i]) / (2.0 * h);
        }
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return J;
}

// Mass of each lumped point, segment mass split evenly over its links.
std::vector<double> point_masses(const RobotSpec& robot) {
    std::vector<double> masses;
    for (size_t i = 0; i < robot.segments.size(); ++i) {
        const int n = robot.segments[i].links;
        for (int k = 0; k < n; ++k) masses.push_back(robot.masses[i] / n);
    }
    return masses;
}

double k_elong(double s, const StiffnessParams& p) {
    const double t = std::tanh(p.a3 * s);
    return p.a1 + p.a2 * (t * t - 1.0);
}

double k_bend(double s, const StiffnessParams& p) {
    const double t = std::tanh(p.a6 * s);
    return p.a4 + p.a5 * (t * t - 1.0);
}

// Direction-dependent bending stiffness factor. beta is the (non-negative)
// bending angle; phi the deflection.
double bend_asymmetry(double beta, double phi, const StiffnessParams& p) {
    return 0.5 * beta * (std::sin(p.lobes * phi) + 1.0) + 1.0;
}

struct SegmentState {
    double eps = 0.0;
    double kx = 0.0;  // planar: signed curvature in kx, ky = 0
    double ky = 0.0;
};

SegmentState segment_state(const RobotSpec& robot, const VectorXd& q, int i) {
    SegmentState s;
    if (robot.planar()) {
        s.eps = q[2 * i];
        s.kx = q[2 * i + 1];
    } else {
        s.eps = q[3 * i];
        s.kx = q[3 * i + 1];
        s.ky = q[3 * i + 2];
    }
    return s;
}

}  // namespace

int state_dim(const RobotSpec& robot) {
    return vars_per_segment(robot) * robot.segment_count();
}

VectorXd state_from_config(const RobotSpec& robot, const ConfigVector& config) {
    if (config.size() != robot.segments.size()) {
        throw std::invalid_argument("config does not match the robot");
    }
    const int vps = vars_per_segment(robot);
    VectorXd q(state_dim(robot));
    for (int i = 0; i < robot.segment_count(); ++i) {
        const double l0 = robot.segments[i].rest_length;
        const double l = l0 + config[i].delta_l;
        if (!(l > 0.0)) throw std::domain_error("segment length must stay positive");
        q[vps * i] = (l - l0) / l0;
        if (robot.planar()) {
            q[vps * i + 1] = config[i].theta / l;
        } else {
            q[vps * i + 1] = std::cos(config[i].phi) * config[i].theta / l;
            q[vps * i + 2] = std::sin(config[i].phi) * config[i].theta / l;
        }
    }
    return q;
}

ConfigVector config_from_state(const RobotSpec& robot, const VectorXd& q) {
    check_state(robot, q);
    const int vps = vars_per_segment(robot);
    ConfigVector config(robot.segments.size());
    for (int i = 0; i < robot.segment_count(); ++i) {
        const double l0 = robot.segments[i].rest_length;
        const double eps = q[vps * i];
        if (!(eps > -1.0)) throw std::domain_error("strain must stay above -1");
        const double l = l0 * (1.0 + eps);
        config[i].delta_l = l0 * eps;
        if (robot.planar()) {
            config[i].theta = l * q[vps * i + 1];
            config[i].phi = 0.0;
        } else {
            const double kx = q[vps * i + 1], ky = q[vps * i + 2];
            config[i].theta = l * std::hypot(kx, ky);
            config[i].phi = (kx == 0.0 && ky == 0.0) ? 0.0 : std::atan2(ky, kx);
        }
    }
    return config;
}

MatrixXd mass_matrix(const RobotSpec& robot, const VectorXd& q) {
    check_state(robot, q);
    const int n = static_cast<int>(q.size());
    const MatrixXd J = midpoint_jacobian(robot, q);
    const auto masses = point_masses(robot);

    MatrixXd M = kRegularization * MatrixXd::Identity(n, n);
    for (size_t i = 0; i < masses.size(); ++i) {
        const auto Ji = J.block(3 * static_cast<int>(i), 0, 3, n);
        M.noalias() += masses[i] * (Ji.transpose() * Ji);
    }
    return 0.5 * (M + M.transpose());
}

MatrixXd coriolis_matrix(const RobotSpec& robot, const VectorXd& q, const VectorXd& qdot) {
    check_state(robot, q);
    if (qdot.size() != q.size()) throw std::invalid_argument("qdot dimension mismatch");
    const int n = static_cast<int>(q.size());

    std::vector<MatrixXd> dM(n);
    VectorXd qs = q;
    for (int k = 0; k < n; ++k) {
        const double h = kMassDerivStep * (1.0 + std::abs(q[k]));
        qs[k] = q[k] + h;
        const MatrixXd Mp = mass_matrix(robot, qs);
        qs[k] = q[k] - h;
        const MatrixXd Mm = mass_matrix(robot, qs);
        qs[k] = q[k];
        dM[k] = (Mp - Mm) / (2.0 * h);
    }

    MatrixXd C = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double cij = 0.0;
            for (int k = 0; k < n; ++k) {
                cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qdot[k];
            }
            C(i, j) = cij;
        }
    }
    return C;
}

double gravity_potential(const RobotSpec& robot, const VectorXd& q) {
    check_state(robot, q);
    const auto mids = midpoints_at(robot, q);
    const auto masses = point_masses(robot);
    double v = 0.0;
    for (size_t i = 0; i < mids.size(); ++i) {
        v -= masses[i] * robot.gravity.dot(mids[i]);
    }
    return v;
}

VectorXd gravity_vector(const RobotSpec& robot, const VectorXd& q) {
    check_state(robot, q);
    const int n = static_cast<int>(q.size());
    if (robot.gravity.isZero()) return VectorXd::Zero(n);
    const MatrixXd J = midpoint_jacobian(robot, q);
    const auto masses = point_masses(robot);
    VectorXd g = VectorXd::Zero(n);
    for (size_t i = 0; i < masses.size(); ++i) {
        g.noalias() -=
            masses[i] * (J.block(3 * static_cast<int>(i), 0, 3, n).transpose() * robot.gravity);
    }
    return g;
}

double elastic_potential(const RobotSpec& robot, const VectorXd& q,
                         const StiffnessParams& params) {
    check_state(robot, q);
    double u = 0.0;
    for (int i = 0; i < robot.segment_count(); ++i) {
        const SegmentState s = segment_state(robot, q, i);
        if (!(s.eps > -1.0)) throw std::domain_error("strain must stay above -1");
        const double l = robot.segments[i].rest_length * (1.0 + s.eps);
        const double beta = l * std::hypot(s.kx, s.ky);
        const double phi = (s.kx == 0.0 && s.ky == 0.0) ? 0.0 : std::atan2(s.ky, s.kx);
        u += gauss_moment(s.eps, [&](double t) { return k_elong(t, params); });
        u += bend_asymmetry(beta, phi, params) *
             gauss_moment(beta, [&](double t) { return k_bend(t, params); });
    }
    return u;
}

VectorXd stiffness_vector(const RobotSpec& robot, const VectorXd& q,
                          const StiffnessParams& params) {
    check_state(robot, q);
    const int vps = vars_per_segment(robot);
    VectorXd K = VectorXd::Zero(q.size());
    for (int i = 0; i < robot.segment_count(); ++i) {
        const SegmentState s = segment_state(robot, q, i);
        if (!(s.eps > -1.0)) throw std::domain_error("strain must stay above -1");
        const double l0 = robot.segments[i].rest_length;
        const double l = l0 * (1.0 + s.eps);
        const double kn = std::hypot(s.kx, s.ky);
        const double beta = l * kn;
        const double phi = (s.kx == 0.0 && s.ky == 0.0) ? 0.0 : std::atan2(s.ky, s.kx);

        // Elongation: d/deps of the strain integral (Leibniz).
        K[vps * i] += k_elong(s.eps, params) * s.eps;

        // Bending energy U_b = asym(beta, phi) * B(beta).
        const double B = gauss_moment(beta, [&](double t) { return k_bend(t, params); });
        const double asym = bend_asymmetry(beta, phi, params);
        const double dasym_dbeta = 0.5 * (std::sin(params.lobes * phi) + 1.0);
        const double dUb_dbeta = dasym_dbeta * B + asym * k_bend(beta, params) * beta;

        // beta = l0 (1 + eps) |k|; its eps-derivative feeds bending into the
        // strain coordinate.
        K[vps * i] += dUb_dbeta * l0 * kn;

        if (kn > 0.0) {
            const double dasym_dphi = 0.5 * beta * params.lobes * std::cos(params.lobes * phi);
            const double dUb_dphi = dasym_dphi * B;
            if (robot.planar()) {
                // beta = l|k|: d|k|/dk = sign(k); phi is fixed at 0.
                K[vps * i + 1] += dUb_dbeta * l * (s.kx >= 0.0 ? 1.0 : -1.0);
            } else {
                K[vps * i + 1] += dUb_dbeta * l * s.kx / kn - dUb_dphi * s.ky / (kn * kn);
                K[vps * i + 2] += dUb_dbeta * l * s.ky / kn + dUb_dphi * s.kx / (kn * kn);
            }
        }
    }
    return K;
}

VectorXd damping_vector(const DampingParams& params, const VectorXd& qdot) {
    if (params.r.size() != qdot.size()) {
        throw std::invalid_argument("damping dimension does not match qdot");
    }
    if ((params.r.array() < 0.0).any()) {
        throw std::invalid_argument("damping entries must be non-negative");
    }
    return params.r.cwiseProduct(qdot);
}

MatrixXd input_mapping(const ActuationParams& params) {
    if (params.bellows < 3) throw std::invalid_argument("input mapping needs at least 3 bellows");
    if (!(params.h1 > 0.0) || !(params.h2 > 0.0)) {
        throw std::invalid_argument("mapping coefficients must be positive");
    }
    const int m = params.bellows;
    MatrixXd H(3, m);
    for (int i = 0; i < m; ++i) {
        const double gamma = (i) * 2.0 * std::numbers::pi / m;
        H(0, i) = params.h1;
        H(1, i) = -params.h2 * std::cos(gamma);
        H(2, i) = params.erratum_fix ? params.h2 * std::sin(gamma) : params.h2 * std::cos(gamma);
    }
    return H;
}

PressureSolve pressures_from_tau(const MatrixXd& H, const Vector3d& tau, double p_max) {
    if (H.rows() != 3) throw std::invalid_argument("input mapping must have 3 rows");
    if (!(p_max > 0.0)) throw std::invalid_argument("pressure limit must be positive");

    PressureSolve out;
    out.pressures = H.completeOrthogonalDecomposition().solve(tau);
    for (int i = 0; i < out.pressures.size(); ++i) {
        const double raw = out.pressures[i];
        const double clamped = std::clamp(raw, 0.0, p_max);
        if (clamped != raw) ++out.clamped;
        out.pressures[i] = clamped;
    }
    out.residual = (H * out.pressures - tau).norm();
    return out;
}

VectorXd acceleration(const RobotSpec& robot, const DynState& state, const VectorXd& tau,
                      const DynParams& params) {
    check_state(robot, state.q);
    if (state.qdot.size() != state.q.size() || tau.size() != state.q.size()) {
        throw std::invalid_argument("state/torque dimension mismatch");
    }
    const DampingParams& damping =
        params.damping.r.size() > 0
            ? params.damping
            : DampingParams{VectorXd::Constant(state.q.size(), 0.1)};

    const MatrixXd M = mass_matrix(robot, state.q);
    VectorXd rhs = tau;
    rhs.noalias() -= coriolis_matrix(robot, state.q, state.qdot) * state.qdot;
    rhs -= gravity_vector(robot, state.q);
    rhs -= stiffness_vector(robot, state.q, params.stiffness);
    rhs -= damping_vector(damping, state.qdot);

    const VectorXd qddot = M.ldlt().solve(rhs);
    if (!qddot.allFinite()) {
        throw IntegrationError("non-finite generalized acceleration", state);
    }
    return qddot;
}

DynState step_dynamics(const RobotSpec& robot, const DynState& state, const VectorXd& tau,
                       double dt, const DynParams& params) {
    if (!(dt > 0.0) || dt > 0.01) {
        throw std::invalid_argument("dt must lie in (0, 0.01]");
    }

    auto deriv = [&](const DynState& s) -> std::pair<VectorXd, VectorXd> {
        return {s.qdot, acceleration(robot, s, tau, params)};
    };

    const auto [k1q, k1v] = deriv(state);
    const auto [k2q, k2v] = deriv({state.q + 0.5 * dt * k1q, state.qdot + 0.5 * dt * k1v});
    const auto [k3q, k3v] = deriv({state.q + 0.5 * dt * k2q, state.qdot + 0.5 * dt * k2v});
    const auto [k4q, k4v] = deriv({state.q + dt * k3q, state.qdot + dt * k3v});

    DynState next;
    next.q = state.q + dt / 6.0 * (k1q + 2.0 * (k2q + k3q) + k4q);
    next.qdot = state.qdot + dt / 6.0 * (k1v + 2.0 * (k2v + k3v) + k4v);
    if (!next.q.allFinite() || !next.qdot.allFinite()) {
        throw IntegrationError("non-finite state after integration step", state);
    }
    return next;
}

double kinetic_energy(const RobotSpec& robot, const DynState& state) {
    const MatrixXd M = mass_matrix(robot, state.q);
    return 0.5 * state.qdot.dot(M * state.qdot);
}

double total_energy(const RobotSpec& robot, const DynState& state,
                    const StiffnessParams& stiffness) {
    return kinetic_energy(robot, state) + elastic_potential(robot, state.q, stiffness) +
           gravity_potential(robot, state.q);
}

}  // namespace softarm
