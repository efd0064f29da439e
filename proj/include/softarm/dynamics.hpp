#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "softarm/geometry.hpp"

namespace softarm {

/// Generalized coordinates: per segment [strain, curvature_x, curvature_y]
/// (spatial) or [strain, curvature] (planar), plus their time derivatives.
struct DynState {
    Eigen::VectorXd q;
    Eigen::VectorXd qdot;
};

/// Coefficients of the saturating elongation/bending stiffness densities
/// k_e(s) = a1 + a2*(tanh(a3 s)^2 - 1) and
/// k_b(s) = asym(q) * (a4 + a5*(tanh(a6 s)^2 - 1)),
/// where asym depends on the bending direction relative to the bellows
/// layout (lobes). Defaults are artifact placeholders in consistent units,
/// not identified material values.
struct StiffnessParams {
    double a1 = 1.0;
    double a2 = 0.5;
    double a3 = 5.0;
    double a4 = 1.0;
    double a5 = 0.5;
    double a6 = 5.0;
    int lobes = 3;
};

/// Diagonal viscous damping, one entry per generalized coordinate.
struct DampingParams {
    Eigen::VectorXd r;

    static DampingParams uniform(double value, int dim) {
        return DampingParams{Eigen::VectorXd::Constant(dim, value)};
    }
};

/// Pressure-to-generalized-force mapping coefficients. The identified values
/// h1 = 8e-4 and h2 = 7.91e-7 ship as defaults. With erratum_fix the third
/// row of the mapping uses sin(gamma) instead of the (rank-deficient)
/// printed cos(gamma).
struct ActuationParams {
    double h1 = 8e-4;
    double h2 = 7.91e-7;
    int bellows = 3;
    double p_max = 400.0;  // kPa
    bool erratum_fix = true;
};

struct DynParams {
    StiffnessParams stiffness;
    DampingParams damping;  // empty -> 0.1 per coordinate
    ActuationParams actuation;
};

/// Integration blow-up; carries the offending state.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(std::string what, DynState state)
        : std::runtime_error(std::move(what)), state(std::move(state)) {}
    DynState state;
};

int state_dim(const RobotSpec& robot);

/// Configuration -> state map: eps = dl/l0, k = theta/l split along the
/// deflection direction. Throws std::domain_error when a strain reaches -1.
Eigen::VectorXd state_from_config(const RobotSpec& robot, const ConfigVector& config);
ConfigVector config_from_state(const RobotSpec& robot, const Eigen::VectorXd& q);

/// Lumped-mass inertia matrix: each link's mass share sits at its midpoint,
/// position Jacobians come from central differences of the state -> chain
/// map. Symmetric, positive definite after a 1e-9 diagonal shift.
Eigen::MatrixXd mass_matrix(const RobotSpec& robot, const Eigen::VectorXd& q);

/// Coriolis/centrifugal matrix from the Christoffel symbols of the
/// finite-differenced inertia, so that dM/dt - 2C stays skew-symmetric.
Eigen::MatrixXd coriolis_matrix(const RobotSpec& robot, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot);

/// Gravitational potential of the lumped masses and its gradient.
double gravity_potential(const RobotSpec& robot, const Eigen::VectorXd& q);
Eigen::VectorXd gravity_vector(const RobotSpec& robot, const Eigen::VectorXd& q);

/// Hyper-elastic potential, integrated per segment by 16-node Gauss-Legendre
/// quadrature over the strain and bending-angle intervals.
double elastic_potential(const RobotSpec& robot, const Eigen::VectorXd& q,
                         const StiffnessParams& params);
/// Gradient of elastic_potential w.r.t. q (chain rule + Leibniz on the
/// integral limits; matches finite differences of the potential).
Eigen::VectorXd stiffness_vector(const RobotSpec& robot, const Eigen::VectorXd& q,
                                 const StiffnessParams& params);

Eigen::VectorXd damping_vector(const DampingParams& params, const Eigen::VectorXd& qdot);

/// 3 x bellows input mapping; full rank 3 with erratum_fix, rank <= 2 in the
/// printed form (rows 2 and 3 are exact negatives).
Eigen::MatrixXd input_mapping(const ActuationParams& params);

struct PressureSolve {
    Eigen::VectorXd pressures;  // kPa, clamped to [0, p_max]
    double residual = 0.0;      // ||H u - tau|| after clamping
    int clamped = 0;            // number of clamped channels
};

/// Minimum-norm least-squares solve of H u = tau followed by clamping to
/// [0, p_max]. Out-of-range torques are projected, with the residual
/// reported.
PressureSolve pressures_from_tau(const Eigen::MatrixXd& H, const Eigen::Vector3d& tau,
                                 double p_max);

/// Generalized acceleration M^-1 (tau - C qdot - G - K - D).
Eigen::VectorXd acceleration(const RobotSpec& robot, const DynState& state,
                             const Eigen::VectorXd& tau, const DynParams& params);

/// One fixed-step RK4 step with tau held constant; dt must lie in (0, 0.01].
DynState step_dynamics(const RobotSpec& robot, const DynState& state,
                       const Eigen::VectorXd& tau, double dt, const DynParams& params);

double kinetic_energy(const RobotSpec& robot, const DynState& state);

/// Kinetic + elastic + gravitational energy.
double total_energy(const RobotSpec& robot, const DynState& state,
                    const StiffnessParams& stiffness);

}  // namespace softarm
