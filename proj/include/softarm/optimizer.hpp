#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

namespace softarm {

/// Objective callable: returns f(x) and fills `grad` (same size as x).
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Equality residual callable: returns h(x) as a vector.
using EqualityFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x)>;

struct MinimizeOptions {
    int max_iterations = 200;
    double value_target = -std::numeric_limits<double>::infinity();  // stop when f <= this
    double gradient_tolerance = 1e-10;  // on the projected gradient, inf-norm
    double step_tolerance = 1e-12;      // on the accepted step, inf-norm
};

enum class MinimizeStatus {
    converged_value,
    converged_gradient,
    converged_step,
    max_iterations,
    numerical_failure,
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    MinimizeStatus status = MinimizeStatus::max_iterations;
    double projected_gradient_norm = 0.0;
    std::optional<double> equality_violation;  // ||h(x*)||, set when equalities given
};

/// Projected quasi-Newton minimization over a box: BFGS inverse-Hessian
/// approximation, direction projection onto the active bounds and a
/// backtracking Armijo line search. Box constraints hold exactly at every
/// iterate.
MinimizeResult minimize_box(const ObjectiveFn& objective, Eigen::VectorXd x0,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const MinimizeOptions& options = {});

/// Same, with smooth equality constraints folded in as a quadratic penalty
/// weight*||h(x)||^2. The remaining violation ||h(x*)|| is reported in the
/// result, never absorbed silently.
MinimizeResult minimize_box(const ObjectiveFn& objective, const EqualityFn& equalities,
                            double equality_weight, Eigen::VectorXd x0,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            const MinimizeOptions& options = {});

/// Central finite-difference gradient helper for objectives without one,
/// step scaled per variable.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-7);

}  // namespace softarm
