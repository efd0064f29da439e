#include "softarm/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace softarm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd clamp(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

MinimizeResult minimize_box(const ObjectiveFn& objective, VectorXd x0,
                            const VectorXd& lower, const VectorXd& upper,
                            const MinimizeOptions& options) {
    const int n = static_cast<int>(x0.size());
    if (lower.size() != n || upper.size() != n) {
        throw std::invalid_argument("minimize_box: bound dimensions do not match x0");
    }
    if ((lower.array() > upper.array()).any()) {
        throw std::invalid_argument("minimize_box: lower bound exceeds upper bound");
    }

    MinimizeResult out;
    VectorXd x = clamp(x0, lower, upper);
    VectorXd g(n), g_new(n);
    double f = objective(x, g);
    if (!std::isfinite(f) || !g.allFinite()) {
        out.x = x;
        out.value = f;
        out.status = MinimizeStatus::numerical_failure;
        return out;
    }

    MatrixXd H = MatrixXd::Identity(n, n);
    const double armijo = 1e-4;

    auto projected_gradient = [&](const VectorXd& xk, const VectorXd& gk) {
        return (xk - clamp(xk - gk, lower, upper)).eval();
    };

    int iter = 0;
    MinimizeStatus status = MinimizeStatus::max_iterations;
    while (true) {
        if (f <= options.value_target) {
            status = MinimizeStatus::converged_value;
            break;
        }
        const VectorXd pg = projected_gradient(x, g);
        out.projected_gradient_norm = pg.lpNorm<Eigen::Infinity>();
        if (out.projected_gradient_norm <= options.gradient_tolerance) {
            status = MinimizeStatus::converged_gradient;
            break;
        }
        if (iter >= options.max_iterations) {
            status = MinimizeStatus::max_iterations;
            break;
        }

        bool accepted = false;
        bool failed_numerics = false;
        VectorXd x_next, s;
        double f_next = f;

        // Quasi-Newton direction first; plain projected gradient as fallback.
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            VectorXd d = attempt == 0 ? VectorXd(-(H * g)) : VectorXd(-g);
            // Do not push against bounds that are already active.
            for (int i = 0; i < n; ++i) {
                if ((x[i] <= lower[i] && d[i] < 0.0) || (x[i] >= upper[i] && d[i] > 0.0)) {
                    d[i] = 0.0;
                }
            }
            if (attempt == 0 && g.dot(d) >= 0.0) continue;  // not a descent direction

            double alpha = 1.0;
            for (int ls = 0; ls < 60; ++ls) {
                x_next = clamp(x + alpha * d, lower, upper);
                s = x_next - x;
                const double step_norm = s.lpNorm<Eigen::Infinity>();
                if (step_norm <= options.step_tolerance) break;
                const double f_try = objective(x_next, g_new);
                if (!std::isfinite(f_try) || !g_new.allFinite()) {
                    failed_numerics = true;
                    alpha *= 0.5;
                    continue;
                }
                failed_numerics = false;
                if (f_try <= f + armijo * g.dot(s)) {
                    f_next = f_try;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (attempt == 0 && !accepted) H.setIdentity();
        }

        if (failed_numerics) {
            status = MinimizeStatus::numerical_failure;
            break;
        }
        if (!accepted) {
            status = MinimizeStatus::converged_step;
            break;
        }

        const VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const VectorXd Hy = H * y;
            H += (sy + y.dot(Hy)) * rho * rho * (s * s.transpose());
            H -= rho * (Hy * s.transpose() + s * Hy.transpose());
        }

        x = x_next;
        f = f_next;
        g = g_new;
        ++iter;
        if (s.lpNorm<Eigen::Infinity>() <= options.step_tolerance) {
            status = MinimizeStatus::converged_step;
            break;
        }
    }

    out.x = x;
    out.value = f;
    out.iterations = iter;
    out.status = status;
    return out;
}

MinimizeResult minimize_box(const ObjectiveFn& objective, const EqualityFn& equalities,
                            double equality_weight, VectorXd x0,
                            const VectorXd& lower, const VectorXd& upper,
                            const MinimizeOptions& options) {
    // Quadratic penalty with a finite-difference gradient for the equality
    // part; the base objective keeps its own gradient.
    auto penalized = [&](const VectorXd& x, VectorXd& grad) {
        double f = objective(x, grad);
        const VectorXd h = equalities(x);
        f += equality_weight * h.squaredNorm();
        const double step = 1e-7;
        for (int i = 0; i < x.size(); ++i) {
            VectorXd xp = x, xm = x;
            const double hh = step * (1.0 + std::abs(x[i]));
            xp[i] += hh;
            xm[i] -= hh;
            grad[i] += equality_weight *
                       (equalities(xp).squaredNorm() - equalities(xm).squaredNorm()) / (2.0 * hh);
        }
        return f;
    };
    MinimizeResult out = minimize_box(penalized, std::move(x0), lower, upper, options);
    out.equality_violation = equalities(out.x).norm();
    return out;
}

Eigen::VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& x, double step) {
    VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double h = step * (1.0 + std::abs(x[i]));
        VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace softarm
