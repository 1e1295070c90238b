#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "zplcav/errors.hpp"

namespace zplcav {

// A nonlinear least-squares problem with an analytic Jacobian. `evaluate`
// returns false when the parameters are outside the model's valid region, in
// which case the trial step is rejected.
template <class M>
concept ResidualModel = requires(const M& m, const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
    { m.residual_count() } -> std::convertible_to<Eigen::Index>;
    { m.evaluate(p, r, j) } -> std::convertible_to<bool>;
};

struct LmOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
    double initial_damping = 1e-3;
};

struct LmResult {
    Eigen::VectorXd parameters;
    Eigen::VectorXd standard_errors; // 1 sigma, residual-scaled covariance
    double residual_norm = 0.0;      // ||r||_2 at the optimum
    double initial_residual_norm = 0.0;
    double reciprocal_condition = 1.0; // of J^T J at the optimum
    int iterations = 0;
};

namespace detail {

inline Eigen::VectorXd standard_errors(const Eigen::MatrixXd& jac, double ssr, double& rcond) {
    const Eigen::Index m = jac.rows();
    const Eigen::Index p = jac.cols();
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj);
    const auto& sv = svd.singularValues();
    rcond = sv(0) > 0.0 ? sv(p - 1) / sv(0) : 0.0;
    Eigen::VectorXd err = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    if (m > p && rcond > 1e-15) {
        const double s2 = ssr / static_cast<double>(m - p);
        Eigen::MatrixXd cov = s2 * jtj.inverse();
        for (Eigen::Index i = 0; i < p; ++i) err(i) = std::sqrt(std::max(0.0, cov(i, i)));
    }
    return err;
}

} // namespace detail

// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt diagonal scaling).
// Throws ConvergenceError carrying the best iterate if the budget runs out.
template <ResidualModel Model>
LmResult levenberg_marquardt(const Model& model, Eigen::VectorXd start, const LmOptions& opt = {}) {
    const Eigen::Index m = model.residual_count();
    const Eigen::Index p = start.size();
    Eigen::VectorXd r(m), r_trial(m);
    Eigen::MatrixXd jac(m, p), jac_trial(m, p);
    if (!model.evaluate(start, r, jac)) throw DomainError("levenberg_marquardt: invalid starting point");

    LmResult out;
    out.parameters = start;
    double ssr = r.squaredNorm();
    out.initial_residual_norm = std::sqrt(ssr);
    double lambda = opt.initial_damping;
    bool converged = ssr == 0.0;
    int it = 0;

    while (!converged && it < opt.max_iterations) {
        ++it;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index i = 0; i < p; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-30);
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            const Eigen::VectorXd trial = out.parameters + step;
            if (step.allFinite() && model.evaluate(trial, r_trial, jac_trial)) {
                const double ssr_trial = r_trial.squaredNorm();
                if (ssr_trial <= ssr) {
                    const double rel = ssr > 0.0 ? (ssr - ssr_trial) / ssr : 0.0;
                    out.parameters = trial;
                    r.swap(r_trial);
                    jac.swap(jac_trial);
                    ssr = ssr_trial;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    if (rel < opt.relative_tolerance || ssr == 0.0) converged = true;
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e16) {
                // No descent direction left: stationary point.
                converged = true;
                break;
            }
        }
    }

    out.iterations = it;
    out.residual_norm = std::sqrt(ssr);
    if (!converged) {
        std::vector<double> best(out.parameters.data(), out.parameters.data() + p);
        throw ConvergenceError("levenberg_marquardt: iteration budget exhausted", std::move(best),
                               out.residual_norm);
    }
    out.standard_errors = detail::standard_errors(jac, ssr, out.reciprocal_condition);
    return out;
}

} // namespace zplcav
