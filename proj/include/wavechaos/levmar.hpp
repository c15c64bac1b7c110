#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "wavechaos/types.hpp"

namespace wavechaos::lm {

struct Options {
    int max_iterations = 500;
    double relative_tol = 1e-10;  // relative change of the residual norm
    double step_tol = 1e-12;      // step norm relative to parameter norm
    double lambda0 = 1e-3;
};

struct Result {
    RVector params;
    RMatrix covariance;       // s^2 (J^T J)^{-1}, s^2 = |r|^2 / (m - n)
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
};

/// Damped Gauss-Newton (Marquardt scaling). `model(p, r, J)` fills the
/// residual vector and, when J is non-null, its Jacobian.
template <class Model>
Result levenberg_marquardt(Model&& model, RVector p, const Options& opt = {}) {
    RVector r;
    RMatrix J;
    model(p, r, &J);
    const auto m = r.size();
    const auto n = p.size();
    double cost = r.squaredNorm();
    const double scale0 = std::max(cost, 1e-300);
    double lambda = opt.lambda0;
    Result out;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        out.iterations = it;
        const RMatrix jtj = J.transpose() * J;
        const RVector g = J.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            RMatrix a = jtj;
            for (Eigen::Index i = 0; i < n; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-30);
            const RVector step = a.ldlt().solve(-g);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const RVector trial = p + step;
            RVector rt;
            model(trial, rt, nullptr);
            const double trial_cost = rt.allFinite() ? rt.squaredNorm() : INFINITY;
            if (trial_cost < cost) {
                const double change = (cost - trial_cost) / cost;
                const double step_norm = step.norm();
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                model(p, r, &J);
                if (change < opt.relative_tol || step_norm < opt.step_tol * (p.norm() + opt.step_tol) ||
                    cost < 1e-30 * scale0) {
                    out.converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            // no descent direction left: we sit at a minimum to working precision
            out.converged = g.norm() <= 1e-8 * std::sqrt(jtj.diagonal().sum() * std::max(cost, 1e-300)) || cost < 1e-30 * scale0;
            break;
        }
        if (out.converged) break;
    }
    out.params = p;
    out.residual_norm = std::sqrt(cost);
    const RMatrix jtj = J.transpose() * J;
    const double s2 = m > n ? cost / static_cast<double>(m - n) : 0.0;
    out.covariance = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    return out;
}

}  // namespace wavechaos::lm
