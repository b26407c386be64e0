#include "cryptospan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cryptospan::solve {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cssv += u[static_cast<std::size_t>(i)];
        double t = (cssv - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - theta);
    return out;
}

Eigen::VectorXd project_budget_hyperplane(const Eigen::VectorXd& v) {
    double shift = (v.sum() - 1.0) / static_cast<double>(v.size());
    return v.array() - shift;
}

// Projected gradient with Barzilai-Borwein steps, safeguarded by a
// backtracking sufficient-decrease test against the projected step.
PgResult minimize_projected(const Objective& f, const Eigen::VectorXd& x0,
                            bool long_only, const PgOptions& opts) {
    auto project = [&](const Eigen::VectorXd& v) {
        return long_only ? project_simplex(v) : project_budget_hyperplane(v);
    };
    PgResult res;
    res.x = project(x0);
    Eigen::VectorXd grad(res.x.size());
    res.value = f(res.x, grad);
    double step = opts.init_step;
    Eigen::VectorXd x_prev = res.x, g_prev = grad;
    bool have_prev = false;

    for (res.iters = 0; res.iters < opts.max_iters; ++res.iters) {
        res.kkt_residual = (res.x - project(res.x - grad)).lpNorm<Eigen::Infinity>();
        if (res.kkt_residual < opts.grad_tol) {
            res.converged = true;
            return res;
        }
        if (have_prev) {
            Eigen::VectorXd s = res.x - x_prev;
            Eigen::VectorXd y = grad - g_prev;
            double sy = s.dot(y);
            if (sy > 1e-30) step = std::clamp(s.squaredNorm() / sy, 1e-12, 1e12);
        }
        x_prev = res.x;
        g_prev = grad;
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            Eigen::VectorXd trial = project(res.x - step * grad);
            Eigen::VectorXd d = trial - res.x;
            double dn2 = d.squaredNorm();
            if (dn2 == 0.0) {  // projected step vanished, point is stationary
                res.converged = true;
                res.kkt_residual = 0.0;
                return res;
            }
            Eigen::VectorXd gt(trial.size());
            double ftrial = f(trial, gt);
            if (ftrial <= res.value + grad.dot(d) + 0.5 / step * dn2 + 1e-30) {
                res.x = trial;
                res.value = ftrial;
                grad = gt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        have_prev = true;
    }
    res.kkt_residual = (res.x - project(res.x - grad)).lpNorm<Eigen::Infinity>();
    res.converged = res.kkt_residual < opts.grad_tol;
    return res;
}

}  // namespace cryptospan::solve
