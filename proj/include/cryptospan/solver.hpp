#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cryptospan::solve {

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// Euclidean projection onto the budget hyperplane {sum x = 1}.
Eigen::VectorXd project_budget_hyperplane(const Eigen::VectorXd& v);

/// Smooth objective: returns f(x) and fills grad.
using Objective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct PgOptions {
    int max_iters = 50000;
    double grad_tol = 1e-13;   // on the projected-gradient step norm
    double init_step = 1.0;
};

struct PgResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iters = 0;
    bool converged = false;
    double kkt_residual = 0.0;  // inf-norm of x - P(x - grad)
};

/// Monotone projected gradient with backtracking line search. The feasible
/// set is the simplex (long_only) or the budget hyperplane.
PgResult minimize_projected(const Objective& f, const Eigen::VectorXd& x0,
                            bool long_only, const PgOptions& opts = {});

}  // namespace cryptospan::solve
