#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "cryptospan/frontier.hpp"

namespace cryptospan {

/// Asymmetric trading cost model: linear in turnover for benchmark assets,
/// quadratic (with scalability factor psi) for test assets. All costs are in
/// currency units of v0.
struct CostModel {
    double c_benchmark = 0.0035;  // 35 BP per unit turnover
    double c_test = 0.0050;      // 50 BP reference factor
    double psi = 3.0;
    double v0 = 1.0;
    double budget = 0.0010;  // cost budget as fraction of wealth, 10 BP

    double c_tilde() const { return psi * c_test; }
};

struct ConstrainedSolution {
    PortfolioWeights weights;
    double cost_spent = 0.0;  // exact absolute-value cost, currency units
    double objective = 0.0;   // variance (gmvp) or Sharpe ratio (tp)
    bool binding = false;     // budget limited the solve
    int iters = 0;
    double kkt_residual = 0.0;
    bool converged = false;
};

double linear_cost(double dw, double c, double v0);
double quadratic_cost(double dw, double c_tilde, double v0);

/// psi making the quadratic and linear costs integrate to the same value
/// over [lo, hi] under a uniform turnover density.
double calibrate_psi(double lo, double hi);

/// Turnover where the two cost curves cross: 2 / psi.
double cost_intersection(double c_test, double psi);

/// Cumulated cost of moving w_old -> w_new; first k assets pay the linear
/// benchmark cost, the rest the quadratic test cost.
double total_cost(const Eigen::VectorXd& w_old, const Eigen::VectorXd& w_new,
                  const CostModel& model, std::size_t k);

ConstrainedSolution optimize_with_costs(const MarketMoments& m,
                                        const Eigen::VectorXd& w_initial,
                                        const CostModel& model,
                                        PortfolioLabel objective,
                                        Constraint constraint);

struct BudgetSweepRow {
    double budget = 0.0;  // fraction of wealth
    ConstrainedSolution gmvp;
    ConstrainedSolution tp;
};

std::vector<BudgetSweepRow> budget_sweep(const MarketMoments& m,
                                         const Eigen::VectorXd& w_initial,
                                         const CostModel& model,
                                         const std::vector<double>& budgets,
                                         Constraint constraint =
                                             Constraint::unconstrained);

/// Cost-constrained minimum-variance portfolios over a target-return grid.
std::vector<FrontierPoint> net_frontier(const MarketMoments& m,
                                        const Eigen::VectorXd& w_initial,
                                        const CostModel& model,
                                        Constraint constraint,
                                        std::size_t n_points = 50);

void write_budget_sweep_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& test_assets,
                            const std::vector<BudgetSweepRow>& rows,
                            std::size_t k);

}  // namespace cryptospan
