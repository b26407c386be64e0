#include "cryptospan/txcost.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "cryptospan/csv.hpp"
#include "cryptospan/solver.hpp"

namespace cryptospan {

namespace {

constexpr double kSmoothEps = 1e-8;  // |dw| smoothing in the solver only

// Smooth overestimate of the exact cost: sqrt(d^2+eps^2) >= |d|, so driving
// the smoothed cost under the budget keeps the exact cost under it too.
double smoothed_cost_grad(const Eigen::VectorXd& w_old,
                          const Eigen::VectorXd& w, const CostModel& model,
                          std::size_t k, Eigen::VectorXd& grad) {
    const double ct = model.c_tilde();
    double total = 0.0;
    grad.setZero(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double d = w[i] - w_old[i];
        if (static_cast<std::size_t>(i) < k) {
            double s = std::sqrt(d * d + kSmoothEps * kSmoothEps);
            total += model.c_benchmark * s * model.v0;
            grad[i] = model.c_benchmark * model.v0 * d / s;
        } else {
            total += 0.5 * ct * d * d * model.v0;
            grad[i] = ct * model.v0 * d;
        }
    }
    return total;
}

double variance_scale(const MarketMoments& m) {
    return std::max(m.V.diagonal().mean(), 1e-300);
}

solve::Objective base_objective(const MarketMoments& m, PortfolioLabel obj,
                                double scale) {
    if (obj == PortfolioLabel::gmvp) {
        return [&m, scale](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
            Eigen::VectorXd vw = m.V * w;
            g = 2.0 * vw / scale;
            return w.dot(vw) / scale;
        };
    }
    return [&m](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
        Eigen::VectorXd vw = m.V * w;
        double q = w.dot(vw);
        double s = std::sqrt(q);
        double ret = m.mu.dot(w);
        g = -m.mu / s + ret * vw / (s * q);
        return -ret / s;
    };
}

// Augmented Lagrangian over the hyperplane/simplex, with the smoothed cost
// budget as an inequality and an optional return-target equality.
solve::PgResult alm_cost_solve(const MarketMoments& m,
                               const Eigen::VectorXd& w_init,
                               const CostModel& model, PortfolioLabel obj,
                               bool long_only, std::optional<double> target,
                               const Eigen::VectorXd& x0) {
    const double scale = variance_scale(m);
    const double limit = model.budget * model.v0;
    const std::size_t k = m.k;
    solve::Objective f0 = base_objective(m, obj, scale);

    double lam = 0.0, muc = 0.0, rho = 100.0;
    Eigen::VectorXd x = x0;
    solve::PgResult last;
    Eigen::VectorXd cg(x0.size());
    for (int outer = 0; outer < 80; ++outer) {
        solve::Objective f = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
            double v = f0(w, g);
            double h = smoothed_cost_grad(w_init, w, model, k, cg) - limit;
            double act = std::max(0.0, muc + rho * h);
            v += (act * act - muc * muc) / (2.0 * rho);
            g += act * cg;
            if (target) {
                double e = m.mu.dot(w) - *target;
                v += lam * e + 0.5 * rho * e * e;
                g += (lam + rho * e) * m.mu;
            }
            return v;
        };
        solve::PgOptions opts;
        opts.grad_tol = 1e-11;
        last = solve::minimize_projected(f, x, long_only, opts);
        x = last.x;
        double h = smoothed_cost_grad(w_init, x, model, k, cg) - limit;
        double ev = target ? m.mu.dot(x) - *target : 0.0;
        if (h < 1e-11 && std::fabs(ev) < 1e-11) {
            last.converged = true;
            return last;
        }
        muc = std::max(0.0, muc + rho * h);
        lam += rho * ev;
        rho = std::min(rho * 5.0, 1e16);
    }
    last.converged = false;
    return last;
}

// Largest point on the segment w_init -> x with exact cost inside the
// budget; the exact cost is monotone along the segment.
Eigen::VectorXd feasible_polish(const Eigen::VectorXd& w_init,
                                const Eigen::VectorXd& x,
                                const CostModel& model, std::size_t k) {
    const double limit = model.budget * model.v0;
    if (total_cost(w_init, x, model, k) <= limit) return x;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        Eigen::VectorXd w = w_init + mid * (x - w_init);
        (total_cost(w_init, w, model, k) <= limit ? lo : hi) = mid;
    }
    return w_init + lo * (x - w_init);
}

double objective_value(const MarketMoments& m, PortfolioLabel obj,
                       const Eigen::VectorXd& w) {
    return obj == PortfolioLabel::gmvp ? portfolio_variance(m, w)
                                       : portfolio_sharpe(m, w);
}

// smaller is better for both objectives
double objective_key(const MarketMoments& m, PortfolioLabel obj,
                     const Eigen::VectorXd& w) {
    double v = objective_value(m, obj, w);
    return obj == PortfolioLabel::gmvp ? v : -v;
}

}  // namespace

double linear_cost(double dw, double c, double v0) {
    if (dw < 0.0) throw std::invalid_argument("turnover must be nonnegative");
    return c * dw * v0;
}

double quadratic_cost(double dw, double c_tilde, double v0) {
    if (dw < 0.0) throw std::invalid_argument("turnover must be nonnegative");
    return 0.5 * c_tilde * dw * dw * v0;
}

double calibrate_psi(double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi))
        throw std::invalid_argument("need 0 <= lo < hi");
    if (!std::isfinite(hi))
        throw std::invalid_argument("upper turnover bound must be finite");
    // int_lo^hi (psi x^2 / 2 - x) dx = 0
    return 3.0 * (hi * hi - lo * lo) / (hi * hi * hi - lo * lo * lo);
}

double cost_intersection(double /*c_test*/, double psi) {
    if (psi <= 0.0) throw std::invalid_argument("psi must be positive");
    return 2.0 / psi;
}

double total_cost(const Eigen::VectorXd& w_old, const Eigen::VectorXd& w_new,
                  const CostModel& model, std::size_t k) {
    if (w_old.size() != w_new.size())
        throw std::invalid_argument("weight vectors differ in length");
    if (static_cast<Eigen::Index>(k) > w_old.size())
        throw std::invalid_argument("benchmark count exceeds asset count");
    double total = 0.0;
    const double ct = model.c_tilde();
    for (Eigen::Index i = 0; i < w_old.size(); ++i) {
        double dw = std::fabs(w_new[i] - w_old[i]);
        total += static_cast<std::size_t>(i) < k
                     ? linear_cost(dw, model.c_benchmark, model.v0)
                     : quadratic_cost(dw, ct, model.v0);
    }
    return total;
}

ConstrainedSolution optimize_with_costs(const MarketMoments& m,
                                        const Eigen::VectorXd& w_initial,
                                        const CostModel& model,
                                        PortfolioLabel objective,
                                        Constraint constraint) {
    const auto n_assets = static_cast<Eigen::Index>(m.k + m.n);
    if (w_initial.size() != n_assets)
        throw std::invalid_argument("initial weights length mismatch");
    if (std::fabs(w_initial.sum() - 1.0) > 1e-8)
        throw std::invalid_argument("initial weights must sum to 1");

    const bool lo_flag = constraint == Constraint::long_only;
    const double limit = model.budget * model.v0;

    ConstrainedSolution sol;
    sol.weights.label = objective;
    sol.weights.constraint = constraint;

    if (model.budget <= 0.0) {
        sol.weights.weights = w_initial;
        sol.cost_spent = 0.0;
        sol.objective = objective_value(m, objective, w_initial);
        sol.binding = true;
        sol.converged = true;
        return sol;
    }

    PortfolioWeights ideal =
        lo_flag ? long_only(m, objective)
                : (objective == PortfolioLabel::gmvp ? gmvp(m) : tangency(m));
    double ideal_cost = total_cost(w_initial, ideal.weights, model, m.k);
    if (ideal_cost <= limit + 1e-12) {
        sol.weights.weights = ideal.weights;
        sol.cost_spent = ideal_cost;
        sol.objective = objective_value(m, objective, ideal.weights);
        sol.binding = false;
        sol.converged = true;
        return sol;
    }

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(w_initial);
    starts.push_back(feasible_polish(w_initial, ideal.weights, model, m.k));

    bool have_best = false;
    Eigen::VectorXd best;
    double best_key = std::numeric_limits<double>::infinity();
    int best_iters = 0;
    double best_kkt = 0.0;
    for (const auto& x0 : starts) {
        auto r = alm_cost_solve(m, w_initial, model, objective, lo_flag,
                                std::nullopt, x0);
        Eigen::VectorXd x = feasible_polish(w_initial, r.x, model, m.k);
        double key = objective_key(m, objective, x);
        if (!have_best || key < best_key) {
            have_best = true;
            best = x;
            best_key = key;
            best_iters = r.iters;
            best_kkt = r.kkt_residual;
        }
    }
    // the start point itself is always feasible, keep whichever wins
    for (const auto& x0 : starts) {
        double key = objective_key(m, objective, x0);
        if (key < best_key) {
            best = x0;
            best_key = key;
        }
    }
    if (!have_best)
        throw SolverError("cost-constrained solver failed to produce iterates");

    sol.weights.weights = best;
    sol.cost_spent = total_cost(w_initial, best, model, m.k);
    sol.objective = objective_value(m, objective, best);
    sol.binding = true;
    sol.iters = best_iters;
    sol.kkt_residual = best_kkt;
    sol.converged = true;
    return sol;
}

std::vector<BudgetSweepRow> budget_sweep(const MarketMoments& m,
                                         const Eigen::VectorXd& w_initial,
                                         const CostModel& model,
                                         const std::vector<double>& budgets,
                                         Constraint constraint) {
    if (budgets.empty()) throw std::invalid_argument("budget list is empty");
    std::vector<BudgetSweepRow> out;
    out.reserve(budgets.size());
    // a solution found at a smaller budget stays feasible at a larger one;
    // carrying it forward keeps the sweep monotone when the solver lands on
    // a slightly worse local point
    auto better = [&](const ConstrainedSolution& cand, ConstrainedSolution& sol,
                      PortfolioLabel obj, double budget) {
        if (cand.cost_spent > budget * model.v0) return;
        bool improves = obj == PortfolioLabel::gmvp
                            ? cand.objective < sol.objective
                            : cand.objective > sol.objective;
        if (improves) {
            bool keep_binding = sol.binding;
            sol = cand;
            sol.binding = keep_binding;
        }
    };
    for (double b : budgets) {
        if (b < 0.0) throw std::invalid_argument("budgets must be nonnegative");
        CostModel cm = model;
        cm.budget = b;
        BudgetSweepRow row;
        row.budget = b;
        row.gmvp = optimize_with_costs(m, w_initial, cm, PortfolioLabel::gmvp,
                                       constraint);
        row.tp =
            optimize_with_costs(m, w_initial, cm, PortfolioLabel::tp, constraint);
        if (!out.empty() && out.back().budget <= b) {
            better(out.back().gmvp, row.gmvp, PortfolioLabel::gmvp, b);
            better(out.back().tp, row.tp, PortfolioLabel::tp, b);
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<FrontierPoint> net_frontier(const MarketMoments& m,
                                        const Eigen::VectorXd& w_initial,
                                        const CostModel& model,
                                        Constraint constraint,
                                        std::size_t n_points) {
    const bool lo_flag = constraint == Constraint::long_only;
    std::vector<FrontierPoint> out;
    if (model.budget <= 0.0) {
        FrontierPoint pt;
        pt.weights.weights = w_initial;
        pt.weights.constraint = constraint;
        pt.risk = std::sqrt(portfolio_variance(m, w_initial));
        pt.ret = portfolio_return(m, w_initial);
        out.push_back(std::move(pt));
        return out;
    }

    double lo, hi;
    if (lo_flag) {
        lo = portfolio_return(m, long_only(m, PortfolioLabel::gmvp).weights);
        hi = m.mu.maxCoeff();
    } else {
        lo = portfolio_return(m, gmvp(m).weights);
        hi = std::max(m.mu.maxCoeff(), portfolio_return(m, tangency(m).weights));
    }
    if (hi < lo) hi = lo;

    const double limit = model.budget * model.v0;
    for (std::size_t p = 0; p < n_points; ++p) {
        double target = n_points == 1 ? lo
                                      : lo + (hi - lo) * static_cast<double>(p) /
                                                static_cast<double>(n_points - 1);
        auto r = alm_cost_solve(m, w_initial, model, PortfolioLabel::gmvp,
                                lo_flag, target, w_initial);
        if (!r.converged) continue;  // target unreachable under the budget
        if (total_cost(w_initial, r.x, model, m.k) > limit + 1e-10) continue;
        FrontierPoint pt;
        pt.weights.weights = r.x;
        pt.weights.constraint = constraint;
        pt.risk = std::sqrt(portfolio_variance(m, r.x));
        pt.ret = portfolio_return(m, r.x);
        out.push_back(std::move(pt));
    }
    if (out.empty()) {
        // no target on the grid is reachable within the budget; fall back to
        // the budget-constrained minimum-variance portfolio
        auto g = optimize_with_costs(m, w_initial, model, PortfolioLabel::gmvp,
                                     constraint);
        FrontierPoint pt;
        pt.weights = g.weights;
        pt.risk = std::sqrt(portfolio_variance(m, g.weights.weights));
        pt.ret = portfolio_return(m, g.weights.weights);
        out.push_back(std::move(pt));
    }
    std::sort(out.begin(), out.end(),
              [](const FrontierPoint& a, const FrontierPoint& b) {
                  return a.risk < b.risk;
              });
    return out;
}

void write_budget_sweep_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& test_assets,
                            const std::vector<BudgetSweepRow>& rows,
                            std::size_t k) {
    csv::Writer out(path);
    std::vector<std::string> cols{"budget_bp"};
    for (const auto& a : test_assets) {
        std::string tag = test_assets.size() > 1 ? "_" + a : "";
        cols.push_back("gmvp_test_weight" + tag);
        cols.push_back("tp_test_weight" + tag);
    }
    cols.push_back("gmvp_objective");
    cols.push_back("tp_objective");
    out.header(cols);
    for (const auto& row : rows) {
        out.cell(row.budget * 1e4);
        for (std::size_t j = 0; j < test_assets.size(); ++j) {
            auto idx = static_cast<Eigen::Index>(k + j);
            out.cell(row.gmvp.weights.weights[idx]);
            out.cell(row.tp.weights.weights[idx]);
        }
        out.cell(row.gmvp.objective);
        out.cell(row.tp.objective);
        out.end_row();
    }
}

}  // namespace cryptospan
