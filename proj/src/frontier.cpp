#include "cryptospan/frontier.hpp"

#include <algorithm>
#include <cmath>

#include "cryptospan/csv.hpp"
#include "cryptospan/solver.hpp"

namespace cryptospan {

namespace {

constexpr double kConditionLimit = 1e12;

// LLT factorization with PD and conditioning guards
Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& V) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0)
        throw EstimationError(
            "covariance matrix is singular or not positive definite; consider "
            "an alternative (e.g. shrinkage) covariance estimator");
    if (hi / lo > kConditionLimit)
        throw EstimationError(
            "covariance matrix is ill-conditioned (condition number " +
            csv::format_number(hi / lo) +
            "); consider an alternative covariance estimator");
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success)
        throw EstimationError("covariance factorization failed");
    return llt;
}

double variance_scale(const MarketMoments& m) {
    return std::max(m.V.diagonal().mean(), 1e-300);
}

}  // namespace

MarketMoments estimate_moments(const Eigen::MatrixXd& returns, std::size_t k) {
    const auto T = returns.rows();
    const auto total = returns.cols();
    if (k > static_cast<std::size_t>(total))
        throw std::invalid_argument("benchmark count exceeds column count");
    if (T < total + 1)
        throw EstimationError("too few observations: need T >= K+N+1");
    MarketMoments m;
    m.k = k;
    m.n = static_cast<std::size_t>(total) - k;
    m.T = static_cast<std::size_t>(T);
    m.mu = returns.colwise().mean();
    Eigen::MatrixXd centered = returns.rowwise() - m.mu.transpose();
    m.V = centered.transpose() * centered / static_cast<double>(T);  // MLE
    m.V = ((m.V + m.V.transpose()) / 2.0).eval();
    checked_llt(m.V);  // fail fast on degenerate moments
    return m;
}

MarketMoments estimate_moments(const ReturnPanel& panel, std::size_t k) {
    return estimate_moments(panel.values, k);
}

double portfolio_variance(const MarketMoments& m, const Eigen::VectorXd& w) {
    return w.dot(m.V * w);
}

double portfolio_return(const MarketMoments& m, const Eigen::VectorXd& w) {
    return m.mu.dot(w);
}

double portfolio_sharpe(const MarketMoments& m, const Eigen::VectorXd& w,
                        double r_f) {
    return (m.mu.dot(w) - r_f) / std::sqrt(w.dot(m.V * w));
}

PortfolioWeights gmvp(const MarketMoments& m) {
    auto llt = checked_llt(m.V);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.V.rows());
    Eigen::VectorXd vi = llt.solve(ones);
    PortfolioWeights w;
    w.label = PortfolioLabel::gmvp;
    w.weights = vi / vi.sum();
    return w;
}

PortfolioWeights tangency(const MarketMoments& m, double r_f) {
    auto llt = checked_llt(m.V);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.V.rows());
    Eigen::VectorXd excess = m.mu.array() - r_f;
    Eigen::VectorXd vi = llt.solve(excess);
    double denom = ones.dot(vi);
    if (std::fabs(denom) < 1e-12)
        throw SolverError("degenerate tangency: 1'V^-1 mu is numerically zero");
    PortfolioWeights w;
    w.label = PortfolioLabel::tp;
    w.weights = vi / denom;
    return w;
}

PortfolioWeights long_only(const MarketMoments& m, PortfolioLabel objective) {
    const Eigen::Index na = m.V.rows();
    const double scale = variance_scale(m);
    solve::PgOptions opts;
    opts.grad_tol = 1e-10;

    solve::PgResult best;
    bool have_best = false;

    if (objective == PortfolioLabel::gmvp) {
        solve::Objective f = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
            Eigen::VectorXd vw = m.V * w;
            g = 2.0 * vw / scale;
            return w.dot(vw) / scale;
        };
        best = solve::minimize_projected(
            f, Eigen::VectorXd::Constant(na, 1.0 / static_cast<double>(na)),
            /*long_only=*/true, opts);
        have_best = best.converged;
    } else {
        // Sharpe is not convex on the simplex: multi-start hedges local optima
        solve::Objective f = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
            Eigen::VectorXd vw = m.V * w;
            double q = w.dot(vw);
            double s = std::sqrt(q);
            double ret = m.mu.dot(w);
            g = -m.mu / s + ret * vw / (s * q);
            return -ret / s;
        };
        std::vector<Eigen::VectorXd> starts;
        starts.push_back(
            Eigen::VectorXd::Constant(na, 1.0 / static_cast<double>(na)));
        Eigen::Index i_mu, i_sharpe, i_var;
        m.mu.maxCoeff(&i_mu);
        (m.mu.array() / m.V.diagonal().array().sqrt()).maxCoeff(&i_sharpe);
        m.V.diagonal().minCoeff(&i_var);
        for (Eigen::Index i : {i_mu, i_sharpe, i_var})
            starts.push_back(Eigen::VectorXd::Unit(na, i));
        starts.push_back(solve::project_simplex(tangency(m).weights));
        for (const auto& x0 : starts) {
            // nudge vertices off the boundary so the gradient is informative
            Eigen::VectorXd x = solve::project_simplex(
                x0 + Eigen::VectorXd::Constant(na, 1e-6));
            auto r = solve::minimize_projected(f, x, /*long_only=*/true, opts);
            if (!have_best || r.value < best.value) {
                best = r;
                have_best = true;
            }
        }
    }
    if (!have_best || best.kkt_residual > 1e-8)
        throw SolverError("long-only solver did not converge (kkt residual " +
                          csv::format_number(best.kkt_residual) + " after " +
                          std::to_string(best.iters) + " iterations)");
    PortfolioWeights w;
    w.label = objective;
    w.constraint = Constraint::long_only;
    w.weights = best.x;
    return w;
}

Eigen::VectorXd min_variance_at_return(const MarketMoments& m, double target) {
    auto llt = checked_llt(m.V);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.V.rows());
    Eigen::VectorXd vi1 = llt.solve(ones);
    Eigen::VectorXd vim = llt.solve(m.mu);
    double a = ones.dot(vi1);
    double b = ones.dot(vim);
    double c = m.mu.dot(vim);
    double det = a * c - b * b;
    if (std::fabs(det) < 1e-300)
        throw SolverError("frontier degenerate: mu is proportional to ones");
    double lam = (c - b * target) / det;
    double gam = (a * target - b) / det;
    return lam * vi1 + gam * vim;
}

std::vector<FrontierPoint> efficient_frontier(const MarketMoments& m,
                                              Constraint constraint,
                                              std::size_t n_points) {
    if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
    std::vector<FrontierPoint> out;
    double lo, hi;
    PortfolioWeights base;
    if (constraint == Constraint::unconstrained) {
        base = gmvp(m);
        lo = portfolio_return(m, base.weights);
        hi = std::max(m.mu.maxCoeff(),
                      portfolio_return(m, tangency(m).weights));
    } else {
        base = long_only(m, PortfolioLabel::gmvp);
        lo = portfolio_return(m, base.weights);
        hi = m.mu.maxCoeff();
    }
    if (hi < lo) hi = lo;

    const double scale = variance_scale(m);
    for (std::size_t p = 0; p < n_points; ++p) {
        double target =
            n_points == 1
                ? lo
                : lo + (hi - lo) * static_cast<double>(p) /
                          static_cast<double>(n_points - 1);
        FrontierPoint pt;
        pt.ret = target;
        pt.weights.label = PortfolioLabel::gmvp;
        pt.weights.constraint = constraint;
        if (constraint == Constraint::unconstrained) {
            pt.weights.weights = min_variance_at_return(m, target);
        } else {
            // augmented Lagrangian on the return target, inner solve on the
            // simplex
            double lambda = 0.0, rho = 10.0;
            Eigen::VectorXd x = base.weights;
            bool ok = false;
            for (int outer = 0; outer < 60; ++outer) {
                solve::Objective f = [&](const Eigen::VectorXd& w,
                                         Eigen::VectorXd& g) {
                    Eigen::VectorXd vw = m.V * w;
                    double viol = m.mu.dot(w) - target;
                    g = 2.0 * vw / scale + (lambda + rho * viol) * m.mu;
                    return w.dot(vw) / scale + lambda * viol +
                           0.5 * rho * viol * viol;
                };
                auto r = solve::minimize_projected(f, x, true, {});
                x = r.x;
                double viol = m.mu.dot(x) - target;
                if (std::fabs(viol) < 1e-11) {
                    ok = true;
                    break;
                }
                lambda += rho * viol;
                rho = std::min(rho * 4.0, 1e14);
            }
            if (!ok) continue;  // infeasible target, skip the point
            pt.weights.weights = x;
        }
        pt.risk = std::sqrt(portfolio_variance(m, pt.weights.weights));
        pt.ret = portfolio_return(m, pt.weights.weights);
        out.push_back(std::move(pt));
    }
    std::sort(out.begin(), out.end(),
              [](const FrontierPoint& a, const FrontierPoint& b) {
                  return a.risk < b.risk;
              });
    return out;
}

void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& assets,
                       const PortfolioWeights& w) {
    csv::Writer out(path);
    out.header({"asset", "weight"});
    for (std::size_t i = 0; i < assets.size(); ++i) {
        out.cell(assets[i]);
        out.cell(w.weights[static_cast<Eigen::Index>(i)]);
        out.end_row();
    }
}

void write_frontier_csv(const std::filesystem::path& path,
                        const std::vector<FrontierPoint>& frontier) {
    csv::Writer out(path);
    out.header({"risk", "ret"});
    for (const auto& pt : frontier) {
        out.cell(pt.risk);
        out.cell(pt.ret);
        out.end_row();
    }
}

}  // namespace cryptospan
