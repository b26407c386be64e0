#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "cryptospan/panel.hpp"

namespace cryptospan {

/// Partitioned sample moments of K benchmark + N test assets, with the 1/T
/// covariance denominator shared with the spanning regression.
struct MarketMoments {
    Eigen::VectorXd mu;  // [mu1; mu2]
    Eigen::MatrixXd V;   // [[V11, V12], [V21, V22]]
    std::size_t k = 0;   // benchmark count
    std::size_t n = 0;   // test-asset count
    std::size_t T = 0;

    Eigen::VectorXd mu1() const { return mu.head(static_cast<Eigen::Index>(k)); }
    Eigen::VectorXd mu2() const { return mu.tail(static_cast<Eigen::Index>(n)); }
    Eigen::MatrixXd V11() const {
        return V.topLeftCorner(static_cast<Eigen::Index>(k),
                               static_cast<Eigen::Index>(k));
    }
};

enum class PortfolioLabel { gmvp, tp };
enum class Constraint { unconstrained, long_only };

struct PortfolioWeights {
    Eigen::VectorXd weights;
    PortfolioLabel label = PortfolioLabel::gmvp;
    Constraint constraint = Constraint::unconstrained;
};

struct FrontierPoint {
    double risk = 0.0;  // per-week standard deviation
    double ret = 0.0;   // per-week expected return
    PortfolioWeights weights;
};

class EstimationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

MarketMoments estimate_moments(const ReturnPanel& panel, std::size_t k);

/// Moments from a raw return matrix (first k columns are benchmarks).
MarketMoments estimate_moments(const Eigen::MatrixXd& returns, std::size_t k);

PortfolioWeights gmvp(const MarketMoments& m);
PortfolioWeights tangency(const MarketMoments& m, double r_f = 0.0);
PortfolioWeights long_only(const MarketMoments& m, PortfolioLabel objective);

std::vector<FrontierPoint> efficient_frontier(const MarketMoments& m,
                                              Constraint constraint,
                                              std::size_t n_points = 50);

double portfolio_variance(const MarketMoments& m, const Eigen::VectorXd& w);
double portfolio_return(const MarketMoments& m, const Eigen::VectorXd& w);
double portfolio_sharpe(const MarketMoments& m, const Eigen::VectorXd& w,
                        double r_f = 0.0);

/// Minimum-variance weights at an exact target return (no sign constraint);
/// the closed two-fund form.
Eigen::VectorXd min_variance_at_return(const MarketMoments& m, double target);

void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& assets,
                       const PortfolioWeights& w);
void write_frontier_csv(const std::filesystem::path& path,
                        const std::vector<FrontierPoint>& frontier);

}  // namespace cryptospan
