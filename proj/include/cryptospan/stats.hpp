#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cryptospan/panel.hpp"

namespace cryptospan {

/// Descriptive statistics of one weekly log-return series. Ratios that need a
/// positive variance stay unset instead of leaking NaN.
struct StatBlock {
    double min = 0, mean = 0, median = 0, max = 0;
    double std_dev = 0;
    double skewness = 0;
    double kurtosis = 0;  // raw (normal = 3)
    double bh_return = 0;  // per annum, from annualized log-return sum
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double max_drawdown = 0;  // fraction of peak wealth, in [0,1]
    double cvar = 0;          // positive loss, historical estimator
    std::optional<double> t_stat, t_pvalue;
    std::optional<double> jb_stat, jb_pvalue;
};

struct StatConfig {
    double periods_per_year = 52.0;
    double cvar_confidence = 0.95;
};

enum class CorrMethod { pearson, spearman, kendall };

struct CorrelationMatrix {
    CorrMethod method;
    std::vector<std::string> assets;
    Eigen::MatrixXd coefficients;  // NaN marks undefined pairs
    Eigen::MatrixXd p_values;
};

struct RollingCorrelation {
    std::vector<Date> dates;
    std::vector<std::optional<double>> rho;
    double band_sigma;  // sqrt(1/(window-1))
};

StatBlock describe(const std::vector<double>& returns,
                   const StatConfig& cfg = {});

std::pair<double, double> t_test_mean_zero(const std::vector<double>& returns);
std::pair<double, double> jarque_bera(const std::vector<double>& returns);

double max_drawdown_of_wealth(const std::vector<double>& wealth);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

CorrelationMatrix correlation_matrix(const ReturnPanel& panel, CorrMethod method);

RollingCorrelation rolling_correlation(const std::vector<double>& x,
                                       const std::vector<double>& y,
                                       const std::vector<Date>& dates,
                                       std::size_t window);

std::string corr_method_name(CorrMethod m);

void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& assets,
                     const std::vector<StatBlock>& stats);
void write_corr_csv(const std::filesystem::path& path,
                    const CorrelationMatrix& m);
void write_rollcorr_csv(const std::filesystem::path& path,
                        const RollingCorrelation& rc);

}  // namespace cryptospan
