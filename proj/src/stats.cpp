#include "cryptospan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cryptospan/csv.hpp"
#include "cryptospan/distributions.hpp"

namespace cryptospan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// central moments m2..m4 with 1/n denominators
void central_moments(const std::vector<double>& v, double mean, double& m2,
                     double& m3, double& m4) {
    m2 = m3 = m4 = 0.0;
    for (double x : v) {
        double d = x - mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    double n = static_cast<double>(v.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
}

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson_p(double r, std::size_t n) {
    if (n < 3) return kNaN;
    double denom = 1.0 - r * r;
    if (denom <= 0.0) return 0.0;
    double t = r * std::sqrt((static_cast<double>(n) - 2.0) / denom);
    return dist::student_t_sf2(t, static_cast<double>(n) - 2.0);
}

// Kendall tau-b plus a p-value: exact inversion-count enumeration for small
// tie-free samples, large-sample normal approximation otherwise.
std::pair<double, double> kendall_pair(const std::vector<double>& x,
                                       const std::vector<double>& y) {
    const std::size_t n = x.size();
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0)
                ++ties_x;
            else if (dy == 0.0)
                ++ties_y;
            else if (dx * dy > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    double denom = std::sqrt((n0 - static_cast<double>(ties_x)) *
                             (n0 - static_cast<double>(ties_y)));
    if (denom == 0.0) return {kNaN, kNaN};
    double tau = static_cast<double>(concordant - discordant) / denom;

    bool tie_free = (ties_x == 0 && ties_y == 0);
    if (tie_free && n <= 10) {
        // null distribution of the discordance count via the classic
        // inversion-number recursion
        long long total_pairs = concordant + discordant;
        std::vector<double> f{1.0};  // counts of permutations by inversions
        for (std::size_t m = 2; m <= n; ++m) {
            std::vector<double> g(f.size() + m - 1, 0.0);
            for (std::size_t k = 0; k < f.size(); ++k)
                for (std::size_t add = 0; add < m; ++add) g[k + add] += f[k];
            f = std::move(g);
        }
        double total = 0.0;
        for (double c : f) total += c;
        long long dmin = std::min(discordant, total_pairs - discordant);
        double cdf = 0.0;
        for (long long k = 0; k <= dmin; ++k) cdf += f[static_cast<std::size_t>(k)];
        double p = std::min(1.0, 2.0 * cdf / total);
        return {tau, p};
    }
    double var = (2.0 * (2.0 * static_cast<double>(n) + 5.0)) /
                 (9.0 * static_cast<double>(n) * (static_cast<double>(n) - 1.0));
    double z = tau / std::sqrt(var);
    return {tau, dist::normal_sf2(z)};
}

}  // namespace

std::pair<double, double> t_test_mean_zero(const std::vector<double>& returns) {
    const std::size_t n = returns.size();
    if (n < 2) throw std::invalid_argument("t-test needs at least 2 observations");
    double mean = mean_of(returns);
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    double var = ss / (static_cast<double>(n) - 1.0);
    if (var <= 0.0) throw std::invalid_argument("t-test undefined for zero variance");
    double t = mean / std::sqrt(var / static_cast<double>(n));
    return {t, dist::student_t_sf2(t, static_cast<double>(n) - 1.0)};
}

std::pair<double, double> jarque_bera(const std::vector<double>& returns) {
    const std::size_t n = returns.size();
    if (n < 4) throw std::invalid_argument("Jarque-Bera needs at least 4 observations");
    double mean = mean_of(returns);
    double m2, m3, m4;
    central_moments(returns, mean, m2, m3, m4);
    if (m2 <= 0.0)
        throw std::invalid_argument("Jarque-Bera undefined for zero variance");
    double s = m3 / std::pow(m2, 1.5);
    double k = m4 / (m2 * m2);
    double jb = static_cast<double>(n) / 6.0 * (s * s + (k - 3.0) * (k - 3.0) / 4.0);
    return {jb, dist::chi2_sf(jb, 2.0)};
}

double max_drawdown_of_wealth(const std::vector<double>& wealth) {
    double peak = -std::numeric_limits<double>::infinity();
    double mdd = 0.0;
    for (double w : wealth) {
        peak = std::max(peak, w);
        if (peak > 0.0) mdd = std::max(mdd, (peak - w) / peak);
    }
    return mdd;
}

StatBlock describe(const std::vector<double>& returns, const StatConfig& cfg) {
    const std::size_t n = returns.size();
    if (n < 4) throw std::invalid_argument("describe needs at least 4 observations");
    StatBlock s;
    std::vector<double> sorted = returns;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = (n % 2 == 1) ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.mean = mean_of(returns);
    double m2, m3, m4;
    central_moments(returns, s.mean, m2, m3, m4);
    double ss = m2 * static_cast<double>(n);
    s.std_dev = std::sqrt(ss / (static_cast<double>(n) - 1.0));
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
        s.sharpe = s.mean / s.std_dev;  // r_F = 0
        auto [t, tp] = t_test_mean_zero(returns);
        s.t_stat = t;
        s.t_pvalue = tp;
        auto [jb, jp] = jarque_bera(returns);
        s.jb_stat = jb;
        s.jb_pvalue = jp;
    }
    double downside = 0.0;
    for (double r : returns) downside += r < 0.0 ? r * r : 0.0;
    downside = std::sqrt(downside / static_cast<double>(n));
    if (downside > 0.0) s.sortino = s.mean / downside;

    s.bh_return =
        std::expm1(std::accumulate(returns.begin(), returns.end(), 0.0) *
                   cfg.periods_per_year / static_cast<double>(n));

    std::vector<double> wealth;
    wealth.reserve(n + 1);
    double w = 1.0;
    wealth.push_back(w);
    for (double r : returns) {
        w *= std::exp(r);
        wealth.push_back(w);
    }
    s.max_drawdown = max_drawdown_of_wealth(wealth);

    std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(
               static_cast<double>(n) * (1.0 - cfg.cvar_confidence) + 1e-9)));
    double tail = 0.0;
    for (std::size_t i = 0; i < k; ++i) tail += sorted[i];
    s.cvar = -tail / static_cast<double>(k);
    return s;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson needs two equal series, length >= 2");
    double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return kNaN;
    return sxy / std::sqrt(sxx * syy);
}

CorrelationMatrix correlation_matrix(const ReturnPanel& panel, CorrMethod method) {
    const std::size_t n = panel.rows();
    const std::size_t m = panel.cols();
    if (n < 3) throw std::invalid_argument("correlation needs >= 3 observations");
    CorrelationMatrix out;
    out.method = method;
    out.assets = panel.assets;
    out.coefficients.resize(static_cast<Eigen::Index>(m),
                            static_cast<Eigen::Index>(m));
    out.p_values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));

    std::vector<std::vector<double>> cols(m);
    for (std::size_t i = 0; i < m; ++i) {
        cols[i].resize(n);
        for (std::size_t t = 0; t < n; ++t)
            cols[i][t] = panel.values(static_cast<Eigen::Index>(t),
                                      static_cast<Eigen::Index>(i));
        if (method == CorrMethod::spearman) cols[i] = ranks_with_ties(cols[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        out.coefficients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        out.p_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            double rho, p;
            if (method == CorrMethod::kendall) {
                std::tie(rho, p) = kendall_pair(cols[i], cols[j]);
            } else {
                rho = pearson(cols[i], cols[j]);
                p = std::isnan(rho) ? kNaN : pearson_p(rho, n);
            }
            out.coefficients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho;
            out.coefficients(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rho;
            out.p_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
            out.p_values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = p;
        }
    }
    return out;
}

RollingCorrelation rolling_correlation(const std::vector<double>& x,
                                       const std::vector<double>& y,
                                       const std::vector<Date>& dates,
                                       std::size_t window) {
    if (window < 2) throw std::invalid_argument("rolling window must be >= 2");
    if (x.size() != y.size() || x.size() != dates.size() || x.size() < window)
        throw std::invalid_argument("series too short for the rolling window");
    RollingCorrelation rc;
    rc.band_sigma = std::sqrt(1.0 / (static_cast<double>(window) - 1.0));
    for (std::size_t t = window - 1; t < x.size(); ++t) {
        std::vector<double> wx(x.begin() + static_cast<long>(t - window + 1),
                               x.begin() + static_cast<long>(t + 1));
        std::vector<double> wy(y.begin() + static_cast<long>(t - window + 1),
                               y.begin() + static_cast<long>(t + 1));
        double rho = pearson(wx, wy);
        rc.dates.push_back(dates[t]);
        rc.rho.push_back(std::isnan(rho) ? std::nullopt
                                         : std::optional<double>(rho));
    }
    return rc;
}

std::string corr_method_name(CorrMethod m) {
    switch (m) {
        case CorrMethod::pearson: return "pearson";
        case CorrMethod::spearman: return "spearman";
        case CorrMethod::kendall: return "kendall";
    }
    return "?";
}

void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& assets,
                     const std::vector<StatBlock>& stats) {
    csv::Writer w(path);
    w.header({"asset", "min", "mean", "median", "max", "std_dev", "skewness",
              "kurtosis", "bh_return", "sharpe", "sortino", "max_drawdown",
              "cvar", "t_stat", "t_pvalue", "jb_stat", "jb_pvalue"});
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& s = stats[i];
        w.cell(assets[i]);
        w.cell(s.min);
        w.cell(s.mean);
        w.cell(s.median);
        w.cell(s.max);
        w.cell(s.std_dev);
        w.cell(s.skewness);
        w.cell(s.kurtosis);
        w.cell(s.bh_return);
        w.cell(s.sharpe);
        w.cell(s.sortino);
        w.cell(s.max_drawdown);
        w.cell(s.cvar);
        w.cell(s.t_stat);
        w.cell(s.t_pvalue);
        w.cell(s.jb_stat);
        w.cell(s.jb_pvalue);
        w.end_row();
    }
}

void write_corr_csv(const std::filesystem::path& path, const CorrelationMatrix& m) {
    csv::Writer w(path);
    std::vector<std::string> header{"asset"};
    header.insert(header.end(), m.assets.begin(), m.assets.end());
    w.header(header);
    for (std::size_t i = 0; i < m.assets.size(); ++i) {
        w.cell(m.assets[i]);
        for (std::size_t j = 0; j < m.assets.size(); ++j)
            w.cell(m.coefficients(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j)));
        w.end_row();
    }
}

void write_rollcorr_csv(const std::filesystem::path& path,
                        const RollingCorrelation& rc) {
    csv::Writer w(path);
    w.header({"date", "rho", "band_lo", "band_hi"});
    for (std::size_t t = 0; t < rc.dates.size(); ++t) {
        w.cell(rc.dates[t].iso());
        w.cell(rc.rho[t]);
        if (rc.rho[t]) {
            w.cell(*rc.rho[t] - rc.band_sigma);
            w.cell(*rc.rho[t] + rc.band_sigma);
        } else {
            w.cell(std::string{});
            w.cell(std::string{});
        }
        w.end_row();
    }
}

}  // namespace cryptospan
