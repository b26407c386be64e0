#include "cryptospan/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cryptospan/csv.hpp"

namespace cryptospan {

namespace {

int month_key(const Date& d) { return d.year * 12 + (d.month - 1); }

Eigen::VectorXd pad_with_zeros(const Eigen::VectorXd& w, Eigen::Index total) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
    out.head(w.size()) = w;
    return out;
}

std::vector<SpanningResult> window_spanning(const Eigen::MatrixXd& r1,
                                            const Eigen::MatrixXd& r2) {
    SpanningRegression reg = fit_spanning_regression(r1, r2);
    auto wlrlm = mv_spanning_tests(reg);
    auto sd = stepdown_tests(reg);
    std::vector<SpanningResult> out(wlrlm.begin(), wlrlm.end());
    out.push_back(gmm_wald(r1, r2));
    out.push_back(sd.f1);
    out.push_back(sd.f2);
    return out;
}

// optimal weights for one estimation window, with the cost model applied when
// present
std::pair<Eigen::VectorXd, Eigen::VectorXd> window_weights(
    const MarketMoments& m, const StudyConfig& cfg,
    const Eigen::VectorXd& w_init_gmvp, const Eigen::VectorXd& w_init_tp) {
    if (cfg.cost_model) {
        auto g = optimize_with_costs(m, w_init_gmvp, *cfg.cost_model,
                                     PortfolioLabel::gmvp, cfg.constraint);
        auto t = optimize_with_costs(m, w_init_tp, *cfg.cost_model,
                                     PortfolioLabel::tp, cfg.constraint);
        return {g.weights.weights, t.weights.weights};
    }
    if (cfg.constraint == Constraint::long_only)
        return {long_only(m, PortfolioLabel::gmvp).weights,
                long_only(m, PortfolioLabel::tp).weights};
    return {gmvp(m).weights, tangency(m).weights};
}

void finish_track(PortfolioTrack& tr) {
    WealthPath wp = wealth_path(tr.returns);
    tr.wealth = wp.values;
    tr.end_value = wp.end_value;
    tr.floored = wp.floored;
    if (!wp.floored) {
        std::vector<double> logs(tr.returns.size());
        std::transform(tr.returns.begin(), tr.returns.end(), logs.begin(),
                       [](double r) { return std::log1p(r); });
        tr.metrics = describe(logs);
    }
}

}  // namespace

WealthPath wealth_path(const std::vector<double>& simple_returns,
                       double initial) {
    WealthPath out;
    out.values.reserve(simple_returns.size());
    double c = initial;
    for (double r : simple_returns) {
        c *= 1.0 + r;
        if (c <= 0.0) {
            c = 0.0;
            out.floored = true;
        }
        out.values.push_back(c);
    }
    out.end_value = c;
    return out;
}

BacktestReport run_case_a(const ReturnPanel& panel, std::size_t k,
                          const StudyConfig& config) {
    const auto total = static_cast<std::size_t>(panel.values.cols());
    if (k == 0 || k > total)
        throw std::invalid_argument("benchmark count out of range");
    const std::size_t n = total - k;

    BacktestReport rep;
    rep.study_case = StudyCase::A;
    rep.assets = panel.assets;
    rep.k = k;

    MarketMoments m_all = estimate_moments(panel.values, k);
    MarketMoments m_bench = estimate_moments(panel.values.leftCols(
                                                 static_cast<Eigen::Index>(k)),
                                             k);
    if (config.constraint == Constraint::long_only) {
        rep.gmvp_with = long_only(m_all, PortfolioLabel::gmvp);
        rep.tp_with = long_only(m_all, PortfolioLabel::tp);
        rep.gmvp_without = long_only(m_bench, PortfolioLabel::gmvp);
        rep.tp_without = long_only(m_bench, PortfolioLabel::tp);
    } else {
        rep.gmvp_with = gmvp(m_all);
        rep.tp_with = tangency(m_all);
        rep.gmvp_without = gmvp(m_bench);
        rep.tp_without = tangency(m_bench);
    }

    if (n > 0) {
        Eigen::MatrixXd r1 = panel.values.leftCols(static_cast<Eigen::Index>(k));
        Eigen::MatrixXd r2 =
            panel.values.rightCols(static_cast<Eigen::Index>(n));
        rep.full_sample_tests = window_spanning(r1, r2);
        SpanningRegression reg = fit_spanning_regression(r1, r2);
        rep.stepdown = stepdown_tests(reg, config.xi1, config.xi2);
    }

    rep.gross_frontier =
        efficient_frontier(m_all, config.constraint, config.frontier_points);
    if (config.cost_model) {
        // initial book: equally-weighted benchmarks, no test assets
        Eigen::VectorXd w0 = pad_with_zeros(
            Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k),
                                      1.0 / static_cast<double>(k)),
            static_cast<Eigen::Index>(total));
        rep.net_frontier_points =
            net_frontier(m_all, w0, *config.cost_model, config.constraint,
                         config.frontier_points);
    }
    return rep;
}

BacktestReport run_case_b(const ReturnPanel& panel, std::size_t k,
                          const StudyConfig& config) {
    const auto total = static_cast<std::size_t>(panel.values.cols());
    if (k == 0 || k > total)
        throw std::invalid_argument("benchmark count out of range");
    const std::size_t n = total - k;
    const auto kk = static_cast<Eigen::Index>(k);
    const auto nn = static_cast<Eigen::Index>(n);

    // group weekly return rows by calendar month
    std::vector<int> row_month(panel.rows());
    std::vector<int> months;
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        row_month[t] = month_key(panel.dates[t]);
        if (months.empty() || months.back() != row_month[t])
            months.push_back(row_month[t]);
    }
    if (!std::is_sorted(months.begin(), months.end()))
        throw std::invalid_argument("return dates are not month-ordered");
    const std::size_t wm = config.window_months;
    if (months.size() < wm + 1)
        throw std::invalid_argument(
            "rolling study needs at least window_months + 1 months of data");

    auto rows_in = [&](std::size_t m_lo, std::size_t m_hi) {
        std::vector<std::size_t> idx;  // months [m_lo, m_hi) by position
        for (std::size_t t = 0; t < panel.rows(); ++t) {
            auto it = std::lower_bound(months.begin(), months.end(),
                                       row_month[t]);
            auto pos = static_cast<std::size_t>(it - months.begin());
            if (pos >= m_lo && pos < m_hi) idx.push_back(t);
        }
        return idx;
    };
    auto submatrix = [&](const std::vector<std::size_t>& idx) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()),
                            panel.values.cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.row(static_cast<Eigen::Index>(i)) =
                panel.values.row(static_cast<Eigen::Index>(idx[i]));
        return out;
    };

    BacktestReport rep;
    rep.study_case = StudyCase::B;
    rep.assets = panel.assets;
    rep.k = k;

    const std::size_t n_windows = months.size() - wm;
    Eigen::VectorXd ew_bench = Eigen::VectorXd::Constant(
        kk, 1.0 / static_cast<double>(k));
    Eigen::VectorXd ew_all =
        pad_with_zeros(ew_bench, static_cast<Eigen::Index>(total));

    Eigen::VectorXd prev_gmvp_with = ew_all, prev_tp_with = ew_all;
    Eigen::VectorXd prev_gmvp_without = ew_bench, prev_tp_without = ew_bench;

    for (std::size_t w = 0; w < n_windows; ++w) {
        auto idx = rows_in(w, w + wm);
        WindowRecord rec;
        rec.start = panel.dates[idx.front()];
        rec.end = panel.dates[idx.back()];
        Eigen::MatrixXd r = submatrix(idx);
        try {
            MarketMoments m_all = estimate_moments(r, k);
            MarketMoments m_bench = estimate_moments(r.leftCols(kk), k);
            auto [gw, tw] =
                window_weights(m_all, config, prev_gmvp_with, prev_tp_with);
            auto [gb, tb] = window_weights(m_bench, config, prev_gmvp_without,
                                           prev_tp_without);
            rec.gmvp_with = gw;
            rec.tp_with = tw;
            rec.gmvp_without = gb;
            rec.tp_without = tb;
        } catch (const std::exception& e) {
            rec.degenerate = true;
            rec.gmvp_with = prev_gmvp_with;
            rec.tp_with = prev_tp_with;
            rec.gmvp_without = prev_gmvp_without;
            rec.tp_without = prev_tp_without;
            rep.warnings.push_back("window starting " + rec.start.iso() +
                                   ": " + e.what() +
                                   "; weights carried forward");
        }
        prev_gmvp_with = rec.gmvp_with;
        prev_tp_with = rec.tp_with;
        prev_gmvp_without = rec.gmvp_without;
        prev_tp_without = rec.tp_without;

        if (n > 0 && !rec.degenerate) {
            try {
                rec.spanning =
                    window_spanning(r.leftCols(kk), r.rightCols(nn));
            } catch (const std::exception& e) {
                rep.warnings.push_back("window starting " + rec.start.iso() +
                                       ": spanning skipped: " + e.what());
            }
        }
        rep.windows.push_back(std::move(rec));
    }

    if (n > 0) rep.aggregate = aggregate_significance(rep.windows);

    // realized returns: first year at the equal-weight benchmark, then each
    // window's weights over the following month
    rep.tracks.resize(4);
    rep.tracks[0].name = "gmvp_with";
    rep.tracks[1].name = "tp_with";
    rep.tracks[2].name = "gmvp_without";
    rep.tracks[3].name = "tp_without";
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        auto it = std::lower_bound(months.begin(), months.end(), row_month[t]);
        auto pos = static_cast<std::size_t>(it - months.begin());
        Eigen::VectorXd simple =
            panel.values.row(static_cast<Eigen::Index>(t))
                .array()
                .exp() -
            1.0;
        Eigen::VectorXd w_gw, w_tw, w_gb, w_tb;
        if (pos < wm) {
            w_gw = w_tw = ew_all;
            w_gb = w_tb = ew_bench;
        } else {
            const WindowRecord& rec = rep.windows[pos - wm];
            w_gw = rec.gmvp_with;
            w_tw = rec.tp_with;
            w_gb = rec.gmvp_without;
            w_tb = rec.tp_without;
        }
        for (auto& tr : rep.tracks) tr.dates.push_back(panel.dates[t]);
        rep.tracks[0].returns.push_back(w_gw.dot(simple));
        rep.tracks[1].returns.push_back(w_tw.dot(simple));
        rep.tracks[2].returns.push_back(w_gb.dot(simple.head(kk)));
        rep.tracks[3].returns.push_back(w_tb.dot(simple.head(kk)));
    }
    for (auto& tr : rep.tracks) {
        finish_track(tr);
        if (tr.floored)
            rep.warnings.push_back("track " + tr.name +
                                   ": wealth floored at zero");
    }
    return rep;
}

std::vector<SignificanceShare> aggregate_significance(
    const std::vector<WindowRecord>& windows) {
    std::map<SpanningTest, std::array<std::size_t, 5>> counts;
    std::map<SpanningTest, std::size_t> totals;
    for (const auto& w : windows) {
        for (const auto& r : w.spanning) {
            auto& c = counts[r.test];
            ++totals[r.test];
            double p = r.p_value;
            if (p < 0.001)
                ++c[3];
            else if (p < 0.01)
                ++c[2];
            else if (p < 0.05)
                ++c[1];
            else if (p < 0.10 && r.test == SpanningTest::F1)
                ++c[0];  // the 10% level feeds the stepdown only
            else
                ++c[4];
        }
    }
    std::vector<SignificanceShare> out;
    for (const auto& [test, c] : counts) {
        SignificanceShare s;
        s.test = test;
        double tot = static_cast<double>(totals[test]);
        s.b10 = static_cast<double>(c[0]) / tot;
        s.b5 = static_cast<double>(c[1]) / tot;
        s.b1 = static_cast<double>(c[2]) / tot;
        s.b01 = static_cast<double>(c[3]) / tot;
        s.nonsig = static_cast<double>(c[4]) / tot;
        out.push_back(s);
    }
    return out;
}

void write_heatmap_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& assets,
                       const std::vector<WindowRecord>& windows,
                       const std::string& portfolio, bool with_tests,
                       std::size_t k) {
    csv::Writer out(path);
    std::size_t na = with_tests ? assets.size() : k;
    std::vector<std::string> cols{"window_start"};
    for (std::size_t i = 0; i < na; ++i) cols.push_back(assets[i]);
    out.header(cols);
    for (const auto& w : windows) {
        const Eigen::VectorXd& v =
            portfolio == "gmvp" ? (with_tests ? w.gmvp_with : w.gmvp_without)
                                : (with_tests ? w.tp_with : w.tp_without);
        out.cell(w.start.iso());
        for (std::size_t i = 0; i < na; ++i)
            out.cell(v[static_cast<Eigen::Index>(i)]);
        out.end_row();
    }
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<PortfolioTrack>& tracks) {
    csv::Writer out(path);
    out.header({"portfolio", "min", "mean", "max", "std", "cvar",
                "max_drawdown", "sharpe", "sortino", "end_value"});
    for (const auto& tr : tracks) {
        out.cell(tr.name);
        if (tr.metrics) {
            const auto& s = *tr.metrics;
            out.cell(s.min);
            out.cell(s.mean);
            out.cell(s.max);
            out.cell(s.std_dev);
            out.cell(s.cvar);
            out.cell(s.max_drawdown);
            out.cell(s.sharpe);
            out.cell(s.sortino);
        } else {
            for (int i = 0; i < 8; ++i) out.cell(std::optional<double>{});
        }
        out.cell(tr.end_value);
        out.end_row();
    }
}

void write_wealth_csv(const std::filesystem::path& path,
                      const std::vector<PortfolioTrack>& tracks) {
    csv::Writer out(path);
    std::vector<std::string> cols{"date"};
    for (const auto& tr : tracks) cols.push_back(tr.name);
    out.header(cols);
    if (tracks.empty()) return;
    for (std::size_t t = 0; t < tracks.front().dates.size(); ++t) {
        out.cell(tracks.front().dates[t].iso());
        for (const auto& tr : tracks) out.cell(tr.wealth[t]);
        out.end_row();
    }
}

void write_spanning_rolling_csv(const std::filesystem::path& path,
                                const std::vector<WindowRecord>& windows) {
    csv::Writer out(path);
    out.header({"window_start", "test", "statistic", "p_value"});
    for (const auto& w : windows)
        for (const auto& r : w.spanning) {
            out.cell(w.start.iso());
            out.cell(spanning_test_name(r.test));
            out.cell(r.statistic);
            out.cell(r.p_value);
            out.end_row();
        }
}

void write_significance_csv(const std::filesystem::path& path,
                            const std::vector<SignificanceShare>& shares) {
    csv::Writer out(path);
    out.header({"test", "share_10pct", "share_5pct", "share_1pct",
                "share_0.1pct", "share_nonsig"});
    for (const auto& s : shares) {
        out.cell(spanning_test_name(s.test));
        out.cell(s.b10);
        out.cell(s.b5);
        out.cell(s.b1);
        out.cell(s.b01);
        out.cell(s.nonsig);
        out.end_row();
    }
}

}  // namespace cryptospan
