// Batch front end: wires config, ingestion and the analysis stages into
// reproducible file-emitting runs.
#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cryptospan/backtest.hpp"
#include "cryptospan/config.hpp"
#include "cryptospan/csv.hpp"
#include "cryptospan/ewci.hpp"
#include "cryptospan/frontier.hpp"
#include "cryptospan/panel.hpp"
#include "cryptospan/spanning.hpp"
#include "cryptospan/stats.hpp"
#include "cryptospan/txcost.hpp"

namespace fs = std::filesystem;
using namespace cryptospan;

namespace {

struct CliState {
    std::string config_path;
    std::string out_dir;
    std::string constraint;
    std::string study_case;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool dry_run = false;
    std::string budgets = "2,4,6,8,10,12,15,20,30,100";
};

RunConfig effective_config(const CliState& st) {
    if (st.config_path.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_config(st.config_path);
    if (!st.out_dir.empty()) cfg.out_dir = st.out_dir;
    if (st.seed_set) cfg.seed = st.seed;
    if (!st.constraint.empty())
        cfg.study.constraint = st.constraint == "long-only"
                                   ? Constraint::long_only
                                   : Constraint::unconstrained;
    if (!st.study_case.empty())
        cfg.study.study_case =
            st.study_case == "A" ? StudyCase::A : StudyCase::B;
    return cfg;
}

void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError(what + " path is not configured");
    if (!fs::exists(p))
        throw LoadError(what + " file not found: " + p.string());
}

struct Inputs {
    PricePanel benchmarks;          // weekly grid
    std::optional<IndexSeries> index;
    ReturnPanel combined;  // benchmark columns then EWCI (when present)
    std::size_t k = 0;
};

IndexSeries build_index_from(const RunConfig& cfg) {
    require_file(cfg.coin_prices, "coin price panel");
    require_file(cfg.coin_mcaps, "coin market cap panel");
    CoinPanelPair coins = load_coin_panels(cfg.coin_prices, cfg.coin_mcaps);
    coins.price = align_to_fridays(coins.price);
    coins.mcap = align_to_fridays(coins.mcap);
    UniverseSpec spec;
    spec.reference_date =
        cfg.reference_date ? *cfg.reference_date : coins.price.dates.front();
    spec.coins = cfg.universe_coins.empty() ? coins.price.assets
                                            : cfg.universe_coins;
    return build_index(coins, spec);
}

// restrict both panels to their common weekly dates, benchmarks first
PricePanel merge_on_common_dates(const PricePanel& a, const PricePanel& b) {
    PricePanel out;
    out.kind = PanelKind::benchmark;
    out.assets = a.assets;
    out.assets.insert(out.assets.end(), b.assets.begin(), b.assets.end());
    std::vector<std::pair<std::size_t, std::size_t>> common;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.dates.size(); ++i) {
        while (j < b.dates.size() && b.dates[j] < a.dates[i]) ++j;
        if (j < b.dates.size() && b.dates[j] == a.dates[i])
            common.emplace_back(i, j);
    }
    if (common.size() < 3)
        throw LoadError("panels share fewer than 3 weekly dates");
    out.values.resize(static_cast<Eigen::Index>(common.size()),
                      static_cast<Eigen::Index>(out.assets.size()));
    out.dates.reserve(common.size());
    for (std::size_t r = 0; r < common.size(); ++r) {
        auto [ia, ib] = common[r];
        out.dates.push_back(a.dates[ia]);
        auto rr = static_cast<Eigen::Index>(r);
        out.values.row(rr).head(a.values.cols()) =
            a.values.row(static_cast<Eigen::Index>(ia));
        out.values.row(rr).tail(b.values.cols()) =
            b.values.row(static_cast<Eigen::Index>(ib));
    }
    return out;
}

Inputs load_inputs(const RunConfig& cfg, bool need_index) {
    Inputs in;
    require_file(cfg.benchmark_panel, "benchmark panel");
    in.benchmarks =
        align_to_fridays(load_panel(cfg.benchmark_panel, PanelKind::benchmark));
    in.k = in.benchmarks.assets.size();
    bool have_coins = !cfg.coin_prices.empty() && !cfg.coin_mcaps.empty();
    if (need_index && !have_coins)
        throw ConfigError("this command needs the coin panels configured");
    if (have_coins) {
        in.index = build_index_from(cfg);
        PricePanel merged =
            merge_on_common_dates(in.benchmarks, index_as_panel(*in.index));
        in.combined = to_log_returns(merged);
    } else {
        in.combined = to_log_returns(in.benchmarks);
    }
    return in;
}

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

int cmd_index(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.coin_prices, "coin price panel");
        require_file(cfg.coin_mcaps, "coin market cap panel");
        return 0;
    }
    IndexSeries series = build_index_from(cfg);
    ensure_out(cfg);
    write_index_csv(cfg.out_dir / "ewci_levels.csv",
                    cfg.out_dir / "ewci_audit.csv", series);
    for (const auto& w : series.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_stats(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, false);
    std::vector<StatBlock> blocks;
    for (std::size_t c = 0; c < in.combined.cols(); ++c) {
        auto col = in.combined.values.col(static_cast<Eigen::Index>(c));
        blocks.push_back(
            describe(std::vector<double>(col.begin(), col.end())));
    }
    ensure_out(cfg);
    write_stats_csv(cfg.out_dir / "stats.csv", in.combined.assets, blocks);
    return 0;
}

int cmd_corr(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, false);
    ensure_out(cfg);
    for (auto method :
         {CorrMethod::pearson, CorrMethod::spearman, CorrMethod::kendall}) {
        auto m = correlation_matrix(in.combined, method);
        write_corr_csv(cfg.out_dir / ("corr_" + corr_method_name(method) +
                                      ".csv"),
                       m);
    }
    if (in.index) {
        // 1-year rolling correlation of the index against each benchmark
        auto last = static_cast<Eigen::Index>(in.combined.cols()) - 1;
        auto idx_col = in.combined.values.col(last);
        std::vector<double> y(idx_col.begin(), idx_col.end());
        for (std::size_t c = 0; c + 1 < in.combined.cols(); ++c) {
            auto col = in.combined.values.col(static_cast<Eigen::Index>(c));
            std::vector<double> x(col.begin(), col.end());
            auto rc = rolling_correlation(x, y, in.combined.dates, 52);
            write_rollcorr_csv(cfg.out_dir /
                                   ("rollcorr_" + in.combined.assets.back() +
                                    "_" + in.combined.assets[c] + ".csv"),
                               rc);
        }
    }
    return 0;
}

std::string constraint_tag(Constraint c) {
    return c == Constraint::long_only ? "long_only" : "unconstrained";
}

int cmd_frontier(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, false);
    MarketMoments m = estimate_moments(in.combined, in.k);
    Constraint c = cfg.study.constraint;
    PortfolioWeights g, t;
    if (c == Constraint::long_only) {
        g = long_only(m, PortfolioLabel::gmvp);
        t = long_only(m, PortfolioLabel::tp);
    } else {
        g = gmvp(m);
        t = tangency(m);
    }
    ensure_out(cfg);
    std::string tag = constraint_tag(c);
    write_weights_csv(cfg.out_dir / ("weights_gmvp_" + tag + ".csv"),
                      in.combined.assets, g);
    write_weights_csv(cfg.out_dir / ("weights_tp_" + tag + ".csv"),
                      in.combined.assets, t);
    write_frontier_csv(cfg.out_dir / ("frontier_" + tag + ".csv"),
                       efficient_frontier(m, c, cfg.study.frontier_points));
    return 0;
}

int cmd_spanning(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, true);
    ensure_out(cfg);
    if (cfg.study.study_case == StudyCase::A) {
        BacktestReport rep = run_case_a(in.combined, in.k, cfg.study);
        csv::Writer out(cfg.out_dir / "spanning_full.csv");
        out.header({"test", "statistic", "dof1", "dof2", "p_value"});
        for (const auto& r : rep.full_sample_tests) {
            out.cell(spanning_test_name(r.test));
            out.cell(r.statistic);
            out.cell(r.dof1);
            out.cell(r.dof2);
            out.cell(r.p_value);
            out.end_row();
        }
        // joint stepdown verdict at level xi1 + xi2 - xi1*xi2
        out.cell("joint");
        out.cell(rep.stepdown && rep.stepdown->reject_joint ? 1.0 : 0.0);
        out.cell(0.0);
        out.cell(0.0);
        out.cell(rep.stepdown ? rep.stepdown->xi_joint : 0.0);
        out.end_row();
    } else {
        BacktestReport rep = run_case_b(in.combined, in.k, cfg.study);
        write_spanning_rolling_csv(cfg.out_dir / "spanning_rolling.csv",
                                   rep.windows);
        write_significance_csv(cfg.out_dir / "significance_shares.csv",
                               rep.aggregate);
        for (const auto& w : rep.warnings)
            std::cerr << "warning: " << w << "\n";
    }
    return 0;
}

int cmd_backtest(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, true);
    ensure_out(cfg);
    std::string tag = constraint_tag(cfg.study.constraint);

    BacktestReport a = run_case_a(in.combined, in.k, cfg.study);
    write_weights_csv(cfg.out_dir / ("weights_gmvp_with_" + tag + ".csv"),
                      in.combined.assets, a.gmvp_with);
    write_weights_csv(cfg.out_dir / ("weights_tp_with_" + tag + ".csv"),
                      in.combined.assets, a.tp_with);
    write_frontier_csv(cfg.out_dir / ("frontier_" + tag + ".csv"),
                       a.gross_frontier);
    if (!a.net_frontier_points.empty())
        write_frontier_csv(cfg.out_dir / ("net_frontier_" + tag + ".csv"),
                           a.net_frontier_points);
    write_spanning_csv(cfg.out_dir / "spanning_full.csv", a.full_sample_tests);

    BacktestReport b = run_case_b(in.combined, in.k, cfg.study);
    write_heatmap_csv(cfg.out_dir / "heatmap_gmvp_with.csv", b.assets,
                      b.windows, "gmvp", true, b.k);
    write_heatmap_csv(cfg.out_dir / "heatmap_tp_with.csv", b.assets, b.windows,
                      "tp", true, b.k);
    write_heatmap_csv(cfg.out_dir / "heatmap_gmvp_benchmarks.csv", b.assets,
                      b.windows, "gmvp", false, b.k);
    write_heatmap_csv(cfg.out_dir / "heatmap_tp_benchmarks.csv", b.assets,
                      b.windows, "tp", false, b.k);
    write_metrics_csv(cfg.out_dir / "metrics_caseB.csv", b.tracks);
    write_wealth_csv(cfg.out_dir / "wealth_caseB.csv", b.tracks);
    write_spanning_rolling_csv(cfg.out_dir / "spanning_rolling.csv",
                               b.windows);
    write_significance_csv(cfg.out_dir / "significance_shares.csv",
                           b.aggregate);
    for (const auto& w : b.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_costs(const CliState& st) {
    RunConfig cfg = effective_config(st);
    if (st.dry_run) {
        require_file(cfg.benchmark_panel, "benchmark panel");
        return 0;
    }
    Inputs in = load_inputs(cfg, true);
    MarketMoments m = estimate_moments(in.combined, in.k);

    std::vector<double> budgets;
    for (const auto& tok : [&] {
             std::vector<std::string> toks;
             std::stringstream ss(st.budgets);
             std::string t;
             while (std::getline(ss, t, ',')) toks.push_back(t);
             return toks;
         }())
        budgets.push_back(std::stod(tok) * 1e-4);
    if (budgets.empty()) throw ConfigError("empty budget list");

    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(in.combined.cols()));
    w0.head(static_cast<Eigen::Index>(in.k))
        .setConstant(1.0 / static_cast<double>(in.k));

    auto rows =
        budget_sweep(m, w0, cfg.cost_model, budgets, cfg.study.constraint);
    ensure_out(cfg);
    std::vector<std::string> test_assets(in.combined.assets.begin() +
                                             static_cast<long>(in.k),
                                         in.combined.assets.end());
    write_budget_sweep_csv(cfg.out_dir / "budget_sweep.csv", test_assets, rows,
                           in.k);
    std::string tag = constraint_tag(cfg.study.constraint);
    write_frontier_csv(
        cfg.out_dir / ("net_frontier_" + tag + ".csv"),
        net_frontier(m, w0, cfg.cost_model, cfg.study.constraint,
                     cfg.study.frontier_points));
    return 0;
}

int cmd_selftest(const CliState& st) {
    std::uint64_t seed = st.seed_set ? st.seed : 42;
    std::mt19937_64 rng(seed);
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    check("psi calibration [0,1] = 3",
          std::fabs(calibrate_psi(0.0, 1.0) - 3.0) == 0.0);
    check("cost intersection 2/psi",
          std::fabs(cost_intersection(0.005, 3.0) - 2.0 / 3.0) < 1e-15);
    check("joint stepdown level 0.145",
          std::fabs(stepdown_tests(fit_spanning_regression(
                                       Eigen::MatrixXd::Random(40, 2),
                                       Eigen::MatrixXd::Random(40, 1)))
                        .xi_joint -
                    0.145) < 1e-15);

    bool ordering_ok = true;
    std::normal_distribution<double> nd(0.0, 0.01);
    for (int rep = 0; rep < 200 && ordering_ok; ++rep) {
        int T = 30 + static_cast<int>(rng() % 100);
        int K = 1 + static_cast<int>(rng() % 4);
        int N = 1 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd r1(T, K), r2(T, N);
        for (int t = 0; t < T; ++t) {
            for (int j = 0; j < K; ++j) r1(t, j) = nd(rng);
            for (int j = 0; j < N; ++j) r2(t, j) = nd(rng);
        }
        auto tests = mv_spanning_tests(fit_spanning_regression(r1, r2));
        ordering_ok = ordering_check(tests);
    }
    check("W >= LR >= LM on random instances", ordering_ok);

    bool weights_ok = true;
    for (int rep = 0; rep < 20 && weights_ok; ++rep) {
        Eigen::MatrixXd r(60, 3);
        for (int t = 0; t < 60; ++t)
            for (int j = 0; j < 3; ++j) r(t, j) = nd(rng) + 0.001 * (j + 1);
        MarketMoments m = estimate_moments(r, 2);
        weights_ok = std::fabs(gmvp(m).weights.sum() - 1.0) < 1e-10 &&
                     std::fabs(tangency(m).weights.sum() - 1.0) < 1e-10;
    }
    check("closed-form weights sum to 1", weights_ok);

    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crypto index spanning toolkit"};
    app.require_subcommand(1);
    CliState st;

    auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--config", st.config_path, "run configuration file");
        sub->add_option("--out", st.out_dir, "output directory override");
        sub->add_option("--seed", st.seed, "random seed")
            ->each([&](const std::string&) { st.seed_set = true; });
        sub->add_option("--constraint", st.constraint,
                        "unconstrained or long-only")
            ->check(CLI::IsMember({"unconstrained", "long-only"}));
        sub->add_option("--case", st.study_case, "study case A or B")
            ->check(CLI::IsMember({"A", "B"}));
        sub->add_flag("--dry-run", st.dry_run,
                      "validate configuration without writing files");
        return sub;
    };

    auto* c_index = add_shared(app.add_subcommand("index", "build the index"));
    auto* c_stats =
        add_shared(app.add_subcommand("stats", "descriptive statistics"));
    auto* c_corr = add_shared(app.add_subcommand("corr", "correlations"));
    auto* c_frontier =
        add_shared(app.add_subcommand("frontier", "optimal portfolios"));
    auto* c_spanning =
        add_shared(app.add_subcommand("spanning", "spanning tests"));
    auto* c_backtest =
        add_shared(app.add_subcommand("backtest", "case A and B studies"));
    auto* c_costs = add_shared(
        app.add_subcommand("costs", "budget sweep and net frontiers"));
    c_costs->add_option("--budgets", st.budgets,
                        "comma-separated budgets in basis points");
    auto* c_selftest =
        add_shared(app.add_subcommand("selftest", "internal checks"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_index)) return cmd_index(st);
        if (app.got_subcommand(c_stats)) return cmd_stats(st);
        if (app.got_subcommand(c_corr)) return cmd_corr(st);
        if (app.got_subcommand(c_frontier)) return cmd_frontier(st);
        if (app.got_subcommand(c_spanning)) return cmd_spanning(st);
        if (app.got_subcommand(c_backtest)) return cmd_backtest(st);
        if (app.got_subcommand(c_costs)) return cmd_costs(st);
        if (app.got_subcommand(c_selftest)) return cmd_selftest(st);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
