#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cryptospan/frontier.hpp"
#include "cryptospan/panel.hpp"
#include "cryptospan/spanning.hpp"
#include "cryptospan/stats.hpp"
#include "cryptospan/txcost.hpp"

namespace cryptospan {

enum class StudyCase { A, B };

struct StudyConfig {
    StudyCase study_case = StudyCase::B;
    std::size_t window_months = 12;
    Constraint constraint = Constraint::unconstrained;
    std::optional<CostModel> cost_model;
    double xi1 = 0.10, xi2 = 0.05, alpha = 0.05;
    std::size_t frontier_points = 50;
};

/// One rolling estimation window and the weights held over the following
/// month.
struct WindowRecord {
    Date start;       // first return date inside the window
    Date end;         // last return date inside the window
    Eigen::VectorXd gmvp_with, tp_with;        // K+N assets
    Eigen::VectorXd gmvp_without, tp_without;  // K assets
    std::vector<SpanningResult> spanning;      // empty when N = 0 or skipped
    bool degenerate = false;  // weights carried from the previous window
};

struct SignificanceShare {
    SpanningTest test;
    double b10 = 0;  // share with p in [5%, 10%), stepdown F1 only
    double b5 = 0;   // [1%, 5%)
    double b1 = 0;   // [0.1%, 1%)
    double b01 = 0;  // below 0.1%
    double nonsig = 0;
};

/// Realized weekly simple returns and compounded wealth of one strategy.
struct PortfolioTrack {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> returns;  // simple portfolio returns
    std::vector<double> wealth;   // after each return, from 100 initial
    double end_value = 100.0;
    std::optional<StatBlock> metrics;  // unset when wealth floored at 0
    bool floored = false;
};

struct BacktestReport {
    StudyCase study_case = StudyCase::A;
    std::vector<std::string> assets;  // benchmark columns then test columns
    std::size_t k = 0;

    // Case A
    PortfolioWeights gmvp_with, tp_with, gmvp_without, tp_without;
    std::vector<SpanningResult> full_sample_tests;  // W, LR, LM, GMM, F1, F2
    std::optional<StepdownResult> stepdown;
    std::vector<FrontierPoint> gross_frontier;
    std::vector<FrontierPoint> net_frontier_points;

    // Case B
    std::vector<WindowRecord> windows;
    std::vector<SignificanceShare> aggregate;
    std::vector<PortfolioTrack> tracks;

    std::vector<std::string> warnings;
};

struct WealthPath {
    std::vector<double> values;  // after each period
    double end_value = 0.0;
    bool floored = false;  // a period lost 100% or more
};

/// Compounds simple per-period returns; wealth floors at zero and stays there.
WealthPath wealth_path(const std::vector<double>& simple_returns,
                       double initial = 100.0);

/// Panel columns: first k are benchmarks, the rest test assets.
BacktestReport run_case_a(const ReturnPanel& panel, std::size_t k,
                          const StudyConfig& config);
BacktestReport run_case_b(const ReturnPanel& panel, std::size_t k,
                          const StudyConfig& config);

std::vector<SignificanceShare> aggregate_significance(
    const std::vector<WindowRecord>& windows);

void write_heatmap_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& assets,
                       const std::vector<WindowRecord>& windows,
                       const std::string& portfolio, bool with_tests,
                       std::size_t k);
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<PortfolioTrack>& tracks);
void write_wealth_csv(const std::filesystem::path& path,
                      const std::vector<PortfolioTrack>& tracks);
void write_spanning_rolling_csv(const std::filesystem::path& path,
                                const std::vector<WindowRecord>& windows);
void write_significance_csv(const std::filesystem::path& path,
                            const std::vector<SignificanceShare>& shares);

}  // namespace cryptospan
