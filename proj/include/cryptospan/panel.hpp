#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cryptospan/dates.hpp"

namespace cryptospan {

enum class PanelKind { benchmark, coin };

/// Date-indexed matrix of price/level observations. Missing cells are NaN in
/// `values`; a benchmark panel must have none after alignment, a coin panel
/// may carry gaps.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    Eigen::MatrixXd values;  // dates x assets, NaN = missing
    PanelKind kind = PanelKind::benchmark;

    std::size_t rows() const { return dates.size(); }
    std::size_t cols() const { return assets.size(); }
    bool has(std::size_t t, std::size_t i) const {
        return !std::isnan(values(static_cast<Eigen::Index>(t),
                                  static_cast<Eigen::Index>(i)));
    }
};

/// Price + market cap grids over the same dates/assets.
struct CoinPanelPair {
    PricePanel price;
    PricePanel mcap;
};

struct ReturnPanel {
    std::vector<Date> dates;  // one fewer than the source panel
    std::vector<std::string> assets;
    Eigen::MatrixXd values;  // log returns

    std::size_t rows() const { return dates.size(); }
    std::size_t cols() const { return assets.size(); }
};

class LoadError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// CSV contract: first column `date` (YYYY-MM-DD), one column per asset,
/// empty cell = missing. Missing cells are recorded, never filled.
PricePanel load_panel(const std::filesystem::path& path, PanelKind kind);

/// Loads `<stem>_price.csv` and `<stem>_mcap.csv`; the grids must match.
CoinPanelPair load_coin_panels(const std::filesystem::path& price_path,
                               const std::filesystem::path& mcap_path);

ReturnPanel to_log_returns(const PricePanel& panel);

/// Resample to a weekly Friday grid: for each Friday in the covered range,
/// the last observation at or before that Friday. A benchmark cell with no
/// observation at all before the first Friday is an error; coin cells stay
/// missing until first observed.
PricePanel align_to_fridays(const PricePanel& panel);

ReturnPanel concat_columns(const ReturnPanel& a, const ReturnPanel& b);

void write_panel_csv(const std::filesystem::path& path, const PricePanel& panel);

}  // namespace cryptospan
