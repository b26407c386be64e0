#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cryptospan/panel.hpp"

namespace cryptospan {

/// Closed coin universe fixed at the reference date; refreshed (but never
/// extended) at the first weekly observation of each calendar month.
struct UniverseSpec {
    Date reference_date;
    std::vector<std::string> coins;
};

struct RebalanceRecord {
    Date date;
    std::size_t n_act = 0;
    std::size_t n_ind = 0;
    std::vector<std::string> constituents;
    double normalization_factor = 1.0;  // level the new basket is chained to
};

struct IndexSeries {
    std::vector<Date> dates;
    std::vector<double> levels;  // base 100 at the reference date
    std::vector<RebalanceRecord> audit;
    std::vector<std::string> warnings;
};

/// Coins with both price and market cap present at `date`.
std::set<std::string> active_universe(const CoinPanelPair& coins,
                                      const Date& date);

/// Largest multiple of 5 not above n_act; below 5 the universe itself.
std::size_t index_size(std::size_t n_act);

/// The n_ind active coins with largest market cap; ties broken by ascending
/// identifier.
std::vector<std::string> select_constituents(
    const std::set<std::string>& active, const CoinPanelPair& coins,
    const Date& date, std::size_t n_ind);

IndexSeries build_index(const CoinPanelPair& coins, const UniverseSpec& spec);

/// Rebalancing dates: the first weekly date of each calendar month.
std::vector<Date> rebalancing_dates(const std::vector<Date>& weekly_dates);

void write_index_csv(const std::filesystem::path& levels_path,
                     const std::filesystem::path& audit_path,
                     const IndexSeries& series);

PricePanel index_as_panel(const IndexSeries& series,
                          const std::string& name = "EWCI");

}  // namespace cryptospan
