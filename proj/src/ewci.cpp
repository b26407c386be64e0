#include "cryptospan/ewci.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cryptospan/csv.hpp"

namespace cryptospan {

namespace {

std::size_t column_of(const PricePanel& p, const std::string& id) {
    for (std::size_t i = 0; i < p.assets.size(); ++i)
        if (p.assets[i] == id) return i;
    throw std::invalid_argument("coin '" + id + "' not in panel");
}

std::size_t row_of(const PricePanel& p, const Date& d) {
    for (std::size_t t = 0; t < p.dates.size(); ++t)
        if (p.dates[t] == d) return t;
    throw std::invalid_argument("date " + d.iso() + " not in panel");
}

}  // namespace

std::vector<Date> rebalancing_dates(const std::vector<Date>& weekly_dates) {
    std::vector<Date> out;
    int last_y = -1, last_m = -1;
    for (const auto& d : weekly_dates) {
        if (d.year != last_y || d.month != last_m) {
            out.push_back(d);
            last_y = d.year;
            last_m = d.month;
        }
    }
    return out;
}

std::set<std::string> active_universe(const CoinPanelPair& coins,
                                      const Date& date) {
    std::size_t t = row_of(coins.price, date);
    std::set<std::string> active;
    for (std::size_t i = 0; i < coins.price.assets.size(); ++i)
        if (coins.price.has(t, i) && coins.mcap.has(t, i))
            active.insert(coins.price.assets[i]);
    return active;
}

std::size_t index_size(std::size_t n_act) {
    if (n_act < 5) return n_act;
    return (n_act / 5) * 5;
}

std::vector<std::string> select_constituents(
    const std::set<std::string>& active, const CoinPanelPair& coins,
    const Date& date, std::size_t n_ind) {
    if (n_ind > active.size())
        throw std::invalid_argument("index size exceeds active universe");
    std::size_t t = row_of(coins.mcap, date);
    std::vector<std::pair<double, std::string>> ranked;
    ranked.reserve(active.size());
    for (const auto& id : active)
        ranked.emplace_back(
            coins.mcap.values(static_cast<Eigen::Index>(t),
                              static_cast<Eigen::Index>(column_of(coins.mcap, id))),
            id);
    // largest mcap first, ties by ascending identifier
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(n_ind);
    for (std::size_t i = 0; i < n_ind; ++i) out.push_back(ranked[i].second);
    return out;
}

IndexSeries build_index(const CoinPanelPair& coins, const UniverseSpec& spec) {
    if (spec.coins.empty())
        throw std::invalid_argument("empty coin universe");
    {
        std::set<std::string> seen;
        for (const auto& c : spec.coins)
            if (!seen.insert(c).second)
                throw std::invalid_argument("duplicate coin in universe: " + c);
    }
    // restrict to the universe columns and dates from the reference date on
    std::vector<std::size_t> cols;
    for (const auto& c : spec.coins) cols.push_back(column_of(coins.price, c));
    std::vector<std::size_t> trows;
    for (std::size_t t = 0; t < coins.price.dates.size(); ++t)
        if (!(coins.price.dates[t] < spec.reference_date)) trows.push_back(t);
    if (trows.empty())
        throw std::invalid_argument("coin panel does not cover the reference date");

    auto price_at = [&](std::size_t t, std::size_t coin) {
        return coins.price.values(static_cast<Eigen::Index>(trows[t]),
                                  static_cast<Eigen::Index>(cols[coin]));
    };
    auto mcap_at = [&](std::size_t t, std::size_t coin) {
        return coins.mcap.values(static_cast<Eigen::Index>(trows[t]),
                                 static_cast<Eigen::Index>(cols[coin]));
    };

    IndexSeries series;
    for (std::size_t t : trows) series.dates.push_back(coins.price.dates[t]);
    const auto reb_dates = rebalancing_dates(series.dates);

    std::vector<std::size_t> constituents;        // indices into spec.coins
    std::map<std::size_t, double> carried_price;  // LOCF state per constituent
    double level = 100.0;
    std::size_t reb_cursor = 0;

    auto rebalance = [&](std::size_t t) {
        std::set<std::string> active;
        std::vector<std::pair<double, std::string>> ranked;
        for (std::size_t c = 0; c < spec.coins.size(); ++c)
            if (!std::isnan(price_at(t, c)) && !std::isnan(mcap_at(t, c))) {
                active.insert(spec.coins[c]);
                ranked.emplace_back(mcap_at(t, c), spec.coins[c]);
            }
        std::size_t n_ind = index_size(active.size());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        RebalanceRecord rec;
        rec.date = series.dates[t];
        rec.n_act = active.size();
        rec.n_ind = n_ind;
        rec.normalization_factor = level;
        constituents.clear();
        carried_price.clear();
        for (std::size_t i = 0; i < n_ind; ++i) {
            rec.constituents.push_back(ranked[i].second);
            for (std::size_t c = 0; c < spec.coins.size(); ++c)
                if (spec.coins[c] == ranked[i].second) {
                    constituents.push_back(c);
                    carried_price[c] = price_at(t, c);
                }
        }
        if (constituents.empty())
            series.warnings.push_back("empty active universe at " +
                                      series.dates[t].iso() +
                                      "; index level carried flat");
        series.audit.push_back(std::move(rec));
    };

    for (std::size_t t = 0; t < series.dates.size(); ++t) {
        if (t > 0) {
            // weekly return under the current composition: equal-weight mean
            // of constituent simple returns, prices carried forward over gaps
            double sum = 0.0;
            for (std::size_t c : constituents) {
                double prev = carried_price[c];
                double now = price_at(t, c);
                if (std::isnan(now)) now = prev;
                sum += now / prev - 1.0;
                carried_price[c] = now;
            }
            double mean_ret =
                constituents.empty() ? 0.0 : sum / static_cast<double>(constituents.size());
            level *= 1.0 + mean_ret;
        }
        series.levels.push_back(level);
        if (reb_cursor < reb_dates.size() && series.dates[t] == reb_dates[reb_cursor]) {
            rebalance(t);
            ++reb_cursor;
        }
    }
    return series;
}

void write_index_csv(const std::filesystem::path& levels_path,
                     const std::filesystem::path& audit_path,
                     const IndexSeries& series) {
    {
        csv::Writer w(levels_path);
        w.header({"date", "level"});
        for (std::size_t t = 0; t < series.dates.size(); ++t) {
            w.cell(series.dates[t].iso());
            w.cell(series.levels[t]);
            w.end_row();
        }
    }
    {
        csv::Writer w(audit_path);
        w.header({"rebalance_date", "n_act", "n_ind", "constituents",
                  "normalization_factor"});
        for (const auto& rec : series.audit) {
            w.cell(rec.date.iso());
            w.cell(std::to_string(rec.n_act));
            w.cell(std::to_string(rec.n_ind));
            std::string joined;
            for (const auto& c : rec.constituents) {
                if (!joined.empty()) joined += ';';
                joined += c;
            }
            w.cell(joined);
            w.cell(rec.normalization_factor);
            w.end_row();
        }
    }
}

PricePanel index_as_panel(const IndexSeries& series, const std::string& name) {
    PricePanel p;
    p.kind = PanelKind::benchmark;
    p.dates = series.dates;
    p.assets = {name};
    p.values.resize(static_cast<Eigen::Index>(series.levels.size()), 1);
    for (std::size_t t = 0; t < series.levels.size(); ++t)
        p.values(static_cast<Eigen::Index>(t), 0) = series.levels[t];
    return p;
}

}  // namespace cryptospan
