#include "cryptospan/panel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cryptospan/csv.hpp"

namespace cryptospan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_cell(const std::string& s, std::size_t row, const std::string& col,
                  PanelKind kind, bool is_mcap) {
    if (s.empty()) {
        if (kind == PanelKind::benchmark)
            throw LoadError("missing benchmark value at row " +
                            std::to_string(row) + ", column " + col);
        return kNaN;
    }
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw LoadError("unparsable number '" + s + "' at row " +
                        std::to_string(row) + ", column " + col);
    }
    if (pos != s.size() || !std::isfinite(v))
        throw LoadError("unparsable number '" + s + "' at row " +
                        std::to_string(row) + ", column " + col);
    if (is_mcap ? v < 0.0 : v <= 0.0)
        throw LoadError((is_mcap ? std::string("negative market cap '")
                                 : std::string("non-positive price '")) +
                        s + "' at row " + std::to_string(row) + ", column " + col);
    return v;
}

PricePanel load_grid(const std::filesystem::path& path, PanelKind kind,
                     bool is_mcap) {
    auto table = csv::read_file(path);
    if (table.header.empty() || table.header[0] != "date")
        throw LoadError("malformed header in " + path.string() +
                        ": first column must be 'date'");
    PricePanel panel;
    panel.kind = kind;
    for (std::size_t i = 1; i < table.header.size(); ++i) {
        const auto& id = table.header[i];
        if (id.empty())
            throw LoadError("malformed header in " + path.string() +
                            ": empty asset identifier");
        for (const auto& seen : panel.assets)
            if (seen == id)
                throw LoadError("duplicate asset identifier '" + id + "' in " +
                                path.string());
        panel.assets.push_back(id);
    }
    const std::size_t n = panel.assets.size();
    panel.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                        static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != n + 1)
            throw LoadError("row " + std::to_string(r + 2) + " in " +
                            path.string() + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(n + 1));
        Date d;
        try {
            d = Date::parse(row[0]);
        } catch (const std::exception& e) {
            throw LoadError(std::string(e.what()) + " (row " +
                            std::to_string(r + 2) + " in " + path.string() + ")");
        }
        if (!panel.dates.empty() && !(panel.dates.back() < d))
            throw LoadError("non-monotone dates at row " + std::to_string(r + 2) +
                            " in " + path.string());
        panel.dates.push_back(d);
        for (std::size_t i = 0; i < n; ++i)
            panel.values(static_cast<Eigen::Index>(r),
                         static_cast<Eigen::Index>(i)) =
                parse_cell(row[i + 1], r + 2, panel.assets[i], kind, is_mcap);
    }
    return panel;
}

}  // namespace

PricePanel load_panel(const std::filesystem::path& path, PanelKind kind) {
    return load_grid(path, kind, false);
}

CoinPanelPair load_coin_panels(const std::filesystem::path& price_path,
                               const std::filesystem::path& mcap_path) {
    CoinPanelPair pair;
    pair.price = load_grid(price_path, PanelKind::coin, false);
    pair.mcap = load_grid(mcap_path, PanelKind::coin, true);
    if (pair.price.assets != pair.mcap.assets ||
        pair.price.dates != pair.mcap.dates)
        throw LoadError("price and market-cap grids disagree: " +
                        price_path.string() + " vs " + mcap_path.string());
    return pair;
}

ReturnPanel to_log_returns(const PricePanel& panel) {
    if (panel.rows() < 2)
        throw std::invalid_argument("need at least 2 dates for returns");
    const auto T = static_cast<Eigen::Index>(panel.rows());
    const auto n = static_cast<Eigen::Index>(panel.cols());
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = panel.values(t, i);
            if (std::isnan(v) || v <= 0.0)
                throw std::invalid_argument(
                    "missing or non-positive price at " + panel.dates[t].iso() +
                    ", asset " + panel.assets[i]);
        }
    ReturnPanel r;
    r.assets = panel.assets;
    r.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    r.values.resize(T - 1, n);
    for (Eigen::Index t = 0; t + 1 < T; ++t)
        for (Eigen::Index i = 0; i < n; ++i)
            r.values(t, i) =
                std::log(panel.values(t + 1, i) / panel.values(t, i));
    return r;
}

PricePanel align_to_fridays(const PricePanel& panel) {
    PricePanel out;
    out.assets = panel.assets;
    out.kind = panel.kind;
    if (panel.dates.empty()) {
        out.values.resize(0, static_cast<Eigen::Index>(panel.cols()));
        return out;
    }
    const Date first = next_friday(panel.dates.front());
    const Date last = next_friday(panel.dates.back());
    std::vector<Date> grid;
    for (Date f = first; !(last < f); f = f.plus_days(7)) grid.push_back(f);
    const auto n = static_cast<Eigen::Index>(panel.cols());
    out.dates = grid;
    out.values.resize(static_cast<Eigen::Index>(grid.size()), n);
    out.values.setConstant(kNaN);
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        // week (grid[g]-6 .. grid[g]]: last present observation per asset
        while (cursor < panel.dates.size() && !(grid[g] < panel.dates[cursor])) {
            std::int64_t age = grid[g].serial() - panel.dates[cursor].serial();
            if (age < 7) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    double v = panel.values(static_cast<Eigen::Index>(cursor), i);
                    if (!std::isnan(v))
                        out.values(static_cast<Eigen::Index>(g), i) = v;
                }
            }
            ++cursor;
        }
        if (panel.kind == PanelKind::benchmark)
            for (Eigen::Index i = 0; i < n; ++i)
                if (std::isnan(out.values(static_cast<Eigen::Index>(g), i)))
                    throw LoadError("benchmark asset " + panel.assets[i] +
                                    " has no observation in the week ending " +
                                    grid[g].iso());
    }
    return out;
}

ReturnPanel concat_columns(const ReturnPanel& a, const ReturnPanel& b) {
    if (a.dates != b.dates)
        throw std::invalid_argument("return panels are not date-aligned");
    ReturnPanel out;
    out.dates = a.dates;
    out.assets = a.assets;
    out.assets.insert(out.assets.end(), b.assets.begin(), b.assets.end());
    out.values.resize(a.values.rows(), a.values.cols() + b.values.cols());
    out.values << a.values, b.values;
    return out;
}

void write_panel_csv(const std::filesystem::path& path, const PricePanel& panel) {
    csv::Writer w(path);
    std::vector<std::string> header{"date"};
    header.insert(header.end(), panel.assets.begin(), panel.assets.end());
    w.header(header);
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        w.cell(panel.dates[t].iso());
        for (std::size_t i = 0; i < panel.cols(); ++i) {
            double v = panel.values(static_cast<Eigen::Index>(t),
                                    static_cast<Eigen::Index>(i));
            if (std::isnan(v))
                w.cell(std::string{});
            else
                w.cell(v);
        }
        w.end_row();
    }
}

}  // namespace cryptospan
