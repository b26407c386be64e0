#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cryptospan/backtest.hpp"
#include "cryptospan/dates.hpp"
#include "cryptospan/txcost.hpp"

namespace cryptospan {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Run settings from a sectioned key = value file. Unknown sections or keys
/// are rejected so typos fail loudly.
struct RunConfig {
    std::filesystem::path benchmark_panel;
    std::filesystem::path coin_prices;
    std::filesystem::path coin_mcaps;

    std::optional<Date> reference_date;
    std::vector<std::string> universe_coins;  // empty = every panel column

    StudyConfig study;
    bool costs_enabled = false;
    CostModel cost_model;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 42;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cryptospan
