#include "cryptospan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cryptospan {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + v);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad integer value for '" + key + "': " + v);
    return out;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "inputs" && section != "universe" &&
                section != "study" && section != "costs" &&
                section != "output")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto unknown = [&]() -> ConfigError {
            return ConfigError("unknown key '" + key + "' in section [" +
                               section + "]");
        };
        if (section == "inputs") {
            if (key == "benchmark_panel")
                cfg.benchmark_panel = val;
            else if (key == "coin_prices")
                cfg.coin_prices = val;
            else if (key == "coin_mcaps")
                cfg.coin_mcaps = val;
            else
                throw unknown();
        } else if (section == "universe") {
            if (key == "reference_date")
                cfg.reference_date = Date::parse(val);
            else if (key == "coins")
                cfg.universe_coins = split_list(val);
            else
                throw unknown();
        } else if (section == "study") {
            if (key == "case") {
                if (val == "A")
                    cfg.study.study_case = StudyCase::A;
                else if (val == "B")
                    cfg.study.study_case = StudyCase::B;
                else
                    throw ConfigError("case must be A or B, got " + val);
            } else if (key == "window_months") {
                cfg.study.window_months =
                    static_cast<std::size_t>(parse_u64(key, val));
            } else if (key == "constraint") {
                if (val == "unconstrained")
                    cfg.study.constraint = Constraint::unconstrained;
                else if (val == "long-only" || val == "long_only")
                    cfg.study.constraint = Constraint::long_only;
                else
                    throw ConfigError(
                        "constraint must be unconstrained or long-only, got " +
                        val);
            } else if (key == "frontier_points") {
                cfg.study.frontier_points =
                    static_cast<std::size_t>(parse_u64(key, val));
            } else if (key == "xi1") {
                cfg.study.xi1 = parse_double(key, val);
            } else if (key == "xi2") {
                cfg.study.xi2 = parse_double(key, val);
            } else if (key == "alpha") {
                cfg.study.alpha = parse_double(key, val);
            } else {
                throw unknown();
            }
        } else if (section == "costs") {
            if (key == "enabled") {
                if (val == "true")
                    cfg.costs_enabled = true;
                else if (val == "false")
                    cfg.costs_enabled = false;
                else
                    throw ConfigError("enabled must be true or false");
            } else if (key == "c_benchmark_bp") {
                cfg.cost_model.c_benchmark = parse_double(key, val) * 1e-4;
            } else if (key == "c_test_bp") {
                cfg.cost_model.c_test = parse_double(key, val) * 1e-4;
            } else if (key == "psi") {
                cfg.cost_model.psi = parse_double(key, val);
            } else if (key == "v0") {
                cfg.cost_model.v0 = parse_double(key, val);
            } else if (key == "budget_bp") {
                cfg.cost_model.budget = parse_double(key, val) * 1e-4;
            } else {
                throw unknown();
            }
        } else if (section == "output") {
            if (key == "dir")
                cfg.out_dir = val;
            else if (key == "seed")
                cfg.seed = parse_u64(key, val);
            else
                throw unknown();
        } else {
            throw ConfigError("key '" + key + "' appears before any section");
        }
    }
    if (cfg.cost_model.psi <= 0.0) throw ConfigError("psi must be positive");
    if (cfg.cost_model.budget < 0.0 || cfg.cost_model.c_benchmark < 0.0 ||
        cfg.cost_model.c_test < 0.0)
        throw ConfigError("cost factors and budget must be nonnegative");
    if (cfg.costs_enabled) cfg.study.cost_model = cfg.cost_model;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str());
    // paths resolve relative to the config file's directory
    auto base = path.parent_path();
    auto fix = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    fix(cfg.benchmark_panel);
    fix(cfg.coin_prices);
    fix(cfg.coin_mcaps);
    fix(cfg.out_dir);
    return cfg;
}

}  // namespace cryptospan
