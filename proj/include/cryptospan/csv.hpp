#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cryptospan::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated parsing, no quoting. Empty cells stay empty strings.
Table read_file(const std::filesystem::path& path);
Table parse(const std::string& text);

class Writer {
  public:
    explicit Writer(const std::filesystem::path& path);
    ~Writer();

    void header(const std::vector<std::string>& cols);
    void cell(const std::string& s);
    void cell(double v);  // 10 significant digits
    void cell(std::optional<double> v);  // empty when unset
    void end_row();

  private:
    struct Impl;
    Impl* impl_;
};

std::string format_number(double v);

}  // namespace cryptospan::csv
