#include "cryptospan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cryptospan::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Table parse(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Writer::Impl {
    std::ofstream out;
    bool at_line_start = true;
};

Writer::Writer(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out)
        throw std::runtime_error("cannot open file for writing: " + path.string());
}

Writer::~Writer() { delete impl_; }

void Writer::header(const std::vector<std::string>& cols) {
    for (const auto& c : cols) cell(c);
    end_row();
}

void Writer::cell(const std::string& s) {
    if (!impl_->at_line_start) impl_->out << ',';
    impl_->out << s;
    impl_->at_line_start = false;
}

void Writer::cell(double v) { cell(format_number(v)); }

void Writer::cell(std::optional<double> v) {
    if (v)
        cell(*v);
    else
        cell(std::string{});
}

void Writer::end_row() {
    impl_->out << '\n';
    impl_->at_line_start = true;
}

}  // namespace cryptospan::csv
