#include "spectrwm/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spectrwm {

void CsvTable::add_row(std::vector<CsvCell> row) {
    if (row.size() != header.size()) {
        throw std::invalid_argument("CSV row has " + std::to_string(row.size()) +
                                    " cells, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_cell(const CsvCell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return format_real(std::get<double>(cell));
}

void write_csv(const CsvTable& table, std::ostream& out) {
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        out << (k ? "," : "") << table.header[k];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_cell(row[k]);
        out << '\n';
    }
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_csv(table, out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

ParsedCsv parse_csv(std::istream& in) {
    ParsedCsv out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            out.header = split_line(line);
            first = false;
        } else if (!line.empty()) {
            out.rows.push_back(split_line(line));
        }
    }
    return out;
}

ParsedCsv parse_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return parse_csv(in);
}

double parse_real(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty numeric cell");
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return value;
}

}  // namespace spectrwm
