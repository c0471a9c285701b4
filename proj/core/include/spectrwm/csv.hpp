#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace spectrwm {

/// Text, integer or real; reals are written with 17 significant digits so
/// they parse back bit-exactly.
using CsvCell = std::variant<std::string, std::int64_t, double>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    /// Throws std::invalid_argument if the row width differs from the header.
    void add_row(std::vector<CsvCell> row);
};

std::string format_real(double value);
std::string format_cell(const CsvCell& cell);

void write_csv(const CsvTable& table, std::ostream& out);
/// Throws std::runtime_error naming the path when the file cannot be written.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

/// Raw cells as text; the first line is the header.
struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_csv(std::istream& in);
ParsedCsv parse_csv_file(const std::filesystem::path& path);
/// strtod over the whole cell; throws std::invalid_argument otherwise.
double parse_real(const std::string& text);

}  // namespace spectrwm
