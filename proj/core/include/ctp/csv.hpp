#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctp {

/// Fixed 17-significant-digit scientific rendering; the formatting contract
/// behind byte-identical reruns.
std::string csv_num(double x);
std::string csv_num(uint64_t x);
std::string csv_num(int64_t x);

/// Sanitizes free text for a CSV cell: commas and line breaks become ';'.
std::string csv_text(const std::string& s);

struct CsvTable {
    std::vector<std::string> comments;  // emitted first, each prefixed "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
};

std::string render_csv(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace ctp
