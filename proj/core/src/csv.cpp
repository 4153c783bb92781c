#include "ctp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctp/errors.hpp"

namespace ctp {

std::string csv_num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string csv_num(uint64_t x) { return std::to_string(x); }
std::string csv_num(int64_t x) { return std::to_string(x); }

std::string csv_text(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return out;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw Error("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(columns.size()));
    rows.push_back(std::move(cells));
}

std::string render_csv(const CsvTable& table) {
    std::string out;
    for (const std::string& c : table.comments) {
        out += "# ";
        out += c;
        out += '\n';
    }
    for (size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << render_csv(table);
    if (!f) throw Error("failed writing " + path);
}

}  // namespace ctp
