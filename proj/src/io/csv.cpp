#include <cstdio>
#include <fstream>
#include <sstream>

#include "lightcone/errors.hpp"
#include "lightcone/io.hpp"

namespace lightcone::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out += ',';
        out += t.header[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const Table& t) { write_text_atomic(path, to_csv(t)); }

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty csv");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(path + ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() != t.header.size()) throw FormatError(path + ": ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace lightcone::io
