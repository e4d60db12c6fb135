#pragma once

// Self-describing binary container and CSV helpers shared by the modules.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/types.hpp"

namespace lightcone::io {

using json = nlohmann::json;

struct Array {
    std::string dtype;  // "f64", "c128" or "i64"
    std::vector<std::int64_t> shape;
    std::vector<unsigned char> bytes;
};

struct Container {
    std::string kind;
    json meta = json::object();
    std::map<std::string, Array> arrays;

    void put(const std::string& name, const Mat& m);
    void put(const std::string& name, const CMat& m);
    void put(const std::string& name, const std::vector<std::int64_t>& v);
    Mat get_real(const std::string& name) const;
    CMat get_complex(const std::string& name) const;
    std::vector<std::int64_t> get_index(const std::string& name) const;
    bool has(const std::string& name) const { return arrays.count(name) != 0; }
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

std::string format_double(double x);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const Table& t);
std::string to_csv(const Table& t);
Table read_csv(const std::string& path);

// Writes text to path via a temporary file and rename, so readers never see a
// half-written file.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace lightcone::io
