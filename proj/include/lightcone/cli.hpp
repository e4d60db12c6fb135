#pragma once

// Batch driver: scenario files, the pipelines behind each subcommand and the
// report bundle they write.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/io.hpp"

namespace lightcone::cli {

using json = nlohmann::json;

// A scenario is its configuration with every default filled in.
struct Scenario {
    json cfg;
    std::uint64_t seed() const { return cfg.at("seed").get<std::uint64_t>(); }
    std::string name() const { return cfg.at("name").get<std::string>(); }
    bool enabled(const std::string& check) const { return cfg.at("checks").at(check).get<bool>(); }
    double tol(const std::string& key) const { return cfg.at("tolerances").at(key).get<double>(); }
};

json default_scenario();
// Deep-merges over the defaults, rejects unknown keys and out-of-range values.
Scenario parse_scenario(const json& j);
Scenario load_scenario(const std::string& path);

struct Check {
    std::string name;
    std::string condition;  // what property the check tests
    bool pass = false;
    bool informational = false;  // reported, not counted toward the exit status
    json details = json::object();
};

struct Report {
    std::string command;
    std::string scenario;
    std::vector<Check> checks;
    json data = json::object();
    std::map<std::string, io::Table> tables;       // written as <name>.csv
    std::map<std::string, io::Container> blobs;    // written as <name>.bin
    bool pass() const;
    const Check* find(const std::string& name) const;
    json to_json() const;
};

std::string report_text(const Report& r);  // deterministic JSON text
void write_report(const Report& r, const std::string& out_dir);

// Subcommand pipelines. `level` indexes bulk.levels (negative: finest).
Report run_geometry(const Scenario& sc);
Report run_state(const Scenario& sc);
Report run_verify(const Scenario& sc, int level = -1);
Report run_goursat(const Scenario& sc, int level = -1);
Report run_sweep(const Scenario& sc);
Report run_report(const std::string& dir);

// Least-squares slope of log(err) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

// Parses arguments and runs one subcommand. Exit codes: 0 all enabled checks
// pass, 1 some check fails, 2 configuration error, 3 module error.
int main_entry(int argc, char** argv);

}  // namespace lightcone::cli
