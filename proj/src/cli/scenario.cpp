#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lightcone/cli.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::cli {

namespace fs = std::filesystem;

json default_scenario() {
    return json::parse(R"({
  "version": 1,
  "name": "unnamed",
  "seed": null,
  "chart": {"family": "minkowski", "d": 3, "amplitude": 0.1, "width": 1.0, "center": [],
            "potential": "zero", "mass": 0.0, "radius": 10000.0},
  "cone": {"p": [], "eps0": 0.1, "defining_function": "reference"},
  "boundary": {"n_s": 512, "s_min": -2.0, "s_max": 1.6, "L": 16},
  "state": {"recipe": "moretti", "count": 1,
            "grid": {"n_s": 32, "s_min": -32.0, "s_max": 32.0, "L": 3},
            "rank": 4, "sigma0": -1.0, "ell0": -1.0, "sv_lo": 0.5, "sv_hi": 2.0,
            "d_norm": 0.5, "bypass_norm": false, "file": "", "expect_purity": "auto",
            "N_max": 4, "factor": 1.5, "shifts": 5, "shift_amplitude": 0.2, "charge_pairs": 100},
  "bulk": {"half_width": 1.5, "t_p": 0.0, "t1": 1.0, "t_end": 1.25, "courant": 0.5,
           "cubic": false, "levels": [32, 48, 64]},
  "probes": {"packets": [{"center": [0.05, 0.0, 0.0], "radius": 0.55, "slot": "value"},
                         {"center": [-0.03, 0.05, 0.0], "radius": 0.495, "slot": "velocity"}],
             "sources": [{"t": 0.75, "center": [0.3, 0.0, 0.0], "tau": 0.15, "radius": 0.15},
                         {"t": 0.45, "center": [0.0, 0.0, 0.0], "tau": 0.15, "radius": 0.15}],
             "pure_sigma0": 0.5, "pure_ell0": 1.0},
  "decay": {"boundary": {"n_s": 256, "s_min": -4.0, "s_max": 0.5, "L": 6},
            "fit": [-3.5, -1.5], "t_data": 0.3, "width": 0.15, "radius": 0.25, "level": 64},
  "conformal": {"amplitude": 0.2, "width": 0.5, "center": [0.5, 0.0, 0.0, 0.0], "t_eval": 0.5,
                "levels": [32, 64]},
  "goursat": {"per_axis": 6, "count": 100, "half_cube": 0.5196, "levels": [32, 64],
              "boundary": {"n_s": 256, "s_min": -2.5, "s_max": 1.7, "L": 10},
              "cutoff": 1e-8, "cubic": true, "enrichment": [20, 40, 60, 80, 100], "random_traces": 3},
  "checks": {"geometry": true, "charge_identity": false, "state": true, "shift_covariance": false,
             "monomorphism": false, "bulk_ccr": false, "trace_decay": false, "conformal": false,
             "goursat": false},
  "tolerances": {"normal_form": 1e-8, "log_alpha_spread": 1e-8, "k_bound": 10.0, "k_slope_bound": 10.0,
                 "ccr": 1e-12, "charge_identity": 1e-12, "bogoliubov": 1e-10, "monomorphism": 1e-3,
                 "monomorphism_order": 1.8, "leapfrog_order": 0.2, "bulk_ccr": 1e-3, "antisymmetry": 1e-6,
                 "decay": 0.1, "conformal_symplectic": 1e-4, "conformal_order": 0.2,
                 "round_trip": 1e-6, "packet_recovery": 1e-4, "condition_stability": 0.2,
                 "mixed_fail_fraction": 0.9},
  "sweep": {"levels": [32, 48, 64]},
  "output": {"dump_fields": false}
})");
}

namespace {

void merge(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError("scenario: '" + path + "' must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("scenario: unknown key '" + key + "'");
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object()) {
            merge(slot, v, key);
        } else if (slot.is_null() || (slot.is_number() && v.is_number()) || (slot.is_boolean() && v.is_boolean()) ||
                   (slot.is_string() && v.is_string()) || (slot.is_array() && v.is_array())) {
            slot = v;
        } else {
            throw ConfigError("scenario: '" + key + "' has the wrong type");
        }
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("scenario: " + what);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
    return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

void check_grid(const json& g, const std::string& where) {
    const int n = g.at("n_s").get<int>();
    require(n >= 8 && (n & (n - 1)) == 0, where + ".n_s must be a power of two >= 8");
    require(g.at("s_min").get<double>() < g.at("s_max").get<double>(), where + " needs s_min < s_max");
    const int L = g.at("L").get<int>();
    require(L >= 1 && L <= 40, where + ".L must lie in [1, 40]");
}

void check_levels(const json& a, const std::string& where) {
    require(!a.empty(), where + " must not be empty");
    for (const auto& v : a) require(v.is_number_integer() && v.get<int>() >= 8 && v.get<int>() <= 512, where + " entries must be integers in [8, 512]");
}

void check_vector(const json& a, std::size_t n, const std::string& where, bool allow_empty) {
    require((allow_empty && a.empty()) || a.size() == n, where + " must have " + std::to_string(n) + " entries");
    for (const auto& v : a) require(v.is_number(), where + " entries must be numbers");
}

void validate(const json& c) {
    require(c.at("version").is_number_integer() && c.at("version").get<int>() == 1, "version must be 1");
    require(c.at("seed").is_number_unsigned() || (c.at("seed").is_number_integer() && c.at("seed").get<long long>() >= 0),
            "seed is mandatory and must be a non-negative integer");
    const json& ch = c.at("chart");
    require(one_of(ch.at("family").get<std::string>(), {"minkowski", "conformal-gaussian"}), "chart.family unknown");
    const int d = ch.at("d").get<int>();
    require(d == 2 || d == 3, "chart.d must be 2 or 3");
    require(one_of(ch.at("potential").get<std::string>(), {"zero", "mass", "conformal"}), "chart.potential unknown");
    require(ch.at("width").get<double>() > 0.0, "chart.width must be positive");
    require(ch.at("amplitude").get<double>() > -1.0, "chart.amplitude must exceed -1 (positive conformal factor)");
    require(ch.at("radius").get<double>() > 0.0, "chart.radius must be positive");
    check_vector(ch.at("center"), d + 1, "chart.center", true);
    const json& cone = c.at("cone");
    check_vector(cone.at("p"), d + 1, "cone.p", true);
    require(cone.at("eps0").get<double>() > 0.0, "cone.eps0 must be positive");
    require(one_of(cone.at("defining_function").get<std::string>(), {"reference", "geodesic-fit"}),
            "cone.defining_function unknown");
    check_grid(c.at("boundary"), "boundary");
    const json& st = c.at("state");
    const std::string recipe = st.at("recipe").get<std::string>();
    require(one_of(recipe, {"moretti", "gauge", "pure", "suite", "identity", "custom"}), "state.recipe unknown");
    require(st.at("count").get<int>() >= 1 && st.at("count").get<int>() <= 100, "state.count must lie in [1, 100]");
    check_grid(st.at("grid"), "state.grid");
    require(st.at("rank").get<int>() >= 1, "state.rank must be positive");
    require(st.at("sv_lo").get<double>() > 0.0 && st.at("sv_lo").get<double>() <= st.at("sv_hi").get<double>(),
            "state.sv_lo/sv_hi must satisfy 0 < lo <= hi");
    require(st.at("d_norm").get<double>() >= 0.0, "state.d_norm must be non-negative");
    require(recipe != "custom" || !st.at("file").get<std::string>().empty(), "state.file is required for the custom recipe");
    require(one_of(st.at("expect_purity").get<std::string>(), {"auto", "pure", "mixed", "any"}), "state.expect_purity unknown");
    require(st.at("N_max").get<int>() >= 1 && st.at("N_max").get<int>() <= 8, "state.N_max must lie in [1, 8]");
    require(st.at("factor").get<double>() > 1.0, "state.factor must exceed 1");
    require(st.at("shifts").get<int>() >= 0 && st.at("shifts").get<int>() <= 50, "state.shifts must lie in [0, 50]");
    require(st.at("shift_amplitude").get<double>() > 0.0, "state.shift_amplitude must be positive");
    require(st.at("charge_pairs").get<int>() >= 1, "state.charge_pairs must be positive");
    const json& b = c.at("bulk");
    check_levels(b.at("levels"), "bulk.levels");
    require(b.at("half_width").get<double>() > 0.0, "bulk.half_width must be positive");
    require(b.at("courant").get<double>() > 0.0 && b.at("courant").get<double>() <= 0.5, "bulk.courant must lie in (0, 0.5]");
    require(b.at("t1").get<double>() > b.at("t_p").get<double>(), "bulk.t1 must exceed bulk.t_p");
    require(b.at("t_end").get<double>() >= b.at("t1").get<double>(), "bulk.t_end must not be below bulk.t1");
    const json& pr = c.at("probes");
    require(pr.at("packets").size() == 2, "probes.packets needs two entries");
    for (const auto& p : pr.at("packets")) {
        check_vector(p.at("center"), d, "probes.packets[].center", false);
        require(p.at("radius").get<double>() > 0.0, "probes.packets[].radius must be positive");
        require(one_of(p.at("slot").get<std::string>(), {"value", "velocity"}), "probes.packets[].slot unknown");
    }
    require(pr.at("sources").size() == 2, "probes.sources needs two entries");
    for (const auto& s : pr.at("sources")) {
        check_vector(s.at("center"), d, "probes.sources[].center", false);
        require(s.at("tau").get<double>() > 0.0 && s.at("radius").get<double>() > 0.0, "probes.sources[] needs tau, radius > 0");
    }
    require(pr.at("pure_sigma0").get<double>() > 0.0 && pr.at("pure_ell0").get<double>() > 0.0, "probes.pure_sigma0/ell0 must be positive");
    const json& dc = c.at("decay");
    check_grid(dc.at("boundary"), "decay.boundary");
    require(dc.at("fit").size() == 2 && dc.at("fit")[0].get<double>() < dc.at("fit")[1].get<double>(), "decay.fit must be [lo, hi]");
    require(dc.at("t_data").get<double>() > 0.0 && dc.at("width").get<double>() > 0.0 && dc.at("radius").get<double>() > 0.0,
            "decay.t_data, width and radius must be positive");
    require(dc.at("level").get<int>() >= 8, "decay.level must be at least 8");
    const json& cf = c.at("conformal");
    require(cf.at("amplitude").get<double>() > -1.0 && cf.at("width").get<double>() > 0.0, "conformal amplitude/width out of range");
    if (c.at("checks").at("conformal").get<bool>()) check_vector(cf.at("center"), d + 1, "conformal.center", false);
    require(cf.at("t_eval").get<double>() > 0.0, "conformal.t_eval must be positive");
    check_levels(cf.at("levels"), "conformal.levels");
    require(cf.at("levels").size() == 2, "conformal.levels needs two entries");
    const json& gs = c.at("goursat");
    require(gs.at("per_axis").get<int>() >= 1 && gs.at("per_axis").get<int>() <= 12, "goursat.per_axis must lie in [1, 12]");
    require(gs.at("count").get<int>() >= 0 && gs.at("count").get<int>() <= 200, "goursat.count must lie in [0, 200]");
    require(gs.at("half_cube").get<double>() > 0.0 &&
                gs.at("half_cube").get<double>() * std::sqrt(static_cast<double>(d)) <
                    b.at("t1").get<double>() - b.at("t_p").get<double>(),
            "goursat.half_cube must keep the spline cube inside the initial ball");
    check_levels(gs.at("levels"), "goursat.levels");
    check_grid(gs.at("boundary"), "goursat.boundary");
    require(gs.at("cutoff").get<double>() > 0.0 && gs.at("cutoff").get<double>() < 1.0, "goursat.cutoff must lie in (0, 1)");
    for (const auto& e : gs.at("enrichment")) require(e.is_number_integer() && e.get<int>() >= 1, "goursat.enrichment entries must be positive integers");
    require(gs.at("random_traces").get<int>() >= 1, "goursat.random_traces must be positive");
    check_levels(c.at("sweep").at("levels"), "sweep.levels");
    for (auto it = c.at("checks").begin(); it != c.at("checks").end(); ++it)
        require(it.value().is_boolean(), "checks." + it.key() + " must be a boolean");
    for (auto it = c.at("tolerances").begin(); it != c.at("tolerances").end(); ++it)
        require(it.value().is_number() && it.value().get<double>() > 0.0, "tolerances." + it.key() + " must be positive");
}

}  // namespace

Scenario parse_scenario(const json& j) {
    Scenario sc;
    sc.cfg = default_scenario();
    try {
        merge(sc.cfg, j, "");
        validate(sc.cfg);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("scenario: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

bool Report::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.pass; });
}

const Check* Report::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

json Report::to_json() const {
    json j;
    j["command"] = command;
    j["scenario"] = scenario;
    j["pass"] = pass();
    j["schema"] = 1;
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"condition", c.condition},
                       {"pass", c.pass},
                       {"informational", c.informational},
                       {"details", c.details}});
    j["checks"] = arr;
    j["data"] = data;
    return j;
}

std::string report_text(const Report& r) { return r.to_json().dump(2) + "\n"; }

void write_report(const Report& r, const std::string& out_dir) {
    fs::create_directories(out_dir);
    // Assemble everything before touching the directory contents.
    std::vector<std::pair<std::string, std::string>> texts;
    texts.emplace_back(r.command + ".json", report_text(r));
    for (const auto& [name, t] : r.tables) texts.emplace_back(r.command + "_" + name + ".csv", io::to_csv(t));
    for (const auto& [name, text] : texts) io::write_text_atomic((fs::path(out_dir) / name).string(), text);
    for (const auto& [name, c] : r.blobs) io::write_container((fs::path(out_dir) / (r.command + "_" + name + ".bin")).string(), c);
}

Report run_report(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("report: '" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json" && e.path().filename() != "report.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Report r;
    r.command = "report";
    r.scenario = dir;
    json rows = json::array();
    for (const auto& f : files) {
        std::ifstream in(f);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception&) {
            throw FormatError("report: '" + f.string() + "' is not valid JSON");
        }
        if (!j.contains("command") || !j.contains("checks")) continue;
        Check c;
        c.name = j.at("command").get<std::string>();
        c.condition = "all enabled checks of the " + c.name + " run";
        c.pass = j.value("pass", false) && !j.contains("error");
        json failed = json::array();
        for (const auto& ch : j.at("checks"))
            if (!ch.value("pass", false) && !ch.value("informational", false)) failed.push_back(ch.at("name"));
        c.details = {{"file", f.filename().string()}, {"scenario", j.value("scenario", "")}, {"failed", failed}};
        if (j.contains("error")) c.details["error"] = j.at("error");
        rows.push_back(c.details);
        r.checks.push_back(std::move(c));
    }
    if (r.checks.empty()) throw ConfigError("report: no reports found in '" + dir + "'");
    r.data["reports"] = rows;
    return r;
}

namespace {

void print_summary(const Report& r) {
    for (const auto& c : r.checks)
        std::cout << (c.informational ? "INFO" : (c.pass ? "PASS" : "FAIL")) << "  " << c.name << "  (" << c.condition << ")\n";
    std::cout << r.command << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Characteristic boundary data and quasi-free states on light cones"};
    app.require_subcommand(1);
    std::string scenario_path, out_dir = "out";
    std::uint64_t seed = 0;
    int level = -1;
    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"geometry", "cone chart, null coordinates and normal-form checks"},
                        {"state", "boundary covariance pairs and their verification"},
                        {"verify", "state checks plus bulk monomorphism, bulk commutator, decay and conformal checks"},
                        {"goursat", "characteristic trace operator and its inverse"},
                        {"sweep", "convergence study over refinement levels"},
                        {"report", "summarise the reports found in --out"}};
    std::map<std::string, CLI::App*> cmd;
    std::map<std::string, CLI::Option*> seed_opt;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        if (std::string(s.name) != "report") {
            sub->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
            seed_opt[s.name] = sub->add_option("--seed", seed, "override the scenario seed");
            sub->add_option("--level", level, "refinement level index (default: finest)");
        }
        sub->add_option("--out", out_dir, "output directory");
        cmd[s.name] = sub;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    std::string name;
    for (const auto& [n, sub] : cmd)
        if (sub->parsed()) name = n;

    if (name == "report") {
        try {
            const Report r = run_report(out_dir);
            write_report(r, out_dir);
            print_summary(r);
            return r.pass() ? 0 : 1;
        } catch (const Error& e) {
            std::cerr << e.kind() << ": " << e.what() << "\n";
            return dynamic_cast<const ConfigError*>(&e) ? 2 : 3;
        }
    }

    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
        if (seed_opt[name]->count() > 0) sc.cfg["seed"] = seed;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 2;
    }
    try {
        Report r;
        if (name == "geometry") r = run_geometry(sc);
        else if (name == "state") r = run_state(sc);
        else if (name == "verify") r = run_verify(sc, level);
        else if (name == "goursat") r = run_goursat(sc, level);
        else r = run_sweep(sc);
        write_report(r, out_dir);
        print_summary(r);
        return r.pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        // Module failures still leave a record of what was attempted.
        json j{{"command", name}, {"scenario", sc.name()}, {"pass", false}, {"checks", json::array()},
               {"error", {{"kind", e.kind()}, {"message", e.what()}}}};
        fs::create_directories(out_dir);
        io::write_text_atomic((fs::path(out_dir) / (name + ".json")).string(), j.dump(2) + "\n");
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace lightcone::cli
