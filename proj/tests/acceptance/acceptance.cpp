// Acceptance suite: one PASS/FAIL line per criterion.
//
// Thresholds are pinned here, independently of the scenario files, and read
// back from the numbers each pipeline reports. A criterion that cannot be met
// prints FAIL with its numbers; it is not loosened. Exit status: 0 when every
// criterion ran (whatever its verdict), 2 when a pipeline threw. With
// --strict any FAIL also gives exit 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "lightcone/cli.hpp"

namespace fs = std::filesystem;
using lightcone::cli::Check;
using lightcone::cli::Report;
using lightcone::cli::Scenario;
using json = nlohmann::json;

namespace {

const std::string kScenarios = LIGHTCONE_SCENARIOS;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

// Loads scenarios/<name>.json, enables exactly `checks` and applies `patch`.
Scenario scenario(const std::string& name, const std::vector<std::string>& checks, const json& patch = json::object()) {
    json j = read_json(kScenarios + "/" + name + ".json");
    json flags = json::object();
    const json defaults = lightcone::cli::default_scenario();
    for (const auto& [k, v] : defaults.at("checks").items()) flags[k] = false;
    for (const auto& c : checks) flags[c] = true;
    j["checks"] = flags;
    j.merge_patch(patch);
    return lightcone::cli::parse_scenario(j);
}

template <class F>
Report timed(F&& f, double& seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    Report r = f();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

const Check& need(const Report& r, const std::string& name) {
    const Check* c = r.find(name);
    if (!c) throw std::runtime_error(r.command + " report has no check '" + name + "'");
    return *c;
}

double num(const Check& c, const std::string& key) { return c.details.at(key).get<double>(); }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// "value <= limit" or "value > limit", whichever is true.
std::string le(const char* f, double v, double lim, const char* limit) {
    return fmt(f, v) + (v <= lim ? " <= " : " > ") + limit;
}

std::string within(double secs, double lim) {
    return fmt("%.1f", secs) + (secs < lim ? " s < " : " s >= ") + fmt("%.0f", lim) + " s";
}

struct Line {
    bool pass = false;
    std::string detail;
};

int failures = 0;
int errors = 0;
std::ofstream record;  // the same lines, kept next to the build for later reading

void emit(const std::string& line) {
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    if (record) record << line << std::flush;
}

void criterion(int id, const std::string& title, const std::function<Line()>& body) {
    std::fflush(stdout);
    Line l;
    try {
        l = body();
    } catch (const std::exception& e) {
        l.pass = false;
        l.detail = std::string("error: ") + e.what();
        ++errors;
    }
    if (!l.pass) ++failures;
    char head[16];
    std::snprintf(head, sizeof head, "[%2d] ", id);
    emit(std::string(head) + (l.pass ? "PASS" : "FAIL") + "  " + title + "  (" + l.detail + ")\n");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lightcone");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    return lightcone::cli::main_entry(static_cast<int>(args.size()), argv.data());
}

// Every file of one bundle equals its twin in the other.
bool same_bundles(const fs::path& a, const fs::path& b, int& files) {
    files = 0;
    std::vector<std::string> na, nb;
    for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
    std::sort(na.begin(), na.end());
    std::sort(nb.begin(), nb.end());
    if (na != nb || na.empty()) return false;
    for (const auto& n : na) {
        if (slurp(a / n) != slurp(b / n)) return false;
        ++files;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    using namespace lightcone::cli;
    record.open("acceptance_results.txt");

    // Geometry runs feed both the normal-form and the logarithm criteria.
    double t_geo_flat = 0.0, t_geo_pert = 0.0;
    Report geo_flat, geo_pert;
    std::string geo_error;
    try {
        geo_flat = timed([] { return run_geometry(scenario("minkowski-moretti", {"geometry"})); }, t_geo_flat);
        geo_pert = timed([] { return run_geometry(scenario("perturbed-geometry", {"geometry"})); }, t_geo_pert);
    } catch (const std::exception& e) {
        geo_error = e.what();
    }
    auto geo_ok = [&] {
        if (!geo_error.empty()) throw std::runtime_error(geo_error);
    };

    criterion(1, "geometry normal form", [&] {
        geo_ok();
        auto worst = [](const Report& r) {
            const Check& c = need(r, "normal_form");
            return std::max({num(c, "max_null"), num(c, "max_cross"), num(c, "max_normal_form")});
        };
        const double wf = worst(geo_flat), wp = worst(geo_pert);
        const double secs = std::max(t_geo_flat, t_geo_pert);
        return Line{wf <= 1e-8 && wp <= 1e-5 && secs < 60.0,
                    "flat " + le("%.2e", wf, 1e-8, "1e-8") + ", perturbed " + le("%.2e", wp, 1e-5, "1e-5") +
                        ", slowest run " + within(secs, 60.0)};
    });

    criterion(2, "null-coordinate logarithm", [&] {
        geo_ok();
        const Check& c = need(geo_flat, "null_coordinate_logarithm");
        const double spread = num(c, "alpha_spread");
        const bool documented = !c.details.at("discrepancy").get<std::string>().empty();
        const Check& cp = need(geo_pert, "null_coordinate_logarithm");
        return Line{spread <= 1e-8 && c.pass && documented,
                    "alpha " + fmt("%.10f", num(c, "alpha")) + ", spread " + le("%.2e", spread, 1e-8, "1e-8") + ", k max " +
                        fmt("%.3f", num(c, "k_max")) + ", k slope max " + fmt("%.3f", num(c, "k_slope_max")) +
                        ", discrepancy recorded; perturbed spread " + fmt("%.2e", num(cp, "alpha_spread"))};
    });

    criterion(3, "boundary charge identity", [&] {
        double secs = 0.0;
        const Report r = timed([] { return run_state(scenario("state-suite", {"charge_identity"})); }, secs);
        const Check& c = need(r, "charge_identity");
        const double res = num(c, "max_relative_residual");
        const int pairs = c.details.at("pairs").get<int>();
        return Line{res <= 1e-12 && pairs >= 100 && secs < 1.0,
                    le("%.2e", res, 1e-12, "1e-12") + " over " + std::to_string(pairs) + " pairs, " +
                        fmt("%.3f", secs) + (secs < 1.0 ? " s < 1 s" : " s >= 1 s")};
    });

    criterion(4, "state suite", [&] {
        double secs = 0.0;
        const Report r = timed([] { return run_state(scenario("state-suite", {"state"})); }, secs);
        const double ccr = num(need(r, "commutator_identity"), "max_residual");
        const Check& pos = need(r, "positivity");
        const double ratio = num(pos, "min_eigenvalue_over_norm");
        const Check& musc = need(r, "boundary_smoothing");
        const json& fam = r.data.at("families");
        const int pure_n = fam.at("pure").at("count").get<int>();
        const int pure_ok = fam.at("pure").at("pure_count").get<int>();
        const int mixed_n = fam.at("gauge").at("count").get<int>();
        const int mixed_fail = mixed_n - fam.at("gauge").at("pure_count").get<int>();
        double bog = 0.0;
        for (const auto& c : r.checks)
            if (c.name == "bogoliubov") bog = std::max({bog, num(c, "inverse_residual"), num(c, "conjugation_residual")});
        const int modes = r.data.value("modes", 0);
        const bool ok = ccr <= 1e-12 && ratio >= -1e-10 && musc.pass && pure_n == 20 && pure_ok == 20 && mixed_n == 20 &&
                        mixed_fail >= 18 && bog <= 1e-10 && secs < 300.0;
        return Line{ok, "ccr " + fmt("%.2e", ccr) + ", min eig/norm " + fmt("%.2e", ratio) + ", smoothing " +
                            (musc.pass ? "PASS" : "FAIL") + ", pure " + std::to_string(pure_ok) + "/" +
                            std::to_string(pure_n) + ", mixed failing purity " + std::to_string(mixed_fail) + "/" +
                            std::to_string(mixed_n) + ", bogoliubov " + fmt("%.2e", bog) + ", " +
                            (modes ? std::to_string(modes) + " modes, " : "") + within(secs, 300.0)};
    });

    criterion(5, "falsification", [&] {
        const Report rn = run_state(scenario("falsification-norm", {"state"}));
        const Report ri = run_state(scenario("falsification-identity", {"state"}));
        const bool pos_fail = !need(rn, "positivity").pass;
        const bool musc_fail = !need(ri, "boundary_smoothing").pass;
        return Line{pos_fail && musc_fail, std::string("norm 1.2 positivity ") + (pos_fail ? "FAIL" : "PASS") +
                                               ", identity c+ smoothing " + (musc_fail ? "FAIL" : "PASS")};
    });

    criterion(6, "monomorphism", [&] {
        double secs = 0.0;
        const Report r = timed([] { return run_sweep(scenario("minkowski-moretti", {})); }, secs);
        const Check& m = need(r, "monomorphism");
        const Check& o = need(r, "monomorphism_order");
        const double res = num(m, "residual"), dx = num(m, "dx"), order = num(o, "order");
        const auto levels = o.details.at("dx").size();
        return Line{res <= 1e-3 && std::abs(dx - 1.0 / 64) < 1e-12 && order >= 1.8 && levels >= 3 && secs < 600.0,
                    "residual " + le("%.2e", res, 1e-3, "1e-3") + " at dx " + fmt("%.4f", dx) + ", order " +
                        fmt("%.2f", order) + (order >= 1.8 ? " >= 1.8" : " < 1.8") + " over " + std::to_string(levels) + " levels, " +
                        within(secs, 600.0)};
    });

    // One verify run serves the bulk commutator and the d = 3 trace decay.
    double t_verify = 0.0;
    Report verify3;
    std::string verify_error;
    try {
        verify3 = timed([] { return run_verify(scenario("minkowski-moretti", {"bulk_ccr", "trace_decay"})); }, t_verify);
    } catch (const std::exception& e) {
        verify_error = e.what();
    }

    criterion(7, "bulk commutator", [&] {
        if (!verify_error.empty()) throw std::runtime_error(verify_error);
        const Check& c = need(verify3, "bulk_commutator");
        const json& pairs = c.details.at("pairs");
        double worst = 0.0;
        std::string names;
        for (const auto& [k, v] : pairs.items()) {
            worst = std::max(worst, v.at("two_point").at("ccr_residual").get<double>());
            names += (names.empty() ? "" : "+") + k;
        }
        return Line{worst <= 1e-3 && pairs.contains("moretti") && pairs.contains("pure"),
                    "worst relative residual " + le("%.2e", worst, 1e-3, "1e-3") + " over " + names};
    });

    criterion(8, "characteristic Cauchy problem", [&] {
        double secs = 0.0;
        const Report r = timed([] { return run_goursat(scenario("goursat", {"goursat"})); }, secs);
        const double rt = num(need(r, "in_basis_round_trip"), "energy_error");
        const double pk = num(need(r, "packet_recovery"), "energy_error");
        const double var = num(need(r, "condition_stability"), "variation");
        const Check& dens = need(r, "density_enrichment");
        const bool ok = rt <= 1e-6 && pk <= 1e-4 && var <= 0.2 && dens.pass && secs < 1200.0;
        return Line{ok, "round trip " + le("%.2e", rt, 1e-6, "1e-6") + ", packet " + le("%.2e", pk, 1e-4, "1e-4") +
                            ", condition variation " + le("%.4f", var, 0.2, "0.2") + ", enrichment " +
                            (dens.pass ? "monotone" : "not monotone") + ", " + within(secs, 1200.0)};
    });

    criterion(9, "trace decay", [&] {
        if (!verify_error.empty()) throw std::runtime_error(verify_error);
        const Check& c3 = need(verify3, "trace_decay");
        const Report r2 = run_verify(scenario("trace-decay-d2", {"trace_decay"}));
        const Check& c2 = need(r2, "trace_decay");
        const double e3 = num(c3, "exponent"), e2 = num(c2, "exponent");
        return Line{std::abs(e3 - 1.0) <= 0.1 && std::abs(e2 - 0.5) <= 0.1,
                    "d=3 " + fmt("%.4f", e3) + " vs 1, d=2 " + fmt("%.4f", e2) + " vs 0.5, allowed deviation 0.1"};
    });

    criterion(10, "change of coordinates", [&] {
        const Report r = run_state(scenario("shift-covariance", {"shift_covariance"}));
        const Check& c = need(r, "shift_covariance");
        std::size_t shifts = 0;
        for (const auto& row : c.details.at("runs")) shifts = std::max<std::size_t>(shifts, row.at("shift").get<std::size_t>() + 1);
        return Line{c.pass && shifts >= 5, std::to_string(shifts) + " band-limited shifts, state check outcomes " +
                                                (c.pass ? "unchanged" : "changed for some shift")};
    });

    criterion(11, "conformal rescaling", [&] {
        const Report r = run_verify(scenario("conformal", {"conformal"}));
        const Check& fe = need(r, "conformal_field_equation");
        const Check& sy = need(r, "conformal_symplectic");
        const double order = num(fe, "order");
        const double sym = std::max(num(sy, "exact_derivatives"), num(sy, "evolved"));
        return Line{std::abs(order - 2.0) <= 0.2 && sym <= 1e-4,
                    "field-equation residual order " + fmt("%.2f", order) + " vs scheme order 2 (allowed deviation 0.2), symplectic " +
                        le("%.2e", sym, 1e-4, "1e-4")};
    });

    criterion(12, "determinism", [&] {
        const fs::path base = fs::temp_directory_path() / "lightcone-acceptance";
        fs::remove_all(base);
        int total = 0;
        bool same = true;
        for (const auto& [cmd, name] : std::vector<std::pair<std::string, std::string>>{
                 {"geometry", "minkowski-moretti"}, {"state", "falsification-norm"}}) {
            const std::string sc = kScenarios + "/" + name + ".json";
            const fs::path a = base / (cmd + "_a"), b = base / (cmd + "_b");
            run_cli({cmd, "--scenario", sc, "--seed", "7", "--out", a.string()});
            run_cli({cmd, "--scenario", sc, "--seed", "7", "--out", b.string()});
            int files = 0;
            same = same && same_bundles(a, b, files);
            total += files;
        }
        fs::remove_all(base);
        return Line{same && total > 0, same ? std::to_string(total) + " report files byte-identical across repeated runs"
                                          : std::string("repeated runs produced different report bundles")};
    });

    emit("acceptance: " + std::to_string(12 - failures) + " of 12 criteria pass\n");
    if (errors > 0) return 2;
    return strict && failures > 0 ? 1 : 0;
}
