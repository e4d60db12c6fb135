#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lightcone/cli.hpp"
#include "lightcone/errors.hpp"

using namespace lightcone;
using namespace lightcone::cli;
namespace fs = std::filesystem;

namespace {

json small_state(const std::string& recipe) {
    return json{{"version", 1},
                {"name", "unit-" + recipe},
                {"seed", 5},
                {"state", {{"recipe", recipe}, {"count", 2}, {"grid", {{"n_s", 16}, {"s_min", -12.0}, {"s_max", 12.0}, {"L", 2}}}}},
                {"checks", {{"state", true}}}};
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lightcone_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string write_json(const fs::path& dir, const std::string& name, const json& j) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump();
    return p.string();
}

int run(std::vector<std::string> args) {
    std::vector<char*> argv;
    static std::string prog = "lightcone";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("defaults are filled in and overrides merge deeply") {
    const auto sc = parse_scenario(json{{"seed", 3}, {"boundary", {{"L", 5}}}});
    CHECK(sc.cfg["boundary"]["L"] == 5);
    CHECK(sc.cfg["boundary"]["n_s"] == 512);
    CHECK(sc.seed() == 3u);
    CHECK(sc.tol("ccr") == 1e-12);
}

TEST_CASE("invalid scenarios are rejected") {
    CHECK_THROWS_AS(parse_scenario(json{{"name", "x"}}), ConfigError);                                 // no seed
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"colour", "red"}}), ConfigError);                // unknown key
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"boundary", {{"L", "many"}}}}), ConfigError);    // wrong type
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"boundary", {{"n_s", 100}}}}), ConfigError);     // not a power of two
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"bulk", {{"courant", 0.7}}}}), ConfigError);
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"state", {{"recipe", "thermal"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_scenario(json{{"seed", -4}}), ConfigError);
    CHECK_THROWS_AS(parse_scenario(json{{"seed", 1}, {"chart", {{"d", 2}}}}), ConfigError);  // 3-d probes in a 2-d chart
}

TEST_CASE("order fit recovers the slope of a power law") {
    std::vector<double> h{0.1, 0.05, 0.025}, e;
    for (double x : h) e.push_back(3.0 * x * x);
    CHECK(fitted_order(h, e) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("malformed configuration exits with 2 and writes nothing") {
    const auto dir = temp_dir("bad");
    const auto cfg = write_json(temp_dir("bad_cfg"), "s.json", json{{"seed", 1}, {"bogus", 1}});
    const auto out = dir / "out";
    CHECK(run({"state", "--scenario", cfg, "--out", out.string()}) == 2);
    CHECK_FALSE(fs::exists(out));
    std::ofstream(temp_dir("bad_cfg2").string() + ".json") << "{ not json";
    CHECK(run({"state", "--scenario", temp_dir("bad_cfg2").string() + ".json", "--out", out.string()}) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("norm falsification exits nonzero with the positivity failure recorded") {
    json j = small_state("gauge");
    j["state"]["d_norm"] = 1.2;
    j["state"]["bypass_norm"] = true;
    const auto dir = temp_dir("norm");
    const auto cfg = write_json(dir, "s.json", j);
    CHECK(run({"state", "--scenario", cfg, "--out", (dir / "out").string()}) == 1);
    const auto rep = json::parse(slurp(dir / "out" / "state.json"));
    CHECK(rep["pass"] == false);
    for (const auto& c : rep["checks"])
        if (c["name"] == "positivity") CHECK(c["pass"] == false);
}

TEST_CASE("norm violation without the bypass is a module error") {
    json j = small_state("gauge");
    j["state"]["d_norm"] = 1.2;
    const auto dir = temp_dir("norm_strict");
    const auto cfg = write_json(dir, "s.json", j);
    CHECK(run({"state", "--scenario", cfg, "--out", (dir / "out").string()}) == 3);
    const auto rep = json::parse(slurp(dir / "out" / "state.json"));
    CHECK(rep["error"]["kind"] == "NormViolation");
}

TEST_CASE("reports are byte-identical across runs and the seed flag changes them") {
    const auto dir = temp_dir("det");
    const auto cfg = write_json(dir, "s.json", small_state("suite"));
    CHECK(run({"state", "--scenario", cfg, "--out", (dir / "a").string()}) == 0);
    CHECK(run({"state", "--scenario", cfg, "--out", (dir / "b").string()}) == 0);
    CHECK(slurp(dir / "a" / "state.json") == slurp(dir / "b" / "state.json"));
    CHECK(run({"state", "--scenario", cfg, "--out", (dir / "c").string(), "--seed", "99"}) == 0);
    CHECK(slurp(dir / "a" / "state.json") != slurp(dir / "c" / "state.json"));
    // Summary over the bundle.
    CHECK(run({"report", "--out", (dir / "a").string()}) == 0);
    const auto sum = json::parse(slurp(dir / "a" / "report.json"));
    CHECK(sum["checks"].size() == 1);
    CHECK(sum["pass"] == true);
}

TEST_CASE("sweep needs three levels") {
    auto sc = parse_scenario(json{{"seed", 1}, {"sweep", {{"levels", {32, 64}}}}});
    CHECK_THROWS_AS(run_sweep(sc), ConfigError);
}

TEST_CASE("level index out of range is a configuration error") {
    const auto dir = temp_dir("level");
    const auto cfg = write_json(dir, "s.json", small_state("moretti"));
    CHECK(run({"verify", "--scenario", cfg, "--out", (dir / "out").string(), "--level", "7"}) == 2);
}

TEST_CASE("identity falsification fails the smoothing check") {
    const auto rep = run_state(parse_scenario(small_state("identity")));
    CHECK_FALSE(rep.pass());
    REQUIRE(rep.find("boundary_smoothing") != nullptr);
    CHECK_FALSE(rep.find("boundary_smoothing")->pass);
}

TEST_CASE("unknown subcommand is a usage error") { CHECK(run({"dance"}) != 0); }
