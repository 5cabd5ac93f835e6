#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/sim/plots.hpp"
#include "bldgsim/sim/run.hpp"
#include "bldgsim/sim/scenario.hpp"

using namespace bldgsim;
using namespace bldgsim::sim;
namespace fs = std::filesystem;

namespace {

std::string bundled(const std::string& name) { return std::string(BLDGSIM_SCENARIO_DIR) + "/" + name + ".scn"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

// Problems reported for a scenario text, empty when it builds.
std::vector<std::string> problems_of(const std::string& text) {
    try {
        build_scenario(parse_scenario_text(text));
    } catch (const ScenarioError& e) {
        return e.problems();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

// Minimal well-formedness check: balanced, properly nested tags.
bool well_formed_xml(const std::string& doc) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while ((i = doc.find('<', i)) != std::string::npos) {
        const auto end = doc.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = doc.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        if (stack.empty() && root_seen) return false;
        root_seen = true;
        if (tag.back() == '/') continue;
        stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
    return root_seen && stack.empty();
}

const char* kMinimal = R"(
[simulation]
name = tiny
duration_hours = 2
dt = 900
cluster = c

[module c/thermal/weather]
type = weather

[module c/thermal/h1/occupancy]
type = occupancy

[module c/thermal/h1/zone]
type = zone

[module c/electrical/h1/loads]
type = loads
)";

} // namespace

TEST_CASE("section syntax") {
    auto s = parse_sections("# c\n[simulation]\nname = x  \n\n[module a/thermal/b]\ntype = zone\n", "t");
    REQUIRE(s.size() == 2);
    CHECK(s[1].name == "module");
    CHECK(s[1].arg == "a/thermal/b");
    CHECK(s[1].entries.at("type").line == 6);
    CHECK(s[0].entries.at("name").value == "x");
    CHECK_THROWS_WITH_AS(parse_sections("[a]\nk = 1\nk = 2\n", "t"), doctest::Contains("t:3"), ParseError);
    CHECK_THROWS_AS(parse_sections("key = 1\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_sections("[open\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_sections("[a]\njust words\n", "t"), ParseError);
}

TEST_CASE("simulation keys") {
    auto cfg = parse_scenario_text(kMinimal);
    CHECK(cfg.simulation.steps() == 8);
    CHECK(problems_of(kMinimal).empty());
    CHECK_THROWS_WITH_AS(parse_scenario_text("[simulation]\ndt = 1000\n"), doctest::Contains("3600"), ParseError);
    CHECK_THROWS_AS(parse_scenario_text("[simulation]\nduration_hours = -1\n"), ParseError);
    CHECK_THROWS_WITH_AS(parse_scenario_text("[simulation]\ncolour = blue\n"), doctest::Contains("unknown key"),
                         ParseError);
    CHECK_THROWS_AS(parse_scenario_text("[simulation]\n[simulation]\n"), ParseError);
}

TEST_CASE("module problems carry file and line") {
    auto p = problems_of(std::string(kMinimal) + "\n[module c/thermal/h1/fan]\ntype = fan\nwidth = 3\n");
    CHECK(any_contains(p, "<string>:"));
    CHECK(any_contains(p, "unknown key 'width'"));

    p = problems_of(std::string(kMinimal) + "\n[controller c/thermal/h1]\ntype = deadband\nzone = c/thermal/h9/zone\n");
    CHECK(any_contains(p, "dangling reference"));

    p = problems_of(std::string(kMinimal) + "\n[module c/thermal/h1/thing]\ntype = warp_drive\n");
    CHECK_FALSE(p.empty());
}

TEST_CASE("bundled scenarios validate") {
    for (const char* name : {"s1_fan_tracking", "s2_model_generalization", "s3_house_der", "s3_two_buildings",
                             "s4_cluster5"}) {
        CAPTURE(name);
        CHECK(validate_scenario(bundled(name)).empty());
    }
    auto p = validate_scenario(std::string(BLDGSIM_TEST_DATA) + "/bad_dt.scn");
    CHECK_FALSE(p.empty());
}

TEST_CASE("seeds") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(5, 5) == mix_seed(5, 5));
}

TEST_CASE("duration zero gives an empty run") {
    auto text = std::regex_replace(std::string(kMinimal), std::regex("duration_hours = 2"), "duration_hours = 0");
    auto dir = fresh_dir("bldgsim_zero");
    RunOptions o;
    o.out_dir = dir.string();
    auto m = run_scenario(parse_scenario_text(text), o);
    CHECK(m.steps == 0);
    CHECK(m.cluster_energy_kwh == 0.0);
    CHECK(m.cluster_peak_w == 0.0);
    std::istringstream ts(slurp(dir / "timeseries.csv"));
    std::string header, row;
    std::getline(ts, header);
    CHECK(header.rfind("step,timestamp", 0) == 0);
    CHECK_FALSE(std::getline(ts, row));
}

TEST_CASE("single house day") {
    auto dir = fresh_dir("bldgsim_s3");
    RunOptions o;
    o.out_dir = dir.string();
    auto m = run_scenario(parse_scenario(bundled("s3_house_der")), o);
    CHECK(m.steps == 96);
    auto ts = core::read_csv_file((dir / "timeseries.csv").string());
    CHECK(ts.rows.size() == 96);
    CHECK(std::isfinite(m.cluster_energy_kwh));
    REQUIRE(m.zones.size() == 1);
    CHECK(m.zones[0].banded);
    CHECK(m.zones[0].in_band_fraction == 1.0);
    CHECK(fs::exists(dir / "metrics.json"));
    CHECK(fs::exists(dir / "soc.svg"));
    CHECK(well_formed_xml(slurp(dir / "soc.svg")));
}

TEST_CASE("plots") {
    auto dir = fresh_dir("bldgsim_s1_plots");
    RunOptions o;
    o.out_dir = dir.string();
    run_scenario(parse_scenario(bundled("s1_fan_tracking")), o);
    std::vector<std::string> notices;
    auto written = emit_plots(dir.string(), {}, &notices);
    CHECK(fs::exists(dir / "fan_tracking.svg"));
    CHECK(well_formed_xml(slurp(dir / "fan_tracking.svg")));
    CHECK(any_contains(notices, "no battery or EV state-of-charge columns"));
    CHECK_THROWS_AS(emit_plots(dir.string(), {"soc"}), ParseError);
    CHECK_THROWS_AS(emit_plots(dir.string(), {"pie_chart"}), InvalidArgument);
    CHECK_FALSE(well_formed_xml("<svg><g></svg></g>"));
}

TEST_CASE("five houses") {
    auto dir = fresh_dir("bldgsim_s4");
    RunOptions o;
    o.out_dir = dir.string();
    o.plots = true;
    auto m = run_scenario(parse_scenario(bundled("s4_cluster5")), o);
    CHECK(m.steps == 192);
    REQUIRE(m.buildings.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) CHECK(m.buildings[i].energy_kwh != m.buildings[j].energy_kwh);
    }
    const auto svg = slurp(dir / "cumulative_energy.svg");
    CHECK(well_formed_xml(svg));
    std::size_t lines = 0;
    for (std::size_t p = 0; (p = svg.find("<polyline", p)) != std::string::npos; ++p) ++lines;
    CHECK(lines == 5);
}

TEST_CASE("manifest replay reproduces the run") {
    auto a = fresh_dir("bldgsim_replay_a");
    auto b = fresh_dir("bldgsim_replay_b");
    RunOptions o;
    o.out_dir = a.string();
    o.seed = 77;
    run_scenario(parse_scenario(bundled("s3_two_buildings")), o);
    auto replay = read_manifest((a / "manifest.json").string());
    CHECK(replay.seed == 77);
    RunOptions o2;
    o2.out_dir = b.string();
    o2.seed = replay.seed;
    run_scenario(replay.config, o2);
    CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));

    auto text = slurp(a / "manifest.json");
    auto tampered = std::regex_replace(text, std::regex("fnv1a64:[0-9a-f]+"), "fnv1a64:0000000000000000");
    std::ofstream(a / "manifest.json") << tampered;
    CHECK_THROWS_AS(read_manifest((a / "manifest.json").string()), ParseError);
}

TEST_CASE("observer sees every frame") {
    std::size_t calls = 0;
    RunOptions o;
    o.observer = [&](const BuiltScenario&, const core::SignalFrame&) { ++calls; };
    auto m = run_scenario(parse_scenario_text(kMinimal), o);
    CHECK(calls == static_cast<std::size_t>(m.steps));
}
