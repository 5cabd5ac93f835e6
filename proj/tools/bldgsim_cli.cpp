#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "bldgsim/core/csv.hpp"
#include "bldgsim/sim/plots.hpp"
#include "bldgsim/sim/run.hpp"
#include "bldgsim/sim/scenario.hpp"
#include "bldgsim/thermal/training.hpp"

#ifndef BLDGSIM_SCENARIO_DIR
#define BLDGSIM_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace bldgsim;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("bldgsim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("BLDGSIM_LOG");
    const std::string level = env ? env : "warn";
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && level != "off") {
        spdlog::set_level(spdlog::level::warn);
        spdlog::warn("BLDGSIM_LOG='{}' is not a level (trace, debug, info, warn, error, off)", level);
    } else {
        spdlog::set_level(parsed);
    }
}

fs::path scenario_dir() {
    if (const char* env = std::getenv("BLDGSIM_SCENARIOS")) return env;
    return BLDGSIM_SCENARIO_DIR;
}

/// A path, or the name of a bundled scenario.
std::string resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    for (const auto& candidate : {scenario_dir() / (arg + ".scn"), scenario_dir() / arg}) {
        if (fs::exists(candidate)) return candidate.string();
    }
    return arg;
}

void print_problems(const std::vector<std::string>& problems) {
    for (const auto& p : problems) std::cerr << p << '\n';
}

int cmd_validate(const std::string& arg) {
    const auto path = resolve_scenario(arg);
    const auto problems = sim::validate_scenario(path);
    if (!problems.empty()) {
        print_problems(problems);
        return kValidation;
    }
    std::cout << path << ": ok\n";
    return kOk;
}

int run_config(const sim::ScenarioConfig& cfg, const std::string& out, std::optional<std::uint64_t> seed, bool plots) {
    sim::RunOptions opt;
    opt.out_dir = out;
    opt.seed = seed;
    opt.plots = plots;
    try {
        // Build once up front so configuration problems map to the validation exit code.
        sim::build_scenario(cfg, seed);
    } catch (const sim::ScenarioError& e) {
        print_problems(e.problems());
        return kValidation;
    }
    const auto m = sim::run_scenario(cfg, opt);
    std::cout << "scenario " << m.scenario << ": " << m.steps << " steps, seed " << m.seed << ", "
              << m.wall_seconds << " s\n";
    for (const auto& b : m.buildings) {
        std::cout << "  " << b.path << ": " << b.energy_kwh << " kWh, peak " << b.peak_w << " W, cost $" << b.cost
                  << '\n';
    }
    for (const auto& z : m.zones) {
        if (!z.banded) continue;
        std::cout << "  " << z.path << ": " << z.violation_hours << " h outside band (" << z.in_band_fraction * 100.0
                  << "% in band)\n";
    }
    if (m.generalization) {
        const auto& g = *m.generalization;
        std::cout << "  generalization (H=" << g.horizon << "): physics RMSE " << g.physics_rmse << " K, violation "
                  << g.physics_violation.fraction << "; baseline RMSE " << g.baseline_rmse << " K, violation "
                  << g.baseline_violation.fraction << '\n';
    }
    std::cout << "outputs in " << out << '\n';
    return kOk;
}

int cmd_run(const std::string& arg, const std::string& out, std::optional<std::uint64_t> seed, bool plots) {
    const auto path = resolve_scenario(arg);
    sim::ScenarioConfig cfg;
    try {
        cfg = sim::parse_scenario(path);
    } catch (const sim::ScenarioError& e) {
        print_problems(e.problems());
        return kValidation;
    }
    return run_config(cfg, out, seed, plots);
}

int cmd_replay(const std::string& manifest, const std::string& out, bool plots) {
    const auto r = sim::read_manifest(manifest);
    return run_config(r.config, out, r.seed, plots);
}

int cmd_list() {
    const auto dir = scenario_dir();
    if (!fs::is_directory(dir)) {
        std::cerr << "scenario directory " << dir << " not found\n";
        return kRuntime;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".scn") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string desc;
        try {
            desc = sim::parse_scenario(f.string()).simulation.description;
        } catch (const Error& e) {
            desc = std::string("(invalid: ") + e.what() + ")";
        }
        std::cout << f.stem().string() << "\t" << desc << '\n';
    }
    return kOk;
}

struct TrainArgs {
    std::string csv;
    int epochs = 200;
    std::size_t horizon = 96;
    std::string out;
    double dt = 900.0;
    std::string model = "physics";
    std::string head = "affine";
    int hidden = 8;
    double split = 0.8;
};

int cmd_train(const TrainArgs& a) {
    thermal::ThermalTrace trace;
    try {
        trace = thermal::read_trace_csv(a.csv, a.dt);
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    }
    const auto n = trace.size();
    const auto cut = static_cast<std::size_t>(static_cast<double>(n) * a.split);
    if (cut < a.horizon + 1 || n - cut < a.horizon + 1) {
        std::cerr << a.csv << ": " << n << " rows are too few for horizon " << a.horizon << " with a "
                  << a.split << " train split\n";
        return kValidation;
    }
    const auto train = trace.slice(0, cut);
    const auto test = trace.slice(cut, n);

    std::unique_ptr<thermal::ZoneModel> model;
    if (a.model == "physics") {
        thermal::PhysicsModelConfig pc;
        pc.head = a.head == "mlp" ? thermal::HeadKind::Mlp : thermal::HeadKind::Affine;
        pc.hidden = a.hidden;
        model = std::make_unique<thermal::PhysicsZoneModel>(a.dt, trace.activity_names, pc);
    } else {
        model = std::make_unique<thermal::BaselineZoneModel>(a.dt, trace.activity_names, a.hidden);
    }

    thermal::TrainConfig tc;
    tc.horizon = a.horizon;
    tc.epochs = a.epochs;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t iterations = 0;
    if (a.epochs > 0) {
        const auto r = thermal::train(*model, train, tc);
        iterations = static_cast<std::size_t>(r.iterations);
        if (r.stalled) spdlog::info("descent stopped after {} iterations: no further decrease", r.iterations);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    thermal::save_zone_model(*model, a.out);

    std::cout << "model " << model->kind() << " trained on " << train.size() << " steps, " << iterations
              << " iterations\n"
              << "held-out rollout RMSE (H=" << a.horizon << ", " << test.size()
              << " steps): " << thermal::rollout_rmse(*model, test, a.horizon) << " K\n"
              << "wall time: " << secs << " s\n"
              << "wrote " << a.out << '\n';
    return kOk;
}

struct SynthArgs {
    std::string out;
    std::size_t days = 7;
    std::uint64_t seed = 7;
    std::string policy = "deadband";
    double dt = 900.0;
    std::string start = "2024-06-03 00:00";
};

int cmd_synth(const SynthArgs& a) {
    thermal::RcTraceConfig c;
    c.days = a.days;
    c.seed = a.seed;
    c.dt = a.dt;
    c.start = core::parse_timestamp(a.start);
    c.occupancy.seed = a.seed;
    c.policy = a.policy == "off" ? thermal::HvacPolicy::Off
               : a.policy == "proportional" ? thermal::HvacPolicy::Proportional
                                            : thermal::HvacPolicy::Deadband;
    const auto tr = thermal::generate_rc_trace(thermal::RcZoneSpec{}, c);
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + a.out);
    thermal::write_trace_csv(out, tr);
    std::cout << "wrote " << tr.size() << " rows to " << a.out << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Building-HVAC-DER cluster simulator"};
    app.require_subcommand(1);

    std::string scenario, out, manifest, run_dir;
    std::optional<std::uint64_t> seed;
    bool plots = false;
    std::vector<std::string> only;

    auto* validate = app.add_subcommand("validate", "Check a scenario file (or bundled scenario name)");
    validate->add_option("scenario", scenario)->required();

    auto* run = app.add_subcommand("run", "Run a scenario and write timeseries, metrics and manifest");
    run->add_option("scenario", scenario)->required();
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_flag("--plots", plots, "Write SVG plots");

    auto* replay = app.add_subcommand("replay", "Re-run the scenario recorded in a manifest.json");
    replay->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);
    replay->add_option("--out", out, "Output directory")->required();
    replay->add_flag("--plots", plots, "Write SVG plots");

    TrainArgs ta;
    auto* train = app.add_subcommand("train-thermal", "Train a zone model on a thermal trace CSV");
    train->add_option("csv", ta.csv)->required();
    train->add_option("--epochs", ta.epochs, "Descent iterations (0 writes the initial parameters)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--horizon", ta.horizon, "Rollout horizon in steps")->check(CLI::PositiveNumber);
    train->add_option("--out", ta.out, "Model file")->required();
    train->add_option("--dt", ta.dt, "Trace step in seconds")->check(CLI::PositiveNumber);
    train->add_option("--model", ta.model, "physics or baseline")->check(CLI::IsMember({"physics", "baseline"}));
    train->add_option("--head", ta.head, "affine or mlp gain heads")->check(CLI::IsMember({"affine", "mlp"}));
    train->add_option("--hidden", ta.hidden, "Hidden units")->check(CLI::PositiveNumber);
    train->add_option("--split", ta.split, "Training fraction; the rest is held out")->check(CLI::Range(0.05, 0.95));

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth-trace", "Write a synthetic RC-zone trace CSV");
    synth->add_option("--out", sa.out)->required();
    synth->add_option("--days", sa.days)->check(CLI::PositiveNumber);
    synth->add_option("--seed", sa.seed);
    synth->add_option("--policy", sa.policy)->check(CLI::IsMember({"off", "deadband", "proportional"}));
    synth->add_option("--dt", sa.dt)->check(CLI::PositiveNumber);
    synth->add_option("--start", sa.start);

    auto* plot = app.add_subcommand("plot", "Draw SVG plots from a run directory");
    plot->add_option("run_dir", run_dir)->required()->check(CLI::ExistingDirectory);
    plot->add_option("--only", only, "Plot names")->check(CLI::IsMember(sim::plot_names()));

    auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*validate) return cmd_validate(scenario);
        if (*run) return cmd_run(scenario, out, seed, plots);
        if (*replay) return cmd_replay(manifest, out, plots);
        if (*train) return cmd_train(ta);
        if (*synth) return cmd_synth(sa);
        if (*list) return cmd_list();
        if (*plot) {
            std::vector<std::string> notices;
            for (const auto& f : sim::emit_plots(run_dir, only, &notices)) std::cout << "wrote " << f << '\n';
            for (const auto& n : notices) std::cout << n << '\n';
            return kOk;
        }
    } catch (const sim::ScenarioError& e) {
        print_problems(e.problems());
        return kValidation;
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    } catch (const InvalidArgument& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
