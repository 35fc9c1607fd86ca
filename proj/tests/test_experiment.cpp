#include "abrmdp/errors.hpp"
#include "abrmdp/experiment.hpp"
#include "abrmdp/policy_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace abrmdp;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = ABRMDP_SCENARIO_DIR;

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("abrmdp_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ScenarioConfig short_fair(std::size_t horizon = 30, std::size_t runs = 3)
{
    auto config = load_scenario(kScenarios / "fair.cfg");
    config.session.horizon = horizon;
    config.session.num_runs = runs;
    return config;
}

ExperimentSpec three_arms()
{
    ExperimentSpec spec;
    spec.scenario = kScenarios / "fair.cfg";
    spec.arms = {Arm::proposed, Arm::myopic, Arm::ideal};
    return spec;
}

std::size_t count_lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("shipped experiment files load")
{
    const auto fair = load_experiment(kScenarios / "fair_experiment.ini");
    CHECK(fair.scenario == kScenarios / "fair.cfg");
    CHECK(fair.arms == std::vector<Arm>{Arm::proposed, Arm::myopic, Arm::ideal});
    CHECK(fair.sweep == SweepAxis::none);

    const auto rth = load_experiment(kScenarios / "fair_rth_sweep.ini");
    CHECK(rth.sweep == SweepAxis::r_th);
    CHECK(rth.sweep_values.front() == 400.0);
    CHECK(rth.sweep_values.back() == 1600.0);

    const auto horizon = load_experiment(kScenarios / "fair_horizon_sweep.ini");
    CHECK(horizon.sweep == SweepAxis::horizon);

    const auto diff = load_experiment(kScenarios / "diff_experiment.ini");
    CHECK(diff.arms == std::vector<Arm>{Arm::proposed, Arm::client_centric});
}

TEST_CASE("experiment validation")
{
    auto spec = three_arms();
    CHECK_NOTHROW(validate(spec));
    spec.arms.clear();
    CHECK_THROWS_AS(validate(spec), ConfigError);

    spec = three_arms();
    spec.sweep_values = {500};
    CHECK_THROWS_AS(validate(spec), ConfigError);

    spec.sweep = SweepAxis::r_th;
    spec.sweep_values = {700, 500};
    CHECK_THROWS_AS(validate(spec), ConfigError);

    spec.sweep = SweepAxis::horizon;
    spec.sweep_values = {10.5};
    CHECK_THROWS_AS(validate(spec), ConfigError);

    spec.sweep_values = {10, 20};
    spec.policy_table = "x.policy";
    CHECK_THROWS_AS(validate(spec), ConfigError);

    const auto dir = scratch("bad_arm");
    std::ofstream(dir / "bad.ini") << "[experiment]\nscenario = fair.cfg\narms = proposed, random\n";
    CHECK_THROWS_AS(load_experiment(dir / "bad.ini"), ConfigError);
}

TEST_CASE("cells are ordered by sweep value, arm and run")
{
    auto spec = three_arms();
    spec.sweep = SweepAxis::r_th;
    spec.sweep_values = {600, 850};
    const auto cells = run_cells(spec, short_fair(), {});
    REQUIRE(cells.size() == 2 * 3 * 3);
    std::size_t i = 0;
    for (double v : {600.0, 850.0}) {
        for (Arm arm : spec.arms) {
            for (std::size_t run = 0; run < 3; ++run, ++i) {
                CHECK(cells[i].sweep_value == v);
                CHECK(cells[i].arm == arm);
                CHECK(cells[i].run == run);
            }
        }
    }
}

TEST_CASE("arms share the channel realization of a run")
{
    const auto cells = run_cells(three_arms(), short_fair(), {});
    for (std::size_t run = 0; run < 3; ++run) {
        const auto& proposed = cells[run];
        const auto& myopic = cells[3 + run];
        const auto& ideal = cells[6 + run];
        for (std::size_t t = 0; t < proposed.trace.segments.size(); ++t) {
            for (std::size_t u = 0; u < 2; ++u) {
                CHECK(proposed.trace.segments[t].users[u].channel_state ==
                      myopic.trace.segments[t].users[u].channel_state);
                CHECK(proposed.trace.segments[t].users[u].channel_state ==
                      ideal.trace.segments[t].users[u].channel_state);
            }
        }
        CHECK(ideal.summary.profit >= proposed.summary.profit - 1e-9);
    }
}

TEST_CASE("output does not depend on the number of jobs")
{
    auto spec = three_arms();
    spec.sweep = SweepAxis::horizon;
    spec.sweep_values = {10, 20};
    const auto base = short_fair(30, 4);
    const auto serial = run_cells(spec, base, {});
    for (unsigned jobs : {2u, 5u}) {
        RunOptions options;
        options.jobs = jobs;
        const auto parallel = run_cells(spec, base, options);
        CHECK(summary_csv(parallel, spec.sweep) == summary_csv(serial, spec.sweep));
        CHECK(aggregate_csv(parallel, spec.sweep) == aggregate_csv(serial, spec.sweep));
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(trace_csv(parallel[i].trace) == trace_csv(serial[i].trace));
        }
    }
}

TEST_CASE("seed overrides")
{
    const auto base = short_fair();
    auto spec = three_arms();
    const auto a = summary_csv(run_cells(spec, base, {}), spec.sweep);
    spec.seed = base.session.rng_seed;
    CHECK(summary_csv(run_cells(spec, base, {}), spec.sweep) == a);
    RunOptions other;
    other.seed = 99;
    CHECK(summary_csv(run_cells(spec, base, other), spec.sweep) != a);
}

TEST_CASE("csv layouts")
{
    const auto spec = three_arms();
    const auto cells = run_cells(spec, short_fair(20, 2), {});

    const auto summary = summary_csv(cells, spec.sweep);
    CHECK(summary.rfind("arm,sweep_axis,sweep_value,run,profit,ue1_avg_bitrate_kbps,", 0) == 0);
    CHECK(count_lines(summary) == 1 + 6);
    CHECK(summary.find("\nideal,none,,1,") != std::string::npos);

    const auto aggregate = aggregate_csv(cells, spec.sweep);
    CHECK(aggregate.rfind("arm,sweep_axis,sweep_value,field,mean,stddev\n", 0) == 0);
    CHECK(count_lines(aggregate) == 1 + 3 * 11);

    const auto trace = trace_csv(cells.front().trace);
    CHECK(trace.rfind("epoch,ue1_rate_kbps,ue1_channel_state,", 0) == 0);
    CHECK(trace.find(",bottleneck_excess_kbps,bottleneck_cost,stage_profit\n") != std::string::npos);
    CHECK(count_lines(trace) == 1 + 20);
}

TEST_CASE("run_experiment writes byte-identical files on repeat")
{
    const auto dir = scratch("repeat");
    std::ofstream(dir / "short.cfg") << slurp(kScenarios / "fair.cfg");
    {
        // Shorter sessions keep the test quick.
        auto text = slurp(dir / "short.cfg");
        text.replace(text.find("horizon = 200"), 13, "horizon = 25");
        text.replace(text.find("num_runs = 15"), 13, "num_runs = 2");
        std::ofstream(dir / "short.cfg", std::ios::trunc) << text;
    }
    std::ofstream(dir / "exp.ini") << "[experiment]\nscenario = short.cfg\narms = proposed, myopic, ideal\n";
    const auto spec = load_experiment(dir / "exp.ini");
    run_experiment(spec, dir / "a", {});
    run_experiment(spec, dir / "b", {});
    for (const char* f : {"summary.csv", "aggregate.csv", "traces/proposed_none_run00.csv",
                          "traces/ideal_none_run01.csv"}) {
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }

    RunOptions no_traces;
    no_traces.write_traces = false;
    run_experiment(spec, dir / "c", no_traces);
    CHECK(fs::exists(dir / "c" / "summary.csv"));
    CHECK_FALSE(fs::exists(dir / "c" / "traces"));
}

TEST_CASE("a saved policy table is reused only for its own scenario")
{
    const auto dir = scratch("policy");
    const auto base = short_fair();
    save_policy_table(dir / "fair.policy",
                      backward_induction(base.model, base.session.horizon),
                      policy_fingerprint(base));

    auto spec = three_arms();
    const auto solved = summary_csv(run_cells(spec, base, {}), spec.sweep);
    spec.policy_table = dir / "fair.policy";
    CHECK(summary_csv(run_cells(spec, base, {}), spec.sweep) == solved);

    auto other = base;
    other.session.horizon = 31;
    CHECK_THROWS_AS(run_cells(spec, other, {}), ConfigError);
}
