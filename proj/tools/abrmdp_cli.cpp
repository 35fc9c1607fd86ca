// Command-line front end: solve policies, run experiment batches, validate scenarios.

#include "abrmdp/config.hpp"
#include "abrmdp/errors.hpp"
#include "abrmdp/experiment.hpp"
#include "abrmdp/mdp.hpp"
#include "abrmdp/policy_io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;

int cmd_solve(const std::string& config_path, const std::string& out_path, unsigned jobs)
{
    const auto config = abrmdp::load_scenario(config_path);
    const auto table =
        abrmdp::backward_induction(config.model, config.session.horizon, {std::max(1u, jobs)});
    abrmdp::save_policy_table(out_path, table, abrmdp::policy_fingerprint(config));
    std::cout << "solved " << table.space().num_states() << " states x " << table.horizon()
              << " epochs -> " << out_path << '\n';
    return kExitOk;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir,
            const abrmdp::RunOptions& options)
{
    const auto spec = abrmdp::load_experiment(spec_path);
    const auto cells = abrmdp::run_experiment(spec, out_dir, options);
    std::cout << "ran " << cells.size() << " sessions -> " << out_dir << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& config_path)
{
    abrmdp::ValidationReport report;
    try {
        report = abrmdp::validate_scenario(abrmdp::read_scenario_file(config_path));
    } catch (const abrmdp::ConfigError& e) {
        report.failures.emplace_back(e.what());
    }
    for (const auto& f : report.failures) {
        std::cout << "FAIL " << f << '\n';
    }
    for (const auto& d : report.details) {
        std::cout << "  " << d << '\n';
    }
    if (report.ok()) {
        std::cout << "OK " << config_path << '\n';
        return kExitOk;
    }
    return kExitConfig;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Network-assisted multi-client rate adaptation: MDP solver and session simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    unsigned jobs = 1;
    auto* solve = app.add_subcommand("solve", "Solve the time-indexed policy table for a scenario");
    solve->add_option("--config", config_path, "Scenario file")->required();
    solve->add_option("--out", out_path, "Policy table output file")->required();
    solve->add_option("--jobs", jobs, "Worker threads");

    std::string spec_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    abrmdp::RunOptions run_options;
    bool no_traces = false;
    auto* run = app.add_subcommand("run", "Run an experiment batch and write CSV traces/summaries");
    run->add_option("--spec", spec_path, "Experiment file")->required();
    run->add_option("--out-dir", out_dir, "Output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the RNG seed");
    run->add_flag("--stationary", run_options.stationary, "Reuse the epoch-0 policy at every step");
    run->add_option("--jobs", run_options.jobs, "Worker threads");
    run->add_flag("--no-traces", no_traces, "Skip per-session trace CSVs");

    auto* validate = app.add_subcommand("validate", "Check a scenario and print derived constants");
    validate->add_option("--config", config_path, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            return cmd_solve(config_path, out_path, jobs);
        }
        if (run->parsed()) {
            if (seed_opt->count() > 0) {
                run_options.seed = seed;
            }
            run_options.write_traces = !no_traces;
            return cmd_run(spec_path, out_dir, run_options);
        }
        return cmd_validate(config_path);
    } catch (const abrmdp::InfeasibleModel& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const abrmdp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
