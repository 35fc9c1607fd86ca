#pragma once

#include "abrmdp/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace abrmdp {

/// Scenario file contents before any invariant is checked.
///
/// Scenario files are INI-style:
///
///   [ladder]
///   rates_kbps = 95.11, 183.53, 364.63, 493.02, 798.09
///
///   [channel]
///   transition = .5 .5 0 0; .2 .6 .2 0; 0 .1 .7 .2; 0 0 .2 .8
///   state_bandwidth_kbps = 95, 256, 512, 896
///   boundaries_kbps = 256, 512, 896
///
///   [profit]
///   alpha = 0.3
///   beta = 0.5
///   gamma = 0.2
///   delta_kbps = 350
///   theta = inf
///   r_th_kbps = 850
///   lambdas = 0.5, 0.5
///   variation_penalty = symmetric        ; or downward_only
///
///   [session]
///   num_users = 2
///   horizon = 200
///   segment_seconds = 1
///   frames_per_second = 24
///   initial_buffer_frames = 80
///   initial_rate_index = 0
///   num_runs = 15
///   rng_seed = 2015
///   sharing_mode = proportional          ; or none
///
/// List items are separated by commas or whitespace, matrix rows by ';'.
/// Comments must sit on their own line and start with '#' or ';'.
struct RawScenario {
    std::vector<double> rates_kbps;
    std::vector<std::vector<double>> transition;
    std::vector<double> state_bandwidth_kbps;
    std::vector<double> boundaries_kbps;
    ProfitParams profit;
    SessionParams session;
};

/// Throws ConfigError on syntax errors or missing keys.
RawScenario parse_scenario(std::istream& in);
RawScenario read_scenario_file(const std::filesystem::path& path);

/// Throws ConfigError on the first violated invariant.
ScenarioConfig build_scenario(const RawScenario& raw);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Replaces R_th, revalidating the profit model.
ScenarioConfig with_r_th(const ScenarioConfig& config, double r_th_kbps);

/// Hash of everything a solved policy depends on (ladder, channel, profit
/// parameters, N and T).
std::uint64_t policy_fingerprint(const ScenarioConfig& config);

struct ValidationReport {
    std::vector<std::string> failures;
    std::vector<std::string> details;

    bool ok() const { return failures.empty(); }
};

/// Checks every invariant independently so that all violations are listed,
/// and on success reports the derived constants and stationary distribution.
ValidationReport validate_scenario(const RawScenario& raw);

} // namespace abrmdp
