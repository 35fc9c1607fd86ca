#pragma once

#include "abrmdp/config.hpp"
#include "abrmdp/metrics.hpp"
#include "abrmdp/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace abrmdp {

enum class Arm { proposed, myopic, ideal, client_centric };
enum class SweepAxis { none, r_th, horizon };

std::string to_string(Arm arm);
std::string to_string(SweepAxis axis);

/// Experiment file, INI-style:
///
///   [experiment]
///   scenario = fair.cfg             ; relative to this file
///   arms = proposed, myopic, ideal  ; any of proposed, myopic, ideal, client_centric
///   sweep = r_th                    ; none | r_th | horizon
///   sweep_values = 500, 650, 850
///   seed = 2015                     ; optional, overrides the scenario seed
///   policy_table = fair.policy      ; optional, only without a sweep
///   stationary = false
struct ExperimentSpec {
    std::filesystem::path scenario;
    std::vector<Arm> arms;
    SweepAxis sweep = SweepAxis::none;
    std::vector<double> sweep_values;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> policy_table;
    bool stationary = false;
};

/// Throws ConfigError on a malformed file or violated invariant.
ExperimentSpec load_experiment(const std::filesystem::path& path);
void validate(const ExperimentSpec& spec);

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides spec and scenario seeds
    bool stationary = false;            // OR-ed with the spec flag
    unsigned jobs = 1;
    bool write_traces = true;
};

struct CellResult {
    Arm arm;
    std::optional<double> sweep_value;
    std::size_t run;
    SessionSummary summary;
    SessionTrace trace;
};

/// Runs every (sweep value, run, arm) cell. Arms share the channel
/// realization of their (sweep value, run). Results are ordered by sweep
/// value, arm, then run, independent of the number of jobs.
std::vector<CellResult> run_cells(const ExperimentSpec& spec, const ScenarioConfig& base,
                                  const RunOptions& options);

/// Summary CSV: arm,sweep_axis,sweep_value,run,profit, then per user
/// ueI_avg_bitrate_kbps, ueI_buffering_ratio, ueI_stall_events_per_s,
/// ueI_stall_frames_per_s, ueI_significant_variations.
std::string summary_csv(const std::vector<CellResult>& cells, SweepAxis axis);

/// Aggregate CSV: arm,sweep_axis,sweep_value,field,mean,stddev.
std::string aggregate_csv(const std::vector<CellResult>& cells, SweepAxis axis);

/// Trace CSV: epoch, per user ueI_{rate_kbps, channel_state, raw_bw_kbps,
/// effective_bw_kbps, settled_state, download_s, rebuffer_s, played_s,
/// buffer_s, income, buffering_cost, variation_cost}, then
/// bottleneck_excess_kbps, bottleneck_cost, stage_profit.
std::string trace_csv(const SessionTrace& trace);

/// Runs the experiment and writes summary.csv, aggregate.csv and
/// traces/<arm>_<sweep>_run<NN>.csv under out_dir.
std::vector<CellResult> run_experiment(const ExperimentSpec& spec,
                                       const std::filesystem::path& out_dir,
                                       const RunOptions& options);

} // namespace abrmdp
