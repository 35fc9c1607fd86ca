#pragma once

#include "abrmdp/sim.hpp"

#include <string>
#include <vector>

namespace abrmdp {

struct UserMetrics {
    double avg_bitrate_kbps = 0.0;
    double buffering_ratio = 0.0;       // stall time / (stall time + content time)
    double stall_events_per_s = 0.0;    // segments with a stall per second of session time
    double stall_frames_per_s = 0.0;    // stalled frames per second of session time
    double significant_variations = 0;  // consecutive-segment jumps with |dR| >= delta
};

struct SessionSummary {
    std::vector<UserMetrics> users;
    double profit = 0.0;
};

/// Playback and profit metrics of one session. Throws std::invalid_argument
/// on an empty trace.
SessionSummary summarize(const SessionTrace& trace, const ScenarioConfig& config);

/// Stable, ordered (name, value) view used for CSV columns and aggregation.
struct NamedValue {
    std::string name;
    double value;
};
std::vector<NamedValue> flatten(const SessionSummary& summary);

struct FieldStats {
    std::string name;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation; 0 for a single run
};

/// Per-field mean and sample standard deviation over runs.
std::vector<FieldStats> aggregate_runs(const std::vector<SessionSummary>& summaries);

} // namespace abrmdp
