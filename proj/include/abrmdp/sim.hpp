#pragma once

#include "abrmdp/economics.hpp"
#include "abrmdp/model.hpp"
#include "abrmdp/policies.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace abrmdp {

enum class SharingMode {
    proportional, // rate-proportional split of R_th once aggregate demand exceeds it
    none,         // every user always gets its raw link bandwidth
};

struct SessionParams {
    std::size_t num_users = 2;
    std::size_t horizon = 200; // segments
    double segment_seconds = 1.0;
    double frames_per_second = 24.0;
    double initial_buffer_frames = 80.0;
    std::size_t initial_rate_index = 0;
    std::size_t num_runs = 15;
    std::uint64_t rng_seed = 1;
    SharingMode sharing_mode = SharingMode::proportional;

    double initial_buffer_seconds() const { return initial_buffer_frames / frames_per_second; }
};

/// A validated scenario: profit model plus session settings.
struct ScenarioConfig {
    ProfitModel model;
    SessionParams session;
};

/// Throws ConfigError on a violated session invariant, or when a state
/// bandwidth does not snap back to its own region.
void validate(const ScenarioConfig& config);

/// Per-user channel state sequences of length T+1 for one run.
using ChannelRealization = std::vector<std::vector<std::size_t>>;

/// Independent substream for (seed, user, run).
std::mt19937_64 make_stream(std::uint64_t seed, std::size_t user, std::size_t run);

/// Uniform draw in [0, 1) from the top 53 bits of one engine output.
double uniform01(std::mt19937_64& rng);

/// Index drawn from a discrete distribution by inverse CDF.
std::size_t sample_index(std::span<const double> probabilities, std::mt19937_64& rng);

std::vector<std::size_t> sample_channel_path(const ChannelModel& channel, std::size_t initial_state,
                                             std::size_t horizon, std::mt19937_64& rng);

/// Initial states drawn from the stationary distribution, one stream per user.
ChannelRealization realize_channels(const ScenarioConfig& config, std::size_t run_index);

std::vector<double> effective_bandwidth(std::span<const double> chosen_rates_kbps,
                                        std::span<const double> raw_bw_kbps, double r_th_kbps,
                                        SharingMode mode);

struct BufferStep {
    double buffer_seconds = 0.0;
    double rebuffer_seconds = 0.0;
    double played_seconds = 0.0;
};

/// Fluid playback buffer: drains in real time while a segment downloads,
/// stalls when empty, gains segment_seconds of content on completion.
BufferStep step_buffer(double buffer_seconds, double segment_seconds, double download_seconds);

struct UserSegment {
    std::size_t rate_index = 0;
    double rate_kbps = 0.0;
    std::size_t channel_state = 0; // realized link state during the download
    double raw_bw_kbps = 0.0;
    double effective_bw_kbps = 0.0;
    std::size_t settled_state = 0; // effective bandwidth snapped to a region
    double download_seconds = 0.0;
    double rebuffer_seconds = 0.0;
    double played_seconds = 0.0;
    double buffer_seconds = 0.0; // after the segment completes
    UserProfit profit;
};

struct SegmentRecord {
    std::size_t epoch = 0;
    std::vector<UserSegment> users;
    double bottleneck_cost = 0.0;
    double bottleneck_excess_kbps = 0.0;
    double stage_profit = 0.0;
};

struct SessionTrace {
    std::vector<SegmentRecord> segments;
    double total_profit = 0.0;
};

/// Oracle decisions for one realization.
IdealPolicy make_ideal_policy(const ScenarioConfig& config, const ChannelRealization& channels);

/// Runs one session. Realized profit is settled with each user's effective
/// bandwidth snapped to its channel region. When congestion is forbidden
/// (theta infinite) an over-R_th decision is not priced directly: its excess
/// is logged and the congestion shows up through reduced effective bandwidth.
SessionTrace run_session(const ScenarioConfig& config, const Policy& policy,
                         const ChannelRealization& channels);

SessionTrace run_session(const ScenarioConfig& config, const Policy& policy, std::size_t run_index);

} // namespace abrmdp
