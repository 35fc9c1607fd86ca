#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace abrmdp {

/// Ordered set of encoded bitrates (Kbps) of one piece of content.
class QualityLadder {
public:
    explicit QualityLadder(std::vector<double> rates_kbps);

    std::size_t size() const { return rates_.size(); }
    double rate(std::size_t index) const { return rates_.at(index); }
    double r_min() const { return rates_.front(); }
    double r_max() const { return rates_.back(); }
    std::span<const double> rates() const { return rates_; }

private:
    std::vector<double> rates_;
};

/// K-state Markov model of a last-hop link. Each state k carries a
/// representative bandwidth; measured bandwidths are snapped to states
/// through K-1 region boundaries.
class ChannelModel {
public:
    ChannelModel(std::vector<std::vector<double>> transition,
                 std::vector<double> state_bandwidth_kbps,
                 std::vector<double> boundaries_kbps);

    std::size_t num_states() const { return bandwidth_.size(); }
    double probability(std::size_t from, std::size_t to) const { return transition_[from][to]; }
    const std::vector<double>& row(std::size_t from) const { return transition_.at(from); }
    double bandwidth(std::size_t state) const { return bandwidth_.at(state); }
    double bw_min() const { return bandwidth_.front(); }
    std::span<const double> state_bandwidths() const { return bandwidth_; }
    std::span<const double> boundaries() const { return boundaries_; }

    /// Stationary distribution of the transition matrix.
    std::vector<double> stationary_distribution() const;

private:
    std::vector<std::vector<double>> transition_;
    std::vector<double> bandwidth_;
    std::vector<double> boundaries_;
};

/// Snaps a measured bandwidth to its channel region. Regions are half-open,
/// [b[k-1], b[k]), so a value equal to a boundary belongs to the upper state.
std::size_t map_bandwidth_to_state(double measured_kbps, const ChannelModel& channel);

struct UserState {
    std::size_t rate = 0;    // index into QualityLadder
    std::size_t channel = 0; // index into ChannelModel

    friend bool operator==(const UserState&, const UserState&) = default;
};

/// Joint (rates, bandwidth states) of all users.
using SystemState = std::vector<UserState>;

/// Per-user rate index for the upcoming segment.
using Action = std::vector<std::size_t>;

inline constexpr std::uint64_t kDefaultStateCap = 10'000'000;

/// Dimensions of the joint state and action spaces and their canonical
/// mixed-radix encodings. User 0 is the most significant digit; within a
/// user the rate index dominates the channel index.
class StateSpace {
public:
    StateSpace(std::size_t num_rates, std::size_t num_channel_states, std::size_t num_users,
               std::uint64_t cap = kDefaultStateCap);

    std::size_t num_rates() const { return num_rates_; }
    std::size_t num_channel_states() const { return num_channel_states_; }
    std::size_t num_users() const { return num_users_; }

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::size_t num_channel_vectors() const { return num_channel_vectors_; }

    std::size_t encode(const SystemState& state) const;
    SystemState decode(std::size_t index) const;

    std::size_t encode_action(const Action& action) const;
    Action decode_action(std::size_t index) const;

    /// Index of a per-user channel-state vector (user 0 most significant).
    std::size_t encode_channels(std::span<const std::size_t> channels) const;
    std::vector<std::size_t> decode_channels(std::size_t index) const;

    /// State index from an action index (the rate part) and a channel-vector index.
    std::size_t compose(std::size_t action_index, std::size_t channel_index) const;

    bool valid(const SystemState& state) const;
    bool valid(const Action& action) const;

private:
    std::size_t num_rates_;
    std::size_t num_channel_states_;
    std::size_t num_users_;
    std::size_t num_states_;
    std::size_t num_actions_;
    std::size_t num_channel_vectors_;
};

/// All (M*K)^N joint states in canonical order.
std::vector<SystemState> enumerate_states(const QualityLadder& ladder, const ChannelModel& channel,
                                          std::size_t num_users,
                                          std::uint64_t cap = kDefaultStateCap);

} // namespace abrmdp
