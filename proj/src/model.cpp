#include "abrmdp/model.hpp"

#include "abrmdp/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace abrmdp {

namespace {

constexpr double kRowTolerance = 1e-9;

bool strictly_increasing(std::span<const double> v)
{
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>{}) == v.end();
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t cap)
{
    std::uint64_t result = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && result > cap / base) {
            return cap + 1;
        }
        result *= base;
    }
    return result;
}

} // namespace

QualityLadder::QualityLadder(std::vector<double> rates_kbps) : rates_(std::move(rates_kbps))
{
    if (rates_.empty()) {
        throw ConfigError("quality ladder is empty");
    }
    if (!strictly_increasing(rates_)) {
        throw ConfigError("quality ladder rates must be strictly increasing");
    }
    if (rates_.front() <= 0.0) {
        throw ConfigError("quality ladder rates must be positive");
    }
}

ChannelModel::ChannelModel(std::vector<std::vector<double>> transition,
                           std::vector<double> state_bandwidth_kbps,
                           std::vector<double> boundaries_kbps)
    : transition_(std::move(transition)), bandwidth_(std::move(state_bandwidth_kbps)),
      boundaries_(std::move(boundaries_kbps))
{
    const std::size_t k = bandwidth_.size();
    if (k == 0) {
        throw ConfigError("channel model needs at least one state");
    }
    if (transition_.size() != k) {
        throw ConfigError("transition matrix has " + std::to_string(transition_.size()) +
                          " rows, expected " + std::to_string(k));
    }
    for (std::size_t row = 0; row < k; ++row) {
        const auto& r = transition_[row];
        if (r.size() != k) {
            throw ConfigError("transition row " + std::to_string(row) + " has " +
                              std::to_string(r.size()) + " entries, expected " + std::to_string(k));
        }
        double sum = 0.0;
        for (double p : r) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ConfigError("transition row " + std::to_string(row) +
                                  " has an entry outside [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) {
            throw ConfigError("transition row " + std::to_string(row) + " sums to " +
                              std::to_string(sum) + ", not 1");
        }
    }
    if (bandwidth_.front() <= 0.0 || !strictly_increasing(bandwidth_)) {
        throw ConfigError("state bandwidths must be positive and strictly increasing");
    }
    if (boundaries_.size() + 1 != k) {
        throw ConfigError("expected " + std::to_string(k - 1) + " region boundaries, got " +
                          std::to_string(boundaries_.size()));
    }
    if (!strictly_increasing(boundaries_)) {
        throw ConfigError("region boundaries must be strictly increasing");
    }
}

std::vector<double> ChannelModel::stationary_distribution() const
{
    const auto k = static_cast<Eigen::Index>(num_states());
    Eigen::MatrixXd p(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            p(i, j) = transition_[i][j];
        }
    }

    // pi (P - I) = 0 with sum(pi) = 1; the last balance equation is redundant.
    Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(k, k);
    a.row(k - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    b(k - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd pi;
    if (lu.rank() == k) {
        pi = lu.solve(b);
    } else {
        // Reducible chain: Cesaro average from the uniform start.
        Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(k, 1.0 / static_cast<double>(k));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(k);
        constexpr int steps = 4096;
        for (int n = 0; n < steps; ++n) {
            acc += x;
            x = x * p;
        }
        pi = (acc / steps).transpose();
    }

    std::vector<double> out(static_cast<std::size_t>(k));
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
        total += out[static_cast<std::size_t>(i)];
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

std::size_t map_bandwidth_to_state(double measured_kbps, const ChannelModel& channel)
{
    const auto bounds = channel.boundaries();
    return static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), measured_kbps) -
                                    bounds.begin());
}

StateSpace::StateSpace(std::size_t num_rates, std::size_t num_channel_states,
                       std::size_t num_users, std::uint64_t cap)
    : num_rates_(num_rates), num_channel_states_(num_channel_states), num_users_(num_users)
{
    if (num_users == 0) {
        throw ConfigError("at least one user is required");
    }
    if (num_rates == 0 || num_channel_states == 0) {
        throw ConfigError("empty ladder or channel model");
    }
    const std::uint64_t states = checked_pow(num_rates * num_channel_states, num_users, cap);
    if (states > cap) {
        throw ConfigError("state space (" + std::to_string(num_rates * num_channel_states) + ")^" +
                          std::to_string(num_users) + " exceeds the cap of " +
                          std::to_string(cap) + " states");
    }
    num_states_ = static_cast<std::size_t>(states);
    num_actions_ = static_cast<std::size_t>(checked_pow(num_rates, num_users, cap));
    num_channel_vectors_ = static_cast<std::size_t>(checked_pow(num_channel_states, num_users, cap));
}

std::size_t StateSpace::encode(const SystemState& state) const
{
    const std::size_t radix = num_rates_ * num_channel_states_;
    std::size_t index = 0;
    for (const auto& u : state) {
        index = index * radix + u.rate * num_channel_states_ + u.channel;
    }
    return index;
}

SystemState StateSpace::decode(std::size_t index) const
{
    const std::size_t radix = num_rates_ * num_channel_states_;
    SystemState state(num_users_);
    for (std::size_t i = num_users_; i-- > 0;) {
        const std::size_t digit = index % radix;
        index /= radix;
        state[i] = {digit / num_channel_states_, digit % num_channel_states_};
    }
    return state;
}

std::size_t StateSpace::encode_action(const Action& action) const
{
    std::size_t index = 0;
    for (std::size_t r : action) {
        index = index * num_rates_ + r;
    }
    return index;
}

Action StateSpace::decode_action(std::size_t index) const
{
    Action action(num_users_);
    for (std::size_t i = num_users_; i-- > 0;) {
        action[i] = index % num_rates_;
        index /= num_rates_;
    }
    return action;
}

std::size_t StateSpace::encode_channels(std::span<const std::size_t> channels) const
{
    std::size_t index = 0;
    for (std::size_t c : channels) {
        index = index * num_channel_states_ + c;
    }
    return index;
}

std::vector<std::size_t> StateSpace::decode_channels(std::size_t index) const
{
    std::vector<std::size_t> channels(num_users_);
    for (std::size_t i = num_users_; i-- > 0;) {
        channels[i] = index % num_channel_states_;
        index /= num_channel_states_;
    }
    return channels;
}

std::size_t StateSpace::compose(std::size_t action_index, std::size_t channel_index) const
{
    const Action rates = decode_action(action_index);
    const auto channels = decode_channels(channel_index);
    SystemState state(num_users_);
    for (std::size_t i = 0; i < num_users_; ++i) {
        state[i] = {rates[i], channels[i]};
    }
    return encode(state);
}

bool StateSpace::valid(const SystemState& state) const
{
    return state.size() == num_users_ &&
           std::all_of(state.begin(), state.end(), [&](const UserState& u) {
               return u.rate < num_rates_ && u.channel < num_channel_states_;
           });
}

bool StateSpace::valid(const Action& action) const
{
    return action.size() == num_users_ &&
           std::all_of(action.begin(), action.end(), [&](std::size_t r) { return r < num_rates_; });
}

std::vector<SystemState> enumerate_states(const QualityLadder& ladder, const ChannelModel& channel,
                                          std::size_t num_users, std::uint64_t cap)
{
    const StateSpace space(ladder.size(), channel.num_states(), num_users, cap);
    std::vector<SystemState> states;
    states.reserve(space.num_states());
    for (std::size_t i = 0; i < space.num_states(); ++i) {
        states.push_back(space.decode(i));
    }
    return states;
}

} // namespace abrmdp
