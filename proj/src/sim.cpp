#include "abrmdp/sim.hpp"

#include "abrmdp/errors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace abrmdp {

void validate(const ScenarioConfig& config)
{
    const auto& s = config.session;
    const auto& model = config.model;
    if (s.num_users != model.num_users()) {
        throw ConfigError("num_users does not match the number of priority coefficients");
    }
    if (s.horizon < 1) {
        throw ConfigError("horizon must be at least one segment");
    }
    if (s.num_runs < 1) {
        throw ConfigError("num_runs must be at least 1");
    }
    if (!(s.segment_seconds > 0.0) || !(s.frames_per_second > 0.0)) {
        throw ConfigError("segment_seconds and frames_per_second must be positive");
    }
    if (!(s.initial_buffer_frames >= 0.0)) {
        throw ConfigError("initial_buffer_frames must be nonnegative");
    }
    if (s.initial_rate_index >= model.ladder().size()) {
        throw ConfigError("initial_rate_index outside the ladder");
    }
    const auto& channel = model.channel();
    for (std::size_t k = 0; k < channel.num_states(); ++k) {
        if (map_bandwidth_to_state(channel.bandwidth(k), channel) != k) {
            throw ConfigError("state bandwidth of state " + std::to_string(k) +
                              " does not lie in its own region");
        }
    }
}

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t user, std::size_t run)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(run),
                      0x5eedu};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> probabilities, std::mt19937_64& rng)
{
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        if (probabilities[k] <= 0.0) {
            continue;
        }
        last_positive = k;
        cumulative += probabilities[k];
        if (u < cumulative) {
            return k;
        }
    }
    // Rounding left u above the cumulative sum.
    return last_positive;
}

std::vector<std::size_t> sample_channel_path(const ChannelModel& channel, std::size_t initial_state,
                                             std::size_t horizon, std::mt19937_64& rng)
{
    if (initial_state >= channel.num_states()) {
        throw std::out_of_range("initial channel state out of range");
    }
    std::vector<std::size_t> path;
    path.reserve(horizon + 1);
    path.push_back(initial_state);
    for (std::size_t t = 0; t < horizon; ++t) {
        path.push_back(sample_index(channel.row(path.back()), rng));
    }
    return path;
}

ChannelRealization realize_channels(const ScenarioConfig& config, std::size_t run_index)
{
    const auto& channel = config.model.channel();
    const auto stationary = channel.stationary_distribution();
    ChannelRealization paths;
    paths.reserve(config.session.num_users);
    for (std::size_t user = 0; user < config.session.num_users; ++user) {
        auto rng = make_stream(config.session.rng_seed, user, run_index);
        const std::size_t initial = sample_index(stationary, rng);
        paths.push_back(sample_channel_path(channel, initial, config.session.horizon, rng));
    }
    return paths;
}

std::vector<double> effective_bandwidth(std::span<const double> chosen_rates_kbps,
                                        std::span<const double> raw_bw_kbps, double r_th_kbps,
                                        SharingMode mode)
{
    if (chosen_rates_kbps.size() != raw_bw_kbps.size()) {
        throw std::invalid_argument("rate and bandwidth vectors differ in length");
    }
    std::vector<double> out(raw_bw_kbps.begin(), raw_bw_kbps.end());
    if (mode == SharingMode::none) {
        return out;
    }
    double demand = 0.0;
    double total_rate = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        demand += std::min(raw_bw_kbps[i], chosen_rates_kbps[i]);
        total_rate += chosen_rates_kbps[i];
    }
    if (demand > r_th_kbps) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::min(raw_bw_kbps[i], r_th_kbps * chosen_rates_kbps[i] / total_rate);
        }
    }
    return out;
}

BufferStep step_buffer(double buffer_seconds, double segment_seconds, double download_seconds)
{
    BufferStep step;
    step.played_seconds = std::min(buffer_seconds, download_seconds);
    step.rebuffer_seconds = std::max(0.0, download_seconds - buffer_seconds);
    step.buffer_seconds = buffer_seconds - step.played_seconds + segment_seconds;
    return step;
}

IdealPolicy make_ideal_policy(const ScenarioConfig& config, const ChannelRealization& channels)
{
    const Action initial(config.session.num_users, config.session.initial_rate_index);
    return IdealPolicy{solve_ideal(channels, config.model, initial).decisions};
}

SessionTrace run_session(const ScenarioConfig& config, const Policy& policy,
                         const ChannelRealization& channels)
{
    const auto& model = config.model;
    const auto& ladder = model.ladder();
    const auto& channel = model.channel();
    const auto& params = model.params();
    const auto& session = config.session;
    const std::size_t n = session.num_users;

    if (channels.size() != n) {
        throw std::invalid_argument("channel realization does not cover every user");
    }
    for (const auto& p : channels) {
        if (p.size() != session.horizon + 1) {
            throw std::invalid_argument("channel path length must be horizon + 1");
        }
    }

    SessionTrace trace;
    trace.segments.reserve(session.horizon);

    Observation obs;
    obs.state.resize(n);
    std::vector<double> buffer(n, session.initial_buffer_seconds());
    std::vector<double> rates(n);
    std::vector<double> raw(n);

    for (std::size_t i = 0; i < n; ++i) {
        obs.state[i].rate = session.initial_rate_index;
    }

    for (std::size_t t = 0; t < session.horizon; ++t) {
        obs.epoch = t;
        for (std::size_t i = 0; i < n; ++i) {
            obs.state[i].channel = map_bandwidth_to_state(channel.bandwidth(channels[i][t]), channel);
        }
        const Action action = decide(policy, obs, ladder);
        if (action.size() != n) {
            throw std::logic_error("policy returned an action of the wrong size");
        }

        for (std::size_t i = 0; i < n; ++i) {
            rates[i] = ladder.rate(action[i]);
            raw[i] = channel.bandwidth(channels[i][t + 1]);
        }
        const auto effective = effective_bandwidth(rates, raw, params.r_th_kbps, session.sharing_mode);

        SegmentRecord rec;
        rec.epoch = t;
        rec.users.resize(n);
        double weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto& u = rec.users[i];
            u.rate_index = action[i];
            u.rate_kbps = rates[i];
            u.channel_state = channels[i][t + 1];
            u.raw_bw_kbps = raw[i];
            u.effective_bw_kbps = effective[i];
            u.settled_state = map_bandwidth_to_state(effective[i], channel);
            u.download_seconds = rates[i] * session.segment_seconds / effective[i];

            const auto step = step_buffer(buffer[i], session.segment_seconds, u.download_seconds);
            u.rebuffer_seconds = step.rebuffer_seconds;
            u.played_seconds = step.played_seconds;
            u.buffer_seconds = step.buffer_seconds;
            buffer[i] = step.buffer_seconds;

            u.profit.income = model.income(action[i], u.settled_state);
            u.profit.buffering = model.buffering(action[i], u.settled_state);
            u.profit.variation = model.variation(obs.state[i].rate, action[i]);
            weighted += params.lambdas[i] *
                        (u.profit.income - u.profit.buffering - u.profit.variation);
        }

        const double total_rate = std::accumulate(rates.begin(), rates.end(), 0.0);
        rec.bottleneck_excess_kbps = std::max(0.0, total_rate - params.r_th_kbps);
        rec.bottleneck_cost = params.theta ? *params.theta * rec.bottleneck_excess_kbps : 0.0;
        rec.stage_profit = weighted - rec.bottleneck_cost;
        trace.total_profit += rec.stage_profit;

        obs.last_throughput_kbps = effective;
        for (std::size_t i = 0; i < n; ++i) {
            obs.state[i].rate = action[i];
        }
        trace.segments.push_back(std::move(rec));
    }
    return trace;
}

SessionTrace run_session(const ScenarioConfig& config, const Policy& policy, std::size_t run_index)
{
    return run_session(config, policy, realize_channels(config, run_index));
}

} // namespace abrmdp
