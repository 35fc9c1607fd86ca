#include "abrmdp/mdp.hpp"

#include "abrmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace abrmdp {

namespace {

// Values closer than this (relative) are treated as ties.
bool strictly_better(double candidate, double best)
{
    return candidate > best + 1e-12 * std::max(1.0, std::abs(best));
}

} // namespace

double channel_transition_prob(std::span<const std::size_t> from, std::span<const std::size_t> to,
                               const ChannelModel& channel)
{
    if (from.size() != to.size()) {
        throw std::invalid_argument("channel vectors differ in length");
    }
    double p = 1.0;
    for (std::size_t i = 0; i < from.size() && p != 0.0; ++i) {
        p *= channel.probability(from[i], to[i]);
    }
    return p;
}

double transition_prob(const SystemState& s, const Action& a, const SystemState& s_next,
                       const ChannelModel& channel)
{
    if (s.size() != a.size() || s_next.size() != a.size()) {
        throw std::invalid_argument("state/action dimension mismatch");
    }
    std::vector<std::size_t> from(s.size());
    std::vector<std::size_t> to(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s_next[i].rate != a[i]) {
            return 0.0;
        }
        from[i] = s[i].channel;
        to[i] = s_next[i].channel;
    }
    return channel_transition_prob(from, to, channel);
}

std::vector<Action> feasible_actions(std::size_t num_users, const QualityLadder& ladder,
                                     const ProfitParams& params)
{
    const StateSpace space(ladder.size(), 1, num_users);
    std::vector<Action> out;
    for (std::size_t i = 0; i < space.num_actions(); ++i) {
        Action a = space.decode_action(i);
        double total = 0.0;
        for (std::size_t r : a) {
            total += ladder.rate(r);
        }
        if (params.congestion_forbidden() && total > params.r_th_kbps) {
            continue;
        }
        out.push_back(std::move(a));
    }
    if (out.empty()) {
        throw InfeasibleModel("no feasible action: R_th = " + std::to_string(params.r_th_kbps) +
                              " Kbps is below " + std::to_string(num_users) + " x R_min");
    }
    return out;
}

void sort_for_tie_break(std::vector<Action>& actions, const QualityLadder& ladder)
{
    auto total = [&](const Action& a) {
        double sum = 0.0;
        for (std::size_t r : a) {
            sum += ladder.rate(r);
        }
        return sum;
    };
    std::stable_sort(actions.begin(), actions.end(), [&](const Action& x, const Action& y) {
        const double tx = total(x);
        const double ty = total(y);
        if (tx != ty) {
            return tx < ty;
        }
        return x < y;
    });
}

PolicyTable::PolicyTable(StateSpace space, std::size_t horizon, std::vector<std::uint32_t> actions,
                         std::vector<double> values)
    : space_(space), horizon_(horizon), actions_(std::move(actions)), values_(std::move(values))
{
    if (horizon_ == 0) {
        throw ConfigError("horizon must be at least one segment");
    }
    if (actions_.size() != horizon_ * space_.num_states() ||
        values_.size() != (horizon_ + 1) * space_.num_states()) {
        throw ConfigError("policy table dimensions do not match M, K, N and T");
    }
}

bool operator==(const PolicyTable& a, const PolicyTable& b)
{
    return a.space_.num_rates() == b.space_.num_rates() &&
           a.space_.num_channel_states() == b.space_.num_channel_states() &&
           a.space_.num_users() == b.space_.num_users() && a.horizon_ == b.horizon_ &&
           a.actions_ == b.actions_ && a.values_ == b.values_;
}

BellmanSweep::BellmanSweep(const ProfitModel& model, SolverOptions options)
    : space_(model.ladder().size(), model.channel().num_states(), model.num_users()),
      options_(options)
{
    const auto& ladder = model.ladder();
    const auto& channel = model.channel();
    const auto& lambdas = model.params().lambdas;
    const std::size_t n = space_.num_users();
    const std::size_t na = space_.num_actions();
    const std::size_t nc = space_.num_channel_vectors();

    auto actions = feasible_actions(n, ladder, model.params());
    sort_for_tie_break(actions, ladder);
    for (const auto& a : actions) {
        feasible_.push_back(space_.encode_action(a));
    }

    bottleneck_.assign(na, std::numeric_limits<double>::infinity());
    for (std::size_t ai = 0; ai < na; ++ai) {
        if (auto cost = model.bottleneck(space_.decode_action(ai))) {
            bottleneck_[ai] = *cost;
        }
    }

    successors_.resize(nc);
    successor_mass_.assign(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto from = space_.decode_channels(c);
        for (std::size_t c2 = 0; c2 < nc; ++c2) {
            const auto to = space_.decode_channels(c2);
            const double p = channel_transition_prob(from, to, channel);
            if (p > 0.0) {
                successors_[c].emplace_back(c2, p);
                successor_mass_[c] += p;
            }
        }
    }

    next_reward_.assign(na * nc, 0.0);
    next_state_.assign(na * nc, 0);
    for (std::size_t ai = 0; ai < na; ++ai) {
        const Action a = space_.decode_action(ai);
        for (std::size_t c2 = 0; c2 < nc; ++c2) {
            const auto to = space_.decode_channels(c2);
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                r += lambdas[i] * (model.income(a[i], to[i]) - model.buffering(a[i], to[i]));
            }
            next_reward_[ai * nc + c2] = r;
            next_state_[ai * nc + c2] = space_.compose(ai, c2);
        }
    }

    variation_.assign(na * na, 0.0);
    for (std::size_t ri = 0; ri < na; ++ri) {
        const Action prev = space_.decode_action(ri);
        for (std::size_t ai = 0; ai < na; ++ai) {
            const Action a = space_.decode_action(ai);
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                v += lambdas[i] * model.variation(prev[i], a[i]);
            }
            variation_[ri * na + ai] = v;
        }
    }

    state_rates_.resize(space_.num_states());
    state_channels_.resize(space_.num_states());
    for (std::size_t s = 0; s < space_.num_states(); ++s) {
        const SystemState st = space_.decode(s);
        Action rates(n);
        std::vector<std::size_t> chans(n);
        for (std::size_t i = 0; i < n; ++i) {
            rates[i] = st[i].rate;
            chans[i] = st[i].channel;
        }
        state_rates_[s] = space_.encode_action(rates);
        state_channels_[s] = space_.encode_channels(chans);
    }
}

double BellmanSweep::q_value(std::size_t state_index, std::size_t action_index,
                             std::span<const double> next_values) const
{
    if (!std::isfinite(bottleneck_[action_index])) {
        return -std::numeric_limits<double>::infinity();
    }
    const std::size_t nc = space_.num_channel_vectors();
    const std::size_t c = state_channels_[state_index];
    const double* reward = &next_reward_[action_index * nc];
    const std::size_t* next = &next_state_[action_index * nc];

    // sum_{s'} P (R + v(s')), with the s'-independent part of R factored out.
    double expected = 0.0;
    for (const auto& [c2, p] : successors_[c]) {
        expected += p * (reward[c2] + next_values[next[c2]]);
    }
    const double fixed =
        variation_[state_rates_[state_index] * space_.num_actions() + action_index] +
        bottleneck_[action_index];
    return expected - successor_mass_[c] * fixed;
}

void BellmanSweep::sweep_states(std::size_t begin, std::size_t end,
                                std::span<const double> next_values, std::span<double> values,
                                std::span<std::uint32_t> actions) const
{
    for (std::size_t s = begin; s < end; ++s) {
        std::size_t best_action = feasible_.front();
        double best = q_value(s, best_action, next_values);
        for (std::size_t k = 1; k < feasible_.size(); ++k) {
            const double q = q_value(s, feasible_[k], next_values);
            if (strictly_better(q, best)) {
                best = q;
                best_action = feasible_[k];
            }
        }
        values[s] = best;
        actions[s] = static_cast<std::uint32_t>(best_action);
    }
}

void BellmanSweep::run(std::span<const double> next_values, std::span<double> values,
                       std::span<std::uint32_t> actions) const
{
    const std::size_t ns = space_.num_states();
    if (next_values.size() != ns || values.size() != ns || actions.size() != ns) {
        throw std::invalid_argument("sweep buffers must hold one entry per state");
    }
    const std::size_t workers = std::clamp<std::size_t>(options_.workers, 1, ns);
    if (workers == 1) {
        sweep_states(0, ns, next_values, values, actions);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (ns + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(ns, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([=, this] { sweep_states(begin, end, next_values, values, actions); });
    }
}

PolicyTable backward_induction(const ProfitModel& model, std::size_t horizon, SolverOptions options)
{
    if (horizon == 0) {
        throw ConfigError("horizon must be at least one segment");
    }
    const BellmanSweep sweep(model, options);
    const std::size_t ns = sweep.space().num_states();

    std::vector<double> values((horizon + 1) * ns, 0.0); // row T stays zero
    std::vector<std::uint32_t> actions(horizon * ns, 0);
    for (std::size_t t = horizon; t-- > 0;) {
        std::span<const double> next(values.data() + (t + 1) * ns, ns);
        sweep.run(next, std::span(values.data() + t * ns, ns), std::span(actions.data() + t * ns, ns));
    }
    return PolicyTable(sweep.space(), horizon, std::move(actions), std::move(values));
}

Action extract_policy(const PolicyTable& table, std::size_t t, const SystemState& s)
{
    if (t >= table.horizon()) {
        throw std::out_of_range("epoch " + std::to_string(t) + " outside [0, " +
                                std::to_string(table.horizon()) + ")");
    }
    if (!table.space().valid(s)) {
        throw std::out_of_range("state does not belong to the policy's state space");
    }
    return table.space().decode_action(table.action_index(t, table.space().encode(s)));
}

} // namespace abrmdp
