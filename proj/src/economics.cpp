#include "abrmdp/economics.hpp"

#include "abrmdp/errors.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace abrmdp {

namespace {

constexpr double kSumTolerance = 1e-9;

double log_in_base(double x, double base)
{
    return std::log(x) / std::log(base);
}

// weight * log(ratio) / eta, with log(1) = 0 short-circuited so degenerate
// normalizers are never divided by.
double normalized_log_term(double weight, double ratio, double eta, double base)
{
    if (ratio <= 1.0 || eta <= 0.0) {
        return 0.0;
    }
    return weight * log_in_base(ratio, base) / eta;
}

} // namespace

void validate(const ProfitParams& params, std::size_t num_users)
{
    for (auto [name, w] : {std::pair{"alpha", params.alpha}, std::pair{"beta", params.beta},
                           std::pair{"gamma", params.gamma}}) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw ConfigError(std::string(name) + " must lie in [0,1]");
        }
    }
    if (std::abs(params.alpha + params.beta + params.gamma - 1.0) > kSumTolerance) {
        throw ConfigError("alpha+beta+gamma != 1 (got " +
                          std::to_string(params.alpha + params.beta + params.gamma) + ")");
    }
    if (!(params.delta_kbps > 0.0)) {
        throw ConfigError("delta_kbps must be positive");
    }
    if (!(params.r_th_kbps > 0.0)) {
        throw ConfigError("r_th_kbps must be positive");
    }
    if (params.theta && !(*params.theta >= 0.0 && std::isfinite(*params.theta))) {
        throw ConfigError("theta must be a nonnegative number or inf");
    }
    if (params.lambdas.size() != num_users) {
        throw ConfigError("expected " + std::to_string(num_users) + " priority coefficients, got " +
                          std::to_string(params.lambdas.size()));
    }
    for (double l : params.lambdas) {
        if (!(l >= 0.0)) {
            throw ConfigError("priority coefficients must be nonnegative");
        }
    }
    const double sum = std::accumulate(params.lambdas.begin(), params.lambdas.end(), 0.0);
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw ConfigError("priority coefficients sum to " + std::to_string(sum) + ", not 1");
    }
}

DerivedConstants derive_constants(const QualityLadder& ladder, const ChannelModel& channel,
                                  const ProfitParams& params, double log_base)
{
    if (!(log_base > 0.0 && log_base != 1.0)) {
        throw std::invalid_argument("log base must be positive and != 1");
    }
    DerivedConstants c;
    c.log_base = log_base;
    c.r_min_kbps = ladder.r_min();
    c.eta_play = log_in_base(ladder.r_max() / ladder.r_min(), log_base);

    for (double r : ladder.rates()) {
        for (double bw : channel.state_bandwidths()) {
            const double shortfall = r - bw;
            if (shortfall > 0.0 && (!c.delta_min_kbps || shortfall < *c.delta_min_kbps)) {
                c.delta_min_kbps = shortfall;
            }
        }
    }
    if (c.delta_min_kbps) {
        c.eta_buf = log_in_base((ladder.r_max() - channel.bw_min()) / *c.delta_min_kbps, log_base);
    }

    const double spread = ladder.r_max() - ladder.r_min();
    if (spread > params.delta_kbps) {
        c.eta_var = log_in_base(spread / params.delta_kbps, log_base);
    }
    return c;
}

double playback_income(double rate_kbps, double next_bw_kbps, const ProfitParams& params,
                       const DerivedConstants& consts)
{
    if (rate_kbps > next_bw_kbps) {
        return 0.0;
    }
    return normalized_log_term(params.alpha, rate_kbps / consts.r_min_kbps, consts.eta_play,
                               consts.log_base);
}

double buffering_cost(double rate_kbps, double next_bw_kbps, const ProfitParams& params,
                      const DerivedConstants& consts)
{
    if (rate_kbps <= next_bw_kbps || !consts.delta_min_kbps) {
        return 0.0;
    }
    return normalized_log_term(params.beta, (rate_kbps - next_bw_kbps) / *consts.delta_min_kbps,
                               consts.eta_buf, consts.log_base);
}

double smoothness_cost(double prev_rate_kbps, double next_rate_kbps, const ProfitParams& params,
                       const DerivedConstants& consts)
{
    const double drop = prev_rate_kbps - next_rate_kbps;
    const double variation =
        params.variation_penalty == VariationPenalty::symmetric ? std::abs(drop) : drop;
    if (variation < params.delta_kbps) {
        return 0.0;
    }
    return normalized_log_term(params.gamma, variation / params.delta_kbps, consts.eta_var,
                               consts.log_base);
}

std::optional<double> bottleneck_cost(std::span<const double> action_rates_kbps,
                                      const ProfitParams& params)
{
    const double total = std::accumulate(action_rates_kbps.begin(), action_rates_kbps.end(), 0.0);
    if (total <= params.r_th_kbps) {
        return 0.0;
    }
    if (!params.theta) {
        return std::nullopt;
    }
    return *params.theta * (total - params.r_th_kbps);
}

std::optional<double> StageBreakdown::total(std::span<const double> lambdas) const
{
    if (!bottleneck) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < users.size(); ++i) {
        sum += lambdas[i] * (users[i].income - users[i].buffering - users[i].variation);
    }
    return sum - *bottleneck;
}

ProfitModel::ProfitModel(QualityLadder ladder, ChannelModel channel, ProfitParams params,
                         double log_base)
    : ladder_(std::move(ladder)), channel_(std::move(channel)), params_(std::move(params))
{
    validate(params_, params_.lambdas.size());
    consts_ = derive_constants(ladder_, channel_, params_, log_base);
}

double ProfitModel::income(std::size_t rate, std::size_t next_channel) const
{
    return playback_income(ladder_.rate(rate), channel_.bandwidth(next_channel), params_, consts_);
}

double ProfitModel::buffering(std::size_t rate, std::size_t next_channel) const
{
    return buffering_cost(ladder_.rate(rate), channel_.bandwidth(next_channel), params_, consts_);
}

double ProfitModel::variation(std::size_t prev_rate, std::size_t next_rate) const
{
    return smoothness_cost(ladder_.rate(prev_rate), ladder_.rate(next_rate), params_, consts_);
}

double ProfitModel::aggregate_rate(const Action& action) const
{
    double total = 0.0;
    for (std::size_t r : action) {
        total += ladder_.rate(r);
    }
    return total;
}

std::optional<double> ProfitModel::bottleneck(const Action& action) const
{
    std::vector<double> rates;
    rates.reserve(action.size());
    for (std::size_t r : action) {
        rates.push_back(ladder_.rate(r));
    }
    return bottleneck_cost(rates, params_);
}

StageBreakdown ProfitModel::breakdown(const SystemState& state, const Action& action,
                                      const SystemState& next_state) const
{
    if (state.size() != action.size() || next_state.size() != action.size()) {
        throw std::invalid_argument("state/action dimension mismatch");
    }
    StageBreakdown out;
    out.users.resize(action.size());
    for (std::size_t i = 0; i < action.size(); ++i) {
        if (next_state[i].rate != action[i]) {
            throw std::invalid_argument("next state rates must equal the action");
        }
        out.users[i].income = income(action[i], next_state[i].channel);
        out.users[i].buffering = buffering(action[i], next_state[i].channel);
        out.users[i].variation = variation(state[i].rate, action[i]);
    }
    out.bottleneck = bottleneck(action);
    return out;
}

std::optional<double> stage_profit(const ProfitModel& model, const SystemState& state,
                                   const Action& action, const SystemState& next_state)
{
    return model.breakdown(state, action, next_state).total(model.params().lambdas);
}

} // namespace abrmdp
