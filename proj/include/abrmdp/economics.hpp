#pragma once

#include "abrmdp/model.hpp"

#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace abrmdp {

enum class VariationPenalty {
    symmetric,     // |R_t - R_{t+1}| >= delta
    downward_only, // R_t - R_{t+1} >= delta
};

/// Economic constants of the operator profit model.
struct ProfitParams {
    double alpha = 0.3;
    double beta = 0.5;
    double gamma = 0.2;
    double delta_kbps = 350.0;
    /// Cost per exceeded Kbps above r_th_kbps; nullopt means exceeding is forbidden.
    std::optional<double> theta;
    double r_th_kbps = 850.0;
    std::vector<double> lambdas{0.5, 0.5};
    VariationPenalty variation_penalty = VariationPenalty::symmetric;

    bool congestion_forbidden() const { return !theta.has_value(); }
};

/// Throws ConfigError naming the first violated invariant.
void validate(const ProfitParams& params, std::size_t num_users);

/// Normalization constants precomputed from the ladder and the channel.
///
/// delta_min is the smallest positive shortfall r_j - bw_k; it is absent when
/// every rate fits every state bandwidth, in which case buffering never occurs.
/// An eta is zero only in degenerate setups where the matching term can never
/// be nonzero (e.g. a one-rung ladder), and is never divided by in that case.
struct DerivedConstants {
    double eta_play = 0.0;
    double eta_buf = 0.0;
    double eta_var = 0.0;
    std::optional<double> delta_min_kbps;
    double r_min_kbps = 0.0;
    double log_base = std::numbers::e;
};

DerivedConstants derive_constants(const QualityLadder& ladder, const ChannelModel& channel,
                                  const ProfitParams& params, double log_base = std::numbers::e);

// Scalar profit terms. Rates and bandwidths in Kbps; money is dimensionless.
double playback_income(double rate_kbps, double next_bw_kbps, const ProfitParams& params,
                       const DerivedConstants& consts);
double buffering_cost(double rate_kbps, double next_bw_kbps, const ProfitParams& params,
                      const DerivedConstants& consts);
double smoothness_cost(double prev_rate_kbps, double next_rate_kbps, const ProfitParams& params,
                       const DerivedConstants& consts);

/// Congestion cost of a joint rate decision; nullopt is INFEASIBLE (theta infinite
/// and the aggregate rate above r_th).
std::optional<double> bottleneck_cost(std::span<const double> action_rates_kbps,
                                      const ProfitParams& params);

struct UserProfit {
    double income = 0.0;
    double buffering = 0.0;
    double variation = 0.0;
};

struct StageBreakdown {
    std::vector<UserProfit> users;
    std::optional<double> bottleneck; // nullopt: INFEASIBLE

    /// sum_i lambda_i (I - C_buf - C_var) - C_bw, or nullopt if infeasible.
    std::optional<double> total(std::span<const double> lambdas) const;
};

/// Ladder, channel and profit parameters bundled with their derived constants.
class ProfitModel {
public:
    ProfitModel(QualityLadder ladder, ChannelModel channel, ProfitParams params,
                double log_base = std::numbers::e);

    const QualityLadder& ladder() const { return ladder_; }
    const ChannelModel& channel() const { return channel_; }
    const ProfitParams& params() const { return params_; }
    const DerivedConstants& constants() const { return consts_; }
    std::size_t num_users() const { return params_.lambdas.size(); }

    double income(std::size_t rate, std::size_t next_channel) const;
    double buffering(std::size_t rate, std::size_t next_channel) const;
    double variation(std::size_t prev_rate, std::size_t next_rate) const;
    std::optional<double> bottleneck(const Action& action) const;
    double aggregate_rate(const Action& action) const;

    StageBreakdown breakdown(const SystemState& state, const Action& action,
                             const SystemState& next_state) const;

private:
    QualityLadder ladder_;
    ChannelModel channel_;
    ProfitParams params_;
    DerivedConstants consts_;
};

/// Operator profit for the transition state -> next_state under action.
/// Income and buffering use next_state's bandwidth; smoothness compares
/// state's rate with the action. Throws std::invalid_argument if the action
/// and next_state rates disagree.
std::optional<double> stage_profit(const ProfitModel& model, const SystemState& state,
                                   const Action& action, const SystemState& next_state);

} // namespace abrmdp
