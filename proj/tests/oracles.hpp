#pragma once

// Test-only reference computations. Nothing here calls into the mdp or
// policies modules; rewards come from economics::stage_profit and channel
// probabilities straight from the matrix.

#include "abrmdp/economics.hpp"
#include "abrmdp/model.hpp"

#include <optional>
#include <random>
#include <vector>

namespace abrmdp::oracle {

/// Expected total profit of an open-loop action sequence from s0, summing
/// over every channel path.
double open_loop_value(const ProfitModel& model, const SystemState& s0,
                       const std::vector<Action>& sequence);

/// Max expected profit over every deterministic time-indexed policy,
/// enumerated literally (one decision per reachable (t, state) pair).
/// Returns nullopt once the rule combinations along one branch exceed `budget`.
std::optional<double> enumerate_policies(const ProfitModel& model, const SystemState& s0,
                                         std::size_t horizon, std::size_t budget = 2'000'000);

/// Exhaustive forward search over the full channel-history tree.
double expectimax(const ProfitModel& model, const SystemState& s0, std::size_t horizon);

/// Max total profit over all feasible action sequences on a known channel
/// path (path[i] has horizon + 1 states), by plain enumeration.
double best_sequence_on_path(const ProfitModel& model, const std::vector<std::vector<std::size_t>>& path,
                             const Action& initial_rates);

/// Total profit of a fixed sequence on a known path.
double sequence_profit_on_path(const ProfitModel& model,
                               const std::vector<std::vector<std::size_t>>& path,
                               const Action& initial_rates, const std::vector<Action>& sequence);

/// Every joint action (feasible or not) in lexicographic order.
std::vector<Action> all_actions(std::size_t num_rates, std::size_t num_users);

/// Random valid instance with the given dimensions; theta is finite or
/// infinite at random and R_th is always at least N * R_min.
ProfitModel random_model(std::mt19937_64& rng, std::size_t m, std::size_t k, std::size_t n);

/// Default ladder / channel / weights with lambdas and R_th as given.
ProfitModel default_model(std::vector<double> lambdas, double r_th = 850.0,
                        std::optional<double> theta = std::nullopt);

} // namespace abrmdp::oracle
