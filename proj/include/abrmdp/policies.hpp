#pragma once

#include "abrmdp/economics.hpp"
#include "abrmdp/mdp.hpp"
#include "abrmdp/model.hpp"

#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace abrmdp {

/// What a policy sees at a switching point.
struct Observation {
    std::size_t epoch = 0;
    SystemState state;                         // current rates + snapped channel states
    std::vector<double> last_throughput_kbps;  // empty before the first segment
};

/// Operator-side lookup in the solved table. In stationary mode the epoch-0
/// policy is reused at every switching point.
struct ProposedPolicy {
    std::shared_ptr<const PolicyTable> table;
    bool stationary = false;
};

/// Client-side throughput rule, unaware of other users and of R_th.
struct MyopicPolicy {};

/// Non-causal oracle: decisions precomputed from the realized channel path.
struct IdealPolicy {
    std::vector<Action> decisions;
};

using Policy = std::variant<ProposedPolicy, MyopicPolicy, IdealPolicy>;

Action decide_proposed(const PolicyTable& table, std::size_t t, const SystemState& current_state);

/// Per user, the highest rate not above its last measured throughput
/// (R_min when none fits).
Action decide_myopic(std::span<const double> last_measured_bw_kbps, const QualityLadder& ladder);

struct IdealPlan {
    std::vector<Action> decisions; // one per epoch
    double profit = 0.0;           // realized total over the path
};

/// Deterministic DP over rate vectors with the realized channel states
/// substituted. channel_path[i] is user i's state sequence of length T+1;
/// stage t is settled against channel_path[.][t+1].
IdealPlan solve_ideal(std::span<const std::vector<std::size_t>> channel_path,
                      const ProfitModel& model, const Action& initial_rates);

Action decide(const Policy& policy, const Observation& obs, const QualityLadder& ladder);

} // namespace abrmdp
