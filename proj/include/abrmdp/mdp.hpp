#pragma once

#include "abrmdp/economics.hpp"
#include "abrmdp/model.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace abrmdp {

/// Pr{BW_{t+1} | BW_t}: product of per-user matrix entries (independent links).
double channel_transition_prob(std::span<const std::size_t> from, std::span<const std::size_t> to,
                               const ChannelModel& channel);

/// P_a(s, s'): the channel term when s' carries the action's rates, else 0.
double transition_prob(const SystemState& s, const Action& a, const SystemState& s_next,
                       const ChannelModel& channel);

/// Joint actions in lexicographic order. With congestion forbidden only those
/// with aggregate rate <= R_th remain; throws InfeasibleModel if none do.
std::vector<Action> feasible_actions(std::size_t num_users, const QualityLadder& ladder,
                                     const ProfitParams& params);

/// Orders actions by aggregate rate, then lexicographically. The first of
/// several equal-value actions in this order wins the argmax.
void sort_for_tie_break(std::vector<Action>& actions, const QualityLadder& ladder);

/// Time-indexed optimal policy and value-to-go, dense over the canonical
/// state order. Values are stored for epochs 0..T with v(s_T) = 0.
class PolicyTable {
public:
    PolicyTable(StateSpace space, std::size_t horizon, std::vector<std::uint32_t> actions,
                std::vector<double> values);

    const StateSpace& space() const { return space_; }
    std::size_t horizon() const { return horizon_; }

    std::uint32_t action_index(std::size_t t, std::size_t state_index) const
    {
        return actions_[t * space_.num_states() + state_index];
    }
    double value(std::size_t t, std::size_t state_index) const
    {
        return values_[t * space_.num_states() + state_index];
    }
    std::span<const double> values_at(std::size_t t) const
    {
        return std::span(values_).subspan(t * space_.num_states(), space_.num_states());
    }

    friend bool operator==(const PolicyTable&, const PolicyTable&);

private:
    StateSpace space_;
    std::size_t horizon_;
    std::vector<std::uint32_t> actions_;
    std::vector<double> values_;
};

struct SolverOptions {
    unsigned workers = 1;
};

/// One Bellman sweep with all model-dependent terms precomputed.
///
/// Each sweep reads only the next epoch's values and writes a separate
/// buffer, so states can be processed in any order or in parallel.
class BellmanSweep {
public:
    explicit BellmanSweep(const ProfitModel& model, SolverOptions options = {});

    const StateSpace& space() const { return space_; }

    /// Fills values/actions (size num_states) for one epoch from next_values.
    void run(std::span<const double> next_values, std::span<double> values,
             std::span<std::uint32_t> actions) const;

    /// Expected stage profit plus value-to-go of one (state, action) pair.
    double q_value(std::size_t state_index, std::size_t action_index,
                   std::span<const double> next_values) const;

    std::span<const std::size_t> feasible() const { return feasible_; }

private:
    void sweep_states(std::size_t begin, std::size_t end, std::span<const double> next_values,
                      std::span<double> values, std::span<std::uint32_t> actions) const;

    StateSpace space_;
    SolverOptions options_;
    std::vector<std::size_t> feasible_;                     // action indices, tie-break order
    std::vector<double> bottleneck_;                        // per action index
    std::vector<std::vector<std::pair<std::size_t, double>>> successors_; // per channel vector
    std::vector<double> successor_mass_;                    // per channel vector
    std::vector<double> next_reward_;                       // [action][channel'] income - buffering
    std::vector<double> variation_;                         // [rate vector][action]
    std::vector<std::size_t> next_state_;                   // [action][channel']
    std::vector<std::size_t> state_rates_;                  // per state: rate-vector index
    std::vector<std::size_t> state_channels_;               // per state: channel-vector index
};

/// Finite-horizon backward induction over all joint states.
PolicyTable backward_induction(const ProfitModel& model, std::size_t horizon,
                               SolverOptions options = {});

/// Stored argmax action for (t, s). Throws std::out_of_range on a bad epoch or state.
Action extract_policy(const PolicyTable& table, std::size_t t, const SystemState& s);

} // namespace abrmdp
