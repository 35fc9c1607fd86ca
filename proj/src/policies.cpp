#include "abrmdp/policies.hpp"

#include "abrmdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abrmdp {

Action decide_proposed(const PolicyTable& table, std::size_t t, const SystemState& current_state)
{
    return extract_policy(table, t, current_state);
}

Action decide_myopic(std::span<const double> last_measured_bw_kbps, const QualityLadder& ladder)
{
    Action action;
    action.reserve(last_measured_bw_kbps.size());
    const auto rates = ladder.rates();
    for (double bw : last_measured_bw_kbps) {
        const auto above = std::upper_bound(rates.begin(), rates.end(), bw);
        action.push_back(above == rates.begin() ? 0
                                                : static_cast<std::size_t>(above - rates.begin()) - 1);
    }
    return action;
}

IdealPlan solve_ideal(std::span<const std::vector<std::size_t>> channel_path,
                      const ProfitModel& model, const Action& initial_rates)
{
    const std::size_t n = model.num_users();
    if (channel_path.size() != n || initial_rates.size() != n) {
        throw std::invalid_argument("channel path / initial rates must cover every user");
    }
    const std::size_t len = channel_path.front().size();
    if (len < 2) {
        throw std::invalid_argument("channel path must span at least one segment");
    }
    for (const auto& p : channel_path) {
        if (p.size() != len) {
            throw std::invalid_argument("channel paths differ in length");
        }
    }
    const std::size_t horizon = len - 1;

    const StateSpace rates_space(model.ladder().size(), 1, n);
    const std::size_t na = rates_space.num_actions();
    auto actions = feasible_actions(n, model.ladder(), model.params());
    sort_for_tie_break(actions, model.ladder());

    std::vector<double> next(na, 0.0);
    std::vector<double> current(na, 0.0);
    std::vector<std::uint32_t> argmax(horizon * na, 0);

    SystemState state(n);
    SystemState next_state(n);
    for (std::size_t t = horizon; t-- > 0;) {
        for (std::size_t ri = 0; ri < na; ++ri) {
            const Action prev = rates_space.decode_action(ri);
            double best = 0.0;
            std::size_t best_action = 0;
            bool first = true;
            for (const auto& a : actions) {
                for (std::size_t i = 0; i < n; ++i) {
                    state[i] = {prev[i], channel_path[i][t]};
                    next_state[i] = {a[i], channel_path[i][t + 1]};
                }
                const auto reward = stage_profit(model, state, a, next_state);
                const std::size_t ai = rates_space.encode_action(a);
                const double q = *reward + next[ai];
                if (first || q > best + 1e-12 * std::max(1.0, std::abs(best))) {
                    first = false;
                    best = q;
                    best_action = ai;
                }
            }
            current[ri] = best;
            argmax[t * na + ri] = static_cast<std::uint32_t>(best_action);
        }
        std::swap(current, next);
    }

    IdealPlan plan;
    std::size_t r = rates_space.encode_action(initial_rates);
    plan.profit = next[r];
    for (std::size_t t = 0; t < horizon; ++t) {
        r = argmax[t * na + r];
        plan.decisions.push_back(rates_space.decode_action(r));
    }
    return plan;
}

Action decide(const Policy& policy, const Observation& obs, const QualityLadder& ladder)
{
    struct Visitor {
        const Observation& obs;
        const QualityLadder& ladder;

        Action operator()(const ProposedPolicy& p) const
        {
            if (!p.table) {
                throw std::logic_error("proposed policy has no table");
            }
            return decide_proposed(*p.table, p.stationary ? 0 : obs.epoch, obs.state);
        }
        Action operator()(const MyopicPolicy&) const
        {
            if (obs.last_throughput_kbps.empty()) {
                return Action(obs.state.size(), 0);
            }
            return decide_myopic(obs.last_throughput_kbps, ladder);
        }
        Action operator()(const IdealPolicy& p) const
        {
            if (obs.epoch >= p.decisions.size()) {
                throw std::out_of_range("ideal policy has no decision for this epoch");
            }
            return p.decisions[obs.epoch];
        }
    };
    return std::visit(Visitor{obs, ladder}, policy);
}

} // namespace abrmdp
