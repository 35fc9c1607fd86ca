#include "abrmdp/errors.hpp"
#include "abrmdp/mdp.hpp"
#include "abrmdp/policy_io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace abrmdp;

namespace {

double total_rate(const Action& a, const QualityLadder& ladder)
{
    double sum = 0.0;
    for (std::size_t r : a) {
        sum += ladder.rate(r);
    }
    return sum;
}

SystemState uniform_state(std::size_t n, std::size_t rate, std::size_t channel)
{
    return SystemState(n, UserState{rate, channel});
}

} // namespace

TEST_CASE("joint transition probability")
{
    const auto model = oracle::default_model({0.5, 0.5});
    const auto& ch = model.channel();
    const std::vector<std::size_t> from{0, 0};
    const std::vector<std::size_t> to{0, 0};
    CHECK(channel_transition_prob(from, to, ch) == doctest::Approx(0.25).epsilon(1e-15));

    const std::vector<std::size_t> far{2, 0};
    CHECK(channel_transition_prob(from, far, ch) == 0.0);

    const ChannelModel identity({{1, 0}, {0, 1}}, {100, 500}, {500});
    const std::vector<std::size_t> same{1, 0};
    CHECK(channel_transition_prob(same, same, identity) == 1.0);

    const SystemState s{{1, 1}, {2, 2}};
    CHECK(transition_prob(s, {3, 0}, {{3, 1}, {0, 2}}, ch) == doctest::Approx(0.6 * 0.7));
    CHECK(transition_prob(s, {3, 0}, {{2, 1}, {0, 2}}, ch) == 0.0);
}

TEST_CASE("transition probabilities sum to one over next states")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = oracle::random_model(rng, 2 + trial % 3, 1 + trial % 4, 1 + trial % 2);
        const std::size_t n = model.num_users();
        const StateSpace space(model.ladder().size(), model.channel().num_states(), n);
        const auto actions = oracle::all_actions(model.ladder().size(), n);
        for (std::size_t si = 0; si < space.num_states(); si += 3) {
            const auto s = space.decode(si);
            const auto& a = actions[(si * 7) % actions.size()];
            double sum = 0.0;
            for (std::size_t s2 = 0; s2 < space.num_states(); ++s2) {
                sum += transition_prob(s, a, space.decode(s2), model.channel());
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("feasible action sets")
{
    const auto ladder = oracle::default_model({0.5, 0.5}).ladder();

    ProfitParams finite;
    finite.theta = 0.001;
    CHECK(feasible_actions(2, ladder, finite).size() == 25);

    ProfitParams forbidden;
    const auto kept = feasible_actions(2, ladder, forbidden);
    CHECK(kept.size() == 13);
    CHECK(std::is_sorted(kept.begin(), kept.end()));
    for (const auto& a : kept) {
        CHECK(total_rate(a, ladder) <= 850.0);
    }
    // Excluded pairs, written out by hand.
    const std::vector<Action> excluded{{0, 4}, {1, 4}, {2, 3}, {2, 4}, {3, 2}, {3, 3},
                                       {3, 4}, {4, 0}, {4, 1}, {4, 2}, {4, 3}, {4, 4}};
    for (const auto& a : excluded) {
        CHECK(std::find(kept.begin(), kept.end(), a) == kept.end());
    }

    forbidden.lambdas = {1.0};
    CHECK(feasible_actions(1, ladder, forbidden).size() == 5);

    forbidden.lambdas = {0.5, 0.5};
    forbidden.r_th_kbps = 150.0;
    CHECK_THROWS_AS(feasible_actions(2, ladder, forbidden), InfeasibleModel);
}

TEST_CASE("tie-break order")
{
    const QualityLadder ladder({100, 200, 300});
    std::vector<Action> actions{{2, 0}, {0, 2}, {1, 1}, {0, 0}, {2, 2}};
    sort_for_tie_break(actions, ladder);
    const std::vector<Action> expected{{0, 0}, {0, 2}, {1, 1}, {2, 0}, {2, 2}};
    CHECK(actions == expected);
}

TEST_CASE("backward induction matches brute-force policy enumeration")
{
    std::mt19937_64 rng(101);
    for (std::size_t m = 1; m <= 2; ++m) {
        for (std::size_t k = 1; k <= 2; ++k) {
            for (std::size_t n = 1; n <= 2; ++n) {
                for (std::size_t horizon = 1; horizon <= 3; ++horizon) {
                    const auto model = oracle::random_model(rng, m, k, n);
                    const auto table = backward_induction(model, horizon);
                    const auto& space = table.space();
                    for (std::size_t si = 0; si < space.num_states(); ++si) {
                        const auto s0 = space.decode(si);
                        const double dp = table.value(0, si);
                        const double tree = oracle::expectimax(model, s0, horizon);
                        CHECK(dp == doctest::Approx(tree).epsilon(1e-9));
                        if (auto brute = oracle::enumerate_policies(model, s0, horizon)) {
                            CHECK(dp == doctest::Approx(*brute).epsilon(1e-9));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("terminal values are zero and the table is reproducible bit for bit")
{
    const auto model = oracle::default_model({0.5, 0.5});
    const auto a = backward_induction(model, 6);
    for (double v : a.values_at(6)) {
        CHECK(v == 0.0);
    }
    const auto b = backward_induction(model, 6);
    CHECK(a == b);

    for (unsigned workers : {2u, 3u, 8u}) {
        CHECK(backward_induction(model, 6, SolverOptions{workers}) == a);
    }
}

TEST_CASE("sweep values agree with a direct recomputation")
{
    const auto model = oracle::default_model({0.7, 0.3}, 1000.0, 0.0005);
    const std::size_t horizon = 4;
    const auto table = backward_induction(model, horizon);
    const auto& space = table.space();
    const auto actions = oracle::all_actions(5, 2);
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t si = 0; si < space.num_states(); si += 7) {
            const auto s = space.decode(si);
            double best = -INFINITY;
            for (const auto& a : actions) {
                double q = 0.0;
                for (std::size_t s2 = 0; s2 < space.num_states(); ++s2) {
                    const auto next = space.decode(s2);
                    const double p = transition_prob(s, a, next, model.channel());
                    if (p > 0.0) {
                        q += p * (*stage_profit(model, s, a, next) + table.value(t + 1, s2));
                    }
                }
                best = std::max(best, q);
            }
            CHECK(table.value(t, si) == doctest::Approx(best).epsilon(1e-12));
        }
    }
}

TEST_CASE("optimal value dominates every open-loop sequence")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto model = oracle::random_model(rng, 3, 2, 1 + trial % 2);
        const std::size_t horizon = 3;
        const auto table = backward_induction(model, horizon);
        const auto actions = oracle::all_actions(3, model.num_users());
        std::vector<Action> feasible;
        for (const auto& a : actions) {
            if (model.bottleneck(a)) {
                feasible.push_back(a);
            }
        }
        const auto s0 = uniform_state(model.num_users(), 0, trial % 2);
        const double v = table.value(0, table.space().encode(s0));
        for (const auto& a0 : feasible) {
            for (const auto& a1 : feasible) {
                for (const auto& a2 : feasible) {
                    CHECK(v >= oracle::open_loop_value(model, s0, {a0, a1, a2}) - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("symmetric users get mirrored decisions")
{
    const auto model = oracle::default_model({0.5, 0.5});
    const auto table = backward_induction(model, 8);
    const auto& space = table.space();
    for (std::size_t t = 0; t < 8; ++t) {
        for (std::size_t si = 0; si < space.num_states(); ++si) {
            const auto s = space.decode(si);
            const SystemState swapped{s[1], s[0]};
            const auto a = extract_policy(table, t, s);
            const auto b = extract_policy(table, t, swapped);
            CHECK(table.value(t, si) ==
                  doctest::Approx(table.value(t, space.encode(swapped))).epsilon(1e-12));
            CHECK(total_rate(a, model.ladder()) == doctest::Approx(total_rate(b, model.ladder())));
            if (s[0] == s[1]) {
                CHECK(table.value(t, si) == table.value(t, space.encode(swapped)));
            }
        }
    }
}

TEST_CASE("a zero-priority user does not change the single-user optimum")
{
    ProfitParams p;
    p.theta = 0.0;
    p.lambdas = {1.0, 0.0};
    const auto base = oracle::default_model({0.5, 0.5});
    const ProfitModel two(base.ladder(), base.channel(), p);
    p.lambdas = {1.0};
    const ProfitModel one(base.ladder(), base.channel(), p);

    const auto t2 = backward_induction(two, 5);
    const auto t1 = backward_induction(one, 5);
    for (std::size_t si = 0; si < t2.space().num_states(); ++si) {
        const auto s = t2.space().decode(si);
        const double v1 = t1.value(0, t1.space().encode({s[0]}));
        CHECK(t2.value(0, si) == doctest::Approx(v1).epsilon(1e-12));
    }
}

TEST_CASE("extract_policy rejects bad epochs and states")
{
    const auto model = oracle::default_model({0.5, 0.5});
    const auto table = backward_induction(model, 3);
    CHECK_NOTHROW(extract_policy(table, 2, uniform_state(2, 0, 0)));
    CHECK_THROWS_AS(extract_policy(table, 3, uniform_state(2, 0, 0)), std::out_of_range);
    CHECK_THROWS_AS(extract_policy(table, 0, uniform_state(2, 5, 0)), std::out_of_range);
    CHECK_THROWS_AS(extract_policy(table, 0, uniform_state(3, 0, 0)), std::out_of_range);
    CHECK_THROWS_AS(backward_induction(model, 0), ConfigError);
}

TEST_CASE("congestion-forbidden policy never exceeds R_th")
{
    const auto model = oracle::default_model({0.5, 0.5});
    const auto table = backward_induction(model, 10);
    for (std::size_t t = 0; t < 10; ++t) {
        for (std::size_t si = 0; si < table.space().num_states(); ++si) {
            const auto a = table.space().decode_action(table.action_index(t, si));
            CHECK(total_rate(a, model.ladder()) <= 850.0);
        }
    }
}

TEST_CASE("policy file round trip")
{
    const auto model = oracle::default_model({0.7, 0.3}, 850.0, 0.001);
    const auto table = backward_induction(model, 4);
    std::stringstream buf;
    write_policy_table(buf, table, 0x0123456789abcdefULL);
    const std::string text = buf.str();
    CHECK(text.rfind("abrmdp-policy 1\n", 0) == 0);
    CHECK(text.find("ordering user-major/rate/channel-v1") != std::string::npos);

    std::istringstream in(text);
    const auto loaded = read_policy_table(in);
    CHECK(loaded.fingerprint == 0x0123456789abcdefULL);
    CHECK(loaded.table == table);

    std::stringstream again;
    write_policy_table(again, loaded.table, loaded.fingerprint);
    CHECK(again.str() == text);

    SUBCASE("truncated")
    {
        std::istringstream cut(text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(read_policy_table(cut), ConfigError);
    }
    SUBCASE("wrong magic")
    {
        std::istringstream bad("not-a-policy 1\n" + text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(read_policy_table(bad), ConfigError);
    }
    SUBCASE("wrong ordering tag")
    {
        std::string other = text;
        other.replace(other.find("channel-v1"), 10, "channel-v9");
        std::istringstream bad(other);
        CHECK_THROWS_AS(read_policy_table(bad), ConfigError);
    }
    SUBCASE("missing file")
    {
        CHECK_THROWS_AS(load_policy_table("/nonexistent/policy.txt"), ConfigError);
    }
}
