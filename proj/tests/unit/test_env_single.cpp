#include <doctest.h>

#include <cmath>
#include <map>

#include "srl/env_single.hpp"
#include "srl/errors.hpp"
#include "srl/rng.hpp"

using namespace srl;

namespace {
SingleEnvConfig make_config(SingleVariant variant, std::uint64_t seed, int arm_width = 1) {
    SingleEnvConfig config;
    config.variant = variant;
    config.layout = build_junction_layout(3, arm_width);
    config.seed = seed;
    return config;
}
}  // namespace

TEST_CASE("reset placement") {
    SUBCASE("same seed twice gives identical initial states") {
        const auto config = make_config(SingleVariant::Joint, 42);
        auto [s1, o1] = reset(config);
        auto [s2, o2] = reset(config);
        CHECK(s1.agent == s2.agent);
        CHECK(s1.adversary == s2.adversary);
        CHECK(s1.goal == s2.goal);
        CHECK(o1 == o2);
    }
    SUBCASE("variant rules") {
        auto [goal_state, o1] = reset(make_config(SingleVariant::GoalOnly, 7));
        CHECK(!goal_state.adversary.has_value());
        CHECK(goal_state.goal.has_value());

        auto [avoid_state, o2] = reset(make_config(SingleVariant::AvoidOnly, 7));
        CHECK(avoid_state.adversary.has_value());
        CHECK(!avoid_state.goal.has_value());
    }
    SUBCASE("goal sits on a different spawn point; adversary starts >= 2 away") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto config = make_config(SingleVariant::Joint, seed);
            auto [state, obs] = reset(config);
            REQUIRE(state.goal.has_value());
            REQUIRE(state.adversary.has_value());
            CHECK(*state.goal != state.agent);
            CHECK(manhattan(*state.adversary, state.agent) >= 2);
            CHECK(config.layout.on_road(state.agent));
            CHECK(config.layout.on_road(*state.adversary));
        }
    }
    SUBCASE("10000 seeded resets hit each of the 4 spawn points at 0.25 +- 0.02") {
        const auto config = make_config(SingleVariant::GoalOnly, 0);
        std::map<Position, int> counts;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            SingleEnvConfig cfg = config;
            cfg.seed = derive_seed(123, static_cast<std::uint64_t>(i));
            counts[reset(cfg).first.agent] += 1;
        }
        REQUIRE(counts.size() == 4);
        for (const auto& [pos, count] : counts) {
            CHECK(std::abs(count / static_cast<double>(n) - 0.25) < 0.02);
        }
    }
}

TEST_CASE("single env step rewards") {
    SingleEnvConfig config = make_config(SingleVariant::Joint, 0);

    SUBCASE("moving onto the goal pays +5 and ends the episode") {
        SingleEnvState state;
        state.agent = {2, 3};
        state.goal = Position{1, 3};
        const SingleStepResult r = step(state, Action::Up, config);
        CHECK(r.reward == doctest::Approx(5.0));
        CHECK(r.done);
    }
    SUBCASE("meeting the adversary costs 0.2 and continues") {
        SingleEnvState state;
        state.agent = {3, 2};
        state.adversary = Position{3, 4};
        const SingleStepResult r = step(state, Action::Right, config);
        CHECK(r.collided);
        CHECK(r.reward == doctest::Approx(-0.2));
        CHECK(!r.done);
        CHECK(*r.state.adversary == r.state.agent);
    }
    SUBCASE("plain move on open road is free") {
        SingleEnvState state;
        state.agent = {3, 1};
        state.goal = Position{6, 3};
        const SingleStepResult r = step(state, Action::Right, config);
        CHECK(r.reward == doctest::Approx(0.0));
        CHECK(!r.done);
    }
    SUBCASE("truncation at max_steps carries no bonus") {
        config.max_steps = 1;
        SingleEnvState state;
        state.agent = {3, 1};
        state.goal = Position{6, 3};
        const SingleStepResult r = step(state, Action::Stay, config);
        CHECK(r.done);
        CHECK(r.reward == doctest::Approx(0.0));
    }
    SUBCASE("stepping a finished episode is a contract violation") {
        SingleEnvState state;
        state.agent = {3, 1};
        state.done = true;
        CHECK_THROWS_AS(step(state, Action::Stay, config), ContractError);
    }
}

TEST_CASE("adversary chase policy") {
    SUBCASE("one cell left of the agent: moves right onto it") {
        const auto config = make_config(SingleVariant::AvoidOnly, 0, 2);
        SingleEnvState state;
        state.agent = {3, 4};
        state.adversary = Position{3, 3};
        CHECK(adversary_move(state, config.layout) == Position{3, 4});
    }
    SUBCASE("already on the agent: stays") {
        const auto config = make_config(SingleVariant::AvoidOnly, 0);
        SingleEnvState state;
        state.agent = {3, 3};
        state.adversary = Position{3, 3};
        CHECK(adversary_move(state, config.layout) == Position{3, 3});
    }
    SUBCASE("two equidistant approaches resolve Up-Down-Left-Right-Stay first") {
        // Centre block of the two-lane cross: from (3,3) both Down (4,3) and
        // Right (3,4) are one step from the agent at (4,4); Down wins.
        const auto config = make_config(SingleVariant::AvoidOnly, 0, 2);
        SingleEnvState state;
        state.agent = {4, 4};
        state.adversary = Position{3, 3};
        CHECK(adversary_move(state, config.layout) == Position{4, 3});
    }
    SUBCASE("its own move never increases the distance to the agent") {
        const auto config = make_config(SingleVariant::AvoidOnly, 0);
        std::vector<Position> cells(config.layout.road_cells.begin(),
                                    config.layout.road_cells.end());
        for (const Position& agent : cells) {
            for (const Position& adv : cells) {
                SingleEnvState state;
                state.agent = agent;
                state.adversary = adv;
                const Position moved = adversary_move(state, config.layout);
                CHECK(manhattan(moved, agent) <= manhattan(adv, agent));
            }
        }
    }
}

TEST_CASE("episode level properties") {
    SUBCASE("seed and action sequence fully determine the trajectory") {
        const auto config = make_config(SingleVariant::Joint, 99);
        RandomGen actions1(5), actions2(5);
        auto [state1, obs1] = reset(config);
        auto [state2, obs2] = reset(config);
        for (int i = 0; i < 30 && !state1.done; ++i) {
            const Action a1 = static_cast<Action>(actions1.uniform_int(kNumActions));
            const Action a2 = static_cast<Action>(actions2.uniform_int(kNumActions));
            const SingleStepResult r1 = step(state1, a1, config);
            const SingleStepResult r2 = step(state2, a2, config);
            CHECK(r1.state.agent == r2.state.agent);
            CHECK(r1.reward == r2.reward);
            CHECK(r1.obs == r2.obs);
            state1 = r1.state;
            state2 = r2.state;
            if (r1.done) break;
        }
    }
    SUBCASE("episode returns stay inside each variant's range") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            for (SingleVariant variant :
                 {SingleVariant::GoalOnly, SingleVariant::AvoidOnly, SingleVariant::Joint}) {
                const auto config = make_config(variant, seed);
                RandomGen actions(seed + 1000);
                auto [state, obs] = reset(config);
                double total = 0.0;
                bool done = false;
                while (!done) {
                    const SingleStepResult r =
                        step(state, static_cast<Action>(actions.uniform_int(kNumActions)), config);
                    total += r.reward;
                    state = r.state;
                    done = r.done;
                }
                if (variant == SingleVariant::GoalOnly) {
                    CHECK((total == doctest::Approx(0.0) || total == doctest::Approx(5.0)));
                } else if (variant == SingleVariant::AvoidOnly) {
                    const double k = total / -0.2;
                    CHECK(k >= -1e-9);
                    CHECK(std::abs(k - std::round(k)) < 1e-6);
                } else {
                    CHECK(total >= config.collision_penalty * config.max_steps - 1e-9);
                    CHECK(total <= config.goal_reward + 1e-9);
                }
            }
        }
    }
}
