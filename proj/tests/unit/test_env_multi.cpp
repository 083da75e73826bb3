#include <doctest.h>

#include <set>

#include "srl/env_multi.hpp"
#include "srl/errors.hpp"
#include "srl/rng.hpp"

using namespace srl;

namespace {
MultiEnvConfig make_config(int n_agents, std::uint64_t seed) {
    MultiEnvConfig config;
    config.n_agents = n_agents;
    config.layout = build_junction_layout(6, 2);
    config.seed = seed;
    return config;
}

std::set<Position> active_positions(const MultiEnvState& state) {
    std::set<Position> out;
    for (int i = 0; i < static_cast<int>(state.agents.size()); ++i) {
        if (state.active(i)) out.insert(state.agents[static_cast<std::size_t>(i)].pos);
    }
    return out;
}
}  // namespace

TEST_CASE("multi env reset") {
    SUBCASE("4 agents occupy 4 distinct spawn cells") {
        auto [state, obs] = reset(make_config(4, 3));
        CHECK(active_positions(state).size() == 4);
        const auto config = make_config(4, 3);
        for (const AgentSlot& slot : state.agents) {
            CHECK(slot.entered);
            CHECK(!slot.arrived);
            CHECK(arm_of(slot.pos, config.layout) != arm_of(slot.dest, config.layout));
        }
        CHECK(obs.size() == 4);
        for (const LocalObservation& o : obs) CHECK(o.step_fraction == doctest::Approx(0.0));
    }
    SUBCASE("same seed, same assignment") {
        auto [s1, o1] = reset(make_config(4, 11));
        auto [s2, o2] = reset(make_config(4, 11));
        for (std::size_t i = 0; i < s1.agents.size(); ++i) {
            CHECK(s1.agents[i].pos == s2.agents[i].pos);
            CHECK(s1.agents[i].dest == s2.agents[i].dest);
        }
    }
    SUBCASE("10 agents on 8 spawn points: 8 enter, 2 queued") {
        auto [state, obs] = reset(make_config(10, 5));
        int entered = 0;
        for (const AgentSlot& slot : state.agents) entered += slot.entered ? 1 : 0;
        CHECK(entered == 8);
        CHECK(active_positions(state).size() == 8);
        CHECK(obs.size() == 10);
    }
    SUBCASE("over capacity is a configuration error") {
        CHECK_THROWS_AS(reset(make_config(17, 0)), ConfigError);
    }
}

TEST_CASE("detect_collisions") {
    const Position c{3, 3}, p{2, 3}, q{4, 3};
    SUBCASE("same destination cell") {
        CHECK(detect_collisions({p, q}, {c, c}) == std::set<int>{0, 1});
    }
    SUBCASE("swapped cells") {
        CHECK(detect_collisions({p, q}, {q, p}) == std::set<int>{0, 1});
    }
    SUBCASE("distinct destinations, no swap") {
        CHECK(detect_collisions({p, q}, {c, q}).empty());
    }
    SUBCASE("length mismatch is a contract violation") {
        CHECK_THROWS_AS(detect_collisions({p}, {p, q}), ContractError);
    }
}

TEST_CASE("multi env step rewards") {
    MultiEnvConfig config = make_config(2, 0);

    SUBCASE("two agents entering the same cell each get -10.01") {
        MultiEnvState state;
        state.agents.resize(2);
        state.agents[0] = {{6, 2}, {6, 13}, false, true};
        state.agents[1] = {{6, 4}, {13, 6}, false, true};
        const MultiStepResult r = step(state, {Action::Right, Action::Left}, config);
        CHECK(r.rewards[0] == doctest::Approx(-10.01));
        CHECK(r.rewards[1] == doctest::Approx(-10.01));
        CHECK(r.collision_events == 2);
        // colliders revert and stay in the game
        CHECK(r.state.agents[0].pos == Position{6, 2});
        CHECK(r.state.agents[1].pos == Position{6, 4});
        CHECK(!r.state.done);
    }
    SUBCASE("collision-free step costs exactly the step penalty") {
        MultiEnvState state;
        state.agents.resize(2);
        state.agents[0] = {{6, 2}, {6, 13}, false, true};
        state.agents[1] = {{7, 4}, {13, 6}, false, true};
        const MultiStepResult r = step(state, {Action::Right, Action::Left}, config);
        CHECK(r.rewards[0] == doctest::Approx(-0.01));
        CHECK(r.rewards[1] == doctest::Approx(-0.01));
        CHECK(r.collision_events == 0);
    }
    SUBCASE("arrived agents are inert and collect 0") {
        config.n_agents = 1;
        MultiEnvState state;
        state.agents.resize(1);
        state.agents[0] = {{6, 12}, {6, 13}, false, true};
        MultiStepResult r = step(state, {Action::Right}, config);
        CHECK(r.state.agents[0].arrived);
        CHECK(r.rewards[0] == doctest::Approx(-0.01));  // arrival step still pays the penalty
        CHECK(r.state.done);                            // sole agent arrived
        CHECK(r.dones[0]);
    }
    SUBCASE("swap collision reverts both") {
        MultiEnvState state;
        state.agents.resize(2);
        state.agents[0] = {{6, 2}, {6, 13}, false, true};
        state.agents[1] = {{6, 3}, {13, 6}, false, true};
        const MultiStepResult r = step(state, {Action::Right, Action::Left}, config);
        CHECK(r.collision_events == 2);
        CHECK(r.state.agents[0].pos == Position{6, 2});
        CHECK(r.state.agents[1].pos == Position{6, 3});
    }
    SUBCASE("wrong action vector length is a contract violation") {
        MultiEnvState state;
        state.agents.resize(2);
        state.agents[0] = {{6, 2}, {6, 13}, false, true};
        state.agents[1] = {{7, 4}, {13, 6}, false, true};
        CHECK_THROWS_AS(step(state, {Action::Stay}, config), ContractError);
    }
}

TEST_CASE("staggered entry admits queued agents at freed spawns") {
    const MultiEnvConfig config = make_config(10, 21);
    auto [state, obs] = reset(config);
    // Everyone pushes toward the centre, freeing border cells.
    std::vector<Action> acts;
    for (int i = 0; i < 10; ++i) {
        if (!state.active(i)) {
            acts.push_back(Action::Stay);
            continue;
        }
        const Position p = state.agents[static_cast<std::size_t>(i)].pos;
        if (p.row == 0) acts.push_back(Action::Down);
        else if (p.row == config.layout.height - 1) acts.push_back(Action::Up);
        else if (p.col == 0) acts.push_back(Action::Right);
        else acts.push_back(Action::Left);
    }
    const MultiStepResult r = step(state, acts, config);
    int entered = 0;
    for (const AgentSlot& slot : r.state.agents) entered += slot.entered ? 1 : 0;
    CHECK(entered == 10);
    CHECK(active_positions(r.state).size() == 10);
}

TEST_CASE("multi env invariants under random play") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        MultiEnvConfig config = make_config(seed % 2 == 0 ? 4 : 10, seed);
        RandomGen actions(seed + 77);
        auto [state, obs] = reset(config);
        std::vector<double> totals(static_cast<std::size_t>(config.n_agents), 0.0);
        while (!state.done) {
            std::vector<Action> acts;
            for (int i = 0; i < config.n_agents; ++i) {
                acts.push_back(static_cast<Action>(actions.uniform_int(kNumActions)));
            }
            const MultiStepResult r = step(state, acts, config);

            double team = 0.0;
            for (std::size_t i = 0; i < r.rewards.size(); ++i) {
                team += r.rewards[i];
                totals[i] += r.rewards[i];
            }
            CHECK(team <= 1e-12);  // no positive rewards exist here

            // active agents always occupy distinct cells
            int active = 0;
            for (int i = 0; i < config.n_agents; ++i) active += r.state.active(i) ? 1 : 0;
            CHECK(static_cast<int>(active_positions(r.state).size()) == active);
            state = r.state;
        }
        for (double total : totals) {
            CHECK(total >= (config.collision_penalty + config.step_penalty) * config.max_steps -
                               1e-9);
        }
    }
}

TEST_CASE("multi env trajectories are deterministic") {
    const MultiEnvConfig config = make_config(4, 123);
    RandomGen a1(9), a2(9);
    auto [s1, o1] = reset(config);
    auto [s2, o2] = reset(config);
    while (!s1.done) {
        std::vector<Action> acts1, acts2;
        for (int i = 0; i < 4; ++i) {
            acts1.push_back(static_cast<Action>(a1.uniform_int(kNumActions)));
            acts2.push_back(static_cast<Action>(a2.uniform_int(kNumActions)));
        }
        const MultiStepResult r1 = step(s1, acts1, config);
        const MultiStepResult r2 = step(s2, acts2, config);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(r1.state.agents[i].pos == r2.state.agents[i].pos);
            CHECK(r1.rewards[i] == r2.rewards[i]);
        }
        s1 = r1.state;
        s2 = r2.state;
    }
    CHECK(s2.done);
}
