#include "srl/env_single.hpp"

#include <vector>

#include "srl/errors.hpp"
#include "srl/rng.hpp"

namespace srl {

LocalObservation observe_single(const SingleEnvState& state, const SingleEnvConfig& config) {
    std::map<Position, CellCode> occupied;
    if (state.goal) occupied[*state.goal] = CellCode::Goal;
    if (state.adversary) occupied[*state.adversary] = CellCode::Vehicle;  // covers the goal cell
    return observe(config.layout, occupied, state.agent);
}

std::pair<SingleEnvState, LocalObservation> reset(const SingleEnvConfig& config) {
    if (config.layout.spawn_points.size() < 2) {
        throw ConfigError("single env reset: layout needs at least 2 spawn points");
    }
    if (config.max_steps < 1) throw ConfigError("single env reset: max_steps must be >= 1");

    RandomGen rng(config.seed);
    SingleEnvState state;
    const auto& spawns = config.layout.spawn_points;
    state.agent = spawns[rng.uniform_index(spawns.size())];

    if (config.variant != SingleVariant::AvoidOnly) {
        // The goal place is fixed across episodes: the first candidate the
        // agent did not spawn on. A per-episode random goal would be invisible
        // to the 3x3 mask until adjacent and unlearnable from position keys.
        for (const Position& p : config.layout.goal_candidates) {
            if (p != state.agent) {
                state.goal = p;
                break;
            }
        }
    }
    if (config.variant != SingleVariant::GoalOnly) {
        std::vector<Position> cells;
        for (const Position& p : config.layout.road_cells) {
            if (manhattan(p, state.agent) >= 2) cells.push_back(p);
        }
        state.adversary = cells[rng.uniform_index(cells.size())];
    }
    state.step = 0;
    state.done = false;
    state.rng_state = rng.next_u64();
    return {state, observe_single(state, config)};
}

Position adversary_move(const SingleEnvState& state, const GridLayout& layout) {
    if (!state.adversary) throw ContractError("adversary_move: no adversary present");
    const Position target = state.agent;
    Position best = *state.adversary;
    int best_dist = -1;
    for (Action a : kAllActions) {  // Stay is last, so ties resolve Up-first
        const Position cand = apply_action(*state.adversary, a, layout);
        const int d = manhattan(cand, target);
        if (best_dist < 0 || d < best_dist) {
            best = cand;
            best_dist = d;
        }
    }
    return best;
}

SingleStepResult step(const SingleEnvState& state, Action act, const SingleEnvConfig& config) {
    if (state.done) throw ContractError("single env step: episode already finished");

    SingleStepResult out;
    out.state = state;
    const Position agent_prev = state.agent;
    out.state.agent = apply_action(state.agent, act, config.layout);

    if (state.adversary) {
        const Position adv_prev = *state.adversary;
        out.state.adversary = adversary_move(out.state, config.layout);
        const bool same_cell = *out.state.adversary == out.state.agent;
        const bool swapped = *out.state.adversary == agent_prev && out.state.agent == adv_prev;
        out.collided = same_cell || swapped;
    }

    if (state.goal && out.state.agent == *state.goal) {
        out.reward += config.goal_reward;
        out.done = true;
    }
    if (out.collided) out.reward += config.collision_penalty;

    out.state.step = state.step + 1;
    if (out.state.step >= config.max_steps) out.done = true;
    out.state.done = out.done;
    out.obs = observe_single(out.state, config);
    return out;
}

}  // namespace srl
