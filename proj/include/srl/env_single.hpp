#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "srl/gridworld.hpp"

namespace srl {

// GoalOnly and AvoidOnly are the two sub-tasks the joint task decomposes into.
enum class SingleVariant { GoalOnly, AvoidOnly, Joint };

struct SingleEnvConfig {
    SingleVariant variant = SingleVariant::Joint;
    GridLayout layout;
    int max_steps = 50;
    double goal_reward = 5.0;
    double collision_penalty = -0.2;
    std::uint64_t seed = 0;
};

struct SingleEnvState {
    Position agent;
    std::optional<Position> adversary;
    std::optional<Position> goal;
    int step = 0;
    std::uint64_t rng_state = 0;  // generator word captured at reset
    bool done = false;
};

struct SingleStepResult {
    SingleEnvState state;
    LocalObservation obs;
    double reward = 0.0;
    bool done = false;
    bool collided = false;
};

// Places the agent uniformly on a spawn point, the goal (if any) on a different
// spawn point, and the adversary (if any) on a road cell at Manhattan distance
// >= 2 from the agent. Deterministic in config.seed.
std::pair<SingleEnvState, LocalObservation> reset(const SingleEnvConfig& config);

// Agent moves first, then the adversary chases. Reaching the goal pays
// goal_reward and ends the episode; sharing a cell with the adversary (or
// swapping cells with it) adds collision_penalty and the episode continues.
// Truncates at max_steps with no terminal bonus.
SingleStepResult step(const SingleEnvState& state, Action act, const SingleEnvConfig& config);

// Greedy chase: the road-cell neighbour (or Stay) minimising Manhattan distance
// to the agent, ties broken in the order Up, Down, Left, Right, Stay.
Position adversary_move(const SingleEnvState& state, const GridLayout& layout);

LocalObservation observe_single(const SingleEnvState& state, const SingleEnvConfig& config);

}  // namespace srl
