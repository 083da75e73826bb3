#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "srl/gridworld.hpp"

namespace srl {

struct MultiEnvConfig {
    int n_agents = 4;
    GridLayout layout;
    int max_steps = 60;
    double collision_penalty = -10.0;
    double step_penalty = -0.01;
    std::uint64_t seed = 0;
};

struct AgentSlot {
    Position pos;   // meaningful once entered
    Position dest;  // goal candidate on a different arm, assigned on entry
    bool arrived = false;
    bool entered = false;
};

struct MultiEnvState {
    std::vector<AgentSlot> agents;
    int step = 0;
    std::uint64_t rng_state = 0;
    bool done = false;

    bool active(int i) const { return agents[static_cast<std::size_t>(i)].entered &&
                                      !agents[static_cast<std::size_t>(i)].arrived; }
};

struct MultiStepResult {
    MultiEnvState state;
    std::vector<LocalObservation> obs;
    std::vector<double> rewards;
    std::vector<bool> dones;        // arrived, or the whole episode is over
    std::vector<bool> was_active;   // agent acted during this step
    int collision_events = 0;       // number of agents penalised this step
};

// Places min(n_agents, spawn count) agents on distinct spawn points; surplus
// agents are queued and enter on later steps at freed spawn points. Each agent
// gets a destination on a different arm than its spawn.
std::pair<MultiEnvState, std::vector<LocalObservation>> reset(const MultiEnvConfig& config);

// All active agents move simultaneously; same-cell and swap collisions are
// penalised and the colliders revert to their previous cells. Every active
// agent pays step_penalty; reaching the assigned destination removes the agent
// from the grid (reward 0 afterwards).
MultiStepResult step(const MultiEnvState& state, const std::vector<Action>& acts,
                     const MultiEnvConfig& config);

// Indices whose next positions coincide or that swapped cells with another.
std::set<int> detect_collisions(const std::vector<Position>& prev,
                                const std::vector<Position>& next);

std::vector<LocalObservation> observe_multi(const MultiEnvState& state,
                                            const MultiEnvConfig& config);

// Border arm of a spawn/goal candidate: 0=north, 1=south, 2=west, 3=east.
int arm_of(Position p, const GridLayout& layout);

}  // namespace srl
