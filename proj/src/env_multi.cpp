#include "srl/env_multi.hpp"

#include <algorithm>
#include <string>

#include "srl/errors.hpp"
#include "srl/rng.hpp"

namespace srl {

int arm_of(Position p, const GridLayout& layout) {
    if (p.row == 0) return 0;
    if (p.row == layout.height - 1) return 1;
    if (p.col == 0) return 2;
    if (p.col == layout.width - 1) return 3;
    throw ContractError("arm_of: position is not on the outer border");
}

namespace {

// Destinations are pre-defined routes: agent i aims for goal candidate i
// (mod count), stepping forward only when that arm clashes with the spawn
// arm. Identity plus spawn then determines the destination, which is what
// lets a shared policy route different agents differently.
Position assigned_destination(const MultiEnvConfig& config, int agent_index, Position spawn) {
    const int spawn_arm = arm_of(spawn, config.layout);
    const auto& candidates = config.layout.goal_candidates;
    const std::size_t n = candidates.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Position g = candidates[(static_cast<std::size_t>(agent_index) + k) % n];
        if (arm_of(g, config.layout) != spawn_arm) return g;
    }
    throw ContractError("assigned_destination: no candidate on a different arm");
}

// Queued agents claim freed spawn points (agent order, spawn order) at the end
// of a step; they act from the following step.
void admit_pending(MultiEnvState& state, const MultiEnvConfig& config) {
    std::set<Position> taken;
    for (int i = 0; i < static_cast<int>(state.agents.size()); ++i) {
        if (state.active(i)) taken.insert(state.agents[static_cast<std::size_t>(i)].pos);
    }
    for (int i = 0; i < static_cast<int>(state.agents.size()); ++i) {
        AgentSlot& slot = state.agents[static_cast<std::size_t>(i)];
        if (slot.entered) continue;
        for (const Position& sp : config.layout.spawn_points) {
            if (taken.contains(sp)) continue;
            slot.pos = sp;
            slot.dest = assigned_destination(config, i, sp);
            slot.entered = true;
            taken.insert(sp);
            break;
        }
    }
}

// Agents not on the grid (queued or arrived) see nothing around them.
LocalObservation blank_observation(double step_fraction) {
    LocalObservation obs;
    obs.own_position = {0, 0};
    obs.mask.fill(CellCode::OffRoad);
    obs.step_fraction = step_fraction;
    return obs;
}

}  // namespace

std::vector<LocalObservation> observe_multi(const MultiEnvState& state,
                                            const MultiEnvConfig& config) {
    const double fraction =
        config.max_steps > 0 ? static_cast<double>(state.step) / config.max_steps : 0.0;
    std::vector<LocalObservation> out;
    out.reserve(state.agents.size());
    for (int i = 0; i < static_cast<int>(state.agents.size()); ++i) {
        if (!state.active(i)) {
            out.push_back(blank_observation(fraction));
            continue;
        }
        std::map<Position, CellCode> occupied;
        occupied[state.agents[static_cast<std::size_t>(i)].dest] = CellCode::Goal;
        for (int j = 0; j < static_cast<int>(state.agents.size()); ++j) {
            if (j != i && state.active(j)) {
                occupied[state.agents[static_cast<std::size_t>(j)].pos] = CellCode::Vehicle;
            }
        }
        out.push_back(observe(config.layout, occupied,
                              state.agents[static_cast<std::size_t>(i)].pos, fraction));
    }
    return out;
}

std::pair<MultiEnvState, std::vector<LocalObservation>> reset(const MultiEnvConfig& config) {
    const auto& spawns = config.layout.spawn_points;
    // Capacity scales with lane count: spawn cells on the north border tell
    // us the arm width.
    int arm_width = 0;
    for (const Position& p : spawns) arm_width += p.row == 0 ? 1 : 0;
    const int capacity = static_cast<int>(spawns.size()) * std::max(1, arm_width);
    if (config.n_agents < 1 || config.n_agents > capacity) {
        throw ConfigError("multi env reset: n_agents " + std::to_string(config.n_agents) +
                          " exceeds capacity " + std::to_string(capacity));
    }
    if (config.max_steps < 1) throw ConfigError("multi env reset: max_steps must be >= 1");

    RandomGen rng(config.seed);

    // Partial Fisher-Yates: distinct spawn cells for the first wave.
    std::vector<Position> pool = spawns;
    const int first_wave = std::min<int>(config.n_agents, static_cast<int>(pool.size()));
    for (int i = 0; i < first_wave; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + rng.uniform_index(pool.size() - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }

    MultiEnvState state;
    state.agents.resize(static_cast<std::size_t>(config.n_agents));
    for (int i = 0; i < first_wave; ++i) {
        AgentSlot& slot = state.agents[static_cast<std::size_t>(i)];
        slot.pos = pool[static_cast<std::size_t>(i)];
        slot.dest = assigned_destination(config, i, slot.pos);
        slot.entered = true;
    }
    state.step = 0;
    state.done = false;
    state.rng_state = rng.next_u64();
    return {state, observe_multi(state, config)};
}

std::set<int> detect_collisions(const std::vector<Position>& prev,
                                const std::vector<Position>& next) {
    if (prev.size() != next.size()) {
        throw ContractError("detect_collisions: position lists differ in length");
    }
    std::set<int> hit;
    const int n = static_cast<int>(prev.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto ii = static_cast<std::size_t>(i);
            const auto jj = static_cast<std::size_t>(j);
            const bool same_cell = next[ii] == next[jj];
            const bool swapped = next[ii] == prev[jj] && next[jj] == prev[ii] && prev[ii] != prev[jj];
            if (same_cell || swapped) {
                hit.insert(i);
                hit.insert(j);
            }
        }
    }
    return hit;
}

MultiStepResult step(const MultiEnvState& state, const std::vector<Action>& acts,
                     const MultiEnvConfig& config) {
    if (state.done) throw ContractError("multi env step: episode already finished");
    if (static_cast<int>(acts.size()) != config.n_agents ||
        static_cast<int>(state.agents.size()) != config.n_agents) {
        throw ContractError("multi env step: expected " + std::to_string(config.n_agents) +
                            " actions, got " + std::to_string(acts.size()));
    }

    MultiStepResult out;
    out.state = state;
    out.rewards.assign(static_cast<std::size_t>(config.n_agents), 0.0);
    out.was_active.assign(static_cast<std::size_t>(config.n_agents), false);

    std::vector<int> idx;  // active agents, in index order
    std::vector<Position> prev, next;
    for (int i = 0; i < config.n_agents; ++i) {
        if (!state.active(i)) continue;
        idx.push_back(i);
        prev.push_back(state.agents[static_cast<std::size_t>(i)].pos);
        next.push_back(apply_action(state.agents[static_cast<std::size_t>(i)].pos,
                                    acts[static_cast<std::size_t>(i)], config.layout));
        out.was_active[static_cast<std::size_t>(i)] = true;
    }

    // Only the first round of conflicts is penalised; later rounds just undo
    // moves invalidated by a collider reclaiming its previous cell.
    const std::set<int> penalised = detect_collisions(prev, next);
    std::set<int> reverted = penalised;
    for (int k : penalised) next[static_cast<std::size_t>(k)] = prev[static_cast<std::size_t>(k)];
    while (true) {
        std::set<int> more = detect_collisions(prev, next);
        std::set<int> fresh;
        for (int k : more) {
            if (!reverted.contains(k)) fresh.insert(k);
        }
        if (fresh.empty()) break;
        for (int k : fresh) {
            next[static_cast<std::size_t>(k)] = prev[static_cast<std::size_t>(k)];
            reverted.insert(k);
        }
    }

    out.collision_events = static_cast<int>(penalised.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const int i = idx[a];
        AgentSlot& slot = out.state.agents[static_cast<std::size_t>(i)];
        slot.pos = next[a];
        out.rewards[static_cast<std::size_t>(i)] = config.step_penalty;
        if (penalised.contains(static_cast<int>(a))) {
            out.rewards[static_cast<std::size_t>(i)] += config.collision_penalty;
        }
        if (slot.pos == slot.dest) slot.arrived = true;
    }

    out.state.step = state.step + 1;
    bool all_arrived = true;
    for (const AgentSlot& s : out.state.agents) all_arrived = all_arrived && s.arrived;
    out.state.done = all_arrived || out.state.step >= config.max_steps;

    if (!out.state.done) admit_pending(out.state, config);

    out.obs = observe_multi(out.state, config);
    out.dones.assign(static_cast<std::size_t>(config.n_agents), false);
    for (int i = 0; i < config.n_agents; ++i) {
        out.dones[static_cast<std::size_t>(i)] =
            out.state.done || out.state.agents[static_cast<std::size_t>(i)].arrived;
    }
    return out;
}

}  // namespace srl
