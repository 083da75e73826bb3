#pragma once

#include <cstdint>
#include <vector>

#include "srl/errors.hpp"
#include "srl/gridworld.hpp"
#include "srl/neuralnet.hpp"
#include "srl/rng.hpp"

namespace srl {

struct Transition {
    std::vector<double> obs;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

// One multi-agent step for the additive mixer. Agents that are off the grid
// (arrived or not yet entered) carry active=false and are left out of Q_tot;
// active_next masks the bootstrap sum the same way.
struct JointTransition {
    std::vector<std::vector<double>> obs;
    std::vector<int> actions;
    double team_reward = 0.0;
    std::vector<std::vector<double>> next_obs;
    std::vector<bool> active;
    std::vector<bool> active_next;
    bool done = false;
};

// Fixed-capacity ring with its own seeded generator; sampling is uniform with
// replacement and reproducible.
template <typename T>
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
        if (capacity_ == 0) throw ContractError("ReplayBuffer: capacity must be positive");
        ring_.reserve(capacity_);
    }

    void push(T item) {
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(item));
        } else {
            ring_[next_] = std::move(item);  // oldest entry evicted
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::vector<T> sample(std::size_t batch_size) {
        if (ring_.empty()) throw ContractError("ReplayBuffer::sample: buffer is empty");
        std::vector<T> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(ring_[rng_.uniform_index(ring_.size())]);
        return batch;
    }

    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::vector<T> ring_;
    std::size_t next_ = 0;
    RandomGen rng_;
};

// Online network plus its periodically refreshed frozen copy.
struct DqnAgent {
    DenseNet online;
    DenseNet target;
    int steps_since_sync = 0;
    int target_sync_interval = 200;
};

DqnAgent make_agent(DenseNet net, int target_sync_interval = 200);

void sync_target(DqnAgent& agent);

// Additive mixer: sum over agents of the chosen-action Q-values.
double vdn_qtot(const std::vector<std::vector<double>>& per_agent_q,
                const std::vector<int>& actions);

// Exhaustively checks that the tuple of per-agent argmaxes attains the joint
// maximum of the additive Q_tot. Refuses N > 6.
bool igm_check(const std::vector<std::vector<double>>& per_agent_q);

struct TdResult {
    double loss = 0.0;
    Gradients grads;
};

// Mean squared TD error with bootstrap from the target network; gradients flow
// only through the online Q at the taken actions.
TdResult td_loss(const DqnAgent& agent, const std::vector<Transition>& batch, double gamma);

// One sampled DQN update on the agent's own buffer.
double dqn_train_step(DqnAgent& agent, ReplayBuffer<Transition>& buffer, std::size_t batch_size,
                      double gamma, double lr);

// One sampled update of the shared network under the additive mixer; gradients
// from every agent accumulate into the same parameters.
double vdn_train_step(DqnAgent& shared_agent, ReplayBuffer<JointTransition>& buffer,
                      std::size_t batch_size, double gamma, double lr);

// Fully independent learners: per-agent dqn_train_step, nothing crosses agents.
std::vector<double> idql_train_step(std::vector<DqnAgent>& agents,
                                    std::vector<ReplayBuffer<Transition>>& buffers,
                                    std::size_t batch_size, double gamma, double lr);

int greedy_action(const std::vector<double>& q);  // lowest-index tie-break
Action epsilon_greedy(const DenseNet& net, std::span<const double> obs, double epsilon,
                      RandomGen& rng);

// Network input layout: normalised position (2), 3x3 mask one-hot (36), step
// fraction (1), one-hot agent identity (id_capacity). Sizing id_capacity above
// the current team is how a policy is padded for a larger team.
std::vector<double> encode_observation(const LocalObservation& obs, const GridLayout& layout,
                                       int agent_id, int id_capacity);
int observation_dim(int id_capacity);

}  // namespace srl
