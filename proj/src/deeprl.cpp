#include "srl/deeprl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srl/errors.hpp"

namespace srl {

DqnAgent make_agent(DenseNet net, int target_sync_interval) {
    DqnAgent agent;
    agent.online = std::move(net);
    agent.target = agent.online;
    agent.steps_since_sync = 0;
    agent.target_sync_interval = target_sync_interval;
    return agent;
}

void sync_target(DqnAgent& agent) {
    agent.target = agent.online;
    agent.steps_since_sync = 0;
}

double vdn_qtot(const std::vector<std::vector<double>>& per_agent_q,
                const std::vector<int>& actions) {
    if (per_agent_q.empty() || per_agent_q.size() != actions.size()) {
        throw ContractError("vdn_qtot: need matching non-empty per-agent lists");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < per_agent_q.size(); ++i) {
        const int a = actions[i];
        if (a < 0 || a >= static_cast<int>(per_agent_q[i].size())) {
            throw ContractError("vdn_qtot: action index " + std::to_string(a) + " out of range");
        }
        total += per_agent_q[i][static_cast<std::size_t>(a)];
    }
    return total;
}

int greedy_action(const std::vector<double>& q) {
    if (q.empty()) throw ContractError("greedy_action: empty value vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = i;
    }
    return static_cast<int>(best);
}

bool igm_check(const std::vector<std::vector<double>>& per_agent_q) {
    const std::size_t n = per_agent_q.size();
    if (n < 1) throw ContractError("igm_check: need at least one agent");
    if (n > 6) throw ContractError("igm_check: refusing N > 6 (5^N joint actions)");
    for (const auto& q : per_agent_q) {
        if (q.size() != kNumActions) throw ContractError("igm_check: vectors must have length 5");
    }

    std::vector<int> greedy(n);
    for (std::size_t i = 0; i < n; ++i) greedy[i] = greedy_action(per_agent_q[i]);
    const double greedy_qtot = vdn_qtot(per_agent_q, greedy);

    std::vector<int> joint(n, 0);
    double best = greedy_qtot;
    while (true) {
        best = std::max(best, vdn_qtot(per_agent_q, joint));
        std::size_t k = 0;
        while (k < n && ++joint[k] == kNumActions) {
            joint[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    return greedy_qtot >= best;
}

TdResult td_loss(const DqnAgent& agent, const std::vector<Transition>& batch, double gamma) {
    if (batch.empty()) throw ContractError("td_loss: empty batch");

    TdResult result;
    result.grads = zero_gradients(agent.online);
    const double batch_n = static_cast<double>(batch.size());
    for (const Transition& t : batch) {
        const std::vector<double> q = forward(agent.online, t.obs);
        if (t.action < 0 || t.action >= static_cast<int>(q.size())) {
            throw ContractError("td_loss: action index out of range");
        }
        double y = t.reward;
        if (!t.done) {
            const std::vector<double> tq = forward(agent.target, t.next_obs);
            y += gamma * *std::max_element(tq.begin(), tq.end());
        }
        const double delta = q[static_cast<std::size_t>(t.action)] - y;
        result.loss += delta * delta / batch_n;

        std::vector<double> out_grad(q.size(), 0.0);
        out_grad[static_cast<std::size_t>(t.action)] = 2.0 * delta / batch_n;
        accumulate(result.grads, backward(agent.online, t.obs, out_grad));
    }
    return result;
}

namespace {
void finish_train_step(DqnAgent& agent, const Gradients& grads, double lr) {
    optimizer_step(agent.online, grads, lr);
    ++agent.steps_since_sync;
    if (agent.steps_since_sync >= agent.target_sync_interval) sync_target(agent);
}
}  // namespace

double dqn_train_step(DqnAgent& agent, ReplayBuffer<Transition>& buffer, std::size_t batch_size,
                      double gamma, double lr) {
    if (buffer.size() < batch_size) throw ContractError("dqn_train_step: buffer smaller than batch");
    const TdResult r = td_loss(agent, buffer.sample(batch_size), gamma);
    finish_train_step(agent, r.grads, lr);
    return r.loss;
}

double vdn_train_step(DqnAgent& shared_agent, ReplayBuffer<JointTransition>& buffer,
                      std::size_t batch_size, double gamma, double lr) {
    if (buffer.size() < batch_size) throw ContractError("vdn_train_step: buffer smaller than batch");

    const std::vector<JointTransition> batch = buffer.sample(batch_size);
    const double batch_n = static_cast<double>(batch.size());

    double loss = 0.0;
    Gradients grads = zero_gradients(shared_agent.online);
    for (const JointTransition& t : batch) {
        const std::size_t n = t.obs.size();
        if (t.actions.size() != n || t.next_obs.size() != n || t.active.size() != n ||
            t.active_next.size() != n) {
            throw ContractError("vdn_train_step: per-agent lists differ in length");
        }

        // Q_tot over the active agents' chosen actions.
        std::vector<std::vector<double>> q(n);
        double qtot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!t.active[i]) continue;
            q[i] = forward(shared_agent.online, t.obs[i]);
            qtot += q[i][static_cast<std::size_t>(t.actions[i])];
        }

        // The additive mixer's joint max is the sum of per-agent maxes.
        double y = t.team_reward;
        if (!t.done) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!t.active_next[i]) continue;
                const std::vector<double> tq = forward(shared_agent.target, t.next_obs[i]);
                y += gamma * *std::max_element(tq.begin(), tq.end());
            }
        }

        const double delta = qtot - y;
        loss += delta * delta / batch_n;

        // Parameter sharing: every agent's gradient lands on the same network.
        for (std::size_t i = 0; i < n; ++i) {
            if (!t.active[i]) continue;
            std::vector<double> out_grad(q[i].size(), 0.0);
            out_grad[static_cast<std::size_t>(t.actions[i])] = 2.0 * delta / batch_n;
            accumulate(grads, backward(shared_agent.online, t.obs[i], out_grad));
        }
    }
    finish_train_step(shared_agent, grads, lr);
    return loss;
}

std::vector<double> idql_train_step(std::vector<DqnAgent>& agents,
                                    std::vector<ReplayBuffer<Transition>>& buffers,
                                    std::size_t batch_size, double gamma, double lr) {
    if (agents.size() != buffers.size()) {
        throw ContractError("idql_train_step: agents and buffers differ in length");
    }
    std::vector<double> losses;
    losses.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        losses.push_back(dqn_train_step(agents[i], buffers[i], batch_size, gamma, lr));
    }
    return losses;
}

Action epsilon_greedy(const DenseNet& net, std::span<const double> obs, double epsilon,
                      RandomGen& rng) {
    if (epsilon > 0.0 && rng.uniform_real() < epsilon) {
        return static_cast<Action>(rng.uniform_int(kNumActions));
    }
    return static_cast<Action>(greedy_action(forward(net, obs)));
}

int observation_dim(int id_capacity) { return 2 + 9 * 4 + 1 + id_capacity; }

std::vector<double> encode_observation(const LocalObservation& obs, const GridLayout& layout,
                                       int agent_id, int id_capacity) {
    if (agent_id < 0 || agent_id >= std::max(1, id_capacity)) {
        throw ContractError("encode_observation: agent_id " + std::to_string(agent_id) +
                            " outside identity capacity " + std::to_string(id_capacity));
    }
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(observation_dim(id_capacity)));
    x.push_back(layout.height > 1 ? static_cast<double>(obs.own_position.row) / (layout.height - 1)
                                  : 0.0);
    x.push_back(layout.width > 1 ? static_cast<double>(obs.own_position.col) / (layout.width - 1)
                                 : 0.0);
    for (CellCode code : obs.mask) {
        for (int c = 0; c < 4; ++c) x.push_back(static_cast<int>(code) == c ? 1.0 : 0.0);
    }
    x.push_back(obs.step_fraction.value_or(0.0));
    for (int i = 0; i < id_capacity; ++i) x.push_back(i == agent_id ? 1.0 : 0.0);
    return x;
}

}  // namespace srl
