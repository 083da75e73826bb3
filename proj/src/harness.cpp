#include "srl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "srl/env_multi.hpp"
#include "srl/errors.hpp"
#include "srl/textio.hpp"
#include "srl/transfer.hpp"

namespace srl {

namespace {
// Fresh sum per element: a sliding running sum would accumulate rounding and
// break the exact identity/constant-series properties.
double trailing_mean(const std::vector<double>& series, std::size_t end_inclusive,
                     std::size_t window) {
    const std::size_t n = std::min(end_inclusive + 1, window);
    double sum = 0.0;
    for (std::size_t j = end_inclusive + 1 - n; j <= end_inclusive; ++j) sum += series[j];
    return sum / static_cast<double>(n);
}
}  // namespace

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    if (window < 1) throw ContractError("moving_average: window must be >= 1");
    std::vector<double> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.push_back(trailing_mean(series, i, static_cast<std::size_t>(window)));
    }
    return out;
}

std::optional<int> episodes_to_threshold(const std::vector<double>& series, double threshold,
                                         int window) {
    if (window < 1) throw ContractError("episodes_to_threshold: window must be >= 1");
    for (std::size_t i = static_cast<std::size_t>(window) - 1; i < series.size(); ++i) {
        if (trailing_mean(series, i, static_cast<std::size_t>(window)) >= threshold) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

int thread_cap(std::size_t n_tasks) {
    int cap = static_cast<int>(n_tasks);
    if (const char* env = std::getenv("SRL_THREADS")) {
        try {
            cap = std::max(1, static_cast<int>(parse_int(env, "SRL_THREADS")));
        } catch (const ParseError&) {
            throw ConfigError("SRL_THREADS is not an integer: '" + std::string(env) + "'");
        }
    }
    return std::max(1, std::min<int>(cap, static_cast<int>(n_tasks)));
}

namespace {

// Runs fn(i) for i in [0, n) on up to thread_cap(n) workers; the first thrown
// exception is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
    const int workers = thread_cap(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

LearningParams to_learning_params(const LearnSettings& s) {
    LearningParams p;
    p.alpha = s.alpha;
    p.gamma = s.gamma;
    p.epsilon_start = s.epsilon_start;
    p.epsilon_end = s.epsilon_end;
    p.epsilon_decay_episodes = s.epsilon_decay_episodes;
    return p;
}

int resolved_id_capacity(const ExperimentConfig& config) {
    const int cap = config.learning.id_capacity > 0 ? config.learning.id_capacity
                                                    : config.env.n_agents;
    if (cap < config.env.n_agents) {
        throw ConfigError("learning.id_capacity " + std::to_string(cap) +
                          " is smaller than env.n_agents " + std::to_string(config.env.n_agents));
    }
    return cap;
}

// Existing per-seed artifact, falling back to the shared file.
std::filesystem::path resolve_input_path(const std::filesystem::path& path, std::uint64_t seed,
                                         bool multi_seed) {
    const std::filesystem::path per_seed = path_for_seed(path, seed, multi_seed);
    if (std::filesystem::exists(per_seed)) return per_seed;
    if (std::filesystem::exists(path)) return path;
    throw ConfigError("required input file missing: " + path.string() +
                      (multi_seed ? " (or " + per_seed.string() + ")" : ""));
}

std::vector<std::vector<double>> encode_team(const std::vector<LocalObservation>& obs,
                                             const GridLayout& layout, int id_capacity) {
    std::vector<std::vector<double>> enc;
    enc.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        enc.push_back(encode_observation(obs[i], layout, static_cast<int>(i), id_capacity));
    }
    return enc;
}

}  // namespace

void parallel_seeds(const std::vector<std::uint64_t>& seeds,
                    const std::function<void(std::size_t, std::uint64_t)>& fn) {
    parallel_for(seeds.size(), [&](std::size_t i) { fn(i, seeds[i]); });
}

std::filesystem::path path_for_seed(const std::filesystem::path& path, std::uint64_t seed,
                                    bool multi_seed) {
    if (!multi_seed) return path;
    std::filesystem::path out = path;
    const std::string ext = out.extension().string();
    out.replace_extension();
    out += ".seed" + std::to_string(seed) + ext;
    return out;
}

TabularRunResult run_tabular_seed(const ExperimentConfig& config, std::uint64_t seed,
                                  const QTable* init) {
    SingleEnvConfig env = make_single_env_config(config);
    env.seed = seed;
    return train_tabular(env, to_learning_params(config.learning), config.episodes, init);
}

DeepRunOutput run_vdn_seed(const ExperimentConfig& config, std::uint64_t seed) {
    const MultiEnvConfig base_env = make_multi_env_config(config);
    const int id_cap = resolved_id_capacity(config);
    const LearnSettings& learn = config.learning;
    const LearningParams params = to_learning_params(learn);

    // The shared net is padded up-front for the larger team: identity columns
    // beyond this environment's agents are zero, stay zero under zero-fed
    // inputs, and hand the transferred agents an exact copy of the shared
    // behaviour instead of random column noise.
    DqnAgent agent = make_agent(
        pad_network(init_network({observation_dim(config.env.n_agents), 64, 64, kNumActions},
                                 derive_seed(seed, 11)),
                    observation_dim(id_cap)),
        learn.target_sync_interval);
    ReplayBuffer<JointTransition> buffer(static_cast<std::size_t>(learn.buffer_capacity),
                                         derive_seed(seed, 12));
    RandomGen explore(derive_seed(seed, 13));
    const std::size_t warmup = static_cast<std::size_t>(
        std::max(learn.batch_size, learn.learn_start));

    DeepRunOutput out;
    long long env_steps = 0;
    for (int ep = 0; ep < config.episodes; ++ep) {
        const double eps = epsilon_at(params, ep, config.episodes);
        MultiEnvConfig env = base_env;
        env.seed = derive_seed(seed, 100000 + static_cast<std::uint64_t>(ep));

        auto [state, obs] = reset(env);
        std::vector<std::vector<double>> enc = encode_team(obs, env.layout, id_cap);
        double ep_return = 0.0;
        int collisions = 0;
        int steps = 0;
        while (!state.done) {
            std::vector<Action> acts(static_cast<std::size_t>(env.n_agents), Action::Stay);
            std::vector<bool> pre_active(static_cast<std::size_t>(env.n_agents), false);
            for (int i = 0; i < env.n_agents; ++i) {
                if (!state.active(i)) continue;
                pre_active[static_cast<std::size_t>(i)] = true;
                acts[static_cast<std::size_t>(i)] =
                    epsilon_greedy(agent.online, enc[static_cast<std::size_t>(i)], eps, explore);
            }
            MultiStepResult result = step(state, acts, env);
            std::vector<std::vector<double>> next_enc = encode_team(result.obs, env.layout, id_cap);

            double team_reward = 0.0;
            for (double r : result.rewards) team_reward += r;

            JointTransition jt;
            jt.obs = enc;
            jt.next_obs = next_enc;
            jt.team_reward = team_reward;
            jt.done = result.state.done;
            jt.active = pre_active;
            jt.actions.resize(static_cast<std::size_t>(env.n_agents), 0);
            jt.active_next.assign(static_cast<std::size_t>(env.n_agents), false);
            for (int i = 0; i < env.n_agents; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                jt.actions[ii] = static_cast<int>(acts[ii]);
                jt.active_next[ii] =
                    pre_active[ii] && !result.state.agents[ii].arrived;
            }
            buffer.push(std::move(jt));

            ep_return += team_reward;
            collisions += result.collision_events;
            ++steps;
            ++env_steps;
            if (buffer.size() >= warmup && env_steps % learn.train_interval == 0) {
                vdn_train_step(agent, buffer, static_cast<std::size_t>(learn.batch_size),
                               learn.gamma, learn.lr);
            }
            state = std::move(result.state);
            enc = std::move(next_enc);
        }

        MetricsRow row;
        row.seed = seed;
        row.episode = ep;
        row.return_total = ep_return;
        row.collisions = collisions;
        row.steps = steps;
        row.epsilon = eps;
        out.rows.push_back(std::move(row));
    }
    out.policy = std::move(agent.online);
    return out;
}

DeepRunOutput run_idql_seed(const ExperimentConfig& config, std::uint64_t seed,
                            const DenseNet* init_policy) {
    const MultiEnvConfig base_env = make_multi_env_config(config);
    const int id_cap = resolved_id_capacity(config);
    const LearnSettings& learn = config.learning;
    const LearningParams params = to_learning_params(learn);
    const int obs_dim = observation_dim(id_cap);

    std::vector<DqnAgent> agents;
    agents.reserve(static_cast<std::size_t>(base_env.n_agents));
    if (init_policy) {
        DenseNet padded = pad_network(*init_policy, obs_dim);
        for (DenseNet& net : replicate_policy(padded, base_env.n_agents)) {
            agents.push_back(make_agent(std::move(net), learn.target_sync_interval));
        }
    } else {
        for (int i = 0; i < base_env.n_agents; ++i) {
            agents.push_back(make_agent(
                init_network({obs_dim, 64, 64, kNumActions},
                             derive_seed(seed, 20 + static_cast<std::uint64_t>(i))),
                learn.target_sync_interval));
        }
    }

    std::vector<ReplayBuffer<Transition>> buffers;
    buffers.reserve(static_cast<std::size_t>(base_env.n_agents));
    for (int i = 0; i < base_env.n_agents; ++i) {
        buffers.emplace_back(static_cast<std::size_t>(learn.buffer_capacity),
                             derive_seed(seed, 40 + static_cast<std::uint64_t>(i)));
    }
    RandomGen explore(derive_seed(seed, 13));
    const std::size_t warmup = static_cast<std::size_t>(
        std::max(learn.batch_size, learn.learn_start));

    DeepRunOutput out;
    long long env_steps = 0;
    for (int ep = 0; ep < config.episodes; ++ep) {
        const double eps = epsilon_at(params, ep, config.episodes);
        MultiEnvConfig env = base_env;
        env.seed = derive_seed(seed, 100000 + static_cast<std::uint64_t>(ep));

        auto [state, obs] = reset(env);
        std::vector<std::vector<double>> enc = encode_team(obs, env.layout, id_cap);
        double ep_return = 0.0;
        int collisions = 0;
        int steps = 0;
        while (!state.done) {
            std::vector<Action> acts(static_cast<std::size_t>(env.n_agents), Action::Stay);
            std::vector<bool> pre_active(static_cast<std::size_t>(env.n_agents), false);
            for (int i = 0; i < env.n_agents; ++i) {
                if (!state.active(i)) continue;
                const auto ii = static_cast<std::size_t>(i);
                pre_active[ii] = true;
                acts[ii] = epsilon_greedy(agents[ii].online, enc[ii], eps, explore);
            }
            MultiStepResult result = step(state, acts, env);
            std::vector<std::vector<double>> next_enc = encode_team(result.obs, env.layout, id_cap);

            for (int i = 0; i < env.n_agents; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                if (!pre_active[ii]) continue;
                Transition t;
                t.obs = enc[ii];
                t.action = static_cast<int>(acts[ii]);
                t.reward = result.rewards[ii];
                t.next_obs = next_enc[ii];
                t.done = result.dones[ii];
                buffers[ii].push(std::move(t));
                ep_return += result.rewards[ii];
            }
            collisions += result.collision_events;
            ++steps;
            ++env_steps;
            if (env_steps % learn.train_interval == 0) {
                for (int i = 0; i < env.n_agents; ++i) {
                    const auto ii = static_cast<std::size_t>(i);
                    if (buffers[ii].size() >= warmup) {
                        dqn_train_step(agents[ii], buffers[ii],
                                       static_cast<std::size_t>(learn.batch_size), learn.gamma,
                                       learn.lr);
                    }
                }
            }
            state = std::move(result.state);
            enc = std::move(next_enc);
        }

        MetricsRow row;
        row.seed = seed;
        row.episode = ep;
        row.return_total = ep_return;
        row.collisions = collisions;
        row.steps = steps;
        row.epsilon = eps;
        out.rows.push_back(std::move(row));
    }
    out.policy = std::move(agents.front().online);
    return out;
}

namespace {

void validate_wiring(const ExperimentConfig& config, bool multi_seed) {
    if (config.episodes < 1) throw ConfigError("run.episodes must be >= 1");
    if (config.seeds.empty()) throw ConfigError("seed list must not be empty");
    switch (config.stage) {
        case Stage::TabularSubtask:
            if (config.env.variant == SingleVariant::Joint) {
                throw ConfigError("tabular-subtask needs env.variant goal or avoid");
            }
            break;
        case Stage::TabularJoint:
            if (config.init_qtable) {
                for (std::uint64_t s : config.seeds) resolve_input_path(*config.init_qtable, s, multi_seed);
            }
            break;
        case Stage::VdnPretrain:
            if (!config.out_weights) throw ConfigError("vdn-pretrain needs an output weights path");
            break;
        case Stage::IdqlScratch:
            break;
        case Stage::IdqlTransfer:
            if (!config.init_weights) throw ConfigError("idql-transfer needs initial weights");
            for (std::uint64_t s : config.seeds) resolve_input_path(*config.init_weights, s, multi_seed);
            break;
    }
}

}  // namespace

std::filesystem::path run_experiment(const ExperimentConfig& config) {
    const bool multi_seed = config.seeds.size() > 1;
    validate_wiring(config, multi_seed);

    const std::string run_id = config.run_id.empty() ? stage_name(config.stage) : config.run_id;
    std::filesystem::path metrics_path =
        config.metrics_path.value_or(config.output_dir / (run_id + ".csv"));
    if (metrics_path.has_parent_path()) std::filesystem::create_directories(metrics_path.parent_path());

    std::vector<std::vector<MetricsRow>> per_seed(config.seeds.size());
    parallel_for(config.seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = config.seeds[k];
        std::vector<MetricsRow> rows;
        switch (config.stage) {
            case Stage::TabularSubtask:
            case Stage::TabularJoint: {
                QTable init;
                const QTable* init_ptr = nullptr;
                if (config.init_qtable) {
                    init = load_qtable(resolve_input_path(*config.init_qtable, seed, multi_seed));
                    init_ptr = &init;
                }
                TabularRunResult result = run_tabular_seed(config, seed, init_ptr);
                if (config.out_qtable) {
                    save_qtable(result.table, path_for_seed(*config.out_qtable, seed, multi_seed));
                }
                rows = std::move(result.rows);
                break;
            }
            case Stage::VdnPretrain: {
                DeepRunOutput result = run_vdn_seed(config, seed);
                save_network(result.policy, path_for_seed(*config.out_weights, seed, multi_seed));
                rows = std::move(result.rows);
                break;
            }
            case Stage::IdqlScratch: {
                DeepRunOutput result = run_idql_seed(config, seed, nullptr);
                if (config.out_weights) {
                    save_network(result.policy, path_for_seed(*config.out_weights, seed, multi_seed));
                }
                rows = std::move(result.rows);
                break;
            }
            case Stage::IdqlTransfer: {
                const DenseNet donor =
                    load_network(resolve_input_path(*config.init_weights, seed, multi_seed));
                DeepRunOutput result = run_idql_seed(config, seed, &donor);
                if (config.out_weights) {
                    save_network(result.policy, path_for_seed(*config.out_weights, seed, multi_seed));
                }
                rows = std::move(result.rows);
                break;
            }
        }
        for (MetricsRow& row : rows) row.run_id = run_id;
        per_seed[k] = std::move(rows);
    });

    std::vector<MetricsRow> all;
    for (const auto& rows : per_seed) all.insert(all.end(), rows.begin(), rows.end());
    write_metrics_csv(metrics_path, all);
    return metrics_path;
}

EvalSummary evaluate_qtable(const QTable& table, const SingleEnvConfig& env, int episodes,
                            std::uint64_t seed) {
    if (episodes < 1) throw ContractError("evaluate_qtable: episodes must be >= 1");
    RandomGen rng(derive_seed(seed, 2));
    EvalSummary summary;
    summary.episodes = episodes;
    for (int ep = 0; ep < episodes; ++ep) {
        SingleEnvConfig cfg = env;
        cfg.seed = derive_seed(seed, 100000 + static_cast<std::uint64_t>(ep));
        auto [state, obs] = reset(cfg);
        bool done = false;
        while (!done) {
            const Action act = select_action(table, state_key(obs), 0.0, rng);
            SingleStepResult r = step(state, act, cfg);
            summary.mean_return += r.reward;
            summary.mean_collisions += r.collided ? 1 : 0;
            state = std::move(r.state);
            obs = r.obs;
            done = r.done;
        }
    }
    summary.mean_return /= episodes;
    summary.mean_collisions /= episodes;
    return summary;
}

EvalSummary evaluate_policies(const std::vector<DenseNet>& policies, const MultiEnvConfig& env,
                              int id_capacity, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw ContractError("evaluate_policies: episodes must be >= 1");
    if (static_cast<int>(policies.size()) != env.n_agents) {
        throw ContractError("evaluate_policies: need one policy per agent");
    }
    EvalSummary summary;
    summary.episodes = episodes;
    for (int ep = 0; ep < episodes; ++ep) {
        MultiEnvConfig cfg = env;
        cfg.seed = derive_seed(seed, 100000 + static_cast<std::uint64_t>(ep));
        auto [state, obs] = reset(cfg);
        while (!state.done) {
            std::vector<Action> acts(static_cast<std::size_t>(cfg.n_agents), Action::Stay);
            for (int i = 0; i < cfg.n_agents; ++i) {
                if (!state.active(i)) continue;
                const auto enc = encode_observation(obs[static_cast<std::size_t>(i)], cfg.layout,
                                                    i, id_capacity);
                acts[static_cast<std::size_t>(i)] = static_cast<Action>(
                    greedy_action(forward(policies[static_cast<std::size_t>(i)], enc)));
            }
            MultiStepResult r = step(state, acts, cfg);
            for (double rew : r.rewards) summary.mean_return += rew;
            summary.mean_collisions += r.collision_events;
            state = std::move(r.state);
            obs = std::move(r.obs);
        }
    }
    summary.mean_return /= episodes;
    summary.mean_collisions /= episodes;
    return summary;
}

}  // namespace srl
