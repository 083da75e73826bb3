#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srl/config.hpp"
#include "srl/deeprl.hpp"
#include "srl/metrics.hpp"
#include "srl/tabular.hpp"

namespace srl {

// Element i is the mean of the last min(i+1, window) values, so the output
// keeps the input's length and leading elements average partial windows.
std::vector<double> moving_average(const std::vector<double>& series, int window = 5);

// First index whose trailing `window`-mean reaches the threshold; requires a
// full window, absent when the level is never reached.
std::optional<int> episodes_to_threshold(const std::vector<double>& series, double threshold,
                                         int window = 50);

// Executes the configured stage once per seed (seeds may run concurrently, up
// to SRL_THREADS) and writes one metrics file; per-seed artifacts (Q-tables,
// weights) land next to the requested output path with a .seedN infix when the
// run covers several seeds.
std::filesystem::path run_experiment(const ExperimentConfig& config);

// Per-seed runners, also used directly by the acceptance suite.
TabularRunResult run_tabular_seed(const ExperimentConfig& config, std::uint64_t seed,
                                  const QTable* init);

struct DeepRunOutput {
    std::vector<MetricsRow> rows;
    DenseNet policy;  // the shared net (VDN) or agent 0's net (IDQL)
};
DeepRunOutput run_vdn_seed(const ExperimentConfig& config, std::uint64_t seed);
DeepRunOutput run_idql_seed(const ExperimentConfig& config, std::uint64_t seed,
                            const DenseNet* init_policy);

struct EvalSummary {
    double mean_return = 0.0;
    double mean_collisions = 0.0;
    int episodes = 0;
};
EvalSummary evaluate_qtable(const QTable& table, const SingleEnvConfig& env, int episodes,
                            std::uint64_t seed);
EvalSummary evaluate_policies(const std::vector<DenseNet>& policies, const MultiEnvConfig& env,
                              int id_capacity, int episodes, std::uint64_t seed);

// "out/vdn.wts", seed 3 -> "out/vdn.seed3.wts" (only when multi_seed).
std::filesystem::path path_for_seed(const std::filesystem::path& path, std::uint64_t seed,
                                    bool multi_seed);

// SRL_THREADS caps seed-level parallelism; defaults to the task count.
int thread_cap(std::size_t n_tasks);

// Runs fn(index, seeds[index]) for every seed, up to thread_cap(n) at a time;
// the first exception thrown by any task is rethrown on the caller's thread.
void parallel_seeds(const std::vector<std::uint64_t>& seeds,
                    const std::function<void(std::size_t, std::uint64_t)>& fn);

// Learning-curve figure: one mean-over-seeds polyline per run_id with a
// min-max band across seeds. Deterministic bytes for identical inputs.
std::string render_plot_svg(const std::vector<MetricsRow>& rows, int window);
void emit_plot(const std::vector<std::filesystem::path>& inputs, int window,
               const std::filesystem::path& output);

}  // namespace srl
