#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srl/env_single.hpp"
#include "srl/metrics.hpp"
#include "srl/rng.hpp"

namespace srl {

// Action-value table over canonical state keys. Unvisited states read as zero
// vectors. std::map keeps entries sorted, so serialisation is canonical.
struct QTable {
    std::map<std::string, std::array<double, kNumActions>> entries;
    std::string variant_tag;
    std::int64_t episodes = 0;

    std::array<double, kNumActions> values(const std::string& key) const {
        auto it = entries.find(key);
        return it != entries.end() ? it->second : std::array<double, kNumActions>{};
    }
};

struct LearningParams {
    double alpha = 0.1;
    double gamma = 0.95;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 0;  // 0: decay over 70% of the run
};

// Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')), bootstrap
// term dropped on terminal transitions.
void q_update(QTable& table, const std::string& s, Action a, double r, const std::string& s_next,
              bool done, const LearningParams& params);

// Epsilon-greedy with lowest-index argmax tie-breaking.
Action select_action(const QTable& table, const std::string& s, double epsilon, RandomGen& rng);

// Union of all tables; keys present in several tables store the element-wise
// mean of their vectors. Independent of input order.
QTable merge_tables(const std::vector<QTable>& tables);

double epsilon_at(const LearningParams& params, int episode, int total_episodes);

struct TabularRunResult {
    QTable table;
    std::vector<MetricsRow> rows;
};

// Seeded episode loop over the single-agent environment; starts from `init`
// when given (how a merged table is fine-tuned on the joint task).
TabularRunResult train_tabular(const SingleEnvConfig& env_config, const LearningParams& params,
                               int episodes, const QTable* init = nullptr);

// Text format: "SRLQT 1" / "actions 5" / one sorted line per entry.
void save_qtable(const QTable& table, const std::filesystem::path& path);
QTable load_qtable(const std::filesystem::path& path);

}  // namespace srl
