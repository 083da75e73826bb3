#include "srl/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "srl/errors.hpp"
#include "srl/textio.hpp"

namespace srl {

void q_update(QTable& table, const std::string& s, Action a, double r, const std::string& s_next,
              bool done, const LearningParams& params) {
    if (!std::isfinite(r)) throw ContractError("q_update: non-finite reward");
    double bootstrap = 0.0;
    if (!done) {
        const auto next = table.values(s_next);
        bootstrap = *std::max_element(next.begin(), next.end());
    }
    auto& row = table.entries[s];  // inserts zeros on first visit
    double& q = row[static_cast<std::size_t>(a)];
    q = (1.0 - params.alpha) * q + params.alpha * (r + params.gamma * bootstrap);
}

Action select_action(const QTable& table, const std::string& s, double epsilon, RandomGen& rng) {
    if (epsilon > 0.0 && rng.uniform_real() < epsilon) {
        return static_cast<Action>(rng.uniform_int(kNumActions));
    }
    const auto values = table.values(s);
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return static_cast<Action>(best);
}

QTable merge_tables(const std::vector<QTable>& tables) {
    if (tables.empty()) throw ContractError("merge_tables: empty input");

    std::map<std::string, std::vector<std::array<double, kNumActions>>> gathered;
    for (const QTable& t : tables) {
        for (const auto& [key, vec] : t.entries) gathered[key].push_back(vec);
    }

    QTable out;
    out.variant_tag = tables.size() == 1 ? tables.front().variant_tag : "merged";
    for (const QTable& t : tables) out.episodes += t.episodes;
    for (auto& [key, vecs] : gathered) {
        std::array<double, kNumActions> mean{};
        for (std::size_t a = 0; a < kNumActions; ++a) {
            // Sorting the contributions before summing makes the mean exact
            // under any permutation of the input tables.
            std::vector<double> vals;
            vals.reserve(vecs.size());
            for (const auto& v : vecs) vals.push_back(v[a]);
            std::sort(vals.begin(), vals.end());
            double sum = 0.0;
            for (double v : vals) sum += v;
            mean[a] = sum / static_cast<double>(vals.size());
        }
        out.entries.emplace(key, mean);
    }
    return out;
}

double epsilon_at(const LearningParams& params, int episode, int total_episodes) {
    int decay = params.epsilon_decay_episodes;
    if (decay <= 0) decay = std::max(1, static_cast<int>(0.7 * total_episodes));
    const double t = std::min(1.0, static_cast<double>(episode) / decay);
    return params.epsilon_start + t * (params.epsilon_end - params.epsilon_start);
}

TabularRunResult train_tabular(const SingleEnvConfig& env_config, const LearningParams& params,
                               int episodes, const QTable* init) {
    if (episodes < 1) throw ContractError("train_tabular: episodes must be >= 1");

    TabularRunResult result;
    if (init) result.table = *init;
    if (result.table.variant_tag.empty()) {
        switch (env_config.variant) {
            case SingleVariant::GoalOnly: result.table.variant_tag = "goal"; break;
            case SingleVariant::AvoidOnly: result.table.variant_tag = "avoid"; break;
            case SingleVariant::Joint: result.table.variant_tag = "joint"; break;
        }
    }
    RandomGen explore(derive_seed(env_config.seed, 1));

    for (int ep = 0; ep < episodes; ++ep) {
        const double eps = epsilon_at(params, ep, episodes);
        SingleEnvConfig cfg = env_config;
        cfg.seed = derive_seed(env_config.seed, 100000 + static_cast<std::uint64_t>(ep));

        auto [state, obs] = reset(cfg);
        std::string key = state_key(obs);
        double ep_return = 0.0;
        int collisions = 0;
        int steps = 0;
        bool done = false;
        while (!done) {
            const Action act = select_action(result.table, key, eps, explore);
            const SingleStepResult r = step(state, act, cfg);
            const std::string next_key = state_key(r.obs);
            q_update(result.table, key, act, r.reward, next_key, r.done, params);
            ep_return += r.reward;
            collisions += r.collided ? 1 : 0;
            ++steps;
            state = r.state;
            key = next_key;
            done = r.done;
        }

        MetricsRow row;
        row.seed = env_config.seed;
        row.episode = ep;
        row.return_total = ep_return;
        row.collisions = collisions;
        row.steps = steps;
        row.epsilon = eps;
        result.rows.push_back(std::move(row));
    }
    result.table.episodes += episodes;
    return result;
}

void save_qtable(const QTable& table, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write Q-table file " + path.string());
    file << "SRLQT 1\n";
    file << "actions " << kNumActions << "\n";
    for (const auto& [key, values] : table.entries) {  // std::map: sorted keys
        file << key;
        for (double v : values) file << ' ' << format_double(v);
        file << '\n';
    }
}

QTable load_qtable(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot read Q-table file " + path.string());

    std::string line;
    if (!std::getline(file, line) || line != "SRLQT 1") {
        throw ParseError(path.string() + ":1: expected 'SRLQT 1'");
    }
    if (!std::getline(file, line) || line != "actions " + std::to_string(kNumActions)) {
        throw ParseError(path.string() + ":2: expected 'actions " + std::to_string(kNumActions) + "'");
    }

    QTable table;
    int line_no = 2;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::istringstream in(line);
        std::string key;
        in >> key;
        std::array<double, kNumActions> values{};
        for (std::size_t a = 0; a < kNumActions; ++a) {
            std::string tok;
            if (!(in >> tok)) throw ParseError(where + ": expected 5 action values");
            values[a] = parse_double(tok, where);
        }
        std::string extra;
        if (in >> extra) throw ParseError(where + ": trailing data '" + extra + "'");
        table.entries[key] = values;
    }
    return table;
}

}  // namespace srl
