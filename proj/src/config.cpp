#include "srl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "srl/errors.hpp"
#include "srl/textio.hpp"

namespace srl {

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::TabularSubtask: return "tabular-subtask";
        case Stage::TabularJoint: return "tabular-joint";
        case Stage::VdnPretrain: return "vdn-pretrain";
        case Stage::IdqlScratch: return "idql-scratch";
        case Stage::IdqlTransfer: return "idql-transfer";
    }
    return "?";
}

Stage parse_stage(const std::string& name) {
    if (name == "tabular-subtask") return Stage::TabularSubtask;
    if (name == "tabular-joint") return Stage::TabularJoint;
    if (name == "vdn-pretrain") return Stage::VdnPretrain;
    if (name == "idql-scratch") return Stage::IdqlScratch;
    if (name == "idql-transfer") return Stage::IdqlTransfer;
    throw ConfigError("unknown stage '" + name + "'");
}

std::vector<std::uint64_t> default_seeds() {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
    return seeds;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "stage",
    "env.arm_length",
    "env.arm_width",
    "env.variant",
    "env.max_steps",
    "env.seed",
    "env.n_agents",
    "env.goal_reward",
    "env.collision_penalty",
    "env.step_penalty",
    "learning.alpha",
    "learning.gamma",
    "learning.epsilon_start",
    "learning.epsilon_end",
    "learning.epsilon_decay_episodes",
    "learning.lr",
    "learning.batch_size",
    "learning.buffer_capacity",
    "learning.target_sync_interval",
    "learning.train_interval",
    "learning.learn_start",
    "learning.id_capacity",
    "run.episodes",
    "run.seeds",
    "run.output_dir",
    "run.id",
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

SingleVariant parse_variant(const std::string& text, const std::string& where) {
    if (text == "goal") return SingleVariant::GoalOnly;
    if (text == "avoid") return SingleVariant::AvoidOnly;
    if (text == "joint") return SingleVariant::Joint;
    throw ConfigError(where + ": env.variant must be goal, avoid or joint, got '" + text + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& where) {
    std::vector<std::uint64_t> seeds;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(where + ": empty seed in list");
        seeds.push_back(static_cast<std::uint64_t>(parse_int(item, where)));
    }
    if (seeds.empty()) throw ConfigError(where + ": run.seeds must not be empty");
    return seeds;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot read config file " + path.string());

    ExperimentConfig config;
    bool saw_seed = false;
    bool saw_seed_list = false;

    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");

        if (key == "stage") config.stage = parse_stage(value);
        else if (key == "env.arm_length") config.env.arm_length = static_cast<int>(parse_int(value, where));
        else if (key == "env.arm_width") config.env.arm_width = static_cast<int>(parse_int(value, where));
        else if (key == "env.variant") config.env.variant = parse_variant(value, where);
        else if (key == "env.max_steps") config.env.max_steps = static_cast<int>(parse_int(value, where));
        else if (key == "env.seed") {
            config.seeds = {static_cast<std::uint64_t>(parse_int(value, where))};
            saw_seed = true;
        } else if (key == "env.n_agents") config.env.n_agents = static_cast<int>(parse_int(value, where));
        else if (key == "env.goal_reward") config.env.goal_reward = parse_double(value, where);
        else if (key == "env.collision_penalty") {
            config.env.collision_penalty_single = parse_double(value, where);
            config.env.collision_penalty_multi = config.env.collision_penalty_single;
        } else if (key == "env.step_penalty") config.env.step_penalty = parse_double(value, where);
        else if (key == "learning.alpha") config.learning.alpha = parse_double(value, where);
        else if (key == "learning.gamma") config.learning.gamma = parse_double(value, where);
        else if (key == "learning.epsilon_start") config.learning.epsilon_start = parse_double(value, where);
        else if (key == "learning.epsilon_end") config.learning.epsilon_end = parse_double(value, where);
        else if (key == "learning.epsilon_decay_episodes")
            config.learning.epsilon_decay_episodes = static_cast<int>(parse_int(value, where));
        else if (key == "learning.lr") config.learning.lr = parse_double(value, where);
        else if (key == "learning.batch_size") config.learning.batch_size = static_cast<int>(parse_int(value, where));
        else if (key == "learning.buffer_capacity")
            config.learning.buffer_capacity = static_cast<int>(parse_int(value, where));
        else if (key == "learning.target_sync_interval")
            config.learning.target_sync_interval = static_cast<int>(parse_int(value, where));
        else if (key == "learning.train_interval")
            config.learning.train_interval = static_cast<int>(parse_int(value, where));
        else if (key == "learning.learn_start")
            config.learning.learn_start = static_cast<int>(parse_int(value, where));
        else if (key == "learning.id_capacity")
            config.learning.id_capacity = static_cast<int>(parse_int(value, where));
        else if (key == "run.episodes") config.episodes = static_cast<int>(parse_int(value, where));
        else if (key == "run.seeds") {
            config.seeds = parse_seed_list(value, where);
            saw_seed_list = true;
        } else if (key == "run.output_dir") config.output_dir = value;
        else if (key == "run.id") config.run_id = value;

        if (saw_seed && saw_seed_list) {
            throw ConfigError(where + ": env.seed and run.seeds cannot both be set");
        }
    }

    if (config.seeds.empty()) config.seeds = default_seeds();
    return config;
}

SingleEnvConfig make_single_env_config(const ExperimentConfig& config) {
    SingleEnvConfig env;
    env.variant = config.env.variant;
    env.layout = build_junction_layout(config.env.arm_length, config.env.arm_width);
    env.max_steps = config.env.max_steps > 0 ? config.env.max_steps : 50;
    env.goal_reward = config.env.goal_reward;
    env.collision_penalty = config.env.collision_penalty_single;
    return env;
}

MultiEnvConfig make_multi_env_config(const ExperimentConfig& config) {
    MultiEnvConfig env;
    env.n_agents = config.env.n_agents;
    env.layout = build_junction_layout(config.env.arm_length, config.env.arm_width);
    env.max_steps = config.env.max_steps > 0 ? config.env.max_steps : 60;
    env.collision_penalty = config.env.collision_penalty_multi;
    env.step_penalty = config.env.step_penalty;
    return env;
}

}  // namespace srl
