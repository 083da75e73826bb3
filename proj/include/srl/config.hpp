#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srl/env_multi.hpp"
#include "srl/env_single.hpp"

namespace srl {

enum class Stage { TabularSubtask, TabularJoint, VdnPretrain, IdqlScratch, IdqlTransfer };

std::string stage_name(Stage stage);
Stage parse_stage(const std::string& name);

struct EnvSettings {
    int arm_length = 3;
    int arm_width = 2;
    SingleVariant variant = SingleVariant::Joint;
    int max_steps = 0;  // 0: 50 single / 60 multi
    int n_agents = 4;
    double goal_reward = 5.0;
    double collision_penalty_single = -0.2;
    double collision_penalty_multi = -10.0;
    double step_penalty = -0.01;
};

struct LearnSettings {
    double alpha = 0.1;
    double gamma = 0.95;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 0;  // 0: 70% of the run
    double lr = 5e-4;
    int batch_size = 32;
    int buffer_capacity = 50000;
    int target_sync_interval = 200;
    int train_interval = 1;  // environment steps between updates
    int learn_start = 200;   // transitions before the first update
    int id_capacity = 0;     // 0: equal to n_agents
};

// Everything one `run` needs: the stage, both config sections, the seed list,
// and the file wiring filled in by the CLI.
struct ExperimentConfig {
    Stage stage = Stage::TabularJoint;
    EnvSettings env;
    LearnSettings learning;
    int episodes = 500;
    std::vector<std::uint64_t> seeds;  // empty: {1..10}
    std::filesystem::path output_dir = ".";
    std::string run_id;

    std::optional<std::filesystem::path> init_qtable;
    std::optional<std::filesystem::path> out_qtable;
    std::optional<std::filesystem::path> init_weights;
    std::optional<std::filesystem::path> out_weights;
    std::optional<std::filesystem::path> metrics_path;
};

// Flat "section.key = value" text; '#' starts a comment; unknown keys are
// errors. The stage may be set in the file but the CLI subcommand wins.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::vector<std::uint64_t> default_seeds();

SingleEnvConfig make_single_env_config(const ExperimentConfig& config);
MultiEnvConfig make_multi_env_config(const ExperimentConfig& config);

}  // namespace srl
