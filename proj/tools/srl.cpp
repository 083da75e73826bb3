#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srl/harness.hpp"
#include "srl/textio.hpp"
#include "srl/transfer.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string metrics;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool metrics_required) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--seed", args.seed, "override the config's seed list with one seed");
    auto* m = cmd->add_option("--metrics", args.metrics, "metrics CSV output path");
    if (metrics_required) m->required();
}

srl::ExperimentConfig load_with_overrides(const CommonArgs& args, srl::Stage stage) {
    srl::ExperimentConfig config = srl::load_experiment_config(args.config_path);
    config.stage = stage;
    if (args.seed) config.seeds = {static_cast<std::uint64_t>(*args.seed)};
    if (!args.metrics.empty()) config.metrics_path = args.metrics;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"staged RL workbench: task decomposition and CTDE-to-decentralised transfer"};
    app.require_subcommand(1);

    // train-subtask
    CommonArgs sub_args;
    std::string sub_variant;
    std::string sub_out;
    auto* sub = app.add_subcommand("train-subtask", "train a Q-table on one sub-task");
    sub->add_option("--variant", sub_variant, "goal or avoid")
        ->required()
        ->check(CLI::IsMember({"goal", "avoid"}));
    sub->add_option("--out", sub_out, "output Q-table path")->required();
    add_common(sub, sub_args, false);

    // merge
    std::vector<std::string> merge_inputs;
    std::string merge_out;
    auto* merge = app.add_subcommand("merge", "combine sub-task Q-tables into a joint table");
    merge->add_option("--inputs", merge_inputs, "input Q-table files")->required()->expected(-1);
    merge->add_option("--out", merge_out, "output Q-table path")->required();

    // train-joint
    CommonArgs joint_args;
    std::string joint_init, joint_out;
    auto* joint = app.add_subcommand("train-joint", "train on the joint single-agent task");
    joint->add_option("--init", joint_init, "initial Q-table (e.g. the merged table)");
    joint->add_option("--out", joint_out, "output Q-table path");
    add_common(joint, joint_args, true);

    // train-vdn
    CommonArgs vdn_args;
    std::string vdn_out;
    auto* vdn = app.add_subcommand("train-vdn", "CTDE pretraining with the additive mixer");
    vdn->add_option("--out", vdn_out, "output weights path")->required();
    add_common(vdn, vdn_args, true);

    // train-idql
    CommonArgs idql_args;
    std::string idql_init;
    auto* idql = app.add_subcommand("train-idql", "fully decentralised independent learners");
    idql->add_option("--init", idql_init, "pretrained shared policy to replicate");
    add_common(idql, idql_args, true);

    // plot
    std::vector<std::string> plot_inputs;
    int plot_window = 5;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "render learning curves to SVG");
    plot->add_option("--inputs", plot_inputs, "metrics CSV files")->required()->expected(-1);
    plot->add_option("--window", plot_window, "smoothing window (default 5)");
    plot->add_option("--out", plot_out, "output SVG path")->required();

    // eval
    std::string eval_qtable, eval_weights, eval_config;
    int eval_episodes = 100;
    std::optional<std::int64_t> eval_seed;
    auto* eval = app.add_subcommand("eval", "greedy rollouts of a table or policy");
    eval->add_option("--qtable", eval_qtable, "Q-table to evaluate");
    eval->add_option("--weights", eval_weights, "policy weights to evaluate");
    eval->add_option("--config", eval_config, "experiment config file")->required();
    eval->add_option("--episodes", eval_episodes, "rollout episodes (default 100)");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (sub->parsed()) {
            srl::ExperimentConfig config = load_with_overrides(sub_args, srl::Stage::TabularSubtask);
            config.env.variant =
                sub_variant == "goal" ? srl::SingleVariant::GoalOnly : srl::SingleVariant::AvoidOnly;
            config.out_qtable = sub_out;
            if (config.run_id.empty()) config.run_id = "subtask-" + sub_variant;
            const auto path = srl::run_experiment(config);
            std::cerr << "metrics: " << path.string() << "\n";
        } else if (merge->parsed()) {
            std::vector<srl::QTable> tables;
            for (const std::string& in : merge_inputs) tables.push_back(srl::load_qtable(in));
            srl::save_qtable(srl::merge_tables(tables), merge_out);
        } else if (joint->parsed()) {
            srl::ExperimentConfig config = load_with_overrides(joint_args, srl::Stage::TabularJoint);
            config.env.variant = srl::SingleVariant::Joint;
            if (!joint_init.empty()) config.init_qtable = joint_init;
            if (!joint_out.empty()) config.out_qtable = joint_out;
            const auto path = srl::run_experiment(config);
            std::cerr << "metrics: " << path.string() << "\n";
        } else if (vdn->parsed()) {
            srl::ExperimentConfig config = load_with_overrides(vdn_args, srl::Stage::VdnPretrain);
            config.out_weights = vdn_out;
            const auto path = srl::run_experiment(config);
            std::cerr << "metrics: " << path.string() << "\n";
        } else if (idql->parsed()) {
            srl::ExperimentConfig config = load_with_overrides(
                idql_args, idql_init.empty() ? srl::Stage::IdqlScratch : srl::Stage::IdqlTransfer);
            if (!idql_init.empty()) config.init_weights = idql_init;
            const auto path = srl::run_experiment(config);
            std::cerr << "metrics: " << path.string() << "\n";
        } else if (plot->parsed()) {
            std::vector<std::filesystem::path> inputs(plot_inputs.begin(), plot_inputs.end());
            srl::emit_plot(inputs, plot_window, plot_out);
        } else if (eval->parsed()) {
            if (eval_qtable.empty() == eval_weights.empty()) {
                std::cerr << "eval: exactly one of --qtable / --weights is required\n";
                return 1;
            }
            srl::ExperimentConfig config = srl::load_experiment_config(eval_config);
            const std::uint64_t seed =
                eval_seed ? static_cast<std::uint64_t>(*eval_seed) : config.seeds.front();
            srl::EvalSummary summary;
            if (!eval_qtable.empty()) {
                summary = srl::evaluate_qtable(srl::load_qtable(eval_qtable),
                                               srl::make_single_env_config(config), eval_episodes,
                                               seed);
            } else {
                const srl::MultiEnvConfig env = srl::make_multi_env_config(config);
                std::vector<srl::DqnAgent> agents = srl::build_transfer(eval_weights, env);
                std::vector<srl::DenseNet> policies;
                for (srl::DqnAgent& a : agents) policies.push_back(std::move(a.online));
                const int id_cap = policies.front().input_dim() - srl::observation_dim(0);
                summary = srl::evaluate_policies(policies, env, id_cap, eval_episodes, seed);
            }
            std::cout << "episodes " << summary.episodes << " mean_return "
                      << srl::format_double(summary.mean_return) << " mean_collisions "
                      << srl::format_double(summary.mean_collisions) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
