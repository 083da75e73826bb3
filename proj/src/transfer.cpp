#include "srl/transfer.hpp"

#include <algorithm>
#include <string>

#include "srl/errors.hpp"

namespace srl {

DenseNet pad_network(const DenseNet& net, int new_input_dim) {
    if (net.layers.empty()) throw ContractError("pad_network: empty network");
    const int old_dim = net.input_dim();
    if (new_input_dim < old_dim) {
        throw ContractError("pad_network: cannot shrink input from " + std::to_string(old_dim) +
                            " to " + std::to_string(new_input_dim));
    }
    if (new_input_dim == old_dim) return net;

    DenseNet padded = net;
    Layer& first = padded.layers.front();
    std::vector<double> widened(static_cast<std::size_t>(first.out) *
                                    static_cast<std::size_t>(new_input_dim),
                                0.0);
    for (int o = 0; o < first.out; ++o) {
        std::copy_n(first.weights.begin() + static_cast<std::ptrdiff_t>(o) * old_dim, old_dim,
                    widened.begin() + static_cast<std::ptrdiff_t>(o) * new_input_dim);
    }
    first.in = new_input_dim;
    first.weights = std::move(widened);
    return padded;
}

std::vector<DenseNet> replicate_policy(const DenseNet& net, int n) {
    if (n < 1) throw ContractError("replicate_policy: n must be >= 1");
    return std::vector<DenseNet>(static_cast<std::size_t>(n), net);
}

std::vector<DqnAgent> build_transfer(const std::filesystem::path& weights_path,
                                     const MultiEnvConfig& target_env) {
    DenseNet policy = load_network(weights_path);

    // Identity slots beyond the base feature block; the pretraining stage
    // normally sizes them for the larger team already.
    const int base_dim = observation_dim(0);
    const int loaded_capacity = policy.input_dim() - base_dim;
    if (loaded_capacity < 0 || policy.output_dim() != kNumActions) {
        throw IoError("build_transfer: " + weights_path.string() + " has input dim " +
                      std::to_string(policy.input_dim()) + " / output dim " +
                      std::to_string(policy.output_dim()) + "; expected input >= " +
                      std::to_string(base_dim) + " and output " + std::to_string(kNumActions));
    }
    const int needed_dim = observation_dim(std::max(loaded_capacity, target_env.n_agents));
    if (needed_dim > policy.input_dim()) policy = pad_network(policy, needed_dim);

    std::vector<DqnAgent> agents;
    agents.reserve(static_cast<std::size_t>(target_env.n_agents));
    for (DenseNet& copy : replicate_policy(policy, target_env.n_agents)) {
        agents.push_back(make_agent(std::move(copy)));
    }
    return agents;
}

}  // namespace srl
