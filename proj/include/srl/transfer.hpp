#pragma once

#include <filesystem>
#include <vector>

#include "srl/deeprl.hpp"
#include "srl/env_multi.hpp"
#include "srl/neuralnet.hpp"

namespace srl {

// Widens the first layer with zero-valued columns for the new trailing input
// coordinates. Feeding the padded coordinates zeros reproduces the original
// outputs exactly; training afterwards is what fills the new columns in.
DenseNet pad_network(const DenseNet& net, int new_input_dim);

// n independent deep copies; mutating one never touches another.
std::vector<DenseNet> replicate_policy(const DenseNet& net, int n);

// Loads a shared policy, pads it to the target environment's observation size
// if needed, and replicates it into n_agents independent agents with freshly
// synced targets. The callers own the (empty) replay buffers.
std::vector<DqnAgent> build_transfer(const std::filesystem::path& weights_path,
                                     const MultiEnvConfig& target_env);

}  // namespace srl
