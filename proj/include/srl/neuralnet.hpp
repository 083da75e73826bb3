#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace srl {

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // out

    bool operator==(const Layer&) const = default;
};

// Plain dense stack: affine + rectified-linear hiddens, identity output.
struct DenseNet {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }

    bool operator==(const DenseNet&) const = default;
};

// Parameter-shaped gradient accumulator.
struct Gradients {
    std::vector<Layer> layers;
};

inline constexpr double kGradClipNorm = 10.0;

// Fan-based uniform weights in [-sqrt(6/(in+out)), +sqrt(6/(in+out))], zero
// biases. Same seed, same parameters, bit for bit.
DenseNet init_network(const std::vector<int>& dims, std::uint64_t seed);

std::vector<double> forward(const DenseNet& net, std::span<const double> input);

// Exact reverse-mode gradients of output . output_grad w.r.t. every parameter.
Gradients backward(const DenseNet& net, std::span<const double> input,
                   std::span<const double> output_grad);

Gradients zero_gradients(const DenseNet& net);
void accumulate(Gradients& into, const Gradients& delta);
double gradient_norm(const Gradients& grads);

// Plain gradient descent with global-norm clipping at kGradClipNorm.
void optimizer_step(DenseNet& net, const Gradients& grads, double lr);

// Text format: "SRLW 1" / "dims d0 d1 ... dk" / per layer a W line and a b line.
void save_network(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_network(const std::filesystem::path& path);

}  // namespace srl
