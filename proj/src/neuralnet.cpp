#include "srl/neuralnet.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "srl/errors.hpp"
#include "srl/rng.hpp"
#include "srl/textio.hpp"

namespace srl {

DenseNet init_network(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ContractError("init_network: need at least 2 dims");
    for (int d : dims) {
        if (d < 1) throw ContractError("init_network: dims must be positive");
    }
    RandomGen rng(seed);
    DenseNet net;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer layer;
        layer.in = dims[k];
        layer.out = dims[k + 1];
        const double bound = std::sqrt(6.0 / (layer.in + layer.out));
        layer.weights.resize(static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out));
        for (double& w : layer.weights) w = rng.uniform_range(-bound, bound);
        layer.biases.assign(static_cast<std::size_t>(layer.out), 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

// Affine pass for one layer: z = W x + b.
std::vector<double> affine(const Layer& layer, const std::vector<double>& x) {
    std::vector<double> z(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
        double acc = layer.biases[static_cast<std::size_t>(o)];
        const double* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        z[static_cast<std::size_t>(o)] = acc;
    }
    return z;
}

std::vector<double> relu(std::vector<double> z) {
    for (double& v : z) v = v > 0.0 ? v : 0.0;
    return z;
}

}  // namespace

std::vector<double> forward(const DenseNet& net, std::span<const double> input) {
    if (net.layers.empty()) throw ContractError("forward: empty network");
    if (static_cast<int>(input.size()) != net.input_dim()) {
        throw ContractError("forward: input size " + std::to_string(input.size()) +
                            " != network input dim " + std::to_string(net.input_dim()));
    }
    std::vector<double> x(input.begin(), input.end());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        x = affine(net.layers[k], x);
        if (k + 1 < net.layers.size()) x = relu(std::move(x));
    }
    return x;
}

Gradients zero_gradients(const DenseNet& net) {
    Gradients g;
    for (const Layer& layer : net.layers) {
        Layer zero;
        zero.in = layer.in;
        zero.out = layer.out;
        zero.weights.assign(layer.weights.size(), 0.0);
        zero.biases.assign(layer.biases.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    return g;
}

Gradients backward(const DenseNet& net, std::span<const double> input,
                   std::span<const double> output_grad) {
    if (net.layers.empty()) throw ContractError("backward: empty network");
    if (static_cast<int>(input.size()) != net.input_dim() ||
        static_cast<int>(output_grad.size()) != net.output_dim()) {
        throw ContractError("backward: shape mismatch");
    }

    // Forward pass keeping pre-activations and activations per layer.
    const std::size_t n_layers = net.layers.size();
    std::vector<std::vector<double>> acts(n_layers + 1);
    std::vector<std::vector<double>> pre(n_layers);
    acts[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < n_layers; ++k) {
        pre[k] = affine(net.layers[k], acts[k]);
        acts[k + 1] = (k + 1 < n_layers) ? relu(pre[k]) : pre[k];
    }

    Gradients grads = zero_gradients(net);
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t k = n_layers; k-- > 0;) {
        const Layer& layer = net.layers[k];
        Layer& g = grads.layers[k];
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            g.biases[static_cast<std::size_t>(o)] = d;
            double* grow = g.weights.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) grow[i] = d * acts[k][static_cast<std::size_t>(i)];
        }
        if (k == 0) break;
        std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
        for (int i = 0; i < layer.in; ++i) {
            double acc = 0.0;
            for (int o = 0; o < layer.out; ++o) {
                acc += layer.weights[static_cast<std::size_t>(o) * layer.in + i] *
                       delta[static_cast<std::size_t>(o)];
            }
            // rectifier derivative on the previous pre-activation
            prev[static_cast<std::size_t>(i)] = pre[k - 1][static_cast<std::size_t>(i)] > 0.0 ? acc : 0.0;
        }
        delta = std::move(prev);
    }
    return grads;
}

void accumulate(Gradients& into, const Gradients& delta) {
    if (into.layers.size() != delta.layers.size()) throw ContractError("accumulate: shape mismatch");
    for (std::size_t k = 0; k < into.layers.size(); ++k) {
        Layer& a = into.layers[k];
        const Layer& b = delta.layers[k];
        if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) {
            throw ContractError("accumulate: layer shape mismatch");
        }
        for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights[i] += b.weights[i];
        for (std::size_t i = 0; i < a.biases.size(); ++i) a.biases[i] += b.biases[i];
    }
}

double gradient_norm(const Gradients& grads) {
    double sq = 0.0;
    for (const Layer& layer : grads.layers) {
        for (double w : layer.weights) sq += w * w;
        for (double b : layer.biases) sq += b * b;
    }
    return std::sqrt(sq);
}

void optimizer_step(DenseNet& net, const Gradients& grads, double lr) {
    if (lr < 0.0) throw ContractError("optimizer_step: lr must be non-negative");
    if (net.layers.size() != grads.layers.size()) throw ContractError("optimizer_step: shape mismatch");

    const double norm = gradient_norm(grads);
    if (!std::isfinite(norm)) throw ContractError("optimizer_step: non-finite gradients");
    const double scale = norm > kGradClipNorm ? kGradClipNorm / norm : 1.0;

    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& layer = net.layers[k];
        const Layer& g = grads.layers[k];
        if (layer.weights.size() != g.weights.size() || layer.biases.size() != g.biases.size()) {
            throw ContractError("optimizer_step: layer shape mismatch");
        }
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weights[i] -= lr * scale * g.weights[i];
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
            layer.biases[i] -= lr * scale * g.biases[i];
        }
    }
}

void save_network(const DenseNet& net, const std::filesystem::path& path) {
    if (net.layers.empty()) throw ContractError("save_network: empty network");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write weights file " + path.string());
    file << "SRLW 1\n";
    file << "dims";
    file << ' ' << net.layers.front().in;
    for (const Layer& layer : net.layers) file << ' ' << layer.out;
    file << '\n';
    for (const Layer& layer : net.layers) {
        file << 'W';
        for (double w : layer.weights) file << ' ' << format_double(w);
        file << "\nb";
        for (double b : layer.biases) file << ' ' << format_double(b);
        file << '\n';
    }
}

DenseNet load_network(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot read weights file " + path.string());

    std::string line;
    if (!std::getline(file, line) || line != "SRLW 1") {
        throw ParseError(path.string() + ":1: expected 'SRLW 1'");
    }
    if (!std::getline(file, line) || line.rfind("dims ", 0) != 0) {
        throw ParseError(path.string() + ":2: expected 'dims ...'");
    }
    std::istringstream dims_in(line.substr(5));
    std::vector<int> dims;
    std::string tok;
    while (dims_in >> tok) dims.push_back(static_cast<int>(parse_int(tok, path.string() + ":2")));
    if (dims.size() < 2) throw ParseError(path.string() + ":2: need at least 2 dims");

    DenseNet net;
    int line_no = 2;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer layer;
        layer.in = dims[k];
        layer.out = dims[k + 1];
        const std::size_t n_weights =
            static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out);

        ++line_no;
        std::string where = path.string() + ":" + std::to_string(line_no);
        if (!std::getline(file, line) || line.rfind("W ", 0) != 0) {
            throw ParseError(where + ": expected 'W ...' line");
        }
        std::istringstream w_in(line.substr(2));
        while (w_in >> tok) layer.weights.push_back(parse_double(tok, where));
        if (layer.weights.size() != n_weights) {
            throw ParseError(where + ": expected " + std::to_string(n_weights) + " weights, got " +
                             std::to_string(layer.weights.size()));
        }

        ++line_no;
        where = path.string() + ":" + std::to_string(line_no);
        if (!std::getline(file, line) || line.rfind("b ", 0) != 0) {
            throw ParseError(where + ": expected 'b ...' line");
        }
        std::istringstream b_in(line.substr(2));
        while (b_in >> tok) layer.biases.push_back(parse_double(tok, where));
        if (layer.biases.size() != static_cast<std::size_t>(layer.out)) {
            throw ParseError(where + ": expected " + std::to_string(layer.out) + " biases, got " +
                             std::to_string(layer.biases.size()));
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace srl
