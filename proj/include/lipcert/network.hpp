#pragma once

#include <string>
#include <vector>

#include "lipcert/activations.hpp"
#include "lipcert/linalg.hpp"

namespace lipcert {

struct Layer {
    Matrix weight;            // N_i x N_{i-1}
    std::vector<double> bias; // length N_i
    VectorActivation activation;
};

// Feed-forward chain x -> R_m(W_m(...R_1(W_1 x + b_1)...) + b_m). Hidden
// activations (all but the last) are the ones whose averagedness constants
// enter the certificates; the output activation only contributes
// nonexpansiveness.
struct Network {
    int input_dim = 0;
    std::vector<Layer> layers;

    int depth() const noexcept { return static_cast<int>(layers.size()); }
    int output_dim() const { return layers.back().weight.rows; }

    std::vector<double> hidden_alphas() const;
    bool hidden_separable() const;
    bool all_separable() const;

    // dimension chaining, bias lengths, finite weights, alphas in [0, 1]
    void validate() const;
};

std::vector<double> forward(const Network& net, const std::vector<double>& x);

// lipnet v1 text format; parse failures carry the offending line number
Network parse_network(const std::string& document);

// round-trips through parse_network with entries preserved to 17
// significant digits
std::string serialize_network(const Network& net);

} // namespace lipcert
