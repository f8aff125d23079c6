#pragma once

// Test-only oracles and generators. Everything here is independent of the
// library code paths it is used to check.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lipcert/activations.hpp"
#include "lipcert/certificates.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/network.hpp"
#include "lipcert/rng.hpp"

namespace testsupport {

inline Eigen::MatrixXd to_eigen(const lipcert::Matrix& m)
{
    Eigen::MatrixXd out(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            out(r, c) = m.at(r, c);
    return out;
}

// sqrt of the top eigenvalue of A^T A via Eigen's symmetric solver
inline double spectral_oracle(const lipcert::Matrix& m)
{
    const Eigen::MatrixXd a = to_eigen(m);
    const Eigen::MatrixXd gram = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

// max over the extreme points +-e_j / w_j of the weighted l1 ball
inline double l1_induced_oracle(const lipcert::Matrix& m, const lipcert::NormSpec& in,
                                const lipcert::NormSpec& out)
{
    double best = 0.0;
    std::vector<double> col(static_cast<std::size_t>(m.rows));
    for (int j = 0; j < m.cols; ++j) {
        for (int k = 0; k < m.rows; ++k)
            col[static_cast<std::size_t>(k)] = m.at(k, j) / in.weight(j);
        best = std::max(best, lipcert::weighted_norm(col.data(), m.rows, out));
    }
    return best;
}

inline lipcert::Matrix random_matrix(lipcert::CounterRng& rng, int rows, int cols)
{
    lipcert::Matrix m(rows, cols);
    for (double& x : m.a)
        x = rng.next_normal();
    return m;
}

// Layered net whose activations span any averagedness constant: the relaxed
// ReLU family leaky_relu(lambda = 2 alpha) has difference quotients filling
// exactly [1 - 2 alpha, 1].
inline lipcert::Network leaky_net(const std::vector<int>& dims,
                                  const std::vector<double>& alphas, lipcert::CounterRng& rng,
                                  bool with_bias = true)
{
    const int m = static_cast<int>(dims.size()) - 1;
    lipcert::Network net;
    net.input_dim = dims.front();
    for (int i = 1; i <= m; ++i) {
        lipcert::Layer layer;
        layer.weight = random_matrix(rng, dims[static_cast<std::size_t>(i)],
                                     dims[static_cast<std::size_t>(i - 1)]);
        layer.bias.assign(static_cast<std::size_t>(dims[static_cast<std::size_t>(i)]), 0.0);
        if (with_bias)
            for (double& b : layer.bias)
                b = rng.next_normal();
        const double alpha = i <= m - 1 ? alphas[static_cast<std::size_t>(i - 1)] : 0.5;
        layer.activation = lipcert::VectorActivation::make_separable(
            lipcert::builtin("leaky_relu", {{"lambda", 2.0 * alpha}}),
            dims[static_cast<std::size_t>(i)]);
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

inline lipcert::Network random_leaky_net(lipcert::CounterRng& rng, int max_m, int max_dim,
                                         std::vector<double>* alphas_out = nullptr)
{
    const int m = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_m));
    std::vector<int> dims;
    for (int i = 0; i <= m; ++i)
        dims.push_back(1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_dim)));
    std::vector<double> alphas;
    for (int i = 0; i < m - 1; ++i)
        alphas.push_back(rng.next_unit());
    if (alphas_out)
        *alphas_out = alphas;
    return leaky_net(dims, alphas, rng);
}

// Full Assumption check: every pair of complete paths into the same output
// coordinate has a nonnegative product of weight-entry chains.
inline bool mu_product_oracle(const lipcert::Network& net)
{
    const int m = net.depth();
    std::vector<int> dims;
    dims.push_back(net.input_dim);
    for (const lipcert::Layer& layer : net.layers)
        dims.push_back(layer.weight.rows);

    for (int km = 0; km < dims[static_cast<std::size_t>(m)]; ++km) {
        int sign_seen = 0;
        std::vector<int> idx(static_cast<std::size_t>(m), 0); // k_0 .. k_{m-1}
        while (true) {
            double mu = net.layers[static_cast<std::size_t>(m - 1)].weight.at(
                km, idx[static_cast<std::size_t>(m - 1)]);
            for (int i = 0; i + 1 < m; ++i)
                mu *= net.layers[static_cast<std::size_t>(i)].weight.at(
                    idx[static_cast<std::size_t>(i + 1)], idx[static_cast<std::size_t>(i)]);
            if (mu != 0.0) {
                const int sign = mu > 0.0 ? 1 : -1;
                if (sign_seen == 0)
                    sign_seen = sign;
                else if (sign_seen != sign)
                    return false;
            }
            int level = 0;
            while (level < m) {
                if (++idx[static_cast<std::size_t>(level)] < dims[static_cast<std::size_t>(level)])
                    break;
                idx[static_cast<std::size_t>(level)] = 0;
                ++level;
            }
            if (level == m)
                break;
        }
    }
    return true;
}

// imposes w_{i,k,l} = chi_{i,k} chi_{i-1,l} |w_{i,k,l}| on random magnitudes
inline lipcert::Network sign_factorized_net(const std::vector<int>& dims,
                                            lipcert::CounterRng& rng)
{
    const int m = static_cast<int>(dims.size()) - 1;
    std::vector<std::vector<double>> chi;
    chi.emplace_back(static_cast<std::size_t>(dims[0]), rng.next_u64() & 1 ? 1.0 : -1.0);
    for (int i = 1; i <= m; ++i) {
        std::vector<double> layer;
        for (int k = 0; k < dims[static_cast<std::size_t>(i)]; ++k)
            layer.push_back(rng.next_u64() & 1 ? 1.0 : -1.0);
        chi.push_back(std::move(layer));
    }

    std::vector<double> alphas(static_cast<std::size_t>(m - 1), 0.5);
    lipcert::Network net = leaky_net(dims, alphas, rng, false);
    for (int i = 1; i <= m; ++i) {
        lipcert::Matrix& w = net.layers[static_cast<std::size_t>(i - 1)].weight;
        for (int k = 0; k < w.rows; ++k)
            for (int l = 0; l < w.cols; ++l)
                w.at(k, l) = chi[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                             chi[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l)] *
                             std::fabs(w.at(k, l));
    }
    return net;
}

inline lipcert::Network nonnegative_net(const std::vector<int>& dims, lipcert::CounterRng& rng)
{
    std::vector<double> alphas(dims.size() - 2, 0.5);
    lipcert::Network net = leaky_net(dims, alphas, rng, false);
    for (lipcert::Layer& layer : net.layers)
        for (double& x : layer.weight.a)
            x = std::fabs(x);
    return net;
}

inline double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        acc += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(acc);
}

} // namespace testsupport
