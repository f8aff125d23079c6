#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lipcert/certificates.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

struct MonteCarloConfig {
    std::vector<int> dims = {8, 10, 6, 3}; // N_0 ... N_m
    int trials = 1000;
    std::uint64_t seed = 1;
    std::vector<double> alphas; // per hidden layer; empty means all 1/2
    bool vartheta = false;
    std::uint64_t vartheta_budget = kDefaultPatternBudget;
    bool record_trials = false;
};

struct RatioAggregate {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct RatioStats {
    RatioAggregate theta_ratio;
    RatioAggregate linear_ratio;
    RatioAggregate vartheta_ratio; // meaningful only when has_vartheta
    bool has_vartheta = false;
    int trials = 0;
    std::uint64_t seed = 0;
    // theta, linear, vartheta per trial; filled when record_trials is set
    std::vector<std::array<double, 3>> per_trial;
};

// Draws i.i.d. standard-normal weights per trial (one counter-based
// substream per trial index) and aggregates the bound-to-product ratios.
RatioStats run_monte_carlo(const MonteCarloConfig& cfg);

struct TanhToyReport {
    double linear = 0.0;
    double theta = 0.0;
    double vartheta = 0.0;
    double naive = 0.0;
    double empirical_ratio = 0.0;
};

// The two-layer tanh example: a positively weighted network whose hidden
// activation is separable only after conjugating the basis change into the
// weights. The diagonal-pattern constant is computed on the transformed
// network, the perturbation probe on the original one.
TanhToyReport run_tanh_toy();

// The transformed network (W1' = U W1, W2' = W2 U, separable tanh).
Network tanh_toy_network();

// max_z ||T(x+z) - Tx|| / ||z|| over random spheres of the given radius; a
// lower bound on every valid certificate.
double empirical_lipschitz(const Network& net, const std::vector<double>& x, int trials,
                           double radius, std::uint64_t seed);

} // namespace lipcert
