#include "lipcert/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "lipcert/rng.hpp"

namespace lipcert {

namespace {

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        acc += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(acc);
}

void update_aggregate(RatioAggregate& agg, double value, int index)
{
    if (index == 0) {
        agg.mean = value;
        agg.min = value;
        agg.max = value;
        return;
    }
    agg.mean += value;
    agg.min = std::min(agg.min, value);
    agg.max = std::max(agg.max, value);
}

} // namespace

RatioStats run_monte_carlo(const MonteCarloConfig& cfg)
{
    const int m = static_cast<int>(cfg.dims.size()) - 1;
    if (m < 2)
        fail(ErrorKind::invalid_input,
             "the ratio experiment needs at least two layers (three dimensions)");
    for (int d : cfg.dims)
        if (d < 1)
            fail(ErrorKind::invalid_input, "layer dimensions must be positive");
    if (cfg.trials < 1)
        fail(ErrorKind::invalid_input, "need at least one trial");

    std::vector<double> alphas = cfg.alphas;
    if (alphas.empty())
        alphas.assign(static_cast<std::size_t>(m - 1), 0.5);
    if (static_cast<int>(alphas.size()) != m - 1)
        fail(ErrorKind::invalid_input, "need one averagedness constant per hidden layer");
    for (double a : alphas)
        if (!(a >= 0.0 && a <= 1.0))
            fail(ErrorKind::invalid_input, "averagedness constants must lie in [0, 1]");

    std::vector<std::vector<double>> lows;
    if (cfg.vartheta) {
        int bits = 0;
        for (int i = 1; i < m; ++i) {
            const double low = 1.0 - 2.0 * alphas[static_cast<std::size_t>(i - 1)];
            lows.emplace_back(static_cast<std::size_t>(cfg.dims[static_cast<std::size_t>(i)]),
                              low);
            if (low != 1.0)
                bits += cfg.dims[static_cast<std::size_t>(i)];
        }
        if (bits >= 63 || (std::uint64_t{1} << bits) > cfg.vartheta_budget)
            fail(ErrorKind::budget,
                 "the diagonal-pattern space of 2^" + std::to_string(bits) +
                     " exceeds the enumeration budget; drop --vartheta or shrink the dims");
    }

    RatioStats stats;
    stats.has_vartheta = cfg.vartheta;
    stats.trials = cfg.trials;
    stats.seed = cfg.seed;
    if (cfg.record_trials)
        stats.per_trial.reserve(static_cast<std::size_t>(cfg.trials));

    std::vector<Matrix> weights;
    for (int t = 0; t < cfg.trials; ++t) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(t));
        weights.clear();
        for (int i = 1; i <= m; ++i) {
            Matrix w(cfg.dims[static_cast<std::size_t>(i)], cfg.dims[static_cast<std::size_t>(i - 1)]);
            for (double& entry : w.a)
                entry = rng.next_normal();
            weights.push_back(std::move(w));
        }

        const CompositeNorms norms(weights);
        double product = 1.0;
        for (int i = 1; i <= m; ++i)
            product *= norms.norm(i, i);
        const double theta = theta_recursive(norms, alphas);
        const double linear = norms.norm(1, m);

        const double theta_ratio = theta / product;
        const double linear_ratio = linear / product;
        double vartheta_ratio = 0.0;
        if (cfg.vartheta) {
            const VarthetaResult v =
                diagonal_pattern_search(weights, lows, {}, {}, cfg.vartheta_budget, 1);
            vartheta_ratio = v.value / product;
        }

        update_aggregate(stats.theta_ratio, theta_ratio, t);
        update_aggregate(stats.linear_ratio, linear_ratio, t);
        if (cfg.vartheta)
            update_aggregate(stats.vartheta_ratio, vartheta_ratio, t);
        if (cfg.record_trials)
            stats.per_trial.push_back({theta_ratio, linear_ratio, vartheta_ratio});
    }

    stats.theta_ratio.mean /= cfg.trials;
    stats.linear_ratio.mean /= cfg.trials;
    if (cfg.vartheta)
        stats.vartheta_ratio.mean /= cfg.trials;
    return stats;
}

Network tanh_toy_network()
{
    const double s3 = std::sqrt(3.0);
    const Matrix u(2, 2, {0.5 * s3, 0.5, 0.5, -0.5 * s3});
    const Matrix w1(2, 2, {1.0, 3.0, 3.0, 3.0});
    const Matrix w2(2, 2, {10.0, 2.0, 7.0, 4.0});

    Network net;
    net.input_dim = 2;
    net.layers.push_back(Layer{matmul(u, w1), {0.0, 0.0},
                               VectorActivation::make_separable(builtin("tanh"), 2)});
    net.layers.push_back(Layer{matmul(w2, u), {0.0, 0.0},
                               VectorActivation::make_separable(builtin("identity"), 2)});
    net.validate();
    return net;
}

TanhToyReport run_tanh_toy()
{
    const double s3 = std::sqrt(3.0);
    const Matrix u(2, 2, {0.5 * s3, 0.5, 0.5, -0.5 * s3});
    const Matrix w1(2, 2, {1.0, 3.0, 3.0, 3.0});
    const Matrix w2(2, 2, {10.0, 2.0, 7.0, 4.0});
    const Network transformed = tanh_toy_network();

    TanhToyReport report;
    report.linear = linear_bound(transformed);
    report.naive = spectral_norm(w1) * spectral_norm(w2);
    report.theta = theta_recursive(transformed);
    report.vartheta = vartheta_exhaustive(transformed).value;

    // original formulation: R_1 = U o tanh o U applied after W_1
    const auto original_forward = [&](const std::vector<double>& v) {
        std::vector<double> h(2), g(2);
        for (int r = 0; r < 2; ++r)
            h[static_cast<std::size_t>(r)] = w1.at(r, 0) * v[0] + w1.at(r, 1) * v[1];
        for (int r = 0; r < 2; ++r)
            g[static_cast<std::size_t>(r)] =
                std::tanh(u.at(r, 0) * h[0] + u.at(r, 1) * h[1]);
        for (int r = 0; r < 2; ++r)
            h[static_cast<std::size_t>(r)] = u.at(r, 0) * g[0] + u.at(r, 1) * g[1];
        for (int r = 0; r < 2; ++r)
            g[static_cast<std::size_t>(r)] = w2.at(r, 0) * h[0] + w2.at(r, 1) * h[1];
        return g;
    };

    const std::vector<double> x = {-3.4, 2.0};
    const std::vector<double> z = {1e-4, 1e-4 * s3};
    const std::vector<double> xz = {x[0] + z[0], x[1] + z[1]};
    const double znorm = std::sqrt(z[0] * z[0] + z[1] * z[1]);
    report.empirical_ratio =
        euclidean_distance(original_forward(xz), original_forward(x)) / znorm;
    return report;
}

double empirical_lipschitz(const Network& net, const std::vector<double>& x, int trials,
                           double radius, std::uint64_t seed)
{
    net.validate();
    if (!(radius > 0.0))
        fail(ErrorKind::invalid_input, "perturbation radius must be positive");
    if (trials < 1)
        fail(ErrorKind::invalid_input, "need at least one probe");
    if (static_cast<int>(x.size()) != net.input_dim)
        fail(ErrorKind::shape, "probe point dimension mismatch");

    const std::vector<double> base = forward(net, x);
    std::vector<double> z(x.size()), shifted(x.size());
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& component : z) {
                component = rng.next_normal();
                norm += component * component;
            }
            norm = std::sqrt(norm);
        } while (norm == 0.0);
        const double scale = radius / norm;
        double znorm2 = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            z[k] *= scale;
            znorm2 += z[k] * z[k];
            shifted[k] = x[k] + z[k];
        }
        best = std::max(best,
                        euclidean_distance(forward(net, shifted), base) / std::sqrt(znorm2));
    }
    return best;
}

} // namespace lipcert
