#include "lipcert/certificates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "lipcert/rng.hpp"

namespace lipcert {

namespace {

constexpr double kOrderTol = 1e-8;
constexpr double kCrossCheckTol = 1e-12;

void validate_alphas(const std::vector<double>& alphas)
{
    for (double a : alphas)
        if (!(a >= 0.0 && a <= 1.0))
            fail(ErrorKind::invalid_input, "averagedness constants must lie in [0, 1]");
}

bool leq_with_slack(double a, double b)
{
    return a <= b + kOrderTol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

std::vector<Matrix> network_weights(const Network& net)
{
    std::vector<Matrix> weights;
    weights.reserve(net.layers.size());
    for (const Layer& layer : net.layers)
        weights.push_back(layer.weight);
    return weights;
}

// Evaluates the requested operator norm on a raw row-major buffer without
// allocating in the steady state.
class PatternNormEvaluator {
public:
    PatternNormEvaluator(const NormSpec& in, const NormSpec& out, int rows, int cols)
        : in_(in), out_(out), rows_(rows), cols_(cols),
          euclidean_(in.is_euclidean() && out.is_euclidean()),
          col_(static_cast<std::size_t>(rows))
    {
    }

    double operator()(const double* a)
    {
        if (euclidean_)
            return scratch_.norm(a, rows_, cols_);
        if (in_.p == 1.0) {
            double best = 0.0;
            for (int j = 0; j < cols_; ++j) {
                for (int k = 0; k < rows_; ++k)
                    col_[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k) * cols_ + j];
                best = std::max(best, weighted_norm(col_.data(), rows_, out_) / in_.weight(j));
            }
            return best;
        }
        if (out_.p == NormSpec::inf) {
            double best = 0.0;
            for (int k = 0; k < rows_; ++k)
                best = std::max(best,
                                out_.weight(k) *
                                    dual_weighted_norm(a + static_cast<std::size_t>(k) * cols_,
                                                       cols_, in_));
            return best;
        }
        fail(ErrorKind::unsupported_norm,
             "no closed form for the requested norm pair; refusing to approximate a certificate");
    }

private:
    NormSpec in_;
    NormSpec out_;
    int rows_;
    int cols_;
    bool euclidean_;
    std::vector<double> col_;
    SpectralScratch scratch_;
};

struct LevelPlan {
    int weight_index = 0;          // W_{i+1} applied after this diagonal
    int dim = 0;                   // N_i
    std::vector<int> coords;       // coordinates whose endpoint differs from 1
    std::vector<double> lows;      // endpoint 1 - 2*alpha per active coordinate
    int suffix_bits = 0;           // bits of deeper levels
};

struct SearchPlan {
    std::vector<LevelPlan> levels;
    int total_bits = 0;
};

SearchPlan build_plan(const std::vector<Matrix>& weights,
                      const std::vector<std::vector<double>>& lows)
{
    const int m = static_cast<int>(weights.size());
    if (m < 1)
        fail(ErrorKind::shape, "need at least one weight matrix");
    if (static_cast<int>(lows.size()) != m - 1)
        fail(ErrorKind::shape, "need one endpoint vector per hidden layer");

    SearchPlan plan;
    for (int i = 1; i < m; ++i) {
        const int dim = weights[static_cast<std::size_t>(i - 1)].rows;
        const std::vector<double>& layer_lows = lows[static_cast<std::size_t>(i - 1)];
        if (static_cast<int>(layer_lows.size()) != dim)
            fail(ErrorKind::shape, "endpoint vector length does not match layer dimension");
        LevelPlan level;
        level.weight_index = i;
        level.dim = dim;
        for (int k = 0; k < dim; ++k) {
            const double low = layer_lows[static_cast<std::size_t>(k)];
            if (!(low >= -1.0 && low <= 1.0))
                fail(ErrorKind::invalid_input, "diagonal endpoints must lie in [-1, 1]");
            if (low != 1.0) {
                level.coords.push_back(k);
                level.lows.push_back(low);
            }
        }
        plan.total_bits += static_cast<int>(level.coords.size());
        plan.levels.push_back(std::move(level));
    }
    int suffix = 0;
    for (auto it = plan.levels.rbegin(); it != plan.levels.rend(); ++it) {
        it->suffix_bits = suffix;
        suffix += static_cast<int>(it->coords.size());
    }
    return plan;
}

// One worker's scan of a contiguous pattern range. Partial products for the
// untouched prefix are hoisted: the diagonal at each level rescales only its
// active rows before the next weight is applied.
class PatternSearcher {
public:
    PatternSearcher(const std::vector<Matrix>& weights, const SearchPlan& plan,
                    const NormSpec& in, const NormSpec& out)
        : weights_(weights), plan_(plan),
          eval_(in, out, weights.back().rows, weights.front().cols),
          n0_(weights.front().cols)
    {
        scaled_.resize(plan.levels.size());
        next_.resize(plan.levels.size());
        for (std::size_t l = 0; l < plan.levels.size(); ++l) {
            const LevelPlan& level = plan.levels[l];
            scaled_[l].resize(static_cast<std::size_t>(level.dim) * n0_);
            next_[l].resize(static_cast<std::size_t>(
                                weights[static_cast<std::size_t>(level.weight_index)].rows) *
                            n0_);
        }
    }

    double scan(std::uint64_t lo, std::uint64_t hi)
    {
        best_ = 0.0;
        lo_ = lo;
        hi_ = hi;
        if (lo >= hi)
            return 0.0;
        const Matrix& w1 = weights_.front();
        if (plan_.levels.empty())
            return eval_(w1.a.data());
        descend(0, w1.a.data(), 0);
        return best_;
    }

private:
    void descend(std::size_t levelIdx, const double* prev, std::uint64_t base)
    {
        const LevelPlan& level = plan_.levels[levelIdx];
        const Matrix& wnext = weights_[static_cast<std::size_t>(level.weight_index)];
        const int bits = static_cast<int>(level.coords.size());
        const std::uint64_t child_width = std::uint64_t{1} << level.suffix_bits;
        double* scaled = scaled_[levelIdx].data();
        double* next = next_[levelIdx].data();

        std::memcpy(scaled, prev, static_cast<std::size_t>(level.dim) * n0_ * sizeof(double));

        const std::uint64_t count = std::uint64_t{1} << bits;
        for (std::uint64_t v = 0; v < count; ++v) {
            const std::uint64_t child_base = base + (v << level.suffix_bits);
            if (child_base >= hi_ || child_base + child_width <= lo_)
                continue;

            for (int t = 0; t < bits; ++t) {
                const int row = level.coords[static_cast<std::size_t>(t)];
                const double scale = (v >> t) & 1 ? 1.0 : level.lows[static_cast<std::size_t>(t)];
                const double* src = prev + static_cast<std::size_t>(row) * n0_;
                double* dst = scaled + static_cast<std::size_t>(row) * n0_;
                for (int c = 0; c < n0_; ++c)
                    dst[c] = scale * src[c];
            }

            std::memset(next, 0, static_cast<std::size_t>(wnext.rows) * n0_ * sizeof(double));
            for (int r = 0; r < wnext.rows; ++r) {
                double* out_row = next + static_cast<std::size_t>(r) * n0_;
                const double* wrow = wnext.a.data() + static_cast<std::size_t>(r) * wnext.cols;
                for (int k = 0; k < wnext.cols; ++k) {
                    const double wk = wrow[k];
                    if (wk == 0.0)
                        continue;
                    const double* srow = scaled + static_cast<std::size_t>(k) * n0_;
                    for (int c = 0; c < n0_; ++c)
                        out_row[c] += wk * srow[c];
                }
            }

            if (levelIdx + 1 == plan_.levels.size())
                best_ = std::max(best_, eval_(next));
            else
                descend(levelIdx + 1, next, child_base);
        }
    }

    const std::vector<Matrix>& weights_;
    const SearchPlan& plan_;
    PatternNormEvaluator eval_;
    int n0_;
    std::vector<std::vector<double>> scaled_;
    std::vector<std::vector<double>> next_;
    double best_ = 0.0;
    std::uint64_t lo_ = 0;
    std::uint64_t hi_ = 0;
};

double pattern_norm(const std::vector<Matrix>& weights, const SearchPlan& plan,
                    const NormSpec& in, const NormSpec& out, std::uint64_t pattern)
{
    PatternSearcher searcher(weights, plan, in, out);
    return searcher.scan(pattern, pattern + 1);
}

void require_separable(const Network& net, const NormSpec& in, const NormSpec& out)
{
    if (!net.hidden_separable())
        fail(ErrorKind::not_applicable,
             "non-separable activation: the diagonal-pattern certificate needs "
             "coordinatewise hidden activations");
    const bool euclidean = in.is_euclidean() && out.is_euclidean();
    if (!euclidean && !net.all_separable())
        fail(ErrorKind::not_applicable,
             "non-Hilbertian norms additionally need a separable output activation");
}

std::vector<std::vector<double>> network_lows(const Network& net)
{
    std::vector<std::vector<double>> lows;
    for (int i = 0; i + 1 < net.depth(); ++i) {
        const VectorActivation& act = net.layers[static_cast<std::size_t>(i)].activation;
        std::vector<double> layer(static_cast<std::size_t>(act.dimension));
        for (int k = 0; k < act.dimension; ++k)
            layer[static_cast<std::size_t>(k)] = act.coordinate_low(k);
        lows.push_back(std::move(layer));
    }
    return lows;
}

} // namespace

SubsetIndex SubsetIndex::from_mask(std::uint64_t mask)
{
    SubsetIndex j;
    for (int b = 0; b < 64; ++b)
        if (mask >> b & 1)
            j.indices.push_back(b + 1);
    return j;
}

void SubsetIndex::validate(int m) const
{
    int prev = 0;
    for (int idx : indices) {
        if (idx <= prev)
            fail(ErrorKind::invalid_input, "cut positions must be strictly increasing");
        if (idx > m - 1)
            fail(ErrorKind::invalid_input, "cut position exceeds m - 1");
        prev = idx;
    }
}

CompositeNorms::CompositeNorms(const std::vector<Matrix>& weights)
{
    m_ = static_cast<int>(weights.size());
    if (m_ < 1)
        fail(ErrorKind::shape, "need at least one weight matrix");
    products_.resize(static_cast<std::size_t>(m_) * m_);
    norms_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int a = 1; a <= m_; ++a) {
        Matrix p = weights[static_cast<std::size_t>(a - 1)];
        products_[slot(a, a)] = p;
        norms_[slot(a, a)] = spectral_norm(p);
        for (int b = a + 1; b <= m_; ++b) {
            p = matmul(weights[static_cast<std::size_t>(b - 1)], p);
            products_[slot(a, b)] = p;
            norms_[slot(a, b)] = spectral_norm(p);
        }
    }
}

CompositeNorms::CompositeNorms(const Network& net) : CompositeNorms(network_weights(net)) {}

std::size_t CompositeNorms::slot(int a, int b) const
{
    if (a < 1 || b < a || b > m_)
        fail(ErrorKind::shape, "segment indices out of range");
    return static_cast<std::size_t>(a - 1) * m_ + static_cast<std::size_t>(b - 1);
}

const Matrix& CompositeNorms::product(int a, int b) const { return products_[slot(a, b)]; }

double CompositeNorms::norm(int a, int b) const { return norms_[slot(a, b)]; }

double beta_coefficient(const std::vector<double>& alphas, const SubsetIndex& j)
{
    validate_alphas(alphas);
    j.validate(static_cast<int>(alphas.size()) + 1);
    double value = 1.0;
    std::size_t pos = 0;
    for (std::size_t idx = 0; idx < alphas.size(); ++idx) {
        const int cut = static_cast<int>(idx) + 1;
        if (pos < j.indices.size() && j.indices[pos] == cut) {
            value *= alphas[idx];
            ++pos;
        } else {
            value *= 1.0 - alphas[idx];
        }
    }
    return value;
}

double sigma(const CompositeNorms& norms, const SubsetIndex& j)
{
    j.validate(norms.depth());
    double value = 1.0;
    int prev = 0;
    for (int cut : j.indices) {
        value *= norms.norm(prev + 1, cut);
        prev = cut;
    }
    return value * norms.norm(prev + 1, norms.depth());
}

double theta_combinatorial(const CompositeNorms& norms, const std::vector<double>& hidden_alphas,
                           std::uint64_t term_budget)
{
    const int m = norms.depth();
    if (static_cast<int>(hidden_alphas.size()) != m - 1)
        fail(ErrorKind::shape, "need one averagedness constant per hidden layer");
    validate_alphas(hidden_alphas);
    if (m == 1)
        return norms.norm(1, 1);

    // alpha in {0, 1} annihilates one branch of its cut, so only the
    // genuinely mixed positions are enumerated
    std::vector<int> free_cuts, forced_cuts;
    for (int jcut = 1; jcut <= m - 1; ++jcut) {
        const double a = hidden_alphas[static_cast<std::size_t>(jcut - 1)];
        if (a == 1.0)
            forced_cuts.push_back(jcut);
        else if (a != 0.0)
            free_cuts.push_back(jcut);
    }
    const std::size_t nfree = free_cuts.size();
    if (nfree >= 63 || (std::uint64_t{1} << nfree) > term_budget)
        fail(ErrorKind::budget,
             "the combinatorial sum would need " + std::to_string(nfree) +
                 " free cut positions; use theta_recursive instead");

    double total = 0.0;
    std::vector<int> cuts;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nfree); ++mask) {
        double beta = 1.0;
        cuts = forced_cuts;
        for (std::size_t t = 0; t < nfree; ++t) {
            const double a = hidden_alphas[static_cast<std::size_t>(free_cuts[t] - 1)];
            if (mask >> t & 1) {
                beta *= a;
                cuts.push_back(free_cuts[t]);
            } else {
                beta *= 1.0 - a;
            }
        }
        std::sort(cuts.begin(), cuts.end());
        double sig = 1.0;
        int prev = 0;
        for (int cut : cuts) {
            sig *= norms.norm(prev + 1, cut);
            prev = cut;
        }
        sig *= norms.norm(prev + 1, m);
        total += beta * sig;
    }
    return total;
}

double theta_combinatorial(const Network& net, std::uint64_t term_budget)
{
    net.validate();
    const CompositeNorms norms(net);
    return theta_combinatorial(norms, net.hidden_alphas(), term_budget);
}

double theta_recursive(const CompositeNorms& norms, const std::vector<double>& hidden_alphas)
{
    const int m = norms.depth();
    if (static_cast<int>(hidden_alphas.size()) != m - 1)
        fail(ErrorKind::shape, "need one averagedness constant per hidden layer");
    validate_alphas(hidden_alphas);

    std::vector<double> alpha(static_cast<std::size_t>(m), 1.0); // alpha_0 = 1
    for (int i = 1; i < m; ++i)
        alpha[static_cast<std::size_t>(i)] = hidden_alphas[static_cast<std::size_t>(i - 1)];

    std::vector<double> theta(static_cast<std::size_t>(m) + 1, 0.0);
    theta[0] = 1.0; // theta_0 = 1
    for (int n = 1; n <= m; ++n) {
        double sum = 0.0, tail = 1.0; // tail = prod_{q=i+1}^{n-1} (1 - alpha_q)
        for (int i = n - 1; i >= 0; --i) {
            sum += alpha[static_cast<std::size_t>(i)] * theta[static_cast<std::size_t>(i)] * tail *
                   norms.norm(i + 1, n);
            tail *= 1.0 - alpha[static_cast<std::size_t>(i)];
        }
        theta[static_cast<std::size_t>(n)] = sum;
    }
    return theta[static_cast<std::size_t>(m)];
}

double theta_recursive(const Network& net)
{
    net.validate();
    const CompositeNorms norms(net);
    return theta_recursive(norms, net.hidden_alphas());
}

double theta_firm(const CompositeNorms& norms, const std::vector<double>& hidden_alphas,
                  std::uint64_t term_budget)
{
    const int m = norms.depth();
    if (static_cast<int>(hidden_alphas.size()) != m - 1)
        fail(ErrorKind::shape, "need one averagedness constant per hidden layer");
    for (double a : hidden_alphas)
        if (a != 0.5)
            fail(ErrorKind::invalid_input,
                 "the firmly nonexpansive formula needs every hidden alpha equal to 1/2");
    if (m == 1)
        return norms.norm(1, 1);
    if (m - 1 >= 63 || (std::uint64_t{1} << (m - 1)) > term_budget)
        fail(ErrorKind::budget, "too many cut subsets; use theta_recursive instead");

    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (m - 1)); ++mask)
        total += sigma(norms, SubsetIndex::from_mask(mask));
    return std::ldexp(total, -(m - 1));
}

double theta_firm(const Network& net, std::uint64_t term_budget)
{
    net.validate();
    const CompositeNorms norms(net);
    return theta_firm(norms, net.hidden_alphas(), term_budget);
}

double product_bound(const Network& net) { return product_bound(net, {}, {}, nullptr); }

double product_bound(const Network& net, const NormSpec& in, const NormSpec& out,
                     bool* spectral_fallback)
{
    net.validate();
    in.validate_dim(net.input_dim);
    out.validate_dim(net.output_dim());
    if (spectral_fallback)
        *spectral_fallback = false;

    const int m = net.depth();
    const auto spectral_product = [&net]() {
        double p = 1.0;
        for (const Layer& layer : net.layers)
            p *= spectral_norm(layer.weight);
        return p;
    };

    if (in.is_euclidean() && out.is_euclidean())
        return spectral_product();

    try {
        // a non-Hilbertian output norm passes through the final activation
        // only when that activation is coordinatewise
        if (!out.is_euclidean() && !net.layers.back().activation.separable)
            fail(ErrorKind::unsupported_norm,
                 "a non-separable output activation only certifies the spectral norm");
        if (m == 1)
            return induced_norm(net.layers.front().weight, in, out);
        const NormSpec euclid;
        double value = induced_norm(net.layers.front().weight, in, euclid);
        for (int i = 1; i + 1 < m; ++i)
            value *= spectral_norm(net.layers[static_cast<std::size_t>(i)].weight);
        value *= induced_norm(net.layers.back().weight, euclid, out);
        return value;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::unsupported_norm)
            throw;
        if (spectral_fallback)
            *spectral_fallback = true;
        return spectral_product();
    }
}

double linear_bound(const Network& net) { return linear_bound(net, {}, {}); }

double linear_bound(const Network& net, const NormSpec& in, const NormSpec& out)
{
    net.validate();
    in.validate_dim(net.input_dim);
    out.validate_dim(net.output_dim());
    Matrix product = net.layers.front().weight;
    for (int i = 1; i < net.depth(); ++i)
        product = matmul(net.layers[static_cast<std::size_t>(i)].weight, product);
    return induced_norm(product, in, out);
}

VarthetaResult diagonal_pattern_search(const std::vector<Matrix>& weights,
                                       const std::vector<std::vector<double>>& lows,
                                       const NormSpec& in, const NormSpec& out,
                                       std::uint64_t budget, int workers)
{
    for (const Matrix& w : weights)
        w.require_finite();
    in.validate_dim(weights.front().cols);
    out.validate_dim(weights.back().rows);

    const SearchPlan plan = build_plan(weights, lows);
    if (plan.total_bits >= 63)
        fail(ErrorKind::budget, "pattern space has 2^" + std::to_string(plan.total_bits) +
                                    " elements; fall back to theta");
    const std::uint64_t patterns = std::uint64_t{1} << plan.total_bits;
    if (patterns > budget)
        fail(ErrorKind::budget, "pattern space of " + std::to_string(patterns) +
                                    " exceeds the budget of " + std::to_string(budget) +
                                    "; fall back to theta or raise the budget");

    workers = std::clamp(workers, 1, 64);
    VarthetaResult result;
    result.exact = true;
    result.patterns = patterns;

    if (workers == 1 || patterns < static_cast<std::uint64_t>(workers)) {
        PatternSearcher searcher(weights, plan, in, out);
        result.value = searcher.scan(0, patterns);
        return result;
    }

    std::vector<double> partial(static_cast<std::size_t>(workers), 0.0);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        const std::uint64_t lo = patterns / workers * t + std::min<std::uint64_t>(t, patterns % workers);
        const std::uint64_t len = patterns / workers + (static_cast<std::uint64_t>(t) < patterns % workers ? 1 : 0);
        threads.emplace_back([&, t, lo, len] {
            PatternSearcher searcher(weights, plan, in, out);
            partial[static_cast<std::size_t>(t)] = searcher.scan(lo, lo + len);
        });
    }
    for (std::thread& th : threads)
        th.join();
    for (double v : partial)
        result.value = std::max(result.value, v);
    return result;
}

VarthetaResult vartheta_exhaustive(const Network& net, const NormSpec& in, const NormSpec& out,
                                   std::uint64_t budget, int workers)
{
    net.validate();
    require_separable(net, in, out);
    return diagonal_pattern_search(network_weights(net), network_lows(net), in, out, budget,
                                   workers);
}

VarthetaResult vartheta_sample_lower(const Network& net, const NormSpec& in, const NormSpec& out,
                                     int trials, std::uint64_t seed)
{
    net.validate();
    require_separable(net, in, out);
    if (trials < 1)
        fail(ErrorKind::invalid_input, "need at least one trial");

    const std::vector<Matrix> weights = network_weights(net);
    const SearchPlan plan = build_plan(weights, network_lows(net));
    if (plan.total_bits >= 63)
        fail(ErrorKind::budget, "pattern space too large even for index arithmetic");
    const int bits = plan.total_bits;
    const std::uint64_t all_ones = bits == 0 ? 0 : ~std::uint64_t{0} >> (64 - bits);

    const auto evaluate = [&](std::uint64_t pattern) {
        return pattern_norm(weights, plan, in, out, pattern);
    };

    VarthetaResult result;
    result.exact = false;
    std::uint64_t evaluations = 0;
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(seed, static_cast<std::uint64_t>(trial));
        std::uint64_t pattern = trial == 0 ? all_ones : rng.next_u64() & all_ones;
        double current = evaluate(pattern);
        ++evaluations;
        // greedy single-bit ascent
        for (int sweep = 0; sweep < 64; ++sweep) {
            bool improved = false;
            for (int b = 0; b < bits; ++b) {
                const std::uint64_t flipped = pattern ^ (std::uint64_t{1} << b);
                const double value = evaluate(flipped);
                ++evaluations;
                if (value > current) {
                    current = value;
                    pattern = flipped;
                    improved = true;
                }
            }
            if (!improved)
                break;
        }
        result.value = std::max(result.value, current);
    }
    result.patterns = evaluations;
    return result;
}

PositivityResult positivity_check(const Network& net)
{
    net.validate();
    const int m = net.depth();

    // node 0 stands for the whole input layer (chi_0 is constant); parity 1
    // on an edge means opposite signs
    std::vector<int> offset(static_cast<std::size_t>(m) + 1, 0);
    int nodes = 1;
    for (int i = 1; i <= m; ++i) {
        offset[static_cast<std::size_t>(i)] = nodes;
        nodes += net.layers[static_cast<std::size_t>(i - 1)].weight.rows;
    }

    std::vector<int> parent(static_cast<std::size_t>(nodes));
    std::vector<std::uint8_t> parity(static_cast<std::size_t>(nodes), 0);
    for (int v = 0; v < nodes; ++v)
        parent[static_cast<std::size_t>(v)] = v;

    const auto find = [&](int v) {
        std::uint8_t par = 0;
        int root = v;
        while (parent[static_cast<std::size_t>(root)] != root) {
            par ^= parity[static_cast<std::size_t>(root)];
            root = parent[static_cast<std::size_t>(root)];
        }
        // path compression
        int cur = v;
        std::uint8_t cur_par = par;
        while (parent[static_cast<std::size_t>(cur)] != root) {
            const int next = parent[static_cast<std::size_t>(cur)];
            const std::uint8_t next_par = cur_par ^ parity[static_cast<std::size_t>(cur)];
            parent[static_cast<std::size_t>(cur)] = root;
            parity[static_cast<std::size_t>(cur)] = cur_par;
            cur = next;
            cur_par = next_par;
        }
        return std::pair<int, std::uint8_t>(root, par);
    };

    const auto unite = [&](int a, int b, std::uint8_t rel) {
        const auto [ra, pa] = find(a);
        const auto [rb, pb] = find(b);
        if (ra == rb)
            return static_cast<std::uint8_t>(pa ^ pb) == rel;
        parent[static_cast<std::size_t>(ra)] = rb;
        parity[static_cast<std::size_t>(ra)] = static_cast<std::uint8_t>(pa ^ pb ^ rel);
        return true;
    };

    for (int i = 1; i <= m; ++i) {
        const Matrix& w = net.layers[static_cast<std::size_t>(i - 1)].weight;
        for (int k = 0; k < w.rows; ++k) {
            for (int l = 0; l < w.cols; ++l) {
                const double entry = w.at(k, l);
                if (entry == 0.0)
                    continue;
                const int node_out = offset[static_cast<std::size_t>(i)] + k;
                const int node_in = i == 1 ? 0 : offset[static_cast<std::size_t>(i - 1)] + l;
                if (!unite(node_out, node_in, entry < 0.0 ? 1 : 0))
                    return {};
            }
        }
    }

    PositivityResult result;
    result.holds = true;
    result.sign_vectors.resize(static_cast<std::size_t>(m) + 1);
    const double chi0 = find(0).second ? -1.0 : 1.0;
    result.sign_vectors[0].assign(static_cast<std::size_t>(net.input_dim), chi0);
    for (int i = 1; i <= m; ++i) {
        const int rows = net.layers[static_cast<std::size_t>(i - 1)].weight.rows;
        std::vector<double>& chi = result.sign_vectors[static_cast<std::size_t>(i)];
        chi.resize(static_cast<std::size_t>(rows));
        for (int k = 0; k < rows; ++k)
            chi[static_cast<std::size_t>(k)] =
                find(offset[static_cast<std::size_t>(i)] + k).second ? -1.0 : 1.0;
    }
    return result;
}

double positive_collapse_bound(const Network& net, const NormSpec& in, const NormSpec& out)
{
    net.validate();
    require_separable(net, in, out);
    if (!positivity_check(net).holds)
        fail(ErrorKind::not_applicable,
             "the weights admit no sign factorization; the collapse bound does not apply");
    // every supported weighted l_p input norm is absolute, so the remaining
    // hypothesis holds by construction
    return linear_bound(net, in, out);
}

double absolute_bound(const Network& net, const NormSpec& in, const NormSpec& out)
{
    net.validate();
    require_separable(net, in, out);
    in.validate_dim(net.input_dim);
    out.validate_dim(net.output_dim());
    Matrix product = absolute_matrix(net.layers.front().weight);
    for (int i = 1; i < net.depth(); ++i)
        product = matmul(absolute_matrix(net.layers[static_cast<std::size_t>(i)].weight), product);
    return induced_norm(product, in, out);
}

CertificateReport certify(const Network& net, const CertifyOptions& options)
{
    const auto started = std::chrono::steady_clock::now();

    net.validate();
    options.norm_in.validate_dim(net.input_dim);
    options.norm_out.validate_dim(net.output_dim());

    CertificateReport report;
    report.norm_in = options.norm_in;
    report.norm_out = options.norm_out;
    report.budget = options.vartheta_budget;
    report.seed = options.seed;
    report.euclidean = options.norm_in.is_euclidean() && options.norm_out.is_euclidean();

    const CompositeNorms norms(net);
    const std::vector<double> alphas = net.hidden_alphas();
    const int m = net.depth();

    report.theta = theta_recursive(norms, alphas);
    if (m - 1 <= 16) {
        const double comb = theta_combinatorial(norms, alphas, std::uint64_t{1} << 16);
        if (std::fabs(report.theta - comb) >
            kCrossCheckTol * std::max({std::fabs(comb), std::fabs(report.theta), 1e-300}))
            fail(ErrorKind::internal, "theta recursion disagrees with the combinatorial sum");
    }

    if (report.euclidean) {
        double p = 1.0;
        for (int i = 1; i <= m; ++i)
            p *= norms.norm(i, i);
        report.product_bound = p;
        report.linear_lower = norms.norm(1, m);
    } else {
        report.product_bound =
            product_bound(net, options.norm_in, options.norm_out, &report.spectral_fallback);
        report.linear_lower = induced_norm(norms.product(1, m), options.norm_in, options.norm_out);
    }

    try {
        const VarthetaResult exact = vartheta_exhaustive(net, options.norm_in, options.norm_out,
                                                         options.vartheta_budget, options.workers);
        report.vartheta = exact.value;
        report.vartheta_exact = true;
        report.vartheta_patterns = exact.patterns;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::budget) {
            const VarthetaResult sampled =
                vartheta_sample_lower(net, options.norm_in, options.norm_out,
                                      options.sample_trials, options.seed);
            report.vartheta_sample_lower = sampled.value;
            report.vartheta_patterns = sampled.patterns;
        } else if (e.kind() != ErrorKind::not_applicable) {
            throw;
        }
    }

    try {
        report.positive_collapse = positive_collapse_bound(net, options.norm_in, options.norm_out);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_applicable)
            throw;
    }
    try {
        report.absolute_bound = absolute_bound(net, options.norm_in, options.norm_out);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_applicable)
            throw;
    }

    // tightest valid certificate; the sampled lower bound never qualifies
    const auto consider = [&](std::optional<double> candidate) {
        if (!candidate)
            return;
        if (!report.certified || *candidate < *report.certified)
            report.certified = *candidate;
    };
    if (report.euclidean) {
        consider(report.product_bound);
        consider(report.theta);
    } else if (!report.spectral_fallback) {
        consider(report.product_bound);
    }
    if (report.vartheta_exact)
        consider(report.vartheta);
    consider(report.positive_collapse);
    consider(report.absolute_bound);

    // sandwich assertions; a violation here is a bug, not an input problem
    const auto require_order = [](double lo, double hi, const char* what) {
        if (!leq_with_slack(lo, hi))
            fail(ErrorKind::internal, std::string("ordering violation: ") + what);
    };
    if (report.euclidean) {
        require_order(report.linear_lower, report.theta, "linear <= theta");
        require_order(report.theta, report.product_bound, "theta <= product");
        if (report.vartheta_exact) {
            require_order(report.linear_lower, *report.vartheta, "linear <= vartheta");
            require_order(*report.vartheta, report.theta, "vartheta <= theta");
        }
        if (report.vartheta_sample_lower)
            require_order(*report.vartheta_sample_lower, report.theta, "sample lower <= theta");
    } else {
        if (report.vartheta_exact) {
            require_order(report.linear_lower, *report.vartheta, "linear <= vartheta");
            if (!report.spectral_fallback)
                require_order(*report.vartheta, report.product_bound, "vartheta <= product");
        }
    }
    if (report.positive_collapse) {
        require_order(report.linear_lower, *report.positive_collapse, "collapse == linear (lo)");
        require_order(*report.positive_collapse, report.linear_lower, "collapse == linear (hi)");
    }
    if (report.absolute_bound) {
        require_order(report.linear_lower, *report.absolute_bound, "linear <= absolute");
        if (report.vartheta_exact)
            require_order(*report.vartheta, *report.absolute_bound, "vartheta <= absolute");
    }
    if (report.certified)
        require_order(report.linear_lower, *report.certified, "linear <= certified");

    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    return report;
}

} // namespace lipcert
