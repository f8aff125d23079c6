#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lipcert/linalg.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

// Strictly increasing cut positions in {1, ..., m-1} (1-based, possibly
// empty). Cutting the chain W_m ... W_1 at position j separates W_j from
// W_{j+1}.
struct SubsetIndex {
    std::vector<int> indices;

    static SubsetIndex from_mask(std::uint64_t mask);
    void validate(int m) const;
};

// All contiguous products W_b ... W_a with their spectral norms, computed
// once and shared by every bound (the sigma terms reuse segments heavily).
class CompositeNorms {
public:
    explicit CompositeNorms(const std::vector<Matrix>& weights);
    explicit CompositeNorms(const Network& net);

    int depth() const noexcept { return m_; }
    // 1-based inclusive segment [a, b]
    const Matrix& product(int a, int b) const;
    double norm(int a, int b) const;

private:
    std::size_t slot(int a, int b) const;

    int m_ = 0;
    std::vector<Matrix> products_;
    std::vector<double> norms_;
};

// ---- theta family (spectral norms) ----

// Bernoulli weight of a cut set: prod_{j in J} alpha_j * prod_{j not in J}
// (1 - alpha_j). The weights over all 2^(m-1) subsets sum to one.
double beta_coefficient(const std::vector<double>& alphas, const SubsetIndex& j);

// Product of segment norms determined by the cut set.
double sigma(const CompositeNorms& norms, const SubsetIndex& j);

inline constexpr std::uint64_t kDefaultTermBudget = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kDefaultPatternBudget = std::uint64_t{1} << 24;

double theta_combinatorial(const CompositeNorms& norms, const std::vector<double>& hidden_alphas,
                           std::uint64_t term_budget = kDefaultTermBudget);
double theta_combinatorial(const Network& net, std::uint64_t term_budget = kDefaultTermBudget);

// Same value in O(m^2) norm lookups via the cumulative recursion.
double theta_recursive(const CompositeNorms& norms, const std::vector<double>& hidden_alphas);
double theta_recursive(const Network& net);

// Uniform-average form, valid only when every hidden alpha equals 1/2.
double theta_firm(const CompositeNorms& norms, const std::vector<double>& hidden_alphas,
                  std::uint64_t term_budget = kDefaultTermBudget);
double theta_firm(const Network& net, std::uint64_t term_budget = kDefaultTermBudget);

double product_bound(const Network& net);
double linear_bound(const Network& net);

// Mixed-norm variants; spectral_fallback reports that the requested pair had
// no closed form for the outer factors and plain spectral norms were used
// (the value is then an l2 certificate, not a G0 -> Gm one).
double product_bound(const Network& net, const NormSpec& in, const NormSpec& out,
                     bool* spectral_fallback = nullptr);
double linear_bound(const Network& net, const NormSpec& in, const NormSpec& out);

// ---- vartheta family (separable hidden activations) ----

struct VarthetaResult {
    double value = 0.0;
    bool exact = false;
    std::uint64_t patterns = 0;
};

// Exact supremum of ||W_m D_{m-1} ... D_1 W_1|| over diagonal matrices whose
// k-th entry ranges over {lows[i][k], 1}; entries equal to 1 are skipped.
// The pattern range may be split across workers; the result is bit-identical
// for any worker count because the merge is a plain max.
VarthetaResult diagonal_pattern_search(const std::vector<Matrix>& weights,
                                       const std::vector<std::vector<double>>& lows,
                                       const NormSpec& in, const NormSpec& out,
                                       std::uint64_t budget = kDefaultPatternBudget,
                                       int workers = 1);

VarthetaResult vartheta_exhaustive(const Network& net, const NormSpec& in = {},
                                   const NormSpec& out = {},
                                   std::uint64_t budget = kDefaultPatternBudget,
                                   int workers = 1);

// Diagnostic lower bound on the same supremum: random endpoint patterns
// followed by greedy single-bit ascent. Never exceeds the exhaustive value
// and always tries the all-ones pattern first.
VarthetaResult vartheta_sample_lower(const Network& net, const NormSpec& in, const NormSpec& out,
                                     int trials, std::uint64_t seed);

// ---- positivity ----

struct PositivityResult {
    bool holds = false;
    // chi_0 ... chi_m, entries in {-1, +1}; empty when the check fails
    std::vector<std::vector<double>> sign_vectors;
};

// Sufficient sign-factorization condition w_{i,k,l} = chi_{i,k} chi_{i-1,l}
// |w_{i,k,l}| (chi_0 constant), decided by parity union-find over the
// sign-equality constraints of the nonzero entries.
PositivityResult positivity_check(const Network& net);

// Under positivity the supremum collapses to the norm of the plain linear
// product; a valid vartheta certificate.
double positive_collapse_bound(const Network& net, const NormSpec& in = {},
                               const NormSpec& out = {});

// ||A_m ... A_1|| with A_i = |W_i| entrywise; upper bound on vartheta.
double absolute_bound(const Network& net, const NormSpec& in = {}, const NormSpec& out = {});

// ---- orchestration ----

struct CertifyOptions {
    NormSpec norm_in;
    NormSpec norm_out;
    std::uint64_t vartheta_budget = kDefaultPatternBudget;
    int sample_trials = 64;
    std::uint64_t seed = 0x11b5;
    int workers = 1;
};

struct CertificateReport {
    double product_bound = 0.0;
    double linear_lower = 0.0;
    double theta = 0.0;
    std::optional<double> vartheta;
    bool vartheta_exact = false;
    std::optional<double> vartheta_sample_lower;
    std::optional<double> positive_collapse;
    std::optional<double> absolute_bound;
    std::optional<double> certified;

    NormSpec norm_in;
    NormSpec norm_out;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;

    // not part of the serialized schema
    bool spectral_fallback = false;
    bool euclidean = true;
    std::uint64_t vartheta_patterns = 0;
};

// Runs the full ladder: product, linear, theta (recursion cross-checked
// against the combinatorial sum on small nets), vartheta (exhaustive within
// budget, sampled lower bound otherwise), positivity collapse and absolute
// bound where applicable. `certified` is the minimum over the valid
// certificates; ordering violations beyond 1e-8 relative are internal
// errors.
CertificateReport certify(const Network& net, const CertifyOptions& options = {});

} // namespace lipcert
