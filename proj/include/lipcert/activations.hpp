#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lipcert/errors.hpp"

namespace lipcert {

// Scalar activation with a declared averagedness constant alpha: difference
// quotients of the evaluator lie in [1 - 2*alpha, 1]. When the operator is a
// proximity operator the generating potential (possibly +inf valued) can be
// attached together with its effective domain.
struct ScalarActivation {
    std::string name;
    std::map<std::string, double> params;
    double alpha = 0.5;
    std::function<double(double)> evaluate;

    std::function<double(double)> potential; // empty unless has_potential
    bool has_potential = false;
    double domain_lo = 0.0;
    double domain_hi = 0.0;

    double operator()(double x) const { return evaluate(x); }
};

enum class VectorKind { separable, sort_mix, median, squashing };
enum class ProjectionSet { mean_subspace, unit_box };

// Activation operator on R^dimension. Only the separable kind qualifies for
// the diagonal-pattern certificate; the others still carry a valid alpha.
struct VectorActivation {
    std::string name;
    int dimension = 0;
    double alpha = 0.5;
    VectorKind kind = VectorKind::separable;
    bool separable = false;
    bool alpha_overridden = false;

    std::vector<ScalarActivation> components; // separable
    double omega = 1.0;                       // sort_mix
    ProjectionSet set = ProjectionSet::mean_subspace;
    std::vector<double> tau; // median
    double offset = 0.0;
    double mu = 0.0; // squashing

    static VectorActivation make_separable(const ScalarActivation& component, int dimension);
    static VectorActivation make_separable(std::vector<ScalarActivation> components);
    static VectorActivation make_sort_mix(int dimension, double omega, ProjectionSet set);
    static VectorActivation make_median(std::vector<double> tau, double offset);
    static VectorActivation make_squashing(int dimension, double mu);

    // replaces the declared constant (and the endpoints every coordinate
    // contributes to a diagonal pattern)
    void override_alpha(double value);

    // endpoint 1 - 2*alpha for coordinate k of a diagonal pattern
    double coordinate_low(int k) const;

    void apply(const double* x, double* y) const;
    std::vector<double> apply(const std::vector<double>& x) const;
};

// largest mu for which t -> mu t^2/(1+t^2) stays nonexpansive
double squashing_mu_max();

// Catalog of the scalar activations known by name, with the declared
// averagedness constants. Unknown names and out-of-range parameters are
// invalid_input errors.
ScalarActivation builtin(const std::string& name,
                         const std::map<std::string, double>& params = {});
const std::vector<std::string>& catalog_names();

// Deterministic sampling plan for difference-quotient scans: `pairs` point
// pairs drawn from [lo, hi] at probe scales 1e-6, 1e-3, 1, 10.
struct QuotientGrid {
    double lo = -20.0;
    double hi = 20.0;
    int pairs = 10000;
    std::uint64_t seed = 0x11b5;
};

struct AveragednessReport {
    bool pass = false;
    double worst_quotient_low = 0.0;
    double worst_quotient_high = 0.0;
    std::uint64_t seed = 0;
};

struct ProxReport {
    bool pass = false;
    double max_abs_gap = 0.0;
    std::uint64_t seed = 0;
};

struct VectorAveragednessReport {
    bool pass = false;
    double worst_ratio = 0.0;
    std::uint64_t seed = 0;
};

// Checks the declared constant: every sampled quotient must lie in
// [1 - 2*alpha - tol, 1 + tol] with tol = 1e-9.
AveragednessReport certify_averagedness(const ScalarActivation& act, double alpha,
                                        const QuotientGrid& grid);

// Smallest constant compatible with the sampled quotients, or nullopt when a
// quotient exceeds 1 + tol (the operator is not nonexpansive).
std::optional<double> estimate_averagedness(const ScalarActivation& act,
                                            const QuotientGrid& grid);

// Minimizer of phi + (x - .)^2 / 2 by bracketed golden-section search,
// absolute tolerance 1e-10 on the argument. phi is trusted to be proper,
// lsc, and convex; [lo, hi] is its effective domain.
double prox_of_potential(const std::function<double(double)>& phi, double x,
                         double lo = -1.0 / 0.0, double hi = 1.0 / 0.0);

// Compares the evaluator against the prox of the attached potential on the
// grid; passes when the largest gap is <= 1e-6.
ProxReport verify_prox_representation(const ScalarActivation& act, const QuotientGrid& grid);

// Quotients in [0, 1] mean nonexpansive and increasing, hence a prox.
bool check_prox_representable(const ScalarActivation& act, const QuotientGrid& grid);

// Pulls the nonexpansive part q = x + (r(x) - x)/alpha out of random pairs
// and checks it never expands distances.
VectorAveragednessReport certify_vector_averagedness(const VectorActivation& act, double alpha,
                                                     int trials, std::uint64_t seed = 0x11b5);

} // namespace lipcert
