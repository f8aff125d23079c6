#include "lipcert/activations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipcert/rng.hpp"

namespace lipcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuotientTol = 1e-9;
constexpr double kProxGapTol = 1e-6;
constexpr double kProxArgTol = 1e-10;

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback)
{
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown_params(const std::string& name, const std::map<std::string, double>& params,
                           std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            fail(ErrorKind::invalid_input,
                 "activation '" + name + "' does not take parameter '" + key + "'");
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GridPair {
    double x;
    double y;
};

// Deterministic pair stream mixing coarse and fine probe scales so that both
// flat regions and derivative extrema of piecewise-smooth activations are
// seen by the quotient scan.
std::vector<GridPair> make_pairs(const QuotientGrid& grid)
{
    if (grid.pairs < 1)
        fail(ErrorKind::invalid_input, "degenerate grid: need at least one sample pair");
    if (!(grid.lo < grid.hi))
        fail(ErrorKind::invalid_input, "degenerate grid: empty interval");

    static constexpr double kScales[4] = {1e-6, 1e-3, 1.0, 10.0};
    CounterRng rng(grid.seed);
    std::vector<GridPair> pairs;
    pairs.reserve(static_cast<std::size_t>(grid.pairs));
    const double width = grid.hi - grid.lo;
    for (int i = 0; i < grid.pairs; ++i) {
        const double x = grid.lo + width * rng.next_unit();
        double h = kScales[i % 4] * (0.25 + 0.75 * rng.next_unit());
        h = std::min(h, 0.5 * width);
        double y = rng.next_u64() & 1 ? x + h : x - h;
        if (y > grid.hi || y < grid.lo)
            y = 2.0 * x - y;
        if (y == x)
            continue;
        pairs.push_back({x, y});
    }
    return pairs;
}

struct QuotientRange {
    double lo = kInf;
    double hi = -kInf;
};

QuotientRange scan_quotients(const ScalarActivation& act, const QuotientGrid& grid)
{
    QuotientRange range;
    for (const GridPair& p : make_pairs(grid)) {
        const double q = (act.evaluate(p.x) - act.evaluate(p.y)) / (p.x - p.y);
        if (std::isnan(q))
            fail(ErrorKind::invalid_input, "activation evaluator produced NaN");
        range.lo = std::min(range.lo, q);
        range.hi = std::max(range.hi, q);
    }
    return range;
}

} // namespace

double squashing_mu_max() { return 8.0 / (3.0 * std::sqrt(3.0)); }

ScalarActivation builtin(const std::string& name, const std::map<std::string, double>& params)
{
    ScalarActivation act;
    act.name = name;
    act.params = params;

    if (name == "relu") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.5;
        act.evaluate = [](double x) { return x > 0.0 ? x : 0.0; };
        act.potential = [](double u) { return u >= 0.0 ? 0.0 : kInf; };
        act.has_potential = true;
        act.domain_lo = 0.0;
        act.domain_hi = kInf;
        return act;
    }
    if (name == "capped_relu") {
        reject_unknown_params(name, params, {"beta"});
        const double beta = get_param(params, "beta", 1.0);
        if (!(beta > 0.0))
            fail(ErrorKind::invalid_input, "capped_relu requires beta > 0");
        act.params["beta"] = beta;
        act.alpha = 0.5;
        act.evaluate = [beta](double x) { return std::min(std::max(x, 0.0), beta); };
        act.potential = [beta](double u) { return u >= 0.0 && u <= beta ? 0.0 : kInf; };
        act.has_potential = true;
        act.domain_lo = 0.0;
        act.domain_hi = beta;
        return act;
    }
    if (name == "leaky_relu") {
        reject_unknown_params(name, params, {"lambda"});
        const double lambda = get_param(params, "lambda", 0.5);
        if (!(lambda >= 0.0 && lambda <= 2.0))
            fail(ErrorKind::invalid_input, "leaky_relu requires lambda in [0, 2]");
        act.params["lambda"] = lambda;
        act.alpha = lambda / 2.0;
        act.evaluate = [lambda](double x) { return x > 0.0 ? x : (1.0 - lambda) * x; };
        return act;
    }
    if (name == "abs") {
        reject_unknown_params(name, params, {});
        act.alpha = 1.0;
        act.evaluate = [](double x) { return std::fabs(x); };
        return act;
    }
    if (name == "elu") {
        reject_unknown_params(name, params, {"beta"});
        const double beta = get_param(params, "beta", 1.0);
        if (!(beta > 0.0 && beta <= 1.0))
            fail(ErrorKind::invalid_input, "elu requires beta in (0, 1]");
        act.params["beta"] = beta;
        act.alpha = 0.5;
        act.evaluate = [beta](double x) { return x >= 0.0 ? x : beta * std::expm1(x); };
        act.potential = [beta](double u) {
            if (u >= 0.0)
                return 0.0;
            if (u > -beta)
                return (u + beta) * std::log((u + beta) / beta) - u - 0.5 * u * u;
            if (u == -beta)
                return beta - 0.5 * beta * beta;
            return kInf;
        };
        act.has_potential = true;
        act.domain_lo = -beta;
        act.domain_hi = kInf;
        return act;
    }
    if (name == "softplus") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.5;
        act.evaluate = [](double x) {
            return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))) - std::log(2.0);
        };
        return act;
    }
    if (name == "tanh") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.5;
        act.evaluate = [](double x) { return std::tanh(x); };
        act.potential = [](double u) {
            const double au = std::fabs(u);
            if (au < 1.0)
                return 0.5 * ((1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u) - u * u);
            if (au == 1.0)
                return std::log(2.0) - 0.5;
            return kInf;
        };
        act.has_potential = true;
        act.domain_lo = -1.0;
        act.domain_hi = 1.0;
        return act;
    }
    if (name == "sine") {
        reject_unknown_params(name, params, {});
        act.alpha = 1.0;
        act.evaluate = [](double x) { return std::sin(x); };
        return act;
    }
    if (name == "mirrored_relu") {
        reject_unknown_params(name, params, {});
        act.alpha = 1.0;
        act.evaluate = [](double x) { return std::min(std::fabs(x), 1.0); };
        return act;
    }
    if (name == "swish") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.546;
        act.evaluate = [](double x) { return 10.0 * x * sigmoid(x) / 11.0; };
        return act;
    }
    if (name == "elish") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.536;
        act.evaluate = [](double x) {
            return x >= 0.0 ? 10.0 * x * sigmoid(x) / 11.0
                            : 10.0 * std::expm1(x) * sigmoid(x) / 11.0;
        };
        return act;
    }
    if (name == "gaussian") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.5 * (1.0 + std::sqrt(2.0 / std::exp(1.0)));
        act.evaluate = [](double x) { return std::exp(-x * x); };
        return act;
    }
    if (name == "geman_mcclure") {
        reject_unknown_params(name, params, {"mu"});
        const double mu = get_param(params, "mu", squashing_mu_max());
        if (!(mu > 0.0 && mu <= squashing_mu_max() + 1e-12))
            fail(ErrorKind::invalid_input, "geman_mcclure requires mu in (0, 8/(3*sqrt(3))]");
        act.params["mu"] = mu;
        act.alpha = 0.5;
        act.evaluate = [mu](double x) { return mu * (x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0) * x * x /
                                               (1.0 + x * x); };
        act.potential = [mu](double u) {
            const double au = std::fabs(u);
            if (au < mu)
                return mu * std::atan(std::sqrt(au / (mu - au))) - std::sqrt(au * (mu - au)) -
                       0.5 * u * u;
            if (au == mu)
                return 0.5 * mu * (std::acos(-1.0) - mu);
            return kInf;
        };
        act.has_potential = true;
        act.domain_lo = -mu;
        act.domain_hi = mu;
        return act;
    }
    if (name == "identity") {
        reject_unknown_params(name, params, {});
        act.alpha = 0.0;
        act.evaluate = [](double x) { return x; };
        act.potential = [](double) { return 0.0; };
        act.has_potential = true;
        act.domain_lo = -kInf;
        act.domain_hi = kInf;
        return act;
    }
    fail(ErrorKind::invalid_input, "unknown activation '" + name + "'");
}

const std::vector<std::string>& catalog_names()
{
    static const std::vector<std::string> names = {
        "relu",  "capped_relu",   "leaky_relu", "abs",   "elu",      "softplus",     "tanh",
        "sine",  "mirrored_relu", "swish",      "elish", "gaussian", "geman_mcclure",
        "identity"};
    return names;
}

VectorActivation VectorActivation::make_separable(const ScalarActivation& component,
                                                  int dimension)
{
    return make_separable(std::vector<ScalarActivation>(static_cast<std::size_t>(dimension),
                                                        component));
}

VectorActivation VectorActivation::make_separable(std::vector<ScalarActivation> components)
{
    if (components.empty())
        fail(ErrorKind::shape, "separable activation needs at least one component");
    VectorActivation act;
    act.kind = VectorKind::separable;
    act.separable = true;
    act.dimension = static_cast<int>(components.size());
    act.name = components.front().name;
    act.alpha = 0.0;
    for (const ScalarActivation& c : components) {
        act.alpha = std::max(act.alpha, c.alpha);
        if (c.name != act.name)
            act.name = "separable";
    }
    act.components = std::move(components);
    return act;
}

VectorActivation VectorActivation::make_sort_mix(int dimension, double omega, ProjectionSet set)
{
    if (dimension < 1)
        fail(ErrorKind::shape, "sort_mix needs dimension >= 1");
    if (!(omega >= 0.0 && omega <= 1.0))
        fail(ErrorKind::invalid_input, "sort_mix requires omega in [0, 1]");
    VectorActivation act;
    act.name = "sort_mix";
    act.kind = VectorKind::sort_mix;
    act.dimension = dimension;
    act.omega = omega;
    act.set = set;
    act.alpha = 0.5 * (1.0 + omega);
    return act;
}

VectorActivation VectorActivation::make_median(std::vector<double> tau, double offset)
{
    if (tau.empty())
        fail(ErrorKind::shape, "median needs at least one tau component");
    double worst = 0.0;
    for (double t : tau) {
        if (!(t > -1.0 && t < 1.0))
            fail(ErrorKind::invalid_input, "median requires every tau in (-1, 1)");
        worst = std::max(worst, std::fabs(t));
    }
    VectorActivation act;
    act.name = "median";
    act.kind = VectorKind::median;
    act.dimension = static_cast<int>(tau.size());
    act.tau = std::move(tau);
    act.offset = offset;
    act.alpha = 0.5 * (1.0 + worst);
    return act;
}

VectorActivation VectorActivation::make_squashing(int dimension, double mu)
{
    if (dimension < 1)
        fail(ErrorKind::shape, "squashing needs dimension >= 1");
    if (!(mu > 0.0 && mu <= squashing_mu_max() + 1e-12))
        fail(ErrorKind::invalid_input, "squashing requires mu in (0, 8/(3*sqrt(3))]");
    VectorActivation act;
    act.name = "squashing";
    act.kind = VectorKind::squashing;
    act.dimension = dimension;
    act.mu = mu;
    act.alpha = 0.5;
    return act;
}

void VectorActivation::override_alpha(double value)
{
    if (!(value >= 0.0 && value <= 1.0))
        fail(ErrorKind::invalid_input, "alpha override must lie in [0, 1]");
    alpha = value;
    alpha_overridden = true;
}

double VectorActivation::coordinate_low(int k) const
{
    if (!separable)
        fail(ErrorKind::not_applicable, "diagonal endpoints exist only for separable activations");
    const double a = alpha_overridden ? alpha : components[static_cast<std::size_t>(k)].alpha;
    return 1.0 - 2.0 * a;
}

void VectorActivation::apply(const double* x, double* y) const
{
    const int n = dimension;
    switch (kind) {
    case VectorKind::separable:
        for (int k = 0; k < n; ++k)
            y[k] = components[static_cast<std::size_t>(k)].evaluate(x[k]);
        return;
    case VectorKind::sort_mix: {
        std::vector<double> sorted(x, x + n);
        std::sort(sorted.begin(), sorted.end());
        if (set == ProjectionSet::mean_subspace) {
            double mean = 0.0;
            for (int k = 0; k < n; ++k)
                mean += x[k];
            mean /= n;
            for (int k = 0; k < n; ++k)
                y[k] = omega * sorted[static_cast<std::size_t>(k)] + (1.0 - omega) * mean;
        } else {
            for (int k = 0; k < n; ++k)
                y[k] = omega * sorted[static_cast<std::size_t>(k)] +
                       (1.0 - omega) * std::clamp(x[k], 0.0, 1.0);
        }
        return;
    }
    case VectorKind::median: {
        std::vector<double> scaled(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k < n; ++k)
            scaled[static_cast<std::size_t>(k)] = tau[static_cast<std::size_t>(k)] * x[k];
        scaled[static_cast<std::size_t>(n)] = offset;
        std::sort(scaled.begin(), scaled.end());
        for (int k = 0; k < n; ++k)
            y[k] = scaled[static_cast<std::size_t>(k)];
        return;
    }
    case VectorKind::squashing: {
        double r2 = 0.0;
        for (int k = 0; k < n; ++k)
            r2 += x[k] * x[k];
        const double scale = mu * std::sqrt(r2) / (1.0 + r2);
        for (int k = 0; k < n; ++k)
            y[k] = scale * x[k];
        return;
    }
    }
}

std::vector<double> VectorActivation::apply(const std::vector<double>& x) const
{
    if (static_cast<int>(x.size()) != dimension)
        fail(ErrorKind::shape, "activation input dimension mismatch");
    std::vector<double> y(x.size());
    apply(x.data(), y.data());
    return y;
}

AveragednessReport certify_averagedness(const ScalarActivation& act, double alpha,
                                        const QuotientGrid& grid)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        fail(ErrorKind::invalid_input, "alpha must lie in [0, 1]");
    const QuotientRange range = scan_quotients(act, grid);
    AveragednessReport report;
    report.worst_quotient_low = range.lo;
    report.worst_quotient_high = range.hi;
    report.seed = grid.seed;
    report.pass = range.lo >= 1.0 - 2.0 * alpha - kQuotientTol && range.hi <= 1.0 + kQuotientTol;
    return report;
}

std::optional<double> estimate_averagedness(const ScalarActivation& act, const QuotientGrid& grid)
{
    const QuotientRange range = scan_quotients(act, grid);
    if (range.hi > 1.0 + kQuotientTol)
        return std::nullopt;
    return std::max(0.0, 0.5 * (1.0 - range.lo));
}

double prox_of_potential(const std::function<double(double)>& phi, double x, double lo, double hi)
{
    const auto objective = [&](double u) {
        const double p = phi(u);
        if (std::isnan(p))
            fail(ErrorKind::invalid_input, "potential returned NaN inside its domain");
        return p + 0.5 * (x - u) * (x - u);
    };

    // expand a bracket around the clamped query point; the quadratic term
    // makes the objective coercive, so expansion terminates
    const double center = std::clamp(x, lo, hi);
    double step = 1.0;
    double left = std::max(lo, center - step);
    double right = std::min(hi, center + step);
    for (int i = 0; i < 80 && left > lo; ++i) {
        if (objective(left) > objective(std::min(left + 1e-3 * step, right)))
            break;
        step *= 4.0;
        left = std::max(lo, center - step);
    }
    step = 1.0;
    for (int i = 0; i < 80 && right < hi; ++i) {
        if (objective(right) > objective(std::max(right - 1e-3 * step, left)))
            break;
        step *= 4.0;
        right = std::min(hi, center + step);
    }

    // golden-section; convexity of the objective makes it safe with the
    // +inf values a bounded-domain potential returns
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = left, b = right;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > kProxArgTol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = objective(d);
        }
    }
    return 0.5 * (a + b);
}

ProxReport verify_prox_representation(const ScalarActivation& act, const QuotientGrid& grid)
{
    if (!act.has_potential)
        fail(ErrorKind::invalid_input,
             "activation '" + act.name + "' carries no prox potential");
    if (grid.pairs < 1)
        fail(ErrorKind::invalid_input, "degenerate grid: need at least one sample point");
    if (!(grid.lo < grid.hi))
        fail(ErrorKind::invalid_input, "degenerate grid: empty interval");

    CounterRng rng(grid.seed);
    ProxReport report;
    report.seed = grid.seed;
    for (int i = 0; i < grid.pairs; ++i) {
        const double x = i == 0 ? grid.lo
                       : i == 1 ? grid.hi
                                : rng.next_in(grid.lo, grid.hi);
        const double via_prox = prox_of_potential(act.potential, x, act.domain_lo, act.domain_hi);
        report.max_abs_gap = std::max(report.max_abs_gap,
                                      std::fabs(act.evaluate(x) - via_prox));
    }
    report.pass = report.max_abs_gap <= kProxGapTol;
    return report;
}

bool check_prox_representable(const ScalarActivation& act, const QuotientGrid& grid)
{
    const QuotientRange range = scan_quotients(act, grid);
    return range.lo >= -kQuotientTol && range.hi <= 1.0 + kQuotientTol;
}

VectorAveragednessReport certify_vector_averagedness(const VectorActivation& act, double alpha,
                                                     int trials, std::uint64_t seed)
{
    if (trials < 1)
        fail(ErrorKind::invalid_input, "need at least one trial");
    if (alpha == 0.0) {
        bool is_identity = act.kind == VectorKind::separable;
        if (is_identity)
            for (const ScalarActivation& c : act.components)
                is_identity = is_identity && c.name == "identity";
        if (is_identity)
            return {true, 1.0, seed};
        fail(ErrorKind::invalid_input,
             "alpha = 0 leaves the averaged decomposition undefined for a non-identity operator");
    }
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail(ErrorKind::invalid_input, "alpha must lie in (0, 1]");

    static constexpr double kScales[3] = {0.1, 1.0, 10.0};
    const int n = act.dimension;
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    std::vector<double> rx(static_cast<std::size_t>(n)), ry(static_cast<std::size_t>(n));

    VectorAveragednessReport report;
    report.seed = seed;
    report.pass = true;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const double scale = kScales[t % 3];
        for (int k = 0; k < n; ++k) {
            x[static_cast<std::size_t>(k)] = scale * rng.next_normal();
            y[static_cast<std::size_t>(k)] = scale * rng.next_normal();
        }
        act.apply(x.data(), rx.data());
        act.apply(y.data(), ry.data());
        double qdist2 = 0.0, dist2 = 0.0;
        for (int k = 0; k < n; ++k) {
            const std::size_t j = static_cast<std::size_t>(k);
            const double qx = x[j] + (rx[j] - x[j]) / alpha;
            const double qy = y[j] + (ry[j] - y[j]) / alpha;
            qdist2 += (qx - qy) * (qx - qy);
            dist2 += (x[j] - y[j]) * (x[j] - y[j]);
        }
        if (dist2 == 0.0)
            continue;
        const double ratio = std::sqrt(qdist2 / dist2);
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (ratio > 1.0 + kQuotientTol)
            report.pass = false;
    }
    return report;
}

} // namespace lipcert
