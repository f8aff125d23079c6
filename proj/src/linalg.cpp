#include "lipcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace lipcert {

namespace {

constexpr int kDirectEigenLimit = 32;
constexpr double kPowerTol = 1e-12;
constexpr int kPowerMaxIters = 10000;

// Largest eigenvalue of a symmetric n x n matrix via cyclic Jacobi sweeps.
// g is destroyed. Accurate to ~1e-15 relative for the PSD Gram matrices we
// feed it.
double jacobi_max_eigenvalue(double* g, int n)
{
    if (n == 1)
        return g[0];
    auto at = [g, n](int r, int c) -> double& { return g[static_cast<std::size_t>(r) * n + c]; };

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (int r = 0; r < n; ++r) {
            diag += at(r, r) * at(r, r);
            for (int c = r + 1; c < n; ++c)
                off += 2.0 * at(r, c) * at(r, c);
        }
        if (off <= 1e-30 * (diag + off) || off == 0.0)
            break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0)
                    continue;
                const double app = at(p, p), aqq = at(q, q);
                if (std::fabs(apq) <= 1e-18 * (std::fabs(app) + std::fabs(aqq)))
                    continue;
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double gkp = at(k, p), gkq = at(k, q);
                    at(k, p) = c * gkp - s * gkq;
                    at(k, q) = s * gkp + c * gkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double gpk = at(p, k), gqk = at(q, k);
                    at(p, k) = c * gpk - s * gqk;
                    at(q, k) = s * gpk + c * gqk;
                }
            }
        }
    }

    double best = at(0, 0);
    for (int r = 1; r < n; ++r)
        best = std::max(best, at(r, r));
    return best;
}

double power_max_eigenvalue(const double* g, int n, std::vector<double>& v, std::vector<double>& w)
{
    v.assign(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
    w.assign(static_cast<std::size_t>(n), 0.0);

    double lambda = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        double prev = -1.0;
        for (int iter = 0; iter < kPowerMaxIters; ++iter) {
            lambda = 0.0;
            double norm2 = 0.0;
            for (int r = 0; r < n; ++r) {
                double acc = 0.0;
                const double* row = g + static_cast<std::size_t>(r) * n;
                for (int c = 0; c < n; ++c)
                    acc += row[c] * v[c];
                w[r] = acc;
                lambda += v[r] * acc;
                norm2 += acc * acc;
            }
            const double norm = std::sqrt(norm2);
            if (norm == 0.0)
                break; // v is in the kernel
            const double inv = 1.0 / norm;
            for (int r = 0; r < n; ++r)
                v[r] = w[r] * inv;
            if (iter > 0 && std::fabs(lambda - prev) <= kPowerTol * std::max(std::fabs(lambda), 1e-300))
                return lambda;
            prev = lambda;
        }
        if (lambda != 0.0)
            return lambda;
        // deterministic reseed in case the start vector was orthogonal to
        // the leading eigenspace
        for (int r = 0; r < n; ++r)
            v[r] = (r % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
    }
    return lambda;
}

} // namespace

Matrix::Matrix(int r, int c, std::vector<double> entries) : rows(r), cols(c), a(std::move(entries))
{
    if (r <= 0 || c <= 0)
        fail(ErrorKind::shape, "matrix dimensions must be positive");
    if (a.size() != static_cast<std::size_t>(r) * c)
        fail(ErrorKind::shape, "entry count does not match matrix dimensions");
}

Matrix Matrix::identity(int n)
{
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        m.at(i, i) = 1.0;
    return m;
}

void Matrix::require_finite() const
{
    for (double x : a)
        if (!std::isfinite(x))
            fail(ErrorKind::invalid_input, "matrix has non-finite entries");
}

bool NormSpec::is_euclidean() const noexcept
{
    if (p != 2.0)
        return false;
    for (double w : weights)
        if (w != 1.0)
            return false;
    return true;
}

void NormSpec::validate() const
{
    if (!(p >= 1.0))
        fail(ErrorKind::invalid_input, "norm exponent must satisfy p >= 1");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            fail(ErrorKind::invalid_input, "norm weights must be strictly positive");
}

void NormSpec::validate_dim(int dim) const
{
    validate();
    if (!weights.empty() && static_cast<int>(weights.size()) != dim)
        fail(ErrorKind::shape, "norm weight vector length does not match space dimension");
}

Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols != b.rows)
        fail(ErrorKind::shape, "matmul dimension mismatch: " + std::to_string(a.rows) + "x" +
                                   std::to_string(a.cols) + " times " + std::to_string(b.rows) +
                                   "x" + std::to_string(b.cols));
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* outrow = out.a.data() + static_cast<std::size_t>(i) * out.cols;
        const double* arow = a.a.data() + static_cast<std::size_t>(i) * a.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0)
                continue;
            const double* brow = b.a.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j)
                outrow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix absolute_matrix(const Matrix& a)
{
    a.require_finite();
    Matrix out = a;
    for (double& x : out.a)
        x = std::fabs(x);
    return out;
}

double SpectralScratch::norm(const double* a, int rows, int cols)
{
    const bool use_ata = cols <= rows;
    const int n = use_ata ? cols : rows;
    gram_.assign(static_cast<std::size_t>(n) * n, 0.0);

    if (use_ata) {
        for (int k = 0; k < rows; ++k) {
            const double* row = a + static_cast<std::size_t>(k) * cols;
            for (int i = 0; i < n; ++i) {
                const double rik = row[i];
                if (rik == 0.0)
                    continue;
                double* g = gram_.data() + static_cast<std::size_t>(i) * n;
                for (int j = i; j < n; ++j)
                    g[j] += rik * row[j];
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double* ri = a + static_cast<std::size_t>(i) * cols;
            double* g = gram_.data() + static_cast<std::size_t>(i) * n;
            for (int j = i; j < n; ++j) {
                const double* rj = a + static_cast<std::size_t>(j) * cols;
                double acc = 0.0;
                for (int k = 0; k < cols; ++k)
                    acc += ri[k] * rj[k];
                g[j] = acc;
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            gram_[static_cast<std::size_t>(i) * n + j] = gram_[static_cast<std::size_t>(j) * n + i];

    const double lambda = n < kDirectEigenLimit ? jacobi_max_eigenvalue(gram_.data(), n)
                                                : power_max_eigenvalue(gram_.data(), n, v_, w_);
    return std::sqrt(std::max(lambda, 0.0));
}

double spectral_norm(const Matrix& a)
{
    a.require_finite();
    SpectralScratch scratch;
    return scratch.norm(a.a.data(), a.rows, a.cols);
}

double weighted_norm(const double* x, int n, const NormSpec& spec)
{
    if (spec.p == NormSpec::inf) {
        double best = 0.0;
        for (int k = 0; k < n; ++k)
            best = std::max(best, spec.weight(k) * std::fabs(x[k]));
        return best;
    }
    if (spec.p == 1.0) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += spec.weight(k) * std::fabs(x[k]);
        return acc;
    }
    if (spec.p == 2.0) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += spec.weight(k) * x[k] * x[k];
        return std::sqrt(acc);
    }
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
        acc += spec.weight(k) * std::pow(std::fabs(x[k]), spec.p);
    return std::pow(acc, 1.0 / spec.p);
}

double dual_weighted_norm(const double* x, int n, const NormSpec& spec)
{
    // ||x||_spec = (sum w_k |x_k|^p)^(1/p) has dual l_{p/(p-1)} norm of
    // x_k w_k^(-1/p); the sup-form p = inf norm dualizes to sum |x_k|/w_k.
    if (spec.p == NormSpec::inf) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += std::fabs(x[k]) / spec.weight(k);
        return acc;
    }
    if (spec.p == 1.0) {
        double best = 0.0;
        for (int k = 0; k < n; ++k)
            best = std::max(best, std::fabs(x[k]) / spec.weight(k));
        return best;
    }
    NormSpec dual;
    dual.p = spec.p / (spec.p - 1.0);
    std::vector<double> scaled(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        scaled[k] = std::fabs(x[k]) * std::pow(spec.weight(k), -1.0 / spec.p);
    return weighted_norm(scaled.data(), n, dual);
}

double induced_norm(const Matrix& a, const NormSpec& in, const NormSpec& out)
{
    a.require_finite();
    in.validate_dim(a.cols);
    out.validate_dim(a.rows);

    if (in.is_euclidean() && out.is_euclidean())
        return spectral_norm(a);

    if (in.p == 1.0) {
        // extreme points of the weighted l1 ball are +-e_j / w_j
        std::vector<double> col(static_cast<std::size_t>(a.rows));
        double best = 0.0;
        for (int j = 0; j < a.cols; ++j) {
            for (int k = 0; k < a.rows; ++k)
                col[k] = a.at(k, j);
            best = std::max(best, weighted_norm(col.data(), a.rows, out) / in.weight(j));
        }
        return best;
    }

    if (out.p == NormSpec::inf) {
        double best = 0.0;
        for (int k = 0; k < a.rows; ++k)
            best = std::max(best, out.weight(k) * dual_weighted_norm(
                                      a.a.data() + static_cast<std::size_t>(k) * a.cols,
                                      a.cols, in));
        return best;
    }

    fail(ErrorKind::unsupported_norm,
         "no closed form for the requested norm pair; refusing to approximate a certificate");
}

} // namespace lipcert
