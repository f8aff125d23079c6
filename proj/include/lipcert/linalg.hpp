#pragma once

#include <limits>
#include <vector>

#include "lipcert/errors.hpp"

namespace lipcert {

// Dense real matrix, row-major.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0)
    {
        if (r <= 0 || c <= 0)
            fail(ErrorKind::shape, "matrix dimensions must be positive");
    }
    Matrix(int r, int c, std::vector<double> entries);

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n);

    // throws invalid_input on NaN/Inf entries
    void require_finite() const;
};

// Description of a weighted l_p norm; empty weights mean all ones.
struct NormSpec {
    double p = 2.0; // in [1, +inf]
    std::vector<double> weights;

    static constexpr double inf = std::numeric_limits<double>::infinity();

    bool is_euclidean() const noexcept;
    void validate() const;
    void validate_dim(int dim) const;
    double weight(int k) const noexcept { return weights.empty() ? 1.0 : weights[k]; }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix absolute_matrix(const Matrix& a);

// Largest singular value. Direct Jacobi eigendecomposition of the smaller
// Gram matrix below 32x32, power iteration above (rel. tol 1e-12, <= 10^4
// iterations, a convergence stall accepts the Rayleigh quotient).
double spectral_norm(const Matrix& a);

// Reusable buffers for the enumeration loops that take spectral norms of
// millions of small matrices.
class SpectralScratch {
public:
    double norm(const double* a, int rows, int cols);

private:
    std::vector<double> gram_;
    std::vector<double> v_;
    std::vector<double> w_;
};

// ||x||_spec for a dense vector of length n
double weighted_norm(const double* x, int n, const NormSpec& spec);

// sup_{||y||_spec <= 1} <x, y>
double dual_weighted_norm(const double* x, int n, const NormSpec& spec);

// Induced operator norm for the closed-form pairs: (in.p = 1, any out),
// (any in, out.p = inf), and the unweighted 2 -> 2 case. Anything else is an
// unsupported_norm error; a certificate is never silently approximated.
double induced_norm(const Matrix& a, const NormSpec& in, const NormSpec& out);

} // namespace lipcert
