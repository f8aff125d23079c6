#include <doctest.h>

#include "support.hpp"

using namespace lipcert;

TEST_CASE("spectral norm closed-form cases")
{
    CHECK(spectral_norm(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix(2, 2, {3.0, 0.0, 0.0, -4.0})) ==
          doctest::Approx(4.0).epsilon(1e-12));
    // rank-one outer product (1,2)(1,2)^T has norm 1^2 + 2^2
    CHECK(spectral_norm(Matrix(2, 2, {1.0, 2.0, 2.0, 4.0})) ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("spectral norm rejects non-finite entries")
{
    Matrix m(2, 2, {1.0, 0.0, 0.0, 1.0});
    m.a[2] = std::nan("");
    CHECK_THROWS_AS(spectral_norm(m), Error);
}

TEST_CASE("spectral norm matches the Eigen oracle on random matrices")
{
    CounterRng rng(0xabcd);
    for (int rep = 0; rep < 60; ++rep) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 20);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 20);
        const Matrix m = testsupport::random_matrix(rng, rows, cols);
        const double got = spectral_norm(m);
        const double want = testsupport::spectral_oracle(m);
        CHECK(std::fabs(got - want) <= 1e-8 * std::max(1.0, want));
    }
}

TEST_CASE("power iteration path agrees with the oracle above the direct-solver cutoff")
{
    CounterRng rng(0x77);
    const Matrix m = testsupport::random_matrix(rng, 45, 40);
    const double got = spectral_norm(m);
    const double want = testsupport::spectral_oracle(m);
    CHECK(std::fabs(got - want) <= 1e-9 * want);

    // repeated top singular value stalls the iteration; the Rayleigh
    // quotient is still the right answer
    Matrix tie(40, 40);
    for (int i = 0; i < 40; ++i)
        tie.at(i, i) = i < 2 ? 7.0 : 1.0;
    CHECK(spectral_norm(tie) == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("matmul basics")
{
    CounterRng rng(3);
    const Matrix b = testsupport::random_matrix(rng, 3, 4);
    const Matrix prod = matmul(Matrix::identity(3), b);
    for (std::size_t k = 0; k < b.a.size(); ++k)
        CHECK(prod.a[k] == b.a[k]);

    const Matrix zero = matmul(Matrix(2, 2, {1.0, 0.0, 0.0, 0.0}),
                               Matrix(2, 2, {0.0, 0.0, 0.0, 1.0}));
    for (double x : zero.a)
        CHECK(x == 0.0);

    const Matrix w1(2, 2, {1.0, 3.0, 3.0, 3.0});
    const Matrix w2(2, 2, {10.0, 2.0, 7.0, 4.0});
    const Matrix w21 = matmul(w2, w1);
    CHECK(w21.at(0, 0) == 16.0);
    CHECK(w21.at(0, 1) == 36.0);
    CHECK(w21.at(1, 0) == 19.0);
    CHECK(w21.at(1, 1) == 33.0);

    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 2)), Error);
}

TEST_CASE("submultiplicativity on random products")
{
    CounterRng rng(0x5ab);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 8);
        const int k = 1 + static_cast<int>(rng.next_u64() % 8);
        const int c = 1 + static_cast<int>(rng.next_u64() % 8);
        const Matrix a = testsupport::random_matrix(rng, n, k);
        const Matrix b = testsupport::random_matrix(rng, k, c);
        CHECK(spectral_norm(matmul(a, b)) <= spectral_norm(a) * spectral_norm(b) + 1e-10);
    }
}

TEST_CASE("absolute matrix")
{
    const Matrix m(2, 2, {-1.0, 2.0, 0.0, -3.0});
    const Matrix am = absolute_matrix(m);
    CHECK(am.at(0, 0) == 1.0);
    CHECK(am.at(0, 1) == 2.0);
    CHECK(am.at(1, 0) == 0.0);
    CHECK(am.at(1, 1) == 3.0);

    CounterRng rng(9);
    Matrix nonneg = testsupport::random_matrix(rng, 3, 3);
    for (double& x : nonneg.a)
        x = std::fabs(x);
    const Matrix fixed = absolute_matrix(nonneg);
    for (std::size_t k = 0; k < nonneg.a.size(); ++k)
        CHECK(fixed.a[k] == nonneg.a[k]);

    Matrix neg_id = Matrix::identity(3);
    for (double& x : neg_id.a)
        x = -x;
    const Matrix id = absolute_matrix(neg_id);
    for (int i = 0; i < 3; ++i)
        CHECK(id.at(i, i) == 1.0);
}

TEST_CASE("induced norm closed forms")
{
    NormSpec l1{1.0, {}};
    NormSpec linf{NormSpec::inf, {}};

    CHECK(induced_norm(Matrix::identity(2), l1, l1) == doctest::Approx(1.0));

    const Matrix m(2, 2, {1.0, -2.0, 3.0, 4.0});
    CHECK(induced_norm(m, l1, linf) == doctest::Approx(4.0)); // max absolute entry
    CHECK(induced_norm(m, l1, l1) == doctest::Approx(6.0));   // max column sum

    // 2 -> 2 with unit weights is exactly the spectral path
    CHECK(induced_norm(m, {}, {}) == spectral_norm(m));

    CHECK_THROWS_AS(induced_norm(m, NormSpec{2.0, {}}, NormSpec{1.0, {}}), Error);
    try {
        induced_norm(m, NormSpec{2.0, {}}, NormSpec{1.0, {}});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unsupported_norm);
    }
}

TEST_CASE("weighted l1 induced norms equal the vertex-enumeration oracle")
{
    CounterRng rng(0x31);
    for (int rep = 0; rep < 30; ++rep) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 6);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 6);
        const Matrix m = testsupport::random_matrix(rng, rows, cols);

        NormSpec in{1.0, {}};
        for (int j = 0; j < cols; ++j)
            in.weights.push_back(0.25 + rng.next_unit());
        NormSpec out;
        const int pick = static_cast<int>(rng.next_u64() % 3);
        out.p = pick == 0 ? 1.0 : pick == 1 ? 2.0 : NormSpec::inf;
        for (int k = 0; k < rows; ++k)
            out.weights.push_back(0.25 + rng.next_unit());

        CHECK(induced_norm(m, in, out) ==
              doctest::Approx(testsupport::l1_induced_oracle(m, in, out)).epsilon(1e-13));
    }
}

TEST_CASE("row-dual form for sup-norm outputs")
{
    CounterRng rng(0x32);
    const Matrix m = testsupport::random_matrix(rng, 3, 3);
    NormSpec in{NormSpec::inf, {0.5, 1.0, 2.0}};
    NormSpec out{NormSpec::inf, {1.0, 3.0, 0.5}};

    // extreme points of the weighted sup ball are the sign corners +-1/w_j
    double brute = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<double> x(3), y(3);
        for (int j = 0; j < 3; ++j)
            x[static_cast<std::size_t>(j)] =
                (mask >> j & 1 ? 1.0 : -1.0) / in.weights[static_cast<std::size_t>(j)];
        for (int r = 0; r < 3; ++r) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j)
                acc += m.at(r, j) * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(r)] = acc;
        }
        brute = std::max(brute, weighted_norm(y.data(), 3, out));
    }
    CHECK(induced_norm(m, in, out) == doctest::Approx(brute).epsilon(1e-13));
}

TEST_CASE("norm spec validation")
{
    CHECK_THROWS_AS((NormSpec{0.5, {}}.validate()), Error);
    CHECK_THROWS_AS((NormSpec{2.0, {1.0, -1.0}}).validate(), Error);
    CHECK_THROWS_AS((NormSpec{2.0, {1.0}}).validate_dim(3), Error);
    CHECK(NormSpec{}.is_euclidean());
    CHECK_FALSE((NormSpec{2.0, {1.0, 2.0}}).is_euclidean());
}
