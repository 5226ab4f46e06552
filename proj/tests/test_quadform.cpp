#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hypercd/quadform.hpp>

#include <random>

using hypercd::Matrix;
using hypercd::QuadReduction;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, size_t n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Matrix A(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j) A[i][j] = A[j][i] = u(rng);
    return A;
}

double reconstruction_error(const Matrix& A, const QuadReduction& r) {
    const size_t n = A.size();
    double err = 0.0;
    // || A - C diag(d) C^T ||_max
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < n; ++k) s += r.C[i][k] * r.d[k] * r.C[j][k];
            err = std::max(err, std::abs(A[i][j] - s));
        }
    return err;
}

double orthogonality_error(const Matrix& C) {
    const size_t n = C.size();
    double err = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < n; ++k) s += C[k][i] * C[k][j];
            err = std::max(err, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    return err;
}

}  // namespace

TEST_CASE("already-diagonal wave form is preserved") {
    Matrix A{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}};
    auto r = hypercd::reduce_to_squares(A);
    CHECK(r.d[0] == doctest::Approx(1.0));
    for (int j = 1; j < 4; ++j) CHECK(r.d[static_cast<size_t>(j)] == doctest::Approx(-1.0));
    CHECK(r.positive == 1);
    CHECK(r.negative == 3);
    CHECK(orthogonality_error(r.C) < 1e-12);
    CHECK(reconstruction_error(A, r) < 1e-12);
}

TEST_CASE("2x2 off-diagonal form splits into +1/-1") {
    Matrix A{{0, 1}, {1, 0}};
    auto r = hypercd::reduce_to_squares(A);
    CHECK(r.d[0] == doctest::Approx(1.0));
    CHECK(r.d[1] == doctest::Approx(-1.0));
    CHECK(r.positive == 1);
    CHECK(r.negative == 1);
    // axes are the diagonals (1,1)/sqrt(2), (1,-1)/sqrt(2) up to sign fixing
    CHECK(std::abs(r.C[0][0]) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("random symmetric matrices: reconstruction and orthogonality") {
    std::mt19937_64 rng(42);
    for (size_t n : {2u, 3u, 5u, 8u}) {
        for (int rep = 0; rep < 10; ++rep) {
            Matrix A = random_symmetric(rng, n);
            auto r = hypercd::reduce_to_squares(A);
            CHECK(orthogonality_error(r.C) < 1e-12);
            CHECK(reconstruction_error(A, r) < 1e-11);
            // eigenvalues descending
            for (size_t j = 1; j < n; ++j) CHECK(r.d[j - 1] >= r.d[j] - 1e-12);
        }
    }
}

TEST_CASE("quadratic form values are invariant under the reduction") {
    std::mt19937_64 rng(7);
    Matrix A = random_symmetric(rng, 4);
    auto r = hypercd::reduce_to_squares(A);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> y(4);
        for (double& v : y) v = u(rng);
        // x = C y
        std::vector<double> x(4, 0.0);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j) x[i] += r.C[i][j] * y[j];
        double qx = 0.0;
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j) qx += x[i] * A[i][j] * x[j];
        double qy = 0.0;
        for (size_t j = 0; j < 4; ++j) qy += r.d[j] * y[j] * y[j];
        CHECK(qx == doctest::Approx(qy).epsilon(1e-10));
    }
}

TEST_CASE("first-order coefficients transform covariantly") {
    std::mt19937_64 rng(11);
    Matrix A = random_symmetric(rng, 3);
    auto r = hypercd::reduce_to_squares(A);
    std::vector<double> alpha{1.5, -0.5, 2.0};
    auto beta = hypercd::transform_first_order(alpha, r.C);
    // Oracle: apply both first-order operators to the linear test function
    // f(x) = a.x and compare.  With x = C y, sum_v alpha_v df/dx_v must equal
    // sum_j beta_j d(f o C)/dy_j for every linear f; checking on the
    // coordinate functions f = x_k gives  alpha^T C e_j = beta_j directly.
    for (size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (size_t v = 0; v < 3; ++v) s += alpha[v] * r.C[v][j];
        CHECK(beta[j] == doctest::Approx(s).epsilon(1e-14));
    }
    // |beta| = |alpha| under an orthogonal change of variables
    double na = 0, nb = 0;
    for (size_t v = 0; v < 3; ++v) { na += alpha[v] * alpha[v]; nb += beta[v] * beta[v]; }
    CHECK(na == doctest::Approx(nb).epsilon(1e-12));
}

TEST_CASE("deterministic output and input validation") {
    std::mt19937_64 rng(13);
    Matrix A = random_symmetric(rng, 5);
    auto r1 = hypercd::reduce_to_squares(A);
    auto r2 = hypercd::reduce_to_squares(A);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(r1.d[i] == r2.d[i]);
        for (size_t j = 0; j < 5; ++j) CHECK(r1.C[i][j] == r2.C[i][j]);
    }
    Matrix bad{{0, 1}, {2, 0}};
    CHECK_THROWS_AS((void)hypercd::reduce_to_squares(bad), hypercd::DomainError);
    Matrix rect{{0, 1, 2}, {1, 0, 3}};
    CHECK_THROWS_AS((void)hypercd::reduce_to_squares(rect), hypercd::DomainError);
    CHECK_THROWS_AS((void)hypercd::transform_first_order({1.0}, A), hypercd::DomainError);
}
