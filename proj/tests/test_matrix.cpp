#include "pnmf/errors.hpp"
#include "pnmf/matrix.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using pnmf::DenseMatrix;
using pnmf::SymmetricMatrix;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                          double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

DenseMatrix naive_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

bool approx_equal(const DenseMatrix& a, const DenseMatrix& b, double rel) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.values()[i];
        const double y = b.values()[i];
        if (std::abs(x - y) > rel * std::max({1.0, std::abs(x), std::abs(y)})) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("matrix") {

TEST_CASE("multiply matches a hand-computed product") {
    const auto a = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
    const auto b = DenseMatrix::from_rows({{7.0, 8.0, 9.0}, {10.0, 11.0, 12.0}});
    const auto c = pnmf::multiply(a, b);
    const auto expected =
        DenseMatrix::from_rows({{27.0, 30.0, 33.0}, {61.0, 68.0, 75.0}, {95.0, 106.0, 117.0}});
    CHECK(approx_equal(c, expected, 0.0));
}

TEST_CASE("product helpers agree with naive loops on random inputs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto a = random_matrix(7, 4, seed, -2.0, 2.0);
        const auto b = random_matrix(4, 6, seed + 100, -2.0, 2.0);
        const auto c = random_matrix(7, 6, seed + 200, -2.0, 2.0);
        CHECK(approx_equal(pnmf::multiply(a, b), naive_multiply(a, b), 1e-13));
        CHECK(approx_equal(pnmf::multiply_at_b(a, c), naive_multiply(pnmf::transpose(a), c),
                           1e-13));
        CHECK(approx_equal(pnmf::multiply_a_bt(a, a), naive_multiply(a, pnmf::transpose(a)),
                           1e-13));
    }
}

TEST_CASE("multiply rejects mismatched shapes") {
    const DenseMatrix a(2, 3, 1.0);
    const DenseMatrix b(2, 3, 1.0);
    CHECK_THROWS_AS((void)pnmf::multiply(a, b), pnmf::ValidationError);
}

TEST_CASE("gram product is bitwise symmetric") {
    const auto a = random_matrix(5, 9, 42, -1.0, 3.0);
    const auto gram = pnmf::multiply_a_bt(a, a);
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t j = 0; j < gram.cols(); ++j)
            CHECK(gram(i, j) == gram(j, i));
}

TEST_CASE("transpose is an involution") {
    const auto a = random_matrix(6, 3, 7);
    CHECK(pnmf::transpose(pnmf::transpose(a)) == a);
}

TEST_CASE("multiply_sym agrees with the dense product") {
    const auto a = random_matrix(3, 5, 11, -1.0, 1.0);
    SymmetricMatrix s(5);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j) s.set(i, j, dist(rng));
    CHECK(approx_equal(pnmf::multiply_sym(a, s), naive_multiply(a, s.to_dense()), 1e-13));
}

TEST_CASE("frobenius helpers agree with direct sums") {
    const auto a = random_matrix(4, 4, 3, -2.0, 2.0);
    const auto b = random_matrix(4, 4, 4, -2.0, 2.0);
    double sq = 0.0, dot = 0.0, dsq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sq += a.values()[i] * a.values()[i];
        dot += a.values()[i] * b.values()[i];
        const double d = a.values()[i] - b.values()[i];
        dsq += d * d;
    }
    CHECK(pnmf::frobenius_norm(a) == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));
    CHECK(pnmf::frobenius_dot(a, b) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(pnmf::frobenius_distance(a, b) == doctest::Approx(std::sqrt(dsq)).epsilon(1e-14));
}

TEST_CASE("from_dense enforces symmetry within tolerance") {
    auto m = DenseMatrix::from_rows({{1.0, 2.0}, {2.0 + 1e-3, 5.0}});
    CHECK_THROWS_AS((void)SymmetricMatrix::from_dense(m, 1e-6), pnmf::ValidationError);
    const auto s = SymmetricMatrix::from_dense(m, 1e-2);
    CHECK(s(0, 1) == doctest::Approx(2.0 + 5e-4));
    CHECK(s(0, 1) == s(1, 0));
}

TEST_CASE("pairwise_distances matches the quadratic-loop definition") {
    const auto x = random_matrix(4, 9, 21, -3.0, 3.0);  // 4 features, 9 samples
    const auto dist = pnmf::pairwise_distances(x);
    REQUIRE(dist.order() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(dist(i, i) == 0.0);
        for (std::size_t j = 0; j < 9; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                const double d = x(k, i) - x(k, j);
                sq += d * d;
            }
            CHECK(dist(i, j) == doctest::Approx(std::sqrt(sq)).epsilon(1e-13));
        }
    }
}

TEST_CASE("pairwise_distances rejects non-finite input") {
    DenseMatrix x(2, 3, 1.0);
    x(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)pnmf::pairwise_distances(x), pnmf::ValidationError);
}

TEST_CASE("eig_sym solves a 2x2 with a known closed form") {
    // [[2, 1], [1, 2]] has eigenvalues 1 and 3
    SymmetricMatrix m(2);
    m.set(0, 0, 2.0);
    m.set(1, 1, 2.0);
    m.set(0, 1, 1.0);
    const auto eig = pnmf::numerics::eig_sym(m);
    REQUIRE(eig.values.size() == 2);
    CHECK(eig.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("eig_sym reconstructs the input and returns orthonormal vectors") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SymmetricMatrix m(6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) m.set(i, j, dist(rng));

    const auto eig = pnmf::numerics::eig_sym(m);
    REQUIRE(std::is_sorted(eig.values.begin(), eig.values.end()));

    const auto& q = eig.vectors;
    // Q^T Q = I
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 6; ++i) dot += q(i, a) * q(i, b);
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
        }
    // Q diag(values) Q^T = m
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double rec = 0.0;
            for (std::size_t k = 0; k < 6; ++k) rec += q(i, k) * eig.values[k] * q(j, k);
            CHECK(rec == doctest::Approx(m(i, j)).epsilon(1e-10));
        }
}

TEST_CASE("eigenvalue sum and product match trace and determinant on 3x3") {
    // delegate determinant to the closed 3x3 rule as the independent route
    SymmetricMatrix m(3);
    m.set(0, 0, 4.0);
    m.set(1, 1, 5.0);
    m.set(2, 2, 6.0);
    m.set(0, 1, 1.0);
    m.set(0, 2, 0.5);
    m.set(1, 2, -0.25);
    const auto values = pnmf::numerics::eigenvalues_sym(m);
    const double trace = 4.0 + 5.0 + 6.0;
    const double det = 4.0 * (5.0 * 6.0 - 0.25 * 0.25) - 1.0 * (1.0 * 6.0 - (-0.25) * 0.5) +
                       0.5 * (1.0 * (-0.25) - 5.0 * 0.5);
    CHECK(values[0] + values[1] + values[2] == doctest::Approx(trace).epsilon(1e-12));
    CHECK(values[0] * values[1] * values[2] == doctest::Approx(det).epsilon(1e-10));
}

TEST_CASE("truncated_svd matches power-iteration singular values") {
    const auto x = random_matrix(8, 5, 77, 0.0, 2.0);
    const auto svd = pnmf::numerics::truncated_svd(x, 3);
    const auto reference = oracle::singular_values_power_iteration(x, 3);
    REQUIRE(svd.singular_values.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(svd.singular_values[k] == doctest::Approx(reference[k]).epsilon(1e-8));
    CHECK(std::is_sorted(svd.singular_values.rbegin(), svd.singular_values.rend()));
}

TEST_CASE("full-rank truncated_svd reconstructs the matrix") {
    const auto x = random_matrix(6, 4, 99, -1.0, 1.0);
    const auto svd = pnmf::numerics::truncated_svd(x, 4);
    DenseMatrix rec(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
                s += svd.u(i, k) * svd.singular_values[k] * svd.v(j, k);
            rec(i, j) = s;
        }
    CHECK(pnmf::frobenius_distance(rec, x) <= 1e-9 * pnmf::frobenius_norm(x));
}

TEST_CASE("truncated_svd of a rank-1 matrix recovers the outer product") {
    DenseMatrix x(5, 3);
    const double u[5] = {1.0, 2.0, 0.5, 3.0, 1.5};
    const double v[3] = {2.0, 1.0, 4.0};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = u[i] * v[j];
    const auto svd = pnmf::numerics::truncated_svd(x, 2);
    CHECK(svd.singular_values[0] == doctest::Approx(pnmf::frobenius_norm(x)).epsilon(1e-12));
    CHECK(svd.singular_values[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("pearson agrees with the direct formula and an integrated p-value") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> xs(40), ys(40);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = dist(rng);
        ys[i] = 0.6 * xs[i] + 0.4 * dist(rng);
    }
    const auto result = pnmf::numerics::pearson(xs, ys);
    const double r_ref = oracle::pearson_r_direct(xs, ys);
    CHECK(result.r == doctest::Approx(r_ref).epsilon(1e-12));

    const double nu = static_cast<double>(xs.size()) - 2.0;
    const double t = r_ref * std::sqrt(nu / (1.0 - r_ref * r_ref));
    const double p_ref = oracle::two_sided_t_pvalue(t, nu);
    CHECK(result.p_value == doctest::Approx(p_ref).epsilon(1e-6));
    CHECK(result.n == xs.size());
}

TEST_CASE("pearson of an exactly linear series reports r=1, p=0") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> ys{2.0, 4.0, 6.0, 8.0, 10.0};
    const auto result = pnmf::numerics::pearson(xs, ys);
    CHECK(result.r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.p_value <= 1e-12);
}

TEST_CASE("pearson rejects degenerate input") {
    std::vector<double> constant{1.0, 1.0, 1.0, 1.0};
    std::vector<double> moving{1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS((void)pnmf::numerics::pearson(constant, moving), pnmf::DegenerateInputError);
    std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS((void)pnmf::numerics::pearson(two, two), pnmf::DegenerateInputError);
}

TEST_CASE("regularized incomplete beta satisfies closed forms and symmetry") {
    // I_x(1, 1) = x
    CHECK(pnmf::numerics::regularized_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    // I_x(1, b) = 1 - (1 - x)^b
    CHECK(pnmf::numerics::regularized_incomplete_beta(1.0, 3.0, 0.25) ==
          doctest::Approx(1.0 - std::pow(0.75, 3.0)).epsilon(1e-12));
    // I_x(a, b) = 1 - I_{1-x}(b, a)
    const double left = pnmf::numerics::regularized_incomplete_beta(2.5, 4.0, 0.3);
    const double right = 1.0 - pnmf::numerics::regularized_incomplete_beta(4.0, 2.5, 0.7);
    CHECK(left == doctest::Approx(right).epsilon(1e-12));
    CHECK(pnmf::numerics::regularized_incomplete_beta(2.0, 2.0, 0.0) == 0.0);
    CHECK(pnmf::numerics::regularized_incomplete_beta(2.0, 2.0, 1.0) == 1.0);
}

TEST_CASE("entry predicates") {
    auto m = DenseMatrix::from_rows({{0.0, 1.0}, {2.0, -3.0}});
    CHECK(pnmf::all_finite(m));
    CHECK_FALSE(pnmf::all_nonnegative(m));
    CHECK(pnmf::min_entry(m) == -3.0);
    CHECK(pnmf::max_abs_entry(m) == 3.0);
    m(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(pnmf::all_finite(m));
}

} // TEST_SUITE
