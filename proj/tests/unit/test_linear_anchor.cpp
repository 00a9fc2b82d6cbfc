#include <cmath>
#include <random>

#include "doctest.h"
#include "nq/fiber.hpp"
#include "nq/linear_anchor.hpp"
#include "test_support.hpp"

using namespace nq;

namespace {

SymmetricMatrix random_symmetric(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a[i * d + j] = a[j * d + i] = N(rng);
    return SymmetricMatrix(d, a);
}

}  // namespace

TEST_CASE("Jacobi oracle on small matrices") {
    const std::vector<double> d13{1.0, 3.0};
    CHECK(eig_oracle(SymmetricMatrix::diagonal(d13)) == std::vector<double>{1.0, 3.0});
    const auto e = eig_oracle(SymmetricMatrix(2, {2, 1, 1, 2}));
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e[1] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(eig_oracle(SymmetricMatrix::identity(3)) == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("Jacobi oracle against the 2x2 characteristic polynomial and invariants") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 30; ++k) {
        const auto A = random_symmetric(2, rng);
        const double tr = A(0, 0) + A(1, 1), det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        const double disc = std::sqrt(tr * tr / 4 - det);
        const auto e = eig_oracle(A);
        CHECK(e[0] == doctest::Approx(tr / 2 - disc).epsilon(1e-12));
        CHECK(e[1] == doctest::Approx(tr / 2 + disc).epsilon(1e-12));
    }
    for (int d = 1; d <= 8; ++d) {
        const auto A = random_symmetric(d, rng);
        const auto dec = jacobi_eigen(A);
        CHECK(dec.reconstruction_error < 1e-9);
        double trace = 0, sum = 0;
        for (int i = 0; i < d; ++i) trace += A(i, i);
        for (double v : dec.values) sum += v;
        CHECK(sum == doctest::Approx(trace).epsilon(1e-12));
        for (int k = 0; k < d; ++k) {
            std::vector<double> x(d);
            for (int i = 0; i < d; ++i) x[i] = dec.vectors[i * d + k];
            const auto y = A.apply(x);
            for (int i = 0; i < d; ++i) CHECK(std::abs(y[i] - dec.values[k] * x[i]) < 1e-10);
        }
    }
}

TEST_CASE("extreme values of the linear model match the oracle") {
    const std::vector<double> d13{1.0, 3.0};
    const auto [a, b] = nmm_extreme_values(SymmetricMatrix::diagonal(d13));
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(3.0).epsilon(1e-12));
    const auto [c, d] = nmm_extreme_values(SymmetricMatrix(2, {2, 1, 1, 2}));
    CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d == doctest::Approx(3.0).epsilon(1e-12));

    std::mt19937_64 rng(23);
    for (int k = 0; k < 24; ++k) {
        const auto A = random_symmetric(1 + k % 8, rng);
        const auto e = eig_oracle(A);
        const auto [lo, hi] = nmm_extreme_values(A);
        CHECK(std::abs(lo - e.front()) < 1e-8);
        CHECK(std::abs(hi - e.back()) < 1e-8);
    }
}

TEST_CASE("scaled identity has flat fibers everywhere") {
    const auto A = SymmetricMatrix::identity(4, 2.5);
    const auto [lo, hi] = nmm_extreme_values(A);
    CHECK(lo == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(hi == doctest::Approx(2.5).epsilon(1e-14));
    const ProblemSpec spec(LinearMatrix{A});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> x(4);
        for (double& v : x) v = N(rng);
        const State u = DiscreteField(GridDomain::index_space(4), x);
        CHECK(classify_shape(spec, u).shape == ShapeClass::Constant);
    }
    // A non-multiple of I still has flat fibers: both sides are quadratic.
    const ProblemSpec other(LinearMatrix{SymmetricMatrix(2, {2, 1, 1, 2})});
    const State u = DiscreteField(GridDomain::index_space(2), std::vector<double>{0.3, -1.2});
    CHECK(classify_shape(other, u).shape == ShapeClass::Constant);
}
