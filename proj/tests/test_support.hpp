#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nq/functional.hpp"
#include "nq/grid.hpp"
#include "nq/problem.hpp"

namespace nqtest {

inline nq::DiscreteField constant_field(const nq::GridDomain& g, double c) {
    return nq::DiscreteField(g, std::vector<double>(g.n(), c));
}

inline nq::DiscreteField field_from(const nq::GridDomain& g, const std::function<double(double)>& fn) {
    std::vector<double> v(g.n());
    for (int i = 0; i < g.n(); ++i) v[i] = fn(g.node(i));
    return nq::DiscreteField(g, v);
}

/// Smooth random field: a few random sine modes plus nodal noise, nonzero at
/// every node with probability one.
inline nq::DiscreteField random_field(const nq::GridDomain& g, std::mt19937_64& rng, bool positive = false) {
    std::normal_distribution<double> N(0.0, 1.0);
    const double L = g.b() - g.a();
    std::vector<double> c(4);
    for (auto& x : c) x = N(rng);
    if (positive) c = {1.0 + std::abs(c[0]), 0.2 * c[1], 0.1 * c[2], 0.05 * c[3]};
    std::vector<double> v(g.n());
    const double pi = std::acos(-1.0);
    for (int i = 0; i < g.n(); ++i) {
        const double x = (g.node(i) - g.a()) / L;
        double s = 0;
        for (int k = 0; k < 4; ++k) s += c[k] * std::sin((k + 1) * pi * x);
        s += positive ? 0.0 : 0.05 * N(rng);
        v[i] = positive ? std::abs(s) + 1e-3 : s;
    }
    return nq::DiscreteField(g, v);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace nqtest

namespace nqtest {

/// Smallest eigenvalue of the symmetric tridiagonal matrix (diag d, off e)
/// by Sturm-count bisection; e has one entry fewer than d.
inline double tridiagonal_min_eigenvalue(const std::vector<double>& d, const std::vector<double>& e) {
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    auto below = [&](double x) {
        int count = 0;
        double q = 1.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            q = d[i] - x - (i > 0 ? e[i - 1] * e[i - 1] / q : 0.0);
            if (q == 0.0) q = 1e-300;
            if (q < 0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) >= 1 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// λ₁ of the discrete Dirichlet Laplacian with lumped mass: tridiag(2,-1)/h².
inline double laplacian_lambda1(const nq::GridDomain& g) {
    const double h2 = g.h() * g.h();
    return tridiagonal_min_eigenvalue(std::vector<double>(g.n(), 2.0 / h2), std::vector<double>(g.n() - 1, -1.0 / h2));
}

}  // namespace nqtest
