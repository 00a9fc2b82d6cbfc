#include "nq/linear_anchor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nq/errors.hpp"
#include "nq/problem.hpp"

namespace nq {

EigenDecomposition jacobi_eigen(const SymmetricMatrix& A) {
    const int n = A.dim();
    std::vector<double> a(A.entries().begin(), A.entries().end());
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
    auto at = [n](std::vector<double>& m, int i, int j) -> double& { return m[static_cast<std::size_t>(i) * n + j]; };

    double norm = 0;
    for (double x : a) norm += x * x;
    const double target = 1e-12 * std::max(1.0, std::sqrt(norm));
    EigenDecomposition out;
    for (; out.sweeps < 100; ++out.sweeps) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) off += at(a, i, j) * at(a, i, j);
        if (std::sqrt(off) < target) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double theta = (at(a, q, q) - at(a, p, p)) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {  // columns p, q
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {  // rows p, q
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::ranges::sort(order, [&](int i, int j) { return at(a, i, i) < at(a, j, j); });
    out.values.resize(n);
    out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        out.values[k] = at(a, order[k], order[k]);
        for (int i = 0; i < n; ++i) out.vectors[static_cast<std::size_t>(i) * n + k] = at(v, i, order[k]);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double r = 0;
            for (int k = 0; k < n; ++k)
                r += out.vectors[static_cast<std::size_t>(i) * n + k] * out.values[k] *
                     out.vectors[static_cast<std::size_t>(j) * n + k];
            out.reconstruction_error = std::max(out.reconstruction_error, std::abs(A(i, j) - r));
        }
    if (!(out.reconstruction_error < 1e-9 * std::max(1.0, std::sqrt(norm))))
        fail(ErrorKind::NoConvergence, "Jacobi reconstruction error too large");
    return out;
}

std::vector<double> eig_oracle(const SymmetricMatrix& A) { return jacobi_eigen(A).values; }

ExtremalOptions anchor_options() {
    ExtremalOptions o;
    o.restarts = 8;
    return o;
}

std::pair<double, double> nmm_extreme_values(const SymmetricMatrix& A, const ExtremalOptions& options) {
    const ProblemSpec spec(LinearMatrix{A});
    const auto [lo, hi] = lambda_min_max(spec, options);
    return {lo.value(), hi.value()};
}

}  // namespace nq
