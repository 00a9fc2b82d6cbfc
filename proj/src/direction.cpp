#include "nq/direction.hpp"

#include <cmath>
#include <random>

namespace nq {

opt::Preconditioner preconditioner_for(const ProblemSpec& spec) {
    opt::Preconditioner P;
    const GridDomain g = spec.grid();
    P.block = g.n();
    P.h = g.h();
    if (spec.as<LinearMatrix>()) return P;
    if (const auto* s = spec.as<IndefiniteScalar>()) P.exponents = {s->p};
    if (const auto* s = spec.as<ConvexConcaveScalar>()) P.exponents = {s->p};
    if (const auto* s = spec.as<GeneralConvexConcave>()) P.exponents = {s->p};
    if (const auto* s = spec.as<ConvexConcaveSystem>()) P.exponents = {s->p, s->p};
    if (const auto* s = spec.as<IndefiniteSystem>()) P.exponents = {s->p, s->q};
    P.blocks = static_cast<int>(P.exponents.size());
    return P;
}

State to_state(const ProblemSpec& spec, std::span<const double> x) {
    const GridDomain g = spec.grid();
    const std::size_t n = g.n();
    if (spec.is_system()) {
        return FieldPair(DiscreteField(g, {x.begin(), x.begin() + n}), DiscreteField(g, {x.begin() + n, x.end()}));
    }
    return DiscreteField(g, {x.begin(), x.end()});
}

std::vector<std::vector<double>> seeded_starts(const ProblemSpec& spec, int count, std::uint64_t seed) {
    const GridDomain g = spec.grid();
    const int n = g.n();
    const int blocks = spec.is_system() ? 2 : 1;
    const bool matrix = spec.as<LinearMatrix>() != nullptr;
    const double pi = std::acos(-1.0);
    std::vector<std::vector<double>> out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
        std::vector<double> x(static_cast<std::size_t>(blocks) * n);
        for (int b = 0; b < blocks; ++b) {
            if (matrix) {
                for (int i = 0; i < n; ++i) x[i] = k == 0 ? 1.0 : N(rng);
                continue;
            }
            double c[5] = {1, 0, 0, 0, 0};
            if (k > 0)
                for (double& ci : c) ci = N(rng) / (1.0 + 0.5 * (&ci - c));
            for (int i = 0; i < n; ++i) {
                const double xi = (i + 1.0) / (n + 1.0);
                double s = 0;
                for (int m = 0; m < 5; ++m) s += c[m] * std::sin((m + 1) * pi * xi);
                x[b * n + i] = s;
            }
        }
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<std::vector<double>> hat_probes(const ProblemSpec& spec) {
    const int n = spec.grid().n();
    const int blocks = spec.is_system() ? 2 : 1;
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) {
        std::vector<double> x(static_cast<std::size_t>(blocks) * n, 0.0);
        for (int b = 0; b < blocks; ++b) x[b * n + i] = 1.0;
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace nq
