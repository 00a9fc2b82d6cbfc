#include "nq/problem.hpp"

#include <algorithm>
#include <cmath>

#include "nq/errors.hpp"

namespace nq {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::InvalidSpec, what);
}

bool finite(double x) { return std::isfinite(x); }

void require_nonnegative(const DiscreteField& f, const std::string& name) {
    for (double x : f.values()) require(x >= 0.0, name + " must be >= 0 at every node");
}

struct Validator {
    void operator()(const IndefiniteScalar& s) const {
        require(finite(s.p) && finite(s.gamma), "exponents must be finite");
        require(1.0 < s.p && s.p < s.gamma, "indefinite scalar needs 1 < p < gamma");
    }
    void operator()(const ConvexConcaveScalar& s) const {
        require(finite(s.p) && finite(s.q) && finite(s.gamma), "exponents must be finite");
        require(1.0 < s.q && s.q < s.p && s.p < s.gamma, "convex-concave scalar needs 1 < q < p < gamma");
        require_nonnegative(s.f, "f");
    }
    void operator()(const ConvexConcaveSystem& s) const {
        require(finite(s.p) && finite(s.q) && finite(s.alpha) && finite(s.beta), "exponents must be finite");
        require(s.alpha > 0 && s.beta > 0, "alpha and beta must be positive");
        require(1.0 < s.q && s.q < s.p && s.p < s.alpha + s.beta,
                "convex-concave system needs 1 < q < p < alpha + beta");
        require_nonnegative(s.f, "f");
    }
    void operator()(const IndefiniteSystem& s) const {
        require(finite(s.p) && finite(s.q) && finite(s.alpha) && finite(s.beta), "exponents must be finite");
        require(s.p > 1 && s.q > 1, "p and q must exceed 1");
        require(s.alpha > 0 && s.beta > 0, "alpha and beta must be positive");
        require(s.alpha / s.p + s.beta / s.q > 1.0, "indefinite system needs alpha/p + beta/q > 1");
    }
    void operator()(const GeneralConvexConcave& s) const {
        require(finite(s.p) && finite(s.q), "exponents must be finite");
        require(1.0 < s.q && s.q < s.p, "general convex-concave needs 1 < q < p");
        require(!s.terms.empty(), "general convex-concave needs at least one power term");
        const GridDomain& g = s.terms.front().f.domain();
        for (const auto& t : s.terms) {
            require(finite(t.gamma) && t.gamma > s.p, "every gamma_i must exceed p");
            require(t.f.domain() == g, "all weights must share one grid");
            require_nonnegative(t.f, "f_i");
        }
        // The superlinear growth condition holds with theta = min gamma_i > p,
        // which the loop above enforces.
    }
    void operator()(const LinearMatrix&) const {}  // symmetry is checked by SymmetricMatrix
};

}  // namespace

ProblemSpec::ProblemSpec(ProblemVariant variant, double regularization)
    : variant_(std::move(variant)), regularization_(regularization) {
    require(std::isfinite(regularization) && regularization >= 0.0, "regularization must be >= 0");
    std::visit(Validator{}, variant_);
}

bool ProblemSpec::is_system() const {
    return std::holds_alternative<ConvexConcaveSystem>(variant_) || std::holds_alternative<IndefiniteSystem>(variant_);
}

GridDomain ProblemSpec::grid() const {
    return std::visit(
        [](const auto& s) -> GridDomain {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearMatrix>) {
                return GridDomain::index_space(s.A.dim());
            } else if constexpr (std::is_same_v<T, GeneralConvexConcave>) {
                return s.terms.front().f.domain();
            } else {
                return s.f.domain();
            }
        },
        variant_);
}

std::string ProblemSpec::tag() const {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IndefiniteScalar>) return "indefinite_scalar";
            if constexpr (std::is_same_v<T, ConvexConcaveScalar>) return "convex_concave_scalar";
            if constexpr (std::is_same_v<T, ConvexConcaveSystem>) return "convex_concave_system";
            if constexpr (std::is_same_v<T, IndefiniteSystem>) return "indefinite_system";
            if constexpr (std::is_same_v<T, GeneralConvexConcave>) return "general_convex_concave";
            if constexpr (std::is_same_v<T, LinearMatrix>) return "linear_matrix";
        },
        variant_);
}

State ProblemSpec::zero_state() const {
    GridDomain g = grid();
    if (is_system()) return FieldPair(DiscreteField(g), DiscreteField(g));
    return DiscreteField(g);
}

void check_arity(const ProblemSpec& spec, const State& state) {
    if (spec.is_system() != is_pair(state))
        fail(ErrorKind::ArityMismatch, spec.is_system() ? "system problem needs a field pair"
                                                        : "scalar problem needs a single field");
    if (domain_of(state).n() != spec.grid().n())
        fail(ErrorKind::ArityMismatch, "state has " + std::to_string(domain_of(state).n()) +
                                           " nodes, problem grid has " + std::to_string(spec.grid().n()));
}

}  // namespace nq
