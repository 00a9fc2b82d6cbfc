#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nq/grid.hpp"
#include "nq/symmetric_matrix.hpp"

namespace nq {

/// -Δ_p u = λ|u|^{p-2}u + f|u|^{γ-2}u, f of any sign.
struct IndefiniteScalar {
    double p;
    double gamma;
    DiscreteField f;
};

/// -Δ_p u = λ|u|^{q-2}u + f|u|^{γ-2}u with 1 < q < p < γ and f >= 0.
struct ConvexConcaveScalar {
    double p;
    double q;
    double gamma;
    DiscreteField f;
};

/// Coupled pair, both components driven by the p-Laplacian, sublinear
/// q-terms and the coupling f|u|^α|v|^β.
struct ConvexConcaveSystem {
    double p;
    double q;
    double alpha;
    double beta;
    DiscreteField f;
};

/// -Δ_p u = λ|u|^{p-2}u + αf|u|^{α-2}u|v|^β, -Δ_q v = λ|v|^{q-2}v + βf|u|^α|v|^{β-2}v.
struct IndefiniteSystem {
    double p;
    double q;
    double alpha;
    double beta;
    DiscreteField f;
};

struct WeightedPower {
    double gamma;
    DiscreteField f;
};

/// -Δ_p u = λ|u|^{q-2}u + Σ_i f_i|u|^{γ_i-2}u.
struct GeneralConvexConcave {
    double p;
    double q;
    std::vector<WeightedPower> terms;
};

/// A u = λ u for a real symmetric matrix.
struct LinearMatrix {
    SymmetricMatrix A;
};

using ProblemVariant = std::variant<IndefiniteScalar, ConvexConcaveScalar, ConvexConcaveSystem, IndefiniteSystem,
                                    GeneralConvexConcave, LinearMatrix>;

/// A validated model problem.
///
/// `regularization` (ε) switches |s|^{r-2}s to (s²+ε²)^{(r-2)/2}s inside the
/// energy and its gradient, which makes exponents below 2 differentiable at
/// zero. Zero (the default) means the exact power laws.
class ProblemSpec {
public:
    explicit ProblemSpec(ProblemVariant variant, double regularization = 0.0);

    const ProblemVariant& variant() const { return variant_; }
    double regularization() const { return regularization_; }

    /// True for the two-component models.
    bool is_system() const;
    /// Grid carried by the weight fields (index space for matrices).
    GridDomain grid() const;
    /// Stable identifier used in config files and reports.
    std::string tag() const;

    template <class T>
    const T* as() const {
        return std::get_if<T>(&variant_);
    }

    /// Zero state with the arity this problem expects.
    State zero_state() const;

private:
    ProblemVariant variant_;
    double regularization_;
};

/// Throws ArityMismatch unless the state's arity (and grid size) fit.
void check_arity(const ProblemSpec& spec, const State& state);

}  // namespace nq
