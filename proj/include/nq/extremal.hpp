#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nq/extended_real.hpp"
#include "nq/grid.hpp"
#include "nq/problem.hpp"

namespace nq {

struct ExtremalOptions {
    int restarts = 32;
    std::uint64_t seed = 0;
    int max_iter = 4000;
    double tol = 1e-10;
    double converged_tol = 1e-7;
    /// Values beyond this on every restart are reported as +inf.
    double infinity_threshold = 1e12;
};

/// Result of one outer optimization over directions.
struct OptimizedValue {
    ExtendedReal value;
    std::optional<State> argbest;
    int restarts_used = 0;
    bool converged = false;
    std::vector<double> history;  // running best after each restart
    std::string provenance;       // "closed-form", "certificate" or "optimized"
};

struct ExtremalReport {
    ExtendedReal lambda_min;
    ExtendedReal lambda_star_min;
    ExtendedReal lambda_star_max;
    ExtendedReal lambda_max;
    /// sup_u max of the fiber end limits; sampled over the start directions.
    ExtendedReal lambda_partial_min;
    /// Two-field models: infimum of the scalar-fiber Λ and of the vector-fiber Λ.
    std::optional<ExtendedReal> scalar_lambda_star_max;
    std::optional<ExtendedReal> vector_lambda_star_max;
    std::optional<State> minimizer_direction;  // for λ*_max, unit energy norm
    int restarts_used = 0;
    bool converged = false;
    std::vector<double> best_history;
    std::map<std::string, std::string> provenance;
};

struct EigenPair {
    double lambda1;
    DiscreteField phi1;
    double residual;  // sup-norm of the discrete residual
};

/// First eigenpair of the discrete p-Laplacian, φ₁ > 0 with ∫|∇φ₁|^p = 1.
EigenPair first_eigenpair(const GridDomain& grid, double p);

/// λ*_max = inf_u Λ(u).
OptimizedValue lambda_star_max_value(const ProblemSpec& spec, const ExtremalOptions& options = {},
                                     const std::vector<State>& extra_starts = {});

/// λ*_max packaged as a report (the other three fields left at their
/// defaults unless computed by extremal_report).
ExtremalReport lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// (λ_min, λ_max).
std::pair<ExtendedReal, ExtendedReal> lambda_min_max(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// λ*_min = sup_u λ(u).
OptimizedValue lambda_star_min_value(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// inf{∫|∇u|^p / ∫|u|^p : ∫f|u|^γ >= 0} by an augmented Lagrangian on the
/// single inequality.
OptimizedValue ouyang_constrained(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// inf{max(∫|∇u|^p/∫|u|^p, ∫|∇v|^q/∫|v|^q) : F(u,v) >= 0}.
OptimizedValue system_lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// inf over pairs of the scalar-fiber Λ^{sc}; the extra starts let callers
/// seed it with a vector-fiber minimizer.
OptimizedValue scalar_lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& options = {},
                                      const std::vector<State>& extra_starts = {});

/// Convex-concave system: inf over pairs of the closed-form Λ^{sc}.
double cc_system_lambda_star(const ProblemSpec& spec, const ExtremalOptions& options = {});

/// All four values with the ordering chain enforced by cross-seeding.
ExtremalReport extremal_report(const ProblemSpec& spec, const ExtremalOptions& options = {});

}  // namespace nq
