#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nq::opt {

/// Value and Euclidean gradient of a scale-invariant objective. Infinite
/// values carry no gradient. `scale` is a magnitude used for relative
/// tolerances (constraints only).
struct Eval {
    double value = 0;
    std::vector<double> grad;
    double scale = 1;
};

using Function = std::function<Eval(std::span<const double>)>;

/// Block-diagonal SPD preconditioner. A block with an exponent is the
/// stiffness matrix of the discrete r-Laplacian linearized at the current
/// iterate, Dᵀ diag(|d_i|^{r-2}) D; a block without one is the identity.
struct Preconditioner {
    int block = 0;  // nodes per component
    int blocks = 1;
    double h = 1;
    std::vector<double> exponents;  // per block; empty means identity

    std::vector<double> solve(std::span<const double> x, std::span<const double> g) const;
    /// Energy norm of one block (plain stiffness), or Euclidean for identity.
    double block_norm(std::span<const double> x, int b) const;
};

enum class Normalize { Joint, PerBlock };

/// Minimize max_i piece_i(x) over directions, optionally subject to c(x) >= 0.
///
/// All functions must be invariant under positive rescaling of x (jointly,
/// or per block with Normalize::PerBlock).
struct Problem {
    std::vector<Function> pieces;
    std::optional<Function> constraint;
    Preconditioner precond;
    Normalize normalize = Normalize::Joint;
};

struct Options {
    int max_iter = 4000;
    double tol = 1e-10;         // stop when stationarity <= tol·max(1, |f|)
    double converged_tol = 1e-7;  // reported as converged below this
    double armijo = 1e-4;
    /// Stop as soon as the objective drops to this level (feasibility phases).
    std::optional<double> stop_below;
    /// Stop after this many consecutive steps whose decrease is at rounding
    /// level (0 disables). Suits value-only searches; solves that need a
    /// small gradient leave it off.
    int stall_steps = 0;
};

struct Result {
    std::vector<double> x;
    double value = 0;
    double stationarity = 0;
    int iterations = 0;
    bool converged = false;
    bool feasible = true;
};

Result descend(const Problem& problem, std::vector<double> x0, const Options& options = {});

/// Single-piece, unconstrained: steps along the preconditioned gradient,
/// accepting on a drop of the stationarity measure instead of the value.
/// Meant for finishing inside a minimizer's basin, where the value is flat to
/// rounding long before the gradient is small.
Result polish(const Problem& problem, std::vector<double> x, const Options& options = {});

/// Scale x so every block (or the whole vector) has unit norm.
void normalize(const Problem& problem, std::vector<double>& x);

struct MultiResult {
    double best = 0;
    std::vector<double> best_x;
    std::vector<double> history;  // running best after each restart
    int restarts = 0;
    bool converged = false;
    std::vector<Result> runs;
};

/// Independent descents from each start, reduced to the best value.
MultiResult multistart(const Problem& problem, const std::vector<std::vector<double>>& starts,
                       const Options& options = {});

}  // namespace nq::opt
