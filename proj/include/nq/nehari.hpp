#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nq/errors.hpp"
#include "nq/fiber.hpp"
#include "nq/problem.hpp"

namespace nq {

/// N1: r(t·u) decreasing through t = 1 (fiber maximum of Φ_λ).
/// N2: increasing (fiber minimum).
enum class BranchTag { N1, N2 };
const char* to_string(BranchTag b);

struct NehariSolution {
    State state;
    double lambda = 0;
    BranchTag branch = BranchTag::N1;
    double phi_value = 0;
    double el_residual_norm = 0;
    double fiber_r = 0;
    int fiber_second_derivative_sign = 0;
    bool ground_state_flag = false;
    // Diagnostics.
    int iterations = 0;
    int restarts_used = 0;
    bool converged = false;
};

struct NehariOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_iter = 4000;
    double descent_tol = 1e-12;
    double residual_tol = 1e-7;
    /// λ*_max when already known; computed on demand otherwise.
    std::optional<double> lambda_star_max;
};

/// The t > 0 with r(t·u) = λ on the requested branch.
///
/// Throws NoIntersection when the ray misses the level λ on that branch and
/// DegenerateTangency when λ equals the fiber maximum.
double project_to_branch(const ProblemSpec& spec, double lambda, const State& state, BranchTag branch);
double project_to_branch(const ScalarFiber& fiber, double lambda, BranchTag branch);

/// min Φ_λ over one branch of the Nehari manifold by descent over
/// directions, each direction projected onto the branch.
///
/// Throws BranchEmpty when no direction reaches the branch (or λ lies at or
/// above λ*_max) and NoConvergence when the residual stays above tolerance.
NehariSolution minimize_branch(const ProblemSpec& spec, double lambda, BranchTag branch,
                               const NehariOptions& options = {});

/// A branch solve that may have failed, with the reason kept.
struct BranchOutcome {
    std::optional<NehariSolution> solution;
    std::optional<ErrorKind> error;
    std::string message;
};

struct SolutionPair {
    BranchOutcome first;   // N1
    BranchOutcome second;  // N2
    /// Energy-norm distance between the two states when both exist.
    std::optional<double> separation;
};

/// Both branches at one λ, ground-state flags set.
SolutionPair solve_pair(const ProblemSpec& spec, double lambda, const NehariOptions& options = {});

/// Solutions of the truncated problems on the cones u >= 0 and u <= 0, in
/// the order u¹⁺, u¹⁻, u²⁺, u²⁻ (the second pair only when that branch
/// exists). Each is checked against the untruncated residual.
std::vector<NehariSolution> sign_constant_pair(const ProblemSpec& spec, double lambda,
                                               const NehariOptions& options = {});

/// Vector Nehari minimization for the indefinite system: minimizes the
/// reduced energy J_λ over directions (u, v) whose fiber has a critical point
/// and rescales by the fiber roots. Throws EmptySet when no start qualifies.
NehariSolution system_nehari_minimize(const ProblemSpec& spec, double lambda, const NehariOptions& options = {});

struct Verification {
    double membership_error = 0;  // |r - λ|
    double residual_norm = 0;
    int second_derivative_sign = 0;
    std::optional<double> det_j;  // two-field models on the vector manifold
    double membership_tol = 1e-8;
    double residual_tol = 1e-7;
    bool membership_ok = false;
    bool residual_ok = false;
    bool branch_ok = false;
    bool det_ok = true;
    bool passed() const { return membership_ok && residual_ok && branch_ok && det_ok; }
};

/// Recomputes every invariant of a solution. Throws OutsideW for a zero state.
Verification verify_solution(const ProblemSpec& spec, double lambda, const NehariSolution& solution,
                             double residual_tol = 1e-7, double membership_tol = 1e-8);

}  // namespace nq
