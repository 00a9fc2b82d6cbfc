#pragma once

#include <array>
#include <optional>
#include <utility>

#include "nq/functional.hpp"
#include "nq/problem.hpp"

namespace nq {

/// r(t·u, s·v) for the two-field models.
double vector_fiber_eval(const ProblemSpec& spec, const FieldPair& pair, double t, double s);

/// P_λ(u) = ∫|∇u|^p - λ∫|u|^p, Q_λ(v) likewise with q, and F(u,v).
struct SystemIntegrals {
    double P;
    double Q;
    double F;
};

SystemIntegrals system_integrals(const ProblemSpec& spec, double lambda, const FieldPair& pair);

/// The same closed forms on bare integrals.
std::pair<double, double> fiber_roots(const IndefiniteSystem& m, const SystemIntegrals& I);
double j_lambda(const IndefiniteSystem& m, const SystemIntegrals& I);
double det_j_closed_form(const IndefiniteSystem& m, double F);

/// Unique positive root (t, s) of ∂_tΦ_λ(tu, sv) = ∂_sΦ_λ(tu, sv) = 0.
///
/// Exists when P_λ, Q_λ, F are all positive or all negative; otherwise throws
/// NotInAB.
std::pair<double, double> system_fiber_roots(const ProblemSpec& spec, double lambda, const FieldPair& pair);

/// (t·∂_tΦ_λ, s·∂_sΦ_λ) at (t·u, s·v).
std::array<double, 2> system_nehari_residual(const ProblemSpec& spec, double lambda, const FieldPair& pair, double t,
                                             double s);

/// Φ_λ(t·u, s·v) at the fiber roots in closed form.
double j_lambda(const ProblemSpec& spec, double lambda, const FieldPair& pair);

/// Hessian of (t, s) -> Φ_λ(t·u, s·v) at (t, s); on the Nehari manifold at
/// (1, 1) this is the fibering Jacobian.
std::array<double, 4> fiber_hessian(const ProblemSpec& spec, double lambda, const FieldPair& pair, double t = 1.0,
                                    double s = 1.0);

struct NehariDeterminant {
    double closed_form;
    double entrywise;
    std::array<double, 4> jacobian;
    double lambda;
};

/// det J = αβ(pq - pβ - qα)F² on the Nehari manifold, cross-checked against
/// the entrywise Hessian. Without λ it is inferred from the u-constraint.
/// Throws NotOnNehari when a constraint is off by more than 1e-8.
NehariDeterminant det_j_nehari(const ProblemSpec& spec, const FieldPair& pair,
                               std::optional<double> lambda = std::nullopt);

}  // namespace nq
