#pragma once

#include <string_view>
#include <vector>

#include "nq/grid.hpp"
#include "nq/problem.hpp"

namespace nq {

/// One homogeneous integral of the energy, e.g. ∫|∇u|^p or ∫f|u|^α|v|^β.
///
/// Every model energy is T - λG with T = Σ t_coef·I_k and G = Σ g_coef·I_k.
/// Under the scaling (u, v) -> (t u, s v) the integral picks up t^deg_u s^deg_v,
/// so fibered maps, pairings and Nehari constraints are all exact
/// substitutions into these numbers.
struct Term {
    enum class Kind { Gradient, Mass, Weighted, Coupling, Quadratic, SquaredNorm };

    Kind kind;
    int component = 0;  // 0 = u, 1 = v for single-field integrals
    double t_coef = 0;
    double g_coef = 0;
    double deg_u = 0;
    double deg_v = 0;
    double value = 0;
    /// Flat gradient of `value` (length of flatten(state)); filled on request.
    std::vector<double> grad;

    double degree() const { return deg_u + deg_v; }
};

/// Evaluates every term; gradients only when asked.
std::vector<Term> decompose(const ProblemSpec& spec, const State& state, bool with_gradients = false);

struct EnergyBreakdown {
    double gradient_energy = 0;  // ∫|∇u|^p (+ ∫|∇v|^{p or q}); <Au,u> for matrices
    double q_mass = 0;           // ∫|u|^q resp. ∫(|u|^q + |v|^q); ∫|v|^q for the indefinite system
    double weighted_mass = 0;    // ∫f|u|^γ, Σ_i ∫f_i|u|^{γ_i}, or F(u,v)
    double p_mass = 0;           // ∫|u|^p where applicable; <u,u> for matrices

    // Per-component pieces of the two-field models.
    double gradient_u = 0;
    double gradient_v = 0;
    double mass_u = 0;
    double mass_v = 0;
    std::vector<double> term_masses;  // general convex-concave: ∫f_i|u|^{γ_i}
};

EnergyBreakdown energies(const ProblemSpec& spec, const State& state);

/// λ-free part G reconstructed from a breakdown; Φ_λ = Φ_0 - λ·g_part.
double g_part(const ProblemSpec& spec, const EnergyBreakdown& e);

/// Φ_λ(state) = T - λG.
double phi(const ProblemSpec& spec, double lambda, const State& state);

/// Discrete gradient of Φ_λ with respect to the nodal values.
///
/// Throws NonsmoothAtZero when an exponent below 2 meets a zero node (or a
/// zero difference quotient for p < 2) and the problem is not regularized.
State el_residual(const ProblemSpec& spec, double lambda, const State& state);

/// Same gradient without the smoothness guard, as a flat vector.
std::vector<double> phi_gradient(const ProblemSpec& spec, double lambda, const State& state);

/// D_uT(u)(u) and D_uG(u)(u).
double pairing_dT(const ProblemSpec& spec, const State& state);
double pairing_dG(const ProblemSpec& spec, const State& state);

/// Pairings from precomputed terms (Euler's identity on each integral).
double pairing_dT(const std::vector<Term>& terms);
double pairing_dG(const std::vector<Term>& terms);

double sup_norm(const State& s);
double sup_norm(std::span<const double> x);

/// Discrete H^1_0 seminorm sqrt(Σ h d_i²) summed over components; the
/// Euclidean norm for the matrix model.
double energy_norm(const ProblemSpec& spec, const State& s);

}  // namespace nq
