#pragma once

#include <optional>
#include <vector>

#include "nq/extended_real.hpp"
#include "nq/functional.hpp"
#include "nq/problem.hpp"

namespace nq {

/// The scalar fibered map t -> (T(tu), G(tu)) as generalized polynomials.
///
/// Each integral of the energy contributes c·value·t^deg, so once the terms
/// are evaluated every quantity along the ray (quotient, energy, their
/// t-derivatives, end limits) is scalar arithmetic.
class ScalarFiber {
public:
    explicit ScalarFiber(const std::vector<Term>& terms);
    static ScalarFiber of(const ProblemSpec& spec, const State& state);

    /// NG-Rayleigh quotient r(tu).
    double r(double t) const;
    /// ∂_t r(tu) computed as ∂²_tΦ_λ(tu) / ∂_tG(tu) at λ = r(tu).
    double dr(double t) const;

    double phi(double lambda, double t) const;
    double dphi(double lambda, double t) const;
    double d2phi(double lambda, double t) const;
    /// D_uG(tu)(tu), positive for every nonzero state of the PDE models.
    double pairing_dG(double t) const;

    ExtendedReal limit_at_zero() const;
    ExtendedReal limit_at_infinity() const;

    /// True when r(tu) does not depend on t (the derivative's generalized
    /// polynomial cancels identically).
    bool is_constant() const;

private:
    struct Mono {
        double exponent;
        double t_value;  // t_coef·value
        double g_value;  // g_coef·value
    };
    double sum_T(double t, int derivative) const;
    double sum_G(double t, int derivative) const;
    ExtendedReal limit(bool at_zero) const;

    std::vector<Mono> monos_;
};

enum class CriticalKind { Max, Min, Flat };

struct CriticalPoint {
    double t;
    double r;
    CriticalKind kind;
};

enum class ShapeClass { NoCritical, UniqueMax, UniqueMin, Constant, Other };

const char* to_string(ShapeClass s);
const char* to_string(CriticalKind k);

struct FiberProfile {
    std::vector<double> t_samples;
    std::vector<ExtendedReal> r_values;
    std::vector<double> dr_values;
    std::vector<CriticalPoint> critical_points;
    ShapeClass shape_class = ShapeClass::Other;
};

struct TWindow {
    double lo = 1e-6;
    double hi = 1e6;
    int samples = 200;
};

/// Log-spaced samples over the window.
std::vector<double> log_grid(const TWindow& w);

/// r(u); throws OutsideW when D_uG(u)(u) vanishes.
double rayleigh(const ProblemSpec& spec, const State& state);

FiberProfile fiber_scalar(const ProblemSpec& spec, const State& state, const std::vector<double>& t_grid);

double fiber_derivative(const ProblemSpec& spec, const State& state, double t);

/// Critical points of r(tu) bracketed on the sampled window, refined by
/// bisection and one Newton step.
std::vector<CriticalPoint> fiber_critical_points(const ScalarFiber& fiber, const TWindow& w = {});

/// Closed-form maximizer of the convex-concave fiber; throws DegenerateWeight
/// when ∫f|u|^γ = 0.
double t_max_convex_concave(const ProblemSpec& spec, const State& state);

/// Where a fiber supremum/infimum is realized.
struct FiberExtremum {
    enum class Where { Interior, AtZero, AtInfinity, Everywhere };
    ExtendedReal value;
    Where where = Where::Interior;
    double t = 1.0;  // meaningful for Interior
};

/// Λ(u) = sup_t r(t·u) and λ(u) = inf_t r(t·u).
///
/// Closed forms for the indefinite and convex-concave scalar models, the
/// convex-concave system (scalar fiber) and the indefinite system (vector
/// fiber); the general model goes through exact end limits plus interior
/// critical points.
ExtendedReal big_lambda(const ProblemSpec& spec, const State& state);
ExtendedReal small_lambda(const ProblemSpec& spec, const State& state);

/// Λ^{sc}(u) and λ^{sc}(u) from the scalar fiber for any model.
FiberExtremum scalar_fiber_sup(const ScalarFiber& fiber, const TWindow& w = {});
FiberExtremum scalar_fiber_inf(const ScalarFiber& fiber, const TWindow& w = {});

/// Value plus gradient of a 0-homogeneous direction functional.
struct ValueGradient {
    ExtendedReal value;
    std::vector<double> grad;  // empty when value is infinite
};

/// Λ^{sc}(u) with its envelope gradient (r differentiated at the frozen
/// maximizer, or the dominant-term ratio when the supremum is an end limit).
ValueGradient scalar_big_lambda_with_gradient(const ProblemSpec& spec, const State& state, const TWindow& w = {});
ValueGradient scalar_small_lambda_with_gradient(const ProblemSpec& spec, const State& state,
                                                const TWindow& w = {});

struct ShapeReport {
    ShapeClass shape = ShapeClass::Other;
    int sign_changes = 0;
    bool condition_a = false;   // unique global maximum
    bool condition_S = false;   // at most one critical point, which is global
    bool condition_S0 = false;  // no critical point or constant
};

ShapeReport classify_shape(const ProblemSpec& spec, const State& state, const TWindow& w = {});

}  // namespace nq
