#include "nq/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nq/errors.hpp"

namespace nq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Numerator/denominator coefficients of r(tu) collected per exponent.
struct Group {
    double exponent;
    double n = 0;  // Σ t_coef·deg·value
    double d = 0;  // Σ g_coef·deg·value
};

bool same_exponent(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::vector<Group> groups_of(const std::vector<Term>& terms) {
    std::vector<Group> out;
    for (const auto& t : terms) {
        const double e = t.degree();
        auto it = std::find_if(out.begin(), out.end(), [&](const Group& g) { return same_exponent(g.exponent, e); });
        if (it == out.end()) {
            out.push_back({e});
            it = out.end() - 1;
        }
        it->n += t.t_coef * e * t.value;
        it->d += t.g_coef * e * t.value;
    }
    std::sort(out.begin(), out.end(), [](const Group& a, const Group& b) { return a.exponent < b.exponent; });
    return out;
}

double magnitude(const std::vector<Group>& gs, bool numerator) {
    double m = 0;
    for (const auto& g : gs) m = std::max(m, std::abs(numerator ? g.n : g.d));
    return m;
}

/// Dominant group (lowest exponent at t -> 0, highest at t -> ∞) with a
/// coefficient that does not vanish to rounding.
const Group* dominant(const std::vector<Group>& gs, bool numerator, bool at_zero) {
    const double tiny = 1e-14 * magnitude(gs, numerator);
    auto usable = [&](const Group& g) {
        const double c = numerator ? g.n : g.d;
        return c != 0.0 && std::abs(c) > tiny;
    };
    if (at_zero) {
        for (const auto& g : gs)
            if (usable(g)) return &g;
    } else {
        for (auto it = gs.rbegin(); it != gs.rend(); ++it)
            if (usable(*it)) return &*it;
    }
    return nullptr;
}

/// Exact limit of N(t)/D(t) from the dominant terms, plus which exponent
/// realized it (NaN when the limit is 0 or infinite).
std::pair<ExtendedReal, double> end_limit(const std::vector<Group>& gs, bool at_zero) {
    const Group* dn = dominant(gs, true, at_zero);
    const Group* dd = dominant(gs, false, at_zero);
    if (dd == nullptr) fail(ErrorKind::OutsideW, "D_uG(u)(u) vanishes identically along the ray");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (dn == nullptr) return {0.0, nan};
    if (same_exponent(dn->exponent, dd->exponent)) return {dn->n / dd->d, dn->exponent};
    // Numerator decays faster than the denominator at this end.
    const bool numerator_wins = at_zero ? dn->exponent < dd->exponent : dn->exponent > dd->exponent;
    if (!numerator_wins) return {0.0, nan};
    const double s = (dn->n > 0) == (dd->d > 0) ? 1.0 : -1.0;
    return {s > 0 ? ExtendedReal::pos_inf() : ExtendedReal::neg_inf(), nan};
}

double refine_root(const ScalarFiber& f, double lo, double hi) {
    double dlo = f.dr(lo);
    // Bisection in log t to a relative width of 1e-12.
    while (hi / lo - 1.0 > 1e-12) {
        const double mid = std::sqrt(lo * hi);
        const double dm = f.dr(mid);
        if (dm == 0.0) return mid;
        if ((dm > 0) == (dlo > 0)) {
            lo = mid;
            dlo = dm;
        } else {
            hi = mid;
        }
    }
    double t = std::sqrt(lo * hi);
    // One Newton polish on dr, kept only if it improves and stays bracketed.
    const double step = 1e-6 * t;
    const double d2 = (f.dr(t + step) - f.dr(t - step)) / (2 * step);
    if (d2 != 0.0 && std::isfinite(d2)) {
        const double cand = t - f.dr(t) / d2;
        if (cand > lo * (1 - 1e-12) && cand < hi * (1 + 1e-12) && std::abs(f.dr(cand)) < std::abs(f.dr(t))) t = cand;
    }
    return t;
}

std::vector<Term> normalized_terms(const ProblemSpec& spec, const State& state, double& scale, bool grads) {
    scale = energy_norm(spec, state);
    if (scale == 0.0) fail(ErrorKind::OutsideW, "zero state");
    return decompose(spec, scaled(state, 1.0 / scale), grads);
}

}  // namespace

ScalarFiber::ScalarFiber(const std::vector<Term>& terms) {
    for (const auto& t : terms) monos_.push_back({t.degree(), t.t_coef * t.value, t.g_coef * t.value});
}

ScalarFiber ScalarFiber::of(const ProblemSpec& spec, const State& state) { return ScalarFiber(decompose(spec, state)); }

double ScalarFiber::sum_T(double t, int derivative) const {
    double acc = 0;
    for (const auto& m : monos_) {
        if (m.t_value == 0.0) continue;
        double c = m.t_value;
        for (int k = 0; k < derivative; ++k) c *= m.exponent - k;
        acc += c * std::pow(t, m.exponent - derivative);
    }
    return acc;
}

double ScalarFiber::sum_G(double t, int derivative) const {
    double acc = 0;
    for (const auto& m : monos_) {
        if (m.g_value == 0.0) continue;
        double c = m.g_value;
        for (int k = 0; k < derivative; ++k) c *= m.exponent - k;
        acc += c * std::pow(t, m.exponent - derivative);
    }
    return acc;
}

double ScalarFiber::pairing_dG(double t) const { return t * sum_G(t, 1); }

double ScalarFiber::r(double t) const {
    const double d = pairing_dG(t);
    double scale = 0;
    for (const auto& m : monos_) scale += std::abs(m.g_value * m.exponent) * std::pow(t, m.exponent);
    if (d == 0.0 || std::abs(d) < 1e-14 * scale) fail(ErrorKind::OutsideW, "D_uG(tu)(tu) = 0");
    return t * sum_T(t, 1) / d;
}

double ScalarFiber::phi(double lambda, double t) const { return sum_T(t, 0) - lambda * sum_G(t, 0); }
double ScalarFiber::dphi(double lambda, double t) const { return sum_T(t, 1) - lambda * sum_G(t, 1); }
double ScalarFiber::d2phi(double lambda, double t) const { return sum_T(t, 2) - lambda * sum_G(t, 2); }

double ScalarFiber::dr(double t) const {
    const double lambda = r(t);
    return d2phi(lambda, t) / sum_G(t, 1);
}

ExtendedReal ScalarFiber::limit(bool at_zero) const {
    std::vector<Term> fake;
    for (const auto& m : monos_) {
        Term t{Term::Kind::Mass, 0, m.t_value, m.g_value, m.exponent, 0.0};
        t.value = 1.0;
        fake.push_back(t);
    }
    return end_limit(groups_of(fake), at_zero).first;
}

ExtendedReal ScalarFiber::limit_at_zero() const { return limit(true); }
ExtendedReal ScalarFiber::limit_at_infinity() const { return limit(false); }

bool ScalarFiber::is_constant() const {
    // t·(N'D - ND') = Σ a_i b_j (e_i - e_j) t^{e_i+e_j}; constant iff every
    // exponent class cancels.
    std::map<double, double> coef;
    double scale = 0;
    for (const auto& a : monos_) {
        for (const auto& b : monos_) {
            const double ai = a.t_value * a.exponent;
            const double bj = b.g_value * b.exponent;
            const double c = ai * bj * (a.exponent - b.exponent);
            if (c == 0.0) continue;
            coef[a.exponent + b.exponent] += c;
            scale += std::abs(c);
        }
    }
    for (const auto& [e, c] : coef)
        if (std::abs(c) > 1e-13 * scale) return false;
    return true;
}

const char* to_string(ShapeClass s) {
    switch (s) {
        case ShapeClass::NoCritical: return "NoCritical";
        case ShapeClass::UniqueMax: return "UniqueMax";
        case ShapeClass::UniqueMin: return "UniqueMin";
        case ShapeClass::Constant: return "Constant";
        case ShapeClass::Other: return "Other";
    }
    return "Other";
}

const char* to_string(CriticalKind k) {
    switch (k) {
        case CriticalKind::Max: return "max";
        case CriticalKind::Min: return "min";
        case CriticalKind::Flat: return "flat";
    }
    return "flat";
}

std::vector<double> log_grid(const TWindow& w) {
    if (!(w.lo > 0) || !(w.hi > w.lo) || w.samples < 2) fail(ErrorKind::InvalidSpec, "invalid t window");
    std::vector<double> t(w.samples);
    const double a = std::log(w.lo);
    const double b = std::log(w.hi);
    for (int i = 0; i < w.samples; ++i) t[i] = std::exp(a + (b - a) * i / (w.samples - 1));
    t.front() = w.lo;
    t.back() = w.hi;
    return t;
}

double rayleigh(const ProblemSpec& spec, const State& state) {
    const auto terms = decompose(spec, state);
    const double d = pairing_dG(terms);
    double scale = 0;
    for (const auto& t : terms) scale += std::abs(t.g_coef * t.degree() * t.value);
    if (d == 0.0 || std::abs(d) < 1e-14 * scale) fail(ErrorKind::OutsideW, "D_uG(u)(u) = 0");
    return pairing_dT(terms) / d;
}

namespace {

std::vector<CriticalPoint> criticals_on(const ScalarFiber& f, const std::vector<double>& t,
                                        const std::vector<double>& dr) {
    std::vector<CriticalPoint> out;
    if (f.is_constant()) return out;
    int last = -1;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (dr[i] == 0.0) continue;
        if (last >= 0 && (dr[last] > 0) != (dr[i] > 0)) {
            const double root = refine_root(f, t[last], t[i]);
            out.push_back({root, f.r(root), dr[last] > 0 ? CriticalKind::Max : CriticalKind::Min});
        }
        last = static_cast<int>(i);
    }
    return out;
}

ShapeClass shape_from(const ScalarFiber& f, const std::vector<double>& dr, int& changes) {
    changes = 0;
    if (f.is_constant()) return ShapeClass::Constant;
    int last = 0;
    int first_sign = 0;
    for (double d : dr) {
        if (d == 0.0) continue;
        const int s = d > 0 ? 1 : -1;
        if (first_sign == 0) first_sign = s;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    if (first_sign == 0) return ShapeClass::Other;
    if (changes == 0) return ShapeClass::NoCritical;
    if (changes == 1) return first_sign > 0 ? ShapeClass::UniqueMax : ShapeClass::UniqueMin;
    return ShapeClass::Other;
}

}  // namespace

FiberProfile fiber_scalar(const ProblemSpec& spec, const State& state, const std::vector<double>& t_grid) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
            fail(ErrorKind::InvalidSpec, "t grid must be positive and strictly increasing");
    }
    const ScalarFiber f = ScalarFiber::of(spec, state);
    FiberProfile p;
    p.t_samples = t_grid;
    for (double t : t_grid) {
        p.r_values.emplace_back(f.r(t));
        p.dr_values.push_back(f.dr(t));
    }
    p.critical_points = criticals_on(f, p.t_samples, p.dr_values);
    int changes = 0;
    p.shape_class = shape_from(f, p.dr_values, changes);
    return p;
}

double fiber_derivative(const ProblemSpec& spec, const State& state, double t) {
    if (!(t > 0)) fail(ErrorKind::InvalidSpec, "t must be positive");
    return ScalarFiber::of(spec, state).dr(t);
}

std::vector<CriticalPoint> fiber_critical_points(const ScalarFiber& fiber, const TWindow& w) {
    const auto t = log_grid(w);
    std::vector<double> dr;
    dr.reserve(t.size());
    for (double x : t) dr.push_back(fiber.dr(x));
    return criticals_on(fiber, t, dr);
}

double t_max_convex_concave(const ProblemSpec& spec, const State& state) {
    const auto* s = spec.as<ConvexConcaveScalar>();
    if (s == nullptr) fail(ErrorKind::InvalidSpec, "t_max closed form needs the convex-concave scalar model");
    const auto e = energies(spec, state);
    if (e.weighted_mass <= 0.0) fail(ErrorKind::DegenerateWeight, "∫f|u|^γ = 0: the fiber increases without bound");
    if (e.q_mass == 0.0) fail(ErrorKind::OutsideW, "zero state");
    return std::pow((s->p - s->q) * e.gradient_energy / ((s->gamma - s->q) * e.weighted_mass), 1.0 / (s->gamma - s->p));
}

FiberExtremum scalar_fiber_sup(const ScalarFiber& fiber, const TWindow& w) {
    if (fiber.is_constant()) return {fiber.r(1.0), FiberExtremum::Where::Everywhere, 1.0};
    FiberExtremum best{fiber.limit_at_zero(), FiberExtremum::Where::AtZero, 0.0};
    const ExtendedReal at_inf = fiber.limit_at_infinity();
    if (at_inf > best.value) best = {at_inf, FiberExtremum::Where::AtInfinity, kInf};
    for (const auto& c : fiber_critical_points(fiber, w))
        if (c.kind == CriticalKind::Max && ExtendedReal(c.r) > best.value)
            best = {c.r, FiberExtremum::Where::Interior, c.t};
    return best;
}

FiberExtremum scalar_fiber_inf(const ScalarFiber& fiber, const TWindow& w) {
    if (fiber.is_constant()) return {fiber.r(1.0), FiberExtremum::Where::Everywhere, 1.0};
    FiberExtremum best{fiber.limit_at_zero(), FiberExtremum::Where::AtZero, 0.0};
    const ExtendedReal at_inf = fiber.limit_at_infinity();
    if (at_inf < best.value) best = {at_inf, FiberExtremum::Where::AtInfinity, kInf};
    for (const auto& c : fiber_critical_points(fiber, w))
        if (c.kind == CriticalKind::Min && ExtendedReal(c.r) < best.value)
            best = {c.r, FiberExtremum::Where::Interior, c.t};
    return best;
}

namespace {

/// Gradient in u of r(t·u) at a frozen t, or of the dominant-term ratio when
/// the extremum is an end limit.
std::vector<double> envelope_gradient(const std::vector<Term>& terms, const FiberExtremum& ext) {
    const std::size_t n = terms.front().grad.size();
    std::vector<double> g(n, 0.0);
    const double r = ext.value.value();
    auto accumulate = [&](auto&& weight) {
        double d = 0;
        for (const auto& t : terms) {
            const double w = weight(t);
            if (w == 0.0) continue;
            d += t.g_coef * t.degree() * t.value * w;
            const double c = (t.t_coef - r * t.g_coef) * t.degree() * w;
            for (std::size_t i = 0; i < n; ++i) g[i] += c * t.grad[i];
        }
        for (double& x : g) x /= d;
    };
    if (ext.where == FiberExtremum::Where::Interior || ext.where == FiberExtremum::Where::Everywhere) {
        accumulate([&](const Term& t) { return std::pow(ext.t, t.degree()); });
        return g;
    }
    const auto [value, exponent] = end_limit(groups_of(terms), ext.where == FiberExtremum::Where::AtZero);
    (void)value;
    if (std::isnan(exponent)) return g;  // the limit is 0 for every nearby u
    accumulate([&](const Term& t) { return same_exponent(t.degree(), exponent) ? 1.0 : 0.0; });
    return g;
}

ValueGradient with_gradient(const ProblemSpec& spec, const State& state, const TWindow& w, bool sup) {
    double scale = 1;
    const auto terms = normalized_terms(spec, state, scale, true);
    const ScalarFiber f(terms);
    const FiberExtremum ext = sup ? scalar_fiber_sup(f, w) : scalar_fiber_inf(f, w);
    ValueGradient out{ext.value, {}};
    if (!ext.value.is_finite()) return out;
    out.grad = envelope_gradient(terms, ext);
    // 0-homogeneity: ∇Λ(u) = ∇Λ(u/c)/c.
    for (double& x : out.grad) x /= scale;
    return out;
}

ExtendedReal generic_sup(const ProblemSpec& spec, const State& state) {
    double scale = 1;
    return scalar_fiber_sup(ScalarFiber(normalized_terms(spec, state, scale, false))).value;
}

ExtendedReal generic_inf(const ProblemSpec& spec, const State& state) {
    double scale = 1;
    return scalar_fiber_inf(ScalarFiber(normalized_terms(spec, state, scale, false))).value;
}

/// Λ for r(tu) = (t^{p-q}A - t^{γ-q}B)/K with B > 0.
double convex_concave_peak(double p, double q, double gamma, double A, double K, double B) {
    const double c = (gamma - p) / (p - q) * std::pow((p - q) / (gamma - q), (gamma - q) / (gamma - p));
    return c * std::pow(A, (gamma - q) / (gamma - p)) / (K * std::pow(B, (p - q) / (gamma - p)));
}

struct SystemQuotients {
    double ru, rv, F;
    bool has_u, has_v;
};

SystemQuotients system_quotients(const ProblemSpec& spec, const State& state) {
    const auto e = energies(spec, state);
    if (e.mass_u == 0.0 && e.mass_v == 0.0) fail(ErrorKind::OutsideW, "zero pair");
    SystemQuotients s{0, 0, e.weighted_mass, e.mass_u > 0, e.mass_v > 0};
    if (s.has_u) s.ru = e.gradient_u / e.mass_u;
    if (s.has_v) s.rv = e.gradient_v / e.mass_v;
    return s;
}

}  // namespace

ExtendedReal big_lambda(const ProblemSpec& spec, const State& state) {
    if (const auto* s = spec.as<IndefiniteScalar>()) {
        const auto e = energies(spec, state);
        if (e.p_mass == 0.0) fail(ErrorKind::OutsideW, "zero state");
        (void)s;
        return e.weighted_mass >= 0 ? ExtendedReal(e.gradient_energy / e.p_mass) : ExtendedReal::pos_inf();
    }
    if (const auto* s = spec.as<ConvexConcaveScalar>()) {
        const auto e = energies(spec, state);
        if (e.q_mass == 0.0) fail(ErrorKind::OutsideW, "zero state");
        if (e.weighted_mass <= 0.0) return ExtendedReal::pos_inf();
        return convex_concave_peak(s->p, s->q, s->gamma, e.gradient_energy, e.q_mass, e.weighted_mass);
    }
    if (const auto* s = spec.as<ConvexConcaveSystem>()) {
        const auto e = energies(spec, state);
        if (e.q_mass == 0.0) fail(ErrorKind::OutsideW, "zero pair");
        const double gamma = s->alpha + s->beta;
        if (e.weighted_mass <= 0.0) return ExtendedReal::pos_inf();
        return convex_concave_peak(s->p, s->q, gamma, e.gradient_energy, e.q_mass, gamma * e.weighted_mass);
    }
    if (spec.as<IndefiniteSystem>()) {
        const auto q = system_quotients(spec, state);
        if (!q.has_u || !q.has_v) return q.has_u ? q.ru : q.rv;
        return q.F >= 0 ? ExtendedReal(std::max(q.ru, q.rv)) : ExtendedReal::pos_inf();
    }
    if (spec.as<LinearMatrix>()) return rayleigh(spec, state);
    return generic_sup(spec, state);
}

ExtendedReal small_lambda(const ProblemSpec& spec, const State& state) {
    if (spec.as<IndefiniteScalar>()) {
        const auto e = energies(spec, state);
        if (e.p_mass == 0.0) fail(ErrorKind::OutsideW, "zero state");
        return e.weighted_mass > 0 ? ExtendedReal::neg_inf() : ExtendedReal(e.gradient_energy / e.p_mass);
    }
    if (spec.as<ConvexConcaveScalar>() || spec.as<ConvexConcaveSystem>()) {
        const auto e = energies(spec, state);
        if (e.q_mass == 0.0) fail(ErrorKind::OutsideW, "zero state");
        return e.weighted_mass > 0 ? ExtendedReal::neg_inf() : ExtendedReal(0.0);
    }
    if (spec.as<IndefiniteSystem>()) {
        const auto q = system_quotients(spec, state);
        if (!q.has_u || !q.has_v) return q.has_u ? q.ru : q.rv;
        return q.F > 0 ? ExtendedReal::neg_inf() : ExtendedReal(std::min(q.ru, q.rv));
    }
    if (spec.as<LinearMatrix>()) return rayleigh(spec, state);
    return generic_inf(spec, state);
}

ValueGradient scalar_big_lambda_with_gradient(const ProblemSpec& spec, const State& state, const TWindow& w) {
    return with_gradient(spec, state, w, true);
}

ValueGradient scalar_small_lambda_with_gradient(const ProblemSpec& spec, const State& state, const TWindow& w) {
    return with_gradient(spec, state, w, false);
}

ShapeReport classify_shape(const ProblemSpec& spec, const State& state, const TWindow& w) {
    const ScalarFiber f = ScalarFiber::of(spec, state);
    const auto t = log_grid(w);
    std::vector<double> dr;
    for (double x : t) dr.push_back(f.dr(x));
    ShapeReport rep;
    rep.shape = shape_from(f, dr, rep.sign_changes);
    rep.condition_a = rep.shape == ShapeClass::UniqueMax;
    rep.condition_S0 = rep.shape == ShapeClass::NoCritical || rep.shape == ShapeClass::Constant;
    rep.condition_S = rep.condition_S0 || rep.shape == ShapeClass::UniqueMax || rep.shape == ShapeClass::UniqueMin;
    return rep;
}

}  // namespace nq
