#include "nq/system_fiber.hpp"

#include <cmath>

#include "nq/errors.hpp"

namespace nq {
namespace {

const IndefiniteSystem& indefinite(const ProblemSpec& spec) {
    const auto* s = spec.as<IndefiniteSystem>();
    if (s == nullptr) fail(ErrorKind::InvalidSpec, "operation needs the indefinite system model");
    return *s;
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

double vector_fiber_eval(const ProblemSpec& spec, const FieldPair& pair, double t, double s) {
    if (!spec.is_system()) fail(ErrorKind::ArityMismatch, "vector fiber needs a two-field model");
    if (t < 0 || s < 0 || (t == 0 && s == 0)) fail(ErrorKind::InvalidSpec, "(t, s) must be nonnegative, not both 0");
    double num = 0;
    double den = 0;
    for (const auto& term : decompose(spec, State{pair})) {
        const double w = std::pow(t, term.deg_u) * std::pow(s, term.deg_v) * term.value * term.degree();
        num += term.t_coef * w;
        den += term.g_coef * w;
    }
    if (den == 0.0) fail(ErrorKind::ZeroDenominator, "t^p∫|u|^p + s^q∫|v|^q = 0");
    return num / den;
}

SystemIntegrals system_integrals(const ProblemSpec& spec, double lambda, const FieldPair& pair) {
    indefinite(spec);
    const auto e = energies(spec, State{pair});
    return {e.gradient_u - lambda * e.mass_u, e.gradient_v - lambda * e.mass_v, e.weighted_mass};
}

std::pair<double, double> fiber_roots(const IndefiniteSystem& m, const SystemIntegrals& I) {
    const auto [P, Q, F] = I;
    const bool in_a = P > 0 && Q > 0 && F > 0;
    const bool in_b = P < 0 && Q < 0 && F < 0;
    if (!in_a && !in_b) fail(ErrorKind::NotInAB, "P_λ, Q_λ, F do not share a strict sign");
    const double p = m.p, q = m.q, a = m.alpha, b = m.beta;
    const double d = a / p + b / q - 1.0;
    const double lp = std::log(std::abs(P)), lq = std::log(std::abs(Q)), lf = std::log(std::abs(F));
    const double log_t = ((b - q) * std::log(a) - b * std::log(b) + (q - b) * lp + b * lq - q * lf) / (p * q * d);
    const double log_s = ((a - p) * std::log(b) - a * std::log(a) + a * lp + (p - a) * lq - p * lf) / (p * q * d);
    return {std::exp(log_t), std::exp(log_s)};
}

std::pair<double, double> system_fiber_roots(const ProblemSpec& spec, double lambda, const FieldPair& pair) {
    return fiber_roots(indefinite(spec), system_integrals(spec, lambda, pair));
}

std::array<double, 2> system_nehari_residual(const ProblemSpec& spec, double lambda, const FieldPair& pair, double t,
                                             double s) {
    const auto& m = indefinite(spec);
    const auto [P, Q, F] = system_integrals(spec, lambda, pair);
    const double cross = std::pow(t, m.alpha) * std::pow(s, m.beta) * F;
    return {std::pow(t, m.p) * P - m.alpha * cross, std::pow(s, m.q) * Q - m.beta * cross};
}

double j_lambda(const IndefiniteSystem& m, const SystemIntegrals& I) {
    const auto [P, Q, F] = I;
    if (!((P > 0 && Q > 0 && F > 0) || (P < 0 && Q < 0 && F < 0)))
        fail(ErrorKind::NotInAB, "P_λ, Q_λ, F do not share a strict sign");
    const double p = m.p, q = m.q, a = m.alpha, b = m.beta;
    const double d = a / p + b / q - 1.0;
    const double log_c = (-a * q * std::log(a) - b * p * std::log(b)) / (p * q * d);
    const double log_j = log_c + a / (p * d) * std::log(std::abs(P)) + b / (q * d) * std::log(std::abs(Q)) -
                         std::log(std::abs(F)) / d;
    return d * std::exp(log_j) * sgn(F);
}

double j_lambda(const ProblemSpec& spec, double lambda, const FieldPair& pair) {
    return j_lambda(indefinite(spec), system_integrals(spec, lambda, pair));
}

double det_j_closed_form(const IndefiniteSystem& m, double F) {
    return m.alpha * m.beta * (m.p * m.q - m.p * m.beta - m.q * m.alpha) * F * F;
}

std::array<double, 4> fiber_hessian(const ProblemSpec& spec, double lambda, const FieldPair& pair, double t, double s) {
    if (!spec.is_system()) fail(ErrorKind::ArityMismatch, "fiber Hessian needs a two-field model");
    std::array<double, 4> H{};
    for (const auto& term : decompose(spec, State{pair})) {
        const double c = (term.t_coef - lambda * term.g_coef) * term.value;
        if (c == 0.0) continue;
        const double a = term.deg_u, b = term.deg_v;
        // Second derivatives of t^a s^b.
        const double tt = a * (a - 1) * std::pow(t, a - 2) * std::pow(s, b);
        const double ts = a * b * std::pow(t, a - 1) * std::pow(s, b - 1);
        const double ss = b * (b - 1) * std::pow(t, a) * std::pow(s, b - 2);
        H[0] += c * tt;
        H[1] += c * ts;
        H[2] += c * ts;
        H[3] += c * ss;
    }
    return H;
}

NehariDeterminant det_j_nehari(const ProblemSpec& spec, const FieldPair& pair, std::optional<double> lambda) {
    const auto& m = indefinite(spec);
    const auto e = energies(spec, State{pair});
    double lam = 0;
    if (lambda) {
        lam = *lambda;
    } else {
        if (e.mass_u == 0.0) fail(ErrorKind::NotOnNehari, "u = 0");
        lam = (e.gradient_u - m.alpha * e.weighted_mass) / e.mass_u;
    }
    const double P = e.gradient_u - lam * e.mass_u;
    const double Q = e.gradient_v - lam * e.mass_v;
    const double F = e.weighted_mass;
    const double su = std::abs(e.gradient_u) + std::abs(lam * e.mass_u) + std::abs(m.alpha * F);
    const double sv = std::abs(e.gradient_v) + std::abs(lam * e.mass_v) + std::abs(m.beta * F);
    if (std::abs(P - m.alpha * F) > 1e-8 * std::max(su, 1e-300) ||
        std::abs(Q - m.beta * F) > 1e-8 * std::max(sv, 1e-300))
        fail(ErrorKind::NotOnNehari, "P_λ = αF, Q_λ = βF violated");
    NehariDeterminant out;
    out.lambda = lam;
    out.closed_form = det_j_closed_form(m, F);
    out.jacobian = fiber_hessian(spec, lam, pair);
    const auto& J = out.jacobian;
    out.entrywise = J[0] * J[3] - J[1] * J[2];
    const double scale = std::abs(J[0] * J[3]) + std::abs(J[1] * J[2]);
    if (std::abs(out.entrywise - out.closed_form) > 1e-8 * std::max(scale, std::abs(out.closed_form)) &&
        std::abs(out.entrywise - out.closed_form) > 1e-300)
        fail(ErrorKind::NotOnNehari, "entrywise determinant disagrees with the closed form");
    return out;
}

}  // namespace nq
