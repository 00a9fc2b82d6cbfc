#include "nq/functional.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "nq/errors.hpp"

namespace nq {
namespace {

/// |s|^r, or its ε-regularized primitive (s²+ε²)^{r/2} - ε^r.
double pw(double s, double r, double eps) {
    if (eps == 0.0) return std::pow(std::abs(s), r);
    return std::pow(s * s + eps * eps, 0.5 * r) - std::pow(eps, r);
}

/// d/ds of pw: r|s|^{r-2}s (zero at s = 0 for r > 1).
double dpw(double s, double r, double eps) {
    if (eps == 0.0) return s == 0.0 ? 0.0 : r * std::pow(std::abs(s), r - 1.0) * (s > 0 ? 1.0 : -1.0);
    return r * std::pow(s * s + eps * eps, 0.5 * r - 1.0) * s;
}

class Builder {
public:
    Builder(const State& state, bool with_grad, double eps)
        : with_grad_(with_grad), eps_(eps), size_(flat_size(state)) {
        if (const auto* f = std::get_if<DiscreteField>(&state)) {
            u_ = f->values();
            h_ = f->domain().h();
        } else {
            const auto& p = std::get<FieldPair>(state);
            u_ = p.u.values();
            v_ = p.v.values();
            h_ = p.u.domain().h();
        }
    }

    std::span<const double> field(int c) const { return c == 0 ? u_ : v_; }

    Term gradient(int c, double r, double t_coef) {
        Term t{Term::Kind::Gradient, c, t_coef, 0.0, c == 0 ? r : 0.0, c == 1 ? r : 0.0};
        auto x = field(c);
        const std::size_t n = x.size();
        std::vector<double> flux(n + 1);
        double acc = 0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double right = i < n ? x[i] : 0.0;
            const double left = i > 0 ? x[i - 1] : 0.0;
            const double d = (right - left) / h_;
            acc += h_ * pw(d, r, eps_);
            flux[i] = dpw(d, r, eps_);
        }
        t.value = acc;
        if (with_grad_) {
            t.grad.assign(size_, 0.0);
            const std::size_t off = c == 0 ? 0 : n;
            for (std::size_t j = 0; j < n; ++j) t.grad[off + j] = flux[j] - flux[j + 1];
        }
        return t;
    }

    Term mass(int c, double r, double g_coef, double t_coef = 0.0) {
        Term t{Term::Kind::Mass, c, t_coef, g_coef, c == 0 ? r : 0.0, c == 1 ? r : 0.0};
        auto x = field(c);
        double acc = 0;
        for (double xi : x) acc += pw(xi, r, eps_);
        t.value = h_ * acc;
        if (with_grad_) {
            t.grad.assign(size_, 0.0);
            const std::size_t off = c == 0 ? 0 : x.size();
            for (std::size_t j = 0; j < x.size(); ++j) t.grad[off + j] = h_ * dpw(x[j], r, eps_);
        }
        return t;
    }

    Term weighted(std::span<const double> f, double r, double t_coef) {
        Term t{Term::Kind::Weighted, 0, t_coef, 0.0, r, 0.0};
        double acc = 0;
        for (std::size_t i = 0; i < u_.size(); ++i) acc += f[i] * pw(u_[i], r, eps_);
        t.value = h_ * acc;
        if (with_grad_) {
            t.grad.assign(size_, 0.0);
            for (std::size_t j = 0; j < u_.size(); ++j) t.grad[j] = h_ * f[j] * dpw(u_[j], r, eps_);
        }
        return t;
    }

    Term coupling(std::span<const double> f, double alpha, double beta, double t_coef) {
        Term t{Term::Kind::Coupling, 0, t_coef, 0.0, alpha, beta};
        const std::size_t n = u_.size();
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += f[i] * pw(u_[i], alpha, eps_) * pw(v_[i], beta, eps_);
        t.value = h_ * acc;
        if (with_grad_) {
            t.grad.assign(size_, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                t.grad[j] = h_ * f[j] * dpw(u_[j], alpha, eps_) * pw(v_[j], beta, eps_);
                t.grad[n + j] = h_ * f[j] * pw(u_[j], alpha, eps_) * dpw(v_[j], beta, eps_);
            }
        }
        return t;
    }

    Term quadratic(const SymmetricMatrix& A) {
        Term t{Term::Kind::Quadratic, 0, 1.0, 0.0, 2.0, 0.0};
        auto Au = A.apply(u_);
        double acc = 0;
        for (std::size_t i = 0; i < u_.size(); ++i) acc += Au[i] * u_[i];
        t.value = acc;
        if (with_grad_) {
            t.grad.resize(size_);
            for (std::size_t i = 0; i < u_.size(); ++i) t.grad[i] = 2.0 * Au[i];
        }
        return t;
    }

    Term squared_norm() {
        Term t{Term::Kind::SquaredNorm, 0, 0.0, 1.0, 2.0, 0.0};
        double acc = 0;
        for (double x : u_) acc += x * x;
        t.value = acc;
        if (with_grad_) {
            t.grad.resize(size_);
            for (std::size_t i = 0; i < u_.size(); ++i) t.grad[i] = 2.0 * u_[i];
        }
        return t;
    }

private:
    bool with_grad_;
    double eps_;
    std::size_t size_;
    double h_ = 1.0;
    std::span<const double> u_;
    std::span<const double> v_;
};

}  // namespace

std::vector<Term> decompose(const ProblemSpec& spec, const State& state, bool with_gradients) {
    check_arity(spec, state);
    Builder b(state, with_gradients, spec.regularization());
    return std::visit(
        [&](const auto& s) -> std::vector<Term> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IndefiniteScalar>) {
                return {b.gradient(0, s.p, 1.0 / s.p), b.weighted(s.f.values(), s.gamma, -1.0 / s.gamma),
                        b.mass(0, s.p, 1.0 / s.p)};
            } else if constexpr (std::is_same_v<T, ConvexConcaveScalar>) {
                return {b.gradient(0, s.p, 1.0 / s.p), b.weighted(s.f.values(), s.gamma, -1.0 / s.gamma),
                        b.mass(0, s.q, 1.0 / s.q)};
            } else if constexpr (std::is_same_v<T, ConvexConcaveSystem>) {
                return {b.gradient(0, s.p, 1.0 / s.p), b.gradient(1, s.p, 1.0 / s.p),
                        b.coupling(s.f.values(), s.alpha, s.beta, -1.0), b.mass(0, s.q, 1.0 / s.q),
                        b.mass(1, s.q, 1.0 / s.q)};
            } else if constexpr (std::is_same_v<T, IndefiniteSystem>) {
                return {b.gradient(0, s.p, 1.0 / s.p), b.gradient(1, s.q, 1.0 / s.q),
                        b.coupling(s.f.values(), s.alpha, s.beta, -1.0), b.mass(0, s.p, 1.0 / s.p),
                        b.mass(1, s.q, 1.0 / s.q)};
            } else if constexpr (std::is_same_v<T, GeneralConvexConcave>) {
                std::vector<Term> out{b.gradient(0, s.p, 1.0 / s.p)};
                for (const auto& w : s.terms) out.push_back(b.weighted(w.f.values(), w.gamma, -1.0 / w.gamma));
                out.push_back(b.mass(0, s.q, 1.0 / s.q));
                return out;
            } else {
                return {b.quadratic(s.A), b.squared_norm()};
            }
        },
        spec.variant());
}

EnergyBreakdown energies(const ProblemSpec& spec, const State& state) {
    const auto terms = decompose(spec, state);
    EnergyBreakdown e;
    const bool indefinite_system = spec.as<IndefiniteSystem>() != nullptr;
    const bool general = spec.as<GeneralConvexConcave>() != nullptr;
    // Mass exponent that counts as "q" for this model.
    double q_exp = 0;
    if (const auto* s = spec.as<ConvexConcaveScalar>()) q_exp = s->q;
    if (const auto* s = spec.as<ConvexConcaveSystem>()) q_exp = s->q;
    if (const auto* s = spec.as<GeneralConvexConcave>()) q_exp = s->q;
    if (const auto* s = spec.as<IndefiniteSystem>()) q_exp = s->q;

    for (const auto& t : terms) {
        switch (t.kind) {
            case Term::Kind::Gradient:
                e.gradient_energy += t.value;
                (t.component == 0 ? e.gradient_u : e.gradient_v) += t.value;
                break;
            case Term::Kind::Quadratic:
                e.gradient_energy += t.value;
                e.gradient_u += t.value;
                break;
            case Term::Kind::Mass:
                (t.component == 0 ? e.mass_u : e.mass_v) += t.value;
                if (indefinite_system) {
                    (t.component == 0 ? e.p_mass : e.q_mass) += t.value;
                } else if (q_exp > 0 && t.degree() == q_exp) {
                    e.q_mass += t.value;
                } else {
                    e.p_mass += t.value;
                }
                break;
            case Term::Kind::SquaredNorm:
                e.p_mass += t.value;
                e.mass_u += t.value;
                break;
            case Term::Kind::Weighted:
                e.weighted_mass += t.value;
                if (general) e.term_masses.push_back(t.value);
                break;
            case Term::Kind::Coupling: e.weighted_mass += t.value; break;
        }
    }
    return e;
}

double g_part(const ProblemSpec& spec, const EnergyBreakdown& e) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IndefiniteScalar>) return e.p_mass / s.p;
            if constexpr (std::is_same_v<T, ConvexConcaveScalar>) return e.q_mass / s.q;
            if constexpr (std::is_same_v<T, ConvexConcaveSystem>) return e.q_mass / s.q;
            if constexpr (std::is_same_v<T, IndefiniteSystem>) return e.p_mass / s.p + e.q_mass / s.q;
            if constexpr (std::is_same_v<T, GeneralConvexConcave>) return e.q_mass / s.q;
            if constexpr (std::is_same_v<T, LinearMatrix>) return e.p_mass;
        },
        spec.variant());
}

double phi(const ProblemSpec& spec, double lambda, const State& state) {
    double T = 0, G = 0;
    for (const auto& t : decompose(spec, state)) {
        T += t.t_coef * t.value;
        G += t.g_coef * t.value;
    }
    return T - lambda * G;
}

std::vector<double> phi_gradient(const ProblemSpec& spec, double lambda, const State& state) {
    const auto terms = decompose(spec, state, true);
    std::vector<double> g(flat_size(state), 0.0);
    for (const auto& t : terms) {
        const double c = t.t_coef - lambda * t.g_coef;
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * t.grad[i];
    }
    return g;
}

namespace {

void guard_smoothness(const ProblemSpec& spec, const State& state) {
    if (spec.regularization() > 0) return;
    auto has_zero = [](std::span<const double> x) {
        return std::any_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    };
    auto has_zero_difference = [](std::span<const double> x) {
        if (x.front() == 0.0 || x.back() == 0.0) return true;
        for (std::size_t i = 1; i < x.size(); ++i)
            if (x[i] == x[i - 1]) return true;
        return false;
    };
    const auto terms = decompose(spec, state);
    std::span<const double> u, v;
    if (const auto* f = std::get_if<DiscreteField>(&state)) {
        u = f->values();
    } else {
        u = std::get<FieldPair>(state).u.values();
        v = std::get<FieldPair>(state).v.values();
    }
    for (const auto& t : terms) {
        const auto field = t.component == 0 ? u : v;
        switch (t.kind) {
            case Term::Kind::Gradient:
                if (t.degree() < 2 && has_zero_difference(field))
                    fail(ErrorKind::NonsmoothAtZero, "p < 2 with a vanishing difference quotient");
                break;
            case Term::Kind::Mass:
            case Term::Kind::Weighted:
                if (t.degree() < 2 && has_zero(field))
                    fail(ErrorKind::NonsmoothAtZero, "exponent below 2 with a zero node");
                break;
            case Term::Kind::Coupling:
                if ((t.deg_u < 2 && has_zero(u)) || (t.deg_v < 2 && has_zero(v)))
                    fail(ErrorKind::NonsmoothAtZero, "coupling exponent below 2 with a zero node");
                break;
            default: break;
        }
    }
}

}  // namespace

State el_residual(const ProblemSpec& spec, double lambda, const State& state) {
    check_arity(spec, state);
    guard_smoothness(spec, state);
    return unflatten(state, phi_gradient(spec, lambda, state));
}

double pairing_dT(const std::vector<Term>& terms) {
    double acc = 0;
    for (const auto& t : terms) acc += t.t_coef * t.degree() * t.value;
    return acc;
}

double pairing_dG(const std::vector<Term>& terms) {
    double acc = 0;
    for (const auto& t : terms) acc += t.g_coef * t.degree() * t.value;
    return acc;
}

double pairing_dT(const ProblemSpec& spec, const State& state) { return pairing_dT(decompose(spec, state)); }
double pairing_dG(const ProblemSpec& spec, const State& state) { return pairing_dG(decompose(spec, state)); }

double sup_norm(std::span<const double> x) {
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const State& s) { return sup_norm(flatten(s)); }

double energy_norm(const ProblemSpec& spec, const State& s) {
    const auto flat = flatten(s);
    if (spec.as<LinearMatrix>()) {
        double acc = 0;
        for (double x : flat) acc += x * x;
        return std::sqrt(acc);
    }
    const GridDomain& g = domain_of(s);
    const std::size_t n = g.n();
    const double h = g.h();
    double acc = 0;
    for (std::size_t off = 0; off < flat.size(); off += n) {
        for (std::size_t i = 0; i <= n; ++i) {
            const double right = i < n ? flat[off + i] : 0.0;
            const double left = i > 0 ? flat[off + i - 1] : 0.0;
            const double d = (right - left) / h;
            acc += h * d * d;
        }
    }
    return std::sqrt(acc);
}

}  // namespace nq
