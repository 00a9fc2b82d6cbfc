#include "nq/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nq/direction.hpp"
#include "nq/errors.hpp"
#include "nq/fiber.hpp"
#include "nq/functional.hpp"
#include "nq/optimizer.hpp"

namespace nq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Starts = std::vector<std::vector<double>>;

opt::Options solver_options(const ExtremalOptions& o) {
    opt::Options s;
    s.max_iter = o.max_iter;
    s.tol = o.tol;
    s.converged_tol = o.converged_tol;
    s.stall_steps = 50;
    return s;
}

opt::Eval negate(opt::Eval e) {
    e.value = -e.value;
    for (double& g : e.grad) g = -g;
    return e;
}

opt::Function negated(opt::Function f) {
    return [f = std::move(f)](std::span<const double> x) { return negate(f(x)); };
}

/// ∫|∇w|^r / ∫|w|^r of one component (the linear quotient of that component).
opt::Function quotient_piece(const ProblemSpec& spec, int component) {
    return [&spec, component](std::span<const double> x) {
        const auto terms = decompose(spec, to_state(spec, x), true);
        const Term* A = nullptr;
        const Term* C = nullptr;
        for (const auto& t : terms) {
            if (t.component != component) continue;
            if (t.kind == Term::Kind::Gradient) A = &t;
            if (t.kind == Term::Kind::Mass) C = &t;
        }
        if (C->value == 0.0) return opt::Eval{kInf, {}};
        opt::Eval e;
        e.value = A->value / C->value;
        e.grad.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) e.grad[i] = (A->grad[i] - e.value * C->grad[i]) / C->value;
        return e;
    };
}

/// Matrix quotient <Au,u>/<u,u>.
opt::Function matrix_piece(const ProblemSpec& spec) {
    return [&spec](std::span<const double> x) {
        const auto terms = decompose(spec, to_state(spec, x), true);
        const Term& A = terms[0];
        const Term& C = terms[1];
        opt::Eval e;
        e.value = A.value / C.value;
        e.grad.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) e.grad[i] = (A.grad[i] - e.value * C.grad[i]) / C.value;
        return e;
    };
}

/// Λ^{sc} (sup = true) or λ^{sc} through the fiber envelope.
opt::Function fiber_piece(const ProblemSpec& spec, bool sup) {
    return [&spec, sup](std::span<const double> x) {
        const State s = to_state(spec, x);
        const ValueGradient vg = sup ? scalar_big_lambda_with_gradient(spec, s) : scalar_small_lambda_with_gradient(spec, s);
        return opt::Eval{vg.value.value(), vg.grad};
    };
}

/// Scale-invariant signed weight ratio ∫f|u|^γ / ∫|f||u|^γ in [-1, 1], or
/// F(u,v) / ∫|f||u|^α|v|^β for pairs. Same sign as the weight integral.
opt::Function weight_constraint(const ProblemSpec& spec, double sign) {
    return [&spec, sign](std::span<const double> x) {
        const GridDomain g = spec.grid();
        const std::size_t n = g.n();
        const double h = g.h();
        std::vector<double> dB(x.size(), 0.0), dAbs(x.size(), 0.0);
        double B = 0, absB = 0;
        if (const auto* s = spec.as<IndefiniteScalar>()) {
            const auto f = s->f.values();
            for (std::size_t i = 0; i < n; ++i) {
                const double a = std::abs(x[i]);
                const double pw = std::pow(a, s->gamma);
                B += h * f[i] * pw;
                absB += h * std::abs(f[i]) * pw;
                const double d = a == 0 ? 0.0 : h * s->gamma * pw / x[i];
                dB[i] = f[i] * d;
                dAbs[i] = std::abs(f[i]) * d;
            }
        } else {
            const auto& m = *spec.as<IndefiniteSystem>();
            const auto f = m.f.values();
            for (std::size_t i = 0; i < n; ++i) {
                const double u = x[i], v = x[n + i];
                const double pu = std::pow(std::abs(u), m.alpha);
                const double pv = std::pow(std::abs(v), m.beta);
                B += h * f[i] * pu * pv;
                absB += h * std::abs(f[i]) * pu * pv;
                const double du = u == 0 ? 0.0 : h * m.alpha * pu / u * pv;
                const double dv = v == 0 ? 0.0 : h * m.beta * pv / v * pu;
                dB[i] = f[i] * du;
                dB[n + i] = f[i] * dv;
                dAbs[i] = std::abs(f[i]) * du;
                dAbs[n + i] = std::abs(f[i]) * dv;
            }
        }
        opt::Eval e;
        e.grad.assign(x.size(), 0.0);
        if (absB == 0.0) return e;  // direction invisible to the weight: c = 0
        e.value = sign * B / absB;
        for (std::size_t i = 0; i < x.size(); ++i) e.grad[i] = sign * (dB[i] * absB - B * dAbs[i]) / (absB * absB);
        return e;
    };
}

std::span<const double> weight_of(const ProblemSpec& spec) {
    if (const auto* s = spec.as<IndefiniteScalar>()) return s->f.values();
    if (const auto* s = spec.as<IndefiniteSystem>()) return s->f.values();
    if (const auto* s = spec.as<ConvexConcaveScalar>()) return s->f.values();
    if (const auto* s = spec.as<ConvexConcaveSystem>()) return s->f.values();
    return {};
}

bool any_of_weight(const ProblemSpec& spec, bool positive) {
    for (double v : weight_of(spec))
        if (positive ? v > 0 : v < 0) return true;
    return false;
}

bool indefinite_kind(const ProblemSpec& spec) { return spec.as<IndefiniteScalar>() || spec.as<IndefiniteSystem>(); }

opt::Problem make_problem(const ProblemSpec& spec, std::vector<opt::Function> pieces,
                          std::optional<opt::Function> constraint = std::nullopt) {
    opt::Problem p;
    p.pieces = std::move(pieces);
    p.constraint = std::move(constraint);
    p.precond = preconditioner_for(spec);
    p.normalize = spec.as<IndefiniteSystem>() && p.pieces.size() == 2 ? opt::Normalize::PerBlock : opt::Normalize::Joint;
    return p;
}

Starts with_extras(Starts s, const std::vector<State>& extra) {
    for (const auto& e : extra) s.insert(s.begin(), flatten(e));
    return s;
}

State unit_state(const ProblemSpec& spec, std::vector<double> x) {
    const double n = energy_norm(spec, to_state(spec, x));
    if (n > 0)
        for (double& v : x) v /= n;
    return to_state(spec, x);
}

/// Minimizes max(pieces) from the starts; `flip` reports the negated value
/// (maximization).
OptimizedValue run(const ProblemSpec& spec, const opt::Problem& problem, const Starts& starts,
                   const ExtremalOptions& o, bool flip) {
    const auto m = opt::multistart(problem, starts, solver_options(o));
    OptimizedValue out;
    out.restarts_used = m.restarts;
    out.converged = m.converged;
    out.provenance = "optimized";
    double best = m.best;
    if (best >= o.infinity_threshold) best = kInf;
    out.value = flip ? ExtendedReal(-best) : ExtendedReal(best);
    for (double h : m.history) out.history.push_back(flip ? -h : h);
    if (!m.best_x.empty() && std::isfinite(best)) out.argbest = unit_state(spec, m.best_x);
    return out;
}

OptimizedValue certificate(ExtendedReal v) {
    OptimizedValue out;
    out.value = v;
    out.converged = true;
    out.provenance = "certificate";
    return out;
}

Starts starts_for(const ProblemSpec& spec, const ExtremalOptions& o) {
    return seeded_starts(spec, std::max(1, o.restarts), o.seed);
}

/// Starts whose components have disjoint supports (F = 0).
Starts split_starts(const ProblemSpec& spec) {
    const int n = spec.grid().n();
    Starts out;
    for (int side = 0; side < 2; ++side) {
        std::vector<double> x(2 * n, 0.0);
        for (int i = 0; i < n; ++i) {
            const bool left = i < n / 2;
            const double bump = std::sin(std::acos(-1.0) * (left ? (i + 1.0) / (n / 2 + 1.0)
                                                                  : (i - n / 2 + 1.0) / (n - n / 2 + 1.0)));
            x[(left == (side == 0) ? 0 : n) + i] = bump;
        }
        out.push_back(std::move(x));
    }
    return out;
}

OptimizedValue max_of_pieces(const ProblemSpec& spec, const std::vector<opt::Function>& pieces, const Starts& starts,
                             const ExtremalOptions& o) {
    OptimizedValue best;
    bool first = true;
    for (const auto& piece : pieces) {
        auto r = run(spec, make_problem(spec, {negated(piece)}), starts, o, true);
        if (first || r.value > best.value) best = r;
        first = false;
    }
    return best;
}

OptimizedValue min_of_pieces(const ProblemSpec& spec, const std::vector<opt::Function>& pieces, const Starts& starts,
                             const ExtremalOptions& o) {
    OptimizedValue best;
    bool first = true;
    for (const auto& piece : pieces) {
        auto r = run(spec, make_problem(spec, {piece}), starts, o, false);
        if (first || r.value < best.value) best = r;
        first = false;
    }
    return best;
}

std::vector<opt::Function> quotient_pieces(const ProblemSpec& spec) {
    if (spec.as<IndefiniteSystem>()) return {quotient_piece(spec, 0), quotient_piece(spec, 1)};
    return {quotient_piece(spec, 0)};
}

OptimizedValue lambda_min_value(const ProblemSpec& spec, const ExtremalOptions& o, const std::vector<State>& extra) {
    const Starts starts = with_extras(starts_for(spec, o), extra);
    if (spec.as<LinearMatrix>()) return run(spec, make_problem(spec, {matrix_piece(spec)}), starts, o, false);
    if (indefinite_kind(spec)) {
        // A node with f > 0 gives a direction whose fiber falls to -∞.
        if (any_of_weight(spec, true)) return certificate(ExtendedReal::neg_inf());
        return min_of_pieces(spec, quotient_pieces(spec), starts, o);
    }
    for (const auto& hat : hat_probes(spec))
        if (small_lambda(spec, to_state(spec, hat)).is_neg_inf()) return certificate(ExtendedReal::neg_inf());
    return run(spec, make_problem(spec, {fiber_piece(spec, false)}), starts, o, false);
}

OptimizedValue lambda_max_value(const ProblemSpec& spec, const ExtremalOptions& o, const std::vector<State>& extra) {
    const Starts starts = with_extras(starts_for(spec, o), extra);
    if (spec.as<LinearMatrix>())
        return run(spec, make_problem(spec, {negated(matrix_piece(spec))}), starts, o, true);
    if (indefinite_kind(spec)) {
        if (any_of_weight(spec, false)) return certificate(ExtendedReal::pos_inf());
        return max_of_pieces(spec, quotient_pieces(spec), starts, o);
    }
    for (const auto& hat : hat_probes(spec))
        if (big_lambda(spec, to_state(spec, hat)).is_pos_inf()) return certificate(ExtendedReal::pos_inf());
    return run(spec, make_problem(spec, {negated(fiber_piece(spec, true))}), starts, o, true);
}

ExtendedReal partial_min(const ProblemSpec& spec, const Starts& starts) {
    ExtendedReal best = ExtendedReal::neg_inf();
    for (const auto& x : starts) {
        const ScalarFiber f = ScalarFiber::of(spec, to_state(spec, x));
        best = max(best, max(f.limit_at_zero(), f.limit_at_infinity()));
    }
    return best;
}

}  // namespace

EigenPair first_eigenpair(const GridDomain& grid, double p) {
    if (!(p >= 2.0)) fail(ErrorKind::NonsmoothAtZero, "first eigenpair needs p >= 2");
    const int n = grid.n();
    const double h = grid.h();
    const ProblemSpec spec(IndefiniteScalar{p, p + 1.0, DiscreteField(grid)});
    std::vector<double> x(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) x[i] = std::sin(pi * (i + 1.0) / (n + 1.0));

    auto finish = [&](std::vector<double> y) {
        for (double& v : y) v = std::abs(v);
        const auto e = energies(spec, DiscreteField(grid, y));
        const double c = std::pow(e.gradient_energy, -1.0 / p);
        for (double& v : y) v *= c;
        DiscreteField phi(grid, y);
        const double lam = rayleigh(spec, phi);
        return EigenPair{lam, phi, sup_norm(el_residual(spec, lam, phi))};
    };

    EigenPair out{0, DiscreteField(grid), kInf};
    if (p == 2.0) {
        // Inverse power iteration with the stiffness matrix.
        opt::Preconditioner K = preconditioner_for(spec);
        for (int it = 0; it < 400 && out.residual > 1e-13; ++it) {
            std::vector<double> rhs(x);
            for (double& v : rhs) v *= h;
            x = K.solve(x, rhs);
            double m = 0;
            for (double v : x) m = std::max(m, std::abs(v));
            for (double& v : x) v /= m;
            out = finish(x);
        }
    } else {
        opt::Problem prob = make_problem(spec, {quotient_piece(spec, 0)});
        opt::Options o;
        o.max_iter = 50000;
        o.tol = 1e-13;
        out = finish(opt::descend(prob, x, o).x);
    }
    if (out.residual > 1e-8) fail(ErrorKind::NoConvergence, "first eigenpair residual " + std::to_string(out.residual));
    for (int i = 0; i < n; ++i)
        if (!(out.phi1[i] > 0)) fail(ErrorKind::NoConvergence, "eigenfunction lost positivity");
    return out;
}

OptimizedValue lambda_star_max_value(const ProblemSpec& spec, const ExtremalOptions& o,
                                     const std::vector<State>& extra) {
    if (spec.as<IndefiniteSystem>()) return system_lambda_star_max(spec, o);
    const Starts starts = with_extras(starts_for(spec, o), extra);
    if (spec.as<LinearMatrix>()) return run(spec, make_problem(spec, {matrix_piece(spec)}), starts, o, false);
    if (spec.as<IndefiniteScalar>()) {
        // Λ = ∫|∇u|^p/∫|u|^p where ∫f|u|^γ >= 0 and +∞ elsewhere.
        if (!any_of_weight(spec, true) && !std::ranges::any_of(weight_of(spec), [](double v) { return v == 0; }))
            return certificate(ExtendedReal::pos_inf());
        return run(spec, make_problem(spec, {quotient_piece(spec, 0)}, weight_constraint(spec, 1.0)), starts, o, false);
    }
    return run(spec, make_problem(spec, {fiber_piece(spec, true)}), starts, o, false);
}

ExtremalReport lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& options) {
    const auto v = lambda_star_max_value(spec, options);
    ExtremalReport r;
    r.lambda_star_max = v.value;
    r.minimizer_direction = v.argbest;
    r.restarts_used = v.restarts_used;
    r.converged = v.converged;
    r.best_history = v.history;
    r.provenance["lambda_star_max"] = v.provenance;
    return r;
}

std::pair<ExtendedReal, ExtendedReal> lambda_min_max(const ProblemSpec& spec, const ExtremalOptions& options) {
    return {lambda_min_value(spec, options, {}).value, lambda_max_value(spec, options, {}).value};
}

OptimizedValue lambda_star_min_value(const ProblemSpec& spec, const ExtremalOptions& o) {
    Starts starts = starts_for(spec, o);
    if (spec.as<LinearMatrix>())
        return run(spec, make_problem(spec, {negated(matrix_piece(spec))}), starts, o, true);
    if (spec.as<IndefiniteScalar>()) {
        if (!any_of_weight(spec, false) && !std::ranges::any_of(weight_of(spec), [](double v) { return v == 0; }))
            return certificate(ExtendedReal::neg_inf());
        return run(spec, make_problem(spec, {negated(quotient_piece(spec, 0))}, weight_constraint(spec, -1.0)), starts,
                   o, true);
    }
    if (spec.as<IndefiniteSystem>()) {
        const Starts split = split_starts(spec);
        starts.insert(starts.begin(), split.begin(), split.end());
        return run(spec,
                   make_problem(spec, {negated(quotient_piece(spec, 0)), negated(quotient_piece(spec, 1))},
                                weight_constraint(spec, -1.0)),
                   starts, o, true);
    }
    for (const auto& hat : hat_probes(spec))
        if (small_lambda(spec, to_state(spec, hat)).is_finite()) starts.push_back(hat);
    auto r = run(spec, make_problem(spec, {negated(fiber_piece(spec, false))}), starts, o, true);
    if (r.value.is_pos_inf()) r.value = ExtendedReal::neg_inf();  // every start had λ(u) = -∞
    return r;
}

OptimizedValue ouyang_constrained(const ProblemSpec& spec, const ExtremalOptions& o) {
    if (!spec.as<IndefiniteScalar>()) fail(ErrorKind::InvalidSpec, "constrained infimum needs the indefinite scalar model");
    if (!any_of_weight(spec, true) && !std::ranges::any_of(weight_of(spec), [](double v) { return v == 0; }))
        return certificate(ExtendedReal::pos_inf());
    const opt::Function R = quotient_piece(spec, 0);
    const opt::Function c = weight_constraint(spec, 1.0);
    opt::Options so = solver_options(o);
    so.max_iter = std::min(so.max_iter, 1000);
    OptimizedValue out;
    out.provenance = "optimized";
    double best = kInf;
    std::vector<double> best_x;
    for (auto x : starts_for(spec, o)) {
        double mu = 0;
        double rho = 0;
        double last_violation = kInf;
        bool ok = false;
        for (int outer = 0; outer < 25; ++outer) {
            const opt::Eval r0 = R(x);
            if (rho == 0) rho = 10.0 * std::max(1.0, std::abs(r0.value));
            // Augmented Lagrangian for c >= 0.
            opt::Problem p = make_problem(spec, {[&, mu, rho](std::span<const double> y) {
                opt::Eval e = R(y);
                const opt::Eval ce = c(y);
                const double m = std::max(0.0, mu - rho * ce.value);
                e.value += (m * m - mu * mu) / (2 * rho);
                for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] -= m * ce.grad[i];
                return e;
            }});
            auto dres = opt::descend(p, x, so);
            x = dres.x;
            const opt::Eval ce = c(x);
            const double violation = std::max(0.0, -ce.value);
            const double mu_next = std::max(0.0, mu - rho * ce.value);
            const bool feasible = violation <= 1e-8;
            const bool stationary_mu = std::abs(mu_next - mu) <= 1e-6 * std::max(1.0, mu);
            mu = mu_next;
            if (feasible && (stationary_mu || mu == 0)) {
                ok = true;
                break;
            }
            if (violation > 0.25 * last_violation && rho < 1e4 * std::max(1.0, std::abs(r0.value))) rho *= 10;
            last_violation = violation;
        }
        ++out.restarts_used;
        const double val = R(x).value;
        if (ok && val < best) {
            best = val;
            best_x = x;
            out.converged = true;
        }
        out.history.push_back(best);
    }
    out.value = best >= o.infinity_threshold ? ExtendedReal::pos_inf() : ExtendedReal(best);
    if (!best_x.empty()) out.argbest = unit_state(spec, best_x);
    return out;
}

OptimizedValue system_lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& o) {
    if (!spec.as<IndefiniteSystem>()) fail(ErrorKind::InvalidSpec, "needs the indefinite system model");
    if (!any_of_weight(spec, true) && !std::ranges::any_of(weight_of(spec), [](double v) { return v == 0; }))
        return certificate(ExtendedReal::pos_inf());
    return run(spec,
               make_problem(spec, {quotient_piece(spec, 0), quotient_piece(spec, 1)}, weight_constraint(spec, 1.0)),
               starts_for(spec, o), o, false);
}

OptimizedValue scalar_lambda_star_max(const ProblemSpec& spec, const ExtremalOptions& o,
                                      const std::vector<State>& extra_starts) {
    return run(spec, make_problem(spec, {fiber_piece(spec, true)}), with_extras(starts_for(spec, o), extra_starts), o,
               false);
}

double cc_system_lambda_star(const ProblemSpec& spec, const ExtremalOptions& o) {
    if (!spec.as<ConvexConcaveSystem>()) fail(ErrorKind::InvalidSpec, "needs the convex-concave system model");
    const auto v = scalar_lambda_star_max(spec, o);
    return v.value.value();
}

ExtremalReport extremal_report(const ProblemSpec& spec, const ExtremalOptions& o) {
    ExtremalReport r;
    const auto star_max = lambda_star_max_value(spec, o);
    const auto star_min = lambda_star_min_value(spec, o);
    std::vector<State> from_star_max, from_star_min;
    if (star_max.argbest) from_star_max.push_back(*star_max.argbest);
    if (star_min.argbest) from_star_min.push_back(*star_min.argbest);
    const auto lmax = lambda_max_value(spec, o, from_star_max);
    const auto lmin = lambda_min_value(spec, o, from_star_min);
    r.lambda_star_max = star_max.value;
    r.lambda_star_min = star_min.value;
    r.lambda_max = lmax.value;
    r.lambda_min = lmin.value;
    r.minimizer_direction = star_max.argbest;
    r.restarts_used = star_max.restarts_used;
    r.converged = star_max.converged;
    r.best_history = star_max.history;
    r.provenance = {{"lambda_star_max", star_max.provenance},
                    {"lambda_star_min", star_min.provenance},
                    {"lambda_max", lmax.provenance},
                    {"lambda_min", lmin.provenance}};

    if (spec.is_system()) {
        if (spec.as<IndefiniteSystem>()) {
            r.vector_lambda_star_max = star_max.value;
            r.provenance["vector_lambda_star_max"] = star_max.provenance;
            const auto sc = scalar_lambda_star_max(spec, o, from_star_max);
            r.scalar_lambda_star_max = sc.value;
            r.provenance["scalar_lambda_star_max"] = sc.provenance;
        } else {
            // For every pair the vector fiber grows like t^{p-q} along s -> 0.
            r.scalar_lambda_star_max = star_max.value;
            r.provenance["scalar_lambda_star_max"] = star_max.provenance;
            r.vector_lambda_star_max = ExtendedReal::pos_inf();
            r.provenance["vector_lambda_star_max"] = "closed-form";
        }
    }
    if (!spec.as<LinearMatrix>()) {
        Starts probe = starts_for(spec, o);
        if (star_max.argbest) probe.push_back(flatten(*star_max.argbest));
        r.lambda_partial_min = partial_min(spec, probe);
        r.provenance["lambda_partial_min"] = "sampled";
    } else {
        r.lambda_partial_min = r.lambda_min;
        r.provenance["lambda_partial_min"] = lmin.provenance;
    }
    return r;
}

}  // namespace nq
