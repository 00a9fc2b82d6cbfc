#include "nq/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nq/direction.hpp"
#include "nq/extremal.hpp"
#include "nq/functional.hpp"
#include "nq/optimizer.hpp"
#include "nq/system_fiber.hpp"

namespace nq {
namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyT = 1e-250;
constexpr double kHugeT = 1e250;

double sign_of(double v) { return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0; }

/// Root of r(t) = λ between a and b (r - λ changes sign), bisected in log t.
double bracketed_root(const ScalarFiber& fb, double lambda, double a, double b) {
    double fa = fb.r(a) - lambda;
    if (fa == 0) return a;
    if (fb.r(b) == lambda) return b;
    for (int it = 0; it < 400 && std::abs(b / a - 1) > 4e-16; ++it) {
        const double m = std::sqrt(a * b);
        const double fm = fb.r(m) - lambda;
        if (fm == 0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    double t = std::sqrt(a * b);
    // One Newton step when it helps.
    const double d = fb.dr(t);
    if (d != 0 && std::isfinite(d)) {
        const double tn = t - (fb.r(t) - lambda) / d;
        if (tn > 0 && std::abs(fb.r(tn) - lambda) < std::abs(fb.r(t) - lambda)) t = tn;
    }
    return t;
}

double tangency_tol(double v) { return 1e-10 * std::max(1.0, std::abs(v)); }

/// ∇_x Φ_λ(t·u_x, s·v_x) with t, s frozen, assembled from per-term gradients.
std::vector<double> scaled_gradient(const std::vector<Term>& terms, double lambda, double t, double s, std::size_t n) {
    std::vector<double> g(n, 0.0);
    for (const auto& term : terms) {
        const double c = (term.t_coef - lambda * term.g_coef) * std::pow(t, term.deg_u) * std::pow(s, term.deg_v);
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) g[i] += c * term.grad[i];
    }
    return g;
}

void require_scalar_nmm(const ProblemSpec& spec) {
    if (spec.as<LinearMatrix>()) fail(ErrorKind::InvalidSpec, "the linear model has a flat fiber; no branches");
    if (spec.as<IndefiniteSystem>())
        fail(ErrorKind::InvalidSpec, "the indefinite system is solved on the vector manifold (system_nehari_minimize)");
}

bool convex_concave_kind(const ProblemSpec& spec) {
    return spec.as<ConvexConcaveScalar>() || spec.as<GeneralConvexConcave>() || spec.as<ConvexConcaveSystem>();
}

double resolve_star_max(const ProblemSpec& spec, const NehariOptions& o) {
    if (o.lambda_star_max) return *o.lambda_star_max;
    ExtremalOptions eo;
    eo.restarts = o.restarts;
    eo.seed = o.seed;
    return lambda_star_max_value(spec, eo).value.value();
}

/// Ψ(x) = Φ_λ(t(x)·y) with y = x, or y = cone·|x| on a sign cone.
opt::Function branch_objective(const ProblemSpec& spec, double lambda, BranchTag branch, int cone) {
    return [&spec, lambda, branch, cone](std::span<const double> x) {
        std::vector<double> y(x.begin(), x.end());
        if (cone != 0)
            for (double& v : y) v = cone * std::abs(v);
        const auto terms = decompose(spec, to_state(spec, y), true);
        const ScalarFiber fb(terms);
        double t = 0;
        try {
            t = project_to_branch(fb, lambda, branch);
        } catch (const Error&) {
            return opt::Eval{kInf, {}};
        }
        opt::Eval e;
        e.value = fb.phi(lambda, t);
        e.grad = scaled_gradient(terms, lambda, t, t, y.size());
        if (cone != 0)
            for (std::size_t i = 0; i < y.size(); ++i) e.grad[i] *= cone * sign_of(x[i]);
        return e;
    };
}

NehariSolution finish_solution(const ProblemSpec& spec, double lambda, BranchTag branch, State state) {
    NehariSolution s{std::move(state)};
    s.lambda = lambda;
    s.branch = branch;
    const ScalarFiber fb = ScalarFiber::of(spec, s.state);
    s.phi_value = phi(spec, lambda, s.state);
    s.el_residual_norm = sup_norm(phi_gradient(spec, lambda, s.state));
    s.fiber_r = fb.r(1.0);
    s.fiber_second_derivative_sign = static_cast<int>(sign_of(fb.d2phi(lambda, 1.0)));
    return s;
}

double residual_at(const ProblemSpec& spec, double lambda, BranchTag branch, const std::vector<double>& w) {
    const State dir = to_state(spec, w);
    try {
        return sup_norm(phi_gradient(spec, lambda, scaled(dir, project_to_branch(spec, lambda, dir, branch))));
    } catch (const Error&) {
        return kInf;
    }
}

NehariSolution minimize_on(const ProblemSpec& spec, double lambda, BranchTag branch, int cone,
                           const NehariOptions& o) {
    opt::Problem problem;
    problem.pieces = {branch_objective(spec, lambda, branch, cone)};
    problem.precond = preconditioner_for(spec);
    std::vector<std::vector<double>> starts;
    for (auto& x : seeded_starts(spec, std::max(1, o.restarts), o.seed)) {
        if (cone != 0)
            for (double& v : x) v = std::abs(v);
        if (std::isfinite(problem.pieces[0](x).value)) starts.push_back(std::move(x));
    }
    if (starts.empty()) fail(ErrorKind::BranchEmpty, "no start direction reaches the branch at this lambda");

    opt::Options so;
    so.max_iter = o.max_iter;
    so.tol = o.descent_tol;
    const auto m = opt::multistart(problem, starts, so);
    if (!std::isfinite(m.best)) fail(ErrorKind::BranchEmpty, "every descent left the branch");

    std::vector<double> w = m.best_x;
    if (cone != 0)
        for (double& v : w) v = cone * std::abs(v);
    if (!(residual_at(spec, lambda, branch, w) < o.residual_tol)) {
        // Near the minimum the value is flat to rounding and Armijo steps stop
        // paying off; finish on the gradient norm with the smooth objective.
        // A cone minimizer lies inside its cone; the caller re-checks signs.
        opt::Problem smooth = problem;
        smooth.pieces = {branch_objective(spec, lambda, branch, 0)};
        const auto polished = opt::polish(smooth, w, so);
        if (std::isfinite(polished.value) && polished.value <= m.best + 1e-9 * std::max(1.0, std::abs(m.best)))
            w = polished.x;
    }
    const State dir = to_state(spec, w);
    const double t = project_to_branch(spec, lambda, dir, branch);
    NehariSolution sol = finish_solution(spec, lambda, branch, scaled(dir, t));
    sol.restarts_used = m.restarts;
    for (const auto& r : m.runs)
        if (r.x == m.best_x) sol.iterations = r.iterations;
    sol.converged = sol.el_residual_norm < o.residual_tol;
    if (!sol.converged)
        fail(ErrorKind::NoConvergence, "branch " + std::string(to_string(branch)) + " residual " +
                                           sci(sol.el_residual_norm) + " above tolerance");
    return sol;
}

}  // namespace

const char* to_string(BranchTag b) { return b == BranchTag::N1 ? "N1" : "N2"; }

double project_to_branch(const ScalarFiber& fb, double lambda, BranchTag branch) {
    const FiberExtremum sup = scalar_fiber_sup(fb);
    const double tol = tangency_tol(lambda);
    if (sup.where == FiberExtremum::Where::Everywhere) {
        if (std::abs(sup.value.value() - lambda) <= tol)
            fail(ErrorKind::DegenerateTangency, "flat fiber at the level lambda");
        fail(ErrorKind::NoIntersection, "flat fiber away from lambda");
    }
    if (sup.value.is_finite()) {
        if (sup.where == FiberExtremum::Where::Interior && std::abs(sup.value.value() - lambda) <= tol)
            fail(ErrorKind::DegenerateTangency, "lambda equals the fiber maximum");
        if (lambda >= sup.value.value()) fail(ErrorKind::NoIntersection, "lambda at or above the fiber maximum");
    }
    const auto above = [&](double t) { return fb.r(t) > lambda; };
    double a = 0, b = 0;  // r(a) > λ > r(b) for N1, reversed roles for N2
    if (branch == BranchTag::N2) {
        if (sup.where == FiberExtremum::Where::AtZero) fail(ErrorKind::NoIntersection, "fiber has no ascending part");
        if (lambda <= fb.limit_at_zero()) fail(ErrorKind::NoIntersection, "lambda at or below the limit at zero");
        b = sup.where == FiberExtremum::Where::Interior ? sup.t : 1.0;
        while (!above(b)) {
            b *= 2;
            if (b > kHugeT) fail(ErrorKind::NoIntersection, "ascending part never reaches lambda");
        }
        a = b;
        while (above(a)) {
            a *= 0.5;
            if (a < kTinyT) fail(ErrorKind::NoIntersection, "ascending part never drops below lambda");
        }
    } else {
        if (sup.where == FiberExtremum::Where::AtInfinity)
            fail(ErrorKind::NoIntersection, "fiber has no descending part");
        if (lambda <= fb.limit_at_infinity()) fail(ErrorKind::NoIntersection, "lambda at or below the limit at infinity");
        a = sup.where == FiberExtremum::Where::Interior ? sup.t : 1.0;
        while (!above(a)) {
            a *= 0.5;
            if (a < kTinyT) fail(ErrorKind::NoIntersection, "descending part never reaches lambda");
        }
        b = a;
        while (above(b)) {
            b *= 2;
            if (b > kHugeT) fail(ErrorKind::NoIntersection, "descending part never drops below lambda");
        }
    }
    const double t = bracketed_root(fb, lambda, a, b);
    const double d = fb.dr(t);
    if ((branch == BranchTag::N1 && !(d < 0)) || (branch == BranchTag::N2 && !(d > 0)))
        fail(ErrorKind::NoIntersection, "crossing has the wrong monotonicity for this branch");
    return t;
}

double project_to_branch(const ProblemSpec& spec, double lambda, const State& state, BranchTag branch) {
    check_arity(spec, state);
    if (is_zero(state)) fail(ErrorKind::OutsideW, "zero state");
    return project_to_branch(ScalarFiber::of(spec, state), lambda, branch);
}

NehariSolution minimize_branch(const ProblemSpec& spec, double lambda, BranchTag branch, const NehariOptions& o) {
    require_scalar_nmm(spec);
    const double star = resolve_star_max(spec, o);
    if (lambda >= star) fail(ErrorKind::BranchEmpty, "lambda at or above lambda*_max");
    NehariSolution s = minimize_on(spec, lambda, branch, 0, o);
    if (convex_concave_kind(spec)) s.ground_state_flag = branch == BranchTag::N2 || lambda <= 0;
    return s;
}

SolutionPair solve_pair(const ProblemSpec& spec, double lambda, const NehariOptions& options) {
    require_scalar_nmm(spec);
    NehariOptions o = options;
    o.lambda_star_max = resolve_star_max(spec, options);
    SolutionPair out;
    auto attempt = [&](BranchTag b, BranchOutcome& slot) {
        try {
            slot.solution = minimize_branch(spec, lambda, b, o);
        } catch (const Error& e) {
            slot.error = e.kind();
            slot.message = e.what();
        }
    };
    attempt(BranchTag::N1, out.first);
    attempt(BranchTag::N2, out.second);
    if (out.first.solution && out.second.solution) {
        const State diff = axpy(out.first.solution->state, -1.0, out.second.solution->state);
        out.separation = energy_norm(spec, diff);
    }
    return out;
}

std::vector<NehariSolution> sign_constant_pair(const ProblemSpec& spec, double lambda, const NehariOptions& options) {
    if (!spec.as<ConvexConcaveScalar>() && !spec.as<GeneralConvexConcave>())
        fail(ErrorKind::InvalidSpec, "sign-constant solutions need a scalar convex-concave model");
    NehariOptions o = options;
    o.lambda_star_max = resolve_star_max(spec, options);
    if (lambda >= *o.lambda_star_max) fail(ErrorKind::BranchEmpty, "lambda at or above lambda*_max");
    std::vector<NehariSolution> out;
    for (BranchTag b : {BranchTag::N1, BranchTag::N2}) {
        if (b == BranchTag::N2 && lambda <= 0) break;  // the ascending branch is empty below zero
        for (int cone : {1, -1}) {
            NehariSolution s = minimize_on(spec, lambda, b, cone, o);
            const auto x = flatten(s.state);
            if (std::ranges::any_of(x, [cone](double v) { return cone * v < 0; }))
                fail(ErrorKind::SignViolation, "solution left its sign cone");
            s.ground_state_flag = b == BranchTag::N2 || lambda <= 0;
            out.push_back(std::move(s));
        }
    }
    return out;
}

NehariSolution system_nehari_minimize(const ProblemSpec& spec, double lambda, const NehariOptions& o) {
    const auto* m = spec.as<IndefiniteSystem>();
    if (!m) fail(ErrorKind::InvalidSpec, "vector Nehari minimization needs the indefinite system model");
    const auto J = [&spec, m, lambda](std::span<const double> x) {
        const State st = to_state(spec, x);
        const auto& pair = std::get<FieldPair>(st);
        const SystemIntegrals I = system_integrals(spec, lambda, pair);
        const bool in_a = I.P > 0 && I.Q > 0 && I.F > 0;
        const bool in_b = I.P < 0 && I.Q < 0 && I.F < 0;
        if (!in_a && !in_b) return opt::Eval{kInf, {}};
        const auto [t, s] = fiber_roots(*m, I);
        opt::Eval e;
        e.value = j_lambda(*m, I);
        e.grad = scaled_gradient(decompose(spec, st, true), lambda, t, s, x.size());
        return e;
    };
    opt::Problem problem;
    problem.pieces = {J};
    problem.precond = preconditioner_for(spec);
    problem.normalize = opt::Normalize::PerBlock;
    std::vector<std::vector<double>> starts;
    const int want = std::max(1, o.restarts);
    for (auto& x : seeded_starts(spec, 8 * want, o.seed)) {
        if (static_cast<int>(starts.size()) >= want) break;
        if (std::isfinite(J(x).value)) starts.push_back(std::move(x));
    }
    if (starts.empty()) fail(ErrorKind::EmptySet, "no start pair lies in either fibering set");

    opt::Options so;
    so.max_iter = o.max_iter;
    so.tol = o.descent_tol;
    const auto res = opt::multistart(problem, starts, so);
    if (!std::isfinite(res.best)) fail(ErrorKind::EmptySet, "every descent left the fibering sets");

    const State dir = to_state(spec, res.best_x);
    const auto& pair = std::get<FieldPair>(dir);
    const auto [t, s] = system_fiber_roots(spec, lambda, pair);
    State sol_state = FieldPair(scaled(pair, t, s));
    const ScalarFiber fb = ScalarFiber::of(spec, sol_state);
    const BranchTag branch = fb.dr(1.0) < 0 ? BranchTag::N1 : BranchTag::N2;
    NehariSolution sol = finish_solution(spec, lambda, branch, std::move(sol_state));
    sol.phi_value = res.best;
    sol.restarts_used = res.restarts;
    for (const auto& r : res.runs)
        if (r.x == res.best_x) sol.iterations = r.iterations;

    const auto& sp = std::get<FieldPair>(sol.state);
    const auto resid = system_nehari_residual(spec, lambda, sp, 1.0, 1.0);
    const SystemIntegrals I = system_integrals(spec, lambda, sp);
    const double scale = std::max({std::abs(I.P), std::abs(I.Q), std::abs(I.F), 1e-300});
    const bool on_manifold = std::abs(resid[0]) <= 1e-8 * scale && std::abs(resid[1]) <= 1e-8 * scale;
    sol.converged = on_manifold && sol.el_residual_norm < std::max(o.residual_tol, 1e-6);
    if (!sol.converged)
        fail(ErrorKind::NoConvergence, "system residual " + sci(sol.el_residual_norm) + " above tolerance");
    return sol;
}

Verification verify_solution(const ProblemSpec& spec, double lambda, const NehariSolution& sol, double residual_tol,
                             double membership_tol) {
    check_arity(spec, sol.state);
    if (is_zero(sol.state)) fail(ErrorKind::OutsideW, "zero state is not on the Nehari manifold");
    Verification v;
    v.residual_tol = residual_tol;
    v.membership_tol = membership_tol;
    const ScalarFiber fb = ScalarFiber::of(spec, sol.state);
    v.membership_error = std::abs(fb.r(1.0) - lambda);
    v.residual_norm = sup_norm(phi_gradient(spec, lambda, sol.state));
    v.second_derivative_sign = static_cast<int>(sign_of(fb.d2phi(lambda, 1.0)));
    v.membership_ok = v.membership_error < membership_tol;
    v.residual_ok = v.residual_norm < residual_tol;
    v.branch_ok = v.second_derivative_sign == (sol.branch == BranchTag::N1 ? -1 : 1);
    if (spec.as<IndefiniteSystem>()) {
        try {
            v.det_j = det_j_nehari(spec, std::get<FieldPair>(sol.state), lambda).closed_form;
            v.det_ok = *v.det_j != 0.0;
        } catch (const Error&) {
            v.det_ok = false;
        }
    }
    return v;
}

}  // namespace nq
