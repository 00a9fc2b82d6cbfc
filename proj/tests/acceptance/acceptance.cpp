// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// usage: nq_acceptance <path to nq> <specs dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "nq/config.hpp"
#include "nq/direction.hpp"
#include "nq/errors.hpp"
#include "nq/extremal.hpp"
#include "nq/fiber.hpp"
#include "nq/linear_anchor.hpp"
#include "nq/nehari.hpp"
#include "nq/system_fiber.hpp"
#include "test_support.hpp"

using namespace nq;
using nqtest::rel_err;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail << "first failure: " << what << "; ";
        ok = ok && cond;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- oracles

SymmetricMatrix random_symmetric(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a[i * d + j] = a[j * d + i] = N(rng);
    return SymmetricMatrix(d, a);
}

/// A - shift·I positive definite, decided by an unpivoted Cholesky attempt.
bool positive_definite(const SymmetricMatrix& A, double shift) {
    const int d = A.dim();
    std::vector<double> L(static_cast<std::size_t>(d) * d, 0.0);
    for (int j = 0; j < d; ++j) {
        double s = A(j, j) - shift;
        for (int k = 0; k < j; ++k) s -= L[j * d + k] * L[j * d + k];
        if (s <= 0) return false;
        L[j * d + j] = std::sqrt(s);
        for (int i = j + 1; i < d; ++i) {
            double t = A(i, j);
            for (int k = 0; k < j; ++k) t -= L[i * d + k] * L[j * d + k];
            L[i * d + j] = t / L[j * d + j];
        }
    }
    return true;
}

/// Integrals of one scalar field, computed here from the nodal values with
/// zero boundary data: ∫|u'|^p, ∫w|u|^r.
double grad_integral(const DiscreteField& u, double p) {
    const auto x = u.values();
    const double h = u.domain().h();
    double acc = 0;
    for (std::size_t i = 0; i <= x.size(); ++i) {
        const double d = ((i < x.size() ? x[i] : 0.0) - (i > 0 ? x[i - 1] : 0.0)) / h;
        acc += h * std::pow(std::abs(d), p);
    }
    return acc;
}

double weighted_integral(const DiscreteField& u, std::span<const double> w, double r) {
    const auto x = u.values();
    double acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (w.empty() ? 1.0 : w[i]) * std::pow(std::abs(x[i]), r);
    return u.domain().h() * acc;
}

/// Independent r(tu) for the two scalar models: t^{p}A - t^{γ}B over
/// t^{p}C (indefinite) or t^{q}C (convex-concave).
struct ScalarOracle {
    double p, lower, gamma, A, B, C;
    double r(double t) const { return (std::pow(t, p) * A - std::pow(t, gamma) * B) / (std::pow(t, lower) * C); }
};

ScalarOracle oracle_of(const ProblemSpec& spec, const DiscreteField& u) {
    if (const auto* m = spec.as<IndefiniteScalar>())
        return {m->p, m->p, m->gamma, grad_integral(u, m->p), weighted_integral(u, m->f.values(), m->gamma),
                weighted_integral(u, {}, m->p)};
    const auto& m = *spec.as<ConvexConcaveScalar>();
    return {m.p, m.q, m.gamma, grad_integral(u, m.p), weighted_integral(u, m.f.values(), m.gamma),
            weighted_integral(u, {}, m.q)};
}

/// Golden-section maximization of f on [lo, hi] in log t.
double golden_max(const std::function<double(double)>& f, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double a = std::log(lo), b = std::log(hi);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = f(std::exp(c));
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = f(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

struct GridSearch {
    bool infinite = false;
    double value = 0;
    double t = 0;
};

/// sup over t of r on the window [1e-6, 1e6] by log grid and golden section;
/// a supremum still climbing steeply at the right end counts as +∞.
GridSearch grid_sup(const std::function<double(double)>& r) {
    const int n = 400;
    std::vector<double> t(n), v(n);
    std::size_t best = 0;
    for (int i = 0; i < n; ++i) {
        t[i] = std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
        v[i] = r(t[i]);
        if (v[i] > v[best]) best = i;
    }
    GridSearch g;
    if (best == static_cast<std::size_t>(n - 1) && v[n - 1] > 1e6 * std::max(1.0, std::abs(r(1.0)))) {
        g.infinite = true;
        return g;
    }
    if (best == 0) {  // supremum at t -> 0
        g.value = v[0];
        g.t = 0;
        return g;
    }
    g.t = golden_max(r, t[best - 1], t[std::min<std::size_t>(best + 1, n - 1)]);
    g.value = r(g.t);
    return g;
}

DiscreteField random_state(const GridDomain& g, std::mt19937_64& rng) { return nqtest::random_field(g, rng); }

// ---------------------------------------------------------------- criteria

Outcome criterion_1() {
    Outcome o;
    std::mt19937_64 rng(101);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const auto A = random_symmetric(1 + k % 8, rng);
        const auto ev = eig_oracle(A);
        const double scale = std::max(1.0, std::abs(ev.front()) + std::abs(ev.back()));
        o.require(positive_definite(A, ev.front() - 1e-9 * scale) && !positive_definite(A, ev.front() + 1e-9 * scale),
                  "oracle minimum eigenvalue fails the inertia check");
        const auto [lo, hi] = nmm_extreme_values(A);
        worst = std::max({worst, std::abs(lo - ev.front()), std::abs(hi - ev.back())});
    }
    o.require(worst < 1e-8, "extreme value mismatch");
    o.detail << "worst |NMM - oracle| = " << worst;
    return o;
}

Outcome criterion_2() {
    Outcome o;
    const GridDomain g = build_grid(0, 1, 400);
    const auto ep = first_eigenpair(g, 2.0);
    const double oracle = nqtest::laplacian_lambda1(g);
    const double pi2 = std::acos(-1.0) * std::acos(-1.0);
    o.require(rel_err(ep.lambda1, oracle) < 1e-9, "eigenvalue differs from the tridiagonal oracle");
    o.require(std::abs(ep.lambda1 - pi2) < 1e-3 * pi2, "eigenvalue not within 0.1% of pi^2");
    bool positive = true;
    for (double v : ep.phi1.values()) positive = positive && v > 0;
    o.require(positive, "eigenfunction not strictly positive");
    o.detail << "lambda1 = " << ep.lambda1 << ", oracle " << oracle << ", pi^2 rel dev " << std::abs(ep.lambda1 - pi2) / pi2;
    return o;
}

Outcome criterion_3() {
    Outcome o;
    const GridDomain g = build_grid(0, 1, 60);
    std::mt19937_64 rng(303);
    const ProblemSpec cc(ConvexConcaveScalar{2.0, 1.5, 4.0, nqtest::field_from(g, [](double x) { return 1 + x; })});
    const ProblemSpec ind(IndefiniteScalar{2.0, 4.0, nqtest::field_from(g, [](double x) { return std::sin(9 * x); })});
    double worst_value = 0, worst_t = 0;
    int infinite = 0, finite = 0;
    for (const ProblemSpec* spec : {&cc, &ind}) {
        for (int k = 0; k < 50; ++k) {
            const DiscreteField u = random_state(g, rng);
            const ScalarOracle orc = oracle_of(*spec, u);
            const GridSearch gs = grid_sup([&](double t) { return orc.r(t); });
            const ExtendedReal closed = big_lambda(*spec, u);
            o.require(gs.infinite == closed.is_pos_inf(), "infinity classification differs");
            if (gs.infinite) {
                ++infinite;
                continue;
            }
            ++finite;
            worst_value = std::max(worst_value, rel_err(closed.value(), gs.value));
            if (spec == &cc) worst_t = std::max(worst_t, rel_err(t_max_convex_concave(*spec, u), gs.t));
        }
    }
    o.require(worst_value < 1e-6, "Lambda closed form vs search");
    o.require(worst_t < 1e-6, "t_max closed form vs search");
    o.require(infinite > 0 && finite > 50, "sample did not cover both classes");
    o.detail << finite << " finite, " << infinite << " infinite; worst rel err Lambda " << worst_value << ", t_max "
             << worst_t;
    return o;
}

Outcome criterion_4() {
    Outcome o;
    const GridDomain g = build_grid(0, 1, 24);
    std::mt19937_64 rng(404);
    std::vector<ProblemSpec> specs;
    specs.emplace_back(ConvexConcaveScalar{2.0, 1.5, 4.0, nqtest::constant_field(g, 1.0)});
    specs.emplace_back(IndefiniteScalar{3.0, 4.5, nqtest::field_from(g, [](double x) { return std::cos(6 * x); })});
    specs.emplace_back(GeneralConvexConcave{2.0, 1.5, {{3.0, nqtest::constant_field(g, 1.0)}, {5.0, nqtest::constant_field(g, 0.5)}}});
    specs.emplace_back(ConvexConcaveSystem{2.5, 1.5, 2.0, 2.0, nqtest::constant_field(g, 1.0)});
    specs.emplace_back(IndefiniteSystem{2.0, 3.0, 2.5, 2.0, nqtest::field_from(g, [](double x) { return 0.5 - x; })});
    std::uniform_real_distribution<double> logt(std::log(0.05), std::log(20.0));
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
        const ProblemSpec& spec = specs[k % specs.size()];
        const State u = spec.is_system() ? State(FieldPair(random_state(g, rng), random_state(g, rng)))
                                         : State(random_state(g, rng));
        const double t = std::exp(logt(rng));
        const double h = 1e-5 * t;
        const double fd = (rayleigh(spec, scaled(u, t + h)) - rayleigh(spec, scaled(u, t - h))) / (2 * h);
        const double an = fiber_derivative(spec, u, t);
        // Natural scale of a derivative in t of a quantity of size |r|.
        const double scale = std::max(std::abs(an), std::abs(rayleigh(spec, scaled(u, t))) / t);
        worst = std::max(worst, std::abs(an - fd) / scale);
    }
    o.require(worst < 1e-6, "derivative mismatch");
    o.detail << "worst relative error " << worst;
    return o;
}

Outcome criterion_5() {
    Outcome o;
    const GridDomain g = build_grid(0, 1, 16);
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> U(0, 1);
    int in_a = 0, in_b = 0, attempts = 0;
    double worst_res = 0, worst_j = 0, worst_det = 0;
    while ((in_a < 50 || in_b < 50) && attempts < 5000) {
        ++attempts;
        const double p = 1.5 + 2 * U(rng), q = 1.5 + 2 * U(rng);
        const double alpha = 1.2 + 2.5 * U(rng), beta = 1.2 + 2.5 * U(rng);
        if (alpha / p + beta / q <= 1.05) continue;
        const double cut = 0.2 + 0.6 * U(rng);
        const ProblemSpec spec(
            IndefiniteSystem{p, q, alpha, beta, nqtest::field_from(g, [cut](double x) { return x - cut; })});
        const FieldPair pr(random_state(g, rng), random_state(g, rng));
        const double ru = grad_integral(pr.u, p) / weighted_integral(pr.u, {}, p);
        const double rv = grad_integral(pr.v, q) / weighted_integral(pr.v, {}, q);
        const double F = energies(spec, pr).weighted_mass;
        const bool want_a = F > 0;
        if ((want_a && in_a >= 50) || (!want_a && in_b >= 50)) continue;
        const double lam = want_a ? std::min(ru, rv) * U(rng) - U(rng) : std::max(ru, rv) * (1.1 + U(rng));
        const auto I = system_integrals(spec, lam, pr);
        const bool ok_pattern = want_a ? (I.P > 0 && I.Q > 0 && I.F > 0) : (I.P < 0 && I.Q < 0 && I.F < 0);
        o.require(ok_pattern, "constructed pair outside the intended sign set");
        if (!ok_pattern) continue;
        (want_a ? in_a : in_b)++;
        const auto [t, s] = system_fiber_roots(spec, lam, pr);
        const auto res = system_nehari_residual(spec, lam, pr, t, s);
        const double scale = std::abs(std::pow(t, p) * I.P) + std::abs(std::pow(s, q) * I.Q);
        worst_res = std::max({worst_res, std::abs(res[0]) / scale, std::abs(res[1]) / scale});
        const FieldPair at = scaled(pr, t, s);
        worst_j = std::max(worst_j, rel_err(j_lambda(spec, lam, pr), phi(spec, lam, at)));
        const auto det = det_j_nehari(spec, at, lam);
        worst_det = std::max(worst_det, rel_err(det.closed_form, det.entrywise));
    }
    o.require(in_a == 50 && in_b == 50, "could not build 50 + 50 sign patterns");
    o.require(worst_res < 1e-10, "fiber residual");
    o.require(worst_j < 1e-10, "J vs Phi");
    o.require(worst_det < 1e-8, "determinant closed form vs entrywise");
    o.detail << in_a << " in A, " << in_b << " in B; worst residual " << worst_res << ", J " << worst_j << ", det "
             << worst_det;
    return o;
}

ExtremalOptions options(int restarts) {
    ExtremalOptions e;
    e.restarts = restarts;
    return e;
}

Outcome criterion_6() {
    Outcome o;
    const GridDomain g = build_grid(0, 1, 200);
    const double l1 = nqtest::laplacian_lambda1(g);
    const auto opts = options(8);

    const ProblemSpec pos(IndefiniteScalar{2.0, 4.0, nqtest::constant_field(g, 1.0)});
    const double star_pos = lambda_star_max_value(pos, opts).value.value();
    o.require(rel_err(star_pos, l1) < 1e-4, "f = +1: lambda*_max != lambda_1");

    const ProblemSpec neg(IndefiniteScalar{2.0, 4.0, nqtest::constant_field(g, -1.0)});
    const auto star_neg = lambda_star_max_value(neg, opts).value;
    const auto lmin_neg = lambda_min_max(neg, opts).first;
    o.require(star_neg.is_pos_inf(), "f = -1: lambda*_max finite");
    o.require(lmin_neg.is_finite() && rel_err(lmin_neg.value(), l1) < 1e-4, "f = -1: lambda_min != lambda_1");

    auto f = nqtest::field_from(g, [](double x) { return x - 0.6; });
    // The discrete first eigenfunction of tridiag(2,-1) is sin(pi x) at the nodes.
    const double pi = std::acos(-1.0);
    double weight = 0;
    for (int i = 0; i < g.n(); ++i) weight += f[i] * std::pow(std::sin(pi * g.node(i)), 4.0);
    o.require(weight < 0, "mixed weight does not have negative phi_1 mass");
    const ProblemSpec mix(IndefiniteScalar{2.0, 4.0, f});
    const double star_mix = lambda_star_max_value(mix, opts).value.value();
    const auto ouyang = ouyang_constrained(mix, opts).value;
    o.require(std::isfinite(star_mix) && star_mix > l1 * (1 + 1e-3), "mixed: lambda*_max not above lambda_1");
    o.require(ouyang.is_finite() && rel_err(ouyang.value(), star_mix) < 1e-5, "mixed: constrained value disagrees");
    o.detail << "lambda1 " << l1 << "; f=+1 " << star_pos << "; f=-1 " << star_neg.to_string() << ", lambda_min "
             << lmin_neg.to_string() << "; mixed " << star_mix << " vs constrained " << ouyang.to_string();
    return o;
}

struct CcSetup {
    GridDomain g = build_grid(0, 1, 200);
    ProblemSpec spec{ConvexConcaveScalar{2.0, 1.5, 4.0, nqtest::constant_field(g, 1.0)}};
    double star = lambda_star_max_value(spec, options(8)).value.value();
    NehariOptions nopts() const {
        NehariOptions n;
        n.restarts = 4;
        n.lambda_star_max = star;
        return n;
    }
};

Outcome criterion_7(const CcSetup& cc) {
    Outcome o;
    const double lam = 0.5 * cc.star;
    const auto pr = solve_pair(cc.spec, lam, cc.nopts());
    o.require(pr.first.solution && pr.second.solution, "missing a branch");
    if (pr.first.solution && pr.second.solution) {
        const auto& u1 = *pr.first.solution;
        const auto& u2 = *pr.second.solution;
        for (const auto* s : {&u1, &u2}) {
            o.require(sup_norm(el_residual(cc.spec, lam, s->state)) < 1e-7, "EL residual");
            const auto& u = std::get<DiscreteField>(s->state);
            const ScalarOracle orc = oracle_of(cc.spec, u);
            o.require(std::abs(orc.r(1.0) - lam) < 1e-8 * std::max(1.0, lam), "r(u) != lambda");
        }
        o.require(u1.fiber_second_derivative_sign < 0 && u2.fiber_second_derivative_sign > 0, "second derivative signs");
        o.require(u2.phi_value < 0 && 0 < u1.phi_value, "energy signs");
        o.detail << "lambda*_max " << cc.star << "; Phi(u1) " << u1.phi_value << ", Phi(u2) " << u2.phi_value
                 << "; residuals " << u1.el_residual_norm << ", " << u2.el_residual_norm << "; ";
    }
    const auto zero = solve_pair(cc.spec, 0.0, cc.nopts());
    o.require(zero.first.solution.has_value() && !zero.second.solution, "lambda = 0 should give N1 only");
    o.detail << "lambda = 0: N1 " << (zero.first.solution ? "found" : "missing") << ", N2 "
             << (zero.second.solution ? "found" : "absent");
    return o;
}

Outcome criterion_8(const CcSetup& cc) {
    Outcome o;
    const double lam = 0.5 * cc.star;
    const auto four = sign_constant_pair(cc.spec, lam, cc.nopts());
    o.require(four.size() == 4, "expected four solutions");
    if (four.size() != 4) return o;
    const double sign[4] = {1, -1, 1, -1};
    double worst = 0;
    for (int k = 0; k < 4; ++k) {
        bool in_cone = true;
        for (double v : std::get<DiscreteField>(four[k].state).values()) in_cone = in_cone && sign[k] * v >= 0;
        o.require(in_cone, "solution leaves its sign cone");
        worst = std::max(worst, sup_norm(el_residual(cc.spec, lam, four[k].state)));
    }
    o.require(worst < 1e-6, "untruncated residual");
    o.require(four[2].phi_value < 0 && four[3].phi_value < 0, "Phi(u2,+-) < 0");
    o.detail << "worst residual " << worst << "; Phi " << four[0].phi_value << ", " << four[1].phi_value << ", "
             << four[2].phi_value << ", " << four[3].phi_value;
    return o;
}

Outcome criterion_9(const fs::path& specs_dir) {
    Outcome o;
    std::mt19937_64 rng(909);
    int specs = 0;
    double worst_h = 0;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(specs_dir))
        if (e.path().extension() == ".ini") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const ProblemSpec spec = load_spec(path);
        ++specs;
        for (int k = 0; k < 3; ++k) {
            const auto x = seeded_starts(spec, 3, 77 + k)[k];
            std::vector<double> y(x);
            std::normal_distribution<double> N(0, 0.3);
            for (double& v : y) v += N(rng) * std::abs(v);
            const State u = to_state(spec, y);
            const ExtendedReal base = big_lambda(spec, u);
            for (double c : {0.1, 2.0, 10.0}) {
                const ExtendedReal sc = big_lambda(spec, scaled(u, c));
                if (base.is_finite()) {
                    worst_h = std::max(worst_h, rel_err(sc.value(), base.value()));
                } else {
                    o.require(sc == base, "homogeneity of an infinite value");
                }
            }
        }
        const auto r = extremal_report(spec, options(2));
        o.require(r.lambda_min <= r.lambda_star_min, path.filename().string() + ": lambda_min > lambda*_min");
        o.require(r.lambda_star_max <= r.lambda_max, path.filename().string() + ": lambda*_max > lambda_max");
        if (spec.as<IndefiniteSystem>()) {
            o.require(r.scalar_lambda_star_max && r.vector_lambda_star_max, "system fields missing");
            if (r.scalar_lambda_star_max && r.vector_lambda_star_max)
                o.require(*r.scalar_lambda_star_max <= *r.vector_lambda_star_max,
                          "scalar-fiber lambda*_max above the vector one");
        }
    }
    o.require(specs >= 8, "expected the shipped specs");
    o.require(worst_h < 1e-12, "homogeneity");
    o.detail << specs << " specs; worst homogeneity deviation " << worst_h;
    return o;
}

Outcome criterion_10(const fs::path& nq, const fs::path& specs_dir) {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "nq_acceptance_determinism";
    fs::remove_all(root);
    const std::string spec = (specs_dir / "convex_concave.ini").string();
    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"extremal", "--tol restarts=4"}, {"solve", "--lambda 3 --tol restarts=4"}};
    for (const auto& [cmd, extra] : cmds) {
        std::string manifests[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path out = root / (cmd + std::to_string(k));
            const std::string line = "\"" + nq.string() + "\" " + cmd + " --spec \"" + spec + "\" --seed 11 --out \"" +
                                     out.string() + "\" " + extra + " > /dev/null 2>&1";
            o.require(std::system(line.c_str()) == 0, cmd + " run failed");
            try {
                manifests[k] = read_text_file(out / "manifest.json");
            } catch (const Error&) {
                o.require(false, cmd + " wrote no manifest");
            }
        }
        o.require(!manifests[0].empty() && manifests[0] == manifests[1], cmd + " manifests differ");
        o.detail << cmd << " manifest " << manifests[0].size() << " bytes identical; ";
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: nq_acceptance <nq binary> <specs dir>\n";
        return 2;
    }
    const fs::path nq = argv[1], specs = argv[2];
    int failures = 0;
    auto report = [&](int id, double budget, const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = seconds_since(t0);
        const bool in_time = budget <= 0 || secs < budget;
        const bool pass = o.ok && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %d (%.2f s%s): %s\n", pass ? "PASS" : "FAIL", id, secs,
                    in_time ? "" : ", over budget", o.detail.str().c_str());
        std::fflush(stdout);
    };
    report(1, 5, criterion_1);
    report(2, 2, criterion_2);
    report(3, 5, criterion_3);
    report(4, 5, criterion_4);
    report(5, 5, criterion_5);
    report(6, 60, criterion_6);
    {
        const auto t0 = std::chrono::steady_clock::now();
        const CcSetup cc;  // λ*_max shared by criteria 7 and 8, its cost charged to 7
        const double setup = seconds_since(t0);
        report(7, 120 - setup, [&] { return criterion_7(cc); });
        report(8, 240, [&] { return criterion_8(cc); });
    }
    report(9, 10, [&] { return criterion_9(specs); });
    report(10, 0, [&] { return criterion_10(nq, specs); });
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
