#include "nq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nq/errors.hpp"

namespace nq::opt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Solves the tridiagonal system with diagonal `d` and symmetric off-diagonal
/// `e` (e[j] couples j and j+1) in place on `rhs`.
void thomas(std::vector<double> d, const std::vector<double>& e, std::span<double> rhs) {
    const std::size_t n = d.size();
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double m = e[i - 1] / d[i - 1];
            d[i] -= m * e[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
    }
    rhs[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - e[i] * rhs[i + 1]) / d[i];
}

struct Direction {
    std::vector<double> w;  // min-norm element in gradient space
    std::vector<double> z;  // M^{-1} w
    double norm2 = 0;
};

std::vector<double> combine(const std::vector<double>& b, double theta, const std::vector<double>* a, double mu,
                            const std::vector<double>* n) {
    std::vector<double> out = b;
    if (a)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += theta * (*a)[i];
    if (n)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= mu * (*n)[i];
    return out;
}

/// Minimum M^{-1}-norm element of conv{g_i} - cone{n}.
Direction min_norm(const std::vector<const std::vector<double>*>& g, const std::vector<const std::vector<double>*>& z,
                   const std::vector<double>* n, const std::vector<double>* zn) {
    if (g.empty() || g.size() > 2) fail(ErrorKind::InvalidSpec, "direction search supports one or two pieces");
    const auto& b = *g.back();
    const auto& zb = *z.back();
    std::vector<double> a, za;
    if (g.size() == 2) {
        a.resize(b.size());
        za.resize(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
            a[i] = (*g[0])[i] - b[i];
            za[i] = (*z[0])[i] - zb[i];
        }
    }
    const bool two = g.size() == 2;
    const double bb = dot(b, zb);
    const double ab = two ? dot(a, zb) : 0.0;
    const double aa = two ? dot(a, za) : 0.0;
    const double nb = n ? dot(*n, zb) : 0.0;
    const double nn = n ? dot(*n, *zn) : 0.0;
    const double an = (n && two) ? dot(a, *zn) : 0.0;
    auto Q = [&](double th, double mu) {
        return bb + 2 * th * ab - 2 * mu * nb + th * th * aa - 2 * th * mu * an + mu * mu * nn;
    };
    double best_th = 0, best_mu = 0, best_q = kInf;
    auto consider = [&](double th, double mu) {
        if (!(th >= 0 && th <= 1 && mu >= 0)) return;
        const double q = Q(th, mu);
        if (q < best_q) {
            best_q = q;
            best_th = th;
            best_mu = mu;
        }
    };
    auto mu_for = [&](double th) { return (n && nn > 0) ? std::max(0.0, (nb + th * an) / nn) : 0.0; };
    auto th_for = [&](double mu) { return (two && aa > 0) ? std::clamp((mu * an - ab) / aa, 0.0, 1.0) : 0.0; };
    consider(0.0, mu_for(0.0));
    if (two) {
        consider(1.0, mu_for(1.0));
        consider(th_for(0.0), 0.0);
        if (n) {
            const double det = aa * nn - an * an;
            if (det > 1e-14 * aa * nn) consider((-ab * nn + an * nb) / det, (aa * nb - an * ab) / det);
        }
    }
    Direction d;
    d.w = combine(b, best_th, two ? &a : nullptr, best_mu, n);
    d.z = combine(zb, best_th, two ? &za : nullptr, best_mu, zn);
    d.norm2 = std::max(0.0, dot(d.w, d.z));
    return d;
}

struct Objective {
    double value;
    std::vector<Eval> evals;
};

Objective evaluate(const Problem& p, std::span<const double> x) {
    Objective o{-kInf, {}};
    for (const auto& f : p.pieces) {
        o.evals.push_back(f(x));
        o.value = std::max(o.value, o.evals.back().value);
    }
    return o;
}

double joint_norm(const Problem& p, std::span<const double> x) {
    double s = 0;
    for (int b = 0; b < p.precond.blocks; ++b) {
        const double nb = p.precond.block_norm(x, b);
        s += nb * nb;
    }
    return std::sqrt(s);
}

bool restore(const Problem& p, std::vector<double>& x) {
    for (int k = 0; k < 12; ++k) {
        const Eval c = (*p.constraint)(x);
        if (c.value >= 0) return true;
        const auto zn = p.precond.solve(x, c.grad);
        const double denom = dot(c.grad, zn);
        if (!(denom > 0)) return false;
        const double delta = (1e-10 * c.scale - c.value) / denom;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += delta * zn[i];
        normalize(p, x);
    }
    return (*p.constraint)(x).value >= 0;
}

}  // namespace

std::vector<double> Preconditioner::solve(std::span<const double> x, std::span<const double> g) const {
    std::vector<double> out(g.begin(), g.end());
    if (exponents.empty()) return out;
    const std::size_t n = block;
    for (int b = 0; b < blocks; ++b) {
        const double r = exponents[b];
        auto xb = x.subspan(b * n, n);
        std::vector<double> d(n + 1);
        double dmax = 0;
        for (std::size_t i = 0; i <= n; ++i) {
            d[i] = std::abs(((i < n ? xb[i] : 0.0) - (i > 0 ? xb[i - 1] : 0.0)) / h);
            dmax = std::max(dmax, d[i]);
        }
        std::vector<double> W(n + 1, 1.0 / h);
        if (r != 2.0 && dmax > 0) {
            const double floor = 1e-2 * dmax;
            for (std::size_t i = 0; i <= n; ++i) W[i] = std::pow(std::max(d[i], floor), r - 2.0) / h;
        }
        std::vector<double> diag(n), off(n > 0 ? n - 1 : 0);
        for (std::size_t j = 0; j < n; ++j) diag[j] = W[j] + W[j + 1];
        for (std::size_t j = 0; j + 1 < n; ++j) off[j] = -W[j + 1];
        thomas(diag, off, std::span<double>(out).subspan(b * n, n));
    }
    return out;
}

double Preconditioner::block_norm(std::span<const double> x, int b) const {
    auto xb = x.subspan(static_cast<std::size_t>(b) * block, block);
    double s = 0;
    if (exponents.empty()) {
        for (double v : xb) s += v * v;
        return std::sqrt(s);
    }
    for (int i = 0; i <= block; ++i) {
        const double d = ((i < block ? xb[i] : 0.0) - (i > 0 ? xb[i - 1] : 0.0)) / h;
        s += h * d * d;
    }
    return std::sqrt(s);
}

void normalize(const Problem& problem, std::vector<double>& x) {
    const auto& P = problem.precond;
    if (problem.normalize == Normalize::Joint) {
        const double s = joint_norm(problem, x);
        if (s > 0)
            for (double& v : x) v /= s;
        return;
    }
    for (int b = 0; b < P.blocks; ++b) {
        const double s = P.block_norm(x, b);
        if (s == 0) continue;
        for (int i = 0; i < P.block; ++i) x[b * P.block + i] /= s;
    }
}

Result descend(const Problem& problem, std::vector<double> x, const Options& options) {
    normalize(problem, x);
    Result res;
    if (problem.constraint) {
        const Eval c = (*problem.constraint)(x);
        if (c.value < 0) {
            // Feasibility phase: push c above a small positive margin.
            Problem feas{{[&](std::span<const double> y) {
                             Eval e = (*problem.constraint)(y);
                             e.value = -e.value;
                             for (double& gi : e.grad) gi = -gi;
                             return e;
                         }},
                         std::nullopt,
                         problem.precond,
                         problem.normalize};
            Options fo = options;
            fo.stop_below = -1e-4 * c.scale;
            x = descend(feas, x, fo).x;
            if ((*problem.constraint)(x).value < 0) {
                res.x = x;
                res.value = kInf;
                res.feasible = false;
                return res;
            }
        }
    }

    double alpha = 0;
    Objective cur = evaluate(problem, x);
    double eps_f = 1e-3 * (1 + std::abs(cur.value));
    int stalled = 0;  // consecutive steps with a decrease at rounding level
    for (int it = 0; it < options.max_iter; ++it) {
        res.iterations = it;
        if (!std::isfinite(cur.value)) break;
        if (options.stop_below && cur.value <= *options.stop_below) break;

        std::vector<const std::vector<double>*> g, z;
        std::vector<std::vector<double>> zs;
        zs.reserve(cur.evals.size());
        for (const auto& e : cur.evals) {
            if (e.value < cur.value - eps_f) continue;
            zs.push_back(problem.precond.solve(x, e.grad));
            g.push_back(&e.grad);
        }
        for (const auto& zz : zs) z.push_back(&zz);
        std::optional<Eval> c;
        std::vector<double> zn;
        if (problem.constraint) {
            c = (*problem.constraint)(x);
            if (c->value <= 1e-6 * c->scale) {
                zn = problem.precond.solve(x, c->grad);
            } else {
                c.reset();
            }
        }
        const Direction dir = min_norm(g, z, c ? &c->grad : nullptr, c ? &zn : nullptr);
        const double s = std::sqrt(dir.norm2);
        res.stationarity = s;
        if (s <= options.tol * std::max(1.0, std::abs(cur.value))) break;

        const double dnorm = joint_norm(problem, dir.z);
        if (!(dnorm > 0)) break;
        double a = alpha > 0 ? std::min(2 * alpha, 1e6 * alpha) : 0.1 * joint_norm(problem, x) / dnorm;
        bool accepted = false;
        Objective next;
        std::vector<double> xn;
        for (int k = 0; k < 60; ++k) {
            xn = x;
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] -= a * dir.z[i];
            normalize(problem, xn);
            if (problem.constraint && !restore(problem, xn)) {
                a *= 0.5;
                continue;
            }
            next = evaluate(problem, xn);
            if (next.value == -kInf || next.value <= cur.value - options.armijo * a * dir.norm2) {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if (!accepted) {
            // Tighten the active-set threshold once before giving up.
            if (eps_f > 1e-12 * (1 + std::abs(cur.value))) {
                eps_f = 1e-12 * (1 + std::abs(cur.value));
                continue;
            }
            break;
        }
        alpha = a;
        const double decrease = cur.value - next.value;
        stalled = decrease <= 1e-15 * (1 + std::abs(cur.value)) ? stalled + 1 : 0;
        x = std::move(xn);
        cur = std::move(next);
        if (std::isfinite(cur.value))
            eps_f = std::clamp(10 * decrease, 1e-12 * (1 + std::abs(cur.value)), 1e-3 * (1 + std::abs(cur.value)));
        if (options.stall_steps > 0 && stalled >= options.stall_steps) break;
    }
    res.x = std::move(x);
    res.value = cur.value;
    res.converged = std::isfinite(cur.value) &&
                    res.stationarity <= options.converged_tol * std::max(1.0, std::abs(cur.value));
    if (cur.value == -kInf) res.converged = true;
    return res;
}

Result polish(const Problem& problem, std::vector<double> x, const Options& options) {
    if (problem.pieces.size() != 1 || problem.constraint) fail(ErrorKind::InvalidSpec, "polish takes one unconstrained piece");
    normalize(problem, x);
    auto measure = [&](std::span<const double> y, Eval& e, std::vector<double>& z) {
        e = problem.pieces[0](y);
        if (!std::isfinite(e.value) || e.grad.empty()) return kInf;
        z = problem.precond.solve(y, e.grad);
        return std::max(0.0, dot(e.grad, z));
    };
    Eval cur;
    std::vector<double> z;
    double s2 = measure(x, cur, z);
    Result res;
    double a = 0;
    for (int it = 0; it < options.max_iter && std::isfinite(s2); ++it) {
        res.iterations = it;
        if (std::sqrt(s2) <= options.tol * std::max(1.0, std::abs(cur.value))) break;
        const double zn = joint_norm(problem, z);
        if (!(zn > 0)) break;
        a = a > 0 ? 2 * a : 0.1 * joint_norm(problem, x) / zn;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, a *= 0.5) {
            std::vector<double> xn = x;
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] -= a * z[i];
            normalize(problem, xn);
            Eval en;
            std::vector<double> zn2;
            const double s2n = measure(xn, en, zn2);
            if (s2n < s2) {
                x = std::move(xn);
                cur = std::move(en);
                z = std::move(zn2);
                s2 = s2n;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    res.x = std::move(x);
    res.value = cur.value;
    res.stationarity = std::sqrt(s2);
    res.converged = std::isfinite(s2) && res.stationarity <= options.converged_tol * std::max(1.0, std::abs(cur.value));
    return res;
}

MultiResult multistart(const Problem& problem, const std::vector<std::vector<double>>& starts, const Options& options) {
    MultiResult out;
    out.best = kInf;
    for (const auto& s : starts) {
        Result r = descend(problem, s, options);
        ++out.restarts;
        if (r.value < out.best || out.best_x.empty()) {
            out.best = r.value;
            out.best_x = r.x;
            out.converged = r.converged;
        }
        out.history.push_back(out.best);
        out.runs.push_back(std::move(r));
    }
    // Ties in value (to rounding) go to the most stationary run.
    if (std::isfinite(out.best)) {
        const double band = 1e-12 * std::max(1.0, std::abs(out.best));
        const Result* pick = nullptr;
        for (const auto& r : out.runs)
            if (r.value <= out.best + band && (!pick || r.stationarity < pick->stationarity)) pick = &r;
        out.best_x = pick->x;
        out.converged = pick->converged;
    }
    return out;
}

}  // namespace nq::opt
