#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nq/errors.hpp"
#include "nq/extremal.hpp"
#include "nq/functional.hpp"
#include "nq/nehari.hpp"
#include "nq/system_fiber.hpp"
#include "test_support.hpp"

using namespace nq;
using nqtest::constant_field;
using nqtest::field_from;
using nqtest::rel_err;

namespace {

// r(tu) = 2t - t².
ScalarFiber parabola() {
    return ScalarFiber({{Term::Kind::Gradient, 0, 0.5, 0.0, 2.0, 0.0, 2.0},
                        {Term::Kind::Weighted, 0, -1.0 / 3.0, 0.0, 3.0, 0.0, 1.0},
                        {Term::Kind::Mass, 0, 0.0, 1.0, 1.0, 0.0, 1.0}});
}

template <class F>
ErrorKind error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ConfigError;
}

struct CcFixture {
    GridDomain g = build_grid(0, 1, 50);
    ProblemSpec spec{ConvexConcaveScalar{2.0, 1.5, 4.0, constant_field(g, 1.0)}};
    double star = 0;
    NehariOptions opts;
    CcFixture() {
        ExtremalOptions eo;
        eo.restarts = 3;
        star = lambda_star_max_value(spec, eo).value.value();
        opts.restarts = 3;
        opts.lambda_star_max = star;
    }
};

}  // namespace

TEST_CASE("projection onto the branches of a parabolic fiber") {
    const auto f = parabola();
    CHECK(project_to_branch(f, 0.75, BranchTag::N2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(project_to_branch(f, 0.75, BranchTag::N1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(f.dr(project_to_branch(f, 0.75, BranchTag::N2)) > 0);
    CHECK(f.dr(project_to_branch(f, 0.75, BranchTag::N1)) < 0);
    CHECK(error_of([&] { project_to_branch(f, 1.0, BranchTag::N1); }) == ErrorKind::DegenerateTangency);
    CHECK(error_of([&] { project_to_branch(f, 2.0, BranchTag::N2); }) == ErrorKind::NoIntersection);
    // The ascending part starts at r = 0.
    CHECK(error_of([&] { project_to_branch(f, -0.5, BranchTag::N2); }) == ErrorKind::NoIntersection);
    CHECK(project_to_branch(f, -3.0, BranchTag::N1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("projection round-trips through the fiber on random states") {
    const auto g = build_grid(0, 1, 40);
    const ProblemSpec spec(ConvexConcaveScalar{2.0, 1.5, 4.0, constant_field(g, 1.0)});
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const State u = nqtest::random_field(g, rng);
        const double top = big_lambda(spec, u).value();
        const double lam = top * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const double t2 = project_to_branch(spec, lam, u, BranchTag::N2);
        const double t1 = project_to_branch(spec, lam, u, BranchTag::N1);
        CHECK(t2 < t_max_convex_concave(spec, u));
        CHECK(t1 > t_max_convex_concave(spec, u));
        CHECK(std::abs(rayleigh(spec, scaled(u, t2)) - lam) < 1e-10 * std::max(1.0, lam));
        CHECK(std::abs(rayleigh(spec, scaled(u, t1)) - lam) < 1e-10 * std::max(1.0, lam));
    }
}

TEST_CASE_FIXTURE(CcFixture, "two solutions below lambda star max") {
    const double lam = 0.5 * star;
    const SolutionPair pair = solve_pair(spec, lam, opts);
    REQUIRE(pair.first.solution);
    REQUIRE(pair.second.solution);
    const auto& u1 = *pair.first.solution;
    const auto& u2 = *pair.second.solution;
    for (const auto* s : {&u1, &u2}) {
        CHECK(s->el_residual_norm < 1e-7);
        CHECK(std::abs(s->fiber_r - lam) < 1e-8);
        const Verification v = verify_solution(spec, lam, *s);
        CHECK(v.passed());
    }
    CHECK(u1.fiber_second_derivative_sign == -1);
    CHECK(u2.fiber_second_derivative_sign == 1);
    CHECK(u2.phi_value < 0);
    CHECK(u1.phi_value > 0);
    CHECK(u2.phi_value < u1.phi_value);
    CHECK(u2.ground_state_flag);
    CHECK_FALSE(u1.ground_state_flag);
    REQUIRE(pair.separation);
    CHECK(*pair.separation > 1e-6);
}

TEST_CASE_FIXTURE(CcFixture, "only the descending branch at lambda zero") {
    const SolutionPair pair = solve_pair(spec, 0.0, opts);
    REQUIRE(pair.first.solution);
    CHECK(pair.first.solution->el_residual_norm < 1e-7);
    CHECK(pair.first.solution->phi_value > 0);
    CHECK(pair.first.solution->ground_state_flag);
    CHECK_FALSE(pair.second.solution);
    REQUIRE(pair.second.error);
    CHECK(*pair.second.error == ErrorKind::BranchEmpty);
}

TEST_CASE_FIXTURE(CcFixture, "both branches empty above lambda star max") {
    CHECK(error_of([&] { minimize_branch(spec, 2 * star, BranchTag::N2, opts); }) == ErrorKind::BranchEmpty);
    CHECK(error_of([&] { minimize_branch(spec, 2 * star, BranchTag::N1, opts); }) == ErrorKind::BranchEmpty);
}

TEST_CASE_FIXTURE(CcFixture, "sign-constant quadruple") {
    const double lam = 0.5 * star;
    const auto sols = sign_constant_pair(spec, lam, opts);
    REQUIRE(sols.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto x = flatten(sols[k].state);
        const double sign = k % 2 == 0 ? 1.0 : -1.0;
        CHECK(std::ranges::all_of(x, [sign](double v) { return sign * v >= 0; }));
        CHECK(sols[k].el_residual_norm < 1e-6);
    }
    CHECK(sols[2].phi_value < 0);
    CHECK(sols[3].phi_value < 0);
    // The even functional makes the two cones mirror images.
    const auto a = flatten(sols[0].state), b = flatten(sols[1].state);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(-b[i]).epsilon(1e-6));

    const auto below = sign_constant_pair(spec, -1.0, opts);
    CHECK(below.size() == 2);
}

TEST_CASE("verification flags a perturbed solution and rejects zero") {
    CcFixture fx;
    const double lam = 0.5 * fx.star;
    const NehariSolution s = minimize_branch(fx.spec, lam, BranchTag::N1, fx.opts);
    NehariSolution noisy = s;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1e-2);
    auto x = flatten(noisy.state);
    for (double& v : x) v += N(rng);
    noisy.state = unflatten(noisy.state, x);
    const Verification v = verify_solution(fx.spec, lam, noisy);
    CHECK_FALSE(v.residual_ok);
    CHECK(v.membership_error < 0.05 * std::max(1.0, lam));
    NehariSolution zero = s;
    zero.state = fx.spec.zero_state();
    CHECK(error_of([&] { verify_solution(fx.spec, lam, zero); }) == ErrorKind::OutsideW);
}

TEST_CASE("vector Nehari minimization for the indefinite system") {
    const auto g = build_grid(0, 1, 40);
    NehariOptions o;
    o.restarts = 4;

    const ProblemSpec pos(IndefiniteSystem{2.0, 3.0, 2.5, 2.5, constant_field(g, 1.0)});
    const double lam = 0.5 * first_eigenpair(g, 2.0).lambda1;
    const NehariSolution s = system_nehari_minimize(pos, lam, o);
    const auto& pair = std::get<FieldPair>(s.state);
    CHECK(rel_err(s.phi_value, phi(pos, lam, s.state)) < 1e-10);
    const auto res = system_nehari_residual(pos, lam, pair, 1.0, 1.0);
    const auto I = system_integrals(pos, lam, pair);
    CHECK(I.P > 0);
    CHECK(I.Q > 0);
    CHECK(I.F > 0);
    CHECK(std::abs(res[0]) < 1e-8 * I.P);
    CHECK(std::abs(res[1]) < 1e-8 * I.Q);
    CHECK(s.el_residual_norm < 1e-6);
    const Verification v = verify_solution(pos, lam, s, 1e-6);
    CHECK(v.passed());
    REQUIRE(v.det_j);
    CHECK(*v.det_j < 0);

    // Sign-changing weight between λ₁ and λ*_max (equal exponents).
    const ProblemSpec mix(IndefiniteSystem{2.0, 2.0, 2.5, 2.5, field_from(g, [](double x) { return x - 0.6; })});
    ExtremalOptions eo;
    eo.restarts = 4;
    const double star = system_lambda_star_max(mix, eo).value.value();
    const double l1 = first_eigenpair(g, 2.0).lambda1;
    REQUIRE(star > l1);
    const double lm = 0.5 * (l1 + star);
    const NehariSolution sm = system_nehari_minimize(mix, lm, o);
    const Verification vm = verify_solution(mix, lm, sm, 1e-6);
    CHECK(vm.passed());
    REQUIRE(vm.det_j);
    CHECK(*vm.det_j != 0);

    const ProblemSpec neg(IndefiniteSystem{2.0, 3.0, 2.5, 2.5, constant_field(g, -1.0)});
    CHECK(error_of([&] { system_nehari_minimize(neg, lam, o); }) == ErrorKind::EmptySet);
}
