#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qcalc/errors.hpp"
#include "qcalc/expr.hpp"
#include "qcalc/quantum.hpp"
#include "qcalc/symcalc.hpp"
#include "qcalc/variational.hpp"

using namespace qcalc;
using numerics::real_fn;
using quantum::QOmegaParams;
using variational::Flavor;
using variational::VariationalProblem;

namespace {

VariationalProblem problemaq(double q) {
    return {Flavor::q_symmetric, QOmegaParams(q, 0.0), 1, expr::parse("1+u1^2"),
            0.0,                 1.0,                  {0.0}, {1.0}};
}

}  // namespace

TEST_CASE("validate rejects inconsistent problems") {
    VariationalProblem ok = problemaq(0.5);
    CHECK_NOTHROW(variational::validate(ok));

    VariationalProblem p = ok;
    p.a = 1.0;
    p.b = 0.0;
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.lattice_depth = 0;
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.order = 2;  // symmetric flavors are first order
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.params = QOmegaParams(0.5, 0.3);  // q_symmetric needs omega = 0
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.lagrangian = expr::ExprFunc();
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.lagrangian = expr::parse("u2^2");  // slot beyond a first-order problem
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    p = ok;
    p.boundary_a = {0.0, 1.0};
    CHECK_THROWS_AS(variational::validate(p), std::invalid_argument);

    VariationalProblem h{Flavor::hahn_higher, QOmegaParams(0.5, 1.0), 5,
                         expr::parse("u1^2"), 2.0,
                         3.0,                 {0.0, 0.0, 0.0, 0.0, 0.0},
                         {0.0, 0.0, 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(variational::validate(h), std::invalid_argument);
}

TEST_CASE("residual_points walks both endpoint orbits and ends at omega0") {
    VariationalProblem p = problemaq(0.5);
    p.lattice_depth = 4;
    std::vector<double> pts = variational::residual_points(p);
    REQUIRE(pts.size() == 9);
    // Odd orbit powers of each endpoint for the symmetric flavor; a = 0 is the
    // accumulation point itself.
    for (int n = 0; n < 4; ++n) CHECK(pts[n] == 0.0);
    CHECK(pts[4] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pts[5] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(pts[8] == 0.0);

    VariationalProblem h{Flavor::hahn_higher, QOmegaParams(0.5, 1.0), 1, expr::parse("u1^2"),
                         4.0,                 6.0,                    {0.0}, {0.0}, 3};
    std::vector<double> hp = variational::residual_points(h);
    REQUIRE(hp.size() == 7);
    CHECK(hp[0] == 4.0);
    CHECK(hp[1] == 3.0);   // sigma(4)
    CHECK(hp[2] == 2.5);   // sigma(3)
    CHECK(hp[3] == 6.0);
    CHECK(hp[6] == 2.0);   // omega0
}

TEST_CASE("straight line minimizes arc-length-style functionals at any q") {
    for (double q : {0.3, 0.5, 0.8}) {
        VariationalProblem p = problemaq(q);
        variational::ResidualReport rep = variational::el_residual(p, expr::parse("t"));
        CHECK(rep.max_abs <= 1e-10);
        CHECK(rep.functional_value == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(rep.points.size() == rep.residuals.size());
    }
}

TEST_CASE("boundary conditions are enforced before residuals are computed") {
    VariationalProblem p = problemaq(0.5);
    CHECK_THROWS_AS(variational::el_residual(p, expr::parse("t+0.5")), domain_error);
    CHECK_THROWS_AS(variational::el_residual(p, expr::parse("2*t")), domain_error);
}

TEST_CASE("fourth difference of a cubic vanishes in the second-order flavor") {
    VariationalProblem p{Flavor::hahn_higher, QOmegaParams(0.8, 0.2), 2, expr::parse("u2^2"),
                         2.0,                 3.0,                    {},  {},  6};
    auto y = [](double t) { return t * t * t; };
    // Residuals are checked pointwise away from omega0 = 1: nested difference
    // quotients of a cubic leave only rounding residue there.
    for (double t : {2.0, 2.5, 3.0}) {
        CHECK(std::fabs(variational::el_residual_at(p, y, t)) <= 1e-9);
    }
}

TEST_CASE("classical limit: the residual of the straight line collapses") {
    VariationalProblem p{Flavor::hahn_higher, QOmegaParams(1.0 - 1e-6, 1e-9), 1,
                         expr::parse("u1^2"), 0.0,
                         1.0,                 {0.0},
                         {1.0}};
    auto y = [](double t) { return t; };
    for (double t : variational::residual_points(p)) {
        CHECK(std::fabs(variational::el_residual_at(p, y, t)) <= 1e-5);
    }
}

TEST_CASE("first_variation is linear in the variation") {
    VariationalProblem p = problemaq(0.6);
    p.lagrangian = expr::parse("u1^2+u0*u1+t*u0");
    auto y = [](double t) { return t + 0.3 * t * t; };
    auto eta1 = [](double t) { return t * (1.0 - t); };
    auto eta2 = [](double t) { return t * (1.0 - t) * (0.5 + t); };
    auto combo = [&](double t) { return eta1(t) + 2.0 * eta2(t); };
    double lhs = variational::first_variation(p, y, combo);
    double rhs = variational::first_variation(p, y, eta1) +
                 2.0 * variational::first_variation(p, y, eta2);
    CHECK(std::fabs(lhs - rhs) <= 1e-9 * std::max(1.0, std::fabs(lhs)));
}

TEST_CASE("first_variation rejects inadmissible variations") {
    VariationalProblem p = problemaq(0.5);
    auto y = [](double t) { return t; };
    CHECK_THROWS_AS(variational::first_variation(p, y, [](double t) { return t; }),
                    domain_error);
    CHECK_THROWS_AS(variational::first_variation(p, y, [](double) { return 1.0; }),
                    domain_error);
}

TEST_CASE("first_variation matches the weighted residual integral") {
    double q = 0.6;
    VariationalProblem p = problemaq(q);
    p.lagrangian = expr::parse("u1^2+0.5*u0^2+t*u1");

    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng);
        double d0 = coef(rng), d1 = coef(rng);
        real_fn y = [=](double t) { return c0 * t + c1 * t * t + 0.3 * c2 * std::sin(t); };
        real_fn eta = [=](double t) { return t * (1.0 - t) * (d0 + d1 * t); };

        double direct = variational::first_variation(p, y, eta);
        real_fn weighted = [&](double t) {
            return variational::el_residual_at(p, y, t) * eta(q * t);
        };
        numerics::SeriesResult integral = symcalc::q_sym_integral(weighted, q, p.a, p.b);
        REQUIRE(integral.converged);
        CHECK(std::fabs(direct - integral.value) <= 1e-6 * std::max(1.0, std::fabs(direct)));
    }
}

TEST_CASE("extremizer soundness: perturbations cost more") {
    VariationalProblem p = problemaq(0.5);
    p.lagrangian = expr::parse("u1^2");
    auto star = [](double t) { return t; };
    double base = variational::eval_functional(p, star);
    CHECK(base == doctest::Approx(1.0).epsilon(1e-10));
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        double c0 = coef(rng), c1 = coef(rng);
        auto perturbed = [&, c0, c1](double t) {
            return t + 0.4 * t * (1.0 - t) * (c0 + c1 * t);
        };
        CHECK(variational::eval_functional(p, perturbed) >= base - 1e-12);
    }
}

TEST_CASE("convexity sampling: convex integrands leave no violations") {
    variational::ConvexityReport r = variational::convexity_sample(
        expr::parse("u0^2+u1^2+t*u0"), {0.0, 1.0}, {-2.0, 2.0}, {-2.0, 2.0}, 40);
    CHECK(r.jointly_convex_evidence);
    CHECK(r.violations.empty());
    CHECK(r.samples == 16 * 40);
    CHECK(r.seed != 0);

    variational::ConvexityReport again = variational::convexity_sample(
        expr::parse("u0^2+u1^2+t*u0"), {0.0, 1.0}, {-2.0, 2.0}, {-2.0, 2.0}, 40);
    CHECK(again.jointly_convex_evidence == r.jointly_convex_evidence);
    CHECK(again.samples == r.samples);
    CHECK(again.seed == r.seed);
}

TEST_CASE("convexity sampling flags a saddle") {
    variational::ConvexityReport r = variational::convexity_sample(
        expr::parse("u0^2-u1^2"), {0.0, 1.0}, {-2.0, 2.0}, {-2.0, 2.0}, 40);
    CHECK_FALSE(r.jointly_convex_evidence);
    CHECK_FALSE(r.violations.empty());
    for (const variational::ConvexityViolation& v : r.violations) CHECK(v.defect > 1e-9);
}

TEST_CASE("convexity sampling validates its inputs") {
    CHECK_THROWS_AS(
        variational::convexity_sample(expr::parse("u2^2"), {0, 1}, {-1, 1}, {-1, 1}, 10),
        std::invalid_argument);
    CHECK_THROWS_AS(
        variational::convexity_sample(expr::parse("u0^2"), {0, 1}, {-1, 1}, {-1, 1}, 1),
        std::invalid_argument);
}

TEST_CASE("direct-method equivalence holds on the frozen transform") {
    VariationalProblem p{Flavor::hahn_symmetric, QOmegaParams(0.5, 1.0), 1,
                         expr::parse("u1^2+0.5*u0+t*u1"),
                         2.0,
                         6.0,
                         {1.0},
                         {5.0}};
    variational::Transform z{expr::parse("u0+t-1"), expr::parse("u0-t+1")};
    expr::ExprFunc G = expr::parse("2*u0+0.5*t+(0.5*t+1)*u0+(0.5*t+1)*t");
    variational::LeitmannReport rep = variational::leitmann_check(
        p.lagrangian, expr::parse("u1^2"), z, G, p, 10);
    CHECK(rep.holds);
    CHECK(rep.max_pointwise_defect <= 1e-8);
    CHECK(rep.max_functional_defect <= 1e-7);
    CHECK(rep.samples == 10);

    CHECK_THROWS_AS(variational::leitmann_check(p.lagrangian, expr::parse("u1^2"), z, G, p, 0),
                    std::invalid_argument);
}

TEST_CASE("the transformed minimizer satisfies its own Euler-Lagrange equation") {
    VariationalProblem p{Flavor::hahn_symmetric, QOmegaParams(0.5, 1.0), 1,
                         expr::parse("u1^2+0.5*u0+t*u1"),
                         2.0,
                         6.0,
                         {1.0},
                         {5.0}};
    variational::ResidualReport rep = variational::el_residual(p, expr::parse("t-1"));
    CHECK(rep.max_abs <= 1e-8);
}
