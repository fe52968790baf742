#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "qcalc/errors.hpp"
#include "qcalc/numerics.hpp"
#include "qcalc/quantum.hpp"

using namespace qcalc;
using numerics::real_fn;
using numerics::SeriesResult;
using quantum::QOmegaParams;

namespace {

// Random smooth test functions: low-degree polynomial plus trig/exponential
// terms with bounded coefficients.
struct SmoothFamily {
    std::vector<std::array<double, 7>> coef;
    std::vector<double> lambda;

    SmoothFamily(int count, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> c(-1.0, 1.0);
        std::uniform_real_distribution<double> l(-0.5, 0.5);
        for (int i = 0; i < count; ++i) {
            coef.push_back({c(rng), c(rng), c(rng), c(rng), c(rng), c(rng), c(rng)});
            lambda.push_back(l(rng));
        }
    }

    real_fn fn(int i) const {
        auto a = coef[i];
        double lam = lambda[i];
        return [a, lam](double t) {
            return a[0] + t * (a[1] + t * (a[2] + t * a[3])) + a[4] * std::sin(t) +
                   a[5] * std::cos(t) + a[6] * std::exp(lam * t);
        };
    }
};

}  // namespace

TEST_CASE("QOmegaParams validates its domain and pins the fixed point") {
    QOmegaParams p(0.5, 1.0);
    CHECK(p.omega0 == 2.0);
    CHECK(p.sigma(4.0) == 3.0);
    CHECK(p.sigma_inv(3.0) == 4.0);
    CHECK(p.at_fixed_point(2.0));
    CHECK_FALSE(p.at_fixed_point(2.1));
    CHECK_THROWS_AS(QOmegaParams(1.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(QOmegaParams(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("q_number basics") {
    CHECK(quantum::q_number(0.5, 0) == 0.0);
    CHECK(quantum::q_number(0.5, 1) == 1.0);
    CHECK(quantum::q_number(0.5, 3) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(quantum::q_number(0.5, -1) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("sigma_orbit closed form against direct iteration") {
    QOmegaParams p(0.5, 1.0);
    CHECK(quantum::sigma_orbit(p, 6.0, 0) == 6.0);
    CHECK(quantum::sigma_orbit(p, 6.0, 2) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(quantum::sigma_orbit(p, 3.0, -1) == doctest::Approx(4.0).epsilon(1e-15));
    for (int n : {-3, 5}) CHECK(quantum::sigma_orbit(p, 2.0, n) == doctest::Approx(2.0));

    QOmegaParams p2(0.7, 0.3);
    double v = 1.9;
    for (int n = 1; n <= 12; ++n) {
        v = p2.sigma(v);
        CHECK(quantum::sigma_orbit(p2, 1.9, n) == doctest::Approx(v).epsilon(1e-13));
    }
}

TEST_CASE("hahn_derivative quotient, constant rule, and fixed-point branch") {
    QOmegaParams p(0.5, 1.0);
    auto sq = [](double t) { return t * t; };
    CHECK(quantum::hahn_derivative(sq, p, 4.0) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(quantum::hahn_derivative([](double) { return 3.25; }, p, 4.0) == 0.0);
    CHECK(quantum::hahn_derivative(sq, p, 2.0) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("hahn_derivative_higher recursion and order cap") {
    QOmegaParams p(0.5, 1.0);
    auto sq = [](double t) { return t * t; };
    CHECK(quantum::hahn_derivative_higher(sq, p, 4.0, 2) ==
          doctest::Approx(1.5).epsilon(1e-12));  // D[(q+1)t + w] = q+1
    CHECK(quantum::hahn_derivative_higher([](double t) { return 2.0 * t - 1.0; }, p, 3.0, 2) ==
          doctest::Approx(0.0));
    CHECK(quantum::hahn_derivative_higher(sq, p, 4.0, 1) == quantum::hahn_derivative(sq, p, 4.0));
    CHECK_THROWS_AS(quantum::hahn_derivative_higher(sq, p, 4.0, 7), domain_error);
    CHECK_THROWS_AS(quantum::hahn_derivative_higher(sq, p, 4.0, 0), domain_error);
}

TEST_CASE("hahn_integral golden values") {
    QOmegaParams p(0.5, 1.0);
    CHECK(quantum::hahn_integral([](double t) { return t; }, p, 3.0, 3.0).value == 0.0);

    // Single-band identity: the integral from sigma(t) to t is (t(1-q)-w) f(t).
    SeriesResult band = quantum::hahn_integral([](double) { return 1.0; }, p, 3.0, 4.0);
    CHECK(band.converged);
    CHECK(band.value == doctest::Approx(1.0).epsilon(1e-12));

    // Jackson special case w = 0.
    QOmegaParams j(0.5, 0.0);
    SeriesResult s = quantum::hahn_integral([](double t) { return t; }, j, 0.0, 1.0);
    CHECK(s.converged);
    CHECK(s.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("hahn calculus fundamental theorem, both directions") {
    QOmegaParams p(0.55, 0.9);  // omega0 = 2
    SmoothFamily fam(10, 777);
    std::mt19937_64 rng(778);
    std::uniform_real_distribution<double> xs(2.3, 6.0);
    for (int i = 0; i < 10; ++i) {
        real_fn f = fam.fn(i);
        auto F = [&](double x) { return quantum::hahn_integral(f, p, p.omega0, x).value; };
        for (int k = 0; k < 4; ++k) {
            double x = xs(rng);
            CHECK(std::fabs(quantum::hahn_derivative(F, p, x) - f(x)) <= 1e-8);
        }
        auto Df = [&](double t) { return quantum::hahn_derivative(f, p, t); };
        double a = xs(rng), b = xs(rng);
        SeriesResult r = quantum::hahn_integral(Df, p, a, b);
        REQUIRE(r.converged);
        CHECK(std::fabs(r.value - (f(b) - f(a))) <= 1e-8);
    }
}

TEST_CASE("hahn integration by parts") {
    QOmegaParams p(0.55, 0.9);
    SmoothFamily fam(20, 991);
    for (int i = 0; i < 10; ++i) {
        real_fn f = fam.fn(i);
        real_fn g = fam.fn(10 + i);
        double a = 2.4, b = 5.1;
        auto fDg = [&](double t) { return f(t) * quantum::hahn_derivative(g, p, t); };
        auto Dfg_shift = [&](double t) {
            return quantum::hahn_derivative(f, p, t) * g(p.sigma(t));
        };
        double lhs = quantum::hahn_integral(fDg, p, a, b).value;
        double rhs = f(b) * g(b) - f(a) * g(a) - quantum::hahn_integral(Dfg_shift, p, a, b).value;
        CHECK(std::fabs(lhs - rhs) <= 1e-8);
    }
}

TEST_CASE("shift composition and product rules hold pointwise") {
    QOmegaParams p(0.6, 0.8);
    SmoothFamily fam(12, 4242);
    std::mt19937_64 rng(4243);
    std::uniform_real_distribution<double> ts(2.2, 7.0);
    for (int i = 0; i < 6; ++i) {
        real_fn f = fam.fn(i);
        real_fn g = fam.fn(6 + i);
        for (int k = 0; k < 5; ++k) {
            double t = ts(rng);
            // D[f o sigma](t) = q * D[f](sigma(t))
            auto fs = [&](double x) { return f(p.sigma(x)); };
            CHECK(std::fabs(quantum::hahn_derivative(fs, p, t) -
                            p.q * quantum::hahn_derivative(f, p, p.sigma(t))) <= 1e-10);
            // D[fg](t) = f(sigma(t)) D[g](t) + g(t) D[f](t)
            auto fg = [&](double x) { return f(x) * g(x); };
            CHECK(std::fabs(quantum::hahn_derivative(fg, p, t) -
                            (f(p.sigma(t)) * quantum::hahn_derivative(g, p, t) +
                             g(t) * quantum::hahn_derivative(f, p, t))) <= 1e-10);
        }
    }
}

TEST_CASE("specializations: w = 0 is the q-derivative; q near 1 approaches the h-difference") {
    double q = 0.5;
    QOmegaParams j(q, 0.0);
    auto f = [](double t) { return std::sin(t) + t * t; };
    for (double t : {0.3, 1.7, 4.0}) {
        double manual = (f(q * t) - f(t)) / (q * t - t);
        CHECK(quantum::hahn_derivative(f, j, t) == manual);  // exactly the same arithmetic
    }

    QOmegaParams near1(1.0 - 1e-8, 0.5);
    for (double t : {0.7, 2.3}) {
        CHECK(std::fabs(quantum::hahn_derivative(f, near1, t) -
                        quantum::h_forward_derivative(f, 0.5, t)) <= 1e-6);
    }
}

TEST_CASE("positivity on the integration orbit") {
    QOmegaParams p(0.5, 1.0);
    auto f = [](double t) { return std::exp(-t) + 0.1; };  // positive everywhere
    SeriesResult s = quantum::hahn_integral(f, p, p.omega0, 4.0);
    REQUIRE(s.converged);
    CHECK(s.value >= -s.est_error);
}

TEST_CASE("the integral of |f| can be exceeded by |integral of f|") {
    // The measure weights on the lower endpoint's orbit are negative when both
    // endpoints sit above the fixed point on different orbits, so the triangle
    // inequality genuinely fails for this integral.
    QOmegaParams p(0.5, 1.0);
    auto spike = [](double t) { return numerics::close_to(t, 3.2) ? 1.0 : 0.0; };
    double I = quantum::hahn_integral(spike, p, 3.2, 4.0).value;
    double Iabs = I;  // f is nonnegative, so |f| = f and both integrals coincide
    CHECK(I == doctest::Approx(-0.6).epsilon(1e-12));
    CHECK(std::fabs(I) > Iabs + 1e-3);
}

TEST_CASE("h difference operators") {
    auto sq = [](double t) { return t * t; };
    CHECK(quantum::h_forward_derivative(sq, 1.0, 3.0) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(quantum::h_backward_derivative(sq, 1.0, 4.0) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(quantum::h_forward_derivative([](double) { return 9.9; }, 0.25, 1.0) == 0.0);
    double t = 1.3, h = 0.4;
    CHECK(quantum::h_forward_derivative(sq, h, t) ==
          doctest::Approx(quantum::h_backward_derivative(sq, h, t + h)).epsilon(1e-13));
}

TEST_CASE("h_integral lattice sums and orientation") {
    CHECK(quantum::h_integral([](double) { return 1.0; }, 0.25, 0.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quantum::h_integral([](double t) { return t; }, 0.5, 0.0, 1.0) ==
          doctest::Approx(0.25).epsilon(1e-15));
    CHECK(quantum::h_integral([](double t) { return t; }, 0.5, 1.0, 0.0) ==
          doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(quantum::h_integral([](double t) { return t; }, 0.5, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(quantum::h_integral([](double t) { return t; }, 0.4, 0.0, 1.0), domain_error);
}
