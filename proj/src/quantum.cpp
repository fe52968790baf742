#include "qcalc/quantum.hpp"

#include <cmath>

#include "qcalc/errors.hpp"

namespace qcalc::quantum {

using numerics::close_to;

QOmegaParams::QOmegaParams(double q_, double omega_) : q(q_), omega(omega_) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(omega >= 0.0)) throw std::invalid_argument("omega must be nonnegative");
    omega0 = omega / (1.0 - q);
}

bool QOmegaParams::at_fixed_point(double t) const {
    return close_to(t, omega0, numerics::kFixedPointEps);
}

double q_number(double q, int n) { return (1.0 - std::pow(q, n)) / (1.0 - q); }

double sigma_orbit(const QOmegaParams& p, double s, int n) {
    return std::pow(p.q, n) * s + p.omega * q_number(p.q, n);
}

real_fn fn_of_t(const expr::ExprFunc& f) {
    return [f](double t) { return expr::eval(f, expr::Env{}.set(0, t)); };
}

double hahn_derivative(const real_fn& f, const QOmegaParams& p, double t) {
    if (p.at_fixed_point(t)) return numerics::central_derivative(f, t);
    // Divide by the rounded shift actually fed to f; an independently rounded
    // (q-1)t + omega loses a relative ulp that blows up near the fixed point.
    double s = p.sigma(t);
    return (f(s) - f(t)) / (s - t);
}

double hahn_derivative(const expr::ExprFunc& f, const QOmegaParams& p, double t) {
    return hahn_derivative(fn_of_t(f), p, t);
}

double hahn_derivative_higher(const real_fn& f, const QOmegaParams& p, double t, int r) {
    if (r < 1 || r > 6) throw domain_error("derivative order must lie in 1..6");
    if (r == 1) return hahn_derivative(f, p, t);
    real_fn lower = [&f, &p, r](double x) { return hahn_derivative_higher(f, p, x, r - 1); };
    return hahn_derivative(lower, p, t);
}

double hahn_derivative_higher(const expr::ExprFunc& f, const QOmegaParams& p, double t, int r) {
    return hahn_derivative_higher(fn_of_t(f), p, t, r);
}

namespace {

// F(x) = integral from w0 to x; the prefactor (x(1-q) - w) vanishes identically
// at x = w0, so that branch is exact without summing.
SeriesResult hahn_antiderivative(const real_fn& f, const QOmegaParams& p, double x,
                                 const SeriesPolicy& policy) {
    double prefac = x * (1.0 - p.q) - p.omega;
    if (prefac == 0.0 || p.at_fixed_point(x)) return {0.0, 0, 0.0, true};
    SeriesResult s = numerics::sum_series(
        [&](int k) { return std::pow(p.q, k) * f(sigma_orbit(p, x, k)); }, policy);
    s.value *= prefac;
    s.est_error *= std::fabs(prefac);
    return s;
}

}  // namespace

SeriesResult hahn_integral(const real_fn& f, const QOmegaParams& p, double a, double b,
                           const SeriesPolicy& policy) {
    if (a == b) return {0.0, 0, 0.0, true};
    SeriesResult fb = hahn_antiderivative(f, p, b, policy);
    SeriesResult fa = hahn_antiderivative(f, p, a, policy);
    return {fb.value - fa.value, fb.terms_used + fa.terms_used, fb.est_error + fa.est_error,
            fb.converged && fa.converged};
}

SeriesResult hahn_integral(const expr::ExprFunc& f, const QOmegaParams& p, double a, double b,
                           const SeriesPolicy& policy) {
    return hahn_integral(fn_of_t(f), p, a, b, policy);
}

double h_forward_derivative(const real_fn& f, double h, double t) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    return (f(t + h) - f(t)) / h;
}

double h_forward_derivative(const expr::ExprFunc& f, double h, double t) {
    return h_forward_derivative(fn_of_t(f), h, t);
}

double h_backward_derivative(const real_fn& f, double h, double t) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    return (f(t) - f(t - h)) / h;
}

double h_backward_derivative(const expr::ExprFunc& f, double h, double t) {
    return h_backward_derivative(fn_of_t(f), h, t);
}

double h_integral(const real_fn& f, double h, double a, double b) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (a == b) return 0.0;
    if (a > b) return -h_integral(f, h, b, a);
    double steps = (b - a) / h;
    double rounded = std::round(steps);
    if (!close_to(steps, rounded) || rounded < 0.5)
        throw domain_error("(b - a)/h is not a positive integer");
    long long n = static_cast<long long>(rounded);
    double sum = 0.0;
    for (long long k = 0; k < n; ++k) sum += f(a + static_cast<double>(k) * h);
    return h * sum;
}

double h_integral(const expr::ExprFunc& f, double h, double a, double b) {
    return h_integral(fn_of_t(f), h, a, b);
}

}  // namespace qcalc::quantum
