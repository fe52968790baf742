#pragma once

#include "qcalc/expr.hpp"
#include "qcalc/numerics.hpp"

namespace qcalc::quantum {

using numerics::real_fn;
using numerics::SeriesPolicy;
using numerics::SeriesResult;

// The pair (q, w) with its fixed point w0 = w/(1-q).  w0 is the accumulation
// point of every forward orbit t, qt+w, q(qt+w)+w, ...
struct QOmegaParams {
    double q;
    double omega;
    double omega0;

    QOmegaParams(double q_, double omega_);

    double sigma(double t) const { return q * t + omega; }
    double sigma_inv(double t) const { return (t - omega) / q; }
    bool at_fixed_point(double t) const;
};

// The q-number [n]_q = (1 - q^n)/(1 - q), valid for negative n as well.
double q_number(double q, int n);

// sigma^n(s) = q^n s + w [n]_q by closed form; n may be negative.
double sigma_orbit(const QOmegaParams& p, double s, int n);

// (f(qt+w) - f(t)) / ((q-1)t + w) away from w0; classical derivative at w0.
double hahn_derivative(const real_fn& f, const QOmegaParams& p, double t);
double hahn_derivative(const expr::ExprFunc& f, const QOmegaParams& p, double t);

// r-fold application of the Hahn operator; r in 1..6.
double hahn_derivative_higher(const real_fn& f, const QOmegaParams& p, double t, int r);
double hahn_derivative_higher(const expr::ExprFunc& f, const QOmegaParams& p, double t, int r);

// Series-defined integral: F(x) = (x(1-q) - w) * sum_{k>=0} q^k f(sigma^k(x)),
// combined as F(b) - F(a).  With w = 0 this is the Jackson q-integral.
SeriesResult hahn_integral(const real_fn& f, const QOmegaParams& p, double a, double b,
                           const SeriesPolicy& policy = {});
SeriesResult hahn_integral(const expr::ExprFunc& f, const QOmegaParams& p, double a, double b,
                           const SeriesPolicy& policy = {});

// (f(t+h) - f(t))/h and (f(t) - f(t-h))/h.
double h_forward_derivative(const real_fn& f, double h, double t);
double h_forward_derivative(const expr::ExprFunc& f, double h, double t);
double h_backward_derivative(const real_fn& f, double h, double t);
double h_backward_derivative(const expr::ExprFunc& f, double h, double t);

// h * [f(a) + f(a+h) + ... + f(b-h)] for a < b; 0 at a = b; negated swapped sum
// for a > b.  (b-a)/h must be an integer within the match tolerance.
double h_integral(const real_fn& f, double h, double a, double b);
double h_integral(const expr::ExprFunc& f, double h, double a, double b);

// Evaluate an expression as a function of t alone.
real_fn fn_of_t(const expr::ExprFunc& f);

}  // namespace qcalc::quantum
