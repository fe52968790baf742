#pragma once

#include <functional>

namespace qcalc::numerics {

using real_fn = std::function<double(double)>;

// Absolute tolerance used when deciding whether a computed coordinate matches a
// special point (lattice node, override).  Scaled by max(1, |ref|).
inline constexpr double kMatchEps = 1e-12;

// Crossover to the classical-derivative branch of the quantum difference
// operators.  Within this distance of the operator's fixed point the two
// quotient samples agree to more digits than the function values carry, so the
// quotient is pure rounding noise; the classical branch is accurate well
// before that.  Deliberately much wider than kMatchEps.
inline constexpr double kFixedPointEps = 1e-7;

// |x - ref| <= eps * max(1, |ref|).
inline bool close_to(double x, double ref, double eps = kMatchEps) {
    double scale = ref < 0 ? -ref : ref;
    if (scale < 1.0) scale = 1.0;
    double d = x - ref;
    if (d < 0) d = -d;
    return d <= eps * scale;
}

// Truncation policy for the series that define the quantum integrals.
// A run of stagnation_window consecutive sub-tolerance terms is required before
// stopping: the integrand may carry point overrides that spike isolated terms.
struct SeriesPolicy {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_terms = 100000;
    int stagnation_window = 8;
};

struct SeriesResult {
    double value = 0.0;
    int terms_used = 0;
    double est_error = 0.0;  // magnitude bound from the last observed window
    bool converged = false;
};

// Sums term(0) + term(1) + ... with compensated accumulation until
// stagnation_window consecutive terms satisfy |term| <= max(abs_tol, rel_tol*|partial|),
// or max_terms is consumed.  Non-convergence is reported via the flag, never thrown.
SeriesResult sum_series(const std::function<double(int)>& term, const SeriesPolicy& policy = {});

// Classical symmetric derivative: central difference with one Richardson
// extrapolation step at step sizes h0 and h0/2, h0 = max(1e-6, 1e-6*|t|).
double central_derivative(const real_fn& f, double t);

// Roots by bisection on a bracketing interval.  Returns c with |g(c)| <= tol or
// with the final bracket narrower than tol.  Throws domain_error when
// g(lo) and g(hi) have the same strict sign.
double bisect_root(const real_fn& g, double lo, double hi, double tol);

}  // namespace qcalc::numerics
