#include "qcalc/numerics.hpp"

#include <cmath>

#include "qcalc/errors.hpp"

namespace qcalc::numerics {

SeriesResult sum_series(const std::function<double(int)>& term, const SeriesPolicy& policy) {
    // A term is "quiet" when it is below tolerance.  Convergence needs a full
    // window of quiet terms AND a tail bound below tolerance: the bound models
    // the remainder as geometric with the worst decay ratio seen inside the
    // window, so a slowly decaying series keeps summing until the discarded
    // tail — not just the next term — is negligible.
    constexpr double kMaxRatio = 0.999;
    SeriesResult out;
    double sum = 0.0;
    double comp = 0.0;  // Kahan compensation
    int quiet = 0;      // consecutive sub-tolerance terms
    double ratio = 0.0;  // worst |t_k|/|t_{k-1}| over the quiet window
    double prev = 0.0;
    double last = 0.0;

    for (int n = 0; n < policy.max_terms; ++n) {
        double t = term(n);
        prev = last;
        last = std::fabs(t);

        double y = t - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        out.terms_used = n + 1;

        double bound = std::max(policy.abs_tol, policy.rel_tol * std::fabs(sum));
        if (last <= bound) {
            double r = last == 0.0 ? 0.0 : (prev > 0.0 ? last / prev : kMaxRatio);
            ratio = quiet == 0 ? r : std::max(ratio, r);
            ++quiet;
            double tail = std::min(ratio, kMaxRatio);
            tail = last * tail / (1.0 - tail);
            if (quiet >= policy.stagnation_window && tail <= bound) {
                out.value = sum;
                out.est_error = std::max(tail, last);
                out.converged = true;
                return out;
            }
        } else {
            quiet = 0;
            ratio = 0.0;
        }
    }

    out.value = sum;
    out.est_error = last;
    out.converged = false;
    return out;
}

double central_derivative(const real_fn& f, double t) {
    // With one Richardson step the truncation error is O(h^4) while rounding in
    // the function values grows like ulp/h, so a fairly wide step keeps both
    // near 1e-11 for moderately sized smooth functions.
    double h = std::max(1e-4, 1e-4 * std::fabs(t));
    // Divide by the gap between the samples as stored, not by 2h: the secant
    // between representable points is exact for affine f, which keeps nested
    // difference quotients (whose outer step may be far smaller than h) clean.
    auto slope = [&](double step) {
        double hi = t + step;
        double lo = t - step;
        return (f(hi) - f(lo)) / (hi - lo);
    };
    double d1 = slope(h);
    double d2 = slope(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

double bisect_root(const real_fn& g, double lo, double hi, double tol) {
    if (lo > hi) std::swap(lo, hi);
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0))
        throw domain_error("bisect_root: no sign change on [lo, hi]");

    double mid = lo;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (std::fabs(gm) <= tol || (hi - lo) < tol) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return mid;
}

}  // namespace qcalc::numerics
