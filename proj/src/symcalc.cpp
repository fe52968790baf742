#include "qcalc/symcalc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "qcalc/errors.hpp"

namespace qcalc::symcalc {

using numerics::close_to;
using quantum::fn_of_t;

namespace {

constexpr long long kMaxLatticeSteps = 1000000;

// (b-a)/step as an exact integer when the endpoints are lattice-compatible.
std::optional<long long> lattice_steps(double a, double b, double step) {
    double ratio = (b - a) / step;
    double rounded = std::round(ratio);
    if (!close_to(ratio, rounded)) return std::nullopt;
    if (std::fabs(rounded) > static_cast<double>(kMaxLatticeSteps)) return std::nullopt;
    return static_cast<long long>(rounded);
}

SeriesResult exact_sum(double value, int terms) { return {value, terms, 0.0, true}; }

}  // namespace

AlphaBetaParams::AlphaBetaParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("alpha and beta must be nonnegative");
    if (!(alpha + beta > 0.0)) throw std::invalid_argument("alpha + beta must be positive");
}

double sym_orbit_point(const QOmegaParams& p, double s, int n) {
    return quantum::sigma_orbit(p, s, 2 * n + 1);
}

double ab_sym_derivative(const real_fn& f, const AlphaBetaParams& p, double t) {
    return (f(t + p.alpha) - f(t - p.beta)) / (p.alpha + p.beta);
}

double ab_sym_derivative(const expr::ExprFunc& f, const AlphaBetaParams& p, double t) {
    return ab_sym_derivative(fn_of_t(f), p, t);
}

SeriesResult alpha_forward_integral(const real_fn& f, double alpha, double a, double b,
                                    const SeriesPolicy& policy) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (a == b) return exact_sum(0.0, 0);

    if (auto m = lattice_steps(a, b, alpha)) {
        double lo = *m >= 0 ? a : b;
        long long n = std::llabs(*m);
        double sum = 0.0;
        for (long long k = 0; k < n; ++k) sum += f(lo + static_cast<double>(k) * alpha);
        sum *= alpha;
        return exact_sum(*m >= 0 ? sum : -sum, static_cast<int>(n));
    }

    auto tail = [&](double x) {
        SeriesResult s = numerics::sum_series(
            [&](int k) { return f(x + static_cast<double>(k) * alpha); }, policy);
        s.value *= alpha;
        s.est_error *= alpha;
        return s;
    };
    SeriesResult ta = tail(a);
    SeriesResult tb = tail(b);
    return {ta.value - tb.value, ta.terms_used + tb.terms_used, ta.est_error + tb.est_error,
            ta.converged && tb.converged};
}

SeriesResult alpha_forward_integral(const expr::ExprFunc& f, double alpha, double a, double b,
                                    const SeriesPolicy& policy) {
    return alpha_forward_integral(fn_of_t(f), alpha, a, b, policy);
}

SeriesResult beta_backward_integral(const real_fn& f, double beta, double a, double b,
                                    const SeriesPolicy& policy) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (a == b) return exact_sum(0.0, 0);

    if (auto m = lattice_steps(a, b, beta)) {
        double hi = *m >= 0 ? b : a;
        long long n = std::llabs(*m);
        double sum = 0.0;
        for (long long k = 0; k < n; ++k) sum += f(hi - static_cast<double>(k) * beta);
        sum *= beta;
        return exact_sum(*m >= 0 ? sum : -sum, static_cast<int>(n));
    }

    auto tail = [&](double x) {
        SeriesResult s = numerics::sum_series(
            [&](int k) { return f(x - static_cast<double>(k) * beta); }, policy);
        s.value *= beta;
        s.est_error *= beta;
        return s;
    };
    SeriesResult tb = tail(b);
    SeriesResult ta = tail(a);
    return {tb.value - ta.value, tb.terms_used + ta.terms_used, tb.est_error + ta.est_error,
            tb.converged && ta.converged};
}

SeriesResult beta_backward_integral(const expr::ExprFunc& f, double beta, double a, double b,
                                    const SeriesPolicy& policy) {
    return beta_backward_integral(fn_of_t(f), beta, a, b, policy);
}

SeriesResult ab_sym_integral(const real_fn& f, const AlphaBetaParams& p, double a, double b,
                             const SeriesPolicy& policy) {
    double total = p.alpha + p.beta;
    SeriesResult out = exact_sum(0.0, 0);
    if (p.alpha > 0.0) {
        SeriesResult fwd = alpha_forward_integral(f, p.alpha, a, b, policy);
        double w = p.alpha / total;
        out.value += w * fwd.value;
        out.est_error += w * fwd.est_error;
        out.terms_used += fwd.terms_used;
        out.converged = out.converged && fwd.converged;
    }
    if (p.beta > 0.0) {
        SeriesResult bwd = beta_backward_integral(f, p.beta, a, b, policy);
        double w = p.beta / total;
        out.value += w * bwd.value;
        out.est_error += w * bwd.est_error;
        out.terms_used += bwd.terms_used;
        out.converged = out.converged && bwd.converged;
    }
    return out;
}

SeriesResult ab_sym_integral(const expr::ExprFunc& f, const AlphaBetaParams& p, double a, double b,
                             const SeriesPolicy& policy) {
    return ab_sym_integral(fn_of_t(f), p, a, b, policy);
}

std::pair<double, double> ab_ftc_failure_demo(int t) {
    if (t < 1) throw domain_error("t must be a positive integer");
    real_fn f = [](double x) {
        double r = std::round(x);
        if (r < -0.5 || !close_to(x, r)) return 0.0;
        return std::exp2(-r);
    };
    AlphaBetaParams p(1.0, 1.0);
    auto F = [&](double x) { return ab_sym_integral(f, p, 0.0, x).value; };
    double lhs = ab_sym_derivative(F, p, static_cast<double>(t));
    double rhs = f(static_cast<double>(t));
    return {lhs, rhs};
}

double q_sym_derivative(const real_fn& f, double q, double t) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (close_to(t, 0.0, numerics::kFixedPointEps)) return numerics::central_derivative(f, 0.0);
    double up = q * t;
    double dn = t / q;
    return (f(up) - f(dn)) / (up - dn);
}

double q_sym_derivative(const expr::ExprFunc& f, double q, double t) {
    return q_sym_derivative(fn_of_t(f), q, t);
}

namespace {

SeriesResult q_sym_antiderivative(const real_fn& f, double q, double x,
                                  const SeriesPolicy& policy) {
    double prefac = (1.0 - q * q) * x;
    if (prefac == 0.0) return {0.0, 0, 0.0, true};
    SeriesResult s = numerics::sum_series(
        [&](int n) { return std::pow(q, 2 * n) * f(std::pow(q, 2 * n + 1) * x); }, policy);
    s.value *= prefac;
    s.est_error *= std::fabs(prefac);
    return s;
}

}  // namespace

SeriesResult q_sym_integral(const real_fn& f, double q, double a, double b,
                            const SeriesPolicy& policy) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (a == b) return exact_sum(0.0, 0);
    SeriesResult fb = q_sym_antiderivative(f, q, b, policy);
    SeriesResult fa = q_sym_antiderivative(f, q, a, policy);
    return {fb.value - fa.value, fb.terms_used + fa.terms_used, fb.est_error + fa.est_error,
            fb.converged && fa.converged};
}

SeriesResult q_sym_integral(const expr::ExprFunc& f, double q, double a, double b,
                            const SeriesPolicy& policy) {
    return q_sym_integral(fn_of_t(f), q, a, b, policy);
}

double hahn_sym_derivative(const real_fn& f, const QOmegaParams& p, double t) {
    if (p.at_fixed_point(t)) return numerics::central_derivative(f, t);
    double up = p.sigma(t);
    double dn = p.sigma_inv(t);
    return (f(up) - f(dn)) / (up - dn);
}

double hahn_sym_derivative(const expr::ExprFunc& f, const QOmegaParams& p, double t) {
    return hahn_sym_derivative(fn_of_t(f), p, t);
}

namespace {

SeriesResult hahn_sym_antiderivative(const real_fn& f, const QOmegaParams& p, double x,
                                     const SeriesPolicy& policy) {
    if (p.at_fixed_point(x)) return {0.0, 0, 0.0, true};
    double prefac = p.sigma_inv(x) - p.sigma(x);
    if (prefac == 0.0) return {0.0, 0, 0.0, true};
    SeriesResult s = numerics::sum_series(
        [&](int n) { return std::pow(p.q, 2 * n + 1) * f(sym_orbit_point(p, x, n)); }, policy);
    s.value *= prefac;
    s.est_error *= std::fabs(prefac);
    return s;
}

}  // namespace

SeriesResult hahn_sym_integral(const real_fn& f, const QOmegaParams& p, double a, double b,
                               const SeriesPolicy& policy) {
    if (a == b) return exact_sum(0.0, 0);
    SeriesResult fb = hahn_sym_antiderivative(f, p, b, policy);
    SeriesResult fa = hahn_sym_antiderivative(f, p, a, policy);
    return {fb.value - fa.value, fb.terms_used + fa.terms_used, fb.est_error + fa.est_error,
            fb.converged && fa.converged};
}

SeriesResult hahn_sym_integral(const expr::ExprFunc& f, const QOmegaParams& p, double a, double b,
                               const SeriesPolicy& policy) {
    return hahn_sym_integral(fn_of_t(f), p, a, b, policy);
}

namespace {

// Fermat-style witness at a refined interior extremum c: shrink gamma until f
// is on one side of f(c) at both c-gamma and c+gamma, then bisect the step on
// the taller side so the two-sided quotient vanishes.
MvtWitness fermat_pipeline(const real_fn& f, double a, double b, double t0) {
    if (!(t0 > a && t0 < b)) throw domain_error("extremum location must be interior");

    double fscale = std::max({1.0, std::fabs(f(a)), std::fabs(f(b)), std::fabs(f(t0))});
    double tiny = 1e-13 * fscale;

    // Orientation: does t0 sit at a local max (+1) or min (-1)?
    double sign = 0.0;
    double r = std::min(t0 - a, b - t0) / 4.0;
    for (int j = 0; j < 4 && sign == 0.0; ++j, r /= 4.0) {
        double up = f(t0 + r) - f(t0);
        double dn = f(t0 - r) - f(t0);
        if (up <= tiny && dn <= tiny) sign = 1.0;
        else if (up >= -tiny && dn >= -tiny) sign = -1.0;
    }
    if (sign == 0.0) throw domain_error("no local extremum at the supplied point");

    // Refine c by ternary search on sign*f over a window around t0.
    double w = std::min(t0 - a, b - t0) / 2.0;
    double lo = t0 - w, hi = t0 + w;
    for (int i = 0; i < 200 && (hi - lo) > 1e-16 * std::max(1.0, std::fabs(t0)); ++i) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (sign * f(m1) < sign * f(m2)) lo = m1;
        else hi = m2;
    }
    double c = 0.5 * (lo + hi);
    if (sign * f(c) < sign * f(t0)) c = t0;  // never leave the supplied extremum behind

    // Shrink gamma until both one-sided differences agree with the orientation.
    double gamma = std::min(c - a, b - c) / 2.0;
    bool consistent = false;
    for (int j = 0; j < 60; ++j, gamma /= 2.0) {
        if (sign * (f(c + gamma) - f(c)) <= tiny && sign * (f(c - gamma) - f(c)) <= tiny) {
            consistent = true;
            break;
        }
    }
    if (!consistent) throw domain_error("no witness: one-sided differences keep disagreeing");

    auto quotient = [&](double alpha, double beta) {
        return std::fabs((f(c + alpha) - f(c - beta)) / (alpha + beta));
    };

    if (std::fabs(f(c + gamma) - f(c - gamma)) <= tiny)
        return {gamma, gamma, c, quotient(gamma, gamma)};

    double g_plus_0 = f(c) - f(c - gamma);
    double g_plus_g = f(c + gamma) - f(c - gamma);
    if (g_plus_0 == 0.0 || (g_plus_0 > 0.0) != (g_plus_g > 0.0)) {
        double rho = numerics::bisect_root(
            [&](double x) { return f(c + x) - f(c - gamma); }, 0.0, gamma, 1e-14);
        return {rho, gamma, c, quotient(rho, gamma)};
    }
    double g_minus_0 = f(c) - f(c + gamma);
    double g_minus_g = f(c - gamma) - f(c + gamma);
    if (g_minus_0 == 0.0 || (g_minus_0 > 0.0) != (g_minus_g > 0.0)) {
        double rho = numerics::bisect_root(
            [&](double x) { return f(c - x) - f(c + gamma); }, 0.0, gamma, 1e-14);
        return {gamma, rho, c, quotient(gamma, rho)};
    }
    throw domain_error("no witness: no bracketing step found");
}

MvtWitness rolle_pipeline(const real_fn& f, double a, double b) {
    double scale = std::max({1.0, std::fabs(f(a)), std::fabs(f(b))});
    if (std::fabs(f(a) - f(b)) > 1e-9 * scale)
        throw domain_error("endpoint values must agree for a Rolle witness");

    // Deterministic grid scan for the interior extremum (first such index wins).
    constexpr int kGrid = 1024;
    double fa = f(a);
    int imax = -1, imin = -1;
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kGrid - 1; ++i) {
        double t = a + (b - a) * static_cast<double>(i) / (kGrid - 1);
        double v = f(t);
        if (v > vmax) {
            vmax = v;
            imax = i;
        }
        if (v < vmin) {
            vmin = v;
            imin = i;
        }
    }
    double dev_max = vmax - fa;
    double dev_min = fa - vmin;
    if (std::max(dev_max, dev_min) <= 1e-12 * scale) {
        // Constant within tolerance: the midpoint witnesses with any steps.
        double gamma = (b - a) / 4.0;
        double c = 0.5 * (a + b);
        return {gamma, gamma, c,
                std::fabs((f(c + gamma) - f(c - gamma)) / (2.0 * gamma))};
    }
    int pick = dev_max >= dev_min ? imax : imin;
    double t0 = a + (b - a) * static_cast<double>(pick) / (kGrid - 1);
    return fermat_pipeline(f, a, b, t0);
}

}  // namespace

MvtWitness mvt_witness(MvtKind kind, const real_fn& f, const real_fn* g, double a, double b,
                       std::optional<double> t0) {
    if (!(a < b)) throw std::invalid_argument("need a < b");
    switch (kind) {
        case MvtKind::fermat:
            if (!t0) throw std::invalid_argument("fermat witness needs the extremum location");
            return fermat_pipeline(f, a, b, *t0);
        case MvtKind::rolle:
            return rolle_pipeline(f, a, b);
        case MvtKind::lagrange: {
            double slope = (f(b) - f(a)) / (b - a);
            return rolle_pipeline([&](double t) { return f(t) - slope * t; }, a, b);
        }
        case MvtKind::cauchy: {
            if (g == nullptr) throw std::invalid_argument("cauchy witness needs g");
            double denom = (*g)(b) - (*g)(a);
            if (std::fabs(denom) <= 1e-12 * std::max({1.0, std::fabs((*g)(a)), std::fabs((*g)(b))}))
                throw domain_error("cauchy witness needs g(a) != g(b)");
            double ratio = (f(b) - f(a)) / denom;
            return rolle_pipeline([&, ratio](double t) { return f(t) - ratio * (*g)(t); }, a, b);
        }
    }
    throw std::invalid_argument("unknown witness kind");
}

MvtWitness mvt_witness(MvtKind kind, const expr::ExprFunc& f, const expr::ExprFunc* g, double a,
                       double b, std::optional<double> t0) {
    real_fn ff = fn_of_t(f);
    if (g != nullptr) {
        real_fn gf = fn_of_t(*g);
        return mvt_witness(kind, ff, &gf, a, b, t0);
    }
    return mvt_witness(kind, ff, nullptr, a, b, t0);
}

namespace {

void require_lattice_endpoints(const AlphaBetaParams& p, double a, double b) {
    if (!(a <= b)) throw std::invalid_argument("need a <= b");
    if (p.alpha > 0.0) {
        auto m = lattice_steps(a, b, p.alpha);
        if (!m || *m < 0) throw domain_error("b does not lie on the alpha-lattice of a");
    }
    if (p.beta > 0.0) {
        auto m = lattice_steps(a, b, p.beta);
        if (!m || *m < 0) throw domain_error("a does not lie on the beta-lattice of b");
    }
}

double converged_value(const SeriesResult& r, const char* what) {
    if (!r.converged) throw non_convergent(std::string(what) + " did not converge");
    return r.value;
}

// First points of the forward lattice of a and the backward lattice of b.
std::vector<double> lattice_sample(const AlphaBetaParams& p, double a, double b, int cap) {
    std::vector<double> pts;
    if (p.alpha > 0.0)
        for (int k = 0; k <= cap && a + k * p.alpha <= b + 1e-12; ++k)
            pts.push_back(a + k * p.alpha);
    if (p.beta > 0.0)
        for (int k = 0; k <= cap && b - k * p.beta >= a - 1e-12; ++k)
            pts.push_back(b - k * p.beta);
    return pts;
}

}  // namespace

IneqReport inequality_check(IneqKind kind, const real_fn& f, const real_fn& g,
                            const AlphaBetaParams& p, double a, double b, double exponent,
                            const SeriesPolicy& policy) {
    require_lattice_endpoints(p, a, b);
    double ph = kind == IneqKind::cauchy_schwarz ? 2.0 : exponent;
    if (!(ph > 1.0)) throw std::invalid_argument("exponent must exceed 1");
    double qh = ph / (ph - 1.0);

    auto integral = [&](const real_fn& h) {
        return converged_value(ab_sym_integral(h, p, a, b, policy), "comparison integral");
    };

    IneqReport out{};
    switch (kind) {
        case IneqKind::holder:
        case IneqKind::cauchy_schwarz: {
            out.lhs = integral([&](double t) { return std::fabs(f(t) * g(t)); });
            double nf = integral([&](double t) { return std::pow(std::fabs(f(t)), ph); });
            double ng = integral([&](double t) { return std::pow(std::fabs(g(t)), qh); });
            out.rhs = std::pow(nf, 1.0 / ph) * std::pow(ng, 1.0 / qh);
            break;
        }
        case IneqKind::minkowski: {
            double nfg = integral([&](double t) { return std::pow(std::fabs(f(t) + g(t)), ph); });
            double nf = integral([&](double t) { return std::pow(std::fabs(f(t)), ph); });
            double ng = integral([&](double t) { return std::pow(std::fabs(g(t)), ph); });
            out.lhs = std::pow(nfg, 1.0 / ph);
            out.rhs = std::pow(nf, 1.0 / ph) + std::pow(ng, 1.0 / ph);
            break;
        }
    }
    out.holds = out.lhs <= out.rhs + 1e-9 * std::max(1.0, out.rhs);
    return out;
}

IneqReport inequality_check(IneqKind kind, const expr::ExprFunc& f, const expr::ExprFunc& g,
                            const AlphaBetaParams& p, double a, double b, double exponent,
                            const SeriesPolicy& policy) {
    return inequality_check(kind, fn_of_t(f), fn_of_t(g), p, a, b, exponent, policy);
}

double integral_mvt_check(const real_fn& f, const real_fn& g, const AlphaBetaParams& p, double a,
                          double b, const SeriesPolicy& policy) {
    require_lattice_endpoints(p, a, b);
    std::vector<double> pts = lattice_sample(p, a, b, 256);

    for (double t : pts)
        if (g(t) < -1e-12 * std::max(1.0, std::fabs(g(t))))
            throw domain_error("g must be nonnegative on the lattice");

    double i_g = converged_value(ab_sym_integral(g, p, a, b, policy), "integral of g");
    double i_fg = converged_value(
        ab_sym_integral([&](double t) { return f(t) * g(t); }, p, a, b, policy),
        "integral of f*g");

    if (std::fabs(i_g) <= 1e-14 * std::max(1.0, std::fabs(i_fg))) return 0.0;
    double k = i_fg / i_g;

    double m = std::numeric_limits<double>::infinity();
    double M = -m;
    for (double t : pts) {
        double v = f(t);
        m = std::min(m, v);
        M = std::max(M, v);
    }
    double tol = 1e-9 * std::max({1.0, std::fabs(m), std::fabs(M)});
    if (k < m - tol || k > M + tol)
        throw domain_error("mean value fell outside the sampled range of f");
    return k;
}

double integral_mvt_check(const expr::ExprFunc& f, const expr::ExprFunc& g,
                          const AlphaBetaParams& p, double a, double b,
                          const SeriesPolicy& policy) {
    return integral_mvt_check(fn_of_t(f), fn_of_t(g), p, a, b, policy);
}

}  // namespace qcalc::symcalc
