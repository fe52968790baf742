#pragma once

#include <optional>
#include <utility>

#include "qcalc/expr.hpp"
#include "qcalc/numerics.hpp"
#include "qcalc/quantum.hpp"

namespace qcalc::symcalc {

using numerics::real_fn;
using numerics::SeriesPolicy;
using numerics::SeriesResult;
using quantum::QOmegaParams;

// Step pair for the two-sided difference quotient; at least one step positive.
struct AlphaBetaParams {
    double alpha;
    double beta;

    AlphaBetaParams(double alpha_, double beta_);
};

// sigma^(2n+1)(s): the odd-power orbit on which the symmetric integrals live.
double sym_orbit_point(const QOmegaParams& p, double s, int n);

// (f(t+alpha) - f(t-beta)) / (alpha+beta); degenerates to the forward (beta=0)
// or backward (alpha=0) difference operator.
double ab_sym_derivative(const real_fn& f, const AlphaBetaParams& p, double t);
double ab_sym_derivative(const expr::ExprFunc& f, const AlphaBetaParams& p, double t);

// Tail-difference integral with tails alpha * sum_{k>=0} f(x + k*alpha).
// When (b-a)/alpha is an integer the tails cancel to a finite sum, computed
// exactly; otherwise both tails are summed by series.
SeriesResult alpha_forward_integral(const real_fn& f, double alpha, double a, double b,
                                    const SeriesPolicy& policy = {});
SeriesResult alpha_forward_integral(const expr::ExprFunc& f, double alpha, double a, double b,
                                    const SeriesPolicy& policy = {});

// Mirrored: tails beta * sum_{k>=0} f(x - k*beta).
SeriesResult beta_backward_integral(const real_fn& f, double beta, double a, double b,
                                    const SeriesPolicy& policy = {});
SeriesResult beta_backward_integral(const expr::ExprFunc& f, double beta, double a, double b,
                                    const SeriesPolicy& policy = {});

// alpha/(alpha+beta) * forward + beta/(alpha+beta) * backward; a part is
// evaluated only when its weight is nonzero.
SeriesResult ab_sym_integral(const real_fn& f, const AlphaBetaParams& p, double a, double b,
                             const SeriesPolicy& policy = {});
SeriesResult ab_sym_integral(const expr::ExprFunc& f, const AlphaBetaParams& p, double a, double b,
                             const SeriesPolicy& policy = {});

// Fixed counterexample showing the derivative of the integral need not return
// the integrand: f = 2^-t on the nonnegative integers (0 elsewhere), alpha =
// beta = 1.  Returns (D[F](t), f(t)) with F(x) the integral from 0 to x.
std::pair<double, double> ab_ftc_failure_demo(int t);

// (f(qt) - f(t/q)) / ((q - 1/q) t) away from 0; classical derivative at 0.
double q_sym_derivative(const real_fn& f, double q, double t);
double q_sym_derivative(const expr::ExprFunc& f, double q, double t);

// F(x) = (1-q^2) x sum_{n>=0} q^(2n) f(q^(2n+1) x), combined as F(b) - F(a).
SeriesResult q_sym_integral(const real_fn& f, double q, double a, double b,
                            const SeriesPolicy& policy = {});
SeriesResult q_sym_integral(const expr::ExprFunc& f, double q, double a, double b,
                            const SeriesPolicy& policy = {});

// (f(qt+w) - f((t-w)/q)) / ((q - 1/q) t + (1 + 1/q) w) away from w0; classical
// derivative at the fixed point.  With w = 0 this is q_sym_derivative.
double hahn_sym_derivative(const real_fn& f, const QOmegaParams& p, double t);
double hahn_sym_derivative(const expr::ExprFunc& f, const QOmegaParams& p, double t);

// F(x) = (sigma^-1(x) - sigma(x)) sum_{n>=0} q^(2n+1) f(sigma^(2n+1)(x)),
// combined as F(b) - F(a).
SeriesResult hahn_sym_integral(const real_fn& f, const QOmegaParams& p, double a, double b,
                               const SeriesPolicy& policy = {});
SeriesResult hahn_sym_integral(const expr::ExprFunc& f, const QOmegaParams& p, double a, double b,
                               const SeriesPolicy& policy = {});

enum class MvtKind { fermat, rolle, lagrange, cauchy };

struct MvtWitness {
    double alpha;
    double beta;
    double c;
    double residual;  // |two-sided quotient of the theorem's target at c|
};

// Constructive mean-value witnesses: deterministic 1024-point grid scan for the
// extremum, then bisection of f(c+rho) - f(c-gamma) for the step pair.
// fermat needs the extremum location t0; cauchy needs g.  Throws domain_error
// when endpoint conditions fail or the pipeline finds no witness.
MvtWitness mvt_witness(MvtKind kind, const real_fn& f, const real_fn* g, double a, double b,
                       std::optional<double> t0 = std::nullopt);
MvtWitness mvt_witness(MvtKind kind, const expr::ExprFunc& f, const expr::ExprFunc* g, double a,
                       double b, std::optional<double> t0 = std::nullopt);

enum class IneqKind { holder, cauchy_schwarz, minkowski };

struct IneqReport {
    double lhs;
    double rhs;
    bool holds;
};

// Two-sided comparison via ab_sym_integral.  Requires the endpoints to be
// lattice-compatible: (b-a)/alpha and (b-a)/beta integral (when the step is
// nonzero), as the underlying comparison theorems do.
IneqReport inequality_check(IneqKind kind, const real_fn& f, const real_fn& g,
                            const AlphaBetaParams& p, double a, double b, double exponent,
                            const SeriesPolicy& policy = {});
IneqReport inequality_check(IneqKind kind, const expr::ExprFunc& f, const expr::ExprFunc& g,
                            const AlphaBetaParams& p, double a, double b, double exponent,
                            const SeriesPolicy& policy = {});

// K with integral(f*g) = K * integral(g) for g >= 0 on the lattice; K = 0 when
// integral(g) = 0.  K is checked against inf/sup of f over the first 256
// lattice points of each orbit (an estimate).
double integral_mvt_check(const real_fn& f, const real_fn& g, const AlphaBetaParams& p, double a,
                          double b, const SeriesPolicy& policy = {});
double integral_mvt_check(const expr::ExprFunc& f, const expr::ExprFunc& g,
                          const AlphaBetaParams& p, double a, double b,
                          const SeriesPolicy& policy = {});

}  // namespace qcalc::symcalc
