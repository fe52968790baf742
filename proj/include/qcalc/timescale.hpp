#pragma once

#include <string>
#include <vector>

#include "qcalc/expr.hpp"
#include "qcalc/numerics.hpp"

namespace qcalc::timescale {

using numerics::real_fn;

enum class PointClass {
    dense,
    right_scattered_left_dense,
    left_scattered_right_dense,
    isolated,
};

struct JumpInfo {
    double sigma;
    double rho;
    double mu;   // sigma - t
    double nu;   // t - rho
    PointClass classification;
};

struct GammaWeights {
    double gamma1;
    double gamma2;  // gamma1 + gamma2 = 1, both in [0, 1]
};

// A closed subset of the reals built from finitely many closed intervals,
// isolated points, and geometric lattices {q^n c : n >= 0} union {0} (the one
// representable accumulation structure).  Pieces are kept sorted and disjoint.
class TimeScale {
public:
    struct Piece {
        enum class Kind { interval, point, qlattice };
        Kind kind;
        double lo;  // qlattice: 0
        double hi;  // qlattice: the top point c
        double q = 0.0;
    };

    static TimeScale interval(double lo, double hi);
    static TimeScale reals(double lo, double hi) { return interval(lo, hi); }
    static TimeScale points(std::vector<double> pts);
    static TimeScale h_lattice(double h, double lo, double hi);
    static TimeScale q_lattice(double q, double c, double lo, double hi);
    static TimeScale union_of(const std::vector<TimeScale>& parts);

    const std::vector<Piece>& pieces() const { return pieces_; }
    double min() const { return pieces_.front().lo; }
    double max() const { return pieces_.back().hi; }

    bool contains(double t) const;
    // Snaps t onto the scale point it matches within the tolerance; throws
    // domain_error when t is not in the scale.
    double snap(double t) const;

    JumpInfo jump(double t) const;

private:
    std::vector<Piece> pieces_;
};

// Text format: r(lo=0, hi=1) | interval(0, 1) | points(2, 4) |
// hz(h=0.5, lo=0, hi=3) | qlattice(q=0.5, c=1, lo=0, hi=1) | union(spec, ...).
// Arguments may be positional or named.
TimeScale parse_time_scale(const std::string& text);

// Point-dependent delta/nabla weights: (1/2, 1/2) at dense points, otherwise
// (mu, nu)/(mu + nu).  At a scale minimum or maximum the formulas degenerate to
// (1, 0) or (0, 1) on the scattered side.
GammaWeights gamma_weights(const TimeScale& T, double t);

// Quotient toward sigma at right-scattered points; one-sided forward limit
// (with Richardson step) at right-dense points.  t must not be a left-scattered
// maximum.  nabla mirrors toward rho.
double delta_derivative(const TimeScale& T, const real_fn& f, double t);
double delta_derivative(const TimeScale& T, const expr::ExprFunc& f, double t);
double nabla_derivative(const TimeScale& T, const real_fn& f, double t);
double nabla_derivative(const TimeScale& T, const expr::ExprFunc& f, double t);

// (f(sigma(t)) - f(rho(t))) / (sigma(t) - rho(t)) at non-dense points; the
// classical symmetric derivative at dense points.
double sym_diamond_derivative(const TimeScale& T, const real_fn& f, double t);
double sym_diamond_derivative(const TimeScale& T, const expr::ExprFunc& f, double t);

// alpha * delta + (1 - alpha) * nabla.
double diamond_alpha_derivative(const TimeScale& T, const real_fn& f, double t, double alpha);
double diamond_alpha_derivative(const TimeScale& T, const expr::ExprFunc& f, double t,
                                double alpha);

// Exact jump sums over scattered points plus adaptive Simpson on interval
// interiors; q-lattice tails are summed as series.  delta covers [a, b) jumps,
// nabla covers (a, b].
double delta_integral(const TimeScale& T, const real_fn& f, double a, double b);
double delta_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b);
double nabla_integral(const TimeScale& T, const real_fn& f, double a, double b);
double nabla_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b);

double diamond_alpha_integral(const TimeScale& T, const real_fn& f, double a, double b,
                              double alpha);
double diamond_alpha_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b,
                              double alpha);

// gamma1*f summed delta-style plus gamma2*f summed nabla-style, with the
// point-dependent weights; on interval interiors the weights collapse to 1/2
// each so the continuous part is the plain Riemann integral.
double diamond_integral(const TimeScale& T, const real_fn& f, double a, double b);
double diamond_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b);

enum class DiamondIneqKind { holder, cauchy_schwarz, minkowski, mvt };

struct DiamondReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    // mvt only:
    double K = 0.0;
    double inf_f = 0.0;
    double sup_f = 0.0;
};

// Comparison inequalities and the weighted mean value property for the diamond
// integral.  For mvt, g must be nonnegative on the scale's points in [a, b];
// lhs/rhs carry integral(f*g) and integral(g), and K = lhs/rhs is checked
// against the sampled inf/sup of f.
DiamondReport diamond_inequality_check(DiamondIneqKind kind, const real_fn& f, const real_fn& g,
                                       const TimeScale& T, double a, double b, double exponent);
DiamondReport diamond_inequality_check(DiamondIneqKind kind, const expr::ExprFunc& f,
                                       const expr::ExprFunc& g, const TimeScale& T, double a,
                                       double b, double exponent);

// Deterministic sample of the scale inside [a, b]: every scattered point (up to
// a cap) plus uniform grids over interval pieces.  Used for sup/inf estimates.
std::vector<double> sample_points(const TimeScale& T, double a, double b, int per_piece = 64);

}  // namespace qcalc::timescale
