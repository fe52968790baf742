#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qcalc/expr.hpp"
#include "qcalc/numerics.hpp"
#include "qcalc/quantum.hpp"

namespace qcalc::variational {

using numerics::real_fn;
using numerics::SeriesPolicy;
using quantum::QOmegaParams;

// The three lattice calculi the variational layer drives.
enum class Flavor { hahn_higher, q_symmetric, hahn_symmetric };

// Fixed-endpoint problem: extremize the flavor's integral of L(t, u0..ur)
// composed with the candidate y as
//   hahn_higher:    u_i = D^i[y o sigma^(r-i)](t), i = 0..r
//   q_symmetric:    u0 = y(qt),        u1 = sym D_q[y](t)
//   hahn_symmetric: u0 = y(sigma(t)),  u1 = sym D[y](t)
struct VariationalProblem {
    Flavor flavor;
    QOmegaParams params;             // omega must be 0 for q_symmetric
    int order = 1;                   // r: 1..4 for hahn_higher, exactly 1 otherwise
    expr::ExprFunc lagrangian;       // over (t, u0..ur)
    double a = 0.0;
    double b = 1.0;
    std::vector<double> boundary_a;  // D^i[y](a) targets, i < r
    std::vector<double> boundary_b;  // D^i[y](b) targets, i < r
    int lattice_depth = 24;          // orbit points per endpoint
};

// Throws std::invalid_argument when the fields are inconsistent.
void validate(const VariationalProblem& prob);

// Where residuals and pointwise identities are evaluated: the first
// `lattice_depth` forward-orbit points of a, then of b (odd orbit powers for
// the symmetric flavors), then omega0.  Deterministic order.
std::vector<double> residual_points(const VariationalProblem& prob);

// The composed integrand t -> L(t, u0(t), ..., ur(t)) as a plain function.
real_fn integrand_of(const VariationalProblem& prob, const real_fn& y);

// Value of the flavor's quantum integral of the composed integrand over
// [a, b].  Throws non_convergent when the defining series stalls.
double eval_functional(const VariationalProblem& prob, const real_fn& y,
                       const SeriesPolicy& policy = {});
double eval_functional(const VariationalProblem& prob, const expr::ExprFunc& y,
                       const SeriesPolicy& policy = {});

// Pointwise Euler-Lagrange defect of y at one point (no boundary check).
double el_residual_at(const VariationalProblem& prob, const real_fn& y, double t);

struct ResidualReport {
    std::vector<double> points;
    std::vector<double> residuals;
    double max_abs = 0.0;
    double functional_value = 0.0;
};

// Euler-Lagrange defect of y over residual_points.  Checks the boundary
// values first (domain_error on violation; tolerance 1e-9, scale-relative).
ResidualReport el_residual(const VariationalProblem& prob, const real_fn& y,
                           const SeriesPolicy& policy = {});
ResidualReport el_residual(const VariationalProblem& prob, const expr::ExprFunc& y,
                           const SeriesPolicy& policy = {});

// d/d(eps) of eval_functional(y + eps*eta) at eps = 0: central difference with
// step 1e-5 plus one Richardson step.  eta must be admissible -- eta (and its
// D^i for i < r in the hahn_higher flavor) vanish at a and b within 1e-9.
double first_variation(const VariationalProblem& prob, const real_fn& y, const real_fn& eta,
                       const SeriesPolicy& policy = {});
double first_variation(const VariationalProblem& prob, const expr::ExprFunc& y,
                       const expr::ExprFunc& eta, const SeriesPolicy& policy = {});

struct ConvexityViolation {
    double t, u, v, du, dv;
    double defect;  // linearization minus increment; > 1e-9 means violated
};

struct ConvexityReport {
    bool jointly_convex_evidence = false;
    long long samples = 0;
    std::uint64_t seed = 0;
    std::vector<ConvexityViolation> violations;
};

// Samples the subgradient inequality
//   L(t, u+du, v+dv) - L(t, u, v) >= dL/du * du + dL/dv * dv - 1e-9
// over a deterministic pseudo-random stream: n pairs for each of 16 sampled
// t values.  Evidence of joint convexity in (u, v), not a proof.
ConvexityReport convexity_sample(const expr::ExprFunc& L, std::pair<double, double> t_range,
                                 std::pair<double, double> u_range,
                                 std::pair<double, double> v_range, int n);

// Invertible pointwise change of variable y = forward(t, ybar); both
// directions supplied as two-variable expressions over (t, u0).
struct Transform {
    expr::ExprFunc forward;
    expr::ExprFunc inverse;
};

struct LeitmannReport {
    double max_pointwise_defect = 0.0;   // identity residual over lattice points
    double max_functional_defect = 0.0;  // vs G(b, ybar(b)) - G(a, ybar(a))
    int samples = 0;
    std::uint64_t seed = 0;
    bool holds = false;  // pointwise <= 1e-8 and functional <= 1e-7
};

// Checks the change-of-variable identity behind the direct method:
//   L-integrand[y](t) - Lbar-integrand[ybar](t) = D[tau -> G(tau, ybar(tau))](t)
// pointwise at the well-conditioned residual_points (the fixed point plus
// lattice points whose quotient span is not rounding-dominated), plus the
// induced functional difference G(b, ybar(b)) - G(a, ybar(a)), over `samples`
// random ybar satisfying the transformed boundary conditions.  Requires order 1.
LeitmannReport leitmann_check(const expr::ExprFunc& L, const expr::ExprFunc& Lbar,
                              const Transform& z, const expr::ExprFunc& G,
                              const VariationalProblem& prob, int samples,
                              const SeriesPolicy& policy = {});

}  // namespace qcalc::variational
