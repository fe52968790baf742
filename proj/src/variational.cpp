#include "qcalc/variational.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qcalc/errors.hpp"
#include "qcalc/symcalc.hpp"

namespace qcalc::variational {

using quantum::fn_of_t;

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kPointwiseTol = 1e-8;
constexpr double kFunctionalTol = 1e-7;
constexpr double kConvexitySlack = 1e-9;
constexpr double kIdentitySpanFloor = 1e-4;
constexpr std::uint64_t kConvexitySeed = 90210;
constexpr std::uint64_t kLeitmannSeed = 46750;

bool near(double value, double target, double tol) {
    return std::fabs(value - target) <= tol * std::max(1.0, std::fabs(target));
}

// The flavor's first-order difference operator applied to a plain function.
double flavor_derivative(const VariationalProblem& prob, const real_fn& g, double t) {
    switch (prob.flavor) {
        case Flavor::hahn_higher: return quantum::hahn_derivative(g, prob.params, t);
        case Flavor::q_symmetric: return symcalc::q_sym_derivative(g, prob.params.q, t);
        case Flavor::hahn_symmetric: return symcalc::hahn_sym_derivative(g, prob.params, t);
    }
    throw std::invalid_argument("unknown flavor");
}

// u_0..u_r as functions of t for the given candidate.
std::vector<real_fn> slot_functions(const VariationalProblem& prob, const real_fn& y) {
    std::vector<real_fn> slots;
    const QOmegaParams p = prob.params;
    switch (prob.flavor) {
        case Flavor::hahn_higher:
            for (int i = 0; i <= prob.order; ++i) {
                int shift = prob.order - i;
                real_fn shifted = [y, p, shift](double tau) {
                    return y(quantum::sigma_orbit(p, tau, shift));
                };
                if (i == 0)
                    slots.push_back(shifted);
                else
                    slots.push_back([shifted, p, i](double t) {
                        return quantum::hahn_derivative_higher(shifted, p, t, i);
                    });
            }
            break;
        case Flavor::q_symmetric:
            slots.push_back([y, p](double t) { return y(p.q * t); });
            slots.push_back([y, p](double t) { return symcalc::q_sym_derivative(y, p.q, t); });
            break;
        case Flavor::hahn_symmetric:
            slots.push_back([y, p](double t) { return y(p.sigma(t)); });
            slots.push_back([y, p](double t) { return symcalc::hahn_sym_derivative(y, p, t); });
            break;
    }
    return slots;
}

expr::Env slot_env(double t, const std::vector<real_fn>& slots) {
    expr::Env env;
    env.set(0, t);
    for (std::size_t k = 0; k < slots.size(); ++k)
        env.set(static_cast<int>(k) + 1, slots[k](t));
    return env;
}

real_fn composed_integrand(const expr::ExprFunc& L, std::vector<real_fn> slots) {
    return [L, slots = std::move(slots)](double t) { return expr::eval(L, slot_env(t, slots)); };
}

// d/du_i of L at the composed arguments, exact via dual numbers.
double partial_L(const expr::ExprFunc& L, double t, const std::vector<real_fn>& slots, int i) {
    return expr::eval_dual(L, slot_env(t, slots), i + 1).tangent;
}

double flavor_integral(const VariationalProblem& prob, const real_fn& integrand,
                       const SeriesPolicy& policy) {
    numerics::SeriesResult res;
    switch (prob.flavor) {
        case Flavor::hahn_higher:
            res = quantum::hahn_integral(integrand, prob.params, prob.a, prob.b, policy);
            break;
        case Flavor::q_symmetric:
            res = symcalc::q_sym_integral(integrand, prob.params.q, prob.a, prob.b, policy);
            break;
        case Flavor::hahn_symmetric:
            res = symcalc::hahn_sym_integral(integrand, prob.params, prob.a, prob.b, policy);
            break;
    }
    if (!res.converged) throw non_convergent("functional integral did not converge");
    return res.value;
}

// D^i[y](x) in the flavor's first-order operator sense (i = 0 is y itself).
double boundary_derivative(const VariationalProblem& prob, const real_fn& y, double x, int i) {
    if (i == 0) return y(x);
    return quantum::hahn_derivative_higher(y, prob.params, x, i);
}

void check_endpoint_values(const VariationalProblem& prob, const real_fn& y, double x,
                           const std::vector<double>& targets, const char* side) {
    for (int i = 0; i < static_cast<int>(targets.size()); ++i) {
        double got = boundary_derivative(prob, y, x, i);
        if (!near(got, targets[i], kBoundaryTol))
            throw domain_error(std::string("boundary condition violated at ") + side +
                               ": derivative order " + std::to_string(i) + " is " +
                               std::to_string(got) + ", expected " + std::to_string(targets[i]));
    }
}

void check_admissible(const VariationalProblem& prob, const real_fn& eta) {
    int count = prob.flavor == Flavor::hahn_higher ? prob.order : 1;
    for (int i = 0; i < count; ++i) {
        double at_a = boundary_derivative(prob, eta, prob.a, i);
        double at_b = boundary_derivative(prob, eta, prob.b, i);
        if (std::fabs(at_a) > kBoundaryTol || std::fabs(at_b) > kBoundaryTol)
            throw domain_error("variation is not admissible: it must vanish (with derivatives of "
                               "order below r) at both endpoints");
    }
}

}  // namespace

void validate(const VariationalProblem& prob) {
    if (!(prob.a < prob.b)) throw std::invalid_argument("need a < b");
    if (prob.lattice_depth < 1) throw std::invalid_argument("lattice depth must be positive");
    if (prob.flavor == Flavor::hahn_higher) {
        if (prob.order < 1 || prob.order > 4)
            throw std::invalid_argument("order must lie in 1..4");
    } else if (prob.order != 1) {
        throw std::invalid_argument("symmetric flavors are first order");
    }
    if (prob.flavor == Flavor::q_symmetric && prob.params.omega != 0.0)
        throw std::invalid_argument("q_symmetric requires omega = 0");
    if (prob.lagrangian.ast() == nullptr)
        throw std::invalid_argument("lagrangian is empty");
    for (int slot = prob.order + 2; slot < expr::kMaxVars; ++slot)
        if (prob.lagrangian.uses(slot))
            throw std::invalid_argument("lagrangian uses " + expr::var_name(slot) +
                                        " beyond the problem order");
    std::size_t expected = prob.flavor == Flavor::hahn_higher ? prob.order : 1;
    if (prob.boundary_a.size() != expected || prob.boundary_b.size() != expected)
        throw std::invalid_argument("boundary value lists must have r entries per endpoint");
}

std::vector<double> residual_points(const VariationalProblem& prob) {
    std::vector<double> pts;
    bool odd = prob.flavor != Flavor::hahn_higher;
    for (double endpoint : {prob.a, prob.b})
        for (int n = 0; n < prob.lattice_depth; ++n) {
            int power = odd ? 2 * n + 1 : n;
            pts.push_back(quantum::sigma_orbit(prob.params, endpoint, power));
        }
    pts.push_back(prob.params.omega0);
    return pts;
}

real_fn integrand_of(const VariationalProblem& prob, const real_fn& y) {
    return composed_integrand(prob.lagrangian, slot_functions(prob, y));
}

double eval_functional(const VariationalProblem& prob, const real_fn& y,
                       const SeriesPolicy& policy) {
    validate(prob);
    return flavor_integral(prob, integrand_of(prob, y), policy);
}

double eval_functional(const VariationalProblem& prob, const expr::ExprFunc& y,
                       const SeriesPolicy& policy) {
    return eval_functional(prob, fn_of_t(y), policy);
}

double el_residual_at(const VariationalProblem& prob, const real_fn& y, double t) {
    const expr::ExprFunc& L = prob.lagrangian;
    std::vector<real_fn> slots = slot_functions(prob, y);
    if (prob.flavor == Flavor::hahn_higher) {
        double total = 0.0;
        for (int i = 0; i <= prob.order; ++i) {
            real_fn g = [&L, &slots, i](double tau) { return partial_L(L, tau, slots, i); };
            double term = i == 0 ? g(t)
                                 : quantum::hahn_derivative_higher(g, prob.params, t, i);
            double sign = i % 2 == 0 ? 1.0 : -1.0;
            double coef = std::pow(1.0 / prob.params.q, static_cast<double>(i * (i - 1) / 2));
            total += sign * coef * term;
        }
        return total;
    }
    // Symmetric flavors: d2 L at t minus the operator applied to the shifted
    // d3-L function tau -> P3(sigma(tau)).
    const QOmegaParams p = prob.params;
    real_fn shifted_p3 = [&L, &slots, p](double tau) {
        return partial_L(L, p.sigma(tau), slots, 1);
    };
    return partial_L(L, t, slots, 0) - flavor_derivative(prob, shifted_p3, t);
}

ResidualReport el_residual(const VariationalProblem& prob, const real_fn& y,
                           const SeriesPolicy& policy) {
    validate(prob);
    check_endpoint_values(prob, y, prob.a, prob.boundary_a, "a");
    check_endpoint_values(prob, y, prob.b, prob.boundary_b, "b");

    ResidualReport report;
    report.points = residual_points(prob);
    for (double t : report.points) {
        double r = el_residual_at(prob, y, t);
        report.residuals.push_back(r);
        report.max_abs = std::max(report.max_abs, std::fabs(r));
    }
    report.functional_value = flavor_integral(prob, integrand_of(prob, y), policy);
    return report;
}

ResidualReport el_residual(const VariationalProblem& prob, const expr::ExprFunc& y,
                           const SeriesPolicy& policy) {
    return el_residual(prob, fn_of_t(y), policy);
}

double first_variation(const VariationalProblem& prob, const real_fn& y, const real_fn& eta,
                       const SeriesPolicy& policy) {
    validate(prob);
    check_admissible(prob, eta);
    auto phi = [&](double eps) {
        real_fn perturbed = [&y, &eta, eps](double t) { return y(t) + eps * eta(t); };
        return flavor_integral(prob, integrand_of(prob, perturbed), policy);
    };
    auto central = [&](double h) { return (phi(h) - phi(-h)) / (2.0 * h); };
    double h = 1e-5;
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

double first_variation(const VariationalProblem& prob, const expr::ExprFunc& y,
                       const expr::ExprFunc& eta, const SeriesPolicy& policy) {
    return first_variation(prob, fn_of_t(y), fn_of_t(eta), policy);
}

ConvexityReport convexity_sample(const expr::ExprFunc& L, std::pair<double, double> t_range,
                                 std::pair<double, double> u_range,
                                 std::pair<double, double> v_range, int n) {
    if (n < 2) throw std::invalid_argument("need n >= 2 samples per t");
    for (int slot = 3; slot < expr::kMaxVars; ++slot)
        if (L.uses(slot))
            throw std::invalid_argument("convexity sampling expects L over (t, u0, u1)");

    ConvexityReport report;
    report.seed = kConvexitySeed;
    std::mt19937_64 rng(kConvexitySeed);
    auto uniform = [&rng](double lo, double hi) {
        return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    const int t_draws = 16;
    for (int i = 0; i < t_draws; ++i) {
        double t = uniform(t_range.first, t_range.second);
        for (int k = 0; k < n; ++k) {
            double u = uniform(u_range.first, u_range.second);
            double v = uniform(v_range.first, v_range.second);
            double wu = (u_range.second - u_range.first) / 2.0;
            double wv = (v_range.second - v_range.first) / 2.0;
            double du = uniform(-wu, wu);
            double dv = uniform(-wv, wv);

            expr::Env env;
            env.set(0, t).set(1, u).set(2, v);
            double base = expr::eval(L, env);
            double d2 = expr::eval_dual(L, env, 1).tangent;
            double d3 = expr::eval_dual(L, env, 2).tangent;
            expr::Env lifted_env;
            lifted_env.set(0, t).set(1, u + du).set(2, v + dv);
            double lifted = expr::eval(L, lifted_env);

            double defect = (d2 * du + d3 * dv) - (lifted - base);
            ++report.samples;
            if (defect > kConvexitySlack)
                report.violations.push_back({t, u, v, du, dv, defect});
        }
    }
    report.jointly_convex_evidence = report.violations.empty();
    return report;
}

LeitmannReport leitmann_check(const expr::ExprFunc& L, const expr::ExprFunc& Lbar,
                              const Transform& z, const expr::ExprFunc& G,
                              const VariationalProblem& prob, int samples,
                              const SeriesPolicy& policy) {
    validate(prob);
    if (prob.order != 1) throw std::invalid_argument("the direct method check is first order");
    if (samples < 1) throw std::invalid_argument("need at least one sample");

    auto eval2 = [](const expr::ExprFunc& f, double t, double u0) {
        expr::Env env;
        env.set(0, t).set(1, u0);
        return expr::eval(f, env);
    };

    // Transformed boundary values for ybar.
    double ybar_a = eval2(z.inverse, prob.a, prob.boundary_a[0]);
    double ybar_b = eval2(z.inverse, prob.b, prob.boundary_b[0]);

    // Check the pointwise identity where it carries information in double
    // precision: at the operator's fixed point (both sides reach their
    // classical limit there) and at lattice points whose quotient span stays
    // above a floor.  Between those regimes the span shrinks toward rounding
    // scale and the quotients measure noise, not the identity.
    const QOmegaParams qp = prob.params;
    const double scale = std::max(1.0, std::fabs(qp.omega0));
    std::vector<double> pts;
    for (double t : residual_points(prob)) {
        double span = prob.flavor == Flavor::hahn_higher
                          ? std::fabs(qp.sigma(t) - t)
                          : std::fabs(qp.sigma(t) - qp.sigma_inv(t));
        bool at_center = std::fabs(t - qp.omega0) <= 1e-12 * scale;
        if (at_center || span >= kIdentitySpanFloor * scale) pts.push_back(t);
    }
    LeitmannReport report;
    report.seed = kLeitmannSeed;
    report.samples = samples;
    std::mt19937_64 rng(kLeitmannSeed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);

    const double a = prob.a, b = prob.b;
    for (int s = 0; s < samples; ++s) {
        double c0 = coef(rng), c1 = coef(rng);
        real_fn ybar = [=](double t) {
            double line = ybar_a + (ybar_b - ybar_a) * (t - a) / (b - a);
            return line + (t - a) * (t - b) * (c0 + c1 * t);
        };
        real_fn y = [&eval2, &z, ybar](double t) { return eval2(z.forward, t, ybar(t)); };
        real_fn gauge = [&eval2, &G, ybar](double t) { return eval2(G, t, ybar(t)); };

        real_fn l_int = composed_integrand(L, slot_functions(prob, y));
        real_fn lbar_int = composed_integrand(Lbar, slot_functions(prob, ybar));

        for (double t : pts) {
            double lhs = l_int(t) - lbar_int(t);
            double rhs = flavor_derivative(prob, gauge, t);
            report.max_pointwise_defect =
                std::max(report.max_pointwise_defect, std::fabs(lhs - rhs));
        }

        double functional_gap = flavor_integral(prob, l_int, policy) -
                                flavor_integral(prob, lbar_int, policy);
        double boundary_gap = gauge(b) - gauge(a);
        report.max_functional_defect =
            std::max(report.max_functional_defect, std::fabs(functional_gap - boundary_gap));
    }
    report.holds = report.max_pointwise_defect <= kPointwiseTol &&
                   report.max_functional_defect <= kFunctionalTol;
    return report;
}

}  // namespace qcalc::variational
