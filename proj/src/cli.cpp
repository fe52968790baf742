#include "qcalc/cli.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcalc/errors.hpp"
#include "qcalc/expr.hpp"
#include "qcalc/numerics.hpp"
#include "qcalc/quantum.hpp"
#include "qcalc/symcalc.hpp"
#include "qcalc/timescale.hpp"
#include "qcalc/variational.hpp"

namespace qcalc::cli {
namespace {

using nlohmann::json;
using numerics::SeriesPolicy;
using numerics::SeriesResult;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numbers on the command line and in override specs may be plain decimals or
// exact fractions like "1/6".
double parse_number(const std::string& text) {
    auto to_double = [&text](const std::string& part) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            throw usage_error("not a number: '" + text + "'");
        }
        while (used < part.size() && std::isspace(static_cast<unsigned char>(part[used]))) ++used;
        if (used != part.size()) throw usage_error("not a number: '" + text + "'");
        return v;
    };
    std::size_t slash = text.find('/');
    if (slash == std::string::npos) return to_double(text);
    double num = to_double(text.substr(0, slash));
    double den = to_double(text.substr(slash + 1));
    if (den == 0.0) throw usage_error("zero denominator in '" + text + "'");
    return num / den;
}

double need(const std::string& text, const char* flag) {
    if (text.empty())
        throw usage_error(std::string("missing ") + flag + " (pass e.g. " + flag + " 0.5)");
    return parse_number(text);
}

double value_or(const std::string& text, double fallback) {
    return text.empty() ? fallback : parse_number(text);
}

// "t=0.5:1" / "t=1/6:6" -> point override on the named variable.
void apply_override(expr::ExprFunc& f, const std::string& spec) {
    std::size_t eq = spec.find('=');
    std::size_t colon = spec.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
        throw usage_error("override must look like var=coord:value, got '" + spec + "'");
    std::string var = spec.substr(0, eq);
    if (expr::var_index(var) < 0)
        throw usage_error("unknown variable '" + var + "' in override '" + spec + "'");
    double coord = parse_number(spec.substr(eq + 1, colon - eq - 1));
    double value = parse_number(spec.substr(colon + 1));
    f.add_override(var, coord, value);
}

expr::ExprFunc parse_function(const std::string& src, const std::vector<std::string>& overrides) {
    if (src.empty()) throw usage_error("missing function expression");
    expr::ExprFunc f = expr::parse(src);
    for (const auto& spec : overrides) apply_override(f, spec);
    return f;
}

std::string classification_name(timescale::PointClass c) {
    switch (c) {
        case timescale::PointClass::dense: return "dense";
        case timescale::PointClass::right_scattered_left_dense: return "right-scattered-left-dense";
        case timescale::PointClass::left_scattered_right_dense: return "left-scattered-right-dense";
        case timescale::PointClass::isolated: return "isolated";
    }
    return "unknown";
}

variational::Flavor flavor_from(const std::string& name) {
    if (name == "hahn_higher" || name == "hahn-higher") return variational::Flavor::hahn_higher;
    if (name == "q_symmetric" || name == "q-symmetric") return variational::Flavor::q_symmetric;
    if (name == "hahn_symmetric" || name == "hahn-symmetric")
        return variational::Flavor::hahn_symmetric;
    throw usage_error("unknown flavor '" + name +
                      "' (expected hahn_higher, q_symmetric or hahn_symmetric)");
}

std::string flavor_name(variational::Flavor f) {
    switch (f) {
        case variational::Flavor::hahn_higher: return "hahn_higher";
        case variational::Flavor::q_symmetric: return "q_symmetric";
        case variational::Flavor::hahn_symmetric: return "hahn_symmetric";
    }
    return "unknown";
}

void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& cells) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            flatten(value, prefix.empty() ? key : prefix + "." + key, cells);
    } else if (j.is_array()) {
        std::string joined;
        for (const auto& item : j) {
            if (!joined.empty()) joined += ';';
            joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        cells.emplace_back(prefix, joined);
    } else {
        cells.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
}

void emit(const json& report, const std::string& format, std::ostream& out) {
    if (format == "json") {
        out << report.dump(2) << "\n";
        return;
    }
    if (format != "csv") throw usage_error("unknown --output '" + format + "' (json or csv)");
    // Paired point/residual arrays become plot-ready rows; everything else is
    // one header line plus one value line.
    if (report.contains("points") && report.contains("residuals")) {
        out << "point,residual\n";
        const auto& pts = report["points"];
        const auto& res = report["residuals"];
        for (std::size_t i = 0; i < pts.size(); ++i)
            out << pts[i].dump() << "," << res[i].dump() << "\n";
        return;
    }
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(report, "", cells);
    std::string header, row;
    for (const auto& [key, value] : cells) {
        if (!header.empty()) {
            header += ',';
            row += ',';
        }
        header += key;
        row += value;
    }
    out << header << "\n" << row << "\n";
}

// Everything the subcommands can mention, collected once.
struct Options {
    std::string op, kind, f_src, g_src, t, t0, a, b, q, omega, alpha, beta, h, scale;
    std::string flavor, lagrangian, y_src, eta_src, job, output = "json";
    std::vector<std::string> overrides, boundary_a, boundary_b;
    int order = 1;
    int depth = 24;
    int samples = 10;
    int convexity_n = 0;
    double exponent = 2.0;
    double abs_tol = SeriesPolicy{}.abs_tol;
    double rel_tol = SeriesPolicy{}.rel_tol;
    int max_terms = SeriesPolicy{}.max_terms;
    std::vector<double> u_range{-1.0, 1.0};
    std::vector<double> v_range{-1.0, 1.0};
    // leitmann:
    std::string lbar_src, z_forward, z_inverse, gauge_src;
};

SeriesPolicy policy_from(const Options& o) {
    SeriesPolicy p;
    p.abs_tol = o.abs_tol;
    p.rel_tol = o.rel_tol;
    if (o.max_terms < 1) throw usage_error("--max-terms must be positive");
    p.max_terms = o.max_terms;
    return p;
}

json policy_echo(const SeriesPolicy& p) {
    return {{"abs_tol", p.abs_tol}, {"rel_tol", p.rel_tol}, {"max_terms", p.max_terms}};
}

json series_fields(const SeriesResult& r) {
    return {{"value", r.value},
            {"terms_used", r.terms_used},
            {"est_error", r.est_error},
            {"converged", r.converged}};
}

json load_job(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open job file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw usage_error("job file '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

expr::ExprFunc function_from_json(const json& spec) {
    if (spec.is_string()) return expr::parse(spec.get<std::string>());
    if (spec.is_object()) {
        expr::ExprFunc f = expr::parse(spec.at("expr").get<std::string>());
        if (spec.contains("overrides"))
            for (const auto& ov : spec.at("overrides")) apply_override(f, ov.get<std::string>());
        return f;
    }
    throw usage_error("function spec must be a string or {expr, overrides}");
}

variational::VariationalProblem problem_from_json(const json& j) {
    variational::Flavor flavor = flavor_from(j.at("flavor").get<std::string>());
    double q = j.at("q").get<double>();
    double omega = j.value("omega", 0.0);
    variational::VariationalProblem prob{flavor, quantum::QOmegaParams(q, omega),
                                         1,      expr::ExprFunc{},
                                         0.0,    1.0,
                                         {},     {},
                                         24};
    prob.order = j.value("r", 1);
    prob.lagrangian = expr::parse(j.at("L").get<std::string>());
    prob.a = j.at("a").get<double>();
    prob.b = j.at("b").get<double>();
    prob.lattice_depth = j.value("depth", 24);

    const json& boundary = j.at("boundary");
    if (!boundary.is_array() || boundary.empty())
        throw usage_error("boundary must be a nonempty array");
    if (boundary[0].is_array()) {
        if (boundary.size() != 2) throw usage_error("boundary must hold the a-side and b-side");
        prob.boundary_a = boundary[0].get<std::vector<double>>();
        prob.boundary_b = boundary[1].get<std::vector<double>>();
    } else {
        std::vector<double> flat = boundary.get<std::vector<double>>();
        if (flat.size() % 2 != 0) throw usage_error("flat boundary list must have 2r entries");
        std::size_t r = flat.size() / 2;
        prob.boundary_a.assign(flat.begin(), flat.begin() + r);
        prob.boundary_b.assign(flat.begin() + r, flat.end());
    }
    return prob;
}

std::vector<double> parse_boundary(const std::vector<std::string>& parts, const char* flag) {
    if (parts.empty())
        throw usage_error(std::string("missing ") + flag + " (one value per derivative order)");
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(parse_number(p));
    return out;
}

variational::VariationalProblem problem_from_flags(const Options& o) {
    if (o.flavor.empty()) throw usage_error("missing --flavor (or use --job file.json)");
    variational::Flavor flavor = flavor_from(o.flavor);
    double q = need(o.q, "--q");
    double omega = value_or(o.omega, 0.0);
    variational::VariationalProblem prob{flavor, quantum::QOmegaParams(q, omega),
                                         1,      expr::ExprFunc{},
                                         0.0,    1.0,
                                         {},     {},
                                         24};
    prob.order = o.order;
    if (o.lagrangian.empty()) throw usage_error("missing --L");
    prob.lagrangian = expr::parse(o.lagrangian);
    prob.a = need(o.a, "--a");
    prob.b = need(o.b, "--b");
    prob.lattice_depth = o.depth;
    prob.boundary_a = parse_boundary(o.boundary_a, "--boundary-a");
    prob.boundary_b = parse_boundary(o.boundary_b, "--boundary-b");
    return prob;
}

json problem_echo(const variational::VariationalProblem& prob) {
    return {{"flavor", flavor_name(prob.flavor)},
            {"q", prob.params.q},
            {"omega", prob.params.omega},
            {"r", prob.order},
            {"L", prob.lagrangian.source()},
            {"a", prob.a},
            {"b", prob.b},
            {"boundary", json::array({prob.boundary_a, prob.boundary_b})},
            {"depth", prob.lattice_depth}};
}

int do_deriv(const Options& o, std::ostream& out) {
    expr::ExprFunc f = parse_function(o.f_src, o.overrides);
    double t = need(o.t, "--t");
    double value = 0.0;
    json inputs{{"op", o.op}, {"f", f.source()}, {"t", t}};
    if (!o.overrides.empty()) inputs["overrides"] = o.overrides;

    if (o.op == "hahn") {
        quantum::QOmegaParams p(need(o.q, "--q"), value_or(o.omega, 0.0));
        inputs["q"] = p.q;
        inputs["omega"] = p.omega;
        inputs["order"] = o.order;
        value = o.order == 1 ? quantum::hahn_derivative(f, p, t)
                             : quantum::hahn_derivative_higher(f, p, t, o.order);
    } else if (o.op == "h-forward" || o.op == "h-backward") {
        double h = need(o.h, "--h");
        inputs["h"] = h;
        value = o.op == "h-forward" ? quantum::h_forward_derivative(f, h, t)
                                    : quantum::h_backward_derivative(f, h, t);
    } else if (o.op == "ab-sym") {
        symcalc::AlphaBetaParams p(need(o.alpha, "--alpha"), need(o.beta, "--beta"));
        inputs["alpha"] = p.alpha;
        inputs["beta"] = p.beta;
        value = symcalc::ab_sym_derivative(f, p, t);
    } else if (o.op == "q-sym") {
        double q = need(o.q, "--q");
        inputs["q"] = q;
        value = symcalc::q_sym_derivative(f, q, t);
    } else if (o.op == "hahn-sym") {
        quantum::QOmegaParams p(need(o.q, "--q"), value_or(o.omega, 0.0));
        inputs["q"] = p.q;
        inputs["omega"] = p.omega;
        value = symcalc::hahn_sym_derivative(f, p, t);
    } else if (o.op == "delta" || o.op == "nabla" || o.op == "sym-diamond" ||
               o.op == "diamond-alpha") {
        if (o.scale.empty()) throw usage_error("missing --scale for time-scale operators");
        timescale::TimeScale T = timescale::parse_time_scale(o.scale);
        inputs["scale"] = o.scale;
        if (o.op == "delta") value = timescale::delta_derivative(T, f, t);
        else if (o.op == "nabla") value = timescale::nabla_derivative(T, f, t);
        else if (o.op == "sym-diamond") value = timescale::sym_diamond_derivative(T, f, t);
        else {
            double alpha = need(o.alpha, "--alpha");
            inputs["alpha"] = alpha;
            value = timescale::diamond_alpha_derivative(T, f, t, alpha);
        }
    } else {
        throw usage_error("unknown --op '" + o.op +
                          "' (deriv knows hahn, h-forward, h-backward, ab-sym, q-sym, hahn-sym, "
                          "delta, nabla, sym-diamond, diamond-alpha)");
    }

    emit({{"command", "deriv"}, {"inputs", inputs}, {"value", value}}, o.output, out);
    return 0;
}

int do_integ(const Options& o, std::ostream& out) {
    expr::ExprFunc f = parse_function(o.f_src, o.overrides);
    double a = need(o.a, "--a");
    double b = need(o.b, "--b");
    SeriesPolicy policy = policy_from(o);
    json inputs{{"op", o.op}, {"f", f.source()}, {"a", a}, {"b", b}};
    if (!o.overrides.empty()) inputs["overrides"] = o.overrides;
    json report{{"command", "integ"}};

    std::optional<SeriesResult> series;
    double plain = 0.0;
    if (o.op == "hahn") {
        quantum::QOmegaParams p(need(o.q, "--q"), value_or(o.omega, 0.0));
        inputs["q"] = p.q;
        inputs["omega"] = p.omega;
        series = quantum::hahn_integral(f, p, a, b, policy);
    } else if (o.op == "q-sym") {
        double q = need(o.q, "--q");
        inputs["q"] = q;
        series = symcalc::q_sym_integral(f, q, a, b, policy);
    } else if (o.op == "hahn-sym") {
        quantum::QOmegaParams p(need(o.q, "--q"), value_or(o.omega, 0.0));
        inputs["q"] = p.q;
        inputs["omega"] = p.omega;
        series = symcalc::hahn_sym_integral(f, p, a, b, policy);
    } else if (o.op == "alpha-forward") {
        double alpha = need(o.alpha, "--alpha");
        inputs["alpha"] = alpha;
        series = symcalc::alpha_forward_integral(f, alpha, a, b, policy);
    } else if (o.op == "beta-backward") {
        double beta = need(o.beta, "--beta");
        inputs["beta"] = beta;
        series = symcalc::beta_backward_integral(f, beta, a, b, policy);
    } else if (o.op == "ab-sym") {
        symcalc::AlphaBetaParams p(need(o.alpha, "--alpha"), need(o.beta, "--beta"));
        inputs["alpha"] = p.alpha;
        inputs["beta"] = p.beta;
        series = symcalc::ab_sym_integral(f, p, a, b, policy);
    } else if (o.op == "h") {
        double h = need(o.h, "--h");
        inputs["h"] = h;
        plain = quantum::h_integral(f, h, a, b);
    } else if (o.op == "delta" || o.op == "nabla" || o.op == "diamond" ||
               o.op == "diamond-alpha") {
        if (o.scale.empty()) throw usage_error("missing --scale for time-scale integrals");
        timescale::TimeScale T = timescale::parse_time_scale(o.scale);
        inputs["scale"] = o.scale;
        if (o.op == "delta") plain = timescale::delta_integral(T, f, a, b);
        else if (o.op == "nabla") plain = timescale::nabla_integral(T, f, a, b);
        else if (o.op == "diamond") plain = timescale::diamond_integral(T, f, a, b);
        else {
            double alpha = need(o.alpha, "--alpha");
            inputs["alpha"] = alpha;
            plain = timescale::diamond_alpha_integral(T, f, a, b, alpha);
        }
    } else {
        throw usage_error("unknown --op '" + o.op +
                          "' (integ knows hahn, q-sym, hahn-sym, alpha-forward, beta-backward, "
                          "ab-sym, h, delta, nabla, diamond, diamond-alpha)");
    }

    inputs["policy"] = policy_echo(policy);
    report["inputs"] = inputs;
    if (series) {
        report.update(series_fields(*series));
    } else {
        report["value"] = plain;
        report["converged"] = true;
    }
    emit(report, o.output, out);
    return series && !series->converged ? 3 : 0;
}

int do_ts_query(const Options& o, std::ostream& out) {
    if (o.scale.empty()) throw usage_error("missing --scale");
    timescale::TimeScale T = timescale::parse_time_scale(o.scale);
    double t = T.snap(need(o.t, "--t"));
    timescale::JumpInfo j = T.jump(t);
    timescale::GammaWeights g = timescale::gamma_weights(T, t);
    emit({{"command", "ts-query"},
          {"inputs", {{"scale", o.scale}, {"t", t}}},
          {"sigma", j.sigma},
          {"rho", j.rho},
          {"mu", j.mu},
          {"nu", j.nu},
          {"classification", classification_name(j.classification)},
          {"gamma1", g.gamma1},
          {"gamma2", g.gamma2},
          {"min", T.min()},
          {"max", T.max()}},
         o.output, out);
    return 0;
}

int do_ineq(const Options& o, std::ostream& out) {
    expr::ExprFunc f = parse_function(o.f_src, o.overrides);
    expr::ExprFunc g = parse_function(o.g_src.empty() ? "1" : o.g_src, {});
    double a = need(o.a, "--a");
    double b = need(o.b, "--b");
    SeriesPolicy policy = policy_from(o);
    json inputs{{"kind", o.kind}, {"f", f.source()}, {"g", g.source()},
                {"a", a},         {"b", b},          {"p", o.exponent}};

    if (!o.scale.empty()) {
        timescale::TimeScale T = timescale::parse_time_scale(o.scale);
        inputs["scale"] = o.scale;
        timescale::DiamondIneqKind kind;
        if (o.kind == "holder") kind = timescale::DiamondIneqKind::holder;
        else if (o.kind == "cauchy-schwarz") kind = timescale::DiamondIneqKind::cauchy_schwarz;
        else if (o.kind == "minkowski") kind = timescale::DiamondIneqKind::minkowski;
        else if (o.kind == "mvt") kind = timescale::DiamondIneqKind::mvt;
        else throw usage_error("unknown --kind '" + o.kind + "'");
        timescale::DiamondReport r =
            timescale::diamond_inequality_check(kind, f, g, T, a, b, o.exponent);
        json report{{"command", "ineq"}, {"inputs", inputs}, {"lhs", r.lhs},
                    {"rhs", r.rhs},      {"holds", r.holds}};
        if (o.kind == "mvt") {
            report["K"] = r.K;
            report["inf_f"] = r.inf_f;
            report["sup_f"] = r.sup_f;
        }
        emit(report, o.output, out);
        return 0;
    }

    symcalc::AlphaBetaParams p(need(o.alpha, "--alpha"), need(o.beta, "--beta"));
    inputs["alpha"] = p.alpha;
    inputs["beta"] = p.beta;
    if (o.kind == "mvt") {
        double K = symcalc::integral_mvt_check(f, g, p, a, b, policy);
        emit({{"command", "ineq"}, {"inputs", inputs}, {"K", K}, {"holds", true}}, o.output, out);
        return 0;
    }
    symcalc::IneqKind kind;
    if (o.kind == "holder") kind = symcalc::IneqKind::holder;
    else if (o.kind == "cauchy-schwarz") kind = symcalc::IneqKind::cauchy_schwarz;
    else if (o.kind == "minkowski") kind = symcalc::IneqKind::minkowski;
    else throw usage_error("unknown --kind '" + o.kind +
                           "' (holder, cauchy-schwarz, minkowski or mvt)");
    symcalc::IneqReport r = symcalc::inequality_check(kind, f, g, p, a, b, o.exponent, policy);
    emit({{"command", "ineq"}, {"inputs", inputs}, {"lhs", r.lhs}, {"rhs", r.rhs},
          {"holds", r.holds}},
         o.output, out);
    return 0;
}

int do_mvt(const Options& o, std::ostream& out) {
    expr::ExprFunc f = parse_function(o.f_src, o.overrides);
    double a = need(o.a, "--a");
    double b = need(o.b, "--b");
    json inputs{{"kind", o.kind}, {"f", f.source()}, {"a", a}, {"b", b}};

    symcalc::MvtKind kind;
    if (o.kind == "fermat") kind = symcalc::MvtKind::fermat;
    else if (o.kind == "rolle") kind = symcalc::MvtKind::rolle;
    else if (o.kind == "lagrange") kind = symcalc::MvtKind::lagrange;
    else if (o.kind == "cauchy") kind = symcalc::MvtKind::cauchy;
    else throw usage_error("unknown --kind '" + o.kind +
                           "' (fermat, rolle, lagrange or cauchy)");

    std::optional<expr::ExprFunc> g;
    if (kind == symcalc::MvtKind::cauchy) {
        if (o.g_src.empty()) throw usage_error("cauchy needs --g");
        g = expr::parse(o.g_src);
        inputs["g"] = g->source();
    }
    std::optional<double> t0;
    if (kind == symcalc::MvtKind::fermat) {
        if (o.t0.empty()) throw usage_error("fermat needs --t0 (the extremum location)");
        t0 = parse_number(o.t0);
        inputs["t0"] = *t0;
    }

    symcalc::MvtWitness w = symcalc::mvt_witness(kind, f, g ? &*g : nullptr, a, b, t0);
    emit({{"command", "mvt"},
          {"inputs", inputs},
          {"alpha", w.alpha},
          {"beta", w.beta},
          {"c", w.c},
          {"residual", w.residual}},
         o.output, out);
    return 0;
}

struct LoadedProblem {
    variational::VariationalProblem prob;
    expr::ExprFunc y;
    std::optional<expr::ExprFunc> eta;
    json job;
};

LoadedProblem load_problem(const Options& o) {
    if (!o.job.empty()) {
        json j = load_job(o.job);
        LoadedProblem lp{problem_from_json(j), {}, {}, j};
        if (j.contains("y")) lp.y = function_from_json(j.at("y"));
        else if (!o.y_src.empty()) lp.y = parse_function(o.y_src, o.overrides);
        else throw usage_error("job file has no \"y\" and no --y was given");
        if (j.contains("eta")) lp.eta = function_from_json(j.at("eta"));
        else if (!o.eta_src.empty()) lp.eta = parse_function(o.eta_src, {});
        return lp;
    }
    LoadedProblem lp{problem_from_flags(o), parse_function(o.y_src, o.overrides), {}, {}};
    if (!o.eta_src.empty()) lp.eta = parse_function(o.eta_src, {});
    return lp;
}

int do_el_check(const Options& o, std::ostream& out) {
    LoadedProblem lp = load_problem(o);
    SeriesPolicy policy = policy_from(o);
    variational::ResidualReport r = variational::el_residual(lp.prob, lp.y, policy);
    json inputs = problem_echo(lp.prob);
    inputs["y"] = lp.y.source();
    inputs["policy"] = policy_echo(policy);
    emit({{"command", "el-check"},
          {"inputs", inputs},
          {"points", r.points},
          {"residuals", r.residuals},
          {"max_abs", r.max_abs},
          {"functional_value", r.functional_value}},
         o.output, out);
    return 0;
}

int do_var_check(const Options& o, std::ostream& out) {
    LoadedProblem lp = load_problem(o);
    SeriesPolicy policy = policy_from(o);
    json inputs = problem_echo(lp.prob);
    inputs["y"] = lp.y.source();
    inputs["policy"] = policy_echo(policy);
    json report{{"command", "var-check"},
                {"functional_value", variational::eval_functional(lp.prob, lp.y, policy)}};
    if (lp.eta) {
        inputs["eta"] = lp.eta->source();
        report["first_variation"] = variational::first_variation(lp.prob, lp.y, *lp.eta, policy);
    }
    if (o.convexity_n > 0) {
        if (o.u_range.size() != 2 || o.v_range.size() != 2)
            throw usage_error("--u-range and --v-range take two values: lo hi");
        variational::ConvexityReport c = variational::convexity_sample(
            lp.prob.lagrangian, {lp.prob.a, lp.prob.b}, {o.u_range[0], o.u_range[1]},
            {o.v_range[0], o.v_range[1]}, o.convexity_n);
        json violations = json::array();
        for (const auto& v : c.violations)
            violations.push_back({{"t", v.t}, {"u", v.u}, {"v", v.v}, {"du", v.du},
                                  {"dv", v.dv}, {"defect", v.defect}});
        report["convexity"] = {{"jointly_convex_evidence", c.jointly_convex_evidence},
                               {"samples", c.samples},
                               {"seed", c.seed},
                               {"violations", violations}};
    }
    report["inputs"] = inputs;
    emit(report, o.output, out);
    return 0;
}

int do_leitmann(const Options& o, std::ostream& out) {
    SeriesPolicy policy = policy_from(o);
    json j = o.job.empty() ? json::object() : load_job(o.job);
    variational::VariationalProblem prob =
        o.job.empty() ? problem_from_flags(o) : problem_from_json(j);

    auto pick = [&](const char* key, const std::string& flag_value,
                    const char* flag) -> expr::ExprFunc {
        if (!flag_value.empty()) return expr::parse(flag_value);
        if (j.contains(key)) return function_from_json(j.at(key));
        throw usage_error(std::string("missing ") + flag + " (or \"" + key +
                          "\" in the job file)");
    };
    expr::ExprFunc L = pick("L", o.lagrangian, "--L");
    expr::ExprFunc lbar = pick("Lbar", o.lbar_src, "--Lbar");
    variational::Transform z{pick("z_forward", o.z_forward, "--z-forward"),
                             pick("z_inverse", o.z_inverse, "--z-inverse")};
    expr::ExprFunc gauge = pick("G", o.gauge_src, "--G");
    int samples = j.contains("samples") ? j.at("samples").get<int>() : o.samples;

    variational::LeitmannReport r =
        variational::leitmann_check(L, lbar, z, gauge, prob, samples, policy);
    json inputs = problem_echo(prob);
    inputs["L"] = L.source();
    inputs["Lbar"] = lbar.source();
    inputs["z_forward"] = z.forward.source();
    inputs["z_inverse"] = z.inverse.source();
    inputs["G"] = gauge.source();
    inputs["samples"] = samples;
    inputs["policy"] = policy_echo(policy);
    emit({{"command", "leitmann"},
          {"inputs", inputs},
          {"max_pointwise_defect", r.max_pointwise_defect},
          {"max_functional_defect", r.max_functional_defect},
          {"samples", r.samples},
          {"seed", r.seed},
          {"holds", r.holds}},
         o.output, out);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"quantum and time-scale calculus toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");

    app.add_option("--output", o.output, "report format: json or csv");
    app.add_option("--abs-tol", o.abs_tol, "series absolute tolerance");
    app.add_option("--rel-tol", o.rel_tol, "series relative tolerance");
    app.add_option("--max-terms", o.max_terms, "series term budget")
        ->envname("QCALC_MAX_TERMS");

    auto add_common = [&](CLI::App* sub) {
        sub->fallthrough(true);
        sub->set_help_flag("--help", "print help");
        sub->add_option("--f", o.f_src, "function expression in t");
        sub->add_option("--g", o.g_src, "second function expression");
        sub->add_option("--override", o.overrides, "point override var=coord:value")
            ->take_all();
        sub->add_option("--q", o.q, "quantum ratio in (0,1)");
        sub->add_option("--omega", o.omega, "quantum shift (default 0)");
        sub->add_option("--alpha", o.alpha, "forward step / diamond weight");
        sub->add_option("--beta", o.beta, "backward step");
        sub->add_option("--h", o.h, "uniform lattice step");
        sub->add_option("--scale", o.scale, "time scale spec, e.g. union(interval(0,1),points(2,4))");
        sub->add_option("--a", o.a, "lower endpoint");
        sub->add_option("--b", o.b, "upper endpoint");
    };

    CLI::App* deriv = app.add_subcommand("deriv", "evaluate a derivative operator at a point");
    add_common(deriv);
    deriv->add_option("--op", o.op, "operator name")->required();
    deriv->add_option("--t", o.t, "evaluation point")->required();
    deriv->add_option("--order", o.order, "derivative order (hahn only)");

    CLI::App* integ = app.add_subcommand("integ", "evaluate an integral operator over [a, b]");
    add_common(integ);
    integ->add_option("--op", o.op, "operator name")->required();

    CLI::App* el = app.add_subcommand("el-check", "Euler-Lagrange residuals of a candidate");
    add_common(el);
    el->add_option("--job", o.job, "JSON job file");
    el->add_option("--flavor", o.flavor, "hahn_higher | q_symmetric | hahn_symmetric");
    el->add_option("--L", o.lagrangian, "Lagrangian over (t, u0..ur)");
    el->add_option("--y", o.y_src, "candidate function of t");
    el->add_option("--r", o.order, "problem order");
    el->add_option("--depth", o.depth, "lattice depth per endpoint");
    el->add_option("--boundary-a", o.boundary_a, "boundary values at a")->take_all();
    el->add_option("--boundary-b", o.boundary_b, "boundary values at b")->take_all();

    CLI::App* var = app.add_subcommand("var-check", "functional value, first variation, convexity");
    add_common(var);
    var->add_option("--job", o.job, "JSON job file");
    var->add_option("--flavor", o.flavor, "hahn_higher | q_symmetric | hahn_symmetric");
    var->add_option("--L", o.lagrangian, "Lagrangian over (t, u0..ur)");
    var->add_option("--y", o.y_src, "candidate function of t");
    var->add_option("--eta", o.eta_src, "admissible variation of t");
    var->add_option("--r", o.order, "problem order");
    var->add_option("--depth", o.depth, "lattice depth per endpoint");
    var->add_option("--boundary-a", o.boundary_a, "boundary values at a")->take_all();
    var->add_option("--boundary-b", o.boundary_b, "boundary values at b")->take_all();
    var->add_option("--convexity-n", o.convexity_n, "subgradient samples per t (0 = skip)");
    var->add_option("--u-range", o.u_range, "u sampling range: lo hi")->expected(2);
    var->add_option("--v-range", o.v_range, "v sampling range: lo hi")->expected(2);

    CLI::App* ineq = app.add_subcommand("ineq", "integral inequalities and the integral MVT");
    add_common(ineq);
    ineq->add_option("--kind", o.kind, "holder | cauchy-schwarz | minkowski | mvt")->required();
    ineq->add_option("--p", o.exponent, "Holder/Minkowski exponent (> 1)");

    CLI::App* mvt = app.add_subcommand("mvt", "mean value theorem witnesses");
    add_common(mvt);
    mvt->add_option("--kind", o.kind, "fermat | rolle | lagrange | cauchy")->required();
    mvt->add_option("--t0", o.t0, "extremum location (fermat)");

    CLI::App* leit = app.add_subcommand("leitmann", "direct-method equivalence check");
    add_common(leit);
    leit->add_option("--job", o.job, "JSON job file");
    leit->add_option("--flavor", o.flavor, "problem flavor");
    leit->add_option("--L", o.lagrangian, "original Lagrangian");
    leit->add_option("--Lbar", o.lbar_src, "transformed Lagrangian");
    leit->add_option("--z-forward", o.z_forward, "y = z(t, u0)");
    leit->add_option("--z-inverse", o.z_inverse, "ybar = zinv(t, u0)");
    leit->add_option("--G", o.gauge_src, "gauge function of (t, u0)");
    leit->add_option("--r", o.order, "problem order");
    leit->add_option("--depth", o.depth, "lattice depth per endpoint");
    leit->add_option("--samples", o.samples, "random candidates to test");
    leit->add_option("--boundary-a", o.boundary_a, "boundary values at a")->take_all();
    leit->add_option("--boundary-b", o.boundary_b, "boundary values at b")->take_all();

    CLI::App* tsq = app.add_subcommand("ts-query", "jump operators and weights at a point");
    add_common(tsq);
    tsq->add_option("--t", o.t, "query point")->required();

    std::vector<const char*> argv;
    argv.push_back("qcalc");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (app.got_subcommand(deriv)) return do_deriv(o, out);
        if (app.got_subcommand(integ)) return do_integ(o, out);
        if (app.got_subcommand(el)) return do_el_check(o, out);
        if (app.got_subcommand(var)) return do_var_check(o, out);
        if (app.got_subcommand(ineq)) return do_ineq(o, out);
        if (app.got_subcommand(mvt)) return do_mvt(o, out);
        if (app.got_subcommand(leit)) return do_leitmann(o, out);
        if (app.got_subcommand(tsq)) return do_ts_query(o, out);
        err << "no command given; try --help\n";
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        err << "usage: qcalc <command> [flags]; see qcalc --help\n";
        return 1;
    } catch (const usage_error& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const non_convergent& e) {
        err << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
}

}  // namespace qcalc::cli
