#include "qcalc/expr.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "qcalc/errors.hpp"

namespace qcalc::expr {

namespace {

enum class Fn { abs, sqrt, exp, ln, sin, cos, min, max };

struct Builtin {
    const char* name;
    Fn fn;
    int arity;
};

constexpr Builtin kBuiltins[] = {
    {"abs", Fn::abs, 1}, {"sqrt", Fn::sqrt, 1}, {"exp", Fn::exp, 1}, {"ln", Fn::ln, 1},
    {"sin", Fn::sin, 1}, {"cos", Fn::cos, 1},   {"min", Fn::min, 2}, {"max", Fn::max, 2},
};

const Builtin* find_builtin(const std::string& name) {
    for (const auto& b : kBuiltins)
        if (name == b.name) return &b;
    return nullptr;
}

}  // namespace

struct Node {
    enum class Kind { number, variable, neg, binary, call };
    Kind kind = Kind::number;
    double value = 0.0;
    int var = -1;
    char op = 0;
    Fn fn = Fn::abs;
    std::vector<Node> kids;
    std::size_t offset = 0;
};

int var_index(const std::string& name) {
    if (name == "t") return 0;
    if (name.size() == 2 && name[0] == 'u' && name[1] >= '0' && name[1] <= '9')
        return 1 + (name[1] - '0');
    return -1;
}

std::string var_name(int index) {
    if (index == 0) return "t";
    return std::string("u") + char('0' + (index - 1));
}

Env::Env(std::initializer_list<std::pair<const char*, double>> bindings) {
    for (const auto& [name, value] : bindings) set(name, value);
}

Env& Env::set(int index, double value) {
    values_[index] = value;
    bound_[index] = true;
    return *this;
}

Env& Env::set(const std::string& name, double value) {
    int idx = var_index(name);
    if (idx < 0) throw std::invalid_argument("unknown variable: " + name);
    return set(idx, value);
}

bool ExprFunc::uses(int index) const {
    return index >= 0 && index < kMaxVars && ((used_ >> index) & 1u) != 0;
}

ExprFunc& ExprFunc::add_override(Override ov) {
    overrides_.push_back(std::move(ov));
    return *this;
}

ExprFunc& ExprFunc::add_override(const std::string& var, double coord, double value) {
    int idx = var_index(var);
    if (idx < 0) throw std::invalid_argument("unknown variable: " + var);
    Override ov;
    ov.point.emplace_back(idx, coord);
    ov.value = value;
    return add_override(std::move(ov));
}

ExprFunc& ExprFunc::set_match_eps(double eps) {
    if (!(eps > 0)) throw std::invalid_argument("match_eps must be positive");
    match_eps_ = eps;
    return *this;
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    Node run() {
        Node n = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw parse_error("parse error at offset " + std::to_string(pos_) +
                                  ": unexpected trailing input",
                              pos_, "end of input");
        return n;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    [[noreturn]] void fail(const std::string& what, const std::string& expected) {
        throw parse_error("parse error at offset " + std::to_string(pos_) + ": " + what, pos_,
                          expected);
    }

    Node parse_expr() {
        Node n = parse_term();
        while (true) {
            char c = peek();
            if (c != '+' && c != '-') return n;
            std::size_t off = pos_++;
            Node rhs = parse_term();
            Node b;
            b.kind = Node::Kind::binary;
            b.op = c;
            b.offset = off;
            b.kids.push_back(std::move(n));
            b.kids.push_back(std::move(rhs));
            n = std::move(b);
        }
    }

    Node parse_term() {
        Node n = parse_factor();
        while (true) {
            char c = peek();
            if (c != '*' && c != '/') return n;
            std::size_t off = pos_++;
            Node rhs = parse_factor();
            Node b;
            b.kind = Node::Kind::binary;
            b.op = c;
            b.offset = off;
            b.kids.push_back(std::move(n));
            b.kids.push_back(std::move(rhs));
            n = std::move(b);
        }
    }

    Node parse_factor() {
        Node base = parse_base();
        if (peek() == '^') {
            std::size_t off = pos_++;
            Node rhs = parse_factor();  // right-associative
            Node b;
            b.kind = Node::Kind::binary;
            b.op = '^';
            b.offset = off;
            b.kids.push_back(std::move(base));
            b.kids.push_back(std::move(rhs));
            return b;
        }
        return base;
    }

    Node parse_base() {
        char c = peek();
        if (c == '\0') fail("expected operand", "number, identifier, '(' or '-'");

        if (c == '-') {
            Node n;
            n.kind = Node::Kind::neg;
            n.offset = pos_++;
            n.kids.push_back(parse_base());
            return n;
        }
        if (c == '(') {
            ++pos_;
            Node n = parse_expr();
            if (peek() != ')') fail("expected ')'", "')'");
            ++pos_;
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("unexpected character", "number, identifier, '(' or '-'");
    }

    Node parse_number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number", "number");
        Node n;
        n.kind = Node::Kind::number;
        n.value = v;
        n.offset = pos_;
        pos_ += static_cast<std::size_t>(end - begin);
        return n;
    }

    Node parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);

        int vi = var_index(name);
        if (vi >= 0) {
            Node n;
            n.kind = Node::Kind::variable;
            n.var = vi;
            n.offset = start;
            return n;
        }
        const Builtin* b = find_builtin(name);
        if (b == nullptr) {
            pos_ = start;
            fail("unknown identifier '" + name + "'", "variable t, u0..u9 or function name");
        }
        if (peek() != '(') fail("expected '(' after function name", "'('");
        ++pos_;
        Node n;
        n.kind = Node::Kind::call;
        n.fn = b->fn;
        n.offset = start;
        n.kids.push_back(parse_expr());
        while (peek() == ',') {
            ++pos_;
            n.kids.push_back(parse_expr());
        }
        if (peek() != ')') fail("expected ')'", "',' or ')'");
        ++pos_;
        if (static_cast<int>(n.kids.size()) != b->arity)
            throw parse_error("parse error at offset " + std::to_string(start) + ": " + name +
                                  " takes " + std::to_string(b->arity) + " argument(s)",
                              start, std::to_string(b->arity) + " argument(s)");
        return n;
    }
};

unsigned var_mask(const Node& n) {
    unsigned m = n.kind == Node::Kind::variable ? 1u << n.var : 0u;
    for (const Node& k : n.kids) m |= var_mask(k);
    return m;
}

}  // namespace

ExprFunc parse(const std::string& src) {
    if (src.empty()) throw parse_error("parse error at offset 0: empty input", 0, "expression");
    Parser p(src);
    ExprFunc f;
    f.ast_ = std::make_shared<Node>(p.run());
    f.source_ = src;
    f.used_ = var_mask(*f.ast_);
    f.arity_ = f.used_ == 0 ? 0 : std::bit_width(f.used_);
    return f;
}

namespace {

void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case Node::Kind::number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            break;
        }
        case Node::Kind::variable:
            out += var_name(n.var);
            break;
        case Node::Kind::neg:
            out += "(-";
            print_node(n.kids[0], out);
            out += ')';
            break;
        case Node::Kind::binary:
            out += '(';
            print_node(n.kids[0], out);
            out += n.op;
            print_node(n.kids[1], out);
            out += ')';
            break;
        case Node::Kind::call:
            for (const auto& b : kBuiltins)
                if (b.fn == n.fn) out += b.name;
            out += '(';
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out += ',';
                print_node(n.kids[i], out);
            }
            out += ')';
            break;
    }
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 1e15; }

double eval_node(const Node& n, const Env& env) {
    switch (n.kind) {
        case Node::Kind::number:
            return n.value;
        case Node::Kind::variable:
            if (!env.bound(n.var))
                throw eval_error("unbound variable " + var_name(n.var), n.offset);
            return env.get(n.var);
        case Node::Kind::neg:
            return -eval_node(n.kids[0], env);
        case Node::Kind::binary: {
            double a = eval_node(n.kids[0], env);
            double b = eval_node(n.kids[1], env);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if (b == 0.0) throw eval_error("division by zero", n.offset);
                    return a / b;
                case '^':
                    if (is_integer(b)) {
                        if (a == 0.0 && b < 0.0)
                            throw eval_error("zero raised to a negative power", n.offset);
                        return std::pow(a, b);
                    }
                    if (a <= 0.0)
                        throw eval_error("real exponent requires a positive base", n.offset);
                    return std::pow(a, b);
            }
            break;
        }
        case Node::Kind::call: {
            double a = eval_node(n.kids[0], env);
            switch (n.fn) {
                case Fn::abs: return std::fabs(a);
                case Fn::sqrt:
                    if (a < 0.0) throw eval_error("sqrt of a negative number", n.offset);
                    return std::sqrt(a);
                case Fn::exp: return std::exp(a);
                case Fn::ln:
                    if (a <= 0.0) throw eval_error("ln of a non-positive number", n.offset);
                    return std::log(a);
                case Fn::sin: return std::sin(a);
                case Fn::cos: return std::cos(a);
                case Fn::min: return std::min(a, eval_node(n.kids[1], env));
                case Fn::max: return std::max(a, eval_node(n.kids[1], env));
            }
            break;
        }
    }
    throw eval_error("malformed expression tree", n.offset);
}

DualValue dual_node(const Node& n, const Env& env, int seed) {
    switch (n.kind) {
        case Node::Kind::number:
            return {n.value, 0.0};
        case Node::Kind::variable:
            if (!env.bound(n.var))
                throw eval_error("unbound variable " + var_name(n.var), n.offset);
            return {env.get(n.var), n.var == seed ? 1.0 : 0.0};
        case Node::Kind::neg: {
            DualValue a = dual_node(n.kids[0], env, seed);
            return {-a.primal, -a.tangent};
        }
        case Node::Kind::binary: {
            DualValue a = dual_node(n.kids[0], env, seed);
            DualValue b = dual_node(n.kids[1], env, seed);
            switch (n.op) {
                case '+': return {a.primal + b.primal, a.tangent + b.tangent};
                case '-': return {a.primal - b.primal, a.tangent - b.tangent};
                case '*':
                    return {a.primal * b.primal, a.tangent * b.primal + a.primal * b.tangent};
                case '/': {
                    if (b.primal == 0.0) throw eval_error("division by zero", n.offset);
                    double v = a.primal / b.primal;
                    return {v, (a.tangent - v * b.tangent) / b.primal};
                }
                case '^': {
                    if (b.tangent == 0.0 && is_integer(b.primal)) {
                        double k = b.primal;
                        if (a.primal == 0.0 && k < 0.0)
                            throw eval_error("zero raised to a negative power", n.offset);
                        double v = std::pow(a.primal, k);
                        double dv;
                        if (k == 0.0) dv = 0.0;
                        else if (a.primal == 0.0) dv = (k == 1.0) ? a.tangent : 0.0;
                        else dv = k * std::pow(a.primal, k - 1.0) * a.tangent;
                        return {v, dv};
                    }
                    if (a.primal <= 0.0)
                        throw eval_error("real exponent requires a positive base", n.offset);
                    double v = std::pow(a.primal, b.primal);
                    double dv = v * (b.tangent * std::log(a.primal) +
                                     b.primal * a.tangent / a.primal);
                    return {v, dv};
                }
            }
            break;
        }
        case Node::Kind::call: {
            DualValue a = dual_node(n.kids[0], env, seed);
            switch (n.fn) {
                case Fn::abs:
                    if (a.primal > 0.0) return {a.primal, a.tangent};
                    if (a.primal < 0.0) return {-a.primal, -a.tangent};
                    return {0.0, 0.0};  // abs'(0) taken as 0 by convention
                case Fn::sqrt: {
                    if (a.primal < 0.0) throw eval_error("sqrt of a negative number", n.offset);
                    double v = std::sqrt(a.primal);
                    if (a.primal == 0.0) {
                        if (a.tangent != 0.0)
                            throw eval_error("sqrt not differentiable at 0", n.offset);
                        return {0.0, 0.0};
                    }
                    return {v, 0.5 * a.tangent / v};
                }
                case Fn::exp: {
                    double v = std::exp(a.primal);
                    return {v, v * a.tangent};
                }
                case Fn::ln:
                    if (a.primal <= 0.0)
                        throw eval_error("ln of a non-positive number", n.offset);
                    return {std::log(a.primal), a.tangent / a.primal};
                case Fn::sin: return {std::sin(a.primal), std::cos(a.primal) * a.tangent};
                case Fn::cos: return {std::cos(a.primal), -std::sin(a.primal) * a.tangent};
                case Fn::min: {
                    DualValue b = dual_node(n.kids[1], env, seed);
                    return a.primal <= b.primal ? a : b;
                }
                case Fn::max: {
                    DualValue b = dual_node(n.kids[1], env, seed);
                    return a.primal >= b.primal ? a : b;
                }
            }
            break;
        }
    }
    throw eval_error("malformed expression tree", n.offset);
}

bool override_matches(const Override& ov, const Env& env, double eps) {
    for (const auto& [slot, coord] : ov.point) {
        if (!env.bound(slot)) return false;
        double scale = std::max(1.0, std::fabs(coord));
        if (std::fabs(env.get(slot) - coord) > eps * scale) return false;
    }
    return !ov.point.empty();
}

}  // namespace

std::string print(const ExprFunc& f) {
    if (f.ast() == nullptr) return {};
    std::string out;
    print_node(*f.ast(), out);
    return out;
}

double eval(const ExprFunc& f, const Env& env) {
    if (f.ast() == nullptr) throw eval_error("empty expression");
    for (const Override& ov : f.overrides())
        if (override_matches(ov, env, f.match_eps())) return ov.value;
    double v = eval_node(*f.ast(), env);
    if (!std::isfinite(v)) throw eval_error("non-finite result");
    return v;
}

DualValue eval_dual(const ExprFunc& f, const Env& env, int seed_var) {
    if (f.ast() == nullptr) throw eval_error("empty expression");
    for (const Override& ov : f.overrides())
        if (override_matches(ov, env, f.match_eps()))
            throw domain_error("override point carries no derivative");
    DualValue v = dual_node(*f.ast(), env, seed_var);
    if (!std::isfinite(v.primal) || !std::isfinite(v.tangent))
        throw eval_error("non-finite result");
    return v;
}

DualValue eval_dual(const ExprFunc& f, const Env& env, const std::string& seed_var) {
    int idx = var_index(seed_var);
    if (idx < 0) throw std::invalid_argument("unknown variable: " + seed_var);
    return eval_dual(f, env, idx);
}

namespace {

bool same_node(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    switch (a.kind) {
        case Node::Kind::number:
            if (a.value != b.value) return false;
            break;
        case Node::Kind::variable:
            if (a.var != b.var) return false;
            break;
        case Node::Kind::binary:
            if (a.op != b.op) return false;
            break;
        case Node::Kind::call:
            if (a.fn != b.fn) return false;
            break;
        case Node::Kind::neg:
            break;
    }
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!same_node(a.kids[i], b.kids[i])) return false;
    return true;
}

}  // namespace

bool same_tree(const ExprFunc& a, const ExprFunc& b) {
    if (a.ast() == nullptr || b.ast() == nullptr) return a.ast() == b.ast();
    return same_node(*a.ast(), *b.ast());
}

}  // namespace qcalc::expr
