#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace qcalc::expr {

// Variable slots: index 0 is "t", index k+1 is "uk" for k = 0..9.
inline constexpr int kMaxVars = 11;

int var_index(const std::string& name);   // -1 when the name is not a variable
std::string var_name(int index);

// Variable binding environment.  All evaluation errors mention unbound slots.
class Env {
public:
    Env() = default;
    Env(std::initializer_list<std::pair<const char*, double>> bindings);

    Env& set(int index, double value);
    Env& set(const std::string& name, double value);
    bool bound(int index) const { return bound_[index]; }
    double get(int index) const { return values_[index]; }

private:
    double values_[kMaxVars] = {};
    bool bound_[kMaxVars] = {};
};

// Forward-mode derivative carrier: arithmetic obeys the chain rule exactly for
// the supported function set.
struct DualValue {
    double primal = 0.0;
    double tangent = 0.0;
};

struct Node;

// A point override: the function takes `value` whenever every listed coordinate
// matches the environment within match_eps * max(1, |coordinate|).
struct Override {
    std::vector<std::pair<int, double>> point;  // (variable slot, coordinate)
    double value = 0.0;
};

// Parsed function of t, u0..u9 with a finite set of point-value overrides.
// Immutable once built (add overrides before sharing across threads).
class ExprFunc {
public:
    ExprFunc() = default;

    const Node* ast() const { return ast_.get(); }
    const std::string& source() const { return source_; }
    const std::vector<Override>& overrides() const { return overrides_; }
    double match_eps() const { return match_eps_; }

    // Highest variable slot used plus one (0 for constant expressions).
    int arity() const { return arity_; }
    // Whether the given slot actually appears in the tree (gaps don't count).
    bool uses(int index) const;

    ExprFunc& add_override(Override ov);
    ExprFunc& add_override(const std::string& var, double coord, double value);
    ExprFunc& set_match_eps(double eps);

private:
    friend ExprFunc parse(const std::string& src);
    std::shared_ptr<const Node> ast_;
    std::string source_;
    std::vector<Override> overrides_;
    double match_eps_ = 1e-12;
    int arity_ = 0;
    unsigned used_ = 0;  // bit i set when slot i appears in the tree
};

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?            -- right-associative
//   base   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')' | '-' base
// Identifiers: variables t, u0..u9; functions abs, sqrt, exp, ln, sin, cos, min, max.
// Throws parse_error with a byte offset and the expected-token set.
ExprFunc parse(const std::string& src);

// Canonical text for the tree; parse(print(f)) reproduces the tree exactly.
std::string print(const ExprFunc& f);

// Override lookup first, then tree evaluation.  Throws eval_error on undefined
// operations and on unbound variables.
double eval(const ExprFunc& f, const Env& env);

// Tangent equals the exact partial derivative with respect to seed_var.
// Points matched by an override carry no derivative: domain_error.
DualValue eval_dual(const ExprFunc& f, const Env& env, int seed_var);
DualValue eval_dual(const ExprFunc& f, const Env& env, const std::string& seed_var);

// Structural tree equality (ignores overrides).
bool same_tree(const ExprFunc& a, const ExprFunc& b);

}  // namespace qcalc::expr
