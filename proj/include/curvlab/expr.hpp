#pragma once

// Expression DSL for metric components and 1-forms.
//
// Grammar (whitespace insignificant, no implicit multiplication):
//
//   expr    := term (("+" | "-") term)*
//   term    := factor (("*" | "/") factor)*
//   factor  := "-" factor | power
//   power   := atom ("^" factor)?            -- right associative
//   atom    := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//
// so ^ binds tighter than unary minus, which binds tighter than * and /.
// Known functions: sin cos tan exp log sqrt sinh cosh tanh.

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "curvlab/errors.hpp"
#include "curvlab/jet.hpp"

namespace curvlab {

enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct NumberLit {
    double value;
};
struct SymbolRef {
    std::string name;
};
struct UnaryNode {
    UnaryOp op;
    ExprPtr child;
};
struct BinaryNode {
    BinaryOp op;
    ExprPtr lhs, rhs;
};

struct ExprNode {
    std::variant<NumberLit, SymbolRef, UnaryNode, BinaryNode> v;
};

inline ExprPtr make_number(double x) { return std::make_shared<ExprNode>(ExprNode{NumberLit{x}}); }
inline ExprPtr make_symbol(std::string name) {
    return std::make_shared<ExprNode>(ExprNode{SymbolRef{std::move(name)}});
}
inline ExprPtr make_unary(UnaryOp op, ExprPtr c) {
    return std::make_shared<ExprNode>(ExprNode{UnaryNode{op, std::move(c)}});
}
inline ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    return std::make_shared<ExprNode>(ExprNode{BinaryNode{op, std::move(a), std::move(b)}});
}

inline const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "neg";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Tan: return "tan";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
    }
    return "?";
}

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError("unexpected trailing input '" +
                                 std::string(src_.substr(pos_, 8)) + "'",
                             pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                src_[pos_] == '\r'))
            ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    bool accept(char c) {
        if (peek_is(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        while (true) {
            if (accept('+'))
                lhs = make_binary(BinaryOp::Add, lhs, parse_term());
            else if (accept('-'))
                lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (true) {
            if (accept('*'))
                lhs = make_binary(BinaryOp::Mul, lhs, parse_factor());
            else if (accept('/'))
                lhs = make_binary(BinaryOp::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    ExprPtr parse_factor() {
        if (accept('-')) return make_unary(UnaryOp::Neg, parse_factor());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (accept('^')) return make_binary(BinaryOp::Pow, base, parse_factor());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError("expected a number, identifier or '('", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_ident_start(c)) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9');
    }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && is_digit(src_[pos_])) {
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            } else {
                pos_ = mark; // 'e' belongs to something else; not a valid exponent
            }
        }
        double value = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw ParseError("malformed numeric literal", start);
        return make_number(value);
    }

    ExprPtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (accept('(')) {
            UnaryOp op;
            if (name == "sin") op = UnaryOp::Sin;
            else if (name == "cos") op = UnaryOp::Cos;
            else if (name == "tan") op = UnaryOp::Tan;
            else if (name == "exp") op = UnaryOp::Exp;
            else if (name == "log") op = UnaryOp::Log;
            else if (name == "sqrt") op = UnaryOp::Sqrt;
            else if (name == "sinh") op = UnaryOp::Sinh;
            else if (name == "cosh") op = UnaryOp::Cosh;
            else if (name == "tanh") op = UnaryOp::Tanh;
            else throw ParseError("unknown function '" + name + "'", start);
            if (peek_is(')')) throw ParseError("empty call argument", pos_);
            ExprPtr arg = parse_expr();
            if (!accept(')')) throw ParseError("expected ')' after call argument", pos_);
            return make_unary(op, arg);
        }
        return make_symbol(std::move(name));
    }
};

} // namespace detail

inline ExprPtr parse_expression(std::string_view text) {
    return detail::Parser(text).parse();
}

/// Canonical text form; parsing it back yields an expression with
/// identical evaluation (literals printed with round-trip precision).
inline std::string to_string(const ExprPtr& e);

namespace detail {

inline std::string format_double(double x) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

// Parenthesize by precedence: 0 add, 1 mul, 2 unary-, 3 pow, 4 atom.
inline int precedence(const ExprPtr& e) {
    if (std::holds_alternative<NumberLit>(e->v)) {
        return std::get<NumberLit>(e->v).value < 0 ? 2 : 4;
    }
    if (std::holds_alternative<SymbolRef>(e->v)) return 4;
    if (std::holds_alternative<UnaryNode>(e->v))
        return std::get<UnaryNode>(e->v).op == UnaryOp::Neg ? 2 : 4;
    switch (std::get<BinaryNode>(e->v).op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 0;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 1;
        case BinaryOp::Pow: return 3;
    }
    return 4;
}

inline std::string print_child(const ExprPtr& c, int min_prec) {
    std::string s = to_string(c);
    if (precedence(c) < min_prec) return "(" + s + ")";
    return s;
}

} // namespace detail

inline std::string to_string(const ExprPtr& e) {
    using namespace detail;
    if (const auto* n = std::get_if<NumberLit>(&e->v)) return format_double(n->value);
    if (const auto* s = std::get_if<SymbolRef>(&e->v)) return s->name;
    if (const auto* u = std::get_if<UnaryNode>(&e->v)) {
        if (u->op == UnaryOp::Neg) return "-" + print_child(u->child, 2);
        return std::string(unary_name(u->op)) + "(" + to_string(u->child) + ")";
    }
    const auto& b = std::get<BinaryNode>(e->v);
    switch (b.op) {
        case BinaryOp::Add: return print_child(b.lhs, 0) + "+" + print_child(b.rhs, 1);
        case BinaryOp::Sub: return print_child(b.lhs, 0) + "-" + print_child(b.rhs, 1);
        case BinaryOp::Mul: return print_child(b.lhs, 1) + "*" + print_child(b.rhs, 2);
        case BinaryOp::Div: return print_child(b.lhs, 1) + "/" + print_child(b.rhs, 2);
        case BinaryOp::Pow: return print_child(b.lhs, 4) + "^" + print_child(b.rhs, 3);
    }
    return "?";
}

/// Evaluation environment: chart coordinates carry seeded jets,
/// parameters are plain constants.  Name sets must be disjoint.
struct EvalEnv {
    std::map<std::string, Jet> coordinates;
    std::map<std::string, double> parameters;
    int dim = 0;
    int order = 0;

    static EvalEnv at_point(const std::vector<std::string>& coord_names,
                            std::span<const double> point, int order,
                            const std::map<std::string, double>& params = {}) {
        if (coord_names.size() != point.size())
            throw InputError("point dimension does not match chart");
        EvalEnv env;
        env.dim = static_cast<int>(coord_names.size());
        env.order = order;
        for (std::size_t i = 0; i < coord_names.size(); ++i) {
            if (params.count(coord_names[i]))
                throw InputError("name '" + coord_names[i] +
                                 "' is both a coordinate and a parameter");
            env.coordinates.emplace(
                coord_names[i],
                Jet::variable(env.dim, order, point[i], static_cast<int>(i)));
        }
        env.parameters = params;
        return env;
    }
};

namespace detail {

inline bool expr_has_symbol(const ExprPtr& e) {
    if (std::holds_alternative<SymbolRef>(e->v)) return true;
    if (const auto* u = std::get_if<UnaryNode>(&e->v)) return expr_has_symbol(u->child);
    if (const auto* b = std::get_if<BinaryNode>(&e->v))
        return expr_has_symbol(b->lhs) || expr_has_symbol(b->rhs);
    return false;
}

inline double eval_constant(const ExprPtr& e);

template <typename T, typename MakeConst, typename LookupSym>
T eval_generic(const ExprPtr& e, const MakeConst& make_const, const LookupSym& lookup) {
    if (const auto* n = std::get_if<NumberLit>(&e->v)) return make_const(n->value);
    if (const auto* s = std::get_if<SymbolRef>(&e->v)) return lookup(s->name);
    if (const auto* u = std::get_if<UnaryNode>(&e->v)) {
        T c = eval_generic<T>(u->child, make_const, lookup);
        using std::cos;
        using std::cosh;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sinh;
        using std::sqrt;
        using std::tan;
        using std::tanh;
        switch (u->op) {
            case UnaryOp::Neg: return -c;
            case UnaryOp::Sin: return sin(c);
            case UnaryOp::Cos: return cos(c);
            case UnaryOp::Tan: return tan(c);
            case UnaryOp::Exp: return exp(c);
            case UnaryOp::Log: return log(c);
            case UnaryOp::Sqrt: return sqrt(c);
            case UnaryOp::Sinh: return sinh(c);
            case UnaryOp::Cosh: return cosh(c);
            case UnaryOp::Tanh: return tanh(c);
        }
    }
    const auto& b = std::get<BinaryNode>(e->v);
    if (b.op == BinaryOp::Pow) {
        // Constant exponents keep full generality of the base (integer
        // powers via repeated multiplication); varying exponents go
        // through exp(q*log(p)).
        if (!expr_has_symbol(b.rhs)) {
            T base = eval_generic<T>(b.lhs, make_const, lookup);
            double q = eval_constant(b.rhs);
            using std::pow;
            return pow(base, q);
        }
        T base = eval_generic<T>(b.lhs, make_const, lookup);
        T expo = eval_generic<T>(b.rhs, make_const, lookup);
        using std::pow;
        return pow(base, expo);
    }
    T lhs = eval_generic<T>(b.lhs, make_const, lookup);
    T rhs = eval_generic<T>(b.rhs, make_const, lookup);
    switch (b.op) {
        case BinaryOp::Add: return lhs + rhs;
        case BinaryOp::Sub: return lhs - rhs;
        case BinaryOp::Mul: return lhs * rhs;
        default: break;
    }
    return lhs / rhs;
}

inline double eval_constant(const ExprPtr& e) {
    return eval_generic<double>(
        e, [](double v) { return v; },
        [](const std::string& name) -> double {
            throw InputError("symbol '" + name + "' in a constant context");
        });
}

} // namespace detail

/// Jet-valued evaluation at the point encoded by env.
inline Jet eval_jet(const ExprPtr& e, const EvalEnv& env) {
    try {
        return detail::eval_generic<Jet>(
            e,
            [&](double v) { return Jet::constant(env.dim, env.order, v); },
            [&](const std::string& name) -> Jet {
                auto it = env.coordinates.find(name);
                if (it != env.coordinates.end()) return it->second;
                auto pt = env.parameters.find(name);
                if (pt != env.parameters.end())
                    return Jet::constant(env.dim, env.order, pt->second);
                throw InputError("unbound symbol '" + name + "'");
            });
    } catch (const EvalError& err) {
        throw EvalError(std::string(err.what()) + " while evaluating '" +
                        to_string(e) + "'");
    }
}

/// Plain-number evaluation (used by finite-difference oracles and as the
/// order-0 cross-check for eval_jet).
inline double eval_value(const ExprPtr& e, const std::map<std::string, double>& bindings) {
    return detail::eval_generic<double>(
        e, [](double v) { return v; },
        [&](const std::string& name) -> double {
            auto it = bindings.find(name);
            if (it == bindings.end()) throw InputError("unbound symbol '" + name + "'");
            return it->second;
        });
}

} // namespace curvlab
