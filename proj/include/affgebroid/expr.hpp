#pragma once

// Expression trees over indexed variables, compiled to a flat tape that can be
// evaluated on doubles or on (nested) dual numbers.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "affgebroid/dual.hpp"
#include "affgebroid/errors.hpp"

namespace affgebroid {

enum class Op {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    PowInt,
    PowReal,
    Pow,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
};

struct ExprNode;

class Expr {
public:
    Expr() : Expr(constant(0.0)) {}
    /// Empty handle used for the unused children of leaf nodes.
    explicit Expr(std::nullptr_t) {}

    static Expr constant(double c);
    static Expr variable(std::size_t index);

    bool is_constant() const;
    /// Value of a constant expression; throws if the expression has variables.
    double constant_value() const;
    /// One past the largest variable index used, 0 for constants.
    std::size_t arity_hint() const;

    const ExprNode& node() const { return *node_; }
    const std::shared_ptr<const ExprNode>& handle() const { return node_; }

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& a, const Expr& b);
    friend Expr unary(Op op, const Expr& a);

    std::string to_string() const;

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    Op op;
    double c = 0.0;
    std::size_t var = 0;
    Expr a{nullptr};
    Expr b{nullptr};
    explicit ExprNode(Op o) : op(o) {}
};

Expr unary(Op op, const Expr& a);
inline Expr sin(const Expr& a) { return unary(Op::Sin, a); }
inline Expr cos(const Expr& a) { return unary(Op::Cos, a); }
inline Expr exp(const Expr& a) { return unary(Op::Exp, a); }
inline Expr log(const Expr& a) { return unary(Op::Log, a); }
inline Expr sqrt(const Expr& a) { return unary(Op::Sqrt, a); }

/// Flat evaluation program for an Expr. Shared subtrees are evaluated once.
class Tape {
public:
    struct Instr {
        Op op;
        int a = -1;
        int b = -1;
        double c = 0.0;
        int k = 0;
    };

    explicit Tape(const Expr& e);

    bool is_constant() const { return constant_; }
    const std::vector<bool>& depends() const { return depends_; }

    template <typename T>
    T eval(const T* vars) const;

private:
    std::vector<Instr> code_;
    std::vector<bool> depends_;
    bool constant_ = false;
};

/// Parse an arithmetic expression. Identifiers resolve first to `variables`
/// (yielding Expr::variable(index)), then to `constants`, then to pi and e.
/// Supported: + - * / ^, unary minus, sin cos tan exp log sqrt sinh cosh tanh,
/// pow(a, b).
Expr parse_expression(std::string_view text, const std::vector<std::string>& variables,
                      const std::map<std::string, double>& constants = {});

// ---------------------------------------------------------------------------

template <typename T>
T Tape::eval(const T* vars) const {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    using std::tan;
    using std::tanh;
    std::vector<T> r(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        switch (in.op) {
            case Op::Const: r[i] = T(in.c); break;
            case Op::Var: r[i] = vars[in.k]; break;
            case Op::Add: r[i] = r[in.a] + r[in.b]; break;
            case Op::Sub: r[i] = r[in.a] - r[in.b]; break;
            case Op::Mul: r[i] = r[in.a] * r[in.b]; break;
            case Op::Div: r[i] = r[in.a] / r[in.b]; break;
            case Op::Neg: r[i] = -r[in.a]; break;
            case Op::PowInt: r[i] = ipow(r[in.a], in.k); break;
            case Op::PowReal: r[i] = pow(r[in.a], in.c); break;
            case Op::Pow: r[i] = pow(r[in.a], r[in.b]); break;
            case Op::Sin: r[i] = sin(r[in.a]); break;
            case Op::Cos: r[i] = cos(r[in.a]); break;
            case Op::Tan: r[i] = tan(r[in.a]); break;
            case Op::Exp: r[i] = exp(r[in.a]); break;
            case Op::Log: r[i] = log(r[in.a]); break;
            case Op::Sqrt: r[i] = sqrt(r[in.a]); break;
            case Op::Sinh: r[i] = sinh(r[in.a]); break;
            case Op::Cosh: r[i] = cosh(r[in.a]); break;
            case Op::Tanh: r[i] = tanh(r[in.a]); break;
        }
    }
    return r.back();
}

}  // namespace affgebroid
