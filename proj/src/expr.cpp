#include "affgebroid/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace affgebroid {

namespace {

std::shared_ptr<ExprNode> make(Op op) { return std::make_shared<ExprNode>(op); }

const char* op_name(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Tan: return "tan";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Sinh: return "sinh";
        case Op::Cosh: return "cosh";
        case Op::Tanh: return "tanh";
        default: return "?";
    }
}

double fold_unary(Op op, double a) {
    switch (op) {
        case Op::Neg: return -a;
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        case Op::Tan: return std::tan(a);
        case Op::Exp: return std::exp(a);
        case Op::Log: return std::log(a);
        case Op::Sqrt: return std::sqrt(a);
        case Op::Sinh: return std::sinh(a);
        case Op::Cosh: return std::cosh(a);
        case Op::Tanh: return std::tanh(a);
        default: throw InputError("not a unary operator");
    }
}

}  // namespace

Expr Expr::constant(double c) {
    auto n = std::make_shared<ExprNode>(Op::Const);
    n->c = c;
    return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index) {
    auto n = std::make_shared<ExprNode>(Op::Var);
    n->var = index;
    return Expr(std::move(n));
}

bool Expr::is_constant() const { return node_->op == Op::Const; }

double Expr::constant_value() const {
    if (!is_constant()) throw InputError("expression is not constant");
    return node_->c;
}

std::size_t Expr::arity_hint() const {
    switch (node_->op) {
        case Op::Const: return 0;
        case Op::Var: return node_->var + 1;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow: return std::max(node_->a.arity_hint(), node_->b.arity_hint());
        default: return node_->a.arity_hint();
    }
}

// Constructors fold constants and drop additive/multiplicative identities so
// that derivative-free structure functions stay on the constant fast path.

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node_->c + b.node_->c);
    if (a.is_constant() && a.node_->c == 0.0) return b;
    if (b.is_constant() && b.node_->c == 0.0) return a;
    auto n = make(Op::Add);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node_->c - b.node_->c);
    if (b.is_constant() && b.node_->c == 0.0) return a;
    if (a.is_constant() && a.node_->c == 0.0) return -b;
    auto n = make(Op::Sub);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node_->c * b.node_->c);
    if ((a.is_constant() && a.node_->c == 0.0) || (b.is_constant() && b.node_->c == 0.0))
        return Expr::constant(0.0);
    if (a.is_constant() && a.node_->c == 1.0) return b;
    if (b.is_constant() && b.node_->c == 1.0) return a;
    auto n = make(Op::Mul);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node_->c / b.node_->c);
    if (b.is_constant() && b.node_->c == 1.0) return a;
    auto n = make(Op::Div);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.node_->c);
    auto n = make(Op::Neg);
    n->a = a;
    return Expr(std::move(n));
}

Expr pow(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(std::pow(a.node_->c, b.node_->c));
    if (b.is_constant()) {
        double e = b.node_->c;
        if (e == 1.0) return a;
        if (e == 0.0) return Expr::constant(1.0);
        auto n = make(std::trunc(e) == e && std::abs(e) <= 64 ? Op::PowInt : Op::PowReal);
        n->a = a;
        n->c = e;
        n->var = 0;
        return Expr(std::move(n));
    }
    auto n = make(Op::Pow);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr unary(Op op, const Expr& a) {
    if (a.is_constant()) return Expr::constant(fold_unary(op, a.node_->c));
    auto n = make(op);
    n->a = a;
    return Expr(std::move(n));
}

std::string Expr::to_string() const {
    std::ostringstream os;
    os.precision(17);
    const ExprNode& n = *node_;
    switch (n.op) {
        case Op::Const: os << n.c; break;
        case Op::Var: os << "v" << n.var; break;
        case Op::Add: os << "(" << n.a.to_string() << " + " << n.b.to_string() << ")"; break;
        case Op::Sub: os << "(" << n.a.to_string() << " - " << n.b.to_string() << ")"; break;
        case Op::Mul: os << "(" << n.a.to_string() << " * " << n.b.to_string() << ")"; break;
        case Op::Div: os << "(" << n.a.to_string() << " / " << n.b.to_string() << ")"; break;
        case Op::Neg: os << "(-" << n.a.to_string() << ")"; break;
        case Op::PowInt:
        case Op::PowReal: os << "(" << n.a.to_string() << " ^ " << n.c << ")"; break;
        case Op::Pow: os << "(" << n.a.to_string() << " ^ " << n.b.to_string() << ")"; break;
        default: os << op_name(n.op) << "(" << n.a.to_string() << ")"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------

Tape::Tape(const Expr& e) {
    std::unordered_map<const ExprNode*, int> seen;
    std::size_t arity = e.arity_hint();
    depends_.assign(arity, false);

    auto emit = [&](auto&& self, const Expr& x) -> int {
        const ExprNode* key = x.handle().get();
        if (auto it = seen.find(key); it != seen.end()) return it->second;
        const ExprNode& n = *key;
        Instr in{n.op};
        switch (n.op) {
            case Op::Const: in.c = n.c; break;
            case Op::Var:
                in.k = static_cast<int>(n.var);
                depends_[n.var] = true;
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                in.a = self(self, n.a);
                in.b = self(self, n.b);
                break;
            case Op::PowInt:
                in.a = self(self, n.a);
                in.k = static_cast<int>(n.c);
                break;
            case Op::PowReal:
                in.a = self(self, n.a);
                in.c = n.c;
                break;
            default: in.a = self(self, n.a); break;
        }
        code_.push_back(in);
        int idx = static_cast<int>(code_.size()) - 1;
        seen.emplace(key, idx);
        return idx;
    };
    emit(emit, e);
    constant_ = e.is_constant();
}

// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars,
           const std::map<std::string, double>& consts)
        : s_(text), vars_(vars), consts_(consts) {}

    Expr parse() {
        Expr e = expression();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression \"" + std::string(s_) + "\" at column " +
                         std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expression() {
        Expr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = lhs + term();
            else if (accept('-'))
                lhs = lhs - term();
            else
                return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary_expr();
        for (;;) {
            if (accept('*'))
                lhs = lhs * unary_expr();
            else if (accept('/'))
                lhs = lhs / unary_expr();
            else
                return lhs;
        }
    }

    // Unary minus binds looser than '^' so that -x^2 == -(x^2).
    Expr unary_expr() {
        if (accept('-')) return -unary_expr();
        if (accept('+')) return unary_expr();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return pow(base, unary_expr());
        return base;
    }

    Expr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (accept('(')) {
            Expr e = expression();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expr number() {
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        std::string tmp(begin, s_.size() - pos_);
        double v = std::strtod(tmp.c_str(), &end);
        std::size_t used = static_cast<std::size_t>(end - tmp.c_str());
        if (used == 0) fail("malformed number");
        pos_ += used;
        return Expr::constant(v);
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name(s_.substr(start, pos_ - start));

        static const std::map<std::string, Op> functions = {
            {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},
            {"exp", Op::Exp},   {"log", Op::Log},   {"sqrt", Op::Sqrt},
            {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
        };
        skip();
        bool call = pos_ < s_.size() && s_[pos_] == '(';
        if (call) {
            if (name == "pow") {
                expect('(');
                Expr a = expression();
                expect(',');
                Expr b = expression();
                expect(')');
                return pow(a, b);
            }
            auto f = functions.find(name);
            if (f == functions.end()) {
                pos_ = start;
                fail("unknown function '" + name + "'");
            }
            expect('(');
            Expr a = expression();
            expect(')');
            return unary(f->second, a);
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return Expr::variable(i);
        if (auto it = consts_.find(name); it != consts_.end()) return Expr::constant(it->second);
        if (name == "pi") return Expr::constant(std::numbers::pi);
        if (name == "e") return Expr::constant(std::numbers::e);
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    std::string_view s_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& consts_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const std::vector<std::string>& variables,
                      const std::map<std::string, double>& constants) {
    return Parser(text, variables, constants).parse();
}

}  // namespace affgebroid
