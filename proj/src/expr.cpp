#include "fractus/expr.hpp"

#include "fractus/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

namespace fractus {

bool ExprNode::operator==(const ExprNode& o) const {
    if (kind != o.kind) return false;
    const auto same = [](const std::shared_ptr<const ExprNode>& a, const std::shared_ptr<const ExprNode>& b) {
        return (!a && !b) || (a && b && *a == *b);
    };
    switch (kind) {
    case Kind::constant: return value == o.value;
    case Kind::variable: return var == o.var;
    case Kind::unary: return func == o.func && same(lhs, o.lhs);
    case Kind::binary: return op == o.op && value == o.value && same(lhs, o.lhs) && same(rhs, o.rhs);
    }
    return false;
}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::constant;
    n->value = v;
    return n;
}

class Parser {
public:
    Parser(std::string_view s, std::size_t m) : s_(s), m_(m) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at offset " + std::to_string(pos_), pos_);
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

    static NodePtr binary(char op, NodePtr l, NodePtr r, double exponent = 0.0) {
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::binary;
        n->op = op;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        n->value = exponent;
        return n;
    }

    NodePtr expr() {
        NodePtr l = term();
        for (;;) {
            if (accept('+')) l = binary('+', l, term());
            else if (accept('-')) l = binary('-', l, term());
            else return l;
        }
    }

    NodePtr term() {
        NodePtr l = factor();
        for (;;) {
            if (accept('*')) l = binary('*', l, factor());
            else if (accept('/')) l = binary('/', l, factor());
            else return l;
        }
    }

    NodePtr factor() {
        NodePtr b = base();
        if (accept('^')) {
            skip();
            const double p = number();
            return binary('^', b, make_const(p), p);
        }
        return b;
    }

    double number() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto [end, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (pos_ == start || ec != std::errc() || end != s_.data() + pos_) {
            pos_ = start;
            fail("expected a number");
        }
        return v;
    }

    NodePtr base() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::unary;
            n->func = ExprNode::Func::neg;
            n->lhs = base();
            return n;
        }
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_const(number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            static const std::pair<std::string_view, ExprNode::Func> funcs[] = {
                {"sin", ExprNode::Func::sin},   {"cos", ExprNode::Func::cos}, {"exp", ExprNode::Func::exp},
                {"sqrt", ExprNode::Func::sqrt}, {"abs", ExprNode::Func::abs},
            };
            for (const auto& [name, f] : funcs)
                if (id == name) {
                    expect('(');
                    auto n = std::make_shared<ExprNode>();
                    n->kind = ExprNode::Kind::unary;
                    n->func = f;
                    n->lhs = expr();
                    expect(')');
                    return n;
                }
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::variable;
            if (id == "t") {
                n->var = 0;
                return n;
            }
            if (id.size() > 1 && id[0] == 'x' && id[1] != '0') {
                std::size_t k = 0;
                const auto [end, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
                if (ec == std::errc() && end == id.data() + id.size() && k >= 1 && k <= m_) {
                    n->var = static_cast<int>(k);
                    return n;
                }
            }
            throw UnknownIdentifierError("unknown identifier '" + std::string(id) + "' at offset " +
                                             std::to_string(start),
                                         start);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::size_t m_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
    case ExprNode::Kind::constant: out += format_number(n.value); return;
    case ExprNode::Kind::variable: out += n.var == 0 ? "t" : "x" + std::to_string(n.var); return;
    case ExprNode::Kind::unary: {
        static const char* names[] = {"-", "sin", "cos", "exp", "sqrt", "abs"};
        out += names[static_cast<int>(n.func)];
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
        return;
    }
    case ExprNode::Kind::binary:
        out += '(';
        print_node(*n.lhs, out);
        out += ' ';
        out += n.op;
        out += ' ';
        if (n.op == '^') out += format_number(n.value);
        else print_node(*n.rhs, out);
        out += ')';
        return;
    }
}

bool any_var(const ExprNode& n, const std::function<bool(int)>& pred) {
    if (n.kind == ExprNode::Kind::variable) return pred(n.var);
    return (n.lhs && any_var(*n.lhs, pred)) || (n.op != '^' && n.rhs && any_var(*n.rhs, pred));
}

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
    return v;
}

double eval_node(const ExprNode& n, const Vector& x, double t) {
    switch (n.kind) {
    case ExprNode::Kind::constant: return n.value;
    case ExprNode::Kind::variable: return n.var == 0 ? t : x[static_cast<std::size_t>(n.var - 1)];
    case ExprNode::Kind::unary: {
        const double u = eval_node(*n.lhs, x, t);
        switch (n.func) {
        case ExprNode::Func::neg: return -u;
        case ExprNode::Func::sin: return checked(std::sin(u), "sin");
        case ExprNode::Func::cos: return checked(std::cos(u), "cos");
        case ExprNode::Func::exp: return checked(std::exp(u), "exp");
        case ExprNode::Func::sqrt:
            if (u < 0.0) throw EvalError("sqrt of a negative number");
            return std::sqrt(u);
        case ExprNode::Func::abs: return std::abs(u);
        }
        return u;
    }
    case ExprNode::Kind::binary: {
        const double l = eval_node(*n.lhs, x, t);
        if (n.op == '^') return checked(std::pow(l, n.value), "'^'");
        const double r = eval_node(*n.rhs, x, t);
        switch (n.op) {
        case '+': return checked(l + r, "'+'");
        case '-': return checked(l - r, "'-'");
        case '*': return checked(l * r, "'*'");
        case '/':
            if (r == 0.0) throw EvalError("division by zero");
            return checked(l / r, "'/'");
        }
    }
    }
    throw EvalError("malformed expression");
}

} // namespace

bool Expr::uses_time() const {
    return root_ && any_var(*root_, [](int v) { return v == 0; });
}

bool Expr::uses_state() const {
    return root_ && any_var(*root_, [](int v) { return v > 0; });
}

Expr parse_expr(std::string_view src, std::size_t m) {
    return Expr(Parser(src, m).parse(), m);
}

std::string print_expr(const Expr& e) {
    std::string out;
    if (!e.empty()) print_node(e.root(), out);
    return out;
}

double eval_expr(const Expr& e, const Vector& x, double t) {
    if (e.empty()) throw EvalError("empty expression");
    if (x.size() < e.dimension()) throw DimensionError("eval_expr: state has fewer entries than the expression dimension");
    return eval_node(e.root(), x, t);
}

} // namespace fractus
