#include "movingns/expr.hpp"

#include <cctype>
#include <cstdlib>

namespace movingns::expr {

namespace {

struct Token {
    enum Kind { number, ident, op, lparen, rparen, end } kind;
    double value = 0.0;
    std::string text;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* endp = nullptr;
            const double v = std::strtod(s.c_str() + i, &endp);
            out.push_back({Token::number, v, {}});
            i = static_cast<size_t>(endp - s.c_str());
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                ++j;
            out.push_back({Token::ident, 0.0, s.substr(i, j - i)});
            i = j;
        } else if (c == '(') {
            out.push_back({Token::lparen, 0.0, {}});
            ++i;
        } else if (c == ')') {
            out.push_back({Token::rparen, 0.0, {}});
            ++i;
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            out.push_back({Token::op, 0.0, std::string(1, c)});
            ++i;
        } else {
            throw ParseError("unexpected character '" + std::string(1, c) + "' in expression", 0);
        }
    }
    out.push_back({Token::end, 0.0, {}});
    return out;
}

}  // namespace

class Parser {
  public:
    Parser(std::vector<Token> toks, const std::vector<std::string>& vars, Expression& out)
        : toks_(std::move(toks)), vars_(vars), out_(out) {}

    int run() {
        const int r = parse_expr();
        if (peek().kind != Token::end) throw ParseError("trailing input in expression", 0);
        return r;
    }

  private:
    using Op = Expression::Op;

    const Token& peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }
    bool accept_op(const char* text) {
        if (peek().kind == Token::op && peek().text == text) {
            ++pos_;
            return true;
        }
        return false;
    }

    int make(Op op, int lhs = -1, int rhs = -1, double value = 0.0, int index = -1) {
        out_.nodes_.push_back({op, value, index, lhs, rhs});
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept_op("+"))
                lhs = make(Op::add, lhs, parse_term());
            else if (accept_op("-"))
                lhs = make(Op::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept_op("*"))
                lhs = make(Op::mul, lhs, parse_unary());
            else if (accept_op("/"))
                lhs = make(Op::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    int parse_unary() {
        if (accept_op("-")) return make(Op::neg, parse_unary());
        return parse_power();
    }

    int parse_power() {
        const int base = parse_primary();
        if (accept_op("^")) return make(Op::pow_, base, parse_unary());
        return base;
    }

    int parse_primary() {
        Token t = take();
        if (t.kind == Token::number) return make(Op::constant, -1, -1, t.value);
        if (t.kind == Token::lparen) {
            const int e = parse_expr();
            if (take().kind != Token::rparen) throw ParseError("missing ')'", 0);
            return e;
        }
        if (t.kind == Token::ident) {
            if (peek().kind == Token::lparen) {
                ++pos_;
                const int arg = parse_expr();
                if (take().kind != Token::rparen) throw ParseError("missing ')'", 0);
                if (t.text == "sin") return make(Op::fsin, arg);
                if (t.text == "cos") return make(Op::fcos, arg);
                if (t.text == "tan") return make(Op::ftan, arg);
                if (t.text == "exp") return make(Op::fexp, arg);
                if (t.text == "log") return make(Op::flog, arg);
                if (t.text == "sqrt") return make(Op::fsqrt, arg);
                if (t.text == "abs") return make(Op::fabs_, arg);
                throw ParseError("unknown function '" + t.text + "'", 0);
            }
            if (t.text == "pi") return make(Op::constant, -1, -1, M_PI);
            for (size_t v = 0; v < vars_.size(); ++v)
                if (vars_[v] == t.text)
                    return make(Op::variable, -1, -1, 0.0, static_cast<int>(v));
            throw ParseError("unknown variable '" + t.text + "'", 0);
        }
        throw ParseError("unexpected token in expression", 0);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    const std::vector<std::string>& vars_;
    Expression& out_;
};

Expression Expression::parse(const std::string& text, const std::vector<std::string>& vars) {
    Expression e;
    e.text_ = text;
    Parser p(tokenize(text), vars, e);
    e.root_ = p.run();
    return e;
}

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tan;

template <class T>
T Expression::eval_node(int node, std::span<const T> vars) const {
    const Node& n = nodes_[static_cast<size_t>(node)];
    switch (n.op) {
        case Op::constant: return T{n.value};
        case Op::variable: return vars[static_cast<size_t>(n.index)];
        case Op::add: return eval_node(n.lhs, vars) + eval_node(n.rhs, vars);
        case Op::sub: return eval_node(n.lhs, vars) - eval_node(n.rhs, vars);
        case Op::mul: return eval_node(n.lhs, vars) * eval_node(n.rhs, vars);
        case Op::div: return eval_node(n.lhs, vars) / eval_node(n.rhs, vars);
        case Op::pow_: return pow(eval_node(n.lhs, vars), eval_node(n.rhs, vars));
        case Op::neg: return -eval_node(n.lhs, vars);
        case Op::fsin: return sin(eval_node(n.lhs, vars));
        case Op::fcos: return cos(eval_node(n.lhs, vars));
        case Op::ftan: return tan(eval_node(n.lhs, vars));
        case Op::fexp: return exp(eval_node(n.lhs, vars));
        case Op::flog: return log(eval_node(n.lhs, vars));
        case Op::fsqrt: return sqrt(eval_node(n.lhs, vars));
        case Op::fabs_: return abs(eval_node(n.lhs, vars));
    }
    return T{};
}

double Expression::eval(std::span<const double> vars) const { return eval_node(root_, vars); }

Dual Expression::eval_dual(std::span<const Dual> vars) const { return eval_node(root_, vars); }

}  // namespace movingns::expr
