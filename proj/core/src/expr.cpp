#include "diffcert/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "diffcert/numerics.hpp"

namespace diffcert::dsl {

namespace {

bool is_integer(double v, long long* out) {
    if (!std::isfinite(v) || std::fabs(v) > 1e15) return false;
    const double r = std::nearbyint(v);
    if (r != v) return false;
    *out = static_cast<long long>(r);
    return true;
}

double checked_pow(double base, double expn) {
    long long k;
    if (base < 0.0 && !is_integer(expn, &k))
        throw DomainError("pow of negative base with non-integer exponent");
    if (base == 0.0 && expn < 0.0)
        throw DomainError("pow of zero base with negative exponent");
    return std::pow(base, expn);
}

double pow_int(double x, int n) {
    if (n < 0) return 1.0 / pow_int(x, -n);
    double acc = 1.0, p = x;
    while (n > 0) {
        if (n & 1) acc *= p;
        p *= p;
        n >>= 1;
    }
    return acc;
}

// ------------------------------ tokenizer ---------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t pos;
    double num = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }
    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        tok_.pos = i_;
        if (i_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        const char c = src_[i_];
        switch (c) {
            case '+': tok_.kind = Tok::Plus; ++i_; return;
            case '-': tok_.kind = Tok::Minus; ++i_; return;
            case '*': tok_.kind = Tok::Star; ++i_; return;
            case '/': tok_.kind = Tok::Slash; ++i_; return;
            case '^': tok_.kind = Tok::Caret; ++i_; return;
            case '(': tok_.kind = Tok::LParen; ++i_; return;
            case ')': tok_.kind = Tok::RParen; ++i_; return;
            case ',': tok_.kind = Tok::Comma; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.data() + i_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError(i_, "malformed number");
            tok_.kind = Tok::Number;
            tok_.num = v;
            i_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            tok_.kind = Tok::Ident;
            tok_.text.assign(src_.substr(i_, j - i_));
            i_ = j;
            return;
        }
        throw ParseError(i_, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t i_ = 0;
    Token tok_;
};

// ------------------------------- parser -----------------------------------

class Parser {
public:
    Parser(std::string_view text, int d, std::span<const std::string> params)
        : lex_(text), d_(d), params_(params) {}

    Expr run() {
        const int root = parse_expr_rule();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End) throw ParseError(t.pos, "trailing input after expression");
        std::vector<std::string> slots(params_.begin(), params_.end());
        return Expr(std::move(nodes_), root, d_, std::move(slots));
    }

private:
    int add(NodeKind k, double v = 0.0, int index = -1, int a = -1, int b = -1) {
        nodes_.push_back(ExprNode{k, v, index, a, b});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_expr_rule() {
        int lhs = parse_term();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k == Tok::Plus || k == Tok::Minus) {
                lex_.take();
                const int rhs = parse_term();
                lhs = add(k == Tok::Plus ? NodeKind::Add : NodeKind::Sub, 0.0, -1, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k == Tok::Star || k == Tok::Slash) {
                lex_.take();
                const int rhs = parse_unary();
                lhs = add(k == Tok::Star ? NodeKind::Mul : NodeKind::Div, 0.0, -1, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            const int inner = parse_unary();
            if (nodes_[inner].kind == NodeKind::Constant) {
                nodes_[inner].value = -nodes_[inner].value;
                return inner;
            }
            return add(NodeKind::Neg, 0.0, -1, inner);
        }
        return parse_power();
    }

    int parse_power() {
        const int base = parse_primary();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            const int ex = parse_unary();
            return add(NodeKind::Pow, 0.0, -1, base, ex);
        }
        return base;
    }

    int expect(Tok k, const char* what) {
        const Token& t = lex_.peek();
        if (t.kind != k) throw ParseError(t.pos, std::string("expected ") + what);
        lex_.take();
        return 0;
    }

    int parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Number:
                return add(NodeKind::Constant, t.num);
            case Tok::LParen: {
                const int e = parse_expr_rule();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident:
                return parse_ident(t);
            default:
                throw ParseError(t.pos, "expected number, identifier or '('");
        }
    }

    static NodeKind function_kind(const std::string& name) {
        if (name == "abs") return NodeKind::Abs;
        if (name == "cos") return NodeKind::Cos;
        if (name == "sin") return NodeKind::Sin;
        if (name == "exp") return NodeKind::Exp;
        if (name == "ln") return NodeKind::Ln;
        if (name == "sqrt") return NodeKind::Sqrt;
        return NodeKind::Constant; // sentinel: not a function
    }

    int parse_ident(const Token& t) {
        const std::string& name = t.text;
        if (lex_.peek().kind == Tok::LParen) return parse_call(t);

        if (name == "x")
            throw ParseError(t.pos, "bare 'x' is only valid inside abs(x) or abs(x-x0)");
        if (name == "x0")
            throw ParseError(t.pos, "'x0' is only valid inside abs(x-x0)");
        if (name.size() > 1 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
            if (idx < 1 || idx > d_)
                throw ParseError(t.pos, "coordinate " + name + " out of range for dimension " +
                                            std::to_string(d_));
            return add(NodeKind::Coord, 0.0, static_cast<int>(idx - 1));
        }
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i] == name) return add(NodeKind::Param, 0.0, static_cast<int>(i));
        throw ParseError(t.pos, "unknown identifier '" + name + "'");
    }

    int parse_call(const Token& t) {
        const std::string& name = t.text;
        expect(Tok::LParen, "'('");
        if (name == "pow") {
            const int a = parse_expr_rule();
            expect(Tok::Comma, "','");
            const int b = parse_expr_rule();
            expect(Tok::RParen, "')'");
            return add(NodeKind::Pow, 0.0, -1, a, b);
        }
        if (name == "abs") {
            // Radial special forms: abs(x) and abs(x-x0).
            if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "x") {
                lex_.take();
                if (lex_.peek().kind == Tok::RParen) {
                    lex_.take();
                    return add(NodeKind::Norm);
                }
                if (lex_.peek().kind == Tok::Minus) {
                    const Token minus = lex_.take();
                    if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "x0") {
                        lex_.take();
                        expect(Tok::RParen, "')'");
                        return add(NodeKind::NormC);
                    }
                    throw ParseError(minus.pos, "expected 'x0' after 'x -' inside abs()");
                }
                throw ParseError(lex_.peek().pos, "bare 'x' inside abs() must be abs(x) or abs(x-x0)");
            }
            const int a = parse_expr_rule();
            expect(Tok::RParen, "')'");
            return add(NodeKind::Abs, 0.0, -1, a);
        }
        const NodeKind fk = function_kind(name);
        if (fk == NodeKind::Constant)
            throw ParseError(t.pos, "unknown function '" + name + "'");
        const int a = parse_expr_rule();
        expect(Tok::RParen, "')'");
        return add(fk, 0.0, -1, a);
    }

    Lexer lex_;
    int d_;
    std::span<const std::string> params_;
    std::vector<ExprNode> nodes_;
};

// --------------------------- pretty printer --------------------------------

int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

void print_node(const Expr& e, int id, int parent_prec, bool right_side, std::string& out) {
    const ExprNode& nd = e.nodes()[id];
    // Negative constants print with a leading '-' and re-parse through the
    // unary-minus fold, so treat them like Neg for parenthesization.
    const bool neg_const = nd.kind == NodeKind::Constant && nd.value < 0.0;
    const int prec = neg_const ? 3 : precedence(nd.kind);
    bool parens = prec < parent_prec;
    // Left-associative chains: a - (b - c) and a / (b / c) need parens on the
    // right child at equal precedence.
    if (!parens && right_side && prec == parent_prec &&
        (parent_prec == 1 || parent_prec == 2))
        parens = true;
    if (parens) out += '(';
    switch (nd.kind) {
        case NodeKind::Constant: {
            if (nd.value < 0.0) {
                out += '-';
                out += num::format_g17(-nd.value);
            } else {
                out += num::format_g17(nd.value);
            }
            break;
        }
        case NodeKind::Coord: out += "x" + std::to_string(nd.index + 1); break;
        case NodeKind::Param: out += e.param_slots()[nd.index]; break;
        case NodeKind::Norm: out += "abs(x)"; break;
        case NodeKind::NormC: out += "abs(x-x0)"; break;
        case NodeKind::Neg:
            out += '-';
            print_node(e, nd.a, 3, false, out);
            break;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div: {
            const char op = nd.kind == NodeKind::Add ? '+'
                          : nd.kind == NodeKind::Sub ? '-'
                          : nd.kind == NodeKind::Mul ? '*' : '/';
            print_node(e, nd.a, prec, false, out);
            out += op;
            print_node(e, nd.b, prec, true, out);
            break;
        }
        case NodeKind::Pow:
            print_node(e, nd.a, 5, false, out); // base must be atomic or wrapped
            out += '^';
            print_node(e, nd.b, 5, true, out);  // exponent likewise
            break;
        case NodeKind::Abs:
        case NodeKind::Cos:
        case NodeKind::Sin:
        case NodeKind::Exp:
        case NodeKind::Ln:
        case NodeKind::Sqrt: {
            const char* fn = nd.kind == NodeKind::Abs ? "abs"
                           : nd.kind == NodeKind::Cos ? "cos"
                           : nd.kind == NodeKind::Sin ? "sin"
                           : nd.kind == NodeKind::Exp ? "exp"
                           : nd.kind == NodeKind::Ln ? "ln" : "sqrt";
            out += fn;
            out += '(';
            print_node(e, nd.a, 0, false, out);
            out += ')';
            break;
        }
    }
    if (parens) out += ')';
}

bool equal_rec(const Expr& lhs, int a, const Expr& rhs, int b) {
    const ExprNode& na = lhs.nodes()[a];
    const ExprNode& nb = rhs.nodes()[b];
    if (na.kind != nb.kind) return false;
    switch (na.kind) {
        case NodeKind::Constant:
            return na.value == nb.value ||
                   (std::isnan(na.value) && std::isnan(nb.value));
        case NodeKind::Coord: return na.index == nb.index;
        case NodeKind::Param:
            return lhs.param_slots()[na.index] == rhs.param_slots()[nb.index];
        case NodeKind::Norm:
        case NodeKind::NormC: return true;
        default: break;
    }
    if (na.a >= 0 && !equal_rec(lhs, na.a, rhs, nb.a)) return false;
    if (na.b >= 0 && !equal_rec(lhs, na.b, rhs, nb.b)) return false;
    return true;
}

double eval_rec(const Expr& e, int id, std::span<const double> x,
                std::span<const double> params, std::span<const double> x0) {
    const ExprNode& nd = e.nodes()[id];
    switch (nd.kind) {
        case NodeKind::Constant: return nd.value;
        case NodeKind::Coord: return x[nd.index];
        case NodeKind::Param: return params[nd.index];
        case NodeKind::Norm: {
            double s = 0.0;
            for (double xi : x) s += xi * xi;
            return std::sqrt(s);
        }
        case NodeKind::NormC: {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double c = x0.empty() ? 0.0 : x0[i];
                s += (x[i] - c) * (x[i] - c);
            }
            return std::sqrt(s);
        }
        case NodeKind::Neg: return -eval_rec(e, nd.a, x, params, x0);
        case NodeKind::Add: return eval_rec(e, nd.a, x, params, x0) + eval_rec(e, nd.b, x, params, x0);
        case NodeKind::Sub: return eval_rec(e, nd.a, x, params, x0) - eval_rec(e, nd.b, x, params, x0);
        case NodeKind::Mul: return eval_rec(e, nd.a, x, params, x0) * eval_rec(e, nd.b, x, params, x0);
        case NodeKind::Div: {
            const double den = eval_rec(e, nd.b, x, params, x0);
            if (den == 0.0) throw DomainError("division by zero");
            return eval_rec(e, nd.a, x, params, x0) / den;
        }
        case NodeKind::Pow:
            return checked_pow(eval_rec(e, nd.a, x, params, x0), eval_rec(e, nd.b, x, params, x0));
        case NodeKind::Abs: return std::fabs(eval_rec(e, nd.a, x, params, x0));
        case NodeKind::Cos: return std::cos(eval_rec(e, nd.a, x, params, x0));
        case NodeKind::Sin: return std::sin(eval_rec(e, nd.a, x, params, x0));
        case NodeKind::Exp: return std::exp(eval_rec(e, nd.a, x, params, x0));
        case NodeKind::Ln: {
            const double a = eval_rec(e, nd.a, x, params, x0);
            if (a <= 0.0) throw DomainError("ln of non-positive argument");
            return std::log(a);
        }
        case NodeKind::Sqrt: {
            const double a = eval_rec(e, nd.a, x, params, x0);
            if (a < 0.0) throw DomainError("sqrt of negative argument");
            return std::sqrt(a);
        }
    }
    throw DomainError("corrupt expression node");
}

} // namespace

Expr parse_expr(std::string_view text, int d, std::span<const std::string> param_names) {
    if (text.empty()) throw ParseError(0, "empty expression");
    if (d < 1) throw ParseError(0, "dimension must be at least 1");
    Parser p(text, d, param_names);
    return p.run();
}

std::string Expr::pretty() const {
    std::string out;
    print_node(*this, root_, 0, false, out);
    return out;
}

bool Expr::equal(const Expr& other) const {
    if (d_ != other.d_) return false;
    return equal_rec(*this, root_, other, other.root_);
}

double Expr::eval(std::span<const double> x, std::span<const double> params,
                  std::span<const double> x0) const {
    const double v = eval_rec(*this, root_, x, params, x0);
    if (!std::isfinite(v)) throw DomainError("expression evaluated to a non-finite value");
    return v;
}

// ----------------------------- compilation ---------------------------------

namespace {

struct FoldNode {
    NodeKind kind;
    double value = 0.0;
    int index = -1;
    int a = -1, b = -1;
};

class Folder {
public:
    Folder(const Expr& e, std::span<const double> params) : e_(e), params_(params) {}

    int fold(int id) {
        const ExprNode& nd = e_.nodes()[id];
        switch (nd.kind) {
            case NodeKind::Constant: return constant(nd.value);
            case NodeKind::Param: return constant(params_[nd.index]);
            case NodeKind::Coord: return push({NodeKind::Coord, 0.0, nd.index});
            case NodeKind::Norm: return push({NodeKind::Norm});
            case NodeKind::NormC: return push({NodeKind::NormC});
            default: break;
        }
        const int a = fold(nd.a);
        const int b = (nd.b >= 0) ? fold(nd.b) : -1;
        if (is_const(a) && (b < 0 || is_const(b))) {
            // Fold only when the operation is well defined and finite here;
            // otherwise keep the runtime op so errors surface at eval time.
            try {
                const double v = apply(nd.kind, out_[a].value, b >= 0 ? out_[b].value : 0.0);
                if (std::isfinite(v)) return constant(v);
            } catch (const DomainError&) {
            }
        }
        return push({nd.kind, 0.0, -1, a, b});
    }

    const std::vector<FoldNode>& result() const { return out_; }

private:
    bool is_const(int id) const { return out_[id].kind == NodeKind::Constant; }
    int constant(double v) {
        out_.push_back({NodeKind::Constant, v});
        return static_cast<int>(out_.size()) - 1;
    }
    int push(FoldNode n) {
        out_.push_back(n);
        return static_cast<int>(out_.size()) - 1;
    }
    static double apply(NodeKind k, double a, double b) {
        switch (k) {
            case NodeKind::Neg: return -a;
            case NodeKind::Add: return a + b;
            case NodeKind::Sub: return a - b;
            case NodeKind::Mul: return a * b;
            case NodeKind::Div:
                if (b == 0.0) throw DomainError("division by zero");
                return a / b;
            case NodeKind::Pow: return checked_pow(a, b);
            case NodeKind::Abs: return std::fabs(a);
            case NodeKind::Cos: return std::cos(a);
            case NodeKind::Sin: return std::sin(a);
            case NodeKind::Exp: return std::exp(a);
            case NodeKind::Ln:
                if (a <= 0.0) throw DomainError("ln of non-positive argument");
                return std::log(a);
            case NodeKind::Sqrt:
                if (a < 0.0) throw DomainError("sqrt of negative argument");
                return std::sqrt(a);
            default: throw DomainError("not foldable");
        }
    }

    const Expr& e_;
    std::span<const double> params_;
    std::vector<FoldNode> out_;
};

} // namespace

Program Program::compile(const Expr& e, std::span<const double> param_values,
                         std::span<const double> x0) {
    Folder folder(e, param_values);
    const int root = folder.fold(e.root());
    const auto& arena = folder.result();

    Program p;
    p.d_ = e.dimension();
    p.x0_.assign(x0.begin(), x0.end());
    p.x0_.resize(static_cast<std::size_t>(p.d_), 0.0);

    int depth = 0;
    const auto emit = [&](int id, auto&& self) -> void {
        const FoldNode& nd = arena[id];
        switch (nd.kind) {
            case NodeKind::Constant:
                p.code_.push_back({Op::Const, 0, nd.value});
                p.max_stack_ = std::max(p.max_stack_, ++depth);
                return;
            case NodeKind::Coord:
                p.code_.push_back({Op::Coord, nd.index, 0.0});
                p.max_stack_ = std::max(p.max_stack_, ++depth);
                return;
            case NodeKind::Norm:
                p.code_.push_back({Op::Norm, 0, 0.0});
                p.max_stack_ = std::max(p.max_stack_, ++depth);
                return;
            case NodeKind::NormC:
                p.code_.push_back({Op::NormC, 0, 0.0});
                p.max_stack_ = std::max(p.max_stack_, ++depth);
                return;
            default: break;
        }
        self(nd.a, self);
        if (nd.b >= 0) {
            // Integer powers become a dedicated op with an immediate exponent.
            if (nd.kind == NodeKind::Pow && arena[nd.b].kind == NodeKind::Constant) {
                long long k;
                if (is_integer(arena[nd.b].value, &k) && std::llabs(k) <= 32) {
                    if (k == 1) return; // x^1 == x
                    p.code_.push_back({Op::PowInt, static_cast<std::int32_t>(k), 0.0});
                    return;
                }
            }
            self(nd.b, self);
            --depth;
        }
        Op op;
        switch (nd.kind) {
            case NodeKind::Neg: op = Op::Neg; break;
            case NodeKind::Add: op = Op::Add; break;
            case NodeKind::Sub: op = Op::Sub; break;
            case NodeKind::Mul: op = Op::Mul; break;
            case NodeKind::Div: op = Op::Div; break;
            case NodeKind::Pow: op = Op::Pow; break;
            case NodeKind::Abs: op = Op::Abs; break;
            case NodeKind::Cos: op = Op::Cos; break;
            case NodeKind::Sin: op = Op::Sin; break;
            case NodeKind::Exp: op = Op::Exp; break;
            case NodeKind::Ln: op = Op::Ln; break;
            case NodeKind::Sqrt: op = Op::Sqrt; break;
            default: throw DomainError("corrupt folded node");
        }
        p.code_.push_back({op, 0, 0.0});
    };
    emit(root, emit);
    return p;
}

double Program::eval_checked(std::span<const double> x) const {
    std::array<double, 64> stack{};
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const: stack[sp++] = in.c; break;
            case Op::Coord: stack[sp++] = x[in.arg]; break;
            case Op::Norm: {
                double s = 0.0;
                for (int i = 0; i < d_; ++i) s += x[i] * x[i];
                stack[sp++] = std::sqrt(s);
                break;
            }
            case Op::NormC: {
                double s = 0.0;
                for (int i = 0; i < d_; ++i) s += (x[i] - x0_[i]) * (x[i] - x0_[i]);
                stack[sp++] = std::sqrt(s);
                break;
            }
            case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case Op::Div:
                --sp;
                if (stack[sp] == 0.0) throw DomainError("division by zero");
                stack[sp - 1] /= stack[sp];
                break;
            case Op::Pow:
                --sp;
                stack[sp - 1] = checked_pow(stack[sp - 1], stack[sp]);
                break;
            case Op::PowInt:
                if (in.arg < 0 && stack[sp - 1] == 0.0)
                    throw DomainError("pow of zero base with negative exponent");
                stack[sp - 1] = pow_int(stack[sp - 1], in.arg);
                break;
            case Op::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
            case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case Op::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case Op::Ln:
                if (stack[sp - 1] <= 0.0) throw DomainError("ln of non-positive argument");
                stack[sp - 1] = std::log(stack[sp - 1]);
                break;
            case Op::Sqrt:
                if (stack[sp - 1] < 0.0) throw DomainError("sqrt of negative argument");
                stack[sp - 1] = std::sqrt(stack[sp - 1]);
                break;
        }
    }
    const double v = stack[0];
    if (!std::isfinite(v)) throw DomainError("expression evaluated to a non-finite value");
    return v;
}

void Program::eval_batch(const double* const* coords, std::size_t n, double* out,
                         double* scratch) const {
    // scratch is organized as max_stack_+1 lanes of n doubles.
    double* stack0 = scratch;
    int sp = 0;
    const auto lane = [&](int s) { return stack0 + static_cast<std::size_t>(s) * n; };
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const: {
                double* t = lane(sp++);
                for (std::size_t i = 0; i < n; ++i) t[i] = in.c;
                break;
            }
            case Op::Coord: {
                double* t = lane(sp++);
                const double* src = coords[in.arg];
                std::memcpy(t, src, n * sizeof(double));
                break;
            }
            case Op::Norm: {
                double* t = lane(sp++);
                if (d_ == 1) {
                    const double* c0 = coords[0];
                    for (std::size_t i = 0; i < n; ++i) t[i] = std::fabs(c0[i]);
                } else {
                    for (std::size_t i = 0; i < n; ++i) t[i] = 0.0;
                    for (int k = 0; k < d_; ++k) {
                        const double* ck = coords[k];
                        for (std::size_t i = 0; i < n; ++i) t[i] += ck[i] * ck[i];
                    }
                    for (std::size_t i = 0; i < n; ++i) t[i] = std::sqrt(t[i]);
                }
                break;
            }
            case Op::NormC: {
                double* t = lane(sp++);
                for (std::size_t i = 0; i < n; ++i) t[i] = 0.0;
                for (int k = 0; k < d_; ++k) {
                    const double* ck = coords[k];
                    const double c = x0_[k];
                    for (std::size_t i = 0; i < n; ++i) t[i] += (ck[i] - c) * (ck[i] - c);
                }
                for (std::size_t i = 0; i < n; ++i) t[i] = std::sqrt(t[i]);
                break;
            }
            case Op::Neg: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = -t[i];
                break;
            }
            case Op::Add: {
                --sp;
                double* a = lane(sp - 1);
                const double* b = lane(sp);
                for (std::size_t i = 0; i < n; ++i) a[i] += b[i];
                break;
            }
            case Op::Sub: {
                --sp;
                double* a = lane(sp - 1);
                const double* b = lane(sp);
                for (std::size_t i = 0; i < n; ++i) a[i] -= b[i];
                break;
            }
            case Op::Mul: {
                --sp;
                double* a = lane(sp - 1);
                const double* b = lane(sp);
                for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
                break;
            }
            case Op::Div: {
                --sp;
                double* a = lane(sp - 1);
                const double* b = lane(sp);
                for (std::size_t i = 0; i < n; ++i) a[i] /= b[i];
                break;
            }
            case Op::Pow: {
                --sp;
                double* a = lane(sp - 1);
                const double* b = lane(sp);
                for (std::size_t i = 0; i < n; ++i) a[i] = std::pow(a[i], b[i]);
                break;
            }
            case Op::PowInt: {
                double* a = lane(sp - 1);
                const int k = in.arg;
                if (k == 2) {
                    for (std::size_t i = 0; i < n; ++i) a[i] *= a[i];
                } else if (k == 3) {
                    for (std::size_t i = 0; i < n; ++i) a[i] *= a[i] * a[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) a[i] = pow_int(a[i], k);
                }
                break;
            }
            case Op::Abs: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::fabs(t[i]);
                break;
            }
            case Op::Cos: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::cos(t[i]);
                break;
            }
            case Op::Sin: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::sin(t[i]);
                break;
            }
            case Op::Exp: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(t[i]);
                break;
            }
            case Op::Ln: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::log(t[i]);
                break;
            }
            case Op::Sqrt: {
                double* t = lane(sp - 1);
                for (std::size_t i = 0; i < n; ++i) t[i] = std::sqrt(t[i]);
                break;
            }
        }
    }
    std::memcpy(out, lane(0), n * sizeof(double));
}

} // namespace diffcert::dsl
