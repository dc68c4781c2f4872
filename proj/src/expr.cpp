#include "hconvex/expr.hpp"

#include "hconvex/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace hconvex {

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_number(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Number;
    n->number = v;
    return n;
}

NodePtr make_variable(std::size_t index) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Variable;
    n->var = index;
    n->has_variables = true;
    return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->has_variables = (lhs && lhs->has_variables) || (rhs && rhs->has_variables);
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

struct FunctionName {
    std::string_view name;
    Op op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},   {"exp", Op::Exp},   {"log", Op::Log},
    {"sqrt", Op::Sqrt}, {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
};

// Known but rejected: not twice continuously differentiable.
constexpr std::string_view kRejected[] = {"abs", "fabs", "min", "max", "floor", "ceil", "sign", "round"};

class Parser {
public:
    Parser(std::string_view src, std::size_t arity) : src_(src), arity_(arity) {}

    NodePtr parse() {
        NodePtr e = parse_sum();
        skip_space();
        if (pos_ != src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+'))
                lhs = make_node(Op::Add, lhs, parse_product());
            else if (accept('-'))
                lhs = make_node(Op::Sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = make_node(Op::Mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = make_node(Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_node(Op::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_node(Op::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError("malformed number", start);
        return make_number(v);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);

        for (const auto& f : kFunctions) {
            if (id == f.name) {
                if (!accept('(')) throw ParseError("expected '(' after " + std::string(id), pos_);
                NodePtr arg = parse_sum();
                if (!accept(')')) throw ParseError("expected ')'", pos_);
                return make_node(f.op, arg);
            }
        }
        for (const auto r : kRejected)
            if (id == r) throw ParseError("function '" + std::string(id) + "' is not twice differentiable", start);

        if (id == "pi") return make_number(std::numbers::pi);
        if (id == "e") return make_number(std::numbers::e);
        if (id == "t") {
            if (arity_ != 1) throw ParseError("'t' is only allowed in single-variable expressions", start);
            return make_variable(0);
        }
        if ((id[0] == 'u' || id[0] == 'x') && id.size() > 1) {
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), index);
            if (ec == std::errc() && ptr == id.data() + id.size()) {
                if (index == 0 || index > arity_)
                    throw ParseError("variable '" + std::string(id) + "' exceeds arity " + std::to_string(arity_),
                                     start);
                return make_variable(index - 1);
            }
        }
        throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }

    std::string_view src_;
    std::size_t arity_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* function_name(Op op) {
    for (const auto& f : kFunctions)
        if (f.op == op) return f.name.data();
    return "?";
}

// First-order jet on the stack, used for the metric hot path.
struct Jet1 {
    static constexpr std::size_t kMax = 16;
    double v = 0.0;
    std::size_t n = 0;
    std::array<double, kMax> d{};

    Jet1 operator-() const {
        Jet1 r = *this;
        r.v = -v;
        for (std::size_t i = 0; i < n; ++i) r.d[i] = -d[i];
        return r;
    }
    friend Jet1 operator+(Jet1 a, const Jet1& b) {
        a.v += b.v;
        for (std::size_t i = 0; i < a.n; ++i) a.d[i] += b.d[i];
        return a;
    }
    friend Jet1 operator-(Jet1 a, const Jet1& b) {
        a.v -= b.v;
        for (std::size_t i = 0; i < a.n; ++i) a.d[i] -= b.d[i];
        return a;
    }
    friend Jet1 operator*(const Jet1& a, const Jet1& b) {
        Jet1 r;
        r.n = a.n;
        r.v = a.v * b.v;
        for (std::size_t i = 0; i < a.n; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        return r;
    }
    friend Jet1 operator/(const Jet1& a, const Jet1& b) {
        Jet1 r;
        r.n = a.n;
        r.v = a.v / b.v;
        for (std::size_t i = 0; i < a.n; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
        return r;
    }
};

// Scalar adaptors so one evaluator serves plain doubles and jets.
double value_of(double v) { return v; }
double value_of(const Jet2& j) { return j.value(); }
double value_of(const Jet1& j) { return j.v; }

double apply(double, double phi, double, double) { return phi; }
Jet2 apply(const Jet2& a, double phi, double d1, double d2) { return a.compose(phi, d1, d2); }
Jet1 apply(Jet1 a, double phi, double d1, double) {
    a.v = phi;
    for (std::size_t i = 0; i < a.n; ++i) a.d[i] *= d1;
    return a;
}

template <class T>
struct Evaluator {
    std::span<const double> point;
    std::size_t n;

    T constant(double v) const {
        if constexpr (std::is_same_v<T, double>) {
            return v;
        } else if constexpr (std::is_same_v<T, Jet1>) {
            Jet1 r;
            r.v = v;
            r.n = n;
            return r;
        } else {
            return Jet2::constant(v, n);
        }
    }

    T variable(std::size_t i) const {
        if constexpr (std::is_same_v<T, double>) {
            return point[i];
        } else if constexpr (std::is_same_v<T, Jet1>) {
            Jet1 r;
            r.v = point[i];
            r.n = n;
            r.d[i] = 1.0;
            return r;
        } else {
            return Jet2::variable(point[i], i, n);
        }
    }

    [[noreturn]] static void fail(const std::string& what, const Expression::Node& node) {
        throw DomainError(what + " in " + to_string(node));
    }

    T power(const Expression::Node& node) const {
        const T base = eval(*node.lhs);
        const double b = value_of(base);
        if (!node.rhs->has_variables) {
            const double a = Evaluator<double>{point, n}.eval(*node.rhs);
            const bool integral = std::nearbyint(a) == a && std::fabs(a) < 1e9;
            if (integral) {
                if (b == 0.0 && a < 0.0) fail("zero raised to a negative power", node);
                const double d1 = a == 0.0 ? 0.0 : a * std::pow(b, a - 1.0);
                const double d2 = (a == 0.0 || a == 1.0) ? 0.0 : a * (a - 1.0) * std::pow(b, a - 2.0);
                return apply(base, std::pow(b, a), d1, d2);
            }
            if (!(b > 0.0)) fail("non-positive base with non-integer exponent", node);
            return apply(base, std::pow(b, a), a * std::pow(b, a - 1.0), a * (a - 1.0) * std::pow(b, a - 2.0));
        }
        if (!(b > 0.0)) fail("non-positive base with variable exponent", node);
        const T expo = eval(*node.rhs);
        const T log_base = apply(base, std::log(b), 1.0 / b, -1.0 / (b * b));
        const T prod = expo * log_base;
        const double p = std::exp(value_of(prod));
        return apply(prod, p, p, p);
    }

    T eval(const Expression::Node& node) const {
        switch (node.op) {
            case Op::Number:
                return constant(node.number);
            case Op::Variable:
                return variable(node.var);
            case Op::Add:
                return eval(*node.lhs) + eval(*node.rhs);
            case Op::Sub:
                return eval(*node.lhs) - eval(*node.rhs);
            case Op::Mul:
                return eval(*node.lhs) * eval(*node.rhs);
            case Op::Div: {
                const T den = eval(*node.rhs);
                if (value_of(den) == 0.0) fail("division by zero", node);
                return eval(*node.lhs) / den;
            }
            case Op::Pow:
                return power(node);
            case Op::Neg:
                return -eval(*node.lhs);
            default:
                break;
        }

        const T a = eval(*node.lhs);
        const double x = value_of(a);
        switch (node.op) {
            case Op::Sin:
                return apply(a, std::sin(x), std::cos(x), -std::sin(x));
            case Op::Cos:
                return apply(a, std::cos(x), -std::sin(x), -std::cos(x));
            case Op::Tan: {
                const double c = std::cos(x);
                if (c == 0.0) fail("tan at a pole", node);
                const double t = std::tan(x);
                const double sec2 = 1.0 / (c * c);
                return apply(a, t, sec2, 2.0 * t * sec2);
            }
            case Op::Exp: {
                const double v = std::exp(x);
                return apply(a, v, v, v);
            }
            case Op::Log:
                if (!(x > 0.0)) fail("log of non-positive value", node);
                return apply(a, std::log(x), 1.0 / x, -1.0 / (x * x));
            case Op::Sqrt: {
                if (x < 0.0) fail("sqrt of negative value", node);
                if constexpr (!std::is_same_v<T, double>) {
                    if (x == 0.0) fail("sqrt is not differentiable at zero", node);
                }
                const double s = std::sqrt(x);
                return apply(a, s, s > 0.0 ? 0.5 / s : 0.0, s > 0.0 ? -0.25 / (s * x) : 0.0);
            }
            case Op::Sinh:
                return apply(a, std::sinh(x), std::cosh(x), std::sinh(x));
            case Op::Cosh:
                return apply(a, std::cosh(x), std::sinh(x), std::cosh(x));
            case Op::Tanh: {
                const double t = std::tanh(x);
                const double s = 1.0 - t * t;
                return apply(a, t, s, -2.0 * t * s);
            }
            default:
                break;
        }
        fail("unsupported node", node);
    }
};

bool same_tree(const Expression::Node& a, const Expression::Node& b) {
    if (a.op != b.op) return false;
    if (a.op == Op::Number) return a.number == b.number;
    if (a.op == Op::Variable) return a.var == b.var;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !same_tree(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !same_tree(*a.rhs, *b.rhs)) return false;
    return true;
}

}  // namespace

// Postfix program with constant subtrees folded. Slot i holds the result of
// instruction i; operands refer to earlier slots.
struct Expression::Tape {
    struct Instr {
        Op op;
        double number = 0.0;  // Number value, or the constant exponent of Pow
        std::size_t var = 0;
        std::size_t a = 0;
        std::size_t b = 0;
    };
    std::vector<Instr> code;
};

namespace {

// Returns the slot index, or throws when the subtree cannot be flattened.
std::size_t flatten(const Expression::Node& node, std::size_t arity, Expression::Tape& tape) {
    using Instr = Expression::Tape::Instr;
    if (!node.has_variables) {
        std::vector<double> zeros(arity, 0.0);
        tape.code.push_back(Instr{Op::Number, Evaluator<double>{zeros, arity}.eval(node)});
        return tape.code.size() - 1;
    }
    if (node.op == Op::Variable) {
        tape.code.push_back(Instr{Op::Variable, 0.0, node.var});
        return tape.code.size() - 1;
    }
    if (node.op == Op::Pow) {
        if (node.rhs->has_variables) throw DomainError("variable exponent");
        std::vector<double> zeros(arity, 0.0);
        const double expo = Evaluator<double>{zeros, arity}.eval(*node.rhs);
        const std::size_t a = flatten(*node.lhs, arity, tape);
        tape.code.push_back(Instr{Op::Pow, expo, 0, a});
        return tape.code.size() - 1;
    }
    const std::size_t a = flatten(*node.lhs, arity, tape);
    const std::size_t b = node.rhs ? flatten(*node.rhs, arity, tape) : 0;
    tape.code.push_back(Instr{node.op, 0.0, 0, a, b});
    return tape.code.size() - 1;
}

// Runs the tape on first-order jets. Returns false on any domain problem so
// the caller can rerun the tree evaluator for its diagnostic.
bool run_tape(const Expression::Tape& tape, std::span<const double> point, std::span<double> gradient, double& value) {
    const std::size_t n = point.size();
    thread_local std::vector<double> val;
    thread_local std::vector<double> der;
    const std::size_t size = tape.code.size();
    if (val.size() < size) val.resize(size);
    if (der.size() < size * n) der.resize(size * n);

    for (std::size_t s = 0; s < size; ++s) {
        const auto& in = tape.code[s];
        double* d = der.data() + s * n;
        const double* da = der.data() + in.a * n;
        const double* db = der.data() + in.b * n;
        const double x = val[in.a];
        double phi = 0.0;
        double d1 = 0.0;
        switch (in.op) {
            case Op::Number:
                val[s] = in.number;
                std::fill(d, d + n, 0.0);
                continue;
            case Op::Variable:
                val[s] = point[in.var];
                std::fill(d, d + n, 0.0);
                d[in.var] = 1.0;
                continue;
            case Op::Add:
                val[s] = x + val[in.b];
                for (std::size_t i = 0; i < n; ++i) d[i] = da[i] + db[i];
                continue;
            case Op::Sub:
                val[s] = x - val[in.b];
                for (std::size_t i = 0; i < n; ++i) d[i] = da[i] - db[i];
                continue;
            case Op::Mul: {
                const double y = val[in.b];
                val[s] = x * y;
                for (std::size_t i = 0; i < n; ++i) d[i] = da[i] * y + x * db[i];
                continue;
            }
            case Op::Div: {
                const double y = val[in.b];
                if (y == 0.0) return false;
                const double q = x / y;
                val[s] = q;
                for (std::size_t i = 0; i < n; ++i) d[i] = (da[i] - q * db[i]) / y;
                continue;
            }
            case Op::Neg:
                val[s] = -x;
                for (std::size_t i = 0; i < n; ++i) d[i] = -da[i];
                continue;
            case Op::Pow: {
                const double a = in.number;
                const bool integral = std::nearbyint(a) == a && std::fabs(a) < 1e9;
                if (integral) {
                    if (x == 0.0 && a < 0.0) return false;
                } else if (!(x > 0.0)) {
                    return false;
                }
                if (integral && std::fabs(a) <= 16.0) {
                    // Small integer powers by repeated multiplication.
                    const int k = static_cast<int>(std::fabs(a));
                    double lower = 1.0;  // x^(k-1)
                    for (int i = 1; i < k; ++i) lower *= x;
                    const double up = k == 0 ? 1.0 : lower * x;
                    if (a >= 0.0) {
                        phi = up;
                        d1 = k == 0 ? 0.0 : a * lower;
                    } else {
                        phi = 1.0 / up;
                        d1 = a * phi / x;
                    }
                } else {
                    phi = std::pow(x, a);
                    d1 = a == 0.0 ? 0.0 : a * std::pow(x, a - 1.0);
                }
                break;
            }
            case Op::Sin:
                phi = std::sin(x);
                d1 = std::cos(x);
                break;
            case Op::Cos:
                phi = std::cos(x);
                d1 = -std::sin(x);
                break;
            case Op::Tan: {
                const double c = std::cos(x);
                if (c == 0.0) return false;
                phi = std::tan(x);
                d1 = 1.0 / (c * c);
                break;
            }
            case Op::Exp:
                phi = d1 = std::exp(x);
                break;
            case Op::Log:
                if (!(x > 0.0)) return false;
                phi = std::log(x);
                d1 = 1.0 / x;
                break;
            case Op::Sqrt:
                if (!(x > 0.0)) return false;
                phi = std::sqrt(x);
                d1 = 0.5 / phi;
                break;
            case Op::Sinh:
                phi = std::sinh(x);
                d1 = std::cosh(x);
                break;
            case Op::Cosh:
                phi = std::cosh(x);
                d1 = std::sinh(x);
                break;
            case Op::Tanh:
                phi = std::tanh(x);
                d1 = 1.0 - phi * phi;
                break;
        }
        val[s] = phi;
        for (std::size_t i = 0; i < n; ++i) d[i] = d1 * da[i];
    }
    value = val[size - 1];
    const double* d = der.data() + (size - 1) * n;
    std::copy(d, d + n, gradient.begin());
    return true;
}

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::size_t arity) : root_(std::move(root)), arity_(arity) {
    auto tape = std::make_shared<Tape>();
    try {
        flatten(*root_, arity_, *tape);
        tape_ = std::move(tape);
    } catch (const Error&) {
        // Constant subtrees outside their domain or variable exponents:
        // eval_gradient uses the tree instead.
    }
}

Expression Expression::parse(std::string_view source, std::size_t arity) {
    return Expression(Parser(source, arity).parse(), arity);
}

double Expression::eval(std::span<const double> point) const {
    if (point.size() != arity_)
        throw UsageError("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                         std::to_string(arity_));
    return Evaluator<double>{point, arity_}.eval(*root_);
}

Jet2 Expression::eval_jet2(std::span<const double> point) const {
    if (point.size() != arity_)
        throw UsageError("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                         std::to_string(arity_));
    return Evaluator<Jet2>{point, arity_}.eval(*root_);
}

double Expression::eval_gradient(std::span<const double> point, std::span<double> gradient) const {
    if (point.size() != arity_ || gradient.size() != arity_)
        throw UsageError("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                         std::to_string(arity_));
    if (tape_) {
        double value = 0.0;
        if (run_tape(*tape_, point, gradient, value)) return value;
    }
    if (arity_ > Jet1::kMax) {
        const Jet2 j = eval_jet2(point);
        for (std::size_t i = 0; i < arity_; ++i) gradient[i] = j.gradient(i);
        return j.value();
    }
    const Jet1 j = Evaluator<Jet1>{point, arity_}.eval(*root_);
    for (std::size_t i = 0; i < arity_; ++i) gradient[i] = j.d[i];
    return j.v;
}

std::string Expression::to_string() const { return hconvex::to_string(*root_); }

bool operator==(const Expression& a, const Expression& b) {
    if (a.arity_ != b.arity_) return false;
    if (!a.root_ || !b.root_) return a.root_ == b.root_;
    return same_tree(*a.root_, *b.root_);
}

std::string to_string(const Expression::Node& node) {
    switch (node.op) {
        case Op::Number:
            return format_number(node.number);
        case Op::Variable:
            return "u" + std::to_string(node.var + 1);
        case Op::Add:
            return "(" + to_string(*node.lhs) + " + " + to_string(*node.rhs) + ")";
        case Op::Sub:
            return "(" + to_string(*node.lhs) + " - " + to_string(*node.rhs) + ")";
        case Op::Mul:
            return "(" + to_string(*node.lhs) + " * " + to_string(*node.rhs) + ")";
        case Op::Div:
            return "(" + to_string(*node.lhs) + " / " + to_string(*node.rhs) + ")";
        case Op::Pow:
            return "(" + to_string(*node.lhs) + "^" + to_string(*node.rhs) + ")";
        case Op::Neg:
            return "(-" + to_string(*node.lhs) + ")";
        default:
            return std::string(function_name(node.op)) + "(" + to_string(*node.lhs) + ")";
    }
}

}  // namespace hconvex
