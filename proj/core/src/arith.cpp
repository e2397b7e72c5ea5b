// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "prolite/engine.hpp"

namespace prolite {

namespace {

LogicError type_error(const std::string& what) { return LogicError(ErrorKind::Type, what); }
LogicError eval_error(const std::string& what) { return LogicError(ErrorKind::Evaluation, what); }

const BigInt& need_int(const Rational& r, const std::string& op) {
    if (!r.is_integer()) throw type_error("integer expected in " + op + ", found " + r.str());
    return r.num();
}

Rational from_real(double d, const std::string& op) {
    if (!std::isfinite(d)) throw eval_error("undefined result in " + op);
    return Rational::from_double(d);
}

Rational pow_int(const Rational& base, const BigInt& exp) {
    if (exp.sign() < 0) {
        if (base.is_zero()) throw eval_error("zero divisor");
        return Rational(1) / pow_int(base, -exp);
    }
    auto e = to_int64(exp);
    if (!e || *e > 1'000'000) throw LogicError(ErrorKind::Representation, "exponent too large");
    BigInt n = boost::multiprecision::pow(base.num(), static_cast<unsigned>(*e));
    BigInt d = boost::multiprecision::pow(base.den(), static_cast<unsigned>(*e));
    return Rational::normalize(n, d);
}

// Exact when the value is the square of a rational; otherwise the nearest double.
Rational sqrt_value(const Rational& x) {
    if (x.sign() < 0) throw eval_error("sqrt of a negative number");
    auto n = exact_isqrt(x.num());
    auto d = exact_isqrt(x.den());
    if (n && d) return Rational::normalize(*n, *d);
    return from_real(std::sqrt(x.to_double()), "sqrt");
}

Rational power(const Rational& base, const Rational& exp) {
    if (exp.is_integer()) return pow_int(base, exp.num());
    if (exp == Rational::normalize(1, 2)) return sqrt_value(base);
    return from_real(std::pow(base.to_double(), exp.to_double()), "**");
}

BigInt round_half_away(const Rational& r) {
    Rational half = Rational::normalize(1, 2);
    return r.sign() < 0 ? -((r.abs() + half).floor()) : (r + half).floor();
}

BigInt trunc_value(const Rational& r) { return r.sign() < 0 ? r.ceil() : r.floor(); }

Rational eval(const Term& raw, const Bindings& b, int depth);

Rational eval_atom(const Term& t) {
    const std::string& n = t.name();
    if (n == "pi") return Rational::from_double(std::numbers::pi);
    if (n == "e") return Rational::from_double(std::numbers::e);
    if (n == "max_tagged_integer") return Rational(BigInt((std::int64_t{1} << 60) - 1));
    if (n == "[]") throw type_error("evaluable expected, found []");
    throw type_error("evaluable expected, found " + n + "/0");
}

Rational eval_unary(const std::string& f, const Rational& x) {
    if (f == "-") return -x;
    if (f == "+") return x;
    if (f == "abs") return x.abs();
    if (f == "sign") return Rational(static_cast<std::int64_t>(x.sign()));
    if (f == "floor") return x.floor();
    if (f == "ceiling") return x.ceil();
    if (f == "truncate" || f == "integer") return f == "integer" ? round_half_away(x) : trunc_value(x);
    if (f == "round") return round_half_away(x);
    if (f == "float") return x;  // values are exact; floats appear only when reported
    if (f == "float_integer_part") return trunc_value(x);
    if (f == "float_fractional_part") return x - Rational(trunc_value(x));
    if (f == "sqrt") return sqrt_value(x);
    if (f == "\\") return Rational(BigInt(~need_int(x, "\\")));
    if (f == "msb") {
        const BigInt& v = need_int(x, "msb");
        if (v.sign() <= 0) throw type_error("msb of a non-positive integer");
        return Rational(static_cast<std::int64_t>(boost::multiprecision::msb(v)));
    }
    double d = x.to_double();
    if (f == "exp") return from_real(std::exp(d), f);
    if (f == "log") {
        if (x.sign() <= 0) throw eval_error("log of a non-positive number");
        return from_real(std::log(d), f);
    }
    if (f == "log2") {
        if (x.sign() <= 0) throw eval_error("log2 of a non-positive number");
        return from_real(std::log2(d), f);
    }
    if (f == "sin") return from_real(std::sin(d), f);
    if (f == "cos") return from_real(std::cos(d), f);
    if (f == "tan") return from_real(std::tan(d), f);
    if (f == "asin") return from_real(std::asin(d), f);
    if (f == "acos") return from_real(std::acos(d), f);
    if (f == "atan") return from_real(std::atan(d), f);
    throw type_error("evaluable expected, found " + f + "/1");
}

Rational eval_binary(const std::string& f, const Rational& x, const Rational& y) {
    if (f == "+") return x + y;
    if (f == "-") return x - y;
    if (f == "*") return x * y;
    if (f == "/") {
        if (y.is_zero()) throw eval_error("zero divisor");
        return x / y;
    }
    if (f == "min") return y < x ? y : x;
    if (f == "max") return x < y ? y : x;
    if (f == "**" || f == "^") return power(x, y);
    if (f == "rdiv") {
        if (y.is_zero()) throw eval_error("zero divisor");
        return x / y;
    }
    if (f == "atan2" || f == "atan") return from_real(std::atan2(x.to_double(), y.to_double()), f);
    if (f == "log") {
        if (x.sign() <= 0 || y.sign() <= 0) throw eval_error("log of a non-positive number");
        return from_real(std::log(y.to_double()) / std::log(x.to_double()), f);
    }
    if (f == "copysign") return (y.sign() < 0) ? -x.abs() : x.abs();
    // integer-only operators
    const BigInt& a = need_int(x, f);
    const BigInt& b = need_int(y, f);
    if (f == "//" || f == "div" || f == "mod" || f == "rem") {
        if (b.is_zero()) throw eval_error("zero divisor");
        if (f == "//" || f == "div") return floor_div(a, b);
        if (f == "mod") return floor_mod(a, b);
        return BigInt(a % b);
    }
    if (f == "gcd") return BigInt(boost::multiprecision::gcd(a, b));
    if (f == "/\\") return BigInt(a & b);
    if (f == "\\/") return BigInt(a | b);
    if (f == "xor") return BigInt(a ^ b);
    if (f == "<<" || f == ">>") {
        auto s = to_int64(b);
        if (!s || *s < 0 || *s > 1'000'000) throw LogicError(ErrorKind::Representation, "shift out of range");
        return f == "<<" ? BigInt(a << static_cast<unsigned>(*s)) : BigInt(a >> static_cast<unsigned>(*s));
    }
    throw type_error("evaluable expected, found " + f + "/2");
}

Rational eval(const Term& raw, const Bindings& b, int depth) {
    if (depth > 100'000) throw LogicError(ErrorKind::Representation, "expression nesting too deep");
    const Term& t = deref(raw, b);
    switch (t.kind()) {
    case TermKind::Int:
    case TermKind::Rat:
        return t.number_value();
    case TermKind::Var:
    case TermKind::Unbound:
        throw LogicError(ErrorKind::Instantiation, "arguments are not sufficiently instantiated");
    case TermKind::Atom:
        return eval_atom(t);
    case TermKind::Compound:
        break;
    }
    const std::string& f = t.name();
    if (t.arity() == 1) return eval_unary(f, eval(t.arg(0), b, depth + 1));
    if (t.arity() == 2) return eval_binary(f, eval(t.arg(0), b, depth + 1), eval(t.arg(1), b, depth + 1));
    throw type_error("evaluable expected, found " + f + "/" + std::to_string(t.arity()));
}

}  // namespace

Rational eval_arith(const Term& expr, const Bindings& bindings) { return eval(expr, bindings, 0); }

}  // namespace prolite
