// SPDX-License-Identifier: Apache-2.0
#include "prolite/numeric.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace prolite {

namespace mp = boost::multiprecision;

Rational Rational::normalize(BigInt num, BigInt den) {
    if (den.is_zero()) throw ZeroDenominator();
    if (den.sign() < 0) {
        num = -num;
        den = -den;
    }
    if (num.is_zero()) return Rational(BigInt(0), BigInt(1), 0);
    BigInt g = mp::gcd(mp::abs(num), den);
    if (g != 1) {
        num /= g;
        den /= g;
    }
    return Rational(std::move(num), std::move(den), 0);
}

Rational Rational::from_double(double value) {
    if (!std::isfinite(value)) throw std::domain_error("non-finite double has no rational value");
    if (value == 0.0) return Rational();
    int exponent = 0;
    double mantissa = std::frexp(value, &exponent);
    // mantissa in [0.5, 1): scale to a 53-bit integer
    auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
    exponent -= 53;
    BigInt num(scaled);
    BigInt den(1);
    if (exponent > 0) {
        num <<= exponent;
    } else {
        den <<= -exponent;
    }
    return normalize(std::move(num), std::move(den));
}

double Rational::to_double() const {
    static const BigInt kExactLimit = BigInt(1) << 53;
    if (mp::abs(num_) <= kExactLimit && den_ <= kExactLimit) {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    // power-of-two denominators (e.g. values that came from a double) divide exactly
    if (mp::abs(num_) <= kExactLimit && BigInt(den_ & (den_ - 1)).is_zero()) {
        auto shift = static_cast<int>(mp::msb(den_));
        return std::ldexp(static_cast<double>(num_), -shift);
    }
    mp::cpp_rational r(num_, den_);
    return r.convert_to<double>();
}

bool Rational::double_exact() const {
    double d = to_double();
    if (!std::isfinite(d)) return false;
    return from_double(d) == *this;
}

std::string Rational::str() const {
    if (is_integer()) return num_.str();
    return num_.str() + "/" + den_.str();
}

Rational Rational::operator-() const { return Rational(-num_, den_, 0); }

Rational operator+(const Rational& a, const Rational& b) {
    if (a.is_integer() && b.is_integer()) return Rational(a.num_ + b.num_, BigInt(1), 0);
    return Rational::normalize(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    if (a.is_integer() && b.is_integer()) return Rational(a.num_ - b.num_, BigInt(1), 0);
    return Rational::normalize(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    if (a.is_integer() && b.is_integer()) return Rational(a.num_ * b.num_, BigInt(1), 0);
    return Rational::normalize(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw ZeroDenominator();
    return Rational::normalize(a.num_ * b.den_, a.den_ * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    BigInt lhs = a.num_ * b.den_;
    BigInt rhs = b.num_ * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

BigInt Rational::floor() const { return floor_div(num_, den_); }

BigInt Rational::ceil() const { return -floor_div(-num_, den_); }

BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    BigInt r = a % b;
    if (!r.is_zero() && ((r.sign() < 0) != (b.sign() < 0))) q -= 1;
    return q;
}

BigInt floor_mod(const BigInt& a, const BigInt& b) {
    BigInt r = a % b;
    if (!r.is_zero() && ((r.sign() < 0) != (b.sign() < 0))) r += b;
    return r;
}

std::optional<BigInt> exact_isqrt(const BigInt& value) {
    if (value.sign() < 0) return std::nullopt;
    BigInt root = mp::sqrt(value);
    if (root * root == value) return root;
    return std::nullopt;
}

std::optional<std::int64_t> to_int64(const BigInt& value) {
    static const BigInt kMin = std::numeric_limits<std::int64_t>::min();
    static const BigInt kMax = std::numeric_limits<std::int64_t>::max();
    if (value < kMin || value > kMax) return std::nullopt;
    return static_cast<std::int64_t>(value);
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, end);
}

BigInt parse_bigint(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty() || text.find_first_not_of("0123456789") != std::string_view::npos) {
        throw std::invalid_argument("not a decimal integer: " + std::string(text));
    }
    const auto first = text.find_first_not_of('0');
    BigInt value = first == std::string_view::npos ? BigInt(0) : BigInt(std::string(text.substr(first)));
    return negative ? BigInt(-value) : value;
}

}  // namespace prolite
