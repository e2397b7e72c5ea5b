// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace prolite {

using BigInt = boost::multiprecision::cpp_int;

class ZeroDenominator : public std::domain_error {
public:
    ZeroDenominator() : std::domain_error("zero denominator") {}
};

/// Exact rational number in canonical form: gcd(|num|, den) = 1 and den > 0.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(const BigInt& integer) : num_(integer), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t integer) : num_(integer), den_(1) {}   // NOLINT(implicit)

    /// Builds the canonical form of num/den. Throws ZeroDenominator when den == 0.
    static Rational normalize(BigInt num, BigInt den);

    /// Exact value of a finite double (every finite double is a dyadic rational).
    static Rational from_double(double value);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_.is_zero(); }
    int sign() const { return num_.sign(); }

    double to_double() const;
    /// True when to_double() represents this value without rounding.
    bool double_exact() const;

    std::string str() const;  // "N" or "N/D"

    Rational operator-() const;
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    BigInt floor() const;
    BigInt ceil() const;
    Rational abs() const { return sign() < 0 ? -*this : *this; }

private:
    Rational(BigInt num, BigInt den, int /*trusted*/) : num_(std::move(num)), den_(std::move(den)) {}

    BigInt num_;
    BigInt den_;
};

/// Canonical rational num/den; sign carried on the numerator.
inline Rational rat_normalize(const BigInt& num, const BigInt& den) { return Rational::normalize(num, den); }

/// Floor division and the matching modulus (result takes the sign of the divisor).
BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt floor_mod(const BigInt& a, const BigInt& b);

/// Integer square root when `value` is a perfect square.
std::optional<BigInt> exact_isqrt(const BigInt& value);

std::optional<std::int64_t> to_int64(const BigInt& value);

/// Base-10 integer text with an optional sign; leading zeros never select octal.
/// Throws std::invalid_argument on anything else.
BigInt parse_bigint(std::string_view text);

/// Shortest round-trip decimal rendering of a double ("0.8", "1e-07").
std::string format_double(double value);

}  // namespace prolite
