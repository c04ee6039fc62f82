#pragma once

// Number modes. Every numeric algorithm in the library is a template over a
// scalar type satisfying `Scalar`: either exact `Rational` (GMP-backed) or
// `double`. Exact mode compares with ==, float mode with an absolute tolerance.

#include <boost/multiprecision/gmp.hpp>

#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include "recomb/error.hpp"

namespace recomb {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

template <class S>
concept Scalar = std::same_as<S, Rational> || std::same_as<S, double>;

template <Scalar S>
inline constexpr bool is_exact_v = std::same_as<S, Rational>;

enum class NumberMode { exact, floating };

inline std::string_view to_string(NumberMode m) { return m == NumberMode::exact ? "exact" : "float"; }

inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double to_double(double x) { return x; }

/// Exact conversion from a double (every finite double is a dyadic rational).
inline Rational to_rational(double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite value cannot be made rational");
    return Rational(x);
}
inline Rational to_rational(const Rational& x) { return x; }

template <Scalar S>
S scalar_cast(const Rational& x) {
    if constexpr (is_exact_v<S>)
        return x;
    else
        return to_double(x);
}

/// Equality in the active number mode: exact for rationals, |a-b| <= tol for doubles.
template <Scalar S>
bool approx_equal(const S& a, const S& b, double tol) {
    if constexpr (is_exact_v<S>) {
        (void)tol;
        return a == b;
    } else {
        return std::abs(a - b) <= tol;
    }
}

template <Scalar S>
S pow_int(const S& base, unsigned exponent) {
    S result(1);
    S b = base;
    while (exponent) {
        if (exponent & 1u) result *= b;
        exponent >>= 1;
        if (exponent) b *= b;
    }
    return result;
}

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Decimal literal [-+]digits[.digits][(e|E)[-+]digits] as an exact rational.
// GMP reads a leading 0 as an octal prefix.
inline BigInt decimal_integer(std::string_view digits) {
    const auto first = digits.find_first_not_of('0');
    return first == std::string_view::npos ? BigInt(0) : BigInt(std::string(digits.substr(first)));
}

inline Rational parse_decimal(std::string_view text, std::string_view original) {
    auto fail = [&] { throw ValidationError("invalid number '" + std::string(original) + "'"); };
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_text = text.substr(e + 1);
        text = text.substr(0, e);
        bool exp_negative = false;
        if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
            exp_negative = exp_text.front() == '-';
            exp_text.remove_prefix(1);
        }
        if (!all_digits(exp_text) || exp_text.size() > 6) fail();
        exponent = std::stol(std::string(exp_text));
        if (exp_negative) exponent = -exponent;
    }
    std::string digits;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view whole = text.substr(0, dot);
        std::string_view frac = text.substr(dot + 1);
        if (whole.empty() && frac.empty()) fail();
        if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))) fail();
        digits = std::string(whole) + std::string(frac);
        exponent -= static_cast<long>(frac.size());
    } else {
        if (!all_digits(text)) fail();
        digits = std::string(text);
    }
    BigInt numerator = decimal_integer(digits);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    Rational value = exponent >= 0 ? Rational(numerator * scale) : Rational(numerator, scale);
    return negative ? Rational(-value) : value;
}

}  // namespace detail

/// Parses `p/q`, an integer, or a decimal literal into an exact rational.
inline Rational parse_rational(std::string_view text) {
    const std::string_view original = text;
    text = detail::trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string_view num = detail::trim(text.substr(0, slash));
        std::string_view den = detail::trim(text.substr(slash + 1));
        bool negative = false;
        if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
            negative = num.front() == '-';
            num.remove_prefix(1);
        }
        if (!detail::all_digits(num) || !detail::all_digits(den))
            throw ValidationError("invalid rational '" + std::string(original) + "'");
        BigInt d = detail::decimal_integer(den);
        if (d == 0) throw ValidationError("zero denominator in '" + std::string(original) + "'");
        BigInt n = detail::decimal_integer(num);
        return Rational(negative ? BigInt(-n) : n, d);
    }
    return detail::parse_decimal(text, original);
}

template <Scalar S>
S parse_scalar(std::string_view text) {
    if constexpr (is_exact_v<S>) {
        return parse_rational(text);
    } else {
        std::string_view t = detail::trim(text);
        if (auto slash = t.find('/'); slash != std::string_view::npos)
            return to_double(parse_rational(t));
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
        if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
            throw ValidationError("invalid number '" + std::string(text) + "'");
        return value;
    }
}

/// `p/q` (or `p`) for rationals; shortest round-trip decimal for doubles.
inline std::string format_scalar(const Rational& x) { return x.str(); }

inline std::string format_scalar(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace recomb
