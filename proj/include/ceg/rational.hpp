#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "ceg/error.hpp"

namespace ceg {

/// Exact probability value. Always kept in lowest terms with a positive
/// denominator by the backend.
using Rat = boost::multiprecision::cpp_rational;

/// Arbitrary-precision nonnegative path counts.
using BigCount = boost::multiprecision::cpp_int;

inline std::string to_string(const Rat& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// cpp_int reads a leading 0 as an octal prefix.
inline BigCount from_digits(std::string_view digits) {
  auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? BigCount(0) : BigCount(std::string(digits.substr(first)));
}

inline BigCount pow10(unsigned n) {
  BigCount r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

inline Rat floor_rat(const Rat& x) {
  BigCount n = boost::multiprecision::numerator(x);
  BigCount d = boost::multiprecision::denominator(x);
  BigCount q = n / d;
  if (n < 0 && q * d != n) q -= 1;
  return Rat(q);
}

// Simplest fraction in [lo, hi], 0 <= lo <= hi (Stern-Brocot descent).
inline Rat simplest_between(const Rat& lo, const Rat& hi) {
  Rat fl = floor_rat(lo);
  if (fl == lo) return fl;
  if (fl + 1 <= hi) return fl + 1;
  Rat rest = simplest_between(1 / (hi - fl), 1 / (lo - fl));
  return fl + 1 / rest;
}

}  // namespace detail

/// Parses "num/den", an integer, or a plain decimal such as "0.25" or
/// "2.5e-1". Decimal input is converted exactly.
inline Rat parse_rat(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::SemanticError, "malformed probability '" + std::string(text) + "'"); };
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) throw fail();

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) throw fail();
    BigCount d = detail::from_digits(den);
    if (d == 0) throw Error(ErrorCode::SemanticError, "zero denominator in '" + std::string(text) + "'");
    Rat r(detail::from_digits(num), d);
    return negative ? Rat(-r) : r;
  }

  std::string_view mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    auto exp_text = s.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!detail::all_digits(exp_text) || exp_text.size() > 6) throw fail();
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
  }
  std::string_view int_part = mantissa;
  std::string_view frac_part;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    int_part = mantissa.substr(0, dot);
    frac_part = mantissa.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) throw fail();
  if (!int_part.empty() && !detail::all_digits(int_part)) throw fail();
  if (!frac_part.empty() && !detail::all_digits(frac_part)) throw fail();

  std::string digits = std::string(int_part) + std::string(frac_part);
  BigCount n = detail::from_digits(digits);
  exponent -= static_cast<long>(frac_part.size());
  Rat r = exponent >= 0 ? Rat(n * detail::pow10(static_cast<unsigned>(exponent)))
                        : Rat(n, detail::pow10(static_cast<unsigned>(-exponent)));
  return negative ? Rat(-r) : r;
}

/// Tolerance for decimal ingestion. When set, each parsed value is replaced
/// by the simplest fraction within epsilon of it, so "0.333333333" becomes
/// 1/3 and florets written with truncated decimals still sum to exactly 1.
struct DecimalSnap {
  Rat epsilon = Rat(1, 1000000000);
};

inline Rat snap_rat(const Rat& value, const Rat& epsilon) {
  Rat lo = value - epsilon;
  if (lo < 0) lo = 0;
  return detail::simplest_between(lo, value + epsilon);
}

inline Rat parse_rat(std::string_view text, const std::optional<DecimalSnap>& snap) {
  Rat r = parse_rat(text);
  if (snap && text.find('/') == std::string_view::npos) r = snap_rat(r, snap->epsilon);
  return r;
}

}  // namespace ceg
