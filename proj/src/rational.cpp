#include "postprice/rational.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace postprice {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Rational pow10(long long e) {
  Rational r = 1;
  Rational ten = 10;
  for (long long k = 0; k < (e < 0 ? -e : e); ++k) r *= ten;
  return e < 0 ? Rational(1) / r : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
  };
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return fail();

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return fail();
    Rational d{std::string(den)};
    if (d == 0) return fail();
    result = Rational{std::string(num)} / d;
  } else {
    long long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!all_digits(exp_text) || exp_text.size() > 6) return fail();
      std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
      if (exp_negative) exponent = -exponent;
      s = s.substr(0, e);
    }
    std::string_view int_part = s;
    std::string_view frac_part;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      int_part = s.substr(0, dot);
      frac_part = s.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty()) return fail();
    if (!int_part.empty() && !all_digits(int_part)) return fail();
    if (!frac_part.empty() && !all_digits(frac_part)) return fail();
    std::string digits = std::string(int_part) + std::string(frac_part);
    result = Rational{digits} * pow10(exponent - static_cast<long long>(frac_part.size()));
  }
  return negative ? Rational(-result) : result;
}

std::string format_rational(const Rational& q) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  auto den = denominator(q);
  auto rest = den;
  int twos = 0;
  int fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return q.str();
  int digits = std::max(twos, fives);
  if (digits == 0) return numerator(q).str();

  // q * 10^digits is an integer; insert the decimal point by hand.
  Rational scaled = q * pow10(digits);
  auto scaled_int = numerator(scaled);
  bool negative = scaled_int < 0;
  if (negative) scaled_int = -scaled_int;
  std::string body = scaled_int.str();
  if (body.size() <= static_cast<std::size_t>(digits)) {
    body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
  }
  body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  return negative ? "-" + body : body;
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

Rational from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  return Rational(x);
}

Rational from_decimal_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::invalid_argument("cannot format double");
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(end - buf)));
}

Rational floor_rational(const Rational& q) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  auto num = numerator(q);
  auto den = denominator(q);
  auto quotient = num / den;  // truncates toward zero
  if (num < 0 && quotient * den != num) quotient -= 1;
  return Rational(quotient);
}

Rational ceil_rational(const Rational& q) { return -floor_rational(-q); }

bool is_multiple_of_inverse(const Rational& q, long long m) {
  Rational scaled = q * m;
  return boost::multiprecision::denominator(scaled) == 1;
}

}  // namespace postprice
