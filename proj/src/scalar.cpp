#include "skewlin/scalar.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "skewlin/errors.hpp"

namespace skewlin {

std::string to_string(Field field) {
  switch (field) {
    case Field::real: return "real";
    case Field::complex: return "complex";
    case Field::rational: return "rational";
  }
  return "real";
}

Field parse_field(std::string_view text) {
  if (text == "real") return Field::real;
  if (text == "complex") return Field::complex;
  if (text == "rational") return Field::rational;
  throw InvalidArgument("unknown field '" + std::string(text) + "' (expected real, complex or rational)");
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

mpq_class parse_decimal(const std::string& s) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) negative = s[pos++] == '-';
  std::string digits;
  int frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw InvalidArgument("malformed number '" + s + "'");
  long exponent = 0;
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    const std::string exp_text = s.substr(pos);
    if (exp_text.empty()) throw InvalidArgument("malformed number '" + s + "'");
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("malformed number '" + s + "'");
    }
    pos += used;
  }
  if (pos != s.size()) throw InvalidArgument("malformed number '" + s + "'");

  mpz_class num(digits, 10);
  exponent -= frac_digits;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  mpq_class q = exponent >= 0 ? mpq_class(num * ten_pow) : mpq_class(num, ten_pow);
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

}  // namespace

mpq_class parse_rational(std::string_view text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s);
  const mpq_class p = parse_decimal(trim(std::string_view(s).substr(0, slash)));
  const mpq_class q = parse_decimal(trim(std::string_view(s).substr(slash + 1)));
  if (q == 0) throw InvalidArgument("zero denominator in '" + s + "'");
  return p / q;
}

double parse_real(std::string_view text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    parse_decimal(s);
    return std::strtod(s.c_str(), nullptr);
  }
  const mpq_class exact = parse_rational(s);
  // Correctly rounded when numerator and denominator are exact doubles.
  const double p = parse_real(std::string_view(s).substr(0, slash));
  const double q = parse_real(std::string_view(s).substr(slash + 1));
  if (mpq_class(p) == parse_decimal(trim(std::string_view(s).substr(0, slash))) &&
      mpq_class(q) == parse_decimal(trim(std::string_view(s).substr(slash + 1))))
    return p / q;
  return exact.get_d();
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_scalar(double x) { return format_real(x); }

std::string format_scalar(const std::complex<double>& z) {
  std::string out = format_real(z.real());
  const double im = z.imag();
  out += (im < 0 || (im == 0 && std::signbit(im))) ? "-" : "+";
  out += format_real(std::abs(im));
  out += "i";
  return out;
}

std::string format_scalar(const mpq_class& q) { return q.get_str(); }

}  // namespace skewlin
