#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <type_traits>

#include <gmpxx.h>

namespace skewlin {

/// Scalar field selected for a run.
enum class Field { real, complex, rational };

std::string to_string(Field field);
Field parse_field(std::string_view text);

/// First-order dual number val + eps * e with e^2 = 0.
///
/// Used to push a tangent direction through the jet arithmetic of the formal
/// stage, i.e. the chain rule at jet level.
template <class S>
struct Dual {
  S val{};
  S eps{};

  Dual() = default;
  Dual(int v) : val(v), eps(0) {}          // NOLINT(google-explicit-constructor)
  Dual(double v) : val(v), eps(0) {}       // NOLINT(google-explicit-constructor)
  Dual(const S& v, const S& e) : val(v), eps(e) {}
  template <class U = S, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
  Dual(const S& v) : val(v), eps(0) {}     // NOLINT(google-explicit-constructor)

  Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  Dual& operator*=(const Dual& o) {
    eps = eps * o.val + val * o.eps;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const S inv = S(1) / o.val;
    eps = (eps - val * inv * o.eps) * inv;
    val *= inv;
    return *this;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend Dual operator-(const Dual& a) { return Dual(-a.val, -a.eps); }
  friend bool operator==(const Dual& a, const Dual& b) { return a.val == b.val && a.eps == b.eps; }
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  using Modulus = double;
  static constexpr bool exact = false;
  static constexpr bool complex = false;
  static Modulus modulus(double x) { return std::abs(x); }
  static double magnitude(double x) { return std::abs(x); }
  static std::complex<double> to_complex(double x) { return {x, 0.0}; }
  static double from_complex(std::complex<double> z) { return z.real(); }
};

template <>
struct ScalarTraits<std::complex<double>> {
  using Modulus = double;
  static constexpr bool exact = false;
  static constexpr bool complex = true;
  static Modulus modulus(const std::complex<double>& x) { return std::abs(x); }
  static double magnitude(const std::complex<double>& x) { return std::abs(x); }
  static std::complex<double> to_complex(const std::complex<double>& x) { return x; }
  static std::complex<double> from_complex(std::complex<double> z) { return z; }
};

template <>
struct ScalarTraits<mpq_class> {
  using Modulus = mpq_class;
  static constexpr bool exact = true;
  static constexpr bool complex = false;
  static Modulus modulus(const mpq_class& x) { return mpq_class(abs(x)); }
  static double magnitude(const mpq_class& x) { return std::abs(x.get_d()); }
  static std::complex<double> to_complex(const mpq_class& x) { return {x.get_d(), 0.0}; }
  static mpq_class from_complex(std::complex<double> z) { return mpq_class(z.real()); }
};

template <class S>
struct ScalarTraits<Dual<S>> {
  using Modulus = typename ScalarTraits<S>::Modulus;
  static constexpr bool exact = ScalarTraits<S>::exact;
  static constexpr bool complex = ScalarTraits<S>::complex;
  static Modulus modulus(const Dual<S>& x) { return ScalarTraits<S>::modulus(x.val); }
  static double magnitude(const Dual<S>& x) { return ScalarTraits<S>::magnitude(x.val); }
  static std::complex<double> to_complex(const Dual<S>& x) { return ScalarTraits<S>::to_complex(x.val); }
  static Dual<S> from_complex(std::complex<double> z) { return Dual<S>(ScalarTraits<S>::from_complex(z), S(0)); }
};

template <class S>
double magnitude(const S& x) {
  return ScalarTraits<S>::magnitude(x);
}

template <class S>
typename ScalarTraits<S>::Modulus modulus(const S& x) {
  return ScalarTraits<S>::modulus(x);
}

/// Double-precision value of a modulus (identity for floating types).
inline double modulus_to_double(double m) { return m; }
inline double modulus_to_double(const mpq_class& m) { return m.get_d(); }

/// Parses "p/q", a decimal, or an exponent literal into an exact rational.
/// Decimals are converted exactly from their decimal expansion.
mpq_class parse_rational(std::string_view text);

/// Parses a real number written as decimal or "p/q".
double parse_real(std::string_view text);

/// Shortest round-trip free decimal rendering with 17 significant digits.
std::string format_real(double x);
std::string format_scalar(double x);
std::string format_scalar(const std::complex<double>& z);
std::string format_scalar(const mpq_class& q);

}  // namespace skewlin
