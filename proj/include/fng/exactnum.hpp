// Exact scalar arithmetic: arbitrary-precision rationals and base-n dyadic-style
// numbers ("n-adics", denominators restricted to powers of a fixed base).
// Everything downstream (PL maps, orbit computations, window tests) is exact;
// no floating point anywhere in the library.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace fng {

using Int = boost::multiprecision::cpp_int;

class Error : public std::runtime_error {
public:
  enum class Kind {
    Domain,        // argument outside the documented domain
    Parse,         // malformed text input (message carries the offset)
    BaseMismatch,  // mixing n-adics over different bases
    NotCoprime,    // multiplicative order of non-coprime pair
    Budget,        // a search cap was exhausted
    Unsupported,   // operation defined but not available for these inputs
  };

  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind k, const std::string& msg) {
  throw Error(k, msg);
}

Int pow_int(Int base, long e);  // e >= 0

// Reduced fraction, denominator always positive. Immutable after construction.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(Int n) : num_(std::move(n)), den_(1) {}
  Rational(long n) : num_(n), den_(1) {}
  Rational(Int n, Int d);
  Rational(long n, long d) : Rational(Int(n), Int(d)) {}

  const Int& num() const { return num_; }
  const Int& den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ == 0 ? 0 : (num_ > 0 ? 1 : -1); }

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;  // Domain error on zero divisor

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }
  bool operator<=(const Rational& o) const { return num_ * o.den_ <= o.num_ * den_; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  Int floor() const;

  // "p/q", denominator always printed ("0/1", "2/1", "-3/4").
  std::string str() const;
  // Accepts "p" and "p/q" with an optional leading '-'.
  static Rational parse(const std::string& s);

private:
  Int num_, den_;
};

// m / base^e with base >= 2, e >= 0, and base ∤ m unless e = 0.  The mantissa
// may be any integer (intermediate values in PL arithmetic leave [0,1]).
// Mixed-base arithmetic is an error, not a coercion.
class NAdic {
public:
  NAdic(int base, Int mantissa, long exponent);

  static NAdic zero(int base) { return NAdic(base, 0, 0); }
  static NAdic one(int base) { return NAdic(base, 1, 0); }

  int base() const { return base_; }
  const Int& mantissa() const { return man_; }
  long exponent() const { return exp_; }
  int sign() const { return man_ == 0 ? 0 : (man_ > 0 ? 1 : -1); }

  Rational value() const;

  NAdic operator-() const { return NAdic(base_, -man_, exp_); }
  NAdic operator+(const NAdic& o) const;
  NAdic operator-(const NAdic& o) const;
  NAdic operator*(const NAdic& o) const;
  // Multiplication by base^k, k of either sign; always stays n-adic.
  NAdic mul_pow(long k) const;

  bool operator==(const NAdic& o) const;
  bool operator!=(const NAdic& o) const { return !(*this == o); }
  bool operator<(const NAdic& o) const;
  bool operator<=(const NAdic& o) const;
  bool operator>(const NAdic& o) const { return o < *this; }
  bool operator>=(const NAdic& o) const { return o <= *this; }

  // "m/base^e", exponent always printed ("3/2^3", "0/2^0").
  std::string str() const;
  static NAdic parse(const std::string& s);

private:
  void check_base(const NAdic& o) const;
  int base_;
  Int man_;
  long exp_;
};

// Smallest representation of x over powers of `base`, if one exists:
// is_nadic(3/8, 2) = 3/2^3, is_nadic(1/3, 2) = nullopt, is_nadic(5/36, 6) = 5/6^2.
std::optional<NAdic> is_nadic(const Rational& x, int base);

// Order of n modulo m (m >= 1, gcd(n, m) = 1; mult_order(n, 1) = 1).
long mult_order(int n, const Int& m);

// q = q' * d with gcd(q', n) = 1 and d | n^l minimal:
// coprime_part(12, 2) = (3, 2), coprime_part(8, 2) = (1, 3), coprime_part(45, 3) = (5, 2).
std::pair<Int, long> coprime_part(const Int& q, int n);

// The n-adic in the open interval (lo, hi) with the least exponent, ties
// broken by least mantissa.  Deterministic pick used by gap constructions.
NAdic nadic_between(const Rational& lo, const Rational& hi, int base);

}  // namespace fng
