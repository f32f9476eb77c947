#include "fng/exactnum.hpp"

#include <boost/multiprecision/integer.hpp>

namespace fng {

namespace {

Int gcd_int(const Int& a, const Int& b) { return boost::multiprecision::gcd(a, b); }

[[noreturn]] void parse_fail(const std::string& s, std::size_t pos, const std::string& what) {
  fail(Error::Kind::Parse, "parse error at offset " + std::to_string(pos) + " in \"" + s +
                               "\": " + what);
}

// Scans an optionally-signed integer starting at pos; advances pos.
Int scan_int(const std::string& s, std::size_t& pos) {
  std::size_t start = pos;
  bool neg = false;
  if (pos < s.size() && s[pos] == '-') {
    neg = true;
    ++pos;
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    parse_fail(s, pos, "expected digit");
  Int v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    ++pos;
  }
  (void)start;
  return neg ? Int(-v) : v;
}

void expect_char(const std::string& s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    parse_fail(s, pos, std::string("expected '") + c + "'");
  ++pos;
}

}  // namespace

Int pow_int(Int base, long e) {
  if (e < 0) fail(Error::Kind::Domain, "pow_int: negative exponent");
  Int r = 1;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

Rational::Rational(Int n, Int d) : num_(std::move(n)), den_(std::move(d)) {
  if (den_ == 0) fail(Error::Kind::Domain, "rational with zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  Int g = gcd_int(num_ < 0 ? Int(-num_) : num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(num_ * o.num_, den_ * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) fail(Error::Kind::Domain, "division by zero");
  return Rational(num_ * o.den_, den_ * o.num_);
}

Int Rational::floor() const {
  Int q = num_ / den_;
  if (num_ < 0 && q * den_ != num_) --q;
  return q;
}

std::string Rational::str() const { return num_.str() + "/" + den_.str(); }

Rational Rational::parse(const std::string& s) {
  std::size_t pos = 0;
  Int n = scan_int(s, pos);
  Int d = 1;
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    d = scan_int(s, pos);
    if (d <= 0) parse_fail(s, pos, "denominator must be positive");
  }
  if (pos != s.size()) parse_fail(s, pos, "trailing characters");
  return Rational(n, d);
}

NAdic::NAdic(int base, Int mantissa, long exponent)
    : base_(base), man_(std::move(mantissa)), exp_(exponent) {
  if (base_ < 2) fail(Error::Kind::Domain, "n-adic base must be >= 2");
  if (exp_ < 0) fail(Error::Kind::Domain, "n-adic exponent must be >= 0");
  if (man_ == 0) {
    exp_ = 0;
    return;
  }
  while (exp_ > 0 && man_ % base_ == 0) {
    man_ /= base_;
    --exp_;
  }
}

void NAdic::check_base(const NAdic& o) const {
  if (base_ != o.base_)
    fail(Error::Kind::BaseMismatch, "mixed n-adic bases " + std::to_string(base_) + " and " +
                                        std::to_string(o.base_));
}

Rational NAdic::value() const { return Rational(man_, pow_int(base_, exp_)); }

NAdic NAdic::operator+(const NAdic& o) const {
  check_base(o);
  long e = std::max(exp_, o.exp_);
  Int m = man_ * pow_int(base_, e - exp_) + o.man_ * pow_int(base_, e - o.exp_);
  return NAdic(base_, m, e);
}

NAdic NAdic::operator-(const NAdic& o) const { return *this + (-o); }

NAdic NAdic::operator*(const NAdic& o) const {
  check_base(o);
  return NAdic(base_, man_ * o.man_, exp_ + o.exp_);
}

NAdic NAdic::mul_pow(long k) const {
  if (k >= 0) {
    long drop = std::min(k, exp_);
    return NAdic(base_, man_ * pow_int(base_, k - drop), exp_ - drop);
  }
  return NAdic(base_, man_, exp_ - k);
}

bool NAdic::operator==(const NAdic& o) const {
  check_base(o);
  return man_ == o.man_ && exp_ == o.exp_;
}

bool NAdic::operator<(const NAdic& o) const {
  check_base(o);
  long e = std::max(exp_, o.exp_);
  return man_ * pow_int(base_, e - exp_) < o.man_ * pow_int(base_, e - o.exp_);
}

bool NAdic::operator<=(const NAdic& o) const { return *this < o || *this == o; }

std::string NAdic::str() const {
  return man_.str() + "/" + std::to_string(base_) + "^" + std::to_string(exp_);
}

NAdic NAdic::parse(const std::string& s) {
  std::size_t pos = 0;
  Int m = scan_int(s, pos);
  expect_char(s, pos, '/');
  Int b = scan_int(s, pos);
  if (b < 2 || b > 1000000) parse_fail(s, pos, "base out of range");
  expect_char(s, pos, '^');
  Int e = scan_int(s, pos);
  if (e < 0 || e > 1000000000) parse_fail(s, pos, "exponent out of range");
  if (pos != s.size()) parse_fail(s, pos, "trailing characters");
  return NAdic(static_cast<int>(b), m, static_cast<long>(e));
}

std::optional<NAdic> is_nadic(const Rational& x, int base) {
  if (base < 2) fail(Error::Kind::Domain, "is_nadic: base must be >= 2");
  Int d = x.den();
  long k = 0;
  while (d > 1) {
    Int g = gcd_int(d, Int(base));
    if (g == 1) return std::nullopt;
    d /= g;
    ++k;
  }
  Int scale = pow_int(Int(base), k) / x.den();
  return NAdic(base, x.num() * scale, k);
}

long mult_order(int n, const Int& m) {
  if (m < 1) fail(Error::Kind::Domain, "mult_order: modulus must be >= 1");
  if (m == 1) return 1;
  if (gcd_int(Int(n), m) != 1)
    fail(Error::Kind::NotCoprime,
         "mult_order: " + std::to_string(n) + " and " + m.str() + " are not coprime");
  Int p = Int(n) % m;
  long o = 1;
  const long cap = 10000000;
  while (p != 1) {
    p = (p * n) % m;
    ++o;
    if (o > cap) fail(Error::Kind::Budget, "mult_order: iteration cap exhausted");
  }
  return o;
}

NAdic nadic_between(const Rational& lo, const Rational& hi, int base) {
  if (!(lo < hi)) fail(Error::Kind::Domain, "nadic_between: empty interval");
  Int p = 1;
  for (long e = 0; e <= 4096; ++e) {
    Rational scale(p);
    Int m = (lo * scale).floor() + 1;
    if (Rational(m) < hi * scale) return NAdic(base, m, e);
    p *= base;
  }
  fail(Error::Kind::Budget, "nadic_between: exponent cap exhausted");
}

std::pair<Int, long> coprime_part(const Int& q, int n) {
  if (q < 1) fail(Error::Kind::Domain, "coprime_part: argument must be >= 1");
  if (n < 2) fail(Error::Kind::Domain, "coprime_part: base must be >= 2");
  Int qp = q;
  for (Int g = gcd_int(qp, Int(n)); g > 1; g = gcd_int(qp, Int(n))) qp /= g;
  Int d = q / qp;
  long l = 0;
  while (d > 1) {
    d /= gcd_int(d, Int(n));
    ++l;
  }
  return {qp, l};
}

}  // namespace fng
