#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fng/exactnum.hpp"

#include <numeric>
#include <random>
#include <vector>

using namespace fng;

namespace {

std::mt19937_64 rng(20260815);

long rnd(long lo, long hi) {  // inclusive, deterministic across platforms
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

Rational random_rational() {
  long n = rnd(-400, 400);
  long d = rnd(1, 400);
  return Rational(n, d);
}

Int modpow(Int b, Int e, const Int& m) {
  Int r = 1;
  b %= m;
  while (e > 0) {
    if (e % 2 == 1) r = (r * b) % m;
    b = (b * b) % m;
    e /= 2;
  }
  return r;
}

}  // namespace

TEST_CASE("rational arithmetic satisfies field identities") {
  for (int i = 0; i < 400; ++i) {
    Rational a = random_rational(), b = random_rational(), c = random_rational();
    CHECK((a + b) + c == a + (b + c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a - a == Rational(0));
    if (b != Rational(0)) CHECK((a / b) * b == a);
    CHECK(a.den() > 0);
    CHECK(Rational::parse(a.str()) == a);
  }
  CHECK(Rational(6, -4) == Rational(-3, 2));
  CHECK(Rational(-3, 2).str() == "-3/2");
  CHECK(Rational(2, 1).str() == "2/1");
  CHECK(Rational(-7, 3).floor() == -3);
  CHECK(Rational(7, 3).floor() == 2);
  CHECK_THROWS_AS(Rational(1, 0), Error);
  CHECK_THROWS_AS(Rational(1, 2) / Rational(0), Error);
}

TEST_CASE("n-adic recognition agrees with direct denominator search") {
  // Pinned cases first.
  auto a = is_nadic(Rational(3, 8), 2);
  REQUIRE(a.has_value());
  CHECK(a->mantissa() == 3);
  CHECK(a->exponent() == 3);
  CHECK(!is_nadic(Rational(1, 3), 2).has_value());
  auto b = is_nadic(Rational(5, 36), 6);
  REQUIRE(b.has_value());
  CHECK(b->mantissa() == 5);
  CHECK(b->exponent() == 2);

  // Oracle: smallest k with den | n^k found by direct trial.
  for (int i = 0; i < 600; ++i) {
    Rational x = random_rational();
    for (int base : {2, 3, 6, 10}) {
      std::optional<long> oracle;
      Int p = 1;
      for (long k = 0; k <= 64; ++k) {
        if (p % x.den() == 0) {
          oracle = k;
          break;
        }
        p *= base;
      }
      auto got = is_nadic(x, base);
      CHECK(got.has_value() == oracle.has_value());
      if (got && oracle) {
        CHECK(got->exponent() == *oracle);
        CHECK(got->value() == x);
        if (got->exponent() > 0) CHECK(got->mantissa() % base != 0);
      }
    }
  }
}

TEST_CASE("n-adic arithmetic matches rational arithmetic") {
  for (int i = 0; i < 500; ++i) {
    int base = (i % 2 == 0) ? 2 : 3;
    NAdic x(base, rnd(-200, 200), rnd(0, 8));
    NAdic y(base, rnd(-200, 200), rnd(0, 8));
    CHECK((x + y).value() == x.value() + y.value());
    CHECK((x - y).value() == x.value() - y.value());
    CHECK((x * y).value() == x.value() * y.value());
    long k = rnd(-6, 6);
    Rational pw = k >= 0 ? Rational(pow_int(base, k)) : Rational(1, pow_int(base, -k));
    CHECK(x.mul_pow(k).value() == x.value() * pw);
    CHECK((x < y) == (x.value() < y.value()));
    CHECK(NAdic::parse(x.str()) == x);
    if (x.exponent() > 0) CHECK(x.mantissa() % base != 0);
  }
  CHECK(NAdic(2, 4, 3) == NAdic(2, 1, 1));  // 4/8 = 1/2
  CHECK(NAdic(2, 0, 5) == NAdic::zero(2));
  CHECK(NAdic(2, 1, 2).str() == "1/2^2");
  CHECK_THROWS_AS(NAdic(2, 1, 1) + NAdic(3, 1, 1), Error);
  CHECK_THROWS_AS(NAdic(1, 1, 0), Error);
}

TEST_CASE("multiplicative order: pinned values, errors, totient divisibility") {
  CHECK(mult_order(2, 3) == 2);
  CHECK(mult_order(2, 1) == 1);
  CHECK(mult_order(7, 1) == 1);
  CHECK(mult_order(3, 8) == 2);
  CHECK(mult_order(10, 7) == 6);
  CHECK_THROWS_AS(mult_order(2, 4), Error);
  CHECK_THROWS_AS(mult_order(6, 9), Error);

  // phi sieve up to 10^4; order divides phi and n^order = 1 (independent modpow).
  const int M = 10000;
  std::vector<int> phi(M + 1);
  for (int i = 0; i <= M; ++i) phi[i] = i;
  for (int p = 2; p <= M; ++p)
    if (phi[p] == p)  // p prime
      for (int j = p; j <= M; j += p) phi[j] -= phi[j] / p;

  for (int m = 2; m <= M; ++m) {
    int n = (m % 2 == 1) ? 2 : (m % 3 != 0 ? 3 : (m % 5 != 0 ? 5 : 7));
    if (std::gcd(static_cast<long>(n), static_cast<long>(m)) != 1) continue;
    long o = mult_order(n, m);
    CHECK(phi[m] % o == 0);
    CHECK(modpow(n, o, m) == 1);
    if (o > 1) CHECK(modpow(n, o - 1, m) != 1);
  }
}

TEST_CASE("coprime part: pinned values and reassembly") {
  auto [q1, l1] = coprime_part(12, 2);
  CHECK(q1 == 3);
  CHECK(l1 == 2);
  auto [q2, l2] = coprime_part(8, 2);
  CHECK(q2 == 1);
  CHECK(l2 == 3);
  auto [q3, l3] = coprime_part(45, 3);
  CHECK(q3 == 5);
  CHECK(l3 == 2);

  for (int i = 0; i < 400; ++i) {
    Int q = rnd(1, 100000);
    int n = (i % 3 == 0) ? 2 : (i % 3 == 1 ? 3 : 6);
    auto [qp, l] = coprime_part(q, n);
    Int d = q / qp;
    CHECK(qp * d == q);
    CHECK(boost::multiprecision::gcd(qp, Int(n)) == 1);
    CHECK(pow_int(n, l) % d == 0);                  // d | n^l
    if (l > 0) CHECK(pow_int(n, l - 1) % d != 0);   // and l is minimal
  }
}

TEST_CASE("parse errors carry an offset") {
  for (const char* bad : {"", "1/", "1/0", "x", "3/4x"}) {
    try {
      Rational::parse(bad);
      CHECK_MESSAGE(false, "expected parse error for: ", bad);
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::Parse);
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(NAdic::parse("3/2"), Error);
  CHECK_THROWS_AS(NAdic::parse("3/2^-1"), Error);
  CHECK_THROWS_AS(NAdic::parse("3/1^2"), Error);
  CHECK(NAdic::parse("-5/3^2") == NAdic(3, -5, 2));
}
