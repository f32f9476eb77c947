#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fng/nonlamplike.hpp"

#include <algorithm>
#include <set>

using namespace fng;

namespace {

bool refuted(const VerdictT<PLMap>& v) { return std::holds_alternative<RefutedT<PLMap>>(v); }
bool dominates(const VerdictT<PLMap>& v) { return std::holds_alternative<Dominates>(v); }

}  // namespace

TEST_CASE("tau sequence: frozen heads, pull-back coherence, strict decrease") {
  TauSequence tau(2);
  CHECK(tau.tau(0).value() == Rational(1, 2));
  CHECK(tau.tau(1).value() == Rational(1, 4));
  CHECK(tau.tau(2).value() == Rational(1, 8));
  CHECK(tau.tau(3).value() == Rational(3, 32));
  CHECK(tau.tau(5).value() == Rational(7, 128));

  // tau_{2^i j} = tau_j . a^{-i}
  for (Index j : {1, 3, 5, 7, 9})
    for (long i = 0; i <= 6; ++i)
      CHECK(tau.tau(j << i).value() == orbit_point(tau.tau(j).value(), -i, tau.a()));

  for (Index j = 0; j < 64; ++j) CHECK(tau.tau(j + 1) < tau.tau(j));
  // odd entries sit strictly inside their gap
  for (Index k = 0; k < 32; ++k) {
    CHECK(tau.tau(2 * k + 2) < tau.tau(2 * k + 1));
    CHECK(tau.tau(2 * k + 1) < tau.tau(2 * k));
  }

  TauSequence tau3(3);
  CHECK(tau3.tau(1).value() == Rational(1, 9));
  CHECK(tau3.tau(2).value() == Rational(1, 27));
  CHECK(tau3.tau(3).value() == Rational(2, 81));
  CHECK(tau3.tau(5).value() == Rational(7, 729));
  for (Index j = 0; j < 48; ++j) CHECK(tau3.tau(j + 1) < tau3.tau(j));
}

TEST_CASE("tau sequence: custom base map and parameter validation") {
  TauSequence def(2);
  // same construction spelled explicitly reproduces the default
  TauSequence custom(standard_generators(2).gens[0], NAdic(2, 1, 2));
  for (Index j = 1; j <= 20; ++j) CHECK(custom.tau(j) == def.tau(j));

  CHECK_THROWS_AS(TauSequence(standard_generators(2).gens[0], NAdic(2, 1, 1)),
                  Error);  // tau_1 = r not allowed
  CHECK_THROWS_AS(TauSequence(standard_generators(2).gens[0], NAdic(3, 1, 2)), Error);
  CHECK_THROWS_AS(TauSequence(PLMap::identity(2), NAdic(2, 1, 2)), Error);
  // a_1 fixes a neighbourhood of 0, so it cannot drive the sequence
  CHECK_THROWS_AS(TauSequence(standard_generators(3).gens[1], NAdic(3, 1, 2)), Error);
  CHECK_THROWS_AS(def.tau(-1), Error);
}

TEST_CASE("tau index search: first_at_or_below brackets the value") {
  TauSequence tau(2);
  for (Index j = 1; j <= 300; j += 7) {
    Index found = tau.first_at_or_below(tau.tau(j).value());
    CHECK(found == j);  // exact hits
  }
  // strictly-inside-gap values land on the lower neighbour
  Rational mid = (tau.tau(8).value() + tau.tau(7).value()) / Rational(2);
  CHECK(tau.first_at_or_below(mid) == 8);
  CHECK(tau.first_at_or_below(Rational(1, 2)) == 1);
}

TEST_CASE("closure: frozen example, closure law, minimality") {
  auto st = stilde({1}, 40);
  CHECK(st == std::vector<Index>({1, 2, 4, 8, 16, 31, 32, 33}));
  CHECK(stilde({}, 1000).empty());

  auto big = stilde({3}, 5000);
  std::set<Index> in(big.begin(), big.end());
  for (Index x : big) {
    if (2 * x <= 5000) CHECK(in.count(2 * x) == 1);
    if (32 * x - 1 <= 5000) CHECK(in.count(32 * x - 1) == 1);
    if (32 * x + 1 <= 5000) CHECK(in.count(32 * x + 1) == 1);
  }

  // minimality: deleting any non-root element leaves some parent childless
  for (Index gone : st) {
    if (gone == 1) continue;
    std::set<Index> t(st.begin(), st.end());
    t.erase(gone);
    bool closed = true;
    for (Index y : t) {
      if (2 * y <= 40 && !t.count(2 * y)) closed = false;
      if (32 * y - 1 <= 40 && !t.count(32 * y - 1)) closed = false;
      if (32 * y + 1 <= 40 && !t.count(32 * y + 1)) closed = false;
    }
    CHECK_FALSE(closed);
  }

  CHECK(stilde({1}, 400, 6) ==
        std::vector<Index>({1, 2, 4, 8, 16, 32, 63, 64, 65, 126, 127, 128, 129, 130, 252, 254,
                            255, 256, 257, 258, 260}));
  CHECK_THROWS_AS(stilde({1}, 40, 4), Error);   // shift below the supported range
  CHECK_THROWS_AS(stilde({2}, 40), Error);      // even seed
  CHECK_THROWS_AS(stilde({1}, Index(1) << 60), Error);
}

TEST_CASE("closure decision agrees with enumeration") {
  std::vector<Index> S = {3, 5};
  auto st = stilde(S, 5000);
  StildeDecider dec(S);
  for (Index j = 1; j <= 5000; ++j)
    CHECK(dec.contains(j) == std::binary_search(st.begin(), st.end(), j));
  CHECK(dec.contains((Index(3) << 40) + (Index(1) << 35)));  // 2^40*3 + 2^35 = 2^35*(32*3+1)
  CHECK_FALSE(dec.contains((Index(3) << 40) + 3));
}

TEST_CASE("closure elements decompose as dilate plus small error") {
  // every x in the closure of {3} is 2^p*3 + eps with 16|eps| < 2^p
  auto st = stilde({3}, 1000000);
  CHECK(st.size() > 100);
  for (Index x : st) {
    bool ok = false;
    for (long p = 0; !ok && (Index(3) << p) <= 16 * x; ++p) {
      Index eps = x - (Index(3) << p);
      if (eps < 0) eps = -eps;
      ok = 16 * eps < (Index(1) << p);
    }
    CHECK(ok);
  }
}

TEST_CASE("good odd sets: greedy values, sweep, separation") {
  CHECK(good_odd_set(1).xs == std::vector<Index>({3}));
  OddSet six = good_odd_set(6);
  CHECK(six.xs == std::vector<Index>({3, 5, 9, 17, 33, 65}));
  CHECK_FALSE(odd_set_violation(six.xs, 40).has_value());
  for (std::size_t k = 1; k < six.xs.size(); ++k) {
    CHECK(six.xs[k] > six.xs[k - 1]);
    CHECK(six.xs[k] > (Index(1) << (k + 1)));
    CHECK(six.xs[k] % 2 == 1);
  }

  auto bad = odd_set_violation({3, 97}, 40);
  REQUIRE(bad.has_value());
  CHECK(std::get<0>(*bad) == 3);
  CHECK(std::get<1>(*bad) == 97);
  CHECK(std::get<2>(*bad) == 5);  // 97 = 2^5*3 + 1

  CHECK_THROWS_AS(good_odd_set(0), Error);
}

TEST_CASE("window membership: fixing the tau points is enough") {
  TauSequence tau(2);
  CHECK(qs_member(PLMap::identity(2), {3}, tau));
  // elements supported in a single gap never touch a window
  for (Index j = 1; j <= 6; ++j) {
    PLMap g = bump_in(tau.tau(j + 1), tau.tau(j));
    CHECK(qs_member(g, {1}, tau));
    CHECK(qs_member(g, {3}, tau));
    CHECK(qs_member(invert(g), {3}, tau));
  }
  // anything supported above tau_1 is free
  CHECK(qs_member(bump_in(tau.tau(1), NAdic(2, 7, 3)), {3}, tau));
  CHECK(qs_member(transplant(make_bump(2), NAdic(2, 1, 2), NAdic(2, 1, 1)), {3}, tau));
}

TEST_CASE("window membership: moves inside one window stay members") {
  TauSequence tau(2);
  // support (tau_4, tau_2) moves tau_3 only; its window is exactly that gap
  PLMap g = bump_in(tau.tau(4), tau.tau(2));
  CHECK(qs_member(g, {1}, tau));
  CHECK(qs_member(g, {3}, tau));
  for (int m = 2; m <= 12; m += 5) CHECK(qs_member(power(g, m), {3}, tau));
}

TEST_CASE("window membership: a wide bump eventually breaks a window") {
  TauSequence tau(2);
  PLMap g = bump_in(tau.tau(5), tau.tau(2));  // moves tau_3 and tau_4
  auto r1 = qs_member_report(g, {1}, tau);
  CHECK(r1.member);
  CHECK(r1.eps == tau.tau(5));
  CHECK(r1.n_eps == 5);
  int first_bad = 0;
  for (int m = 1; m <= 16 && !first_bad; ++m)
    if (!qs_member(power(g, m), {1}, tau)) first_bad = m;
  CHECK(first_bad == 3);  // g^3 pushes tau_4 past tau_3
  auto r3 = qs_member_report(power(g, 3), {1}, tau);
  CHECK_FALSE(r3.member);
  CHECK(*r3.violated_s == 4);
  // under {3} the inverse drags tau_3 below tau_4; under {9} nothing is watched
  auto r3b = qs_member_report(power(g, 3), {3}, tau);
  CHECK_FALSE(r3b.member);
  CHECK(*r3b.violated_s == 3);
  CHECK(qs_member(power(g, 3), {9}, tau));
}

TEST_CASE("window membership: domain checks") {
  TauSequence tau(2);
  CHECK_THROWS_AS(qs_member(alpha(2), {3}, tau), Error);                       // reversal
  CHECK_THROWS_AS(qs_member(standard_generators(2).gens[0], {3}, tau), Error); // slope at 0
  CHECK_THROWS_AS(qs_member(PLMap::identity(3), {3}, tau), Error);             // base mismatch
  CHECK_THROWS_AS(qs_member(PLMap::identity(2), {4}, tau), Error);             // even index
}

TEST_CASE("movers: every grid point of (0,1) is moved by a certified member") {
  TauSequence tau(2);
  std::vector<Index> S = {3};
  for (int k = 1; k <= 50; ++k) {
    Rational t(k, 51);
    PLMap mv = qs_mover(t, S, tau);
    CHECK(evaluate(mv, t) != t);
    CHECK(qs_member(mv, S, tau));
  }
  // exactly on a tau point, and deep below tau_1
  PLMap at_tau3 = qs_mover(Rational(3, 32), S, tau);
  CHECK(evaluate(at_tau3, Rational(3, 32)) == Rational(7, 64));
  PLMap deep = qs_mover(Rational(1, 5000), S, tau);
  CHECK(evaluate(deep, Rational(1, 5000)) != Rational(1, 5000));
  CHECK(qs_member(deep, S, tau));
  CHECK_THROWS_AS(qs_mover(Rational(0), S, tau), Error);
  CHECK_THROWS_AS(qs_mover(Rational(1), S, tau), Error);
}

TEST_CASE("entry exponent: conjugation drives any element into the family") {
  TauSequence tau(2);
  CHECK(qs_entry_exponent(PLMap::identity(2), {3}, tau) == 0);
  CHECK(qs_entry_exponent(bump_in(tau.tau(4), tau.tau(3)), {3}, tau) == 0);

  PLMap bad = power(bump_in(tau.tau(5), tau.tau(2)), 3);  // violates at s=4
  long k = qs_entry_exponent(bad, {1}, tau);
  CHECK(k > 0);
  CHECK(qs_member(conjugate(bad, power(tau.a(), k)), {1}, tau));
  CHECK_FALSE(qs_member(conjugate(bad, power(tau.a(), k - 1)), {1}, tau));

  PLMap seeded = random_commutator(2, 99, 3);
  if (!seeded.is_identity()) {
    long ks = qs_entry_exponent(seeded, {3}, tau);
    CHECK(qs_member(conjugate(seeded, power(tau.a(), ks)), {3}, tau));
  }
}

TEST_CASE("products: violating pairs exist exactly below the closure shift") {
  TauSequence tau(2);
  std::vector<Index> S = {3};
  for (long k = 0; k < 5; ++k) {
    auto pv = qs_product_violation(S, tau, k);
    REQUIRE(pv.has_value());
    auto& [g, h] = *pv;
    CHECK(qs_member(g, S, tau));
    CHECK(qs_member(h, S, tau));
    PLMap bad = conjugate(compose(g, h), power(tau.a(), k));
    CHECK_FALSE(qs_member(bad, S, tau));
  }
  CHECK_FALSE(qs_product_violation(S, tau, 5).has_value());
  CHECK_FALSE(qs_product_violation(S, tau, 9).has_value());
  CHECK_FALSE(qs_product_violation({}, tau, 2).has_value());

  // with a larger closure shift the threshold moves with it
  CHECK(qs_product_violation(S, tau, 5, 6).has_value());
  CHECK_FALSE(qs_product_violation(S, tau, 6, 6).has_value());
}

TEST_CASE("products: the shift exponent always re-confines sampled pairs") {
  TauSequence tau(2);
  std::vector<Index> S = {3, 5};
  std::vector<PLMap> members;
  for (Index j = 1; j <= 5; ++j) members.push_back(bump_in(tau.tau(j + 1), tau.tau(j)));
  members.push_back(power(bump_in(tau.tau(4), tau.tau(2)), 2));
  members.push_back(invert(members[1]));
  PLMap a5 = power(tau.a(), 5);
  for (const PLMap& g : members)
    for (const PLMap& h : members) {
      REQUIRE(qs_member(g, S, tau));
      REQUIRE(qs_member(h, S, tau));
      CHECK(qs_member(conjugate(compose(g, h), a5), S, tau));
    }
}

TEST_CASE("comparison: subset containment is exact and refutations replay") {
  TauSequence tau(2);
  Budget b;
  b.k_max = 16;
  CHECK(dominates(qs_compare({3}, {3, 5}, tau, b)));
  CHECK(dominates(qs_compare({3, 5}, {3, 5}, tau, b)));
  CHECK(dominates(qs_compare({}, {5}, tau, b)));
  CHECK(std::get<Dominates>(qs_compare({3}, {3}, tau, b)).k == 0);

  auto v = qs_compare({3, 5}, {3}, tau, b);
  REQUIRE(refuted(v));
  auto& ref = std::get<RefutedT<PLMap>>(v);
  CHECK(ref.k_max == 16);
  CHECK_FALSE(qs_member(ref.witness, {3, 5}, tau));
  for (long k : {0L, 7L, 16L})
    CHECK(qs_member(conjugate(ref.witness, power(tau.a(), -k)), {3}, tau));

  // incomparable pair refutes in both directions
  CHECK(refuted(qs_compare({3, 5}, {3, 9}, tau, b)));
  CHECK(refuted(qs_compare({3, 9}, {3, 5}, tau, b)));

  CHECK_THROWS_AS(qs_compare({3, 97}, {3}, tau, b), Error);  // 97 sits on a dilate of 3
  Budget deep;
  deep.k_max = 58;  // index range cannot host the deepest witnesses: honest give-up
  CHECK(std::holds_alternative<Inconclusive>(qs_compare({5}, {3}, tau, deep)));
}

TEST_CASE("comparison: the subset lattice of a good odd set embeds exactly") {
  TauSequence tau(2);
  std::vector<Index> base = good_odd_set(4).xs;
  Budget b;
  b.k_max = 6;
  for (int ms = 0; ms < 16; ++ms)
    for (int mr = 0; mr < 16; ++mr) {
      std::vector<Index> S, R;
      for (int i = 0; i < 4; ++i) {
        if (ms & (1 << i)) S.push_back(base[i]);
        if (mr & (1 << i)) R.push_back(base[i]);
      }
      bool subset = (ms & mr) == ms;
      auto v = qs_compare(S, R, tau, b);
      CHECK(dominates(v) == subset);
      CHECK(refuted(v) == !subset);
    }
}
