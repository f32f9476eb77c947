#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fng/confining.hpp"

#include <algorithm>
#include <set>

using namespace fng;

namespace {

const Budget kFast{40, 8, 7};

ConfFamily rs(const Rational& t) { return ConfFamily::rigid_stab(2, t); }
ConfFamily ors(const Rational& t) { return ConfFamily::open_rigid_stab(2, t); }
ConfFamily of(const Rational& t) { return ConfFamily::orbit_fixator(2, t); }
ConfFamily nof(const Rational& t) { return ConfFamily::nbhd_orbit_fixator(2, t); }

PLMap dy_bump(long ml, int el, long mr, int er) {
  return bump_in(NAdic(2, ml, el), NAdic(2, mr, er));
}

long dominates_k(const Verdict& v) {
  REQUIRE(std::holds_alternative<Dominates>(v));
  return std::get<Dominates>(v).k;
}

// Refuted witnesses must replay: outside F1 as-is, inside F2 after every
// pull-back up to the recorded exponent.
void check_refuted_replay(const Verdict& v, const ConfFamily& F1, const ConfFamily& F2) {
  REQUIRE(std::holds_alternative<RefutedT<PLMap>>(v));
  const auto& ref = std::get<RefutedT<PLMap>>(v);
  CHECK_FALSE(member(ref.witness, F1));
  PLMap ainv = invert(base_map(F1.n()));
  PLMap cur = ref.witness;
  for (long k = 0; k <= ref.k_max; ++k) {
    CHECK(member(cur, F2));
    cur = conjugate(cur, ainv);
  }
}

// Dominates(k) on exact catalog rules means real containment at k and
// failure below: spot-check by sampling.
void check_dominates_sampled(const Verdict& v, const ConfFamily& F1, const ConfFamily& F2) {
  long k = dominates_k(v);
  std::mt19937_64 rng(11);
  PLMap ak = power(base_map(F2.n()), k);
  for (const auto& g : sample_members(F2, rng, 12)) CHECK(member(conjugate(g, ak), F1));
}

}  // namespace

TEST_CASE("base map: support (0, 1/n), slope n at zero, matches the generator tuple") {
  for (int n : {2, 3, 5}) {
    PLMap a = base_map(n);
    auto runs = support(a);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].first == Rational(0, 1));
    CHECK(runs[0].second == Rational(1, n));
    CHECK(a == standard_generators(n).gens[0]);
    CHECK(evaluate(a, Rational(1, n * n * n)) == Rational(1, n * n));
  }
}

TEST_CASE("character classification") {
  auto cls = [](int n, std::vector<Rational> v) {
    return classify_character(CharVector{n, std::move(v)});
  };
  CHECK(cls(2, {Rational(0, 1), Rational(0, 1)}).cls == CharClass::Zero);
  CHECK(cls(2, {Rational(1, 1), Rational(0, 1)}).cls == CharClass::PositiveChi0);
  CHECK(cls(2, {Rational(-2, 1), Rational(0, 1)}).cls == CharClass::NegativeChi0);
  CHECK(cls(2, {Rational(0, 1), Rational(1, 2)}).cls == CharClass::PositiveChi1);
  CHECK(cls(2, {Rational(0, 1), Rational(-1, 1)}).cls == CharClass::NegativeChi1);
  auto mid = cls(4, {Rational(0, 1), Rational(3, 1), Rational(0, 1), Rational(0, 1)});
  CHECK(mid.cls == CharClass::Middle);
  CHECK(mid.i == 1);
  auto two = cls(4, {Rational(1, 1), Rational(0, 1), Rational(-1, 1), Rational(0, 1)});
  CHECK(two.cls == CharClass::TwoNonzero);
  CHECK(two.i == 0);
  CHECK(two.j == 2);
  CHECK_THROWS_AS(cls(3, {Rational(1, 1)}), Error);
}

TEST_CASE("index sets and finite differences") {
  IndexSet a = IndexSet::finite({4, 1, 2, 2});
  CHECK(a.contains(1));
  CHECK(a.contains(4));
  CHECK_FALSE(a.contains(3));
  IndexSet b = IndexSet::all_but({2});
  CHECK(b.contains(1));
  CHECK_FALSE(b.contains(2));
  CHECK(b.contains(100));
  CHECK_THROWS_AS(IndexSet::finite({0, 1}), Error);

  CHECK(finite_difference_max(IndexSet::finite({1, 2}), IndexSet::finite({1, 2, 4})) == 0);
  CHECK(finite_difference_max(IndexSet::finite({1, 2, 4}), IndexSet::finite({1, 2})) == 4);
  CHECK(finite_difference_max(IndexSet::finite({1, 5}), b) == 0);
  CHECK(finite_difference_max(IndexSet::all_but({1, 2}), b) == 0);
  CHECK(finite_difference_max(b, IndexSet::all_but({1, 2})) == 1);
  CHECK_FALSE(finite_difference_max(b, IndexSet::finite({1, 2})).has_value());
}

TEST_CASE("family construction guards") {
  CHECK_THROWS_AS(rs(Rational(1, 2)), Error);     // not below 1/n
  CHECK_THROWS_AS(rs(Rational(0, 1)), Error);
  CHECK_THROWS_AS(ConfFamily::orbit_fixator(3, Rational(1, 2)), Error);
  CHECK_THROWS_AS(ConfFamily::non_lamplike(2, {3, 6}), Error);   // even index
  CHECK_THROWS_AS(ConfFamily::non_lamplike(2, {1}), Error);      // below 3
  CHECK_THROWS_AS(ConfFamily::non_lamplike(2, {3, 25}), Error);  // 25 collides with 3*2^3
  CHECK_NOTHROW(ConfFamily::non_lamplike(2, {3, 11}));
  // lamplike window: x in [t.a^-1, t), cuts strictly inside (x, t)
  Rational t(1, 4), x(1, 8);
  CHECK_NOTHROW(ConfFamily::lamplike_product(2, t, x, {Rational(3, 16)}, IndexSet::finite({1})));
  CHECK_THROWS_AS(ConfFamily::lamplike_product(2, t, Rational(1, 16), {Rational(3, 16)},
                                               IndexSet::finite({1})),
                  Error);
  CHECK_THROWS_AS(ConfFamily::lamplike_product(2, t, x, {Rational(1, 4)}, IndexSet::finite({1})),
                  Error);
  CHECK_THROWS_AS(ConfFamily::lamplike_product(2, t, x, {}, IndexSet::finite({1})), Error);

  // conjugation exponents collapse
  ConfFamily c = ConfFamily::conjugate_by(ConfFamily::conjugate_by(rs(t), 2), -2);
  CHECK(same_description(c, rs(t)));
  CHECK(same_description(ConfFamily::conjugate_by(ConfFamily::full(2), 5), ConfFamily::full(2)));
}

TEST_CASE("membership: element preconditions") {
  ConfFamily F = rs(Rational(1, 4));
  CHECK_THROWS_AS(member(PLMap::identity(3), F), Error);  // base mismatch
  CHECK_THROWS_AS(member(alpha(2), F), Error);            // orientation
  CHECK_THROWS_AS(member(base_map(2), F), Error);         // support reaches 0
}

TEST_CASE("membership: stabilizer families at dyadic and non-dyadic thresholds") {
  ConfFamily R = rs(Rational(1, 4)), O = ors(Rational(1, 4));
  CHECK(member(PLMap::identity(2), R));
  CHECK(member(PLMap::identity(2), O));
  PLMap at = dy_bump(1, 2, 3, 3);      // support (1/4, 3/8): touches t from above
  PLMap above = dy_bump(5, 4, 3, 3);   // (5/16, 3/8)
  PLMap across = dy_bump(3, 4, 3, 3);  // (3/16, 3/8): dips below t
  CHECK(member(at, R));
  CHECK_FALSE(member(at, O));
  CHECK(member(above, R));
  CHECK(member(above, O));
  CHECK_FALSE(member(across, R));
  CHECK_FALSE(member(across, O));

  ConfFamily R3 = rs(Rational(1, 3)), O3 = ors(Rational(1, 3));
  PLMap just_above = dy_bump(3, 3, 1, 1);  // (3/8, 1/2)
  CHECK(member(just_above, R3));
  CHECK(member(just_above, O3));
  CHECK_FALSE(member(dy_bump(1, 2, 1, 1), R3));  // (1/4, 1/2) crosses 1/3
}

TEST_CASE("membership: orbit fixators, with and without neighbourhoods") {
  ConfFamily F = of(Rational(1, 4)), N = nof(Rational(1, 4));
  // orbit of 1/4 under a: ..., 1/32, 1/16, 1/8, 1/4
  PLMap gap = dy_bump(3, 4, 7, 5);  // (3/16, 7/32) inside the gap (1/8, 1/4)
  CHECK(member(gap, F));
  CHECK(member(gap, N));
  PLMap deep_gap = dy_bump(3, 6, 7, 7);  // (3/64, 7/128) inside (1/32, 1/16)
  CHECK(member(deep_gap, F));
  CHECK(member(deep_gap, N));
  PLMap toucher = dy_bump(3, 4, 1, 2);  // (3/16, 1/4): closure meets 1/4
  CHECK(member(toucher, F));
  CHECK_FALSE(member(toucher, N));
  PLMap across = dy_bump(3, 4, 5, 4);  // (3/16, 5/16) moves 1/4
  CHECK_FALSE(member(across, F));
  CHECK_FALSE(member(across, N));
  PLMap high = dy_bump(1, 1, 3, 2);  // (1/2, 3/4): above t, unconstrained
  CHECK(member(high, F));
  CHECK(member(high, N));

  // non-dyadic orbit: 1/3 has backward orbit 5/24, 5/48, ...
  ConfFamily F3 = of(Rational(1, 3)), N3 = nof(Rational(1, 3));
  PLMap slope_fix = rational_slope_fix_element(Rational(1, 3), NAdic(2, 1, 2), NAdic(2, 3, 3));
  CHECK(evaluate(slope_fix, Rational(1, 3)) == Rational(1, 3));
  CHECK(member(slope_fix, F3));
  CHECK_FALSE(member(slope_fix, N3));  // 1/3 sits inside the support closure
  PLMap in_gap = dy_bump(1, 2, 5, 4);  // (1/4, 5/16) inside (5/24, 1/3)
  CHECK(member(in_gap, F3));
  CHECK(member(in_gap, N3));
}

TEST_CASE("membership: lamplike products, cells, depths, gaps") {
  Rational t(1, 4), x(1, 8);
  std::vector<Rational> cuts{Rational(3, 16)};
  // cells at level 0: (1/8, 3/16), (3/16, 7/32), (7/32, 15/64), ...
  ConfFamily L12 = ConfFamily::lamplike_product(2, t, x, cuts, IndexSet::finite({1, 2}));
  CHECK(member(PLMap::identity(2), L12));
  CHECK(member(dy_bump(9, 6, 11, 6), L12));          // cell 1
  CHECK(member(dy_bump(25, 7, 27, 7), L12));         // cell 2
  CHECK_FALSE(member(dy_bump(57, 8, 59, 8), L12));   // cell 3 not in X
  CHECK_FALSE(member(dy_bump(11, 6, 13, 6), L12));   // straddles the cut 3/16
  CHECK_FALSE(member(dy_bump(15, 6, 1, 2), L12));    // closure touches t
  CHECK_FALSE(member(dy_bump(1, 3, 11, 6), L12));    // starts exactly at x
  CHECK_FALSE(member(dy_bump(17, 8, 19, 8), L12));   // cell 1 at level -1: too shallow
  CHECK(member(dy_bump(25, 8, 27, 8), L12));         // cell 2 at level -1
  CHECK(member(dy_bump(5, 4, 3, 3), L12));           // above t
  CHECK(member(compose(dy_bump(9, 6, 11, 6), dy_bump(5, 4, 3, 3)), L12));

  ConfFamily Lnot1 = ConfFamily::lamplike_product(2, t, x, cuts, IndexSet::all_but({1}));
  CHECK_FALSE(member(dy_bump(9, 6, 11, 6), Lnot1));
  CHECK(member(dy_bump(25, 7, 27, 7), Lnot1));
  CHECK(member(dy_bump(57, 8, 59, 8), Lnot1));  // cell 3 allowed now

  // with a gap: x = 3/16 leaves (1/8, 3/16) unconstrained at level 0
  ConfFamily G = ConfFamily::lamplike_product(2, t, Rational(3, 16), {Rational(7, 32)},
                                              IndexSet::finite({1, 2}));
  CHECK(member(dy_bump(9, 6, 11, 6), G));    // inside the gap
  CHECK(member(dy_bump(11, 6, 3, 4), G));    // gap run touching x from below is fine
  CHECK(member(dy_bump(17, 8, 19, 8), G));   // deeper gap (1/16, 3/32)
  CHECK_FALSE(member(dy_bump(3, 4, 15, 6), G));  // starts at x, mass inside the window
}

TEST_CASE("membership: non-lamplike windows delegate to the window decision") {
  ConfFamily Q = ConfFamily::non_lamplike(2, {3, 11});
  CHECK(member(PLMap::identity(2), Q));
  CHECK(member(dy_bump(3, 4, 15, 6), Q));  // between tau_2 = 1/8 and tau_1 = 1/4
  PLMap breaker = dy_bump(1, 4, 3, 2);     // (1/16, 3/4) contains tau_3 = 3/32
  while (evaluate(breaker, Rational(3, 32)) < Rational(1, 8)) breaker = compose(breaker, breaker);
  CHECK_FALSE(member(breaker, Q));  // pushes tau_3 out of its window (tau_4, tau_2)
  CHECK(member(qs_mover(Rational(1, 3), {3, 11}, TauSequence(2)), Q));
}

TEST_CASE("membership: conjugates, intersections, split closures") {
  ConfFamily C = ConfFamily::conjugate_by(rs(Rational(1, 4)), 1);  // rigid stab at 3/8
  CHECK(member(dy_bump(3, 3, 1, 1), C));        // (3/8, 1/2)
  CHECK_FALSE(member(dy_bump(5, 4, 1, 1), C));  // (5/16, 1/2) dips below 3/8
  CHECK(member(dy_bump(1, 2, 3, 3), ConfFamily::conjugate_by(rs(Rational(1, 4)), -1)));

  ConfFamily I = ConfFamily::intersection(rs(Rational(1, 4)), of(Rational(1, 8)));
  CHECK(member(dy_bump(3, 3, 1, 1), I));
  PLMap gap_only = dy_bump(3, 4, 7, 5);  // in a gap of the 1/8-orbit but below 1/4
  CHECK(member(gap_only, of(Rational(1, 8))));
  CHECK_FALSE(member(gap_only, I));

  ConfFamily SC = ConfFamily::split_closure(of(Rational(1, 4)), NAdic(2, 1, 4));
  PLMap strad8 = dy_bump(5, 6, 3, 4);  // (5/64, 3/16): moves 1/8, fixes 1/16 and below
  CHECK(member(strad8, SC));
  CHECK_FALSE(member(strad8, of(Rational(1, 4))));
  CHECK(member(dy_bump(9, 6, 11, 6), of(Rational(1, 4))));
  CHECK_FALSE(member(dy_bump(3, 7, 3, 6), SC));  // (3/128, 3/64) moves the orbit point 1/32
  CHECK_FALSE(member(dy_bump(3, 6, 5, 6), SC));  // hits 1/16 itself
}

TEST_CASE("sampling: members verify, conjugation upward stays inside, deterministic") {
  std::vector<ConfFamily> fams = {
      ConfFamily::full(2),
      rs(Rational(1, 4)),
      ors(Rational(1, 3)),
      of(Rational(1, 4)),
      nof(Rational(1, 3)),
      ConfFamily::lamplike_product(2, Rational(1, 4), Rational(1, 8), {Rational(3, 16)},
                                   IndexSet::all_but({2})),
      ConfFamily::non_lamplike(2, {3, 11}),
      ConfFamily::conjugate_by(of(Rational(1, 4)), 2),
      ConfFamily::intersection(rs(Rational(1, 4)), of(Rational(1, 8))),
      ConfFamily::split_closure(rs(Rational(1, 8)), NAdic(2, 1, 3)),
  };
  PLMap a = base_map(2);
  for (const auto& F : fams) {
    CAPTURE(F.describe());
    std::mt19937_64 rng(5);
    auto pool = sample_members(F, rng, 10);
    REQUIRE(!pool.empty());
    for (const auto& g : pool) {
      CHECK(member(g, F));
      CHECK(member(conjugate(g, a), F));  // confinement at the generator
    }
    std::mt19937_64 rng2(5);
    auto pool2 = sample_members(F, rng2, 10);
    REQUIRE(pool.size() == pool2.size());
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(pool[i] == pool2[i]);
  }
}

TEST_CASE("axiom check: subgroup shortcut, product exponents") {
  AxiomReport r1 = axiom_check(rs(Rational(1, 4)), kFast);
  CHECK(r1.stay_ok);
  CHECK(r1.getin_ok);
  CHECK(!r1.getin_witnesses.empty());
  for (long k : r1.getin_witnesses) CHECK(k <= kFast.k_max);
  CHECK(r1.prod_ok);
  CHECK(r1.subgroup_shortcut);
  CHECK(r1.prod_exact);
  CHECK(r1.prod_witness == 0);

  AxiomReport r2 = axiom_check(of(Rational(1, 3)), kFast);
  CHECK(r2.stay_ok);
  CHECK(r2.prod_ok);
  CHECK(r2.subgroup_shortcut);

  AxiomReport r3 = axiom_check(ConfFamily::non_lamplike(2, {3, 11}), Budget{40, 8, 3});
  CHECK(r3.stay_ok);
  CHECK(r3.getin_ok);
  CHECK_FALSE(r3.subgroup_shortcut);
  CHECK(r3.prod_exact);
  CHECK(r3.prod_witness == 5);  // least closing exponent for products of window members
  CHECK(r3.prod_ok);

  AxiomReport r4 = axiom_check(
      ConfFamily::intersection(rs(Rational(1, 4)), ConfFamily::non_lamplike(2, {3, 11})), kFast);
  CHECK(r4.stay_ok);
  CHECK_FALSE(r4.subgroup_shortcut);
  CHECK_FALSE(r4.prod_exact);
  CHECK(r4.prod_ok);
  CHECK(r4.prod_witness.has_value());
}

TEST_CASE("compare: rigid stabilizer thresholds, exact least exponents") {
  CHECK(dominates_k(compare(rs(Rational(1, 4)), rs(Rational(1, 8)), kFast)) == 1);
  CHECK(dominates_k(compare(rs(Rational(1, 8)), rs(Rational(1, 4)), kFast)) == 0);
  CHECK(dominates_k(compare(rs(Rational(1, 4)), rs(Rational(1, 16)), kFast)) == 2);
  CHECK(dominates_k(compare(rs(Rational(1, 4)), rs(Rational(1, 3)), kFast)) == 0);
  CHECK(dominates_k(compare(rs(Rational(1, 3)), rs(Rational(1, 4)), kFast)) == 1);
  // open vs closed at a dyadic point: one push clears the boundary bump
  CHECK(dominates_k(compare(ors(Rational(1, 4)), rs(Rational(1, 4)), kFast)) == 1);
  CHECK(dominates_k(compare(rs(Rational(1, 4)), ors(Rational(1, 4)), kFast)) == 0);
  // at a non-dyadic point the infimum of a support is never the point itself
  CHECK(dominates_k(compare(ors(Rational(1, 3)), rs(Rational(1, 3)), kFast)) == 0);
  check_dominates_sampled(compare(rs(Rational(1, 4)), rs(Rational(1, 8)), kFast),
                          rs(Rational(1, 4)), rs(Rational(1, 8)));
  check_dominates_sampled(compare(ors(Rational(1, 4)), rs(Rational(1, 4)), kFast),
                          ors(Rational(1, 4)), rs(Rational(1, 4)));
}

TEST_CASE("compare: orbit fixators against each other and against stabilizers") {
  // same orbit: 1/8 = (1/4).a^{-1}
  CHECK(dominates_k(compare(of(Rational(1, 4)), of(Rational(1, 8)), kFast)) == 1);
  CHECK(dominates_k(compare(of(Rational(1, 8)), of(Rational(1, 4)), kFast)) == 0);
  CHECK(dominates_k(compare(nof(Rational(1, 4)), nof(Rational(1, 16)), kFast)) == 2);
  // different orbits refute with a straddling bump
  check_refuted_replay(compare(of(Rational(1, 4)), of(Rational(1, 3)), kFast), of(Rational(1, 4)),
                       of(Rational(1, 3)));
  check_refuted_replay(compare(of(Rational(1, 3)), of(Rational(1, 4)), kFast), of(Rational(1, 3)),
                       of(Rational(1, 4)));
  // neighbourhood-fixing is strictly stronger on the same orbit
  CHECK(dominates_k(compare(of(Rational(1, 4)), nof(Rational(1, 4)), kFast)) == 0);
  check_refuted_replay(compare(nof(Rational(1, 4)), of(Rational(1, 4)), kFast),
                       nof(Rational(1, 4)), of(Rational(1, 4)));
  check_refuted_replay(compare(nof(Rational(1, 3)), of(Rational(1, 3)), kFast),
                       nof(Rational(1, 3)), of(Rational(1, 3)));
  // stabilizer source rises past the orbit threshold
  CHECK(dominates_k(compare(of(Rational(1, 4)), rs(Rational(1, 16)), kFast)) == 2);
  CHECK(dominates_k(compare(nof(Rational(1, 4)), rs(Rational(1, 4)), kFast)) == 1);
  CHECK(dominates_k(compare(nof(Rational(1, 3)), rs(Rational(1, 3)), kFast)) == 0);
  // orbit fixators never land inside a rigid stabilizer: gaps run arbitrarily deep
  check_refuted_replay(compare(rs(Rational(1, 4)), of(Rational(1, 8)), kFast), rs(Rational(1, 4)),
                       of(Rational(1, 8)));
  check_refuted_replay(compare(ors(Rational(1, 3)), nof(Rational(1, 4)), kFast),
                       ors(Rational(1, 3)), nof(Rational(1, 4)));
}

TEST_CASE("compare: lamplike order law on shared windows") {
  Rational t(1, 4), x(1, 8);
  std::vector<Rational> cuts{Rational(3, 16)};
  auto lp = [&](IndexSet xs) { return ConfFamily::lamplike_product(2, t, x, cuts, xs); };
  ConfFamily A = lp(IndexSet::finite({1, 2, 4}));
  ConfFamily B = lp(IndexSet::finite({1, 2}));
  CHECK(dominates_k(compare(A, B, kFast)) == 0);
  CHECK(dominates_k(compare(B, A, kFast)) == 4);
  check_dominates_sampled(compare(B, A, kFast), B, A);

  ConfFamily C = lp(IndexSet::all_but({2}));
  ConfFamily D = lp(IndexSet::all_but({1, 2}));
  CHECK(dominates_k(compare(C, D, kFast)) == 0);
  CHECK(dominates_k(compare(D, C, kFast)) == 1);
  // cofinite source into a finite target: infinitely many indices never absorb
  check_refuted_replay(compare(B, C, kFast), B, C);

  // different windows have no shared-parameter rule; the scan may refute or
  // give an honest inconclusive, but must never claim domination falsely
  ConfFamily E = ConfFamily::lamplike_product(2, t, x, {Rational(7, 32)}, IndexSet::finite({1}));
  Verdict v = compare(E, B, kFast);
  if (std::holds_alternative<RefutedT<PLMap>>(v)) check_refuted_replay(v, E, B);
}

TEST_CASE("compare: lamplike against stabilizers and orbit fixators") {
  Rational t(1, 4), x(1, 8);
  ConfFamily L = ConfFamily::lamplike_product(2, t, x, {Rational(3, 16)}, IndexSet::finite({1, 2}));
  // members reach down to the cell-2 floor 3/16 . a^{-1} = 3/32
  CHECK(dominates_k(compare(rs(Rational(3, 32)), L, kFast)) == 0);
  CHECK(dominates_k(compare(rs(Rational(1, 4)), L, kFast)) == 2);  // 3/32 -> 3/16 -> 5/16
  CHECK(dominates_k(compare(rs(Rational(1, 8)), L, kFast)) == 1);
  // with a gap the family reaches arbitrarily low
  ConfFamily G = ConfFamily::lamplike_product(2, t, Rational(3, 16), {Rational(7, 32)},
                                              IndexSet::finite({1}));
  check_refuted_replay(compare(rs(Rational(1, 8)), G, kFast), rs(Rational(1, 8)), G);
  // cofinite index sets admit ever-deeper cells
  ConfFamily C = ConfFamily::lamplike_product(2, t, x, {Rational(3, 16)}, IndexSet::all_but({1}));
  check_refuted_replay(compare(rs(Rational(1, 8)), C, kFast), rs(Rational(1, 8)), C);
  // a lamplike target absorbs a stabilizer once it clears t
  CHECK(dominates_k(compare(L, rs(Rational(1, 4)), kFast)) == 1);
  CHECK(dominates_k(compare(L, ors(Rational(1, 4)), kFast)) == 0);
  // orbit fixators move the window structure: always refuted
  check_refuted_replay(compare(L, of(Rational(1, 4)), kFast), L, of(Rational(1, 4)));
  check_refuted_replay(compare(L, of(Rational(1, 3)), kFast), L, of(Rational(1, 3)));
}

TEST_CASE("compare: non-lamplike families") {
  ConfFamily Q3 = ConfFamily::non_lamplike(2, {3});
  ConfFamily Q311 = ConfFamily::non_lamplike(2, {3, 11});
  // more window indices = smaller family: containment is exact at 0
  CHECK(dominates_k(compare(Q3, Q311, kFast)) == 0);
  check_refuted_replay(compare(Q311, Q3, kFast), Q311, Q3);
  // a stabilizer above tau_1 = 1/4 satisfies every window vacuously
  CHECK(dominates_k(compare(Q3, rs(Rational(1, 4)), kFast)) == 0);
  CHECK(dominates_k(compare(Q3, rs(Rational(1, 16)), kFast)) == 2);
  // no family with a global fixed point ever absorbs the windows family
  check_refuted_replay(compare(rs(Rational(1, 4)), Q3, kFast), rs(Rational(1, 4)), Q3);
  check_refuted_replay(compare(of(Rational(1, 4)), Q3, kFast), of(Rational(1, 4)), Q3);
  ConfFamily L = ConfFamily::lamplike_product(2, Rational(1, 4), Rational(1, 8),
                                              {Rational(3, 16)}, IndexSet::finite({1, 2}));
  check_refuted_replay(compare(L, Q3, kFast), L, Q3);
  // windows family vs orbit fixator: a powered bump between two tau points
  // lives in orbit gaps forever but breaks a window
  check_refuted_replay(compare(Q3, of(Rational(1, 3)), kFast), Q3, of(Rational(1, 3)));
}

TEST_CASE("compare: conjugation shifts exponents additively") {
  ConfFamily R = rs(Rational(1, 4));
  CHECK(dominates_k(compare(ConfFamily::conjugate_by(R, 2), R, kFast)) == 2);
  CHECK(dominates_k(compare(R, ConfFamily::conjugate_by(R, 2), kFast)) == 0);
  CHECK(dominates_k(compare(ConfFamily::conjugate_by(of(Rational(1, 4)), 1), of(Rational(1, 8)),
                            kFast)) == 2);
  check_refuted_replay(
      compare(ConfFamily::conjugate_by(R, 1), of(Rational(1, 4)), kFast),
      ConfFamily::conjugate_by(R, 1), of(Rational(1, 4)));
}

TEST_CASE("compare: intersections and the join property") {
  ConfFamily R4 = rs(Rational(1, 4)), R8 = rs(Rational(1, 8));
  ConfFamily J = join(R4, R8);
  CHECK(std::holds_alternative<ConfIntersection>(J.node()));
  CHECK(dominates_k(compare(J, R4, kFast)) == 0);
  CHECK(dominates_k(compare(J, R8, kFast)) == 1);
  // join(RigidStab(1/4), RigidStab(1/8)) behaves like RigidStab(1/4)
  CHECK(dominates_k(compare(R4, J, kFast)) == 0);
  CHECK(same_description(join(R4, ConfFamily::full(2)), R4));
  CHECK(same_description(join(R4, R4), R4));

  ConfFamily JO = join(of(Rational(1, 4)), of(Rational(1, 16)));
  CHECK(dominates_k(compare(JO, of(Rational(1, 4)), kFast)) == 0);
  CHECK(dominates_k(compare(JO, of(Rational(1, 16)), kFast)) == 2);

  // window families only absorb when the index sets nest the right way: the
  // intersection of nested windows is the smaller family, which dominates the
  // finer side exactly and honestly refutes the coarser one
  ConfFamily Q3 = ConfFamily::non_lamplike(2, {3});
  ConfFamily Q311 = ConfFamily::non_lamplike(2, {3, 11});
  ConfFamily JQ = join(Q3, Q311);
  CHECK(dominates_k(compare(JQ, Q311, kFast)) == 0);
  check_refuted_replay(compare(JQ, Q3, kFast), JQ, Q3);
}

TEST_CASE("compare: domination is a preorder on the catalog") {
  struct Chain {
    ConfFamily f1, f2, f3;
  };
  std::vector<Chain> chains = {
      {rs(Rational(1, 4)), rs(Rational(1, 8)), rs(Rational(1, 16))},
      {of(Rational(1, 4)), of(Rational(1, 16)), of(Rational(1, 32))},
      {rs(Rational(1, 3)), rs(Rational(1, 8)), ors(Rational(1, 32))},
  };
  for (const auto& c : chains) {
    long k12 = dominates_k(compare(c.f1, c.f2, kFast));
    long k23 = dominates_k(compare(c.f2, c.f3, kFast));
    long k13 = dominates_k(compare(c.f1, c.f3, kFast));
    CHECK(k13 <= k12 + k23);
  }
}

TEST_CASE("split representative: certification, membership, equivalence") {
  ConfFamily R = rs(Rational(1, 4));
  ConfFamily S = split_representative(R, NAdic(2, 1, 2));
  CHECK(std::holds_alternative<ConfSplitClosure>(S.node()));
  CHECK(member(dy_bump(1, 2, 3, 3), S));  // supported in [t, 1)
  CHECK(dominates_k(compare(S, R, kFast)) == 0);
  CHECK(dominates_k(compare(R, S, kFast)) == 0);
  // a point some member moves is rejected
  CHECK_THROWS_AS(split_representative(R, NAdic(2, 3, 3)), Error);
  CHECK_THROWS_AS(split_representative(ConfFamily::full(2), NAdic(2, 1, 2)), Error);
  CHECK_THROWS_AS(split_representative(ConfFamily::non_lamplike(2, {3}), NAdic(2, 1, 3)), Error);

  // splitting an orbit fixator two steps down the orbit
  ConfFamily F = of(Rational(1, 4));
  ConfFamily S2 = split_representative(F, NAdic(2, 1, 4));
  PLMap between = dy_bump(3, 4, 7, 5);  // moves points of (1/16, 1/4) off-orbit only
  CHECK(member(between, S2));
  CHECK(member(dy_bump(5, 5, 3, 4), S2));  // (5/32, 3/16): fixes 1/16, as deep as allowed
  CHECK_FALSE(member(dy_bump(3, 7, 3, 6), S2));  // moves the orbit point 1/32
  Verdict both = compare(F, S2, kFast);
  CHECK(dominates_k(both) == 2);  // least exponent pushing the split part past 1/4
  CHECK(std::holds_alternative<Dominates>(compare(S2, F, kFast)));
}

TEST_CASE("global fixed points: catalog reports") {
  FixedPointReport r1 = global_fixed_points(rs(Rational(1, 4)), -3, {Rational(3, 8)});
  CHECK(r1.certified);
  REQUIRE(r1.intervals.size() == 1);
  CHECK(r1.intervals[0].first == Rational(0, 1));
  CHECK(r1.intervals[0].second == Rational(1, 4));
  CHECK(r1.covers(Rational(1, 4)));
  CHECK(r1.covers(Rational(1, 5)));
  CHECK_FALSE(r1.covers(Rational(3, 8)));
  REQUIRE(r1.movers.size() == 1);
  CHECK(member(r1.movers[0].second, rs(Rational(1, 4))));
  CHECK(evaluate(r1.movers[0].second, Rational(3, 8)) != Rational(3, 8));

  FixedPointReport r2 = global_fixed_points(of(Rational(1, 4)), -3, {Rational(1, 64), Rational(1, 3)});
  CHECK(r2.certified);
  std::set<Rational> pts(r2.points.begin(), r2.points.end());
  CHECK(pts.count(Rational(1, 4)));
  CHECK(pts.count(Rational(1, 8)));
  CHECK(pts.count(Rational(1, 16)));
  CHECK(pts.count(Rational(1, 32)));
  CHECK(pts.count(Rational(1, 64)));  // queried point below the window, same orbit
  REQUIRE(r2.movers.size() == 1);     // 1/3 lies in the gap (1/4, 3/8)
  CHECK(member(r2.movers[0].second, of(Rational(1, 4))));

  FixedPointReport r3 = global_fixed_points(ConfFamily::full(2), -3,
                                            {Rational(1, 3), Rational(1, 4)});
  CHECK(r3.certified);
  CHECK(r3.points.empty());
  CHECK(r3.intervals.empty());
  CHECK(r3.movers.size() == 2);

  FixedPointReport r4 = global_fixed_points(ConfFamily::non_lamplike(2, {3, 11}), -3,
                                            {Rational(1, 4), Rational(5, 7)});
  CHECK(r4.certified);
  CHECK(r4.points.empty());
  REQUIRE(r4.movers.size() == 2);
  for (const auto& [q, m] : r4.movers) {
    CHECK(member(m, ConfFamily::non_lamplike(2, {3, 11})));
    CHECK(evaluate(m, q) != q);
  }
}

TEST_CASE("global fixed points: lamplike cells switch off into fixed blocks") {
  Rational t(1, 4), x(1, 8);
  ConfFamily L = ConfFamily::lamplike_product(2, t, x, {Rational(3, 16)}, IndexSet::finite({2}));
  FixedPointReport r = global_fixed_points(L, -2, {Rational(3, 16), Rational(5, 32),
                                                   Rational(13, 64), Rational(1, 3)});
  CHECK(r.certified);
  CHECK(r.covers(Rational(1, 4)));
  CHECK(r.covers(Rational(1, 8)));
  CHECK(r.covers(Rational(3, 16)));   // cut point
  CHECK(r.covers(Rational(5, 32)));   // inside switched-off cell 1
  CHECK(r.covers(Rational(15, 64)));  // inside the switched-off tail
  CHECK_FALSE(r.covers(Rational(13, 64)));  // cell 2 is live
  bool mover_13 = false, mover_third = false;
  for (const auto& [q, m] : r.movers) {
    if (q == Rational(13, 64)) mover_13 = true;
    if (q == Rational(1, 3)) mover_third = true;
    CHECK(member(m, L));
    CHECK(evaluate(m, q) != q);
  }
  CHECK(mover_13);
  CHECK(mover_third);

  // every member fixes the cut grid at every depth
  std::mt19937_64 rng(9);
  ConfFamily L2 = ConfFamily::lamplike_product(2, t, x, {Rational(3, 16)},
                                               IndexSet::all_but({}));
  PLMap a = base_map(2);
  for (const auto& g : sample_members(L2, rng, 8))
    for (const Rational& s : {x, Rational(3, 16), t})
      for (long k = 0; k >= -3; --k) {
        Rational sk = orbit_point(s, k, a);
        CHECK(evaluate(g, sk) == sk);
      }
}

TEST_CASE("global fixed points: composites") {
  ConfFamily C = ConfFamily::conjugate_by(of(Rational(1, 4)), 1);  // orbit through 3/8
  FixedPointReport rc = global_fixed_points(C, -2, {Rational(3, 8)});
  CHECK(rc.certified);
  CHECK(rc.covers(Rational(3, 8)));
  CHECK(rc.covers(Rational(1, 4)));
  CHECK(rc.covers(Rational(1, 8)));

  ConfFamily I = ConfFamily::intersection(rs(Rational(1, 4)), of(Rational(1, 8)));
  FixedPointReport ri = global_fixed_points(I, -2, {Rational(3, 8)});
  CHECK_FALSE(ri.certified);  // union is only a lower bound
  CHECK(ri.covers(Rational(1, 5)));
  CHECK(ri.covers(Rational(3, 16)));  // below the stabilizer threshold
  // 3/8 is moved by some sampled intersection member
  bool found = false;
  for (const auto& [q, m] : ri.movers)
    if (q == Rational(3, 8)) {
      found = true;
      CHECK(member(m, I));
      CHECK(evaluate(m, q) != q);
    }
  CHECK(found);

  ConfFamily S = ConfFamily::split_closure(rs(Rational(1, 8)), NAdic(2, 1, 3));
  FixedPointReport rsreport = global_fixed_points(S, -2, {Rational(1, 3), Rational(1, 16)});
  CHECK(rsreport.covers(Rational(1, 8)));
  CHECK(rsreport.covers(Rational(1, 16)));
  bool moved_third = false;
  for (const auto& [q, m] : rsreport.movers)
    if (q == Rational(1, 3)) {
      moved_third = true;
      CHECK(member(m, S));
    }
  CHECK(moved_third);
}

TEST_CASE("largest element witness: frozen exponents across the catalog") {
  CHECK(largest_element_witness(rs(Rational(1, 4)), kFast) == 0);
  CHECK(largest_element_witness(ors(Rational(1, 4)), kFast) == 1);
  CHECK(largest_element_witness(ors(Rational(1, 3)), kFast) == 0);
  CHECK(largest_element_witness(of(Rational(1, 4)), kFast) == 0);
  CHECK(largest_element_witness(nof(Rational(1, 4)), kFast) == 1);
  CHECK(largest_element_witness(nof(Rational(1, 3)), kFast) == 0);
  CHECK(largest_element_witness(ConfFamily::non_lamplike(2, {3, 11}), kFast) == 0);
  ConfFamily L = ConfFamily::lamplike_product(2, Rational(1, 4), Rational(1, 8),
                                              {Rational(3, 16)}, IndexSet::finite({1, 2}));
  CHECK(largest_element_witness(L, kFast) == 1);
  CHECK(largest_element_witness(ConfFamily::full(2), kFast) == 0);
  CHECK(largest_element_witness(ConfFamily::conjugate_by(rs(Rational(1, 4)), 3), kFast) == 0);
  CHECK(largest_element_witness(
            ConfFamily::intersection(rs(Rational(1, 4)), of(Rational(1, 8))), kFast) == 0);
  CHECK(largest_element_witness(ConfFamily::split_closure(rs(Rational(1, 4)), NAdic(2, 1, 2)),
                                kFast) == 0);
}

TEST_CASE("emptiness: two nonzero boundary values, words of length at most 3") {
  int n = 4;
  PLMap low = bump_in(NAdic(4, 1, 3), NAdic(4, 3, 3));     // inside (0, 1/4)
  PLMap high = bump_in(NAdic(4, 61, 3), NAdic(4, 63, 3));  // inside (15/16, 1)
  PLMap f = compose(low, high);
  auto word = emptiness_factorization(f, TwoNonzeroScenario{0, 3, std::nullopt});
  CHECK(word.size() <= 3);
  CHECK(compose_word(word, n) == f);
  for (const auto& w : word) CHECK(!w.tag.empty());

  // support already clear of I_0: single factor
  auto word1 = emptiness_factorization(high, TwoNonzeroScenario{0, 3, std::nullopt});
  CHECK(word1.size() == 1);
  CHECK(compose_word(word1, n) == high);

  // a mover that does not clear the lower support is rejected
  CHECK_THROWS_AS(
      emptiness_factorization(f, TwoNonzeroScenario{0, 3, PLMap::identity(4)}), Error);
}

TEST_CASE("emptiness: interior value, words of length at most 7") {
  int n = 4;
  auto [q_ell, q_r] = middle_movers(n, 1);
  // I_1 = (17/64, 18/64)
  PLMap inside = bump_in(NAdic(4, 69, 4), NAdic(4, 70, 4));
  auto w1 = emptiness_factorization(inside, MiddleScenario{1, q_ell, q_r, std::nullopt});
  CHECK(w1.size() <= 7);
  CHECK(compose_word(w1, n) == inside);

  PLMap spanning = bump_in(NAdic(4, 69, 4), NAdic(4, 19, 3));  // reaches past r_1 = 18/64
  auto w2 = emptiness_factorization(spanning, MiddleScenario{1, q_ell, q_r, std::nullopt});
  CHECK(w2.size() <= 7);
  CHECK(compose_word(w2, n) == spanning);

  PLMap elsewhere = bump_in(NAdic(4, 85, 4), NAdic(4, 86, 4));  // inside I_2
  auto w3 = emptiness_factorization(elsewhere, MiddleScenario{1, q_ell, q_r, std::nullopt});
  CHECK(w3.size() == 1);

  // q_ell must actually open a gap below the support
  CHECK_THROWS_AS(
      emptiness_factorization(inside, MiddleScenario{1, PLMap::identity(4), q_r, std::nullopt}),
      Error);
  CHECK_THROWS_AS(emptiness_factorization(inside, MiddleScenario{0, q_ell, q_r, std::nullopt}),
                  Error);
}

TEST_CASE("emptiness: negative boundary value, conjugated words of length at most 3") {
  int n = 2;
  PLMap q = negative_chi_mover(n);
  PLMap f = dy_bump(1, 4, 1, 2);  // support (1/16, 1/4), well below r_0 = 1/2
  auto word = emptiness_factorization(f, NegativeChiScenario{q});
  CHECK(word.size() <= 3);
  CHECK(compose_word(word, n) == f);

  PLMap highf = dy_bump(1, 1, 3, 2);  // (1/2, 3/4): already fixes [0, r_0]
  auto word1 = emptiness_factorization(highf, NegativeChiScenario{q});
  CHECK(word1.size() == 1);

  PLMap bad_q = dy_bump(1, 4, 1, 3);  // fixes r_0, pushes nothing past it
  CHECK_THROWS_AS(emptiness_factorization(f, NegativeChiScenario{bad_q}), Error);

  // identity factors into the empty word
  CHECK(emptiness_factorization(PLMap::identity(2), NegativeChiScenario{q}).empty());
  CHECK(compose_word({}, 2) == PLMap::identity(2));
}

TEST_CASE("prime power embedding") {
  using V = std::vector<unsigned long long>;
  CHECK(prime_power_embedding({1}, 20) == V{2, 4, 8, 16});
  CHECK(prime_power_embedding({2}, 50) == V{3, 9, 27});
  CHECK(prime_power_embedding({1, 2, 3}, 30) == V{2, 3, 4, 5, 8, 9, 16, 25, 27});
  CHECK(prime_power_embedding({}, 100).empty());
  CHECK(prime_power_embedding({5}, 10).empty());  // 11 > 10
  CHECK(prime_power_embedding({25}, 100) == V{97});
  CHECK_THROWS_AS(prime_power_embedding({0}, 10), Error);

  // order law shadow: X subset of Y leaves the difference empty at every bound
  for (unsigned long long nm : {10ull, 100ull, 1000ull}) {
    auto px = prime_power_embedding({1, 3}, nm);
    auto py = prime_power_embedding({1, 2, 3}, nm);
    CHECK(std::includes(py.begin(), py.end(), px.begin(), px.end()));
  }
}

TEST_CASE("describe: stable human-readable forms") {
  CHECK(rs(Rational(1, 4)).describe() == "rigidstab:1/4");
  CHECK(ConfFamily::full(3).describe() == "full");
  CHECK(ConfFamily::conjugate_by(ors(Rational(1, 4)), 2).describe() ==
        "conj(openrigidstab:1/4;k=2)");
  ConfFamily L = ConfFamily::lamplike_product(2, Rational(1, 4), Rational(1, 8),
                                              {Rational(3, 16)}, IndexSet::all_but({2}));
  CHECK(L.describe() == "lamplike:t=1/4;x=1/8;cuts=3/16;X=all-but{2}");
  CHECK(same_description(L, L));
  CHECK_FALSE(same_description(L, rs(Rational(1, 4))));
}
