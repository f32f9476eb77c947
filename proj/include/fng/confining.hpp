// Symbolic catalog of confining families inside the compactly supported
// subgroup, keyed to the character that reads the slope exponent at 0.  Every
// family is a description, never an enumeration: membership is an exact
// dynamical test on a PL map, comparison goes through conjugation by the base
// bump a (Q2 below Q1 iff Q2^{a^k} lands inside Q1 for some k >= 0), and all
// verdict witnesses replay through member().
//
// Families are immutable values.  The NonLamplike node carries a memoized tau
// sequence; the memo is confined to the family instance, so share instances
// across threads only behind external synchronization.
#pragma once

#include "fng/nonlamplike.hpp"
#include "fng/plmap.hpp"
#include "fng/verdict.hpp"

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fng {

// The distinguished one-bump generator with support (0, 1/n) and slope n at 0.
PLMap base_map(int n);

// A character of the splitting Z^n, one rational value per generator bump.
struct CharVector {
  int n = 2;
  std::vector<Rational> values;
};

enum class CharClass {
  Zero,
  PositiveChi0,   // only the 0-th value is nonzero, and positive
  NegativeChi0,
  PositiveChi1,   // only the last value is nonzero, and positive
  NegativeChi1,
  Middle,         // a single interior value is nonzero
  TwoNonzero,     // at least two nonzero values
};

struct CharClassification {
  CharClass cls = CharClass::Zero;
  int i = -1;  // index of the (first) nonzero value, when applicable
  int j = -1;  // index of the second nonzero value for TwoNonzero
};

CharClassification classify_character(const CharVector& rho);

// Subset of {1, 2, 3, ...} given by an explicit finite list or its complement.
struct IndexSet {
  bool cofinite = false;
  std::vector<long> elems;  // sorted, distinct, >= 1

  bool contains(long i) const;
  bool operator==(const IndexSet& o) const { return cofinite == o.cofinite && elems == o.elems; }

  static IndexSet finite(std::vector<long> xs);
  static IndexSet all_but(std::vector<long> xs);
};

// max(X \ Y) when the difference is finite (0 for an empty difference),
// nullopt when it is infinite.
std::optional<long> finite_difference_max(const IndexSet& X, const IndexSet& Y);

class ConfFamily;

struct ConfFull {};
// Elements fixing [0, t] pointwise.
struct ConfRigidStab {
  Rational t;
};
// Elements compactly supported inside (t, 1): they fix [0, t] and a bit more.
struct ConfOpenRigidStab {
  Rational t;
};
// Elements fixing every backward orbit point t.a^k, k <= 0, pointwise.
struct ConfOrbitFixator {
  Rational t;
};
// Elements fixing a neighbourhood of every backward orbit point.
struct ConfNbhdOrbitFixator {
  Rational t;
};
// Window (x, t) tiled by cells: cell 1 = (x, p_1), cell i = (p_{i-1}, p_i),
// and past the last explicit cut the cells continue by p_{m+j} = t - (t-p_m)/n^j.
// A member fixes a neighbourhood of every t.a^k (k <= 0) and, inside each
// pulled-back window (x.a^k, t.a^k), is supported in cells with index i in X
// and i > |k|.  The strips between consecutive windows are unconstrained.
struct ConfLamplikeProduct {
  Rational t;
  Rational x;
  std::vector<Rational> cuts;
  IndexSet xset;
};
struct ConfNonLamplike {
  std::vector<Index> S;
  TauSequence tau;
  int shift = 5;
};
struct ConfConjugate {
  std::shared_ptr<const ConfFamily> inner;
  long k = 0;
};
struct ConfIntersection {
  std::shared_ptr<const ConfFamily> lhs, rhs;
};
// Everything that fixes t and agrees on [0, t] with a member of the inner
// family; build through split_representative, which certifies t first.
struct ConfSplitClosure {
  std::shared_ptr<const ConfFamily> inner;
  NAdic t;
};

class ConfFamily {
 public:
  using Node = std::variant<ConfFull, ConfRigidStab, ConfOpenRigidStab, ConfOrbitFixator,
                            ConfNbhdOrbitFixator, ConfLamplikeProduct, ConfNonLamplike,
                            ConfConjugate, ConfIntersection, ConfSplitClosure>;

  static ConfFamily full(int n);
  static ConfFamily rigid_stab(int n, const Rational& t);
  static ConfFamily open_rigid_stab(int n, const Rational& t);
  static ConfFamily orbit_fixator(int n, const Rational& t);
  static ConfFamily nbhd_orbit_fixator(int n, const Rational& t);
  static ConfFamily lamplike_product(int n, const Rational& t, const Rational& x,
                                     std::vector<Rational> cuts, IndexSet xset);
  static ConfFamily non_lamplike(int n, std::vector<Index> S, int shift = 5);
  static ConfFamily non_lamplike(std::vector<Index> S, TauSequence tau, int shift = 5);
  static ConfFamily conjugate_by(ConfFamily F, long k);
  static ConfFamily intersection(ConfFamily F1, ConfFamily F2);
  // Unchecked node; prefer split_representative, which certifies the point.
  static ConfFamily split_closure(ConfFamily F, const NAdic& t);

  int n() const { return n_; }
  const Node& node() const { return *node_; }
  std::string describe() const;

 private:
  ConfFamily(int n, Node v);
  int n_;
  std::shared_ptr<const Node> node_;
};

// Structural equality of descriptions (not extensional equality of families).
bool same_description(const ConfFamily& F1, const ConfFamily& F2);

using Verdict = VerdictT<PLMap>;
using AxiomReport = AxiomReportT<PLMap>;

// Exact membership.  Throws Domain on base mismatch, orientation -1, or a
// non-compactly-supported argument (families live inside the commutator
// subgroup; inputs are expected to be built as such).
bool member(const PLMap& g, const ConfFamily& F);

// Seeded pool of verified members, shaped per constructor (bumps in the
// family's free regions, products, high-supported elements).
std::vector<PLMap> sample_members(const ConfFamily& F, std::mt19937_64& rng, int count);

AxiomReport axiom_check(const ConfFamily& F, const Budget& budget = {});

// Least-exponent domination test of F2 below F1.  Exact catalog rules first,
// then a refutation search over constructed violators (carried witness is
// outside F1 while all its pull-backs stay in F2), then sampled domination.
Verdict compare(const ConfFamily& F1, const ConfFamily& F2, const Budget& budget = {});

// The join of two families is represented by their intersection.
ConfFamily join(const ConfFamily& F1, const ConfFamily& F2);

// SplitClosure node over F at t; requires t certified as a global fixed point.
ConfFamily split_representative(const ConfFamily& F, const NAdic& t);

struct FixedPointReport {
  std::vector<Rational> points;                          // isolated fixed points
  std::vector<std::pair<Rational, Rational>> intervals;  // closed fixed intervals
  bool certified = false;
  std::string note;
  // for each queried point left out of the fixed set: a member moving it
  std::vector<std::pair<Rational, PLMap>> movers;
  bool covers(const Rational& x) const;
};

// Fixed points common to the whole family, listed exactly for orbit-indexed
// constructors within the window k_min <= k <= 0.  Queried points get either
// coverage or a replayable mover.
FixedPointReport global_fixed_points(const ConfFamily& F, long k_min = -8,
                                     const std::vector<Rational>& queries = {});

// Least k with the rigid stabilizer at scale(F).a^k contained in F; exact on
// the catalog, cross-checked on sampled members.
long largest_element_witness(const ConfFamily& F, const Budget& budget = {});

struct WordFactor {
  PLMap g;
  std::string tag;
};

// rho vanishes except at two generators i < j: fixators of either support
// interval bound the generation.
struct TwoNonzeroScenario {
  int i = 0;
  int j = 1;
  std::optional<PLMap> mover;  // fixes I_j, pushes inf supp(f) past r_i
};
// rho concentrated on an interior generator i; q_ell and q_r cross the left
// and right ends of its support.
struct MiddleScenario {
  int i = 1;
  PLMap q_ell;
  PLMap q_r;
  std::optional<PLMap> pusher;  // fixes I_i, pulls sup supp(f) below x_r.q_r
};
// rho negative at the 0-th generator; q pushes a point of (0, r_0) above r_0.
struct NegativeChiScenario {
  PLMap q;
};
using EmptinessScenario = std::variant<TwoNonzeroScenario, MiddleScenario, NegativeChiScenario>;

// Factors f over the fixator subgroups the scenario provides, following the
// bounded-generation arguments: length <= 3 (two nonzero values), <= 7
// (interior value), <= 3 after conjugation (negative boundary value).
// Composing the word reproduces f exactly; tags name each factor's home.
std::vector<WordFactor> emptiness_factorization(const PLMap& f, const EmptinessScenario& scenario);

PLMap compose_word(const std::vector<WordFactor>& word, int n);

// Ready-made scenario data matching the constructions above.
PLMap two_nonzero_mover(int n, int i, int j, const PLMap& f);
std::pair<PLMap, PLMap> middle_movers(int n, int i);
PLMap negative_chi_mover(int n);

// All prime powers p_i^k <= n_max with i in X (1-based index into the primes).
std::vector<unsigned long long> prime_power_embedding(const std::vector<int>& X,
                                                      unsigned long long n_max);

}  // namespace fng
