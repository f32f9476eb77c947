// Piecewise-linear homeomorphisms of [0,1] with breakpoints in Z[1/n] and
// slopes ±n^k, under the *right* action x.g; conjugation is g^h = h^-1 g h.
// Orientation -1 admits the reversal x ↦ 1-x and its composites.
//
// PLMap values are immutable and always in canonical form (collinear
// breakpoints merged), so structural equality is semantic equality.
#pragma once

#include "fng/exactnum.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace fng {

// One linear segment y = slope * x + offset on [x0, x1], slope = sign * n^k.
struct Piece {
  NAdic x0, x1;
  long k;
  int sign;
  NAdic offset;
  Rational slope_rat() const;
  Rational offset_rat() const { return offset.value(); }
};

class PLMap {
public:
  PLMap(int n, std::vector<std::pair<NAdic, NAdic>> breakpoints, int orientation = 1);
  static PLMap identity(int n);

  int base() const { return n_; }
  int orientation() const { return orient_; }
  const std::vector<std::pair<NAdic, NAdic>>& breakpoints() const { return bp_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  bool is_identity() const;

  bool operator==(const PLMap& o) const;
  bool operator!=(const PLMap& o) const { return !(*this == o); }

private:
  void validate_and_canonicalize();
  int n_;
  int orient_;
  std::vector<std::pair<NAdic, NAdic>> bp_;
  std::vector<Piece> pieces_;
};

PLMap compose(const PLMap& g, const PLMap& h);  // x ↦ (x.g).h
PLMap invert(const PLMap& g);
PLMap conjugate(const PLMap& g, const PLMap& h);  // g^h = h^-1 g h
PLMap power(const PLMap& g, long k);
PLMap canonical_form(const PLMap& g);

Rational evaluate(const PLMap& g, const Rational& x);  // x in [0,1]
NAdic evaluate_nadic(const PLMap& g, const NAdic& x);

long chi0(const PLMap& g);  // log_n of the slope at 0; orientation +1 only
long chi1(const PLMap& g);  // log_n of the slope at 1

struct FixedSet {
  std::vector<Rational> points;                            // isolated
  std::vector<std::pair<Rational, Rational>> intervals;    // closed, disjoint
  bool contains(const Rational& x) const;
};

FixedSet fixed_set(const PLMap& g);
// Maximal open intervals where g moves points, inside (0,1).
std::vector<std::pair<Rational, Rational>> support(const PLMap& g);
// g is the identity pointwise on [lo, hi].
bool fixes_interval(const PLMap& g, const Rational& lo, const Rational& hi);
bool is_one_bump(const PLMap& g);
// Identity near both endpoints (commutators always are).
bool is_compactly_supported(const PLMap& g);

PLMap make_bump(int n);
// Affine conjugation of g into (l, r); requires r - l to be a power of n.
PLMap transplant(const PLMap& g, const NAdic& l, const NAdic& r);

struct GeneratorTuple {
  int n;
  std::vector<PLMap> gens;
  std::vector<std::pair<NAdic, NAdic>> supports;
};

GeneratorTuple standard_generators(int n);
// Throws if any tuple invariant fails (one-bump, support match, ordering,
// boundary characters, pairwise commuting).
void check_generator_tuple(const GeneratorTuple& tuple);

Rational orbit_point(const Rational& t, long k, const PLMap& a);
NAdic orbit_point_nadic(const NAdic& t, long k, const PLMap& a);

struct FixNAry {
  NAdic value;
};
struct FixRationalNonNAry {
  long order;  // multiplicative order of n modulo the coprime part of den(t)
};
using FixClass = std::variant<FixNAry, FixRationalNonNAry>;

FixClass fix_classification(const Rational& t, int n);

// An element fixing t with slope n^o at t (o from fix_classification),
// supported inside (u, v).  Throws Error::Kind::Unsupported with a certified
// obstruction when no such element exists (possible only for n > 2: the
// boundary-length residue mod n-1 blocks the closing segments).
PLMap rational_slope_fix_element(const Rational& t, const NAdic& u, const NAdic& v);

// Increasing PL bijection [a1,b1] -> [a2,b2], slopes powers of n, breakpoints
// n-adic.  Exists iff the interval lengths agree mod n-1 (numerator residue);
// throws Error::Kind::Unsupported otherwise.  Returned as a breakpoint list.
std::vector<std::pair<NAdic, NAdic>> interval_transfer(const NAdic& a1, const NAdic& b1,
                                                       const NAdic& a2, const NAdic& b2);

// One-bump element with support exactly (l, r), g(x) > x inside; any n-adic
// endpoints 0 <= l < r <= 1 (width need not be a power of n).
PLMap bump_in(const NAdic& l, const NAdic& r);

// g restricted to [0, t] glued with the identity above; requires g(t) = t.
PLMap truncate_identity_above(const PLMap& g, const NAdic& t);

PLMap alpha(int n);  // x ↦ 1 - x
PLMap alpha_conjugate(const PLMap& g);
int epsilon(const PLMap& g);  // orientation sign

PLMap random_commutator(int n, std::uint64_t seed, int complexity);

}  // namespace fng
