// Wreath products with shift: lamp configurations over pluggable lamp groups,
// the right-heavy confining catalog for the shift character, and the slope
// bridge out of the PL world at a rational non-n-adic fixed point.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "fng/exactnum.hpp"
#include "fng/plmap.hpp"
#include "fng/verdict.hpp"

namespace fng {

// Lamp payloads: an integer exponent for Z, a finitely supported exponent
// vector (layer index >= 1) for an infinite direct sum of Z's, or a PL map
// supported in a fixed window.
using AbelVec = std::map<int, Int>;
using LampValue = std::variant<Int, AbelVec, PLMap>;

class LampGroup {
 public:
  virtual ~LampGroup() = default;
  virtual std::string name() const = 0;
  virtual LampValue identity() const = 0;
  virtual bool is_identity(const LampValue&) const = 0;
  virtual LampValue multiply(const LampValue&, const LampValue&) const = 0;
  virtual LampValue invert(const LampValue&) const = 0;
  virtual bool equal(const LampValue&, const LampValue&) const = 0;
  // exact where the generating set pins one; nullopt otherwise
  virtual std::optional<Int> word_length(const LampValue&) const = 0;
  virtual LampValue sample(std::mt19937_64& rng) const = 0;
  virtual void validate(const LampValue&) const = 0;
};

using LampGroupPtr = std::shared_ptr<const LampGroup>;

LampGroupPtr int_lamp();
LampGroupPtr free_abelian_lamp();
LampGroupPtr fn_window_lamp(int n, const NAdic& lo, const NAdic& hi);

bool same_lamp_group(const LampGroupPtr&, const LampGroupPtr&);

// An element of the wreath product: finitely many lit lamps and a shift.
// Only non-identity lamp values are stored, so map equality is exact.
struct LampElt {
  LampGroupPtr group;
  std::map<long, LampValue> lamps;
  long shift = 0;
};

LampElt lamp_identity(const LampGroupPtr&);
LampElt lamp_delta(const LampGroupPtr&, long pos, LampValue v);
LampElt lamp_z(const LampGroupPtr&, long k);
LampElt lamp_mul(const LampElt&, const LampElt&);
LampElt lamp_invert(const LampElt&);
// conjugation by z^k: lamp at p moves to p + k, shift unchanged
LampElt lamp_shift(const LampElt&, long k);
bool lamp_equal(const LampElt&, const LampElt&);
bool lamp_is_identity(const LampElt&);

// Subgroups H <= Gamma that the Q_H construction accepts, restricted to
// shapes with exact order tests: the trivial and full subgroups, index
// subgroups dZ of the integer lamps, and coordinate subspaces of the
// abelian lamps.
struct SubTrivial {};
struct SubWhole {};
struct SubIntMultiples {
  Int d;  // d >= 1
};
struct SubAbelianCoords {
  std::vector<int> xs;  // sorted, distinct, >= 1
};
using SubgroupDesc = std::variant<SubTrivial, SubWhole, SubIntMultiples, SubAbelianCoords>;

bool subgroup_contains(const SubgroupDesc&, const LampGroupPtr&, const LampValue&);
bool subgroup_leq(const SubgroupDesc&, const SubgroupDesc&);
std::string subgroup_describe(const SubgroupDesc&);

struct LampFamily;
using LampFamilyPtr = std::shared_ptr<const LampFamily>;

struct LampFull {};
// lamps at negative positions lie in H, the rest free
struct LampSubgroup {
  SubgroupDesc H;
};
// word length at position i bounded by 2^i for i >= 0, trivial below 0
struct LampBalls {};
// integer lamps: position i < 0 requires dist(m c sqrt2, Z) < 2^i
struct LampMachado {
  Int c;
};
// abelian lamps: position -n determined by position -1 with the lowest
// n-1 layers dropped and the rest shifted down
struct LampNonSplit {};
struct LampSplitClosure {
  LampFamilyPtr inner;
};
struct LampShiftConjugate {
  LampFamilyPtr inner;
  long k;
};
struct LampIntersection {
  LampFamilyPtr lhs, rhs;
};
using LampNode = std::variant<LampFull, LampSubgroup, LampBalls, LampMachado, LampNonSplit,
                              LampSplitClosure, LampShiftConjugate, LampIntersection>;

struct LampFamily {
  static LampFamily full(LampGroupPtr g);
  static LampFamily subgroup_family(LampGroupPtr g, SubgroupDesc H);
  static LampFamily balls(LampGroupPtr g);  // needs exact word lengths
  static LampFamily machado(const Int& c);  // over integer lamps, c >= 1
  static LampFamily non_split();            // over abelian lamps
  static LampFamily split_closure(const LampFamily& F);
  static LampFamily shift_conjugate(const LampFamily& F, long k);
  static LampFamily intersection(const LampFamily& F1, const LampFamily& F2);

  const LampGroupPtr& group() const { return group_; }
  const LampNode& node() const { return *node_; }
  std::string describe() const;

 private:
  LampFamily(LampGroupPtr g, LampNode n);
  LampGroupPtr group_;
  std::shared_ptr<const LampNode> node_;
};

bool lamp_same_description(const LampFamily&, const LampFamily&);

// pre: shift(u) = 0
bool lamp_member(const LampElt& u, const LampFamily& F);

std::vector<LampElt> lamp_sample_members(const LampFamily& F, std::mt19937_64& rng, int count);

using LampAxiomReport = AxiomReportT<LampElt>;
using LampVerdict = VerdictT<LampElt>;

LampAxiomReport lamp_axiom_check(const LampFamily& F, const Budget& budget = {});

// Dominates(k): the least k with sigma^k(F2) inside F1 under the exact
// catalog rules, or the least sampled exponent otherwise.  Refuted carries a
// replay-checked witness; Inconclusive is honest.
LampVerdict lamp_compare(const LampFamily& F1, const LampFamily& F2, const Budget& budget = {});

// exact for the catalog: the family contains every non-negative configuration
bool is_right_heavy(const LampFamily& F);
// the characterization: F absorbs right multiplication by non-negative
// configurations; structural answer cross-checked on samples
bool is_split(const LampFamily& F, const Budget& budget = {});
// the split closure node; requires a right-heavy family
LampFamily lamp_split_representative(const LampFamily& F);

// dist(m * c * sqrt2, Z) < 2^i, decided by integer comparisons only
bool machado_window_contains(const Int& c, const Int& m, long i);
// least power p >= 1 whose multiple escapes the stated window; m != 0
long machado_escape_power(const Int& c, const Int& m, long i, long cap = 1 << 20);
// a nonzero integer whose multiples of c stay within 2^-e of an integer:
// denominators of sqrt2 convergents, tested exactly
Int machado_deep_member(const Int& c, long e, long pos_cap = 256);

// Slope bridge at a rational non-n-adic t: coordinate k <= 0 is the log-n
// slope at t.a^k divided by the fixed-point order o.  The element must fix
// every t.a^k down to where its support ends; k_min caps the certification
// walk.
std::map<long, long> xi_t(const PLMap& g, const Rational& t, long k_min = -64);
// homomorphic section: a product of disjointly supported slope elements
PLMap xi_section(const std::map<long, long>& v, const Rational& t, int n = 2);

}  // namespace fng
