// Shared verdict/budget vocabulary for the confining-family engines.  Compare
// results are three-valued and never upgraded: Dominates carries an exact
// conjugation exponent, Refuted carries a replayable witness together with the
// range of exponents it defeats, Inconclusive reports the budget that ran out.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fng {

struct Budget {
  int samples = 200;
  long k_max = 32;
  std::uint64_t seed = 1;
};

struct Dominates {
  long k = 0;
};

template <class Elt>
struct RefutedT {
  // Outside the left-hand family as-is, while the pull-back by a^{-k} lies in
  // the right-hand family for every 0 <= k <= k_max: one element refutes the
  // whole exponent range.
  Elt witness;
  long k_max;
};

struct Inconclusive {
  int samples = 0;
  long k_max = 0;
  std::string note;
};

template <class Elt>
using VerdictT = std::variant<Dominates, RefutedT<Elt>, Inconclusive>;

template <class Elt>
struct AxiomReportT {
  // Q^z inside Q for nonnegative-character z, on sampled members/exponents.
  bool stay_ok = false;
  std::optional<Elt> stay_counterexample;
  // per-sample least conjugating exponent that pushes the sample into Q
  bool getin_ok = false;
  std::vector<long> getin_witnesses;
  // least exponent z0 with (Q.Q)^{a^z0} inside Q on samples; exact where the
  // family catalog pins it (subgroup families short-circuit to 0)
  bool prod_ok = false;
  std::optional<long> prod_witness;
  bool prod_exact = false;
  bool subgroup_shortcut = false;
};

}  // namespace fng
