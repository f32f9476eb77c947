// Window-constrained confining subsets Q_S built from a contracting point
// sequence: tau_{2^i j} = tau_j.a^{-i}, closure of odd index sets under
// s -> 2s and s -> 2^shift s +- 1, and sparse "good" odd sets whose dilates
// stay far apart.  Q_S = { g : tau_s.g and tau_s.g^{-1} stay strictly between
// the neighbouring tau's, for every s in the closure }.
#pragma once

#include "fng/plmap.hpp"
#include "fng/verdict.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace fng {

using Index = std::int64_t;

// Memoized tau_j (j >= 0, tau_0 = r = right end of a's initial support).
// Even indices pull back along a; odd indices take the n-adic of least
// denominator (ties: least numerator) in the open gap (tau_{j+1}, tau_{j-1}).
class TauSequence {
 public:
  explicit TauSequence(int n);              // a = standard a_0, tau_1 = 1/n^2
  TauSequence(PLMap a, NAdic tau1);         // custom contraction
  int base() const { return a_.base(); }
  const PLMap& a() const { return a_; }
  const NAdic& r() const { return r_; }
  NAdic tau(Index j) const;                 // strictly decreasing in j
  // Least j >= 1 with tau_j <= x; exponential + binary search.
  Index first_at_or_below(const Rational& x) const;

 private:
  PLMap a_, ainv_;
  NAdic r_, tau1_;
  mutable std::map<Index, NAdic> memo_;
};

// Closure of S under s -> 2s, s -> 2^shift s +- 1, cut to [1, N]; sorted.
std::vector<Index> stilde(const std::vector<Index>& S, Index N, int shift = 5);

// Decision procedure for single indices (no enumeration up to x needed).
class StildeDecider {
 public:
  StildeDecider(std::vector<Index> S, int shift = 5);
  bool contains(Index x) const;

 private:
  std::vector<Index> s_;
  int shift_;
  mutable std::map<Index, bool> memo_;
};

struct OddSetRejection {
  Index candidate;
  Index against;  // the earlier x_i whose dilate window caught it
  long p;
};

struct OddSet {
  std::vector<Index> xs;
  std::vector<OddSetRejection> log;
};

// Greedy: x_1 = 3, then least odd > max(x_prev, 2^{k+1}) outside every window
// |x - 2^p x_i| <= 2^{p-3}; re-verified by a full pairwise sweep.
OddSet good_odd_set(int count);

// Pairwise sweep |x_j - 2^p x_i| > 2^{p-3} for i != j, 1 <= p <= p_hi;
// returns the first violating (x_i, x_j, p) if any.
std::optional<std::tuple<Index, Index, long>> odd_set_violation(
    const std::vector<Index>& xs, long p_hi = 40);

struct QsReport {
  bool member = false;
  NAdic eps;                        // g fixes [0, eps] pointwise
  Index n_eps = 1;                  // first index with tau <= eps
  std::optional<Index> violated_s;  // least violating window index
};

// Exact membership in Q_S; finite because g fixes a neighbourhood of 0.
QsReport qs_member_report(const PLMap& g, const std::vector<Index>& S,
                          const TauSequence& tau, int shift = 5);
bool qs_member(const PLMap& g, const std::vector<Index>& S, const TauSequence& tau,
               int shift = 5);

// A certified member of Q_S moving t, any rational t in (0,1): its support
// meets at most one tau point, so the windows hold trivially.
PLMap qs_mover(const Rational& t, const std::vector<Index>& S, const TauSequence& tau);

// Least k >= 0 with g^{a^k} in Q_S (every compactly supported g enters once
// its support clears tau_1); Budget error beyond cap.
long qs_entry_exponent(const PLMap& g, const std::vector<Index>& S,
                       const TauSequence& tau, long cap = 256);

// For k < shift: a pair g, h in Q_S with (g h)^{a^k} violating a window,
// witnessing that no exponent below shift closes Q_S . Q_S.  Exponent shift
// itself always works, so k >= shift returns nullopt.
std::optional<std::pair<PLMap, PLMap>> qs_product_violation(
    const std::vector<Index>& S, const TauSequence& tau, long k, int shift = 5);

// Q_S <= Q_R iff S is a subset of R (S, R from a verified good odd set:
// rejected otherwise).  Subset: exact Dominates(0).  Otherwise builds, for
// each k <= k_max, a member of Q_R whose a^k-conjugate breaks a Q_S window.
VerdictT<PLMap> qs_compare(const std::vector<Index>& S, const std::vector<Index>& R,
                           const TauSequence& tau, const Budget& budget,
                           int shift = 5);

}  // namespace fng
