#include "fng/nonlamplike.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace fng {

namespace {

constexpr Index kNodeBudget = Index(1) << 26;

void check_shift(int shift) {
  if (shift < 5 || shift > 24)
    fail(Error::Kind::Domain, "closure shift must lie in [5, 24]");
}

std::vector<Index> sorted_odd(const std::vector<Index>& S, const char* who) {
  std::vector<Index> s(S);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (Index x : s)
    if (x < 1 || x % 2 == 0)
      fail(Error::Kind::Domain, std::string(who) + ": indices must be positive odd integers");
  return s;
}

// mantissa residue mod (n-1); invariant under mul_pow and additive, so it
// classifies which gaps an n-slope interpolation can bridge.
int residue_mod(const NAdic& x) {
  int n = x.base();
  if (n == 2) return 0;
  Int r = x.mantissa() % (n - 1);
  long v = r.convert_to<long>();
  return static_cast<int>(((v % (n - 1)) + (n - 1)) % (n - 1));
}

// n-adic strictly inside (lo, hi) with prescribed mantissa residue mod (n-1).
NAdic residue_pick(const NAdic& lo, const NAdic& hi, int target) {
  int n = lo.base();
  NAdic mu = nadic_between(lo.value(), hi.value(), n);
  if (n == 2) return mu;
  int j = ((target - residue_mod(mu)) % (n - 1) + (n - 1)) % (n - 1);
  if (j == 0) return mu;
  long e = std::max(mu.exponent(), hi.exponent()) + 1;
  while (!(mu + NAdic(n, j, e) < hi)) {
    ++e;
    if (e > 1 << 14) fail(Error::Kind::Budget, "residue adjustment ran too deep");
  }
  return mu + NAdic(n, j, e);
}

// Identity outside (A, B), maps m to mu; all four points n-adic with
// A < m < B, A < mu < B and matching length residues on both sides.
PLMap move_point_map(const NAdic& A, const NAdic& m, const NAdic& mu, const NAdic& B) {
  int n = A.base();
  std::vector<std::pair<NAdic, NAdic>> bp;
  NAdic zero = NAdic::zero(n), one = NAdic::one(n);
  if (zero < A) bp.emplace_back(zero, zero);
  for (auto& p : interval_transfer(A, m, A, mu)) bp.push_back(p);
  for (auto& p : interval_transfer(m, B, mu, B)) bp.push_back(p);
  if (B < one) bp.emplace_back(one, one);
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](const auto& a, const auto& b) { return a.first == b.first; }),
           bp.end());
  return PLMap(n, std::move(bp));
}

}  // namespace

TauSequence::TauSequence(int n)
    : a_(standard_generators(n).gens[0]),
      ainv_(invert(a_)),
      r_(NAdic(n, 1, 1)),
      tau1_(NAdic(n, 1, 2)) {}

TauSequence::TauSequence(PLMap a, NAdic tau1)
    : a_(std::move(a)), ainv_(invert(a_)), r_(NAdic::one(a_.base())), tau1_(std::move(tau1)) {
  int n = a_.base();
  if (tau1_.base() != n) fail(Error::Kind::BaseMismatch, "tau sequence: base mismatch");
  if (a_.orientation() != 1 || a_.is_identity())
    fail(Error::Kind::Domain, "tau sequence: base map must be a nontrivial increasing element");
  auto sup = support(a_);
  if (sup.empty() || sup[0].first != Rational(0))
    fail(Error::Kind::Domain, "tau sequence: base map must move points next to 0");
  auto rn = is_nadic(sup[0].second, n);
  if (!rn) fail(Error::Kind::Domain, "tau sequence: initial support end must be n-adic");
  r_ = *rn;
  if (!(tau1_.sign() > 0) || !(tau1_ < r_))
    fail(Error::Kind::Domain, "tau sequence: tau_1 must lie in (0, r)");
  if (!(evaluate_nadic(ainv_, tau1_) < tau1_))
    fail(Error::Kind::Domain, "tau sequence: base map must push tau_1 upward");
}

NAdic TauSequence::tau(Index j) const {
  if (j < 0) fail(Error::Kind::Domain, "tau: index must be nonnegative");
  if (j == 0) return r_;
  if (j == 1) return tau1_;
  auto it = memo_.find(j);
  if (it != memo_.end()) return it->second;
  NAdic v = (j % 2 == 0) ? evaluate_nadic(ainv_, tau(j / 2))
                         : nadic_between(tau(j + 1).value(), tau(j - 1).value(), base());
  memo_.emplace(j, v);
  return v;
}

Index TauSequence::first_at_or_below(const Rational& x) const {
  if (!(tau1_.value() > x)) return 1;
  int i = 0;
  while (tau(Index(1) << (i + 1)).value() > x) {
    ++i;
    if (i >= 60) fail(Error::Kind::Budget, "tau search: target is too deep in the sequence");
  }
  Index lo = Index(1) << i, hi = Index(1) << (i + 1);  // tau(lo) > x >= tau(hi)
  while (hi - lo > 1) {
    Index mid = lo + (hi - lo) / 2;
    (tau(mid).value() > x ? lo : hi) = mid;
  }
  return hi;
}

namespace {

// The closure graph is a forest (an even index has the unique parent x/2, an
// odd one at most one of (x -+ 1)/2^shift), so plain DFS never revisits.
template <class Visit>
void closure_dfs(const std::vector<Index>& roots, Index cap, int shift, Visit&& visit) {
  Index budget = kNodeBudget;
  std::vector<Index> stack;
  for (Index s : roots)
    if (s <= cap) stack.push_back(s);
  while (!stack.empty()) {
    Index x = stack.back();
    stack.pop_back();
    if (--budget < 0) fail(Error::Kind::Budget, "closure enumeration exceeded the node budget");
    visit(x);
    if (x <= cap / 2) stack.push_back(2 * x);
    if (x <= (cap >> shift)) {
      Index y = (x << shift);
      if (y - 1 <= cap) stack.push_back(y - 1);
      if (y + 1 <= cap) stack.push_back(y + 1);
    }
  }
}

std::vector<Index> stilde_range(const std::vector<Index>& S, Index lo, Index hi, int shift) {
  std::vector<Index> out;
  if (hi < 1) return out;
  closure_dfs(S, hi, shift, [&](Index x) {
    if (x >= lo) out.push_back(x);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<Index> stilde(const std::vector<Index>& S, Index N, int shift) {
  check_shift(shift);
  if (N < 0 || N > (Index(1) << 56)) fail(Error::Kind::Domain, "closure bound out of range");
  return stilde_range(sorted_odd(S, "stilde"), 1, N, shift);
}

StildeDecider::StildeDecider(std::vector<Index> S, int shift)
    : s_(sorted_odd(S, "closure decision")), shift_(shift) {
  check_shift(shift);
}

bool StildeDecider::contains(Index x) const {
  if (x < 1) return false;
  if (std::binary_search(s_.begin(), s_.end(), x)) return true;
  auto it = memo_.find(x);
  if (it != memo_.end()) return it->second;
  bool in = false;
  if (x % 2 == 0) {
    in = contains(x / 2);
  } else {
    Index step = Index(1) << shift_;
    if ((x - 1) % step == 0) in = contains((x - 1) / step);
    else if ((x + 1) % step == 0) in = contains((x + 1) / step);
  }
  memo_.emplace(x, in);
  return in;
}

std::optional<std::tuple<Index, Index, long>> odd_set_violation(const std::vector<Index>& xs,
                                                                long p_hi) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      for (long p = 1; p <= p_hi; ++p) {
        Int gap = Int(xs[j]) - (Int(xs[i]) << p);
        if (gap < 0) gap = -gap;
        if ((gap << 3) <= (Int(1) << p)) return std::make_tuple(xs[i], xs[j], p);
      }
    }
  return std::nullopt;
}

OddSet good_odd_set(int count) {
  if (count < 1 || count > 48) fail(Error::Kind::Domain, "good odd set: count must be in [1, 48]");
  OddSet out;
  out.xs.push_back(3);
  while (out.xs.size() < static_cast<std::size_t>(count)) {
    Index k = static_cast<Index>(out.xs.size());
    Index threshold = std::max(out.xs.back(), Index(1) << (k + 1));
    Index cand = (threshold % 2 == 0) ? threshold + 1 : threshold + 2;
    long tries = 0;
    for (;; cand += 2) {
      if (++tries > (1L << 22)) fail(Error::Kind::Budget, "good odd set: search exhausted");
      bool clean = true;
      for (Index xi : out.xs) {
        // windows |x - 2^p xi| <= 2^{p-3} for every p >= 1 reaching cand
        for (long p = 1; (Int(xi) << p) - (Int(1) << p) / 8 <= Int(cand) * 2; ++p) {
          Int gap = Int(cand) - (Int(xi) << p);
          if (gap < 0) gap = -gap;
          if ((gap << 3) <= (Int(1) << p)) {
            out.log.push_back({cand, xi, p});
            clean = false;
            break;
          }
        }
        if (!clean) break;
      }
      if (clean) break;
    }
    out.xs.push_back(cand);
  }
  if (auto bad = odd_set_violation(out.xs, 40))
    fail(Error::Kind::Domain, "good odd set: verification sweep failed");
  return out;
}

QsReport qs_member_report(const PLMap& g, const std::vector<Index>& S, const TauSequence& tau,
                          int shift) {
  check_shift(shift);
  int n = tau.base();
  if (g.base() != n) fail(Error::Kind::BaseMismatch, "window membership: base mismatch");
  if (g.orientation() != 1 || !is_compactly_supported(g))
    fail(Error::Kind::Domain,
         "window membership: element must be increasing and compactly supported");
  std::vector<Index> s = sorted_odd(S, "window membership");
  if (g.is_identity()) return QsReport{true, NAdic::one(n), 1, std::nullopt};

  const auto& pieces = g.pieces();
  std::size_t first = 0, last = pieces.size() - 1;
  auto is_flat = [](const Piece& p) {
    return p.k == 0 && p.sign == 1 && p.offset.sign() == 0;
  };
  while (is_flat(pieces[first])) ++first;
  while (is_flat(pieces[last])) --last;
  NAdic eps = pieces[first].x0;
  NAdic hi = pieces[last].x1;

  Index j_end = tau.first_at_or_below(eps.value());
  Index j_start = (hi.value() < tau.r().value()) ? tau.first_at_or_below(hi.value()) : 1;
  QsReport rep{true, eps, j_end, std::nullopt};
  if (j_start >= j_end) return rep;

  std::vector<Index> candidates;
  if (j_end - j_start <= (Index(1) << 17)) {
    StildeDecider dec(s, shift);
    for (Index j = j_start; j < j_end; ++j)
      if (dec.contains(j)) candidates.push_back(j);
  } else {
    candidates = stilde_range(s, j_start, j_end - 1, shift);
  }

  PLMap ginv = invert(g);
  for (Index sj : candidates) {
    NAdic ts = tau.tau(sj), lo = tau.tau(sj + 1), up = tau.tau(sj - 1);
    NAdic y1 = evaluate_nadic(g, ts), y2 = evaluate_nadic(ginv, ts);
    if (!(lo < y1 && y1 < up) || !(lo < y2 && y2 < up)) {
      rep.member = false;
      rep.violated_s = sj;
      return rep;
    }
  }
  return rep;
}

bool qs_member(const PLMap& g, const std::vector<Index>& S, const TauSequence& tau, int shift) {
  return qs_member_report(g, S, tau, shift).member;
}

PLMap qs_mover(const Rational& t, const std::vector<Index>& S, const TauSequence& tau) {
  int n = tau.base();
  if (!(Rational(0) < t) || !(t < Rational(1)))
    fail(Error::Kind::Domain, "mover: point must lie in (0,1)");
  PLMap mover = PLMap::identity(n);
  if (tau.tau(1).value() < t) {
    mover = bump_in(tau.tau(1), nadic_between(t, Rational(1), n));
  } else {
    Index j = tau.first_at_or_below(t);  // tau_j <= t < tau_{j-1}
    mover = (tau.tau(j).value() == t) ? bump_in(tau.tau(j + 1), tau.tau(j - 1))
                                      : bump_in(tau.tau(j), tau.tau(j - 1));
  }
  if (evaluate(mover, t) == t || !qs_member(mover, S, tau))
    fail(Error::Kind::Domain, "mover: internal certificate failed");
  return mover;
}

long qs_entry_exponent(const PLMap& g, const std::vector<Index>& S, const TauSequence& tau,
                       long cap) {
  PLMap conj = g;
  PLMap a = tau.a();
  for (long k = 0; k <= cap; ++k) {
    if (qs_member(conj, S, tau)) return k;
    conj = conjugate(conj, a);
  }
  fail(Error::Kind::Budget, "entry exponent: no conjugate joined within the cap");
}

std::optional<std::pair<PLMap, PLMap>> qs_product_violation(const std::vector<Index>& S,
                                                            const TauSequence& tau, long k,
                                                            int shift) {
  check_shift(shift);
  if (k < 0) fail(Error::Kind::Domain, "product violation: exponent must be nonnegative");
  std::vector<Index> s = sorted_odd(S, "product violation");
  if (k >= shift || s.empty()) return std::nullopt;

  Index c = s.front() << k;
  Index w = Index(1) << k;
  StildeDecider dec(s, shift);
  for (Index j = c + 1; j <= c + w; ++j)
    if (dec.contains(j)) return std::nullopt;  // window indices in the closure: blocked

  NAdic m = tau.tau(c);
  NAdic x1 = residue_pick(tau.tau(c + 1), m, residue_mod(m));
  PLMap g = move_point_map(tau.tau(c + 1), m, x1, tau.tau(c - 1));
  NAdic y1 = residue_pick(tau.tau(c + w + 1), tau.tau(c + w), residue_mod(x1));
  PLMap h = move_point_map(tau.tau(c + w + 1), x1, y1, m);

  if (!qs_member(g, s, tau, shift) || !qs_member(h, s, tau, shift))
    fail(Error::Kind::Domain, "product violation: factors fell outside the family");
  PLMap bad = conjugate(compose(g, h), power(tau.a(), k));
  if (qs_member(bad, s, tau, shift))
    fail(Error::Kind::Domain, "product violation: conjugated product unexpectedly stayed inside");
  return std::make_pair(g, h);
}

namespace {

// Every closure element decomposes as 2^p q + eps with q in R, |eps| < 2^{p-4}
// (geometric tail of the +-1 digits).  If no dilate 2^p q comes within
// 2^k + 2^{p-4} of the centre, the index band of half-width 2^k is certifiably
// closure-free.
bool band_certified_empty(const std::vector<Index>& R, Index centre, long k, long ell) {
  for (Index q : R) {
    for (long p = 0; p <= ell + 2; ++p) {
      Int gap = (Int(q) << p) - centre;
      if (gap < 0) gap = -gap;
      if ((gap << 4) < (Int(1) << (k + 4)) + (Int(1) << p)) return false;
    }
  }
  return true;
}

}  // namespace

VerdictT<PLMap> qs_compare(const std::vector<Index>& S, const std::vector<Index>& R,
                           const TauSequence& tau, const Budget& budget, int shift) {
  check_shift(shift);
  std::vector<Index> s = sorted_odd(S, "compare"), r = sorted_odd(R, "compare");
  std::vector<Index> both(s);
  both.insert(both.end(), r.begin(), r.end());
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());
  if (auto bad = odd_set_violation(both, 40))
    fail(Error::Kind::Domain, "compare: index sets are not drawn from a good odd set (pair " +
                                  std::to_string(std::get<0>(*bad)) + ", " +
                                  std::to_string(std::get<1>(*bad)) + " at p = " +
                                  std::to_string(std::get<2>(*bad)) + ")");
  if (std::includes(r.begin(), r.end(), s.begin(), s.end())) return Dominates{0};

  Index t = 0;
  for (Index x : s)
    if (!std::binary_search(r.begin(), r.end(), x)) {
      t = x;
      break;
    }

  int bits_t = 0;
  while ((t >> bits_t) != 0) ++bits_t;
  std::optional<PLMap> witness;
  for (long k = 0; k <= budget.k_max; ++k) {
    long ell = -1;
    for (long e = k + shift; e + bits_t <= 60; ++e) {
      if (band_certified_empty(r, t << e, k, e)) {
        ell = e;
        break;
      }
    }
    if (ell < 0)
      return Inconclusive{budget.samples, budget.k_max,
                          "no certified closure-free index band within the index range at k = " +
                              std::to_string(k)};
    try {
      Index c = t << ell, w = Index(1) << k;
      NAdic m = tau.tau(c);
      NAdic mu = residue_pick(tau.tau(c - w), tau.tau(c - w - 1), residue_mod(m));
      PLMap h = move_point_map(tau.tau(c + w), m, mu, tau.tau(c - w - 1));
      if (!qs_member(h, r, tau, shift) ||
          qs_member(conjugate(h, power(tau.a(), k)), s, tau, shift))
        return Inconclusive{budget.samples, budget.k_max,
                            "witness replay failed at k = " + std::to_string(k)};
      witness = h;
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::Budget) throw;
      return Inconclusive{budget.samples, budget.k_max,
                          "budget exhausted at k = " + std::to_string(k) + ": " + e.what()};
    }
  }
  // Carry the fully conjugated witness: it sits outside Q_S as-is, and pulling
  // it back by a^{-k} stays inside Q_R for every k (replay-verified).
  PLMap carried = conjugate(*witness, power(tau.a(), budget.k_max));
  PLMap ainv = invert(tau.a());
  PLMap pulled = carried;
  for (long k = 0; k <= budget.k_max; ++k) {
    if (!qs_member(pulled, r, tau, shift))
      return Inconclusive{budget.samples, budget.k_max,
                          "carried witness fails to re-confine at k = " + std::to_string(k)};
    pulled = conjugate(pulled, ainv);
  }
  return RefutedT<PLMap>{carried, budget.k_max};
}

}  // namespace fng
