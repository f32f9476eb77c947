#include "fng/confining.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <tuple>

namespace fng {

namespace {

// Threshold scans walk t.a^k upward; the number of steps is bounded by the
// bit size of the parameters, the cap only guards against runaway inputs.
constexpr long kScanCap = 4096;
constexpr long kOrbitCap = 1 << 16;
constexpr long kTailCap = 200000;

void check_element(const PLMap& g, int n) {
  if (g.base() != n) fail(Error::Kind::BaseMismatch, "confining: element base mismatch");
  if (g.orientation() != 1)
    fail(Error::Kind::Domain, "confining: orientation-reversing element");
  if (!is_compactly_supported(g))
    fail(Error::Kind::Domain, "confining: element is not compactly supported");
}

// Strictly inside (lo, hi); optional rng wiggle keeps samples varied.
NAdic nadic_in(const Rational& lo, const Rational& hi, int n) { return nadic_between(lo, hi, n); }

NAdic rand_nadic_in(const Rational& lo, const Rational& hi, int n, std::mt19937_64& rng) {
  Rational a = lo, b = hi;
  NAdic m = nadic_between(a, b, n);
  int cuts = static_cast<int>(rng() % 3);
  while (cuts-- > 0) {
    if (rng() & 1)
      a = m.value();
    else
      b = m.value();
    m = nadic_between(a, b, n);
  }
  return m;
}

PLMap bump_inside(const Rational& lo, const Rational& hi, int n) {
  NAdic u = nadic_in(lo, hi, n);
  NAdic v = nadic_in(u.value(), hi, n);
  return bump_in(u, v);
}

PLMap rand_bump_inside(const Rational& lo, const Rational& hi, int n, std::mt19937_64& rng) {
  NAdic u = rand_nadic_in(lo, hi, n, rng);
  NAdic v = rand_nadic_in(u.value(), hi, n, rng);
  return bump_in(u, v);
}

// One-bump whose support contains q, confined to (lo, hi); moves q.
PLMap straddle_point(const Rational& q, const Rational& lo, const Rational& hi, int n) {
  NAdic u = nadic_in(lo, q, n);
  NAdic v = nadic_in(q, hi, n);
  return bump_in(u, v);
}

// Fixes q, support closure contains q, confined to (lo, hi).  n-adic q gets a
// bump ending at q; a rational non-n-ary q gets a slope-carrying fixator.
PLMap toucher_at(const Rational& q, const Rational& lo, const Rational& hi, int n) {
  if (auto qa = is_nadic(q, n)) return bump_in(nadic_in(lo, q, n), *qa);
  Rational lo_cur = lo, hi_cur = hi;
  for (int tries = 0; tries < 8; ++tries) {
    try {
      return rational_slope_fix_element(q, nadic_in(lo_cur, q, n), nadic_in(q, hi_cur, n));
    } catch (const Error&) {
      // residue obstruction: vary the window and retry
      if (tries & 1)
        hi_cur = nadic_in(q, hi_cur, n).value();
      else
        lo_cur = nadic_in(lo_cur, q, n).value();
    }
  }
  fail(Error::Kind::Unsupported, "confining: no slope-carrying fixator fits the window");
}

// Least power of b pushing p strictly past barrier; sup supp(b) must exceed it.
PLMap powered_past(const PLMap& b, const Rational& p, const Rational& barrier) {
  PLMap g = b;
  for (int i = 0; i < 64; ++i) {
    if (evaluate(g, p) > barrier) return g;
    g = compose(g, g);
  }
  fail(Error::Kind::Budget, "confining: power search did not cross the barrier");
}

std::string rat_str(const Rational& x) { return x.str(); }

std::string plmap_str(const PLMap& g) {
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (const auto& [x, y] : g.breakpoints()) {
    if (!first) os << ",";
    first = false;
    os << "(" << x.str() << "," << y.str() << ")";
  }
  os << "]";
  return os.str();
}

}  // namespace

PLMap base_map(int n) { return standard_generators(n).gens[0]; }

CharClassification classify_character(const CharVector& rho) {
  if (rho.n < 2 || rho.values.size() != static_cast<std::size_t>(rho.n))
    fail(Error::Kind::Domain, "character vector needs one value per generator");
  std::vector<int> nz;
  for (int i = 0; i < rho.n; ++i)
    if (rho.values[i] != Rational(0, 1)) nz.push_back(i);
  CharClassification out;
  if (nz.empty()) {
    out.cls = CharClass::Zero;
    return out;
  }
  if (nz.size() >= 2) {
    out.cls = CharClass::TwoNonzero;
    out.i = nz[0];
    out.j = nz[1];
    return out;
  }
  out.i = nz[0];
  bool pos = rho.values[nz[0]] > Rational(0, 1);
  if (nz[0] == 0)
    out.cls = pos ? CharClass::PositiveChi0 : CharClass::NegativeChi0;
  else if (nz[0] == rho.n - 1)
    out.cls = pos ? CharClass::PositiveChi1 : CharClass::NegativeChi1;
  else
    out.cls = CharClass::Middle;
  return out;
}

bool IndexSet::contains(long i) const {
  bool in = std::binary_search(elems.begin(), elems.end(), i);
  return cofinite ? !in : in;
}

static std::vector<long> sorted_positive(std::vector<long> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (!xs.empty() && xs.front() < 1)
    fail(Error::Kind::Domain, "index sets live inside the positive integers");
  return xs;
}

IndexSet IndexSet::finite(std::vector<long> xs) {
  IndexSet s;
  s.cofinite = false;
  s.elems = sorted_positive(std::move(xs));
  return s;
}

IndexSet IndexSet::all_but(std::vector<long> xs) {
  IndexSet s;
  s.cofinite = true;
  s.elems = sorted_positive(std::move(xs));
  return s;
}

std::optional<long> finite_difference_max(const IndexSet& X, const IndexSet& Y) {
  if (!X.cofinite) {
    long best = 0;
    for (long i : X.elems)
      if (!Y.contains(i)) best = std::max(best, i);
    return best;
  }
  if (!Y.cofinite) return std::nullopt;  // cofinite minus finite is infinite
  long best = 0;
  for (long i : Y.elems)  // X \ Y = excluded-from-Y minus excluded-from-X
    if (X.contains(i)) best = std::max(best, i);
  return best;
}

// ---------------------------------------------------------------------------
// family construction

ConfFamily::ConfFamily(int n, Node v) : n_(n), node_(std::make_shared<const Node>(std::move(v))) {}

static void check_scale_param(int n, const Rational& t, const char* what) {
  if (!(t > Rational(0, 1) && t < Rational(1, n)))
    fail(Error::Kind::Domain, std::string(what) + ": parameter must lie in (0, 1/n)");
}

ConfFamily ConfFamily::full(int n) {
  if (n < 2) fail(Error::Kind::Domain, "family base must be >= 2");
  return ConfFamily(n, ConfFull{});
}

ConfFamily ConfFamily::rigid_stab(int n, const Rational& t) {
  check_scale_param(n, t, "rigid_stab");
  return ConfFamily(n, ConfRigidStab{t});
}

ConfFamily ConfFamily::open_rigid_stab(int n, const Rational& t) {
  check_scale_param(n, t, "open_rigid_stab");
  return ConfFamily(n, ConfOpenRigidStab{t});
}

ConfFamily ConfFamily::orbit_fixator(int n, const Rational& t) {
  check_scale_param(n, t, "orbit_fixator");
  return ConfFamily(n, ConfOrbitFixator{t});
}

ConfFamily ConfFamily::nbhd_orbit_fixator(int n, const Rational& t) {
  check_scale_param(n, t, "nbhd_orbit_fixator");
  return ConfFamily(n, ConfNbhdOrbitFixator{t});
}

ConfFamily ConfFamily::lamplike_product(int n, const Rational& t, const Rational& x,
                                        std::vector<Rational> cuts, IndexSet xset) {
  check_scale_param(n, t, "lamplike_product");
  check_scale_param(n, x, "lamplike_product");
  Rational t_down = evaluate(invert(base_map(n)), t);
  if (!(x >= t_down && x < t))
    fail(Error::Kind::Domain, "lamplike_product: x must lie in [t.a^-1, t)");
  if (cuts.empty()) fail(Error::Kind::Domain, "lamplike_product: at least one cut point");
  Rational prev = x;
  for (const auto& p : cuts) {
    if (!(p > prev && p < t))
      fail(Error::Kind::Domain, "lamplike_product: cuts must increase strictly inside (x, t)");
    prev = p;
  }
  return ConfFamily(n, ConfLamplikeProduct{t, x, std::move(cuts), std::move(xset)});
}

ConfFamily ConfFamily::non_lamplike(int n, std::vector<Index> S, int shift) {
  return non_lamplike(std::move(S), TauSequence(n), shift);
}

ConfFamily ConfFamily::non_lamplike(std::vector<Index> S, TauSequence tau, int shift) {
  if (S.empty()) fail(Error::Kind::Domain, "non_lamplike: odd set must be nonempty");
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  for (Index s : S)
    if (s < 3 || s % 2 == 0)
      fail(Error::Kind::Domain, "non_lamplike: indices must be odd and >= 3");
  if (auto bad = odd_set_violation(S))
    fail(Error::Kind::Domain, "non_lamplike: dilate windows of " +
                                  std::to_string(std::get<0>(*bad)) + " and " +
                                  std::to_string(std::get<1>(*bad)) + " collide");
  if (shift < 1) fail(Error::Kind::Domain, "non_lamplike: shift must be >= 1");
  int n = tau.base();
  return ConfFamily(n, ConfNonLamplike{std::move(S), std::move(tau), shift});
}

ConfFamily ConfFamily::conjugate_by(ConfFamily F, long k) {
  if (std::holds_alternative<ConfFull>(F.node())) return F;  // Full is conjugation-invariant
  if (const auto* c = std::get_if<ConfConjugate>(&F.node())) {
    long sum = c->k + k;
    ConfFamily inner = *c->inner;
    if (sum == 0) return inner;
    return ConfFamily(inner.n(), ConfConjugate{std::make_shared<const ConfFamily>(inner), sum});
  }
  if (k == 0) return F;
  int n = F.n();
  return ConfFamily(n, ConfConjugate{std::make_shared<const ConfFamily>(std::move(F)), k});
}

ConfFamily ConfFamily::intersection(ConfFamily F1, ConfFamily F2) {
  if (F1.n() != F2.n()) fail(Error::Kind::BaseMismatch, "intersection: base mismatch");
  int n = F1.n();
  return ConfFamily(n, ConfIntersection{std::make_shared<const ConfFamily>(std::move(F1)),
                                        std::make_shared<const ConfFamily>(std::move(F2))});
}

ConfFamily ConfFamily::split_closure(ConfFamily F, const NAdic& t) {
  int n = F.n();
  if (t.base() != n) fail(Error::Kind::BaseMismatch, "split_closure: base mismatch");
  if (!(t.value() > Rational(0, 1) && t.value() < Rational(1, 1)))
    fail(Error::Kind::Domain, "split_closure: split point must lie in (0, 1)");
  return ConfFamily(n, ConfSplitClosure{std::make_shared<const ConfFamily>(std::move(F)), t});
}

std::string ConfFamily::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfFull>) {
          os << "full";
        } else if constexpr (std::is_same_v<T, ConfRigidStab>) {
          os << "rigidstab:" << rat_str(node.t);
        } else if constexpr (std::is_same_v<T, ConfOpenRigidStab>) {
          os << "openrigidstab:" << rat_str(node.t);
        } else if constexpr (std::is_same_v<T, ConfOrbitFixator>) {
          os << "orbitfixator:" << rat_str(node.t);
        } else if constexpr (std::is_same_v<T, ConfNbhdOrbitFixator>) {
          os << "nbhdorbitfixator:" << rat_str(node.t);
        } else if constexpr (std::is_same_v<T, ConfLamplikeProduct>) {
          os << "lamplike:t=" << rat_str(node.t) << ";x=" << rat_str(node.x) << ";cuts=";
          for (std::size_t i = 0; i < node.cuts.size(); ++i)
            os << (i ? "," : "") << rat_str(node.cuts[i]);
          os << ";X=" << (node.xset.cofinite ? "all-but{" : "{");
          for (std::size_t i = 0; i < node.xset.elems.size(); ++i)
            os << (i ? "," : "") << node.xset.elems[i];
          os << "}";
        } else if constexpr (std::is_same_v<T, ConfNonLamplike>) {
          os << "nonlamplike:S={";
          for (std::size_t i = 0; i < node.S.size(); ++i) os << (i ? "," : "") << node.S[i];
          os << "};shift=" << node.shift << ";tau1=" << node.tau.tau(1).str()
             << ";a=" << plmap_str(node.tau.a());
        } else if constexpr (std::is_same_v<T, ConfConjugate>) {
          os << "conj(" << node.inner->describe() << ";k=" << node.k << ")";
        } else if constexpr (std::is_same_v<T, ConfIntersection>) {
          os << "inter(" << node.lhs->describe() << ";" << node.rhs->describe() << ")";
        } else if constexpr (std::is_same_v<T, ConfSplitClosure>) {
          os << "split(" << node.inner->describe() << ";t=" << node.t.str() << ")";
        }
      },
      node());
  return os.str();
}

bool same_description(const ConfFamily& F1, const ConfFamily& F2) {
  return F1.n() == F2.n() && F1.describe() == F2.describe();
}

// ---------------------------------------------------------------------------
// membership

namespace {

// p_0 = x, explicit cuts p_1..p_m, then the tail p_{m+j} = t - (t - p_m)/n^j.
Rational lp_cut_point(const ConfLamplikeProduct& lp, long idx, int n) {
  if (idx == 0) return lp.x;
  long m = static_cast<long>(lp.cuts.size());
  if (idx <= m) return lp.cuts[static_cast<std::size_t>(idx - 1)];
  Rational d = lp.t - lp.cuts.back();
  for (long j = idx - m; j > 0; --j) d = d / Rational(n, 1);
  return lp.t - d;
}

// Index of the cell strictly containing (lo0, hi0) at level 0, or 0 when the
// run touches a cut / the window edge x.
long lp_cell_index(const ConfLamplikeProduct& lp, const Rational& lo0, const Rational& hi0,
                   int n) {
  if (!(lo0 > lp.x)) return 0;
  Rational prev = lp.x;
  long m = static_cast<long>(lp.cuts.size());
  for (long i = 1; i <= m; ++i) {
    const Rational& pi = lp.cuts[static_cast<std::size_t>(i - 1)];
    if (hi0 < pi) return (lo0 > prev) ? i : 0;
    if (lo0 <= pi) return 0;  // run touches or straddles the cut
    prev = pi;
  }
  Rational d = lp.t - lp.cuts.back();
  Rational pj = lp.cuts.back();
  for (long j = 1; j <= kTailCap; ++j) {
    d = d / Rational(n, 1);
    Rational pnext = lp.t - d;
    if (hi0 < pnext) return (lo0 > pj) ? m + j : 0;
    if (lo0 <= pnext) return 0;
    pj = pnext;
  }
  fail(Error::Kind::Budget, "lamplike membership: tail cell search exhausted");
}

bool lp_member(const PLMap& g, const ConfLamplikeProduct& lp, int n, const PLMap& a,
               const PLMap& ainv) {
  for (const auto& [lo, hi] : support(g)) {
    if (lo > lp.t) continue;          // region above the window stack is free
    if (hi >= lp.t) return false;     // support closure touches or crosses t
    Rational tk = lp.t, xk = lp.x;
    long k = 0;
    for (;;) {
      // invariant: hi < tk
      if (lo > xk) {
        // strictly inside the window (x_k, t_k): must sit in one allowed cell
        Rational lo0 = orbit_point(lo, -k, a);
        Rational hi0 = orbit_point(hi, -k, a);
        long cell = lp_cell_index(lp, lo0, hi0, n);
        if (cell == 0 || !lp.xset.contains(cell) || cell <= -k) return false;
        break;
      }
      if (hi > xk) return false;  // closure meets x_k with mass inside the window
      Rational tk1 = evaluate(ainv, tk);
      if (lo > tk1) break;        // gap run between t_{k-1} and x_k: unconstrained
      if (hi >= tk1) return false;  // closure touches the next orbit point
      tk = tk1;
      xk = evaluate(ainv, xk);
      --k;
    }
  }
  return true;
}

bool member_impl(const PLMap& g, const ConfFamily& F);

bool member_node(const PLMap& g, const ConfFamily& F, const ConfFull&) {
  (void)g;
  (void)F;
  return true;
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfRigidStab& node) {
  auto runs = support(g);
  (void)F;
  return runs.empty() || runs.front().first >= node.t;
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfOpenRigidStab& node) {
  auto runs = support(g);
  (void)F;
  return runs.empty() || runs.front().first > node.t;
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfOrbitFixator& node) {
  auto runs = support(g);
  if (runs.empty()) return true;
  const Rational& inf = runs.front().first;
  PLMap ainv = invert(base_map(F.n()));
  Rational tk = node.t;
  while (tk >= inf) {
    if (evaluate(g, tk) != tk) return false;
    tk = evaluate(ainv, tk);
  }
  return true;  // below the support everything is fixed
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfNbhdOrbitFixator& node) {
  auto runs = support(g);
  if (runs.empty()) return true;
  const Rational& inf = runs.front().first;
  PLMap ainv = invert(base_map(F.n()));
  Rational tk = node.t;
  while (tk >= inf) {
    for (const auto& [lo, hi] : runs)
      if (tk >= lo && tk <= hi) return false;  // orbit point in the support closure
    tk = evaluate(ainv, tk);
  }
  return true;
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfLamplikeProduct& node) {
  PLMap a = base_map(F.n());
  return lp_member(g, node, F.n(), a, invert(a));
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfNonLamplike& node) {
  (void)F;
  return qs_member(g, node.S, node.tau, node.shift);
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfConjugate& node) {
  PLMap pulled = conjugate(g, power(base_map(F.n()), -node.k));
  return member_impl(pulled, *node.inner);
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfIntersection& node) {
  (void)F;
  return member_impl(g, *node.lhs) && member_impl(g, *node.rhs);
}

bool member_node(const PLMap& g, const ConfFamily& F, const ConfSplitClosure& node) {
  (void)F;
  if (evaluate_nadic(g, node.t) != node.t) return false;
  return member_impl(truncate_identity_above(g, node.t), *node.inner);
}

bool member_impl(const PLMap& g, const ConfFamily& F) {
  return std::visit([&](const auto& node) { return member_node(g, F, node); }, F.node());
}

}  // namespace

bool member(const PLMap& g, const ConfFamily& F) {
  check_element(g, F.n());
  return member_impl(g, F);
}

// ---------------------------------------------------------------------------
// structural helpers shared by sampling and comparison

namespace {

bool is_subgroup_family(const ConfFamily& F) {
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfNonLamplike>)
          return false;  // products can leak out of the windows
        else if constexpr (std::is_same_v<T, ConfConjugate>)
          return is_subgroup_family(*node.inner);
        else if constexpr (std::is_same_v<T, ConfIntersection>)
          return is_subgroup_family(*node.lhs) && is_subgroup_family(*node.rhs);
        else if constexpr (std::is_same_v<T, ConfSplitClosure>)
          return is_subgroup_family(*node.inner);
        else
          return true;
      },
      F.node());
}

// A point every member fixes; families without one (Full, NonLamplike) yield
// nothing.
std::optional<Rational> distinguished_fixed_point(const ConfFamily& F) {
  return std::visit(
      [&](const auto& node) -> std::optional<Rational> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfRigidStab> || std::is_same_v<T, ConfOpenRigidStab> ||
                      std::is_same_v<T, ConfOrbitFixator> ||
                      std::is_same_v<T, ConfNbhdOrbitFixator>)
          return node.t;
        else if constexpr (std::is_same_v<T, ConfLamplikeProduct>)
          return node.t;
        else if constexpr (std::is_same_v<T, ConfSplitClosure>)
          return node.t.value();
        else if constexpr (std::is_same_v<T, ConfConjugate>) {
          auto dp = distinguished_fixed_point(*node.inner);
          if (!dp) return std::nullopt;
          return orbit_point(*dp, node.k, base_map(F.n()));
        } else if constexpr (std::is_same_v<T, ConfIntersection>) {
          auto dp = distinguished_fixed_point(*node.lhs);
          return dp ? dp : distinguished_fixed_point(*node.rhs);
        } else
          return std::nullopt;
      },
      F.node());
}

// Bumps supported in (scale, 1) belong to every constructor in the catalog.
Rational above_scale(const ConfFamily& F) {
  return std::visit(
      [&](const auto& node) -> Rational {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfFull>)
          return Rational(1, F.n() * F.n());
        else if constexpr (std::is_same_v<T, ConfRigidStab> ||
                           std::is_same_v<T, ConfOpenRigidStab> ||
                           std::is_same_v<T, ConfOrbitFixator> ||
                           std::is_same_v<T, ConfNbhdOrbitFixator> ||
                           std::is_same_v<T, ConfLamplikeProduct>)
          return node.t;
        else if constexpr (std::is_same_v<T, ConfNonLamplike>)
          return node.tau.tau(1).value();
        else if constexpr (std::is_same_v<T, ConfConjugate>)
          return orbit_point(above_scale(*node.inner), node.k, base_map(F.n()));
        else if constexpr (std::is_same_v<T, ConfIntersection>)
          return std::max(above_scale(*node.lhs), above_scale(*node.rhs));
        else {  // ConfSplitClosure
          const auto& sc = static_cast<const ConfSplitClosure&>(node);
          return std::max(above_scale(*sc.inner), sc.t.value());
        }
      },
      F.node());
}

// An element certainly outside F (never called with Full).
PLMap family_violator(const ConfFamily& F) {
  int n = F.n();
  if (const auto* nl = std::get_if<ConfNonLamplike>(&F.node())) {
    if (auto pv = qs_product_violation(nl->S, nl->tau, 0, nl->shift))
      return compose(pv->first, pv->second);
    // fallback: push one tau point past the next window edge
    Rational t3 = nl->tau.tau(3).value(), t2 = nl->tau.tau(2).value();
    Rational t1 = nl->tau.tau(1).value(), t0 = nl->tau.tau(0).value();
    PLMap b = bump_in(nadic_in(t3, t2, n), nadic_in(t1, t0, n));
    return powered_past(b, t2, t1);
  }
  if (const auto* c = std::get_if<ConfConjugate>(&F.node()))
    return conjugate(family_violator(*c->inner), power(base_map(n), c->k));
  if (const auto* ix = std::get_if<ConfIntersection>(&F.node()))
    return family_violator(*ix->lhs);
  auto dp = distinguished_fixed_point(F);
  if (!dp) fail(Error::Kind::Unsupported, "no canned violator for this family");
  return straddle_point(*dp, Rational(0, 1), Rational(1, 1), n);
}

// Lowest support bound of a lamplike product, when its members cannot reach
// arbitrarily low (no gaps, finitely many admissible cell indices).
std::optional<Rational> lp_inf_support(const ConfLamplikeProduct& lp, int n, const PLMap& a,
                                       const PLMap& ainv) {
  if (lp.xset.cofinite) return std::nullopt;
  if (lp.x > evaluate(ainv, lp.t)) return std::nullopt;  // gaps at every level
  if (lp.xset.elems.empty()) return lp.t;                // nothing moves below t
  long maxx = lp.xset.elems.back();
  Rational l0 = lp_cut_point(lp, maxx - 1, n);
  return orbit_point(l0, -(maxx - 1), a);
}

// Position of q relative to the a-orbit of s: either the exact offset
// (q = s.a^offset) or the bracketing pair of consecutive orbit points.
struct OrbitBracket {
  bool same = false;
  long offset = 0;
  Rational lo, hi;
};

OrbitBracket orbit_bracket(const Rational& s, const Rational& q, const PLMap& a,
                           const PLMap& ainv) {
  OrbitBracket out;
  if (q == s) {
    out.same = true;
    return out;
  }
  if (q > s) {
    Rational prev = s, cur = evaluate(a, s);
    for (long m = 1; m <= kOrbitCap; ++m) {
      if (cur == q) {
        out.same = true;
        out.offset = m;
        return out;
      }
      if (cur > q) {
        out.lo = prev;
        out.hi = cur;
        return out;
      }
      prev = cur;
      cur = evaluate(a, cur);
    }
  } else {
    Rational prev = s, cur = evaluate(ainv, s);
    for (long m = 1; m <= kOrbitCap; ++m) {
      if (cur == q) {
        out.same = true;
        out.offset = -m;
        return out;
      }
      if (cur < q) {
        out.lo = cur;
        out.hi = prev;
        return out;
      }
      prev = cur;
      cur = evaluate(ainv, cur);
    }
  }
  fail(Error::Kind::Budget, "orbit bracket search exhausted");
}

}  // namespace

// ---------------------------------------------------------------------------
// sampling

namespace {

void add_if_member(std::vector<PLMap>& out, const ConfFamily& F, const PLMap& g) {
  try {
    if (member(g, F)) out.push_back(g);
  } catch (const Error&) {
  }
}

std::vector<PLMap> raw_shapes(const ConfFamily& F, std::mt19937_64& rng, int want);

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfFull&) {
  int n = F.n();
  std::vector<PLMap> out;
  for (int i = 0; i < want; ++i) {
    switch (rng() % 3) {
      case 0:
        out.push_back(rand_bump_inside(Rational(0, 1), Rational(1, 1), n, rng));
        break;
      case 1:
        out.push_back(random_commutator(n, rng(), 2 + static_cast<int>(rng() % 3)));
        break;
      default: {
        PLMap b1 = rand_bump_inside(Rational(0, 1), Rational(1, 2), n, rng);
        PLMap b2 = rand_bump_inside(Rational(1, 2), Rational(1, 1), n, rng);
        out.push_back(compose(b1, b2));
      }
    }
  }
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfRigidStab& node) {
  int n = F.n();
  std::vector<PLMap> out;
  if (auto ta = is_nadic(node.t, n))
    out.push_back(bump_in(*ta, nadic_in(node.t, Rational(1, 1), n)));  // touches t from above
  while (static_cast<int>(out.size()) < want) {
    PLMap b = rand_bump_inside(node.t, Rational(1, 1), n, rng);
    if (rng() % 4 == 0) b = compose(b, rand_bump_inside(node.t, Rational(1, 1), n, rng));
    out.push_back(b);
  }
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfOpenRigidStab& node) {
  int n = F.n();
  std::vector<PLMap> out;
  while (static_cast<int>(out.size()) < want)
    out.push_back(rand_bump_inside(node.t, Rational(1, 1), n, rng));
  return out;
}

std::vector<PLMap> orbit_gap_shapes(int n, const Rational& t, bool with_touchers,
                                    std::mt19937_64& rng, int want) {
  PLMap a = base_map(n);
  PLMap ainv = invert(a);
  std::vector<Rational> pts;  // consecutive orbit points around t
  Rational cur = orbit_point(t, -4, a);
  for (int j = -4; j <= 2; ++j) {
    pts.push_back(cur);
    cur = evaluate(a, cur);
  }
  std::vector<PLMap> out;
  if (with_touchers)
    for (std::size_t i = 1; i + 1 < pts.size(); ++i)
      try {
        out.push_back(toucher_at(pts[i], pts[i - 1], pts[i + 1], n));
      } catch (const Error&) {
      }
  while (static_cast<int>(out.size()) < want) {
    std::size_t i = 1 + rng() % (pts.size() - 1);
    PLMap b = rand_bump_inside(pts[i - 1], pts[i], n, rng);
    if (rng() % 4 == 0) {
      std::size_t j = 1 + rng() % (pts.size() - 1);
      b = compose(b, rand_bump_inside(pts[j - 1], pts[j], n, rng));
    }
    out.push_back(b);
  }
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfOrbitFixator& node) {
  return orbit_gap_shapes(F.n(), node.t, true, rng, want);
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfNbhdOrbitFixator& node) {
  return orbit_gap_shapes(F.n(), node.t, false, rng, want);
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfLamplikeProduct& node) {
  int n = F.n();
  PLMap a = base_map(n);
  PLMap ainv = invert(a);
  std::vector<PLMap> out;
  // admissible cells near the top of the stack
  for (long k = 0; k >= -3 && static_cast<int>(out.size()) < want; --k) {
    for (long i = -k + 1; i <= -k + 4; ++i) {
      if (!node.xset.contains(i)) continue;
      Rational lo = orbit_point(lp_cut_point(node, i - 1, n), k, a);
      Rational hi = orbit_point(lp_cut_point(node, i, n), k, a);
      out.push_back(rand_bump_inside(lo, hi, n, rng));
    }
  }
  bool gaps = node.x > evaluate(ainv, node.t);
  Rational tk = node.t, xk = node.x;
  for (long k = 0; k >= -3 && gaps; --k) {
    Rational tk1 = evaluate(ainv, tk);
    out.push_back(rand_bump_inside(tk1, xk, n, rng));
    tk = tk1;
    xk = evaluate(ainv, xk);
  }
  while (static_cast<int>(out.size()) < want)
    out.push_back(rand_bump_inside(node.t, Rational(1, 1), n, rng));
  // a few products across regions
  if (out.size() >= 2)
    for (int p = 0; p < want / 4; ++p) {
      std::size_t i = rng() % out.size(), j = rng() % out.size();
      out.push_back(compose(out[i], out[j]));
    }
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfNonLamplike& node) {
  int n = F.n();
  const TauSequence& tau = node.tau;
  std::vector<PLMap> out;
  for (Index j = 1; j <= 6; ++j) {
    // between consecutive tau points: every window condition holds trivially
    Rational lo = tau.tau(j + 1).value(), hi = tau.tau(j).value();
    out.push_back(rand_bump_inside(lo, hi, n, rng));
  }
  out.push_back(qs_mover(Rational(1, 3), node.S, tau));
  out.push_back(qs_mover(tau.tau(2).value(), node.S, tau));
  while (static_cast<int>(out.size()) < want) {
    if (rng() % 3 == 0 && out.size() >= 2) {
      std::size_t i = rng() % out.size(), j = rng() % out.size();
      out.push_back(conjugate(compose(out[i], out[j]),
                              power(tau.a(), node.shift)));  // products re-confine at shift
    } else {
      Index j = 1 + static_cast<Index>(rng() % 8);
      out.push_back(
          rand_bump_inside(tau.tau(j + 1).value(), tau.tau(j).value(), n, rng));
    }
  }
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfConjugate& node) {
  std::vector<PLMap> inner = raw_shapes(*node.inner, rng, want);
  PLMap ak = power(base_map(F.n()), node.k);
  std::vector<PLMap> out;
  out.reserve(inner.size());
  for (const auto& m : inner) out.push_back(conjugate(m, ak));
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfIntersection& node) {
  int n = F.n();
  std::vector<PLMap> out;
  Rational s = above_scale(F);
  for (int i = 0; i < want / 2; ++i) out.push_back(rand_bump_inside(s, Rational(1, 1), n, rng));
  for (const auto& m : raw_shapes(*node.lhs, rng, want / 2)) out.push_back(m);
  for (const auto& m : raw_shapes(*node.rhs, rng, want / 2)) out.push_back(m);
  return out;
}

std::vector<PLMap> shapes_node(const ConfFamily& F, std::mt19937_64& rng, int want,
                               const ConfSplitClosure& node) {
  int n = F.n();
  std::vector<PLMap> out;
  Rational tv = node.t.value();
  for (const auto& m : raw_shapes(*node.inner, rng, want / 2)) out.push_back(m);
  for (int i = 0; i < want / 2 + 1; ++i) {
    PLMap high = rand_bump_inside(tv, Rational(1, 1), n, rng);
    out.push_back(high);
    if (!out.empty() && (rng() & 1)) out.push_back(compose(out[rng() % out.size()], high));
  }
  return out;
}

std::vector<PLMap> raw_shapes(const ConfFamily& F, std::mt19937_64& rng, int want) {
  return std::visit([&](const auto& node) { return shapes_node(F, rng, want, node); }, F.node());
}

}  // namespace

std::vector<PLMap> sample_members(const ConfFamily& F, std::mt19937_64& rng, int count) {
  if (count <= 0) return {};
  std::vector<PLMap> pool;
  int attempts = 0;
  while (static_cast<int>(pool.size()) < count && attempts < 8) {
    ++attempts;
    for (const auto& g : raw_shapes(F, rng, count)) {
      add_if_member(pool, F, g);
      if (static_cast<int>(pool.size()) >= count) break;
    }
  }
  // pad with upward conjugates: confinement keeps them inside
  PLMap a = base_map(F.n());
  std::size_t i = 0;
  while (!pool.empty() && static_cast<int>(pool.size()) < count) {
    add_if_member(pool, F, conjugate(pool[i % pool.size()], a));
    ++i;
    if (i > static_cast<std::size_t>(4 * count)) break;
  }
  if (pool.empty())
    fail(Error::Kind::Budget, "sample_members: no members found for " + F.describe());
  if (static_cast<int>(pool.size()) > count)
    pool.erase(pool.begin() + count, pool.end());
  return pool;
}

// ---------------------------------------------------------------------------
// axiom check

AxiomReport axiom_check(const ConfFamily& F, const Budget& budget) {
  std::mt19937_64 rng(budget.seed);
  int n = F.n();
  PLMap a = base_map(n);
  long k_max = std::max(0L, budget.k_max);
  int pool_size = std::max(8, std::min(budget.samples, 64));
  std::vector<PLMap> pool = sample_members(F, rng, pool_size);

  AxiomReport rep;
  rep.stay_ok = true;
  for (const auto& m : pool) {
    if (!member(conjugate(m, a), F)) {
      rep.stay_ok = false;
      rep.stay_counterexample = m;
      break;
    }
  }

  rep.getin_ok = true;
  int probes = std::max(4, std::min(budget.samples / 25, 16));
  for (int i = 0; i < probes; ++i) {
    PLMap g = random_commutator(n, budget.seed + 101 * static_cast<std::uint64_t>(i) + 7,
                                2 + i % 3);
    PLMap cur = g;
    bool entered = false;
    for (long k = 0; k <= k_max; ++k) {
      if (member(cur, F)) {
        rep.getin_witnesses.push_back(k);
        entered = true;
        break;
      }
      cur = conjugate(cur, a);
    }
    if (!entered) rep.getin_ok = false;
  }

  if (is_subgroup_family(F)) {
    rep.prod_ok = true;
    rep.prod_witness = 0;
    rep.prod_exact = true;
    rep.subgroup_shortcut = true;
    return rep;
  }
  if (const auto* nl = std::get_if<ConfNonLamplike>(&F.node())) {
    rep.subgroup_shortcut = false;
    rep.prod_exact = true;
    rep.prod_witness = nl->shift;
    bool below_fails =
        nl->shift < 1 || qs_product_violation(nl->S, nl->tau, nl->shift - 1, nl->shift).has_value();
    bool at_shift = true;
    PLMap ashift = power(a, nl->shift);
    for (std::size_t i = 0; i + 1 < pool.size() && i < 24; i += 2)
      if (!member(conjugate(compose(pool[i], pool[i + 1]), ashift), F)) {
        at_shift = false;
        break;
      }
    rep.prod_ok = below_fails && at_shift;
    return rep;
  }
  // composite family containing a non-subgroup part: sampled product scan
  rep.prod_exact = false;
  std::vector<PLMap> prods;
  for (std::size_t i = 0; i < pool.size() && prods.size() < 24; i += 2)
    if (i + 1 < pool.size()) prods.push_back(compose(pool[i], pool[i + 1]));
  for (long k = 0; k <= k_max; ++k) {
    bool all = true;
    for (const auto& p : prods)
      if (!member(p, F)) {
        all = false;
        break;
      }
    if (all) {
      rep.prod_ok = true;
      rep.prod_witness = k;
      return rep;
    }
    for (auto& p : prods) p = conjugate(p, a);
  }
  rep.prod_ok = false;
  return rep;
}

// ---------------------------------------------------------------------------
// comparison: exact catalog rules, then sampled search

namespace {

struct CompareCtx {
  int n;
  PLMap a;
  PLMap ainv;
  long k_max;
  Budget budget;
};

bool verify_refutation(const PLMap& v, const ConfFamily& F1, const ConfFamily& F2,
                       const CompareCtx& cx) {
  try {
    if (member(v, F1)) return false;
    PLMap cur = v;
    for (long k = 0; k <= cx.k_max; ++k) {
      if (!member(cur, F2)) return false;
      cur = conjugate(cur, cx.ainv);
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::optional<Verdict> refute_with(const PLMap& v, const ConfFamily& F1, const ConfFamily& F2,
                                   const CompareCtx& cx) {
  if (verify_refutation(v, F1, F2, cx)) return Verdict(RefutedT<PLMap>{v, cx.k_max});
  return std::nullopt;
}

std::optional<long> least_k_scan(Rational s, const std::function<bool(const Rational&)>& pred,
                                 const CompareCtx& cx) {
  for (long k = 0; k <= kScanCap; ++k) {
    if (pred(s)) return k;
    s = evaluate(cx.a, s);
  }
  return std::nullopt;
}

// predicate families for the threshold table
std::function<bool(const Rational&)> pred_ge(const Rational& t) {
  return [t](const Rational& s) { return s >= t; };
}
std::function<bool(const Rational&)> pred_gt_or_non_nadic(const Rational& t, int n) {
  bool nad = is_nadic(t, n).has_value();
  return [t, nad](const Rational& s) { return s > t || (!nad && s == t); };
}

// A member of F2 moving q whose downward conjugates stay inside F2: built by
// moving a deep orbit translate of q and carrying the mover back up.
std::optional<PLMap> nl_carried_mover(const Rational& q, const ConfNonLamplike& nl,
                                      const CompareCtx& cx) {
  if (!(q > Rational(0, 1) && q < Rational(1, 1))) return std::nullopt;
  Rational deep = orbit_point(q, -cx.k_max, nl.tau.a());
  PLMap w = qs_mover(deep, nl.S, nl.tau);
  return conjugate(w, power(nl.tau.a(), cx.k_max));
}

std::optional<Verdict> exact_compare(const ConfFamily& F1, const ConfFamily& F2, CompareCtx& cx);

std::optional<Verdict> sc_source_rule(const ConfFamily& F1, const ConfSplitClosure& sc,
                                      const ConfFamily& F2, CompareCtx& cx) {
  // the closure splits as (members below t) . (rigid stabilizer at t)
  ConfFamily rs = ConfFamily::rigid_stab(cx.n, sc.t.value());
  auto vG = exact_compare(F1, *sc.inner, cx);
  auto vR = exact_compare(F1, rs, cx);
  for (const auto* v : {&vG, &vR})
    if (*v)
      if (const auto* ref = std::get_if<RefutedT<PLMap>>(&**v))
        if (auto r = refute_with(ref->witness, F1, F2, cx)) return r;
  if (!is_subgroup_family(F1)) return std::nullopt;
  if (vG && vR) {
    const auto* dG = std::get_if<Dominates>(&*vG);
    const auto* dR = std::get_if<Dominates>(&*vR);
    if (dG && dR) return Verdict(Dominates{std::max(dG->k, dR->k)});
  }
  return std::nullopt;
}

// Deep free-region bump of a lamplike product lying below `below`, stable
// under pull-backs down to k_max.
std::optional<PLMap> lp_low_bump(const ConfLamplikeProduct& lp, const Rational& below,
                                 const CompareCtx& cx) {
  bool gaps = lp.x > evaluate(cx.ainv, lp.t);
  Rational tk = lp.t, xk = lp.x;
  long k = 0;
  while (tk > below && k > -kScanCap) {
    tk = evaluate(cx.ainv, tk);
    xk = evaluate(cx.ainv, xk);
    --k;
  }
  if (tk > below) return std::nullopt;
  if (gaps) {
    Rational tk1 = evaluate(cx.ainv, tk);
    return bump_inside(tk1, xk, cx.n);
  }
  if (!lp.xset.cofinite) return std::nullopt;
  long i = std::max(1L, -k + cx.k_max + 1);
  while (!lp.xset.contains(i)) ++i;
  Rational lo = orbit_point(lp_cut_point(lp, i - 1, cx.n), k, cx.a);
  Rational hi = orbit_point(lp_cut_point(lp, i, cx.n), k, cx.a);
  return bump_inside(lo, hi, cx.n);
}

// threshold rules with an orbit-fixator style source (supports live in the
// gaps of the t2-orbit, so every target needing low points fixed is refuted)
std::optional<Verdict> orbit_source_vs_stab(const Rational& t1, const Rational& t2,
                                            const ConfFamily& F1, const ConfFamily& F2,
                                            CompareCtx& cx) {
  Rational cur = t2;
  for (long j = 0; j >= -kScanCap; --j) {
    if (cur <= t1) {
      Rational lower = evaluate(cx.ainv, cur);
      if (auto r = refute_with(bump_inside(lower, cur, cx.n), F1, F2, cx)) return r;
      return std::nullopt;
    }
    cur = evaluate(cx.ainv, cur);
  }
  return std::nullopt;
}

std::optional<Verdict> orbit_vs_orbit(const Rational& t1, bool target_nbhd, const Rational& t2,
                                      bool source_nbhd, const ConfFamily& F1,
                                      const ConfFamily& F2, CompareCtx& cx) {
  OrbitBracket br = orbit_bracket(t2, t1, cx.a, cx.ainv);
  if (!br.same) {
    // t1 sits strictly inside a gap of the source orbit: a bump there moves it
    return refute_with(straddle_point(t1, br.lo, br.hi, cx.n), F1, F2, cx);
  }
  long d = br.offset;  // t2.a^d = t1
  if (target_nbhd && !source_nbhd) {
    // fixing the orbit is weaker than fixing neighbourhoods: touch t1
    try {
      PLMap v = toucher_at(t1, evaluate(cx.ainv, t1), evaluate(cx.a, t1), cx.n);
      return refute_with(v, F1, F2, cx);
    } catch (const Error&) {
      return std::nullopt;  // no fixator fits: leave it to the sampled pass
    }
  }
  return Verdict(Dominates{std::max(0L, d)});
}

std::optional<Verdict> exact_compare(const ConfFamily& F1, const ConfFamily& F2, CompareCtx& cx) {
  if (std::holds_alternative<ConfFull>(F1.node())) return Verdict(Dominates{0});
  if (std::holds_alternative<ConfFull>(F2.node()))
    return refute_with(family_violator(F1), F1, F2, cx);

  // conjugation shifts thresholds additively; witnesses ride along
  const auto* c1 = std::get_if<ConfConjugate>(&F1.node());
  const auto* c2 = std::get_if<ConfConjugate>(&F2.node());
  if (c1 || c2) {
    const ConfFamily& G1 = c1 ? *c1->inner : F1;
    const ConfFamily& G2 = c2 ? *c2->inner : F2;
    long j1 = c1 ? c1->k : 0, j2 = c2 ? c2->k : 0;
    auto sub = exact_compare(G1, G2, cx);
    if (!sub) return std::nullopt;
    if (const auto* d = std::get_if<Dominates>(&*sub))
      return Verdict(Dominates{std::max(0L, d->k + j1 - j2)});
    if (const auto* ref = std::get_if<RefutedT<PLMap>>(&*sub))
      return refute_with(conjugate(ref->witness, power(cx.a, j1)), F1, F2, cx);
    return std::nullopt;
  }

  // intersection target: both components must absorb the source
  if (const auto* ix = std::get_if<ConfIntersection>(&F1.node())) {
    auto vL = exact_compare(*ix->lhs, F2, cx);
    auto vR = exact_compare(*ix->rhs, F2, cx);
    for (const auto* v : {&vL, &vR})
      if (*v)
        if (const auto* ref = std::get_if<RefutedT<PLMap>>(&**v))
          if (auto r = refute_with(ref->witness, F1, F2, cx)) return r;
    if (vL && vR) {
      const auto* dL = std::get_if<Dominates>(&*vL);
      const auto* dR = std::get_if<Dominates>(&*vR);
      if (dL && dR) return Verdict(Dominates{std::max(dL->k, dR->k)});
    }
    return std::nullopt;
  }
  if (std::holds_alternative<ConfIntersection>(F2.node())) return std::nullopt;
  if (const auto* sc2 = std::get_if<ConfSplitClosure>(&F2.node()))
    return sc_source_rule(F1, *sc2, F2, cx);

  // non-lamplike source: move the target's distinguished fixed point
  if (const auto* nl2 = std::get_if<ConfNonLamplike>(&F2.node())) {
    if (const auto* nl1 = std::get_if<ConfNonLamplike>(&F1.node())) {
      if (nl1->shift == nl2->shift && nl1->tau.base() == nl2->tau.base() &&
          nl1->tau.a() == nl2->tau.a() && nl1->tau.tau(1) == nl2->tau.tau(1)) {
        try {
          return qs_compare(nl1->S, nl2->S, nl1->tau, cx.budget, nl1->shift);
        } catch (const Error&) {
          return std::nullopt;  // index sets from incompatible odd sets: sample instead
        }
      }
      return std::nullopt;
    }
    if (auto dp = distinguished_fixed_point(F1))
      if (auto w = nl_carried_mover(*dp, *nl2, cx))
        if (auto r = refute_with(*w, F1, F2, cx)) return r;
    return std::nullopt;
  }

  const auto* rs2 = std::get_if<ConfRigidStab>(&F2.node());
  const auto* ors2 = std::get_if<ConfOpenRigidStab>(&F2.node());
  const auto* of2 = std::get_if<ConfOrbitFixator>(&F2.node());
  const auto* nof2 = std::get_if<ConfNbhdOrbitFixator>(&F2.node());
  const auto* lp2 = std::get_if<ConfLamplikeProduct>(&F2.node());
  auto stab_scan = [&](const std::function<bool(const Rational&)>& pred,
                       const Rational& s0) -> std::optional<Verdict> {
    if (auto k = least_k_scan(s0, pred, cx)) return Verdict(Dominates{*k});
    return std::nullopt;
  };

  if (const auto* rs1 = std::get_if<ConfRigidStab>(&F1.node())) {
    const Rational& t1 = rs1->t;
    if (rs2) return stab_scan(pred_ge(t1), rs2->t);
    if (ors2) return stab_scan(pred_ge(t1), ors2->t);
    if (of2) return orbit_source_vs_stab(t1, of2->t, F1, F2, cx);
    if (nof2) return orbit_source_vs_stab(t1, nof2->t, F1, F2, cx);
    if (lp2) {
      if (auto L = lp_inf_support(*lp2, cx.n, cx.a, cx.ainv)) return stab_scan(pred_ge(t1), *L);
      if (auto v = lp_low_bump(*lp2, t1, cx)) return refute_with(*v, F1, F2, cx);
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (const auto* ors1 = std::get_if<ConfOpenRigidStab>(&F1.node())) {
    const Rational& t1 = ors1->t;
    if (rs2) return stab_scan(pred_gt_or_non_nadic(t1, cx.n), rs2->t);
    if (ors2) return stab_scan(pred_ge(t1), ors2->t);
    if (of2) return orbit_source_vs_stab(t1, of2->t, F1, F2, cx);
    if (nof2) return orbit_source_vs_stab(t1, nof2->t, F1, F2, cx);
    if (lp2) {
      if (auto L = lp_inf_support(*lp2, cx.n, cx.a, cx.ainv)) return stab_scan(pred_ge(t1), *L);
      if (auto v = lp_low_bump(*lp2, t1, cx)) return refute_with(*v, F1, F2, cx);
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (const auto* of1 = std::get_if<ConfOrbitFixator>(&F1.node())) {
    const Rational& t1 = of1->t;
    if (rs2) return stab_scan(pred_ge(t1), rs2->t);
    if (ors2) return stab_scan(pred_ge(t1), ors2->t);
    if (of2) return orbit_vs_orbit(t1, false, of2->t, false, F1, F2, cx);
    if (nof2) return orbit_vs_orbit(t1, false, nof2->t, true, F1, F2, cx);
    return std::nullopt;
  }
  if (const auto* nof1 = std::get_if<ConfNbhdOrbitFixator>(&F1.node())) {
    const Rational& t1 = nof1->t;
    if (rs2) return stab_scan(pred_gt_or_non_nadic(t1, cx.n), rs2->t);
    if (ors2) return stab_scan(pred_ge(t1), ors2->t);
    if (of2) return orbit_vs_orbit(t1, true, of2->t, false, F1, F2, cx);
    if (nof2) return orbit_vs_orbit(t1, true, nof2->t, true, F1, F2, cx);
    return std::nullopt;
  }
  if (const auto* lp1 = std::get_if<ConfLamplikeProduct>(&F1.node())) {
    if (rs2) return stab_scan(pred_gt_or_non_nadic(lp1->t, cx.n), rs2->t);
    if (ors2) return stab_scan(pred_ge(lp1->t), ors2->t);
    if (lp2) {
      if (lp1->t == lp2->t && lp1->x == lp2->x && lp1->cuts == lp2->cuts) {
        if (auto diff = finite_difference_max(lp2->xset, lp1->xset))
          return Verdict(Dominates{std::max(0L, *diff)});
        long istar = cx.k_max + 1;
        while (!(lp2->xset.contains(istar) && !lp1->xset.contains(istar))) ++istar;
        Rational lo = lp_cut_point(*lp1, istar - 1, cx.n);
        Rational hi = lp_cut_point(*lp1, istar, cx.n);
        return refute_with(bump_inside(lo, hi, cx.n), F1, F2, cx);
      }
      return std::nullopt;
    }
    if (of2 || nof2) {
      const Rational& t2 = of2 ? of2->t : nof2->t;
      OrbitBracket br = orbit_bracket(t2, lp1->t, cx.a, cx.ainv);
      PLMap v = br.same
                    ? straddle_point(lp1->cuts.front(), lp1->x, lp1->t, cx.n)
                    : straddle_point(lp1->t, br.lo, br.hi, cx.n);
      return refute_with(v, F1, F2, cx);
    }
    return std::nullopt;
  }
  if (const auto* nl1 = std::get_if<ConfNonLamplike>(&F1.node())) {
    Rational tau1 = nl1->tau.tau(1).value();
    if (rs2) return stab_scan(pred_ge(tau1), rs2->t);
    if (ors2) return stab_scan(pred_ge(tau1), ors2->t);
    if (of2 || nof2) {
      // look for a source gap containing two consecutive tau points; a powered
      // bump there breaks a window while living inside the gaps forever
      const Rational& t2 = of2 ? of2->t : nof2->t;
      Rational hi = orbit_point(t2, 2, cx.a);
      Rational lo = evaluate(cx.ainv, hi);
      for (int steps = 0; steps < 48; ++steps) {
        Index s = nl1->tau.first_at_or_below(hi);
        Rational ts = nl1->tau.tau(s).value();
        Rational ts1 = nl1->tau.tau(s + 1).value();
        if (ts < hi && ts > lo && ts1 > lo) {
          PLMap b = bump_in(nadic_in(lo, ts1, cx.n), nadic_in(ts, hi, cx.n));
          if (auto r = refute_with(powered_past(b, ts1, ts), F1, F2, cx)) return r;
        }
        hi = lo;
        lo = evaluate(cx.ainv, lo);
      }
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (const auto* sc1 = std::get_if<ConfSplitClosure>(&F1.node())) {
    Rational tv = sc1->t.value();
    if (rs2) return stab_scan(pred_ge(tv), rs2->t);
    if (ors2) return stab_scan(pred_ge(tv), ors2->t);
    return std::nullopt;
  }
  return std::nullopt;
}

// candidate violators for the sampled refutation pass
std::vector<PLMap> refutation_candidates(const ConfFamily& F1, const ConfFamily& F2,
                                         CompareCtx& cx, std::mt19937_64& rng) {
  std::vector<PLMap> out;
  auto push = [&](std::optional<PLMap> g) {
    if (g) out.push_back(std::move(*g));
  };
  if (auto dp = distinguished_fixed_point(F1)) {
    push(straddle_point(*dp, Rational(0, 1), Rational(1, 1), cx.n));
    try {
      push(toucher_at(*dp, evaluate(cx.ainv, *dp), evaluate(cx.a, *dp), cx.n));
    } catch (const Error&) {
    }
    // shapes adapted to the source's stable regions
    if (const auto* of2 = std::get_if<ConfOrbitFixator>(&F2.node())) {
      OrbitBracket br = orbit_bracket(of2->t, *dp, cx.a, cx.ainv);
      if (!br.same) push(straddle_point(*dp, br.lo, br.hi, cx.n));
    }
    if (const auto* nof2 = std::get_if<ConfNbhdOrbitFixator>(&F2.node())) {
      OrbitBracket br = orbit_bracket(nof2->t, *dp, cx.a, cx.ainv);
      if (!br.same) push(straddle_point(*dp, br.lo, br.hi, cx.n));
    }
    if (const auto* nl2 = std::get_if<ConfNonLamplike>(&F2.node()))
      push(nl_carried_mover(*dp, *nl2, cx));
    if (const auto* lp2 = std::get_if<ConfLamplikeProduct>(&F2.node())) {
      if (*dp > lp2->t) push(straddle_point(*dp, lp2->t, Rational(1, 1), cx.n));
      push(lp_low_bump(*lp2, *dp, cx));
    }
  }
  if (const auto* lp1 = std::get_if<ConfLamplikeProduct>(&F1.node())) {
    push(straddle_point(lp1->cuts.front(), lp1->x, lp1->t, cx.n));
    if (lp1->x > evaluate(cx.ainv, lp1->t))
      push(straddle_point(lp1->x, evaluate(cx.ainv, lp1->t), lp1->t, cx.n));
  }
  if (const auto* nl1 = std::get_if<ConfNonLamplike>(&F1.node())) {
    for (Index j = 1; j <= 4; ++j) {
      Rational lo = nl1->tau.tau(j + 2).value();
      Rational mid = nl1->tau.tau(j + 1).value();
      Rational hi = nl1->tau.tau(j).value();
      Rational top = nl1->tau.tau(j - 1).value();
      PLMap b = bump_in(nadic_in(lo, mid, cx.n), nadic_in(hi, top, cx.n));
      try {
        out.push_back(powered_past(b, mid, hi));
      } catch (const Error&) {
      }
    }
    if (auto pv = qs_product_violation(nl1->S, nl1->tau, 0, nl1->shift))
      out.push_back(compose(pv->first, pv->second));
  }
  // source samples, their pushed-up carries, and a few products
  try {
    auto pool = sample_members(F2, rng, std::min(cx.budget.samples, 48));
    PLMap aK = power(cx.a, cx.k_max);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      out.push_back(pool[i]);
      if (i < 12) out.push_back(conjugate(pool[i], aK));
      if (i + 1 < pool.size() && i < 8) out.push_back(compose(pool[i], pool[i + 1]));
    }
  } catch (const Error&) {
  }
  return out;
}

}  // namespace

Verdict compare(const ConfFamily& F1, const ConfFamily& F2, const Budget& budget) {
  if (F1.n() != F2.n()) fail(Error::Kind::BaseMismatch, "compare: base mismatch");
  if (same_description(F1, F2)) return Dominates{0};
  CompareCtx cx{F1.n(), base_map(F1.n()), invert(base_map(F1.n())), std::max(0L, budget.k_max),
                budget};
  if (auto ev = exact_compare(F1, F2, cx)) return *ev;

  std::mt19937_64 rng(budget.seed);
  for (const auto& v : refutation_candidates(F1, F2, cx, rng))
    if (verify_refutation(v, F1, F2, cx)) return RefutedT<PLMap>{v, cx.k_max};

  try {
    std::vector<PLMap> pool = sample_members(F2, rng, budget.samples);
    for (long k = 0; k <= cx.k_max; ++k) {
      bool all = true;
      for (const auto& m : pool)
        if (!member(m, F1)) {
          all = false;
          break;
        }
      if (all) return Dominates{k};
      for (auto& m : pool) m = conjugate(m, cx.a);
    }
  } catch (const Error&) {
  }
  return Inconclusive{budget.samples, cx.k_max,
                      "no exact rule applies; sampling found neither containment nor a "
                      "replayable violation"};
}

ConfFamily join(const ConfFamily& F1, const ConfFamily& F2) {
  if (F1.n() != F2.n()) fail(Error::Kind::BaseMismatch, "join: base mismatch");
  if (std::holds_alternative<ConfFull>(F1.node())) return F2;
  if (std::holds_alternative<ConfFull>(F2.node())) return F1;
  if (same_description(F1, F2)) return F1;
  return ConfFamily::intersection(F1, F2);
}

ConfFamily split_representative(const ConfFamily& F, const NAdic& t) {
  if (t.base() != F.n()) fail(Error::Kind::BaseMismatch, "split_representative: base mismatch");
  FixedPointReport rep = global_fixed_points(F, -64, {t.value()});
  if (!rep.covers(t.value()))
    fail(Error::Kind::Domain, "split_representative: point is not certified fixed");
  return ConfFamily::split_closure(F, t);
}

// ---------------------------------------------------------------------------
// global fixed points

bool FixedPointReport::covers(const Rational& x) const {
  for (const auto& p : points)
    if (p == x) return true;
  for (const auto& [lo, hi] : intervals)
    if (lo <= x && x <= hi) return true;
  return false;
}

namespace {

// Exact classification of a query point against a lamplike product: either
// every member fixes it, or there is a member bump moving it.
struct LpQuery {
  bool fixed = false;
  std::optional<PLMap> mover;
};

LpQuery lp_query_point(const ConfLamplikeProduct& lp, const Rational& q, int n, const PLMap& a,
                       const PLMap& ainv) {
  LpQuery out;
  if (q >= lp.t) {
    if (q == lp.t) {
      out.fixed = true;
      return out;
    }
    out.mover = straddle_point(q, lp.t, Rational(1, 1), n);
    return out;
  }
  Rational tk = lp.t, xk = lp.x;
  long k = 0;
  for (;;) {
    if (q == tk || q == xk) {
      out.fixed = true;
      return out;
    }
    if (q > xk) {
      // inside the window (x_k, t_k): find its cell
      Rational q0 = orbit_point(q, -k, a);
      Rational prev = lp.x;
      long cell = 0;
      long m = static_cast<long>(lp.cuts.size());
      for (long i = 1; i <= m && cell == 0; ++i) {
        const Rational& pi = lp.cuts[static_cast<std::size_t>(i - 1)];
        if (q0 == pi) {
          out.fixed = true;  // cut points are pinched between cells
          return out;
        }
        if (q0 < pi) cell = i;
        prev = pi;
      }
      if (cell == 0) {
        Rational d = lp.t - lp.cuts.back();
        Rational pj = lp.cuts.back();
        for (long j = 1; j <= kTailCap && cell == 0; ++j) {
          d = d / Rational(n, 1);
          Rational pnext = lp.t - d;
          if (q0 == pnext) {
            out.fixed = true;
            return out;
          }
          if (q0 < pnext) {
            cell = m + j;
            prev = pj;
          }
          pj = pnext;
        }
        if (cell == 0) fail(Error::Kind::Budget, "fixed point query: tail search exhausted");
      } else {
        prev = cell == 1 ? lp.x : lp.cuts[static_cast<std::size_t>(cell - 2)];
      }
      if (lp.xset.contains(cell) && cell > -k) {
        Rational lo = orbit_point(prev, k, a);
        Rational hi = orbit_point(lp_cut_point(lp, cell, n), k, a);
        out.mover = straddle_point(q, lo, hi, n);
      } else {
        out.fixed = true;  // cell is switched off at this depth
      }
      return out;
    }
    Rational tk1 = evaluate(ainv, tk);
    if (q > tk1) {
      out.mover = straddle_point(q, tk1, xk, n);  // gap interior
      return out;
    }
    if (q == tk1) {
      out.fixed = true;
      return out;
    }
    tk = tk1;
    xk = evaluate(ainv, xk);
    --k;
  }
}

void lp_report_levels(const ConfLamplikeProduct& lp, long k_min, int n, const PLMap& a,
                      FixedPointReport& rep) {
  long m = static_cast<long>(lp.cuts.size());
  for (long k = 0; k >= k_min; --k) {
    rep.points.push_back(orbit_point(lp.t, k, a));
    rep.points.push_back(orbit_point(lp.x, k, a));
    // cells switched off at this depth form fixed blocks; walk the explicit
    // cuts plus enough of the tail to cover the admissibility threshold
    long i_stop = m + std::max(0L, -k) + 2;
    if (!lp.xset.cofinite && !lp.xset.elems.empty())
      i_stop = std::max(i_stop, lp.xset.elems.back() + 1);
    std::optional<Rational> block_lo;
    for (long i = 1; i <= i_stop; ++i) {
      bool on = lp.xset.contains(i) && i > -k;
      Rational lo = lp_cut_point(lp, i - 1, n);
      Rational hi = lp_cut_point(lp, i, n);
      if (!on) {
        if (!block_lo) block_lo = lo;
      } else {
        if (block_lo) {
          rep.intervals.emplace_back(orbit_point(*block_lo, k, a), orbit_point(lo, k, a));
          block_lo.reset();
        } else if (i > 1) {
          rep.points.push_back(orbit_point(lo, k, a));  // isolated cut between live cells
        }
      }
      (void)hi;
    }
    bool tail_on = lp.xset.cofinite && i_stop >= -k;
    if (block_lo && !tail_on) {
      rep.intervals.emplace_back(orbit_point(*block_lo, k, a), orbit_point(lp.t, k, a));
    } else if (block_lo) {
      rep.intervals.emplace_back(orbit_point(*block_lo, k, a),
                                 orbit_point(lp_cut_point(lp, i_stop, n), k, a));
      rep.note = "tail cuts beyond the listed window omitted";
    } else if (tail_on) {
      rep.note = "tail cuts beyond the listed window omitted";
    }
  }
}

void add_mover(FixedPointReport& rep, const ConfFamily& F, const Rational& q, const PLMap& m) {
  if (member(m, F) && evaluate(m, q) != q)
    rep.movers.emplace_back(q, m);
  else
    rep.note += (rep.note.empty() ? "" : "; ") + ("mover construction failed at " + q.str());
}

}  // namespace

FixedPointReport global_fixed_points(const ConfFamily& F, long k_min,
                                     const std::vector<Rational>& queries) {
  if (k_min > 0) fail(Error::Kind::Domain, "global_fixed_points: window must end at 0");
  int n = F.n();
  PLMap a = base_map(n);
  PLMap ainv = invert(a);
  FixedPointReport rep;

  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfFull>) {
          rep.certified = true;
          rep.note = "no global fixed points in (0, 1)";
          for (const auto& q : queries)
            add_mover(rep, F, q, straddle_point(q, Rational(0, 1), Rational(1, 1), n));
        } else if constexpr (std::is_same_v<T, ConfRigidStab> ||
                             std::is_same_v<T, ConfOpenRigidStab>) {
          rep.certified = true;
          rep.intervals.emplace_back(Rational(0, 1), node.t);
          for (const auto& q : queries)
            if (q > node.t) add_mover(rep, F, q, straddle_point(q, node.t, Rational(1, 1), n));
        } else if constexpr (std::is_same_v<T, ConfOrbitFixator> ||
                             std::is_same_v<T, ConfNbhdOrbitFixator>) {
          rep.certified = true;
          Rational cur = node.t;
          for (long k = 0; k >= k_min; --k) {
            rep.points.push_back(cur);
            cur = evaluate(ainv, cur);
          }
          rep.note = "orbit continues below the listed window";
          for (const auto& q : queries) {
            OrbitBracket br = orbit_bracket(node.t, q, a, ainv);
            if (br.same && br.offset <= 0) {
              if (!rep.covers(q)) rep.points.push_back(q);
            } else if (br.same) {
              Rational lo = evaluate(ainv, q), hi = evaluate(a, q);
              add_mover(rep, F, q, straddle_point(q, lo, hi, n));
            } else {
              add_mover(rep, F, q, straddle_point(q, br.lo, br.hi, n));
            }
          }
        } else if constexpr (std::is_same_v<T, ConfLamplikeProduct>) {
          rep.certified = true;
          lp_report_levels(node, k_min, n, a, rep);
          for (const auto& q : queries) {
            LpQuery lq = lp_query_point(node, q, n, a, ainv);
            if (lq.fixed) {
              if (!rep.covers(q)) rep.points.push_back(q);
            } else {
              add_mover(rep, F, q, *lq.mover);
            }
          }
        } else if constexpr (std::is_same_v<T, ConfNonLamplike>) {
          rep.certified = true;
          rep.note = "no global fixed points in (0, 1)";
          for (const auto& q : queries) add_mover(rep, F, q, qs_mover(q, node.S, node.tau));
        } else if constexpr (std::is_same_v<T, ConfConjugate>) {
          std::vector<Rational> inner_q;
          inner_q.reserve(queries.size());
          for (const auto& q : queries) inner_q.push_back(orbit_point(q, -node.k, a));
          FixedPointReport ir = global_fixed_points(*node.inner, k_min, inner_q);
          rep.certified = ir.certified;
          rep.note = ir.note;
          for (const auto& p : ir.points) rep.points.push_back(orbit_point(p, node.k, a));
          for (const auto& [lo, hi] : ir.intervals)
            rep.intervals.emplace_back(orbit_point(lo, node.k, a), orbit_point(hi, node.k, a));
          PLMap ak = power(a, node.k);
          for (const auto& [q, m] : ir.movers)
            rep.movers.emplace_back(orbit_point(q, node.k, a), conjugate(m, ak));
        } else if constexpr (std::is_same_v<T, ConfIntersection>) {
          FixedPointReport rl = global_fixed_points(*node.lhs, k_min, {});
          FixedPointReport rr = global_fixed_points(*node.rhs, k_min, {});
          rep.points = rl.points;
          rep.points.insert(rep.points.end(), rr.points.begin(), rr.points.end());
          rep.intervals = rl.intervals;
          rep.intervals.insert(rep.intervals.end(), rr.intervals.begin(), rr.intervals.end());
          rep.certified = false;
          rep.note = "union of component fixed sets: a lower bound, not a decision";
          std::mt19937_64 rng(17);
          for (const auto& q : queries) {
            if (rep.covers(q)) continue;
            bool moved = false;
            try {
              for (const auto& m : sample_members(F, rng, 24))
                if (evaluate(m, q) != q) {
                  rep.movers.emplace_back(q, m);
                  moved = true;
                  break;
                }
            } catch (const Error&) {
            }
            if (!moved) rep.note += "; undecided at " + q.str();
          }
        } else if constexpr (std::is_same_v<T, ConfSplitClosure>) {
          Rational tv = node.t.value();
          FixedPointReport ir = global_fixed_points(*node.inner, k_min, {});
          rep.certified = ir.certified;
          rep.note = ir.note;
          rep.points.push_back(tv);
          for (const auto& p : ir.points)
            if (p < tv) rep.points.push_back(p);
          for (const auto& [lo, hi] : ir.intervals)
            if (lo < tv) rep.intervals.emplace_back(lo, std::min(hi, tv));
          for (const auto& q : queries) {
            if (q > tv) {
              add_mover(rep, F, q, straddle_point(q, tv, Rational(1, 1), n));
            } else if (q < tv && !rep.covers(q)) {
              FixedPointReport qr = global_fixed_points(*node.inner, k_min, {q});
              if (qr.covers(q)) {
                rep.points.push_back(q);
              } else if (!qr.movers.empty() && member(qr.movers.front().second, F)) {
                rep.movers.emplace_back(q, qr.movers.front().second);
              } else {
                rep.note += "; undecided at " + q.str();
              }
            }
          }
        }
      },
      F.node());
  return rep;
}

// ---------------------------------------------------------------------------
// largest element

namespace {

bool rigid_stab_contained(const ConfFamily& F, const Rational& u) {
  int n = F.n();
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConfFull>)
          return true;
        else if constexpr (std::is_same_v<T, ConfRigidStab>)
          return u >= node.t;
        else if constexpr (std::is_same_v<T, ConfOpenRigidStab>)
          return u > node.t || (u == node.t && !is_nadic(node.t, n));
        else if constexpr (std::is_same_v<T, ConfOrbitFixator>)
          return u >= node.t;
        else if constexpr (std::is_same_v<T, ConfNbhdOrbitFixator>)
          return u > node.t || (u == node.t && !is_nadic(node.t, n));
        else if constexpr (std::is_same_v<T, ConfLamplikeProduct>)
          return u > node.t || (u == node.t && !is_nadic(node.t, n));
        else if constexpr (std::is_same_v<T, ConfNonLamplike>)
          return u >= node.tau.tau(1).value();
        else if constexpr (std::is_same_v<T, ConfConjugate>)
          return rigid_stab_contained(*node.inner, orbit_point(u, -node.k, base_map(n)));
        else if constexpr (std::is_same_v<T, ConfIntersection>)
          return rigid_stab_contained(*node.lhs, u) && rigid_stab_contained(*node.rhs, u);
        else  // ConfSplitClosure
          return u >= node.t.value() || rigid_stab_contained(*node.inner, u);
      },
      F.node());
}

}  // namespace

long largest_element_witness(const ConfFamily& F, const Budget& budget) {
  int n = F.n();
  PLMap a = base_map(n);
  Rational u = above_scale(F);
  long k_max = std::max(0L, budget.k_max);
  std::mt19937_64 rng(budget.seed);
  for (long k = 0; k <= k_max; ++k) {
    if (rigid_stab_contained(F, u)) {
      int checks = std::max(4, std::min(budget.samples, 16));
      for (int i = 0; i < checks; ++i) {
        PLMap b = rand_bump_inside(u, Rational(1, 1), n, rng);
        if (!member(b, F))
          fail(Error::Kind::Unsupported,
               "largest_element_witness: containment rule contradicted by a sample");
      }
      return k;
    }
    u = evaluate(a, u);
  }
  fail(Error::Kind::Budget, "largest_element_witness: no exponent within budget");
}

// ---------------------------------------------------------------------------
// emptiness factorizations

PLMap compose_word(const std::vector<WordFactor>& word, int n) {
  PLMap out = PLMap::identity(n);
  for (const auto& f : word) out = compose(out, f.g);
  return out;
}

namespace {

void push_factor(std::vector<WordFactor>& word, PLMap g, std::string tag) {
  if (!g.is_identity()) word.push_back({std::move(g), std::move(tag)});
}

std::vector<WordFactor> finish_word(std::vector<WordFactor> word, const PLMap& f, int n) {
  if (compose_word(word, n) != f)
    fail(Error::Kind::Unsupported, "emptiness factorization: replay mismatch");
  return word;
}

std::string fix_tag(const Rational& l, const Rational& r) {
  return "fix(" + l.str() + "," + r.str() + ")";
}

std::string conj_tag(const std::string& base, int gen, long k) {
  if (k == 0) return base;
  return base + "^a_" + std::to_string(gen) + "^" + std::to_string(k);
}

std::vector<WordFactor> factor_two_nonzero(const PLMap& f, const TwoNonzeroScenario& sc, int n) {
  if (sc.i < 0 || sc.j >= n || sc.i >= sc.j)
    fail(Error::Kind::Domain, "two-value scenario needs generator indices i < j");
  GeneratorTuple tuple = standard_generators(n);
  Rational li = tuple.supports[static_cast<std::size_t>(sc.i)].first.value();
  Rational ri = tuple.supports[static_cast<std::size_t>(sc.i)].second.value();
  Rational lj = tuple.supports[static_cast<std::size_t>(sc.j)].first.value();
  Rational rj = tuple.supports[static_cast<std::size_t>(sc.j)].second.value();
  std::vector<WordFactor> word;
  auto runs = support(f);
  if (runs.empty()) return word;
  Rational eps = runs.front().first;
  if (eps > ri) {
    push_factor(word, f, fix_tag(li, ri));
    return finish_word(std::move(word), f, n);
  }
  PLMap fp = sc.mover ? *sc.mover : two_nonzero_mover(n, sc.i, sc.j, f);
  if (!fixes_interval(fp, lj, rj))
    fail(Error::Kind::Domain, "two-value scenario: the mover does not fix the upper support");
  if (!(evaluate(fp, eps) > ri))
    fail(Error::Kind::Domain, "two-value scenario: the mover does not clear the lower support");
  PLMap mid = conjugate(f, fp);
  push_factor(word, fp, fix_tag(lj, rj));
  push_factor(word, mid, fix_tag(li, ri));
  push_factor(word, invert(fp), fix_tag(lj, rj));
  return finish_word(std::move(word), f, n);
}

std::vector<WordFactor> factor_middle(const PLMap& f, const MiddleScenario& sc, int n) {
  if (n < 3 || sc.i < 1 || sc.i > n - 2)
    fail(Error::Kind::Domain, "interior scenario needs a generator strictly between the ends");
  GeneratorTuple tuple = standard_generators(n);
  const PLMap& ai = tuple.gens[static_cast<std::size_t>(sc.i)];
  Rational l = tuple.supports[static_cast<std::size_t>(sc.i)].first.value();
  Rational r = tuple.supports[static_cast<std::size_t>(sc.i)].second.value();
  Rational l_back = evaluate(invert(sc.q_ell), l);
  if (!(l_back > l))
    fail(Error::Kind::Domain, "interior scenario: q_ell opens no gap below the support");
  Rational r_back = evaluate(invert(sc.q_r), r);
  if (!(r_back < r))
    fail(Error::Kind::Domain, "interior scenario: q_r opens no gap above the support");
  Rational xl = nadic_in(l, std::min(r, l_back), n).value();
  Rational xr = nadic_in(std::max(l, r_back), r, n).value();

  std::vector<WordFactor> word;
  if (fixes_interval(f, l, r)) {
    push_factor(word, f, fix_tag(l, r));
    return finish_word(std::move(word), f, n);
  }
  auto runs = support(f);
  Rational delta = runs.back().second;

  auto contract_exponent = [&](const Rational& from) {
    Rational cur = from;
    PLMap aiinv = invert(ai);
    long k = 0;
    while (!(cur < xl)) {
      cur = evaluate(aiinv, cur);
      if (++k > kScanCap)
        fail(Error::Kind::Budget, "interior scenario: contraction exponent search exhausted");
    }
    return k;
  };

  if (delta < r) {
    long k = contract_exponent(delta);
    PLMap h = compose(power(ai, -k), sc.q_ell);
    PLMap mid = conjugate(f, h);
    if (!fixes_interval(mid, l, r))
      fail(Error::Kind::Unsupported, "interior scenario: conjugate missed the fixator");
    PLMap ak = power(ai, k);
    push_factor(word, conjugate(sc.q_ell, ak), conj_tag("q_ell", sc.i, k));
    push_factor(word, conjugate(mid, ak), conj_tag(fix_tag(l, r), sc.i, k));
    push_factor(word, conjugate(invert(sc.q_ell), ak), conj_tag("q_ell^-1", sc.i, k));
    return finish_word(std::move(word), f, n);
  }

  // support reaches past r: push it back with a fixator of (l, r) first
  PLMap fp = sc.pusher ? *sc.pusher : [&] {
    Rational target = evaluate(sc.q_r, xr);
    NAdic w2 = nadic_in(delta, Rational(1, 1), n);
    PLMap cur = invert(bump_in(tuple.supports[static_cast<std::size_t>(sc.i)].second, w2));
    for (int it = 0; it < 64 && !(evaluate(cur, delta) < target); ++it) cur = compose(cur, cur);
    if (!(evaluate(cur, delta) < target))
      fail(Error::Kind::Budget, "interior scenario: push-down search exhausted");
    return cur;
  }();
  if (!fixes_interval(fp, l, r))
    fail(Error::Kind::Domain, "interior scenario: the pusher does not fix the support");
  Rational d1 = evaluate(fp, delta);
  if (!(d1 < evaluate(sc.q_r, xr)))
    fail(Error::Kind::Domain, "interior scenario: the pusher leaves the support too high");
  Rational d2 = evaluate(invert(sc.q_r), d1);
  long k = d2 < xl ? 0 : contract_exponent(d2);
  PLMap h = compose(compose(compose(fp, invert(sc.q_r)), power(ai, -k)), sc.q_ell);
  PLMap mid = conjugate(f, h);
  if (!fixes_interval(mid, l, r))
    fail(Error::Kind::Unsupported, "interior scenario: conjugate missed the fixator");
  PLMap ak = power(ai, k);
  push_factor(word, fp, fix_tag(l, r));
  push_factor(word, invert(sc.q_r), "q_r^-1");
  push_factor(word, conjugate(sc.q_ell, ak), conj_tag("q_ell", sc.i, k));
  push_factor(word, conjugate(mid, ak), conj_tag(fix_tag(l, r), sc.i, k));
  push_factor(word, conjugate(invert(sc.q_ell), ak), conj_tag("q_ell^-1", sc.i, k));
  push_factor(word, sc.q_r, "q_r");
  push_factor(word, invert(fp), fix_tag(l, r));
  return finish_word(std::move(word), f, n);
}

std::vector<WordFactor> factor_negative_chi(const PLMap& f, const NegativeChiScenario& sc,
                                            int n) {
  PLMap a0 = base_map(n);
  Rational r0 = Rational(1, n);
  Rational back = evaluate(invert(sc.q), r0);
  if (!(back < r0))
    fail(Error::Kind::Domain, "boundary scenario: q does not push anything past r_0");
  std::vector<WordFactor> word;
  auto runs = support(f);
  if (runs.empty()) return word;
  Rational eps = runs.front().first;
  if (eps >= r0) {
    push_factor(word, f, fix_tag(Rational(0, 1), r0));
    return finish_word(std::move(word), f, n);
  }
  Rational x = nadic_in(back, r0, n).value();
  long k = 0;
  Rational cur = eps;
  while (!(cur > x)) {
    cur = evaluate(a0, cur);
    if (++k > kScanCap)
      fail(Error::Kind::Budget, "boundary scenario: climb exponent search exhausted");
  }
  PLMap h = compose(power(a0, k), sc.q);
  PLMap mid = conjugate(f, h);
  if (!fixes_interval(mid, Rational(0, 1), r0))
    fail(Error::Kind::Unsupported, "boundary scenario: conjugate missed the fixator");
  PLMap amk = power(a0, -k);
  push_factor(word, conjugate(sc.q, amk), conj_tag("q", 0, -k));
  push_factor(word, conjugate(mid, amk), conj_tag(fix_tag(Rational(0, 1), r0), 0, -k));
  push_factor(word, conjugate(invert(sc.q), amk), conj_tag("q^-1", 0, -k));
  return finish_word(std::move(word), f, n);
}

}  // namespace

std::vector<WordFactor> emptiness_factorization(const PLMap& f, const EmptinessScenario& scenario) {
  int n = f.base();
  check_element(f, n);
  return std::visit(
      [&](const auto& sc) -> std::vector<WordFactor> {
        using T = std::decay_t<decltype(sc)>;
        if constexpr (std::is_same_v<T, TwoNonzeroScenario>)
          return factor_two_nonzero(f, sc, n);
        else if constexpr (std::is_same_v<T, MiddleScenario>)
          return factor_middle(f, sc, n);
        else
          return factor_negative_chi(f, sc, n);
      },
      scenario);
}

PLMap two_nonzero_mover(int n, int i, int j, const PLMap& f) {
  if (i < 0 || j >= n || i >= j) fail(Error::Kind::Domain, "mover needs indices i < j");
  GeneratorTuple tuple = standard_generators(n);
  Rational ri = tuple.supports[static_cast<std::size_t>(i)].second.value();
  Rational lj = tuple.supports[static_cast<std::size_t>(j)].first.value();
  auto runs = support(f);
  if (runs.empty()) return PLMap::identity(n);
  Rational eps = runs.front().first;
  if (eps > ri) return PLMap::identity(n);
  NAdic u = nadic_in(Rational(0, 1), eps, n);
  NAdic w = nadic_in(ri, lj, n);
  return powered_past(bump_in(u, w), eps, ri);
}

std::pair<PLMap, PLMap> middle_movers(int n, int i) {
  if (n < 3 || i < 1 || i > n - 2)
    fail(Error::Kind::Domain, "interior movers need a generator strictly between the ends");
  GeneratorTuple tuple = standard_generators(n);
  Rational l = tuple.supports[static_cast<std::size_t>(i)].first.value();
  Rational r = tuple.supports[static_cast<std::size_t>(i)].second.value();
  Rational below = tuple.supports[static_cast<std::size_t>(i - 1)].second.value();
  Rational above = tuple.supports[static_cast<std::size_t>(i + 1)].first.value();
  PLMap q_ell = invert(bump_in(nadic_in(below, l, n), nadic_in(l, r, n)));
  PLMap q_r = bump_in(nadic_in(l, r, n), nadic_in(r, above, n));
  return {q_ell, q_r};
}

PLMap negative_chi_mover(int n) {
  NAdic u(n, 1, 2);  // 1/n^2
  NAdic v(n, 2, 1);  // 2/n
  return bump_in(u, v);
}

// ---------------------------------------------------------------------------
// prime powers

std::vector<unsigned long long> prime_power_embedding(const std::vector<int>& X,
                                                      unsigned long long n_max) {
  if (X.empty() || n_max < 2) return {};
  int max_index = *std::max_element(X.begin(), X.end());
  if (*std::min_element(X.begin(), X.end()) < 1)
    fail(Error::Kind::Domain, "prime indices start at 1");
  std::vector<unsigned long long> primes;
  for (unsigned long long c = 2; static_cast<int>(primes.size()) < max_index; ++c) {
    bool prime = true;
    for (unsigned long long p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
    if (c > 2 && primes.size() < static_cast<std::size_t>(max_index) && c > 64 + 32ull * max_index)
      break;  // p_i <= ~i(ln i + ln ln i) for i >= 6; generous bound
  }
  if (static_cast<int>(primes.size()) < max_index)
    fail(Error::Kind::Budget, "prime sieve bound too small");
  std::vector<unsigned long long> out;
  for (int i : X) {
    unsigned long long p = primes[static_cast<std::size_t>(i - 1)];
    if (p > n_max) continue;
    unsigned long long cur = p;
    for (;;) {
      out.push_back(cur);
      if (cur > n_max / p) break;
      cur *= p;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace fng
