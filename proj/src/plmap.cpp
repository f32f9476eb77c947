#include "fng/plmap.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>

namespace fng {

namespace {

// v = n^k for some k >= 0?
std::optional<long> power_log(const Int& v, int n) {
  Int x = v;
  long k = 0;
  while (x > 1) {
    if (x % n != 0) return std::nullopt;
    x /= n;
    ++k;
  }
  return x == 1 ? std::optional<long>(k) : std::nullopt;
}

// s = sign * n^k?  (s a nonzero reduced rational)
std::optional<std::pair<long, int>> slope_log(const Rational& s, int n) {
  int sign = s.sign();
  Int num = sign < 0 ? Int(-s.num()) : s.num();
  if (num == 1) {
    auto k = power_log(s.den(), n);
    if (!k) return std::nullopt;
    return std::make_pair(-*k, sign);
  }
  if (s.den() == 1) {
    auto k = power_log(num, n);
    if (!k) return std::nullopt;
    return std::make_pair(*k, sign);
  }
  return std::nullopt;
}

long digit_sum(Int v, int n) {
  long s = 0;
  while (v > 0) {
    Int r = v % n;
    s += r.convert_to<long>();
    v /= n;
  }
  return s;
}

// Width exponents (width = n^w units) decomposing value into exactly target
// parts, widest first: base-n digits give the minimal decomposition (count =
// digit sum), then widest-part splits add n-1 parts each.
std::vector<long> digit_parts(const Int& value, int n, long target) {
  std::map<long, long, std::greater<long>> count;  // width exponent -> multiplicity
  long have = 0;
  Int m = value;
  for (long e = 0; m > 0; ++e, m /= n) {
    Int r = m % n;
    long dig = r.convert_to<long>();
    if (dig) {
      count[e] += dig;
      have += dig;
    }
  }
  while (have < target) {
    auto it = count.begin();
    long w = it->first;
    if (--it->second == 0) count.erase(it);
    count[w - 1] += n;
    have += n - 1;
  }
  std::vector<long> out;
  out.reserve(have);
  for (auto& [w, c] : count)
    for (long i = 0; i < c; ++i) out.push_back(w);
  return out;
}

}  // namespace

Rational Piece::slope_rat() const {
  int n = x0.base();
  Rational mag = k >= 0 ? Rational(pow_int(n, k)) : Rational(1, pow_int(n, -k));
  return sign < 0 ? -mag : mag;
}

PLMap::PLMap(int n, std::vector<std::pair<NAdic, NAdic>> breakpoints, int orientation)
    : n_(n), orient_(orientation), bp_(std::move(breakpoints)) {
  validate_and_canonicalize();
}

void PLMap::validate_and_canonicalize() {
  if (n_ < 2) fail(Error::Kind::Domain, "map base must be >= 2");
  if (orient_ != 1 && orient_ != -1) fail(Error::Kind::Domain, "orientation must be +1 or -1");
  if (bp_.size() < 2) fail(Error::Kind::Domain, "a map needs at least two breakpoints");
  for (auto& [x, y] : bp_)
    if (x.base() != n_ || y.base() != n_)
      fail(Error::Kind::BaseMismatch, "breakpoint base differs from map base");

  const NAdic zero = NAdic::zero(n_), one = NAdic::one(n_);
  if (bp_.front().first != zero || bp_.back().first != one)
    fail(Error::Kind::Domain, "domain must span [0,1]");
  const NAdic& y0 = bp_.front().second;
  const NAdic& y1 = bp_.back().second;
  if (orient_ == 1 ? (y0 != zero || y1 != one) : (y0 != one || y1 != zero))
    fail(Error::Kind::Domain, "range endpoints do not match orientation");

  std::vector<Rational> slopes(bp_.size() - 1);
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    if (!(bp_[i].first < bp_[i + 1].first))
      fail(Error::Kind::Domain, "breakpoint x-coordinates must strictly increase (segment " +
                                    std::to_string(i) + ")");
    Rational dy = bp_[i + 1].second.value() - bp_[i].second.value();
    if (dy.sign() != orient_)
      fail(Error::Kind::Domain,
           "y-coordinates not strictly monotone (segment " + std::to_string(i) + ")");
    slopes[i] = dy / (bp_[i + 1].first.value() - bp_[i].first.value());
    if (!slope_log(slopes[i], n_))
      fail(Error::Kind::Domain, "segment " + std::to_string(i) + " slope " + slopes[i].str() +
                                    " is not a signed power of " + std::to_string(n_));
  }

  std::vector<std::pair<NAdic, NAdic>> merged;
  merged.reserve(bp_.size());
  merged.push_back(bp_.front());
  for (std::size_t i = 1; i + 1 < bp_.size(); ++i)
    if (slopes[i - 1] != slopes[i]) merged.push_back(bp_[i]);
  merged.push_back(bp_.back());
  bp_ = std::move(merged);

  pieces_.clear();
  pieces_.reserve(bp_.size() - 1);
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    Rational s = (bp_[i + 1].second.value() - bp_[i].second.value()) /
                 (bp_[i + 1].first.value() - bp_[i].first.value());
    auto [k, sign] = *slope_log(s, n_);
    NAdic sx = bp_[i].first.mul_pow(k);
    NAdic offset = sign < 0 ? bp_[i].second + sx : bp_[i].second - sx;
    pieces_.push_back(Piece{bp_[i].first, bp_[i + 1].first, k, sign, offset});
  }
}

PLMap PLMap::identity(int n) {
  return PLMap(n, {{NAdic::zero(n), NAdic::zero(n)}, {NAdic::one(n), NAdic::one(n)}});
}

bool PLMap::is_identity() const {
  return orient_ == 1 && bp_.size() == 2;
}

bool PLMap::operator==(const PLMap& o) const {
  return n_ == o.n_ && orient_ == o.orient_ && bp_ == o.bp_;
}

PLMap canonical_form(const PLMap& g) { return g; }  // constructor canonicalizes

namespace {

const Piece& piece_at(const PLMap& g, const Rational& x) {
  const auto& ps = g.pieces();
  std::size_t lo = 0, hi = ps.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (ps[mid].x0.value() <= x)
      lo = mid;
    else
      hi = mid - 1;
  }
  return ps[lo];
}

const Piece& piece_at(const PLMap& g, const NAdic& x) {
  const auto& ps = g.pieces();
  std::size_t lo = 0, hi = ps.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (ps[mid].x0 <= x)
      lo = mid;
    else
      hi = mid - 1;
  }
  return ps[lo];
}

}  // namespace

Rational evaluate(const PLMap& g, const Rational& x) {
  if (x < Rational(0) || x > Rational(1))
    fail(Error::Kind::Domain, "evaluate: point outside [0,1]");
  const Piece& p = piece_at(g, x);
  return p.slope_rat() * x + p.offset_rat();
}

NAdic evaluate_nadic(const PLMap& g, const NAdic& x) {
  if (x.base() != g.base()) fail(Error::Kind::BaseMismatch, "evaluate: base mismatch");
  if (x.sign() < 0 || NAdic::one(g.base()) < x)
    fail(Error::Kind::Domain, "evaluate: point outside [0,1]");
  const Piece& p = piece_at(g, x);
  NAdic sx = x.mul_pow(p.k);
  return p.sign < 0 ? p.offset - sx : p.offset + sx;
}

PLMap compose(const PLMap& g, const PLMap& h) {
  if (g.base() != h.base()) fail(Error::Kind::BaseMismatch, "compose: base mismatch");
  PLMap gi = invert(g);
  std::vector<NAdic> xs;
  xs.reserve(g.breakpoints().size() + h.breakpoints().size());
  for (auto& [x, y] : g.breakpoints()) xs.push_back(x);
  for (auto& [x, y] : h.breakpoints()) xs.push_back(evaluate_nadic(gi, x));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<std::pair<NAdic, NAdic>> bp;
  bp.reserve(xs.size());
  for (auto& x : xs) bp.emplace_back(x, evaluate_nadic(h, evaluate_nadic(g, x)));
  return PLMap(g.base(), std::move(bp), g.orientation() * h.orientation());
}

PLMap invert(const PLMap& g) {
  std::vector<std::pair<NAdic, NAdic>> bp;
  bp.reserve(g.breakpoints().size());
  for (auto& [x, y] : g.breakpoints()) bp.emplace_back(y, x);
  if (g.orientation() == -1) std::reverse(bp.begin(), bp.end());
  return PLMap(g.base(), std::move(bp), g.orientation());
}

PLMap conjugate(const PLMap& g, const PLMap& h) { return compose(compose(invert(h), g), h); }

PLMap power(const PLMap& g, long k) {
  PLMap base = k < 0 ? invert(g) : g;
  PLMap acc = PLMap::identity(g.base());
  for (long i = 0; i < (k < 0 ? -k : k); ++i) acc = compose(acc, base);
  return acc;
}

long chi0(const PLMap& g) {
  if (g.orientation() != 1)
    fail(Error::Kind::Unsupported, "boundary characters undefined for orientation-reversing maps");
  return g.pieces().front().k;
}

long chi1(const PLMap& g) {
  if (g.orientation() != 1)
    fail(Error::Kind::Unsupported, "boundary characters undefined for orientation-reversing maps");
  return g.pieces().back().k;
}

bool FixedSet::contains(const Rational& x) const {
  for (auto& p : points)
    if (p == x) return true;
  for (auto& [l, r] : intervals)
    if (l <= x && x <= r) return true;
  return false;
}

FixedSet fixed_set(const PLMap& g) {
  FixedSet fs;
  std::vector<Rational> candidates;
  for (const Piece& p : g.pieces()) {
    Rational s = p.slope_rat(), c = p.offset_rat();
    if (s == Rational(1) && c == Rational(0)) {
      Rational l = p.x0.value(), r = p.x1.value();
      if (!fs.intervals.empty() && fs.intervals.back().second == l)
        fs.intervals.back().second = r;
      else
        fs.intervals.emplace_back(l, r);
    } else if (s != Rational(1)) {
      Rational x = -c / (s - Rational(1));
      if (p.x0.value() <= x && x <= p.x1.value()) candidates.push_back(x);
    }
  }
  for (auto& x : candidates) {
    bool absorbed = false;
    for (auto& [l, r] : fs.intervals)
      if (l <= x && x <= r) {
        absorbed = true;
        break;
      }
    if (!absorbed && (fs.points.empty() || fs.points.back() != x)) fs.points.push_back(x);
  }
  return fs;
}

std::vector<std::pair<Rational, Rational>> support(const PLMap& g) {
  FixedSet fs = fixed_set(g);
  // Components in order (candidate points and interval starts are produced sorted).
  std::vector<std::pair<Rational, Rational>> comps;
  for (auto& p : fs.points) comps.emplace_back(p, p);
  for (auto& iv : fs.intervals) comps.push_back(iv);
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Rational, Rational>> out;
  Rational pos(0);
  for (auto& [l, r] : comps) {
    if (pos < l) out.emplace_back(pos, l);
    pos = r;
  }
  if (pos < Rational(1)) out.emplace_back(pos, Rational(1));
  return out;
}

bool fixes_interval(const PLMap& g, const Rational& lo, const Rational& hi) {
  if (lo > hi || lo < Rational(0) || hi > Rational(1))
    fail(Error::Kind::Domain, "fixes_interval: bad interval");
  if (lo == hi) return evaluate(g, lo) == lo;
  for (const Piece& p : g.pieces()) {
    if (p.x1.value() <= lo) continue;
    if (hi <= p.x0.value()) break;
    if (p.k != 0 || p.sign != 1 || p.offset.sign() != 0) return false;
  }
  return true;
}

bool is_one_bump(const PLMap& g) { return support(g).size() == 1; }

bool is_compactly_supported(const PLMap& g) {
  if (g.orientation() != 1) return false;
  const Piece& a = g.pieces().front();
  const Piece& b = g.pieces().back();
  return a.k == 0 && a.offset.sign() == 0 && b.k == 0 && b.offset.sign() == 0;
}

PLMap make_bump(int n) {
  NAdic z = NAdic::zero(n), o = NAdic::one(n);
  return PLMap(n, {{z, z},
                   {NAdic(n, 1, 2), NAdic(n, 1, 1)},
                   {NAdic(n, n - 1, 1), NAdic(n, Int(n) * n - 1, 2)},
                   {o, o}});
}

PLMap transplant(const PLMap& g, const NAdic& l, const NAdic& r) {
  int n = g.base();
  if (g.orientation() != 1) fail(Error::Kind::Domain, "transplant: orientation must be +1");
  if (l.base() != n || r.base() != n) fail(Error::Kind::BaseMismatch, "transplant: base mismatch");
  if (l.sign() < 0 || NAdic::one(n) < r || !(l < r))
    fail(Error::Kind::Domain, "transplant: window must satisfy 0 <= l < r <= 1");
  NAdic w = r - l;
  if (w.mantissa() != 1)
    fail(Error::Kind::Domain, "transplant: window length " + w.str() + " is not a power of " +
                                  std::to_string(n));
  long j = -w.exponent();
  std::vector<std::pair<NAdic, NAdic>> bp;
  if (l.sign() > 0) bp.emplace_back(NAdic::zero(n), NAdic::zero(n));
  for (auto& [x, y] : g.breakpoints()) bp.emplace_back(l + x.mul_pow(j), l + y.mul_pow(j));
  if (r < NAdic::one(n)) bp.emplace_back(NAdic::one(n), NAdic::one(n));
  return PLMap(n, std::move(bp));
}

GeneratorTuple standard_generators(int n) {
  if (n < 2) fail(Error::Kind::Domain, "standard_generators: base must be >= 2");
  PLMap bump = make_bump(n);
  GeneratorTuple t;
  t.n = n;
  NAdic one = NAdic::one(n);
  t.supports.emplace_back(NAdic::zero(n), NAdic(n, 1, 1));
  t.gens.push_back(transplant(bump, t.supports[0].first, t.supports[0].second));
  for (int i = 1; i <= n - 2; ++i) {
    // Middle bumps sit strictly between their neighbours' supports; the
    // factorization arguments need room on both sides of each I_i.
    NAdic l(n, static_cast<long>(n + i - 1) * n + 1, 3);
    NAdic r(n, static_cast<long>(n + i - 1) * n + 2, 3);
    t.supports.emplace_back(l, r);
    t.gens.push_back(transplant(bump, l, r));
  }
  NAdic last_l = one - NAdic(n, 1, 2);
  t.supports.emplace_back(last_l, one);
  t.gens.push_back(transplant(invert(bump), last_l, one));
  return t;
}

void check_generator_tuple(const GeneratorTuple& t) {
  int n = t.n;
  if (n < 2 || t.gens.size() != static_cast<std::size_t>(n) || t.supports.size() != t.gens.size())
    fail(Error::Kind::Domain, "generator tuple: wrong arity");
  for (int i = 0; i < n; ++i) {
    const PLMap& a = t.gens[i];
    if (!is_one_bump(a)) fail(Error::Kind::Domain, "generator " + std::to_string(i) + " is not one-bump");
    auto sup = support(a);
    if (sup[0].first != t.supports[i].first.value() ||
        sup[0].second != t.supports[i].second.value())
      fail(Error::Kind::Domain, "generator " + std::to_string(i) + " support mismatch");
    if (i > 0 && t.supports[i - 1].second > t.supports[i].first)
      fail(Error::Kind::Domain, "generator supports out of order at " + std::to_string(i));
  }
  if (t.supports.front().first.sign() != 0 || t.supports.back().second != NAdic::one(n))
    fail(Error::Kind::Domain, "generator supports must reach 0 and 1");
  if (chi0(t.gens.front()) != 1) fail(Error::Kind::Domain, "first generator must have slope n at 0");
  if (chi1(t.gens.back()) != 1) fail(Error::Kind::Domain, "last generator must have slope n at 1");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (compose(t.gens[i], t.gens[j]) != compose(t.gens[j], t.gens[i]))
        fail(Error::Kind::Domain, "generators do not commute");
}

Rational orbit_point(const Rational& t, long k, const PLMap& a) {
  if (t <= Rational(0) || t >= Rational(1))
    fail(Error::Kind::Domain, "orbit_point: point must lie in (0,1)");
  PLMap step = k < 0 ? invert(a) : a;
  Rational x = t;
  for (long i = 0; i < (k < 0 ? -k : k); ++i) x = evaluate(step, x);
  return x;
}

NAdic orbit_point_nadic(const NAdic& t, long k, const PLMap& a) {
  PLMap step = k < 0 ? invert(a) : a;
  NAdic x = t;
  for (long i = 0; i < (k < 0 ? -k : k); ++i) x = evaluate_nadic(step, x);
  return x;
}

FixClass fix_classification(const Rational& t, int n) {
  if (t <= Rational(0) || t >= Rational(1))
    fail(Error::Kind::Domain, "fix_classification: point must lie in (0,1)");
  if (auto v = is_nadic(t, n)) return FixNAry{*v};
  auto [qp, l] = coprime_part(t.den(), n);
  (void)l;
  return FixRationalNonNAry{mult_order(n, qp)};
}

std::vector<std::pair<NAdic, NAdic>> interval_transfer(const NAdic& a1, const NAdic& b1,
                                                       const NAdic& a2, const NAdic& b2) {
  int n = a1.base();
  if (b1.base() != n || a2.base() != n || b2.base() != n)
    fail(Error::Kind::BaseMismatch, "interval_transfer: base mismatch");
  if (!(a1 < b1) || !(a2 < b2)) fail(Error::Kind::Domain, "interval_transfer: empty interval");
  NAdic L1 = b1 - a1, L2 = b2 - a2;
  Rational ratio = L2.value() / L1.value();
  if (slope_log(ratio, n)) return {{a1, a2}, {b1, b2}};

  long E = std::max(L1.exponent(), L2.exponent());
  Int P = L1.mantissa() * pow_int(n, E - L1.exponent());
  Int Q = L2.mantissa() * pow_int(n, E - L2.exponent());
  if ((P - Q) % (n - 1) != 0)
    fail(Error::Kind::Unsupported, "certified failure: no slope-" + std::to_string(n) +
                                       " interpolation between lengths " + L1.str() + " and " +
                                       L2.str() + " (classes differ mod " + std::to_string(n - 1) +
                                       ")");
  long pieces = std::max(digit_sum(P, n), digit_sum(Q, n));
  if (pieces > 65536) fail(Error::Kind::Budget, "interval transfer piece budget exhausted");
  std::vector<long> src = digit_parts(P, n, pieces), dst = digit_parts(Q, n, pieces);
  // pair widest with widest, then lay the pieces out by ascending slope so
  // the result is convex (bump construction relies on this)
  std::vector<std::size_t> order(src.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return dst[i] - src[i] < dst[j] - src[j]; });
  long d1 = 0, d2 = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    d1 = std::max(d1, -src[i]);
    d2 = std::max(d2, -dst[i]);
  }
  std::vector<std::pair<NAdic, NAdic>> bp;
  bp.reserve(pieces + 1);
  bp.emplace_back(a1, a2);
  Int accx = 0, accy = 0;
  for (std::size_t i : order) {
    accx += pow_int(n, src[i] + d1);
    accy += pow_int(n, dst[i] + d2);
    bp.emplace_back(a1 + NAdic(n, accx, E + d1), a2 + NAdic(n, accy, E + d2));
  }
  return bp;
}

PLMap bump_in(const NAdic& l, const NAdic& r) {
  int n = l.base();
  if (l.sign() < 0 || NAdic::one(n) < r || !(l < r))
    fail(Error::Kind::Domain, "bump_in: window must satisfy 0 <= l < r <= 1");
  NAdic w = r - l;
  NAdic m1 = l + w.mul_pow(-1);   // l + w/n
  NAdic m2 = l + w.mul_pow(-2);   // l + w/n^2
  // h <= id with support (l, r): affine slope-1/n head, then an expanding
  // ascending-slope tail [m1, r] -> [m2, r] (stays below the diagonal).
  std::vector<std::pair<NAdic, NAdic>> bp;
  NAdic zero = NAdic::zero(n), one = NAdic::one(n);
  if (l.sign() > 0) bp.emplace_back(zero, zero);
  bp.emplace_back(l, l);
  auto tail = interval_transfer(m1, r, m2, r);
  for (auto& p : tail) bp.push_back(p);
  if (r < one) bp.emplace_back(one, one);
  return invert(PLMap(n, std::move(bp)));
}

PLMap truncate_identity_above(const PLMap& g, const NAdic& t) {
  int n = g.base();
  NAdic one = NAdic::one(n);
  if (t == one) return g;
  if (t.sign() <= 0 || one < t) fail(Error::Kind::Domain, "truncate: point must lie in (0,1]");
  if (evaluate_nadic(g, t) != t)
    fail(Error::Kind::Domain, "truncate: map does not fix the cut point");
  std::vector<std::pair<NAdic, NAdic>> bp;
  for (auto& p : g.breakpoints()) {
    if (!(p.first < t)) break;
    bp.push_back(p);
  }
  bp.emplace_back(t, t);
  bp.emplace_back(one, one);
  return PLMap(n, std::move(bp));
}

PLMap alpha(int n) {
  return PLMap(n, {{NAdic::zero(n), NAdic::one(n)}, {NAdic::one(n), NAdic::zero(n)}}, -1);
}

PLMap alpha_conjugate(const PLMap& g) {
  PLMap al = alpha(g.base());
  return compose(compose(al, g), al);
}

int epsilon(const PLMap& g) { return g.orientation(); }

PLMap rational_slope_fix_element(const Rational& t, const NAdic& u, const NAdic& v) {
  int n = u.base();
  if (v.base() != n) fail(Error::Kind::BaseMismatch, "base mismatch");
  if (u.sign() < 0 || NAdic::one(n) < v || !(u < v))
    fail(Error::Kind::Domain, "window must satisfy 0 <= u < v <= 1");
  if (!(u.value() < t) || !(t < v.value()))
    fail(Error::Kind::Domain, "point must lie inside the window");
  FixClass cls = fix_classification(t, n);
  if (std::holds_alternative<FixNAry>(cls))
    fail(Error::Kind::Domain, "point is n-ary; the slope group at it is not cyclic");
  long o = std::get<FixRationalNonNAry>(cls).order;

  Rational slope(pow_int(n, o));
  Rational y0r = (slope - Rational(1)) * t;
  NAdic y0 = *is_nadic(y0r, n);  // q' | n^o - 1 makes this exact
  if (n > 2) {
    Int res = y0.mantissa() % (n - 1);
    if (res < 0) res += n - 1;
    if (res != 0)
      fail(Error::Kind::Unsupported,
           "certified failure: middle slope " + slope.str() + " at " + t.str() +
               " forces connector length class " + res.str() + " != 0 (mod " +
               std::to_string(n - 1) + "); no such element exists");
  }

  // Middle piece y = n^o x - y0 on an n-adic subwindow [s1, s2] around t,
  // chosen so the image also stays inside (u, v).
  Rational lo1 = (u.value() + y0r) / slope;
  if (u.value() > lo1) lo1 = u.value();
  NAdic s1 = nadic_between(lo1, t, n);
  Rational hi2 = (v.value() + y0r) / slope;
  if (v.value() < hi2) hi2 = v.value();
  NAdic s2 = nadic_between(t, hi2, n);
  NAdic S1 = s1.mul_pow(o) - y0;
  NAdic S2 = s2.mul_pow(o) - y0;

  std::vector<std::pair<NAdic, NAdic>> bp;
  NAdic zero = NAdic::zero(n), one = NAdic::one(n);
  if (u.sign() > 0) bp.emplace_back(zero, zero);
  for (auto& p : interval_transfer(u, s1, u, S1)) bp.push_back(p);
  bp.emplace_back(s2, S2);
  for (auto& p : interval_transfer(s2, v, S2, v)) bp.push_back(p);
  if (v < one) bp.emplace_back(one, one);
  std::sort(bp.begin(), bp.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](const auto& a, const auto& b) { return a.first == b.first; }),
           bp.end());
  return PLMap(n, std::move(bp));
}

PLMap random_commutator(int n, std::uint64_t seed, int complexity) {
  if (complexity < 0) fail(Error::Kind::Domain, "random_commutator: negative complexity");
  if (complexity == 0) return PLMap::identity(n);
  std::vector<PLMap> pool = standard_generators(n).gens;
  PLMap bump = make_bump(n);
  pool.push_back(transplant(bump, NAdic(n, 1, 2), NAdic(n, 2, 2)));
  pool.push_back(transplant(bump, NAdic(n, 1, 1), NAdic(n, n + 1, 2)));
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(n));
  auto word = [&]() {
    PLMap w = PLMap::identity(n);
    for (int i = 0; i < complexity; ++i) {
      std::size_t pick = rng() % (2 * pool.size());
      const PLMap& gen = pool[pick / 2];
      w = compose(w, pick % 2 ? invert(gen) : gen);
    }
    return w;
  };
  PLMap g = word(), h = word();
  return compose(compose(invert(g), invert(h)), compose(g, h));
}

}  // namespace fng
