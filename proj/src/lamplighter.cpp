// Wreath products over a shift: lamp arithmetic for pluggable lamp groups,
// the right-heavy family catalog with its sigma-comparison engine, and the
// slope bridge out of the PL world.  Same verdict discipline as the confining
// module: exact rules first, verified refutation candidates next, sampled
// scans after that, and an honest Inconclusive when nothing bites.
#include "fng/lamplighter.hpp"

#include "fng/confining.hpp"

#include <algorithm>
#include <sstream>

namespace fng {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// lamp payload helpers

const Int& as_int(const LampValue& v) {
  if (const auto* p = std::get_if<Int>(&v)) return *p;
  fail(Error::Kind::Domain, "lamp value is not an integer payload");
}

const AbelVec& as_vec(const LampValue& v) {
  if (const auto* p = std::get_if<AbelVec>(&v)) return *p;
  fail(Error::Kind::Domain, "lamp value is not an exponent-vector payload");
}

const PLMap& as_pl(const LampValue& v) {
  if (const auto* p = std::get_if<PLMap>(&v)) return *p;
  fail(Error::Kind::Domain, "lamp value is not a PL payload");
}

AbelVec vec_prune(AbelVec m) {
  for (auto it = m.begin(); it != m.end();) {
    if (it->second == 0)
      it = m.erase(it);
    else
      ++it;
  }
  return m;
}

AbelVec vec_add(const AbelVec& x, const AbelVec& y) {
  AbelVec out = x;
  for (const auto& [i, c] : y) out[i] += c;
  return vec_prune(std::move(out));
}

AbelVec vec_neg(const AbelVec& x) {
  AbelVec out;
  for (const auto& [i, c] : x) out[i] = -c;
  return out;
}

// forget the lowest d coordinates and slide the rest down
AbelVec vec_drop(const AbelVec& x, int d) {
  AbelVec out;
  for (const auto& [i, c] : x)
    if (i > d) out[i - d] = c;
  return out;
}

// ---------------------------------------------------------------------------
// lamp groups

class IntLampGroup final : public LampGroup {
 public:
  std::string name() const override { return "int"; }
  LampValue identity() const override { return Int(0); }
  bool is_identity(const LampValue& v) const override { return as_int(v) == 0; }
  LampValue multiply(const LampValue& x, const LampValue& y) const override {
    return as_int(x) + as_int(y);
  }
  LampValue invert(const LampValue& x) const override { return Int(-as_int(x)); }
  bool equal(const LampValue& x, const LampValue& y) const override {
    return as_int(x) == as_int(y);
  }
  std::optional<Int> word_length(const LampValue& x) const override {
    return abs(as_int(x));
  }
  LampValue sample(std::mt19937_64& rng) const override {
    return Int(static_cast<long>(rng() % 17) - 8);
  }
  void validate(const LampValue& v) const override { (void)as_int(v); }
};

class AbelLampGroup final : public LampGroup {
 public:
  std::string name() const override { return "abel"; }
  LampValue identity() const override { return AbelVec{}; }
  bool is_identity(const LampValue& v) const override { return as_vec(v).empty(); }
  LampValue multiply(const LampValue& x, const LampValue& y) const override {
    return vec_add(as_vec(x), as_vec(y));
  }
  LampValue invert(const LampValue& x) const override { return vec_neg(as_vec(x)); }
  bool equal(const LampValue& x, const LampValue& y) const override {
    return as_vec(x) == as_vec(y);
  }
  std::optional<Int> word_length(const LampValue& x) const override {
    Int total = 0;
    for (const auto& [i, c] : as_vec(x)) total += abs(c);
    return total;
  }
  LampValue sample(std::mt19937_64& rng) const override {
    AbelVec v;
    int entries = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < entries; ++i) {
      int key = 1 + static_cast<int>(rng() % 4);
      long e = static_cast<long>(rng() % 7) - 3;
      if (e != 0) v[key] += e;
    }
    return vec_prune(std::move(v));
  }
  void validate(const LampValue& v) const override {
    for (const auto& [i, c] : as_vec(v)) {
      if (i < 1) fail(Error::Kind::Domain, "exponent vector uses coordinates >= 1");
      if (c == 0) fail(Error::Kind::Domain, "exponent vector stores a zero entry");
    }
  }
};

// midpoint refinement with random cuts, as in the confining samplers
NAdic rand_nadic_strictly_between(const NAdic& lo, const NAdic& hi, int n,
                                  std::mt19937_64& rng) {
  NAdic a = lo, b = hi;
  int cuts = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < cuts; ++i) {
    NAdic mid = nadic_between(a.value(), b.value(), n);
    if (rng() & 1)
      b = mid;
    else
      a = mid;
  }
  return nadic_between(a.value(), b.value(), n);
}

class FnWindowLampGroup final : public LampGroup {
 public:
  FnWindowLampGroup(int n, NAdic lo, NAdic hi) : n_(n), lo_(lo), hi_(hi) {
    if (n < 2) fail(Error::Kind::Domain, "window lamp group: base must be at least 2");
    if (lo.base() != n || hi.base() != n)
      fail(Error::Kind::BaseMismatch, "window lamp group: endpoint base mismatch");
    if (!(NAdic::zero(n) <= lo && lo < hi && hi <= NAdic::one(n)))
      fail(Error::Kind::Domain, "window lamp group: need 0 <= lo < hi <= 1");
  }
  std::string name() const override {
    return "fnwin(" + std::to_string(n_) + ";" + lo_.str() + "," + hi_.str() + ")";
  }
  LampValue identity() const override { return PLMap::identity(n_); }
  bool is_identity(const LampValue& v) const override { return as_pl(v).is_identity(); }
  LampValue multiply(const LampValue& x, const LampValue& y) const override {
    return compose(as_pl(x), as_pl(y));
  }
  LampValue invert(const LampValue& x) const override { return fng::invert(as_pl(x)); }
  bool equal(const LampValue& x, const LampValue& y) const override {
    return as_pl(x) == as_pl(y);
  }
  std::optional<Int> word_length(const LampValue&) const override { return std::nullopt; }
  LampValue sample(std::mt19937_64& rng) const override {
    NAdic u = rand_nadic_strictly_between(lo_, hi_, n_, rng);
    NAdic v = rand_nadic_strictly_between(u, hi_, n_, rng);
    PLMap b = bump_in(u, v);
    if (rng() & 1) b = fng::invert(b);
    if (rng() % 3 == 0) b = compose(b, b);
    return b;
  }
  void validate(const LampValue& v) const override {
    const PLMap& g = as_pl(v);
    if (g.base() != n_) fail(Error::Kind::BaseMismatch, "window lamp: base mismatch");
    if (g.orientation() != 1)
      fail(Error::Kind::Domain, "window lamp: orientation-reversing map");
    for (const auto& piece : g.pieces()) {
      bool ident = piece.k == 0 && piece.sign == 1 && piece.offset.mantissa() == 0;
      if (ident) continue;
      if (piece.x0 < lo_ || piece.x1 > hi_)
        fail(Error::Kind::Domain, "window lamp: support leaves the window");
    }
  }

 private:
  int n_;
  NAdic lo_, hi_;
};

}  // namespace

LampGroupPtr int_lamp() {
  static const LampGroupPtr g = std::make_shared<const IntLampGroup>();
  return g;
}

LampGroupPtr free_abelian_lamp() {
  static const LampGroupPtr g = std::make_shared<const AbelLampGroup>();
  return g;
}

LampGroupPtr fn_window_lamp(int n, const NAdic& lo, const NAdic& hi) {
  return std::make_shared<const FnWindowLampGroup>(n, lo, hi);
}

bool same_lamp_group(const LampGroupPtr& a, const LampGroupPtr& b) {
  return a && b && a->name() == b->name();
}

// ---------------------------------------------------------------------------
// element arithmetic

namespace {

void check_elt(const LampElt& u) {
  if (!u.group) fail(Error::Kind::Domain, "lamp element without a group");
}

void check_same_group(const LampElt& u, const LampElt& v) {
  check_elt(u);
  check_elt(v);
  if (!same_lamp_group(u.group, v.group))
    fail(Error::Kind::BaseMismatch, "lamp group mismatch");
}

std::map<long, LampValue> shift_lamps(const std::map<long, LampValue>& lamps, long k) {
  std::map<long, LampValue> out;
  for (const auto& [p, v] : lamps) out.emplace(p + k, v);
  return out;
}

}  // namespace

LampElt lamp_identity(const LampGroupPtr& g) {
  if (!g) fail(Error::Kind::Domain, "lamp element without a group");
  return LampElt{g, {}, 0};
}

LampElt lamp_delta(const LampGroupPtr& g, long pos, LampValue v) {
  if (!g) fail(Error::Kind::Domain, "lamp element without a group");
  g->validate(v);
  LampElt out{g, {}, 0};
  if (!g->is_identity(v)) out.lamps.emplace(pos, std::move(v));
  return out;
}

LampElt lamp_z(const LampGroupPtr& g, long k) {
  if (!g) fail(Error::Kind::Domain, "lamp element without a group");
  return LampElt{g, {}, k};
}

LampElt lamp_mul(const LampElt& u, const LampElt& v) {
  check_same_group(u, v);
  // (l1, s1) (l2, s2) = (l1 . sigma^{-s1}(l2), s1 + s2)
  std::map<long, LampValue> rhs = shift_lamps(v.lamps, -u.shift);
  LampElt out{u.group, u.lamps, u.shift + v.shift};
  for (auto& [p, val] : rhs) {
    auto it = out.lamps.find(p);
    if (it == out.lamps.end()) {
      out.lamps.emplace(p, std::move(val));
    } else {
      LampValue prod = u.group->multiply(it->second, val);
      if (u.group->is_identity(prod))
        out.lamps.erase(it);
      else
        it->second = std::move(prod);
    }
  }
  return out;
}

LampElt lamp_invert(const LampElt& u) {
  check_elt(u);
  // (l, s)^{-1} = (sigma^{s}(l^{-1}), -s)
  LampElt out{u.group, {}, -u.shift};
  for (const auto& [p, v] : u.lamps) out.lamps.emplace(p + u.shift, u.group->invert(v));
  return out;
}

LampElt lamp_shift(const LampElt& u, long k) {
  check_elt(u);
  return LampElt{u.group, shift_lamps(u.lamps, k), u.shift};
}

bool lamp_equal(const LampElt& u, const LampElt& v) {
  check_same_group(u, v);
  if (u.shift != v.shift || u.lamps.size() != v.lamps.size()) return false;
  auto it = v.lamps.begin();
  for (const auto& [p, val] : u.lamps) {
    if (p != it->first || !u.group->equal(val, it->second)) return false;
    ++it;
  }
  return true;
}

bool lamp_is_identity(const LampElt& u) {
  check_elt(u);
  return u.shift == 0 && u.lamps.empty();
}

// ---------------------------------------------------------------------------
// subgroup descriptors

bool subgroup_contains(const SubgroupDesc& H, const LampGroupPtr& g, const LampValue& v) {
  if (!g) fail(Error::Kind::Domain, "subgroup test without a group");
  return std::visit(
      overloaded{
          [&](const SubTrivial&) { return g->is_identity(v); },
          [&](const SubWhole&) { return true; },
          [&](const SubIntMultiples& s) { return as_int(v) % s.d == 0; },
          [&](const SubAbelianCoords& s) {
            for (const auto& [i, c] : as_vec(v)) {
              (void)c;
              if (!std::binary_search(s.xs.begin(), s.xs.end(), i)) return false;
            }
            return true;
          }},
      H);
}

bool subgroup_leq(const SubgroupDesc& A, const SubgroupDesc& B) {
  if (std::holds_alternative<SubTrivial>(A)) return true;
  if (std::holds_alternative<SubWhole>(B)) return true;
  if (const auto* ca = std::get_if<SubAbelianCoords>(&A)) {
    if (ca->xs.empty()) return true;
    if (const auto* cb = std::get_if<SubAbelianCoords>(&B))
      return std::includes(cb->xs.begin(), cb->xs.end(), ca->xs.begin(), ca->xs.end());
    if (std::holds_alternative<SubTrivial>(B)) return false;
    fail(Error::Kind::Domain, "subgroup comparison across lamp kinds");
  }
  if (const auto* ia = std::get_if<SubIntMultiples>(&A)) {
    if (const auto* ib = std::get_if<SubIntMultiples>(&B)) return ia->d % ib->d == 0;
    if (std::holds_alternative<SubTrivial>(B)) return false;
    fail(Error::Kind::Domain, "subgroup comparison across lamp kinds");
  }
  // A is the whole group; B is proper
  if (const auto* ib = std::get_if<SubIntMultiples>(&B)) return ib->d == 1;
  return false;
}

std::string subgroup_describe(const SubgroupDesc& H) {
  return std::visit(
      overloaded{[](const SubTrivial&) { return std::string("trivial"); },
                 [](const SubWhole&) { return std::string("whole"); },
                 [](const SubIntMultiples& s) { return s.d.str() + "Z"; },
                 [](const SubAbelianCoords& s) {
                   std::ostringstream os;
                   os << "coords{";
                   for (size_t i = 0; i < s.xs.size(); ++i) {
                     if (i) os << ",";
                     os << s.xs[i];
                   }
                   os << "}";
                   return os.str();
                 }},
      H);
}

namespace {

bool whole_like(const SubgroupDesc& H) {
  if (std::holds_alternative<SubWhole>(H)) return true;
  if (const auto* im = std::get_if<SubIntMultiples>(&H)) return im->d == 1;
  return false;
}

bool trivial_like(const SubgroupDesc& H) {
  if (std::holds_alternative<SubTrivial>(H)) return true;
  if (const auto* co = std::get_if<SubAbelianCoords>(&H)) return co->xs.empty();
  return false;
}

// deterministic nontrivial group element, for constructed witnesses
LampValue unit_value(const LampGroupPtr& g) {
  if (g->name() == "int") return Int(1);
  if (g->name() == "abel") return AbelVec{{1, Int(1)}};
  std::mt19937_64 rng(7);
  for (int tries = 0; tries < 32; ++tries) {
    LampValue v = g->sample(rng);
    if (!g->is_identity(v)) return v;
  }
  fail(Error::Kind::Budget, "could not draw a nontrivial lamp value");
}

// a value in `from` but outside `avoid`, when one exists
std::optional<LampValue> subgroup_escape(const SubgroupDesc& from, const SubgroupDesc& avoid,
                                         const LampGroupPtr& g) {
  if (trivial_like(from) || whole_like(avoid)) return std::nullopt;
  if (std::holds_alternative<SubWhole>(from)) {
    if (std::holds_alternative<SubTrivial>(avoid)) return unit_value(g);
    if (const auto* im = std::get_if<SubIntMultiples>(&avoid)) {
      (void)im;
      return Int(1);
    }
    if (const auto* co = std::get_if<SubAbelianCoords>(&avoid)) {
      int y = 1;
      while (std::binary_search(co->xs.begin(), co->xs.end(), y)) ++y;
      return AbelVec{{y, Int(1)}};
    }
    return std::nullopt;
  }
  if (const auto* fm = std::get_if<SubIntMultiples>(&from)) {
    if (std::holds_alternative<SubTrivial>(avoid)) return Int(fm->d);
    if (const auto* am = std::get_if<SubIntMultiples>(&avoid))
      return fm->d % am->d != 0 ? std::optional<LampValue>(Int(fm->d)) : std::nullopt;
    return std::nullopt;
  }
  if (const auto* fc = std::get_if<SubAbelianCoords>(&from)) {
    if (std::holds_alternative<SubTrivial>(avoid))
      return AbelVec{{fc->xs.front(), Int(1)}};
    if (const auto* ac = std::get_if<SubAbelianCoords>(&avoid)) {
      for (int y : fc->xs)
        if (!std::binary_search(ac->xs.begin(), ac->xs.end(), y))
          return AbelVec{{y, Int(1)}};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// family construction

LampFamily::LampFamily(LampGroupPtr g, LampNode n)
    : group_(std::move(g)), node_(std::make_shared<const LampNode>(std::move(n))) {}

LampFamily LampFamily::full(LampGroupPtr g) {
  if (!g) fail(Error::Kind::Domain, "family without a lamp group");
  return LampFamily(std::move(g), LampFull{});
}

LampFamily LampFamily::subgroup_family(LampGroupPtr g, SubgroupDesc H) {
  if (!g) fail(Error::Kind::Domain, "family without a lamp group");
  if (const auto* im = std::get_if<SubIntMultiples>(&H)) {
    if (im->d < 1) fail(Error::Kind::Domain, "subgroup family: modulus must be positive");
    if (g->name() != "int")
      fail(Error::Kind::Domain, "integer-multiples subgroup needs integer lamps");
  }
  if (const auto* co = std::get_if<SubAbelianCoords>(&H)) {
    if (g->name() != "abel")
      fail(Error::Kind::Domain, "coordinate subgroup needs exponent-vector lamps");
    auto xs = co->xs;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (int x : xs)
      if (x < 1) fail(Error::Kind::Domain, "coordinate subgroup uses coordinates >= 1");
    H = SubAbelianCoords{std::move(xs)};
  }
  return LampFamily(std::move(g), LampSubgroup{std::move(H)});
}

LampFamily LampFamily::balls(LampGroupPtr g) {
  if (!g) fail(Error::Kind::Domain, "family without a lamp group");
  if (!g->word_length(g->identity()).has_value())
    fail(Error::Kind::Domain, "balls family needs exact word lengths");
  return LampFamily(std::move(g), LampBalls{});
}

LampFamily LampFamily::machado(const Int& c) {
  if (c < 1) fail(Error::Kind::Domain, "machado family: scale must be a positive integer");
  return LampFamily(int_lamp(), LampMachado{c});
}

LampFamily LampFamily::non_split() {
  return LampFamily(free_abelian_lamp(), LampNonSplit{});
}

LampFamily LampFamily::split_closure(const LampFamily& F) {
  if (std::holds_alternative<LampSplitClosure>(F.node())) return F;
  if (std::holds_alternative<LampFull>(F.node())) return F;
  return LampFamily(F.group(), LampSplitClosure{std::make_shared<const LampFamily>(F)});
}

LampFamily LampFamily::shift_conjugate(const LampFamily& F, long k) {
  if (k == 0) return F;
  if (const auto* scj = std::get_if<LampShiftConjugate>(&F.node()))
    return shift_conjugate(*scj->inner, scj->k + k);
  return LampFamily(F.group(), LampShiftConjugate{std::make_shared<const LampFamily>(F), k});
}

LampFamily LampFamily::intersection(const LampFamily& a, const LampFamily& b) {
  if (!same_lamp_group(a.group(), b.group()))
    fail(Error::Kind::BaseMismatch, "intersection: lamp group mismatch");
  if (lamp_same_description(a, b)) return a;
  return LampFamily(a.group(), LampIntersection{std::make_shared<const LampFamily>(a),
                                                std::make_shared<const LampFamily>(b)});
}

namespace {

std::string node_describe(const LampNode& node) {
  return std::visit(
      overloaded{
          [](const LampFull&) { return std::string("full"); },
          [](const LampSubgroup& s) { return "subgroup[" + subgroup_describe(s.H) + "]"; },
          [](const LampBalls&) { return std::string("balls"); },
          [](const LampMachado& m) { return "machado[c=" + m.c.str() + "]"; },
          [](const LampNonSplit&) { return std::string("nonsplit"); },
          [](const LampSplitClosure& sc) {
            return "splitclosure(" + node_describe(sc.inner->node()) + ")";
          },
          [](const LampShiftConjugate& scj) {
            return "shiftconj(" + node_describe(scj.inner->node()) +
                   "; k=" + std::to_string(scj.k) + ")";
          },
          [](const LampIntersection& in) {
            return "inter(" + node_describe(in.lhs->node()) + "; " +
                   node_describe(in.rhs->node()) + ")";
          }},
      node);
}

}  // namespace

std::string LampFamily::describe() const {
  return node_describe(*node_) + " @" + group_->name();
}

bool lamp_same_description(const LampFamily& F1, const LampFamily& F2) {
  return same_lamp_group(F1.group(), F2.group()) && F1.describe() == F2.describe();
}

// ---------------------------------------------------------------------------
// membership

bool machado_window_contains(const Int& c, const Int& m, long i) {
  if (c < 1) fail(Error::Kind::Domain, "machado window: scale must be positive");
  if (i >= 0 || m == 0) return true;
  long e = -i;
  Int N = abs(m) * c;
  Int two_nsq = 2 * N * N;
  Int j0 = boost::multiprecision::sqrt(two_nsq);
  Int scale = pow_int(2, e);
  Int target = two_nsq * scale * scale;
  // dist(N sqrt2, Z) < 2^-e iff some j in {floor(N sqrt2), +1} has
  // |N sqrt2 - j| < 2^-e; squared and cleared of radicals both sides stay
  // integral, and equality never occurs by irrationality
  for (int step = 0; step < 2; ++step) {
    Int y = (j0 + step) * scale;
    if ((y - 1) * (y - 1) < target && target < (y + 1) * (y + 1)) return true;
  }
  return false;
}

namespace {

// positions strictly below min(floor, 0) must form a drop-chain
bool nonsplit_chain_ok(const LampElt& u, long floor_pos) {
  long top = std::min(floor_pos, 0L) - 1;
  bool any = false;
  long lowest = 0;
  for (const auto& [p, v] : u.lamps) {
    (void)v;
    if (p <= top) {
      lowest = any ? std::min(lowest, p) : p;
      any = true;
    }
  }
  if (!any) return true;
  auto value_at = [&](long p) -> AbelVec {
    auto it = u.lamps.find(p);
    return it == u.lamps.end() ? AbelVec{} : as_vec(it->second);
  };
  for (long p = top; p >= lowest; --p) {
    if (!(vec_drop(value_at(p), 1) == value_at(p - 1))) return false;
  }
  return true;
}

bool full_member(const LampFamily& F, const LampElt& u);

// only the constraints at positions < floor_pos, existentially completed above
bool neg_member(const LampFamily& F, const LampElt& u, long floor_pos) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup& s) {
            long lim = std::min(floor_pos, 0L);
            for (const auto& [p, v] : u.lamps)
              if (p < lim && !subgroup_contains(s.H, u.group, v)) return false;
            return true;
          },
          [&](const LampBalls&) {
            for (const auto& [p, v] : u.lamps) {
              if (p >= floor_pos) continue;
              if (p < 0) return false;
              if (*u.group->word_length(v) > pow_int(2, p)) return false;
            }
            return true;
          },
          [&](const LampMachado& m) {
            long lim = std::min(floor_pos, 0L);
            for (const auto& [p, v] : u.lamps)
              if (p < lim && !machado_window_contains(m.c, as_int(v), p)) return false;
            return true;
          },
          [&](const LampNonSplit&) { return nonsplit_chain_ok(u, floor_pos); },
          [&](const LampSplitClosure& sc) {
            return neg_member(*sc.inner, u, std::min(floor_pos, 0L));
          },
          [&](const LampShiftConjugate& scj) {
            return neg_member(*scj.inner, lamp_shift(u, -scj.k), floor_pos - scj.k);
          },
          [&](const LampIntersection& in) {
            return neg_member(*in.lhs, u, floor_pos) && neg_member(*in.rhs, u, floor_pos);
          }},
      F.node());
}

bool full_member(const LampFamily& F, const LampElt& u) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup& s) {
            for (const auto& [p, v] : u.lamps)
              if (p < 0 && !subgroup_contains(s.H, u.group, v)) return false;
            return true;
          },
          [&](const LampBalls&) {
            for (const auto& [p, v] : u.lamps) {
              if (p < 0) return false;
              if (*u.group->word_length(v) > pow_int(2, p)) return false;
            }
            return true;
          },
          [&](const LampMachado& m) {
            for (const auto& [p, v] : u.lamps)
              if (p < 0 && !machado_window_contains(m.c, as_int(v), p)) return false;
            return true;
          },
          [&](const LampNonSplit&) { return nonsplit_chain_ok(u, 0); },
          [&](const LampSplitClosure& sc) { return neg_member(*sc.inner, u, 0); },
          [&](const LampShiftConjugate& scj) {
            return full_member(*scj.inner, lamp_shift(u, -scj.k));
          },
          [&](const LampIntersection& in) {
            return full_member(*in.lhs, u) && full_member(*in.rhs, u);
          }},
      F.node());
}

}  // namespace

bool lamp_member(const LampElt& u, const LampFamily& F) {
  check_elt(u);
  if (!same_lamp_group(u.group, F.group()))
    fail(Error::Kind::BaseMismatch, "membership: lamp group mismatch");
  if (u.shift != 0)
    fail(Error::Kind::Domain, "membership needs a pure lamp configuration (shift 0)");
  return full_member(F, u);
}

// ---------------------------------------------------------------------------
// structural predicates

namespace {

// no constraints at positions >= from
bool free_from(const LampFamily& F, long from) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup& s) { return whole_like(s.H) || from >= 0; },
          [&](const LampBalls&) { return false; },
          [&](const LampMachado&) { return from >= -1; },
          [&](const LampNonSplit&) { return from >= 0; },
          [&](const LampSplitClosure& sc) {
            return from >= 0 || free_from(*sc.inner, from);
          },
          [&](const LampShiftConjugate& scj) { return free_from(*scj.inner, from - scj.k); },
          [&](const LampIntersection& in) {
            return free_from(*in.lhs, from) && free_from(*in.rhs, from);
          }},
      F.node());
}

// membership forces all negative lamps to be trivial
bool neg_trivial(const LampFamily& F) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return false; },
          [&](const LampSubgroup& s) { return trivial_like(s.H); },
          [&](const LampBalls&) { return true; },
          [&](const LampMachado&) { return false; },
          [&](const LampNonSplit&) { return false; },
          [&](const LampSplitClosure& sc) { return neg_trivial(*sc.inner); },
          [&](const LampShiftConjugate& scj) {
            return scj.k >= 0 && neg_trivial(*scj.inner);
          },
          [&](const LampIntersection& in) {
            return neg_trivial(*in.lhs) || neg_trivial(*in.rhs);
          }},
      F.node());
}

bool split_structural(const LampFamily& F) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup&) { return true; },
          [&](const LampBalls&) { return false; },
          [&](const LampMachado&) { return true; },
          [&](const LampNonSplit&) { return true; },
          [&](const LampSplitClosure&) { return true; },
          [&](const LampShiftConjugate& scj) {
            if (scj.k <= 0) return split_structural(*scj.inner);
            return split_structural(*scj.inner) && free_from(*scj.inner, -scj.k);
          },
          [&](const LampIntersection& in) {
            return split_structural(*in.lhs) && split_structural(*in.rhs);
          }},
      F.node());
}

bool subgroup_neg(const LampFamily& F);

// the member set is a subgroup of the lamp configurations
bool subgroup_like(const LampFamily& F) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup&) { return true; },
          [&](const LampBalls&) { return false; },
          [&](const LampMachado&) { return false; },
          [&](const LampNonSplit&) { return true; },
          [&](const LampSplitClosure& sc) { return subgroup_neg(*sc.inner); },
          [&](const LampShiftConjugate& scj) { return subgroup_like(*scj.inner); },
          [&](const LampIntersection& in) {
            return subgroup_like(*in.lhs) && subgroup_like(*in.rhs);
          }},
      F.node());
}

// the negative-coordinate constraint sets are subgroups
bool subgroup_neg(const LampFamily& F) {
  return std::visit(
      overloaded{
          [&](const LampFull&) { return true; },
          [&](const LampSubgroup&) { return true; },
          [&](const LampBalls&) { return true; },
          [&](const LampMachado&) { return false; },
          [&](const LampNonSplit&) { return true; },
          [&](const LampSplitClosure& sc) { return subgroup_neg(*sc.inner); },
          [&](const LampShiftConjugate& scj) {
            return scj.k >= 0 ? subgroup_neg(*scj.inner) : subgroup_like(*scj.inner);
          },
          [&](const LampIntersection& in) {
            return subgroup_neg(*in.lhs) && subgroup_neg(*in.rhs);
          }},
      F.node());
}

bool full_like(const LampFamily& F) {
  if (std::holds_alternative<LampFull>(F.node())) return true;
  if (const auto* s = std::get_if<LampSubgroup>(&F.node())) return whole_like(s->H);
  return false;
}

// least x >= 1 rejected two windows deep; exists because the windows shrink
Int machado_neg_witness_value(const Int& c) {
  for (long x = 1; x <= (1L << 16); ++x)
    if (!machado_window_contains(c, Int(x), -2)) return Int(x);
  fail(Error::Kind::Budget, "no window escape found below the cap");
}

// m inside the depth-2 window whose double escapes it: doubling the lamp at
// position -2 is the constructed product failure at exponent 0
Int machado_doubling_value(const Int& c) {
  for (long x = 1; x <= (1L << 16); ++x) {
    Int m(x);
    if (machado_window_contains(c, m, -2) && !machado_window_contains(c, m, -3)) return m;
  }
  fail(Error::Kind::Budget, "no doubling witness found below the cap");
}

// an element outside F whenever F is a proper subset, preferring violations
// at negative positions (those survive the split closure)
std::optional<LampElt> family_violator(const LampFamily& F) {
  const LampGroupPtr& g = F.group();
  return std::visit(
      overloaded{
          [&](const LampFull&) -> std::optional<LampElt> { return std::nullopt; },
          [&](const LampSubgroup& s) -> std::optional<LampElt> {
            auto esc = subgroup_escape(SubWhole{}, s.H, g);
            if (!esc) return std::nullopt;
            return lamp_delta(g, -1, *esc);
          },
          [&](const LampBalls&) -> std::optional<LampElt> {
            LampValue u = unit_value(g);
            return lamp_delta(g, 0, g->multiply(u, u));
          },
          [&](const LampMachado& m) -> std::optional<LampElt> {
            return lamp_delta(g, -2, machado_neg_witness_value(m.c));
          },
          [&](const LampNonSplit&) -> std::optional<LampElt> {
            return lamp_delta(g, -1, AbelVec{{2, Int(1)}});
          },
          [&](const LampSplitClosure& sc) -> std::optional<LampElt> {
            if (neg_trivial(*sc.inner)) return lamp_delta(g, -1, unit_value(g));
            auto v = family_violator(*sc.inner);
            if (!v) return std::nullopt;
            for (const auto& [p, val] : v->lamps) {
              (void)val;
              if (p >= 0) return std::nullopt;
            }
            return v;
          },
          [&](const LampShiftConjugate& scj) -> std::optional<LampElt> {
            auto v = family_violator(*scj.inner);
            if (!v) return std::nullopt;
            return lamp_shift(*v, scj.k);
          },
          [&](const LampIntersection& in) -> std::optional<LampElt> {
            auto v = family_violator(*in.lhs);
            return v ? v : family_violator(*in.rhs);
          }},
      F.node());
}

}  // namespace

bool is_right_heavy(const LampFamily& F) { return free_from(F, 0); }

// ---------------------------------------------------------------------------
// sampling

namespace {

LampElt random_nonneg(const LampGroupPtr& g, std::mt19937_64& rng) {
  LampElt out{g, {}, 0};
  int k = static_cast<int>(rng() % 3);
  for (int i = 0; i <= k; ++i) {
    long pos = static_cast<long>(rng() % 4);
    out = lamp_mul(out, lamp_delta(g, pos, g->sample(rng)));
  }
  return out;
}

LampElt random_generic(const LampGroupPtr& g, std::mt19937_64& rng) {
  LampElt out{g, {}, 0};
  int k = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < k; ++i) {
    long pos = static_cast<long>(rng() % 7) - 3;
    out = lamp_mul(out, lamp_delta(g, pos, g->sample(rng)));
  }
  return out;
}

LampValue subgroup_sample(const SubgroupDesc& H, const LampGroupPtr& g,
                          std::mt19937_64& rng) {
  return std::visit(
      overloaded{
          [&](const SubTrivial&) { return g->identity(); },
          [&](const SubWhole&) { return g->sample(rng); },
          [&](const SubIntMultiples& s) -> LampValue {
            return Int(s.d * (static_cast<long>(rng() % 9) - 4));
          },
          [&](const SubAbelianCoords& s) -> LampValue {
            AbelVec v;
            if (!s.xs.empty()) {
              int picks = 1 + static_cast<int>(rng() % 2);
              for (int i = 0; i < picks; ++i) {
                int key = s.xs[rng() % s.xs.size()];
                long e = static_cast<long>(rng() % 7) - 3;
                if (e != 0) v[key] += e;
              }
            }
            return vec_prune(std::move(v));
          }},
      H);
}

// value of word length at most 2^i, for the balls sampler
LampValue ball_bounded_value(const LampGroupPtr& g, long i, std::mt19937_64& rng) {
  long bound = i >= 62 ? (1L << 62) : (1L << i);
  long m = static_cast<long>(rng() % static_cast<unsigned long>(2 * bound + 1)) - bound;
  if (g->name() == "int") return Int(m);
  if (g->name() == "abel") {
    if (m == 0) return AbelVec{};
    int key = 1 + static_cast<int>(rng() % 3);
    return AbelVec{{key, Int(m)}};
  }
  fail(Error::Kind::Domain, "balls sampling over a group without word lengths");
}

LampElt nonsplit_chain(const LampGroupPtr& g, const AbelVec& h) {
  LampElt out{g, {}, 0};
  AbelVec cur = h;
  long pos = -1;
  while (!cur.empty()) {
    out.lamps.emplace(pos, cur);
    cur = vec_drop(cur, 1);
    --pos;
  }
  return out;
}

std::vector<LampElt> raw_shapes(const LampFamily& F, std::mt19937_64& rng, int want) {
  const LampGroupPtr& g = F.group();
  std::vector<LampElt> out;
  out.push_back(lamp_identity(g));
  std::visit(
      overloaded{
          [&](const LampFull&) {
            for (int i = 0; i < want; ++i) out.push_back(random_generic(g, rng));
          },
          [&](const LampSubgroup& s) {
            for (int i = 0; i < want; ++i) {
              LampElt u = random_nonneg(g, rng);
              int negs = static_cast<int>(rng() % 3);
              for (int j = 0; j < negs; ++j) {
                long pos = -1 - static_cast<long>(rng() % 3);
                u = lamp_mul(u, lamp_delta(g, pos, subgroup_sample(s.H, g, rng)));
              }
              out.push_back(std::move(u));
            }
          },
          [&](const LampBalls&) {
            for (int i = 0; i < want; ++i) {
              LampElt u{g, {}, 0};
              int picks = 1 + static_cast<int>(rng() % 3);
              for (int j = 0; j < picks; ++j) {
                long pos = static_cast<long>(rng() % 5);
                u = lamp_mul(u, lamp_delta(g, pos, ball_bounded_value(g, pos, rng)));
              }
              out.push_back(std::move(u));
            }
          },
          [&](const LampMachado& m) {
            for (int i = 0; i < want; ++i) {
              LampElt u = random_nonneg(g, rng);
              if (rng() & 1)
                u = lamp_mul(u, lamp_delta(g, -1, Int(static_cast<long>(rng() % 17) - 8)));
              if (rng() % 3 == 0) {
                long e = 2 + static_cast<long>(rng() % 3);
                Int deep = machado_deep_member(m.c, e);
                if (rng() & 1) deep = -deep;
                u = lamp_mul(u, lamp_delta(g, -e, deep));
              }
              out.push_back(std::move(u));
            }
          },
          [&](const LampNonSplit&) {
            for (int i = 0; i < want; ++i) {
              AbelVec h = as_vec(g->sample(rng));
              LampElt u = lamp_mul(nonsplit_chain(g, h), random_nonneg(g, rng));
              out.push_back(std::move(u));
            }
          },
          [&](const LampSplitClosure& sc) {
            auto inner = raw_shapes(*sc.inner, rng, want);
            for (auto& u : inner) out.push_back(lamp_mul(u, random_nonneg(g, rng)));
          },
          [&](const LampShiftConjugate& scj) {
            auto inner = raw_shapes(*scj.inner, rng, want);
            for (auto& u : inner) out.push_back(lamp_shift(u, scj.k));
          },
          [&](const LampIntersection& in) {
            auto l = raw_shapes(*in.lhs, rng, (want + 1) / 2);
            auto r = raw_shapes(*in.rhs, rng, (want + 1) / 2);
            out.insert(out.end(), l.begin(), l.end());
            out.insert(out.end(), r.begin(), r.end());
          }},
      F.node());
  return out;
}

}  // namespace

std::vector<LampElt> lamp_sample_members(const LampFamily& F, std::mt19937_64& rng,
                                         int count) {
  if (count <= 0) fail(Error::Kind::Domain, "sample count must be positive");
  std::vector<LampElt> pool;
  for (int round = 0; round < 4 && static_cast<int>(pool.size()) < count; ++round) {
    for (LampElt& u : raw_shapes(F, rng, count)) {
      if (static_cast<int>(pool.size()) >= count) break;
      try {
        if (full_member(F, u)) pool.push_back(std::move(u));
      } catch (const Error&) {
      }
    }
  }
  if (pool.empty()) fail(Error::Kind::Budget, "sampling produced no family members");
  // pad with upward pushes, which stay inside by the shift axiom
  size_t base = pool.size();
  for (size_t i = 0; static_cast<int>(pool.size()) < count; ++i)
    pool.push_back(lamp_shift(pool[i % base], 1 + static_cast<long>(i / base)));
  return pool;
}

// ---------------------------------------------------------------------------
// axiom check

LampAxiomReport lamp_axiom_check(const LampFamily& F, const Budget& budget) {
  std::mt19937_64 rng(budget.seed);
  long k_max = std::max(0L, budget.k_max);
  int pool_size = std::max(8, std::min(budget.samples, 64));
  auto pool = lamp_sample_members(F, rng, pool_size);

  LampAxiomReport rep;
  rep.stay_ok = true;
  for (const auto& u : pool) {
    if (!full_member(F, lamp_shift(u, 1))) {
      rep.stay_ok = false;
      rep.stay_counterexample = u;
      break;
    }
  }

  rep.getin_ok = true;
  int probes = std::max(4, std::min(budget.samples / 25, 16));
  std::mt19937_64 prng(budget.seed + 7);
  for (int i = 0; i < probes; ++i) {
    LampElt gelt = random_generic(F.group(), prng);
    bool entered = false;
    for (long k = 0; k <= k_max; ++k) {
      if (full_member(F, lamp_shift(gelt, k))) {
        rep.getin_witnesses.push_back(k);
        entered = true;
        break;
      }
    }
    if (!entered) rep.getin_ok = false;
  }

  rep.subgroup_shortcut = subgroup_like(F);
  if (rep.subgroup_shortcut) {
    rep.prod_ok = true;
    rep.prod_witness = 0;
    rep.prod_exact = true;
    return rep;
  }

  auto sampled_products_land = [&](long k) {
    int checked = 0;
    for (size_t i = 0; i < pool.size() && checked < 24; ++i) {
      for (size_t j = i; j < pool.size() && checked < 24; j += 3) {
        LampElt prod = lamp_mul(pool[i], pool[j]);
        ++checked;
        if (!full_member(F, lamp_shift(prod, k))) return false;
      }
    }
    return true;
  };

  if (const auto* m = std::get_if<LampMachado>(&F.node())) {
    // doubling a lamp two windows deep escapes, so exponent 0 fails; one
    // shift always lands because the windows absorb sums one level up
    Int val = machado_doubling_value(m->c);
    LampElt half = lamp_delta(F.group(), -2, val);
    LampElt bad = lamp_mul(half, half);
    bool below_fails = !full_member(F, bad);
    rep.prod_ok = below_fails && sampled_products_land(1);
    rep.prod_witness = 1;
    rep.prod_exact = true;
    return rep;
  }
  if (std::holds_alternative<LampBalls>(F.node())) {
    LampValue u = unit_value(F.group());
    LampElt one = lamp_delta(F.group(), 0, u);
    LampElt bad = lamp_mul(one, one);
    bool below_fails = !full_member(F, bad);
    rep.prod_ok = below_fails && sampled_products_land(1);
    rep.prod_witness = 1;
    rep.prod_exact = true;
    return rep;
  }

  rep.prod_ok = false;
  rep.prod_exact = false;
  for (long k = 0; k <= k_max; ++k) {
    if (sampled_products_land(k)) {
      rep.prod_ok = true;
      rep.prod_witness = k;
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// comparison engine

namespace {

bool verify_lamp_refutation(const LampElt& v, const LampFamily& F1, const LampFamily& F2,
                            long k_max) {
  try {
    if (full_member(F1, v)) return false;
    LampElt cur = v;
    for (long k = 0; k <= k_max; ++k) {
      if (!full_member(F2, cur)) return false;
      cur = lamp_shift(cur, -1);
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

// peel shift conjugations and collapse extensionally redundant closures
std::pair<LampFamily, long> normalize_cmp(const LampFamily& F) {
  LampFamily cur = F;
  long j = 0;
  for (int guard = 0; guard < 64; ++guard) {
    if (const auto* scj = std::get_if<LampShiftConjugate>(&cur.node())) {
      j += scj->k;
      cur = *scj->inner;
      continue;
    }
    if (const auto* sc = std::get_if<LampSplitClosure>(&cur.node())) {
      if (split_structural(*sc->inner)) {
        cur = *sc->inner;
        continue;
      }
      if (neg_trivial(*sc->inner)) {
        cur = LampFamily::subgroup_family(cur.group(), SubTrivial{});
        continue;
      }
    }
    break;
  }
  return {cur, j};
}

void collect_machado_scales(const LampFamily& F, std::vector<Int>& cs) {
  std::visit(overloaded{[&](const LampMachado& m) { cs.push_back(m.c); },
                        [&](const LampSplitClosure& sc) { collect_machado_scales(*sc.inner, cs); },
                        [&](const LampShiftConjugate& scj) {
                          collect_machado_scales(*scj.inner, cs);
                        },
                        [&](const LampIntersection& in) {
                          collect_machado_scales(*in.lhs, cs);
                          collect_machado_scales(*in.rhs, cs);
                        },
                        [&](const auto&) {}},
             F.node());
}

LampValue big_ball_escape(const LampGroupPtr& g, long k_max) {
  Int big = pow_int(2, k_max) + 1;
  if (g->name() == "abel") return AbelVec{{1, big}};
  return big;
}

std::vector<LampElt> lamp_refutation_candidates(const LampFamily& F1, const LampFamily& F2,
                                                long k_max, const Budget& budget,
                                                std::mt19937_64& rng) {
  std::vector<LampElt> out;
  try {
    if (auto v = family_violator(F1)) out.push_back(*v);
  } catch (const Error&) {
  }
  std::vector<Int> cs;
  collect_machado_scales(F2, cs);
  for (const Int& c : cs) {
    for (long e = 1; e <= 2; ++e) {
      try {
        Int deep = machado_deep_member(c, e + k_max + 1);
        out.push_back(lamp_delta(F2.group(), -e, deep));
      } catch (const Error&) {
      }
    }
  }
  if (free_from(F2, 0)) {
    try {
      out.push_back(lamp_delta(F2.group(), k_max, big_ball_escape(F2.group(), k_max)));
    } catch (const Error&) {
    }
  }
  try {
    auto pool = lamp_sample_members(F2, rng, std::min(std::max(budget.samples, 8), 48));
    for (size_t i = 0; i < pool.size(); ++i) {
      out.push_back(pool[i]);
      if (i < 12) out.push_back(lamp_shift(pool[i], k_max));
      if (i + 1 < pool.size() && i < 8) out.push_back(lamp_mul(pool[i], pool[i + 1]));
    }
  } catch (const Error&) {
  }
  return out;
}

std::optional<LampVerdict> lamp_exact_compare(const LampFamily& F1, const LampFamily& F2,
                                              const LampFamily& G1, const LampFamily& G2,
                                              long j1, long j2, long k_max) {
  auto refute = [&](const LampElt& inner_witness) -> std::optional<LampVerdict> {
    LampElt v = lamp_shift(inner_witness, j1);
    if (verify_lamp_refutation(v, F1, F2, k_max))
      return LampVerdict(RefutedT<LampElt>{v, k_max});
    return std::nullopt;
  };

  // absorbing left side: every shift of anything fits
  if (full_like(G1)) return LampVerdict(Dominates{0});

  // identical cores at different shifts: exact threshold from the offsets
  if (lamp_same_description(G1, G2))
    return LampVerdict(Dominates{std::max(0L, j1 - j2)});

  const auto* s1 = std::get_if<LampSubgroup>(&G1.node());
  const auto* s2 = std::get_if<LampSubgroup>(&G2.node());
  if (s1 && s2) {
    if (subgroup_leq(s2->H, s1->H)) return LampVerdict(Dominates{std::max(0L, j1 - j2)});
    if (auto esc = subgroup_escape(s2->H, s1->H, G1.group())) {
      // the witness sits at one negative coordinate of the smaller family,
      // and every pull-back keeps its value inside the larger one
      if (auto r = refute(lamp_delta(G1.group(), -1, *esc))) return r;
    }
    return std::nullopt;
  }

  // nothing on the right constrains negatives and the left is right-heavy
  if (j1 <= j2 && neg_trivial(G2) && free_from(G1, 0)) return LampVerdict(Dominates{0});

  // absorbing right side: any proper left family is escaped outright
  if (full_like(G2)) {
    try {
      if (auto v = family_violator(G1))
        if (auto r = refute(*v)) return r;
    } catch (const Error&) {
    }
    return std::nullopt;
  }

  // bounded radii never swallow a right-heavy family: plant one huge lamp
  // beyond the deepest radius the shift budget can reach
  if (std::holds_alternative<LampBalls>(G1.node()) && free_from(G2, 0)) {
    try {
      LampElt w = lamp_delta(G1.group(), k_max, big_ball_escape(G1.group(), k_max));
      if (auto r = refute(w)) return r;
    } catch (const Error&) {
    }
  }

  return std::nullopt;
}

}  // namespace

LampVerdict lamp_compare(const LampFamily& F1, const LampFamily& F2, const Budget& budget) {
  if (!same_lamp_group(F1.group(), F2.group()))
    fail(Error::Kind::BaseMismatch, "comparison: lamp group mismatch");
  if (lamp_same_description(F1, F2)) return LampVerdict(Dominates{0});

  long k_max = std::max(0L, budget.k_max);
  auto [G1, j1] = normalize_cmp(F1);
  auto [G2, j2] = normalize_cmp(F2);
  if (auto v = lamp_exact_compare(F1, F2, G1, G2, j1, j2, k_max)) return *v;

  std::mt19937_64 rng(budget.seed);
  for (const LampElt& cand : lamp_refutation_candidates(F1, F2, k_max, budget, rng)) {
    if (verify_lamp_refutation(cand, F1, F2, k_max))
      return LampVerdict(RefutedT<LampElt>{cand, k_max});
  }

  try {
    auto pool = lamp_sample_members(F2, rng, std::max(8, std::min(budget.samples, 64)));
    for (long k = 0; k <= k_max; ++k) {
      bool all_in = true;
      for (const auto& u : pool) {
        if (!full_member(F1, lamp_shift(u, k))) {
          all_in = false;
          break;
        }
      }
      if (all_in) return LampVerdict(Dominates{k});
    }
  } catch (const Error&) {
  }

  return LampVerdict(Inconclusive{
      budget.samples, k_max,
      "no exact rule applies; sampling found neither containment nor a replayable violation"});
}

// ---------------------------------------------------------------------------
// splitness

bool is_split(const LampFamily& F, const Budget& budget) {
  bool structural = split_structural(F);
  std::mt19937_64 rng(budget.seed);
  int want = std::max(4, std::min(budget.samples / 10, 20));
  try {
    auto pool = lamp_sample_members(F, rng, want);
    for (const auto& q : pool) {
      LampElt l = random_nonneg(F.group(), rng);
      bool absorbed = full_member(F, lamp_mul(q, l));
      if (structural && !absorbed)
        fail(Error::Kind::Unsupported, "split probe contradicts the catalog rule");
      if (!structural && !absorbed) return false;
    }
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::Unsupported) throw;
  }
  return structural;
}

LampFamily lamp_split_representative(const LampFamily& F) {
  return LampFamily::split_closure(F);
}

// ---------------------------------------------------------------------------
// machado helpers

long machado_escape_power(const Int& c, const Int& m, long i, long cap) {
  if (c < 1) fail(Error::Kind::Domain, "machado escape: scale must be positive");
  if (m == 0) fail(Error::Kind::Domain, "machado escape: zero lamp never escapes");
  if (i >= 0) fail(Error::Kind::Domain, "machado escape: window position must be negative");
  for (long p = 1; p <= cap; ++p)
    if (!machado_window_contains(c, m * p, i)) return p;
  fail(Error::Kind::Budget, "no escaping power within the cap");
}

Int machado_deep_member(const Int& c, long e, long pos_cap) {
  if (c < 1) fail(Error::Kind::Domain, "machado member: scale must be positive");
  if (e < 1) fail(Error::Kind::Domain, "machado member: depth must be at least 1");
  // denominators of the sqrt2 convergents approach integers fast enough to
  // pierce any window: |q sqrt2 - p| <= 1/(2q)
  Int p = 1, q = 1;
  for (long it = 0; it < pos_cap; ++it) {
    if (machado_window_contains(c, q, -e)) return q;
    Int np = p + 2 * q;
    Int nq = p + q;
    p = np;
    q = nq;
  }
  fail(Error::Kind::Budget, "no deep member within the iteration cap");
}

// ---------------------------------------------------------------------------
// slope bridge

std::map<long, long> xi_t(const PLMap& g, const Rational& t, long k_min) {
  int n = g.base();
  if (g.orientation() != 1)
    fail(Error::Kind::Domain, "slope bridge: orientation-reversing element");
  if (k_min > 0) fail(Error::Kind::Domain, "slope bridge: window must end at 0");
  if (!(t > Rational(0) && t < Rational(1, n)))
    fail(Error::Kind::Domain, "slope bridge: point must lie in (0, 1/n)");
  FixClass fc = fix_classification(t, n);
  const auto* rat = std::get_if<FixRationalNonNAry>(&fc);
  if (!rat) fail(Error::Kind::Domain, "slope bridge: point must not be n-ary");
  long o = rat->order;

  PLMap ainv = invert(base_map(n));
  // identity below eps is certified by the first segment of g
  Rational eps(0);
  const auto& ps = g.pieces();
  if (!ps.empty() && ps.front().k == 0 && ps.front().sign == 1 &&
      ps.front().offset.mantissa() == 0)
    eps = ps.front().x1.value();

  std::map<long, long> out;
  Rational tk = t;
  for (long k = 0;; --k) {
    if (tk < eps) break;
    if (k < k_min)
      fail(Error::Kind::Budget, "slope bridge: support reaches below the certified window");
    if (evaluate(g, tk) != tk)
      fail(Error::Kind::Domain,
           "slope bridge: element does not fix the orbit point " + tk.str());
    long ls = 0;
    for (const auto& pc : g.pieces()) {
      if (pc.x0.value() <= tk && tk < pc.x1.value()) {
        ls = pc.k;
        break;
      }
    }
    if (ls % o != 0)
      fail(Error::Kind::Unsupported,
           "slope bridge: slope is not a power of the local generator");
    if (ls != 0) out[k] = ls / o;
    tk = evaluate(ainv, tk);
  }
  return out;
}

PLMap xi_section(const std::map<long, long>& v, const Rational& t, int n) {
  if (n < 2) fail(Error::Kind::Domain, "slope section: base must be at least 2");
  if (!(t > Rational(0) && t < Rational(1, n)))
    fail(Error::Kind::Domain, "slope section: point must lie in (0, 1/n)");
  FixClass fc = fix_classification(t, n);
  if (!std::holds_alternative<FixRationalNonNAry>(fc))
    fail(Error::Kind::Domain, "slope section: point must not be n-ary");
  for (const auto& [k, e] : v) {
    (void)e;
    if (k > 0)
      fail(Error::Kind::Domain, "slope section: coordinates live at non-positive indices");
  }

  PLMap a = base_map(n);
  // one bump window (u, w) pinched between t.a^{-1} and t.a: its translates
  // under a^k for k <= 0 stay pairwise disjoint
  Rational tm1 = evaluate(invert(a), t);
  NAdic u = nadic_between(tm1, t, n);
  NAdic ua = evaluate_nadic(a, u);
  NAdic w = nadic_between(t, ua.value(), n);
  PLMap g0 = rational_slope_fix_element(t, u, w);

  PLMap out = PLMap::identity(n);
  for (const auto& [k, e] : v) {
    if (e == 0) continue;
    PLMap gk = conjugate(g0, power(a, k));
    out = compose(out, power(gk, e));
  }
  return out;
}

}  // namespace fng
