// Tree-side computations for the letter-over-base pair.  A minimal normal
// form gives vertex distances (membership a^{-q} g a^p in K is upward-closed
// in p because conjugating by the letter pulls supports up), an explicit
// sampled subtree replays them by BFS, and the slope character at 0 reappears
// as the stabilized Busemann estimate along the flow end.
#include "fng/treesim.hpp"

#include "fng/confining.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <random>
#include <string>

namespace fng {

namespace {

bool in_base_impl(const PLMap& g, const NAdic& t) {
  return fixes_interval(g, Rational(0), t.value());
}

void check_element(const HNNData& H, const PLMap& g, const char* where) {
  if (g.base() != H.t.base())
    fail(Error::Kind::BaseMismatch,
         std::string(where) + ": element over base " + std::to_string(g.base()) +
             ", tree over base " + std::to_string(H.t.base()));
  if (g.orientation() != 1)
    fail(Error::Kind::Domain, std::string(where) + ": orientation must be +1");
}

TreeMetricReport dist_impl(const NAdic& t, const PLMap& a, const PLMap& g, long cap) {
  long c = chi0(g);
  long p = std::max(0L, -c);
  // candidate = a^{-q} g a^p with q = p + c; conjugating by a steps p -> p+1.
  PLMap cand = compose(compose(power(a, -(p + c)), g), power(a, p));
  for (; p <= cap; ++p) {
    if (in_base_impl(cand, t)) {
      TreeMetricReport r;
      r.p = p;
      r.q = p + c;
      r.d = r.p + r.q;
      return r;
    }
    cand = conjugate(cand, a);
  }
  fail(Error::Kind::Budget,
       "tree_distance: no base form with p <= " + std::to_string(cap));
}

// Busemann sweep value at index i >= 1 for ray direction dir.
long beta_at(const NAdic& t, const PLMap& a, const PLMap& g, int dir, int i, long cap) {
  long s = static_cast<long>(dir) * i;
  long dv = dist_impl(t, a, power(a, s), cap).d;
  long dg = dist_impl(t, a, compose(power(a, -s), g), cap).d;
  return dv - dg;
}

int calibrate_ray(const NAdic& t, const PLMap& a) {
  for (int dir : {+1, -1}) {
    long b2 = beta_at(t, a, a, dir, 2, 64);
    long b3 = beta_at(t, a, a, dir, 3, 64);
    if (b2 == 1 && b3 == 1) return dir;
  }
  fail(Error::Kind::Unsupported, "make_hnn: ray calibration failed for both directions");
}

HNNData validate_hnn(const NAdic& t, const PLMap& a) {
  int n = t.base();
  if (a.base() != n)
    fail(Error::Kind::BaseMismatch, "make_hnn: letter base " + std::to_string(a.base()) +
                                        " vs t over base " + std::to_string(n));
  if (a.orientation() != 1) fail(Error::Kind::Domain, "make_hnn: letter must preserve orientation");
  if (!is_one_bump(a)) fail(Error::Kind::Domain, "make_hnn: letter must be a one-bump map");
  if (chi0(a) != 1)
    fail(Error::Kind::Domain, "make_hnn: letter needs slope exponent 1 at 0, got " +
                                  std::to_string(chi0(a)));
  auto supp = support(a);  // single interval, left end 0 since chi0 = 1
  Rational r_rat = supp[0].second;
  auto r = is_nadic(r_rat, n);
  if (!r) fail(Error::Kind::Domain, "make_hnn: support endpoint " + r_rat.str() + " not n-adic");
  if (!(NAdic::zero(n) < t && t < *r))
    fail(Error::Kind::Domain,
         "make_hnn: t = " + t.str() + " must lie strictly inside (0, " + r->str() + ")");
  if (!(t < evaluate_nadic(a, t)))
    fail(Error::Kind::Domain, "make_hnn: letter must move t upward");
  HNNData H{t, a, *r, +1};
  H.ray_direction = calibrate_ray(t, a);
  return H;
}

// Window (t, t + n^{-e}) above the cut, the widest n-adic one fitting in [0,1].
std::pair<NAdic, NAdic> window_above(const NAdic& t) {
  int n = t.base();
  NAdic one = NAdic::one(n);
  for (long e = 1; e <= 64; ++e) {
    NAdic hi = t + NAdic(n, 1, e);
    if (hi <= one) return {t, hi};
  }
  fail(Error::Kind::Domain, "window_above: no room above t = " + t.str());
}

}  // namespace

HNNData make_hnn(const NAdic& t) { return validate_hnn(t, base_map(t.base())); }

HNNData make_hnn(const NAdic& t, const PLMap& a) { return validate_hnn(t, a); }

bool in_base(const PLMap& g, const NAdic& t) { return in_base_impl(g, t); }

bool in_base(const HNNData& H, const PLMap& g) { return in_base_impl(g, H.t); }

TreeMetricReport tree_distance(const HNNData& H, const PLMap& g, long cap) {
  check_element(H, g, "tree_distance");
  if (cap < 0) fail(Error::Kind::Domain, "tree_distance: negative cap");
  return dist_impl(H.t, H.a, g, cap);
}

TreeBall tree_ball(const HNNData& H, int depth, const std::vector<PLMap>& extra,
                   std::uint64_t seed) {
  if (depth < 0 || depth > 24)
    fail(Error::Kind::Domain, "tree_ball: depth must lie in [0, 24]");
  for (const PLMap& e : extra) check_element(H, e, "tree_ball");
  const NAdic& t = H.t;
  const PLMap& a = H.a;
  int n = t.base();

  std::vector<PLMap> reps, invs;
  std::vector<long> levels;
  auto find_coset = [&](const PLMap& w, long lv) -> int {
    for (std::size_t i = 0; i < reps.size(); ++i)
      if (levels[i] == lv && in_base_impl(compose(invs[i], w), t)) return static_cast<int>(i);
    return -1;
  };
  // Returns the vertex index; second component says whether it was new.
  auto add = [&](const PLMap& w) -> std::pair<int, bool> {
    long lv = chi0(w);
    int i = find_coset(w, lv);
    if (i >= 0) return {i, false};
    reps.push_back(w);
    invs.push_back(invert(w));
    levels.push_back(lv);
    return {static_cast<int>(reps.size()) - 1, true};
  };

  add(PLMap::identity(n));
  for (int i = 1; i <= depth; ++i) {
    add(power(a, i));
    add(power(a, -i));
  }

  // Down-branches: w -> w k a^{-1} through sampled base elements.  The
  // full-window bump starts right at t, hence lies in no conjugate K^{a^j},
  // so every vertex gets at least one branch besides the ray.
  const std::size_t vcap = 240;
  auto win = window_above(t);
  std::vector<PLMap> ks = {transplant(make_bump(n), win.first, win.second)};
  for (PLMap& k : base_sample_elements(H, 2, seed ^ 0x5eedULL)) ks.push_back(std::move(k));
  std::vector<int> frontier;
  for (std::size_t i = 0; i < reps.size(); ++i) frontier.push_back(static_cast<int>(i));
  for (int round = 1; round <= depth && reps.size() < vcap; ++round) {
    std::vector<int> next;
    for (int v : frontier) {
      for (const PLMap& k : ks) {
        if (reps.size() >= vcap) break;
        auto [j, fresh] = add(compose(compose(reps[v], k), power(a, -1)));
        if (fresh) next.push_back(j);
      }
    }
    frontier = std::move(next);
  }

  // Requested elements: include the whole up-flow until it rejoins known
  // territory, so the geodesic to v0 survives trimming.
  for (const PLMap& e : extra) {
    PLMap w = e;
    long guard = 2L * depth + std::abs(chi0(e)) + 16;
    for (long u = 0; u <= guard; ++u) {
      auto [j, fresh] = add(w);
      if (!fresh && u > 0) break;
      w = compose(w, a);
    }
  }

  // Close the ray over every level seen, so flows meet it inside the ball.
  long lo = 0, hi = 0;
  for (long lv : levels) {
    lo = std::min(lo, lv);
    hi = std::max(hi, lv);
  }
  for (long i = lo; i <= hi; ++i) add(power(a, i));

  // Edges: each vertex has one upward neighbour, the coset of rep * a.
  int V = static_cast<int>(reps.size());
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adj(V);
  std::vector<int> uf(V);
  for (int i = 0; i < V; ++i) uf[i] = i;
  auto root = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (int u = 0; u < V; ++u) {
    PLMap up = compose(reps[u], a);
    int v = find_coset(up, levels[u] + 1);
    if (v < 0) continue;
    int ru = root(u), rv = root(v);
    if (ru == rv)
      fail(Error::Kind::Unsupported, "tree_ball: internal error, cycle among cosets");
    uf[ru] = rv;
    edges.emplace_back(u, v);
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  std::vector<long> dist(V, -1);
  std::queue<int> bfs;
  dist[0] = 0;
  bfs.push(0);
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (int v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        bfs.push(v);
      }
  }

  // Trim to the requested radius (and drop pieces BFS never reached).
  std::vector<int> remap(V, -1);
  TreeBall ball;
  for (int i = 0; i < V; ++i) {
    if (dist[i] < 0 || dist[i] > depth) continue;
    remap[i] = ball.vertex_count();
    ball.reps.push_back(reps[i]);
    ball.levels.push_back(levels[i]);
    ball.dist.push_back(dist[i]);
  }
  for (auto [u, v] : edges)
    if (remap[u] >= 0 && remap[v] >= 0) ball.edges.emplace_back(remap[u], remap[v]);

  // Canonical codes, parents first (the BFS parent of a branch vertex is
  // always its upward neighbour, one step closer to v0).
  int W = ball.vertex_count();
  std::vector<std::vector<int>> kadj(W);
  for (auto [u, v] : ball.edges) {
    kadj[u].push_back(v);
    kadj[v].push_back(u);
  }
  ball.codes.assign(W, "");
  std::vector<int> order(W);
  for (int i = 0; i < W; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return ball.dist[x] != ball.dist[y] ? ball.dist[x] < ball.dist[y] : x < y;
  });
  std::vector<int> branch_counter(W, 0);
  for (int v : order) {
    long lv = ball.levels[v];
    if (in_base_impl(compose(invert(ball.reps[v]), power(a, lv)), t)) {
      ball.codes[v] = "a^" + std::to_string(lv);
      continue;
    }
    int parent = -1;
    for (int u : kadj[v])
      if (ball.levels[u] == lv + 1) parent = u;
    if (parent < 0 || ball.codes[parent].empty())
      fail(Error::Kind::Unsupported, "tree_ball: internal error, uncoded parent");
    ball.codes[v] = ball.codes[parent] + "/" + std::to_string(branch_counter[parent]++);
  }
  return ball;
}

TreeMetricReport tree_distance_checked(const HNNData& H, const PLMap& g, long cap) {
  TreeMetricReport r = tree_distance(H, g, cap);
  if (r.d + 1 > 24)
    fail(Error::Kind::Budget, "tree_distance_checked: distance " + std::to_string(r.d) +
                                  " too deep for the ball oracle");
  TreeBall ball = tree_ball(H, static_cast<int>(r.d) + 1, {g});
  long c = chi0(g);
  int v = -1;
  for (int i = 0; i < ball.vertex_count(); ++i)
    if (ball.levels[i] == c && in_base_impl(compose(invert(ball.reps[i]), g), H.t)) v = i;
  if (v < 0 || ball.dist[v] != r.d)
    fail(Error::Kind::Unsupported,
         "tree_distance_checked: internal error, oracle disagrees with normal form");
  r.oracle_checked = true;
  return r;
}

long translation_length(const HNNData& H, const PLMap& g, int M) {
  if (M < 2) fail(Error::Kind::Domain, "translation_length: need M >= 2");
  check_element(H, g, "translation_length");
  long d1 = dist_impl(H.t, H.a, g, 1024).d;
  long d2 = dist_impl(H.t, H.a, power(g, 2), 1024).d;
  long len = std::max(0L, d2 - d1);
  for (int m = 1; m <= M; ++m) {
    long dm = dist_impl(H.t, H.a, power(g, m), 1024).d;
    bool ok = len > 0 ? dm == m * len + (d1 - len) : dm <= d1;
    if (!ok)
      fail(Error::Kind::Unsupported, "translation_length: internal error, orbit at power " +
                                         std::to_string(m) + " breaks the tree formula");
  }
  return len;
}

IsometryType isometry_type(const HNNData& H, const PLMap& g) {
  return translation_length(H, g, 3) == 0 ? IsometryType::Elliptic : IsometryType::Loxodromic;
}

BusemannReport busemann_estimate(const HNNData& H, const PLMap& g, int m) {
  if (m < 1) fail(Error::Kind::Domain, "busemann_estimate: need m >= 1");
  check_element(H, g, "busemann_estimate");
  BusemannReport rep;
  rep.direction = H.ray_direction;
  for (int i = 1; i <= m; ++i)
    rep.sweep.push_back(beta_at(H.t, H.a, g, H.ray_direction, i, 1024));
  long m0 = m;
  while (m0 > 1 && rep.sweep[m0 - 2] == rep.sweep[m - 1]) --m0;
  rep.m0 = m0;
  rep.value = rep.sweep.back();
  rep.stabilized = m0 < m;
  return rep;
}

HNNAxiomReport hnn_axiom_check(const HNNData& H, const Budget& budget) {
  HNNAxiomReport r;
  r.samples = std::max(4, std::min(budget.samples, 64));

  bool conj = H.t < evaluate_nadic(H.a, H.t);  // exact: [t,1].a sits inside [t,1]
  auto ks = base_sample_elements(H, r.samples, budget.seed);
  for (const PLMap& k : ks) conj = conj && in_base_impl(conjugate(k, H.a), H.t);
  r.conj_ok = conj;

  bool inter = chi0(H.a) == 1;  // powers of a carry slope n^j at 0, j != 0
  for (long j : {-3L, -2L, -1L, 1L, 2L, 3L})
    inter = inter && !in_base_impl(power(H.a, j), H.t);
  r.intersection_ok = inter;

  bool gen = true;
  auto gs = tree_sample_elements(H, r.samples, budget.seed + 1);
  for (const PLMap& g : gs) {
    try {
      dist_impl(H.t, H.a, g, std::max(budget.k_max, 64L));
    } catch (const Error&) {
      gen = false;
    }
  }
  r.generates_ok = gen;
  return r;
}

std::vector<PLMap> tree_sample_elements(const HNNData& H, int count, std::uint64_t seed) {
  if (count < 0) fail(Error::Kind::Domain, "tree_sample_elements: negative count");
  int n = H.t.base();
  std::mt19937_64 rng(seed);
  std::vector<PLMap> out;
  while (static_cast<int>(out.size()) < count) {
    PLMap w = random_commutator(n, rng(), 2 + static_cast<int>(rng() % 3));
    long push = static_cast<long>(rng() % 4);
    if (push > 0) w = conjugate(w, power(H.a, -push));  // drag support toward 0
    long j = static_cast<long>(rng() % 5) - 2;
    out.push_back(compose(w, power(H.a, j)));
  }
  return out;
}

std::vector<PLMap> base_sample_elements(const HNNData& H, int count, std::uint64_t seed) {
  if (count < 0) fail(Error::Kind::Domain, "base_sample_elements: negative count");
  int n = H.t.base();
  auto [wl, wr] = window_above(H.t);
  std::mt19937_64 rng(seed);
  std::vector<PLMap> out;
  while (static_cast<int>(out.size()) < count) {
    PLMap k = PLMap::identity(n);
    for (int tries = 0; k.is_identity() && tries < 8; ++tries)
      k = transplant(random_commutator(n, rng(), 2 + static_cast<int>(rng() % 3)), wl, wr);
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace fng
