// The simplicial tree hung off the slope-at-0 letter: vertices are cosets of
// the subgroup K of maps fixing [0, t], the letter a shifts supports upward,
// and every vertex flows toward one distinguished end.  Distances come from a
// minimal normal form and are cross-checkable against an explicit finite ball.
//
// Products are written in right-action order throughout: "apply a^{-q}, then
// g, then a^p" is compose(compose(power(a,-q), g), power(a,p)).  The base
// vertex v0 is the coset K; g moves v0 to the coset gK.
#pragma once

#include "fng/plmap.hpp"
#include "fng/verdict.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fng {

// Cut parameter and stable letter.  Valid data: a is a one-bump map of the
// same base with support (0, r), orientation +1, slope exponent exactly 1 at
// 0 (so conjugation by a pulls supports up and powers of a never fix [0, t]),
// and t lies strictly inside (0, r).
struct HNNData {
  NAdic t;
  PLMap a;
  NAdic r;            // right endpoint of supp(a)
  int ray_direction;  // +1 when positive powers of a point at the flow end;
                      // calibrated at construction, never hard-coded
};

HNNData make_hnn(const NAdic& t);  // stable letter base_map(t.base())
HNNData make_hnn(const NAdic& t, const PLMap& a);

// g fixes [0, t] pointwise (equivalently, g is supported on [t, 1]).
bool in_base(const PLMap& g, const NAdic& t);
bool in_base(const HNNData& H, const PLMap& g);

// d(v0, g v0) together with the witness pair: the least p >= 0 such that
// q = p + chi0(g) >= 0 and a^{-q} g a^p lands in K; then d = p + q.
// Membership is upward-closed in p, so the first hit is the minimum.
struct TreeMetricReport {
  long d = 0;
  long p = 0;
  long q = 0;
  bool oracle_checked = false;
};

// Budget error once p exceeds cap (genuine inputs always terminate: every
// map agrees with a^chi0 near 0, and a pushes the disagreement above t).
TreeMetricReport tree_distance(const HNNData& H, const PLMap& g, long cap = 1024);
// Same, but additionally replays the distance through a tree_ball BFS and
// sets oracle_checked; an oracle mismatch is an internal error.
TreeMetricReport tree_distance_checked(const HNNData& H, const PLMap& g, long cap = 1024);

// Explicit finite piece of the tree.  Vertex 0 is v0; each vertex stores one
// coset representative, its level (= chi0), and a canonical code: "a^m" on
// the ray through powers of a, parent code plus "/i" for the i-th discovered
// branch below a given vertex.  Edges are the one-step moves g |-> g a; every
// tree edge is of this shape, and acyclicity is asserted during assembly.
// Down-branches are explored through seeded base-subgroup samples, so the
// ball is a finite subtree of the (infinitely branching) true ball; it
// reports its own vertex count rather than promising one.
struct TreeBall {
  std::vector<std::string> codes;
  std::vector<PLMap> reps;
  std::vector<long> levels;
  std::vector<std::pair<int, int>> edges;  // undirected, index pairs
  std::vector<long> dist;                  // BFS distance from v0
  int vertex_count() const { return static_cast<int>(reps.size()); }
};

// Vertices beyond graph distance `depth` from v0 are trimmed.  `extra`
// elements have their whole up-flow included, so their geodesics to v0 are
// present even when branches sprout beyond the sampled ones.  depth <= 24.
TreeBall tree_ball(const HNNData& H, int depth, const std::vector<PLMap>& extra = {},
                   std::uint64_t seed = 1);

enum class IsometryType { Elliptic, Loxodromic };

// l(g) = max(0, d(g^2) - d(g)), cross-checked for m <= M: loxodromic orbits
// satisfy d(g^m) = m*l + (d(g) - l) exactly, elliptic ones stay at d(g^m) <=
// d(g).  A violation (impossible on a tree) raises Unsupported.  M >= 2.
long translation_length(const HNNData& H, const PLMap& g, int M = 8);
IsometryType isometry_type(const HNNData& H, const PLMap& g);

// d(v0, x_i) - d(g v0, x_i) for x_i on the a-ray toward the flow end, swept
// over i = 1..m.  The sweep increases by 2 until the flow from g v0 joins the
// ray, then freezes; value is the final estimate, m0 the first index of the
// frozen tail.  stabilized demands at least two equal tail values, so a too
//-short sweep comes back marked inconclusive rather than wrong.
struct BusemannReport {
  long value = 0;
  long m0 = 0;
  bool stabilized = false;
  int direction = 1;        // copy of the calibrated ray direction
  std::vector<long> sweep;  // estimates for i = 1..m
};

BusemannReport busemann_estimate(const HNNData& H, const PLMap& g, int m);

// Structural checks for the data itself.  conj_ok is exact (t.a > t plus
// sampled conjugates), intersection_ok is exact via the slope character,
// generates_ok asks every sampled element to reach the base within the cap.
struct HNNAxiomReport {
  bool conj_ok = false;
  bool intersection_ok = false;
  bool generates_ok = false;
  int samples = 0;
};

HNNAxiomReport hnn_axiom_check(const HNNData& H, const Budget& budget = {});

// Seeded elements for exercising the tree: mixes of commutators, letter
// powers, and conjugates pushed below t; every result has orientation +1.
std::vector<PLMap> tree_sample_elements(const HNNData& H, int count, std::uint64_t seed);
// Seeded elements of the base subgroup K itself.
std::vector<PLMap> base_sample_elements(const HNNData& H, int count, std::uint64_t seed);

}  // namespace fng
