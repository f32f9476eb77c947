#include "fng/serialize.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace fng {
namespace {

[[noreturn]] void bad(const std::string& at, const std::string& what) {
  fail(Error::Kind::Parse, at + ": " + what);
}

// Constructor invariants keep their own kind (Domain, mostly); only the
// location is added.
[[noreturn]] void rethrow_at(const Error& e, const std::string& at) {
  throw Error(e.kind(), at + ": " + e.what());
}

const Json& field(const Json& j, const char* key, const std::string& at) {
  if (!j.is_object()) bad(at, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(at, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string str_at(const Json& j, const std::string& at) {
  if (!j.is_string()) bad(at, "expected a string");
  return j.get<std::string>();
}

long long_at(const Json& j, const std::string& at) {
  if (!j.is_number_integer()) bad(at, "expected an integer");
  return j.get<long>();
}

int int_at(const Json& j, const std::string& at) {
  return static_cast<int>(long_at(j, at));
}

bool bool_at(const Json& j, const std::string& at) {
  if (!j.is_boolean()) bad(at, "expected a boolean");
  return j.get<bool>();
}

const Json& array_at(const Json& j, const std::string& at) {
  if (!j.is_array()) bad(at, "expected an array");
  return j;
}

NAdic nadic_at(const Json& j, const std::string& at) {
  std::string s = str_at(j, at);
  try {
    return NAdic::parse(s);
  } catch (const Error& e) {
    rethrow_at(e, at);
  }
}

Rational rational_at(const Json& j, const std::string& at) {
  std::string s = str_at(j, at);
  try {
    return Rational::parse(s);
  } catch (const Error& e) {
    rethrow_at(e, at);
  }
}

// Unbounded integers travel as decimal strings; plain JSON integers are
// accepted on the way in.
Int bigint_at(const Json& j, const std::string& at) {
  if (j.is_number_integer()) return Int(j.get<long long>());
  std::string s = str_at(j, at);
  if (s.empty()) bad(at, "empty integer literal");
  try {
    return Int(s);
  } catch (const std::exception&) {
    bad(at, "malformed integer literal \"" + s + "\"");
  }
}

std::string int_str(const Int& z) { return z.str(); }

PLMap plmap_decode(const Json& j, const std::string& at) {
  int n = int_at(field(j, "n", at), at + "/n");
  int orient = 1;
  if (j.contains("orientation")) orient = int_at(j["orientation"], at + "/orientation");
  const Json& bps = array_at(field(j, "breakpoints", at), at + "/breakpoints");
  std::vector<std::pair<NAdic, NAdic>> pts;
  pts.reserve(bps.size());
  for (std::size_t i = 0; i < bps.size(); ++i) {
    std::string here = at + "/breakpoints/" + std::to_string(i);
    const Json& pair = array_at(bps[i], here);
    if (pair.size() != 2) bad(here, "expected a pair [x, y]");
    pts.emplace_back(nadic_at(pair[0], here + "/0"), nadic_at(pair[1], here + "/1"));
  }
  try {
    return PLMap(n, std::move(pts), orient);
  } catch (const Error& e) {
    rethrow_at(e, at);
  }
}

IndexSet index_set_decode(const Json& j, const std::string& at) {
  bool cof = bool_at(field(j, "cofinite", at), at + "/cofinite");
  const Json& arr = array_at(field(j, "elems", at), at + "/elems");
  std::vector<long> xs;
  xs.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    xs.push_back(long_at(arr[i], at + "/elems/" + std::to_string(i)));
  try {
    return cof ? IndexSet::all_but(std::move(xs)) : IndexSet::finite(std::move(xs));
  } catch (const Error& e) {
    rethrow_at(e, at);
  }
}

Json index_set_json(const IndexSet& s) {
  return Json{{"cofinite", s.cofinite}, {"elems", s.elems}};
}

ConfFamily conf_decode(const Json& j, const std::string& at) {
  std::string kind = str_at(field(j, "kind", at), at + "/kind");
  auto t_field = [&]() { return rational_at(field(j, "t", at), at + "/t"); };
  auto n_field = [&]() { return int_at(field(j, "n", at), at + "/n"); };
  try {
    if (kind == "full") return ConfFamily::full(n_field());
    if (kind == "rigidstab") return ConfFamily::rigid_stab(n_field(), t_field());
    if (kind == "openrigidstab") return ConfFamily::open_rigid_stab(n_field(), t_field());
    if (kind == "orbitfixator") return ConfFamily::orbit_fixator(n_field(), t_field());
    if (kind == "nbhdorbitfixator") return ConfFamily::nbhd_orbit_fixator(n_field(), t_field());
    if (kind == "lamplikeproduct") {
      const Json& carr = array_at(field(j, "cuts", at), at + "/cuts");
      std::vector<Rational> cuts;
      cuts.reserve(carr.size());
      for (std::size_t i = 0; i < carr.size(); ++i)
        cuts.push_back(rational_at(carr[i], at + "/cuts/" + std::to_string(i)));
      return ConfFamily::lamplike_product(
          n_field(), t_field(), rational_at(field(j, "x", at), at + "/x"), std::move(cuts),
          index_set_decode(field(j, "xset", at), at + "/xset"));
    }
    if (kind == "nonlamplike") {
      const Json& sarr = array_at(field(j, "S", at), at + "/S");
      std::vector<Index> S;
      S.reserve(sarr.size());
      for (std::size_t i = 0; i < sarr.size(); ++i)
        S.push_back(long_at(sarr[i], at + "/S/" + std::to_string(i)));
      int shift = 5;
      if (j.contains("shift")) shift = int_at(j["shift"], at + "/shift");
      if (j.contains("tau")) {
        const Json& tj = j["tau"];
        TauSequence tau(plmap_decode(field(tj, "a", at + "/tau"), at + "/tau/a"),
                        nadic_at(field(tj, "tau1", at + "/tau"), at + "/tau/tau1"));
        return ConfFamily::non_lamplike(std::move(S), std::move(tau), shift);
      }
      return ConfFamily::non_lamplike(n_field(), std::move(S), shift);
    }
    if (kind == "conjugate")
      return ConfFamily::conjugate_by(conf_decode(field(j, "inner", at), at + "/inner"),
                                      long_at(field(j, "k", at), at + "/k"));
    if (kind == "intersection")
      return ConfFamily::intersection(conf_decode(field(j, "lhs", at), at + "/lhs"),
                                      conf_decode(field(j, "rhs", at), at + "/rhs"));
    if (kind == "splitclosure")
      return ConfFamily::split_closure(conf_decode(field(j, "inner", at), at + "/inner"),
                                       nadic_at(field(j, "t", at), at + "/t"));
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::Parse) throw;
    rethrow_at(e, at);
  }
  bad(at + "/kind", "unknown family kind \"" + kind + "\"");
}

// The standard tau sequence is recognizable from its data, so only custom
// contractions are spelled out.
bool standard_tau(const TauSequence& tau) {
  int n = tau.base();
  return tau.a() == base_map(n) && tau.tau(1) == NAdic(n, 1, 2);
}

std::string lamp_kind_of(const LampGroupPtr& g) {
  std::string name = g->name();
  if (name == "int" || name == "abel") return name;
  return "fnwin";
}

LampValue lamp_value_decode(const Json& j, const LampGroupPtr& g, const std::string& at) {
  std::string kind = lamp_kind_of(g);
  LampValue v;
  if (kind == "int") {
    v = bigint_at(j, at);
  } else if (kind == "abel") {
    if (!j.is_object()) bad(at, "expected an exponent object");
    AbelVec vec;
    for (auto it = j.begin(); it != j.end(); ++it) {
      int layer = 0;
      try {
        std::size_t used = 0;
        layer = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        bad(at, "layer keys must be integers, got \"" + it.key() + "\"");
      }
      Int e = bigint_at(it.value(), at + "/" + it.key());
      if (e != 0) vec[layer] = std::move(e);
    }
    v = std::move(vec);
  } else {
    v = plmap_decode(j, at);
  }
  try {
    g->validate(v);
  } catch (const Error& e) {
    rethrow_at(e, at);
  }
  return v;
}

Json lamp_value_json(const LampValue& v) {
  if (const Int* z = std::get_if<Int>(&v)) return int_str(*z);
  if (const AbelVec* vec = std::get_if<AbelVec>(&v)) {
    Json o = Json::object();
    for (const auto& [layer, e] : *vec) o[std::to_string(layer)] = int_str(e);
    return o;
  }
  return plmap_json(std::get<PLMap>(v));
}

Json subgroup_json(const SubgroupDesc& H) {
  if (std::holds_alternative<SubTrivial>(H)) return Json{{"kind", "trivial"}};
  if (std::holds_alternative<SubWhole>(H)) return Json{{"kind", "whole"}};
  if (const auto* m = std::get_if<SubIntMultiples>(&H))
    return Json{{"kind", "intmultiples"}, {"d", int_str(m->d)}};
  return Json{{"kind", "abeliancoords"}, {"xs", std::get<SubAbelianCoords>(H).xs}};
}

SubgroupDesc subgroup_decode(const Json& j, const std::string& at) {
  std::string kind = str_at(field(j, "kind", at), at + "/kind");
  if (kind == "trivial") return SubTrivial{};
  if (kind == "whole") return SubWhole{};
  if (kind == "intmultiples") return SubIntMultiples{bigint_at(field(j, "d", at), at + "/d")};
  if (kind == "abeliancoords") {
    const Json& arr = array_at(field(j, "xs", at), at + "/xs");
    std::vector<int> xs;
    xs.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
      xs.push_back(int_at(arr[i], at + "/xs/" + std::to_string(i)));
    return SubAbelianCoords{std::move(xs)};
  }
  bad(at + "/kind", "unknown subgroup kind \"" + kind + "\"");
}

LampFamily lamp_family_decode(const Json& j, const std::string& at) {
  std::string kind = str_at(field(j, "kind", at), at + "/kind");
  auto group = [&]() { return lamp_group_from_json(field(j, "group", at)); };
  try {
    if (kind == "full") return LampFamily::full(group());
    if (kind == "subgroup")
      return LampFamily::subgroup_family(group(),
                                         subgroup_decode(field(j, "H", at), at + "/H"));
    if (kind == "balls") return LampFamily::balls(group());
    if (kind == "machado") return LampFamily::machado(bigint_at(field(j, "c", at), at + "/c"));
    if (kind == "nonsplit") return LampFamily::non_split();
    if (kind == "splitclosure")
      return LampFamily::split_closure(lamp_family_decode(field(j, "inner", at), at + "/inner"));
    if (kind == "shiftconj")
      return LampFamily::shift_conjugate(lamp_family_decode(field(j, "inner", at), at + "/inner"),
                                         long_at(field(j, "k", at), at + "/k"));
    if (kind == "intersection")
      return LampFamily::intersection(lamp_family_decode(field(j, "lhs", at), at + "/lhs"),
                                      lamp_family_decode(field(j, "rhs", at), at + "/rhs"));
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::Parse) throw;
    rethrow_at(e, at);
  }
  bad(at + "/kind", "unknown family kind \"" + kind + "\"");
}

Json lamp_node_json(const LampFamily& F) {
  const LampNode& node = F.node();
  if (std::holds_alternative<LampFull>(node))
    return Json{{"kind", "full"}, {"group", lamp_group_json(F.group())}};
  if (const auto* s = std::get_if<LampSubgroup>(&node))
    return Json{{"kind", "subgroup"}, {"group", lamp_group_json(F.group())},
                {"H", subgroup_json(s->H)}};
  if (std::holds_alternative<LampBalls>(node))
    return Json{{"kind", "balls"}, {"group", lamp_group_json(F.group())}};
  if (const auto* m = std::get_if<LampMachado>(&node))
    return Json{{"kind", "machado"}, {"c", int_str(m->c)}};
  if (std::holds_alternative<LampNonSplit>(node)) return Json{{"kind", "nonsplit"}};
  if (const auto* sc = std::get_if<LampSplitClosure>(&node))
    return Json{{"kind", "splitclosure"}, {"inner", lamp_node_json(*sc->inner)}};
  if (const auto* sh = std::get_if<LampShiftConjugate>(&node))
    return Json{{"kind", "shiftconj"}, {"k", sh->k}, {"inner", lamp_node_json(*sh->inner)}};
  const auto& in = std::get<LampIntersection>(node);
  return Json{{"kind", "intersection"}, {"lhs", lamp_node_json(*in.lhs)},
              {"rhs", lamp_node_json(*in.rhs)}};
}

template <class Elt, class EltJson>
Json verdict_json_impl(const VerdictT<Elt>& v, EltJson&& elt_json_fn) {
  if (const auto* d = std::get_if<Dominates>(&v)) return Json{{"result", "dominates"}, {"k", d->k}};
  if (const auto* r = std::get_if<RefutedT<Elt>>(&v))
    return Json{{"result", "refuted"}, {"witness", elt_json_fn(r->witness)}, {"k_max", r->k_max}};
  const auto& inc = std::get<Inconclusive>(v);
  return Json{{"result", "inconclusive"}, {"samples", inc.samples}, {"k_max", inc.k_max},
              {"note", inc.note}};
}

template <class Elt, class EltJson>
Json axiom_report_json_impl(const AxiomReportT<Elt>& r, EltJson&& elt_json_fn) {
  Json j{{"stay_ok", r.stay_ok},
         {"getin_ok", r.getin_ok},
         {"getin_witnesses", r.getin_witnesses},
         {"prod_ok", r.prod_ok},
         {"prod_exact", r.prod_exact},
         {"subgroup_shortcut", r.subgroup_shortcut}};
  j["stay_counterexample"] =
      r.stay_counterexample ? elt_json_fn(*r.stay_counterexample) : Json(nullptr);
  j["prod_witness"] = r.prod_witness ? Json(*r.prod_witness) : Json(nullptr);
  return j;
}

}  // namespace

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

Json json_parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Error::Kind::Parse, std::string("json: ") + e.what());
  }
}

Json plmap_json(const PLMap& g) {
  Json bps = Json::array();
  for (const auto& [x, y] : g.breakpoints()) bps.push_back(Json::array({x.str(), y.str()}));
  return Json{{"n", g.base()}, {"orientation", g.orientation()}, {"breakpoints", std::move(bps)}};
}

PLMap plmap_from_json(const Json& j) { return plmap_decode(j, "plmap"); }

Json conf_json(const ConfFamily& F) {
  int n = F.n();
  const ConfFamily::Node& node = F.node();
  if (std::holds_alternative<ConfFull>(node)) return Json{{"kind", "full"}, {"n", n}};
  if (const auto* rs = std::get_if<ConfRigidStab>(&node))
    return Json{{"kind", "rigidstab"}, {"n", n}, {"t", rs->t.str()}};
  if (const auto* ors = std::get_if<ConfOpenRigidStab>(&node))
    return Json{{"kind", "openrigidstab"}, {"n", n}, {"t", ors->t.str()}};
  if (const auto* of = std::get_if<ConfOrbitFixator>(&node))
    return Json{{"kind", "orbitfixator"}, {"n", n}, {"t", of->t.str()}};
  if (const auto* nof = std::get_if<ConfNbhdOrbitFixator>(&node))
    return Json{{"kind", "nbhdorbitfixator"}, {"n", n}, {"t", nof->t.str()}};
  if (const auto* lp = std::get_if<ConfLamplikeProduct>(&node)) {
    Json cuts = Json::array();
    for (const Rational& c : lp->cuts) cuts.push_back(c.str());
    return Json{{"kind", "lamplikeproduct"}, {"n", n},   {"t", lp->t.str()},
                {"x", lp->x.str()},          {"cuts", std::move(cuts)},
                {"xset", index_set_json(lp->xset)}};
  }
  if (const auto* nl = std::get_if<ConfNonLamplike>(&node)) {
    Json j{{"kind", "nonlamplike"}, {"n", n}, {"S", nl->S}, {"shift", nl->shift}};
    if (!standard_tau(nl->tau))
      j["tau"] = Json{{"a", plmap_json(nl->tau.a())}, {"tau1", nl->tau.tau(1).str()}};
    return j;
  }
  if (const auto* c = std::get_if<ConfConjugate>(&node))
    return Json{{"kind", "conjugate"}, {"n", n}, {"k", c->k}, {"inner", conf_json(*c->inner)}};
  if (const auto* in = std::get_if<ConfIntersection>(&node))
    return Json{{"kind", "intersection"}, {"n", n}, {"lhs", conf_json(*in->lhs)},
                {"rhs", conf_json(*in->rhs)}};
  const auto& sc = std::get<ConfSplitClosure>(node);
  return Json{{"kind", "splitclosure"}, {"n", n}, {"t", sc.t.str()},
              {"inner", conf_json(*sc.inner)}};
}

ConfFamily conf_from_json(const Json& j) { return conf_decode(j, "family"); }

Json lamp_group_json(const LampGroupPtr& g) {
  std::string kind = lamp_kind_of(g);
  if (kind != "fnwin") return Json{{"kind", kind}};
  // name is "fnwin(n;lo,hi)"; recover the window from it
  std::string name = g->name();
  auto semi = name.find(';');
  auto comma = name.find(',', semi);
  int n = std::stoi(name.substr(6, semi - 6));
  NAdic lo = NAdic::parse(name.substr(semi + 1, comma - semi - 1));
  NAdic hi = NAdic::parse(name.substr(comma + 1, name.size() - comma - 2));
  return Json{{"kind", "fnwin"}, {"n", n}, {"lo", lo.str()}, {"hi", hi.str()}};
}

LampGroupPtr lamp_group_from_json(const Json& j) {
  const std::string at = "group";
  std::string kind = str_at(field(j, "kind", at), at + "/kind");
  if (kind == "int") return int_lamp();
  if (kind == "abel") return free_abelian_lamp();
  if (kind == "fnwin") {
    try {
      return fn_window_lamp(int_at(field(j, "n", at), at + "/n"),
                            nadic_at(field(j, "lo", at), at + "/lo"),
                            nadic_at(field(j, "hi", at), at + "/hi"));
    } catch (const Error& e) {
      if (e.kind() == Error::Kind::Parse) throw;
      rethrow_at(e, at);
    }
  }
  bad(at + "/kind", "unknown lamp group \"" + kind + "\"");
}

Json lamp_elt_json(const LampElt& u) {
  Json lamps = Json::object();
  for (const auto& [pos, v] : u.lamps) lamps[std::to_string(pos)] = lamp_value_json(v);
  return Json{{"group", lamp_group_json(u.group)}, {"shift", u.shift},
              {"lamps", std::move(lamps)}};
}

LampElt lamp_elt_from_json(const Json& j) {
  const std::string at = "element";
  LampGroupPtr g = lamp_group_from_json(field(j, "group", at));
  LampElt u = lamp_identity(g);
  u.shift = long_at(field(j, "shift", at), at + "/shift");
  const Json& lamps = field(j, "lamps", at);
  if (!lamps.is_object()) bad(at + "/lamps", "expected an object");
  for (auto it = lamps.begin(); it != lamps.end(); ++it) {
    long pos = 0;
    try {
      std::size_t used = 0;
      pos = std::stol(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      bad(at + "/lamps", "positions must be integers, got \"" + it.key() + "\"");
    }
    LampValue v = lamp_value_decode(it.value(), g, at + "/lamps/" + it.key());
    if (!g->is_identity(v)) u.lamps[pos] = std::move(v);
  }
  return u;
}

Json lamp_family_json(const LampFamily& F) { return lamp_node_json(F); }

LampFamily lamp_family_from_json(const Json& j) { return lamp_family_decode(j, "family"); }

Json verdict_json(const Verdict& v) {
  return verdict_json_impl(v, [](const PLMap& g) { return plmap_json(g); });
}

Json verdict_json(const LampVerdict& v) {
  return verdict_json_impl(v, [](const LampElt& u) { return lamp_elt_json(u); });
}

Json axiom_report_json(const AxiomReport& r) {
  return axiom_report_json_impl(r, [](const PLMap& g) { return plmap_json(g); });
}

Json axiom_report_json(const LampAxiomReport& r) {
  return axiom_report_json_impl(r, [](const LampElt& u) { return lamp_elt_json(u); });
}

Json odd_set_json(const OddSet& s) {
  Json log = Json::array();
  for (const OddSetRejection& r : s.log)
    log.push_back(Json{{"candidate", r.candidate}, {"against", r.against}, {"p", r.p}});
  return Json{{"xs", s.xs}, {"log", std::move(log)}};
}

Json qs_report_json(const QsReport& r) {
  Json j{{"member", r.member}, {"eps", r.eps.str()}, {"n_eps", r.n_eps}};
  j["violated_s"] = r.violated_s ? Json(*r.violated_s) : Json(nullptr);
  return j;
}

Json tree_report_json(const TreeMetricReport& r) {
  return Json{{"d", r.d}, {"p", r.p}, {"q", r.q}, {"oracle_checked", r.oracle_checked}};
}

Json busemann_json(const BusemannReport& r) {
  return Json{{"value", r.value}, {"m0", r.m0}, {"stabilized", r.stabilized},
              {"direction", r.direction}, {"sweep", r.sweep}};
}

Json hnn_report_json(const HNNAxiomReport& r) {
  return Json{{"conj_ok", r.conj_ok}, {"intersection_ok", r.intersection_ok},
              {"generates_ok", r.generates_ok}, {"samples", r.samples}};
}

Json tree_ball_json(const TreeBall& b) {
  Json edges = Json::array();
  for (const auto& [u, v] : b.edges) edges.push_back(Json::array({u, v}));
  return Json{{"vertices", b.vertex_count()}, {"codes", b.codes}, {"levels", b.levels},
              {"edges", std::move(edges)}, {"dist", b.dist}};
}

Json fixed_point_report_json(const FixedPointReport& r) {
  Json points = Json::array();
  for (const Rational& p : r.points) points.push_back(p.str());
  Json intervals = Json::array();
  for (const auto& [lo, hi] : r.intervals) intervals.push_back(Json::array({lo.str(), hi.str()}));
  Json movers = Json::array();
  for (const auto& [x, g] : r.movers)
    movers.push_back(Json{{"point", x.str()}, {"element", plmap_json(g)}});
  return Json{{"points", std::move(points)}, {"intervals", std::move(intervals)},
              {"certified", r.certified}, {"note", r.note}, {"movers", std::move(movers)}};
}

}  // namespace fng
