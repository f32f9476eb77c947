// JSON text forms for everything the tool reads and writes.  Scalars travel
// as exact strings ("p/q", "m/n^e"), elements and families as object trees
// that mirror their constructors, verdicts and reports with witnesses
// embedded so refutations replay from the transcript alone.
//
// Decoding is strict: unknown kinds, missing fields, and type mismatches
// raise Parse errors carrying the JSON path of the offending node; values
// that parse but break a constructor invariant raise the constructor's own
// Domain error, prefixed with the same path.
#pragma once

#include "fng/confining.hpp"
#include "fng/lamplighter.hpp"
#include "fng/nonlamplike.hpp"
#include "fng/plmap.hpp"
#include "fng/treesim.hpp"
#include "fng/verdict.hpp"

#include <json.hpp>

#include <string>

namespace fng {

using Json = nlohmann::json;

// Canonical bytes: two-space indent, sorted keys, trailing newline.  All
// printed output goes through this one function so byte-level determinism
// has a single owner.
std::string json_text(const Json& j);
// Byte-offset-positioned Parse error on malformed input.
Json json_parse(const std::string& text);

// {"n": 2, "orientation": 1, "breakpoints": [["0/2^0", "0/2^0"], ...]}
Json plmap_json(const PLMap& g);
PLMap plmap_from_json(const Json& j);

// Family trees keyed by "kind"; nested families appear under "inner" /
// "lhs" / "rhs".  A non-standard tau sequence is spelled out as
// {"a": <plmap>, "tau1": "m/n^e"}; the standard one is omitted.
Json conf_json(const ConfFamily& F);
ConfFamily conf_from_json(const Json& j);

// {"kind": "int" | "abel"} or {"kind": "fnwin", "n": 2, "lo": ..., "hi": ...}
Json lamp_group_json(const LampGroupPtr& g);
LampGroupPtr lamp_group_from_json(const Json& j);

// {"group": ..., "shift": 1, "lamps": {"-2": payload}}; the payload is an
// integer string for "int", an exponent object {"3": "-1"} for "abel", and
// a PL map object for "fnwin".
Json lamp_elt_json(const LampElt& u);
LampElt lamp_elt_from_json(const Json& j);

Json lamp_family_json(const LampFamily& F);
LampFamily lamp_family_from_json(const Json& j);

// {"result": "dominates", "k": 0} / {"result": "refuted", "witness": ...,
// "k_max": 32} / {"result": "inconclusive", "samples": ..., "note": ...}
Json verdict_json(const Verdict& v);
Json verdict_json(const LampVerdict& v);

Json axiom_report_json(const AxiomReport& r);
Json axiom_report_json(const LampAxiomReport& r);

Json odd_set_json(const OddSet& s);
Json qs_report_json(const QsReport& r);

Json tree_report_json(const TreeMetricReport& r);
Json busemann_json(const BusemannReport& r);
Json hnn_report_json(const HNNAxiomReport& r);
Json tree_ball_json(const TreeBall& b);

Json fixed_point_report_json(const FixedPointReport& r);

}  // namespace fng
