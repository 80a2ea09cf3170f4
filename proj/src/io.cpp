#include "opequiv/io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "opequiv/errors.hpp"

namespace opequiv::io {
namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where.empty() ? what : where + ": " + what);
}

void require_object(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double real(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "number is not finite");
  return x;
}

double real_at(const Json& j, const char* key, const std::string& where) {
  return real(field(j, key, where), where + "." + key);
}

std::uint64_t count(const Json& j, const std::string& where) {
  const bool ok = j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
  if (!ok) fail(where, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::int64_t integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    fail(where, "integer out of range");
  return j.get<std::int64_t>();
}

const Json& array_at(const Json& j, const char* key, const std::string& where) {
  const Json& a = field(j, key, where);
  if (!a.is_array()) fail(where + "." + key, "expected an array");
  return a;
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

GridSpec grid_from_json(const Json& j, const std::string& where) {
  require_object(j, where, {"beta", "b"});
  GridSpec g{real_at(j, "beta", where), real_at(j, "b", where)};
  if (!(g.beta > 1.0 && g.b > 0.0)) fail(where, "grid needs beta > 1 and b > 0");
  return g;
}

GridChain grids_from_json(const Json& j, const std::string& where) {
  GridChain out;
  if (!j.contains("grids")) return out;
  const Json& a = array_at(j, "grids", where);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(grid_from_json(a[i], at(where + ".grids", i)));
  return out;
}

Json grids_json(const GridChain& grids) {
  Json a = Json::array();
  for (const GridSpec& g : grids) a.push_back(to_json(g));
  return a;
}

Tail tail_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const Json& kind = field(j, "kind", where);
  if (!kind.is_string()) fail(where + ".kind", "expected a string");
  const std::string k = kind.get<std::string>();
  Tail t;
  if (k == "geometric") {
    require_object(j, where, {"kind", "a", "r", "mult", "limit", "start", "grids"});
    t.kind = TailKind::Geometric;
    t.rate = real_at(j, "r", where);
  } else if (k == "power") {
    require_object(j, where, {"kind", "a", "p", "mult", "limit", "start", "grids"});
    t.kind = TailKind::Power;
    t.rate = real_at(j, "p", where);
  } else {
    fail(where + ".kind", "unsupported tail kind \"" + k + "\" (only geometric and power tails are representable)");
  }
  t.a = real_at(j, "a", where);
  t.mult = j.contains("mult") ? count(j["mult"], where + ".mult") : 1;
  t.limit = j.contains("limit") ? real_at(j, "limit", where) : 0.0;
  t.first_index = j.contains("start") ? integer(j["start"], where + ".start") : 0;
  t.grids = grids_from_json(j, where);
  return t;
}

Json moves_json(const std::vector<Move>& moves) {
  Json a = Json::array();
  for (const Move& m : moves) a.push_back(Json{{"from", m.from}, {"to", m.to}, {"amount", to_json(m.amount)}});
  return a;
}

const char* kind_name(StepKind k) {
  switch (k) {
    case StepKind::Snap: return "snap";
    case StepKind::Truncate: return "truncate";
    case StepKind::Absorb: return "absorb";
  }
  return "?";
}

const char* shape_name(FamilyShape s) {
  switch (s) {
    case FamilyShape::Window: return "window";
    case FamilyShape::Members: return "members";
    case FamilyShape::Heavy: return "heavy";
  }
  return "?";
}

Json optional_cardinal(const std::optional<Cardinal>& c) { return c ? to_json(*c) : Json(nullptr); }

}  // namespace

Json to_json(const Cardinal& c) { return c.is_aleph() ? Json{{"aleph", c.value()}} : Json{{"fin", c.value()}}; }

Cardinal cardinal_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 1) fail("cardinal", "expected {\"fin\": n} or {\"aleph\": i}");
  if (j.contains("fin")) return Cardinal::fin(count(j["fin"], "cardinal.fin"));
  if (j.contains("aleph")) return Cardinal::aleph(count(j["aleph"], "cardinal.aleph"));
  fail("cardinal", "unknown key \"" + j.begin().key() + "\"");
}

Json to_json(const GridSpec& g) { return Json{{"beta", g.beta}, {"b", g.b}}; }

Json to_json(const SpectralMeasure& m) {
  Json j;
  j["kernel"] = to_json(m.kernel());
  j["atoms"] = Json::array();
  for (const Atom& a : m.atoms()) j["atoms"].push_back(Json{{"pos", a.pos}, {"weight", to_json(a.weight)}});
  j["tails"] = Json::array();
  for (const Tail& t : m.tails()) {
    Json x;
    const bool geo = t.kind == TailKind::Geometric;
    x["kind"] = geo ? "geometric" : "power";
    x["a"] = t.a;
    x[geo ? "r" : "p"] = t.rate;
    x["mult"] = t.mult;
    x["limit"] = t.limit;
    if (t.first_index != 0) x["start"] = t.first_index;
    if (!t.grids.empty()) x["grids"] = grids_json(t.grids);
    j["tails"].push_back(std::move(x));
  }
  j["families"] = Json::array();
  for (const InfiniteFamily& f : m.families()) {
    Json x{{"c", f.c}, {"rho", f.rho}, {"cardinal", to_json(f.cardinal)}};
    if (!f.grids.empty()) x["grids"] = grids_json(f.grids);
    j["families"].push_back(std::move(x));
  }
  return j;
}

SpectralMeasure measure_from_json(const Json& j) {
  const std::string w = "measure";
  require_object(j, w, {"kernel", "atoms", "tails", "families"});
  const Cardinal kernel = j.contains("kernel") ? cardinal_from_json(j["kernel"]) : kZero;

  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const Json& a = array_at(j, "atoms", w);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string wi = at("atoms", i);
      require_object(a[i], wi, {"pos", "weight"});
      atoms.push_back({real_at(a[i], "pos", wi), cardinal_from_json(field(a[i], "weight", wi))});
    }
  }
  std::vector<Tail> tails;
  if (j.contains("tails")) {
    const Json& a = array_at(j, "tails", w);
    for (std::size_t i = 0; i < a.size(); ++i) tails.push_back(tail_from_json(a[i], at("tails", i)));
  }
  std::vector<InfiniteFamily> families;
  if (j.contains("families")) {
    const Json& a = array_at(j, "families", w);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string wi = at("families", i);
      require_object(a[i], wi, {"c", "rho", "cardinal", "grids"});
      InfiniteFamily f;
      f.c = real_at(a[i], "c", wi);
      f.rho = real_at(a[i], "rho", wi);
      if (!(f.rho > 0.0 && f.rho < 1.0))
        fail(wi + ".rho", "family ratio must lie in ]0,1[; other infinite families are not representable");
      f.cardinal = cardinal_from_json(field(a[i], "cardinal", wi));
      f.grids = grids_from_json(a[i], wi);
      families.push_back(std::move(f));
    }
  }
  try {
    return SpectralMeasure(kernel, std::move(atoms), std::move(tails), std::move(families));
  } catch (const ContractError& e) {
    fail(w, e.what());
  }
}

Json to_json(const DenseOperator& T) {
  Json data = Json::array();
  for (int i = 0; i < T.rows(); ++i)
    for (int k = 0; k < T.cols(); ++k) data.push_back(T.matrix()(i, k));
  return Json{{"rows", T.rows()}, {"cols", T.cols()}, {"data", std::move(data)}};
}

DenseOperator matrix_from_json(const Json& j) {
  const std::string w = "matrix";
  require_object(j, w, {"rows", "cols", "data"});
  const std::uint64_t rows = count(field(j, "rows", w), "matrix.rows");
  const std::uint64_t cols = count(field(j, "cols", w), "matrix.cols");
  if (rows < 1 || cols < 1 || rows > 100000 || cols > 100000) fail(w, "rows and cols must lie in [1, 100000]");
  const Json& a = array_at(j, "data", w);
  std::vector<double> data;
  data.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) data.push_back(real(a[i], at("matrix.data", i)));
  try {
    return DenseOperator::from_row_major(static_cast<int>(rows), static_cast<int>(cols), data);
  } catch (const ContractError& e) {
    fail(w, e.what());
  }
}

Json to_json(const ShiftWitness& w) {
  Json j{{"K", w.K}, {"moves", moves_json(w.moves)}};
  j["rules"] = w.rules;
  return j;
}

Json to_json(const ShiftStep& s) {
  Json j{{"side", s.side}, {"op", kind_name(s.kind)}};
  switch (s.kind) {
    case StepKind::Snap: j["grid"] = to_json(s.grid); break;
    case StepKind::Truncate: j["tail_index"] = s.tail_index; break;
    case StepKind::Absorb: j["R"] = s.R; break;
  }
  j["witness"] = to_json(s.witness);
  return j;
}

Json to_json(const TailClass& c) {
  if (const auto* g = std::get_if<GeometricClass>(&c)) return Json{{"class", "geometric"}, {"rate", g->rate}};
  if (const auto* p = std::get_if<PowerClass>(&c)) return Json{{"class", "power"}, {"exponent", p->exponent}};
  return nullptr;
}

Json to_json(const EviSequence& e) {
  Json items = Json::array();
  for (const EviItem& it : e.items) {
    if (const auto* r = std::get_if<FiniteRun>(&it))
      items.push_back(Json{{"k", r->k}, {"mult", r->mult}});
    else {
      const auto& m = std::get<Intermission>(it);
      items.push_back(Json{{"k", m.k}, {"infinite", to_json(m.cardinal)}});
    }
  }
  return Json{{"beta", e.beta},
              {"b", e.b},
              {"kernel", to_json(e.kernel)},
              {"items", std::move(items)},
              {"tail_class", to_json(e.tail_class)},
              {"family", optional_cardinal(e.family_cardinal)},
              {"total", to_json(e.total)}};
}

Json to_json(const CanonicalForm& f) {
  return Json{{"total", to_json(f.total)},   {"kernel", to_json(f.kernel)},         {"image", to_json(f.image)},
              {"tail", to_json(f.tail)},     {"family", optional_cardinal(f.family)}, {"heavy", optional_cardinal(f.heavy)}};
}

Json to_json(const Canonicalization& c) {
  Json steps = Json::array();
  for (const ShiftStep& s : c.steps) steps.push_back(to_json(s));
  return Json{{"evi", to_json(c.evi)},
              {"form", to_json(c.form)},
              {"witness", to_json(c.witness)},
              {"steps", std::move(steps)},
              {"measure", to_json(c.measure)}};
}

Json to_json(const Violation& v) {
  return Json{{"K", v.K},           {"side", v.side},   {"prefix", v.prefix},
              {"lo", v.lo},         {"hi", v.hi},       {"small", to_json(v.small)},
              {"inflated", to_json(v.inflated)}};
}

Json to_json(const Verdict& v, const SpectralMeasure& m1, const SpectralMeasure& m2) {
  Json j;
  if (v.equivalent) {
    j["verdict"] = "equivalent";
    j["witness_K"] = v.witness_K;
    j["steps"] = Json::array();
    for (const ShiftStep& s : v.steps) j["steps"].push_back(to_json(s));
  } else {
    j["verdict"] = "not_equivalent";
    const Certificate& c = *v.certificate;
    Json cert{{"field", field_name(c.field)}, {"left", c.left}, {"right", c.right}};
    if (c.intervals) {
      cert["intervals"] = Json{{"shape", shape_name(c.intervals->shape)},
                               {"side", c.intervals->side},
                               {"formula", c.intervals->formula}};
      Json inst = Json::array();
      for (double K : kInstanceKs)
        if (auto viol = instantiate(c, m1, m2, K)) inst.push_back(to_json(*viol));
      cert["instances"] = std::move(inst);
    }
    j["certificate"] = std::move(cert);
  }
  j["forms"] = Json::array({to_json(v.form1), to_json(v.form2)});
  return j;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(); }

}  // namespace opequiv::io
