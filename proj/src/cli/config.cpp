#include "latspec/cli.hpp"

namespace latspec::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

std::string kind_of(const Json& j, const std::string& where) {
  const Json& k = member(j, "kind", where);
  if (!k.is_string()) fail(where + ".kind", "expected a string");
  return k.get<std::string>();
}

}  // namespace

Json to_json(const Int& v) { return v.get_str(); }

Json to_json(const Rational& q) { return Json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}}; }

Json to_json(const LatVec& v) {
  Json out = Json::array();
  for (const auto& c : v.coords()) out.push_back(c.get_str());
  return out;
}

Json to_json(const Weight& w) {
  if (w.exact) return to_json(*w.exact);
  return Json{{"lower", w.lower}, {"upper", w.upper}, {"exact", false}};
}

Int int_from(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return j.is_number_unsigned() ? Int(std::to_string(j.get<std::uint64_t>()))
                                                             : from_int64(j.get<std::int64_t>());
    if (j.is_string()) return parse_int(j.get<std::string>());
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where, "expected an integer");
}

Rational rational_from(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(int_from(j, where));
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_object()) {
      Rational q(int_from(member(j, "num", where), where + ".num"), int_from(member(j, "den", where), where + ".den"));
      if (q.get_den() == 0) fail(where, "zero denominator");
      q.canonicalize();
      return q;
    }
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where, "expected a rational (integer, \"p/q\" or {num, den})");
}

LatVec vec_from(const Json& j, const std::string& where, std::optional<std::size_t> rank) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of integers");
  std::vector<Int> c;
  for (std::size_t i = 0; i < j.size(); ++i) c.push_back(int_from(j[i], where + "[" + std::to_string(i) + "]"));
  if (rank && c.size() != *rank) fail(where, "expected " + std::to_string(*rank) + " coordinates");
  return LatVec(std::move(c));
}

IntMatrix matrix_from(const Json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) fail(where, "expected a nonempty array of rows");
  std::vector<std::vector<Int>> m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = vec_from(rows[i], where + "[" + std::to_string(i) + "]");
    if (!m.empty() && row.rank() != m.front().size()) fail(where, "ragged rows");
    m.push_back(row.coords());
  }
  return IntMatrix::from_rows(m);
}

SystemSpec system_from(const Json& j) {
  const std::string where = "system";
  const std::string kind = kind_of(j, where);
  SystemSpec out;
  try {
    if (kind == "finite") {
      if (j.contains("sublattice")) {
        const IntMatrix m = matrix_from(j["sublattice"], where + ".sublattice");
        if (!m.is_square()) fail(where + ".sublattice", "must be square");
        out.finite = FiniteSystem::from_sublattice(SubLattice(m));
      } else {
        const Json& mods = member(j, "moduli", where);
        const Json& imgs = member(j, "images", where);
        if (!mods.is_array() || !imgs.is_array()) fail(where, "moduli and images must be arrays");
        std::vector<Int> moduli;
        for (std::size_t i = 0; i < mods.size(); ++i) moduli.push_back(int_from(mods[i], where + ".moduli"));
        std::vector<std::vector<Int>> images;
        for (std::size_t i = 0; i < imgs.size(); ++i)
          images.push_back(vec_from(imgs[i], where + ".images", moduli.size()).coords());
        out.finite = FiniteSystem::from_action(std::move(moduli), std::move(images));
      }
      return out;
    }
    if (kind == "kronecker") {
      const std::size_t rank = int_from(member(j, "rank", where), where + ".rank").get_ui();
      const Json& theta = member(j, "theta", where);
      if (!theta.is_array() || theta.empty()) fail(where + ".theta", "expected s rows");
      std::vector<std::vector<FormalReal>> rows;
      for (const auto& row : theta) {
        if (!row.is_array() || row.size() != rank) fail(where + ".theta", "each row needs rank entries");
        std::vector<FormalReal> r;
        for (const auto& e : row) {
          if (e.is_number_integer()) r.emplace_back(Rational(int_from(e, where + ".theta")));
          else if (e.is_string()) r.push_back(FormalReal::parse(e.get<std::string>()));
          else fail(where + ".theta", "entries are integers or formal strings");
        }
        rows.push_back(std::move(r));
      }
      std::map<std::string, double> symbols;
      if (j.contains("symbols")) {
        if (!j["symbols"].is_object()) fail(where + ".symbols", "expected an object");
        for (const auto& [name, v] : j["symbols"].items()) {
          if (!v.is_number()) fail(where + ".symbols." + name, "expected a number");
          symbols[name] = v.get<double>();
        }
      }
      out.kronecker.emplace(rank, std::move(rows), std::move(symbols));
      return out;
    }
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown system kind '" + kind + "'");
}

FiniteSet finite_set_from(const FiniteSystem& sys, const Json& j, std::uint64_t seed) {
  const std::string where = "set";
  if (!j.is_object()) fail(where, "expected an object");
  try {
    if (j.value("all", false)) return full_set(sys);
    std::vector<FiniteSystem::Element> elems;
    if (j.contains("elements")) {
      for (const auto& e : j["elements"]) {
        const auto v = vec_from(e, where + ".elements", sys.moduli().size());
        elems.push_back(sys.encode(v.coords()));
      }
    }
    if (j.contains("points")) {
      for (const auto& e : j["points"]) elems.push_back(sys.phi(vec_from(e, where + ".points", sys.rank())));
    }
    if (j.contains("random")) {
      const Rational density = rational_from(member(j["random"], "density", where + ".random"), where + ".random");
      const std::uint64_t s = j["random"].contains("seed") ? int_from(j["random"]["seed"], where).get_ui() : seed;
      const auto gen = PointGenerator::random(std::max<std::size_t>(sys.moduli().size(), 1), density, s);
      for (std::size_t a = 0; a < sys.size(); ++a) {
        auto res = sys.decode(a);
        if (res.empty()) res.push_back(Int(0));
        if (gen.contains(LatVec(res))) elems.push_back(a);
      }
    }
    if (!j.contains("elements") && !j.contains("points") && !j.contains("random"))
      fail(where, "give one of all, elements, points or random");
    return make_set(sys, elems);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

BoxSet box_set_from(std::size_t dim, const Json& j) {
  const std::string where = "set";
  if (!j.is_object()) fail(where, "expected an object");
  if (j.value("all", false)) return BoxSet::full(dim);
  const Json& boxes = member(j, "boxes", where);
  if (!boxes.is_array()) fail(where + ".boxes", "expected an array");
  std::vector<Box> out;
  for (const auto& b : boxes) {
    Box box;
    const Json& lo = member(b, "lower", where + ".boxes");
    const Json& hi = member(b, "upper", where + ".boxes");
    if (!lo.is_array() || !hi.is_array() || lo.size() != dim || hi.size() != dim)
      fail(where + ".boxes", "lower and upper need " + std::to_string(dim) + " entries");
    for (std::size_t i = 0; i < dim; ++i) {
      box.lower.push_back(rational_from(lo[i], where + ".boxes.lower"));
      box.upper.push_back(rational_from(hi[i], where + ".boxes.upper"));
    }
    out.push_back(std::move(box));
  }
  try {
    return BoxSet::from_boxes(dim, std::move(out));
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

PointGenerator generator_from(const Json& j, std::uint64_t seed) {
  const std::string where = "points";
  const std::string kind = kind_of(j, where);
  try {
    if (kind == "explicit") {
      const Json& pts = member(j, "points", where);
      std::vector<LatVec> v;
      std::optional<std::size_t> rank;
      if (j.contains("rank")) rank = int_from(j["rank"], where + ".rank").get_ui();
      for (const auto& p : pts) {
        v.push_back(vec_from(p, where + ".points", rank));
        rank = v.back().rank();
      }
      if (!rank) fail(where, "explicit point lists need a rank when empty");
      return PointGenerator::explicit_points(*rank, std::move(v));
    }
    if (kind == "congruence")
      return PointGenerator::congruence(vec_from(member(j, "offset", where), where + ".offset"),
                                        int_from(member(j, "modulus", where), where + ".modulus"));
    if (kind == "full") return PointGenerator::full(int_from(member(j, "rank", where), where + ".rank").get_ui());
    if (kind == "random") {
      const std::uint64_t s = j.contains("seed") ? int_from(j["seed"], where + ".seed").get_ui() : seed;
      return PointGenerator::random(int_from(member(j, "rank", where), where + ".rank").get_ui(),
                                    rational_from(member(j, "density", where), where + ".density"), s);
    }
    if (kind == "union" || kind == "intersection") {
      std::vector<PointGenerator> children;
      for (const auto& c : member(j, "children", where)) children.push_back(generator_from(c, seed));
      return kind == "union" ? PointGenerator::union_of(std::move(children))
                             : PointGenerator::intersection_of(std::move(children));
    }
    if (kind == "translate")
      return PointGenerator::translate(generator_from(member(j, "child", where), seed),
                                       vec_from(member(j, "shift", where), where + ".shift"));
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown generator kind '" + kind + "'");
}

ErgodicSetSpec ergodic_set_from(const Json& j) {
  const std::string where = "ergodic_set";
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "integers") return ErgodicSetSpec::integers();
    if (s == "interval") return ErgodicSetSpec::interval();
    fail(where, "unknown ergodic set '" + s + "'");
  }
  if (j.is_object() && j.contains("progression")) {
    const Json& p = j["progression"];
    return ErgodicSetSpec::progression(int_from(member(p, "offset", where), where + ".offset"),
                                       int_from(member(p, "step", where), where + ".step"));
  }
  fail(where, "expected \"integers\", \"interval\" or {\"progression\": {offset, step}}");
}

std::vector<LatVec> haystack_from(const Json& j, std::size_t rank) {
  const std::string where = "haystack";
  if (j.is_array()) {
    std::vector<LatVec> out;
    for (const auto& v : j) out.push_back(vec_from(v, where, rank));
    if (out.empty()) fail(where, "empty sample");
    return out;
  }
  const Json& mult = member(j, "multipliers", where);
  std::vector<Int> m;
  for (const auto& x : mult) m.push_back(int_from(x, where + ".multipliers"));
  std::vector<LatVec> basis;
  if (j.contains("basis")) {
    for (const auto& b : j["basis"]) basis.push_back(vec_from(b, where + ".basis", rank));
  } else {
    for (std::size_t i = 0; i < rank; ++i) basis.push_back(LatVec::unit(rank, i));
  }
  const std::size_t count = int_from(member(j, "count", where), where + ".count").get_ui();
  try {
    auto out = make_haystack(std::move(basis), std::move(m), count);
    if (j.contains("scale")) out = scale_vectors(out, int_from(j["scale"], where + ".scale"));
    return out;
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

}  // namespace latspec::cli
