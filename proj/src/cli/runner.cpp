#include "latspec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

namespace latspec::cli {

namespace {

const Json kEmpty = Json::object();

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

struct Context {
  const Json& config;
  const Json& params;
  std::uint64_t seed;
  unsigned threads;
};

struct Section {
  Json result = Json::object();
  std::vector<std::string> failures;
  std::string summary;
  Table table;
};

const Json& section(const Json& config, const char* key) {
  auto it = config.find(key);
  if (it == config.end()) bad(std::string("missing \"") + key + "\"");
  return *it;
}

const Json& params_of(const Json& config) {
  auto it = config.find("params");
  if (it == config.end()) return kEmpty;
  if (!it->is_object()) bad("params: expected an object");
  return *it;
}

Int p_int(const Json& params, const char* key, const Int& def) {
  return params.contains(key) ? int_from(params[key], std::string("params.") + key) : def;
}

Rational p_rat(const Json& params, const char* key, const Rational& def) {
  return params.contains(key) ? rational_from(params[key], std::string("params.") + key) : def;
}

std::uint64_t to_u64(const Int& v, const std::string& where) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) bad(where + ": expected an unsigned 64-bit integer");
  return v.get_ui();
}

std::size_t p_size(const Json& params, const char* key, std::size_t def) {
  return params.contains(key) ? to_u64(p_int(params, key, 0), std::string("params.") + key) : def;
}

std::string str(const Rational& q) { return q.get_str(); }

std::string str(const LatVec& v) {
  std::string out;
  for (const auto& c : v.coords()) out += (out.empty() ? "" : " ") + c.get_str();
  return out;
}

Json vecs_json(std::span<const LatVec> vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(to_json(v));
  return out;
}

Json ints_json(std::span<const Int> vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(to_json(v));
  return out;
}

std::vector<LatVec> vecs_from(const Json& j, const std::string& where, std::optional<std::size_t> rank) {
  if (!j.is_array()) bad(where + ": expected an array");
  std::vector<LatVec> out;
  for (const auto& v : j) out.push_back(vec_from(v, where, rank));
  return out;
}

Json element_json(const FiniteSystem& sys, FiniteSystem::Element a) {
  Json out = Json::array();
  for (const auto& r : sys.decode(a)) out.push_back(r.get_str());
  return out;
}

FiniteSystem::Element element_from(const FiniteSystem& sys, const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != sys.moduli().size()) bad(where + ": expected a residue tuple");
  std::vector<Int> r;
  for (const auto& x : j) r.push_back(int_from(x, where));
  return sys.encode(r);
}

std::string weight_str(const Weight& w) {
  if (w.exact) return str(*w.exact);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "[" << w.lower << ", " << w.upper << "]";
  return os.str();
}

const FiniteSystem& require_finite(const SystemSpec& spec, const std::string& kind) {
  if (!spec.finite) bad(kind + " needs a finite system");
  return *spec.finite;
}

std::vector<ErgodicSetSpec> ergodic_sets_from(const Json& params, std::vector<ErgodicSetSpec> def) {
  if (!params.contains("ergodic_sets")) return def;
  const Json& j = params["ergodic_sets"];
  if (!j.is_array() || j.empty()) bad("params.ergodic_sets: expected a nonempty array");
  std::vector<ErgodicSetSpec> out;
  for (const auto& e : j) out.push_back(ergodic_set_from(e));
  return out;
}

Json ergodic_set_json(const ErgodicSetSpec& s) {
  switch (s.kind) {
    case ErgodicSetSpec::Kind::Integers: return "integers";
    case ErgodicSetSpec::Kind::Interval: return "interval";
    case ErgodicSetSpec::Kind::Progression:
      return Json{{"progression", {{"offset", s.offset.get_str()}, {"step", s.step.get_str()}}}};
  }
  return nullptr;
}

std::vector<LatVec> box_with_zero(std::size_t rank, std::int64_t radius) {
  std::vector<LatVec> out{LatVec::zero(rank)};
  for (auto& v : candidate_box(rank, radius)) out.push_back(std::move(v));
  return out;
}

std::size_t haystack_rank(const Json& j, std::size_t fallback) {
  if (j.is_object() && j.contains("basis") && j["basis"].is_array() && !j["basis"].empty() &&
      j["basis"][0].is_array())
    return j["basis"][0].size();
  return fallback;
}

std::vector<LatVec> haystack_or_default(const Json& params, std::size_t rank, std::size_t count) {
  if (params.contains("haystack")) return haystack_from(params["haystack"], rank);
  if (rank == 1) return {LatVec{1}, LatVec{-1}};
  std::vector<Int> m;
  for (std::size_t i = 0; i < rank; ++i) m.push_back(Int(static_cast<unsigned long>(i + 2)));
  std::vector<LatVec> basis;
  for (std::size_t i = 0; i < rank; ++i) basis.push_back(LatVec::unit(rank, i));
  return make_haystack(std::move(basis), std::move(m), count);
}

Json theorem_json(const TheoremCheck& t) {
  Json out;
  out["status"] = t.status == TheoremCheck::Status::Verified  ? "verified"
                  : t.status == TheoremCheck::Status::Refused ? "refused"
                                                              : "failed";
  out["reason"] = t.reason;
  out["rational_mass"] = to_json(t.rational_mass);
  out["delta"] = to_json(t.delta);
  if (t.status == TheoremCheck::Status::Verified) {
    out["haystack_index"] = t.haystack_index;
    out["lambda"] = to_json(t.lambda);
  }
  Json measured = Json::array();
  for (const auto& w : t.measured) measured.push_back(to_json(w));
  out["measured"] = measured;
  out["estimate"] = t.estimate;
  return out;
}

PointSet point_set(const Context& ctx) {
  const PointGenerator gen = generator_from(section(ctx.config, "points"), ctx.seed);
  const std::uint64_t window = to_u64(int_from(section(ctx.config, "window"), "window"), "window");
  return PointSet::from_generator(gen, static_cast<std::int64_t>(window));
}

// ---------------------------------------------------------------------------
// Experiments

Section volume_spectrum_run(const Context& ctx) {
  Section s;
  const PointSet set = point_set(ctx);
  std::optional<Int> cap;
  if (ctx.params.contains("cap")) cap = p_int(ctx.params, "cap", 0);
  const auto spectrum = volume_spectrum(set, cap, ctx.threads);
  s.result["points"] = set.size();
  s.result["spectrum"] = ints_json(spectrum);
  s.table.header = {"index", "value"};
  for (std::size_t i = 0; i < spectrum.size(); ++i) s.table.rows.push_back({std::to_string(i), spectrum[i].get_str()});

  if (ctx.params.contains("terms")) {
    const std::uint64_t terms = to_u64(p_int(ctx.params, "terms", 0), "params.terms");
    const auto cert = ap_certificate(set, terms, ctx.threads);
    Json c;
    c["terms"] = cert.terms;
    c["found"] = cert.found;
    c["spectrum_gcd"] = to_json(cert.spectrum_gcd);
    if (cert.found) {
      c["n"] = to_json(cert.n);
      Json ws = Json::array();
      for (std::size_t m = 0; m < cert.witnesses.size(); ++m)
        ws.push_back({{"m", m + 1}, {"det", to_json(cert.witnesses[m].det)},
                      {"vertices", vecs_json(cert.witnesses[m].vertices)}});
      c["witnesses"] = ws;
      s.summary = "arithmetic progression certificate n = " + cert.n.get_str();
    } else {
      c["best_candidate"] = to_json(cert.best_candidate);
      c["missing"] = cert.missing;
      c["failure"] = cert.failure;
      s.failures.push_back("no certificate: " + cert.failure);
    }
    s.result["certificate"] = c;
  }
  if (s.summary.empty()) s.summary = std::to_string(spectrum.size()) + " spectrum values";
  return s;
}

Json pattern_witness_json(const PatternWitness& w) {
  return Json{{"n", to_json(w.n)},           {"lambda", to_json(w.lambda)},   {"m1", to_json(w.m1)},
              {"lambda_o", to_json(w.lambda_o)}, {"probe", vecs_json(w.probe)}, {"m", ints_json(w.m)},
              {"all_positive", w.all_positive},  {"points", vecs_json(w.points())}};
}

PatternWitness pattern_witness_from(const Json& j, std::size_t rank) {
  PatternWitness w;
  w.n = int_from(section(j, "n"), "witness.n");
  w.lambda = vec_from(section(j, "lambda"), "witness.lambda", rank);
  w.m1 = int_from(section(j, "m1"), "witness.m1");
  w.lambda_o = vec_from(section(j, "lambda_o"), "witness.lambda_o", rank);
  w.probe = vecs_from(section(j, "probe"), "witness.probe", rank);
  for (const auto& m : section(j, "m")) w.m.push_back(int_from(m, "witness.m"));
  w.all_positive = j.value("all_positive", true);
  return w;
}

Section pattern_search_run(const Context& ctx) {
  Section s;
  const PointSet set = point_set(ctx);
  const std::size_t p = p_size(ctx.params, "p", 2);
  std::vector<std::vector<LatVec>> probes;
  for (const auto& probe : section(ctx.params, "probes"))
    probes.push_back(vecs_from(probe, "params.probes", set.rank()));
  PatternBounds bounds;
  if (ctx.params.contains("bounds")) {
    const Json& b = ctx.params["bounds"];
    bounds.max_n = p_int(b, "max_n", bounds.max_n);
    bounds.max_m1 = p_int(b, "max_m1", bounds.max_m1);
    bounds.max_mk = p_int(b, "max_mk", bounds.max_mk);
    bounds.haystack_count = p_size(b, "haystack_count", bounds.haystack_count);
    if (b.contains("lambdas")) bounds.lambdas = vecs_from(b["lambdas"], "params.bounds.lambdas", set.rank());
  }
  const auto res = pattern_search(set, p, probes, bounds);
  if (res.status == PatternSearchResult::Status::InvalidProbe) bad("params.probes: " + res.message);
  s.result["points"] = set.size();
  s.result["status"] = res.status == PatternSearchResult::Status::Found ? "found" : "exhausted";
  s.result["message"] = res.message;
  Json ws = Json::array();
  s.table.header = {"probe", "n", "lambda", "m1", "lambda_o", "m"};
  for (std::size_t i = 0; i < res.witnesses.size(); ++i) {
    const auto& w = res.witnesses[i];
    ws.push_back(pattern_witness_json(w));
    std::string ms;
    for (const auto& m : w.m) ms += (ms.empty() ? "" : " ") + m.get_str();
    s.table.rows.push_back({std::to_string(i), w.n.get_str(), str(w.lambda), w.m1.get_str(), str(w.lambda_o), ms});
  }
  s.result["witnesses"] = ws;
  if (res.status == PatternSearchResult::Status::Found) {
    s.summary = "pattern found with n = " + res.witnesses.front().n.get_str();
  } else {
    s.failures.push_back("search exhausted: " + res.message);
  }
  return s;
}

Section expand_scan_run(const Context& ctx, const SystemSpec& spec) {
  Section s;
  const std::int64_t radius = static_cast<std::int64_t>(p_size(ctx.params, "radius", 3));
  const auto candidates = candidate_box(spec.rank(), radius);
  s.result["candidates"] = candidates.size();
  s.result["radius"] = radius;
  if (spec.finite) {
    const auto& sys = *spec.finite;
    const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
    if (count(set) == 0) bad("set: expansion needs a non-null set");
    const auto best = max_directional_expansion(sys, set, candidates);
    s.result["max_expansion"] = to_json(best.measure);
    s.result["argmax"] = to_json(best.argmax);
    s.result["verdict"] = best.measure == 1 ? "directionally expandable within candidates"
                                            : "not directionally expandable within candidates";
    s.summary = "max expansion " + str(best.measure) + ", " + s.result["verdict"].get<std::string>();

    const auto specs = ergodic_sets_from(ctx.params, {ErgodicSetSpec::integers(), ErgodicSetSpec::interval()});
    Json checks = Json::array();
    std::size_t tight = 0;
    s.table.header = {"lambda", "ergodic_set", "measured", "annihilator_mass", "bound", "holds", "tight"};
    for (const auto& lam : candidates)
      for (const auto& es : specs) {
        const auto chk = expansion_bound_check(sys, set, lam, es);
        tight += chk.tight ? 1 : 0;
        checks.push_back({{"lambda", to_json(lam)},
                          {"ergodic_set", ergodic_set_json(es)},
                          {"measured", to_json(chk.measured)},
                          {"annihilator_mass", to_json(chk.annihilator_mass)},
                          {"bound", to_json(chk.bound)},
                          {"holds", chk.holds},
                          {"tight", chk.tight}});
        s.table.rows.push_back({str(lam), es.describe(), str(chk.measured), str(chk.annihilator_mass),
                                str(chk.bound), chk.holds ? "true" : "false", chk.tight ? "true" : "false"});
        if (!chk.holds) s.failures.push_back("expansion bound fails at lambda = (" + str(lam) + ")");
      }
    s.result["bound_checks"] = checks;
    s.result["tight_checks"] = tight;
  } else {
    const auto& sys = *spec.kronecker;
    const BoxSet set = box_set_from(sys.torus_dim(), section(ctx.config, "set"));
    const std::size_t translates = p_size(ctx.params, "translates", 64);
    double best = -1;
    LatVec arg;
    s.table.header = {"lambda", "saturation_estimate", "translates"};
    for (const auto& lam : candidates) {
      const auto est = orbit_saturation(sys, set, lam, ErgodicSetSpec::integers(), translates);
      std::ostringstream os;
      os.imbue(std::locale::classic());
      os.precision(17);
      os << est.measure;
      s.table.rows.push_back({str(lam), os.str(), std::to_string(est.translates)});
      if (est.measure > best) {
        best = est.measure;
        arg = lam;
      }
    }
    s.result["max_expansion_estimate"] = best;
    s.result["argmax"] = to_json(arg);
    s.result["estimate"] = true;
    s.summary = "saturation estimates over " + std::to_string(translates) + " translates";
  }

  if (ctx.params.contains("theorem")) {
    const Json& t = ctx.params["theorem"];
    const Rational eps_o = p_rat(t, "eps_o", 0), eps = p_rat(t, "eps", Rational(1, 10));
    const auto hay = haystack_or_default(t, spec.rank(), 200);
    const auto specs = ergodic_sets_from(t, {ErgodicSetSpec::integers()});
    TheoremCheck chk;
    if (spec.finite) {
      const FiniteSet set = finite_set_from(*spec.finite, section(ctx.config, "set"), ctx.seed);
      chk = directional_expansion_theorem_check(*spec.finite, set, eps_o, eps, hay, specs);
    } else {
      const BoxSet set = box_set_from(spec.kronecker->torus_dim(), section(ctx.config, "set"));
      chk = directional_expansion_theorem_check(*spec.kronecker, set, eps_o, eps, hay, specs,
                                                p_size(t, "radius", 64), p_size(t, "translates", 64));
    }
    s.result["theorem"] = theorem_json(chk);
    s.result["theorem"]["ergodic_sets"] = Json::array();
    for (const auto& es : specs) s.result["theorem"]["ergodic_sets"].push_back(ergodic_set_json(es));
    if (chk.status == TheoremCheck::Status::Failed) s.failures.push_back("theorem check failed: " + chk.reason);
  }
  return s;
}

Section spectral_report_run(const Context& ctx, const SystemSpec& spec) {
  Section s;
  const bool normalize = ctx.params.value("normalized", false);
  const std::int64_t radius = static_cast<std::int64_t>(p_size(ctx.params, "radius", 2));
  std::vector<LatVec> lambdas = ctx.params.contains("lambdas")
                                    ? vecs_from(ctx.params["lambdas"], "params.lambdas", spec.rank())
                                    : box_with_zero(spec.rank(), radius);
  s.table.header = {"character", "exact", "value", "lower", "upper"};
  const auto row = [&](const std::vector<Int>& k, const Weight& w) {
    std::string ks;
    for (const auto& c : k) ks += (ks.empty() ? "" : " ") + c.get_str();
    std::ostringstream lo, hi;
    lo.imbue(std::locale::classic());
    hi.imbue(std::locale::classic());
    lo.precision(17);
    hi.precision(17);
    lo << w.lower;
    hi << w.upper;
    s.table.rows.push_back({ks, w.exact ? "true" : "false", w.exact ? str(*w.exact) : "", lo.str(), hi.str()});
  };

  if (spec.finite) {
    const auto& sys = *spec.finite;
    const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
    const Rational mu = measure(sys, set);
    if (normalize && mu == 0) bad("set: normalization needs a non-null set");
    const auto raw = spectral_measure(sys, set);
    const auto sigma = normalize ? raw.normalized() : raw;
    s.result["set_measure"] = to_json(mu);
    s.result["normalized"] = normalize;
    s.result["exponent"] = sigma.exponent();
    Json atoms = Json::array();
    for (const auto& a : sigma.atoms()) {
      atoms.push_back({{"character", ints_json(a.character)}, {"weight", to_json(a.weight)}});
      row(a.character, a.weight);
    }
    s.result["atoms"] = atoms;
    const Rational trivial = sigma.trivial_weight(), total = sigma.total_mass();
    s.result["trivial_weight"] = to_json(trivial);
    s.result["total_mass"] = to_json(total);
    const Rational want_trivial = normalize ? Rational(1) : Rational(mu * mu);
    const Rational want_total = normalize ? Rational(1 / mu) : mu;
    if (trivial != want_trivial) s.failures.push_back("trivial atom differs from mu(B)^2");
    if (total != want_total) s.failures.push_back("total mass differs from mu(B)");
    s.result["rational_mass_excluding_trivial"] = to_json(sigma.rational_mass_excluding_trivial());

    Json masses = Json::array();
    for (const auto& lam : lambdas) {
      const Rational m = sigma.annihilator_mass(lam);
      Rational coset = coset_annihilator_mass(sys, set, lam);
      if (normalize) coset /= mu * mu;
      masses.push_back({{"lambda", to_json(lam)}, {"annihilator_mass", to_json(m)}, {"coset_formula", to_json(coset)}});
      if (m != coset) s.failures.push_back("annihilator mass differs from the coset formula at (" + str(lam) + ")");
    }
    s.result["annihilator_masses"] = masses;
    const auto bochner = verify_bochner(sigma, lambdas);
    Json viol = Json::array();
    for (const auto& v : bochner.violations) viol.push_back(to_json(v));
    s.result["bochner"] = {{"ok", bochner.ok}, {"checked", bochner.checked}, {"violations", viol}};
    if (!bochner.ok) s.failures.push_back("Bochner identity fails");
    s.summary = std::to_string(sigma.atoms().size()) + " atoms, Bochner identity " +
                (bochner.ok ? "verified" : "violated") + " on " + std::to_string(bochner.checked) + " lambdas";
  } else {
    const auto& sys = *spec.kronecker;
    const BoxSet set = box_set_from(sys.torus_dim(), section(ctx.config, "set"));
    const std::size_t k = p_size(ctx.params, "K", 64);
    if (normalize && set.measure() == 0) bad("set: normalization needs a non-null set");
    const auto raw = spectral_measure_kronecker(sys, set, k);
    const auto sigma = normalize ? raw.normalized() : raw;
    s.result["set_measure"] = to_json(set.measure());
    s.result["normalized"] = normalize;
    s.result["K"] = k;
    s.result["ergodic"] = sys.is_ergodic();
    Json atoms = Json::array();
    for (const auto& a : sigma.atoms()) {
      row(a.frequency, a.weight);
      if (a.exact_zero) continue;
      atoms.push_back({{"frequency", ints_json(a.frequency)}, {"weight", to_json(a.weight)}});
    }
    s.result["atoms"] = atoms;
    s.result["tail_bound"] = sigma.tail_bound();
    const Weight total = sigma.total_mass();
    s.result["trivial_weight"] = to_json(sigma.trivial_weight());
    s.result["total_mass"] = to_json(total);
    s.result["rational_mass_excluding_trivial"] = to_json(sigma.rational_mass_excluding_trivial());
    const double want = normalize ? 1 / set.measure().get_d() : set.measure().get_d();
    if (!total.contains(want)) s.failures.push_back("total mass enclosure misses mu(B)");
    Json masses = Json::array();
    for (const auto& lam : lambdas)
      masses.push_back({{"lambda", to_json(lam)}, {"annihilator_mass", to_json(sigma.annihilator_mass(lam))}});
    s.result["annihilator_masses"] = masses;
    s.result["estimate"] = true;
    s.summary = "truncated at K = " + std::to_string(k) + ", tail bound " + weight_str(Weight::enclosure(0, sigma.tail_bound()));
  }
  return s;
}

Json shrink_json(const FiniteSystem& sys, const FiniteSet& set, const ShrinkResult& r) {
  Json comps = Json::array();
  for (const auto& c : r.components) {
    Json support = Json::array();
    for (auto x : c.support) support.push_back(element_json(sys, x));
    comps.push_back({{"weight", to_json(c.weight)}, {"nu_b", to_json(component_measure(c, set))}, {"support", support}});
  }
  return Json{{"n", to_json(r.n)},
              {"m", r.m},
              {"component_index", r.component_index},
              {"nu_b", to_json(r.nu_b)},
              {"rational_mass", to_json(r.rational_mass)},
              {"rho", to_json(r.rho)},
              {"c", to_json(r.c)},
              {"components", comps}};
}

ShrinkResult shrink_from(const FiniteSystem& sys, const Json& j) {
  ShrinkResult r;
  r.n = int_from(section(j, "n"), "shrink.n");
  r.m = to_u64(int_from(section(j, "m"), "shrink.m"), "shrink.m");
  r.component_index = to_u64(int_from(section(j, "component_index"), "shrink.component_index"), "shrink");
  r.nu_b = rational_from(section(j, "nu_b"), "shrink.nu_b");
  r.rational_mass = rational_from(section(j, "rational_mass"), "shrink.rational_mass");
  r.rho = rational_from(section(j, "rho"), "shrink.rho");
  r.c = rational_from(section(j, "c"), "shrink.c");
  for (const auto& c : section(j, "components")) {
    ErgodicComponent comp;
    comp.weight = rational_from(section(c, "weight"), "shrink.components.weight");
    for (const auto& x : section(c, "support")) comp.support.push_back(element_from(sys, x, "shrink.components"));
    r.components.push_back(std::move(comp));
  }
  return r;
}

Json check_json(const ShrinkCheck& c) {
  return Json{{"rational_mass_below_eps_o", c.rational_mass_ok},
              {"component_large", c.component_ok},
              {"intersection_inequality", c.intersections_ok},
              {"samples", c.samples},
              {"failures", c.failures}};
}

Section decompose_run(const Context& ctx, const SystemSpec& spec) {
  Section s;
  const auto& sys = require_finite(spec, "decompose");
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  if (ctx.params.contains("lattice") || ctx.params.contains("n")) {
    std::vector<ErgodicComponent> comps;
    if (ctx.params.contains("lattice")) {
      const IntMatrix m = matrix_from(ctx.params["lattice"], "params.lattice");
      if (!m.is_square() || m.rows() != sys.rank()) bad("params.lattice: expected a rank x rank matrix");
      comps = ergodic_components(sys, SubLattice(m));
    } else {
      comps = ergodic_components_scaled(sys, p_int(ctx.params, "n", 1));
    }
    Json cs = Json::array();
    s.table.header = {"component", "size", "weight", "nu_b"};
    for (std::size_t i = 0; i < comps.size(); ++i) {
      Json support = Json::array();
      for (auto x : comps[i].support) support.push_back(element_json(sys, x));
      const Rational nu = component_measure(comps[i], set);
      cs.push_back({{"weight", to_json(comps[i].weight)}, {"nu_b", to_json(nu)}, {"support", support}});
      s.table.rows.push_back({std::to_string(i), std::to_string(comps[i].support.size()), str(comps[i].weight), str(nu)});
    }
    s.result["components"] = cs;
  }
  if (measure(sys, set) == 0) bad("set: shrinking needs a non-null set");
  const Rational eps_o = p_rat(ctx.params, "eps_o", Rational(1, 10));
  const std::size_t samples = p_size(ctx.params, "samples", 100);
  const auto res = shrink_rational_spectrum(sys, set, eps_o);
  s.result["eps_o"] = to_json(eps_o);
  s.result["shrink"] = shrink_json(sys, set, res);
  const auto chk = verify_shrink(sys, set, eps_o, res, samples, ctx.seed);
  s.result["conclusions"] = check_json(chk);
  for (const auto& f : chk.failures) s.failures.push_back("shrink: " + f);
  s.summary = "rational spectrum shrinks at n = " + res.n.get_str() + " with nu(B) = " + str(res.nu_b) +
              " and c = " + str(res.c);
  return s;
}

Section intersect_run(const Context& ctx, const SystemSpec& spec) {
  Section s;
  const auto& sys = require_finite(spec, "intersect");
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  if (measure(sys, set) == 0) bad("set: the intersection search needs a non-null set");
  const std::size_t p = p_size(ctx.params, "p", 2);
  if (p < 2) bad("params.p: must be at least 2");
  const auto hay = haystack_or_default(ctx.params, sys.rank(), 64);
  const ErgodicSetSpec es =
      ctx.params.contains("ergodic_set") ? ergodic_set_from(ctx.params["ergodic_set"]) : ErgodicSetSpec::integers();
  std::vector<std::vector<LatVec>> probes;
  if (ctx.params.contains("probes")) {
    for (const auto& probe : ctx.params["probes"]) probes.push_back(vecs_from(probe, "params.probes", sys.rank()));
  } else {
    const Json& rp = ctx.params.contains("random_probes") ? ctx.params["random_probes"] : kEmpty;
    const std::size_t n = p_size(rp, "count", 5);
    const std::int64_t radius = static_cast<std::int64_t>(p_size(rp, "radius", 3));
    std::mt19937_64 rng(ctx.seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<LatVec> probe;
      for (std::size_t k = 1; k < p; ++k) {
        std::vector<Int> c;
        for (std::size_t j = 0; j < sys.rank(); ++j)
          c.push_back(from_int64(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(2 * radius + 1)) - radius));
        probe.emplace_back(std::move(c));
      }
      probes.push_back(std::move(probe));
    }
  }
  const auto res = intersection_theorem_search(sys, set, p, hay, es, probes);
  s.result["p"] = p;
  s.result["ergodic_set"] = ergodic_set_json(es);
  s.result["n"] = to_json(res.n);
  s.result["lambda"] = to_json(res.lambda);
  s.result["haystack_index"] = res.haystack_index;
  s.result["m1"] = to_json(res.m1);
  s.result["eps_o"] = to_json(res.eps_o);
  s.result["eps"] = to_json(res.eps);
  s.result["shrink"] = {{"n", to_json(res.shrink.n)}, {"nu_b", to_json(res.shrink.nu_b)}, {"c", to_json(res.shrink.c)}};
  Json ws = Json::array();
  s.table.header = {"probe", "m", "point", "measure"};
  for (std::size_t i = 0; i < res.witnesses.size(); ++i) {
    const auto& w = res.witnesses[i];
    ws.push_back({{"probe", vecs_json(w.probe)},
                  {"m", ints_json(w.m)},
                  {"point", element_json(sys, w.point)},
                  {"measure", to_json(w.measure)}});
    std::string ms;
    for (const auto& m : w.m) ms += (ms.empty() ? "" : " ") + m.get_str();
    std::string ps;
    for (const auto& v : w.probe) ps += (ps.empty() ? "" : "; ") + str(v);
    s.table.rows.push_back({ps, ms, str(LatVec(sys.decode(w.point).empty() ? std::vector<Int>{0} : sys.decode(w.point))),
                            str(w.measure)});
    if (w.measure <= 0) s.failures.push_back("witness " + std::to_string(i) + " has measure zero");
  }
  s.result["witnesses"] = ws;
  s.summary = std::to_string(res.witnesses.size()) + " witnesses with n = " + res.n.get_str() + ", m1 = " +
              res.m1.get_str();
  return s;
}

Section haystack_verify_run(const Context& ctx) {
  Section s;
  const Json& h = section(ctx.params, "haystack");
  std::size_t rank = 0;
  if (ctx.params.contains("rank")) rank = p_size(ctx.params, "rank", 0);
  else if (h.is_object() && h.contains("multipliers") && h["multipliers"].is_array())
    rank = haystack_rank(h, h["multipliers"].size());
  else if (h.is_array() && !h.empty() && h[0].is_array())
    rank = h[0].size();
  if (rank == 0) bad("params: cannot infer the haystack rank");
  const auto sample = haystack_from(h, rank);
  const auto v = verify_haystack_sample(sample, rank, ctx.threads);
  s.result["rank"] = rank;
  s.result["sample"] = vecs_json(sample);
  s.result["ok"] = v.ok;
  s.result["violation"] = v.violation;
  s.result["reason"] = v.reason;
  if (h.is_object()) {
    std::vector<Int> m;
    for (const auto& x : h["multipliers"]) m.push_back(int_from(x, "haystack.multipliers"));
    s.result["warnings"] = Haystack::standard(m).warnings();
  }
  s.table.header = {"index", "vector"};
  for (std::size_t i = 0; i < sample.size(); ++i) s.table.rows.push_back({std::to_string(i), str(sample[i])});
  if (v.ok) s.summary = "all " + std::to_string(sample.size()) + " vectors primitive, all r-subsets nonsingular";
  else s.failures.push_back("not a haystack sample: " + v.reason);
  return s;
}

Section density_run(const Context& ctx) {
  Section s;
  const PointGenerator gen = generator_from(section(ctx.config, "points"), ctx.seed);
  std::vector<std::int64_t> windows;
  if (ctx.params.contains("windows")) {
    for (const auto& w : ctx.params["windows"])
      windows.push_back(static_cast<std::int64_t>(to_u64(int_from(w, "params.windows"), "params.windows")));
  } else {
    windows.push_back(static_cast<std::int64_t>(to_u64(int_from(section(ctx.config, "window"), "window"), "window")));
  }
  if (windows.empty()) bad("params.windows: expected at least one window");
  const auto est = upper_density_estimate(gen, windows);
  Json rows = Json::array();
  s.table.header = {"window", "density"};
  for (std::size_t i = 0; i < est.windows.size(); ++i) {
    rows.push_back({{"window", est.windows[i]}, {"density", to_json(est.densities[i])}});
    s.table.rows.push_back({std::to_string(est.windows[i]), str(est.densities[i])});
  }
  s.result["densities"] = rows;
  s.result["running_max"] = to_json(est.running_max);
  s.summary = "running max density " + str(est.running_max);
  return s;
}

std::uint64_t effective_seed(const Json& config, const RunOptions& options) {
  if (options.seed) return *options.seed;
  if (!config.contains("seed")) return 0;
  return to_u64(int_from(config["seed"], "seed"), "seed");
}

void check_header(const std::string& kind, const Json& config) {
  if (!config.is_object()) bad("config: expected a JSON object");
  if (config.contains("schema") && (!config["schema"].is_number_integer() || config["schema"].get<long>() != kSchemaVersion))
    bad("schema: unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  if (config.contains("experiment") &&
      (!config["experiment"].is_string() || config["experiment"].get<std::string>() != kind))
    bad("experiment: config is for '" + config["experiment"].dump() + "', not '" + kind + "'");
}

Section dispatch(const std::string& kind, const Context& ctx) {
  if (kind == "volume-spectrum") return volume_spectrum_run(ctx);
  if (kind == "pattern-search") return pattern_search_run(ctx);
  if (kind == "haystack-verify") return haystack_verify_run(ctx);
  if (kind == "density") return density_run(ctx);
  const SystemSpec spec = system_from(section(ctx.config, "system"));
  if (kind == "expand-scan") return expand_scan_run(ctx, spec);
  if (kind == "spectral-report") return spectral_report_run(ctx, spec);
  if (kind == "decompose") return decompose_run(ctx, spec);
  if (kind == "intersect") return intersect_run(ctx, spec);
  bad("unknown experiment '" + kind + "'");
}

Json verdict_json(const std::string& status, const std::string& summary, const std::vector<std::string>& failures) {
  return Json{{"status", status}, {"summary", summary}, {"failures", failures}};
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"volume-spectrum", "pattern-search", "expand-scan",     "spectral-report",
                                              "decompose",       "intersect",      "haystack-verify", "density"};
  return kinds;
}

RunOutcome run_experiment(const std::string& kind, const Json& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_header(kind, config);
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
    bad("unknown experiment '" + kind + "'");
  const std::uint64_t seed = effective_seed(config, options);
  const Context ctx{config, params_of(config), seed, std::max(1u, options.threads)};

  Section s;
  std::string status;
  try {
    s = dispatch(kind, ctx);
    status = s.failures.empty() ? "pass" : "fail";
  } catch (const HardFailure& e) {
    s = Section{};
    s.failures.push_back(e.what());
    s.summary = "hard failure";
    status = "hard-failure";
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(e.what());
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("config: ") + e.what());
  }

  RunOutcome out;
  Json& r = out.report;
  r["schema"] = kSchemaVersion;
  r["tool"] = "latspec";
  r["version"] = kVersion;
  r["experiment"] = kind;
  r["seed"] = seed;
  r["config"] = config;
  r["result"] = std::move(s.result);
  r["verdict"] = verdict_json(status, s.summary, s.failures);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  r["timing"] = {{"seconds", dt.count()}};
  out.table = std::move(s.table);
  out.exit_code = status == "pass" ? 0 : 1;
  return out;
}

Json report_body(const Json& report) {
  Json body = report;
  if (body.is_object()) body.erase("timing");
  return body;
}

std::string to_csv(const Table& table) {
  const auto cell = [](const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cell(cells[i]);
    out += "\n";
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

// ---------------------------------------------------------------------------
// Re-verification

namespace {

struct Recheck {
  std::size_t checked = 0;
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    ++checked;
    if (!ok) failures.push_back(what);
  }
};

void recheck_volume(const Context& ctx, const Json& result, Recheck& rc) {
  if (!result.contains("certificate") || !result["certificate"].value("found", false)) return;
  const PointSet set = point_set(ctx);
  const Json& c = result["certificate"];
  const Int n = int_from(section(c, "n"), "certificate.n");
  std::uint64_t expected_m = 1;
  for (const auto& w : section(c, "witnesses")) {
    const auto verts = vecs_from(section(w, "vertices"), "witness.vertices", set.rank());
    const std::uint64_t m = to_u64(int_from(section(w, "m"), "witness.m"), "witness.m");
    bool inside = true;
    for (const auto& v : verts) inside = inside && set.contains(v);
    const Int det = simplex_det(verts);
    rc.expect(inside, "simplex for m = " + std::to_string(m) + " leaves E");
    rc.expect(m == expected_m++ && abs(det) == n * Int(std::to_string(m)),
              "simplex for m = " + std::to_string(m) + " has |det| " + Int(abs(det)).get_str());
  }
}

void recheck_pattern(const Context& ctx, const Json& result, Recheck& rc) {
  const PointSet set = point_set(ctx);
  std::optional<PatternWitness> first;
  for (const auto& wj : section(result, "witnesses")) {
    const auto w = pattern_witness_from(wj, set.rank());
    rc.expect(verify_pattern_witness(set, w), "pattern witness does not lie in E");
    if (first)
      rc.expect(first->n == w.n && first->lambda == w.lambda && first->m1 == w.m1,
                "witnesses disagree on (n, lambda, m1)");
    else
      first = w;
  }
}

void recheck_expand_kronecker(const Context& ctx, const KroneckerSystem& sys, const Json& result, Recheck& rc) {
  const BoxSet set = box_set_from(sys.torus_dim(), section(ctx.config, "set"));
  const LatVec arg = vec_from(section(result, "argmax"), "argmax", sys.rank());
  const auto est = orbit_saturation(sys, set, arg, ErgodicSetSpec::integers(), p_size(ctx.params, "translates", 64));
  rc.expect(est.measure == section(result, "max_expansion_estimate").get<double>(),
            "argmax does not realize the reported estimate");
  if (result.contains("theorem") && result["theorem"]["status"] == "verified") {
    const Json& t = ctx.params["theorem"];
    const auto hay = haystack_or_default(t, sys.rank(), 200);
    const std::size_t i = to_u64(int_from(section(result["theorem"], "haystack_index"), "haystack_index"), "index");
    rc.expect(i < hay.size() && hay[i] == vec_from(section(result["theorem"], "lambda"), "lambda", sys.rank()),
              "theorem direction is not the reported haystack element");
  }
}

void recheck_expand(const Context& ctx, const SystemSpec& spec, const Json& result, Recheck& rc) {
  if (!spec.finite) return recheck_expand_kronecker(ctx, *spec.kronecker, result, rc);
  const auto& sys = *spec.finite;
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  const LatVec arg = vec_from(section(result, "argmax"), "argmax", sys.rank());
  rc.expect(orbit_saturation(sys, set, arg).measure == rational_from(section(result, "max_expansion"), "max_expansion"),
            "argmax does not realize the reported maximum");
  for (const auto& c : section(result, "bound_checks")) {
    const LatVec lam = vec_from(section(c, "lambda"), "lambda", sys.rank());
    const Rational measured = orbit_saturation(sys, set, lam, ergodic_set_from(section(c, "ergodic_set"))).measure;
    const Rational mass = coset_annihilator_mass(sys, set, lam) / (measure(sys, set) * measure(sys, set));
    rc.expect(measured == rational_from(section(c, "measured"), "measured") &&
                  mass == rational_from(section(c, "annihilator_mass"), "annihilator_mass") && measured * mass >= 1,
              "bound check at (" + str(lam) + ") does not recompute");
  }
  if (result.contains("theorem") && result["theorem"]["status"] == "verified") {
    const Json& t = result["theorem"];
    const LatVec lam = vec_from(section(t, "lambda"), "theorem.lambda", sys.rank());
    const Rational eps = p_rat(ctx.params["theorem"], "eps", Rational(1, 10));
    for (const auto& es : section(t, "ergodic_sets"))
      rc.expect(orbit_saturation(sys, set, lam, ergodic_set_from(es)).measure > 1 - eps,
                "theorem direction does not expand");
  }
}

void recheck_spectral_kronecker(const Context& ctx, const KroneckerSystem& sys, const Json& result, Recheck& rc) {
  const BoxSet set = box_set_from(sys.torus_dim(), section(ctx.config, "set"));
  const bool normalized = result.value("normalized", false);
  const auto raw = spectral_measure_kronecker(sys, set, p_size(ctx.params, "K", 64));
  const auto sigma = normalized ? raw.normalized() : raw;
  const double want = normalized ? 1 / set.measure().get_d() : set.measure().get_d();
  rc.expect(sigma.total_mass().contains(want), "total mass enclosure misses mu(B)");
  rc.expect(to_json(sigma.total_mass()) == section(result, "total_mass"), "total mass does not recompute");
  for (const auto& m : section(result, "annihilator_masses")) {
    const LatVec lam = vec_from(section(m, "lambda"), "lambda", sys.rank());
    rc.expect(to_json(sigma.annihilator_mass(lam)) == section(m, "annihilator_mass"),
              "annihilator mass at (" + str(lam) + ") does not recompute");
  }
}

void recheck_spectral(const Context& ctx, const SystemSpec& spec, const Json& result, Recheck& rc) {
  if (!spec.finite) return recheck_spectral_kronecker(ctx, *spec.kronecker, result, rc);
  const auto& sys = *spec.finite;
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  const Rational mu = measure(sys, set);
  const bool normalized = result.value("normalized", false);
  const Rational scale = normalized ? Rational(1 / (mu * mu)) : Rational(1);
  rc.expect(rational_from(section(result, "trivial_weight"), "trivial_weight") == mu * mu * scale,
            "trivial weight does not recompute");
  rc.expect(rational_from(section(result, "total_mass"), "total_mass") == mu * scale, "total mass does not recompute");
  std::vector<LatVec> lambdas;
  for (const auto& m : section(result, "annihilator_masses")) {
    const LatVec lam = vec_from(section(m, "lambda"), "lambda", sys.rank());
    rc.expect(rational_from(section(m, "annihilator_mass"), "annihilator_mass") ==
                  coset_annihilator_mass(sys, set, lam) * scale,
              "annihilator mass at (" + str(lam) + ") does not recompute");
    lambdas.push_back(lam);
  }
  const auto sigma = normalized ? spectral_measure(sys, set).normalized() : spectral_measure(sys, set);
  rc.expect(verify_bochner(sigma, lambdas).ok, "Bochner identity fails on recheck");
}

void recheck_decompose(const Context& ctx, const SystemSpec& spec, const Json& result, Recheck& rc) {
  const auto& sys = require_finite(spec, "decompose");
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  const auto shrink = shrink_from(sys, section(result, "shrink"));
  const Rational eps_o = rational_from(section(result, "eps_o"), "eps_o");
  const auto chk = verify_shrink(sys, set, eps_o, shrink, p_size(ctx.params, "samples", 100), ctx.seed);
  rc.expect(chk.ok(), chk.ok() ? "" : "shrink conclusions: " + chk.failures.front());
}

void recheck_intersect(const Context& ctx, const SystemSpec& spec, const Json& result, Recheck& rc) {
  const auto& sys = require_finite(spec, "intersect");
  const FiniteSet set = finite_set_from(sys, section(ctx.config, "set"), ctx.seed);
  const Int n = int_from(section(result, "n"), "n"), m1 = int_from(section(result, "m1"), "m1");
  const LatVec lam = vec_from(section(result, "lambda"), "lambda", sys.rank());
  for (const auto& wj : section(result, "witnesses")) {
    IntersectionWitness w;
    w.probe = vecs_from(section(wj, "probe"), "probe", sys.rank());
    for (const auto& m : section(wj, "m")) w.m.push_back(int_from(m, "m"));
    const Rational reported = rational_from(section(wj, "measure"), "measure");
    const Rational exact = intersection_measure(sys, set, n, lam, m1, w);
    rc.expect(exact == reported && exact > 0, "intersection measure does not recompute");
  }
}

void recheck_haystack(const Json& result, Recheck& rc) {
  const std::size_t rank = to_u64(int_from(section(result, "rank"), "rank"), "rank");
  const auto sample = vecs_from(section(result, "sample"), "sample", rank);
  const auto v = verify_haystack_sample(sample, rank);
  rc.expect(v.ok == section(result, "ok").get<bool>(), "haystack verdict does not recompute");
}

void recheck_density(const Context& ctx, const Json& result, Recheck& rc) {
  const PointGenerator gen = generator_from(section(ctx.config, "points"), ctx.seed);
  for (const auto& row : section(result, "densities")) {
    const std::int64_t w = section(row, "window").get<std::int64_t>();
    const std::vector<std::int64_t> one{w};
    rc.expect(upper_density_estimate(gen, one).densities.front() == rational_from(section(row, "density"), "density"),
              "density at window " + std::to_string(w) + " does not recompute");
  }
}

}  // namespace

RunOutcome verify_report(const Json& report, const RunOptions& options) {
  if (!report.is_object() || !report.contains("experiment") || !report.contains("config") || !report.contains("result"))
    bad("report: expected a latspec report with experiment, config and result");
  const std::string kind = report["experiment"].get<std::string>();
  const Json& config = report["config"];
  check_header(kind, config);
  RunOptions opts = options;
  if (report.contains("seed")) opts.seed = to_u64(int_from(report["seed"], "seed"), "seed");
  const std::uint64_t seed = effective_seed(config, opts);
  const Context ctx{config, params_of(config), seed, std::max(1u, opts.threads)};
  const Json& result = report["result"];

  Recheck rc;
  try {
    if (kind == "volume-spectrum") recheck_volume(ctx, result, rc);
    else if (kind == "pattern-search") recheck_pattern(ctx, result, rc);
    else if (kind == "haystack-verify") recheck_haystack(result, rc);
    else if (kind == "density") recheck_density(ctx, result, rc);
    else {
      const SystemSpec spec = system_from(section(config, "system"));
      if (kind == "expand-scan") recheck_expand(ctx, spec, result, rc);
      else if (kind == "spectral-report") recheck_spectral(ctx, spec, result, rc);
      else if (kind == "decompose") recheck_decompose(ctx, spec, result, rc);
      else if (kind == "intersect") recheck_intersect(ctx, spec, result, rc);
      else bad("unknown experiment '" + kind + "'");
    }
  } catch (const Error& e) {
    bad(e.what());
  } catch (const HardFailure& e) {
    rc.failures.push_back(e.what());
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("report: ") + e.what());
  }

  RunOutcome out;
  Json& r = out.report;
  r["schema"] = kSchemaVersion;
  r["tool"] = "latspec";
  r["version"] = kVersion;
  r["experiment"] = "verify-only";
  r["verified_experiment"] = kind;
  r["checked"] = rc.checked;
  const std::string status = rc.failures.empty() ? "pass" : "fail";
  r["verdict"] = verdict_json(status, std::to_string(rc.checked) + " witness checks", rc.failures);
  out.exit_code = rc.failures.empty() ? 0 : 1;
  return out;
}

}  // namespace latspec::cli
