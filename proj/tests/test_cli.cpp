#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latspec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace latspec;
using namespace latspec::cli;

namespace {

Json load(const std::string& name) {
  std::ifstream in(std::string(LATSPEC_CONFIG_DIR) + "/" + name);
  REQUIRE(in);
  return Json::parse(in);
}

Json rat(const char* num, const char* den) { return Json{{"num", num}, {"den", den}}; }

Json klein_singleton() {
  return Json::parse(R"({
    "system": {"kind": "finite", "sublattice": [[2, 0], [0, 2]]},
    "set": {"points": [[0, 0]]},
    "params": {"radius": 6}
  })");
}

}  // namespace

TEST_CASE("expand-scan on the Klein singleton") {
  const auto out = run_experiment("expand-scan", klein_singleton());
  CHECK(out.exit_code == 0);
  const Json& r = out.report["result"];
  CHECK(r["max_expansion"] == rat("1", "2"));
  CHECK(r["verdict"] == "not directionally expandable within candidates");
  CHECK(r["candidates"] == 168);
  for (const auto& c : r["bound_checks"]) CHECK(c["holds"] == true);
  CHECK(out.report["verdict"]["status"] == "pass");
  CHECK(out.table.header.front() == "lambda");
  CHECK(out.table.rows.size() == 2 * 168);
}

TEST_CASE("volume-spectrum on a 2Z^2 window") {
  Json cfg = load("volume_spectrum_2z2.json");
  const auto out = run_experiment("volume-spectrum", cfg);
  CHECK(out.exit_code == 0);
  const Json& c = out.report["result"]["certificate"];
  CHECK(c["found"] == true);
  CHECK(c["n"] == "4");
  REQUIRE(c["witnesses"].size() == 5);
  for (std::size_t m = 0; m < 5; ++m) CHECK(c["witnesses"][m]["det"].get<std::string>().find(std::to_string(4 * (m + 1))) != std::string::npos);
  for (const auto& v : out.report["result"]["spectrum"]) CHECK(parse_int(v.get<std::string>()) % 4 == 0);

  cfg["params"]["terms"] = 400;
  const auto miss = run_experiment("volume-spectrum", cfg);
  CHECK(miss.exit_code == 1);
  CHECK(miss.report["result"]["certificate"]["found"] == false);
  CHECK(miss.report["verdict"]["status"] == "fail");
}

TEST_CASE("every shipped config runs, re-verifies and is deterministic") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(LATSPEC_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const Json cfg = load(entry.path().filename().string());
    const std::string kind = cfg["experiment"];
    CAPTURE(entry.path().filename().string());
    const auto a = run_experiment(kind, cfg);
    const auto b = run_experiment(kind, cfg, RunOptions{3, std::nullopt});
    CHECK(a.exit_code == 0);
    CHECK(report_body(a.report).dump() == report_body(b.report).dump());
    CHECK(a.report.contains("timing"));
    CHECK_FALSE(report_body(a.report).contains("timing"));
    const auto v = verify_report(Json::parse(a.report.dump()));
    CHECK(v.exit_code == 0);
    CHECK(v.report["checked"].get<std::size_t>() > 0);
    ++seen;
  }
  CHECK(seen == latspec::cli::experiment_kinds().size() + 2);
}

TEST_CASE("tampered witnesses fail re-verification") {
  {
    const auto out = run_experiment("volume-spectrum", load("volume_spectrum_2z2.json"));
    Json bad = Json::parse(out.report.dump());
    bad["result"]["certificate"]["witnesses"][2]["vertices"][1] = Json::array({"1", "0"});
    CHECK(verify_report(bad).exit_code == 1);
  }
  {
    const auto out = run_experiment("intersect", load("intersect_z5.json"));
    Json bad = Json::parse(out.report.dump());
    bad["result"]["witnesses"][0]["measure"] = rat("1", "1");
    CHECK(verify_report(bad).exit_code == 1);
  }
  {
    const auto out = run_experiment("decompose", load("decompose_random.json"));
    Json bad = Json::parse(out.report.dump());
    bad["result"]["shrink"]["c"] = rat("1", "2");
    CHECK(verify_report(bad).exit_code == 1);
  }
  {
    const auto out = run_experiment("pattern-search", load("pattern_search_3z2.json"));
    Json bad = Json::parse(out.report.dump());
    bad["result"]["witnesses"][0]["lambda_o"] = Json::array({"1", "1"});
    CHECK(verify_report(bad).exit_code == 1);
  }
  {
    const auto out = run_experiment("expand-scan", klein_singleton());
    Json bad = Json::parse(out.report.dump());
    bad["result"]["max_expansion"] = rat("3", "4");
    CHECK(verify_report(bad).exit_code == 1);
  }
}

TEST_CASE("failed verdicts exit 1") {
  const auto exhausted = run_experiment("pattern-search", Json::parse(R"({
    "points": {"kind": "explicit", "points": [[0, 0]]},
    "window": 3,
    "params": {"p": 2, "probes": [[[0, 1]]], "bounds": {"max_n": 2, "max_m1": 2, "max_mk": 2}}
  })"));
  CHECK(exhausted.exit_code == 1);
  CHECK(exhausted.report["result"]["status"] == "exhausted");

  const auto singular = run_experiment("haystack-verify", Json::parse(R"({
    "params": {"haystack": [[1, 0], [2, 1], [4, 2]]}
  })"));
  CHECK(singular.exit_code == 1);
  CHECK(singular.report["result"]["ok"] == false);
}

TEST_CASE("config errors") {
  const auto rejects = [](const std::string& kind, const char* text) {
    CAPTURE(text);
    CHECK_THROWS_AS(run_experiment(kind, Json::parse(text)), ConfigError);
  };
  rejects("expand-scan", R"({"schema": 2, "system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}})");
  rejects("expand-scan", R"({"experiment": "density", "system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}})");
  rejects("expand-scan", R"({"set": {"all": true}})");
  rejects("expand-scan", R"({"system": {"kind": "finite", "sublattice": [[2, 0]]}, "set": {"all": true}})");
  rejects("expand-scan", R"({"system": {"kind": "finite", "sublattice": [[0]]}, "set": {"all": true}})");
  rejects("expand-scan", R"({"system": {"kind": "torus"}, "set": {"all": true}})");
  rejects("expand-scan", R"({"system": {"kind": "finite", "sublattice": [[2]]}, "set": {"points": []}})");
  rejects("expand-scan", R"({"system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}, "params": {"radius": -1}})");
  rejects("decompose", R"({"system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}, "params": {"eps_o": "1/0"}})");
  rejects("decompose", R"({"system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}, "params": {"eps_o": "half"}})");
  rejects("density", R"({"points": {"kind": "random", "rank": 2, "density": "3/2"}, "params": {"windows": [3]}})");
  rejects("density", R"({"points": {"kind": "spiral"}, "window": 3})");
  rejects("spectral-report", R"({"system": {"kind": "kronecker", "rank": 1, "theta": [["alpha"]]}, "set": {"boxes": [{"lower": ["0"], "upper": ["1/2"]}]}})");
  rejects("spectral-report", R"({"system": {"kind": "kronecker", "rank": 1, "theta": [["0"]]}, "set": {"boxes": [{"lower": ["1/2"], "upper": ["1/4"]}]}})");
  rejects("intersect", R"({"system": {"kind": "finite", "sublattice": [[2]]}, "set": {"all": true}, "params": {"p": 1}})");
  rejects("pattern-search", R"({"points": {"kind": "full", "rank": 2}, "window": 3, "params": {"p": 3, "probes": [[[1, 0]]]}})");
  rejects("haystack-verify", R"({"params": {"haystack": {"multipliers": [2, 4], "count": 4}}})");
  rejects("haystack-verify", R"({"params": {}})");
  rejects("no-such-thing", R"({})");
  CHECK_THROWS_AS(run_experiment("density", Json::array()), ConfigError);
  CHECK_THROWS_AS(verify_report(Json::parse(R"({"experiment": "density"})")), ConfigError);
}

TEST_CASE("seed handling") {
  const Json cfg = load("density_random.json");
  const auto a = run_experiment("density", cfg);
  const auto b = run_experiment("density", cfg, RunOptions{1, 99});
  const auto c = run_experiment("density", cfg, RunOptions{1, 2024});
  CHECK(a.report["seed"] == 2024);
  CHECK(b.report["seed"] == 99);
  CHECK(report_body(a.report) == report_body(c.report));
  CHECK(a.report["result"] != b.report["result"]);
  // The override is what verification replays.
  CHECK(verify_report(Json::parse(b.report.dump())).exit_code == 0);

  Json big = cfg;
  big["seed"] = "18446744073709551615";
  CHECK(run_experiment("density", big).report["seed"] == 18446744073709551615ULL);
  big["seed"] = "18446744073709551616";
  CHECK_THROWS_AS(run_experiment("density", big), ConfigError);
}

TEST_CASE("rationals and integers round-trip exactly") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    Int num = from_int64(static_cast<std::int64_t>(rng() >> 1));
    for (int k = 0; k < static_cast<int>(rng() % 4); ++k) num *= from_int64(static_cast<std::int64_t>(rng() >> 2));
    if (rng() % 2) num = -num;
    Int den = from_int64(static_cast<std::int64_t>(rng() % 1000000007 + 1));
    Rational q(num, den);
    q.canonicalize();
    const Json j = Json::parse(to_json(q).dump());
    CHECK(rational_from(j, "q") == q);
    CHECK(int_from(Json::parse(to_json(num).dump()), "n") == num);
  }
  CHECK(rational_from(Json(7), "q") == 7);
  CHECK(rational_from(Json("-6/8"), "q") == Rational(-3, 4));
  CHECK(rational_from(rat("10", "-4"), "q") == Rational(-5, 2));
  CHECK_THROWS_AS(rational_from(Json(0.5), "q"), ConfigError);
  CHECK_THROWS_AS(rational_from(rat("1", "0"), "q"), ConfigError);
  CHECK(to_json(Weight::enclosure(0.25, 0.5)) == Json{{"lower", 0.25}, {"upper", 0.5}, {"exact", false}});
  CHECK(to_json(Weight::of(Rational(1, 3))) == rat("1", "3"));
}

TEST_CASE("descriptors") {
  const auto spec = system_from(Json::parse(R"({"kind": "finite", "moduli": [5], "images": [[1], [2]]})"));
  REQUIRE(spec.finite);
  CHECK(spec.rank() == 2);
  const auto set = finite_set_from(*spec.finite, Json::parse(R"({"elements": [[0], [1]], "points": [[1, 1]]})"), 0);
  CHECK(count(set) == 3);
  CHECK(set[spec.finite->phi(LatVec{1, 1})]);

  const auto rnd = finite_set_from(*spec.finite, Json::parse(R"({"random": {"density": "1/2"}})"), 5);
  CHECK(rnd == finite_set_from(*spec.finite, Json::parse(R"({"random": {"density": "1/2", "seed": 5}})"), 77));

  const auto gen = generator_from(Json::parse(R"({"kind": "translate", "shift": [1, 0],
      "child": {"kind": "union", "children": [{"kind": "congruence", "offset": [0, 0], "modulus": 3},
                                              {"kind": "explicit", "points": [[1, 1]]}]}})"), 0);
  CHECK(gen.contains(LatVec{1, 0}));
  CHECK(gen.contains(LatVec{2, 1}));
  CHECK_FALSE(gen.contains(LatVec{0, 0}));

  const auto es = ergodic_set_from(Json::parse(R"({"progression": {"offset": 2, "step": -1}})"));
  CHECK(es.is_ergodic());
  CHECK(es.member(3) == -1);

  const auto hay = haystack_from(Json::parse(R"({"multipliers": [2, 3], "count": 3, "scale": 2})"), 2);
  REQUIRE(hay.size() == 3);
  CHECK(hay[0] == LatVec{4, 6});

  const auto box = box_set_from(2, Json::parse(R"({"boxes": [{"lower": [0, "1/4"], "upper": ["1/2", {"num": "3", "den": "4"}]}]})"));
  CHECK(box.measure() == Rational(1, 4));
}

TEST_CASE("csv export") {
  Table t;
  t.header = {"a", "b"};
  t.rows = {{"1/2", "x,y"}, {"say \"hi\"", ""}};
  CHECK(to_csv(t) == "a,b\n1/2,\"x,y\"\n\"say \"\"hi\"\"\",\n");
}
