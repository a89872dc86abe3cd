#pragma once

#include "latspec/formal_real.hpp"
#include "latspec/haystack.hpp"
#include "latspec/spectral.hpp"
#include "latspec/systems.hpp"
#include "latspec/volume.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace latspec::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Serialization

Json to_json(const Int& v);
Json to_json(const Rational& q);  // {"num": "...", "den": "..."}
Json to_json(const LatVec& v);    // array of decimal strings
Json to_json(const Weight& w);    // exact rational, or {"lower", "upper", "exact": false}

Int int_from(const Json& j, const std::string& where);
/// Accepts integers, "p/q" strings and {"num", "den"} objects.
Rational rational_from(const Json& j, const std::string& where);
LatVec vec_from(const Json& j, const std::string& where, std::optional<std::size_t> rank = std::nullopt);
IntMatrix matrix_from(const Json& rows, const std::string& where);

// ---------------------------------------------------------------------------
// Descriptors

struct SystemSpec {
  std::optional<FiniteSystem> finite;
  std::optional<KroneckerSystem> kronecker;
  std::size_t rank() const { return finite ? finite->rank() : kronecker->rank(); }
};

SystemSpec system_from(const Json& j);
FiniteSet finite_set_from(const FiniteSystem& sys, const Json& j, std::uint64_t seed);
BoxSet box_set_from(std::size_t dim, const Json& j);
PointGenerator generator_from(const Json& j, std::uint64_t seed);
ErgodicSetSpec ergodic_set_from(const Json& j);
std::vector<LatVec> haystack_from(const Json& j, std::size_t rank);

// ---------------------------------------------------------------------------
// Runner

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunOutcome {
  int exit_code = 0;
  Json report;
  Table table;
};

/// Subcommand names in documentation order.
const std::vector<std::string>& experiment_kinds();

/// Runs one experiment. Throws ConfigError for malformed configs.
RunOutcome run_experiment(const std::string& kind, const Json& config, const RunOptions& options = {});

/// Rechecks every witness of an existing report against its echoed config.
RunOutcome verify_report(const Json& report, const RunOptions& options = {});

/// The report without its "timing" member.
Json report_body(const Json& report);

std::string to_csv(const Table& table);

}  // namespace latspec::cli
