#include "latspec/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using latspec::cli::Json;

void log(const std::string& msg) { std::cerr << "latspec: " << msg << "\n"; }

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact experiments on lattices, finite systems and torus rotations"};
  app.set_version_flag("--version", latspec::cli::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  bool verify_only = false;
  app.add_option("--config", config_path, "Config JSON (with --verify-only: an existing report)")->required();
  app.add_option("--out", out_path, "Write the report here instead of standard output");
  app.add_option("--csv", csv_path, "Export the result table as CSV");
  app.add_option("--threads", threads, "Worker threads for library scans")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override the config seed");
  app.add_flag("--verify-only", verify_only, "Recheck the witnesses of an existing report");
  for (const auto& kind : latspec::cli::experiment_kinds()) app.add_subcommand(kind)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  Json input;
  {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      log("cannot read " + config_path);
      return 2;
    }
    try {
      input = Json::parse(in);
    } catch (const Json::parse_error& e) {
      log("malformed JSON in " + config_path + ": " + e.what());
      return 2;
    }
  }

  latspec::cli::RunOptions options;
  options.threads = threads;
  options.seed = seed;
  latspec::cli::RunOutcome outcome;
  try {
    if (verify_only) {
      if (input.value("experiment", std::string()) != kind) {
        log("report is not a " + kind + " report");
        return 2;
      }
      outcome = latspec::cli::verify_report(input, options);
    } else {
      outcome = latspec::cli::run_experiment(kind, input, options);
    }
  } catch (const latspec::cli::ConfigError& e) {
    log("config error: " + std::string(e.what()));
    return 2;
  } catch (const std::exception& e) {
    log("failure: " + std::string(e.what()));
    return 1;
  }

  const Json& verdict = outcome.report["verdict"];
  log(kind + ": " + verdict["status"].get<std::string>() + ", " + verdict["summary"].get<std::string>());
  for (const auto& f : verdict["failures"]) log("  " + f.get<std::string>());

  const std::string text = outcome.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else if (!write_text(out_path, text)) {
    log("cannot write " + out_path);
    return 1;
  }
  if (!csv_path.empty() && !verify_only && !write_text(csv_path, latspec::cli::to_csv(outcome.table))) {
    log("cannot write " + csv_path);
    return 1;
  }
  return outcome.exit_code;
}
