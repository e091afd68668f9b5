// monosplit: run splitting solvers, certify their traces, benchmark suites.
//
//   monosplit solve   --config run.json [--out dir]
//   monosplit certify --trace dir/trace.jsonl --config run.json [--report out.json]
//   monosplit bench   [--suite suite.json] [--out bench.csv]
//
// --out defaults to $MONOSPLIT_OUT_DIR (or ./monosplit_out).

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "monosplit/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = monosplit::cli;

  CLI::App app{"Certificate-producing proximal splitting solvers"};
  app.require_subcommand(1);

  std::string config_path, out_dir, trace_path, report_path, suite_path, csv_path;

  auto* solve = app.add_subcommand("solve", "Run a solver and write trace.jsonl + summary.json");
  solve->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir, "Output directory");

  auto* certify = app.add_subcommand("certify", "Re-verify every step of a recorded trace");
  certify->add_option("--trace", trace_path, "Trace file (JSON lines)")->required()->check(CLI::ExistingFile);
  certify->add_option("--config", config_path, "Configuration the trace was produced with")
      ->required()
      ->check(CLI::ExistingFile);
  certify->add_option("--report", report_path, "Certification report path (default: <trace>.certify.json)");

  auto* bench = app.add_subcommand("bench", "Run a suite of configurations and write a CSV summary");
  bench->add_option("--suite", suite_path, "Suite file {\"runs\": [...]}; built-in suite if omitted")
      ->check(CLI::ExistingFile);
  bench->add_option("--out", csv_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::exit_code::config_error;
  }

  if (solve->parsed()) {
    return cli::cmd_solve(config_path, out_dir.empty() ? cli::default_out_dir() : out_dir);
  }
  if (certify->parsed()) return cli::cmd_certify(trace_path, config_path, report_path);
  if (bench->parsed()) {
    if (csv_path.empty()) csv_path = (std::filesystem::path(cli::default_out_dir()) / "bench.csv").string();
    return cli::cmd_bench(suite_path, csv_path);
  }
  return cli::exit_code::config_error;
}
