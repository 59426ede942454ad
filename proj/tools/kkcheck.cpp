#include "kkcheck/errors.hpp"
#include "kkcheck/report.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, consistency = 3, io = 4 };

}

int main(int argc, char** argv) {
  using namespace kkcheck;
  CLI::App app{"Numerical Cartan-calculus checks for Kaluza-Klein variational models", "kkcheck"};
  app.require_subcommand(1);
  SuiteConfig cfg;
  double tol = 0.0;
  std::string format = "json";
  auto* suite = app.add_subcommand("suite", "run a verification suite and emit a report");
  suite->add_option("name", cfg.suite, "lie | forms | geometry | fibration | variational | all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  suite->add_option("--group", cfg.group, "u1 | su2 | product (u(1)+su(2))")
      ->check(CLI::IsMember({"u1", "su2", "product"}));
  suite->add_option("--seed", cfg.seed, "64-bit seed");
  auto* tol_opt = suite->add_option("--tol", tol, "override every per-check tolerance")->check(CLI::PositiveNumber);
  suite->add_option("--samples", cfg.samples, "random instances per check (capped for expensive checks)")
      ->check(CLI::PositiveNumber);
  suite->add_option("--out", cfg.out, "output path (default stdout)");
  suite->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }
  if (*tol_opt) cfg.tol = tol;
  cfg.format = format == "csv" ? ReportFormat::csv : ReportFormat::json;

  CheckReport report;
  try {
    report = run_suite(cfg);
  } catch (const InputError& e) {
    std::cerr << "kkcheck: " << e.what() << "\n";
    return usage;
  } catch (const ConsistencyError& e) {
    std::cerr << "kkcheck: internal consistency check failed: " << e.what() << "\n";
    return consistency;
  } catch (const std::exception& e) {
    std::cerr << "kkcheck: " << e.what() << "\n";
    return consistency;
  }
  try {
    emit_report(report, cfg.out, cfg.format);
  } catch (const std::exception& e) {
    std::cerr << "kkcheck: " << e.what() << "\n";
    return io;
  }
  int passed = 0;
  for (const auto& c : report.checks) {
    passed += c.pass ? 1 : 0;
    if (!c.pass) std::cerr << "FAIL " << c.name << " residual " << c.max_residual << " > " << c.tolerance << "\n";
  }
  std::cerr << passed << "/" << report.checks.size() << " checks pass\n";
  return report.all_pass() ? ok : failed;
}
