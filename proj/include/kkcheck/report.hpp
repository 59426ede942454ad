#pragma once

#include "kkcheck/checks.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kkcheck {

enum class ReportFormat { json, csv };

struct SuiteConfig {
  std::string suite = "all";  // lie | forms | geometry | fibration | variational | all
  std::string group = "su2";
  std::uint64_t seed = 0;
  std::optional<double> tol;  // unset: per-check defaults
  int samples = 100;
  std::string out;            // empty: stdout
  ReportFormat format = ReportFormat::json;
};

struct CheckReport {
  std::string suite;
  std::string group;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::int64_t wall_ms = 0;
  std::string version;

  bool all_pass() const;
};

const std::vector<std::string>& suite_names();
const char* engine_version();

/// InputError on an invalid config. ConsistencyError propagates from the suites.
CheckReport run_suite(const SuiteConfig& cfg);

std::string to_json(const CheckReport& r);
std::string to_csv(const CheckReport& r);
CheckReport from_json(const std::string& text);

/// Writes to cfg-style path ("" or "-" = stdout). Throws std::ios_base::failure on I/O errors.
void emit_report(const CheckReport& r, const std::string& path, ReportFormat format);

}  // namespace kkcheck
