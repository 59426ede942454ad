#include "kkcheck/report.hpp"

#include "kkcheck/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <fstream>
#include <iostream>
#include <charconv>

namespace kkcheck {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<Check> run_named(const std::string& suite, const SuiteConfig& cfg) {
  if (suite == "lie") return lie_checks(cfg.group, cfg.seed, cfg.samples);
  if (suite == "forms") return forms_checks(cfg.group, cfg.seed, cfg.samples);
  if (suite == "geometry") return geometry_checks(cfg.group, cfg.seed, cfg.samples);
  if (suite == "fibration") return fibration_checks(cfg.group, cfg.seed, cfg.samples);
  return variational_checks(cfg.group, cfg.seed, cfg.samples);
}

// shortest round-trip form
std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool CheckReport::all_pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"lie", "forms", "geometry", "fibration", "variational", "all"};
  return names;
}

const char* engine_version() { return KKCHECK_VERSION; }

CheckReport run_suite(const SuiteConfig& cfg) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) throw InputError("unknown suite: " + cfg.suite);
  if (!is_group_tag(cfg.group)) throw InputError("unknown group: " + cfg.group);
  if (cfg.samples <= 0) throw InputError("samples must be positive");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw InputError("tol must be positive");

  const auto start = std::chrono::steady_clock::now();
  CheckReport r{cfg.suite, cfg.group, cfg.seed, {}, 0, engine_version()};
  for (const auto& s : names) {
    if (s == "all" || (cfg.suite != "all" && s != cfg.suite)) continue;
    auto part = run_named(s, cfg);
    r.checks.insert(r.checks.end(), part.begin(), part.end());
  }
  if (cfg.tol)
    for (auto& c : r.checks)
      if (!c.fixed_tolerance) {
        c.tolerance = *cfg.tol;
        c.pass = c.max_residual <= c.tolerance;
      }
  r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string to_json(const CheckReport& r) {
  ordered_json j;
  j["suite"] = r.suite;
  j["group"] = r.group;
  j["seed"] = r.seed;
  j["checks"] = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json e = ordered_json::object();
    for (const auto& [k, v] : c.extra) e[k] = v;
    j["checks"].push_back(ordered_json{{"name", c.name},
                                       {"max_residual", c.max_residual},
                                       {"tolerance", c.tolerance},
                                       {"pass", c.pass},
                                       {"extra", e}});
  }
  j["wall_ms"] = r.wall_ms;
  j["version"] = r.version;
  return j.dump(2) + "\n";
}

std::string to_csv(const CheckReport& r) {
  std::string s = "name,max_residual,tolerance,pass\n";
  for (const auto& c : r.checks)
    s += c.name + "," + number(c.max_residual) + "," + number(c.tolerance) + "," + (c.pass ? "true" : "false") + "\n";
  return s;
}

CheckReport from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  CheckReport r;
  r.suite = j.at("suite").get<std::string>();
  r.group = j.at("group").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("checks")) {
    Check c;
    c.name = e.at("name").get<std::string>();
    // non-finite residuals serialize as null
    c.max_residual = e.at("max_residual").is_null() ? std::nan("") : e.at("max_residual").get<double>();
    c.tolerance = e.at("tolerance").get<double>();
    c.pass = e.at("pass").get<bool>();
    for (const auto& [k, v] : e.at("extra").items()) c.extra.emplace_back(k, v.is_null() ? std::nan("") : v.get<double>());
    r.checks.push_back(std::move(c));
  }
  r.wall_ms = j.at("wall_ms").get<std::int64_t>();
  r.version = j.at("version").get<std::string>();
  return r;
}

void emit_report(const CheckReport& r, const std::string& path, ReportFormat format) {
  const std::string text = format == ReportFormat::json ? to_json(r) : to_csv(r);
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw std::ios_base::failure("cannot write to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  f << text;
  f.close();
  if (!f) throw std::ios_base::failure("cannot write " + path);
}

}  // namespace kkcheck
