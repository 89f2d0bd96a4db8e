#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nklab/common.hpp"

namespace nklab {

struct McSummary {
  double mean = 0;
  double stderr_ = 0;
  double idet = 0;
  double ratio = 0;
  double sigmas = 0;       ///< |mean| / stderr
  std::string xi_spec;     ///< the xi this summary belongs to
  std::size_t samples = 0;
};

/// Machine-readable run report. `pass` holds iff every check is within its
/// tolerance. wall_time is kept out of the serialized report unless
/// `include_wall_time` is set, so identical (config, seed) runs serialize
/// bit-identically regardless of worker count.
struct Report {
  std::string command;
  bool pass = true;
  std::vector<Check> checks;
  std::optional<McSummary> mc;          // primary estimate
  std::vector<McSummary> mc_estimates;  // all estimates (obstruction runs)
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double wall_time = 0;
  bool include_wall_time = false;

  void add(Check c) {
    pass = pass && c.pass;
    checks.push_back(std::move(c));
  }

  /// Residual-style check: pass iff err <= tol.
  void add_residual(const std::string& name, double err, double tol, const std::string& anchor) {
    add({name, err, tol, anchor, err <= tol});
  }

  void merge(const SuiteReport& suite) {
    for (const auto& c : suite.checks) add(c);
  }
};

inline nlohmann::json to_json(const McSummary& m) {
  return {{"mean", m.mean},   {"stderr", m.stderr_}, {"idet", m.idet},       {"ratio", m.ratio},
          {"sigmas", m.sigmas}, {"xi", m.xi_spec},   {"samples", m.samples}};
}

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"max_abs_err", c.max_abs_err},
                      {"tolerance", c.tolerance},
                      {"anchor", c.anchor},
                      {"pass", c.pass}});
  nlohmann::json j{{"schema", 1},
                   {"command", r.command},
                   {"status", r.pass ? "pass" : "fail"},
                   {"checks", checks},
                   {"seed", r.seed},
                   {"samples", r.samples}};
  if (r.mc) j["mc"] = to_json(*r.mc);
  if (!r.mc_estimates.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : r.mc_estimates) arr.push_back(to_json(m));
    j["mc_estimates"] = arr;
  }
  if (r.include_wall_time) j["wall_time"] = r.wall_time;
  return j;
}

namespace detail_report {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail_report

/// CSV: for runs with Monte Carlo estimates one row per xi with the fixed
/// header below; otherwise one row per check.
inline std::string to_csv(const Report& r) {
  std::string out;
  if (!r.mc_estimates.empty()) {
    out = "xi,samples,seed,mean,stderr,idet,ratio\n";
    for (const auto& m : r.mc_estimates) {
      out += m.xi_spec + "," + std::to_string(m.samples) + "," + std::to_string(r.seed) + "," +
             detail_report::num(m.mean) + "," + detail_report::num(m.stderr_) + "," +
             detail_report::num(m.idet) + "," + detail_report::num(m.ratio) + "\n";
    }
    return out;
  }
  out = "name,max_abs_err,tolerance,anchor,status\n";
  for (const auto& c : r.checks) {
    std::string anchor = c.anchor;
    for (char& ch : anchor)
      if (ch == ',') ch = ';';
    out += c.name + "," + detail_report::num(c.max_abs_err) + "," +
           detail_report::num(c.tolerance) + "," + anchor + "," + (c.pass ? "pass" : "fail") + "\n";
  }
  return out;
}

}  // namespace nklab
