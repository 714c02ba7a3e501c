#pragma once

#include "subriem/bounds.hpp"
#include "subriem/curvature.hpp"
#include "subriem/diffusion.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <string>

namespace subriem {

inline constexpr const char* tool_version = "0.3.0";

using Json = nlohmann::ordered_json;

/// Non-finite values become strings so reports stay valid JSON.
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct RunManifest {
  std::string command;
  std::uint64_t spec_hash = 0;
  std::uint64_t seed = 0;
  Json settings = Json::object();
  std::string timestamp;
};

inline Json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"spec_hash", hex64(m.spec_hash)},
          {"seed", m.seed},
          {"settings", m.settings},
          {"tool_version", tool_version},
          {"timestamp", m.timestamp}};
}

inline Json to_json(const ConditionReport& r) {
  return {{"II_residual", number(r.ii_residual)},
          {"C_residual", number(r.c_residual)},
          {"deltaC_residual", number(r.deltaC_residual)},
          {"cocurvature_norm", number(r.cocurvature_norm)},
          {"ric_antisymmetric_norm", number(r.ric_a_norm)},
          {"min_ric_horizontal", number(r.min_ric_h)},
          {"min_ric_full", number(r.min_ric_full)},
          {"K", number(r.K)},
          {"yang_mills", r.yang_mills},
          {"psi_available", r.psi_available},
          {"psi_vanishes_on_h", r.psi_h_zero},
          {"psi_norm", number(r.psi_norm)},
          {"canonical_defined", r.canonical_defined},
          {"condition_A", r.condition_A()},
          {"condition_B", r.condition_B()},
          {"condition_C", r.condition_C()},
          {"grid_points", r.grid_points},
          {"tolerance", r.tolerance}};
}

inline Json to_json(const EstimateWithError& e) {
  return {{"value", number(e.value)}, {"stderr", number(e.stderr_)}, {"n_paths", e.n_paths}};
}

inline Json to_json(const BoundCheck& b) {
  return {{"lhs", number(b.lhs)},   {"lhs_stderr", number(b.lhs_stderr)}, {"rhs", number(b.rhs)},
          {"rhs_stderr", number(b.rhs_stderr)}, {"constant", number(b.constant)}, {"pass", b.pass}};
}

inline Json to_json(const SupNormCheck& s) {
  return {{"max_grad", number(s.max_grad)},
          {"max_grad_stderr", number(s.max_grad_stderr)},
          {"df_sup", number(s.df_sup)},
          {"bound", number(s.bound)},
          {"pass", s.pass}};
}

inline Json to_json(const CpEstimate& c) {
  return {{"p", number(c.p)},           {"q", number(c.q)},
          {"C_p", number(c.value)},     {"stderr", number(c.stderr_)},
          {"moment", number(c.moment)}, {"moment_stderr", number(c.moment_stderr)},
          {"top_share", number(c.top_share)}, {"certified", c.certified},
          {"min_theta", number(c.min_theta)}};
}

inline Json to_json(const C2Bound& c) {
  return {{"n", c.n},
          {"Q", c.Q},
          {"cov", number(c.cov)},
          {"cov_stderr", number(c.cov_stderr)},
          {"radicand", number(c.radicand)},
          {"bound", number(c.value)},
          {"bound_stderr", number(c.stderr_)},
          {"pi2_mean", number(c.pi2_mean)},
          {"pi2_stderr", number(c.pi2_stderr)},
          {"consistent", c.consistent}};
}

inline Json to_json(const MomentDiagnostics& d) {
  return {{"n", d.n},
          {"q", d.q},
          {"mc", number(d.mc)},
          {"mc_stderr", number(d.mc_stderr)},
          {"gaussian_moment", number(d.gaussian)},
          {"printed_prefactor_value", number(d.printed)},
          {"fisher", number(d.fisher)},
          {"fisher_stderr", number(d.fisher_stderr)},
          {"Q", d.Q}};
}

inline Json to_json(const CounterexampleRow& r) {
  Json computed = Json::array(), printed = Json::array();
  for (int i = 0; i < 5; ++i) {
    computed.push_back(number(r.computed[i]));
    printed.push_back(number(r.printed[i]));
  }
  return {{"c", r.c},
          {"computed", computed},
          {"printed", printed},
          {"max_deviation", number(r.max_deviation())},
          {"off_diagonal", number(r.off_diagonal)}};
}

}  // namespace subriem
