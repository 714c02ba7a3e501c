#pragma once

#include "subriem/bounds.hpp"
#include "subriem/connection.hpp"
#include "subriem/curvature.hpp"
#include "subriem/diffusion.hpp"
#include "subriem/expr.hpp"
#include "subriem/frame.hpp"
#include "subriem/heat_kernel.hpp"
#include "subriem/identities.hpp"
#include "subriem/report.hpp"
#include "subriem/spec_file.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace subriem {

/// Raised for inputs that cannot be run at all (maps to exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorkflowResult {
  Json report;
  bool pass = true;
};

inline RunManifest make_manifest(const std::string& command, const std::string& spec_text, std::uint64_t seed,
                                 Json settings) {
  return {command, fnv1a(spec_text), seed, std::move(settings), utc_timestamp()};
}

inline std::shared_ptr<const GroupModel> model_from_spec(const GroupSpec& spec) {
  if (!spec.has_algebra()) throw UsageError("spec has no [algebra] section");
  return std::make_shared<const GroupModel>(GroupModel::from_structure(build_structure(spec)));
}

inline WorkflowResult run_inspect(const GroupSpec& spec, const std::string& spec_text) {
  Json res;
  bool pass = true;
  res["name"] = spec.name;
  if (spec.has_algebra()) {
    auto srs = build_structure(spec);
    auto violations = validate_algebra(srs.algebra);
    Json v = Json::array();
    for (const auto& x : violations) v.push_back(x.to_string());
    res["algebra"] = {{"dim", spec.dim}, {"valid", violations.empty()}, {"violations", v},
                      {"nilpotency_step", srs.algebra.nilpotency_step()}};
    pass = pass && violations.empty();
    if (srs.strat) {
      auto sv = verify_stratification(srs.algebra, *srs.strat);
      Json s = Json::array();
      for (const auto& x : sv) s.push_back(x.to_string());
      res["stratification"] = {{"valid", sv.empty()}, {"violations", s}, {"Q", homogeneous_dimension(*srs.strat)}};
      pass = pass && sv.empty();
    }
    if (violations.empty()) {
      auto fp = frame_from_structure(srs);
      auto rep = conditions_report(std::vector<FramePoint<Rational>>{fp});
      res["conditions"] = to_json(rep);
      auto psi = psi_map(fp);
      Json pm = Json::array();
      for (std::size_t i = 0; i < psi.size(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < psi.size(); ++j) row.push_back(to_string(psi(i, j)));
        pm.push_back(row);
      }
      res["psi_frame"] = pm;
    }
  }
  if (spec.frame) {
    auto profile = profiles::by_name(spec.frame->profile);
    WarpedSu2Frame frame(profile);
    std::vector<FramePoint<double>> grid;
    std::vector<double> cs = spec.frame->c_grid.empty() ? std::vector<double>{0.0} : spec.frame->c_grid;
    double jac = 0;
    for (double c : cs) {
      grid.push_back(frame.at(c));
      jac = std::max(jac, frame_jacobi_residual(grid.back()));
    }
    auto rep = conditions_report(grid, 1e-10);
    res["frame"] = {{"kind", spec.frame->kind}, {"profile", spec.frame->profile}, {"c_grid", cs},
                    {"jacobi_residual", jac}, {"conditions", to_json(rep)},
                    {"II_zero", rep.ii_residual <= 1e-10}, {"C_zero", rep.c_residual <= 1e-10},
                    {"cocurvature_nonzero", rep.cocurvature_norm > 1e-10}};
  }
  return {{{"manifest", to_json(make_manifest("inspect", spec_text, 0, Json::object()))}, {"results", res}, {"pass", pass}},
          pass};
}

inline FrameConnection<Rational> named_connection(const FramePoint<Rational>& fp, const std::string& name) {
  if (name == "canonical") return canonical_connection(fp);
  if (name == "bott") return bott_connection(fp);
  if (name == "levi-civita") return levi_civita(fp);
  if (name == "flat") return flat_connection(fp);
  throw UsageError("unknown connection '" + name + "' (known: canonical, bott, levi-civita, flat)");
}

/// Exact residuals over random rational polynomials. An empty connection
/// name picks the canonical connection when it exists, else the Bott one.
inline WorkflowResult run_identities(const GroupSpec& spec, const std::string& spec_text, std::size_t trials, int degree,
                                     std::uint64_t seed, std::string connection = "") {
  auto srs = build_structure(spec);
  std::size_t st = srs.algebra.nilpotency_step();
  if (st == 0 || st > 4) throw UsageError("identities need a nilpotent algebra of step at most 4");
  Taming taming = srs.strat ? Taming::carnot : Taming::left_invariant;
  IdentityContext<Rational> ctx(srs, taming);
  if (connection.empty()) connection = max_abs(ii_tensor(ctx.fp)) == 0 ? "canonical" : "bott";
  auto conn = named_connection(ctx.fp, connection);
  std::mt19937_64 rng(seed);
  std::size_t n = srs.dim();
  double weitz = 0, mt = 0, comm = 0, dil = 0, hom = 0;
  std::size_t nonzero_weitz = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto f = random_polynomial<Rational>(n, degree, rng);
    double w = max_abs_coefficient(weitzenbock_residual(ctx, conn, f));
    if (w > 0) ++nonzero_weitz;
    weitz = std::max(weitz, w);
    mt = std::max(mt, max_abs_coefficient(metric_torsion_residual(ctx, conn, f)));
    comm = std::max(comm, commutation_residual(ctx.frame, f).max_abs_coefficient());
    if (srs.strat) {
      Rational s = Rational(3) / Rational(2);
      dil = std::max(dil, dilation_residual(ctx.frame, *srs.strat, f, s).max_abs_coefficient());
      hom = std::max(hom, max_abs_coefficient(homogeneity_residuals(srs.algebra, *srs.strat, f, s)));
    }
  }
  auto compat = check_compatible(ctx.fp, conn);
  Json res = {{"connection", connection},
              {"connection_compatible", compat.compatible(0)},
              {"trials", trials},
              {"degree", degree},
              {"taming", taming == Taming::carnot ? "carnot" : "left-invariant"},
              {"residuals",
               {{"weitzenbock", weitz},
                {"metric_torsion", mt},
                {"commutation", comm},
                {"dilation", srs.strat ? Json(dil) : Json(nullptr)},
                {"homogeneity", srs.strat ? Json(hom) : Json(nullptr)}}},
              {"weitzenbock_nonzero_trials", nonzero_weitz}};
  bool pass = weitz == 0 && mt == 0 && comm == 0 && dil == 0 && hom == 0;
  Json settings = {{"trials", trials}, {"degree", degree}, {"connection", connection}};
  return {{{"manifest", to_json(make_manifest("identities", spec_text, seed, settings))}, {"results", res}, {"pass", pass}},
          pass};
}

/// P_t f and every applicable gradient representation, with pairwise
/// agreement verdicts at 3 combined standard errors.
inline WorkflowResult run_simulate(const GroupSpec& spec, const std::string& spec_text, const std::string& fexpr,
                                   std::vector<double> x, double t, std::vector<double> v, std::size_t paths,
                                   double step, std::uint64_t seed, unsigned threads = 0) {
  auto model = model_from_spec(spec);
  std::size_t n = model->n;
  if (x.empty()) x.assign(n, 0.0);
  if (v.empty()) {
    v.assign(n, 0.0);
    v = model->to_std(model->frame_vector(0));
  }
  if (x.size() != n || v.size() != n) throw UsageError("--x and --v need " + std::to_string(n) + " coordinates");
  Expr f(fexpr, model->names);
  DiffusionOptions opt;
  opt.threads = threads;
  auto batch = simulate_paths(model, t, step, paths, seed, opt);
  Json reps = Json::object();
  std::vector<std::pair<std::string, EstimateWithError>> got;
  auto attempt = [&](const std::string& name, auto&& fn) {
    try {
      auto e = fn();
      got.push_back({name, e});
      reps[name] = to_json(e);
    } catch (const RepresentationInapplicable& ex) {
      reps[name] = {{"inapplicable", ex.what()}};
    }
  };
  attempt("carnot", [&] { return gradient_rep_carnot(f, batch, x, v); });
  attempt("polygrowth", [&] { return gradient_rep_polygrowth(f, batch, x, v); });
  attempt("adjoint", [&] { return gradient_rep_adjoint(f, batch, x, v); });
  attempt("finite_difference", [&] { return finite_difference_gradient(f, batch, x, v); });
  attempt("pathwise", [&] { return gradient_pathwise(f, batch, x, v); });
  Json pairs = Json::array();
  bool pass = true;
  for (std::size_t i = 0; i < got.size(); ++i)
    for (std::size_t j = i + 1; j < got.size(); ++j) {
      double diff = std::abs(got[i].second.value - got[j].second.value);
      double se = std::hypot(got[i].second.stderr_, got[j].second.stderr_);
      bool ok = diff <= 3 * se + 1e-9 * (1 + std::abs(got[i].second.value));
      pass = pass && ok;
      pairs.push_back({{"a", got[i].first}, {"b", got[j].first}, {"diff", diff}, {"combined_stderr", se}, {"agree", ok}});
    }
  auto ptf = estimate_Ptf(f, batch, x);
  Json res = {{"f", fexpr},
              {"x", x},
              {"v", v},
              {"Ptf", to_json(ptf)},
              {"gradient", reps},
              {"agreement", pairs},
              {"anti_development_residual", anti_development_residual(batch)},
              {"psi_vanishes_on_h", model->psi_h_zero},
              {"adjoint_available", model->adjoint_available}};
  Json settings = {{"t", t}, {"step", step}, {"paths", paths}, {"f", fexpr}, {"x", x}, {"v", v}};
  return {{{"manifest", to_json(make_manifest("simulate", spec_text, seed, settings))}, {"results", res}, {"pass", pass}},
          pass};
}

inline bool is_heisenberg(const GroupSpec& spec) {
  return spec.dim == 3 && spec.brackets.size() == 1 && spec.brackets[0].i == 0 && spec.brackets[0].j == 1 &&
         spec.brackets[0].k == 2 && spec.brackets[0].value == 1 && spec.horizontal == std::vector<std::size_t>{0, 1} &&
         !spec.gram_h && !spec.gram_full;
}

inline std::unique_ptr<HeatKernelProvider> provider_for(const GroupSpec& spec, const DiffusionBatch& x1) {
  if (is_heisenberg(spec)) return std::make_unique<HeisenbergHeatKernel>();
  if (spec.brackets.empty() && !spec.gram_h && !spec.gram_full) return std::make_unique<GaussianHeatKernel>(spec.dim);
  return std::make_unique<KdeHeatKernel>(x1);
}

/// Carnot constants plus the bound checks on the shipped test functions.
inline WorkflowResult run_bounds(const GroupSpec& spec, const std::string& spec_text, std::vector<double> ps,
                                 std::size_t paths, double step, std::uint64_t seed, std::string* csv = nullptr,
                                 unsigned threads = 0) {
  auto model = model_from_spec(spec);
  if (!model->strat) throw UsageError("bounds need a Carnot spec with a [stratification] section");
  if (!verify_stratification(model->alg, *model->strat).empty()) throw UsageError("stratification is invalid");
  if (!model->psi_h_zero) throw UsageError("bounds need psi to vanish on the first layer");
  if (ps.empty()) ps = {2.0};
  int Q = homogeneous_dimension(*model->strat);
  std::size_t n = model->nh;
  DiffusionOptions opt;
  opt.polygrowth = false;
  opt.adjoint = false;
  opt.threads = threads;
  auto x1 = simulate_paths(model, 1.0, step, paths, seed, opt);
  auto provider = provider_for(spec, x1);
  auto ks = kernel_samples(x1, *provider);
  Json constants = Json::array();
  std::map<double, double> cp_value;
  bool pass = true;
  std::ostringstream table;
  table << "p,q,C_p,stderr,bound,pass\n";
  auto c2 = c2_upper_bound(ks, n, Q);
  for (double p : ps) {
    auto e = estimate_Cp(ks, p);
    cp_value[p] = e.value;
    bool ok = e.value >= static_cast<double>(n) - 1e-12 && e.certified;
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (p == 2) {
      bound = c2.value;
      ok = ok && e.value <= c2.value + 3 * std::hypot(e.stderr_, c2.stderr_);
    }
    pass = pass && ok;
    Json j = to_json(e);
    j["pass"] = ok;
    constants.push_back(j);
    table << p << "," << e.q << "," << std::setprecision(10) << e.value << "," << e.stderr_ << "," << bound << ","
          << (ok ? "true" : "false") << "\n";
  }
  auto md = moment_diagnostics(ks, n, 2.0, Q);
  double c2_hat = estimate_Cp(ks, 2.0).value;
  Json checks = Json::array();
  std::vector<std::vector<double>> points = {std::vector<double>(model->n, 0.0)};
  {
    std::vector<double> other(model->n, 0.0);
    for (std::size_t i = 0; i < model->n; ++i) other[i] = 0.3 - 0.25 * static_cast<double>(i);
    points.push_back(other);
  }
  for (double t : {0.25, 0.5, 1.0}) {
    auto b = simulate_paths(model, t, std::min(step, t / 64), paths, seed + 1, opt);
    for (const auto& name : test_function_suite()) {
      std::optional<Expr> f;
      try {
        f.emplace(name, model->names);
      } catch (const ExprError&) {
        continue;
      }
      for (const auto& x : points) {
        auto g = gradient_bound_check(*f, b, x, 2.0, c2_hat);
        auto vb = variance_bound_check(*f, b, x, c2_hat);
        Json row = {{"f", name}, {"t", t}, {"x", x}, {"gradient_p2", to_json(g)}, {"variance", to_json(vb)}};
        pass = pass && g.pass && vb.pass;
        for (double p : ps)
          if (p > 2) {
            auto pb = part_b_bound_check(*f, b, x, p, Q);
            row[std::isinf(p) ? std::string("part_b_pinf") : "part_b_p" + std::to_string(static_cast<int>(p))] = to_json(pb);
            pass = pass && pb.pass;
          }
        checks.push_back(row);
      }
    }
  }
  Json partb = Json::array();
  for (double p : ps)
    if (p > 2) {
      double q = std::isinf(p) ? 2.0 : 1.0 / (0.5 - 1.0 / p);
      partb.push_back({{"p", number(p)}, {"q", q}, {"c_nq", c_nq(static_cast<double>(n), q)},
                       {"constant", static_cast<double>(n) + c_nq(static_cast<double>(n), q) * std::sqrt(Q)}});
    }
  Json res = {{"provider", provider->provenance()},
              {"Q", Q},
              {"n", n},
              {"constants", constants},
              {"c2_upper_bound", to_json(c2)},
              {"moments", to_json(md)},
              {"part_b_constants", partb},
              {"bound_checks", checks}};
  if (csv) *csv = table.str();
  Json settings = {{"p", ps}, {"paths", paths}, {"step", step}, {"t_suite", {0.25, 0.5, 1.0}}};
  return {{{"manifest", to_json(make_manifest("bounds", spec_text, seed, settings))}, {"results", res}, {"pass", pass}},
          pass};
}

inline WorkflowResult run_counterexample(const std::vector<double>& cs, const std::string& profile_name,
                                         std::string* csv = nullptr) {
  Profile profile;
  try {
    profile = profiles::by_name(profile_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Json rows = Json::array();
  std::ostringstream table;
  table << "c,ric_z1,ric_z2,ric_z3,ric_dc,ricg_a2a,printed_z1,printed_z2,printed_z3,printed_dc,printed_a2a,max_deviation\n";
  table << std::setprecision(12);
  double worst = 0;
  for (double c : cs) {
    auto row = counterexample_table(c, profile);
    worst = std::max(worst, row.max_deviation());
    rows.push_back(to_json(row));
    table << c;
    for (double v : row.computed) table << "," << v;
    for (double v : row.printed) table << "," << v;
    table << "," << row.max_deviation() << "\n";
  }
  bool pass = worst < 1e-9;
  if (csv) *csv = table.str();
  Json settings = {{"c", cs}, {"profile", profile_name}};
  return {{{"manifest", to_json(make_manifest("counterexample", profile_name, 0, settings))},
           {"results", {{"rows", rows}, {"max_deviation", worst}}},
           {"pass", pass}},
          pass};
}

}  // namespace subriem
