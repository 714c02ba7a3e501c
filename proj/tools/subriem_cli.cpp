#include "subriem/workflows.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace subriem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out);
  if (!os) throw UsageError("cannot write '" + out + "'");
  os << j.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write '" + path + "'");
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Riemannian curvature, diffusion and gradient-bound toolkit"};
  app.require_subcommand(1);
  std::string out;
  app.add_option("--out", out, "write the JSON report here instead of stdout");

  std::string spec_path;
  auto* inspect = app.add_subcommand("inspect", "structure checks and condition report");
  inspect->add_option("spec", spec_path, "group spec file")->required();

  std::size_t trials = 20;
  int degree = 4;
  std::uint64_t seed = 1;
  std::string connection;
  auto* identities = app.add_subcommand("identities", "exact operator identities on random polynomials");
  identities->add_option("spec", spec_path)->required();
  identities->add_option("--trials", trials);
  identities->add_option("--degree", degree);
  identities->add_option("--seed", seed);
  identities->add_option("--connection", connection, "canonical | bott | levi-civita | flat");

  std::string fexpr = "sin(x)+atan(z)";
  std::vector<double> x, v;
  double t = 0.5, step = 1.0 / 256;
  std::size_t paths = 200000;
  unsigned threads = 0;
  std::string csv;
  auto* simulate = app.add_subcommand("simulate", "semigroup and gradient estimates");
  simulate->add_option("spec", spec_path)->required();
  simulate->add_option("--f", fexpr);
  simulate->add_option("--x", x)->delimiter(',');
  simulate->add_option("--v", v)->delimiter(',');
  simulate->add_option("--t", t);
  simulate->add_option("--step", step);
  simulate->add_option("--paths", paths);
  simulate->add_option("--seed", seed);
  simulate->add_option("--threads", threads);

  std::vector<double> ps{2.0};
  auto* bounds = app.add_subcommand("bounds", "Carnot gradient-bound constants");
  bounds->add_option("spec", spec_path)->required();
  bounds->add_option("--p", ps)->delimiter(',');
  bounds->add_option("--paths", paths);
  bounds->add_option("--step", step);
  bounds->add_option("--seed", seed);
  bounds->add_option("--threads", threads);
  bounds->add_option("--csv", csv, "constants table");

  std::vector<double> cs{-2, -1, -0.5, 0, 0.5, 1, 2};
  std::string profile = "arctan";
  auto* counter = app.add_subcommand("counterexample", "warped SU(2) x SU(2) x R Ricci table");
  counter->add_option("--c", cs)->delimiter(',');
  counter->add_option("--profile", profile);
  counter->add_option("--csv", csv, "table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    WorkflowResult r;
    if (*counter) {
      std::string table;
      r = run_counterexample(cs, profile, &table);
      write_text(csv, table);
    } else {
      std::string text = read_file(spec_path);
      GroupSpec spec = parse_spec(text);
      if (*inspect) {
        r = run_inspect(spec, text);
      } else if (*identities) {
        r = run_identities(spec, text, trials, degree, seed, connection);
      } else if (*simulate) {
        r = run_simulate(spec, text, fexpr, x, t, v, paths, step, seed, threads);
      } else {
        std::string table;
        r = run_bounds(spec, text, ps, paths, step, seed, &table, threads);
        write_text(csv, table);
      }
    }
    emit(r.report, out);
    return r.pass ? 0 : 1;
  } catch (const SpecParseError& e) {
    std::cerr << spec_path << ": " << e.what() << "\n";
    return 2;
  } catch (const ExprError& e) {
    std::cerr << "expression: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedStep& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionViolated& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return 2;
  }
}
