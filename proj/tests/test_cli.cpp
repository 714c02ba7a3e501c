#include "subriem/spec_file.hpp"
#include "subriem/workflows.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace subriem;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path data(const std::string& name) { return fs::path(SUBRIEM_DATA_DIR) / "specs" / name; }

class Scratch {
 public:
  Scratch() {
    dir_ = fs::temp_directory_path() / ("subriem_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path write(const std::string& name, const std::string& text) const {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

int run(const std::string& args) {
  std::string cmd = std::string(SUBRIEM_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* heisenberg_text = "name h\n[algebra]\ndim 3\nbracket 1 2 3 1\n[stratification]\nlayer 1 2\nlayer 3\n";

}  // namespace

TEST(Spec, ShippedSpecsParseAndRoundTrip) {
  for (auto name : {"abelian.spec", "heisenberg.spec", "engel.spec", "counterexample.spec"}) {
    auto spec = parse_spec(read(data(name)));
    EXPECT_EQ(parse_spec(serialize_spec(spec)), spec) << name;
  }
  auto e = parse_spec(read(data("engel.spec")));
  EXPECT_EQ(e.dim, 4u);
  ASSERT_EQ(e.brackets.size(), 2u);
  EXPECT_EQ(e.brackets[1], (SpecBracket{0, 2, 3, Rational(1)}));
  ASSERT_TRUE(e.layers.has_value());
  EXPECT_EQ(e.layers->size(), 3u);
  auto c = parse_spec(read(data("counterexample.spec")));
  EXPECT_FALSE(c.has_algebra());
  ASSERT_TRUE(c.frame.has_value());
  EXPECT_EQ(c.frame->profile, "arctan");
  EXPECT_EQ(c.frame->c_grid.size(), 7u);
}

TEST(Spec, DefaultsAndRationals) {
  auto s = parse_spec(heisenberg_text);
  EXPECT_EQ(s.basis, (std::vector<std::string>{"e1", "e2", "e3"}));
  EXPECT_EQ(s.horizontal, (std::vector<std::size_t>{0, 1}));
  auto r = parse_spec("[algebra]\ndim 2\nbracket 1 2 2 -3/4\n[metric]\nhorizontal 1\n");
  EXPECT_EQ(r.brackets[0].value, Rational(-3, 4));
}

TEST(Spec, ErrorsCarryLineAndColumn) {
  auto expect_at = [](const std::string& text, std::size_t line, std::size_t column) {
    try {
      parse_spec(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const SpecParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
      EXPECT_EQ(e.column(), column) << e.what();
    }
  };
  expect_at("[algebra]\ndim 3\nbracket 1 2 9 1\n", 3, 13);
  expect_at("[algebra]\ndim x\n", 2, 5);
  expect_at("[algebra]\nbracket 1 2 3 1\n", 2, 1);
  expect_at("[algbra]\n", 1, 2);
  expect_at("[algebra]\ndim 2\nbracket 1 1 2 1\n", 3, 11);
  expect_at("[frame]\nkind warped_su2\nprofile cubic\n", 3, 9);
  expect_at("[algebra]\ndim 2\nfoo 1\n", 3, 1);
  expect_at("", 1, 1);
}

TEST(Spec, HashIsFnv1a) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Workflows, InspectShippedSpecs) {
  for (auto name : {"abelian.spec", "heisenberg.spec", "engel.spec", "counterexample.spec"}) {
    auto text = read(data(name));
    auto r = run_inspect(parse_spec(text), text);
    EXPECT_TRUE(r.pass) << name;
    EXPECT_EQ(r.report["manifest"]["command"], "inspect");
  }
  auto text = read(data("heisenberg.spec"));
  auto r = run_inspect(parse_spec(text), text);
  EXPECT_EQ(r.report["results"]["stratification"]["Q"], 4);
  EXPECT_EQ(r.report["results"]["algebra"]["nilpotency_step"], 2);
}

TEST(Workflows, InspectReportsJacobiViolations) {
  std::string text = "[algebra]\ndim 3\nbracket 1 2 3 1\nbracket 2 3 1 1\nbracket 1 3 1 1\n[metric]\nhorizontal 1 2\n";
  auto r = run_inspect(parse_spec(text), text);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.report["results"]["algebra"]["violations"].empty());
}

TEST(Workflows, SimulateIsDeterministic) {
  auto text = read(data("heisenberg.spec"));
  auto spec = parse_spec(text);
  auto a = run_simulate(spec, text, "sin(x)+atan(z)", {0.1, 0.2, 0.3}, 0.5, {1, 0, 0}, 3000, 1.0 / 64, 7, 1);
  auto b = run_simulate(spec, text, "sin(x)+atan(z)", {0.1, 0.2, 0.3}, 0.5, {1, 0, 0}, 3000, 1.0 / 64, 7, 4);
  EXPECT_EQ(a.report["results"].dump(), b.report["results"].dump());
  EXPECT_EQ(a.report["manifest"]["spec_hash"], hex64(fnv1a(text)));
  auto c = run_simulate(spec, text, "sin(x)+atan(z)", {0.1, 0.2, 0.3}, 0.5, {1, 0, 0}, 3000, 1.0 / 64, 8, 1);
  EXPECT_NE(a.report["results"].dump(), c.report["results"].dump());
}

TEST(Workflows, IdentitiesPassWithTheCanonicalConnectionOnly) {
  auto text = read(data("heisenberg.spec"));
  auto spec = parse_spec(text);
  EXPECT_TRUE(run_identities(spec, text, 3, 3, 1).pass);
  EXPECT_FALSE(run_identities(spec, text, 3, 3, 1, "levi-civita").pass);
  EXPECT_THROW(run_identities(spec, text, 3, 3, 1, "nonsense"), UsageError);
}

TEST(Cli, ExitCodes) {
  Scratch s;
  auto h = data("heisenberg.spec").string();
  EXPECT_EQ(run("inspect " + h), 0);
  EXPECT_EQ(run("identities " + h + " --trials 2 --degree 3"), 0);
  EXPECT_EQ(run("identities " + h + " --trials 2 --degree 3 --connection levi-civita"), 1);
  EXPECT_EQ(run("simulate " + h + " --paths 2000 --step 0.03125 --x 0.1,0.2,0.3"), 0);
  EXPECT_EQ(run("simulate " + h + " --paths 200 --f 'sin(x'"), 2);
  EXPECT_EQ(run("simulate " + h + " --paths 200 --x 1,2"), 2);
  EXPECT_EQ(run("inspect " + s.write("bad.spec", "[algebra]\ndim 3\nbracket 1 2 7 1\n").string()), 2);
  EXPECT_EQ(run("inspect " + s.path("missing.spec").string()), 2);
  EXPECT_EQ(run("bounds " + data("engel.spec").string() + " --paths 100"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, OutputFiles) {
  Scratch s;
  auto out = s.path("report.json"), csv = s.path("table.csv");
  EXPECT_EQ(run("--out " + out.string() + " counterexample --c 0,1 --csv " + csv.string()), 1);
  auto j = Json::parse(read(out));
  EXPECT_EQ(j["manifest"]["command"], "counterexample");
  EXPECT_EQ(j["results"]["rows"].size(), 2u);
  EXPECT_FALSE(j["pass"].get<bool>());
  auto table = read(csv);
  EXPECT_EQ(table.substr(0, 2), "c,");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
}
