#include <doctest.h>

#include "twophase/csv.hpp"
#include "twophase/errors.hpp"
#include "twophase/fundamental_diagram.hpp"
#include "twophase/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace twophase;
namespace fs = std::filesystem;

namespace {

const char* kParams = "w_min = 1\nw_max = 2\nv_max = 0.8\n";

std::vector<std::string> errors_of(const std::string& text, std::optional<ScenarioKind> kind = std::nullopt) {
  try {
    parse_scenario(text, kind);
  } catch (const ScenarioError& e) {
    return e.messages();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& msgs, const std::string& needle) {
  for (const auto& m : msgs)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("twophase_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(TWOPHASE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parse_scenario: minimal Riemann scenario") {
  const Scenario sc = parse_scenario(std::string(kParams) + "kind = riemann\nleft = 0.9 1.0\nright = 0.8 1.5\n");
  CHECK(sc.kind == ScenarioKind::Riemann);
  const auto& r = std::get<RiemannPayload>(sc.payload);
  CHECK(r.left == TrafficState{0.9, 1.0});
  CHECK(r.right == TrafficState{0.8, 1.5});
  CHECK(sc.params.v_max == 0.8);
}

TEST_CASE("parse_scenario: hypothesis c is cited") {
  const auto errs = errors_of("w_min = 0.5\nw_max = 2\nv_max = 0.8\n", ScenarioKind::Validate);
  CHECK(any_contains(errs, "hypothesis c"));
}

TEST_CASE("parse_scenario: duplicate keys are named") {
  const auto errs = errors_of(std::string(kParams) + "v_max = 0.7\n", ScenarioKind::Validate);
  REQUIRE(errs.size() == 1);
  CHECK(any_contains(errs, "duplicate key 'v_max'"));
  CHECK(any_contains(errs, ":4:"));
}

TEST_CASE("parse_scenario: unknown, missing and malformed keys") {
  CHECK(any_contains(errors_of(std::string(kParams) + "colour = red\n", ScenarioKind::Validate), "unknown key 'colour'"));
  CHECK(any_contains(errors_of("w_min = 1\nw_max = 2\n", ScenarioKind::Validate), "missing required key 'v_max'"));
  CHECK(any_contains(errors_of("w_min = 1\nw_max = two\nv_max = 0.8\n", ScenarioKind::Validate), "malformed number"));
  CHECK(any_contains(errors_of(std::string(kParams) + "kind = riemann\nleft = 0.9\nright = 0.8 1.5\n"), "needs 2 numbers"));
  CHECK(any_contains(errors_of(std::string(kParams) + "kind = riemann\nleft = 0.9 3.0\nright = 0.8 1.5\n"), "outside"));
  CHECK(any_contains(errors_of(std::string(kParams) + "kind = nonsense\n"), "unknown kind"));
  CHECK(any_contains(errors_of(std::string(kParams) + "psi = no_such_table.csv\n", ScenarioKind::Validate), "does not exist"));
  CHECK(any_contains(errors_of("just words\n", ScenarioKind::Validate), "expected 'key = value'"));
  CHECK(any_contains(errors_of(std::string(kParams) + "kind = fd\n", ScenarioKind::Riemann), "does not match"));
}

TEST_CASE("parse_scenario: every problem is reported at once") {
  const auto errs = errors_of("w_min = 0.5\nw_max = 2\nv_max = 0.8\nkind = godunov\nN = x\nfoo = 1\n");
  CHECK(errs.size() >= 4);
}

TEST_CASE("parse_scenario: godunov, ftl, converge and fd payloads") {
  const Scenario g = parse_scenario(std::string(kParams) +
                                    "kind = godunov\ndomain = -1 1\nN = 50\nt_final = 0.2\n"
                                    "initial = -1 0.9 1.0; 0 0.8 1.5\nghost = periodic\ncfl = 0.9\n");
  const auto& gs = std::get<GodunovScenario>(g.payload);
  CHECK(gs.cells == 50);
  CHECK(gs.initial.size() == 2);
  CHECK(gs.ghost == GhostPolicy::Periodic);
  CHECK(gs.cfl == 0.9);

  const Scenario f = parse_scenario(std::string(kParams) +
                                    "kind = ftl\nT = 1\ndt = 0.01\ndatum = -0.5 0.5 1.2; 0.0\nL = 0.5\nn = 10\n");
  CHECK(std::get<FtlPayload>(f.payload).datum.has_value());

  const Scenario c = parse_scenario(std::string(kParams) +
                                    "kind = converge\ndatum = -0.5 0.5 1.2; 0.0\nL = 0.5\nT = 1\nn_list = 10 20\nseed = 7\n");
  const auto& cp = std::get<ConvergePayload>(c.payload);
  CHECK(cp.n_list == std::vector<std::size_t>{10, 20});
  CHECK(cp.options.seed == 7);

  const Scenario d = parse_scenario(std::string(kParams) + "kind = fd\nrho_count = 3\nw_count = 3\n");
  CHECK(std::get<DiagramPayload>(d.payload).rho_count == 3);

  CHECK(any_contains(errors_of(std::string(kParams) + "kind = ftl\nT = 1\ndt = 0.01\n"), "exactly one"));
  CHECK(any_contains(errors_of(std::string(kParams) + "kind = converge\ndatum = -0.5 0.5 1.2; 0.9\nL = 0.5\nT = 1\nn_list = 10 20\n"),
                     "support"));
}

TEST_CASE("parse_scenario: tabulated speed law from a file") {
  const fs::path dir = scratch("psi");
  std::ofstream(dir / "psi.csv") << "rho,psi\n0,1\n0.5,0.5\n1,0\n";
  const Scenario sc = parse_scenario(std::string(kParams) + "psi = psi.csv\n", ScenarioKind::Validate, dir);
  CHECK(sc.params.law.psi(0.25) == doctest::Approx(0.75));
}

TEST_CASE("fundamental_diagram") {
  const ModelParams p = reference_params();
  const auto pts = fundamental_diagram(p, 3, 3);
  REQUIRE(pts.size() == 9);
  // rho = 0.5 row: w = 1.0, 1.5, 2.0
  CHECK(pts[3].flow == doctest::Approx(0.25));
  CHECK(pts[3].phase == Phase::Congested);
  CHECK(pts[5].flow == doctest::Approx(0.4));
  CHECK(pts[5].phase == Phase::Free);
  for (int k = 6; k < 9; ++k) CHECK(pts[k].flow == 0.0);
  for (const auto& q : fundamental_diagram(p, 101, 11)) {
    CHECK(q.flow >= 0.0);
    CHECK(q.flow <= p.R * p.v_max + 1e-15);
  }
  const CsvTable t = diagram_table(pts);
  CHECK(t.columns == std::vector<std::string>{"rho", "w", "v", "flow", "phase"});
  CHECK(t.rows.size() == 9);
  CHECK_THROWS_AS(fundamental_diagram(p, 1, 3), PreconditionError);
}

TEST_CASE("emit_csv") {
  std::ostringstream empty;
  CHECK(emit_csv(CsvTable{{"a", "b"}, {}}, empty) == 4);
  CHECK(empty.str() == "a,b\n");

  std::ostringstream one;
  emit_csv(CsvTable{{"x"}, {{0.1}}}, one);
  CHECK(one.str() == "x\n0.1\n");

  std::ostringstream quoted;
  emit_csv(CsvTable{{"name"}, {{std::string("a,\"b\"")}}}, quoted);
  CHECK(quoted.str() == "name\n\"a,\"\"b\"\"\"\n");

  for (double x : {1.0 / 3.0, 2.5e-308, 1e300, -0.0, 123456.789}) CHECK(std::stod(format_real(x)) == x);

  std::ostringstream sink;
  CHECK_THROWS_AS(emit_csv(CsvTable{{"a", "b"}, {{1.0}}}, sink), PreconditionError);
  CHECK_THROWS_AS(emit_csv(CsvTable{{"a"}, {}}, fs::path("/nonexistent_dir/x.csv")), IoError);
}

TEST_CASE("cli: exit codes") {
  const fs::path dir = scratch("exit");
  std::ofstream(dir / "good.params") << kParams;
  std::ofstream(dir / "bad.params") << "w_min = 0.5\nw_max = 2\nv_max = 0.8\n";
  std::ofstream(dir / "r.scn") << "kind = riemann\nleft = 0.9 1.0\nright = 0.8 1.5\n";
  const std::string out = " --out " + (dir / "out").string();
  CHECK(cli("validate --params " + (dir / "good.params").string()) == 0);
  CHECK(cli("validate --params " + (dir / "bad.params").string()) == 1);
  CHECK(cli("riemann " + (dir / "r.scn").string() + " --params " + (dir / "good.params").string() + out) == 0);
  CHECK(cli("riemann " + (dir / "r.scn").string() + " --params " + (dir / "bad.params").string() + out) == 1);
  CHECK(cli("bogus") == 2);
  CHECK(cli("riemann --params " + (dir / "good.params").string() + " --out /proc/forbidden " + (dir / "r.scn").string()) == 2);
  CHECK(fs::exists(dir / "out" / "waves.csv"));
  CHECK(fs::exists(dir / "out" / "profile.csv"));
}

TEST_CASE("cli: identical runs give identical bytes") {
  const fs::path dir = scratch("det");
  std::ofstream(dir / "p") << kParams;
  std::ofstream(dir / "g.scn") << "kind = godunov\ndomain = -1 1\nN = 100\nt_final = 0.2\ninitial = -1 0.2 1.6; 0 0.9 1.2\n";
  std::ofstream(dir / "fd.scn") << "kind = fd\n";
  std::ofstream(dir / "ftl.scn") << "kind = ftl\nT = 1\ndt = 0.01\ndatum = -0.5 0.5 1.2; 0.0\nL = 0.5\nn = 20\n";
  for (const char* name : {"g.scn", "fd.scn", "ftl.scn"}) {
    for (const char* run : {"a", "b"})
      REQUIRE(cli(std::string(name == std::string("g.scn") ? "godunov " : name == std::string("fd.scn") ? "fd " : "ftl ") +
                  (dir / name).string() + " --params " + (dir / "p").string() + " --out " + (dir / run).string()) == 0);
  }
  for (const auto& entry : fs::directory_iterator(dir / "a"))
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
}
