// twophase: command-line front end for the two-phase traffic solvers.
//
//   twophase <subcommand> [SCENARIO] [--params FILE] [--out DIR] [--seed N]
//
// Keys from --params and SCENARIO are merged (a key may appear in only one).
// Exit status: 0 success, 1 validation failure, 2 runtime error.

#include "twophase/csv.hpp"
#include "twophase/errors.hpp"
#include "twophase/fundamental_diagram.hpp"
#include "twophase/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace twophase;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct Options {
  std::string params_file;
  std::string scenario_file;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the scenario's seed (default 42)
};

ScenarioSource load(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read '" + file + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const fs::path path(file);
  return {file, text.str(), path.has_parent_path() ? path.parent_path() : fs::path(".")};
}

Scenario load_scenario(const Options& opt, ScenarioKind kind) {
  std::vector<ScenarioSource> sources;
  if (!opt.params_file.empty()) sources.push_back(load(opt.params_file));
  if (!opt.scenario_file.empty()) sources.push_back(load(opt.scenario_file));
  if (sources.empty()) throw IoError("no input: give --params FILE and/or a scenario file");
  return parse_scenario(sources, kind);
}

fs::path out_path(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  return fs::path(opt.out_dir) / name;
}

void write(const Options& opt, const std::string& name, const CsvTable& table) {
  const auto path = out_path(opt, name);
  const std::size_t bytes = emit_csv(table, path);
  std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows, " << bytes
            << " bytes)\n";
}

CsvTable field_table(const CellField& f, const ModelParams& p) {
  CsvTable t;
  t.columns = {"x", "rho", "w", "v", "eta"};
  for (std::size_t j = 0; j < f.size(); ++j) {
    const TrafficState s = f.state(j);
    t.rows.push_back({f.center(j), f.rho[j], s.w, speed(s, p), f.eta[j]});
  }
  return t;
}

int cmd_validate(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::Validate);
  const auto& p = sc.params;
  std::cout << "parameters ok\n"
            << "  R = " << format_real(p.R) << ", w in [" << format_real(p.w_min) << ", "
            << format_real(p.w_max) << "], V_max = " << format_real(p.v_max) << "\n"
            << "  rho_bar = " << format_real(p.rho_bar) << ", rho_star = " << format_real(p.rho_star)
            << ", capacity drop: " << (p.capacity_drop ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_riemann(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::Riemann);
  const auto& rp = std::get<RiemannPayload>(sc.payload);
  const auto& p = sc.params;
  const WaveFan fan = solve(rp.left, rp.right, p);

  std::cout << "case " << to_string(fan.rcase) << ", " << fan.waves.size() << " wave(s)\n";
  if (fan.rcase != RiemannCase::FreeFree && !(rp.left == rp.right)) {
    const TrafficState m = middle_state(rp.left, rp.right, p, rp.case3_marker);
    std::cout << "middle state rho = " << format_real(m.rho) << ", w = " << format_real(m.w) << "\n";
  }

  CsvTable waves;
  waves.columns = {"kind", "speed_lo", "speed_hi", "left_rho", "left_w", "right_rho", "right_w"};
  for (const auto& w : fan.waves)
    waves.rows.push_back({std::string(to_string(w.kind)), w.speed_lo, w.speed_hi, w.left.rho,
                          w.left.w, w.right.rho, w.right.w});
  write(opt, "waves.csv", waves);

  CsvTable profile;
  profile.columns = {"xi", "rho", "w", "v", "eta"};
  const double S = max_signal_speed(p) + 1.0;
  for (std::size_t k = 0; k < rp.samples; ++k) {
    const double xi = -S + 2.0 * S * static_cast<double>(k) / static_cast<double>(rp.samples - 1);
    const TrafficState s = evaluate(fan, xi, p);
    profile.rows.push_back({xi, s.rho, s.w, speed(s, p), s.eta()});
  }
  write(opt, "profile.csv", profile);
  return kOk;
}

int cmd_godunov(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::Godunov);
  const auto& g = std::get<GodunovScenario>(sc.payload);
  const GodunovRun result = run(g, sc.params);

  CsvTable index;
  index.columns = {"snapshot", "t", "file"};
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    write(opt, name, field_table(result.snapshots[k].field, sc.params));
    index.rows.push_back({static_cast<long long>(k), result.snapshots[k].t, std::string(name)});
  }
  write(opt, "snapshots.csv", index);

  const auto& r = result.report;
  CsvTable cons;
  cons.columns = {"quantity", "initial", "final", "outflow", "drift"};
  cons.rows.push_back({std::string("rho"), r.mass_initial, r.mass_final, r.mass_outflow, r.mass_drift});
  cons.rows.push_back({std::string("eta"), r.eta_initial, r.eta_final, r.eta_outflow, r.eta_drift});
  write(opt, "conservation.csv", cons);
  std::cout << r.steps << " steps, mass drift " << format_real(r.mass_drift) << ", eta drift "
            << format_real(r.eta_drift) << "\n";
  return kOk;
}

int cmd_ftl(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::Ftl);
  const auto& f = std::get<FtlPayload>(sc.payload);
  const ModelParams p = normalized(sc.params);
  const MicroState init = f.state ? *f.state : discretize(*f.datum, f.n);
  IntegrateOptions io;
  io.record_every = f.record_every;
  const FtlTrajectory traj = integrate(init, f.T, f.dt, p, io);

  CsvTable t;
  t.columns = {"t", "i", "p", "w", "v"};
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const MicroState& s = traj.states[k];
    const std::vector<double> v = rhs(s, p);
    for (std::size_t i = 0; i < s.positions.size(); ++i)
      t.rows.push_back({traj.times[k], static_cast<long long>(i), s.positions[i], s.markers[i], v[i]});
  }
  write(opt, "trajectory.csv", t);
  std::cout << init.cars() << " cars, l = " << format_real(init.l) << ", min gap / l = "
            << format_real(min_gap(traj)) << "\n";
  return kOk;
}

int cmd_converge(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::Converge);
  auto c = std::get<ConvergePayload>(sc.payload);
  if (opt.seed) c.options.seed = *opt.seed;
  const StudyResult res = convergence_study(c.datum, sc.params, c.T, c.n_list, c.options);

  CsvTable rows;
  rows.columns = {"n", "l", "residual_rho", "residual_eta", "l1_to_godunov", "runtime_s"};
  for (const auto& r : res.rows)
    rows.rows.push_back({static_cast<long long>(r.n), r.l, r.residual_rho, r.residual_eta,
                         r.l1_to_godunov, r.runtime_s});
  write(opt, "convergence.csv", rows);

  CsvTable battery;
  battery.columns = {"tc", "th", "kt", "xc", "xh", "kx"};
  for (const auto& phi : res.battery)
    battery.rows.push_back({phi.tc, phi.th, phi.kt, phi.xc, phi.xh, phi.kx});
  write(opt, "test_functions.csv", battery);

  CsvTable ref;
  ref.columns = {"x_lo", "x_hi", "rho", "w"};
  for (std::size_t k = 0; k < res.reference.pieces(); ++k)
    ref.rows.push_back({res.reference.breaks[k], res.reference.breaks[k + 1],
                        res.reference.states[k].rho, res.reference.states[k].w});
  write(opt, "reference.csv", ref);
  return kOk;
}

int cmd_fd(const Options& opt) {
  const Scenario sc = load_scenario(opt, ScenarioKind::FundamentalDiagram);
  const auto& d = std::get<DiagramPayload>(sc.payload);
  write(opt, "fundamental_diagram.csv",
        diagram_table(fundamental_diagram(sc.params, d.rho_count, d.w_count)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for the two-phase traffic model with a uniform speed bound"};
  app.require_subcommand(1);
  Options opt;

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
    bool takes_scenario;
  };
  const Sub subs[] = {
      {"validate", "check model parameters", cmd_validate, false},
      {"riemann", "solve one Riemann problem", cmd_riemann, true},
      {"godunov", "run the Godunov scheme", cmd_godunov, true},
      {"ftl", "integrate the follow-the-leader system", cmd_ftl, true},
      {"converge", "micro-to-macro convergence study", cmd_converge, true},
      {"fd", "sample the fundamental diagram", cmd_fd, true},
  };

  int (*chosen)(const Options&) = nullptr;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--params", opt.params_file, "model parameter file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "seed for randomized batteries (default 42)");
    if (s.takes_scenario)
      sub->add_option("scenario", opt.scenario_file, "scenario file")->check(CLI::ExistingFile);
    sub->callback([&chosen, fn = s.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntime;
  }

  try {
    return chosen(opt);
  } catch (const ScenarioError& e) {
    for (const auto& m : e.messages()) std::cerr << m << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
