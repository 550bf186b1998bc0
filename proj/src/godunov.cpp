#include "twophase/godunov.hpp"

#include "twophase/errors.hpp"
#include "twophase/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace twophase {
namespace {

constexpr double kDomainSlack = 1e-9;

TrafficState cell_state(const CellField& f, std::size_t j, const ModelParams& p) {
  const double rho = std::clamp(f.rho[j], 0.0, p.R);
  if (rho < kVacuumDensity) return {rho, f.marker[j]};
  return {rho, std::clamp(f.eta[j] / f.rho[j], p.w_min, p.w_max)};
}

struct StepFluxes {
  Flux left;
  Flux right;
};

CellField step_impl(const CellField& f, double dt, const ModelParams& p, StepFluxes* boundary) {
  const std::size_t n = f.size();
  if (n == 0) throw PreconditionError("step: empty field");
  const double limit = cfl_dt(f, p, 1.0);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "step: dt = " << dt << " violates the CFL bound " << limit;
    throw PreconditionError(msg.str());
  }

  std::vector<TrafficState> states(n);
  for (std::size_t j = 0; j < n; ++j) states[j] = cell_state(f, j, p);

  const bool periodic = f.ghost == GhostPolicy::Periodic;
  const TrafficState left_ghost = periodic ? states[n - 1] : states[0];
  const TrafficState right_ghost = periodic ? states[0] : states[n - 1];

  // fluxes[j] sits at the left face of cell j.
  std::vector<Flux> fluxes(n + 1);
  fluxes[0] = numerical_flux(left_ghost, states[0], p);
  for (std::size_t j = 1; j < n; ++j) fluxes[j] = numerical_flux(states[j - 1], states[j], p);
  fluxes[n] = periodic ? fluxes[0] : numerical_flux(states[n - 1], right_ghost, p);

  CellField out = f;
  const double ratio = dt / f.dx();
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = f.rho[j] - ratio * (fluxes[j + 1].rho - fluxes[j].rho);
    const double eta = f.eta[j] - ratio * (fluxes[j + 1].eta - fluxes[j].eta);
    if (rho < -kDomainSlack || rho > p.R + kDomainSlack || eta < rho * p.w_min - kDomainSlack ||
        eta > rho * p.w_max + kDomainSlack) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "godunov: cell " << j << " left the invariant domain (rho = " << rho
          << ", eta = " << eta << ")";
      throw DomainError(msg.str());
    }
    out.rho[j] = rho;
    out.eta[j] = eta;
    if (rho >= kVacuumDensity) out.marker[j] = std::clamp(eta / rho, p.w_min, p.w_max);
  }
  if (boundary) *boundary = {fluxes[0], fluxes[n]};
  return out;
}

}  // namespace

TrafficState CellField::state(std::size_t j) const noexcept {
  if (rho[j] < kVacuumDensity) return {rho[j], marker[j]};
  return {rho[j], eta[j] / rho[j]};
}

double CellField::total_rho() const noexcept {
  double s = 0.0;
  for (double r : rho) s += r;
  return s * dx();
}

double CellField::total_eta() const noexcept {
  double s = 0.0;
  for (double e : eta) s += e;
  return s * dx();
}

CellField make_field(double a, double b, std::size_t cells, GhostPolicy ghost,
                     const std::vector<InitialPiece>& pieces, const ModelParams& p) {
  if (!(b > a) || cells == 0) throw PreconditionError("make_field: need a < b and at least one cell");
  if (pieces.empty()) throw PreconditionError("make_field: no initial data");
  for (std::size_t k = 1; k < pieces.size(); ++k)
    if (!(pieces[k].x_break > pieces[k - 1].x_break))
      throw PreconditionError("make_field: breaks must be strictly increasing");
  for (const auto& piece : pieces) require_valid({piece.rho, piece.w}, p, "initial datum");

  CellField f;
  f.a = a;
  f.b = b;
  f.ghost = ghost;
  f.rho.assign(cells, 0.0);
  f.eta.assign(cells, 0.0);
  f.marker.assign(cells, pieces.front().w);

  const double dx = f.dx();
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cells; ++j) {
    const double xl = a + static_cast<double>(j) * dx;
    const double xr = xl + dx;
    double mass = 0.0, eta = 0.0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const double lo = k == 0 ? -inf : pieces[k].x_break;
      const double hi = k + 1 < pieces.size() ? pieces[k + 1].x_break : inf;
      const double overlap = std::min(hi, xr) - std::max(lo, xl);
      if (overlap <= 0.0) continue;
      mass += overlap * pieces[k].rho;
      eta += overlap * pieces[k].rho * pieces[k].w;
    }
    f.rho[j] = mass / dx;
    f.eta[j] = eta / dx;

    const double xc = f.center(j);
    std::size_t k = 0;
    while (k + 1 < pieces.size() && pieces[k + 1].x_break <= xc) ++k;
    f.marker[j] = f.rho[j] >= kVacuumDensity ? std::clamp(f.eta[j] / f.rho[j], p.w_min, p.w_max)
                                             : pieces[k].w;
  }
  return f;
}

Flux numerical_flux(const TrafficState& left, const TrafficState& right, const ModelParams& p) {
  if (left == right) return flux(left, p);
  return flux(evaluate(solve(left, right, p), 0.0, p), p);
}

double cfl_dt(const CellField& field, const ModelParams& p, double cfl) {
  if (!(cfl > 0.0) || cfl > 1.0) throw PreconditionError("cfl_dt: cfl must lie in (0, 1]");
  double fastest = p.v_max;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const TrafficState s = cell_state(field, j, p);
    fastest = std::max(fastest, std::abs(char_speeds(s, p).lambda1));
  }
  return cfl * field.dx() / fastest;
}

CellField step(const CellField& field, double dt, const ModelParams& params) {
  return step_impl(field, dt, params, nullptr);
}

GodunovRun run(const GodunovScenario& sc, const ModelParams& p) {
  if (!(sc.t_final >= 0.0)) throw PreconditionError("godunov run: t_final must be non-negative");
  std::vector<double> targets;
  for (double t : sc.snapshot_times)
    if (t > 0.0 && t < sc.t_final) targets.push_back(t);
  targets.push_back(sc.t_final);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  CellField field = make_field(sc.a, sc.b, sc.cells, sc.ghost, sc.initial, p);
  GodunovRun out;
  out.snapshots.push_back({0.0, field});
  out.report.mass_initial = field.total_rho();
  out.report.eta_initial = field.total_eta();

  double t = 0.0;
  double mass_out = 0.0, eta_out = 0.0;
  for (double target : targets) {
    if (target <= 0.0) continue;
    while (t < target) {
      double dt = cfl_dt(field, p, sc.cfl);
      bool last = false;
      if (t + dt >= target * (1.0 - 1e-14)) {
        dt = target - t;
        last = true;
      }
      StepFluxes boundary;
      field = step_impl(field, dt, p, &boundary);
      mass_out += dt * (boundary.right.rho - boundary.left.rho);
      eta_out += dt * (boundary.right.eta - boundary.left.eta);
      ++out.report.steps;
      t = last ? target : t + dt;
    }
    out.snapshots.push_back({t, field});
  }

  ConservationReport& r = out.report;
  r.mass_final = field.total_rho();
  r.eta_final = field.total_eta();
  r.mass_outflow = mass_out;
  r.eta_outflow = eta_out;
  auto rel = [](double delta, double base) { return std::abs(delta) / (base != 0.0 ? std::abs(base) : 1.0); };
  r.mass_drift = rel(r.mass_final + mass_out - r.mass_initial, r.mass_initial);
  r.eta_drift = rel(r.eta_final + eta_out - r.eta_initial, r.eta_initial);
  return out;
}

}  // namespace twophase
