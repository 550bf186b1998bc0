#pragma once

// First-order Godunov scheme for the two-phase model with the exact
// Riemann solver as numerical flux.

#include "twophase/model.hpp"

#include <cstddef>
#include <vector>

namespace twophase {

enum class GhostPolicy { Outflow, Periodic };

/// Piece of piecewise-constant initial data, valid from `x_break` up to the next break.
struct InitialPiece {
  double x_break = 0.0;
  double rho = 0.0;
  double w = 0.0;
};

/// Conserved cell averages on a uniform mesh of [a, b].
struct CellField {
  double a = 0.0;
  double b = 1.0;
  GhostPolicy ghost = GhostPolicy::Outflow;
  std::vector<double> rho;
  std::vector<double> eta;
  std::vector<double> marker;  ///< last non-vacuum w of each cell

  std::size_t size() const noexcept { return rho.size(); }
  double dx() const noexcept { return (b - a) / static_cast<double>(rho.size()); }
  double center(std::size_t j) const noexcept { return a + (static_cast<double>(j) + 0.5) * dx(); }
  TrafficState state(std::size_t j) const noexcept;
  double total_rho() const noexcept;
  double total_eta() const noexcept;
};

/// Cells below this density are vacuum: their marker is frozen.
inline constexpr double kVacuumDensity = 1e-14;

/// Cell averages of piecewise-constant data. The first piece also covers x < pieces[0].x_break.
CellField make_field(double a, double b, std::size_t cells, GhostPolicy ghost,
                     const std::vector<InitialPiece>& pieces, const ModelParams& params);

/// Godunov flux: flux of the Riemann fan evaluated at x/t = 0.
Flux numerical_flux(const TrafficState& left, const TrafficState& right, const ModelParams& params);

/// cfl * dx / max(V_max, max_j |lambda1(cell_j)|).
double cfl_dt(const CellField& field, const ModelParams& params, double cfl = 0.5);

/// One conservative update. Throws PreconditionError if dt exceeds cfl_dt(field, params, 1).
CellField step(const CellField& field, double dt, const ModelParams& params);

struct GodunovScenario {
  double a = -1.0;
  double b = 1.0;
  std::size_t cells = 200;
  double t_final = 0.25;
  std::vector<double> snapshot_times;  ///< t_final is always recorded
  GhostPolicy ghost = GhostPolicy::Outflow;
  std::vector<InitialPiece> initial;
  double cfl = 0.5;
};

struct ConservationReport {
  double mass_initial = 0.0;
  double eta_initial = 0.0;
  double mass_final = 0.0;
  double eta_final = 0.0;
  double mass_outflow = 0.0;  ///< time-integrated net boundary flux (right minus left)
  double eta_outflow = 0.0;
  double mass_drift = 0.0;    ///< |final + outflow - initial| / max(initial, tiny)
  double eta_drift = 0.0;
  std::size_t steps = 0;
};

struct Snapshot {
  double t = 0.0;
  CellField field;
};

struct GodunovRun {
  std::vector<Snapshot> snapshots;
  ConservationReport report;
};

/// Integrates to t_final, landing exactly on each snapshot time. Throws
/// DomainError if a cell leaves [0, R] x [w_min, w_max] by more than 1e-9.
GodunovRun run(const GodunovScenario& scenario, const ModelParams& params);

}  // namespace twophase
