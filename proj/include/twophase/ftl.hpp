#pragma once

// Follow-The-Leader system
//
//   p_i' = v(l / (p_{i+1} - p_i), w_i),  i = 1..n,     p_{n+1}' = V_max,
//
// with density normalised so that the maximal density is 1.

#include "twophase/model.hpp"

#include <cstddef>
#include <vector>

namespace twophase {

/// n followers plus a leader. positions/markers have n + 1 entries, leader last.
struct MicroState {
  double l = 0.0;
  std::vector<double> positions;
  std::vector<double> markers;

  std::size_t cars() const noexcept { return positions.empty() ? 0 : positions.size() - 1; }
};

/// Relative tolerance on the headway invariant p_{i+1} - p_i >= l.
inline constexpr double kGapTolerance = 1e-9;

/// Lipschitz extension of rho -> v(rho, w) to the whole real line: V_max for
/// rho < 0, 0 for rho > 1. `rho` is the dimensionless local density.
double extended_speed(double rho, double w, const ModelParams& params);

/// Throws PreconditionError unless sizes match, l > 0, gaps are >= l and markers are in range.
void require_admissible(const MicroState& state, const ModelParams& params);

std::vector<double> rhs(const MicroState& state, const ModelParams& params);

struct FtlTrajectory {
  std::vector<double> times;
  std::vector<MicroState> states;
};

struct IntegrateOptions {
  std::size_t record_every = 1;  ///< record every k-th accepted step (the final time is always recorded)
  int max_halvings = 12;         ///< step halvings tried before giving up on a step
};

/// Classical 4-stage Runge-Kutta with fixed step dt (the last step is shortened
/// to land on T). A step that breaks the headway invariant is redone with two
/// half steps, recursively; StepTooLargeError after max_halvings.
FtlTrajectory integrate(const MicroState& init, double T, double dt, const ModelParams& params,
                        const IntegrateOptions& options = {});

/// min over recorded times and cars of (p_{i+1} - p_i) / l.
double min_gap(const FtlTrajectory& trajectory);

}  // namespace twophase
