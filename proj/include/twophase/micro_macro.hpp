#pragma once

// Links between the FTL system and the macroscopic model: placing cars on a
// macroscopic datum, reading densities back from car positions, and measuring
// how far a space-time field is from being a weak solution.

#include "twophase/ftl.hpp"
#include "twophase/godunov.hpp"
#include "twophase/model.hpp"
#include "twophase/riemann.hpp"

#include <cstdint>
#include <vector>

namespace twophase {

/// Piecewise-constant (rho, w) on [breaks[k], breaks[k+1]); zero density outside.
struct Profile {
  std::vector<double> breaks;
  std::vector<TrafficState> states;  ///< breaks.size() - 1 entries

  std::size_t pieces() const noexcept { return states.size(); }
  double mass() const noexcept;
  /// Right-continuous value; vacuum outside the support.
  TrafficState at(double x) const noexcept;
};

/// Piecewise-constant initial datum with support in [-L, L], maximal density 1.
struct MacroDatum {
  std::vector<double> breaks;  ///< K + 1 increasing points
  std::vector<double> rho;     ///< K values in [0, 1]
  std::vector<double> w;       ///< K markers
  double L = 1.0;

  double mass() const noexcept;
  /// Cumulative mass from -infinity up to x.
  double cumulative(double x) const noexcept;
  /// w(x+); the nearest piece's marker outside the breaks.
  double marker_right_of(double x) const noexcept;
  Profile profile() const;
};

/// Throws PreconditionError when the datum is malformed (sizes, ordering,
/// ranges, support outside [-L, L], zero mass).
void require_well_formed(const MacroDatum& datum, const ModelParams& params);

/// Places n followers plus a leader: l = mass / n, leader at L - l, each car
/// at the largest p with mass l between it and the car ahead, markers w(p+).
/// Requires zero mass on [L - l, L].
MicroState discretize(const MacroDatum& datum, std::size_t n);

/// rho = l / (p_{i+1} - p_i) and w = w_i on [p_i, p_{i+1}).
Profile reconstruct(const MicroState& state);

/// Parameters with the density axis rescaled so that R = 1.
ModelParams normalized(const ModelParams& params);

/// Time slices of a piecewise-constant field. Slice k stands for the
/// midpoint cell around times[k], clipped to [times.front(), times.back()].
struct FieldHistory {
  std::vector<double> times;
  std::vector<Profile> slices;
};

FieldHistory history_of(const FtlTrajectory& trajectory);

Profile profile_of(const CellField& field);

/// Self-similar fan centred at x0, sampled on [x_lo, x_hi] at the given times.
/// Rarefactions are split into `rarefaction_pieces` constant pieces.
FieldHistory fan_history(const WaveFan& fan, const ModelParams& params,
                         const std::vector<double>& times, double x_lo, double x_hi,
                         double x0 = 0.0, int rarefaction_pieces = 2000);

/// Separable bump phi(t, x) = A(t) B(x) with
/// A(t) = b((t - tc) / th; kt), B(x) = b((x - xc) / xh; kx),
/// b(s; k) = (1 - s^2)^2 cos(k s) on |s| < 1 and 0 elsewhere.
/// b and b' vanish at s = +-1.
struct TestFunction {
  double tc = 0.0, th = 1.0, kt = 0.0;
  double xc = 0.0, xh = 1.0, kx = 0.0;

  double value(double t, double x) const noexcept;
  double dt(double t, double x) const noexcept;
  double dx(double t, double x) const noexcept;
  /// Length below which a grid resolves one oscillation 20 times.
  double time_resolution() const noexcept;
  double space_resolution() const noexcept;
};

/// Ten bumps seeded deterministically, with t-support inside (-inf, 0.98 T)
/// and x-support inside [x_lo, x_hi].
std::vector<TestFunction> test_battery(std::uint64_t seed, double T, double x_lo, double x_hi,
                                       std::size_t count = 10);

struct WeakResidual {
  double rho = 0.0;
  double eta = 0.0;
  double quadrature_tol = 0.0;  ///< largest change under half resolution in x or in t
};

/// int int (u phi_t + f(u) phi_x) dx dt + int u0 phi(0, x) dx for u = (rho, rho w).
/// Time: slice k holds on its midpoint cell, over which the time factor of phi
/// is integrated. Space: Gauss
/// quadrature on each constant piece, subdivided to resolve phi.
/// Throws PreconditionError if the time slices under-resolve phi or phi does
/// not vanish at the last slice.
WeakResidual weak_residual(const FieldHistory& field, const Profile& initial,
                           const TestFunction& phi, const ModelParams& params);

/// L1 distance of the densities of two piecewise-constant profiles (exact).
double l1_distance(const Profile& a, const Profile& b);

struct StudyRow {
  std::size_t n = 0;
  double l = 0.0;
  double residual_rho = 0.0;
  double residual_eta = 0.0;
  double l1_to_godunov = 0.0;
  double runtime_s = 0.0;
};

struct StudyOptions {
  std::uint64_t seed = 42;
  std::size_t reference_cells = 4000;
  double dt_factor = 0.5;  ///< FTL step = dt_factor * l / (w_max * max|psi'|)
  /// Godunov reference domain; by default [-L - 0.5, L + V_max T + 0.5].
  double domain_lo = 0.0, domain_hi = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<TestFunction> battery;
  Profile reference;  ///< Godunov density at T
};

/// For each n: discretize, integrate the FTL system to T, reconstruct, take
/// the largest |weak residual| over the test battery, and the L1 distance at
/// T to a fine Godunov run.
StudyResult convergence_study(const MacroDatum& datum, const ModelParams& params, double T,
                              const std::vector<std::size_t>& n_list,
                              const StudyOptions& options = {});

}  // namespace twophase
