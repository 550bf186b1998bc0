#pragma once

// Two-phase traffic model with a uniform speed bound:
//
//   rho_t + (rho v)_x = 0,   eta_t + (eta v)_x = 0,
//   v(rho, eta) = min{ V_max, (eta / rho) psi(rho) },
//
// where eta = rho w and w in [w_min, w_max] is each driver's own maximal speed.

#include "twophase/speed_law.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace twophase {

/// Absolute tolerance on speeds when telling the two phases apart.
inline constexpr double kPhaseTolerance = 1e-12;

/// Number of uniform samples used by the sampled hypothesis checks.
inline constexpr int kHypothesisSamples = 1001;

struct CriticalDensities {
  double rho_bar = 0.0;   ///< end of the initial plateau of psi (0 if none)
  double rho_star = 0.0;  ///< largest maximiser of rho * psi(rho)
  bool capacity_drop = false;  ///< w_max * psi(rho_star) >= V_max
};

struct ModelParams {
  double R = 1.0;
  double w_min = 1.0;
  double w_max = 2.0;
  double v_max = 0.8;
  SpeedLaw law = SpeedLaw::affine();
  double rho_bar = 0.0;
  double rho_star = 0.5;
  bool capacity_drop = true;

  /// Builds parameters and fills the derived densities. Hypothesis
  /// violations are not errors here; see validate_params.
  static ModelParams make(SpeedLaw law, double w_min, double w_max, double v_max);
};

/// R = 1, psi(rho) = 1 - rho, V_max = 0.8, w in [1, 2].
ModelParams reference_params();

/// (rho, w). eta = rho * w is derived. At rho = 0 the marker is passive.
struct TrafficState {
  double rho = 0.0;
  double w = 0.0;

  double eta() const noexcept { return rho * w; }
  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

enum class Phase { Free, Congested, FreeCongestedBoundary };

const char* to_string(Phase phase) noexcept;

struct Flux {
  double rho = 0.0;
  double eta = 0.0;
};

struct CharSpeeds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct Violation {
  char hypothesis;               ///< 'a', 'b' or 'c'
  std::string clause;            ///< which condition failed
  std::optional<double> witness; ///< sampled density where it failed, if any
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool violates(char hypothesis) const noexcept;
  std::string describe() const;
};

/// Checks hypotheses a. (positivity, w_min < w_max), b. (psi endpoints,
/// monotonicity, concave flow; sampled) and c. (w_min > V_max).
ValidationReport validate_params(const ModelParams& params);

/// True when 0 <= rho <= R and w_min <= w <= w_max (tolerance 1e-12).
bool is_valid(const TrafficState& state, const ModelParams& params) noexcept;

/// Throws DomainError naming `what` when the state is outside the domain.
void require_valid(const TrafficState& state, const ModelParams& params, const char* what);

/// min{V_max, w psi(rho)}; V_max in vacuum.
double speed(const TrafficState& state, const ModelParams& params);

Phase phase_of(const TrafficState& state, const ModelParams& params);

Flux flux(const TrafficState& state, const ModelParams& params);

/// Congested pair (eta psi'(rho) + v, v); (V_max, V_max) in the free phase.
CharSpeeds char_speeds(const TrafficState& state, const ModelParams& params);

/// eta on the 1- or 2-Lax curve through `anchor`, evaluated at `rho`.
/// Family 1 needs anchor.rho > 0; family 2 is vertical at rho = R.
double lax_curve(int family, double rho, const TrafficState& anchor, const ModelParams& params);

CriticalDensities critical_densities(const ModelParams& params);

/// Unique rho in [rho_bar, R] with psi(rho) = c, for 0 < c <= psi(rho_bar).
double invert_psi(double c, const ModelParams& params);

}  // namespace twophase
