#include "twophase/riemann.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twophase {
namespace {

// Waves whose end states differ by less than this (in rho and w) are dropped.
constexpr double kNegligible = 1e-14;

double lambda1_congested(double rho, double w, const ModelParams& p) {
  return w * p.law.flow_derivative(rho);
}

bool same_state(const TrafficState& a, const TrafficState& b, const ModelParams& p) {
  return std::abs(a.rho - b.rho) <= kNegligible * p.R &&
         std::abs(a.w - b.w) <= kNegligible * std::max(1.0, p.w_max);
}

Phase effective(Phase self, Phase partner) {
  if (self != Phase::FreeCongestedBoundary) return self;
  return partner == Phase::Congested ? Phase::Congested : Phase::Free;
}

RiemannCase case_for(Phase l, Phase r) {
  if (l == Phase::Free) return r == Phase::Free ? RiemannCase::FreeFree : RiemannCase::FreeCongested;
  return r == Phase::Free ? RiemannCase::CongestedFree : RiemannCase::CongestedCongested;
}

// Middle state for cases C/C and F/C: marker of the left state, speed of the right one.
TrafficState lax_middle(const TrafficState& l, const TrafficState& r, const ModelParams& p) {
  const double vr = speed(r, p);
  if (vr <= 0.0) return {p.R, l.w};
  return {invert_psi(vr / l.w, p), l.w};
}

TrafficState boundary_middle(double w, const ModelParams& p) {
  return {invert_psi(p.v_max / w, p), w};
}

// 1-wave along the marker of `l`; m.w == l.w.
void push_one_wave(std::vector<Wave>& waves, const TrafficState& l, const TrafficState& m,
                   const ModelParams& p) {
  if (same_state(l, m, p)) return;
  const double lam_l = lambda1_congested(l.rho, l.w, p);
  const double lam_m = lambda1_congested(m.rho, m.w, p);
  if (m.rho < l.rho && lam_m - lam_l > kNegligible) {
    waves.push_back({WaveKind::Rarefaction, l, m, lam_l, lam_m});
    return;
  }
  const double s = (flux(m, p).rho - flux(l, p).rho) / (m.rho - l.rho);
  waves.push_back({WaveKind::Shock, l, m, s, s});
}

std::string describe(const TrafficState& s) {
  std::ostringstream out;
  out.precision(17);
  out << "(rho = " << s.rho << ", w = " << s.w << ")";
  return out.str();
}

}  // namespace

const char* to_string(WaveKind kind) noexcept {
  switch (kind) {
    case WaveKind::Shock: return "shock";
    case WaveKind::Rarefaction: return "rarefaction";
    case WaveKind::Contact2: return "contact2";
    case WaveKind::FreeLinear: return "free_linear";
  }
  return "?";
}

const char* to_string(RiemannCase rcase) noexcept {
  switch (rcase) {
    case RiemannCase::FreeFree: return "F/F";
    case RiemannCase::CongestedCongested: return "C/C";
    case RiemannCase::CongestedFree: return "C/F";
    case RiemannCase::FreeCongested: return "F/C";
  }
  return "?";
}

RiemannCase classify(const TrafficState& left, const TrafficState& right, const ModelParams& p) {
  const Phase pl = phase_of(left, p);
  const Phase pr = phase_of(right, p);
  return case_for(effective(pl, pr), effective(pr, pl));
}

namespace detail {

WaveFan solve_as(const TrafficState& l, const TrafficState& r, Phase pl, Phase pr,
                 const ModelParams& p) {
  if (pl == Phase::FreeCongestedBoundary || pr == Phase::FreeCongestedBoundary)
    throw DomainError("solve_as: effective phases must be Free or Congested");
  WaveFan fan{l, r, case_for(pl, pr), {}};
  if (l == r) return fan;

  switch (fan.rcase) {
    case RiemannCase::FreeFree:
      fan.waves.push_back({WaveKind::FreeLinear, l, r, p.v_max, p.v_max});
      break;

    case RiemannCase::CongestedCongested:
    case RiemannCase::FreeCongested: {
      TrafficState m = lax_middle(l, r, p);
      if (same_state(m, l, p)) m = l;
      if (same_state(m, r, p)) m = r;
      push_one_wave(fan.waves, l, m, p);
      if (!(m == r)) {
        const double s = speed(r, p);
        fan.waves.push_back({WaveKind::Contact2, m, r, s, s});
      }
      break;
    }

    case RiemannCase::CongestedFree: {
      TrafficState m = boundary_middle(l.w, p);
      if (same_state(m, l, p)) m = l;
      push_one_wave(fan.waves, l, m, p);
      if (!(m == r)) fan.waves.push_back({WaveKind::FreeLinear, m, r, p.v_max, p.v_max});
      break;
    }
  }
  return fan;
}

}  // namespace detail

WaveFan solve(const TrafficState& left, const TrafficState& right, const ModelParams& p) {
  require_valid(left, p, "riemann left state");
  require_valid(right, p, "riemann right state");
  const Phase pl = phase_of(left, p);
  const Phase pr = phase_of(right, p);
  return detail::solve_as(left, right, effective(pl, pr), effective(pr, pl), p);
}

TrafficState middle_state(const TrafficState& left, const TrafficState& right,
                          const ModelParams& p, Case3Marker marker) {
  require_valid(left, p, "middle_state left state");
  require_valid(right, p, "middle_state right state");
  switch (classify(left, right, p)) {
    case RiemannCase::FreeFree:
      throw NoMiddleStateError("middle_state: F/F data " + describe(left) + " / " +
                               describe(right) + " have no middle state");
    case RiemannCase::CongestedCongested:
    case RiemannCase::FreeCongested:
      return lax_middle(left, right, p);
    case RiemannCase::CongestedFree:
      return boundary_middle(marker == Case3Marker::Left ? left.w : right.w, p);
  }
  return left;
}

TrafficState rarefaction_state(double w, double xi, double rho_lo, double rho_hi,
                               const ModelParams& p) {
  const double fast = lambda1_congested(rho_lo, w, p);
  const double slow = lambda1_congested(rho_hi, w, p);
  const double tol = 1e-12 * std::max(1.0, std::abs(w));
  if (xi > fast + tol || xi < slow - tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "rarefaction_state: xi = " << xi << " outside the fan [" << slow << ", " << fast << "]";
    throw DomainError(msg.str());
  }
  if (xi >= fast) return {rho_lo, w};
  if (xi <= slow) return {rho_hi, w};
  double lo = rho_lo, hi = rho_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (lambda1_congested(mid, w, p) > xi ? lo : hi) = mid;
  }
  const double rho = std::abs(lambda1_congested(lo, w, p) - xi) <=
                             std::abs(lambda1_congested(hi, w, p) - xi)
                         ? lo
                         : hi;
  return {rho, w};
}

TrafficState rarefaction_state(double w, double xi, const ModelParams& p) {
  return rarefaction_state(w, xi, p.rho_bar, p.R, p);
}

TrafficState evaluate(const WaveFan& fan, double xi, const ModelParams& p) {
  for (const Wave& wave : fan.waves) {
    if (xi < wave.speed_lo) return wave.left;
    if (wave.kind == WaveKind::Rarefaction && xi < wave.speed_hi)
      return rarefaction_state(wave.left.w, xi, wave.right.rho, wave.left.rho, p);
  }
  return fan.right;
}

double max_signal_speed(const ModelParams& p) {
  double q = 0.0;
  for (int k = 0; k < kHypothesisSamples; ++k)
    q = std::max(q, std::abs(p.law.flow_derivative(p.R * k / (kHypothesisSamples - 1))));
  return std::max(p.v_max, p.w_max * q);
}

bool states_close(const TrafficState& a, const TrafficState& b, double tol) noexcept {
  return std::abs(a.rho - b.rho) <= tol && std::abs(a.eta() - b.eta()) <= tol;
}

ConsistencyResult check_consistency(const TrafficState& l, const TrafficState& m,
                                    const TrafficState& r, const ModelParams& p, double xbar) {
  constexpr int kGrid = 1000;
  constexpr double kJumpGap = 1e-9;

  const WaveFan lm = solve(l, m, p);
  const WaveFan mr = solve(m, r, p);
  const WaveFan lr = solve(l, r, p);

  std::vector<double> jumps{xbar};
  for (const WaveFan* fan : {&lm, &mr, &lr})
    for (const Wave& w : fan->waves)
      if (w.kind != WaveKind::Rarefaction) jumps.push_back(w.speed_lo);
  auto near_jump = [&](double x) {
    return std::any_of(jumps.begin(), jumps.end(),
                       [&](double j) { return std::abs(x - j) <= kJumpGap; });
  };

  const double span = max_signal_speed(p) + 1.0;
  ConsistencyResult out;
  out.c1_applicable = states_close(evaluate(lm, xbar, p), m) && states_close(evaluate(mr, xbar, p), m);
  out.c2_applicable = states_close(evaluate(lr, xbar, p), m);

  for (int k = 0; k < kGrid; ++k) {
    const double x = -span + 2.0 * span * (k + 0.5) / kGrid;
    if (near_jump(x)) continue;
    const TrafficState whole = evaluate(lr, x, p);
    if (out.c1_applicable && out.c1) {
      const TrafficState pasted = x < xbar ? evaluate(lm, x, p) : evaluate(mr, x, p);
      if (!states_close(pasted, whole)) out.c1 = false;
    }
    if (out.c2_applicable && out.c2) {
      const TrafficState left_part = x <= xbar ? whole : m;
      const TrafficState right_part = x < xbar ? m : whole;
      if (!states_close(evaluate(lm, x, p), left_part) ||
          !states_close(evaluate(mr, x, p), right_part))
        out.c2 = false;
    }
  }
  return out;
}

}  // namespace twophase
