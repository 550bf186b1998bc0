#include "twophase/model.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twophase {
namespace {

constexpr double kStateTolerance = 1e-12;

// Bisection for the boundary of a monotone predicate on [lo, hi], with
// pred(lo) true and pred(hi) false. Runs until the bracket stops shrinking.
template <typename Pred>
std::pair<double, double> bisect(double lo, double hi, Pred pred) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return {lo, hi};
}

CriticalDensities compute_critical(const SpeedLaw& law, double w_max, double v_max) {
  CriticalDensities out;
  const double R = law.R();
  const double psi0 = law.psi(0.0);

  if (law.psi(R) >= psi0) {
    out.rho_bar = R;
  } else {
    out.rho_bar = bisect(0.0, R, [&](double r) { return !(law.psi(r) < psi0); }).first;
    if (out.rho_bar < 1e-12 * R) out.rho_bar = 0.0;
  }

  auto flow = [&](double r) { return r * law.psi(r); };
  if (law.flow_derivative(0.0) < 0.0) {
    out.rho_star = 0.0;
  } else if (law.flow_derivative(R) >= 0.0) {
    out.rho_star = R;
  } else {
    out.rho_star = bisect(0.0, R, [&](double r) { return law.flow_derivative(r) >= 0.0; }).first;
  }
  // Guard against non-concave tables where the derivative predicate is not monotone.
  double sampled_max = flow(out.rho_star);
  for (int k = 0; k < kHypothesisSamples; ++k)
    sampled_max = std::max(sampled_max, flow(R * k / (kHypothesisSamples - 1)));
  if (sampled_max > flow(out.rho_star) + 1e-12) {
    for (int k = kHypothesisSamples - 1; k >= 0; --k) {
      const double r = R * k / (kHypothesisSamples - 1);
      if (flow(r) >= sampled_max - 1e-12) {
        out.rho_star = r;
        break;
      }
    }
  }
  out.capacity_drop = w_max * law.psi(out.rho_star) >= v_max;
  return out;
}

}  // namespace

ModelParams ModelParams::make(SpeedLaw law, double w_min, double w_max, double v_max) {
  ModelParams p;
  p.R = law.R();
  p.w_min = w_min;
  p.w_max = w_max;
  p.v_max = v_max;
  const CriticalDensities crit = compute_critical(law, w_max, v_max);
  p.law = std::move(law);
  p.rho_bar = crit.rho_bar;
  p.rho_star = crit.rho_star;
  p.capacity_drop = crit.capacity_drop;
  return p;
}

ModelParams reference_params() {
  return ModelParams::make(SpeedLaw::affine(1.0), 1.0, 2.0, 0.8);
}

const char* to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Free: return "free";
    case Phase::Congested: return "congested";
    case Phase::FreeCongestedBoundary: return "boundary";
  }
  return "?";
}

bool ValidationReport::violates(char hypothesis) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.hypothesis == hypothesis; });
}

std::string ValidationReport::describe() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : violations) {
    out << "hypothesis " << v.hypothesis << ": " << v.clause;
    if (v.witness) out << " (at rho = " << *v.witness << ")";
    if (!v.detail.empty()) out << ": " << v.detail;
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_params(const ModelParams& params) {
  ValidationReport report;
  auto add = [&](char h, std::string clause, std::optional<double> witness, std::string detail) {
    report.violations.push_back({h, std::move(clause), witness, std::move(detail)});
  };
  auto num = [](double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
  };

  // a.
  if (!(params.R > 0.0)) add('a', "R > 0", std::nullopt, "R = " + num(params.R));
  if (!(params.w_min > 0.0)) add('a', "w_min > 0", std::nullopt, "w_min = " + num(params.w_min));
  if (!(params.w_max > 0.0)) add('a', "w_max > 0", std::nullopt, "w_max = " + num(params.w_max));
  if (!(params.v_max > 0.0)) add('a', "v_max > 0", std::nullopt, "v_max = " + num(params.v_max));
  if (!(params.w_min < params.w_max))
    add('a', "w_min < w_max", std::nullopt, num(params.w_min) + " >= " + num(params.w_max));
  if (params.law.R() != params.R)
    add('a', "speed law defined on [0, R]", std::nullopt,
        "law R = " + num(params.law.R()) + ", model R = " + num(params.R));

  // b.
  const SpeedLaw& law = params.law;
  const double R = law.R();
  if (std::abs(law.psi(0.0) - 1.0) > 1e-12)
    add('b', "psi(0) = 1", 0.0, "psi(0) = " + num(law.psi(0.0)));
  if (std::abs(law.psi(R)) > 1e-12) add('b', "psi(R) = 0", R, "psi(R) = " + num(law.psi(R)));

  const int n = kHypothesisSamples;
  const double h = R / (n - 1);
  bool range_reported = false, mono_reported = false, concave_reported = false;
  for (int k = 0; k < n; ++k) {
    const double r = (k == n - 1) ? R : k * h;
    const double p = law.psi(r);
    if (!range_reported && (p < -1e-12 || p > 1.0 + 1e-12)) {
      add('b', "psi takes values in [0, 1]", r, "psi = " + num(p));
      range_reported = true;
    }
    if (!mono_reported && law.dpsi(r) > 1e-12) {
      add('b', "psi' <= 0", r, "psi' = " + num(law.dpsi(r)));
      mono_reported = true;
    }
    if (!concave_reported && k > 0 && k < n - 1) {
      const double rl = (k - 1) * h, rr = (k + 1 == n - 1) ? R : (k + 1) * h;
      const double second = rl * law.psi(rl) - 2.0 * r * p + rr * law.psi(rr);
      if (second > 1e-10) {
        add('b', "(rho psi)'' <= 0", r, "second difference = " + num(second));
        concave_reported = true;
      }
    }
  }

  // c.
  if (!(params.w_min > params.v_max))
    add('c', "w_min > v_max", std::nullopt,
        num(params.w_min) + " <= " + num(params.v_max));

  return report;
}

bool is_valid(const TrafficState& s, const ModelParams& p) noexcept {
  const double wtol = kStateTolerance * std::max(1.0, p.w_max);
  const double rtol = kStateTolerance * p.R;
  return std::isfinite(s.rho) && std::isfinite(s.w) && s.rho >= -rtol && s.rho <= p.R + rtol &&
         s.w >= p.w_min - wtol && s.w <= p.w_max + wtol;
}

void require_valid(const TrafficState& s, const ModelParams& p, const char* what) {
  if (!is_valid(s, p)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": state (rho = " << s.rho << ", w = " << s.w << ") outside [0, " << p.R
        << "] x [" << p.w_min << ", " << p.w_max << "]";
    throw DomainError(msg.str());
  }
}

double speed(const TrafficState& s, const ModelParams& p) {
  if (s.rho <= 0.0) return p.v_max;
  return std::min(p.v_max, s.w * p.law.psi(s.rho));
}

Phase phase_of(const TrafficState& s, const ModelParams& p) {
  const double congested_speed = s.rho <= 0.0 ? s.w : s.w * p.law.psi(s.rho);
  if (congested_speed > p.v_max + kPhaseTolerance) return Phase::Free;
  if (congested_speed < p.v_max - kPhaseTolerance) return Phase::Congested;
  return Phase::FreeCongestedBoundary;
}

Flux flux(const TrafficState& s, const ModelParams& p) {
  const double v = speed(s, p);
  const double f = s.rho * v;
  return {f, s.w * f};
}

CharSpeeds char_speeds(const TrafficState& s, const ModelParams& p) {
  if (phase_of(s, p) == Phase::Free) return {p.v_max, p.v_max};
  const double v = speed(s, p);
  return {s.eta() * p.law.dpsi(s.rho) + v, v};
}

double lax_curve(int family, double rho, const TrafficState& anchor, const ModelParams& p) {
  if (family == 1) {
    if (!(anchor.rho > 0.0)) throw DomainError("lax_curve: family 1 needs a non-vacuum anchor");
    return anchor.eta() * rho / anchor.rho;
  }
  if (family == 2) {
    if (rho >= p.R) throw DomainError("lax_curve: family 2 is vertical at rho = R");
    return rho * speed(anchor, p) / p.law.psi(rho);
  }
  throw DomainError("lax_curve: family must be 1 or 2");
}

CriticalDensities critical_densities(const ModelParams& params) {
  return compute_critical(params.law, params.w_max, params.v_max);
}

double invert_psi(double c, const ModelParams& p) {
  const double top = p.law.psi(p.rho_bar);
  if (!(c > 0.0) || c > top + 1e-14) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "invert_psi: " << c << " outside (0, " << top << "]";
    throw DomainError(msg.str());
  }
  if (c >= top) return p.rho_bar;
  const auto [lo, hi] = bisect(p.rho_bar, p.R, [&](double r) { return p.law.psi(r) >= c; });
  return std::abs(p.law.psi(lo) - c) <= std::abs(p.law.psi(hi) - c) ? lo : hi;
}

}  // namespace twophase
