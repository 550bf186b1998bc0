#include "twophase/ftl.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace twophase {
namespace {

bool gaps_ok(const std::vector<double>& p, double l) {
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (p[i + 1] - p[i] < l * (1.0 - kGapTolerance)) return false;
  return true;
}

void velocities(const std::vector<double>& p, const std::vector<double>& w, double l,
                const ModelParams& params, std::vector<double>& out) {
  const std::size_t last = p.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    const double gap = p[i + 1] - p[i];
    const double rho = gap > 0.0 ? l / gap : std::numeric_limits<double>::infinity();
    out[i] = extended_speed(rho, w[i], params);
  }
  out[last] = params.v_max;
}

void rk4_step(const std::vector<double>& p, const std::vector<double>& w, double l, double dt,
              const ModelParams& params, std::vector<double>& out) {
  const std::size_t m = p.size();
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  velocities(p, w, l, params, k1);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = p[i] + 0.5 * dt * k1[i];
  velocities(tmp, w, l, params, k2);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = p[i] + 0.5 * dt * k2[i];
  velocities(tmp, w, l, params, k3);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = p[i] + dt * k3[i];
  velocities(tmp, w, l, params, k4);
  out.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Advances by dt, splitting into halves while the headway check fails.
bool advance(std::vector<double>& p, const std::vector<double>& w, double l, double dt,
             const ModelParams& params, int halvings_left) {
  std::vector<double> next;
  rk4_step(p, w, l, dt, params, next);
  if (gaps_ok(next, l)) {
    p = std::move(next);
    return true;
  }
  if (halvings_left == 0) return false;
  std::vector<double> trial = p;
  if (!advance(trial, w, l, 0.5 * dt, params, halvings_left - 1)) return false;
  if (!advance(trial, w, l, 0.5 * dt, params, halvings_left - 1)) return false;
  p = std::move(trial);
  return true;
}

}  // namespace

double extended_speed(double rho, double w, const ModelParams& params) {
  if (rho < 0.0) return params.v_max;
  if (rho > 1.0) return 0.0;
  if (rho == 0.0) return params.v_max;
  return std::min(params.v_max, w * params.law.psi(rho * params.R));
}

void require_admissible(const MicroState& s, const ModelParams& params) {
  if (s.positions.size() < 2 || s.positions.size() != s.markers.size())
    throw PreconditionError("ftl: need n + 1 >= 2 positions and as many markers");
  if (!(s.l > 0.0)) throw PreconditionError("ftl: car length must be positive");
  for (std::size_t i = 0; i + 1 < s.positions.size(); ++i) {
    if (s.positions[i + 1] - s.positions[i] < s.l * (1.0 - kGapTolerance)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "ftl: headway " << s.positions[i + 1] - s.positions[i] << " of car " << i
          << " is shorter than l = " << s.l;
      throw PreconditionError(msg.str());
    }
  }
  const double tol = 1e-12 * params.w_max;
  for (double w : s.markers)
    if (!(w >= params.w_min - tol && w <= params.w_max + tol))
      throw PreconditionError("ftl: marker outside [w_min, w_max]");
}

std::vector<double> rhs(const MicroState& s, const ModelParams& params) {
  require_admissible(s, params);
  std::vector<double> out(s.positions.size());
  velocities(s.positions, s.markers, s.l, params, out);
  return out;
}

FtlTrajectory integrate(const MicroState& init, double T, double dt, const ModelParams& params,
                        const IntegrateOptions& options) {
  require_admissible(init, params);
  if (!(dt > 0.0)) throw PreconditionError("ftl integrate: dt must be positive");
  if (!(T >= 0.0)) throw PreconditionError("ftl integrate: T must be non-negative");
  const std::size_t every = std::max<std::size_t>(1, options.record_every);

  FtlTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  std::vector<double> p = init.positions;
  double t = 0.0;
  std::size_t accepted = 0;
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_next = (k + 1 == steps) ? T : static_cast<double>(k + 1) * dt;
    const double h = t_next - t;
    if (h <= 0.0) break;
    if (!advance(p, init.markers, init.l, h, params, options.max_halvings)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "ftl integrate: step " << h << " at t = " << t
          << " breaks the headway invariant after " << options.max_halvings << " halvings";
      throw StepTooLargeError(msg.str());
    }
    t = t_next;
    ++accepted;
    if (accepted % every == 0 || k + 1 == steps) {
      traj.times.push_back(t);
      traj.states.push_back({init.l, p, init.markers});
    }
  }
  return traj;
}

double min_gap(const FtlTrajectory& traj) {
  if (traj.states.empty()) throw PreconditionError("min_gap: empty trajectory");
  double best = std::numeric_limits<double>::infinity();
  for (const MicroState& s : traj.states)
    for (std::size_t i = 0; i + 1 < s.positions.size(); ++i)
      best = std::min(best, (s.positions[i + 1] - s.positions[i]) / s.l);
  return best;
}

}  // namespace twophase
