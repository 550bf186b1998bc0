#include "twophase/micro_macro.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace twophase {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bump(double s, double k) noexcept {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * std::cos(k * s);
}

double bump_derivative(double s, double k) noexcept {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -4.0 * s * q * std::cos(k * s) - k * q * q * std::sin(k * s);
}

double resolution(double half_width, double k) noexcept {
  double length = 2.0 * half_width;
  if (k > 0.0) length = std::min(length, 2.0 * std::numbers::pi * half_width / k);
  return length / 20.0;
}

// Gauss-Legendre 3-point rule for int_a^b B(x) dx on `parts` equal sub-intervals.
double integrate_space_factor(const TestFunction& phi, double a, double b, int parts) {
  static constexpr double node = 0.7745966692414834;  // sqrt(3/5)
  const double h = (b - a) / parts;
  double sum = 0.0;
  for (int k = 0; k < parts; ++k) {
    const double c = a + (k + 0.5) * h;
    const double r = 0.5 * h * node;
    const auto B = [&](double x) { return bump((x - phi.xc) / phi.xh, phi.kx); };
    sum += 0.5 * h * (5.0 / 9.0 * B(c - r) + 8.0 / 9.0 * B(c) + 5.0 / 9.0 * B(c + r));
  }
  return sum;
}

struct SliceSums {
  double rho_dt = 0.0, eta_dt = 0.0;  // int u B dx
  double rho_dx = 0.0, eta_dx = 0.0;  // int f B' dx (exact, via B differences)
};

SliceSums slice_sums(const Profile& prof, const TestFunction& phi, const ModelParams& params,
                     double sub_length) {
  SliceSums out;
  const double lo = phi.xc - phi.xh, hi = phi.xc + phi.xh;
  for (std::size_t k = 0; k < prof.pieces(); ++k) {
    const double a = std::max(prof.breaks[k], lo);
    const double b = std::min(prof.breaks[k + 1], hi);
    if (!(b > a)) continue;
    const TrafficState& s = prof.states[k];
    if (s.rho == 0.0) continue;
    const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / sub_length)));
    const double intB = integrate_space_factor(phi, a, b, parts);
    const double dB = bump((b - phi.xc) / phi.xh, phi.kx) - bump((a - phi.xc) / phi.xh, phi.kx);
    const Flux f = flux(s, params);
    out.rho_dt += s.rho * intB;
    out.eta_dt += s.eta() * intB;
    out.rho_dx += f.rho * dB;
    out.eta_dx += f.eta * dB;
  }
  return out;
}

struct ResidualPair {
  double rho = 0.0, eta = 0.0;
};

// Uses the slices listed in `use` (first and last always included).
ResidualPair residual_at(const FieldHistory& field, const std::vector<std::size_t>& use,
                         const Profile& initial, const TestFunction& phi, const ModelParams& params,
                         double sub_length) {
  const double t0 = field.times.front(), t1 = field.times.back();
  ResidualPair r;
  const auto A = [&](double t) { return bump((t - phi.tc) / phi.th, phi.kt); };
  const double t_lo = phi.tc - phi.th, t_hi = phi.tc + phi.th;
  for (std::size_t i = 0; i < use.size(); ++i) {
    const std::size_t k = use[i];
    const double lo = i == 0 ? t0 : 0.5 * (field.times[use[i - 1]] + field.times[k]);
    const double hi = i + 1 == use.size() ? t1 : 0.5 * (field.times[k] + field.times[use[i + 1]]);
    if (!(hi > lo) || hi <= t_lo || lo >= t_hi) continue;
    // the slice holds on [lo, hi]: A' integrates exactly, A by 3-point Gauss
    const double dA = A(hi) - A(lo);
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo) * 0.7745966692414834;
    const double intA = 0.5 * (hi - lo) * (5.0 / 9.0 * A(c - h) + 8.0 / 9.0 * A(c) + 5.0 / 9.0 * A(c + h));
    const SliceSums s = slice_sums(field.slices[k], phi, params, sub_length);
    r.rho += dA * s.rho_dt + intA * s.rho_dx;
    r.eta += dA * s.eta_dt + intA * s.eta_dx;
  }
  const double A0 = A(t0);
  if (A0 != 0.0) {
    const SliceSums s0 = slice_sums(initial, phi, params, sub_length);
    r.rho += A0 * s0.rho_dt;
    r.eta += A0 * s0.eta_dt;
  }
  return r;
}

}  // namespace

double Profile::mass() const noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) m += states[k].rho * (breaks[k + 1] - breaks[k]);
  return m;
}

TrafficState Profile::at(double x) const noexcept {
  if (states.empty()) return {};
  if (x < breaks.front()) return {0.0, states.front().w};
  if (x >= breaks.back()) return {0.0, states.back().w};
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  return states[static_cast<std::size_t>(it - breaks.begin()) - 1];
}

double MacroDatum::mass() const noexcept { return cumulative(kInf); }

double MacroDatum::cumulative(double x) const noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double len = std::min(x, breaks[k + 1]) - breaks[k];
    if (len <= 0.0) break;
    m += rho[k] * len;
  }
  return m;
}

double MacroDatum::marker_right_of(double x) const noexcept {
  if (w.empty()) return 0.0;
  if (x < breaks.front()) return w.front();
  for (std::size_t k = 0; k < w.size(); ++k)
    if (x < breaks[k + 1]) return w[k];
  return w.back();
}

Profile MacroDatum::profile() const {
  Profile p;
  p.breaks = breaks;
  for (std::size_t k = 0; k < rho.size(); ++k) p.states.push_back({rho[k], w[k]});
  return p;
}

void require_well_formed(const MacroDatum& d, const ModelParams& params) {
  if (d.rho.empty() || d.breaks.size() != d.rho.size() + 1 || d.w.size() != d.rho.size())
    throw PreconditionError("macro datum: need K + 1 breaks for K (rho, w) pieces");
  for (std::size_t k = 0; k + 1 < d.breaks.size(); ++k)
    if (!(d.breaks[k + 1] > d.breaks[k]))
      throw PreconditionError("macro datum: breaks must be strictly increasing");
  if (!(d.L > 0.0) || d.breaks.front() < -d.L || d.breaks.back() > d.L)
    throw PreconditionError("macro datum: support must lie in [-L, L]");
  const double wtol = 1e-12 * params.w_max;
  for (std::size_t k = 0; k < d.rho.size(); ++k) {
    if (!(d.rho[k] >= 0.0 && d.rho[k] <= 1.0))
      throw PreconditionError("macro datum: density outside [0, 1]");
    if (!(d.w[k] >= params.w_min - wtol && d.w[k] <= params.w_max + wtol))
      throw PreconditionError("macro datum: marker outside [w_min, w_max]");
  }
  if (!(d.mass() > 0.0)) throw PreconditionError("macro datum: zero total mass");
}

MicroState discretize(const MacroDatum& d, std::size_t n) {
  if (n < 2) throw PreconditionError("discretize: need n >= 2");
  if (d.rho.empty() || d.breaks.size() != d.rho.size() + 1 || d.w.size() != d.rho.size())
    throw PreconditionError("discretize: malformed datum");
  const double total = d.mass();
  if (!(total > 0.0)) throw PreconditionError("discretize: datum has no mass");
  const double l = total / static_cast<double>(n);

  const double tail = d.cumulative(d.L) - d.cumulative(d.L - l);
  if (tail > 1e-14 * total) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "discretize: datum carries mass " << tail << " on [L - l, L] = [" << d.L - l << ", "
        << d.L << "]; enlarge L";
    throw DatumInconsistentError(msg.str());
  }

  MicroState s;
  s.l = l;
  s.positions.assign(n + 1, 0.0);
  s.positions[n] = d.L - l;
  for (std::size_t i = n; i-- > 0;) {
    double target = d.cumulative(s.positions[i + 1]) - l;
    if (target < -1e-12 * total) {
      std::ostringstream msg;
      msg << "discretize: not enough mass left of car " << i + 1;
      throw DatumInconsistentError(msg.str());
    }
    target = std::max(target, 0.0);
    // Largest p with cumulative(p) <= target.
    double p = d.breaks.front();
    double cum = 0.0;
    for (std::size_t k = 0; k < d.rho.size(); ++k) {
      const double len = d.breaks[k + 1] - d.breaks[k];
      const double next = cum + d.rho[k] * len;
      if (d.rho[k] > 0.0 && target < next) {
        p = d.breaks[k] + std::min(len, (target - cum) / d.rho[k]);
        break;
      }
      cum = next;
      p = d.breaks[k + 1];
    }
    s.positions[i] = p;
  }
  s.markers.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.markers[i] = d.marker_right_of(s.positions[i]);
  return s;
}

Profile reconstruct(const MicroState& s) {
  Profile p;
  p.breaks = s.positions;
  const std::size_t n = s.cars();
  p.states.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    p.states[i] = {s.l / (s.positions[i + 1] - s.positions[i]), s.markers[i]};
  return p;
}

ModelParams normalized(const ModelParams& params) {
  if (params.R == 1.0) return params;
  return ModelParams::make(params.law.rescaled(1.0), params.w_min, params.w_max, params.v_max);
}

FieldHistory history_of(const FtlTrajectory& traj) {
  FieldHistory h;
  h.times = traj.times;
  h.slices.reserve(traj.states.size());
  for (const MicroState& s : traj.states) h.slices.push_back(reconstruct(s));
  return h;
}

Profile profile_of(const CellField& field) {
  Profile p;
  const std::size_t n = field.size();
  p.breaks.resize(n + 1);
  p.states.resize(n);
  for (std::size_t j = 0; j <= n; ++j) p.breaks[j] = field.a + static_cast<double>(j) * field.dx();
  p.breaks[n] = field.b;
  for (std::size_t j = 0; j < n; ++j) {
    TrafficState s = field.state(j);
    s.rho = std::max(s.rho, 0.0);
    p.states[j] = s;
  }
  return p;
}

FieldHistory fan_history(const WaveFan& fan, const ModelParams& params,
                         const std::vector<double>& times, double x_lo, double x_hi, double x0,
                         int rarefaction_pieces) {
  FieldHistory h;
  h.times = times;
  for (double t : times) {
    Profile prof;
    auto push = [&](double a, double b, const TrafficState& s) {
      a = std::max(a, x_lo);
      b = std::min(b, x_hi);
      if (!(b > a)) return;
      if (prof.breaks.empty()) prof.breaks.push_back(a);
      prof.breaks.push_back(b);
      prof.states.push_back(s);
    };
    if (t <= 0.0) {
      push(-kInf, x0, fan.left);
      push(x0, kInf, fan.right);
      h.slices.push_back(std::move(prof));
      continue;
    }
    double cur = -kInf;
    for (const Wave& wave : fan.waves) {
      const double x1 = x0 + wave.speed_lo * t;
      push(cur, x1, wave.left);
      cur = std::max(cur, x1);
      if (wave.kind == WaveKind::Rarefaction) {
        const double x2 = x0 + wave.speed_hi * t;
        const double width = (x2 - x1) / rarefaction_pieces;
        for (int k = 0; k < rarefaction_pieces; ++k) {
          const double a = x1 + k * width;
          const double b = k + 1 == rarefaction_pieces ? x2 : a + width;
          const double xi = (0.5 * (a + b) - x0) / t;
          push(a, b, rarefaction_state(wave.left.w, xi, wave.right.rho, wave.left.rho, params));
        }
        cur = std::max(cur, x2);
      }
    }
    push(cur, kInf, fan.right);
    h.slices.push_back(std::move(prof));
  }
  return h;
}

double TestFunction::value(double t, double x) const noexcept {
  return bump((t - tc) / th, kt) * bump((x - xc) / xh, kx);
}

double TestFunction::dt(double t, double x) const noexcept {
  return bump_derivative((t - tc) / th, kt) / th * bump((x - xc) / xh, kx);
}

double TestFunction::dx(double t, double x) const noexcept {
  return bump((t - tc) / th, kt) * bump_derivative((x - xc) / xh, kx) / xh;
}

double TestFunction::time_resolution() const noexcept { return resolution(th, kt); }
double TestFunction::space_resolution() const noexcept { return resolution(xh, kx); }

std::vector<TestFunction> test_battery(std::uint64_t seed, double T, double x_lo, double x_hi,
                                       std::size_t count) {
  if (!(T > 0.0) || !(x_hi > x_lo)) throw PreconditionError("test_battery: empty window");
  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const double width = x_hi - x_lo;
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    TestFunction phi;
    phi.th = uniform(0.3 * T, 0.5 * T);
    phi.tc = uniform(0.0, 0.98 * T - phi.th);
    phi.kt = uniform(0.0, std::numbers::pi);
    phi.xh = uniform(0.1, 0.3) * width;
    phi.xc = uniform(x_lo + phi.xh, x_hi - phi.xh);
    phi.kx = uniform(0.0, std::numbers::pi);
    out.push_back(phi);
  }
  return out;
}

WeakResidual weak_residual(const FieldHistory& field, const Profile& initial,
                           const TestFunction& phi, const ModelParams& params) {
  if (field.times.size() < 2 || field.times.size() != field.slices.size())
    throw PreconditionError("weak_residual: need at least two time slices");
  double widest = 0.0;
  for (std::size_t k = 1; k < field.times.size(); ++k) {
    const double gap = field.times[k] - field.times[k - 1];
    if (gap < 0.0) throw PreconditionError("weak_residual: times must be non-decreasing");
    widest = std::max(widest, gap);
  }
  if (widest > phi.time_resolution()) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "weak_residual: time slices " << widest << " apart under-resolve the test function (need <= "
        << phi.time_resolution() << ")";
    throw PreconditionError(msg.str());
  }
  if (phi.tc + phi.th > field.times.back() * (1.0 + 1e-12))
    throw PreconditionError("weak_residual: test function does not vanish at the final time");

  const double h = phi.space_resolution();
  std::vector<std::size_t> all(field.times.size()), every_other;
  for (std::size_t k = 0; k < all.size(); ++k) {
    all[k] = k;
    if (k % 2 == 0 || k + 1 == all.size()) every_other.push_back(k);
  }
  const ResidualPair fine = residual_at(field, all, initial, phi, params, h);
  const ResidualPair coarse_x = residual_at(field, all, initial, phi, params, 2.0 * h);
  const ResidualPair coarse_t = residual_at(field, every_other, initial, phi, params, h);
  const double tol = std::max({std::abs(fine.rho - coarse_x.rho), std::abs(fine.eta - coarse_x.eta),
                               std::abs(fine.rho - coarse_t.rho), std::abs(fine.eta - coarse_t.eta)});
  return {fine.rho, fine.eta, tol};
}

double l1_distance(const Profile& a, const Profile& b) {
  std::vector<double> pts = a.breaks;
  pts.insert(pts.end(), b.breaks.begin(), b.breaks.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    sum += std::abs(a.at(mid).rho - b.at(mid).rho) * (pts[k + 1] - pts[k]);
  }
  return sum;
}

StudyResult convergence_study(const MacroDatum& datum, const ModelParams& raw_params, double T,
                              const std::vector<std::size_t>& n_list, const StudyOptions& opt) {
  if (n_list.size() < 2) throw PreconditionError("convergence_study: need at least two values of n");
  for (std::size_t k = 1; k < n_list.size(); ++k)
    if (!(n_list[k] > n_list[k - 1]))
      throw PreconditionError("convergence_study: n_list must be increasing");
  if (!(T > 0.0)) throw PreconditionError("convergence_study: T must be positive");

  const ModelParams params = normalized(raw_params);
  require_well_formed(datum, params);

  StudyResult result;
  const double x_lo = -datum.L;
  const double x_hi = datum.L + params.v_max * T;
  result.battery = test_battery(opt.seed, T, x_lo, x_hi);

  GodunovScenario ref;
  ref.a = opt.domain_hi > opt.domain_lo ? opt.domain_lo : -datum.L - 0.5;
  ref.b = opt.domain_hi > opt.domain_lo ? opt.domain_hi : x_hi + 0.5;
  ref.cells = opt.reference_cells;
  ref.t_final = T;
  ref.ghost = GhostPolicy::Outflow;
  ref.initial.push_back({ref.a, 0.0, datum.w.front()});
  for (std::size_t k = 0; k < datum.rho.size(); ++k)
    ref.initial.push_back({datum.breaks[k], datum.rho[k], datum.w[k]});
  ref.initial.push_back({datum.breaks.back(), 0.0, datum.w.back()});
  if (ref.initial[1].x_break <= ref.a) ref.initial.erase(ref.initial.begin());
  result.reference = profile_of(run(ref, params).snapshots.back().field);

  double steepest = 0.0;
  for (int k = 0; k < kHypothesisSamples; ++k)
    steepest = std::max(steepest, std::abs(params.law.dpsi(static_cast<double>(k) / (kHypothesisSamples - 1))));
  steepest = std::max(steepest, 1e-12);

  const Profile initial = datum.profile();
  for (std::size_t n : n_list) {
    const auto start = std::chrono::steady_clock::now();
    const MicroState micro = discretize(datum, n);
    const double dt = opt.dt_factor * micro.l / (params.w_max * steepest);
    const FtlTrajectory traj = integrate(micro, T, dt, params);
    const FieldHistory hist = history_of(traj);

    StudyRow row;
    row.n = n;
    row.l = micro.l;
    for (const TestFunction& phi : result.battery) {
      const WeakResidual r = weak_residual(hist, initial, phi, params);
      row.residual_rho = std::max(row.residual_rho, std::abs(r.rho));
      row.residual_eta = std::max(row.residual_eta, std::abs(r.eta));
    }
    row.l1_to_godunov = l1_distance(hist.slices.back(), result.reference);
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace twophase
