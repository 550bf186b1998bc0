#include <doctest.h>

#include "oracles/ftl_scalar.hpp"
#include "oracles/lwr.hpp"
#include "twophase/errors.hpp"
#include "twophase/micro_macro.hpp"

#include <algorithm>
#include <cmath>

using namespace twophase;

namespace {

const ModelParams P = reference_params();

MacroDatum block(double a, double b, double rho, double w, double L) {
  return {{a, b}, {rho}, {w}, L};
}

}  // namespace

TEST_CASE("discretize: hand example") {
  const MicroState s = discretize(block(-0.25, 0.15, 0.5, 1.2, 0.25), 2);
  CHECK(s.l == doctest::Approx(0.1).epsilon(1e-14));
  REQUIRE(s.positions.size() == 3);
  CHECK(s.positions[0] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(s.positions[1] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(s.positions[2] == doctest::Approx(0.15).epsilon(1e-12));
  for (double w : s.markers) CHECK(w == 1.2);
}

TEST_CASE("discretize: constant density gives equal spacing l / c") {
  const MacroDatum d = block(-0.5, 0.3, 0.4, 1.5, 0.5);
  for (std::size_t n : {5u, 17u, 64u}) {
    const MicroState s = discretize(d, n);
    // the leader sits at L - l, past the support; followers tile it
    for (std::size_t i = 0; i + 2 < s.positions.size(); ++i)
      CHECK(s.positions[i + 1] - s.positions[i] == doctest::Approx(s.l / 0.4).epsilon(1e-10));
    CHECK(s.positions.front() == doctest::Approx(-0.5).epsilon(1e-10));
  }
}

TEST_CASE("discretize: doubling n splits every interval") {
  const MacroDatum d{{-0.6, -0.1, 0.2}, {0.3, 0.9}, {1.8, 1.1}, 0.5};
  const MicroState a = discretize(d, 40), b = discretize(d, 80);
  CHECK(b.l == doctest::Approx(a.l / 2).epsilon(1e-14));
  for (std::size_t i = 0; i + 1 < a.positions.size(); ++i)
    CHECK(b.positions[2 * i] == doctest::Approx(a.positions[i]).epsilon(1e-10));
}

TEST_CASE("discretize: mass near L is rejected") {
  CHECK_THROWS_AS(discretize(block(-0.5, 0.5, 0.4, 1.5, 0.5), 10), DatumInconsistentError);
}

TEST_CASE("discretize: markers are right limits") {
  const MacroDatum d{{-0.4, 0.0, 0.3}, {0.5, 0.5}, {1.0, 2.0}, 0.5};
  const MicroState s = discretize(d, 7);
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    CHECK(s.markers[i] == d.marker_right_of(s.positions[i]));
}

TEST_CASE("reconstruct") {
  const Profile p = reconstruct({0.1, {0.0, 0.2, 0.5}, {1.0, 1.5, 2.0}});
  REQUIRE(p.pieces() == 2);
  CHECK(p.states[0].rho == doctest::Approx(0.5));
  CHECK(p.states[0].w == 1.0);
  CHECK(p.states[1].rho == doctest::Approx(1.0 / 3.0));
  CHECK(p.states[1].w == 1.5);
  CHECK(p.at(0.5).rho == 0.0);
  CHECK(p.at(-0.1).rho == 0.0);
  const Profile full = reconstruct({0.1, {0.0, 0.1, 0.2, 0.3}, {1.0, 1.0, 1.0, 1.0}});
  for (const auto& s : full.states) CHECK(s.rho == doctest::Approx(1.0));
}

TEST_CASE("reconstruct after discretize approaches the datum") {
  const MacroDatum d{{-0.6, -0.2, 0.1, 0.3}, {0.4, 0.9, 0.2}, {1.5, 1.1, 1.9}, 0.6};
  const double tv = 0.4 + 0.5 + 0.7 + 0.2;
  double prev = 1e9;
  for (std::size_t n : {100u, 200u, 400u}) {
    const MicroState s = discretize(d, n);
    const double e = l1_distance(reconstruct(s), d.profile());
    CHECK(e <= tv * s.l / 0.2);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("l1_distance is exact on piecewise constants") {
  const Profile a{{0.0, 1.0}, {{0.5, 1.0}}};
  const Profile b{{0.5, 2.0}, {{0.25, 1.0}}};
  CHECK(l1_distance(a, b) == doctest::Approx(0.5 * 0.5 + 0.5 * 0.25 + 1.0 * 0.25));
  CHECK(l1_distance(a, a) == 0.0);
}

TEST_CASE("test functions vanish with their derivative at the support edge") {
  const TestFunction phi{0.4, 0.3, 2.0, 0.1, 0.5, 3.0};
  CHECK(phi.value(0.4, 0.1) == doctest::Approx(1.0));
  CHECK(phi.value(0.7, 0.1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(phi.dx(0.4, 0.6)) <= 1e-14);
  CHECK(std::abs(phi.dt(0.1, 0.2)) <= 1e-14);
  const double h = 1e-6, t = 0.45, x = 0.2;
  CHECK(phi.dt(t, x) == doctest::Approx((phi.value(t + h, x) - phi.value(t - h, x)) / (2 * h)).epsilon(1e-6));
  CHECK(phi.dx(t, x) == doctest::Approx((phi.value(t, x + h) - phi.value(t, x - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("test_battery is deterministic and inside the window") {
  const auto a = test_battery(42, 1.0, -1.0, 2.0), b = test_battery(42, 1.0, -1.0, 2.0);
  REQUIRE(a.size() == 10);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].xc == b[k].xc);
    CHECK(a[k].tc + a[k].th <= 0.98 + 1e-12);
    CHECK(a[k].xc - a[k].xh >= -1.0);
    CHECK(a[k].xc + a[k].xh <= 2.0);
  }
  CHECK(test_battery(43, 1.0, -1.0, 2.0)[0].xc != a[0].xc);
}

TEST_CASE("weak residual of a constant state is quadrature-level") {
  const Profile c{{-2.0, 3.0}, {{0.6, 1.3}}};
  FieldHistory h;
  for (int k = 0; k <= 400; ++k) {
    h.times.push_back(k / 400.0);
    h.slices.push_back(c);
  }
  for (const TestFunction& phi : test_battery(42, 1.0, -1.0, 2.0)) {
    const WeakResidual r = weak_residual(h, c, phi, P);
    CHECK(std::abs(r.rho) <= std::max(1e-8, r.quadrature_tol));
    CHECK(std::abs(r.eta) <= std::max(1e-8, r.quadrature_tol));
  }
}

TEST_CASE("weak residual of exact Riemann fans is small") {
  const TrafficState data[][2] = {{{0.9, 1.0}, {0.8, 1.5}}, {{0.2, 1.6}, {0.9, 1.2}}, {{0.9, 1.0}, {0.3, 1.6}}};
  std::vector<double> times;
  for (int k = 0; k <= 2000; ++k) times.push_back(k / 2000.0);
  for (const auto& d : data) {
    const WaveFan fan = solve(d[0], d[1], P);
    const FieldHistory h = fan_history(fan, P, times, -3.0, 3.0);
    const Profile init{{-3.0, 0.0, 3.0}, {d[0], d[1]}};
    for (const TestFunction& phi : test_battery(42, 1.0, -2.0, 2.0)) {
      const WeakResidual r = weak_residual(h, init, phi, P);
      CHECK(std::abs(r.rho) <= 1e-6);
      CHECK(std::abs(r.eta) <= 1e-6);
    }
  }
}

TEST_CASE("weak residual of a wrong shock speed is not small") {
  const TrafficState l{0.2, 1.6}, r{0.925, 1.6};
  std::vector<double> times;
  FieldHistory h;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    h.times.push_back(t);
    const double x = 0.3 * t;  // RH speed is about -0.0676
    h.slices.push_back(Profile{{-3.0, x, 3.0}, {l, r}});
  }
  const Profile init{{-3.0, 0.0, 3.0}, {l, r}};
  double worst = 0.0;
  for (const TestFunction& phi : test_battery(42, 1.0, -1.0, 1.0))
    worst = std::max(worst, std::abs(weak_residual(h, init, phi, P).rho));
  CHECK(worst > 1e-3);
}

TEST_CASE("weak_residual guards its inputs") {
  FieldHistory h;
  h.times = {0.0, 0.5, 1.0};
  const Profile c{{-1.0, 1.0}, {{0.5, 1.5}}};
  h.slices = {c, c, c};
  const TestFunction phi{0.4, 0.3, 1.0, 0.0, 0.5, 1.0};
  CHECK_THROWS_AS(weak_residual(h, c, phi, P), PreconditionError);
}

TEST_CASE("FTL reconstruction residual shrinks with n") {
  const MacroDatum d{{-0.6, -0.2, 0.2}, {0.3, 0.8}, {1.8, 1.2}, 0.6};
  const auto r = convergence_study(d, P, 0.8, {100, 400}, {});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].residual_rho < r.rows[0].residual_rho);
  CHECK(r.rows[1].l1_to_godunov < r.rows[0].l1_to_godunov);
}

TEST_CASE("free datum: FTL translates rigidly and is an exact weak solution of its own start") {
  const MacroDatum d = block(-0.5, 0.0, 0.2, 2.0, 0.5);  // 2 * 0.8 = 1.6 >= V_max
  for (std::size_t n : {20u, 40u, 80u}) {
    const MicroState s = discretize(d, n);
    const FtlTrajectory tr = integrate(s, 1.0, 0.002, P);
    for (std::size_t i = 0; i < s.positions.size(); ++i)
      CHECK(tr.states.back().positions[i] == doctest::Approx(s.positions[i] + 0.8).epsilon(1e-12));
    const FieldHistory h = history_of(tr);
    for (const TestFunction& phi : test_battery(42, 1.0, -0.5, 1.3)) {
      const WeakResidual r = weak_residual(h, h.slices.front(), phi, P);
      CHECK(std::abs(r.rho) <= std::max(1e-8, r.quadrature_tol));
      CHECK(std::abs(r.eta) <= std::max(1e-8, r.quadrature_tol));
    }
  }
}

TEST_CASE("equal markers: study distances match a scalar LWR pipeline") {
  const ModelParams q = ModelParams::make(SpeedLaw::affine(), 1.5, 1.5, 0.8);
  const MacroDatum d{{-0.6, -0.2, 0.2}, {0.3, 0.8}, {1.5, 1.5}, 0.6};
  const double T = 0.8;
  const std::vector<std::size_t> ns{50, 100};
  const StudyResult study = convergence_study(d, q, T, ns, {});

  // scalar Godunov reference on the same mesh
  const oracle::Lwr lwr(oracle::affine_lwr(1.5, 0.8));
  const double a = -d.L - 0.5, b = d.L + 0.8 * T + 0.5;
  const std::size_t cells = 4000;
  const double dx = (b - a) / cells;
  std::vector<double> rho(cells, 0.0);
  for (std::size_t j = 0; j < cells; ++j) {
    const double lo = a + j * dx, hi = lo + dx;
    for (std::size_t k = 0; k < d.rho.size(); ++k) {
      const double overlap = std::min(hi, d.breaks[k + 1]) - std::max(lo, d.breaks[k]);
      if (overlap > 0) rho[j] += d.rho[k] * overlap / dx;
    }
  }
  double t = 0.0;
  while (t < T) {
    double dt = 0.5 * dx / lwr.max_speed(rho, 0.8);
    if (t + dt >= T) dt = T - t;
    rho = lwr.step(rho, dt, dx, false);
    t = (t + dt >= T) ? T : t + dt;
  }

  for (std::size_t k = 0; k < ns.size(); ++k) {
    const MicroState s = discretize(d, ns[k]);
    const double dt = 0.5 * s.l / 1.5;
    const std::vector<double> p =
        oracle::ftl_rk4(s.positions, s.l, 0.8, [](double r) { return std::min(0.8, 1.5 * (1.0 - r)); }, T, dt);
    // exact L1 between l / gap on [p_i, p_i+1) and the cell values
    std::vector<double> pts(p.begin(), p.end());
    for (std::size_t j = 0; j <= cells; ++j) pts.push_back(a + j * dx);
    std::sort(pts.begin(), pts.end());
    double dist = 0.0;
    for (std::size_t m = 0; m + 1 < pts.size(); ++m) {
      const double x = 0.5 * (pts[m] + pts[m + 1]);
      double micro = 0.0;
      const auto it = std::upper_bound(p.begin(), p.end(), x);
      if (it != p.begin() && it != p.end()) micro = s.l / (*it - *(it - 1));
      double macro = 0.0;
      if (x >= a && x < b) macro = rho[std::min<std::size_t>(cells - 1, static_cast<std::size_t>((x - a) / dx))];
      dist += std::abs(micro - macro) * (pts[m + 1] - pts[m]);
    }
    CHECK(study.rows[k].l1_to_godunov == doctest::Approx(dist).epsilon(1e-8));
  }
}
