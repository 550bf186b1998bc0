#include <doctest.h>

#include "twophase/errors.hpp"
#include "twophase/model.hpp"

#include <cmath>

using namespace twophase;

namespace {

ModelParams with(double w_min, double w_max, double v_max, SpeedLaw law = SpeedLaw::affine()) {
  return ModelParams::make(std::move(law), w_min, w_max, v_max);
}

// Constant 1 on [0, 0.2], then affine down to 0 at 1.
SpeedLaw plateau_law() {
  return SpeedLaw::custom([](double r) { return r <= 0.2 ? 1.0 : (1.0 - r) / 0.8; },
                          [](double r) { return r <= 0.2 ? 0.0 : -1.25; }, 1.0, "plateau");
}

}  // namespace

TEST_CASE("validate_params: reference configuration is clean") {
  const ValidationReport rep = validate_params(reference_params());
  CHECK(rep.ok());
  CHECK(rep.describe().empty());
}

TEST_CASE("validate_params: w_min below V_max breaks c") {
  const ValidationReport rep = validate_params(with(0.5, 2.0, 0.8));
  CHECK(rep.violates('c'));
  CHECK_FALSE(rep.violates('a'));
  CHECK_FALSE(rep.violates('b'));
}

TEST_CASE("validate_params: convex flow near R breaks b") {
  const SpeedLaw sq = SpeedLaw::custom([](double r) { return (1 - r) * (1 - r); },
                                       [](double r) { return -2 * (1 - r); }, 1.0, "square");
  const ValidationReport rep = validate_params(with(1.0, 2.0, 0.8, sq));
  REQUIRE(rep.violates('b'));
  bool concavity_witness_high = false;
  for (const auto& v : rep.violations)
    if (v.hypothesis == 'b' && v.witness && *v.witness > 2.0 / 3.0) concavity_witness_high = true;
  CHECK(concavity_witness_high);
}

TEST_CASE("validate_params: 1 - rho^2 passes") {
  const SpeedLaw law = SpeedLaw::custom([](double r) { return 1 - r * r; },
                                        [](double r) { return -2 * r; }, 1.0, "quadratic");
  CHECK(validate_params(with(1.0, 2.0, 0.8, law)).ok());
}

TEST_CASE("validate_params: equal markers break a") {
  CHECK(validate_params(with(1.5, 1.5, 0.8)).violates('a'));
  CHECK(validate_params(with(1.0, 2.0, -0.1)).violates('a'));
}

TEST_CASE("speed") {
  const ModelParams p = reference_params();
  CHECK(speed({0.5, 2.0}, p) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(speed({1.0, 1.7}, p) == 0.0);
  CHECK(speed({0.9, 1.0}, p) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(speed({0.0, 1.3}, p) == doctest::Approx(0.8));
}

TEST_CASE("phase_of") {
  const ModelParams p = reference_params();
  CHECK(phase_of({0.1, 1.5}, p) == Phase::Free);
  CHECK(phase_of({0.9, 1.5}, p) == Phase::Congested);
  CHECK(phase_of({0.5, 1.6}, p) == Phase::FreeCongestedBoundary);
  CHECK(std::string(to_string(Phase::Congested)) == "congested");
}

TEST_CASE("flux") {
  const ModelParams p = reference_params();
  const Flux f = flux({0.5, 1.2}, p);
  CHECK(f.rho == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(f.eta == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(flux({0.0, 1.4}, p).rho == 0.0);
  CHECK(flux({0.0, 1.4}, p).eta == 0.0);
  CHECK(flux({1.0, 1.0}, p).rho == 0.0);
  CHECK(flux({1.0, 1.0}, p).eta == 0.0);
}

TEST_CASE("char_speeds") {
  const ModelParams p = reference_params();
  const CharSpeeds c = char_speeds({0.7, 1.0}, p);
  CHECK(c.lambda1 == doctest::Approx(-0.4).epsilon(1e-13));
  CHECK(c.lambda2 == doctest::Approx(0.3).epsilon(1e-13));
  const CharSpeeds f = char_speeds({0.1, 1.5}, p);
  CHECK(f.lambda1 == 0.8);
  CHECK(f.lambda2 == 0.8);
  for (int i = 0; i <= 50; ++i)
    for (int k = 0; k <= 10; ++k) {
      const CharSpeeds s = char_speeds({i / 50.0, 1.0 + k / 10.0}, p);
      CHECK(s.lambda1 <= s.lambda2 + 1e-15);
    }
}

TEST_CASE("char_speeds match a finite-difference Jacobian in the congested phase") {
  const ModelParams p = reference_params();
  const TrafficState u{0.62, 1.3};
  const double h = 1e-6;
  auto F = [&](double r, double e) { return flux({r, e / r}, p); };
  const double a = (F(u.rho + h, u.eta()).rho - F(u.rho - h, u.eta()).rho) / (2 * h);
  const double b = (F(u.rho, u.eta() + h).rho - F(u.rho, u.eta() - h).rho) / (2 * h);
  const double c = (F(u.rho + h, u.eta()).eta - F(u.rho - h, u.eta()).eta) / (2 * h);
  const double d = (F(u.rho, u.eta() + h).eta - F(u.rho, u.eta() - h).eta) / (2 * h);
  const double tr = a + d, det = a * d - b * c;
  const double disc = std::sqrt(tr * tr / 4 - det);
  const CharSpeeds s = char_speeds(u, p);
  CHECK(s.lambda1 == doctest::Approx(tr / 2 - disc).epsilon(1e-7));
  CHECK(s.lambda2 == doctest::Approx(tr / 2 + disc).epsilon(1e-7));
}

TEST_CASE("lax_curve") {
  const ModelParams p = reference_params();
  CHECK(lax_curve(1, 0.7, {0.9, 1.0}, p) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(lax_curve(2, 0.7, {0.8, 1.5}, p) == doctest::Approx(0.7).epsilon(1e-13));
  const TrafficState o{0.43, 1.7};
  CHECK(lax_curve(1, o.rho, o, p) == doctest::Approx(o.eta()).epsilon(1e-15));
  CHECK_THROWS_AS(lax_curve(2, 1.0, o, p), DomainError);
  CHECK_THROWS_AS(lax_curve(1, 0.5, {0.0, 1.2}, p), DomainError);
}

TEST_CASE("critical_densities") {
  const CriticalDensities c = critical_densities(reference_params());
  CHECK(c.rho_bar == 0.0);
  CHECK(c.rho_star == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c.capacity_drop);

  const CriticalDensities q = critical_densities(with(1.0, 2.0, 0.8, plateau_law()));
  CHECK(q.rho_bar == doctest::Approx(0.2).epsilon(1e-9));

  // w_max psi(rho*) = 1.2 * 0.5 < V_max: no capacity drop.
  CHECK_FALSE(critical_densities(with(0.9, 1.2, 0.8)).capacity_drop);
}

TEST_CASE("invert_psi against the closed form") {
  const ModelParams p = reference_params();
  CHECK(invert_psi(0.4, p) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::abs(invert_psi(1e-9, p) - (1 - 1e-9)) <= 1e-12);
  CHECK(invert_psi(p.law.psi(p.rho_bar), p) == doctest::Approx(p.rho_bar));
  for (int k = 1; k < 100; ++k) {
    const double c = k / 100.0;
    CHECK(std::abs(invert_psi(c, p) - (1 - c)) <= 1e-12);
  }
  const ModelParams q = with(1.0, 2.0, 0.8, plateau_law());
  CHECK(invert_psi(1.0, q) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(invert_psi(0.5, q) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK_THROWS_AS(invert_psi(0.0, p), DomainError);
  CHECK_THROWS_AS(invert_psi(1.5, p), DomainError);
}

TEST_CASE("is_valid and require_valid") {
  const ModelParams p = reference_params();
  CHECK(is_valid({0.3, 1.0}, p));
  CHECK(is_valid({1.0, 2.0}, p));
  CHECK_FALSE(is_valid({1.01, 1.5}, p));
  CHECK_FALSE(is_valid({0.5, 0.9}, p));
  CHECK_THROWS_AS(require_valid({-0.1, 1.5}, p, "left"), DomainError);
}

TEST_CASE("tabulated speed law interpolates monotonically") {
  const SpeedLaw t = SpeedLaw::tabulated({0.0, 0.25, 0.5, 0.75, 1.0}, {1.0, 0.75, 0.5, 0.25, 0.0});
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    CHECK(t.psi(r) == doctest::Approx(1.0 - r).epsilon(1e-12));
    CHECK(t.dpsi(r) == doctest::Approx(-1.0).epsilon(1e-9));
  }
  CHECK(validate_params(with(1.0, 2.0, 0.8, t)).ok());
  CHECK_THROWS_AS(SpeedLaw::tabulated({0.1, 1.0}, {1.0, 0.0}), DomainError);
}

TEST_CASE("rescaled speed law") {
  const SpeedLaw law = SpeedLaw::affine(2.0);
  const SpeedLaw unit = law.rescaled(1.0);
  CHECK(unit.R() == 1.0);
  CHECK(unit.psi(0.25) == doctest::Approx(law.psi(0.5)));
}
