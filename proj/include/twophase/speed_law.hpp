#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace twophase {

/// Speed law psi: [0, R] -> [0, 1] together with its derivative.
///
/// Three representations are supported: the built-in affine law
/// psi(rho) = 1 - rho/R, a sampled table evaluated with a monotone
/// (Fritsch-Carlson) cubic, and an arbitrary callable pair. Arguments are
/// clamped to [0, R]. Instances are immutable and cheap to copy.
class SpeedLaw {
public:
  static SpeedLaw affine(double R = 1.0);

  /// `rho` strictly increasing, starting at 0; R is taken from the last sample.
  static SpeedLaw tabulated(std::vector<double> rho, std::vector<double> psi);

  static SpeedLaw custom(std::function<double(double)> psi,
                         std::function<double(double)> dpsi, double R,
                         std::string name = "custom");

  /// Reads a two-column CSV of (rho, psi) samples. A non-numeric first row is
  /// treated as a header.
  static SpeedLaw from_csv(const std::string& path);

  double psi(double rho) const;
  double dpsi(double rho) const;
  double R() const noexcept { return R_; }
  const std::string& name() const noexcept { return name_; }

  /// Derivative of the flow rho * psi(rho).
  double flow_derivative(double rho) const { return psi(rho) + rho * dpsi(rho); }

  /// Same law on [0, new_R]: psi_new(s) = psi(s * R / new_R).
  SpeedLaw rescaled(double new_R) const;

private:
  enum class Kind { Affine, Table, Custom };

  struct Table {
    std::vector<double> x, y, slope;
    double eval(double t) const;
    double deriv(double t) const;
  };

  SpeedLaw() = default;

  Kind kind_ = Kind::Affine;
  double R_ = 1.0;
  std::string name_ = "affine";
  std::shared_ptr<const Table> table_;
  std::function<double(double)> psi_fn_;
  std::function<double(double)> dpsi_fn_;
};

}  // namespace twophase
