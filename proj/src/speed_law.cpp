#include "twophase/speed_law.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace twophase {

ScenarioError::ScenarioError(std::vector<std::string> messages)
    : std::runtime_error([&] {
        std::string joined;
        for (const auto& m : messages) {
          if (!joined.empty()) joined += '\n';
          joined += m;
        }
        return joined;
      }()),
      messages_(std::move(messages)) {}

SpeedLaw SpeedLaw::affine(double R) {
  if (!(R > 0.0)) throw DomainError("speed law: R must be positive");
  SpeedLaw law;
  law.kind_ = Kind::Affine;
  law.R_ = R;
  law.name_ = "affine";
  return law;
}

SpeedLaw SpeedLaw::tabulated(std::vector<double> rho, std::vector<double> psi) {
  if (rho.size() != psi.size() || rho.size() < 2)
    throw DomainError("speed law table: need at least two (rho, psi) samples");
  if (rho.front() != 0.0) throw DomainError("speed law table: first sample must be at rho = 0");
  for (std::size_t k = 1; k < rho.size(); ++k) {
    if (!(rho[k] > rho[k - 1]))
      throw DomainError("speed law table: rho samples must be strictly increasing");
  }

  // Fritsch-Butland slopes: shape preserving, so a monotone table stays monotone.
  const std::size_t n = rho.size();
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    secant[k] = (psi[k + 1] - psi[k]) / (rho[k + 1] - rho[k]);
  std::vector<double> slope(n);
  slope.front() = secant.front();
  slope.back() = secant.back();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double d0 = secant[k - 1];
    const double d1 = secant[k];
    if (d0 * d1 <= 0.0) {
      slope[k] = 0.0;
      continue;
    }
    const double h0 = rho[k] - rho[k - 1];
    const double h1 = rho[k + 1] - rho[k];
    slope[k] = 3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d0 + (h1 + 2.0 * h0) / d1);
  }

  auto table = std::make_shared<Table>();
  table->x = std::move(rho);
  table->y = std::move(psi);
  table->slope = std::move(slope);

  SpeedLaw law;
  law.kind_ = Kind::Table;
  law.R_ = table->x.back();
  law.name_ = "table";
  law.table_ = std::move(table);
  return law;
}

SpeedLaw SpeedLaw::custom(std::function<double(double)> psi, std::function<double(double)> dpsi,
                          double R, std::string name) {
  if (!(R > 0.0)) throw DomainError("speed law: R must be positive");
  if (!psi || !dpsi) throw DomainError("speed law: psi and dpsi callables required");
  SpeedLaw law;
  law.kind_ = Kind::Custom;
  law.R_ = R;
  law.name_ = std::move(name);
  law.psi_fn_ = std::move(psi);
  law.dpsi_fn_ = std::move(dpsi);
  return law;
}

SpeedLaw SpeedLaw::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open speed law table '" + path + "'");
  std::vector<double> rho, psi;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double r = 0.0, p = 0.0;
    if (!(fields >> r >> p)) {
      if (rho.empty() && line_no == 1) continue;  // header
      throw IoError(path + ":" + std::to_string(line_no) + ": expected two numeric columns");
    }
    rho.push_back(r);
    psi.push_back(p);
  }
  return tabulated(std::move(rho), std::move(psi));
}

double SpeedLaw::Table::eval(double t) const {
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  k = std::min(k, x.size() - 2);
  const double h = x[k + 1] - x[k];
  const double s = (t - x[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y[k] + (s3 - 2 * s2 + s) * h * slope[k] +
         (-2 * s3 + 3 * s2) * y[k + 1] + (s3 - s2) * h * slope[k + 1];
}

double SpeedLaw::Table::deriv(double t) const {
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  k = std::min(k, x.size() - 2);
  const double h = x[k + 1] - x[k];
  const double s = (t - x[k]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * y[k] + (-6 * s2 + 6 * s) * y[k + 1]) / h +
         (3 * s2 - 4 * s + 1) * slope[k] + (3 * s2 - 2 * s) * slope[k + 1];
}

double SpeedLaw::psi(double rho) const {
  const double r = std::clamp(rho, 0.0, R_);
  switch (kind_) {
    case Kind::Affine: return 1.0 - r / R_;
    case Kind::Table: return table_->eval(r);
    case Kind::Custom: return psi_fn_(r);
  }
  return 0.0;
}

double SpeedLaw::dpsi(double rho) const {
  const double r = std::clamp(rho, 0.0, R_);
  switch (kind_) {
    case Kind::Affine: return -1.0 / R_;
    case Kind::Table: return table_->deriv(r);
    case Kind::Custom: return dpsi_fn_(r);
  }
  return 0.0;
}

SpeedLaw SpeedLaw::rescaled(double new_R) const {
  if (!(new_R > 0.0)) throw DomainError("speed law: rescaled R must be positive");
  if (new_R == R_) return *this;
  if (kind_ == Kind::Affine) return affine(new_R);
  const double scale = R_ / new_R;
  SpeedLaw base = *this;
  return custom([base, scale](double s) { return base.psi(s * scale); },
                [base, scale](double s) { return base.dpsi(s * scale) * scale; }, new_R,
                name_ + "(rescaled)");
}

}  // namespace twophase
