#pragma once

#include "twophase/csv.hpp"
#include "twophase/model.hpp"

#include <cstddef>
#include <vector>

namespace twophase {

struct DiagramPoint {
  double rho = 0.0;
  double w = 0.0;
  double v = 0.0;
  double flow = 0.0;
  Phase phase = Phase::Free;
};

/// Tensor grid over [0, R] x [w_min, w_max], rho outer, w inner.
std::vector<DiagramPoint> fundamental_diagram(const ModelParams& params, std::size_t rho_count,
                                              std::size_t w_count);

/// Columns rho, w, v, flow, phase.
CsvTable diagram_table(const std::vector<DiagramPoint>& points);

}  // namespace twophase
