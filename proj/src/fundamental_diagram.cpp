#include "twophase/fundamental_diagram.hpp"

#include "twophase/errors.hpp"

namespace twophase {

std::vector<DiagramPoint> fundamental_diagram(const ModelParams& params, std::size_t rho_count,
                                              std::size_t w_count) {
  if (rho_count < 2 || w_count < 2)
    throw PreconditionError("fundamental_diagram: counts must be at least 2");
  std::vector<DiagramPoint> out;
  out.reserve(rho_count * w_count);
  for (std::size_t i = 0; i < rho_count; ++i) {
    const double rho = i + 1 == rho_count
                           ? params.R
                           : params.R * static_cast<double>(i) / static_cast<double>(rho_count - 1);
    for (std::size_t k = 0; k < w_count; ++k) {
      const double w = k + 1 == w_count
                           ? params.w_max
                           : params.w_min + (params.w_max - params.w_min) * static_cast<double>(k) /
                                                static_cast<double>(w_count - 1);
      const TrafficState s{rho, w};
      const double v = speed(s, params);
      out.push_back({rho, w, v, rho * v, phase_of(s, params)});
    }
  }
  return out;
}

CsvTable diagram_table(const std::vector<DiagramPoint>& points) {
  CsvTable t;
  t.columns = {"rho", "w", "v", "flow", "phase"};
  t.rows.reserve(points.size());
  for (const auto& p : points)
    t.rows.push_back({p.rho, p.w, p.v, p.flow, std::string(to_string(p.phase))});
  return t;
}

}  // namespace twophase
