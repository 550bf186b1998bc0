#pragma once

// Scenario files: flat `key = value` text, one entry per line, `#` comments.
//
//   model keys     R, w_min, w_max, v_max, psi (= affine | path to (rho, psi) CSV)
//   kind           riemann | godunov | ftl | converge | fd | validate
//   riemann        left = "rho w", right = "rho w", samples, case3_marker = left|right
//   godunov        domain = "a b", N, t_final, initial = "x rho w; x rho w; ...",
//                  snapshot_times = "t t ...", ghost = outflow|periodic, cfl
//   ftl            T, dt, record_every, and either positions (CSV of p, w; leader last) + l
//                  or datum = "x rho w; ...; x_end" + L + n
//   converge       datum, L, T, n_list = "n n ...", reference_cells, dt_factor, seed
//   fd             rho_count, w_count

#include "twophase/godunov.hpp"
#include "twophase/micro_macro.hpp"
#include "twophase/model.hpp"
#include "twophase/riemann.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace twophase {

enum class ScenarioKind { Riemann, Godunov, Ftl, Converge, FundamentalDiagram, Validate };

const char* to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> kind_from_string(std::string_view name) noexcept;

struct RiemannPayload {
  TrafficState left;
  TrafficState right;
  std::size_t samples = 401;
  Case3Marker case3_marker = Case3Marker::Left;
};

struct FtlPayload {
  double T = 1.0;
  double dt = 1e-3;
  std::size_t record_every = 1;
  std::optional<MicroState> state;  ///< explicit cars
  std::optional<MacroDatum> datum;  ///< or a datum to discretize with n cars
  std::size_t n = 0;
};

struct ConvergePayload {
  MacroDatum datum;
  double T = 1.0;
  std::vector<std::size_t> n_list;
  StudyOptions options;
};

struct DiagramPayload {
  std::size_t rho_count = 101;
  std::size_t w_count = 11;
};

using ScenarioPayload = std::variant<std::monostate, RiemannPayload, GodunovScenario, FtlPayload,
                                     ConvergePayload, DiagramPayload>;

struct Scenario {
  ModelParams params;
  ScenarioKind kind = ScenarioKind::Validate;
  ScenarioPayload payload;
};

/// One input document. Relative file references resolve against base_dir.
struct ScenarioSource {
  std::string name = "<scenario>";
  std::string text;
  std::filesystem::path base_dir = ".";
};

/// Parses and validates. `kind` supplies the kind when the text has no `kind`
/// key (and must agree with it otherwise). Throws ScenarioError with every
/// problem found: malformed values, unknown or duplicate keys, missing
/// required keys, missing files, violated model hypotheses.
Scenario parse_scenario(std::string_view text, std::optional<ScenarioKind> kind = std::nullopt,
                        const std::filesystem::path& base_dir = ".");

/// Same, with keys gathered from several documents (e.g. a params file and a scenario file).
Scenario parse_scenario(const std::vector<ScenarioSource>& sources,
                        std::optional<ScenarioKind> kind = std::nullopt);

}  // namespace twophase
