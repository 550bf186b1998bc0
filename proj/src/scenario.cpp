#include "twophase/scenario.hpp"

#include "twophase/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace twophase {
namespace {

struct Entry {
  std::string key;
  std::string value;
  std::string where;  // "<source>:<line>"
  std::filesystem::path base_dir;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) {
    if (!w.empty() && w.back() == ',') w.pop_back();
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

std::optional<double> to_real(std::string_view token) {
  double x = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return x;
}

std::optional<std::size_t> to_count(std::string_view token) {
  unsigned long long x = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return static_cast<std::size_t>(x);
}

class Reader {
public:
  Reader(std::map<std::string, Entry> entries, std::string fallback_where)
      : entries_(std::move(entries)), fallback_(std::move(fallback_where)) {}

  std::vector<std::string>& errors() { return errors_; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const Entry* take(const std::string& key, bool required) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      if (required) errors_.push_back(fallback_ + ": missing required key '" + key + "'");
      return nullptr;
    }
    used_.insert(key);
    return &it->second;
  }

  void fail(const Entry& e, const std::string& msg) { errors_.push_back(e.where + ": " + msg); }
  void fail(const std::string& msg) { errors_.push_back(fallback_ + ": " + msg); }

  std::optional<double> real(const std::string& key, bool required) {
    const Entry* e = take(key, required);
    if (!e) return std::nullopt;
    auto x = to_real(e->value);
    if (!x) fail(*e, "malformed number for '" + key + "': '" + e->value + "'");
    return x;
  }

  std::optional<std::size_t> count(const std::string& key, bool required) {
    const Entry* e = take(key, required);
    if (!e) return std::nullopt;
    auto x = to_count(e->value);
    if (!x) fail(*e, "malformed count for '" + key + "': '" + e->value + "'");
    return x;
  }

  std::optional<std::vector<double>> reals(const std::string& key, bool required,
                                           std::size_t exact = 0) {
    const Entry* e = take(key, required);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const auto& w : words(e->value)) {
      auto x = to_real(w);
      if (!x) {
        fail(*e, "malformed number '" + w + "' in '" + key + "'");
        return std::nullopt;
      }
      out.push_back(*x);
    }
    if (exact && out.size() != exact) {
      fail(*e, "'" + key + "' needs " + std::to_string(exact) + " numbers, got " +
                   std::to_string(out.size()));
      return std::nullopt;
    }
    return out;
  }

  void reject_unused(const std::string& kind_name) {
    for (const auto& [key, e] : entries_)
      if (!used_.count(key)) fail(e, "unknown key '" + key + "' for kind '" + kind_name + "'");
  }

private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
  std::vector<std::string> errors_;
  std::string fallback_;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

std::optional<MacroDatum> parse_datum(Reader& rd, const Entry& e, double L, const ModelParams* params) {
  const auto parts = split(e.value, ';');
  if (parts.size() < 2) {
    rd.fail(e, "datum needs at least one 'x rho w' piece and a closing break");
    return std::nullopt;
  }
  MacroDatum d;
  d.L = L;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto tok = words(parts[k]);
    const bool last = k + 1 == parts.size();
    if (tok.size() != (last ? 1u : 3u)) {
      rd.fail(e, "datum piece " + std::to_string(k + 1) +
                     (last ? " must be a single closing break" : " must be 'x rho w'"));
      return std::nullopt;
    }
    std::vector<double> vals;
    for (const auto& t : tok) {
      auto x = to_real(t);
      if (!x) {
        rd.fail(e, "malformed number '" + t + "' in datum");
        return std::nullopt;
      }
      vals.push_back(*x);
    }
    d.breaks.push_back(vals[0]);
    if (!last) {
      d.rho.push_back(vals[1]);
      d.w.push_back(vals[2]);
    }
  }
  if (params) {
    try {
      require_well_formed(d, *params);
    } catch (const std::exception& ex) {
      rd.fail(e, ex.what());
      return std::nullopt;
    }
  }
  return d;
}

std::optional<MicroState> read_positions(Reader& rd, const Entry& e, double l) {
  const std::filesystem::path path = e.base_dir / e.value;
  std::ifstream in(path);
  if (!in) {
    rd.fail(e, "cannot open positions file '" + path.string() + "'");
    return std::nullopt;
  }
  MicroState s;
  s.l = l;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto tok = words(line);
    std::optional<double> p, w;
    if (tok.size() == 2) {
      p = to_real(tok[0]);
      w = to_real(tok[1]);
    }
    if (!p || !w) {
      if (line_no == 1) continue;  // header
      rd.fail(e, path.string() + ":" + std::to_string(line_no) + ": expected 'p, w'");
      return std::nullopt;
    }
    s.positions.push_back(*p);
    s.markers.push_back(*w);
  }
  return s;
}

}  // namespace

const char* to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::Riemann: return "riemann";
    case ScenarioKind::Godunov: return "godunov";
    case ScenarioKind::Ftl: return "ftl";
    case ScenarioKind::Converge: return "converge";
    case ScenarioKind::FundamentalDiagram: return "fd";
    case ScenarioKind::Validate: return "validate";
  }
  return "?";
}

std::optional<ScenarioKind> kind_from_string(std::string_view name) noexcept {
  for (auto k : {ScenarioKind::Riemann, ScenarioKind::Godunov, ScenarioKind::Ftl,
                 ScenarioKind::Converge, ScenarioKind::FundamentalDiagram, ScenarioKind::Validate})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

Scenario parse_scenario(std::string_view text, std::optional<ScenarioKind> kind,
                        const std::filesystem::path& base_dir) {
  return parse_scenario({ScenarioSource{"<scenario>", std::string(text), base_dir}}, kind);
}

Scenario parse_scenario(const std::vector<ScenarioSource>& sources, std::optional<ScenarioKind> kind) {
  std::vector<std::string> lex_errors;
  std::map<std::string, Entry> entries;
  for (const auto& src : sources) {
    std::istringstream in(src.text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string where = src.name + ":" + std::to_string(line_no);
      const auto hash = raw.find('#');
      const std::string line = trim(std::string_view(raw).substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        lex_errors.push_back(where + ": expected 'key = value'");
        continue;
      }
      Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
              where, src.base_dir};
      if (e.key.empty()) {
        lex_errors.push_back(where + ": empty key");
        continue;
      }
      if (const auto it = entries.find(e.key); it != entries.end()) {
        lex_errors.push_back(where + ": duplicate key '" + e.key + "' (first set at " +
                             it->second.where + ")");
        continue;
      }
      entries.emplace(e.key, std::move(e));
    }
  }

  Reader rd(std::move(entries), sources.empty() ? "<scenario>" : sources.back().name);
  auto& errors = rd.errors();
  errors.insert(errors.begin(), lex_errors.begin(), lex_errors.end());

  Scenario sc;
  if (const Entry* e = rd.take("kind", false)) {
    const auto named = kind_from_string(e->value);
    if (!named) rd.fail(*e, "unknown kind '" + e->value + "'");
    else if (kind && *kind != *named)
      rd.fail(*e, std::string("kind '") + e->value + "' does not match subcommand '" + to_string(*kind) + "'");
    else kind = named;
  }
  if (!kind) {
    rd.fail("missing required key 'kind'");
    throw ScenarioError(std::move(errors));
  }
  sc.kind = *kind;

  // Model.
  const auto R = rd.real("R", false);
  const auto w_min = rd.real("w_min", true);
  const auto w_max = rd.real("w_max", true);
  const auto v_max = rd.real("v_max", true);
  std::optional<SpeedLaw> law;
  const Entry* psi = rd.take("psi", false);
  if (!psi || psi->value == "affine") {
    if (R && !(*R > 0.0)) rd.fail("R must be positive");
    else law = SpeedLaw::affine(R.value_or(1.0));
  } else {
    const std::filesystem::path path = psi->base_dir / psi->value;
    if (!std::filesystem::exists(path)) {
      rd.fail(*psi, "speed law table '" + path.string() + "' does not exist");
    } else {
      try {
        law = SpeedLaw::from_csv(path.string());
        if (R && *R != law->R())
          rd.fail(*psi, "table ends at rho = " + num(law->R()) + " but R = " + num(*R));
      } catch (const std::exception& ex) {
        rd.fail(*psi, ex.what());
        law.reset();
      }
    }
  }
  const bool model_ok = law && w_min && w_max && v_max;
  if (model_ok) {
    sc.params = ModelParams::make(*law, *w_min, *w_max, *v_max);
    const ValidationReport report = validate_params(sc.params);
    for (const auto& v : report.violations) {
      std::string msg = std::string("hypothesis ") + v.hypothesis + ". violated: " + v.clause;
      if (v.witness) msg += " at rho = " + num(*v.witness);
      if (!v.detail.empty()) msg += " (" + v.detail + ")";
      rd.fail(msg);
    }
  }
  const ModelParams* params = model_ok ? &sc.params : nullptr;

  auto check_state = [&](const std::string& key, const std::optional<std::vector<double>>& xy)
      -> std::optional<TrafficState> {
    if (!xy) return std::nullopt;
    const TrafficState s{(*xy)[0], (*xy)[1]};
    if (params && !is_valid(s, *params)) {
      rd.fail("'" + key + "' = (" + num(s.rho) + ", " + num(s.w) + ") is outside [0, R] x [w_min, w_max]");
      return std::nullopt;
    }
    return s;
  };

  switch (sc.kind) {
    case ScenarioKind::Validate:
      break;

    case ScenarioKind::Riemann: {
      RiemannPayload p;
      const auto left = check_state("left", rd.reals("left", true, 2));
      const auto right = check_state("right", rd.reals("right", true, 2));
      if (left) p.left = *left;
      if (right) p.right = *right;
      if (auto n = rd.count("samples", false)) {
        if (*n < 2) rd.fail("samples must be at least 2");
        p.samples = *n;
      }
      if (const Entry* e = rd.take("case3_marker", false)) {
        if (e->value == "left") p.case3_marker = Case3Marker::Left;
        else if (e->value == "right") p.case3_marker = Case3Marker::Right;
        else rd.fail(*e, "case3_marker must be 'left' or 'right'");
      }
      sc.payload = p;
      break;
    }

    case ScenarioKind::Godunov: {
      GodunovScenario g;
      if (auto d = rd.reals("domain", true, 2)) {
        g.a = (*d)[0];
        g.b = (*d)[1];
        if (!(g.b > g.a)) rd.fail("domain must satisfy a < b");
      }
      if (auto n = rd.count("N", true)) {
        if (*n == 0) rd.fail("N must be positive");
        g.cells = *n;
      }
      if (auto t = rd.real("t_final", true)) {
        if (!(*t >= 0.0)) rd.fail("t_final must be non-negative");
        g.t_final = *t;
      }
      if (auto ts = rd.reals("snapshot_times", false)) g.snapshot_times = *ts;
      if (const Entry* e = rd.take("ghost", false)) {
        if (e->value == "outflow") g.ghost = GhostPolicy::Outflow;
        else if (e->value == "periodic") g.ghost = GhostPolicy::Periodic;
        else rd.fail(*e, "ghost must be 'outflow' or 'periodic'");
      }
      if (auto c = rd.real("cfl", false)) {
        if (!(*c > 0.0 && *c <= 1.0)) rd.fail("cfl must lie in (0, 1]");
        g.cfl = *c;
      }
      if (const Entry* e = rd.take("initial", true)) {
        for (const auto& part : split(e->value, ';')) {
          const auto tok = words(part);
          std::vector<double> vals;
          for (const auto& t : tok)
            if (auto x = to_real(t)) vals.push_back(*x);
          if (tok.size() != 3 || vals.size() != 3) {
            rd.fail(*e, "initial pieces must be 'x rho w', got '" + part + "'");
            break;
          }
          const InitialPiece piece{vals[0], vals[1], vals[2]};
          if (params && !is_valid({piece.rho, piece.w}, *params))
            rd.fail(*e, "initial piece at x = " + num(piece.x_break) + " is outside the state domain");
          if (!g.initial.empty() && !(piece.x_break > g.initial.back().x_break))
            rd.fail(*e, "initial breaks must be strictly increasing");
          g.initial.push_back(piece);
        }
      }
      sc.payload = g;
      break;
    }

    case ScenarioKind::Ftl: {
      FtlPayload f;
      if (auto t = rd.real("T", true)) {
        if (!(*t >= 0.0)) rd.fail("T must be non-negative");
        f.T = *t;
      }
      if (auto dt = rd.real("dt", true)) {
        if (!(*dt > 0.0)) rd.fail("dt must be positive");
        f.dt = *dt;
      }
      if (auto k = rd.count("record_every", false)) f.record_every = std::max<std::size_t>(1, *k);
      const bool has_positions = rd.has("positions");
      const bool has_datum = rd.has("datum");
      if (has_positions == has_datum) {
        rd.fail("ftl needs exactly one of 'positions' or 'datum'");
        rd.take("positions", false);
        rd.take("datum", false);
      } else if (has_positions) {
        const Entry* e = rd.take("positions", true);
        const auto l = rd.real("l", true);
        if (l && e) {
          if (auto s = read_positions(rd, *e, *l)) {
            if (params) {
              try {
                require_admissible(*s, *params);
                f.state = std::move(*s);
              } catch (const std::exception& ex) {
                rd.fail(*e, ex.what());
              }
            }
          }
        }
      } else {
        const auto L = rd.real("L", true);
        if (auto n = rd.count("n", true)) {
          if (*n < 2) rd.fail("n must be at least 2");
          f.n = *n;
        }
        const Entry* e = rd.take("datum", true);
        if (L && e) f.datum = parse_datum(rd, *e, *L, params);
      }
      sc.payload = std::move(f);
      break;
    }

    case ScenarioKind::Converge: {
      ConvergePayload c;
      const auto L = rd.real("L", true);
      if (auto t = rd.real("T", true)) {
        if (!(*t > 0.0)) rd.fail("T must be positive");
        c.T = *t;
      }
      if (const Entry* e = rd.take("n_list", true)) {
        for (const auto& w : words(e->value)) {
          auto n = to_count(w);
          if (!n || *n < 2) {
            rd.fail(*e, "n_list entries must be integers >= 2, got '" + w + "'");
            break;
          }
          if (!c.n_list.empty() && *n <= c.n_list.back()) {
            rd.fail(*e, "n_list must be increasing");
            break;
          }
          c.n_list.push_back(*n);
        }
        if (c.n_list.size() < 2) rd.fail(*e, "n_list needs at least two entries");
      }
      if (auto r = rd.count("reference_cells", false)) c.options.reference_cells = *r;
      if (auto d = rd.real("dt_factor", false)) {
        if (!(*d > 0.0)) rd.fail("dt_factor must be positive");
        c.options.dt_factor = *d;
      }
      if (auto s = rd.count("seed", false)) c.options.seed = *s;
      const Entry* e = rd.take("datum", true);
      if (L && e) {
        if (auto d = parse_datum(rd, *e, *L, params)) c.datum = std::move(*d);
      }
      sc.payload = std::move(c);
      break;
    }

    case ScenarioKind::FundamentalDiagram: {
      DiagramPayload d;
      if (auto n = rd.count("rho_count", false)) d.rho_count = *n;
      if (auto n = rd.count("w_count", false)) d.w_count = *n;
      if (d.rho_count < 2 || d.w_count < 2) rd.fail("rho_count and w_count must be at least 2");
      sc.payload = d;
      break;
    }
  }

  rd.reject_unused(to_string(sc.kind));
  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return sc;
}

}  // namespace twophase
