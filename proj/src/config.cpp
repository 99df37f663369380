#include "bn/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "bn/equilibrium.hpp"
#include "bn/io.hpp"
#include "bn/measures.hpp"

namespace bn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::be: return "be";
    case InitialKind::singular: return "singular";
    case InitialKind::bump: return "bump";
    case InitialKind::file: return "file";
  }
  return "bump";
}

InitialKind kind_from(const std::string& s) {
  if (s == "be") return InitialKind::be;
  if (s == "singular") return InitialKind::singular;
  if (s == "bump") return InitialKind::bump;
  if (s == "file") return InitialKind::file;
  throw std::invalid_argument("initial.kind must be be, singular, bump or file");
}

double to_real(const std::string& v) {
  if (v == "inf" || v == "infinity") return HUGE_VAL;
  return parse_double(v);
}

bool to_flag(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

int to_int(const std::string& v) {
  std::size_t used = 0;
  const long n = std::stol(v, &used);
  if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return static_cast<int>(n);
}

std::string real_text(double v) { return std::isinf(v) ? "inf" : format_double(v); }

void assign(RunConfig& c, const std::string& key, const std::string& v) {
  auto& g = c.grid;
  auto& in = c.initial;
  auto& s = c.controls;
  auto& d = c.diagnostics;
  if (key == "grid.node_count") g.node_count = to_int(v);
  else if (key == "grid.x_max") g.x_max = to_real(v);
  else if (key == "grid.grading") g.grading = Grading::parse(v);
  else if (key == "grid.first_node") g.first_node = v == "none" ? std::optional<double>() : std::optional<double>(to_real(v));
  else if (key == "grid.singular_exponent") g.singular_exponent = to_real(v);
  else if (key == "initial.kind") in.kind = kind_from(v);
  else if (key == "initial.alpha") in.alpha = to_real(v);
  else if (key == "initial.beta") in.beta = to_real(v);
  else if (key == "initial.scale") in.scale = to_real(v);
  else if (key == "initial.decay") in.decay = to_real(v);
  else if (key == "initial.center") in.center = to_real(v);
  else if (key == "initial.width") in.width = to_real(v);
  else if (key == "initial.height") in.height = to_real(v);
  else if (key == "initial.path") in.path = v;
  else if (key == "controls.dt_init") s.dt_init = to_real(v);
  else if (key == "controls.dt_max") s.dt_max = to_real(v);
  else if (key == "controls.cfl_loss") s.cfl_loss = to_real(v);
  else if (key == "controls.rel_change_cap") s.rel_change_cap = to_real(v);
  else if (key == "controls.rel_change_floor") s.rel_change_floor = to_real(v);
  else if (key == "controls.blowup_threshold") s.blowup_threshold = to_real(v);
  else if (key == "controls.t_end") s.t_end = to_real(v);
  else if (key == "scheme") c.scheme = scheme_from_string(v);
  else if (key == "quadrature") c.quadrature = quadrature_from_string(v);
  else if (key == "remap") c.remap_on = to_flag(v);
  else if (key == "diagnostics.delta") d.delta = to_real(v);
  else if (key == "diagnostics.wsup_alpha") d.wsup_alpha = to_real(v);
  else if (key == "diagnostics.wsup_gamma") d.wsup_gamma = to_real(v);
  else if (key == "diagnostics.gbeta") d.gbeta = to_real(v);
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "snapshot_stride") c.snapshot_stride = to_int(v);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  grid.validate();
  controls.validate();
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
  if (!(diagnostics.delta > 0.0)) throw std::invalid_argument("diagnostics.delta must be positive");
  if (!(diagnostics.gbeta > 1.0)) throw std::invalid_argument("diagnostics.gbeta must exceed 1");
  if (!(diagnostics.wsup_alpha >= 0.0 && diagnostics.wsup_alpha < 1.0))
    throw std::invalid_argument("diagnostics.wsup_alpha must lie in [0, 1)");
  if (initial.kind == InitialKind::file && initial.path.empty()) throw std::invalid_argument("initial.path is required for kind = file");
  if (initial.kind == InitialKind::bump && !(initial.height >= 0.0 && initial.width > 0.0))
    throw std::invalid_argument("bump needs height >= 0 and width > 0");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value", lineno);
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'", lineno);
    try {
      assign(cfg, key, value);
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what(), 0);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path, 0);
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), e.line());
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("grid.node_count", std::to_string(c.grid.node_count));
  e.emplace_back("grid.x_max", real_text(c.grid.x_max));
  e.emplace_back("grid.grading", c.grid.grading.to_string());
  e.emplace_back("grid.first_node", c.grid.first_node ? real_text(*c.grid.first_node) : "none");
  e.emplace_back("grid.singular_exponent", real_text(c.grid.singular_exponent));
  e.emplace_back("initial.kind", kind_name(c.initial.kind));
  e.emplace_back("initial.alpha", real_text(c.initial.alpha));
  e.emplace_back("initial.beta", real_text(c.initial.beta));
  e.emplace_back("initial.scale", real_text(c.initial.scale));
  e.emplace_back("initial.decay", real_text(c.initial.decay));
  e.emplace_back("initial.center", real_text(c.initial.center));
  e.emplace_back("initial.width", real_text(c.initial.width));
  e.emplace_back("initial.height", real_text(c.initial.height));
  if (!c.initial.path.empty()) e.emplace_back("initial.path", c.initial.path);
  e.emplace_back("controls.dt_init", real_text(c.controls.dt_init));
  e.emplace_back("controls.dt_max", real_text(c.controls.dt_max));
  e.emplace_back("controls.cfl_loss", real_text(c.controls.cfl_loss));
  e.emplace_back("controls.rel_change_cap", real_text(c.controls.rel_change_cap));
  e.emplace_back("controls.rel_change_floor", real_text(c.controls.rel_change_floor));
  e.emplace_back("controls.blowup_threshold", real_text(c.controls.blowup_threshold));
  e.emplace_back("controls.t_end", real_text(c.controls.t_end));
  e.emplace_back("scheme", to_string(c.scheme));
  e.emplace_back("quadrature", to_string(c.quadrature));
  e.emplace_back("remap", c.remap_on ? "true" : "false");
  e.emplace_back("diagnostics.delta", real_text(c.diagnostics.delta));
  e.emplace_back("diagnostics.wsup_alpha", real_text(c.diagnostics.wsup_alpha));
  e.emplace_back("diagnostics.wsup_gamma", real_text(c.diagnostics.wsup_gamma));
  e.emplace_back("diagnostics.gbeta", real_text(c.diagnostics.gbeta));
  e.emplace_back("output_dir", c.output_dir);
  e.emplace_back("snapshot_stride", std::to_string(c.snapshot_stride));
  return e;
}

RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
  RunConfig cfg;
  for (const auto& [k, v] : entries) {
    try {
      assign(cfg, k, v);
    } catch (const std::exception& e) {
      throw ConfigError(k + ": " + e.what(), 0);
    }
  }
  cfg.validate();
  return cfg;
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  for (const auto& [k, v] : config_entries(cfg)) os << k << " = " << v << '\n';
}

InitialState make_initial(const RunConfig& cfg, const std::string& base_dir) {
  const auto& in = cfg.initial;
  InitialState st;
  if (in.kind == InitialKind::file) {
    std::filesystem::path p(in.path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    Checkpoint cp = load_checkpoint(p.string());
    st.dist = std::move(cp.dist);
    st.resume = cp.state;
    return st;
  }
  GridPtr grid = build_grid(cfg.grid);
  switch (in.kind) {
    case InitialKind::be: {
      BEParams bp;
      bp.alpha = in.alpha;
      bp.beta = in.beta;
      st.dist = be_distribution(bp, grid);
      break;
    }
    case InitialKind::singular:
      st.dist = singular_init(in.alpha, in.scale, in.decay, grid);
      break;
    case InitialKind::bump: {
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double u = (grid->node(i) - in.center) / in.width;
        v[i] = in.height * std::exp(-u * u);
      }
      st.dist = Distribution(grid, std::move(v));
      break;
    }
    case InitialKind::file: break;
  }
  return st;
}

}  // namespace bn
