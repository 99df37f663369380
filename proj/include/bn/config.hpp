#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bn/diagnostics.hpp"
#include "bn/grid.hpp"
#include "bn/integrator.hpp"

namespace bn {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  /// 1-based line of the offending entry; 0 when not tied to a line
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class InitialKind { be, singular, bump, file };

struct InitialData {
  InitialKind kind = InitialKind::bump;
  double alpha = 1.0;   // be, singular
  double beta = 1.0;    // be
  double scale = 1.0;   // singular
  double decay = 1.0;   // singular
  double center = 1.0;  // bump
  double width = 0.5;   // bump
  double height = 1.0;  // bump; 0 gives the zero state
  std::string path;     // file: snapshot or checkpoint
};

struct RunConfig {
  GridSpec grid;
  InitialData initial;
  StepControls controls;
  Scheme scheme = Scheme::etd_midpoint;
  Quadrature quadrature = Quadrature::nodal;
  bool remap_on = true;
  DiagnosticsSettings diagnostics;
  std::string output_dir = "out";
  int snapshot_stride = 1;

  void validate() const;
};

/**
 * Flat `key = value` lines with dotted sections (`grid.node_count = 128`).
 * `#` starts a comment. Unknown or repeated keys are errors.
 */
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Every key with its resolved value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);
RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries);
void write_config(std::ostream& os, const RunConfig& cfg);

struct InitialState {
  Distribution dist;
  std::optional<RunState> resume;
};

/// Builds the initial distribution. Relative file paths resolve against base_dir.
InitialState make_initial(const RunConfig& cfg, const std::string& base_dir = ".");

}  // namespace bn
