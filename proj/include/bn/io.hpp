#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "bn/grid.hpp"
#include "bn/integrator.hpp"

namespace bn {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// `# bn-grid N=<n> xmax=<v> grading=<g>` (plus ` singular=<a>` for a product-integrated grid), then `x_i weight_i` lines.
void write_grid(std::ostream& os, const EnergyGrid& grid);
GridPtr read_grid(std::istream& is);

struct Checkpoint {
  Distribution dist;
  std::optional<RunState> state;
};

/**
 * Grid block, `t=<time>`, optional `# state` and `# step` lines, then one
 * f_i per line. Reading it back gives bit-identical values.
 */
void write_checkpoint(std::ostream& os, const Distribution& dist, const std::optional<RunState>& state = std::nullopt);
Checkpoint read_checkpoint(std::istream& is);

Checkpoint load_checkpoint(const std::string& path);
void save_checkpoint(const std::string& path, const Distribution& dist, const std::optional<RunState>& state = std::nullopt);

}  // namespace bn
