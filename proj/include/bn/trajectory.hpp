#pragma once

#include <string>
#include <vector>

#include "bn/grid.hpp"

namespace bn {

/// One row of the per-step diagnostics stream.
struct DiagnosticsRecord {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double l1_total = 0.0;  // \int f dx
  double l1_local = 0.0;  // \int_0^delta f dx
  double wsup = 0.0;      // sup x^a (1+x)^g f
  double supxf = 0.0;
  double gbeta = 0.0;
  double dt = 0.0;        // step that produced this state; 0 for the initial row
};

enum class StopReason { none, reached_t_end, blowup_threshold, step_underflow, numeric_fault };

std::string to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

struct Trajectory {
  std::vector<Distribution> snapshots;
  std::vector<DiagnosticsRecord> records;
  StopReason stop_reason = StopReason::none;
  std::string fault_message;
  /// delta used for the l1_local column.
  double delta = 1.0;
};

}  // namespace bn
