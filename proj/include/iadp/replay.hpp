#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iadp/harness.hpp"

namespace iadp {

struct ReplayOptions {
  size_t start_tick = 0;
  std::optional<size_t> end_tick;              // exclusive; defaults to all rows
  bool admit = true;                           // feed samples into the buffer
  std::optional<nlohmann::json> buffer_snapshot;  // initial buffers
  std::optional<double> k_t_override;
  std::optional<double> k_e_override;
};

struct ReplayResult {
  // replayed[j] holds the 4 weight trajectories of joint j+1, row-aligned
  // with the trace segment.
  std::vector<std::vector<Eigen::Vector4d>> replayed;
  bool exact_match = true;   // bitwise against the trace's weight columns
  double max_abs_diff = 0.0;
  size_t rows = 0;
};

/// Re-executes the critic update offline from the trace's (e1, e2, du_b)
/// columns under the trace's embedded config. Over a full run with default
/// options this reproduces the logged weight columns exactly.
ReplayResult replay_weights(const Trace& trace, const ReplayOptions& opts = {});

}  // namespace iadp
