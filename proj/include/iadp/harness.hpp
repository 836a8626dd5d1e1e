#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iadp/config.hpp"

namespace iadp {

/// Column-major run trace. The embedded config makes every metric
/// recomputable from the CSV file alone.
struct Trace {
  nlohmann::json config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> cols;  // cols[c][row]

  size_t rows() const { return cols.empty() ? 0 : cols[0].size(); }
  int column_index(const std::string& name) const;
  const std::vector<double>& col(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Round-trip double formatting shared by every writer (%.17g).
std::string format_double(double v);

void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

struct JointMetrics {
  std::optional<double> tracking_rms_settled;
  std::optional<double> tracking_rms_full;
  std::optional<double> max_e1_settled;
  std::optional<bool> settled_ok;
  std::optional<double> weight_settling_time;
  std::optional<double> xi_max;
  std::optional<double> xi_p95;
  std::optional<double> attenuation_dominance;
};

struct RunMetrics {
  int joints = 0;
  size_t ticks = 0;
  double duration = 0.0;
  std::vector<JointMetrics> per_joint;
  std::vector<std::pair<double, double>> segments;  // [start, end)
};

nlohmann::json metrics_to_json(const RunMetrics& m);

/// Deterministic metrics from a trace; see README for the definitions.
RunMetrics compute_metrics(const Trace& trace);

struct SimResult {
  Trace trace;
  std::vector<ExperienceBuffer> final_buffers;  // one per joint
};

/// Executes the per-tick control loop on the configured plant and returns the
/// full trace. Bitwise deterministic for a given config. Throws
/// DivergenceError (with the tick index and a state dump) on blowup.
SimResult simulate(const ExperimentConfig& cfg);

struct RunOutput {
  Trace trace;
  RunMetrics metrics;
  std::string trace_path;
  std::string metrics_path;
  std::string buffers_path;
};

/// simulate + compute_metrics + persistence: <outdir>/trace.csv,
/// <outdir>/metrics.json, <outdir>/buffers.json.
RunOutput run_experiment(const ExperimentConfig& cfg, const std::string& outdir);

/// Final experience-buffer snapshots, replayable via the replay module.
nlohmann::json buffers_to_json(const std::vector<ExperienceBuffer>& buffers);
std::vector<ExperienceBuffer> buffers_from_json(const nlohmann::json& j);

}  // namespace iadp
