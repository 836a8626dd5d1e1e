#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "iadp/config.hpp"
#include "iadp/errors.hpp"
#include "iadp/harness.hpp"
#include "iadp/plot.hpp"
#include "iadp/replay.hpp"

namespace {

using iadp::ExperimentConfig;
using nlohmann::json;

struct ConfigArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  bool strict = false;
  bool lenient = false;
  std::optional<unsigned> seed;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "config file (JSON)");
  cmd->add_option("--preset", args.preset,
                  "built-in preset (see `presets` subcommand)");
  cmd->add_option("--override", args.overrides,
                  "dotted-path override, e.g. controller.beta=0.2")
      ->take_all();
  cmd->add_flag("--strict", args.strict, "abort on any validator failure");
  cmd->add_flag("--lenient", args.lenient, "downgrade validator failures to warnings");
  cmd->add_option("--seed", args.seed, "rng seed recorded in the run");
}

ExperimentConfig resolve_config(const ConfigArgs& args) {
  if (args.config_path.empty() == args.preset.empty())
    throw iadp::ValidationError("exactly one of --config or --preset is required");
  json tree;
  if (!args.preset.empty()) {
    tree = iadp::preset_config(args.preset);
  } else {
    std::ifstream in(args.config_path);
    if (!in)
      throw iadp::ValidationError("cannot open config file: " + args.config_path);
    try {
      in >> tree;
    } catch (const json::parse_error& e) {
      throw iadp::ValidationError("config parse error: " + std::string(e.what()));
    }
  }
  for (const std::string& ov : args.overrides) iadp::apply_override(tree, ov);
  ExperimentConfig cfg = iadp::config_from_json(tree);
  if (args.strict) cfg.strict = true;
  if (args.lenient) cfg.strict = false;
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

// Returns false (validation failed) after printing the report.
bool report_validation(const ExperimentConfig& cfg) {
  const iadp::ValidationReport rep = iadp::validate_config(cfg);
  for (const std::string& w : rep.warnings)
    std::cerr << "warning: " << w << "\n";
  for (const std::string& f : rep.failures)
    std::cerr << "validation: " << f << "\n";
  if (rep.pass && rep.m_lower.size() > 0) {
    std::cerr << "inertia sweep: eigenvalues [" << rep.eig_min << ", "
              << rep.eig_max << "], per-joint diagonal floor [";
    for (int i = 0; i < rep.m_lower.size(); ++i)
      std::cerr << (i ? ", " : "") << rep.m_lower(i);
    std::cerr << "]\n";
  }
  return rep.pass;
}

void print_metrics_table(const iadp::RunMetrics& m) {
  std::printf("%-6s %-12s %-10s %-8s %-11s %-10s %-10s\n", "joint",
              "rms_settled", "max_e1", "settled", "W_settle_t", "xi_max",
              "att_dom");
  for (int i = 0; i < m.joints; ++i) {
    const iadp::JointMetrics& jm = m.per_joint[static_cast<size_t>(i)];
    auto num = [](const std::optional<double>& v) {
      if (!v) return std::string("-");
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4g", *v);
      return std::string(buf);
    };
    std::printf("%-6d %-12s %-10s %-8s %-11s %-10s %-10s\n", i + 1,
                num(jm.tracking_rms_settled).c_str(),
                num(jm.max_e1_settled).c_str(),
                jm.settled_ok ? (*jm.settled_ok ? "yes" : "NO") : "-",
                num(jm.weight_settling_time).c_str(), num(jm.xi_max).c_str(),
                num(jm.attenuation_dominance).c_str());
  }
}

int cmd_run(const ConfigArgs& args, const std::string& outdir) {
  const ExperimentConfig cfg = resolve_config(args);
  const bool ok = report_validation(cfg);
  if (!ok && cfg.strict) return iadp::kExitValidation;
  const iadp::RunOutput out = iadp::run_experiment(cfg, outdir);
  std::cerr << "trace:   " << out.trace_path << "\n"
            << "metrics: " << out.metrics_path << "\n"
            << "buffers: " << out.buffers_path << "\n";
  print_metrics_table(out.metrics);
  return iadp::kExitOk;
}

int cmd_validate(const ConfigArgs& args) {
  const ExperimentConfig cfg = resolve_config(args);
  const bool ok = report_validation(cfg);
  std::cout << (ok ? "valid" : "invalid") << "\n";
  return ok ? iadp::kExitOk : iadp::kExitValidation;
}

int cmd_metrics(const std::string& trace_path, const std::string& out_path) {
  const iadp::Trace trace = iadp::read_trace(trace_path);
  const iadp::RunMetrics m = iadp::compute_metrics(trace);
  const json j = iadp::metrics_to_json(m);
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
    std::cerr << "metrics: " << out_path << "\n";
  }
  print_metrics_table(m);
  return iadp::kExitOk;
}

int cmd_plot(const std::string& trace_path, const std::string& kind,
             const std::string& outdir) {
  const iadp::Trace trace = iadp::read_trace(trace_path);
  const auto files = iadp::render_plots(trace, iadp::plot_kind_from_name(kind));
  std::filesystem::create_directories(outdir);
  for (const iadp::PlotFile& f : files) {
    const auto path = std::filesystem::path(outdir) / f.filename;
    std::ofstream out(path);
    out << f.svg;
    std::cerr << "plot: " << path.string() << "\n";
  }
  return iadp::kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& buffer_path,
               std::optional<size_t> start, std::optional<size_t> end,
               bool no_admit, std::optional<double> kt, std::optional<double> ke,
               const std::string& out_path) {
  const iadp::Trace trace = iadp::read_trace(trace_path);
  iadp::ReplayOptions opts;
  if (start) opts.start_tick = *start;
  opts.end_tick = end;
  opts.admit = !no_admit;
  opts.k_t_override = kt;
  opts.k_e_override = ke;
  if (!buffer_path.empty()) {
    std::ifstream in(buffer_path);
    if (!in)
      throw std::runtime_error("cannot open buffer snapshot: " + buffer_path);
    json snap;
    in >> snap;
    opts.buffer_snapshot = snap;
  }
  const iadp::ReplayResult res = iadp::replay_weights(trace, opts);
  std::cout << "rows replayed: " << res.rows << "\n"
            << "exact match:   " << (res.exact_match ? "yes" : "no") << "\n"
            << "max |diff|:    " << iadp::format_double(res.max_abs_diff)
            << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    const size_t n = res.replayed.size();
    out << "row";
    for (size_t i = 1; i <= n; ++i)
      for (int w = 1; w <= 4; ++w) out << ",What" << i << "_" << w;
    out << "\n";
    for (size_t r = 0; r < res.rows; ++r) {
      out << r;
      for (size_t i = 0; i < n; ++i)
        for (int w = 0; w < 4; ++w)
          out << "," << iadp::format_double(res.replayed[i][r](w));
      out << "\n";
    }
    std::cerr << "replayed weights: " << out_path << "\n";
  }
  return iadp::kExitOk;
}

int cmd_presets(const std::string& show) {
  if (show.empty()) {
    for (const std::string& name : iadp::preset_names())
      std::cout << name << "\n";
    return iadp::kExitOk;
  }
  std::cout << iadp::preset_config(show).dump(2) << "\n";
  return iadp::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iadp: incremental adaptive-dynamic-programming tracking control"};
  app.require_subcommand(1);

  ConfigArgs run_args, val_args;
  std::string outdir = "out";
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  add_config_flags(run, run_args);
  run->add_option("-o,--outdir", outdir, "output directory");

  CLI::App* validate = app.add_subcommand("validate", "validate a config");
  add_config_flags(validate, val_args);

  std::string trace_path, metrics_out;
  CLI::App* metrics = app.add_subcommand("metrics", "recompute metrics from a trace");
  metrics->add_option("--trace", trace_path, "trace CSV")->required();
  metrics->add_option("-o,--out", metrics_out, "metrics JSON path");

  std::string plot_trace, plot_kind_name = "errors", plot_outdir = "plots";
  CLI::App* plot = app.add_subcommand("plot", "render SVG plots from a trace");
  plot->add_option("--trace", plot_trace, "trace CSV")->required();
  plot->add_option("--kind", plot_kind_name, "errors|weights|xi|taskspace");
  plot->add_option("-o,--outdir", plot_outdir, "output directory");

  std::string rep_trace, rep_buffer, rep_out;
  std::optional<size_t> rep_start, rep_end;
  std::optional<double> rep_kt, rep_ke;
  bool rep_no_admit = false;
  CLI::App* replay = app.add_subcommand("replay", "re-run the critic update from a trace");
  replay->add_option("--trace", rep_trace, "trace CSV")->required();
  replay->add_option("--buffer", rep_buffer, "buffer snapshot JSON to start from");
  replay->add_option("--start", rep_start, "first row (default 0)");
  replay->add_option("--end", rep_end, "one past the last row");
  replay->add_flag("--no-admit", rep_no_admit, "freeze the buffer during replay");
  replay->add_option("--kt", rep_kt, "override realtime gain k_t");
  replay->add_option("--ke", rep_ke, "override experience gain k_e");
  replay->add_option("-o,--out", rep_out, "write replayed weight columns here");

  std::string preset_show;
  CLI::App* presets = app.add_subcommand("presets", "list or show built-in presets");
  presets->add_option("--show", preset_show, "dump one preset's config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args, outdir);
    if (validate->parsed()) return cmd_validate(val_args);
    if (metrics->parsed()) return cmd_metrics(trace_path, metrics_out);
    if (plot->parsed()) return cmd_plot(plot_trace, plot_kind_name, plot_outdir);
    if (replay->parsed())
      return cmd_replay(rep_trace, rep_buffer, rep_start, rep_end, rep_no_admit,
                        rep_kt, rep_ke, rep_out);
    if (presets->parsed()) return cmd_presets(preset_show);
  } catch (const iadp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return iadp::kExitValidation;
  } catch (const iadp::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return iadp::kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return iadp::kExitError;
  }
  return iadp::kExitError;
}
