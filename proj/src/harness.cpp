#include "iadp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iadp/control.hpp"
#include "iadp/errors.hpp"
#include "iadp/tde.hpp"

namespace iadp {

namespace {

std::vector<std::string> trace_columns(int n) {
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= n; ++i) {
    const std::string s = std::to_string(i);
    cols.push_back("q" + s);
    cols.push_back("qd" + s);
    cols.push_back("e" + s + "_1");
    cols.push_back("e" + s + "_2");
    cols.push_back("u" + s);
    cols.push_back("du_f" + s);
    cols.push_back("du_b" + s);
    cols.push_back("xi" + s);
    for (int w = 1; w <= 4; ++w)
      cols.push_back("What" + s + "_" + std::to_string(w));
    cols.push_back("rank" + s);
  }
  return cols;
}

}  // namespace

int Trace::column_index(const std::string& name) const {
  for (size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return static_cast<int>(c);
  return -1;
}

bool Trace::has_column(const std::string& name) const {
  return column_index(name) >= 0;
}

const std::vector<double>& Trace::col(const std::string& name) const {
  const int c = column_index(name);
  if (c < 0) throw std::out_of_range("trace has no column '" + name + "'");
  return cols[static_cast<size_t>(c)];
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for write: " + path);
  out << "# iadp-trace v1\n";
  out << "# config: " << trace.config.dump() << "\n";
  for (size_t c = 0; c < trace.columns.size(); ++c)
    out << (c ? "," : "") << trace.columns[c];
  out << "\n";
  const size_t nrows = trace.rows();
  for (size_t r = 0; r < nrows; ++r) {
    for (size_t c = 0; c < trace.cols.size(); ++c)
      out << (c ? "," : "") << format_double(trace.cols[c][r]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing trace file: " + path);
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace trace;
  std::string line;
  bool header_done = false;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config: ";
      if (line.rfind(key, 0) == 0)
        trace.config = nlohmann::json::parse(line.substr(key.size()));
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    if (!header_done) {
      while (std::getline(ls, cell, ',')) trace.columns.push_back(cell);
      trace.cols.assign(trace.columns.size(), {});
      header_done = true;
      continue;
    }
    size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= trace.columns.size())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": too many cells");
      trace.cols[c++].push_back(std::strtod(cell.c_str(), nullptr));
    }
    if (c != trace.columns.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(trace.columns.size()) +
                               " cells, got " + std::to_string(c));
  }
  if (!header_done) throw std::runtime_error(path + ": missing column header");
  return trace;
}

SimResult simulate(const ExperimentConfig& cfg) {
  const ValidationReport rep = validate_config(cfg);
  if (!rep.pass && cfg.strict) {
    std::string msg = "config validation failed:";
    for (const std::string& f : rep.failures) msg += "\n  " + f;
    throw ValidationError(msg);
  }
  const int n = cfg.n();
  const PlantModel model = make_plant(cfg);
  const TrajectoryProgram traj = make_trajectory(cfg);
  const size_t ticks = static_cast<size_t>(std::llround(cfg.duration / cfg.dt));

  PlantState state;
  state.t = 0.0;
  state.q = Eigen::VectorXd::Zero(n);
  state.qdot = Eigen::VectorXd::Zero(n);

  std::vector<DiffEstimator> diff(static_cast<size_t>(n), DiffEstimator(cfg.dt));
  std::vector<TdeChannel> tde;
  std::vector<ErrorSubsystem> sub;
  std::vector<SaturatedPolicy> pol;
  std::vector<Eigen::Matrix2d> Q;
  std::vector<CriticState> critic;
  std::vector<ExperienceBuffer> buf;
  for (int i = 0; i < n; ++i) {
    tde.push_back(TdeChannel{cfg.gbar(i), cfg.dt});
    sub.push_back(ErrorSubsystem{cfg.k1(i), cfg.k2(i), cfg.gbar(i)});
    pol.push_back(SaturatedPolicy{cfg.beta, cfg.c_bar(i)});
    Q.push_back(cfg.q_diag[static_cast<size_t>(i)].asDiagonal());
    CriticState cs;
    cs.gamma = cfg.gamma_diag[static_cast<size_t>(i)].asDiagonal();
    cs.k_t = cfg.k_t;
    cs.k_e = cfg.k_e;
    critic.push_back(cs);
    buf.emplace_back(cfg.buffer_capacity, cfg.buffer_policy);
  }
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (cfg.joint_order) order = *cfg.joint_order;

  Trace trace;
  trace.config = config_to_json(cfg);
  trace.columns = trace_columns(n);
  trace.cols.assign(trace.columns.size(), {});
  for (auto& c : trace.cols) c.reserve(ticks);

  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(n);
  std::vector<double> accel_meas(static_cast<size_t>(n), 0.0);
  Eigen::VectorXd u(n), du_f(n), du_b(n), h_hat(n), xi(n);
  std::vector<int> rank(static_cast<size_t>(n), 0);

  for (size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const RefSample ref = traj.sample(t);
    for (int i = 0; i < n; ++i)
      accel_meas[static_cast<size_t>(i)] =
          diff[static_cast<size_t>(i)].update(state.qdot(i));

    // Per-joint controllers and learners read only this tick's snapshot, so
    // the processing order cannot change the result.
    for (int i : order) {
      const size_t si = static_cast<size_t>(i);
      tde[si].begin_tick(accel_meas[si]);
      const Eigen::Vector2d e(state.q(i) - ref.q(i),
                              state.qdot(i) - ref.qd(i));
      const ReferencePoint rp{ref.q(i), ref.qd(i), ref.qdd(i)};
      h_hat(i) = estimate_h(tde[si]);
      if (tde[si].warm) {
        du_f(i) = feedforward(sub[si], rp, e, accel_meas[si]);
      } else {
        // Warm-up convention: no delayed acceleration yet.
        du_f(i) = feedforward(sub[si], rp, e, 0.0);
      }
      const Eigen::Vector2d gpw =
          features::grad_phi(e).transpose() * critic[si].w_hat;
      du_b(i) = policy(pol[si], sub[si], gpw);
      double ui = assemble_torque(u_prev(i), du_f(i), du_b(i));
      if (cfg.torque_clamp)
        ui = std::clamp(ui, -*cfg.torque_clamp, *cfg.torque_clamp);
      u(i) = ui;
      const Regressand reg = make_regressand(sub[si], pol[si], Q[si], e, du_b(i));
      if (tde[si].warm) buf[si].admit(reg);
      try {
        weight_step(critic[si], reg, buf[si], cfg.dt);
      } catch (const DivergenceError& err) {
        throw DivergenceError("tick " + std::to_string(k) + " joint " +
                              std::to_string(i + 1) + ": " + err.what());
      }
      rank[si] = buf[si].rank_report().rank;
    }

    // Diagnostic TDE error from the simulator's privileged model knowledge;
    // the controller never sees these values.
    Eigen::VectorXd qdd_true;
    try {
      qdd_true = forward_accel(model, state, u);
    } catch (const DivergenceError& err) {
      throw DivergenceError("tick " + std::to_string(k) + ": " +
                            std::string(err.what()));
    }
    const Eigen::MatrixXd M = model.inertia(state.q);
    for (int i = 0; i < n; ++i) {
      const double g_i = 1.0 / M(i, i);
      const double f_i = qdd_true(i) - g_i * u(i);
      const double h_true =
          (1.0 / cfg.gbar(i) - 1.0 / g_i) * qdd_true(i) + f_i / g_i;
      xi(i) = tde_error(tde[static_cast<size_t>(i)], h_true);
    }

    size_t c = 0;
    trace.cols[c++].push_back(t);
    for (int i = 0; i < n; ++i) {
      const size_t si = static_cast<size_t>(i);
      trace.cols[c++].push_back(state.q(i));
      trace.cols[c++].push_back(ref.q(i));
      trace.cols[c++].push_back(state.q(i) - ref.q(i));
      trace.cols[c++].push_back(state.qdot(i) - ref.qd(i));
      trace.cols[c++].push_back(u(i));
      trace.cols[c++].push_back(du_f(i));
      trace.cols[c++].push_back(du_b(i));
      trace.cols[c++].push_back(xi(i));
      for (int w = 0; w < 4; ++w)
        trace.cols[c++].push_back(critic[si].w_hat(w));
      trace.cols[c++].push_back(static_cast<double>(rank[si]));
    }

    for (int i = 0; i < n; ++i) tde[static_cast<size_t>(i)].end_tick(u(i));
    u_prev = u;
    try {
      state = euler_step(model, state, u, cfg.dt);
    } catch (const DivergenceError& err) {
      throw DivergenceError("tick " + std::to_string(k) + ": " +
                            std::string(err.what()));
    }
  }
  return SimResult{std::move(trace), std::move(buf)};
}

namespace {

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t idx = static_cast<size_t>(
      std::min<double>(std::ceil(p * static_cast<double>(v.size())),
                       static_cast<double>(v.size())) - 1.0);
  return v[idx];
}

}  // namespace

RunMetrics compute_metrics(const Trace& trace) {
  RunMetrics m;
  if (trace.config.is_null())
    throw std::runtime_error("trace has no embedded config; cannot compute metrics");
  const ExperimentConfig cfg = config_from_json(trace.config);
  m.joints = cfg.n();
  m.ticks = trace.rows();
  m.duration = cfg.duration;
  double start = 0.0;
  for (const Segment& s : cfg.segments) {
    if (start >= cfg.duration) break;
    m.segments.emplace_back(start, std::min(start + s.duration, cfg.duration));
    start += s.duration;
  }
  // The reference holds the last segment once the program runs out.
  if (!m.segments.empty() && m.segments.back().second < cfg.duration)
    m.segments.back().second = cfg.duration;
  if (m.ticks == 0) return m;

  const std::vector<double>& t = trace.col("t");
  const size_t window_ticks =
      static_cast<size_t>(std::llround(cfg.weight_settle_window / cfg.dt));
  for (int i = 1; i <= m.joints; ++i) {
    JointMetrics jm;
    const std::string s = std::to_string(i);
    const std::vector<double>& e1 = trace.col("e" + s + "_1");
    const std::vector<double>& du_b = trace.col("du_b" + s);
    const std::vector<double>& xi = trace.col("xi" + s);

    double sum2_full = 0.0;
    for (double v : e1) sum2_full += v * v;
    jm.tracking_rms_full = std::sqrt(sum2_full / static_cast<double>(e1.size()));

    // Settled windows: [segment start + settle_time, segment end).
    double sum2 = 0.0, maxabs = 0.0;
    size_t count = 0;
    bool ok = true;
    for (size_t r = 0; r < m.ticks; ++r) {
      bool settled = false;
      for (const auto& [a, b] : m.segments)
        if (t[r] >= a + cfg.settle_time && t[r] < b) settled = true;
      if (!settled) continue;
      sum2 += e1[r] * e1[r];
      maxabs = std::max(maxabs, std::abs(e1[r]));
      ++count;
    }
    if (count > 0) {
      jm.tracking_rms_settled = std::sqrt(sum2 / static_cast<double>(count));
      jm.max_e1_settled = maxabs;
      ok = maxabs < cfg.settle_threshold;
      jm.settled_ok = ok;
    }

    // Weight settling: first t after which every trailing-window delta stays
    // below tolerance until the end of the run.
    if (m.ticks > window_ticks && window_ticks > 0) {
      Eigen::Vector4d w_now, w_then;
      size_t last_violation = 0;
      bool any_violation = false;
      bool last_sample_violates = false;
      for (size_t r = window_ticks; r < m.ticks; ++r) {
        for (int w = 0; w < 4; ++w) {
          const std::string ws = "What" + s + "_" + std::to_string(w + 1);
          w_now(w) = trace.col(ws)[r];
          w_then(w) = trace.col(ws)[r - window_ticks];
        }
        if ((w_now - w_then).norm() >= cfg.weight_settle_tol) {
          any_violation = true;
          last_violation = r;
          last_sample_violates = (r == m.ticks - 1);
        }
      }
      if (last_sample_violates) {
        jm.weight_settling_time = std::nullopt;
      } else if (any_violation) {
        jm.weight_settling_time = t[last_violation + 1];
      } else {
        jm.weight_settling_time = t[window_ticks];
      }
    }

    std::vector<double> xi_abs;
    xi_abs.reserve(xi.size());
    for (double v : xi) xi_abs.push_back(std::abs(v));
    jm.xi_max = *std::max_element(xi_abs.begin(), xi_abs.end());
    jm.xi_p95 = percentile(xi_abs, 0.95);

    // Fraction of post-warm-up ticks where the attenuation term dominates the
    // running empirical TDE-error bound. Reported, never asserted.
    double xi_bar = 0.0;
    size_t dominated = 0, considered = 0;
    for (size_t r = 1; r < m.ticks; ++r) {
      xi_bar = std::max(xi_bar, std::abs(xi[r]));
      if (cfg.c_bar(i - 1) * std::abs(du_b[r]) > xi_bar) ++dominated;
      ++considered;
    }
    if (considered > 0)
      jm.attenuation_dominance =
          static_cast<double>(dominated) / static_cast<double>(considered);
    m.per_joint.push_back(jm);
  }
  return m;
}

nlohmann::json metrics_to_json(const RunMetrics& m) {
  nlohmann::json j;
  j["joints"] = m.joints;
  j["ticks"] = m.ticks;
  j["duration"] = m.duration;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& [a, b] : m.segments) segs.push_back({a, b});
  j["segments"] = segs;
  nlohmann::json pj = nlohmann::json::array();
  auto put = [](nlohmann::json& node, const std::string& key, const auto& opt) {
    if (opt)
      node[key] = *opt;
    else
      node[key] = nullptr;
  };
  for (const JointMetrics& jm : m.per_joint) {
    nlohmann::json node;
    put(node, "tracking_rms_settled", jm.tracking_rms_settled);
    put(node, "tracking_rms_full", jm.tracking_rms_full);
    put(node, "max_e1_settled", jm.max_e1_settled);
    put(node, "settled_ok", jm.settled_ok);
    put(node, "weight_settling_time", jm.weight_settling_time);
    put(node, "xi_max", jm.xi_max);
    put(node, "xi_p95", jm.xi_p95);
    put(node, "attenuation_dominance", jm.attenuation_dominance);
    pj.push_back(node);
  }
  j["per_joint"] = pj;
  return j;
}

nlohmann::json buffers_to_json(const std::vector<ExperienceBuffer>& buffers) {
  nlohmann::json j = nlohmann::json::array();
  for (size_t i = 0; i < buffers.size(); ++i) {
    nlohmann::json b;
    b["joint"] = i + 1;
    b["capacity"] = buffers[i].capacity();
    b["policy"] = ExperienceBuffer::policy_name(buffers[i].policy());
    nlohmann::json entries = nlohmann::json::array();
    for (const Regressand& r : buffers[i].entries()) {
      nlohmann::json e;
      e["theta"] = r.theta;
      e["y"] = {r.y(0), r.y(1), r.y(2), r.y(3)};
      entries.push_back(e);
    }
    b["entries"] = entries;
    j.push_back(b);
  }
  return j;
}

std::vector<ExperienceBuffer> buffers_from_json(const nlohmann::json& j) {
  std::vector<ExperienceBuffer> out;
  for (const auto& b : j) {
    const std::string pol = b.at("policy").get<std::string>();
    ExperienceBuffer buf(b.at("capacity").get<int>(),
                         pol == "fifo"
                             ? ExperienceBuffer::AdmissionPolicy::kFifo
                             : ExperienceBuffer::AdmissionPolicy::kSigmaMinGreedy);
    for (const auto& e : b.at("entries")) {
      Regressand r;
      r.theta = e.at("theta").get<double>();
      for (int w = 0; w < 4; ++w) r.y(w) = e.at("y").at(w).get<double>();
      buf.admit(r);
    }
    out.push_back(std::move(buf));
  }
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  SimResult sim = simulate(cfg);
  RunOutput out;
  out.metrics = compute_metrics(sim.trace);
  out.trace_path = (std::filesystem::path(outdir) / "trace.csv").string();
  out.metrics_path = (std::filesystem::path(outdir) / "metrics.json").string();
  out.buffers_path = (std::filesystem::path(outdir) / "buffers.json").string();
  write_trace(sim.trace, out.trace_path);
  {
    std::ofstream mf(out.metrics_path);
    mf << metrics_to_json(out.metrics).dump(2) << "\n";
  }
  {
    std::ofstream bf(out.buffers_path);
    bf << buffers_to_json(sim.final_buffers).dump(2) << "\n";
  }
  out.trace = std::move(sim.trace);
  return out;
}

}  // namespace iadp
