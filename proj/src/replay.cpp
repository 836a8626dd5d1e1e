#include "iadp/replay.hpp"

#include <cmath>

#include "iadp/control.hpp"
#include "iadp/errors.hpp"

namespace iadp {

ReplayResult replay_weights(const Trace& trace, const ReplayOptions& opts) {
  if (trace.config.is_null())
    throw std::runtime_error("trace has no embedded config; cannot replay");
  const ExperimentConfig cfg = config_from_json(trace.config);
  const int n = cfg.n();
  const size_t rows = trace.rows();
  const size_t start = opts.start_tick;
  const size_t end = std::min(opts.end_tick.value_or(rows), rows);
  if (start > end) throw std::runtime_error("replay: start_tick beyond end");

  std::vector<CriticState> critic;
  std::vector<ExperienceBuffer> buf;
  if (opts.buffer_snapshot)
    buf = buffers_from_json(*opts.buffer_snapshot);
  for (int i = 0; i < n; ++i) {
    CriticState cs;
    cs.gamma = cfg.gamma_diag[static_cast<size_t>(i)].asDiagonal();
    cs.k_t = opts.k_t_override.value_or(cfg.k_t);
    cs.k_e = opts.k_e_override.value_or(cfg.k_e);
    if (start > 0) {
      // Resume from the logged weights one row before the segment.
      const std::string s = std::to_string(i + 1);
      for (int w = 0; w < 4; ++w)
        cs.w_hat(w) = trace.col("What" + s + "_" + std::to_string(w + 1))[start - 1];
    }
    critic.push_back(cs);
    if (static_cast<int>(buf.size()) <= i)
      buf.emplace_back(cfg.buffer_capacity, cfg.buffer_policy);
  }

  ReplayResult res;
  res.rows = end - start;
  res.replayed.assign(static_cast<size_t>(n), {});
  for (auto& v : res.replayed) v.reserve(res.rows);

  for (size_t r = start; r < end; ++r) {
    for (int i = 0; i < n; ++i) {
      const size_t si = static_cast<size_t>(i);
      const std::string s = std::to_string(i + 1);
      const Eigen::Vector2d e(trace.col("e" + s + "_1")[r],
                              trace.col("e" + s + "_2")[r]);
      const double du_b = trace.col("du_b" + s)[r];
      const ErrorSubsystem sub{cfg.k1(i), cfg.k2(i), cfg.gbar(i)};
      const SaturatedPolicy pol{cfg.beta, cfg.c_bar(i)};
      const Eigen::Matrix2d Q = cfg.q_diag[si].asDiagonal();
      // Clamp only out-of-domain foreign data; our own policy output is
      // already strictly interior and must replay bit-for-bit.
      const double du_safe =
          std::abs(du_b) < pol.beta ? du_b : clamp_du_for_logging(pol, du_b);
      const Regressand reg = make_regressand(sub, pol, Q, e, du_safe);
      // Row 0 is the TDE warm-up tick; its sample never enters the buffer.
      if (opts.admit && r >= 1) buf[si].admit(reg);
      weight_step(critic[si], reg, buf[si], cfg.dt);
      res.replayed[si].push_back(critic[si].w_hat);
      for (int w = 0; w < 4; ++w) {
        const double logged =
            trace.col("What" + s + "_" + std::to_string(w + 1))[r];
        const double mine = critic[si].w_hat(w);
        if (logged != mine) res.exact_match = false;
        res.max_abs_diff = std::max(res.max_abs_diff, std::abs(logged - mine));
      }
    }
  }
  return res;
}

}  // namespace iadp
