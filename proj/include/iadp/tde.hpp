#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace iadp {

/// Fixed-depth ring buffer of past samples. delayed() is the sample pushed
/// exactly `depth` pushes ago.
class DelayLine {
 public:
  explicit DelayLine(int depth) : buf_(static_cast<size_t>(depth), 0.0) {}

  void push(double sample) {
    buf_[head_] = sample;
    head_ = (head_ + 1) % buf_.size();
    if (count_ < buf_.size()) ++count_;
  }

  bool full() const { return count_ == buf_.size(); }
  double delayed() const { return buf_[head_]; }  // oldest slot
  size_t depth() const { return buf_.size(); }

 private:
  std::vector<double> buf_;
  size_t head_ = 0;
  size_t count_ = 0;
};

/// Per-joint time-delay estimation channel. The delayed input u_{i,0} is the
/// torque applied one control period earlier; the delayed state derivative
/// ẋ_{i2,0} is the freshest backward-difference acceleration sample, which by
/// construction describes the same period the stored torque acted over.
struct TdeChannel {
  double gbar = 1.0;    // ḡ_i > 0
  double delay = 0.0;   // L, seconds; equals one sampling period
  double xdot2_0 = 0.0; // ẋ_{i2,0}
  double u_0 = 0.0;     // u_{i,0}
  bool warm = false;    // one full delay period of history exists

  /// Install the acceleration sample for this tick.
  void begin_tick(double xdot2_sample) { xdot2_0 = xdot2_sample; }

  /// Record the torque applied this tick; it becomes u_{i,0} next tick.
  void end_tick(double u_applied) {
    u_0 = u_applied;
    warm = true;
  }
};

/// ĥ_i = ḡ_i⁻¹·ẋ_{i2,0} − u_{i,0}. Returns 0 during warm-up.
double estimate_h(const TdeChannel& ch);

/// ξ_i = h_i − ĥ_i, for test/diagnostic contexts where the true lumped term
/// is available from an oracle plant.
double tde_error(const TdeChannel& ch, double true_h);

/// Runtime monitor for the TDE error bound. The contraction factor and
/// disturbance bounds are latent on a real plant; tests fit them from oracle
/// plants, oracle-free runs record only the empirical trace.
struct TdeErrorMonitor {
  double iota = 0.0;        // ι_i ∈ (0,1)
  std::optional<double> delta1_bar;  // δ̄₁; not evaluable without an oracle
  std::optional<double> delta2_bar;  // δ̄₂
  std::vector<double> xi_trace;
  double xi_bar = 0.0;      // running max |ξ|

  void record(double xi_sample) {
    xi_trace.push_back(xi_sample);
    if (std::abs(xi_sample) > xi_bar) xi_bar = std::abs(xi_sample);
  }
};

/// ι^k·|ξ(0)| + (δ̄₁ + ι·δ̄₂)/(1−ι) + 2ιβ/(1−ι), nonincreasing in k.
/// Throws ValidationError when ι ≥ 1 (guideline violation).
double xi_bound(const TdeErrorMonitor& mon, double xi0, double beta, int k);

struct GbarCheck {
  bool pass = false;
  double margin = 0.0;  // ḡ − 1/(2·m̲)
};

/// Guideline: ḡ_i > 1/(2·m̲_i), strict.
GbarCheck validate_gbar(double gbar, double m_lower);

}  // namespace iadp
