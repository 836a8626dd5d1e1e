#pragma once

#include <Eigen/Dense>

#include <complex>

namespace iadp {

/// Per-joint incremental error subsystem ė = A·e + B·Δu_b + B·ξ with
/// A = [[0, 1], [−k1, −k2]] and B = [0, ḡ].
struct ErrorSubsystem {
  double k1 = 0.0;
  double k2 = 0.0;
  double gbar = 1.0;

  Eigen::Matrix2d A() const {
    Eigen::Matrix2d a;
    a << 0.0, 1.0, -k1, -k2;
    return a;
  }
  Eigen::Vector2d B() const { return {0.0, gbar}; }
};

struct ReferencePoint {
  double q_d = 0.0;      // rad
  double qd_dot = 0.0;   // rad/s
  double qd_ddot = 0.0;  // rad/s² (ẍ_r)
};

/// Saturated incremental policy parameters: hard bound β on |Δu_b| plus the
/// attenuation coefficient c̄ in ξ̄_o = c̄·|Δu_b|.
struct SaturatedPolicy {
  double beta = 0.1;
  double c_bar = 0.0;
};

/// Feedforward inversion Δu_f = ḡ⁻¹(ẍ_r − ẋ_{2,0} − k1·e1 − k2·e2).
double feedforward(const ErrorSubsystem& sub, const ReferencePoint& ref,
                   const Eigen::Vector2d& e, double xdot2_0);

/// Input penalty 2∫₀^du β·artanh(ϑ/β) dϑ in closed form:
/// 2β·du·artanh(du/β) + β²·ln(1 − du²/β²). Even, nonnegative, W(0)=0.
/// Throws std::domain_error for |du| ≥ β.
double penalty_W(const SaturatedPolicy& pol, double du);

/// Utility clamp for evaluating the penalty on externally supplied samples
/// (trace replay/metrics); the live policy never needs it.
double clamp_du_for_logging(const SaturatedPolicy& pol, double du);

/// Stage cost r = eᵀQe + W(du_b) + (c̄·|du_b|)².
double reward(const SaturatedPolicy& pol, const Eigen::Matrix2d& Q,
              const Eigen::Vector2d& e, double du_b);

/// Saturated approximate-optimal incremental policy
/// Δû_b = −β·tanh(Bᵀ·(∇ΦᵀŴ)/(2β)); output kept strictly inside (−β, β).
double policy(const SaturatedPolicy& pol, const ErrorSubsystem& sub,
              const Eigen::Vector2d& grad_phi_w);

/// Hamiltonian H = r + ∇Vᵀ(A·e + B·du_b); HJB residual diagnostic.
double hamiltonian(const SaturatedPolicy& pol, const ErrorSubsystem& sub,
                   const Eigen::Matrix2d& Q, const Eigen::Vector2d& e,
                   double du_b, const Eigen::Vector2d& grad_v);

/// Overall torque û = u_0 + Δu_f + Δû_b.
double assemble_torque(double u_prev, double du_f, double du_b);

struct GainCheck {
  bool pass = false;
  std::complex<double> eig1, eig2;  // eigenvalues of A
};

/// Gain guideline: k1 > 1 and k2 > 1/2, strict. Reports the A eigenvalues.
GainCheck validate_gains(double k1, double k2);

}  // namespace iadp
