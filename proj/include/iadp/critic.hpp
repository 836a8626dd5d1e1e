#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "iadp/control.hpp"

namespace iadp {

/// Fixed 4-D critic activation Φ(e) = [e1², e2², e1·e2, e2³].
namespace features {

inline constexpr int kDim = 4;

Eigen::Vector4d phi(const Eigen::Vector2d& e);

/// 4×2 Jacobian of phi.
Eigen::Matrix<double, 4, 2> grad_phi(const Eigen::Vector2d& e);

}  // namespace features

/// One sample of the linear-in-parameters consistency condition
/// Θ = −W*ᵀY + ε_h, with Θ the stage cost and Y = ∇Φ(e)·(A·e + B·du_b).
struct Regressand {
  double theta = 0.0;
  Eigen::Vector4d y = Eigen::Vector4d::Zero();
};

Regressand make_regressand(const ErrorSubsystem& sub, const SaturatedPolicy& pol,
                           const Eigen::Matrix2d& Q, const Eigen::Vector2d& e,
                           double du_b);

/// Experience buffer with rank monitoring. Default admission keeps the stored
/// regressor set rich: once full, a new sample replaces the entry whose swap
/// maximizes the minimum singular value of the stacked Y matrix, and is
/// rejected if no swap improves it. A plain FIFO mode exists for ablation.
class ExperienceBuffer {
 public:
  enum class AdmissionPolicy { kSigmaMinGreedy, kFifo };

  ExperienceBuffer(int capacity, AdmissionPolicy policy);

  bool admit(const Regressand& sample);

  struct RankReport {
    int rank = 0;
    double sigma_min = 0.0;
  };
  RankReport rank_report() const;

  const std::vector<Regressand>& entries() const { return entries_; }
  int capacity() const { return capacity_; }
  AdmissionPolicy policy() const { return policy_; }
  static std::string policy_name(AdmissionPolicy p);

 private:
  double sigma_min_of(const std::vector<Regressand>& entries) const;

  int capacity_;
  AdmissionPolicy policy_;
  std::vector<Regressand> entries_;
  size_t fifo_next_ = 0;
};

/// Per-joint critic: weight estimate, learning gain matrix, data-source gains.
struct CriticState {
  Eigen::Vector4d w_hat = Eigen::Vector4d::Zero();
  Eigen::Matrix4d gamma = Eigen::Matrix4d::Identity();  // SPD
  double k_t = 0.0;  // realtime-data gain
  double k_e = 0.0;  // experience-data gain
};

/// Throws ValidationError unless gamma is symmetric positive definite.
void validate_critic_gains(const CriticState& critic);

/// One forward-Euler step of the off-policy weight update law:
/// Ŵ ← Ŵ + dt·(−Γ·k_t·Y·Θ̃ − Σ_l Γ·k_e·Y_l·Θ̃_l) with Θ̃ = Θ + ŴᵀY.
/// Throws DivergenceError when the update is non-finite.
void weight_step(CriticState& critic, const Regressand& realtime,
                 const ExperienceBuffer& buffer, double dt);

/// V̂(e) = ŴᵀΦ(e).
double value_estimate(const CriticState& critic, const Eigen::Vector2d& e);

}  // namespace iadp
