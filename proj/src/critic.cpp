#include "iadp/critic.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

#include "iadp/errors.hpp"

namespace iadp {

namespace features {

Eigen::Vector4d phi(const Eigen::Vector2d& e) {
  return {e(0) * e(0), e(1) * e(1), e(0) * e(1), e(1) * e(1) * e(1)};
}

Eigen::Matrix<double, 4, 2> grad_phi(const Eigen::Vector2d& e) {
  Eigen::Matrix<double, 4, 2> g;
  g << 2.0 * e(0), 0.0,
       0.0, 2.0 * e(1),
       e(1), e(0),
       0.0, 3.0 * e(1) * e(1);
  return g;
}

}  // namespace features

Regressand make_regressand(const ErrorSubsystem& sub, const SaturatedPolicy& pol,
                           const Eigen::Matrix2d& Q, const Eigen::Vector2d& e,
                           double du_b) {
  Regressand r;
  r.theta = reward(pol, Q, e, du_b);
  r.y = features::grad_phi(e) * (sub.A() * e + sub.B() * du_b);
  return r;
}

ExperienceBuffer::ExperienceBuffer(int capacity, AdmissionPolicy policy)
    : capacity_(capacity), policy_(policy) {
  entries_.reserve(static_cast<size_t>(capacity));
}

std::string ExperienceBuffer::policy_name(AdmissionPolicy p) {
  return p == AdmissionPolicy::kSigmaMinGreedy ? "sigma_min" : "fifo";
}

double ExperienceBuffer::sigma_min_of(
    const std::vector<Regressand>& entries) const {
  if (entries.empty()) return 0.0;
  Eigen::MatrixXd stack(features::kDim, entries.size());
  for (size_t l = 0; l < entries.size(); ++l) stack.col(l) = entries[l].y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack);
  return svd.singularValues().minCoeff();
}

bool ExperienceBuffer::admit(const Regressand& sample) {
  if (static_cast<int>(entries_.size()) < capacity_) {
    entries_.push_back(sample);
    return true;
  }
  if (policy_ == AdmissionPolicy::kFifo) {
    entries_[fifo_next_] = sample;
    fifo_next_ = (fifo_next_ + 1) % entries_.size();
    return true;
  }
  // Exact duplicates add no richness.
  for (const Regressand& r : entries_)
    if (r.y == sample.y) return false;
  const double current = sigma_min_of(entries_);
  double best = current;
  int best_slot = -1;
  std::vector<Regressand> candidate = entries_;
  for (size_t l = 0; l < entries_.size(); ++l) {
    candidate[l] = sample;
    const double s = sigma_min_of(candidate);
    if (s > best) {
      best = s;
      best_slot = static_cast<int>(l);
    }
    candidate[l] = entries_[l];
  }
  if (best_slot < 0) return false;
  entries_[static_cast<size_t>(best_slot)] = sample;
  return true;
}

ExperienceBuffer::RankReport ExperienceBuffer::rank_report() const {
  RankReport rep;
  if (entries_.empty()) return rep;
  Eigen::MatrixXd stack(features::kDim, entries_.size());
  for (size_t l = 0; l < entries_.size(); ++l) stack.col(l) = entries_[l].y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack);
  const Eigen::VectorXd sv = svd.singularValues();
  const double tol = sv.maxCoeff() *
                     std::max(stack.rows(), stack.cols()) *
                     std::numeric_limits<double>::epsilon() * 64.0;
  rep.sigma_min = sv.minCoeff();
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rep.rank;
  return rep;
}

void validate_critic_gains(const CriticState& critic) {
  if (!critic.gamma.isApprox(critic.gamma.transpose(), 1e-12))
    throw ValidationError("critic gain matrix Gamma must be symmetric");
  Eigen::LLT<Eigen::Matrix4d> llt(critic.gamma);
  if (llt.info() != Eigen::Success)
    throw ValidationError("critic gain matrix Gamma must be positive definite");
  if (critic.k_t < 0.0 || critic.k_e < 0.0)
    throw ValidationError("critic gains k_t, k_e must be nonnegative");
}

void weight_step(CriticState& critic, const Regressand& realtime,
                 const ExperienceBuffer& buffer, double dt) {
  const auto theta_tilde = [&critic](const Regressand& r) {
    // Θ̂ = −ŴᵀY, so Θ̃ = Θ − Θ̂ = Θ + ŴᵀY.
    return r.theta + critic.w_hat.dot(r.y);
  };
  Eigen::Vector4d rhs = -critic.k_t * realtime.y * theta_tilde(realtime);
  for (const Regressand& r : buffer.entries())
    rhs -= critic.k_e * r.y * theta_tilde(r);
  const Eigen::Vector4d next = critic.w_hat + dt * (critic.gamma * rhs);
  if (!next.allFinite()) {
    std::ostringstream os;
    os << "critic weight update diverged: w_hat=[" << critic.w_hat.transpose()
       << "] realtime theta=" << realtime.theta << " y=["
       << realtime.y.transpose() << "] buffer size="
       << buffer.entries().size();
    throw DivergenceError(os.str());
  }
  critic.w_hat = next;
}

double value_estimate(const CriticState& critic, const Eigen::Vector2d& e) {
  return critic.w_hat.dot(features::phi(e));
}

}  // namespace iadp
