#pragma once

#include <Eigen/Dense>

#include <functional>

namespace iadp {

/// Euler-Lagrange plant  M(q)·q̈ + N(q,q̇) + F(q̇) = τ  with N = C(q,q̇)q̇ + G(q).
/// The term maps are value-semantic callables so test plants can swap them out.
struct PlantModel {
  int n = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> inertia;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      coriolis_gravity;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> friction;

  // Descriptive parameters (filled by the factories, used by validators/plots).
  Eigen::VectorXd link_lengths;   // m
  Eigen::VectorXd link_masses;    // kg
  Eigen::VectorXd viscous;        // N·m·s/rad
  double payload_mass = 0.0;      // kg, point mass at the end effector
  double gravity = 9.81;          // m/s², in-plane
  Eigen::Vector2d base_offset{0.0, 0.0};  // world position of joint-1 axis
};

struct PlantState {
  double t = 0.0;
  Eigen::VectorXd q;      // rad
  Eigen::VectorXd qdot;   // rad/s
};

/// Backward-difference derivative estimator. First call returns 0 by
/// convention; a linear input signal is differentiated exactly.
class DiffEstimator {
 public:
  explicit DiffEstimator(double step) : step_(step) {}

  double update(double sample) {
    if (!primed_) {
      prev_ = sample;
      primed_ = true;
      return 0.0;
    }
    const double d = (sample - prev_) / step_;
    prev_ = sample;
    return d;
  }

  void reset() { primed_ = false; }
  double step() const { return step_; }

 private:
  double step_;
  double prev_ = 0.0;
  bool primed_ = false;
};

/// q̈ = M(q)⁻¹ (τ − N(q,q̇) − F(q̇)), solved via Cholesky.
/// Throws SingularPlantError when cond(M) exceeds 1e12.
Eigen::VectorXd forward_accel(const PlantModel& model, const PlantState& state,
                              const Eigen::VectorXd& tau);

/// Explicit Euler step: q⁺ = q + dt·q̇, q̇⁺ = q̇ + dt·q̈, t⁺ = t + dt.
/// Throws DivergenceError if the new state is non-finite.
PlantState euler_step(const PlantModel& model, const PlantState& state,
                      const Eigen::VectorXd& tau, double dt);

struct ArmParams {
  Eigen::Vector3d lengths{0.3, 0.24, 0.34};   // m
  Eigen::Vector3d masses{2.0, 1.5, 1.0};      // kg, point mass at each link tip
  Eigen::Vector3d viscous{0.5, 0.5, 0.5};     // N·m·s/rad
  Eigen::Vector3d rotor_inertia{0.0, 0.0, 0.0};  // kg·m², gear-reflected, per joint
  double payload = 0.0;                       // kg, added at the end effector
  double gravity = 9.81;                      // m/s²
  Eigen::Vector2d base_offset{0.0, 0.0};      // m, world frame
};

/// Planar n-link chain with a point mass at each link tip; gravity acts along
/// −y of the plane. Closed-form M, Christoffel Coriolis terms and gravity
/// vector; viscous friction F = diag(b)·q̇. Payload folds into the last mass,
/// reflected rotor inertia adds to the joint-space diagonal.
PlantModel make_three_link_arm(const ArmParams& params);

/// Hanging point-mass pendulum: M = [m·l²], N = [m·g·l·sin q], F = [b·q̇].
PlantModel make_point_pendulum(double mass, double length, double gravity,
                               double viscous = 0.0);

/// Total mechanical energy of a chain built by make_three_link_arm
/// (kinetic + gravitational potential), for conservation checks.
double chain_energy(const ArmParams& params, const Eigen::VectorXd& q,
                    const Eigen::VectorXd& qdot);

struct InertiaStats {
  double eig_min = 0.0;          // min eigenvalue of M over the samples
  double eig_max = 0.0;
  Eigen::VectorXd diag_min;      // per-joint inf of M_ii over the samples
  Eigen::VectorXd diag_max;
};

/// Deterministic workspace sweep of the inertia matrix. Used by the strict
/// config validator to bound M before checking the ḡ guideline.
InertiaStats sample_inertia_bounds(const PlantModel& model, int samples,
                                   unsigned seed);

}  // namespace iadp
