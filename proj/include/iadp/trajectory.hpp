#pragma once

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace iadp {

/// q_d = (1 + sin(t/2 − π/2))·k_p per joint, evaluated on global time so a
/// k_p switch between segments changes amplitude but not phase.
struct SinusoidSegment {
  Eigen::VectorXd kp;
};

/// Task-space circle tracked through closed-form IK; the end-link orientation
/// follows the base→target ray and the elbow branch is fixed per segment.
struct CircleSegment {
  Eigen::Vector2d center{0.0, 0.0};  // world frame, m
  double radius = 0.1;
  double omega = 0.5;   // rad/s along the circle
  double phase0 = 0.0;  // start angle on the circle
  int elbow = +1;
};

struct ConstantSegment {
  Eigen::VectorXd q;
};

struct Segment {
  double duration = 0.0;
  std::variant<SinusoidSegment, CircleSegment, ConstantSegment> gen;
};

struct RefSample {
  Eigen::VectorXd q;    // q_d
  Eigen::VectorXd qd;   // q̇_d
  Eigen::VectorXd qdd;  // q̈_d (ẍ_r), analytic
};

/// Piecewise reference program. Derivatives are continuous within a segment;
/// segment switches may be discontinuous and are delivered to the controller
/// as-is.
class TrajectoryProgram {
 public:
  TrajectoryProgram(int n, std::vector<Segment> segments,
                    const Eigen::Vector3d& lengths,
                    const Eigen::Vector2d& base_offset);

  RefSample sample(double t) const;
  double total_duration() const;
  const std::vector<Segment>& segments() const { return segments_; }

  /// Sweeps every circle segment and solves IK at `samples` points; throws
  /// IkRangeError at the first unreachable point.
  void check_reachable(int samples = 720) const;

 private:
  int n_;
  std::vector<Segment> segments_;
  Eigen::Vector3d lengths_;
  Eigen::Vector2d base_offset_;
};

}  // namespace iadp
