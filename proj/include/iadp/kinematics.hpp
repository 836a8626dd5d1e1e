#pragma once

#include <Eigen/Dense>

namespace iadp {

/// Posture selection for the redundant planar 3R chain: elbow branch of the
/// inner 2R solve plus the absolute orientation of the end link.
struct PlanarPosture {
  int elbow = +1;            // +1 elbow-up branch, −1 elbow-down
  double wrist_angle = 0.0;  // absolute end-link orientation, rad
};

/// End-effector position of a planar 3R chain, base frame.
Eigen::Vector2d planar_fk(const Eigen::Vector3d& q, const Eigen::Vector3d& lengths);

/// (x, y, phi) pose; phi is the absolute end-link orientation q1+q2+q3.
Eigen::Vector3d planar_fk_pose(const Eigen::Vector3d& q,
                               const Eigen::Vector3d& lengths);

/// 3×3 task Jacobian d(x, y, phi)/dq.
Eigen::Matrix3d planar_jacobian(const Eigen::Vector3d& q,
                                const Eigen::Vector3d& lengths);

/// Time derivative of the task Jacobian along q̇.
Eigen::Matrix3d planar_jacobian_dot(const Eigen::Vector3d& q,
                                    const Eigen::Vector3d& qdot,
                                    const Eigen::Vector3d& lengths);

/// Closed-form position IK with the end-link orientation pinned by the
/// posture. Throws IkRangeError when the target is outside the annulus the
/// wrist can reach. FK of the result reproduces the target to ~1e-9.
Eigen::Vector3d planar_ik(const Eigen::Vector2d& target,
                          const Eigen::Vector3d& lengths,
                          const PlanarPosture& posture);

}  // namespace iadp
