#include "iadp/kinematics.hpp"

#include <cmath>
#include <sstream>

#include "iadp/errors.hpp"

namespace iadp {

Eigen::Vector2d planar_fk(const Eigen::Vector3d& q,
                          const Eigen::Vector3d& lengths) {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double a = 0.0;
  for (int k = 0; k < 3; ++k) {
    a += q(k);
    p += lengths(k) * Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return p;
}

Eigen::Vector3d planar_fk_pose(const Eigen::Vector3d& q,
                               const Eigen::Vector3d& lengths) {
  const Eigen::Vector2d p = planar_fk(q, lengths);
  return {p.x(), p.y(), q.sum()};
}

Eigen::Matrix3d planar_jacobian(const Eigen::Vector3d& q,
                                const Eigen::Vector3d& lengths) {
  double a = 0.0;
  Eigen::Vector3d ca, sa;
  for (int k = 0; k < 3; ++k) {
    a += q(k);
    ca(k) = std::cos(a);
    sa(k) = std::sin(a);
  }
  Eigen::Matrix3d J;
  for (int j = 0; j < 3; ++j) {
    double jx = 0.0, jy = 0.0;
    for (int k = j; k < 3; ++k) {
      jx -= lengths(k) * sa(k);
      jy += lengths(k) * ca(k);
    }
    J(0, j) = jx;
    J(1, j) = jy;
    J(2, j) = 1.0;
  }
  return J;
}

Eigen::Matrix3d planar_jacobian_dot(const Eigen::Vector3d& q,
                                    const Eigen::Vector3d& qdot,
                                    const Eigen::Vector3d& lengths) {
  double a = 0.0, adot = 0.0;
  Eigen::Vector3d ca, sa, ad;
  for (int k = 0; k < 3; ++k) {
    a += q(k);
    adot += qdot(k);
    ca(k) = std::cos(a);
    sa(k) = std::sin(a);
    ad(k) = adot;
  }
  Eigen::Matrix3d Jd = Eigen::Matrix3d::Zero();
  for (int j = 0; j < 3; ++j) {
    double jx = 0.0, jy = 0.0;
    for (int k = j; k < 3; ++k) {
      jx -= lengths(k) * ca(k) * ad(k);
      jy -= lengths(k) * sa(k) * ad(k);
    }
    Jd(0, j) = jx;
    Jd(1, j) = jy;
  }
  return Jd;
}

Eigen::Vector3d planar_ik(const Eigen::Vector2d& target,
                          const Eigen::Vector3d& lengths,
                          const PlanarPosture& posture) {
  const double l1 = lengths(0), l2 = lengths(1), l3 = lengths(2);
  const double phi = posture.wrist_angle;
  // Wrist point reached by the inner 2R chain.
  const Eigen::Vector2d w =
      target - l3 * Eigen::Vector2d(std::cos(phi), std::sin(phi));
  const double d2 = w.squaredNorm();
  double c2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  // Tolerate boundary round-off, reject genuinely unreachable targets.
  if (std::abs(c2) > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "target (" << target.x() << ", " << target.y()
       << ") with wrist angle " << phi << " outside reachable annulus";
    throw IkRangeError(os.str());
  }
  c2 = std::clamp(c2, -1.0, 1.0);
  const double q2 = (posture.elbow >= 0 ? 1.0 : -1.0) * std::acos(c2);
  const double q1 =
      std::atan2(w.y(), w.x()) -
      std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
  const double q3 = phi - q1 - q2;
  return {q1, q2, q3};
}

}  // namespace iadp
