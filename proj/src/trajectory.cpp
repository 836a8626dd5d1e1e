#include "iadp/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "iadp/errors.hpp"
#include "iadp/kinematics.hpp"

namespace iadp {

namespace {

RefSample sample_sinusoid(const SinusoidSegment& seg, double t_global) {
  const double ph = 0.5 * t_global - M_PI / 2.0;
  RefSample s;
  s.q = (1.0 + std::sin(ph)) * seg.kp;
  s.qd = 0.5 * std::cos(ph) * seg.kp;
  s.qdd = -0.25 * std::sin(ph) * seg.kp;
  return s;
}

RefSample sample_circle(const CircleSegment& seg, double t_local,
                        const Eigen::Vector3d& lengths,
                        const Eigen::Vector2d& base_offset) {
  const double th = seg.phase0 + seg.omega * t_local;
  const Eigen::Vector2d dir(std::cos(th), std::sin(th));
  const Eigen::Vector2d tan(-std::sin(th), std::cos(th));
  // Base-frame task point and its derivatives.
  const Eigen::Vector2d p = seg.center - base_offset + seg.radius * dir;
  const Eigen::Vector2d pd = seg.radius * seg.omega * tan;
  const Eigen::Vector2d pdd = -seg.radius * seg.omega * seg.omega * dir;
  // End-link orientation rides the base→target ray.
  const double r2 = p.squaredNorm();
  const double phi = std::atan2(p.y(), p.x());
  const double cross = p.x() * pd.y() - p.y() * pd.x();
  const double phid = cross / r2;
  const double crossd = p.x() * pdd.y() - p.y() * pdd.x();
  const double phidd = (crossd * r2 - cross * 2.0 * p.dot(pd)) / (r2 * r2);

  const Eigen::Vector3d q =
      planar_ik(p, lengths, PlanarPosture{seg.elbow, phi});
  const Eigen::Matrix3d J = planar_jacobian(q, lengths);
  const Eigen::Vector3d xd(pd.x(), pd.y(), phid);
  const Eigen::Vector3d qd = J.partialPivLu().solve(xd);
  const Eigen::Matrix3d Jd = planar_jacobian_dot(q, qd, lengths);
  const Eigen::Vector3d xdd(pdd.x(), pdd.y(), phidd);
  const Eigen::Vector3d qdd = J.partialPivLu().solve(xdd - Jd * qd);

  RefSample s;
  s.q = q;
  s.qd = qd;
  s.qdd = qdd;
  return s;
}

RefSample sample_constant(const ConstantSegment& seg) {
  RefSample s;
  s.q = seg.q;
  s.qd = Eigen::VectorXd::Zero(seg.q.size());
  s.qdd = Eigen::VectorXd::Zero(seg.q.size());
  return s;
}

}  // namespace

TrajectoryProgram::TrajectoryProgram(int n, std::vector<Segment> segments,
                                     const Eigen::Vector3d& lengths,
                                     const Eigen::Vector2d& base_offset)
    : n_(n), segments_(std::move(segments)), lengths_(lengths),
      base_offset_(base_offset) {
  if (segments_.empty())
    throw ValidationError("trajectory program needs at least one segment");
}

double TrajectoryProgram::total_duration() const {
  double d = 0.0;
  for (const Segment& s : segments_) d += s.duration;
  return d;
}

RefSample TrajectoryProgram::sample(double t) const {
  // Past the end, hold the last segment at its final local time.
  const Segment* active = &segments_.back();
  double seg_start = total_duration() - segments_.back().duration;
  double acc = 0.0;
  for (const Segment& s : segments_) {
    if (t < acc + s.duration) {
      active = &s;
      seg_start = acc;
      break;
    }
    acc += s.duration;
  }
  const double t_local = std::min(t, total_duration()) - seg_start;
  RefSample out = std::visit(
      [&](const auto& gen) -> RefSample {
        using T = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<T, SinusoidSegment>)
          return sample_sinusoid(gen, t);
        else if constexpr (std::is_same_v<T, CircleSegment>)
          return sample_circle(gen, t_local, lengths_, base_offset_);
        else
          return sample_constant(gen);
      },
      active->gen);
  if (out.q.size() != n_) {
    std::ostringstream os;
    os << "trajectory segment produced " << out.q.size()
       << " joints, expected " << n_;
    throw ValidationError(os.str());
  }
  return out;
}

void TrajectoryProgram::check_reachable(int samples) const {
  for (const Segment& s : segments_) {
    const auto* circle = std::get_if<CircleSegment>(&s.gen);
    if (circle == nullptr) continue;
    const double t_end = s.duration;
    for (int i = 0; i <= samples; ++i) {
      const double t = t_end * static_cast<double>(i) / samples;
      sample_circle(*circle, t, lengths_, base_offset_);  // throws if out of range
    }
  }
}

}  // namespace iadp
