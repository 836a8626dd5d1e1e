#include "iadp/control.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iadp {

double feedforward(const ErrorSubsystem& sub, const ReferencePoint& ref,
                   const Eigen::Vector2d& e, double xdot2_0) {
  return (ref.qd_ddot - xdot2_0 - sub.k1 * e(0) - sub.k2 * e(1)) / sub.gbar;
}

double penalty_W(const SaturatedPolicy& pol, double du) {
  const double beta = pol.beta;
  if (!(std::abs(du) < beta)) {
    std::ostringstream os;
    os << "penalty argument |" << du << "| >= beta=" << beta;
    throw std::domain_error(os.str());
  }
  const double r = du / beta;
  return 2.0 * beta * du * std::atanh(r) + beta * beta * std::log1p(-r * r);
}

double clamp_du_for_logging(const SaturatedPolicy& pol, double du) {
  const double lim = 0.999999 * pol.beta;
  return std::clamp(du, -lim, lim);
}

double reward(const SaturatedPolicy& pol, const Eigen::Matrix2d& Q,
              const Eigen::Vector2d& e, double du_b) {
  const double xi_o = pol.c_bar * std::abs(du_b);
  return e.dot(Q * e) + penalty_W(pol, du_b) + xi_o * xi_o;
}

double policy(const SaturatedPolicy& pol, const ErrorSubsystem& sub,
              const Eigen::Vector2d& grad_phi_w) {
  const double arg = sub.B().dot(grad_phi_w) / (2.0 * pol.beta);
  double out = -pol.beta * std::tanh(arg);
  // tanh rounds to ±1 for large arguments; keep the output strictly interior.
  const double lim = pol.beta - 1e-12;
  return std::clamp(out, -lim, lim);
}

double hamiltonian(const SaturatedPolicy& pol, const ErrorSubsystem& sub,
                   const Eigen::Matrix2d& Q, const Eigen::Vector2d& e,
                   double du_b, const Eigen::Vector2d& grad_v) {
  const Eigen::Vector2d edot = sub.A() * e + sub.B() * du_b;
  return reward(pol, Q, e, du_b) + grad_v.dot(edot);
}

double assemble_torque(double u_prev, double du_f, double du_b) {
  return u_prev + du_f + du_b;
}

GainCheck validate_gains(double k1, double k2) {
  GainCheck out;
  out.pass = k1 > 1.0 && k2 > 0.5;
  // Roots of λ² + k2·λ + k1 = 0.
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(k2 * k2 - 4.0 * k1, 0.0));
  out.eig1 = (-k2 + disc) / 2.0;
  out.eig2 = (-k2 - disc) / 2.0;
  return out;
}

}  // namespace iadp
