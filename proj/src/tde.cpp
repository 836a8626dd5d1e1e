#include "iadp/tde.hpp"

#include <cmath>
#include <sstream>

#include "iadp/errors.hpp"

namespace iadp {

double estimate_h(const TdeChannel& ch) {
  if (!ch.warm) return 0.0;
  return ch.xdot2_0 / ch.gbar - ch.u_0;
}

double tde_error(const TdeChannel& ch, double true_h) {
  return true_h - estimate_h(ch);
}

double xi_bound(const TdeErrorMonitor& mon, double xi0, double beta, int k) {
  if (!(mon.iota < 1.0) || mon.iota < 0.0) {
    std::ostringstream os;
    os << "contraction factor iota=" << mon.iota
       << " outside [0,1); gbar guideline violated";
    throw ValidationError(os.str());
  }
  const double d1 = mon.delta1_bar.value_or(0.0);
  const double d2 = mon.delta2_bar.value_or(0.0);
  const double tail =
      (d1 + mon.iota * d2) / (1.0 - mon.iota) +
      2.0 * mon.iota * beta / (1.0 - mon.iota);
  return std::pow(mon.iota, k) * std::abs(xi0) + tail;
}

GbarCheck validate_gbar(double gbar, double m_lower) {
  GbarCheck out;
  const double floor = 1.0 / (2.0 * m_lower);
  out.margin = gbar - floor;
  out.pass = gbar > floor;
  return out;
}

}  // namespace iadp
