#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <random>

#include "iadp/errors.hpp"
#include "iadp/plant.hpp"
#include "oracles.hpp"

using namespace iadp;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

PlantState make_state(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
  PlantState s;
  s.q = q;
  s.qdot = qd;
  return s;
}

// First-order decay proxy: M=1, F=q̇, no gravity, so q̇(t) = q̇(0)·e^{−t}.
PlantModel make_decay_plant() {
  PlantModel m;
  m.n = 1;
  m.inertia = [](const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Identity(1, 1);
  };
  m.coriolis_gravity = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1);
  };
  m.friction = [](const Eigen::VectorXd& qd) { return qd; };
  return m;
}

}  // namespace

TEST_CASE("pendulum at equilibrium has zero acceleration") {
  const PlantModel pend = make_point_pendulum(1.2, 0.7, 9.81);
  const Eigen::VectorXd qdd =
      forward_accel(pend, make_state(vec1(0.0), vec1(0.0)), vec1(0.0));
  CHECK(qdd(0) == doctest::Approx(0.0));
}

TEST_CASE("pendulum gravity cancellation") {
  const double m = 1.2, l = 0.7, g = 9.81;
  const PlantModel pend = make_point_pendulum(m, l, g);
  for (double q : {-2.0, -0.3, 0.9, 2.5}) {
    const Eigen::VectorXd tau = vec1(m * g * l * std::sin(q));
    const Eigen::VectorXd qdd =
        forward_accel(pend, make_state(vec1(q), vec1(0.0)), tau);
    CHECK(std::abs(qdd(0)) < 1e-12);
  }
}

TEST_CASE("three-link accelerations match the energy-method oracle") {
  ArmParams params;
  params.payload = 0.25;
  const PlantModel arm = make_three_link_arm(params);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::uniform_real_distribution<double> vel(-3.0, 3.0);
  std::uniform_real_distribution<double> trq(-20.0, 20.0);
  for (int s = 0; s < 25; ++s) {
    Eigen::VectorXd q(3), qd(3), tau(3);
    for (int i = 0; i < 3; ++i) {
      q(i) = ang(rng);
      qd(i) = vel(rng);
      tau(i) = trq(rng);
    }
    const Eigen::VectorXd impl = forward_accel(arm, make_state(q, qd), tau);
    const Eigen::VectorXd orac = oracles::lagrangian_accel(params, q, qd, tau);
    const double scale = std::max(1.0, orac.lpNorm<Eigen::Infinity>());
    CHECK((impl - orac).lpNorm<Eigen::Infinity>() / scale < 1e-8);
  }
}

TEST_CASE("inertia is bitwise symmetric and positive definite") {
  const PlantModel arm = make_three_link_arm(ArmParams{});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int s = 0; s < 10000; ++s) {
    Eigen::VectorXd q(3);
    for (int i = 0; i < 3; ++i) q(i) = ang(rng);
    const Eigen::MatrixXd M = arm.inertia(q);
    CHECK((M - M.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("euler step is a fixed point when nothing moves") {
  const PlantModel arm = make_three_link_arm(ArmParams{});
  Eigen::VectorXd q(3);
  q << 0.4, -0.8, 0.2;
  const Eigen::VectorXd qd = Eigen::VectorXd::Zero(3);
  // Torque exactly holding against gravity.
  const Eigen::VectorXd tau = arm.coriolis_gravity(q, qd);
  const PlantState next = euler_step(arm, make_state(q, qd), tau, 1e-3);
  CHECK(next.q == q);
  CHECK(next.qdot == qd);
  CHECK(next.t == doctest::Approx(1e-3));
}

TEST_CASE("euler integrator shows order-1 convergence on exponential decay") {
  const PlantModel plant = make_decay_plant();
  const auto global_error = [&](double dt) {
    PlantState s = make_state(vec1(0.0), vec1(1.0));
    const int steps = static_cast<int>(std::llround(1.0 / dt));
    for (int k = 0; k < steps; ++k)
      s = euler_step(plant, s, Eigen::VectorXd::Zero(1), dt);
    return std::abs(s.qdot(0) - std::exp(-1.0));
  };
  const double e1 = global_error(1e-2);
  const double e2 = global_error(5e-3);
  const double e3 = global_error(2.5e-3);
  const double slope12 = std::log2(e1 / e2);
  const double slope23 = std::log2(e2 / e3);
  CHECK(slope12 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(slope23 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("pendulum small-angle oscillation tracks the analytic solution") {
  const double l = 1.0, g = 9.81, q0 = 0.1;
  const PlantModel pend = make_point_pendulum(1.0, l, g);
  const double omega = std::sqrt(g / l);
  const double period = 2.0 * M_PI / omega;
  const double dt = 1e-3;
  PlantState s = make_state(vec1(q0), vec1(0.0));
  double max_dev = 0.0;
  const int steps = static_cast<int>(period / dt);
  for (int k = 0; k < steps; ++k) {
    s = euler_step(pend, s, vec1(0.0), dt);
    max_dev = std::max(max_dev, std::abs(s.q(0) - q0 * std::cos(omega * s.t)));
  }
  CHECK(max_dev < 1e-2);
}

TEST_CASE("free-swing energy drift stays below 1e-3 relative") {
  ArmParams params;
  params.viscous = Eigen::Vector3d::Zero();
  const PlantModel arm = make_three_link_arm(params);
  // Release close to the hanging equilibrium so the swing stays gentle.
  Eigen::VectorXd q(3);
  q << -M_PI / 2.0 + 0.1, -0.08, 0.06;
  PlantState s = make_state(q, Eigen::VectorXd::Zero(3));
  const double e0 = chain_energy(params, s.q, s.qdot);
  double max_drift = 0.0;
  const double dt = 1e-4;
  for (int k = 0; k < 10000; ++k) {
    s = euler_step(arm, s, Eigen::VectorXd::Zero(3), dt);
    max_drift =
        std::max(max_drift, std::abs(chain_energy(params, s.q, s.qdot) - e0));
  }
  CHECK(max_drift / std::abs(e0) < 1e-3);
}

TEST_CASE("numeric differentiation conventions") {
  DiffEstimator est(0.5);
  CHECK(est.update(3.0) == 0.0);  // first call
  CHECK(est.update(3.0) == 0.0);  // constant signal
  CHECK(est.update(3.0) == 0.0);

  // Linear exactness at a binary step size.
  const double dt = 1.0 / 1024.0;
  DiffEstimator ramp(dt);
  ramp.update(0.0);
  for (int k = 1; k < 200; ++k) {
    const double sample = 2.0 * (k * dt);
    CHECK(ramp.update(sample) == 2.0);
  }

  // sin(t) derivative near t=1 at dt=1e-3.
  DiffEstimator sine(1e-3);
  double d = 0.0;
  for (int k = 0; k <= 1000; ++k) d = sine.update(std::sin(k * 1e-3));
  CHECK(d == doctest::Approx(std::cos(1.0)).epsilon(1e-3));
}

TEST_CASE("singular inertia raises the dedicated error") {
  PlantModel bad;
  bad.n = 2;
  bad.inertia = [](const Eigen::VectorXd&) {
    Eigen::MatrixXd M(2, 2);
    M << 1.0, 1.0, 1.0, 1.0 + 1e-15;
    return M;
  };
  bad.coriolis_gravity = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(2);
  };
  bad.friction = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
  CHECK_THROWS_AS(forward_accel(bad,
                                make_state(Eigen::VectorXd::Zero(2),
                                           Eigen::VectorXd::Zero(2)),
                                Eigen::VectorXd::Zero(2)),
                  SingularPlantError);
}

TEST_CASE("non-finite integration step raises divergence") {
  const PlantModel pend = make_point_pendulum(1.0, 1.0, 9.81);
  const PlantState huge = make_state(vec1(0.0), vec1(1e308));
  CHECK_THROWS_AS(euler_step(pend, huge, vec1(1e308), 1.0), DivergenceError);
}

TEST_CASE("workspace inertia sweep brackets the diagonal") {
  const PlantModel arm = make_three_link_arm(ArmParams{});
  const InertiaStats st = sample_inertia_bounds(arm, 500, 3u);
  CHECK(st.eig_min > 0.0);
  CHECK(st.eig_max > st.eig_min);
  for (int i = 0; i < 3; ++i) {
    CHECK(st.diag_min(i) > 0.0);
    CHECK(st.diag_min(i) >= st.eig_min);  // diagonal dominates the min eigenvalue
    CHECK(st.diag_max(i) <= st.eig_max);
  }
}
