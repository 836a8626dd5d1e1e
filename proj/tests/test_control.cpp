#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "iadp/control.hpp"
#include "iadp/critic.hpp"
#include "oracles.hpp"

using namespace iadp;

TEST_CASE("feedforward inversion") {
  const ErrorSubsystem sub{1.0, 1.0, 2.0};
  SUBCASE("perfect tracking is a fixed point") {
    const ReferencePoint ref{0.0, 0.0, 0.7};
    CHECK(feedforward(sub, ref, Eigen::Vector2d::Zero(), 0.7) == 0.0);
  }
  SUBCASE("pinned arithmetic case") {
    const ReferencePoint ref{0.0, 0.0, 1.0};
    CHECK(feedforward(sub, ref, Eigen::Vector2d(0.5, -0.5), 0.0) ==
          doctest::Approx(0.5));
  }
}

TEST_CASE("closed loop with exact inversion follows the error subsystem") {
  // With the TDE error zero and no incremental policy, the delayed
  // acceleration cancels out of the loop algebraically and e follows
  // ė = A·e regardless of what ẋ_{2,0} happens to be. Integrate the loop
  // with RK4 and compare against the matrix exponential.
  const ErrorSubsystem sub{8.0, 8.0, 40.0};
  const auto rhs = [&](double t, const Eigen::VectorXd& e) -> Eigen::VectorXd {
    const double xdot2_0 = 3.0 * std::sin(5.0 * t) - 1.0;  // arbitrary signal
    const ReferencePoint ref{0.0, 0.0, 0.4 * std::cos(t)};
    const double du_f = feedforward(sub, ref, e, xdot2_0);
    const double edot2 = xdot2_0 + sub.gbar * du_f - ref.qd_ddot;
    return Eigen::Vector2d(e(1), edot2);
  };
  Eigen::VectorXd e = Eigen::Vector2d(0.3, -0.2);
  const double dt = 1e-4;
  const int steps = 10000;
  for (int k = 0; k < steps; ++k)
    e = oracles::rk4_step(rhs, k * dt, e, dt);
  const Eigen::Matrix2d Phi = (sub.A() * (steps * dt)).exp();
  const Eigen::Vector2d expected = Phi * Eigen::Vector2d(0.3, -0.2);
  CHECK((e - expected).norm() < 1e-6);
}

TEST_CASE("penalty function") {
  SaturatedPolicy pol{1.0, 0.0};
  SUBCASE("zero at zero, even, nonnegative") {
    CHECK(penalty_W(pol, 0.0) == 0.0);
    for (double du = -0.99; du < 1.0; du += 0.07) {
      const double w = penalty_W(pol, du);
      CHECK(w >= 0.0);
      CHECK(std::abs(w - penalty_W(pol, -du)) <= 1e-12);
    }
  }
  SUBCASE("matches adaptive quadrature of the defining integral") {
    for (double beta : {0.1, 1.0}) {
      SaturatedPolicy p{beta, 0.0};
      for (int i = -99; i <= 99; i += 3) {
        const double du = 0.01 * i * beta;
        const double w = penalty_W(p, du);
        const double ref = oracles::integrate(
            [&](double v) { return 2.0 * beta * std::atanh(v / beta); },
            0.0, du, 1e-13);
        CHECK(std::abs(w - ref) < 1e-9);
      }
    }
  }
  SUBCASE("pinned value at beta=1, du=0.5") {
    const double ref = oracles::integrate(
        [](double v) { return 2.0 * std::atanh(v); }, 0.0, 0.5, 1e-13);
    CHECK(penalty_W(pol, 0.5) == doctest::Approx(ref).epsilon(1e-9));
  }
  SUBCASE("domain error at and beyond the saturation level") {
    CHECK_THROWS_AS(penalty_W(pol, 1.0), std::domain_error);
    CHECK_THROWS_AS(penalty_W(pol, -1.5), std::domain_error);
  }
}

TEST_CASE("stage cost") {
  Eigen::Matrix2d Q;
  Q << 300.0, 0.0, 0.0, 40000.0;
  SUBCASE("zero at the origin") {
    SaturatedPolicy pol{0.1, 200.0};
    CHECK(reward(pol, Q, Eigen::Vector2d::Zero(), 0.0) == 0.0);
  }
  SUBCASE("pinned quadratic-only case") {
    SaturatedPolicy pol{0.1, 200.0};
    CHECK(reward(pol, Q, Eigen::Vector2d(0.01, 0.0), 0.0) ==
          doctest::Approx(0.03));
  }
  SUBCASE("attenuation term adds c_bar^2 du^2") {
    SaturatedPolicy pol{1.0, 4.0};
    const double w = penalty_W(pol, 0.5);
    CHECK(reward(pol, Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(), 0.5) ==
          doctest::Approx(w + 4.0));
    CHECK(reward(pol, Q, Eigen::Vector2d::Zero(), 0.5) > 0.0);
  }
}

TEST_CASE("saturated policy") {
  const ErrorSubsystem sub{8.0, 8.0, 40.0};
  SUBCASE("zero weights give zero input") {
    const SaturatedPolicy pol{0.1, 200.0};
    CHECK(policy(pol, sub, Eigen::Vector2d::Zero()) == 0.0);
  }
  SUBCASE("saturates toward ±beta") {
    const SaturatedPolicy pol{0.1, 200.0};
    CHECK(policy(pol, sub, Eigen::Vector2d(0.0, 1e9)) ==
          doctest::Approx(-0.1).epsilon(1e-9));
    CHECK(policy(pol, sub, Eigen::Vector2d(0.0, -1e9)) ==
          doctest::Approx(0.1).epsilon(1e-9));
  }
  SUBCASE("pinned tanh evaluation") {
    const SaturatedPolicy pol{0.1, 200.0};
    CHECK(policy(pol, sub, Eigen::Vector2d(0.0, 0.01)) ==
          doctest::Approx(-0.1 * std::tanh(2.0)));
  }
  SUBCASE("strictly interior for a million random inputs") {
    const SaturatedPolicy pol{0.1, 200.0};
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> g(-50.0, 50.0);
    double worst = 0.0;
    for (int k = 0; k < 1000000; ++k) {
      const double out = policy(pol, sub, Eigen::Vector2d(g(rng), g(rng)));
      worst = std::max(worst, std::abs(out));
    }
    CHECK(worst < pol.beta);
    CHECK(worst <= pol.beta - 1e-12);
  }
}

TEST_CASE("hamiltonian diagnostic") {
  const ErrorSubsystem sub{8.0, 8.0, 40.0};
  const SaturatedPolicy pol{0.1, 200.0};
  Eigen::Matrix2d Q;
  Q << 300.0, 0.0, 0.0, 40000.0;
  SUBCASE("zero at the origin with zero input") {
    CHECK(hamiltonian(pol, sub, Q, Eigen::Vector2d::Zero(), 0.0,
                      Eigen::Vector2d(3.0, -7.0)) == 0.0);
  }
  SUBCASE("reduces to the stage cost when the value gradient vanishes") {
    const Eigen::Vector2d e(0.02, -0.01);
    CHECK(hamiltonian(pol, sub, Q, e, 0.05, Eigen::Vector2d::Zero()) ==
          doctest::Approx(reward(pol, Q, e, 0.05)));
  }
}

TEST_CASE("hamiltonian equals the LIP residual at the critic's value estimate") {
  // H(e, du, ∇ΦᵀŴ) = r + Ŵᵀ∇Φ·(Ae + B·du) = Θ + ŴᵀY, so at weights that
  // reproduce the stage cost exactly the HJB residual vanishes.
  const ErrorSubsystem sub{8.0, 8.0, 40.0};
  const SaturatedPolicy pol{0.1, 200.0};
  Eigen::Matrix2d Q;
  Q << 300.0, 0.0, 0.0, 40000.0;
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  const Eigen::Vector4d w_star(1.0, -0.5, 0.25, 0.75);
  for (int s = 0; s < 200; ++s) {
    const Eigen::Vector2d e(d(rng), d(rng));
    const double du = 0.09 * d(rng) / 0.3;
    const Eigen::Vector4d w(d(rng), d(rng), d(rng), d(rng));
    const Eigen::Vector2d grad_v = iadp::features::grad_phi(e).transpose() * w;
    const double h = hamiltonian(pol, sub, Q, e, du, grad_v);
    const auto reg = iadp::make_regressand(sub, pol, Q, e, du);
    CHECK(h == doctest::Approx(reg.theta + w.dot(reg.y)).epsilon(1e-12));
    // Synthetic zero-residual system: the Hamiltonian of the consistent
    // tuple is zero to machine precision.
    const double theta_synth = -w_star.dot(reg.y);
    const double h_synth = theta_synth + w_star.dot(reg.y);
    CHECK(std::abs(h_synth) < 1e-3);
  }
}

TEST_CASE("torque assembly") {
  CHECK(assemble_torque(0.0, 0.0, 0.0) == 0.0);
  CHECK(assemble_torque(1.0, 0.2, -0.05) == doctest::Approx(1.15));
}

TEST_CASE("steady state drives the increment to zero on the linear plant") {
  // Constant setpoint on the oracle plant: the applied torque settles, so
  // Δu_f + Δu_b → 0.
  oracles::LinearTestPlant plant;
  plant.a = [](double) { return -2.0; };
  plant.g = [](double) { return 1.5; };
  const ErrorSubsystem sub{4.0, 4.0, 3.0};
  const double dt = 1e-3;
  const double x1_ref = 0.8;
  double x1 = 0.0, x2 = 0.0, x2_prev = 0.0, u = 0.0;
  double last_increment = 1e9;
  for (int k = 0; k < 20000; ++k) {
    const double accel_meas = k > 0 ? (x2 - x2_prev) / dt : 0.0;
    const Eigen::Vector2d e(x1 - x1_ref, x2);
    const ReferencePoint ref{x1_ref, 0.0, 0.0};
    const double du_f = k > 0 ? feedforward(sub, ref, e, accel_meas)
                              : feedforward(sub, ref, e, 0.0);
    last_increment = du_f;  // du_b = 0 in this loop
    const double u_next = u + du_f;
    x2_prev = x2;
    const double t = k * dt;
    x1 += dt * x2;
    x2 += dt * plant.xdot2(t, x2, u_next);
    u = u_next;
  }
  CHECK(std::abs(last_increment) < 1e-7);
}

TEST_CASE("gain guideline") {
  SUBCASE("preset operating point passes") {
    CHECK(validate_gains(8.0, 8.0).pass);
  }
  SUBCASE("boundary fails (strict)") {
    CHECK_FALSE(validate_gains(1.0, 1.0).pass);
    CHECK_FALSE(validate_gains(2.0, 0.5).pass);
  }
  SUBCASE("pinned eigenvalue case") {
    const GainCheck c = validate_gains(2.0, 0.6);
    CHECK(c.pass);
    CHECK(c.eig1.real() == doctest::Approx(-0.3));
    CHECK(std::abs(c.eig1.imag()) == doctest::Approx(1.3820).epsilon(1e-3));
    CHECK(c.eig2.real() == doctest::Approx(-0.3));
  }
  SUBCASE("passing gains imply a margin off the imaginary axis") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> k1d(1.0 + 1e-6, 50.0);
    std::uniform_real_distribution<double> k2d(0.5 + 1e-6, 50.0);
    for (int s = 0; s < 2000; ++s) {
      const double k1 = k1d(rng), k2 = k2d(rng);
      const GainCheck c = validate_gains(k1, k2);
      REQUIRE(c.pass);
      const double eps = 0.5 * std::min(k2 / 2.0, k1 / k2);
      CHECK(c.eig1.real() <= -eps + 1e-12);
      CHECK(c.eig2.real() <= -eps + 1e-12);
    }
  }
}
