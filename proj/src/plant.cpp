#include "iadp/plant.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <sstream>

#include "iadp/errors.hpp"

namespace iadp {

namespace {

// Cumulative link angles a_k = q_1 + ... + q_k.
Eigen::VectorXd cumulative_angles(const Eigen::VectorXd& q) {
  Eigen::VectorXd a(q.size());
  double acc = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    acc += q(i);
    a(i) = acc;
  }
  return a;
}

// Effective point masses with the payload folded into the last link.
Eigen::VectorXd effective_masses(const ArmParams& p) {
  Eigen::VectorXd m = p.masses;
  m(m.size() - 1) += p.payload;
  return m;
}

// mu(j,k) = sum of masses carried by both links j and k.
double tail_mass(const Eigen::VectorXd& m, int j, int k) {
  double s = 0.0;
  for (int p = std::max(j, k); p < m.size(); ++p) s += m(p);
  return s;
}

// Inertia in cumulative-angle coordinates: Mt(j,k) = mu·l_j·l_k·cos(a_j − a_k).
// Joint-space M = Tᵀ·Mt·T with T the lower-triangular ones matrix, which the
// nested tail sums below compute directly.
Eigen::MatrixXd chain_inertia(const Eigen::VectorXd& q, const Eigen::VectorXd& l,
                              const Eigen::VectorXd& m) {
  const int n = static_cast<int>(q.size());
  const Eigen::VectorXd a = cumulative_angles(q);
  Eigen::MatrixXd Mt(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      Mt(j, k) = tail_mass(m, j, k) * l(j) * l(k) * std::cos(a(j) - a(k));
  // Fill the upper triangle and mirror it so M is symmetric bit-for-bit.
  Eigen::MatrixXd M(n, n);
  for (int p = 0; p < n; ++p)
    for (int r = p; r < n; ++r) {
      double s = 0.0;
      for (int j = p; j < n; ++j)
        for (int k = r; k < n; ++k) s += Mt(j, k);
      M(p, r) = s;
      M(r, p) = s;
    }
  return M;
}

// ∂M/∂q_r, from ∂Mt(j,k)/∂q_r = −mu·l_j·l_k·sin(a_j − a_k)·(1[r≤j] − 1[r≤k]).
Eigen::MatrixXd chain_inertia_partial(const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& l,
                                      const Eigen::VectorXd& m, int r) {
  const int n = static_cast<int>(q.size());
  const Eigen::VectorXd a = cumulative_angles(q);
  Eigen::MatrixXd dMt(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double ind = (r <= j ? 1.0 : 0.0) - (r <= k ? 1.0 : 0.0);
      dMt(j, k) =
          -tail_mass(m, j, k) * l(j) * l(k) * std::sin(a(j) - a(k)) * ind;
    }
  Eigen::MatrixXd dM(n, n);
  for (int p = 0; p < n; ++p)
    for (int rr = 0; rr < n; ++rr) {
      double s = 0.0;
      for (int j = p; j < n; ++j)
        for (int k = rr; k < n; ++k) s += dMt(j, k);
      dM(p, rr) = s;
    }
  return dM;
}

// C(q,q̇)·q̇ assembled from Christoffel symbols of the first kind.
Eigen::VectorXd chain_coriolis(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd,
                               const Eigen::VectorXd& l,
                               const Eigen::VectorXd& m) {
  const int n = static_cast<int>(q.size());
  std::vector<Eigen::MatrixXd> dM(n);
  for (int r = 0; r < n; ++r) dM[r] = chain_inertia_partial(q, l, m, r);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double c =
            0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k));
        s += c * qd(j) * qd(k);
      }
    out(i) = s;
  }
  return out;
}

// Gravity vector: U = g·Σ_j mu_j·l_j·sin(a_j), G = ∂U/∂q.
Eigen::VectorXd chain_gravity(const Eigen::VectorXd& q, const Eigen::VectorXd& l,
                              const Eigen::VectorXd& m, double g) {
  const int n = static_cast<int>(q.size());
  const Eigen::VectorXd a = cumulative_angles(q);
  Eigen::VectorXd ghat(n);
  for (int j = 0; j < n; ++j)
    ghat(j) = g * tail_mass(m, j, j) * l(j) * std::cos(a(j));
  Eigen::VectorXd G(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int j = r; j < n; ++j) s += ghat(j);
    G(r) = s;
  }
  return G;
}

std::string dump_state(const PlantState& s) {
  std::ostringstream os;
  os << "t=" << s.t << " q=[" << s.q.transpose() << "] qdot=["
     << s.qdot.transpose() << "]";
  return os.str();
}

}  // namespace

Eigen::VectorXd forward_accel(const PlantModel& model, const PlantState& state,
                              const Eigen::VectorXd& tau) {
  const Eigen::MatrixXd M = model.inertia(state.q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e12) {
    std::ostringstream os;
    os << "inertia matrix numerically singular (cond="
       << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity())
       << ") at " << dump_state(state);
    throw SingularPlantError(os.str());
  }
  const Eigen::VectorXd rhs =
      tau - model.coriolis_gravity(state.q, state.qdot) -
      model.friction(state.qdot);
  return M.ldlt().solve(rhs);
}

PlantState euler_step(const PlantModel& model, const PlantState& state,
                      const Eigen::VectorXd& tau, double dt) {
  const Eigen::VectorXd qdd = forward_accel(model, state, tau);
  PlantState next;
  next.t = state.t + dt;
  next.q = state.q + dt * state.qdot;
  next.qdot = state.qdot + dt * qdd;
  if (!next.q.allFinite() || !next.qdot.allFinite()) {
    std::ostringstream os;
    os << "integration blowup stepping from " << dump_state(state)
       << " with tau=[" << tau.transpose() << "]";
    throw DivergenceError(os.str());
  }
  return next;
}

PlantModel make_three_link_arm(const ArmParams& params) {
  PlantModel model;
  model.n = 3;
  const Eigen::VectorXd l = params.lengths;
  const Eigen::VectorXd m = effective_masses(params);
  const Eigen::VectorXd b = params.viscous;
  const Eigen::VectorXd rotor = params.rotor_inertia;
  const double g = params.gravity;
  model.inertia = [l, m, rotor](const Eigen::VectorXd& q) {
    Eigen::MatrixXd M = chain_inertia(q, l, m);
    M.diagonal() += rotor;
    return M;
  };
  model.coriolis_gravity = [l, m, g](const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qd) {
    return (chain_coriolis(q, qd, l, m) + chain_gravity(q, l, m, g)).eval();
  };
  model.friction = [b](const Eigen::VectorXd& qd) {
    return (b.array() * qd.array()).matrix().eval();
  };
  model.link_lengths = params.lengths;
  model.link_masses = params.masses;
  model.viscous = params.viscous;
  model.payload_mass = params.payload;
  model.gravity = params.gravity;
  model.base_offset = params.base_offset;
  return model;
}

PlantModel make_point_pendulum(double mass, double length, double gravity,
                               double viscous) {
  PlantModel model;
  model.n = 1;
  model.inertia = [mass, length](const Eigen::VectorXd&) {
    Eigen::MatrixXd M(1, 1);
    M(0, 0) = mass * length * length;
    return M;
  };
  model.coriolis_gravity = [mass, length, gravity](const Eigen::VectorXd& q,
                                                   const Eigen::VectorXd&) {
    Eigen::VectorXd N(1);
    N(0) = mass * gravity * length * std::sin(q(0));
    return N;
  };
  model.friction = [viscous](const Eigen::VectorXd& qd) {
    return (viscous * qd).eval();
  };
  model.link_lengths = Eigen::VectorXd::Constant(1, length);
  model.link_masses = Eigen::VectorXd::Constant(1, mass);
  model.viscous = Eigen::VectorXd::Constant(1, viscous);
  model.gravity = gravity;
  return model;
}

double chain_energy(const ArmParams& params, const Eigen::VectorXd& q,
                    const Eigen::VectorXd& qdot) {
  const Eigen::VectorXd l = params.lengths;
  const Eigen::VectorXd m = effective_masses(params);
  const Eigen::VectorXd a = cumulative_angles(q);
  Eigen::VectorXd adot(q.size());
  double acc = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    acc += qdot(i);
    adot(i) = acc;
  }
  double ke = 0.0, pe = 0.0;
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  for (int k = 0; k < q.size(); ++k) {
    pos += l(k) * Eigen::Vector2d(std::cos(a(k)), std::sin(a(k)));
    vel += l(k) * adot(k) * Eigen::Vector2d(-std::sin(a(k)), std::cos(a(k)));
    ke += 0.5 * m(k) * vel.squaredNorm();
    ke += 0.5 * params.rotor_inertia(k) * qdot(k) * qdot(k);
    pe += m(k) * params.gravity * pos.y();
  }
  return ke + pe;
}

InertiaStats sample_inertia_bounds(const PlantModel& model, int samples,
                                   unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-M_PI, M_PI);
  InertiaStats st;
  st.eig_min = std::numeric_limits<double>::infinity();
  st.eig_max = 0.0;
  st.diag_min =
      Eigen::VectorXd::Constant(model.n, std::numeric_limits<double>::infinity());
  st.diag_max = Eigen::VectorXd::Zero(model.n);
  Eigen::VectorXd q(model.n);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < model.n; ++i) q(i) = dist(rng);
    const Eigen::MatrixXd M = model.inertia(q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    st.eig_min = std::min(st.eig_min, eig.eigenvalues().minCoeff());
    st.eig_max = std::max(st.eig_max, eig.eigenvalues().maxCoeff());
    for (int i = 0; i < model.n; ++i) {
      st.diag_min(i) = std::min(st.diag_min(i), M(i, i));
      st.diag_max(i) = std::max(st.diag_max(i), M(i, i));
    }
  }
  return st;
}

}  // namespace iadp
