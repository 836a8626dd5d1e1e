#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iadp/critic.hpp"
#include "iadp/plant.hpp"
#include "iadp/trajectory.hpp"

namespace iadp {

/// Full description of one experiment run. Loaded from a declarative JSON
/// file; every parameter has a dotted path addressable by --override.
struct ExperimentConfig {
  ArmParams plant;

  // Per-joint controller parameters, all length n.
  Eigen::VectorXd gbar;
  Eigen::VectorXd k1;
  Eigen::VectorXd k2;
  Eigen::VectorXd c_bar;
  std::vector<Eigen::Vector2d> q_diag;   // diag of Q_i
  double beta = 0.1;
  std::optional<double> torque_clamp;    // disabled by default

  // Per-joint critic parameters.
  std::vector<Eigen::Vector4d> gamma_diag;
  double k_t = 0.0;
  double k_e = 0.0;
  int buffer_capacity = 10;
  ExperienceBuffer::AdmissionPolicy buffer_policy =
      ExperienceBuffer::AdmissionPolicy::kSigmaMinGreedy;

  std::vector<Segment> segments;

  double dt = 1e-3;
  double duration = 10.0;
  unsigned seed = 0;

  bool strict = true;
  double settle_time = 3.0;          // s after a segment start
  double settle_threshold = 0.05;    // rad on |e1|
  double weight_settle_window = 0.5; // s
  double weight_settle_tol = 1e-3;
  std::optional<std::vector<int>> joint_order;  // processing permutation

  int n() const { return static_cast<int>(gbar.size()); }
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Loads a config file; unknown keys anywhere in the tree are hard errors.
ExperimentConfig load_config(const std::string& path);

/// Applies "dotted.path=value" onto a config JSON tree. The path must already
/// exist; the value is parsed as JSON with a string fallback.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// Throws ValidationError listing every unknown key path.
void check_known_keys(const nlohmann::json& tree);

std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  Eigen::VectorXd m_lower;       // per-joint inf M_ii from the workspace sweep
  double eig_min = 0.0;          // inertia eigenvalue range over the sweep
  double eig_max = 0.0;
};

/// Runs every config validator: gain guidelines (k1 > 1, k2 > 1/2), the ḡ
/// guideline against sampled per-joint inertia bounds, SPD checks, trajectory
/// reachability, and structural consistency.
ValidationReport validate_config(const ExperimentConfig& cfg);

PlantModel make_plant(const ExperimentConfig& cfg);
TrajectoryProgram make_trajectory(const ExperimentConfig& cfg);

}  // namespace iadp
