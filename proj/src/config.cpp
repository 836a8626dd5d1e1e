#include "iadp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "iadp/control.hpp"
#include "iadp/errors.hpp"
#include "iadp/tde.hpp"

namespace iadp {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_to_vec(const json& a, const std::string& where) {
  if (!a.is_array())
    throw ValidationError(where + ": expected an array of numbers");
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number())
      throw ValidationError(where + ": expected an array of numbers");
    v(static_cast<int>(i)) = a[i].get<double>();
  }
  return v;
}

Eigen::Vector3d json_to_vec3(const json& a, const std::string& where) {
  const Eigen::VectorXd v = json_to_vec(a, where);
  if (v.size() != 3)
    throw ValidationError(where + ": expected exactly 3 entries");
  return v;
}

json segment_to_json(const Segment& s) {
  json j;
  j["duration"] = s.duration;
  if (const auto* sin = std::get_if<SinusoidSegment>(&s.gen)) {
    j["type"] = "sinusoid";
    j["kp"] = vec_to_json(sin->kp);
  } else if (const auto* cir = std::get_if<CircleSegment>(&s.gen)) {
    j["type"] = "circle";
    j["center"] = {cir->center.x(), cir->center.y()};
    j["radius"] = cir->radius;
    j["omega"] = cir->omega;
    j["phase0"] = cir->phase0;
    j["elbow"] = cir->elbow;
  } else {
    const auto& con = std::get<ConstantSegment>(s.gen);
    j["type"] = "constant";
    j["q"] = vec_to_json(con.q);
  }
  return j;
}

Segment segment_from_json(const json& j, size_t idx) {
  const std::string where = "trajectory.segments[" + std::to_string(idx) + "]";
  Segment s;
  s.duration = j.at("duration").get<double>();
  const std::string type = j.at("type").get<std::string>();
  std::set<std::string> allowed;
  if (type == "sinusoid") {
    SinusoidSegment seg;
    seg.kp = json_to_vec(j.at("kp"), where + ".kp");
    s.gen = seg;
    allowed = {"type", "duration", "kp"};
  } else if (type == "circle") {
    CircleSegment seg;
    const auto& c = j.at("center");
    seg.center = Eigen::Vector2d(c.at(0).get<double>(), c.at(1).get<double>());
    seg.radius = j.at("radius").get<double>();
    seg.omega = j.at("omega").get<double>();
    seg.phase0 = j.value("phase0", 0.0);
    seg.elbow = j.value("elbow", 1);
    s.gen = seg;
    allowed = {"type", "duration", "center", "radius", "omega", "phase0",
               "elbow"};
  } else if (type == "constant") {
    ConstantSegment seg;
    seg.q = json_to_vec(j.at("q"), where + ".q");
    s.gen = seg;
    allowed = {"type", "duration", "q"};
  } else {
    throw ValidationError(where + ": unknown segment type '" + type + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    if (allowed.find(it.key()) == allowed.end())
      throw ValidationError("unknown key " + where + "." + it.key());
  return s;
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["plant"]["type"] = "three_link_planar";
  j["plant"]["link_lengths"] = vec_to_json(cfg.plant.lengths);
  j["plant"]["link_masses"] = vec_to_json(cfg.plant.masses);
  j["plant"]["viscous"] = vec_to_json(cfg.plant.viscous);
  j["plant"]["rotor_inertia"] = vec_to_json(cfg.plant.rotor_inertia);
  j["plant"]["payload_mass"] = cfg.plant.payload;
  j["plant"]["gravity"] = cfg.plant.gravity;
  j["plant"]["base_offset"] = {cfg.plant.base_offset.x(),
                               cfg.plant.base_offset.y()};
  j["controller"]["gbar"] = vec_to_json(cfg.gbar);
  j["controller"]["k1"] = vec_to_json(cfg.k1);
  j["controller"]["k2"] = vec_to_json(cfg.k2);
  j["controller"]["c_bar"] = vec_to_json(cfg.c_bar);
  json qd = json::array();
  for (const auto& q : cfg.q_diag) qd.push_back({q(0), q(1)});
  j["controller"]["q_diag"] = qd;
  j["controller"]["beta"] = cfg.beta;
  if (cfg.torque_clamp)
    j["controller"]["torque_clamp"] = *cfg.torque_clamp;
  else
    j["controller"]["torque_clamp"] = nullptr;
  json gd = json::array();
  for (const auto& g : cfg.gamma_diag) gd.push_back({g(0), g(1), g(2), g(3)});
  j["critic"]["gamma_diag"] = gd;
  j["critic"]["k_t"] = cfg.k_t;
  j["critic"]["k_e"] = cfg.k_e;
  j["critic"]["buffer_capacity"] = cfg.buffer_capacity;
  j["critic"]["buffer_policy"] =
      ExperienceBuffer::policy_name(cfg.buffer_policy);
  json segs = json::array();
  for (const Segment& s : cfg.segments) segs.push_back(segment_to_json(s));
  j["trajectory"]["segments"] = segs;
  j["sim"]["dt"] = cfg.dt;
  j["sim"]["duration"] = cfg.duration;
  j["sim"]["seed"] = cfg.seed;
  j["run"]["strict"] = cfg.strict;
  j["run"]["settle_time"] = cfg.settle_time;
  j["run"]["settle_threshold"] = cfg.settle_threshold;
  j["run"]["weight_settle_window"] = cfg.weight_settle_window;
  j["run"]["weight_settle_tol"] = cfg.weight_settle_tol;
  if (cfg.joint_order)
    j["run"]["joint_order"] = *cfg.joint_order;
  else
    j["run"]["joint_order"] = nullptr;
  return j;
}

namespace {

// Objects merge key-by-key, everything else (arrays included) replaces.
void merge_into(json& base, const json& user) {
  if (!user.is_object() || !base.is_object()) {
    base = user;
    return;
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (base.contains(it.key()))
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig cfg;
  const json& p = j.at("plant");
  const std::string type = p.at("type").get<std::string>();
  if (type != "three_link_planar")
    throw ValidationError("plant.type: unknown plant '" + type + "'");
  cfg.plant.lengths = json_to_vec3(p.at("link_lengths"), "plant.link_lengths");
  cfg.plant.masses = json_to_vec3(p.at("link_masses"), "plant.link_masses");
  cfg.plant.viscous = json_to_vec3(p.at("viscous"), "plant.viscous");
  cfg.plant.rotor_inertia =
      json_to_vec3(p.at("rotor_inertia"), "plant.rotor_inertia");
  cfg.plant.payload = p.at("payload_mass").get<double>();
  cfg.plant.gravity = p.at("gravity").get<double>();
  cfg.plant.base_offset =
      Eigen::Vector2d(p.at("base_offset").at(0).get<double>(),
                      p.at("base_offset").at(1).get<double>());
  const json& c = j.at("controller");
  cfg.gbar = json_to_vec(c.at("gbar"), "controller.gbar");
  cfg.k1 = json_to_vec(c.at("k1"), "controller.k1");
  cfg.k2 = json_to_vec(c.at("k2"), "controller.k2");
  cfg.c_bar = json_to_vec(c.at("c_bar"), "controller.c_bar");
  for (const auto& q : c.at("q_diag"))
    cfg.q_diag.emplace_back(q.at(0).get<double>(), q.at(1).get<double>());
  cfg.beta = c.at("beta").get<double>();
  if (!c.at("torque_clamp").is_null())
    cfg.torque_clamp = c.at("torque_clamp").get<double>();
  const json& cr = j.at("critic");
  for (const auto& g : cr.at("gamma_diag")) {
    Eigen::Vector4d v(g.at(0).get<double>(), g.at(1).get<double>(),
                      g.at(2).get<double>(), g.at(3).get<double>());
    cfg.gamma_diag.push_back(v);
  }
  cfg.k_t = cr.at("k_t").get<double>();
  cfg.k_e = cr.at("k_e").get<double>();
  cfg.buffer_capacity = cr.at("buffer_capacity").get<int>();
  const std::string pol = cr.at("buffer_policy").get<std::string>();
  if (pol == "sigma_min")
    cfg.buffer_policy = ExperienceBuffer::AdmissionPolicy::kSigmaMinGreedy;
  else if (pol == "fifo")
    cfg.buffer_policy = ExperienceBuffer::AdmissionPolicy::kFifo;
  else
    throw ValidationError("critic.buffer_policy: unknown policy '" + pol + "'");
  const json& segs = j.at("trajectory").at("segments");
  for (size_t i = 0; i < segs.size(); ++i)
    cfg.segments.push_back(segment_from_json(segs[i], i));
  const json& sim = j.at("sim");
  cfg.dt = sim.at("dt").get<double>();
  cfg.duration = sim.at("duration").get<double>();
  cfg.seed = sim.at("seed").get<unsigned>();
  const json& run = j.at("run");
  cfg.strict = run.at("strict").get<bool>();
  cfg.settle_time = run.at("settle_time").get<double>();
  cfg.settle_threshold = run.at("settle_threshold").get<double>();
  cfg.weight_settle_window = run.at("weight_settle_window").get<double>();
  cfg.weight_settle_tol = run.at("weight_settle_tol").get<double>();
  if (!run.at("joint_order").is_null())
    cfg.joint_order = run.at("joint_order").get<std::vector<int>>();
  return cfg;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_known_keys(j);
  // Unspecified keys take the defaults so config files can stay short.
  json merged = [] {
    ExperimentConfig c;
    c.gbar = Eigen::Vector3d::Constant(40.0);
    c.k1 = Eigen::Vector3d::Constant(8.0);
    c.k2 = Eigen::Vector3d::Constant(8.0);
    c.c_bar = Eigen::Vector3d::Constant(200.0);
    c.q_diag.assign(3, Eigen::Vector2d(300.0, 40000.0));
    c.gamma_diag.assign(3, Eigen::Vector4d(100.0, 4.0, 0.1, 16.0));
    c.k_t = 0.2;
    c.k_e = 0.01;
    c.segments = {Segment{10.0, SinusoidSegment{Eigen::Vector3d(0.3, 0.6, 1.0)}}};
    return config_to_json(c);
  }();
  merge_into(merged, j);
  try {
    return parse_config_json(merged);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config structure error: ") + e.what());
  }
}

void check_known_keys(const json& tree) {
  // The serialized default carries every legal key; anything outside that
  // skeleton is a typo. Segment objects are checked by segment_from_json.
  static const json skeleton = [] {
    ExperimentConfig c;
    c.gbar = Eigen::VectorXd::Ones(1);
    c.k1 = Eigen::VectorXd::Ones(1);
    c.k2 = Eigen::VectorXd::Ones(1);
    c.c_bar = Eigen::VectorXd::Ones(1);
    c.q_diag = {Eigen::Vector2d::Ones()};
    c.gamma_diag = {Eigen::Vector4d::Ones()};
    c.segments = {Segment{1.0, ConstantSegment{Eigen::VectorXd::Zero(1)}}};
    return config_to_json(c);
  }();
  std::vector<std::string> unknown;
  const std::function<void(const json&, const json&, const std::string&)> walk =
      [&](const json& node, const json& ref, const std::string& path) {
        if (!node.is_object()) return;
        for (auto it = node.begin(); it != node.end(); ++it) {
          const std::string child =
              path.empty() ? it.key() : path + "." + it.key();
          if (!ref.is_object() || !ref.contains(it.key())) {
            unknown.push_back(child);
            continue;
          }
          if (child != "trajectory.segments")
            walk(it.value(), ref.at(it.key()), child);
        }
      };
  walk(tree, skeleton, "");
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError("override must look like path.to.key=value: " +
                          assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  std::vector<std::string> parts;
  std::istringstream ps(path);
  std::string part;
  while (std::getline(ps, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ValidationError("empty override path");
  json* node = &tree;
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i]))
      throw ValidationError("unknown override path: " + path);
    node = &(*node)[parts[i]];
  }
  if (!node->is_object() || !node->contains(parts.back()))
    throw ValidationError("unknown override path: " + path);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }
  (*node)[parts.back()] = parsed;
}

namespace {

// Desk-scale arms matched to each preset's gain scale: light links with
// gear-reflected rotor inertia dominating the inertia diagonal, so that
// 1/M_ii stays commensurate with that preset's gbar over the workspace.
ArmParams sinusoid_arm() {
  ArmParams arm;
  arm.masses = Eigen::Vector3d(0.06, 0.05, 0.04);
  arm.rotor_inertia = Eigen::Vector3d(0.015, 0.014, 0.0139);
  return arm;
}

ArmParams circles_arm() {
  ArmParams arm;
  arm.masses = Eigen::Vector3d(0.06, 0.025, 0.01);
  arm.rotor_inertia = Eigen::Vector3d(0.065, 0.028, 0.012);
  return arm;
}

ExperimentConfig sinusoid_preset() {
  ExperimentConfig cfg;
  cfg.plant = sinusoid_arm();
  cfg.gbar = Eigen::Vector3d(40.0, 46.0, 54.0);
  cfg.k1 = Eigen::Vector3d::Constant(8.0);
  cfg.k2 = Eigen::Vector3d::Constant(8.0);
  cfg.c_bar = Eigen::Vector3d::Constant(200.0);
  cfg.q_diag.assign(3, Eigen::Vector2d(300.0, 40000.0));
  cfg.beta = 0.1;
  cfg.gamma_diag.assign(3, Eigen::Vector4d(100.0, 4.0, 0.1, 16.0));
  cfg.k_t = 0.2;
  cfg.k_e = 0.01;
  cfg.buffer_capacity = 10;
  Segment a{5.0, SinusoidSegment{Eigen::Vector3d(0.3, 0.6, 1.0)}};
  Segment b{5.0, SinusoidSegment{Eigen::Vector3d(0.2, 0.5, 0.8)}};
  cfg.segments = {a, b};
  cfg.dt = 1e-3;
  cfg.duration = 10.0;
  return cfg;
}

ExperimentConfig circles_preset() {
  ExperimentConfig cfg;
  cfg.plant = circles_arm();
  cfg.plant.base_offset = Eigen::Vector2d(0.05, 0.05);
  cfg.gbar = Eigen::Vector3d(14.0, 32.0, 80.0);
  cfg.k1 = Eigen::Vector3d::Constant(8.0);
  cfg.k2 = Eigen::Vector3d::Constant(8.0);
  cfg.c_bar = Eigen::Vector3d::Constant(4.0);
  cfg.q_diag = {Eigen::Vector2d(16.0, 10.0), Eigen::Vector2d(18.0, 10.0),
                Eigen::Vector2d(0.2, 0.1)};
  cfg.beta = 1.0;
  cfg.gamma_diag = {Eigen::Vector4d::Constant(0.01),
                    Eigen::Vector4d::Constant(0.03),
                    Eigen::Vector4d::Constant(0.01)};
  cfg.k_t = 0.1;
  cfg.k_e = 0.1;
  cfg.buffer_capacity = 10;
  const double period = 12.0;
  const double omega = 2.0 * M_PI / period;
  Segment c1{period, CircleSegment{{0.68, 0.05}, 0.20, omega, 0.0, -1}};
  Segment c2{period, CircleSegment{{0.72, 0.05}, 0.16, omega, 0.0, -1}};
  Segment c3{period, CircleSegment{{0.75, 0.05}, 0.12, omega, 0.0, -1}};
  cfg.segments = {c1, c2, c3};
  cfg.dt = 1e-3;
  cfg.duration = 3.0 * period;
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {"sinusoid", "circles"}; }

json preset_config(const std::string& name) {
  if (name == "sinusoid") return config_to_json(sinusoid_preset());
  if (name == "circles") return config_to_json(circles_preset());
  throw ValidationError("unknown preset '" + name +
                        "'; available: sinusoid, circles");
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.pass = false;
    rep.failures.push_back(msg);
  };
  const int n = cfg.n();
  if (n <= 0) fail("controller.gbar: at least one joint required");
  auto expect_len = [&](const Eigen::VectorXd& v, const std::string& key) {
    if (v.size() != n)
      fail(key + ": expected " + std::to_string(n) + " entries, got " +
           std::to_string(static_cast<int>(v.size())));
  };
  expect_len(cfg.k1, "controller.k1");
  expect_len(cfg.k2, "controller.k2");
  expect_len(cfg.c_bar, "controller.c_bar");
  if (static_cast<int>(cfg.q_diag.size()) != n) fail("controller.q_diag: size");
  if (static_cast<int>(cfg.gamma_diag.size()) != n) fail("critic.gamma_diag: size");
  if (!(cfg.dt > 0.0)) fail("sim.dt: must be positive");
  if (cfg.duration < 0.0) fail("sim.duration: must be nonnegative");
  if (!(cfg.beta > 0.0)) fail("controller.beta: must be positive");
  if (cfg.buffer_capacity < 1) fail("critic.buffer_capacity: must be >= 1");
  if (cfg.buffer_capacity < features::kDim)
    rep.warnings.push_back(
        "critic.buffer_capacity below feature dimension; the buffer can "
        "never reach full rank");
  if (cfg.k_t < 0.0) fail("critic.k_t: must be nonnegative");
  if (cfg.k_e < 0.0) fail("critic.k_e: must be nonnegative");
  if (cfg.plant.lengths.minCoeff() <= 0.0) fail("plant.link_lengths: must be positive");
  if (cfg.plant.masses.minCoeff() <= 0.0) fail("plant.link_masses: must be positive");
  if (cfg.plant.viscous.minCoeff() < 0.0) fail("plant.viscous: must be nonnegative");
  if (cfg.plant.rotor_inertia.minCoeff() < 0.0)
    fail("plant.rotor_inertia: must be nonnegative");
  if (cfg.plant.payload < 0.0) fail("plant.payload_mass: must be nonnegative");
  if (rep.pass) {
    for (int i = 0; i < n; ++i) {
      const GainCheck gc = validate_gains(cfg.k1(i), cfg.k2(i));
      if (!gc.pass) {
        std::ostringstream os;
        os << "gain guideline violated for joint " << (i + 1) << ": need k1 > 1"
           << " and k2 > 1/2, got k1=" << cfg.k1(i) << " k2=" << cfg.k2(i);
        fail(os.str());
      }
      if (cfg.q_diag[i].minCoeff() <= 0.0)
        fail("controller.q_diag: joint " + std::to_string(i + 1) +
             " must be positive definite");
      if (cfg.c_bar(i) < 0.0)
        fail("controller.c_bar: must be nonnegative");
      if (!(cfg.gbar(i) > 0.0))
        fail("controller.gbar: must be positive");
      CriticState critic;
      critic.gamma = cfg.gamma_diag[i].asDiagonal();
      critic.k_t = cfg.k_t;
      critic.k_e = cfg.k_e;
      try {
        validate_critic_gains(critic);
      } catch (const ValidationError& e) {
        fail(std::string("joint ") + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  if (cfg.joint_order) {
    std::vector<bool> seen(static_cast<size_t>(n), false);
    bool ok = static_cast<int>(cfg.joint_order->size()) == n;
    if (ok)
      for (int idx : *cfg.joint_order) {
        if (idx < 0 || idx >= n || seen[static_cast<size_t>(idx)]) {
          ok = false;
          break;
        }
        seen[static_cast<size_t>(idx)] = true;
      }
    if (!ok) fail("run.joint_order: must be a permutation of 0..n-1");
  }
  if (!rep.pass) return rep;

  // ḡ guideline against per-joint inertia lower bounds from a deterministic
  // workspace sweep.
  const PlantModel model = make_plant(cfg);
  const InertiaStats st = sample_inertia_bounds(model, 2000, 12345u);
  rep.m_lower = st.diag_min;
  rep.eig_min = st.eig_min;
  rep.eig_max = st.eig_max;
  for (int i = 0; i < n; ++i) {
    const GbarCheck gb = validate_gbar(cfg.gbar(i), st.diag_min(i));
    if (!gb.pass) {
      std::ostringstream os;
      os << "gbar guideline violated for joint " << (i + 1)
         << ": need gbar > 1/(2*m_lower) = " << 1.0 / (2.0 * st.diag_min(i))
         << ", got " << cfg.gbar(i) << " (margin " << gb.margin << ")";
      fail(os.str());
    }
  }
  try {
    make_trajectory(cfg).check_reachable();
  } catch (const IkRangeError& e) {
    fail(std::string("trajectory unreachable: ") + e.what());
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  return rep;
}

PlantModel make_plant(const ExperimentConfig& cfg) {
  return make_three_link_arm(cfg.plant);
}

TrajectoryProgram make_trajectory(const ExperimentConfig& cfg) {
  return TrajectoryProgram(cfg.n(), cfg.segments, cfg.plant.lengths,
                           cfg.plant.base_offset);
}

}  // namespace iadp
