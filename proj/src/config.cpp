#include "staf/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace staf {

using nlohmann::json;

namespace {

const char* integrator_name(Integrator m) {
  switch (m) {
    case Integrator::kRk45: return "rk45";
    case Integrator::kRk4: return "rk4";
    case Integrator::kEuler: return "euler";
  }
  return "?";
}

Integrator parse_integrator(const std::string& s) {
  if (s == "rk45") return Integrator::kRk45;
  if (s == "rk4") return Integrator::kRk4;
  if (s == "euler") return Integrator::kEuler;
  throw ConfigError("sim.integrator: expected rk45, rk4 or euler, got '" + s + "'");
}

// Reads the members of one JSON object and rejects any key it did not read.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& sub(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = sub(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  void read_vector(const std::string& key, Eigen::VectorXd& out) {
    if (!has(key)) return;
    const json& v = sub(key);
    if (!v.is_array()) throw ConfigError(key_path(key) + ": expected an array of numbers");
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(key_path(key) + ": expected an array of numbers");
      r(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    out = std::move(r);
  }

  void read_matrix(const std::string& key, Eigen::MatrixXd& out) {
    if (!has(key)) return;
    const json& v = sub(key);
    const std::string msg = key_path(key) + ": expected a nonempty array of equal-length numeric rows";
    if (!v.is_array() || v.empty() || !v[0].is_array()) throw ConfigError(msg);
    const std::size_t cols = v[0].size();
    Eigen::MatrixXd r(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array() || v[i].size() != cols) throw ConfigError(msg);
      for (std::size_t j = 0; j < cols; ++j) {
        if (!v[i][j].is_number()) throw ConfigError(msg);
        r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
      }
    }
    out = std::move(r);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

}  // namespace

std::string to_string(Experiment experiment) {
  return experiment == Experiment::kRegulation ? "regulation" : "tracking";
}

Experiment parse_experiment(const std::string& name) {
  if (name == "regulation") return Experiment::kRegulation;
  if (name == "tracking") return Experiment::kTracking;
  throw ConfigError("experiment: expected 'regulation' or 'tracking', got '" + name + "'");
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == Experiment::kRegulation) {
    const RegulationSetup s = RegulationSetup::published();
    c.duration = 10.0;
    c.steady_window = 2.0;
    c.gains = s.gains;
    c.shrink_mode = s.basis.shrink.mode;
    c.shrink_eps0 = s.basis.shrink.eps0;
    c.shrink_nu2 = s.basis.shrink.nu2;
    c.shrink_scale = s.basis.shrink.scale;
    c.offsets = s.basis.offsets;
    c.half_width_factor = s.policy.half_width_factor;
    c.scale_by_shrink = s.policy.scale_by_shrink;
    c.x0 = s.x0;
    c.w_critic0 = s.w_critic0;
    c.w_actor0 = s.w_actor0;
    c.gamma0 = s.gamma0(0, 0);
    c.x_hat0 = Eigen::VectorXd::Zero(2);
  } else {
    const TrackingSetup s = TrackingSetup::published();
    c.duration = 40.0;
    c.steady_window = 8.0;
    c.record_stride = 10;
    c.gains = s.gains;
    c.shrink_mode = s.basis.shrink.mode;
    c.shrink_eps0 = s.basis.shrink.eps0;
    c.shrink_nu2 = s.basis.shrink.nu2;
    c.shrink_scale = s.basis.shrink.scale;
    c.offsets = s.basis.offsets;
    c.half_width_factor = s.policy.half_width_factor;
    c.scale_by_shrink = s.policy.scale_by_shrink;
    c.x0 = s.x0;
    c.w_critic0 = s.w_critic0;
    c.w_actor0 = s.w_actor0;
    c.gamma0 = s.gamma0(0, 0);
    c.id_gains = s.id_gains;
    c.x_hat0 = s.x_hat0;
    c.stack_capacity = s.stack_capacity;
    c.savgol_order = s.savgol_order;
    c.savgol_window = s.savgol_window;
    c.offer_every = s.offer_every;
    c.smooth_control = s.smooth_control;
  }
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  ObjectReader top(doc, "");
  std::string experiment = "regulation";
  top.read("experiment", experiment);
  ExperimentConfig c = default_config(parse_experiment(experiment));

  if (top.has("seeds")) {
    const json& s = top.sub("seeds");
    if (s.is_string()) {
      c.seeds = parse_seed_list(s.get<std::string>());
    } else if (s.is_array()) {
      c.seeds.clear();
      for (const auto& v : s) {
        if (!v.is_number_unsigned()) throw ConfigError("seeds: expected nonnegative integers");
        c.seeds.push_back(v.get<std::uint64_t>());
      }
    } else {
      throw ConfigError("seeds: expected an array or a range string");
    }
  }
  top.read("output_dir", c.output_dir);

  if (top.has("sim")) {
    ObjectReader r(top.sub("sim"), "sim");
    r.read("dt", c.dt);
    r.read("duration", c.duration);
    std::string integrator = integrator_name(c.integrator);
    r.read("integrator", integrator);
    c.integrator = parse_integrator(integrator);
    r.read("rtol", c.tolerances.rtol);
    r.read("atol", c.tolerances.atol);
    r.read("min_step", c.tolerances.min_step);
    r.read("max_substeps", c.tolerances.max_substeps);
    r.read("record_stride", c.record_stride);
    r.read("steady_window", c.steady_window);
    r.finish();
  }
  if (top.has("gains")) {
    ObjectReader r(top.sub("gains"), "gains");
    r.read("eta_c1", c.gains.eta_c1);
    r.read("eta_c2", c.gains.eta_c2);
    r.read("eta_a1", c.gains.eta_a1);
    r.read("eta_a2", c.gains.eta_a2);
    r.read("beta", c.gains.beta);
    r.read("nu", c.gains.nu);
    std::string norm = c.gains.normalization == Normalization::kSqrt ? "sqrt" : "gamma_weighted";
    r.read("normalization", norm);
    if (norm == "sqrt") c.gains.normalization = Normalization::kSqrt;
    else if (norm == "gamma_weighted") c.gains.normalization = Normalization::kGammaWeighted;
    else throw ConfigError("gains.normalization: expected 'sqrt' or 'gamma_weighted'");
    r.finish();
  }
  if (top.has("basis")) {
    ObjectReader r(top.sub("basis"), "basis");
    std::string mode = c.shrink_mode == ShrinkMode::kShrinking ? "shrinking" : "constant";
    r.read("shrink", mode);
    if (mode == "shrinking") c.shrink_mode = ShrinkMode::kShrinking;
    else if (mode == "constant") c.shrink_mode = ShrinkMode::kConstantOne;
    else throw ConfigError("basis.shrink: expected 'shrinking' or 'constant'");
    r.read("eps0", c.shrink_eps0);
    r.read("nu2", c.shrink_nu2);
    r.read("scale", c.shrink_scale);
    r.read_matrix("offsets", c.offsets);
    r.finish();
  }
  if (top.has("extrapolation")) {
    ObjectReader r(top.sub("extrapolation"), "extrapolation");
    std::string kind = c.extrapolation_kind == ExtrapolationKind::kUniformBoxSingle ? "uniform_box" : "grid";
    r.read("kind", kind);
    if (kind == "uniform_box") c.extrapolation_kind = ExtrapolationKind::kUniformBoxSingle;
    else if (kind == "grid") c.extrapolation_kind = ExtrapolationKind::kFixedGrid;
    else throw ConfigError("extrapolation.kind: expected 'uniform_box' or 'grid'");
    r.read("num_points", c.gains.num_extrap);
    r.read("half_width_factor", c.half_width_factor);
    r.read("scale_by_shrink", c.scale_by_shrink);
    r.read("resample_every_step", c.resample_every_step);
    r.finish();
  }
  if (top.has("initial")) {
    ObjectReader r(top.sub("initial"), "initial");
    r.read_vector("x", c.x0);
    r.read_vector("w_critic", c.w_critic0);
    r.read_vector("w_actor", c.w_actor0);
    r.read("gamma", c.gamma0);
    r.read_vector("x_hat", c.x_hat0);
    r.finish();
  }
  if (top.has("identifier")) {
    ObjectReader r(top.sub("identifier"), "identifier");
    r.read("k", c.id_gains.k);
    r.read("k_theta", c.id_gains.k_theta);
    if (r.has("gamma_theta")) {
      const json& g = r.sub("gamma_theta");
      if (g.is_number()) {
        c.id_gains.gamma_theta = g.get<double>() * Eigen::MatrixXd::Identity(3, 3);
      } else {
        json holder = json::object();
        holder["gamma_theta"] = g;
        ObjectReader wrap(holder, "identifier");
        wrap.read_matrix("gamma_theta", c.id_gains.gamma_theta);
      }
    }
    r.read("stack_capacity", c.stack_capacity);
    r.read("savgol_order", c.savgol_order);
    r.read("savgol_window", c.savgol_window);
    r.read("offer_every", c.offer_every);
    r.read("smooth_control", c.smooth_control);
    r.finish();
  }
  if (top.has("diagnostics")) {
    ObjectReader r(top.sub("diagnostics"), "diagnostics");
    r.read("pe_window", c.pe_window);
    r.finish();
  }
  top.finish();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json seeds = json::array();
  for (auto s : c.seeds) seeds.push_back(s);
  return json{
      {"experiment", to_string(c.experiment)},
      {"seeds", seeds},
      {"output_dir", c.output_dir},
      {"sim",
       {{"dt", c.dt},
        {"duration", c.duration},
        {"integrator", integrator_name(c.integrator)},
        {"rtol", c.tolerances.rtol},
        {"atol", c.tolerances.atol},
        {"min_step", c.tolerances.min_step},
        {"max_substeps", c.tolerances.max_substeps},
        {"record_stride", c.record_stride},
        {"steady_window", c.steady_window}}},
      {"gains",
       {{"eta_c1", c.gains.eta_c1},
        {"eta_c2", c.gains.eta_c2},
        {"eta_a1", c.gains.eta_a1},
        {"eta_a2", c.gains.eta_a2},
        {"beta", c.gains.beta},
        {"nu", c.gains.nu},
        {"normalization", c.gains.normalization == Normalization::kSqrt ? "sqrt" : "gamma_weighted"}}},
      {"basis",
       {{"shrink", c.shrink_mode == ShrinkMode::kShrinking ? "shrinking" : "constant"},
        {"eps0", c.shrink_eps0},
        {"nu2", c.shrink_nu2},
        {"scale", c.shrink_scale},
        {"offsets", matrix_json(c.offsets)}}},
      {"extrapolation",
       {{"kind", c.extrapolation_kind == ExtrapolationKind::kUniformBoxSingle ? "uniform_box" : "grid"},
        {"num_points", c.gains.num_extrap},
        {"half_width_factor", c.half_width_factor},
        {"scale_by_shrink", c.scale_by_shrink},
        {"resample_every_step", c.resample_every_step}}},
      {"initial",
       {{"x", vector_json(c.x0)},
        {"w_critic", vector_json(c.w_critic0)},
        {"w_actor", vector_json(c.w_actor0)},
        {"gamma", c.gamma0},
        {"x_hat", vector_json(c.x_hat0)}}},
      {"identifier",
       {{"k", c.id_gains.k},
        {"k_theta", c.id_gains.k_theta},
        {"gamma_theta", matrix_json(c.id_gains.gamma_theta)},
        {"stack_capacity", c.stack_capacity},
        {"savgol_order", c.savgol_order},
        {"savgol_window", c.savgol_window},
        {"offer_every", c.offer_every},
        {"smooth_control", c.smooth_control}}},
      {"diagnostics", {{"pe_window", c.pe_window}}},
  };
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  for (const auto& name : c.gains.violations())
    bad.push_back(name == "num_extrap"
                      ? "extrapolation.num_points must be >= 1 (the critic divides by N)"
                      : "gains." + name + (name == "eta_c2" ? " must be nonnegative" : " must be positive"));
  if (c.seeds.empty()) bad.emplace_back("seeds must not be empty");
  if (!(c.dt > 0)) bad.emplace_back("sim.dt must be positive");
  if (!(c.duration >= 0)) bad.emplace_back("sim.duration must be nonnegative");
  if (c.dt > 0 && c.duration >= 0) {
    const double steps = c.duration / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) bad.emplace_back("sim.duration must be a whole number of steps");
  }
  if (c.record_stride < 1) bad.emplace_back("sim.record_stride must be >= 1");
  if (!(c.steady_window >= 0)) bad.emplace_back("sim.steady_window must be nonnegative");
  if (!(c.tolerances.rtol > 0) || !(c.tolerances.atol > 0)) bad.emplace_back("sim.rtol and sim.atol must be positive");
  if (c.tolerances.max_substeps < 1) bad.emplace_back("sim.max_substeps must be >= 1");

  const int n = c.experiment == Experiment::kRegulation ? 2 : 4;
  const Eigen::Index l = c.offsets.rows();
  if (l < 1) bad.emplace_back("basis.offsets must contain at least one kernel");
  if (c.offsets.cols() != n)
    bad.push_back("basis.offsets must have " + std::to_string(n) + " columns (one per value-function state)");
  if (c.shrink_eps0 < 0 || c.shrink_nu2 < 0 || c.shrink_scale < 0)
    bad.emplace_back("basis.eps0, basis.nu2 and basis.scale must be nonnegative");
  if (c.w_critic0.size() != l) bad.emplace_back("initial.w_critic must have one entry per kernel");
  if (c.w_actor0.size() != l) bad.emplace_back("initial.w_actor must have one entry per kernel");
  if (c.x0.size() != 2) bad.emplace_back("initial.x must have 2 entries");
  if (!(c.gamma0 > 0)) bad.emplace_back("initial.gamma must be positive (Gamma(0) positive definite)");
  if (!(c.half_width_factor >= 0)) bad.emplace_back("extrapolation.half_width_factor must be nonnegative");
  if (c.extrapolation_kind == ExtrapolationKind::kFixedGrid && c.gains.num_extrap >= 1) {
    const double side = std::round(std::pow(static_cast<double>(c.gains.num_extrap), 1.0 / n));
    if (std::lround(std::pow(side, n)) != c.gains.num_extrap)
      bad.push_back("extrapolation.num_points must be a perfect " + std::to_string(n) + "-th power for a grid");
  }
  if (!(c.pe_window > 0)) bad.emplace_back("diagnostics.pe_window must be positive");

  if (c.experiment == Experiment::kTracking) {
    if (c.x_hat0.size() != 2) bad.emplace_back("initial.x_hat must have 2 entries");
    if (!(c.id_gains.k > 0)) bad.emplace_back("identifier.k must be positive");
    if (!(c.id_gains.k_theta >= 0)) bad.emplace_back("identifier.k_theta must be nonnegative");
    if (c.id_gains.gamma_theta.rows() != 3 || c.id_gains.gamma_theta.cols() != 3) {
      bad.emplace_back("identifier.gamma_theta must be 3 x 3");
    } else {
      const Eigen::MatrixXd& g = c.id_gains.gamma_theta;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (g + g.transpose()));
      if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 || eig.eigenvalues().minCoeff() <= 0)
        bad.emplace_back("identifier.gamma_theta must be symmetric positive definite");
    }
    if (c.stack_capacity < 1) bad.emplace_back("identifier.stack_capacity must be >= 1");
    if (c.savgol_order < 1 || c.savgol_window % 2 == 0 || c.savgol_window <= c.savgol_order)
      bad.emplace_back("identifier.savgol_window must be odd and longer than savgol_order >= 1");
    if (c.offer_every < 1) bad.emplace_back("identifier.offer_every must be >= 1");
  }
  return bad;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("seeds: cannot parse '" + text + "'");
    return std::stoull(s);
  };
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const std::uint64_t lo = number(part.substr(0, dots));
    const std::uint64_t hi = number(part.substr(dots + 2));
    if (hi < lo) throw ConfigError("seeds: empty range '" + part + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("seeds: empty list");
  return out;
}

SimConfig sim_config(const ExperimentConfig& c, std::uint64_t seed) {
  SimConfig s;
  s.dt = c.dt;
  s.duration = c.duration;
  s.integrator = c.integrator;
  s.tolerances = c.tolerances;
  s.seed = seed;
  s.record_stride = c.record_stride;
  return s;
}

StaFBasis<double> basis_from(const ExperimentConfig& c) {
  StaFBasis<double> b;
  b.dimension = static_cast<int>(c.offsets.cols());
  b.offsets = c.offsets;
  b.shrink.mode = c.shrink_mode;
  b.shrink.eps0 = c.shrink_eps0;
  b.shrink.nu2 = c.shrink_nu2;
  b.shrink.scale = c.shrink_scale;
  return b;
}

ExtrapolationPolicy policy_from(const ExperimentConfig& c, std::uint64_t seed) {
  ExtrapolationPolicy p;
  p.kind = c.extrapolation_kind;
  p.half_width_factor = c.half_width_factor;
  p.num_points = c.gains.num_extrap;
  p.seed = seed;
  p.resample_every_step = c.resample_every_step;
  p.scale_by_shrink = c.scale_by_shrink;
  return p;
}

RegulationSetup regulation_setup(const ExperimentConfig& c, std::uint64_t seed) {
  require(c.experiment == Experiment::kRegulation, "regulation_setup: config is not a regulation experiment");
  RegulationSetup s;
  s.gains = c.gains;
  s.basis = basis_from(c);
  s.policy = policy_from(c, seed);
  s.x0 = c.x0;
  s.w_critic0 = c.w_critic0;
  s.w_actor0 = c.w_actor0;
  s.gamma0 = c.gamma0 * Eigen::MatrixXd::Identity(c.offsets.rows(), c.offsets.rows());
  return s;
}

TrackingSetup tracking_setup(const ExperimentConfig& c, std::uint64_t seed) {
  require(c.experiment == Experiment::kTracking, "tracking_setup: config is not a tracking experiment");
  TrackingSetup s;
  s.gains = c.gains;
  s.basis = basis_from(c);
  s.policy = policy_from(c, seed);
  s.id_gains = c.id_gains;
  s.x0 = c.x0;
  s.x_hat0 = c.x_hat0;
  s.w_critic0 = c.w_critic0;
  s.w_actor0 = c.w_actor0;
  s.gamma0 = c.gamma0 * Eigen::MatrixXd::Identity(c.offsets.rows(), c.offsets.rows());
  s.stack_capacity = c.stack_capacity;
  s.savgol_order = c.savgol_order;
  s.savgol_window = c.savgol_window;
  s.offer_every = c.offer_every;
  s.smooth_control = c.smooth_control;
  return s;
}

}  // namespace staf
