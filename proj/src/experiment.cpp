#include "ptrom/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ptrom {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::vortex_pair: return "vortex_pair";
    case ExperimentKind::mushroom: return "mushroom";
    case ExperimentKind::single_vortex: return "single_vortex";
  }
  throw config_error("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "vortex_pair") return ExperimentKind::vortex_pair;
  if (name == "mushroom") return ExperimentKind::mushroom;
  if (name == "single_vortex") return ExperimentKind::single_vortex;
  throw config_error("unknown experiment kind '" + name + "'");
}

ClusterCriterion<double> RomSettings::to_criterion() const {
  if (criterion_kind == "neighbor") return ClusterCriterion<double>::neighbor(criterion_value);
  if (criterion_kind == "barnes_hut") return ClusterCriterion<double>::barnes_hut(criterion_value);
  throw config_error("unknown cluster criterion '" + criterion_kind + "'");
}

Index ExperimentConfig::n_steps() const {
  if (dt <= 0) throw config_error("time step must be positive");
  const double steps = t_final / dt;
  const auto rounded = static_cast<Index>(std::llround(steps));
  if (rounded < 1) throw config_error("final time shorter than one step");
  return rounded;
}

void ExperimentConfig::validate() const {
  if (particles < 2) throw config_error("need at least two particles");
  if (delta < 0) throw config_error("kernel offset must be non-negative");
  (void)n_steps();
  if (rom.tol <= 0 || newton.tol <= 0) throw config_error("tolerances must be positive");
  if (rom.leaf_capacity < 1) throw config_error("leaf capacity must be at least 1");
  if (kind != ExperimentKind::single_vortex) {
    if ((parametric.mu_max - parametric.mu_min).minCoeff() < 0)
      throw config_error("parameter box is inverted");
    if (parametric.training_points < 1) throw config_error("need at least one training point");
    if (parametric.query_nx < 1 || parametric.query_ny < 1)
      throw config_error("query grid must be non-empty");
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["particles"] = particles;
  j["dt"] = dt;
  j["t_final"] = t_final;
  j["delta"] = delta;
  j["interior_gamma"] = interior_gamma;
  j["center_gamma"] = center_gamma;
  j["kernel_form"] = kernel_form == KernelForm::standard ? "standard" : "denominator_scaled";
  j["newton"] = {{"tol", newton.tol},
                 {"max_iters", newton.max_iters},
                 {"jacobian_refresh_period", newton.jacobian_refresh_period}};
  j["rom"] = {{"state_modes", rom.state_modes},
              {"residual_modes", rom.residual_modes},
              {"sample_count", rom.sample_count},
              {"criterion_kind", rom.criterion_kind},
              {"criterion_value", rom.criterion_value},
              {"leaf_capacity", rom.leaf_capacity},
              {"tol", rom.tol},
              {"max_iters", rom.max_iters},
              {"step_length", rom.step_length}};
  j["parametric"] = {{"mu_min", {parametric.mu_min.x(), parametric.mu_min.y()}},
                     {"mu_max", {parametric.mu_max.x(), parametric.mu_max.y()}},
                     {"training_points", parametric.training_points},
                     {"seed", parametric.seed},
                     {"query_nx", parametric.query_nx},
                     {"query_ny", parametric.query_ny}};
  return j;
}

namespace {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Vector2d read_vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw config_error("expected a 2-element array");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentKind kind = ExperimentKind::vortex_pair;
  if (j.contains("kind")) kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  Index particles = j.value("particles", Index{500});
  ExperimentConfig cfg = preset(kind, particles);
  read_field(j, "dt", cfg.dt);
  read_field(j, "t_final", cfg.t_final);
  read_field(j, "delta", cfg.delta);
  read_field(j, "interior_gamma", cfg.interior_gamma);
  read_field(j, "center_gamma", cfg.center_gamma);
  if (j.contains("kernel_form")) {
    const auto name = j.at("kernel_form").get<std::string>();
    if (name == "standard") cfg.kernel_form = KernelForm::standard;
    else if (name == "denominator_scaled") cfg.kernel_form = KernelForm::denominator_scaled;
    else throw config_error("unknown kernel form '" + name + "'");
  }
  if (j.contains("newton")) {
    const json& n = j.at("newton");
    read_field(n, "tol", cfg.newton.tol);
    read_field(n, "max_iters", cfg.newton.max_iters);
    read_field(n, "jacobian_refresh_period", cfg.newton.jacobian_refresh_period);
  }
  if (j.contains("rom")) {
    const json& r = j.at("rom");
    read_field(r, "state_modes", cfg.rom.state_modes);
    read_field(r, "residual_modes", cfg.rom.residual_modes);
    read_field(r, "sample_count", cfg.rom.sample_count);
    read_field(r, "criterion_kind", cfg.rom.criterion_kind);
    read_field(r, "criterion_value", cfg.rom.criterion_value);
    read_field(r, "leaf_capacity", cfg.rom.leaf_capacity);
    read_field(r, "tol", cfg.rom.tol);
    read_field(r, "max_iters", cfg.rom.max_iters);
    read_field(r, "step_length", cfg.rom.step_length);
  }
  if (j.contains("parametric")) {
    const json& p = j.at("parametric");
    if (p.contains("mu_min")) cfg.parametric.mu_min = read_vec2(p.at("mu_min"));
    if (p.contains("mu_max")) cfg.parametric.mu_max = read_vec2(p.at("mu_max"));
    read_field(p, "training_points", cfg.parametric.training_points);
    read_field(p, "seed", cfg.parametric.seed);
    read_field(p, "query_nx", cfg.parametric.query_nx);
    read_field(p, "query_ny", cfg.parametric.query_ny);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::preset(ExperimentKind kind, Index particles) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.particles = particles;
  switch (kind) {
    case ExperimentKind::vortex_pair: {
      cfg.dt = 0.01;
      cfg.t_final = 5.0;
      cfg.delta = 0.2121;
      cfg.parametric.mu_min = {0.25 * 255.0, 0.25 * 255.0};
      cfg.parametric.mu_max = {255.0, 255.0};
      cfg.rom.state_modes = 85;
      cfg.rom.residual_modes = 110;
      cfg.rom.sample_count = 60;
      cfg.rom.criterion_value = 1.0;
      cfg.rom.tol = 1e-4;
      break;
    }
    case ExperimentKind::mushroom: {
      cfg.dt = 0.005;
      cfg.t_final = 5.0;
      cfg.delta = 0.15;
      cfg.parametric.mu_min = {-220.0, 0.5 * 220.0};
      cfg.parametric.mu_max = {-0.5 * 220.0, 220.0};
      cfg.rom.state_modes = 110;
      cfg.rom.residual_modes = 185;
      cfg.rom.sample_count = 75;
      cfg.rom.criterion_value = 1.0;
      cfg.rom.tol = 1e-4;
      break;
    }
    case ExperimentKind::single_vortex: {
      const ReproductiveConditions& row = reproductive_conditions(particles);
      cfg.dt = row.dt;
      cfg.t_final = row.t_final;
      cfg.delta = 0.0;
      cfg.center_gamma = row.gamma_center;
      const PtromHyperParameters hp =
          ptrom_hyper_parameters(particles, 1, NeighborhoodWidth::narrow);
      cfg.rom.state_modes = hp.state_modes;
      cfg.rom.criterion_value = hp.neighbor_width;
      cfg.rom.tol = hp.tol;
      break;
    }
  }
  return cfg;
}

InitialConditions generate_initial_conditions(const ExperimentConfig& config,
                                              const VectorXd& mu) {
  config.validate();
  const Index n = config.particles;
  InitialConditions out;
  out.x0.resize(2 * n);
  out.sys.circulation = VectorXd::Constant(n, config.interior_gamma);
  out.sys.delta = config.delta;
  out.sys.kernel_form = config.kernel_form;

  Vector2d ends;
  if (config.kind == ExperimentKind::single_vortex) {
    ends = Vector2d::Zero();
  } else if (mu.size() == 0) {
    ends = 0.5 * (config.parametric.mu_min + config.parametric.mu_max);
  } else if (mu.size() == 2) {
    ends = {mu[0], mu[1]};
  } else {
    throw config_error("parameter point must have two entries");
  }

  switch (config.kind) {
    case ExperimentKind::vortex_pair: {
      out.x0.head(n) = VectorXd::LinSpaced(n, -52.93, 52.93);
      out.x0.tail(n) = out.x0.head(n);
      out.sys.circulation[0] = ends[0];
      out.sys.circulation[n - 1] = ends[1];
      break;
    }
    case ExperimentKind::mushroom: {
      out.x0.head(n) = VectorXd::LinSpaced(n, -37.43, 37.43);
      out.x0.tail(n).setConstant(-10.0);
      out.sys.circulation[0] = ends[0];
      out.sys.circulation[n - 1] = ends[1];
      VectorXd inflow = VectorXd::Zero(2 * n);
      const VectorXd chi_inf = VectorXd::LinSpaced(n, -1.0, 1.0);
      inflow.tail(n) =
          5.0 * (1.125 * 1.125 - chi_inf.array().square()).sqrt().matrix().eval();
      inflow.tail(n).array() += 0.5;
      out.sys.inflow = inflow;
      break;
    }
    case ExperimentKind::single_vortex: {
      const auto nd = static_cast<double>(n);
      out.x0.head(n) = VectorXd::LinSpaced(n, -nd, nd);
      out.x0.tail(n) = out.x0.head(n);
      double center = config.center_gamma;
      if (mu.size() >= 1) center = mu[0];
      out.sys.circulation[(n - 1) / 2] = center;
      break;
    }
  }

  out.end_particle_distance =
      (particle_position<double>(out.x0, 0, n) - particle_position<double>(out.x0, n - 1, n))
          .norm();
  if (out.end_particle_distance == 0) out.end_particle_distance = 1.0;
  out.sys.validate();
  return out;
}

std::vector<Vector2d> latin_hypercube(const Vector2d& lo, const Vector2d& hi, int count,
                                      std::uint64_t seed) {
  if (count < 1) throw config_error("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> strata_x(count), strata_y(count);
  for (int i = 0; i < count; ++i) strata_x[i] = strata_y[i] = i;
  std::shuffle(strata_x.begin(), strata_x.end(), rng);
  std::shuffle(strata_y.begin(), strata_y.end(), rng);
  std::vector<Vector2d> points(count);
  for (int i = 0; i < count; ++i) {
    const double ux = (strata_x[i] + unit(rng)) / count;
    const double uy = (strata_y[i] + unit(rng)) / count;
    points[i] = {lo.x() + ux * (hi.x() - lo.x()), lo.y() + uy * (hi.y() - lo.y())};
  }
  return points;
}

std::vector<Vector2d> uniform_grid(const Vector2d& lo, const Vector2d& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw config_error("grid must be non-empty");
  std::vector<Vector2d> points;
  points.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    const double ty = ny == 1 ? 0.5 : static_cast<double>(iy) / (ny - 1);
    for (int ix = 0; ix < nx; ++ix) {
      const double tx = nx == 1 ? 0.5 : static_cast<double>(ix) / (nx - 1);
      points.push_back({lo.x() + tx * (hi.x() - lo.x()), lo.y() + ty * (hi.y() - lo.y())});
    }
  }
  return points;
}

std::uint64_t config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char c : dump) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

json fom_run_fingerprint(const ExperimentConfig& config, const VectorXd& mu) {
  json j;
  j["kind"] = to_string(config.kind);
  j["particles"] = config.particles;
  j["dt"] = format_full(config.dt);
  j["t_final"] = format_full(config.t_final);
  j["delta"] = format_full(config.delta);
  j["newton_tol"] = format_full(config.newton.tol);
  json mu_list = json::array();
  for (Index i = 0; i < mu.size(); ++i) mu_list.push_back(format_full(mu[i]));
  j["mu"] = mu_list;
  return j;
}

// Reproductive tables ---------------------------------------------------------

namespace {

const ReproductiveConditions kConditions[] = {
    {100, 0.01, 500.0, 20.0},      {500, 2.5e-3, 1e4, 5.0},     {1000, 2.5e-4, 1e5, 0.5},
    {2000, 1.25e-4, 2e5, 0.25},    {3000, 1e-4, 3e5, 0.2},      {4000, 7.5e-5, 4e5, 0.15},
    {5000, 5e-5, 6.75e5, 0.1},
};

int conditions_row(Index particles) {
  for (int i = 0; i < 7; ++i)
    if (kConditions[i].particles == particles) return i;
  throw config_error("no published conditions for " + std::to_string(particles) +
                     " particles");
}

struct ModeWidthEntry {
  Index state_modes;
  double neighbor_width;
};

// Rows: particle counts 100..5000; columns: tolerance cases 1..4.
const ModeWidthEntry kNarrow[7][4] = {
    {{13, 0}, {14, 0}, {14, 0}, {16, 0}},
    {{21, 0}, {22, 0}, {23, 0}, {24, 0}},
    {{21, 0}, {22, 0}, {23, 0}, {24, 0}},
    {{21, 0}, {22, 0}, {23, 0}, {26, 0}},
    {{23, 0}, {23, 0}, {25, 0}, {26, 0.5}},
    {{23, 0}, {23, 0}, {25, 0}, {26, 0.5}},
    {{23, 0}, {24, 0}, {26, 0}, {26, 0.5}},
};

const ModeWidthEntry kModerate[7][4] = {
    {{13, 1}, {14, 1}, {14, 1}, {18, 1}},
    {{21, 1}, {22, 1}, {23, 1}, {24, 1}},
    {{21, 1}, {22, 1}, {23, 1}, {24, 1}},
    {{21, 1}, {22, 1}, {23, 1}, {26, 1}},
    {{23, 1}, {23, 1}, {25, 1}, {26, 1}},
    {{23, 1}, {23, 1}, {25, 1}, {26, 1}},
    {{23, 1}, {24, 1}, {26, 1}, {26, 1}},
};

const ModeWidthEntry kWide[7][4] = {
    {{13, 2}, {14, 2}, {14, 2}, {18, 2}},
    {{21, 2}, {22, 2}, {23, 2}, {24, 2}},
    {{21, 2}, {22, 2}, {23, 2}, {24, 2}},
    {{21, 2}, {22, 2}, {23, 2}, {26, 2}},
    {{23, 2}, {23, 2}, {25, 2}, {26, 2}},
    {{23, 2}, {23, 2}, {25, 2}, {32, 2}},
    {{23, 2}, {24, 2}, {26, 2}, {33, 2}},
};

const Index kGnatModes[7][4] = {
    {13, 14, 14, 16}, {21, 22, 24, 25}, {21, 22, 24, 25}, {21, 22, 24, 26},
    {23, 24, 25, 26}, {23, 24, 25, 26}, {23, 25, 26, 27},
};

}  // namespace

const ReproductiveConditions& reproductive_conditions(Index particles) {
  return kConditions[conditions_row(particles)];
}

std::vector<Index> reproductive_particle_counts() {
  return {100, 500, 1000, 2000, 3000, 4000, 5000};
}

double bases_case_tolerance(int bases_case) {
  switch (bases_case) {
    case 1: return 1e-1;
    case 2: return 1e-2;
    case 3: return 1e-3;
    case 4: return 1e-4;
  }
  throw config_error("tolerance case must be 1..4");
}

PtromHyperParameters ptrom_hyper_parameters(Index particles, int bases_case,
                                            NeighborhoodWidth width) {
  const int row = conditions_row(particles);
  const double tol = bases_case_tolerance(bases_case);
  const ModeWidthEntry* table = nullptr;
  switch (width) {
    case NeighborhoodWidth::narrow: table = kNarrow[row]; break;
    case NeighborhoodWidth::moderate: table = kModerate[row]; break;
    case NeighborhoodWidth::wide: table = kWide[row]; break;
  }
  const ModeWidthEntry& entry = table[bases_case - 1];
  return {entry.state_modes, entry.neighbor_width, tol};
}

GnatHyperParameters gnat_hyper_parameters(Index particles, int bases_case) {
  const int row = conditions_row(particles);
  return {kGnatModes[row][bases_case - 1], bases_case_tolerance(bases_case)};
}

std::vector<Index> leaf_capacity_candidates(Index particles) {
  std::vector<Index> caps = {50, 75, 100, 125};
  caps.erase(std::remove_if(caps.begin(), caps.end(),
                            [&](Index c) { return c >= particles; }),
             caps.end());
  caps.push_back(particles);
  return caps;
}

}  // namespace ptrom
