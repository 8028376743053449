#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptrom/integrators.hpp"
#include "ptrom/io.hpp"
#include "ptrom/kernel.hpp"
#include "ptrom/rom.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

enum class ExperimentKind { vortex_pair, mushroom, single_vortex };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct NewtonSettings {
  double tol = 1e-10;
  int max_iters = 100;
  int jacobian_refresh_period = 1;

  NewtonConfig to_config() const { return {tol, max_iters, jacobian_refresh_period}; }
};

struct RomSettings {
  Index state_modes = 0;     // 0: take the reproductive table value
  Index residual_modes = 0;  // 0: twice the state modes
  Index sample_count = 0;    // 0: equal to residual_modes
  std::string criterion_kind = "neighbor";  // "neighbor" or "barnes_hut"
  double criterion_value = 1.0;
  Index leaf_capacity = 1;
  double tol = 1e-4;
  int max_iters = 100;
  double step_length = 1.0;

  RomConfig to_config() const { return {tol, max_iters, step_length}; }
  ClusterCriterion<double> to_criterion() const;
};

struct ParametricSettings {
  Vector2d mu_min = Vector2d::Zero();
  Vector2d mu_max = Vector2d::Zero();
  int training_points = 4;
  std::uint64_t seed = 2024;
  int query_nx = 2;  // desk-scale default; the full study runs 6x6
  int query_ny = 2;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::vortex_pair;
  Index particles = 500;
  double dt = 0.01;
  double t_final = 5.0;
  double delta = 0.2121;
  double interior_gamma = 0.01;
  double center_gamma = 0.0;  // single_vortex only
  KernelForm kernel_form = KernelForm::standard;
  NewtonSettings newton;
  RomSettings rom;
  ParametricSettings parametric;

  Index n_steps() const;
  TimeGrid<double> time_grid() const { return {dt, n_steps(), 0.0}; }
  void validate() const;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  static ExperimentConfig preset(ExperimentKind kind, Index particles);
};

struct InitialConditions {
  VectorXd x0;
  ParticleSystem<double> sys;
  double end_particle_distance = 0;  // characteristic length l
};

// Initial layout and circulations for a parameter point.  `mu` holds the end
// circulations for the parametric kinds (empty: midpoint of the box) and
// optionally overrides the center circulation for the single vortex.
InitialConditions generate_initial_conditions(const ExperimentConfig& config,
                                              const VectorXd& mu = VectorXd());

// Seeded stratified sampling of the 2D parameter box, one point per stratum
// per axis.
std::vector<Vector2d> latin_hypercube(const Vector2d& lo, const Vector2d& hi, int count,
                                      std::uint64_t seed);

// Uniform lattice over the box, endpoints included.
std::vector<Vector2d> uniform_grid(const Vector2d& lo, const Vector2d& hi, int nx, int ny);

// FNV-1a over the canonical JSON dump; used to prove query points never
// reuse training trajectories.
std::uint64_t config_hash(const json& j);
json fom_run_fingerprint(const ExperimentConfig& config, const VectorXd& mu);

// Reproductive experiment tables ---------------------------------------------

struct ReproductiveConditions {
  Index particles;
  double dt;
  double gamma_center;
  double t_final;
};

// Per-N full-order settings of the single-vortex study.
const ReproductiveConditions& reproductive_conditions(Index particles);
std::vector<Index> reproductive_particle_counts();

enum class NeighborhoodWidth { narrow, moderate, wide };

struct PtromHyperParameters {
  Index state_modes;
  double neighbor_width;  // p_c
  double tol;
};

// Published PTROM hyper-parameters per particle count, tolerance case
// (1..4 for 1e-1..1e-4) and neighborhood width class.
PtromHyperParameters ptrom_hyper_parameters(Index particles, int bases_case,
                                            NeighborhoodWidth width);

struct GnatHyperParameters {
  Index state_modes;
  double tol;
};

GnatHyperParameters gnat_hyper_parameters(Index particles, int bases_case);

double bases_case_tolerance(int bases_case);

// Leaf-capacity candidates for tree baselines: the published sweep plus the
// whole-domain capacity.
std::vector<Index> leaf_capacity_candidates(Index particles);

}  // namespace ptrom
