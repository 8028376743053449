#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ptrom/bundle.hpp"
#include "ptrom/experiment.hpp"
#include "ptrom/metrics.hpp"
#include "ptrom/rom.hpp"

namespace ptrom {

// Offline result: the persisted bundle plus wall-clock stage timings.  Timing
// lives apart from the bundle so repeated runs produce byte-identical
// deterministic artifacts.
struct TrainingResult {
  OfflineBundle bundle;
  json timings;
};

// Runs the four offline stages: full-order training trajectories, state POD
// with source clustering, residual collection through reduced training
// marches, and residual POD with sampling.  Writes `bundle/`,
// `resolved_config.json` and `timings.json` under `out_dir` when given.
TrainingResult run_training_pipeline(const ExperimentConfig& config,
                                     const std::string& out_dir = "");

struct QueryResult {
  Vector2d mu = Vector2d::Zero();
  ErrorReport report;
  RomTrajectory<double> rom;
  std::vector<int> fom_iterations;
  std::uint64_t fingerprint_hash = 0;
};

// Replays the query parameter grid against fresh full-order references.
// Refuses parameter points whose fingerprint matches a training run.  Writes
// per-query artifacts and a suite summary under `out_dir` when given.
std::vector<QueryResult> run_online_queries(const OfflineBundle& bundle,
                                            const std::string& out_dir = "");

// Reproductive study over the published single-vortex conditions.
struct ReproduceOptions {
  std::vector<Index> particle_counts = {100};
  int bases_case = 1;
  NeighborhoodWidth width = NeighborhoodWidth::narrow;
  bool run_heun = false;
  bool run_barnes_hut = false;
  bool run_gnat = false;
  bool run_ptrom = true;
  std::vector<double> thetas = {0.5};
  Index n_steps_override = 0;  // 0: published step count
  Index probe_steps = 5;       // leaf-capacity probe length
};

struct MethodSummary {
  std::string method;
  Index particles = 0;
  json parameters;
  double mean_mae = 0;
  double final_ae_h = 0;
  double mean_ae_h = 0;
  double reference_seconds = 0;
  double method_seconds = 0;
  double speedup = 0;
  std::vector<int> iterations;
  bool converged = true;
};

std::vector<MethodSummary> run_reproductive_suite(const ReproduceOptions& options,
                                                  const std::string& out_dir = "");

// Single-trajectory error certificate: reduced run on `bundle`'s own
// configuration, residual norms along the reconstruction, empirical velocity
// Lipschitz estimate, and the resulting per-step bound next to the measured
// error.  Used by the `report` path and the acceptance run.
ErrorReport certify_reduced_run(const OfflineBundle& bundle, const VectorXd& mu,
                                double kappa_inflation = 1.5);

}  // namespace ptrom
