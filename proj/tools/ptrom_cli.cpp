#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptrom/bundle.hpp"
#include "ptrom/pipeline.hpp"
#include "ptrom/quadtree.hpp"
#include "ptrom/reports.hpp"

namespace fs = std::filesystem;
using namespace ptrom;

namespace {

std::string default_out_root() {
  if (const char* env = std::getenv("PTROM_OUT")) return env;
  return "runs";
}

ExperimentConfig config_from_options(const std::string& config_path, const std::string& kind,
                                     Index particles) {
  if (!config_path.empty()) return ExperimentConfig::from_json(load_json(config_path));
  ExperimentConfig cfg =
      ExperimentConfig::preset(experiment_kind_from_string(kind), particles);
  cfg.validate();
  return cfg;
}

void print_stats(const json& stats) {
  std::cout << "  state modes      " << stats.at("state_modes") << "\n"
            << "  residual modes   " << stats.at("residual_modes") << "\n"
            << "  sampled targets  " << stats.at("sample_count") << "\n"
            << "  source clusters  " << stats.at("num_clusters") << "\n"
            << "  direct sources   " << stats.at("num_direct") << "\n";
}

int run_train(const std::string& config_path, const std::string& kind, Index particles,
              const std::string& out_dir) {
  const ExperimentConfig cfg = config_from_options(config_path, kind, particles);
  const std::string out =
      out_dir.empty() ? (fs::path(default_out_root()) / to_string(cfg.kind)).string() : out_dir;
  std::cout << "training " << to_string(cfg.kind) << " with " << cfg.particles
            << " particles, " << cfg.n_steps() << " steps\n";
  const TrainingResult result = run_training_pipeline(cfg, out);
  std::cout << "bundle written to " << (fs::path(out) / "bundle").string() << "\n";
  print_stats(result.bundle.stats);
  std::cout << "  offline seconds  "
            << result.timings.value("stage_fom_seconds", 0.0) +
                   result.timings.value("stage_pod_seconds", 0.0) +
                   result.timings.value("stage_tier2_seconds", 0.0) +
                   result.timings.value("stage_sampling_seconds", 0.0)
            << "\n";
  return 0;
}

int run_query(const std::string& bundle_dir, const std::string& out_dir) {
  const OfflineBundle bundle = OfflineBundle::load(bundle_dir);
  const std::string out = out_dir.empty()
                              ? (fs::path(default_out_root()) /
                                 (to_string(bundle.config.kind) + "_queries"))
                                    .string()
                              : out_dir;
  const std::vector<QueryResult> results = run_online_queries(bundle, out);
  double mae = 0, aeh = 0;
  for (const QueryResult& q : results) {
    std::cout << "query mu=(" << q.mu.x() << ", " << q.mu.y() << ")  mean MAE "
              << q.report.mean_mae << "  mean AE_H " << q.report.mean_ae_h << "  speedup "
              << q.report.speedup << "\n";
    mae += q.report.mean_mae;
    aeh += q.report.mean_ae_h;
  }
  std::cout << "grid averages: MAE " << mae / results.size() << "  AE_H "
            << aeh / results.size() << "\n"
            << "artifacts in " << out << "\n";
  return 0;
}

int run_reproduce(const ReproduceOptions& options, const std::string& out_dir) {
  const std::string out =
      out_dir.empty() ? (fs::path(default_out_root()) / "reproduce").string() : out_dir;
  const std::vector<MethodSummary> rows = run_reproductive_suite(options, out);
  for (const MethodSummary& row : rows) {
    std::cout << row.method << " N=" << row.particles;
    if (row.method != "fom") std::cout << "  mean MAE " << row.mean_mae;
    std::cout << "  final AE_H " << row.final_ae_h << "  speedup " << row.speedup
              << (row.converged ? "" : "  [not converged]") << "\n";
  }
  std::cout << "artifacts in " << out << "\n";
  return 0;
}

int run_baseline(const std::string& config_path, const std::string& kind, Index particles,
                 const std::string& method, double theta, Index leaf_capacity,
                 const std::string& out_dir) {
  const ExperimentConfig cfg = config_from_options(config_path, kind, particles);
  const InitialConditions ics = generate_initial_conditions(cfg);
  const TimeGrid<double> grid = cfg.time_grid();
  SimulateResult<double> run;
  if (method == "fom") {
    PairwiseModel<double> model{ics.sys};
    run = fom_simulate<double>(ics.x0, model, grid, cfg.newton.to_config());
  } else if (method == "heun") {
    PairwiseModel<double> model{ics.sys};
    run = heun_simulate<double>(ics.x0, model, grid);
  } else if (method == "bh") {
    BarnesHutModel<double> model{ics.sys, ClusterCriterion<double>::barnes_hut(theta),
                                 leaf_capacity};
    run = fom_simulate<double>(ics.x0, model, grid, cfg.newton.to_config());
  } else {
    throw config_error("unknown baseline method '" + method + "'");
  }
  const std::string out =
      out_dir.empty() ? (fs::path(default_out_root()) / ("baseline_" + method)).string()
                      : out_dir;
  fs::create_directories(out);
  write_matrix((fs::path(out) / "trajectory.ptmx").string(), run.snapshots.columns, grid.dt,
               grid.t0);
  save_json((fs::path(out) / "resolved_config.json").string(), cfg.to_json());
  json timing;
  timing["loop_seconds"] = run.loop_seconds;
  save_json((fs::path(out) / "timings.json").string(), timing);
  const double h0 = hamiltonian<double>(ics.x0, ics.sys);
  const double hf = hamiltonian<double>(run.snapshots.columns.col(grid.n_steps - 1), ics.sys);
  std::cout << method << " run: " << grid.n_steps << " steps in " << run.loop_seconds
            << " s, |dH|/|H0| " << ae_hamiltonian<double>(h0, hf) << "\n"
            << "trajectory written to " << out << "\n";
  return run.all_converged() ? 0 : 3;
}

int run_field(const std::string& trajectory_path, const std::string& config_path,
              const std::string& kind, Index particles, Index step, Index nx, Index ny,
              double pad, double c_g, const std::string& out_path) {
  const ExperimentConfig cfg = config_from_options(config_path, kind, particles);
  const InitialConditions ics = generate_initial_conditions(cfg);
  VectorXd state;
  if (trajectory_path.empty()) {
    state = ics.x0;
  } else {
    const MatrixFile file = read_matrix(trajectory_path);
    const Index col = step < 0 ? file.data.cols() - 1 : step;
    if (col < 0 || col >= file.data.cols())
      throw config_error("step index outside the stored trajectory");
    state = file.data.col(col);
  }
  const Index n = particle_count(state.size());
  LatticeSpec<double> lattice;
  lattice.x_min = state.head(n).minCoeff() - pad;
  lattice.x_max = state.head(n).maxCoeff() + pad;
  lattice.y_min = state.tail(n).minCoeff() - pad;
  lattice.y_max = state.tail(n).maxCoeff() + pad;
  lattice.nx = nx;
  lattice.ny = ny;
  const double gamma_bar = ics.sys.circulation.cwiseAbs().mean();
  const MatrixXd field = velocity_field_grid<double>(state, ics.sys, lattice, c_g,
                                                     ics.end_particle_distance, gamma_bar);
  write_csv(out_path, field);
  std::cout << "wrote " << ny << "x" << nx << " field magnitudes to " << out_path << "\n";
  return 0;
}

int run_report(const std::string& run_dir) {
  write_manifest(run_dir);
  const json manifest = manifest_from_dir(run_dir);
  std::cout << manifest.at("files").size() << " artifacts under " << run_dir << "\n";
  const fs::path summary = fs::path(run_dir) / "query_summary.json";
  if (fs::exists(summary)) {
    const json s = load_json(summary.string());
    std::cout << "grid mean MAE " << s.value("grid_mean_mae", 0.0) << ", grid mean AE_H "
              << s.value("grid_mean_ae_h", 0.0) << "\n";
  }
  return 0;
}

int run_certify(const std::string& bundle_dir, double inflation, const std::string& out_path) {
  const OfflineBundle bundle = OfflineBundle::load(bundle_dir);
  const ErrorReport report = certify_reduced_run(bundle, VectorXd(), inflation);
  bool dominated = true;
  for (size_t i = 0; i < report.error_bound.size(); ++i)
    dominated = dominated && report.error_bound[i] >= report.state_error[i];
  if (!out_path.empty()) {
    write_error_report_csv(out_path, report);
    std::cout << "per-step certificate written to " << out_path << "\n";
  }
  std::cout << "bound dominates measured error: " << (dominated ? "yes" : "no") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-tree reduced-order modeling for 2D vortex dynamics"};
  app.require_subcommand(1);

  std::string config_path, kind = "vortex_pair", out_dir, bundle_dir, method = "fom";
  std::string trajectory_path, out_path = "field.csv", run_dir;
  Index particles = 500, leaf_capacity = 1, step = -1, nx = 64, ny = 64;
  double theta = 0.5, pad = 1.0, c_g = 1.0, inflation = 1.5;

  auto* train = app.add_subcommand("train", "Run the offline stages and write a bundle");
  train->add_option("--config", config_path, "JSON experiment config");
  train->add_option("--kind", kind, "preset: vortex_pair, mushroom, single_vortex");
  train->add_option("--particles", particles, "particle count for presets");
  train->add_option("--out", out_dir, "output directory");

  auto* query = app.add_subcommand("query", "Replay the query grid against a bundle");
  query->add_option("--bundle", bundle_dir, "bundle directory")->required();
  query->add_option("--out", out_dir, "output directory");

  ReproduceOptions rep;
  std::vector<Index> rep_particles = {100};
  std::string width = "narrow";
  auto* reproduce = app.add_subcommand("reproduce", "Published single-vortex study");
  reproduce->add_option("--particles", rep_particles, "particle counts");
  reproduce->add_option("--case", rep.bases_case, "tolerance case 1..4");
  reproduce->add_option("--width", width, "neighborhood width: narrow, moderate, wide");
  reproduce->add_flag("--heun", rep.run_heun, "include the explicit baseline");
  reproduce->add_flag("--barnes-hut", rep.run_barnes_hut, "include tree-code baselines");
  reproduce->add_flag("--gnat", rep.run_gnat, "include the unclustered reduced baseline");
  bool no_ptrom = false;
  reproduce->add_flag("--no-ptrom", no_ptrom, "skip the clustered reduced run");
  reproduce->add_option("--theta", rep.thetas, "tree opening ratios");
  reproduce->add_option("--steps", rep.n_steps_override, "override the step count");
  reproduce->add_option("--out", out_dir, "output directory");

  auto* baseline = app.add_subcommand("baseline", "Single full-order trajectory");
  baseline->add_option("--config", config_path, "JSON experiment config");
  baseline->add_option("--kind", kind, "preset kind");
  baseline->add_option("--particles", particles, "particle count for presets");
  baseline->add_option("--method", method, "fom, heun, or bh");
  baseline->add_option("--theta", theta, "opening ratio for bh");
  baseline->add_option("--leaf-capacity", leaf_capacity, "tree leaf capacity for bh");
  baseline->add_option("--out", out_dir, "output directory");

  auto* field = app.add_subcommand("field", "Velocity magnitude on a lattice");
  field->add_option("--trajectory", trajectory_path, "trajectory matrix file");
  field->add_option("--config", config_path, "JSON experiment config");
  field->add_option("--kind", kind, "preset kind");
  field->add_option("--particles", particles, "particle count for presets");
  field->add_option("--step", step, "column to evaluate (-1: last)");
  field->add_option("--nx", nx, "lattice points per row");
  field->add_option("--ny", ny, "lattice rows");
  field->add_option("--pad", pad, "margin around the particle bounding box");
  field->add_option("--gain", c_g, "display gain");
  field->add_option("--out", out_path, "CSV output path");

  auto* report = app.add_subcommand("report", "Rebuild the manifest for a run directory");
  report->add_option("dir", run_dir, "run directory")->required();

  auto* certify = app.add_subcommand("certify", "Per-step error bound for a bundle");
  certify->add_option("--bundle", bundle_dir, "bundle directory")->required();
  certify->add_option("--inflation", inflation, "safety factor on the velocity Lipschitz estimate");
  certify->add_option("--out", out_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return run_train(config_path, kind, particles, out_dir);
    if (query->parsed()) return run_query(bundle_dir, out_dir);
    if (reproduce->parsed()) {
      rep.particle_counts = rep_particles;
      rep.run_ptrom = !no_ptrom;
      if (width == "narrow") rep.width = NeighborhoodWidth::narrow;
      else if (width == "moderate") rep.width = NeighborhoodWidth::moderate;
      else if (width == "wide") rep.width = NeighborhoodWidth::wide;
      else throw config_error("unknown width '" + width + "'");
      return run_reproduce(rep, out_dir);
    }
    if (baseline->parsed())
      return run_baseline(config_path, kind, particles, method, theta, leaf_capacity, out_dir);
    if (field->parsed())
      return run_field(trajectory_path, config_path, kind, particles, step, nx, ny, pad, c_g,
                       out_path);
    if (report->parsed()) return run_report(run_dir);
    if (certify->parsed()) return run_certify(bundle_dir, inflation, out_path);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
