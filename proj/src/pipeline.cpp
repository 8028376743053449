#include "ptrom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <numeric>

#include "ptrom/quadtree.hpp"
#include "ptrom/reports.hpp"

namespace ptrom {

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(const clock_type::time_point& tic) {
  return std::chrono::duration<double>(clock_type::now() - tic).count();
}

std::vector<Index> all_particle_ids(Index n) {
  std::vector<Index> ids(static_cast<size_t>(n));
  std::iota(ids.begin(), ids.end(), Index{0});
  return ids;
}

std::vector<VectorXd> training_parameter_points(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::single_vortex) return {VectorXd()};
  const auto pts = latin_hypercube(config.parametric.mu_min, config.parametric.mu_max,
                                   config.parametric.training_points, config.parametric.seed);
  std::vector<VectorXd> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    VectorXd mu(2);
    mu << p.x(), p.y();
    out.push_back(mu);
  }
  return out;
}

std::vector<VectorXd> query_parameter_points(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::single_vortex) return {VectorXd()};
  const auto pts = uniform_grid(config.parametric.mu_min, config.parametric.mu_max,
                                config.parametric.query_nx, config.parametric.query_ny);
  std::vector<VectorXd> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    VectorXd mu(2);
    mu << p.x(), p.y();
    out.push_back(mu);
  }
  return out;
}

struct ResolvedRomSizes {
  Index state_modes;
  Index residual_modes;
  Index sample_count;
};

ResolvedRomSizes resolve_rom_sizes(const ExperimentConfig& config) {
  ResolvedRomSizes sizes{};
  sizes.state_modes = config.rom.state_modes;
  if (sizes.state_modes < 1)
    throw config_error("state mode count must be set (preset or explicit)");
  sizes.residual_modes =
      config.rom.residual_modes > 0 ? config.rom.residual_modes : 2 * sizes.state_modes;
  sizes.sample_count =
      config.rom.sample_count > 0 ? config.rom.sample_count : sizes.residual_modes;
  if (2 * sizes.sample_count < sizes.residual_modes)
    throw config_error("sampled particles cannot support the residual space (need 2*samples >= residual modes)");
  return sizes;
}

json iteration_stats(const std::vector<int>& iterations) {
  json j;
  j["total"] = std::accumulate(iterations.begin(), iterations.end(), 0);
  j["max"] = iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
  return j;
}

// Offline stages 2..4 given already-computed training trajectories.  Shared
// by the parametric pipeline and the reproductive suite (which reuses its
// reference trajectory as the single training run).
OfflineBundle assemble_bundle(const ExperimentConfig& config,
                              const InitialConditions& nominal,
                              const std::vector<VectorXd>& mus,
                              const std::vector<const MatrixXd*>& trajectories,
                              json& timings) {
  const ResolvedRomSizes sizes = resolve_rom_sizes(config);
  const Index n_dof = 2 * config.particles;
  Index total_cols = 0;
  for (const MatrixXd* t : trajectories) total_cols += t->cols();

  MatrixXd snapshots(n_dof, total_cols);
  Index at = 0;
  for (const MatrixXd* t : trajectories) {
    snapshots.middleCols(at, t->cols()) = *t;
    at += t->cols();
  }

  OfflineBundle bundle;
  bundle.config = config;

  auto tic = clock_type::now();
  bundle.basis = build_pod<double>(snapshots, sizes.state_modes, nominal.x0);
  const WeightedPodTree<double> wtree =
      build_weighted_pod_tree<double>(bundle.basis, nominal.sys.circulation,
                                      config.rom.leaf_capacity);
  const ClusterCriterion<double> criterion = config.rom.to_criterion();
  SurrogateSourceBasis<double> surrogate_all =
      cluster_pod<double>(wtree, bundle.basis, nominal.sys.circulation,
                          all_particle_ids(config.particles), criterion);
  timings["stage_pod_seconds"] = seconds_since(tic);

  tic = clock_type::now();
  const Index n_steps = config.n_steps();
  MatrixXd residual_snapshots;
  Index jacobian_cols = 0;
  json training_runs = json::array();
  double tier2_loop_seconds = 0;
  for (size_t k = 0; k < mus.size(); ++k) {
    InitialConditions ics = generate_initial_conditions(config, mus[k]);
    SurrogateSourceBasis<double> surrogate_mu = surrogate_all;
    reassign_cluster_circulation<double>(surrogate_mu, ics.sys.circulation, bundle.basis);
    LspgSolver<double> lspg(bundle.basis, ics.sys, config.dt, config.rom.to_config(),
                            &surrogate_mu);
    LspgResult<double> result = lspg.simulate(n_steps, true);
    tier2_loop_seconds += result.trajectory.minimization_seconds;
    // The sampled operator applies the same gappy fit to residuals and to the
    // columns of (I - dt/2 J_vel) Phi, so the training matrix carries batches
    // of those products along the trajectory; residual snapshots alone leave
    // the Jacobian range under-resolved at the 2M mode budget.
    const Index stride = std::max<Index>(1, n_steps / 32);
    const Index n_batches = (n_steps + stride - 1) / stride;
    MatrixXd run_cols(n_dof,
                      result.residual_snapshots.cols() + n_batches * bundle.basis.modes());
    run_cols.leftCols(result.residual_snapshots.cols()) = result.residual_snapshots;
    Index at_col = result.residual_snapshots.cols();
    for (Index s = 0; s < n_steps; s += stride) {
      const VectorXd x_full =
          bundle.basis.x_ref + bundle.basis.phi * result.trajectory.x_hat.col(s);
      const BlockDiagonalJacobian<double> jv = inexact_kernel_jacobian<double>(x_full, ics.sys);
      run_cols.middleCols(at_col, bundle.basis.modes()) = detail::apply_residual_jacobian<double>(
          jv, all_particle_ids(config.particles), bundle.basis.phi, config.dt);
      at_col += bundle.basis.modes();
    }
    jacobian_cols += n_batches * bundle.basis.modes();
    if (residual_snapshots.size() == 0) {
      residual_snapshots = std::move(run_cols);
    } else {
      const Index old_cols = residual_snapshots.cols();
      residual_snapshots.conservativeResize(Eigen::NoChange, old_cols + run_cols.cols());
      residual_snapshots.rightCols(run_cols.cols()) = run_cols;
    }
    json run;
    run["fingerprint"] = fom_run_fingerprint(config, mus[k]);
    run["hash"] = config_hash(run["fingerprint"]);
    run["reduced_iterations"] = iteration_stats(result.trajectory.iterations);
    run["reduced_converged"] = result.trajectory.all_converged();
    training_runs.push_back(run);
    bundle.training_hashes.push_back(run["hash"].get<std::uint64_t>());
  }
  timings["stage_tier2_seconds"] = seconds_since(tic);
  timings["stage_tier2_loop_seconds"] = tier2_loop_seconds;

  tic = clock_type::now();
  bundle.residual = build_pod<double>(residual_snapshots, sizes.residual_modes,
                                      VectorXd::Zero(n_dof));
  const std::vector<Index> sample_ids =
      greedy_sample<double>(bundle.residual.phi, sizes.sample_count);
  bundle.op = build_gnat_operator<double>(bundle.residual.phi, sample_ids);
  bundle.surrogate = cluster_pod<double>(wtree, bundle.basis, nominal.sys.circulation,
                                         sample_ids, criterion);
  timings["stage_sampling_seconds"] = seconds_since(tic);

  bundle.training_runs = training_runs;
  bundle.stats["state_modes"] = bundle.basis.modes();
  bundle.stats["residual_modes"] = bundle.residual.modes();
  bundle.stats["sample_count"] = sample_ids.size();
  bundle.stats["num_clusters"] = bundle.surrogate.num_clusters();
  bundle.stats["num_direct"] = bundle.surrogate.num_direct();
  bundle.stats["training_snapshot_columns"] = total_cols;
  bundle.stats["residual_snapshot_columns"] = residual_snapshots.cols() - jacobian_cols;
  bundle.stats["jacobian_snapshot_columns"] = jacobian_cols;
  return bundle;
}

ErrorReport build_error_report(const MatrixXd& ref, const MatrixXd& rom, double l,
                               const ParticleSystem<double>& ref_sys,
                               const ParticleSystem<double>& rom_sys, double dt,
                               double reference_seconds, double reduced_seconds) {
  ErrorReport report;
  const Index n_steps = ref.cols();
  const VectorXd mae = mae_trajectory<double>(ref, rom, l);
  report.time.reserve(static_cast<size_t>(n_steps));
  report.mae.reserve(static_cast<size_t>(n_steps));
  report.ae_h.reserve(static_cast<size_t>(n_steps));
  double mae_sum = 0, aeh_sum = 0;
  for (Index s = 0; s < n_steps; ++s) {
    const double h_ref = hamiltonian<double>(ref.col(s), ref_sys);
    const double h_rom = hamiltonian<double>(rom.col(s), rom_sys);
    const double aeh = ae_hamiltonian<double>(h_ref, h_rom);
    report.time.push_back(dt * static_cast<double>(s + 1));
    report.mae.push_back(mae[s]);
    report.ae_h.push_back(aeh);
    mae_sum += mae[s];
    aeh_sum += aeh;
  }
  report.mean_mae = n_steps > 0 ? mae_sum / static_cast<double>(n_steps) : 0;
  report.mean_ae_h = n_steps > 0 ? aeh_sum / static_cast<double>(n_steps) : 0;
  report.reference_seconds = reference_seconds;
  report.reduced_seconds = reduced_seconds;
  if (reference_seconds > 0 && reduced_seconds > 0)
    report.speedup = speedup_factor<double>(reference_seconds, reduced_seconds);
  return report;
}

}  // namespace

TrainingResult run_training_pipeline(const ExperimentConfig& config,
                                     const std::string& out_dir) {
  config.validate();
  TrainingResult result;
  json& timings = result.timings;

  const std::vector<VectorXd> mus = training_parameter_points(config);
  const InitialConditions nominal = generate_initial_conditions(config);
  const TimeGrid<double> grid = config.time_grid();

  auto tic = clock_type::now();
  std::vector<SimulateResult<double>> runs;
  runs.reserve(mus.size());
  double fom_loop_seconds = 0;
  for (const VectorXd& mu : mus) {
    InitialConditions ics = generate_initial_conditions(config, mu);
    PairwiseModel<double> model{ics.sys};
    runs.push_back(fom_simulate<double>(ics.x0, model, grid, config.newton.to_config()));
    if (!runs.back().all_converged())
      throw numerical_error("training trajectory failed to converge");
    fom_loop_seconds += runs.back().loop_seconds;
  }
  timings["stage_fom_seconds"] = seconds_since(tic);
  timings["stage_fom_loop_seconds"] = fom_loop_seconds;

  std::vector<const MatrixXd*> trajectories;
  trajectories.reserve(runs.size());
  for (const auto& r : runs) trajectories.push_back(&r.snapshots.columns);
  result.bundle = assemble_bundle(config, nominal, mus, trajectories, timings);

  for (size_t k = 0; k < runs.size(); ++k)
    result.bundle.training_runs[k]["fom_iterations"] = iteration_stats(runs[k].iterations);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    save_json((fs::path(out_dir) / "resolved_config.json").string(), config.to_json());
    result.bundle.save((fs::path(out_dir) / "bundle").string());
    save_json((fs::path(out_dir) / "timings.json").string(), timings);
  }
  return result;
}

std::vector<QueryResult> run_online_queries(const OfflineBundle& bundle,
                                            const std::string& out_dir) {
  const ExperimentConfig& config = bundle.config;
  const TimeGrid<double> grid = config.time_grid();
  const std::vector<VectorXd> mus = query_parameter_points(config);

  std::vector<QueryResult> results;
  json summary = json::array();
  json timings = json::array();
  double mae_accum = 0, aeh_accum = 0;

  for (size_t q = 0; q < mus.size(); ++q) {
    const VectorXd& mu = mus[q];
    QueryResult qr;
    if (mu.size() == 2) qr.mu = {mu[0], mu[1]};

    const json fingerprint = fom_run_fingerprint(config, mu);
    qr.fingerprint_hash = config_hash(fingerprint);
    if (config.kind != ExperimentKind::single_vortex) {
      for (const std::uint64_t h : bundle.training_hashes)
        if (h == qr.fingerprint_hash)
          throw config_error("query parameter point repeats a training trajectory");
    }

    InitialConditions ics = generate_initial_conditions(config, mu);
    PairwiseModel<double> model{ics.sys};
    const SimulateResult<double> reference =
        fom_simulate<double>(ics.x0, model, grid, config.newton.to_config());
    qr.fom_iterations = reference.iterations;

    SurrogateSourceBasis<double> surrogate = bundle.surrogate;
    qr.rom = ptrom_simulate<double>(bundle.basis, bundle.op, surrogate, ics.sys, grid,
                                    config.rom.to_config());

    const MatrixXd rom_full = reconstruct_full<double>(qr.rom.x_hat, bundle.basis);
    qr.report = build_error_report(reference.snapshots.columns, rom_full,
                                   ics.end_particle_distance, ics.sys, ics.sys, config.dt,
                                   reference.loop_seconds, qr.rom.minimization_seconds);
    mae_accum += qr.report.mean_mae;
    aeh_accum += qr.report.mean_ae_h;

    if (!out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "q_%02u", static_cast<unsigned>(q));
      const fs::path qdir = fs::path(out_dir) / "queries" / name;
      fs::create_directories(qdir);
      write_matrix((qdir / "xhat.ptmx").string(), qr.rom.x_hat, config.dt, grid.t0);
      write_error_report_csv((qdir / "error_report.csv").string(), qr.report);
      json qs;
      qs["query"] = name;
      json mu_list = json::array();
      for (Index i = 0; i < mu.size(); ++i) mu_list.push_back(mu[i]);
      qs["mu"] = mu_list;
      qs["fingerprint_hash"] = qr.fingerprint_hash;
      qs["metrics"] = error_report_summary(qr.report);
      qs["rom_iterations"] = iteration_stats(qr.rom.iterations);
      qs["rom_converged"] = qr.rom.all_converged();
      save_json((qdir / "summary.json").string(), qs);
      summary.push_back(qs);
      json qt;
      qt["query"] = name;
      qt["timing"] = error_report_timings(qr.report);
      timings.push_back(qt);
    }
    results.push_back(std::move(qr));
  }

  if (!out_dir.empty()) {
    json suite;
    suite["queries"] = summary;
    suite["grid_mean_mae"] = mae_accum / static_cast<double>(mus.size());
    suite["grid_mean_ae_h"] = aeh_accum / static_cast<double>(mus.size());
    suite["num_clusters"] = bundle.stats.contains("num_clusters")
                                ? bundle.stats.at("num_clusters")
                                : json(bundle.surrogate.num_clusters());
    save_json((fs::path(out_dir) / "query_summary.json").string(), suite);
    save_json((fs::path(out_dir) / "query_timings.json").string(), timings);
    write_manifest(out_dir);
  }
  return results;
}

namespace {

ExperimentConfig reproductive_config(Index particles, const ReproduceOptions& options) {
  ExperimentConfig config = ExperimentConfig::preset(ExperimentKind::single_vortex, particles);
  const PtromHyperParameters hp =
      ptrom_hyper_parameters(particles, options.bases_case, options.width);
  config.rom.state_modes = hp.state_modes;
  config.rom.criterion_kind = "neighbor";
  config.rom.criterion_value = hp.neighbor_width;
  config.rom.tol = hp.tol;
  config.rom.residual_modes = 0;  // 2M rule
  config.rom.sample_count = 0;    // match residual modes
  if (options.n_steps_override > 0)
    config.t_final = config.dt * static_cast<double>(options.n_steps_override);
  return config;
}

Index probe_leaf_capacity(const InitialConditions& ics, const VectorXd& x0,
                          const ClusterCriterion<double>& criterion, const TimeGrid<double>& grid,
                          const NewtonConfig& newton, Index probe_steps) {
  const TimeGrid<double> probe{grid.dt, std::min(probe_steps, grid.n_steps), grid.t0};
  double best_seconds = 0;
  Index best_cap = 0;
  for (const Index cap : leaf_capacity_candidates(ics.sys.size())) {
    BarnesHutModel<double> model{ics.sys, criterion, cap};
    const SimulateResult<double> run = fom_simulate<double>(x0, model, probe, newton);
    if (best_cap == 0 || run.loop_seconds < best_seconds) {
      best_seconds = run.loop_seconds;
      best_cap = cap;
    }
  }
  return best_cap;
}

}  // namespace

std::vector<MethodSummary> run_reproductive_suite(const ReproduceOptions& options,
                                                  const std::string& out_dir) {
  std::vector<MethodSummary> rows;

  for (const Index n : options.particle_counts) {
    const ExperimentConfig config = reproductive_config(n, options);
    const TimeGrid<double> grid = config.time_grid();
    const InitialConditions ics = generate_initial_conditions(config);
    PairwiseModel<double> model{ics.sys};

    const SimulateResult<double> reference =
        fom_simulate<double>(ics.x0, model, grid, config.newton.to_config());
    if (!reference.all_converged())
      throw numerical_error("reference trajectory failed to converge");
    const MatrixXd& ref = reference.snapshots.columns;
    const double h0 = hamiltonian<double>(ics.x0, ics.sys);

    {
      MethodSummary fom;
      fom.method = "fom";
      fom.particles = n;
      fom.parameters = {{"dt", config.dt}, {"steps", grid.n_steps}};
      double aeh_sum = 0, aeh_final = 0;
      for (Index s = 0; s < ref.cols(); ++s) {
        aeh_final = ae_hamiltonian<double>(h0, hamiltonian<double>(ref.col(s), ics.sys));
        aeh_sum += aeh_final;
      }
      fom.mean_ae_h = aeh_sum / static_cast<double>(ref.cols());
      fom.final_ae_h = aeh_final;
      fom.reference_seconds = reference.loop_seconds;
      fom.method_seconds = reference.loop_seconds;
      fom.speedup = 1.0;
      fom.iterations = reference.iterations;
      fom.converged = reference.all_converged();
      rows.push_back(std::move(fom));
    }

    if (options.run_heun) {
      const SimulateResult<double> heun = heun_simulate<double>(ics.x0, model, grid);
      ErrorReport rep = build_error_report(ref, heun.snapshots.columns,
                                           ics.end_particle_distance, ics.sys, ics.sys,
                                           config.dt, reference.loop_seconds,
                                           heun.loop_seconds);
      MethodSummary row;
      row.method = "heun";
      row.particles = n;
      row.parameters = {{"dt", config.dt}};
      row.mean_mae = rep.mean_mae;
      row.mean_ae_h = rep.mean_ae_h;
      row.final_ae_h = rep.ae_h.back();
      row.reference_seconds = reference.loop_seconds;
      row.method_seconds = heun.loop_seconds;
      row.speedup = rep.speedup;
      rows.push_back(std::move(row));
    }

    if (options.run_barnes_hut) {
      for (const double theta : options.thetas) {
        const auto criterion = ClusterCriterion<double>::barnes_hut(theta);
        const Index cap = probe_leaf_capacity(ics, ics.x0, criterion, grid,
                                              config.newton.to_config(), options.probe_steps);
        BarnesHutModel<double> bh{ics.sys, criterion, cap};
        const SimulateResult<double> run =
            fom_simulate<double>(ics.x0, bh, grid, config.newton.to_config());
        ErrorReport rep = build_error_report(ref, run.snapshots.columns,
                                             ics.end_particle_distance, ics.sys, ics.sys,
                                             config.dt, reference.loop_seconds,
                                             run.loop_seconds);
        MethodSummary row;
        row.method = "barnes_hut";
        row.particles = n;
        row.parameters = {{"theta", theta}, {"leaf_capacity", cap}};
        row.mean_mae = rep.mean_mae;
        row.mean_ae_h = rep.mean_ae_h;
        row.final_ae_h = rep.ae_h.back();
        row.reference_seconds = reference.loop_seconds;
        row.method_seconds = run.loop_seconds;
        row.speedup = rep.speedup;
        row.iterations = run.iterations;
        row.converged = run.all_converged();
        rows.push_back(std::move(row));
      }
    }

    std::vector<const MatrixXd*> trajectories = {&ref};
    const std::vector<VectorXd> mus = {VectorXd()};

    if (options.run_gnat) {
      ExperimentConfig gnat_config = config;
      const GnatHyperParameters hp = gnat_hyper_parameters(n, options.bases_case);
      gnat_config.rom.state_modes = hp.state_modes;
      gnat_config.rom.tol = hp.tol;
      json timings;
      OfflineBundle bundle =
          assemble_bundle(gnat_config, ics, mus, trajectories, timings);
      GnatSolver<double> solver(bundle.basis, bundle.op, ics.sys, gnat_config.dt,
                                gnat_config.rom.to_config(), nullptr);
      RomTrajectory<double> rom = solver.simulate(grid.n_steps);
      const MatrixXd rom_full = reconstruct_full<double>(rom.x_hat, bundle.basis);
      ErrorReport rep = build_error_report(ref, rom_full, ics.end_particle_distance,
                                           ics.sys, ics.sys, config.dt,
                                           reference.loop_seconds, rom.minimization_seconds);
      MethodSummary row;
      row.method = "gnat";
      row.particles = n;
      row.parameters = {{"state_modes", bundle.basis.modes()},
                        {"residual_modes", bundle.residual.modes()},
                        {"samples", bundle.op.sample_ids.size()},
                        {"tol", gnat_config.rom.tol}};
      row.mean_mae = rep.mean_mae;
      row.mean_ae_h = rep.mean_ae_h;
      row.final_ae_h = rep.ae_h.back();
      row.reference_seconds = reference.loop_seconds;
      row.method_seconds = rom.minimization_seconds;
      row.speedup = rep.speedup;
      row.iterations = rom.iterations;
      row.converged = rom.all_converged();
      rows.push_back(std::move(row));
    }

    if (options.run_ptrom) {
      json timings;
      OfflineBundle bundle = assemble_bundle(config, ics, mus, trajectories, timings);
      SurrogateSourceBasis<double> surrogate = bundle.surrogate;
      RomTrajectory<double> rom =
          ptrom_simulate<double>(bundle.basis, bundle.op, surrogate, ics.sys, grid,
                                 config.rom.to_config());
      const MatrixXd rom_full = reconstruct_full<double>(rom.x_hat, bundle.basis);
      ErrorReport rep = build_error_report(ref, rom_full, ics.end_particle_distance,
                                           ics.sys, ics.sys, config.dt,
                                           reference.loop_seconds, rom.minimization_seconds);
      MethodSummary row;
      row.method = "ptrom";
      row.particles = n;
      row.parameters = {{"state_modes", bundle.basis.modes()},
                        {"residual_modes", bundle.residual.modes()},
                        {"samples", bundle.op.sample_ids.size()},
                        {"neighbor_width", config.rom.criterion_value},
                        {"tol", config.rom.tol},
                        {"num_clusters", bundle.surrogate.num_clusters()}};
      row.mean_mae = rep.mean_mae;
      row.mean_ae_h = rep.mean_ae_h;
      row.final_ae_h = rep.ae_h.back();
      row.reference_seconds = reference.loop_seconds;
      row.method_seconds = rom.minimization_seconds;
      row.speedup = rep.speedup;
      row.iterations = rom.iterations;
      row.converged = rom.all_converged();
      rows.push_back(std::move(row));
    }
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json summary = json::array();
    json timings = json::array();
    for (const MethodSummary& row : rows) {
      json r;
      r["method"] = row.method;
      r["particles"] = row.particles;
      r["parameters"] = row.parameters;
      r["mean_mae"] = row.mean_mae;
      r["mean_ae_h"] = row.mean_ae_h;
      r["final_ae_h"] = row.final_ae_h;
      r["iterations"] = iteration_stats(row.iterations);
      r["converged"] = row.converged;
      summary.push_back(r);
      json t;
      t["method"] = row.method;
      t["particles"] = row.particles;
      t["reference_seconds"] = row.reference_seconds;
      t["method_seconds"] = row.method_seconds;
      t["speedup"] = row.speedup;
      timings.push_back(t);
    }
    save_json((fs::path(out_dir) / "reproduce_summary.json").string(), summary);
    save_json((fs::path(out_dir) / "reproduce_timings.json").string(), timings);
    write_manifest(out_dir);
  }
  return rows;
}

ErrorReport certify_reduced_run(const OfflineBundle& bundle, const VectorXd& mu,
                                double kappa_inflation) {
  if (!(kappa_inflation >= 1.0))
    throw config_error("certify_reduced_run: kappa inflation must be >= 1");
  const ExperimentConfig& config = bundle.config;
  const TimeGrid<double> grid = config.time_grid();
  InitialConditions ics = generate_initial_conditions(config, mu);
  PairwiseModel<double> model{ics.sys};

  const SimulateResult<double> reference =
      fom_simulate<double>(ics.x0, model, grid, config.newton.to_config());
  SurrogateSourceBasis<double> surrogate = bundle.surrogate;
  RomTrajectory<double> rom = ptrom_simulate<double>(bundle.basis, bundle.op, surrogate,
                                                     ics.sys, grid, config.rom.to_config());
  const MatrixXd rom_full = reconstruct_full<double>(rom.x_hat, bundle.basis);
  const MatrixXd& ref = reference.snapshots.columns;

  ErrorReport report = build_error_report(ref, rom_full, ics.end_particle_distance, ics.sys,
                                          ics.sys, config.dt, reference.loop_seconds,
                                          rom.minimization_seconds);

  const VectorXd rho = fom_residual_norms<double>(rom_full, ics.x0, model, config.dt);
  const double kappa =
      kappa_inflation * empirical_lipschitz<double>(ref, rom_full, model);
  const VectorXd bound =
      state_error_bound<double>(rho, kappa, config.dt, MultistepCoefficients<double>::trapezoidal());

  report.state_error.resize(static_cast<size_t>(ref.cols()));
  report.error_bound.resize(static_cast<size_t>(ref.cols()));
  for (Index s = 0; s < ref.cols(); ++s) {
    report.state_error[static_cast<size_t>(s)] = (ref.col(s) - rom_full.col(s)).norm();
    report.error_bound[static_cast<size_t>(s)] = bound[s];
  }
  return report;
}

}  // namespace ptrom
