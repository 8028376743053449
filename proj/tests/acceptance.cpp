// End-to-end acceptance checks for the full toolkit.  Each criterion prints
// one [PASS]/[FAIL] line; the exit code is the number of failures.  The
// thresholds live in the constants right below so the gate is explicit.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ptrom/pipeline.hpp"

using namespace ptrom;
namespace fs = std::filesystem;

namespace {

// Criterion thresholds.
constexpr double kPairwiseRelTol = 1e-13;        // 1: velocity vs block matrix
constexpr double kPairwiseBudgetSeconds = 10.0;  // 1: runtime cap
constexpr double kRadiusRelTol = 1e-5;           // 2: co-rotation radius drift
constexpr double kHeunOrderLo = 1.8;             // 2: observed order window
constexpr double kHeunOrderHi = 2.2;
constexpr double kTreeAbsTol = 1e-12;            // 3: tree vs pairwise
constexpr double kEquivalenceTol = 1e-8;         // 4: degenerate ROM agreement
constexpr double kEquivalenceBudgetSeconds = 30.0;
constexpr double kGappyTol = 1e-9;               // 5: reconstruction identity
constexpr double kReproMae = 1e-3;               // 6: 0.1% trajectory deviation
constexpr double kReproAeH = 1e-3;               // 6: 0.1% Hamiltonian deviation
constexpr double kReproBudgetSeconds = 600.0;    // 6: desk runtime cap
constexpr double kPairMae = 5e-4;                // 7: 0.05% grid-averaged
constexpr double kPairAeH = 5e-5;                // 7: 0.005% grid-averaged
constexpr Index kPairClustersLo = 187;           // 7: cluster count window
constexpr Index kPairClustersHi = 279;
constexpr double kPerTargetGrowthCap = 4.0;      // 8: sub-linear eval growth

struct CriterionResult {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Cloud {
  VectorXd x0;
  ParticleSystem<double> sys;
};

Cloud random_cloud(Eigen::Index n, std::mt19937_64& rng, double box, double delta) {
  std::uniform_real_distribution<double> upos(-box, box);
  std::uniform_real_distribution<double> ug(0.5, 1.5);
  Cloud c;
  c.x0.resize(2 * n);
  c.sys.circulation.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c.x0[i] = upos(rng);
    c.x0[i + n] = upos(rng);
    c.sys.circulation[i] = ug(rng);
  }
  c.sys.delta = delta;
  return c;
}

// Velocity through an explicitly assembled 2N x 2N interaction matrix acting
// on the stacked circulations; an independent route to the same field.
VectorXd block_matrix_velocity(const VectorXd& state, const ParticleSystem<double>& sys) {
  const Eigen::Index n = sys.size();
  MatrixXd k = MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double rx = state[i] - state[j];
      const double ry = state[i + n] - state[j + n];
      const double den = rx * rx + ry * ry + sys.delta;
      k(i, j) = -ry / den;
      k(i + n, j + n) = rx / den;
    }
  }
  VectorXd g(2 * n);
  g.head(n) = sys.circulation / (2.0 * EIGEN_PI);
  g.tail(n) = g.head(n);
  return k * g;
}

PODBasis<double> identity_basis(const VectorXd& x_ref) {
  PODBasis<double> b;
  b.phi = MatrixXd::Identity(x_ref.size(), x_ref.size());
  b.singular_values = VectorXd::Ones(x_ref.size());
  b.x_ref = x_ref;
  return b;
}

MatrixXd thin_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd raw(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) raw(r, c) = u(rng);
  Eigen::HouseholderQR<MatrixXd> qr(raw);
  return qr.householderQ() * MatrixXd::Identity(rows, cols);
}

// ---------------------------------------------------------------------------

CriterionResult criterion1() {
  CriterionResult r{1, "pairwise velocity matches block-matrix assembly"};
  Timer timer;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> usize(2, 50);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = usize(rng);
    const Cloud c = random_cloud(n, rng, 5.0, 0.05);
    const VectorXd lib = pairwise_velocity<double>(c.x0, c.sys);
    const VectorXd blk = block_matrix_velocity(c.x0, c.sys);
    worst = std::max(worst, (lib - blk).norm() / blk.norm());
  }
  r.seconds = timer.seconds();
  r.pass = worst <= kPairwiseRelTol && r.seconds < kPairwiseBudgetSeconds;
  r.detail = "max relative difference " + num(worst) + " over 100 systems in " +
             num(r.seconds) + " s";
  return r;
}

CriterionResult criterion2() {
  CriterionResult r{2, "co-rotation radius and Heun order"};
  Timer timer;
  // Equal vortices at (-1, 0) and (1, 0): rigid rotation about the origin.
  const double gamma = 2.0 * EIGEN_PI, d = 2.0;
  const double omega = gamma / (EIGEN_PI * d * d);
  const double dt = 1e-3 * (EIGEN_PI * d * d) / gamma;
  const double period = 2.0 * EIGEN_PI / omega;
  const auto revolution_steps = static_cast<Index>(std::llround(period / dt));

  Cloud pair;
  pair.x0.resize(4);
  pair.x0 << -1.0, 1.0, 0.0, 0.0;
  pair.sys.circulation = VectorXd::Constant(2, gamma);
  pair.sys.delta = 0.0;
  PairwiseModel<double> model{pair.sys};
  NewtonConfig ncfg;
  ncfg.tol = 1e-12;

  const SimulateResult<double> run =
      fom_simulate<double>(pair.x0, model, {dt, revolution_steps}, ncfg);
  double radius_drift = 0;
  for (Index s = 0; s < revolution_steps; ++s) {
    const VectorXd x = run.snapshots.columns.col(s);
    const Vector2d center(0.5 * (x[0] + x[1]), 0.5 * (x[2] + x[3]));
    const double radius = (Vector2d(x[0], x[2]) - center).norm();
    radius_drift = std::max(radius_drift, std::abs(radius - d / 2.0) / (d / 2.0));
  }

  // Observed Heun order from halving dt against the analytic rotation.
  auto heun_error = [&](double step) {
    const auto n_steps = static_cast<Index>(std::llround(2.0 / step));
    const SimulateResult<double> h = heun_simulate<double>(pair.x0, model, {step, n_steps});
    const double t_end = step * static_cast<double>(n_steps);
    const double a = omega * t_end;
    VectorXd exact(4);
    exact << -std::cos(a), std::cos(a), -std::sin(a), std::sin(a);
    return (h.snapshots.columns.col(n_steps - 1) - exact).norm();
  };
  const double e1 = heun_error(dt);
  const double e2 = heun_error(dt / 2.0);
  const double order = std::log2(e1 / e2);

  r.seconds = timer.seconds();
  r.pass = run.all_converged() && radius_drift <= kRadiusRelTol && order >= kHeunOrderLo &&
           order <= kHeunOrderHi;
  r.detail = "radius drift " + num(radius_drift) + " over " +
             std::to_string(revolution_steps) + " steps, Heun order " + num(order);
  return r;
}

CriterionResult criterion3() {
  CriterionResult r{3, "exact tree traversals match pairwise velocity"};
  Timer timer;
  std::mt19937_64 rng(3001);
  double worst_bh = 0, worst_nb = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const Cloud c = random_cloud(1000, rng, 50.0, 0.1);
    const VectorXd exact = pairwise_velocity<double>(c.x0, c.sys);
    const QuadTree<double> tree =
        build_tree<double>(state_to_points<double>(c.x0), c.sys.circulation, 8);
    const VectorXd bh =
        bh_velocity<double>(tree, c.x0, c.sys, ClusterCriterion<double>::barnes_hut(0.0));
    const VectorXd nb =
        bh_velocity<double>(tree, c.x0, c.sys, ClusterCriterion<double>::neighbor(1e9));
    worst_bh = std::max(worst_bh, (bh - exact).cwiseAbs().maxCoeff());
    worst_nb = std::max(worst_nb, (nb - exact).cwiseAbs().maxCoeff());
  }
  r.seconds = timer.seconds();
  r.pass = worst_bh <= kTreeAbsTol && worst_nb <= kTreeAbsTol;
  r.detail = "theta=0 difference " + num(worst_bh) + ", covering-neighborhood difference " +
             num(worst_nb);
  return r;
}

CriterionResult criterion4() {
  CriterionResult r{4, "degenerate reduced solvers reproduce their parents"};
  const Eigen::Index n = 16, n_steps = 30;
  const double dt = 1e-3;
  std::mt19937_64 rng(4001);
  const Cloud cloud = random_cloud(n, rng, 1.0, 0.05);
  PairwiseModel<double> model{cloud.sys};

  // (a) identity-basis LSPG against the implicit full-order march.
  Timer timer_a;
  NewtonConfig ncfg;
  ncfg.tol = 1e-12;
  const SimulateResult<double> fom = fom_simulate<double>(cloud.x0, model, {dt, n_steps}, ncfg);
  RomConfig rcfg;
  rcfg.tol = 1e-12;
  LspgSolver<double> lspg_id(identity_basis(cloud.x0), cloud.sys, dt, rcfg);
  const LspgResult<double> lspg_run = lspg_id.simulate(n_steps, false);
  const double diff_a = (reconstruct_full<double>(lspg_run.trajectory.x_hat,
                                                  identity_basis(cloud.x0)) -
                         fom.snapshots.columns)
                            .cwiseAbs()
                            .maxCoeff();
  const double sec_a = timer_a.seconds();

  // (b) full sampling with the identity residual basis against LSPG on the
  // same reduced basis.
  Timer timer_b;
  const PODBasis<double> basis = build_pod<double>(fom.snapshots.columns, 8, cloud.x0);
  RomConfig rcfg_b;
  rcfg_b.tol = 1e-10;
  LspgSolver<double> lspg(basis, cloud.sys, dt, rcfg_b);
  const LspgResult<double> lspg_ref = lspg.simulate(n_steps, false);
  std::vector<Index> everyone(n);
  std::iota(everyone.begin(), everyone.end(), Index(0));
  const GnatOperator<double> full_op =
      build_gnat_operator<double>(MatrixXd::Identity(2 * n, 2 * n), everyone);
  GnatSolver<double> gnat(basis, full_op, cloud.sys, dt, rcfg_b);
  const RomTrajectory<double> gnat_run = gnat.simulate(n_steps);
  const double diff_b = (reconstruct_full<double>(gnat_run.x_hat, basis) -
                         reconstruct_full<double>(lspg_ref.trajectory.x_hat, basis))
                            .cwiseAbs()
                            .maxCoeff();
  const double sec_b = timer_b.seconds();

  // (c) cluster-free surrogate against the plain gappy baseline.
  Timer timer_c;
  const std::vector<Index> samples = {0, 1, 3, 5, 6, 8, 10, 11, 13, 15};
  const MatrixXd phi_r = thin_orthonormal(2 * n, 16, rng);
  const GnatOperator<double> op = build_gnat_operator<double>(phi_r, samples);
  GnatSolver<double> baseline(basis, op, cloud.sys, dt, rcfg_b);
  const RomTrajectory<double> base_run = baseline.simulate(n_steps);
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, samples, ClusterCriterion<double>::neighbor(1e9), 1);
  GnatSolver<double> hyper(basis, op, cloud.sys, dt, rcfg_b, &sur);
  const RomTrajectory<double> hyper_run = hyper.simulate(n_steps);
  const double diff_c = (reconstruct_full<double>(hyper_run.x_hat, basis) -
                         reconstruct_full<double>(base_run.x_hat, basis))
                            .cwiseAbs()
                            .maxCoeff();
  const double sec_c = timer_c.seconds();

  r.seconds = sec_a + sec_b + sec_c;
  r.pass = diff_a <= kEquivalenceTol && diff_b <= kEquivalenceTol && diff_c <= kEquivalenceTol &&
           sec_a < kEquivalenceBudgetSeconds && sec_b < kEquivalenceBudgetSeconds &&
           sec_c < kEquivalenceBudgetSeconds;
  r.detail = "lspg/fom " + num(diff_a) + ", gnat/lspg " + num(diff_b) + ", surrogate/gappy " +
             num(diff_c);
  return r;
}

CriterionResult criterion5() {
  CriterionResult r{5, "gappy reconstruction is exact on the residual span"};
  Timer timer;
  std::mt19937_64 rng(5001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 20, m_r = 8, s = 6;
    const MatrixXd phi_r = thin_orthonormal(2 * n, m_r, rng);
    std::vector<Index> pool(n);
    std::iota(pool.begin(), pool.end(), Index(0));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<Index> ids(pool.begin(), pool.begin() + s);
    std::sort(ids.begin(), ids.end());
    const GnatOperator<double> op = build_gnat_operator<double>(phi_r, ids);

    VectorXd coeff(m_r);
    for (Eigen::Index k = 0; k < m_r; ++k) coeff[k] = u(rng);
    const VectorXd res = phi_r * coeff;
    VectorXd sampled(op.n_sampled_dofs());
    for (Eigen::Index k = 0; k < op.n_sampled_dofs(); ++k)
      sampled[k] = res[op.sampled_dofs[static_cast<size_t>(k)]];
    const VectorXd rebuilt = phi_r * (op.A * sampled);
    worst = std::max(worst, (rebuilt - res).cwiseAbs().maxCoeff());
  }
  r.seconds = timer.seconds();
  r.pass = worst <= kGappyTol;
  r.detail = "max reconstruction defect " + num(worst) + " over 100 cases";
  return r;
}

// Criteria 6 and 8 share the published single-vortex runs so the expensive
// full-order references are computed once per particle count.
struct ReproductiveRuns {
  std::vector<MethodSummary> rows;
  double n100_seconds = 0;
  bool ok = false;
  std::string error;
};

ReproductiveRuns shared_reproductive_runs() {
  ReproductiveRuns out;
  try {
    ReproduceOptions base;
    base.bases_case = 1;
    base.width = NeighborhoodWidth::narrow;
    base.run_ptrom = true;

    Timer t100;
    ReproduceOptions first = base;
    first.particle_counts = {100};
    auto rows100 = run_reproductive_suite(first);
    out.n100_seconds = t100.seconds();

    ReproduceOptions rest = base;
    rest.particle_counts = {500, 1000};
    auto more = run_reproductive_suite(rest);

    out.rows = std::move(rows100);
    out.rows.insert(out.rows.end(), more.begin(), more.end());
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

const MethodSummary* find_row(const std::vector<MethodSummary>& rows, const std::string& method,
                              Index particles) {
  for (const MethodSummary& row : rows)
    if (row.method == method && row.particles == particles) return &row;
  return nullptr;
}

CriterionResult criterion6(const ReproductiveRuns& runs) {
  CriterionResult r{6, "reproductive accuracy at the smallest published case"};
  r.seconds = runs.n100_seconds;
  if (!runs.ok) {
    r.detail = "shared runs failed: " + runs.error;
    return r;
  }
  const MethodSummary* ptrom = find_row(runs.rows, "ptrom", 100);
  if (!ptrom) {
    r.detail = "no reduced run recorded";
    return r;
  }
  r.pass = ptrom->mean_mae < kReproMae && ptrom->mean_ae_h < kReproAeH &&
           runs.n100_seconds < kReproBudgetSeconds;
  r.detail = "mean trajectory deviation " + num(ptrom->mean_mae) + ", mean energy deviation " +
             num(ptrom->mean_ae_h) + ", runtime " + num(runs.n100_seconds) + " s";
  return r;
}

// Criterion 7 publishes its artifacts for the determinism check.
struct PairStudy {
  double grid_mae = 0;
  double grid_ae_h = 0;
  Index clusters = 0;
  bool ok = false;
  std::string error;
  ExperimentConfig config;
};

PairStudy run_pair_study(const std::string& out_dir) {
  PairStudy out;
  try {
    out.config = ExperimentConfig::preset(ExperimentKind::vortex_pair, 500);
    const TrainingResult trained = run_training_pipeline(out.config, out_dir);
    const auto queries = run_online_queries(trained.bundle, out_dir + "/online");
    for (const QueryResult& q : queries) {
      out.grid_mae += q.report.mean_mae / static_cast<double>(queries.size());
      out.grid_ae_h += q.report.mean_ae_h / static_cast<double>(queries.size());
    }
    out.clusters = trained.bundle.surrogate.num_clusters();
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

CriterionResult criterion7(const PairStudy& study, double seconds) {
  CriterionResult r{7, "parametric vortex-pair study at desk scale"};
  r.seconds = seconds;
  if (!study.ok) {
    r.detail = "study failed: " + study.error;
    return r;
  }
  r.pass = study.grid_mae <= kPairMae && study.grid_ae_h <= kPairAeH &&
           study.clusters >= kPairClustersLo && study.clusters <= kPairClustersHi;
  r.detail = "grid deviation " + num(study.grid_mae) + ", grid energy deviation " +
             num(study.grid_ae_h) + ", " + std::to_string(study.clusters) + " clusters";
  return r;
}

CriterionResult criterion8(const ReproductiveRuns& runs) {
  CriterionResult r{8, "speed-up grows with N at N-independent evaluation cost"};
  Timer timer;
  if (!runs.ok) {
    r.detail = "shared runs failed: " + runs.error;
    return r;
  }
  const MethodSummary* p100 = find_row(runs.rows, "ptrom", 100);
  const MethodSummary* p500 = find_row(runs.rows, "ptrom", 500);
  const MethodSummary* p1000 = find_row(runs.rows, "ptrom", 1000);
  if (!p100 || !p500 || !p1000) {
    r.detail = "missing reduced rows";
    return r;
  }

  // Kernel-evaluation accounting on short-horizon bundles: the count per
  // Gauss-Newton evaluation is a fixed property of the surrogate, and its
  // per-target size must stay flat as N grows.  The horizon is 300 steps, so
  // the mode budget is pinned to what those snapshots can support instead of
  // the published per-N values; the identity under test does not depend on it.
  bool counter_exact = true;
  std::vector<double> per_target;
  try {
    for (const Index n : {Index(100), Index(500), Index(1000)}) {
      ExperimentConfig cfg = ExperimentConfig::preset(ExperimentKind::single_vortex, n);
      cfg.t_final = cfg.dt * 300.0;
      cfg.rom.state_modes = 8;
      cfg.rom.residual_modes = 0;
      cfg.rom.sample_count = 0;
      const TrainingResult trained = run_training_pipeline(cfg);
      const OfflineBundle& b = trained.bundle;

      size_t per_eval = 0;
      for (size_t t = 0; t < b.surrogate.target_ids.size(); ++t)
        per_eval += b.surrogate.per_target_clusters[t].size() +
                    b.surrogate.per_target_direct[t].size();

      InitialConditions ics = generate_initial_conditions(cfg);
      SurrogateSourceBasis<double> sur = b.surrogate;
      reset_kernel_eval_count();
      const RomTrajectory<double> rom = ptrom_simulate<double>(
          b.basis, b.op, sur, ics.sys, {cfg.dt, 50}, cfg.rom.to_config());
      const std::uint64_t counted = kernel_eval_count();
      const auto evals =
          std::accumulate(rom.iterations.begin(), rom.iterations.end(), std::uint64_t(0)) +
          1;  // history seed evaluation before the march
      if (counted != evals * per_eval) counter_exact = false;
      per_target.push_back(static_cast<double>(per_eval) /
                           static_cast<double>(b.surrogate.target_ids.size()));
    }
  } catch (const std::exception& e) {
    r.detail = std::string("counter study failed: ") + e.what();
    return r;
  }
  const double growth = per_target.back() / per_target.front();

  r.seconds = timer.seconds();
  r.pass = p500->speedup > 1.0 && p1000->speedup > p500->speedup &&
           p500->speedup > p100->speedup && counter_exact && growth < kPerTargetGrowthCap;
  r.detail = "speedups " + num(p100->speedup) + " / " + num(p500->speedup) + " / " +
             num(p1000->speedup) + ", per-target sources " + num(per_target[0]) + " -> " +
             num(per_target.back()) + (counter_exact ? ", counter exact" : ", counter mismatch");
  return r;
}

CriterionResult criterion9() {
  CriterionResult r{9, "certified bound dominates the measured error"};
  Timer timer;
  try {
    const ExperimentConfig cfg = ExperimentConfig::preset(ExperimentKind::single_vortex, 100);
    const TrainingResult trained = run_training_pipeline(cfg);
    const ErrorReport report = certify_reduced_run(trained.bundle, VectorXd());
    bool dominated = !report.state_error.empty() &&
                     report.state_error.size() == report.error_bound.size();
    double worst_margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < report.state_error.size(); ++k) {
      if (report.error_bound[k] < report.state_error[k]) dominated = false;
      if (report.state_error[k] > 0)
        worst_margin = std::min(worst_margin, report.error_bound[k] / report.state_error[k]);
    }
    r.pass = dominated;
    r.detail = "bound to error ratio >= " + num(worst_margin) + " across " +
               std::to_string(report.state_error.size()) + " steps";
  } catch (const std::exception& e) {
    r.detail = std::string("certification failed: ") + e.what();
  }
  r.seconds = timer.seconds();
  return r;
}

CriterionResult criterion10(const fs::path& run_a, const PairStudy& first) {
  CriterionResult r{10, "identical seeds give byte-identical artifacts"};
  Timer timer;
  if (!first.ok) {
    r.detail = "first study failed, nothing to compare";
    return r;
  }
  const fs::path run_b = run_a.parent_path() / "pair_b";
  fs::remove_all(run_b);
  fs::create_directories(run_b);
  const PairStudy second = run_pair_study(run_b.string());
  if (!second.ok) {
    r.detail = "second study failed: " + second.error;
    return r;
  }

  // Wall-clock artifacts legitimately differ; everything else must not.
  const std::set<std::string> skip = {"timings.json", "query_timings.json", "manifest.json"};
  auto gather = [&](const fs::path& root) {
    std::set<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
      if (entry.is_regular_file() && !skip.count(entry.path().filename().string()))
        files.insert(fs::relative(entry.path(), root));
    return files;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };

  const auto files_a = gather(run_a);
  const auto files_b = gather(run_b);
  size_t mismatched = 0;
  std::string first_bad;
  if (files_a != files_b) {
    r.detail = "artifact sets differ between runs";
    r.seconds = timer.seconds();
    return r;
  }
  for (const fs::path& rel : files_a) {
    if (slurp(run_a / rel) != slurp(run_b / rel)) {
      ++mismatched;
      if (first_bad.empty()) first_bad = rel.string();
    }
  }
  r.seconds = timer.seconds();
  r.pass = mismatched == 0;
  r.detail = mismatched == 0
                 ? std::to_string(files_a.size()) + " artifacts byte-identical"
                 : std::to_string(mismatched) + " artifacts differ, first: " + first_bad;
  return r;
}

void report(const CriterionResult& r) {
  std::printf("[%s] criterion %d: %s (%.1f s) | %s\n", r.pass ? "PASS" : "FAIL", r.id,
              r.name.c_str(), r.seconds, r.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  std::vector<CriterionResult> results;
  std::printf("acceptance gate: 10 criteria\n");

  results.push_back(criterion1());
  report(results.back());
  results.push_back(criterion2());
  report(results.back());
  results.push_back(criterion3());
  report(results.back());
  results.push_back(criterion4());
  report(results.back());
  results.push_back(criterion5());
  report(results.back());

  const ReproductiveRuns shared = shared_reproductive_runs();
  results.push_back(criterion6(shared));
  report(results.back());

  const fs::path run_a = fs::temp_directory_path() / "ptrom_acceptance" / "pair_a";
  fs::remove_all(run_a.parent_path());
  fs::create_directories(run_a);
  Timer pair_timer;
  const PairStudy study = run_pair_study(run_a.string());
  results.push_back(criterion7(study, pair_timer.seconds()));
  report(results.back());

  results.push_back(criterion8(shared));
  report(results.back());
  results.push_back(criterion9());
  report(results.back());
  results.push_back(criterion10(run_a, study));
  report(results.back());

  int failures = 0;
  for (const CriterionResult& r : results)
    if (!r.pass) ++failures;
  std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
  return failures;
}
