#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ptrom/rom.hpp"

using namespace ptrom;

namespace {

struct Cloud {
  VectorXd x0;
  ParticleSystem<double> sys;
};

Cloud random_cloud(Eigen::Index n, unsigned seed, double delta = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upos(-1.0, 1.0);
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

PODBasis<double> identity_basis(const VectorXd& x_ref) {
  PODBasis<double> b;
  b.phi = MatrixXd::Identity(x_ref.size(), x_ref.size());
  b.singular_values = VectorXd::Ones(x_ref.size());
  b.x_ref = x_ref;
  return b;
}

std::vector<Index> all_particles(Eigen::Index n) {
  std::vector<Index> ids(n);
  std::iota(ids.begin(), ids.end(), Index(0));
  return ids;
}

MatrixXd thin_orthonormal(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd raw(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) raw(r, c) = u(rng);
  Eigen::HouseholderQR<MatrixXd> qr(raw);
  return qr.householderQ() * MatrixXd::Identity(rows, cols);
}

// Reduced basis from an actual full-order run, the shape every reduced test
// below starts from.
PODBasis<double> trained_basis(const Cloud& cloud, double dt, Index n_steps, Index modes) {
  PairwiseModel<double> model{cloud.sys};
  const SimulateResult<double> fom =
      fom_simulate<double>(cloud.x0, model, {dt, n_steps}, NewtonConfig{});
  REQUIRE(fom.all_converged());
  return build_pod<double>(fom.snapshots.columns, modes, cloud.x0);
}

}  // namespace

TEST_CASE("reconstruct_output and reconstruct_full apply the affine map") {
  const Eigen::Index dim = 8, m = 3;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PODBasis<double> basis;
  basis.phi.resize(dim, m);
  basis.x_ref.resize(dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    basis.x_ref[r] = u(rng);
    for (Eigen::Index c = 0; c < m; ++c) basis.phi(r, c) = u(rng);
  }
  basis.singular_values = VectorXd::Ones(m);
  MatrixXd x_hat(m, 4);
  for (Eigen::Index c = 0; c < 4; ++c)
    for (Eigen::Index r = 0; r < m; ++r) x_hat(r, c) = u(rng);

  const MatrixXd full = reconstruct_full<double>(x_hat, basis);
  CHECK(full.rows() == dim);
  CHECK(full.cols() == 4);
  for (Eigen::Index c = 0; c < 4; ++c)
    CHECK((full.col(c) - (basis.x_ref + basis.phi * x_hat.col(c))).norm() == 0.0);

  const std::vector<Index> dofs = {5, 0, 7};
  const MatrixXd rows = reconstruct_output<double>(x_hat, basis, dofs);
  CHECK(rows.rows() == 3);
  for (size_t k = 0; k < dofs.size(); ++k)
    CHECK((rows.row(static_cast<Index>(k)) - full.row(dofs[k])).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(reconstruct_output<double>(x_hat, basis, {dim}), config_error);
  CHECK_THROWS_AS(reconstruct_output<double>(MatrixXd::Zero(m + 1, 2), basis, {0}), config_error);
  CHECK_THROWS_AS(reconstruct_full<double>(MatrixXd::Zero(m + 1, 2), basis), config_error);
}

TEST_CASE("rom config validation") {
  RomConfig bad_tol;
  bad_tol.tol = 0.0;
  CHECK_THROWS_AS(bad_tol.validate(), config_error);
  RomConfig bad_iters;
  bad_iters.max_iters = 0;
  CHECK_THROWS_AS(bad_iters.validate(), config_error);
  RomConfig bad_step;
  bad_step.step_length = -0.5;
  CHECK_THROWS_AS(bad_step.validate(), config_error);
  CHECK_NOTHROW(RomConfig{}.validate());
}

TEST_CASE("lspg with the identity basis reproduces the implicit full-order march") {
  const Eigen::Index n = 12, n_steps = 25;
  const double dt = 1e-3;
  const Cloud cloud = random_cloud(n, 17);

  PairwiseModel<double> model{cloud.sys};
  NewtonConfig ncfg;
  ncfg.tol = 1e-12;
  const SimulateResult<double> fom = fom_simulate<double>(cloud.x0, model, {dt, n_steps}, ncfg);
  REQUIRE(fom.all_converged());

  RomConfig rcfg;
  rcfg.tol = 1e-12;
  LspgSolver<double> lspg(identity_basis(cloud.x0), cloud.sys, dt, rcfg);
  const LspgResult<double> rom = lspg.simulate(n_steps, false);
  REQUIRE(rom.trajectory.all_converged());

  const MatrixXd rebuilt = reconstruct_full<double>(rom.trajectory.x_hat, identity_basis(cloud.x0));
  CHECK((rebuilt - fom.snapshots.columns).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("gnat with full sampling and identity residual basis matches lspg") {
  const Eigen::Index n = 10, n_steps = 20;
  const double dt = 1e-3;
  const Cloud cloud = random_cloud(n, 27);
  const PODBasis<double> basis = trained_basis(cloud, dt, 40, 6);

  RomConfig rcfg;
  rcfg.tol = 1e-10;
  LspgSolver<double> lspg(basis, cloud.sys, dt, rcfg);
  const LspgResult<double> ref = lspg.simulate(n_steps, false);

  const GnatOperator<double> op =
      build_gnat_operator<double>(MatrixXd::Identity(2 * n, 2 * n), all_particles(n));
  GnatSolver<double> gnat(basis, op, cloud.sys, dt, rcfg);
  const RomTrajectory<double> got = gnat.simulate(n_steps);

  CHECK((got.x_hat - ref.trajectory.x_hat).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(got.iterations == ref.trajectory.iterations);
}

TEST_CASE("all-direct surrogate reproduces the gappy baseline exactly") {
  const Eigen::Index n = 14, n_steps = 20;
  const double dt = 1e-3;
  const Cloud cloud = random_cloud(n, 37);
  const PODBasis<double> basis = trained_basis(cloud, dt, 40, 8);

  const std::vector<Index> samples = {0, 2, 3, 5, 6, 8, 9, 11, 12, 13};
  const MatrixXd phi_r = thin_orthonormal(2 * n, 16, 38);
  const GnatOperator<double> op = build_gnat_operator<double>(phi_r, samples);

  RomConfig rcfg;
  rcfg.tol = 1e-8;
  GnatSolver<double> baseline(basis, op, cloud.sys, dt, rcfg);
  const RomTrajectory<double> ref = baseline.simulate(n_steps);

  // A wide-open neighbor criterion leaves no clusters, only near fields.
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, samples, ClusterCriterion<double>::neighbor(1e9), 1);
  REQUIRE(sur.num_clusters() == 0);
  REQUIRE(sur.num_direct() == n);
  GnatSolver<double> hyper(basis, op, cloud.sys, dt, rcfg, &sur);
  const RomTrajectory<double> got = hyper.simulate(n_steps);

  CHECK((got.x_hat - ref.x_hat).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(got.iterations == ref.iterations);
}

TEST_CASE("hyperpair places sources from the surrogate tables") {
  const Eigen::Index n = 16;
  const Cloud cloud = random_cloud(n, 47);
  const PODBasis<double> basis = trained_basis(cloud, 1e-3, 32, 6);
  const std::vector<Index> targets = {1, 4, 10};
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, targets, ClusterCriterion<double>::neighbor(0.5), 1);
  REQUIRE(sur.num_clusters() > 0);

  std::mt19937_64 rng(48);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  VectorXd x_hat(basis.modes());
  for (Eigen::Index k = 0; k < basis.modes(); ++k) x_hat[k] = u(rng);

  const Eigen::Index nt = static_cast<Eigen::Index>(targets.size());
  VectorXd target_pos(2 * nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Index p = targets[t];
    target_pos[t] = basis.x_ref[p] + basis.phi.row(p) * x_hat;
    target_pos[t + nt] = basis.x_ref[p + n] + basis.phi.row(p + n) * x_hat;
  }

  const HyperpairResult<double> hp = hyperpair<double>(sur, target_pos, x_hat, cloud.sys);

  // Manual recomputation straight off the tables.
  const Eigen::Index n_c = sur.num_clusters();
  const Eigen::Index u_count = sur.num_direct();
  const VectorXd cpos = sur.x0_tilde + sur.phi_tilde * x_hat;
  const VectorXd dpos = sur.direct_x0 + sur.direct_phi * x_hat;
  CHECK((hp.cluster_positions - cpos).cwiseAbs().maxCoeff() == 0.0);
  CHECK((hp.direct_positions - dpos).cwiseAbs().maxCoeff() == 0.0);

  for (Eigen::Index t = 0; t < nt; ++t) {
    const Vector2d pos(target_pos[t], target_pos[t + nt]);
    Vector2d v = Vector2d::Zero();
    for (const Index c : sur.per_target_clusters[t]) {
      const Vector2d src(cpos[c], cpos[c + n_c]);
      v += kernel_pair<double>(pos, src, sur.gamma_tilde[c], cloud.sys.delta,
                               cloud.sys.kernel_form);
    }
    for (const Index k : sur.per_target_direct[t]) {
      const Vector2d src(dpos[k], dpos[k + u_count]);
      v += kernel_pair<double>(pos, src, sur.direct_gamma[k], cloud.sys.delta,
                               cloud.sys.kernel_form);
    }
    CHECK(std::abs(hp.f[t] - v[0]) < 1e-14);
    CHECK(std::abs(hp.f[t + nt] - v[1]) < 1e-14);
  }

  VectorXd short_pos(2 * nt - 1);
  short_pos.setZero();
  CHECK_THROWS_AS(hyperpair<double>(sur, short_pos, x_hat, cloud.sys), config_error);
}

TEST_CASE("hyperpair skips the target itself and reduces to pairwise when all-direct") {
  const Eigen::Index n = 9;
  Cloud cloud = random_cloud(n, 57, 0.0);  // no regularization: coincidence would throw
  const PODBasis<double> basis = identity_basis(cloud.x0);
  const std::vector<Index> targets = all_particles(n);
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, targets, ClusterCriterion<double>::neighbor(1e9), 1);

  VectorXd x_hat = VectorXd::Zero(2 * n);
  const HyperpairResult<double> hp = hyperpair<double>(sur, cloud.x0, x_hat, cloud.sys);
  const VectorXd exact = pairwise_velocity<double>(cloud.x0, cloud.sys);
  CHECK((hp.f - exact).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("hyperpair drops a cluster sitting exactly on its target") {
  // Uniformly spaced particles breed clusters whose centroid lands exactly on
  // a target between the members; at zero regularization the kernel there is
  // an exact cancellation, not a singularity.
  const Eigen::Index m = 3;
  SurrogateSourceBasis<double> sur;
  sur.target_ids = {0};
  sur.gamma_tilde = VectorXd::Constant(1, 0.7);
  sur.x0_tilde.resize(2);
  sur.x0_tilde << 1.0, 2.0;  // coincides with the target below
  sur.phi_tilde = MatrixXd::Zero(2, m);
  sur.per_target_clusters = {{0}};
  sur.direct_ids = {1};
  sur.direct_gamma = VectorXd::Constant(1, 0.5);
  sur.direct_x0.resize(2);
  sur.direct_x0 << 3.0, 2.0;
  sur.direct_phi = MatrixXd::Zero(2, m);
  sur.per_target_direct = {{0}};

  ParticleSystem<double> sys;
  sys.circulation = VectorXd::Ones(2);
  sys.delta = 0.0;

  VectorXd pos(2);
  pos << 1.0, 2.0;
  const VectorXd x_hat = VectorXd::Zero(m);

  const HyperpairResult<double> hp = hyperpair<double>(sur, pos, x_hat, sys);
  const Vector2<double> direct_only =
      kernel_pair<double>({1.0, 2.0}, {3.0, 2.0}, 0.5, 0.0, sys.kernel_form);
  CHECK(hp.f[0] == direct_only[0]);
  CHECK(hp.f[1] == direct_only[1]);

  // With regularization the cluster is kept; its velocity at zero separation
  // is zero, so f is unchanged while the evaluation stays finite.
  sys.delta = 0.3;
  const HyperpairResult<double> hp_reg = hyperpair<double>(sur, pos, x_hat, sys);
  const Vector2<double> direct_reg =
      kernel_pair<double>({1.0, 2.0}, {3.0, 2.0}, 0.5, 0.3, sys.kernel_form);
  CHECK(hp_reg.f[0] == doctest::Approx(direct_reg[0]).epsilon(1e-15));
  CHECK(hp_reg.f[1] == doctest::Approx(direct_reg[1]).epsilon(1e-15));

  // A coincident direct source is a real particle collision and still throws.
  sys.delta = 0.0;
  SurrogateSourceBasis<double> collide = sur;
  collide.direct_x0 = pos;
  CHECK_THROWS_AS(hyperpair<double>(collide, pos, x_hat, sys), numerical_error);
}

TEST_CASE("hyperpair adds inflow at the target ids") {
  const Eigen::Index n = 6;
  Cloud cloud = random_cloud(n, 67);
  VectorXd inflow(2 * n);
  for (Eigen::Index k = 0; k < 2 * n; ++k) inflow[k] = 0.01 * double(k + 1);
  cloud.sys.inflow = inflow;

  const PODBasis<double> basis = identity_basis(cloud.x0);
  const std::vector<Index> targets = {2, 5};
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, targets, ClusterCriterion<double>::neighbor(1e9), 1);

  VectorXd target_pos(4);
  target_pos << cloud.x0[2], cloud.x0[5], cloud.x0[2 + n], cloud.x0[5 + n];
  const HyperpairResult<double> hp =
      hyperpair<double>(sur, target_pos, VectorXd::Zero(2 * n), cloud.sys);
  const VectorXd exact = pairwise_velocity<double>(cloud.x0, cloud.sys);
  CHECK(hp.f[0] == doctest::Approx(exact[2]).epsilon(1e-14));
  CHECK(hp.f[1] == doctest::Approx(exact[5]).epsilon(1e-14));
  CHECK(hp.f[2] == doctest::Approx(exact[2 + n]).epsilon(1e-14));
  CHECK(hp.f[3] == doctest::Approx(exact[5 + n]).epsilon(1e-14));
}

TEST_CASE("zero circulation converges in one evaluation with a zero update") {
  const Eigen::Index n = 5, n_steps = 8;
  Cloud cloud = random_cloud(n, 77);
  cloud.sys.circulation.setZero();

  LspgSolver<double> lspg(identity_basis(cloud.x0), cloud.sys, 1e-2, RomConfig{});
  const LspgResult<double> rom = lspg.simulate(n_steps, true);
  CHECK(rom.trajectory.all_converged());
  for (const int it : rom.trajectory.iterations) CHECK(it == 1);
  CHECK(rom.trajectory.x_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rom.residual_snapshots.cols() == n_steps);
  CHECK(rom.residual_snapshots.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iteration cap is reported honestly") {
  const Eigen::Index n = 8;
  const Cloud cloud = random_cloud(n, 87);
  RomConfig rcfg;
  rcfg.tol = 1e-15;  // unreachable after a single update
  rcfg.max_iters = 1;
  LspgSolver<double> lspg(identity_basis(cloud.x0), cloud.sys, 1e-2, rcfg);
  const LspgResult<double> rom = lspg.simulate(3, false);
  CHECK_FALSE(rom.trajectory.all_converged());
  bool saw_capped = false;
  for (size_t s = 0; s < rom.trajectory.converged.size(); ++s) {
    if (!rom.trajectory.converged[s]) {
      CHECK(rom.trajectory.iterations[s] == 2);  // initial eval plus the one allowed update
      saw_capped = true;
    }
  }
  CHECK(saw_capped);
}

TEST_CASE("residual snapshots record one column per evaluation") {
  const Eigen::Index n = 10, n_steps = 12;
  const Cloud cloud = random_cloud(n, 97);
  RomConfig rcfg;
  rcfg.tol = 1e-8;
  LspgSolver<double> lspg(identity_basis(cloud.x0), cloud.sys, 1e-3, rcfg);
  const LspgResult<double> rom = lspg.simulate(n_steps, true);
  const int total =
      std::accumulate(rom.trajectory.iterations.begin(), rom.trajectory.iterations.end(), 0);
  CHECK(rom.residual_snapshots.cols() == total);
  CHECK(rom.residual_snapshots.rows() == 2 * n);

  // Disabled collection leaves the matrix empty.
  LspgSolver<double> quiet(identity_basis(cloud.x0), cloud.sys, 1e-3, rcfg);
  CHECK(quiet.simulate(4, false).residual_snapshots.cols() == 0);
}

TEST_CASE("solver constructor validation") {
  const Eigen::Index n = 6;
  const Cloud cloud = random_cloud(n, 107);
  const PODBasis<double> basis = identity_basis(cloud.x0);
  RomConfig rcfg;

  CHECK_THROWS_AS(LspgSolver<double>(basis, cloud.sys, 0.0, rcfg), config_error);
  PODBasis<double> wrong = basis;
  wrong.phi = MatrixXd::Identity(2 * n + 2, 2 * n + 2);
  wrong.x_ref = VectorXd::Zero(2 * n + 2);
  CHECK_THROWS_AS(LspgSolver<double>(wrong, cloud.sys, 1e-3, rcfg), config_error);

  // LSPG surrogate must cover every particle.
  SurrogateSourceBasis<double> partial = cluster_pod<double>(
      basis, cloud.sys.circulation, {0, 1}, ClusterCriterion<double>::neighbor(1e9), 1);
  CHECK_THROWS_AS(LspgSolver<double>(basis, cloud.sys, 1e-3, rcfg, &partial), config_error);

  // GNAT surrogate targets must equal the sample ids.
  const GnatOperator<double> op =
      build_gnat_operator<double>(thin_orthonormal(2 * n, 6, 108), {0, 2, 4});
  SurrogateSourceBasis<double> mismatched = cluster_pod<double>(
      basis, cloud.sys.circulation, {0, 1, 4}, ClusterCriterion<double>::neighbor(1e9), 1);
  CHECK_THROWS_AS(GnatSolver<double>(basis, op, cloud.sys, 1e-3, rcfg, &mismatched), config_error);
}

TEST_CASE("hyper-reduced kernel evaluations track the surrogate tables, not N") {
  const Eigen::Index n = 30;
  const Cloud cloud = random_cloud(n, 117);
  const PODBasis<double> basis = trained_basis(cloud, 1e-3, 40, 6);
  const std::vector<Index> targets = {0, 7, 19, 28};
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, targets, ClusterCriterion<double>::neighbor(0.5), 1);

  size_t expected = 0;
  for (size_t t = 0; t < targets.size(); ++t)
    expected += sur.per_target_clusters[t].size() + sur.per_target_direct[t].size();

  const Eigen::Index nt = static_cast<Eigen::Index>(targets.size());
  VectorXd target_pos(2 * nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    target_pos[t] = basis.x_ref[targets[t]];
    target_pos[t + nt] = basis.x_ref[targets[t] + n];
  }
  reset_kernel_eval_count();
  hyperpair<double>(sur, target_pos, VectorXd::Zero(basis.modes()), cloud.sys);
  CHECK(kernel_eval_count() == expected);

  // The gappy baseline touches every other particle per target instead.
  const GnatOperator<double> op =
      build_gnat_operator<double>(thin_orthonormal(2 * n, 8, 118), targets);
  RomConfig rcfg;
  GnatSolver<double> baseline(basis, op, cloud.sys, 1e-3, rcfg);
  reset_kernel_eval_count();
  baseline.simulate(1);
  const std::uint64_t count = kernel_eval_count();
  CHECK(count % (targets.size() * (n - 1)) == 0);
  CHECK(count >= targets.size() * (n - 1));
}

TEST_CASE("ptrom_simulate reassigns circulation before marching") {
  const Eigen::Index n = 12, n_steps = 10;
  const double dt = 1e-3;
  const Cloud cloud = random_cloud(n, 127);
  const PODBasis<double> basis = trained_basis(cloud, dt, 30, 6);

  const std::vector<Index> samples = {0, 3, 5, 8, 11};
  const GnatOperator<double> op =
      build_gnat_operator<double>(thin_orthonormal(2 * n, 8, 128), samples);
  SurrogateSourceBasis<double> sur = cluster_pod<double>(
      basis, cloud.sys.circulation, samples, ClusterCriterion<double>::neighbor(1.0), 1);

  // Query at doubled circulation: the surrogate must pick up the new values.
  ParticleSystem<double> query = cloud.sys;
  query.circulation *= 2.0;
  RomConfig rcfg;
  rcfg.tol = 1e-6;
  const RomTrajectory<double> got =
      ptrom_simulate<double>(basis, op, sur, query, {dt, n_steps}, rcfg);
  CHECK(sur.direct_gamma[0] == query.circulation[sur.direct_ids[0]]);

  SurrogateSourceBasis<double> fresh = cluster_pod<double>(
      basis, query.circulation, samples, ClusterCriterion<double>::neighbor(1.0), 1);
  GnatSolver<double> direct(basis, op, query, dt, rcfg, &fresh);
  const RomTrajectory<double> want = direct.simulate(n_steps);
  CHECK((got.x_hat - want.x_hat).cwiseAbs().maxCoeff() < 1e-12);
}
