#pragma once

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "ptrom/integrators.hpp"
#include "ptrom/kernel.hpp"
#include "ptrom/reduction.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

struct RomConfig {
  double tol = 1e-4;        // relative reduced-gradient drop per step
  int max_iters = 100;      // Gauss-Newton update cap per step
  double step_length = 1.0; // applied to every update; no line search

  void validate() const {
    if (!(tol > 0)) throw config_error("ROM tolerance must be positive");
    if (max_iters < 1) throw config_error("ROM max_iters must be >= 1");
    if (!(step_length > 0)) throw config_error("ROM step length must be positive");
  }
};

template <class S>
struct RomTrajectory {
  MatrixX<S> x_hat;  // M x n_steps generalized coordinates
  std::vector<int> iterations;   // evaluations per step (updates are one fewer)
  std::vector<char> converged;
  double minimization_seconds = 0;

  bool all_converged() const {
    for (const char c : converged)
      if (!c) return false;
    return true;
  }
};

// Reconstructs selected rows of the full trajectory: row d of the output is
// x_ref[d] + phi.row(d) * x_hat per column.
template <class S>
MatrixX<S> reconstruct_output(const MatrixX<S>& x_hat, const PODBasis<S>& basis,
                              const std::vector<Index>& dofs) {
  if (x_hat.rows() != basis.modes())
    throw config_error("reconstruct_output: coordinate dimension mismatch");
  MatrixX<S> out(static_cast<Index>(dofs.size()), x_hat.cols());
  for (size_t k = 0; k < dofs.size(); ++k) {
    const Index d = dofs[k];
    if (d < 0 || d >= basis.dim()) throw config_error("reconstruct_output: dof out of range");
    out.row(static_cast<Index>(k)) =
        (basis.phi.row(d) * x_hat).array() + basis.x_ref[d];
  }
  return out;
}

template <class S>
MatrixX<S> reconstruct_full(const MatrixX<S>& x_hat, const PODBasis<S>& basis) {
  if (x_hat.rows() != basis.modes())
    throw config_error("reconstruct_full: coordinate dimension mismatch");
  return (basis.phi * x_hat).colwise() + basis.x_ref;
}

namespace detail {

// (I - dt/2 * J_vel) applied to columns of `mat` restricted to the particle
// rows in `ids` (rows k and k + stride of mat pair with particle ids[k]).
template <class S>
MatrixX<S> apply_residual_jacobian(const BlockDiagonalJacobian<S>& jv,
                                   const std::vector<Index>& ids, const MatrixX<S>& mat, S dt) {
  const Index nt = static_cast<Index>(ids.size());
  const S h = dt / S(2);
  MatrixX<S> out(mat.rows(), mat.cols());
  for (Index k = 0; k < nt; ++k) {
    const Index i = ids[static_cast<size_t>(k)];
    out.row(k) = mat.row(k) - h * (jv.dfx_dx[i] * mat.row(k) + jv.dfx_dy[i] * mat.row(k + nt));
    out.row(k + nt) =
        mat.row(k + nt) - h * (jv.dfy_dx[i] * mat.row(k) + jv.dfy_dy[i] * mat.row(k + nt));
  }
  return out;
}

}  // namespace detail

// Velocity of the sampled targets against the clustered source surrogate:
// cluster sources live at x0_tilde + phi_tilde * x_hat, near-field sources at
// their own reconstructed positions.  Returns the sampled velocity alongside
// the self-block Jacobian of the same field.  Work is O(targets * sources
// per target); nothing here scales with N.
template <class S>
struct HyperpairResult {
  VectorX<S> f;                      // 2 n_targets, [chi..., psi...]
  BlockDiagonalJacobian<S> jac;      // per-target self blocks
  VectorX<S> cluster_positions;      // 2 N_c reconstructed cluster positions
  VectorX<S> direct_positions;       // 2 U reconstructed near-field positions
};

template <class S>
HyperpairResult<S> hyperpair(const SurrogateSourceBasis<S>& surrogate,
                             const Eigen::Ref<const VectorX<S>>& target_positions,  // 2 n_t
                             const Eigen::Ref<const VectorX<S>>& x_hat,
                             const ParticleSystem<S>& sys) {
  const Index nt = static_cast<Index>(surrogate.target_ids.size());
  if (target_positions.size() != 2 * nt)
    throw config_error("hyperpair: target position vector has wrong length");
  const Index n_c = surrogate.num_clusters();
  const Index u = surrogate.num_direct();

  HyperpairResult<S> out;
  out.cluster_positions = surrogate.x0_tilde + surrogate.phi_tilde * x_hat;
  out.direct_positions = surrogate.direct_x0 + surrogate.direct_phi * x_hat;
  out.f = VectorX<S>::Zero(2 * nt);
  out.jac = BlockDiagonalJacobian<S>::Zero(nt);

  for (Index t = 0; t < nt; ++t) {
    const Index pid = surrogate.target_ids[static_cast<size_t>(t)];
    const Vector2<S> pos(target_positions[t], target_positions[t + nt]);
    Vector2<S> v = Vector2<S>::Zero();
    Matrix2<S> jb = Matrix2<S>::Zero();
    for (const Index c : surrogate.per_target_clusters[static_cast<size_t>(t)]) {
      const Vector2<S> src(out.cluster_positions[c], out.cluster_positions[c + n_c]);
      // A cluster centroid landing exactly on its target contributes nothing:
      // the kernel is odd, so symmetric members cancel there, matching the
      // delta -> 0 limit.  Only synthetic sources get this; a coincident
      // direct source is still a genuine singularity.
      if (sys.delta == S(0) && src[0] == pos[0] && src[1] == pos[1]) continue;
      const S g = surrogate.gamma_tilde[c];
      v += kernel_pair<S>(pos, src, g, sys.delta, sys.kernel_form);
      jb += kernel_pair_jacobian<S>(pos, src, g, sys.delta, sys.kernel_form);
    }
    for (const Index k : surrogate.per_target_direct[static_cast<size_t>(t)]) {
      const Index j = surrogate.direct_ids[static_cast<size_t>(k)];
      if (j == pid) continue;
      const Vector2<S> src(out.direct_positions[k], out.direct_positions[k + u]);
      const S g = surrogate.direct_gamma[k];
      v += kernel_pair<S>(pos, src, g, sys.delta, sys.kernel_form);
      jb += kernel_pair_jacobian<S>(pos, src, g, sys.delta, sys.kernel_form);
    }
    out.f[t] = v[0];
    out.f[t + nt] = v[1];
    out.jac.add_block(t, jb);
  }
  if (sys.inflow) {
    const Index n = sys.size();
    for (Index t = 0; t < nt; ++t) {
      const Index pid = surrogate.target_ids[static_cast<size_t>(t)];
      out.f[t] += (*sys.inflow)[pid];
      out.f[t + nt] += (*sys.inflow)[pid + n];
    }
  }
  return out;
}

template <class S>
struct LspgResult {
  RomTrajectory<S> trajectory;
  MatrixX<S> residual_snapshots;  // N_d x total evaluations
};

// Full-dimension least-squares Petrov-Galerkin marching.  Sources come from
// the clustered surrogate when one is supplied (the training configuration)
// and from exact pairwise interaction otherwise.
template <class S>
class LspgSolver {
 public:
  LspgSolver(const PODBasis<S>& basis, const ParticleSystem<S>& sys, S dt, RomConfig cfg,
             const SurrogateSourceBasis<S>* surrogate = nullptr)
      : basis_(basis), sys_(sys), dt_(dt), cfg_(cfg), surrogate_(surrogate) {
    cfg_.validate();
    sys_.validate();
    if (!(dt > S(0))) throw config_error("time step must be positive");
    if (basis_.dim() != 2 * sys_.size())
      throw config_error("LspgSolver: basis dimension does not match particle count");
    if (surrogate_ && static_cast<Index>(surrogate_->target_ids.size()) != sys_.size())
      throw config_error("LspgSolver: surrogate must cover every particle as a target");
    all_ids_.resize(static_cast<size_t>(sys_.size()));
    for (Index i = 0; i < sys_.size(); ++i) all_ids_[static_cast<size_t>(i)] = i;
  }

  LspgResult<S> simulate(Index n_steps, bool collect_residuals) {
    LspgResult<S> out;
    out.trajectory.x_hat.resize(basis_.modes(), n_steps);
    std::vector<VectorX<S>> residuals;
    using clock = std::chrono::steady_clock;

    VectorX<S> x_hat = VectorX<S>::Zero(basis_.modes());
    VectorX<S> x_prev = basis_.x_ref;
    VectorX<S> f_prev = velocity_and_jacobian(x_prev, x_hat).first;
    for (Index s = 0; s < n_steps; ++s) {
      const auto tic = clock::now();
      int evals = 0;
      bool converged = false;
      S g0 = S(0);
      VectorX<S> x_tilde = reconstruct(x_hat);
      auto [f, jv] = velocity_and_jacobian(x_tilde, x_hat);
      while (true) {
        ++evals;
        const VectorX<S> r = trapezoidal_residual<S>(x_tilde, f, x_prev, f_prev, dt_);
        if (collect_residuals) residuals.push_back(r);
        const MatrixX<S> j_phi = detail::apply_residual_jacobian<S>(jv, all_ids_, basis_.phi, dt_);
        const VectorX<S> grad = j_phi.transpose() * r;
        const S gn = grad.norm();
        if (evals == 1) {
          g0 = gn;
          if (g0 == S(0)) {
            converged = true;
            break;
          }
        } else if (gn / g0 <= S(cfg_.tol)) {
          converged = true;
          break;
        }
        if (evals - 1 >= cfg_.max_iters) break;
        const VectorX<S> delta =
            Eigen::ColPivHouseholderQR<MatrixX<S>>(j_phi).solve((-r).eval());
        x_hat += S(cfg_.step_length) * delta;
        x_tilde = reconstruct(x_hat);
        std::tie(f, jv) = velocity_and_jacobian(x_tilde, x_hat);
      }
      out.trajectory.minimization_seconds +=
          std::chrono::duration<double>(clock::now() - tic).count();
      out.trajectory.x_hat.col(s) = x_hat;
      out.trajectory.iterations.push_back(evals);
      out.trajectory.converged.push_back(converged ? 1 : 0);
      x_prev = x_tilde;
      f_prev = f;
    }
    out.residual_snapshots.resize(basis_.dim(), static_cast<Index>(residuals.size()));
    for (size_t k = 0; k < residuals.size(); ++k)
      out.residual_snapshots.col(static_cast<Index>(k)) = residuals[k];
    return out;
  }

 private:
  VectorX<S> reconstruct(const VectorX<S>& x_hat) const {
    return basis_.x_ref + basis_.phi * x_hat;
  }
  std::pair<VectorX<S>, BlockDiagonalJacobian<S>> velocity_and_jacobian(
      const VectorX<S>& x_tilde, const VectorX<S>& x_hat) const {
    if (!surrogate_)
      return {pairwise_velocity<S>(x_tilde, sys_), inexact_kernel_jacobian<S>(x_tilde, sys_)};
    HyperpairResult<S> hp = hyperpair<S>(*surrogate_, x_tilde, x_hat, sys_);
    return {std::move(hp.f), std::move(hp.jac)};
  }

  PODBasis<S> basis_;
  ParticleSystem<S> sys_;
  S dt_;
  RomConfig cfg_;
  const SurrogateSourceBasis<S>* surrogate_;
  std::vector<Index> all_ids_;
};

// Hyper-reduced Gauss-Newton marching on the sampled residual.  Source
// positions come from the clustered surrogate when one is supplied; without
// one every particle is a direct source reconstructed through the full basis
// (the plain gappy baseline, O(N) per iteration).
template <class S>
class GnatSolver {
 public:
  GnatSolver(const PODBasis<S>& basis, const GnatOperator<S>& op, const ParticleSystem<S>& sys,
             S dt, RomConfig cfg, const SurrogateSourceBasis<S>* surrogate = nullptr)
      : basis_(basis), op_(op), sys_(sys), dt_(dt), cfg_(cfg), surrogate_(surrogate) {
    cfg_.validate();
    sys_.validate();
    if (!(dt > S(0))) throw config_error("time step must be positive");
    if (basis_.dim() != 2 * sys_.size())
      throw config_error("GnatSolver: basis dimension does not match particle count");
    if (surrogate_ && surrogate_->target_ids != op_.sample_ids)
      throw config_error("GnatSolver: surrogate targets must equal the sampled particle ids");
    const Index nt = static_cast<Index>(op_.sample_ids.size());
    phi_bar_.resize(2 * nt, basis_.modes());
    x0_bar_.resize(2 * nt);
    inflow_bar_ = VectorX<S>::Zero(2 * nt);
    const Index n = sys_.size();
    for (Index k = 0; k < nt; ++k) {
      const Index p = op_.sample_ids[static_cast<size_t>(k)];
      phi_bar_.row(k) = basis_.phi.row(p);
      phi_bar_.row(k + nt) = basis_.phi.row(p + n);
      x0_bar_[k] = basis_.x_ref[p];
      x0_bar_[k + nt] = basis_.x_ref[p + n];
      if (sys_.inflow) {
        inflow_bar_[k] = (*sys_.inflow)[p];
        inflow_bar_[k + nt] = (*sys_.inflow)[p + n];
      }
    }
  }

  RomTrajectory<S> simulate(Index n_steps) {
    RomTrajectory<S> out;
    out.x_hat.resize(basis_.modes(), n_steps);
    using clock = std::chrono::steady_clock;

    const Index nt = static_cast<Index>(op_.sample_ids.size());
    VectorX<S> x_hat = VectorX<S>::Zero(basis_.modes());
    VectorX<S> x_bar_prev = x0_bar_;
    VectorX<S> f_bar_prev = sampled_velocity(x_bar_prev, x_hat).first;
    for (Index s = 0; s < n_steps; ++s) {
      const auto tic = clock::now();
      int evals = 0;
      bool converged = false;
      S g0 = S(0);
      VectorX<S> x_bar = x0_bar_ + phi_bar_ * x_hat;
      auto [f_bar, jv] = sampled_velocity_and_jacobian(x_bar, x_hat);
      while (true) {
        ++evals;
        const VectorX<S> r_bar = trapezoidal_residual<S>(x_bar, f_bar, x_bar_prev, f_bar_prev, dt_);
        const MatrixX<S> c = detail::apply_residual_jacobian<S>(jv, local_ids(nt), phi_bar_, dt_);
        const VectorX<S> grad = c.transpose() * r_bar;
        const S gn = grad.norm();
        if (evals == 1) {
          g0 = gn;
          if (g0 == S(0)) {
            converged = true;
            break;
          }
        } else if (gn / g0 <= S(cfg_.tol)) {
          converged = true;
          break;
        }
        if (evals - 1 >= cfg_.max_iters) break;
        const MatrixX<S> ac = op_.A * c;
        const VectorX<S> ad = op_.A * r_bar;
        const VectorX<S> delta = Eigen::ColPivHouseholderQR<MatrixX<S>>(ac).solve((-ad).eval());
        x_hat += S(cfg_.step_length) * delta;
        x_bar = x0_bar_ + phi_bar_ * x_hat;
        std::tie(f_bar, jv) = sampled_velocity_and_jacobian(x_bar, x_hat);
      }
      out.minimization_seconds += std::chrono::duration<double>(clock::now() - tic).count();
      out.x_hat.col(s) = x_hat;
      out.iterations.push_back(evals);
      out.converged.push_back(converged ? 1 : 0);
      x_bar_prev = x_bar;
      f_bar_prev = f_bar;
    }
    return out;
  }

 private:
  static const std::vector<Index>& local_ids(Index nt) {
    static thread_local std::vector<Index> ids;
    if (static_cast<Index>(ids.size()) != nt) {
      ids.resize(static_cast<size_t>(nt));
      for (Index i = 0; i < nt; ++i) ids[static_cast<size_t>(i)] = i;
    }
    return ids;
  }

  std::pair<VectorX<S>, BlockDiagonalJacobian<S>> sampled_velocity_and_jacobian(
      const VectorX<S>& x_bar, const VectorX<S>& x_hat) const {
    if (surrogate_) {
      HyperpairResult<S> hp = hyperpair<S>(*surrogate_, x_bar, x_hat, sys_);
      return {std::move(hp.f), std::move(hp.jac)};
    }
    // Baseline: every other particle is a source at its reconstructed
    // position.
    const Index n = sys_.size();
    const Index nt = static_cast<Index>(op_.sample_ids.size());
    const VectorX<S> x_tilde = basis_.x_ref + basis_.phi * x_hat;
    VectorX<S> f = VectorX<S>::Zero(2 * nt);
    auto jac = BlockDiagonalJacobian<S>::Zero(nt);
    for (Index k = 0; k < nt; ++k) {
      const Index i = op_.sample_ids[static_cast<size_t>(k)];
      const Vector2<S> pos(x_bar[k], x_bar[k + nt]);
      Vector2<S> v = Vector2<S>::Zero();
      Matrix2<S> jb = Matrix2<S>::Zero();
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vector2<S> src(x_tilde[j], x_tilde[j + n]);
        v += kernel_pair<S>(pos, src, sys_.circulation[j], sys_.delta, sys_.kernel_form);
        jb += kernel_pair_jacobian<S>(pos, src, sys_.circulation[j], sys_.delta, sys_.kernel_form);
      }
      f[k] = v[0];
      f[k + nt] = v[1];
      jac.add_block(k, jb);
      if (sys_.inflow) {
        f[k] += (*sys_.inflow)[i];
        f[k + nt] += (*sys_.inflow)[i + n];
      }
    }
    return {std::move(f), std::move(jac)};
  }
  std::pair<VectorX<S>, BlockDiagonalJacobian<S>> sampled_velocity(const VectorX<S>& x_bar,
                                                                   const VectorX<S>& x_hat) const {
    return sampled_velocity_and_jacobian(x_bar, x_hat);
  }

  PODBasis<S> basis_;
  GnatOperator<S> op_;
  ParticleSystem<S> sys_;
  S dt_;
  RomConfig cfg_;
  const SurrogateSourceBasis<S>* surrogate_;
  MatrixX<S> phi_bar_;
  VectorX<S> x0_bar_;
  VectorX<S> inflow_bar_;
};

// Online phase: reassigns the surrogate's circulations for the queried
// parameters and marches the hyper-reduced solver.
template <class S>
RomTrajectory<S> ptrom_simulate(const PODBasis<S>& basis, const GnatOperator<S>& op,
                                SurrogateSourceBasis<S>& surrogate, const ParticleSystem<S>& sys,
                                const TimeGrid<S>& grid, const RomConfig& cfg) {
  grid.validate();
  reassign_cluster_circulation<S>(surrogate, sys.circulation, basis);
  GnatSolver<S> solver(basis, op, sys, grid.dt, cfg, &surrogate);
  return solver.simulate(grid.n_steps);
}

}  // namespace ptrom
