#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "ptrom/kernel.hpp"
#include "ptrom/quadtree.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

template <class S>
struct TimeGrid {
  S dt;
  Index n_steps;
  S t0 = S(0);

  void validate() const {
    if (!(dt > S(0))) throw config_error("time step must be positive");
    if (n_steps < 0) throw config_error("negative step count");
  }
};

// Linear multistep coefficients; index 0 pairs with the unknown state, index
// j >= 1 with history entry x^{n-j}.  Only the trapezoidal member is used by
// the shipped solvers, but the residual and the error bounds honor the
// general table.
template <class S>
struct MultistepCoefficients {
  std::vector<S> alpha;
  std::vector<S> beta;

  static MultistepCoefficients trapezoidal() {
    return {{S(1), S(-1)}, {S(0.5), S(0.5)}};
  }
  Index history_size() const { return static_cast<Index>(alpha.size()) - 1; }
  void validate() const {
    if (alpha.size() != beta.size() || alpha.size() < 2)
      throw config_error("multistep coefficient table malformed");
    if (alpha[0] == S(0)) throw config_error("leading multistep coefficient must be nonzero");
  }
};

// r(xi) = a0*xi - dt*b0*f(xi) + sum_j (a_j*x^{n-j} - dt*b_j*f^{n-j}).
template <class S>
VectorX<S> trapezoidal_residual(const Eigen::Ref<const VectorX<S>>& xi,
                                const Eigen::Ref<const VectorX<S>>& f_xi,
                                const Eigen::Ref<const VectorX<S>>& x_prev,
                                const Eigen::Ref<const VectorX<S>>& f_prev, S dt) {
  return xi - x_prev - (dt / S(2)) * (f_xi + f_prev);
}

struct NewtonConfig {
  double tol = 1e-10;             // relative residual drop
  int max_iters = 100;
  int jacobian_refresh_period = 1;  // refresh every this many time steps

  void validate() const {
    if (!(tol > 0)) throw config_error("Newton tolerance must be positive");
    if (max_iters < 1) throw config_error("Newton max_iters must be >= 1");
    if (jacobian_refresh_period < 1)
      throw config_error("Jacobian refresh period must be >= 1");
  }
};

// Exact pairwise velocity model for the full-order solver.
template <class S>
struct PairwiseModel {
  ParticleSystem<S> sys;

  VectorX<S> velocity(const Eigen::Ref<const VectorX<S>>& x) const {
    return pairwise_velocity<S>(x, sys);
  }
  BlockDiagonalJacobian<S> jacobian(const Eigen::Ref<const VectorX<S>>& x) const {
    return inexact_kernel_jacobian<S>(x, sys);
  }
};

// Tree-accelerated velocity model; the tree is rebuilt from the evaluation
// state on every call, so implicit iterations always see current geometry.
template <class S>
struct BarnesHutModel {
  ParticleSystem<S> sys;
  ClusterCriterion<S> criterion;
  Index leaf_capacity;

  QuadTree<S> build(const Eigen::Ref<const VectorX<S>>& x) const {
    const Index n = sys.size();
    MatrixX<S> pts(n, 2);
    pts.col(0) = x.head(n);
    pts.col(1) = x.tail(n);
    return build_tree<S>(pts, sys.circulation, leaf_capacity);
  }
  VectorX<S> velocity(const Eigen::Ref<const VectorX<S>>& x) const {
    return bh_velocity<S>(build(x), x, sys, criterion);
  }
  BlockDiagonalJacobian<S> jacobian(const Eigen::Ref<const VectorX<S>>& x) const {
    return bh_jacobian<S>(build(x), x, sys, criterion);
  }
};

template <class S>
struct StepResult {
  VectorX<S> x;
  VectorX<S> f;  // velocity at the accepted state
  int iterations = 0;
  bool converged = true;
  S relative_residual = S(0);
};

// Implicit trapezoidal step driven by an inexact Newton iteration: the
// residual Jacobian keeps only each particle's 2x2 self-block, refactored at
// the first iteration of every jacobian_refresh_period-th step and reused
// otherwise.
template <class S, class Model>
class FomStepper {
 public:
  FomStepper(const Model& model, S dt, NewtonConfig cfg)
      : model_(model), dt_(dt), cfg_(cfg) {
    cfg_.validate();
    if (!(dt > S(0))) throw config_error("time step must be positive");
  }

  StepResult<S> step(const Eigen::Ref<const VectorX<S>>& x_prev,
                     const Eigen::Ref<const VectorX<S>>& f_prev) {
    const Index n = particle_count(x_prev.size());
    StepResult<S> out;
    VectorX<S> xi = x_prev;
    VectorX<S> f_xi = f_prev;
    S r0 = S(0);
    bool refreshed_this_step = false;
    const bool refresh_due = (step_index_ % cfg_.jacobian_refresh_period) == 0 || inv_blocks_.empty();

    int updates = 0;
    bool converged = false;
    S rel = S(0);
    while (true) {
      const VectorX<S> r = trapezoidal_residual<S>(xi, f_xi, x_prev, f_prev, dt_);
      const S nr = r.norm();
      if (updates == 0) {
        r0 = nr;
        if (r0 == S(0)) {
          converged = true;
          rel = S(0);
          break;
        }
      }
      rel = nr / r0;
      if (rel <= S(cfg_.tol)) {
        converged = true;
        break;
      }
      if (updates >= cfg_.max_iters) break;
      if (refresh_due && !refreshed_this_step) {
        refactor(xi, n);
        refreshed_this_step = true;
      }
      // Per-particle solve of (I - dt/2 * J_vel) * delta = -r.
      for (Index i = 0; i < n; ++i) {
        const Matrix2<S>& inv = inv_blocks_[static_cast<size_t>(i)];
        const Vector2<S> rhs(-r[i], -r[i + n]);
        const Vector2<S> d = inv * rhs;
        xi[i] += d[0];
        xi[i + n] += d[1];
      }
      ++updates;
      f_xi = model_.velocity(xi);
    }
    ++step_index_;
    out.x = std::move(xi);
    out.f = std::move(f_xi);
    out.iterations = updates;
    out.converged = converged;
    out.relative_residual = rel;
    return out;
  }

 private:
  void refactor(const Eigen::Ref<const VectorX<S>>& xi, Index n) {
    const BlockDiagonalJacobian<S> jv = model_.jacobian(xi);
    inv_blocks_.resize(static_cast<size_t>(n));
    const S h = dt_ / S(2);
    for (Index i = 0; i < n; ++i) {
      Matrix2<S> b = Matrix2<S>::Identity() - h * jv.block(i);
      const S det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
      if (det == S(0) || !std::isfinite(det))
        throw numerical_error("singular Newton block for particle " + std::to_string(i));
      Matrix2<S> inv;
      inv << b(1, 1), -b(0, 1), -b(1, 0), b(0, 0);
      inv_blocks_[static_cast<size_t>(i)] = inv / det;
    }
  }

  const Model& model_;
  S dt_;
  NewtonConfig cfg_;
  std::vector<Matrix2<S>> inv_blocks_;
  Index step_index_ = 0;
};

// One-shot implicit trapezoidal step.
template <class S, class Model>
StepResult<S> fom_step(const Eigen::Ref<const VectorX<S>>& x_prev, const Model& model, S dt,
                       const NewtonConfig& cfg) {
  FomStepper<S, Model> stepper(model, dt, cfg);
  return stepper.step(x_prev, model.velocity(x_prev));
}

// Explicit second-order predictor/corrector (Heun) step.
template <class S, class Model>
VectorX<S> heun_step(const Eigen::Ref<const VectorX<S>>& x_prev, const Model& model, S dt) {
  if (!(dt > S(0))) throw config_error("time step must be positive");
  const VectorX<S> f0 = model.velocity(x_prev);
  const VectorX<S> predictor = x_prev + dt * f0;
  return x_prev + (dt / S(2)) * (f0 + model.velocity(predictor));
}

// Snapshot container: one column per completed time step (the initial state
// is not a column; it travels separately as the reference state).
template <class S>
struct SnapshotMatrix {
  MatrixX<S> columns;
  S dt = S(0);
  S t0 = S(0);
};

template <class S>
struct SimulateResult {
  SnapshotMatrix<S> snapshots;
  double loop_seconds = 0;  // velocity/Newton work only; storage excluded
  std::vector<int> iterations;
  std::vector<char> converged;

  bool all_converged() const {
    for (const char c : converged)
      if (!c) return false;
    return true;
  }
};

template <class S, class Model>
SimulateResult<S> fom_simulate(const Eigen::Ref<const VectorX<S>>& x0, const Model& model,
                               const TimeGrid<S>& grid, const NewtonConfig& cfg) {
  grid.validate();
  cfg.validate();
  using clock = std::chrono::steady_clock;
  SimulateResult<S> out;
  out.snapshots.dt = grid.dt;
  out.snapshots.t0 = grid.t0;
  out.snapshots.columns.resize(x0.size(), grid.n_steps);
  out.iterations.reserve(static_cast<size_t>(grid.n_steps));
  out.converged.reserve(static_cast<size_t>(grid.n_steps));

  FomStepper<S, Model> stepper(model, grid.dt, cfg);
  const auto warm0 = clock::now();
  VectorX<S> x = x0;
  VectorX<S> f = model.velocity(x0);
  out.loop_seconds += std::chrono::duration<double>(clock::now() - warm0).count();
  for (Index s = 0; s < grid.n_steps; ++s) {
    const auto t0 = clock::now();
    StepResult<S> res = stepper.step(x, f);
    out.loop_seconds += std::chrono::duration<double>(clock::now() - t0).count();
    x = std::move(res.x);
    f = std::move(res.f);
    out.snapshots.columns.col(s) = x;
    out.iterations.push_back(res.iterations);
    out.converged.push_back(res.converged ? 1 : 0);
  }
  return out;
}

template <class S, class Model>
SimulateResult<S> heun_simulate(const Eigen::Ref<const VectorX<S>>& x0, const Model& model,
                                const TimeGrid<S>& grid) {
  grid.validate();
  using clock = std::chrono::steady_clock;
  SimulateResult<S> out;
  out.snapshots.dt = grid.dt;
  out.snapshots.t0 = grid.t0;
  out.snapshots.columns.resize(x0.size(), grid.n_steps);
  VectorX<S> x = x0;
  for (Index s = 0; s < grid.n_steps; ++s) {
    const auto t0 = clock::now();
    VectorX<S> next = heun_step<S>(x, model, grid.dt);
    out.loop_seconds += std::chrono::duration<double>(clock::now() - t0).count();
    x = std::move(next);
    out.snapshots.columns.col(s) = x;
    out.iterations.push_back(2);
    out.converged.push_back(1);
  }
  return out;
}

}  // namespace ptrom
