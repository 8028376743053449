#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ptrom/integrators.hpp"
#include "ptrom/kernel.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

// Relative Hamiltonian deviation of a reduced state against the reference.
template <class S>
S ae_hamiltonian(S h_ref, S h_rom) {
  if (h_ref == S(0)) throw numerical_error("ae_hamiltonian: zero reference Hamiltonian");
  return std::abs(h_rom - h_ref) / std::abs(h_ref);
}

// Mean trajectory deviation at one instant, normalized by the characteristic
// length l: (1/(l N)) * sum_i |pos_ref,i - pos_rom,i|_2.
template <class S>
S mae_trajectory_step(const Eigen::Ref<const VectorX<S>>& x_ref,
                      const Eigen::Ref<const VectorX<S>>& x_rom, S l) {
  if (x_ref.size() != x_rom.size()) throw config_error("mae_trajectory: state size mismatch");
  if (!(l > S(0))) throw config_error("mae_trajectory: characteristic length must be positive");
  const Index n = particle_count(x_ref.size());
  S acc = S(0);
  for (Index i = 0; i < n; ++i) {
    const S dx = x_ref[i] - x_rom[i];
    const S dy = x_ref[i + n] - x_rom[i + n];
    acc += std::sqrt(dx * dx + dy * dy);
  }
  return acc / (l * S(n));
}

template <class S>
VectorX<S> mae_trajectory(const MatrixX<S>& ref, const MatrixX<S>& rom, S l) {
  if (ref.rows() != rom.rows() || ref.cols() != rom.cols())
    throw config_error("mae_trajectory: snapshot shape mismatch");
  VectorX<S> out(ref.cols());
  for (Index c = 0; c < ref.cols(); ++c)
    out[c] = mae_trajectory_step<S>(ref.col(c), rom.col(c), l);
  return out;
}

template <class S>
S speedup_factor(double reference_seconds, double reduced_seconds) {
  if (!(reference_seconds > 0) || !(reduced_seconds > 0))
    throw config_error("speedup_factor: wall times must be positive");
  return S(reference_seconds / reduced_seconds);
}

// A posteriori state error bound for a kappa-Lipschitz velocity under the
// multistep scheme: per step, delta_n <= |r_n| / h + sum_j eta_j delta_{n-j}
// with h = |a0| - |b0| kappa dt and eta_j = (|a_j| + |b_j| kappa dt) / h.
// History errors enter through both the state and the velocity term, so the
// worst case adds their magnitudes.  Requires dt < |a0| / (|b0| kappa).
template <class S>
VectorX<S> state_error_bound(const VectorX<S>& residual_norms, S kappa, S dt,
                             const MultistepCoefficients<S>& coeffs, S delta0 = S(0)) {
  coeffs.validate();
  if (!(kappa > S(0))) throw config_error("state_error_bound: kappa must be positive");
  if (!(dt > S(0))) throw config_error("state_error_bound: dt must be positive");
  const S a0 = std::abs(coeffs.alpha[0]);
  const S b0 = std::abs(coeffs.beta[0]);
  const S h = a0 - b0 * kappa * dt;
  if (!(h > S(0)))
    throw numerical_error("state_error_bound: dt " + std::to_string(double(dt)) +
                          " violates dt < |a0|/(|b0| kappa) = " +
                          std::to_string(double(a0 / (b0 * kappa))));
  const Index k = coeffs.history_size();
  std::vector<S> eta(static_cast<size_t>(k));
  for (Index j = 1; j <= k; ++j)
    eta[static_cast<size_t>(j - 1)] =
        (std::abs(coeffs.alpha[static_cast<size_t>(j)]) +
         std::abs(coeffs.beta[static_cast<size_t>(j)]) * kappa * dt) / h;

  const Index n = residual_norms.size();
  VectorX<S> bound(n);
  for (Index i = 0; i < n; ++i) {
    S acc = residual_norms[i] / h;
    for (Index j = 1; j <= k; ++j) {
      const S prev = (i - j >= 0) ? bound[i - j] : delta0;
      acc += eta[static_cast<size_t>(j - 1)] * prev;
    }
    bound[i] = acc;
  }
  return bound;
}

// Bound on a kappa_g-Lipschitz quantity of interest: the state bound scaled
// through the output Lipschitz constant.
template <class S>
VectorX<S> qoi_error_bound(const VectorX<S>& state_bounds, S kappa_g) {
  if (!(kappa_g > S(0))) throw config_error("qoi_error_bound: kappa_g must be positive");
  return kappa_g * state_bounds;
}

// Norms of the full-order residual along a reconstructed trajectory; these
// feed the state error bound.  Column c of `trajectory` is the state after
// step c+1; `x0` seeds the history.
template <class S, class Model>
VectorX<S> fom_residual_norms(const MatrixX<S>& trajectory, const VectorX<S>& x0,
                              const Model& model, S dt) {
  if (!(dt > S(0))) throw config_error("fom_residual_norms: dt must be positive");
  VectorX<S> out(trajectory.cols());
  VectorX<S> x_prev = x0;
  VectorX<S> f_prev = model.velocity(x_prev);
  for (Index c = 0; c < trajectory.cols(); ++c) {
    const VectorX<S> x = trajectory.col(c);
    const VectorX<S> f = model.velocity(x);
    out[c] = trapezoidal_residual<S>(x, f, x_prev, f_prev, dt).norm();
    x_prev = x;
    f_prev = f;
  }
  return out;
}

// Largest observed velocity difference quotient between paired trajectory
// columns; a practical stand-in for the kernel's Lipschitz constant near the
// trajectory.  Coincident pairs are skipped.
template <class S, class Model>
S empirical_lipschitz(const MatrixX<S>& states_a, const MatrixX<S>& states_b,
                      const Model& model) {
  if (states_a.rows() != states_b.rows() || states_a.cols() != states_b.cols())
    throw config_error("empirical_lipschitz: shape mismatch");
  S best = S(0);
  for (Index c = 0; c < states_a.cols(); ++c) {
    const S dx = (states_a.col(c) - states_b.col(c)).norm();
    if (dx == S(0)) continue;
    const S df = (model.velocity(states_a.col(c)) - model.velocity(states_b.col(c))).norm();
    best = std::max(best, df / dx);
  }
  if (best == S(0))
    throw numerical_error("empirical_lipschitz: no separated state pairs to measure");
  return best;
}

// Per-step accuracy rows plus the summary the experiment reports carry.
struct ErrorReport {
  std::vector<double> time;
  std::vector<double> mae;           // trajectory deviation per step
  std::vector<double> ae_h;          // Hamiltonian deviation per step
  std::vector<double> state_error;   // measured |x - x_tilde|_2 (optional, may be empty)
  std::vector<double> error_bound;   // certified bound (optional, may be empty)

  double mean_mae = 0;
  double mean_ae_h = 0;
  double speedup = 0;
  double reference_seconds = 0;
  double reduced_seconds = 0;
};

}  // namespace ptrom
