#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "ptrom/types.hpp"

namespace ptrom {

// Desingularized 2D Biot-Savart kernel.  `standard` divides the rotated
// displacement by (d^2 + delta) and carries the 1/(2*pi) circulation
// prefactor; `denominator_scaled` folds 2*pi into the denominator instead,
// i.e. gamma * rot(r) / (2*pi*d^2 + delta).  The two coincide when delta = 0.
enum class KernelForm : std::uint8_t { standard, denominator_scaled };

namespace detail {
// Counts scalar kernel evaluations; lets tests assert that hyper-reduced
// solvers touch exactly the pairs they claim to and nothing N-dependent.
inline thread_local std::uint64_t kernel_eval_counter = 0;
}  // namespace detail

inline std::uint64_t kernel_eval_count() { return detail::kernel_eval_counter; }
inline void reset_kernel_eval_count() { detail::kernel_eval_counter = 0; }

// Velocity induced at `target` by a point vortex of circulation `gamma` at
// `source`.  rot(r) = e3 x r = (-r_psi, r_chi).
template <class S>
Vector2<S> kernel_pair(const Vector2<S>& target, const Vector2<S>& source, S gamma, S delta,
                       KernelForm form = KernelForm::standard) {
  ++detail::kernel_eval_counter;
  const S rx = target[0] - source[0];
  const S ry = target[1] - source[1];
  const S d2 = rx * rx + ry * ry;
  const S two_pi = S(2) * S(EIGEN_PI);
  const S den = (form == KernelForm::standard) ? d2 + delta : two_pi * d2 + delta;
  if (den == S(0))
    throw numerical_error("kernel_pair: coincident target/source with zero desingularization");
  const S pre = (form == KernelForm::standard) ? gamma / (two_pi * den) : gamma / den;
  return Vector2<S>(-ry * pre, rx * pre);
}

// Derivative of kernel_pair with respect to the target position.
template <class S>
Matrix2<S> kernel_pair_jacobian(const Vector2<S>& target, const Vector2<S>& source, S gamma,
                                S delta, KernelForm form = KernelForm::standard) {
  const S rx = target[0] - source[0];
  const S ry = target[1] - source[1];
  const S d2 = rx * rx + ry * ry;
  const S two_pi = S(2) * S(EIGEN_PI);
  Matrix2<S> out;
  if (form == KernelForm::standard) {
    const S q = d2 + delta;
    if (q == S(0))
      throw numerical_error("kernel_pair_jacobian: coincident target/source with zero desingularization");
    const S c = gamma / (two_pi * q * q);
    out(0, 0) = c * (S(2) * rx * ry);
    out(0, 1) = c * (ry * ry - rx * rx - delta);
    out(1, 0) = c * (ry * ry - rx * rx + delta);
    out(1, 1) = c * (-S(2) * rx * ry);
  } else {
    const S q = two_pi * d2 + delta;
    if (q == S(0))
      throw numerical_error("kernel_pair_jacobian: coincident target/source with zero desingularization");
    const S c = gamma / (q * q);
    out(0, 0) = c * (S(2) * two_pi * rx * ry);
    out(0, 1) = c * (S(2) * two_pi * ry * ry - q);
    out(1, 0) = c * (q - S(2) * two_pi * rx * rx);
    out(1, 1) = c * (-S(2) * two_pi * rx * ry);
  }
  return out;
}

// N interacting point vortices plus an optional constant inflow, stored in
// the [chi..., psi...] layout shared with the state vector.
template <class S>
struct ParticleSystem {
  VectorX<S> circulation;                 // N entries
  S delta = S(0);                         // desingularization constant, >= 0
  std::optional<VectorX<S>> inflow;       // 2N entries when present
  KernelForm kernel_form = KernelForm::standard;

  Index size() const { return circulation.size(); }

  void validate() const {
    if (circulation.size() == 0) throw config_error("particle system is empty");
    if (!circulation.allFinite()) throw config_error("non-finite circulation");
    if (!(delta >= S(0))) throw config_error("negative desingularization constant");
    if (inflow && inflow->size() != 2 * circulation.size())
      throw config_error("inflow size must be twice the particle count");
    if (inflow && !inflow->allFinite()) throw config_error("non-finite inflow");
  }
};

template <class S>
void check_state(const Eigen::Ref<const VectorX<S>>& state, const ParticleSystem<S>& sys,
                 const char* who) {
  if (state.size() != 2 * sys.size())
    throw config_error(std::string(who) + ": state dimension " + std::to_string(state.size()) +
                       " does not match particle count " + std::to_string(sys.size()));
  if (!state.allFinite()) throw config_error(std::string(who) + ": non-finite state");
}

// Exact pairwise induced velocity, O(N^2).  Row i of the result is the
// chi-velocity of particle i, row i+N its psi-velocity.
template <class S>
VectorX<S> pairwise_velocity(const Eigen::Ref<const VectorX<S>>& state,
                             const ParticleSystem<S>& sys) {
  sys.validate();
  check_state<S>(state, sys, "pairwise_velocity");
  const Index n = sys.size();
  VectorX<S> f = VectorX<S>::Zero(2 * n);
  for (Index i = 0; i < n; ++i) {
    const Vector2<S> xi(state[i], state[i + n]);
    S fx = S(0), fy = S(0);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vector2<S> k = kernel_pair<S>(xi, Vector2<S>(state[j], state[j + n]),
                                          sys.circulation[j], sys.delta, sys.kernel_form);
      fx += k[0];
      fy += k[1];
    }
    f[i] = fx;
    f[i + n] = fy;
  }
  if (sys.inflow) f += *sys.inflow;
  return f;
}

// Per-particle 2x2 diagonal blocks of the velocity Jacobian: the derivative
// of particle i's velocity with respect to its own position only.  Cross
// blocks are dropped on purpose; Newton solvers here are inexact.
template <class S>
struct BlockDiagonalJacobian {
  VectorX<S> dfx_dx, dfx_dy, dfy_dx, dfy_dy;  // N entries each

  static BlockDiagonalJacobian Zero(Index n) {
    return {VectorX<S>::Zero(n), VectorX<S>::Zero(n), VectorX<S>::Zero(n), VectorX<S>::Zero(n)};
  }
  Matrix2<S> block(Index i) const {
    Matrix2<S> b;
    b << dfx_dx[i], dfx_dy[i], dfy_dx[i], dfy_dy[i];
    return b;
  }
  void add_block(Index i, const Matrix2<S>& b) {
    dfx_dx[i] += b(0, 0);
    dfx_dy[i] += b(0, 1);
    dfy_dx[i] += b(1, 0);
    dfy_dy[i] += b(1, 1);
  }
};

template <class S>
BlockDiagonalJacobian<S> inexact_kernel_jacobian(const Eigen::Ref<const VectorX<S>>& state,
                                                 const ParticleSystem<S>& sys) {
  sys.validate();
  check_state<S>(state, sys, "inexact_kernel_jacobian");
  const Index n = sys.size();
  auto jac = BlockDiagonalJacobian<S>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Vector2<S> xi(state[i], state[i + n]);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      jac.add_block(i, kernel_pair_jacobian<S>(xi, Vector2<S>(state[j], state[j + n]),
                                               sys.circulation[j], sys.delta, sys.kernel_form));
    }
  }
  return jac;
}

// Kirchhoff-Routh energy of the vortex system; every ordered pair
// contributes, so each unordered pair is counted twice.
template <class S>
S hamiltonian(const Eigen::Ref<const VectorX<S>>& state, const ParticleSystem<S>& sys) {
  sys.validate();
  check_state<S>(state, sys, "hamiltonian");
  const Index n = sys.size();
  S acc = S(0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const S rx = state[i] - state[j];
      const S ry = state[i + n] - state[j + n];
      const S d2 = rx * rx + ry * ry;
      if (d2 == S(0))
        throw numerical_error("hamiltonian: coincident particles " + std::to_string(i) + " and " +
                              std::to_string(j));
      acc += sys.circulation[i] * sys.circulation[j] * std::log(std::sqrt(d2));
    }
  }
  return acc / (S(2) * S(EIGEN_PI));
}

// Rectangular evaluation lattice for field visualization.
template <class S>
struct LatticeSpec {
  S x_min, x_max;
  Index nx;
  S y_min, y_max;
  Index ny;

  void validate() const {
    if (nx < 2 || ny < 2) throw config_error("lattice needs at least 2 points per axis");
    if (!(x_max > x_min) || !(y_max > y_min)) throw config_error("degenerate lattice extents");
  }
  S x_at(Index i) const { return x_min + (x_max - x_min) * S(i) / S(nx - 1); }
  S y_at(Index j) const { return y_min + (y_max - y_min) * S(j) / S(ny - 1); }
};

// Non-dimensionalized velocity magnitude on a lattice: entry (j, i) holds
// |f(x_i, y_j)| * (c_g * l) / gamma_bar, where l is a caller-supplied
// characteristic length (the initial end-particle distance in experiments).
template <class S>
MatrixX<S> velocity_field_grid(const Eigen::Ref<const VectorX<S>>& state,
                               const ParticleSystem<S>& sys, const LatticeSpec<S>& lattice,
                               S c_g, S l, S gamma_bar) {
  sys.validate();
  check_state<S>(state, sys, "velocity_field_grid");
  lattice.validate();
  if (!(gamma_bar > S(0))) throw config_error("velocity_field_grid: gamma_bar must be positive");
  if (!(c_g > S(0)) || !(l > S(0)))
    throw config_error("velocity_field_grid: characteristic length must be positive");
  const Index n = sys.size();
  const S scale = c_g * l / gamma_bar;
  MatrixX<S> grid(lattice.ny, lattice.nx);
  for (Index j = 0; j < lattice.ny; ++j) {
    for (Index i = 0; i < lattice.nx; ++i) {
      const Vector2<S> vertex(lattice.x_at(i), lattice.y_at(j));
      Vector2<S> f = Vector2<S>::Zero();
      for (Index p = 0; p < n; ++p) {
        f += kernel_pair<S>(vertex, Vector2<S>(state[p], state[p + n]), sys.circulation[p],
                            sys.delta, sys.kernel_form);
      }
      grid(j, i) = f.norm() * scale;
    }
  }
  return grid;
}

}  // namespace ptrom
