#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ptrom {

using Index = Eigen::Index;

template <class S> using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S> using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S> using Vector2 = Eigen::Matrix<S, 2, 1>;
template <class S> using Matrix2 = Eigen::Matrix<S, 2, 2>;

using VectorXd = VectorX<double>;
using MatrixXd = MatrixX<double>;
using Vector2d = Vector2<double>;
using Matrix2d = Matrix2<double>;

// Bad configuration or malformed input; the CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (singularities, rank deficiency, unusable operators);
// the CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// State layout: x = [chi_1..chi_N, psi_1..psi_N], so particle i owns
// rows i and i + N.  Velocities use the same layout.
inline Index particle_count(Index state_dim) {
  if (state_dim < 0 || state_dim % 2 != 0)
    throw config_error("state dimension must be even, got " + std::to_string(state_dim));
  return state_dim / 2;
}

template <class S>
Vector2<S> particle_position(const Eigen::Ref<const VectorX<S>>& state, Index i, Index n) {
  return Vector2<S>(state[i], state[i + n]);
}

template <class S>
void set_particle_position(Eigen::Ref<VectorX<S>> state, Index i, Index n, const Vector2<S>& p) {
  state[i] = p[0];
  state[i + n] = p[1];
}

}  // namespace ptrom
