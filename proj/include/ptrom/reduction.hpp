#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ptrom/quadtree.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

template <class S>
struct PODBasis {
  MatrixX<S> phi;              // N_d x M, orthonormal columns
  VectorX<S> singular_values;  // M retained singular values
  VectorX<S> x_ref;            // reference state added back on reconstruction

  Index dim() const { return phi.rows(); }
  Index modes() const { return phi.cols(); }
};

// Thin SVD of the snapshot matrix, keeping the M leading left singular
// vectors.  Each kept column is flipped so its largest-magnitude entry is
// positive (first such entry on ties), which pins the sign for artifact
// reproducibility.
template <class S>
PODBasis<S> build_pod(const MatrixX<S>& snapshots, Index modes, const VectorX<S>& x_ref) {
  if (snapshots.size() == 0) throw config_error("build_pod: empty snapshot matrix");
  if (!snapshots.allFinite()) throw config_error("build_pod: non-finite snapshots");
  if (x_ref.size() != snapshots.rows())
    throw config_error("build_pod: reference state dimension mismatch");
  const Index max_modes = std::min(snapshots.rows(), snapshots.cols());
  if (modes < 1 || modes > max_modes)
    throw config_error("build_pod: mode count " + std::to_string(modes) +
                       " outside [1, " + std::to_string(max_modes) + "]");

  Eigen::BDCSVD<MatrixX<S>> svd(snapshots, Eigen::ComputeThinU);
  const VectorX<S>& sv = svd.singularValues();
  const S cutoff = std::max(snapshots.rows(), snapshots.cols()) *
                   std::numeric_limits<S>::epsilon() * sv[0];
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;
  if (modes > rank)
    throw numerical_error("build_pod: requested " + std::to_string(modes) +
                          " modes but snapshots have numerical rank " + std::to_string(rank));

  PODBasis<S> basis;
  basis.phi = svd.matrixU().leftCols(modes);
  basis.singular_values = sv.head(modes);
  basis.x_ref = x_ref;
  for (Index c = 0; c < modes; ++c) {
    Index arg = 0;
    S best = S(-1);
    for (Index r = 0; r < basis.phi.rows(); ++r) {
      const S a = std::abs(basis.phi(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (basis.phi(arg, c) < S(0)) basis.phi.col(c) = -basis.phi.col(c);
  }
  return basis;
}

// Singular-value-weighted mode superposition; read through the state layout
// it places one pseudo-particle per physical particle.
template <class S>
VectorX<S> weighted_pod_space(const PODBasis<S>& basis) {
  return basis.phi * basis.singular_values;
}

template <class S>
MatrixX<S> state_to_points(const Eigen::Ref<const VectorX<S>>& state) {
  const Index n = particle_count(state.size());
  MatrixX<S> pts(n, 2);
  pts.col(0) = state.head(n);
  pts.col(1) = state.tail(n);
  return pts;
}

// Greedy residual-based selection of sample particles.  Working basis
// vectors are spread across iterations; after the first iteration each batch
// is replaced by its gappy reconstruction error over the rows sampled so
// far.  Every pick maximizes the summed squared working-vector mass over the
// candidate particle's two rows, lowest index winning ties.
template <class S>
std::vector<Index> greedy_sample(const MatrixX<S>& phi_r, Index n_target,
                                 const std::vector<Index>& preseed = {}) {
  const Index n = particle_count(phi_r.rows());
  const Index n_r = phi_r.cols();
  if (n_r < 1) throw config_error("greedy_sample: empty residual basis");
  if (!phi_r.allFinite()) throw config_error("greedy_sample: non-finite residual basis");
  if (n_target < 1 || n_target > n)
    throw config_error("greedy_sample: target count " + std::to_string(n_target) +
                       " outside [1, " + std::to_string(n) + "]");

  std::vector<char> picked(static_cast<size_t>(n), 0);
  std::vector<Index> chosen;
  for (const Index p : preseed) {
    if (p < 0 || p >= n) throw config_error("greedy_sample: preseed id out of range");
    if (picked[static_cast<size_t>(p)]) throw config_error("greedy_sample: duplicate preseed id");
    picked[static_cast<size_t>(p)] = 1;
    chosen.push_back(p);
  }
  if (static_cast<Index>(chosen.size()) > n_target)
    throw config_error("greedy_sample: preseed larger than target count");

  const Index n_a = n_target - static_cast<Index>(chosen.size());
  if (n_a > 0) {
    const Index n_c = std::min(n_r, 2 * n_target);
    const Index n_it = std::min(n_c, n_a);
    // Distributing the remainders unconditionally guarantees exactly n_a
    // picks and n_c working vectors over n_it iterations.
    Index nb = 0;
    for (Index it = 1; it <= n_it; ++it) {
      const Index n_ci = n_c / n_it + (it <= n_c % n_it ? 1 : 0);
      const Index n_ai = n_a / n_it + (it <= n_a % n_it ? 1 : 0);

      MatrixX<S> work(phi_r.rows(), n_ci);
      if (it == 1) {
        work = phi_r.leftCols(n_ci);
      } else {
        std::vector<Index> rows;
        rows.reserve(2 * chosen.size());
        std::vector<Index> sorted_ids = chosen;
        std::sort(sorted_ids.begin(), sorted_ids.end());
        for (const Index p : sorted_ids) rows.push_back(p);
        for (const Index p : sorted_ids) rows.push_back(p + n);
        MatrixX<S> sampled_basis(rows.size(), nb);
        MatrixX<S> sampled_rhs(rows.size(), n_ci);
        for (size_t k = 0; k < rows.size(); ++k) {
          sampled_basis.row(static_cast<Index>(k)) = phi_r.row(rows[k]).head(nb);
          sampled_rhs.row(static_cast<Index>(k)) = phi_r.block(rows[k], nb, 1, n_ci);
        }
        Eigen::CompleteOrthogonalDecomposition<MatrixX<S>> cod(sampled_basis);
        const MatrixX<S> coef = cod.solve(sampled_rhs);  // nb x n_ci
        work = phi_r.middleCols(nb, n_ci) - phi_r.leftCols(nb) * coef;
      }

      for (Index j = 0; j < n_ai; ++j) {
        Index arg = -1;
        S best = S(-1);
        for (Index l = 0; l < n; ++l) {
          if (picked[static_cast<size_t>(l)]) continue;
          S score = S(0);
          for (Index q = 0; q < n_ci; ++q)
            score += work(l, q) * work(l, q) + work(l + n, q) * work(l + n, q);
          if (score > best) {
            best = score;
            arg = l;
          }
        }
        picked[static_cast<size_t>(arg)] = 1;
        chosen.push_back(arg);
      }
      nb += n_ci;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Gappy reconstruction operator: A is the pseudo-inverse of the residual
// basis restricted to the sampled rows, so A * (P r) are generalized
// coordinates of r over the residual basis.
template <class S>
struct GnatOperator {
  std::vector<Index> sample_ids;    // sorted particle ids
  std::vector<Index> sampled_dofs;  // [ids..., ids + N...]
  MatrixX<S> A;                     // M_r x n_d

  Index n_sampled_dofs() const { return static_cast<Index>(sampled_dofs.size()); }
};

template <class S>
GnatOperator<S> build_gnat_operator(const MatrixX<S>& phi_r, const std::vector<Index>& sample_ids) {
  const Index n = particle_count(phi_r.rows());
  const Index m_r = phi_r.cols();
  if (sample_ids.empty()) throw config_error("build_gnat_operator: no sample ids");
  std::vector<Index> ids = sample_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw config_error("build_gnat_operator: duplicate sample ids");
  if (ids.front() < 0 || ids.back() >= n)
    throw config_error("build_gnat_operator: sample id out of range");
  const Index n_d = 2 * static_cast<Index>(ids.size());
  if (n_d < m_r)
    throw config_error("build_gnat_operator: " + std::to_string(n_d) +
                       " sampled dofs cannot support " + std::to_string(m_r) +
                       " residual modes (need 2 * samples >= modes)");

  GnatOperator<S> op;
  op.sample_ids = ids;
  op.sampled_dofs.reserve(static_cast<size_t>(n_d));
  for (const Index p : ids) op.sampled_dofs.push_back(p);
  for (const Index p : ids) op.sampled_dofs.push_back(p + n);

  MatrixX<S> sampled(n_d, m_r);
  for (Index k = 0; k < n_d; ++k) sampled.row(k) = phi_r.row(op.sampled_dofs[static_cast<size_t>(k)]);

  Eigen::CompleteOrthogonalDecomposition<MatrixX<S>> cod(sampled);
  if (cod.rank() < m_r) {
    const auto& perm = cod.colsPermutation().indices();
    std::string cols;
    for (Index k = cod.rank(); k < m_r; ++k)
      cols += (cols.empty() ? "" : ", ") + std::to_string(perm[k]);
    throw numerical_error("build_gnat_operator: sampled residual basis has rank " +
                          std::to_string(cod.rank()) + " < " + std::to_string(m_r) +
                          "; dependent columns: " + cols);
  }
  op.A = cod.pseudoInverse();
  return op;
}

// Quadtree over the weighted POD space with per-node circulation-weighted
// means of the basis rows and of the reference state.  Built once offline;
// surrogates for any target set are carved out of it.
template <class S>
struct WeightedPodTree {
  QuadTree<S> tree;
  MatrixX<S> node_phi_x, node_phi_y;  // nodes x M
  MatrixX<S> node_x0;                 // nodes x 2
  VectorX<S> node_gamma;
  std::vector<char> zero_gamma;       // arithmetic-mean fallback applied

  Index num_nodes() const { return static_cast<Index>(tree.nodes.size()); }
};

template <class S>
WeightedPodTree<S> build_weighted_pod_tree(const PODBasis<S>& basis, const VectorX<S>& gamma,
                                           Index leaf_capacity = 1) {
  const Index n = particle_count(basis.dim());
  if (gamma.size() != n) throw config_error("build_weighted_pod_tree: gamma size mismatch");
  const VectorX<S> w = weighted_pod_space(basis);

  WeightedPodTree<S> out;
  out.tree = build_tree<S>(state_to_points<S>(w), gamma, leaf_capacity);
  const Index nn = out.num_nodes();
  const Index m = basis.modes();
  out.node_phi_x.setZero(nn, m);
  out.node_phi_y.setZero(nn, m);
  out.node_x0.setZero(nn, 2);
  out.node_gamma.setZero(nn);
  out.zero_gamma.assign(static_cast<size_t>(nn), 0);

  std::vector<Index> members;
  for (Index id = 0; id < nn; ++id) {
    const auto& nd = out.tree.nodes[id];
    members.assign(out.tree.perm.begin() + nd.begin, out.tree.perm.begin() + nd.end);
    std::sort(members.begin(), members.end());
    // Ascending member order here must match reassign_cluster_circulation so
    // that reassigning identical circulations is a bit-exact no-op.
    S gsum = S(0);
    for (const Index p : members) gsum += gamma[p];
    out.node_gamma[id] = gsum;
    const bool fallback = (gsum == S(0));
    out.zero_gamma[static_cast<size_t>(id)] = fallback ? 1 : 0;
    for (const Index p : members) {
      const S w_p = fallback ? S(1) / S(members.size()) : gamma[p] / gsum;
      out.node_phi_x.row(id) += w_p * basis.phi.row(p);
      out.node_phi_y.row(id) += w_p * basis.phi.row(p + n);
      out.node_x0(id, 0) += w_p * basis.x_ref[p];
      out.node_x0(id, 1) += w_p * basis.x_ref[p + n];
    }
  }
  return out;
}

// Clustered source surrogate for a set of target particles.  Unique clusters
// are tree nodes deduplicated by node id in first-appearance order; each
// target also keeps the near-field ids it must pair with directly.  Rows of
// phi_tilde follow the state layout: cluster c owns rows c and c + N_c.
template <class S>
struct SurrogateSourceBasis {
  MatrixX<S> phi_tilde;   // 2 N_c x M
  VectorX<S> gamma_tilde; // N_c
  VectorX<S> x0_tilde;    // 2 N_c
  std::vector<std::int32_t> cluster_node_ids;         // provenance of each cluster
  std::vector<std::vector<Index>> cluster_membership; // sorted particle ids per cluster
  std::vector<char> zero_gamma;

  std::vector<Index> target_ids;
  std::vector<std::vector<Index>> per_target_clusters;  // indices into the cluster table
  std::vector<std::vector<Index>> per_target_direct;    // local indices into direct_ids

  // Near-field union: everything hyper-reduced evaluation needs to place
  // direct sources without touching full-order arrays.
  std::vector<Index> direct_ids;  // sorted union of per-target near fields
  MatrixX<S> direct_phi;          // 2 U x M, rows [ids; ids + U]
  VectorX<S> direct_x0;           // 2 U
  VectorX<S> direct_gamma;        // U

  Index num_clusters() const { return gamma_tilde.size(); }
  Index num_direct() const { return static_cast<Index>(direct_ids.size()); }
};

template <class S>
SurrogateSourceBasis<S> cluster_pod(const WeightedPodTree<S>& wtree, const PODBasis<S>& basis,
                                    const VectorX<S>& gamma, const std::vector<Index>& target_ids,
                                    const ClusterCriterion<S>& criterion) {
  const Index n = particle_count(basis.dim());
  if (gamma.size() != n) throw config_error("cluster_pod: gamma size mismatch");
  if (target_ids.empty()) throw config_error("cluster_pod: no targets");
  for (const Index t : target_ids)
    if (t < 0 || t >= n) throw config_error("cluster_pod: target id out of range");

  SurrogateSourceBasis<S> out;
  out.target_ids = target_ids;
  std::vector<Index> node_to_cluster(static_cast<size_t>(wtree.num_nodes()), -1);
  std::vector<char> in_direct(static_cast<size_t>(n), 0);
  std::vector<std::vector<Index>> raw_direct;
  raw_direct.reserve(target_ids.size());

  for (const Index t : target_ids) {
    ClusterList cl = collect_clusters<S>(wtree.tree, t, criterion);
    std::vector<Index> cluster_ix;
    cluster_ix.reserve(cl.cluster_nodes.size());
    for (const std::int32_t node : cl.cluster_nodes) {
      Index& ix = node_to_cluster[static_cast<size_t>(node)];
      if (ix < 0) {
        ix = static_cast<Index>(out.cluster_node_ids.size());
        out.cluster_node_ids.push_back(node);
      }
      cluster_ix.push_back(ix);
    }
    out.per_target_clusters.push_back(std::move(cluster_ix));
    for (const Index j : cl.direct_ids) in_direct[static_cast<size_t>(j)] = 1;
    raw_direct.push_back(std::move(cl.direct_ids));
  }

  for (Index j = 0; j < n; ++j)
    if (in_direct[static_cast<size_t>(j)]) out.direct_ids.push_back(j);
  std::vector<Index> direct_slot(static_cast<size_t>(n), -1);
  for (size_t u = 0; u < out.direct_ids.size(); ++u)
    direct_slot[static_cast<size_t>(out.direct_ids[u])] = static_cast<Index>(u);
  out.per_target_direct.reserve(raw_direct.size());
  for (const auto& ids : raw_direct) {
    std::vector<Index> local;
    local.reserve(ids.size());
    for (const Index j : ids) local.push_back(direct_slot[static_cast<size_t>(j)]);
    out.per_target_direct.push_back(std::move(local));
  }

  const Index n_c = static_cast<Index>(out.cluster_node_ids.size());
  const Index m = basis.modes();
  out.phi_tilde.resize(2 * n_c, m);
  out.x0_tilde.resize(2 * n_c);
  out.gamma_tilde.resize(n_c);
  out.zero_gamma.assign(static_cast<size_t>(n_c), 0);
  out.cluster_membership.resize(static_cast<size_t>(n_c));
  for (Index c = 0; c < n_c; ++c) {
    const std::int32_t node = out.cluster_node_ids[static_cast<size_t>(c)];
    const auto& nd = wtree.tree.nodes[node];
    out.phi_tilde.row(c) = wtree.node_phi_x.row(node);
    out.phi_tilde.row(c + n_c) = wtree.node_phi_y.row(node);
    out.x0_tilde[c] = wtree.node_x0(node, 0);
    out.x0_tilde[c + n_c] = wtree.node_x0(node, 1);
    out.gamma_tilde[c] = wtree.node_gamma[node];
    out.zero_gamma[static_cast<size_t>(c)] = wtree.zero_gamma[static_cast<size_t>(node)];
    auto& mem = out.cluster_membership[static_cast<size_t>(c)];
    mem.assign(wtree.tree.perm.begin() + nd.begin, wtree.tree.perm.begin() + nd.end);
    std::sort(mem.begin(), mem.end());
  }

  const Index u = out.num_direct();
  out.direct_phi.resize(2 * u, m);
  out.direct_x0.resize(2 * u);
  out.direct_gamma.resize(u);
  for (Index k = 0; k < u; ++k) {
    const Index p = out.direct_ids[static_cast<size_t>(k)];
    out.direct_phi.row(k) = basis.phi.row(p);
    out.direct_phi.row(k + u) = basis.phi.row(p + n);
    out.direct_x0[k] = basis.x_ref[p];
    out.direct_x0[k + u] = basis.x_ref[p + n];
    out.direct_gamma[k] = gamma[p];
  }
  return out;
}

// Convenience overload matching the offline pipeline's calling shape.
template <class S>
SurrogateSourceBasis<S> cluster_pod(const PODBasis<S>& basis, const VectorX<S>& gamma,
                                    const std::vector<Index>& target_ids,
                                    const ClusterCriterion<S>& criterion,
                                    Index leaf_capacity = 1) {
  return cluster_pod<S>(build_weighted_pod_tree<S>(basis, gamma, leaf_capacity), basis, gamma,
                        target_ids, criterion);
}

// Updates the surrogate for a new circulation assignment without touching
// the tree or the membership lists: cluster circulations become member sums
// and the weighted rows are recomputed with the new weights.
template <class S>
void reassign_cluster_circulation(SurrogateSourceBasis<S>& surrogate, const VectorX<S>& gamma,
                                  const PODBasis<S>& basis) {
  const Index n = particle_count(basis.dim());
  if (gamma.size() != n) throw config_error("reassign_cluster_circulation: gamma size mismatch");
  const Index n_c = surrogate.num_clusters();
  const Index m = basis.modes();
  for (Index c = 0; c < n_c; ++c) {
    const auto& mem = surrogate.cluster_membership[static_cast<size_t>(c)];
    S gsum = S(0);
    for (const Index p : mem) gsum += gamma[p];
    const bool fallback = (gsum == S(0));
    surrogate.gamma_tilde[c] = gsum;
    surrogate.zero_gamma[static_cast<size_t>(c)] = fallback ? 1 : 0;
    Eigen::RowVectorX<S> px = Eigen::RowVectorX<S>::Zero(m);
    Eigen::RowVectorX<S> py = Eigen::RowVectorX<S>::Zero(m);
    S x0x = S(0), x0y = S(0);
    for (const Index p : mem) {
      const S w_p = fallback ? S(1) / S(mem.size()) : gamma[p] / gsum;
      px += w_p * basis.phi.row(p);
      py += w_p * basis.phi.row(p + n);
      x0x += w_p * basis.x_ref[p];
      x0y += w_p * basis.x_ref[p + n];
    }
    surrogate.phi_tilde.row(c) = px;
    surrogate.phi_tilde.row(c + n_c) = py;
    surrogate.x0_tilde[c] = x0x;
    surrogate.x0_tilde[c + n_c] = x0y;
  }
  for (Index k = 0; k < surrogate.num_direct(); ++k)
    surrogate.direct_gamma[k] = gamma[surrogate.direct_ids[static_cast<size_t>(k)]];
}

}  // namespace ptrom
