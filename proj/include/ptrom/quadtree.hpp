#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "ptrom/kernel.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

inline constexpr int kMaxTreeDepth = 64;

template <class S>
struct TreeNode {
  std::array<S, 4> bounds;  // x_min, x_max, y_min, y_max (square cells)
  S width;                  // side length, the larger extent at the root
  Vector2<S> centroid;      // circulation-weighted mean of member positions
  S gamma_sum;
  std::array<std::int32_t, 4> children;  // SW, SE, NW, NE; -1 when empty
  Index begin, end;                      // members are perm[begin..end)
  std::int32_t depth;
  bool centroid_fallback;  // gamma_sum was exactly zero, arithmetic mean used

  Index count() const { return end - begin; }
  bool leaf() const {
    return children[0] < 0 && children[1] < 0 && children[2] < 0 && children[3] < 0;
  }
};

// Region quadtree over 2D points.  Nodes are stored in build (preorder)
// order; the vector index is the node id, stable for a given input.
template <class S>
struct QuadTree {
  std::vector<TreeNode<S>> nodes;
  std::vector<Index> perm;               // particle ids grouped by node slices
  std::vector<Index> slot;               // slot[p]: position of particle p in perm
  std::vector<std::int32_t> leaf_node;   // leaf id holding each particle
  MatrixX<S> points;                     // copy of the build positions, N x 2

  Index size() const { return static_cast<Index>(perm.size()); }
  bool contains(std::int32_t node_id, Index p) const {
    const auto& nd = nodes[node_id];
    return nd.begin <= slot[p] && slot[p] < nd.end;
  }
};

namespace detail {

template <class S>
void finish_node(QuadTree<S>& tree, std::int32_t id, const VectorX<S>& gamma) {
  auto& nd = tree.nodes[id];
  S gsum = S(0);
  Vector2<S> weighted = Vector2<S>::Zero();
  Vector2<S> plain = Vector2<S>::Zero();
  for (Index k = nd.begin; k < nd.end; ++k) {
    const Index p = tree.perm[k];
    const Vector2<S> pos = tree.points.row(p).transpose();
    gsum += gamma[p];
    weighted += gamma[p] * pos;
    plain += pos;
  }
  nd.gamma_sum = gsum;
  nd.centroid_fallback = (gsum == S(0));
  nd.centroid = nd.centroid_fallback ? Vector2<S>(plain / S(nd.count())) : Vector2<S>(weighted / gsum);
}

template <class S>
void split_node(QuadTree<S>& tree, std::int32_t id, const VectorX<S>& gamma, Index leaf_capacity) {
  finish_node(tree, id, gamma);
  const Index begin = tree.nodes[id].begin;
  const Index end = tree.nodes[id].end;
  if (end - begin <= leaf_capacity || tree.nodes[id].depth >= kMaxTreeDepth) return;

  const std::array<S, 4> b = tree.nodes[id].bounds;
  const S cx = (b[0] + b[1]) / S(2);
  const S cy = (b[2] + b[3]) / S(2);
  // Points exactly on a split line go to the lower/left quadrant.
  std::array<std::vector<Index>, 4> buckets;
  for (Index k = begin; k < end; ++k) {
    const Index p = tree.perm[k];
    const int qx = tree.points(p, 0) <= cx ? 0 : 1;
    const int qy = tree.points(p, 1) <= cy ? 0 : 1;
    buckets[qy * 2 + qx].push_back(p);
  }
  const std::array<std::array<S, 4>, 4> child_bounds = {{
      {b[0], cx, b[2], cy},  // SW
      {cx, b[1], b[2], cy},  // SE
      {b[0], cx, cy, b[3]},  // NW
      {cx, b[1], cy, b[3]},  // NE
  }};

  Index cursor = begin;
  const std::int32_t depth = tree.nodes[id].depth;
  const S half = tree.nodes[id].width / S(2);
  for (int q = 0; q < 4; ++q) {
    if (buckets[q].empty()) continue;
    const Index child_begin = cursor;
    for (const Index p : buckets[q]) {
      tree.perm[cursor] = p;
      tree.slot[p] = cursor;
      ++cursor;
    }
    const auto child_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes[id].children[q] = child_id;
    TreeNode<S> child{};
    child.bounds = child_bounds[q];
    child.width = half;
    child.children = {-1, -1, -1, -1};
    child.begin = child_begin;
    child.end = cursor;
    child.depth = depth + 1;
    tree.nodes.push_back(child);
    split_node(tree, child_id, gamma, leaf_capacity);
  }
}

}  // namespace detail

// Builds the tree over `points` (N x 2) with circulation weights `gamma`.
// The root cell is the tight square hull; recursion stops at leaf_capacity
// particles or at the depth guard (coincident points stay in one leaf).
template <class S>
QuadTree<S> build_tree(const MatrixX<S>& points, const VectorX<S>& gamma, Index leaf_capacity) {
  const Index n = points.rows();
  if (n == 0) throw config_error("build_tree: no points");
  if (points.cols() != 2) throw config_error("build_tree: points must be N x 2");
  if (gamma.size() != n) throw config_error("build_tree: gamma size mismatch");
  if (!points.allFinite() || !gamma.allFinite()) throw config_error("build_tree: non-finite input");
  if (leaf_capacity < 1) throw config_error("build_tree: leaf_capacity must be >= 1");

  QuadTree<S> tree;
  tree.points = points;
  tree.perm.resize(n);
  tree.slot.resize(n);
  for (Index i = 0; i < n; ++i) tree.perm[i] = i, tree.slot[i] = i;

  const S x_lo = points.col(0).minCoeff(), x_hi = points.col(0).maxCoeff();
  const S y_lo = points.col(1).minCoeff(), y_hi = points.col(1).maxCoeff();
  S side = std::max(x_hi - x_lo, y_hi - y_lo);
  if (side == S(0)) side = S(1);  // all points coincide; any positive cell works
  const S cx = (x_lo + x_hi) / S(2), cy = (y_lo + y_hi) / S(2);

  TreeNode<S> root{};
  root.bounds = {cx - side / S(2), cx + side / S(2), cy - side / S(2), cy + side / S(2)};
  root.width = side;
  root.children = {-1, -1, -1, -1};
  root.begin = 0;
  root.end = n;
  root.depth = 0;
  tree.nodes.push_back(root);
  detail::split_node(tree, 0, gamma, leaf_capacity);

  tree.leaf_node.assign(n, 0);
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(tree.nodes.size()); ++id) {
    if (!tree.nodes[id].leaf()) continue;
    for (Index k = tree.nodes[id].begin; k < tree.nodes[id].end; ++k)
      tree.leaf_node[tree.perm[k]] = id;
  }
  return tree;
}

// Barnes-Hut acceptability: prune when width / distance-to-centroid <= theta.
// A target sitting on the centroid is never acceptable.
template <class S>
bool bh_prune_check(const TreeNode<S>& node, const Vector2<S>& target, S theta) {
  const S dist = (node.centroid - target).norm();
  if (dist == S(0)) return false;
  return node.width / dist <= theta;
}

// Neighborhood acceptability: prune when the source node's bounds, inflated
// by p_c * the source node's own width, do not overlap the target leaf's
// bounds.  Inflating either box by e is equivalent for axis-aligned boxes.
// Overlap is strict, so cells sharing only an edge or corner are pruned.
template <class S>
bool neighbor_prune_check(const std::array<S, 4>& source_bounds,
                          const std::array<S, 4>& target_leaf_bounds, S source_width,
                          S p_c) {
  const S e = p_c * source_width;
  const bool overlap = target_leaf_bounds[1] + e > source_bounds[0] &&
                       target_leaf_bounds[0] - e < source_bounds[1] &&
                       target_leaf_bounds[3] + e > source_bounds[2] &&
                       target_leaf_bounds[2] - e < source_bounds[3];
  return !overlap;
}

template <class S>
struct ClusterCriterion {
  enum class Kind : std::uint8_t { barnes_hut, neighbor };
  Kind kind;
  S value;  // opening ratio (barnes_hut) or neighborhood width factor (neighbor)

  static ClusterCriterion barnes_hut(S theta) {
    if (!(theta >= S(0))) throw config_error("opening ratio must be >= 0");
    return {Kind::barnes_hut, theta};
  }
  static ClusterCriterion neighbor(S p_c) {
    if (!(p_c >= S(0))) throw config_error("neighborhood width factor must be >= 0");
    return {Kind::neighbor, p_c};
  }
};

// Far-field nodes pruned for one target plus the near-field particle ids
// that must be paired directly.  Together they cover every other particle
// exactly once.
struct ClusterList {
  std::vector<std::int32_t> cluster_nodes;
  std::vector<Index> direct_ids;
};

template <class S>
ClusterList collect_clusters(const QuadTree<S>& tree, Index target,
                             const ClusterCriterion<S>& criterion) {
  if (target < 0 || target >= tree.size()) throw config_error("collect_clusters: bad target id");
  const Vector2<S> target_pos = tree.points.row(target).transpose();
  const TreeNode<S>& target_leaf = tree.nodes[tree.leaf_node[target]];

  ClusterList out;
  std::vector<std::int32_t> stack = {0};
  // Explicit preorder DFS; children pushed in reverse so SW is visited first.
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const TreeNode<S>& nd = tree.nodes[id];
    if (tree.contains(id, target)) {
      if (nd.leaf()) {
        for (Index k = nd.begin; k < nd.end; ++k)
          if (tree.perm[k] != target) out.direct_ids.push_back(tree.perm[k]);
      } else {
        for (int q = 3; q >= 0; --q)
          if (nd.children[q] >= 0) stack.push_back(nd.children[q]);
      }
      continue;
    }
    const bool prune = criterion.kind == ClusterCriterion<S>::Kind::barnes_hut
                           ? bh_prune_check(nd, target_pos, criterion.value)
                           : neighbor_prune_check(nd.bounds, target_leaf.bounds, nd.width,
                                                  criterion.value);
    if (prune) {
      out.cluster_nodes.push_back(id);
    } else if (nd.leaf()) {
      for (Index k = nd.begin; k < nd.end; ++k) out.direct_ids.push_back(tree.perm[k]);
    } else {
      for (int q = 3; q >= 0; --q)
        if (nd.children[q] >= 0) stack.push_back(nd.children[q]);
    }
  }
  std::sort(out.direct_ids.begin(), out.direct_ids.end());
  return out;
}

// Tree-accelerated induced velocity.  `tree` must have been built over the
// positions in `state`; pruned nodes contribute through their circulation-
// weighted centroid, the rest through exact pairs.
template <class S>
VectorX<S> bh_velocity(const QuadTree<S>& tree, const Eigen::Ref<const VectorX<S>>& state,
                       const ParticleSystem<S>& sys, const ClusterCriterion<S>& criterion) {
  sys.validate();
  check_state<S>(state, sys, "bh_velocity");
  const Index n = sys.size();
  if (tree.size() != n) throw config_error("bh_velocity: tree size mismatch");
  VectorX<S> f = VectorX<S>::Zero(2 * n);
  for (Index i = 0; i < n; ++i) {
    const Vector2<S> xi(state[i], state[i + n]);
    Vector2<S> v = Vector2<S>::Zero();
    const ClusterList cl = collect_clusters(tree, i, criterion);
    for (const std::int32_t id : cl.cluster_nodes) {
      const TreeNode<S>& nd = tree.nodes[id];
      v += kernel_pair<S>(xi, nd.centroid, nd.gamma_sum, sys.delta, sys.kernel_form);
    }
    for (const Index j : cl.direct_ids)
      v += kernel_pair<S>(xi, Vector2<S>(state[j], state[j + n]), sys.circulation[j], sys.delta,
                          sys.kernel_form);
    f[i] = v[0];
    f[i + n] = v[1];
  }
  if (sys.inflow) f += *sys.inflow;
  return f;
}

// Self-block velocity Jacobian of the tree-accelerated field, matching the
// pruning decisions of bh_velocity.
template <class S>
BlockDiagonalJacobian<S> bh_jacobian(const QuadTree<S>& tree,
                                     const Eigen::Ref<const VectorX<S>>& state,
                                     const ParticleSystem<S>& sys,
                                     const ClusterCriterion<S>& criterion) {
  sys.validate();
  check_state<S>(state, sys, "bh_jacobian");
  const Index n = sys.size();
  if (tree.size() != n) throw config_error("bh_jacobian: tree size mismatch");
  auto jac = BlockDiagonalJacobian<S>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Vector2<S> xi(state[i], state[i + n]);
    const ClusterList cl = collect_clusters(tree, i, criterion);
    for (const std::int32_t id : cl.cluster_nodes) {
      const TreeNode<S>& nd = tree.nodes[id];
      jac.add_block(i, kernel_pair_jacobian<S>(xi, nd.centroid, nd.gamma_sum, sys.delta,
                                               sys.kernel_form));
    }
    for (const Index j : cl.direct_ids)
      jac.add_block(i, kernel_pair_jacobian<S>(xi, Vector2<S>(state[j], state[j + n]),
                                               sys.circulation[j], sys.delta, sys.kernel_form));
  }
  return jac;
}

}  // namespace ptrom
