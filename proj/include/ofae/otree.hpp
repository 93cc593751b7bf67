#pragma once

// Oblique decision trees: structure, HHCART / RandCART induction against a
// regression target (variance-reduction criterion), routing, and signed
// root-to-leaf paths.
//
// Routing rule: <w, x> >= threshold goes right, otherwise left. A step of a
// signed path therefore satisfies sign * <w, x> >= sign * threshold, with the
// left-branch inequality taken non-strict.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ofae/error.hpp"
#include "ofae/numkit.hpp"
#include "ofae/transforms.hpp"

namespace ofae {

enum class TreeKind { hhcart, randcart };

inline std::string_view to_string(TreeKind kind) {
  return kind == TreeKind::hhcart ? "hhcart" : "randcart";
}

inline std::optional<TreeKind> parse_tree_kind(std::string_view s) {
  if (s == "hhcart") return TreeKind::hhcart;
  if (s == "randcart") return TreeKind::randcart;
  return std::nullopt;
}

/// (feature index, coefficient) pairs in increasing index order.
using SparseWeights = std::vector<std::pair<std::size_t, double>>;

struct ObliqueNode {
  std::size_t id = 0;
  SparseWeights weights;
  double threshold = 0.0;
  std::optional<std::size_t> left;
  std::optional<std::size_t> right;
  std::optional<std::size_t> leaf_id;

  bool is_leaf() const noexcept { return leaf_id.has_value(); }

  double project(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [i, w] : weights) s += w * x[i];
    return s;
  }

  friend bool operator==(const ObliqueNode&, const ObliqueNode&) = default;
};

struct PathStep {
  std::size_t node_id = 0;
  int sign = 1;  // +1 right, -1 left

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct SignedPath {
  std::vector<PathStep> steps;
  std::size_t terminal_leaf = 0;

  friend bool operator==(const SignedPath&, const SignedPath&) = default;
};

struct TreeFitParams {
  std::size_t max_depth = 3;
  TransformKind transform = TransformKind::eig;  // HHCART only
};

class ObliqueTree {
 public:
  ObliqueTree() = default;

  /// Validates the arena (root at index 0, ids equal to positions, every node
  /// reachable exactly once, dense leaf ids, unit-free but nonzero weights)
  /// and throws SchemaError on any violation.
  ObliqueTree(TreeKind kind, std::vector<std::size_t> feature_subset, std::vector<ObliqueNode> nodes,
              std::optional<Matrix> rotation = std::nullopt)
      : kind_(kind),
        feature_subset_(std::move(feature_subset)),
        nodes_(std::move(nodes)),
        rotation_(std::move(rotation)) {
    index();
  }

  TreeKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& feature_subset() const noexcept { return feature_subset_; }
  const std::vector<ObliqueNode>& nodes() const noexcept { return nodes_; }
  const std::optional<Matrix>& rotation() const noexcept { return rotation_; }
  std::size_t root() const noexcept { return 0; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaf_paths_.size(); }
  std::size_t internal_count() const noexcept { return nodes_.size() - leaf_paths_.size(); }

  /// Signed path followed by x (full feature dimension).
  SignedPath apply(std::span<const double> x) const {
    SignedPath path;
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
      const ObliqueNode& node = nodes_[id];
      const bool right = node.project(x) >= node.threshold;
      path.steps.push_back({id, right ? 1 : -1});
      id = right ? *node.right : *node.left;
    }
    path.terminal_leaf = *nodes_[id].leaf_id;
    return path;
  }

  const SignedPath& path_of_leaf(std::size_t leaf_id) const {
    if (leaf_id >= leaf_paths_.size()) {
      throw Error(ErrorKind::UnknownLeaf, "leaf " + std::to_string(leaf_id) + " of " +
                                              std::to_string(leaf_paths_.size()));
    }
    return leaf_paths_[leaf_id];
  }

  /// Largest feature index referenced by any weight, plus one.
  std::size_t min_feature_count() const {
    std::size_t m = 0;
    for (const auto& node : nodes_)
      for (const auto& [i, w] : node.weights) m = std::max(m, i + 1);
    for (auto f : feature_subset_) m = std::max(m, f + 1);
    return m;
  }

  friend bool operator==(const ObliqueTree& a, const ObliqueTree& b) {
    return a.kind_ == b.kind_ && a.feature_subset_ == b.feature_subset_ && a.nodes_ == b.nodes_ &&
           a.rotation_ == b.rotation_;
  }

 private:
  void index() {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::SchemaError, "tree: " + msg); };
    if (nodes_.empty()) fail("no nodes");
    std::vector<int> parents(nodes_.size(), 0);
    std::size_t leaves = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const ObliqueNode& n = nodes_[i];
      if (n.id != i) fail("node id " + std::to_string(n.id) + " at position " + std::to_string(i));
      if (n.is_leaf()) {
        if (n.left || n.right || !n.weights.empty()) fail("leaf " + std::to_string(i) + " has children or weights");
        ++leaves;
        continue;
      }
      if (!n.left || !n.right) fail("internal node " + std::to_string(i) + " missing a child");
      if (*n.left >= nodes_.size() || *n.right >= nodes_.size() || *n.left == 0 || *n.right == 0 ||
          *n.left == *n.right) {
        fail("internal node " + std::to_string(i) + " has invalid children");
      }
      ++parents[*n.left];
      ++parents[*n.right];
      if (n.weights.empty()) fail("internal node " + std::to_string(i) + " has no weights");
      double norm = 0.0;
      for (std::size_t k = 0; k < n.weights.size(); ++k) {
        if (k > 0 && n.weights[k].first <= n.weights[k - 1].first) fail("weights not strictly increasing");
        if (!std::isfinite(n.weights[k].second)) fail("non-finite weight");
        norm += n.weights[k].second * n.weights[k].second;
      }
      if (!(norm > 0.0)) fail("zero weight vector");
      if (!std::isfinite(n.threshold)) fail("non-finite threshold");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (parents[i] != 1) fail("node " + std::to_string(i) + " referenced " + std::to_string(parents[i]) + " times");
    if (parents[0] != 0) fail("root referenced as a child");

    leaf_paths_.assign(leaves, SignedPath{});
    std::vector<bool> seen(leaves, false);
    std::size_t visited = 0;
    depth_ = 0;
    std::vector<PathStep> prefix;
    // iterative DFS so corrupted inputs cannot recurse unboundedly
    struct Frame {
      std::size_t id;
      std::size_t depth;
      int stage;
    };
    std::vector<Frame> stack{{0, 0, 0}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      const ObliqueNode& n = nodes_[f.id];
      if (f.stage == 0) {
        ++visited;
        if (visited > nodes_.size()) fail("cycle detected");
        depth_ = std::max(depth_, f.depth);
        if (n.is_leaf()) {
          const std::size_t leaf = *n.leaf_id;
          if (leaf >= leaves || seen[leaf]) fail("leaf ids are not dense 0..leaf_count-1");
          seen[leaf] = true;
          leaf_paths_[leaf] = SignedPath{prefix, leaf};
          stack.pop_back();
          continue;
        }
        f.stage = 1;
        prefix.push_back({f.id, -1});
        stack.push_back({*n.left, f.depth + 1, 0});
      } else if (f.stage == 1) {
        f.stage = 2;
        prefix.back().sign = 1;
        stack.push_back({*n.right, f.depth + 1, 0});
      } else {
        prefix.pop_back();
        stack.pop_back();
      }
    }
    if (visited != nodes_.size()) fail("unreachable nodes");
  }

  TreeKind kind_ = TreeKind::hhcart;
  std::vector<std::size_t> feature_subset_;
  std::vector<ObliqueNode> nodes_;
  std::optional<Matrix> rotation_;
  std::vector<SignedPath> leaf_paths_;
  std::size_t depth_ = 0;
};

// ---------------------------------------------------------------------------
// Induction

struct AxisSplit {
  double threshold = 0.0;
  double score = 0.0;
};

/// Best variance-reduction threshold over midpoints of consecutive distinct
/// values; ties resolve to the smallest threshold. Returns nullopt when no
/// candidate reduces the squared error by more than 1e-12.
inline std::optional<AxisSplit> best_axis_split(std::span<const double> x_col, std::span<const double> y) {
  const std::size_t n = x_col.size();
  if (n != y.size()) throw Error(ErrorKind::LengthMismatch, "best_axis_split: x and y lengths differ");
  if (n < 2) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x_col[a] < x_col[b] || (x_col[a] == x_col[b] && a < b);
  });

  double total = 0.0;
  double total_sq = 0.0;
  for (double v : y) {
    total += v;
    total_sq += v * v;
  }
  const double nd = static_cast<double>(n);
  const double sse_parent = std::max(0.0, total_sq - total * total / nd);

  std::optional<AxisSplit> best;
  double left = 0.0;
  double left_sq = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double yi = y[order[i]];
    left += yi;
    left_sq += yi * yi;
    const double a = x_col[order[i]];
    const double b = x_col[order[i + 1]];
    if (!(a < b)) continue;

    const double nl = static_cast<double>(i + 1);
    const double nr = nd - nl;
    const double right = total - left;
    const double right_sq = total_sq - left_sq;
    const double sse_l = std::max(0.0, left_sq - left * left / nl);
    const double sse_r = std::max(0.0, right_sq - right * right / nr);
    const double score = sse_parent - sse_l - sse_r;
    if (!best || score > best->score) {
      double thr = a + (b - a) / 2.0;
      if (!(thr > a)) thr = b;
      best = AxisSplit{thr, score};
    }
  }
  if (!best || !(best->score > 1e-12)) return std::nullopt;
  return best;
}

namespace detail {

inline double variance(std::span<const double> y, std::span<const std::size_t> idx) {
  double m = 0.0;
  for (auto i : idx) m += y[i];
  m /= static_cast<double>(idx.size());
  double s = 0.0;
  for (auto i : idx) s += (y[i] - m) * (y[i] - m);
  return s / static_cast<double>(idx.size());
}

// Candidate split expressed in the tree's local (feature-subset) coordinates.
struct LocalSplit {
  Vector weights;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const TreeFitParams& params,
              std::span<const std::size_t> subset)
      : x_(x), y_(y), params_(params), subset_(subset.begin(), subset.end()) {
    if (x_.rows() == 0 || x_.cols() == 0) throw Error(ErrorKind::EmptyData, "tree fit on empty data");
    if (x_.rows() != y_.size()) throw Error(ErrorKind::LengthMismatch, "tree fit: rows(x) != len(y)");
    if (params_.max_depth < 1) throw Error(ErrorKind::ConfigInvalid, "max_depth must be >= 1");
    if (subset_.empty()) {
      subset_.resize(x_.cols());
      std::iota(subset_.begin(), subset_.end(), std::size_t{0});
    }
    if (subset_.size() != x_.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "feature subset size differs from column count");
    }
  }

  template <typename SplitFinder>
  ObliqueTree build(TreeKind kind, SplitFinder&& finder, std::optional<Matrix> rotation) {
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0, finder);
    return ObliqueTree(kind, subset_, std::move(nodes_), std::move(rotation));
  }

  const Matrix& x() const { return x_; }
  std::span<const double> y() const { return y_; }

 private:
  template <typename SplitFinder>
  std::size_t grow(const std::vector<std::size_t>& idx, std::size_t depth, SplitFinder& finder) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    nodes_.back().id = id;

    std::optional<LocalSplit> split;
    if (depth < params_.max_depth && idx.size() >= 2 && variance(y_, idx) >= 1e-12) {
      split = finder(idx);
    }

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    SparseWeights local;
    if (split) {
      for (std::size_t j = 0; j < split->weights.size(); ++j)
        if (split->weights[j] != 0.0) local.emplace_back(j, split->weights[j]);
      ObliqueNode probe;
      probe.weights = local;
      for (auto i : idx) (probe.project(x_.row(i)) >= split->threshold ? right_idx : left_idx).push_back(i);
      if (left_idx.empty() || right_idx.empty()) split.reset();
    }

    if (!split) {
      nodes_[id].leaf_id = leaves_++;
      return id;
    }

    SparseWeights embedded;
    embedded.reserve(local.size());
    for (const auto& [j, w] : local) embedded.emplace_back(subset_[j], w);
    nodes_[id].weights = std::move(embedded);
    nodes_[id].threshold = split->threshold;
    const std::size_t l = grow(left_idx, depth + 1, finder);
    const std::size_t r = grow(right_idx, depth + 1, finder);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const double> y_;
  TreeFitParams params_;
  std::vector<std::size_t> subset_;
  std::vector<ObliqueNode> nodes_;
  std::size_t leaves_ = 0;
};

// Best axis-parallel split over every column of `data` restricted to idx.
// basis_column(c) gives the node weight vector (local coordinates) of column c.
template <typename BasisColumn>
std::optional<LocalSplit> search_columns(const Matrix& data, BasisColumn&& basis_column,
                                         std::span<const double> y_all, std::span<const std::size_t> idx,
                                         std::optional<LocalSplit> incumbent) {
  Vector col(idx.size());
  Vector yy(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) yy[i] = y_all[idx[i]];
  for (std::size_t c = 0; c < data.cols(); ++c) {
    for (std::size_t i = 0; i < idx.size(); ++i) col[i] = data(idx[i], c);
    auto s = best_axis_split(col, yy);
    if (s && (!incumbent || s->score > incumbent->score)) {
      incumbent = LocalSplit{basis_column(c), s->threshold, s->score};
    }
  }
  return incumbent;
}

inline auto columns_of(const Matrix& basis) {
  return [&basis](std::size_t c) { return basis.column(c); };
}

}  // namespace detail

/// HHCART: at every node the dominant direction d of the node's samples is
/// reflected onto e_1 with H = householder(d, 0); axis-parallel splits are
/// searched over all columns of X H as well as over the original columns,
/// and the better-scoring split wins (original space on ties). An oblique
/// split's weights are the chosen column of H.
///
/// `x` holds only the tree's feature columns; `feature_subset` maps them to
/// indices of the full feature space (identity when empty).
inline ObliqueTree fit_hhcart(const Matrix& x, std::span<const double> y, const TreeFitParams& params, Rng& rng,
                              std::span<const std::size_t> feature_subset = {}) {
  detail::TreeBuilder builder(x, y, params, feature_subset);
  auto finder = [&](std::span<const std::size_t> idx) -> std::optional<detail::LocalSplit> {
    const Matrix sub = x.select_rows(idx);
    std::vector<std::size_t> local(idx.size());
    std::iota(local.begin(), local.end(), std::size_t{0});
    Vector yy(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) yy[i] = y[idx[i]];

    const std::size_t p = x.cols();
    auto unit = [p](std::size_t c) {
      Vector e(p, 0.0);
      e[c] = 1.0;
      return e;
    };
    auto best = detail::search_columns(sub, unit, yy, local, std::nullopt);
    try {
      const Direction d = extract_direction(params.transform, sub, rng);
      // X H = X - 2 (X u) u^T without forming H; column c of H is e_c - 2 u_c u
      if (const auto u = householder_vector(d.vector, 0)) {
        Matrix reflected = sub;
        for (std::size_t r = 0; r < sub.rows(); ++r) {
          const double xu = 2.0 * dot(sub.row(r), *u);
          auto row = reflected.row(r);
          for (std::size_t c = 0; c < p; ++c) row[c] -= xu * (*u)[c];
        }
        auto h_column = [&](std::size_t c) {
          Vector col(p);
          for (std::size_t k = 0; k < p; ++k) col[k] = (k == c ? 1.0 : 0.0) - 2.0 * (*u)[c] * (*u)[k];
          return col;
        };
        best = detail::search_columns(reflected, h_column, yy, local, best);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateData) throw;
    }
    return best;
  };
  return builder.build(TreeKind::hhcart, finder, std::nullopt);
}

/// Axis-parallel CART in the coordinates X Q for a fixed orthogonal Q; node
/// weights are columns of Q. This is RandCART with the rotation supplied.
inline ObliqueTree fit_rotated(const Matrix& x, std::span<const double> y, const TreeFitParams& params,
                               const Matrix& rotation, std::span<const std::size_t> feature_subset = {}) {
  if (rotation.rows() != x.cols() || rotation.cols() != x.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "rotation must be p x p for p tree features");
  }
  detail::TreeBuilder builder(x, y, params, feature_subset);
  const Matrix rotated = matmul(x, rotation);
  auto finder = [&](std::span<const std::size_t> idx) {
    return detail::search_columns(rotated, detail::columns_of(rotation), y, idx, std::nullopt);
  };
  return builder.build(TreeKind::randcart, finder, rotation);
}

/// RandCART: one random rotation per tree, Q from the QR factorization of a
/// standard Gaussian matrix, then axis-parallel induction in X Q.
inline ObliqueTree fit_randcart(const Matrix& x, std::span<const double> y, const TreeFitParams& params, Rng& rng,
                                std::span<const std::size_t> feature_subset = {}) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::EmptyData, "tree fit on empty data");
  for (int attempt = 0;; ++attempt) {
    try {
      const Matrix q = qr_orthogonal(gaussian_matrix(x.cols(), x.cols(), rng));
      return fit_rotated(x, y, params, q, feature_subset);
    } catch (const Error& e) {
      // a singular Gaussian draw has probability zero; redraw a few times
      if (e.kind() != ErrorKind::RankDeficient || attempt >= 8) throw;
    }
  }
}

}  // namespace ofae
