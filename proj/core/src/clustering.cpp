#include "cosseg/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "cosseg/errors.hpp"

namespace cosseg {
namespace {

// Uniform grid with cell size eps over a projection onto at most three axes.
// Projected distance never exceeds the full distance, so the 3^k surrounding
// cells hold every eps-neighbor; candidates are then checked in full.
class ProjectedGrid {
 public:
  ProjectedGrid(const Matrix& points, double eps) : points_(points), eps_(eps), eps2_(eps * eps) {
    const Index dims = points.cols();
    std::vector<std::pair<double, Index>> spread;
    for (Index a = 0; a < dims; ++a) {
      spread.emplace_back(points.col(a).maxCoeff() - points.col(a).minCoeff(), a);
    }
    std::stable_sort(spread.begin(), spread.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t k = 0; k < spread.size() && k < 3; ++k) {
      axes_.push_back(spread[k].second);
      origin_.push_back(points.col(spread[k].second).minCoeff());
    }
    for (Index i = 0; i < points.rows(); ++i) cells_[cell_of(i)].push_back(static_cast<std::size_t>(i));
  }

  // Indices j (ascending, including i) with |p_i - p_j|^2 <= eps^2.
  void neighbors(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const Key home = cell_of(static_cast<Index>(i));
    const std::size_t k = axes_.size();
    std::size_t combos = 1;
    for (std::size_t a = 0; a < k; ++a) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      Key key = home;
      std::size_t c = code;
      for (std::size_t a = 0; a < k; ++a, c /= 3) key[a] += static_cast<long long>(c % 3) - 1;
      const auto it = cells_.find(key);
      if (it == cells_.end()) continue;
      for (std::size_t j : it->second) {
        if ((points_.row(static_cast<Index>(i)) - points_.row(static_cast<Index>(j))).squaredNorm() <= eps2_)
          out.push_back(j);
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  using Key = std::array<long long, 3>;

  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ULL;
      for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
      return h;
    }
  };

  Key cell_of(Index i) const {
    Key key{0, 0, 0};
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const double q = std::floor((points_(i, axes_[a]) - origin_[a]) / eps_);
      key[a] = static_cast<long long>(std::clamp(q, -1e15, 1e15));
    }
    return key;
  }

  const Matrix& points_;
  double eps_;
  double eps2_;
  std::vector<Index> axes_;
  std::vector<double> origin_;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells_;
};

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace

void DbscanConfig::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive and finite");
  if (min_pts < 1) throw InvalidArgument("min_pts must be at least 1");
  if (min_cluster_size < 1) throw InvalidArgument("min_cluster_size must be at least 1");
  if (!(coord_weight >= 0.0) || !std::isfinite(coord_weight)) throw InvalidArgument("coord_weight must be >= 0");
}

Matrix build_cluster_features(const Matrix& embeddings, const PointCloud& cloud, double coord_weight) {
  if (embeddings.rows() != cloud.coords.rows() || cloud.coords.cols() != 3)
    throw ShapeError("embeddings and point cloud differ in size");
  const Index n = embeddings.rows();
  const Index d = embeddings.cols();
  Matrix out(n, d + 3);
  out.leftCols(d) = embeddings;
  for (Index a = 0; a < 3; ++a) {
    const double lo = cloud.coords.col(a).minCoeff();
    const double hi = cloud.coords.col(a).maxCoeff();
    if (hi > lo) {
      out.col(d + a) = coord_weight * (cloud.coords.col(a).array() - lo) / (hi - lo);
    } else {
      out.col(d + a).setZero();
    }
  }
  return out;
}

std::vector<int> dbscan(const Matrix& features, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<int> labels(n, kNoise);
  if (n == 0) return labels;

  const ProjectedGrid grid(features, eps);
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> nbrs;
  std::vector<std::size_t> more;
  std::deque<std::size_t> frontier;
  int next_id = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i]) continue;
    visited[i] = true;
    grid.neighbors(i, nbrs);
    if (nbrs.size() < min_pts) continue;

    const int id = next_id++;
    labels[i] = id;
    frontier.assign(nbrs.begin(), nbrs.end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = id;
      if (visited[j]) continue;
      visited[j] = true;
      grid.neighbors(j, more);
      if (more.size() >= min_pts) frontier.insert(frontier.end(), more.begin(), more.end());
    }
  }
  return labels;
}

std::vector<int> suppress_small_clusters(std::span<const int> labels, std::size_t min_cluster_size) {
  std::unordered_map<int, std::size_t> size;
  for (int v : labels) {
    if (v >= 0) ++size[v];
  }
  std::vector<int> kept(labels.begin(), labels.end());
  for (int& v : kept) {
    if (v >= 0 && size[v] < min_cluster_size) v = kNoise;
  }
  return compact_ids(kept);
}

SceneLabels segment_embeddings(const Matrix& embeddings, const Matrix& logits, const PointCloud& cloud,
                               bool per_category, const DbscanConfig& cfg) {
  cfg.validate();
  if (logits.rows() != embeddings.rows()) throw ShapeError("logits and embeddings differ in size");
  check_embeddings(embeddings);

  const Matrix unit = embeddings.rowwise().normalized();
  const Matrix features = build_cluster_features(unit, cloud, cfg.coord_weight);

  SceneLabels out;
  out.semantic = argmax_rows(logits);
  out.instance.assign(out.semantic.size(), kNoise);

  if (!per_category) {
    out.instance = suppress_small_clusters(dbscan(features, cfg.eps, cfg.min_pts), cfg.min_cluster_size);
    return out;
  }

  const int n_classes = static_cast<int>(logits.cols());
  int offset = 0;
  for (int k = 0; k < n_classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.semantic.size(); ++i) {
      if (out.semantic[i] == k) members.push_back(i);
    }
    if (members.empty()) continue;
    const auto local = suppress_small_clusters(dbscan(select_rows(features, members), cfg.eps, cfg.min_pts),
                                               cfg.min_cluster_size);
    int most = -1;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (local[m] < 0) continue;
      out.instance[members[m]] = offset + local[m];
      most = std::max(most, local[m]);
    }
    offset += most + 1;
  }
  return out;
}

SceneLabels segment(const EmbeddingHead& head, const PointCloud& cloud, bool per_category, const DbscanConfig& cfg) {
  const HeadOutput out = forward(head, cloud);
  return segment_embeddings(out.embeddings, out.logits, cloud, per_category, cfg);
}

}  // namespace cosseg
