#pragma once

#include <span>
#include <vector>

#include "cosseg/trainer.hpp"
#include "cosseg/types.hpp"

namespace cosseg {

struct DbscanConfig {
  double eps = 0.25;
  std::size_t min_pts = 8;
  std::size_t min_cluster_size = 35;
  double coord_weight = 1.0;

  void validate() const;
};

/// Appends per-axis min-max normalized coordinates (scaled by coord_weight) to each
/// embedding row. A degenerate axis (max == min) maps to 0.
Matrix build_cluster_features(const Matrix& embeddings, const PointCloud& cloud, double coord_weight);

/// DBSCAN with the Euclidean metric. A point is core when at least min_pts points
/// (itself included) lie within eps, inclusive. Clusters are numbered in order of
/// their lowest-index core point; a border point reachable from several clusters
/// joins the lowest-numbered one. Unreachable points get -1.
std::vector<int> dbscan(const Matrix& features, double eps, std::size_t min_pts);

/// Clusters smaller than min_cluster_size become noise; the survivors are compacted.
std::vector<int> suppress_small_clusters(std::span<const int> labels, std::size_t min_cluster_size);

/// Clusters precomputed embeddings. With per_category set, DBSCAN runs separately
/// on the points of each argmax class; instance ids are unique across classes.
SceneLabels segment_embeddings(const Matrix& embeddings, const Matrix& logits, const PointCloud& cloud,
                               bool per_category, const DbscanConfig& cfg);

SceneLabels segment(const EmbeddingHead& head, const PointCloud& cloud, bool per_category,
                    const DbscanConfig& cfg);

}  // namespace cosseg
