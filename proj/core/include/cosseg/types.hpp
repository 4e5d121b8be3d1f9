#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cosseg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Instance id used for points that belong to no object.
inline constexpr int kNoise = -1;

/// Raw scene: per-point coordinates (meters), RGB colors in [0,1] and input features.
struct PointCloud {
  Matrix coords;
  Matrix colors;
  Matrix features;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  [[nodiscard]] Index feature_dim() const { return features.cols(); }

  /// Throws InvalidArgument when the invariants (row counts, 3 columns, colors in range) fail.
  void validate() const;
};

/// Per-point semantic category and instance id (GT or prediction). Instance -1 is noise.
struct SceneLabels {
  std::vector<int> semantic;
  std::vector<int> instance;

  [[nodiscard]] std::size_t size() const { return instance.size(); }

  /// Throws InvalidArgument on length mismatch, negative category or instance < -1.
  void validate(int n_categories) const;

  /// True when every instance id >= 0 maps to a single semantic id.
  [[nodiscard]] bool semantically_consistent() const;

  /// Number of distinct instance ids >= 0.
  [[nodiscard]] std::size_t count_instances() const;
};

/// A point cloud together with its ground-truth labels.
struct Scene {
  PointCloud cloud;
  SceneLabels labels;
  int n_categories = 1;
};

/// Remaps ids >= 0 onto 0..C-1 in ascending order of the original id; -1 is preserved.
std::vector<int> compact_ids(std::span<const int> ids);

SceneLabels compact_instance_ids(SceneLabels labels);

/// Embedding rows must be non-zero and have at least two columns.
void check_embeddings(const Matrix& embeddings);

/// Gathers the given rows of a matrix.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace cosseg
