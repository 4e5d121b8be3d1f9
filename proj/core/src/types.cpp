#include "cosseg/types.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>

#include "cosseg/errors.hpp"

namespace cosseg {

void PointCloud::validate() const {
  if (coords.rows() < 1) throw InvalidArgument("point cloud must contain at least one point");
  if (coords.cols() != 3 || colors.cols() != 3)
    throw ShapeError("coords and colors must have 3 columns");
  if (colors.rows() != coords.rows() || features.rows() != coords.rows())
    throw ShapeError("coords, colors and features must have the same number of rows");
  if ((colors.array() < 0.0).any() || (colors.array() > 1.0).any())
    throw InvalidArgument("colors must lie in [0,1]");
  if (!coords.allFinite() || !features.allFinite()) throw InvalidArgument("non-finite point data");
}

void SceneLabels::validate(int n_categories) const {
  if (semantic.size() != instance.size())
    throw ShapeError("semantic and instance label vectors differ in length");
  for (int s : semantic) {
    if (s < 0 || s >= n_categories)
      throw InvalidArgument("semantic label " + std::to_string(s) + " outside [0, " +
                            std::to_string(n_categories) + ")");
  }
  for (int i : instance) {
    if (i < kNoise) throw InvalidArgument("instance id below -1: " + std::to_string(i));
  }
}

bool SceneLabels::semantically_consistent() const {
  std::unordered_map<int, int> category_of;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (instance[i] < 0) continue;
    auto [it, inserted] = category_of.emplace(instance[i], semantic[i]);
    if (!inserted && it->second != semantic[i]) return false;
  }
  return true;
}

std::size_t SceneLabels::count_instances() const {
  std::vector<int> ids;
  std::copy_if(instance.begin(), instance.end(), std::back_inserter(ids), [](int v) { return v >= 0; });
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

std::vector<int> compact_ids(std::span<const int> ids) {
  std::map<int, int> remap;
  for (int v : ids) {
    if (v >= 0) remap.emplace(v, 0);
  }
  int next = 0;
  for (auto& [original, compacted] : remap) compacted = next++;

  std::vector<int> out(ids.size());
  std::transform(ids.begin(), ids.end(), out.begin(), [&](int v) { return v >= 0 ? remap.at(v) : kNoise; });
  return out;
}

SceneLabels compact_instance_ids(SceneLabels labels) {
  labels.instance = compact_ids(labels.instance);
  return labels;
}

void check_embeddings(const Matrix& embeddings) {
  if (embeddings.cols() < 2) throw InvalidArgument("embedding dimension must be at least 2");
  if (!embeddings.allFinite()) throw DomainError("non-finite embedding");
  for (Index i = 0; i < embeddings.rows(); ++i) {
    if (embeddings.row(i).squaredNorm() == 0.0)
      throw DomainError("embedding row " + std::to_string(i) + " is the zero vector");
  }
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(static_cast<Index>(rows[r]));
  return out;
}

}  // namespace cosseg
