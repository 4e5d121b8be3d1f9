#include "cosseg/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "cosseg/errors.hpp"

namespace cosseg {

void SyntheticSceneSpec::validate() const {
  if (n_instances < 1) throw InvalidArgument("n_instances must be at least 1");
  if (n_categories < 1) throw InvalidArgument("n_categories must be at least 1");
  if (min_points_per_instance < 1 || max_points_per_instance < min_points_per_instance)
    throw InvalidArgument("points per instance range must satisfy 1 <= min <= max");
  if (!(region_size > 0.0) || !std::isfinite(region_size)) throw InvalidArgument("region_size must be positive");
  if (feature_dim < 1) throw InvalidArgument("feature_dim must be at least 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidArgument("noise_sigma must be >= 0");
}

Scene generate_scene(const SyntheticSceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto n_inst = spec.n_instances;
  const double blob_sigma = spec.region_size / (4.0 * std::sqrt(static_cast<double>(n_inst)));

  std::vector<std::array<double, 3>> palette(static_cast<std::size_t>(spec.n_categories));
  for (auto& color : palette) {
    for (double& c : color) c = 0.2 + 0.6 * unit(rng);
  }

  std::vector<std::size_t> counts(n_inst);
  std::uniform_int_distribution<std::size_t> count_dist(spec.min_points_per_instance, spec.max_points_per_instance);
  for (auto& c : counts) c = count_dist(rng);
  const std::size_t n_points = std::accumulate(counts.begin(), counts.end(), std::size_t{0});

  const auto d_f = static_cast<Index>(spec.feature_dim + 3);
  Scene scene;
  scene.n_categories = spec.n_categories;
  scene.cloud.coords.resize(static_cast<Index>(n_points), 3);
  scene.cloud.colors.resize(static_cast<Index>(n_points), 3);
  scene.cloud.features.resize(static_cast<Index>(n_points), d_f);
  scene.labels.semantic.resize(n_points);
  scene.labels.instance.resize(n_points);

  // Rows are written in a shuffled order so instances are interleaved in the file.
  std::vector<std::size_t> slot(n_points);
  std::iota(slot.begin(), slot.end(), std::size_t{0});
  std::shuffle(slot.begin(), slot.end(), rng);

  std::size_t next = 0;
  for (std::size_t k = 0; k < n_inst; ++k) {
    std::array<double, 3> center{};
    for (double& c : center) c = spec.region_size * unit(rng);
    const int category = static_cast<int>(k % static_cast<std::size_t>(spec.n_categories));
    const auto hot = static_cast<Index>(k % spec.feature_dim);

    for (std::size_t j = 0; j < counts[k]; ++j, ++next) {
      const auto row = static_cast<Index>(slot[next]);
      for (Index a = 0; a < 3; ++a) {
        const double x = center[static_cast<std::size_t>(a)] + blob_sigma * gauss(rng);
        scene.cloud.coords(row, a) = std::clamp(x, 0.0, spec.region_size);
        const double c = palette[static_cast<std::size_t>(category)][static_cast<std::size_t>(a)] + 0.05 * gauss(rng);
        scene.cloud.colors(row, a) = std::clamp(c, 0.0, 1.0);
      }
      for (Index f = 0; f < static_cast<Index>(spec.feature_dim); ++f) {
        scene.cloud.features(row, f) = (f == hot ? 1.0 : 0.0) + spec.noise_sigma * gauss(rng);
      }
      for (Index a = 0; a < 3; ++a) {
        scene.cloud.features(row, static_cast<Index>(spec.feature_dim) + a) = scene.cloud.coords(row, a) / spec.region_size;
      }
      scene.labels.semantic[slot[next]] = category;
      scene.labels.instance[slot[next]] = static_cast<int>(k);
    }
  }
  return scene;
}

}  // namespace cosseg
