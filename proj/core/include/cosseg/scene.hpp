#pragma once

#include <cstddef>
#include <cstdint>

#include "cosseg/types.hpp"

namespace cosseg {

/// Parameters of the deterministic synthetic scene generator.
struct SyntheticSceneSpec {
  std::size_t n_instances = 8;
  int n_categories = 3;
  std::size_t min_points_per_instance = 256;
  std::size_t max_points_per_instance = 256;
  double region_size = 1.0;
  std::size_t feature_dim = 8;
  double noise_sigma = 0.1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Builds a scene of isotropic Gaussian blobs, one per instance.
///
/// Blob centers are uniform in the cube [0, region_size]^3 and the blob spread is
/// region_size / (4 sqrt(n_instances)); coordinates are clamped to the cube.
/// Instance k gets category k mod n_categories. Each point's input feature is
/// the instance signature (one-hot at k mod feature_dim, plus Gaussian noise of
/// noise_sigma) followed by the coordinates divided by region_size, so the
/// feature dimension is feature_dim + 3. Point order is shuffled.
///
/// The output is a pure function of the spec.
Scene generate_scene(const SyntheticSceneSpec& spec);

}  // namespace cosseg
