#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cosseg/types.hpp"

namespace cosseg {

// Scene text format:
//   SPC1 <n_points> <d_f> <n_categories>
//   x y z r g b f_1 ... f_{d_f} sem inst      (one line per point)
//
// Label text format: one line per point, "sem inst".
//
// Reals are written in shortest round-trip form so files are bit-exact across runs.

void write_scene(std::ostream& os, const Scene& scene);
Scene read_scene(std::istream& is);

void write_labels(std::ostream& os, const SceneLabels& labels);
SceneLabels read_labels(std::istream& is);

void save_scene(const std::filesystem::path& path, const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

void save_labels(const std::filesystem::path& path, const SceneLabels& labels);

/// Reads labels from either a scene file (detected by its SPC1 header) or a label file.
SceneLabels load_labels(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_real(double value);

}  // namespace cosseg
