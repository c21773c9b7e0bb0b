#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kruppa/reconstruction.hpp"
#include "kruppa/solvers.hpp"
#include "kruppa/synth.hpp"

namespace kruppa {

/// Scene file: intrinsics (row-major 3x3 plus image size), the matched pixel
/// pairs (objects with x1, y1, x2, y2) and optionally the generating truth.
struct SceneFile {
  std::optional<Intrinsics> intrinsics1;
  std::optional<Intrinsics> intrinsics2;
  std::vector<Correspondence> correspondences;
  std::optional<RelativePose> truth_pose;
  std::vector<Vec3> truth_points;
};

void write_scene(const std::string& path, const SceneTruth& truth);
SceneFile read_scene(const std::string& path);

/// Accepts any file carrying a top-level "correspondences" array (bare
/// correspondence files and scene files alike).
std::vector<Correspondence> read_correspondences(const std::string& path);
void write_correspondences(const std::string& path,
                           std::span<const Correspondence> corrs);

Intrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const Intrinsics& k,
                      int width, int height);

struct ResultEntry {
  Mat3 matrix = Mat3::Zero();  // row-major in the file
  std::string source;
  double residual = 0.0;
};

struct ResultFile {
  std::vector<ResultEntry> models;  // sorted by residual ascending
  std::optional<Mat3> rotation;
  std::optional<Vec3> translation;
  std::vector<uint8_t> inlier_mask;
  std::optional<int> iterations;
  std::vector<double> focal_candidates;
  bool focal_continuum = false;
  std::vector<Vec2> principal_points;
  std::optional<int> enumerated_orientations;
};

/// Path "-" (or empty) writes to standard output.
void write_result(const std::string& path, const ResultFile& result);
ResultFile read_result(const std::string& path);

}  // namespace kruppa
