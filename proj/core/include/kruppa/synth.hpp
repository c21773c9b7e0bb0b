#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kruppa/reconstruction.hpp"
#include "kruppa/solvers.hpp"

namespace kruppa {

/// Synthetic two-view scene description. Points are drawn uniformly in the
/// first camera's image rectangle ([0, 2cx] x [0, 2cy]) over the depth range
/// and kept only when visible in the second view; the pose is resampled when
/// the visible intersection stays empty.
struct SceneSpec {
  uint64_t seed = 1;
  int n_points = 20;
  std::pair<double, double> depth_range{4.0, 8.0};  // baseline units
  double rotation_magnitude = 0.2;                  // radians
  double noise_sigma = 0.0;                         // pixels
  Intrinsics intrinsics1{800.0, 800.0, 320.0, 240.0};
  Intrinsics intrinsics2{800.0, 800.0, 320.0, 240.0};
};

struct SceneTruth {
  SceneSpec spec;
  RelativePose pose;
  std::vector<Vec3> points3d;  // first-camera frame, baseline units
  std::vector<Correspondence> correspondences;
  Conic iac1, iac2;
};

SceneTruth generate_scene(const SceneSpec& spec);

}  // namespace kruppa
