#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kruppa/reconstruction.hpp"
#include "kruppa/solvers.hpp"

namespace kruppa {

struct RansacConfig {
  double threshold = 1.0;   // Sampson units (pixel^2-scaled)
  int max_iterations = 1000;
  double confidence = 0.99;
  uint64_t seed = 0;
};

struct RobustResult {
  EssentialModel model;  // pixel-level model defining the inlier set
  RelativePose pose;
  std::vector<uint8_t> inlier_mask;
  int iterations_run = 0;
};

/// First-order epipolar distance: (x2^T F x1)^2 over the summed squared
/// partials. Invariant to the scale of the model matrix.
double sampson_error(const EssentialModel& model, const Correspondence& c);

/// Seeded RANSAC over five-point minimal samples; deterministic per-trial
/// substreams; consensus ranked by inlier count, then total Sampson error,
/// then trial index. Pose disambiguated by cheirality over the inliers.
RobustResult ransac_pose(std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2,
                         const RansacConfig& cfg);

struct RefineResult {
  RelativePose pose;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
};

/// Local minimization of the total Sampson error over the 5-parameter pose
/// chart (rotation tangent + translation-direction tangent); accepted steps
/// never increase the objective.
RefineResult refine_pose(const RelativePose& initial,
                         std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2,
                         int iterations = 50);

using PoseTangent = Eigen::Matrix<double, 5, 1>;

/// Chart used by the refinement: rotation exp-update composed on the left,
/// translation moved along its tangent basis and renormalized.
RelativePose pose_retract(const RelativePose& pose, const PoseTangent& step);

double pose_objective(const RelativePose& pose,
                      std::span<const Correspondence> corrs,
                      const Intrinsics& k1, const Intrinsics& k2);

/// Analytic gradient of pose_objective in the pose_retract chart at step 0.
PoseTangent pose_objective_gradient(const RelativePose& pose,
                                    std::span<const Correspondence> corrs,
                                    const Intrinsics& k1, const Intrinsics& k2);

}  // namespace kruppa
