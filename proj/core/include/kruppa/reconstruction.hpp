#pragma once

#include <array>
#include <span>

#include "kruppa/solvers.hpp"

namespace kruppa {

/// Relative orientation of the second camera. `translation` is the position
/// of the second projection center in the first camera's frame, unit norm
/// (the baseline length is the free scale and is fixed to 1). A world point
/// X (first-camera frame) projects to K2 * rotation * (X - translation).
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::UnitX();

  Vec3 to_second_camera(const Vec3& x) const {
    return rotation * (x - translation);
  }
};

/// E = rotation * [translation]_x up to scale; this is the x2^T E x1 = 0
/// convention used throughout.
Mat3 essential_from_pose(const RelativePose& pose);

/// The four orientation candidates behind an essential matrix: both baseline
/// signs and the pair related by the half-turn about the baseline.
/// Throws InvalidModel unless the two nonzero singular values agree.
std::array<RelativePose, 4> decompose_essential(const EssentialModel& e);

struct TriangulatedPoint {
  Vec3 position = Vec3::Zero();           // first-camera frame, baseline units
  std::array<double, 2> depths{};          // per-camera z
  std::array<double, 2> reprojection_errors{};  // pixels
};

/// Midpoint of the common perpendicular of the two viewing rays.
TriangulatedPoint triangulate(const RelativePose& pose, const Intrinsics& k1,
                              const Intrinsics& k2, const Correspondence& c);

/// Cheirality selection: the candidate with the most points at positive
/// depth in both views; ties broken by total reprojection error, then by
/// candidate index. Throws NoValidPose if no candidate realizes any point.
RelativePose select_pose(const std::array<RelativePose, 4>& candidates,
                         std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2);

double rotation_angle_between(const Mat3& a, const Mat3& b);  // radians

}  // namespace kruppa
