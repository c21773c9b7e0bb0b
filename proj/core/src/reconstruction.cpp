#include "kruppa/reconstruction.hpp"

#include <cmath>
#include <limits>

namespace kruppa {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v[2], v[1],
       v[2], 0.0, -v[0],
       -v[1], v[0], 0.0;
  return s;
}

}  // namespace

Mat3 essential_from_pose(const RelativePose& pose) {
  return pose.rotation * skew(pose.translation);
}

std::array<RelativePose, 4> decompose_essential(const EssentialModel& e) {
  if (!e.is_essential(1e-7)) {
    throw Error(ErrorCode::InvalidModel,
                "matrix does not satisfy the essential-matrix property");
  }
  Eigen::JacobiSVD<Mat3> svd(e.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if (u.determinant() < 0.0) u.col(2) *= -1.0;
  if (v.determinant() < 0.0) v.col(2) *= -1.0;

  Mat3 w;
  w << 0.0, -1.0, 0.0,
       1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;

  // E = [t]x R in the classic layout; translate to the camera-center
  // convention via c = R^T t.
  const Mat3 ra = u * w * v.transpose();
  const Mat3 rb = u * w.transpose() * v.transpose();
  const Vec3 t = u.col(2).normalized();

  std::array<RelativePose, 4> out;
  out[0] = {ra, ra.transpose() * t};
  out[1] = {ra, -(ra.transpose() * t)};
  out[2] = {rb, rb.transpose() * t};
  out[3] = {rb, -(rb.transpose() * t)};
  return out;
}

TriangulatedPoint triangulate(const RelativePose& pose, const Intrinsics& k1,
                              const Intrinsics& k2, const Correspondence& c) {
  const Vec3 dir1 = (k1.inverse() * Vec3(c.x1.x(), c.x1.y(), 1.0)).normalized();
  const Vec3 dir2 =
      (pose.rotation.transpose() * (k2.inverse() * Vec3(c.x2.x(), c.x2.y(), 1.0)))
          .normalized();
  const Vec3 origin2 = pose.translation;

  // Closest points on the two rays: minimize |s dir1 - (origin2 + u dir2)|.
  const double d12 = dir1.dot(dir2);
  const double denom = 1.0 - d12 * d12;
  if (std::abs(denom) < 1e-12) {
    throw Error(ErrorCode::PointAtInfinity,
                "viewing rays are parallel (correspondence at the epipole)");
  }
  const double b1 = dir1.dot(origin2);
  const double b2 = dir2.dot(origin2);
  const double s = (b1 - d12 * b2) / denom;
  const double u = (d12 * b1 - b2) / denom;

  TriangulatedPoint out;
  out.position = 0.5 * (s * dir1 + (origin2 + u * dir2));

  const Vec3 in1 = out.position;
  const Vec3 in2 = pose.to_second_camera(out.position);
  out.depths = {in1.z(), in2.z()};

  auto reproject = [](const Intrinsics& k, const Vec3& x) {
    const Vec3 h = k.k * x;
    return Vec2(h.x() / h.z(), h.y() / h.z());
  };
  out.reprojection_errors = {
      (reproject(k1, in1) - c.x1).norm(),
      (reproject(k2, in2) - c.x2).norm(),
  };
  return out;
}

RelativePose select_pose(const std::array<RelativePose, 4>& candidates,
                         std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2) {
  if (corrs.empty()) {
    throw Error(ErrorCode::ValidationError,
                "cheirality selection needs at least one correspondence");
  }
  int best_index = -1;
  int best_count = 0;
  double best_error = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    int count = 0;
    double error = 0.0;
    for (const Correspondence& c : corrs) {
      try {
        const TriangulatedPoint p = triangulate(candidates[i], k1, k2, c);
        if (p.depths[0] > 0.0 && p.depths[1] > 0.0) {
          ++count;
          error += p.reprojection_errors[0] + p.reprojection_errors[1];
        }
      } catch (const Error&) {
        // Ray-parallel points contribute to no candidate.
      }
    }
    if (count > best_count ||
        (count == best_count && count > 0 && error < best_error)) {
      best_count = count;
      best_error = error;
      best_index = i;
    }
  }
  if (best_index < 0 || best_count == 0) {
    throw Error(ErrorCode::NoValidPose,
                "no orientation places any point in front of both cameras");
  }
  return candidates[best_index];
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace kruppa
