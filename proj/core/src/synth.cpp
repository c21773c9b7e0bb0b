#include "kruppa/synth.hpp"

#include <cmath>

#include "kruppa/random.hpp"

namespace kruppa {

namespace {

bool project(const Intrinsics& k, const Vec3& x_cam, Vec2& pixel) {
  if (x_cam.z() <= 0.0) return false;
  const Vec3 h = k.k * x_cam;
  pixel = Vec2(h.x() / h.z(), h.y() / h.z());
  const double w = 2.0 * k.k(0, 2);
  const double hgt = 2.0 * k.k(1, 2);
  return pixel.x() >= 0.0 && pixel.x() <= w && pixel.y() >= 0.0 &&
         pixel.y() <= hgt;
}

}  // namespace

SceneTruth generate_scene(const SceneSpec& spec) {
  if (spec.n_points < 1 || spec.depth_range.first <= 0.0 ||
      spec.depth_range.second < spec.depth_range.first ||
      spec.noise_sigma < 0.0) {
    throw Error(ErrorCode::ValidationError, "invalid scene specification");
  }

  Rng rng(spec.seed);
  const Mat3 k1_inv = spec.intrinsics1.inverse();
  const double w1 = 2.0 * spec.intrinsics1.k(0, 2);
  const double h1 = 2.0 * spec.intrinsics1.k(1, 2);

  SceneTruth out;
  out.spec = spec;
  out.iac1 = iac_from_intrinsics(spec.intrinsics1);
  out.iac2 = iac_from_intrinsics(spec.intrinsics2);

  const int pose_attempts = 64;
  for (int attempt = 0; attempt < pose_attempts; ++attempt) {
    RelativePose pose;
    pose.rotation = rng.rotation(spec.rotation_magnitude);
    pose.translation = rng.unit_vector();

    std::vector<Vec3> points;
    std::vector<Correspondence> corrs;
    const int point_budget = 200 * spec.n_points;
    int draws = 0;
    while (static_cast<int>(points.size()) < spec.n_points &&
           draws < point_budget) {
      ++draws;
      const Vec2 pix1(rng.uniform(0.0, w1), rng.uniform(0.0, h1));
      const double depth =
          rng.uniform(spec.depth_range.first, spec.depth_range.second);
      const Vec3 ray = k1_inv * Vec3(pix1.x(), pix1.y(), 1.0);
      const Vec3 x = ray / ray.z() * depth;

      Vec2 pix2;
      if (!project(spec.intrinsics2, pose.to_second_camera(x), pix2)) continue;

      points.push_back(x);
      Correspondence c;
      c.x1 = pix1;
      c.x2 = pix2;
      corrs.push_back(c);
    }
    if (static_cast<int>(points.size()) < spec.n_points) continue;

    if (spec.noise_sigma > 0.0) {
      for (Correspondence& c : corrs) {
        c.x1 += spec.noise_sigma * Vec2(rng.normal(), rng.normal());
        c.x2 += spec.noise_sigma * Vec2(rng.normal(), rng.normal());
      }
    }
    out.pose = pose;
    out.points3d = std::move(points);
    out.correspondences = std::move(corrs);
    return out;
  }
  throw Error(ErrorCode::DegenerateConfiguration,
              "no pose with a non-empty visible frustum intersection");
}

}  // namespace kruppa
