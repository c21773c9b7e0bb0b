#include <algorithm>

#include "kruppa/polynomial.hpp"
#include "kruppa/solvers.hpp"

namespace kruppa {

namespace {

// Isotropic (Hartley) normalization: centroid to the origin, RMS distance
// sqrt(2). Returns the similarity T with x_normalized = T x.
Mat3 isotropic_transform(std::span<const Correspondence> corrs, bool second) {
  Vec2 centroid = Vec2::Zero();
  for (const Correspondence& c : corrs) centroid += second ? c.x2 : c.x1;
  centroid /= static_cast<double>(corrs.size());
  double rms = 0.0;
  for (const Correspondence& c : corrs) {
    rms += ((second ? c.x2 : c.x1) - centroid).squaredNorm();
  }
  rms = std::sqrt(rms / static_cast<double>(corrs.size()));
  const double s = (rms > 0.0) ? std::sqrt(2.0) / rms : 1.0;
  Mat3 t;
  t << s, 0.0, -s * centroid.x(),
       0.0, s, -s * centroid.y(),
       0.0, 0.0, 1.0;
  return t;
}

}  // namespace

std::vector<EssentialModel> solve_7pt(std::span<const Correspondence> corrs,
                                      const SolveOptions& opts) {
  if (corrs.size() != 7) {
    throw Error(ErrorCode::ArityError,
                "seven-point solver needs exactly 7 correspondences");
  }
  const Mat3 t1 = isotropic_transform(corrs, false);
  const Mat3 t2 = isotropic_transform(corrs, true);

  Eigen::Matrix<double, 7, 9> a;
  for (int r = 0; r < 7; ++r) {
    const Vec3 x1 = t1 * Vec3(corrs[r].x1.x(), corrs[r].x1.y(), 1.0);
    const Vec3 x2 = t2 * Vec3(corrs[r].x2.x(), corrs[r].x2.y(), 1.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a(r, 3 * i + j) = x2[i] * x1[j];
    }
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 7, 9>> svd(a, Eigen::ComputeFullV);
  if (svd.singularValues()[6] <= 1e-10 * svd.singularValues()[0]) {
    throw Error(ErrorCode::DegenerateInput,
                "null space dimension exceeds 2 (degenerate correspondences)");
  }
  Mat3 f1, f2;
  {
    const Eigen::Matrix<double, 9, 1> v1 = svd.matrixV().col(7);
    const Eigen::Matrix<double, 9, 1> v2 = svd.matrixV().col(8);
    f1 = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v1.data());
    f2 = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v2.data());
  }

  // det(f1 + l f2) is cubic in l; recover its coefficients by interpolation
  // at four exact nodes.
  const double nodes[4] = {-1.0, 0.0, 1.0, 2.0};
  Eigen::Matrix4d vand;
  Eigen::Vector4d dets;
  for (int i = 0; i < 4; ++i) {
    const double l = nodes[i];
    vand.row(i) << 1.0, l, l * l, l * l * l;
    dets[i] = Mat3(f1 + l * f2).determinant();
  }
  const Eigen::Vector4d cubic_coeffs = vand.fullPivLu().solve(dets);
  const Poly cubic(
      {cubic_coeffs[0], cubic_coeffs[1], cubic_coeffs[2], cubic_coeffs[3]});

  std::vector<Mat3> raw;
  for (double l : poly_real_roots(cubic.trimmed(1e-13), 1e-8)) {
    raw.push_back(f1 + l * f2);
  }
  // Leading coefficient ~ 0 means f2 itself is rank 2 (root at infinity).
  if (std::abs(cubic.coeff(3)) <= 1e-13 * cubic.coeff_norm()) {
    raw.push_back(f2);
  }

  std::vector<EssentialModel> models;
  for (const Mat3& fn : raw) {
    const Mat3 f = t2.transpose() * fn * t1;
    EssentialModel model = EssentialModel::from_matrix(f, ModelSource::SevenPoint);
    const bool duplicate =
        std::any_of(models.begin(), models.end(), [&](const EssentialModel& m) {
          return model_distance(m.matrix, model.matrix) < 1e-9;
        });
    if (!duplicate) models.push_back(std::move(model));
  }
  (void)opts;
  return models;
}

}  // namespace kruppa
