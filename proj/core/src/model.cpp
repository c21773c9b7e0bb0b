#include "kruppa/solvers.hpp"

#include <cmath>

namespace kruppa {

const char* to_string(ModelSource source) {
  switch (source) {
    case ModelSource::KruppaClassic: return "kruppa-classic";
    case ModelSource::Modern5pt: return "modern-5pt";
    case ModelSource::SevenPoint: return "seven-point";
    case ModelSource::Theorem2: return "theorem-2";
  }
  return "unknown";
}

Mat3 canonical_form(const Mat3& m) {
  const double norm = m.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::InvalidModel, "zero model matrix");
  }
  Mat3 out = m / norm;
  double best = 0.0;
  double best_value = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(out(i, j)) > best) {
        best = std::abs(out(i, j));
        best_value = out(i, j);
      }
    }
  }
  if (best_value < 0.0) out = -out;
  return out;
}

double model_distance(const Mat3& a, const Mat3& b) {
  return (canonical_form(a) - canonical_form(b)).norm();
}

EssentialModel EssentialModel::from_matrix(const Mat3& m, ModelSource source) {
  EssentialModel out;
  out.matrix = canonical_form(m);
  out.source = source;
  Eigen::JacobiSVD<Mat3> svd(out.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.epipole1 = HomPoint2(Vec3(svd.matrixV().col(2))).normalized();
  out.epipole2 = HomPoint2(Vec3(svd.matrixU().col(2))).normalized();
  return out;
}

double EssentialModel::epipolar_residual(const Correspondence& c) const {
  const Vec3 x1(c.x1.x(), c.x1.y(), 1.0);
  const Vec3 x2(c.x2.x(), c.x2.y(), 1.0);
  return std::abs(x2.dot(matrix * x1)) / (x1.norm() * x2.norm());
}

bool EssentialModel::is_essential(double tol) const {
  Eigen::JacobiSVD<Mat3> svd(matrix);
  const Vec3 s = svd.singularValues();
  if (s[0] <= 0.0) return false;
  return (s[0] - s[1]) <= tol * s[0] && s[2] <= tol * s[0];
}

EssentialModel epipoles_to_model(const HomPoint2& o, const HomPoint2& o_prime,
                                 const PencilProjectivity& pencil,
                                 const CanonicalFrame& frame1,
                                 const CanonicalFrame& frame2,
                                 ModelSource source) {
  const Vec3 oc = frame1.to_frame(o.v);
  const Vec3 opc = frame2.to_frame(o_prime.v);

  // Consistency of the supplied projectivity with the basis-ray constraint.
  const PencilProjectivity check =
      pencil_from_epipoles(HomPoint2(oc), HomPoint2(opc));
  const double cross = pencil.h11 * check.h22 - pencil.h22 * check.h11;
  const double scale = std::abs(pencil.h11 * check.h22) +
                       std::abs(pencil.h22 * check.h11);
  if (!(scale > 0.0) || std::abs(cross) > 1e-6 * scale) {
    throw Error(ErrorCode::AssemblyError,
                "pencil projectivity inconsistent with the epipole pair");
  }

  // A point p maps to the epipolar line through o; its intersection with the
  // y3 = 0 line transforms by diag(h11, h22) and is joined back to o'.
  Mat3 intersect;
  intersect << oc[2], 0.0, -oc[0],
               0.0, oc[2], -oc[1],
               0.0, 0.0, 0.0;
  intersect.row(0) *= pencil.h11;
  intersect.row(1) *= pencil.h22;

  Mat3 skew;
  skew << 0.0, -opc[2], opc[1],
          opc[2], 0.0, -opc[0],
          -opc[1], opc[0], 0.0;

  const Mat3 f_canonical = skew * intersect;
  const Mat3 f = frame2.h.transpose() * f_canonical * frame1.h;

  EssentialModel out = EssentialModel::from_matrix(f, source);
  out.epipole1 = o.normalized();
  out.epipole2 = o_prime.normalized();
  return out;
}

}  // namespace kruppa
