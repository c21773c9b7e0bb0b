#include "kruppa/geometry.hpp"

#include <cmath>

namespace kruppa {

namespace {

// Scale-invariant zero test for quantities of polynomial degree `order` in
// the entries of the object with magnitude `scale`.
bool negligible(double value, double scale, int order, double factor = 1e-12) {
  double ref = factor;
  for (int i = 0; i < order; ++i) ref *= scale;
  return std::abs(value) <= ref;
}

}  // namespace

HomPoint2::HomPoint2(const Vec3& coords) : v(coords) {
  if (!v.allFinite() || v.isZero(0.0)) {
    throw Error(ErrorCode::ValidationError,
                "homogeneous point must be finite and nonzero");
  }
}

HomPoint2 HomPoint2::normalized() const {
  Vec3 out = v;
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  out /= std::abs(v[imax]);
  for (int i = 0; i < 3; ++i) {
    if (out[i] != 0.0) {
      if (out[i] < 0.0) out = -out;
      break;
    }
  }
  return HomPoint2(out);
}

bool HomPoint2::is_approx(const HomPoint2& other, double tol) const {
  return proj_distance(*this, other) < tol;
}

double proj_distance(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double c = a.dot(b) / (na * nb);
  const double s2 = std::max(0.0, 1.0 - c * c);
  return std::sqrt(s2);
}

double proj_distance(const HomPoint2& a, const HomPoint2& b) {
  return proj_distance(a.v, b.v);
}

Conic::Conic(const Mat3& coeffs) : m(coeffs) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !m.allFinite()) {
    throw Error(ErrorCode::ValidationError, "conic matrix must be nonzero");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::ValidationError, "conic matrix must be symmetric");
  }
  m = 0.5 * (m + m.transpose());
}

bool Conic::is_degenerate() const {
  return negligible(m.determinant(), m.cwiseAbs().maxCoeff(), 3);
}

Mat3 DualConic::delta_matrix() const {
  Mat3 out;
  out << -d23, d3, d2,
         d3, -d13, d1,
         d2, d1, -d12;
  return out;
}

Intrinsics::Intrinsics(const Mat3& cal) : k(cal) {
  const bool upper = std::abs(k(1, 0)) == 0.0 && std::abs(k(2, 0)) == 0.0 &&
                     std::abs(k(2, 1)) == 0.0;
  if (!upper || k(0, 0) <= 0.0 || k(1, 1) <= 0.0 || k(2, 2) != 1.0) {
    throw Error(ErrorCode::InvalidIntrinsics,
                "calibration must be upper triangular with positive diagonal "
                "and k(2,2) = 1");
  }
}

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy, double skew) {
  k << fx, skew, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  if (fx <= 0.0 || fy <= 0.0) {
    throw Error(ErrorCode::InvalidIntrinsics, "focal lengths must be positive");
  }
}

Mat3 adjugate(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return adj;
}

Conic iac_from_intrinsics(const Intrinsics& k) {
  const double det = k.k.determinant();
  if (negligible(det, k.k.cwiseAbs().maxCoeff(), 3)) {
    throw Error(ErrorCode::InvalidIntrinsics, "singular calibration matrix");
  }
  const Mat3 kinv = k.k.inverse();
  Mat3 omega = kinv.transpose() * kinv;
  omega = 0.5 * (omega + omega.transpose());
  return Conic(omega);
}

Intrinsics intrinsics_from_iac(const Conic& iac) {
  // Dual of the IAC is k k^T up to scale; recover k by an upper-triangular
  // Cholesky-style factorization (exchange rows/cols, factor, exchange back).
  Mat3 w = adjugate(iac.m);
  if (w(2, 2) == 0.0) {
    throw Error(ErrorCode::InvalidIntrinsics, "IAC dual has zero (3,3) entry");
  }
  w /= w(2, 2);
  w = 0.5 * (w + w.transpose());

  Mat3 j = Mat3::Zero();
  j(0, 2) = j(1, 1) = j(2, 0) = 1.0;
  const Mat3 rev = j * w * j;
  Eigen::LLT<Mat3> llt(rev);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidIntrinsics, "IAC is not definite");
  }
  const Mat3 lower = llt.matrixL();
  Mat3 k = j * lower * j;  // upper triangular with positive diagonal
  k /= k(2, 2);
  k(1, 0) = k(2, 0) = k(2, 1) = 0.0;
  return Intrinsics(k);
}

DualConic dual_of(const Conic& c) {
  const Mat3& a = c.m;
  DualConic out;
  out.m = adjugate(a);
  out.d12 = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
  out.d13 = a(0, 0) * a(2, 2) - a(0, 2) * a(0, 2);
  out.d23 = a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2);
  out.d1 = a(0, 0) * a(2, 1) - a(2, 0) * a(0, 1);
  out.d2 = a(1, 1) * a(0, 2) - a(0, 1) * a(1, 2);
  out.d3 = a(2, 2) * a(1, 0) - a(1, 2) * a(2, 0);
  out.degenerate = c.is_degenerate();
  return out;
}

TangentPairCoeffs tangent_pair_coeffs(const DualConic& delta, const HomPoint2& x) {
  const double x1 = x.v[0], x2 = x.v[1], x3 = x.v[2];
  TangentPairCoeffs out;
  out.a11 = delta.d12 * x2 * x2 + delta.d13 * x3 * x3 + 2.0 * delta.d1 * x2 * x3;
  out.a12 = delta.d3 * x3 * x3 - delta.d12 * x1 * x2 - delta.d1 * x1 * x3 -
            delta.d2 * x2 * x3;
  out.a22 = delta.d12 * x1 * x1 + delta.d23 * x3 * x3 + 2.0 * delta.d2 * x1 * x3;
  return out;
}

Vec3 bracket(const HomPoint2& d, const HomPoint2& x) {
  return d.v.cross(x.v);
}

CanonicalFrame canonical_frame(const HomPoint2& a, const HomPoint2& b,
                               const HomPoint2& c, const HomPoint2& d,
                               const HomPoint2& e, const Conic& iac) {
  Mat3 basis;
  basis.col(0) = a.normalized().v;
  basis.col(1) = b.normalized().v;
  basis.col(2) = c.normalized().v;
  const double det = basis.determinant();
  if (negligible(det, basis.cwiseAbs().maxCoeff(), 3)) {
    throw Error(ErrorCode::DegenerateBasis, "basis points are collinear");
  }
  const Mat3 h0 = basis.inverse();

  const Vec3 td = h0 * d.v;
  const double dscale = td.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (negligible(td[i], dscale, 1)) {
      throw Error(ErrorCode::GeneralPositionViolation,
                  "fourth point lies on a side of the basis triangle");
    }
  }

  CanonicalFrame out;
  out.h = Vec3(1.0 / td[0], 1.0 / td[1], 1.0 / td[2]).asDiagonal() * h0;
  out.h_inv = out.h.inverse();
  out.d = HomPoint2(1.0, 1.0, 1.0);

  const Vec3 te = out.h * e.v;
  const double escale = te.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (negligible(te[i], escale, 1)) {
      throw Error(ErrorCode::GeneralPositionViolation,
                  "fifth point lies on a side of the basis triangle");
    }
  }
  out.e = HomPoint2(te).normalized();
  out.iac_t = transform_conic(iac, out.h_inv);
  return out;
}

Conic transform_conic(const Conic& c, const Mat3& h_inv) {
  Mat3 m = h_inv.transpose() * c.m * h_inv;
  m = 0.5 * (m + m.transpose());
  return Conic(m);
}

}  // namespace kruppa
