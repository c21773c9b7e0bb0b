#include "kruppa/selfcal.hpp"

#include <algorithm>
#include <cmath>

#include "kruppa/polynomial.hpp"

namespace kruppa {

namespace {

struct AdaptedFrames {
  Mat3 h1, h2;  // image transforms; epipoles land on (0,0,1)
  Vec3 o1, o2;  // the epipoles
};

// Point of the epipolar line other than the vertex; `mix` shifts it along
// the line toward the vertex so that points taken from distinct concurrent
// lines never end up collinear.
Vec3 real_point_on_line(const Vec3& line, const Vec3& vertex, double mix) {
  const Vec3 base = line.cross(vertex);
  if (base.norm() <= 1e-12 * line.norm() * vertex.norm()) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "epipolar line collapses onto the epipole");
  }
  const Vec3 p = base.normalized() + mix * vertex.normalized();
  return p.normalized();
}

// Frames in which three corresponding epipolar rays become the coordinate
// rays through (0,0,1): the pencil homography is then the identity and the
// tangent-pair correspondence is plain proportionality. Assumes coordinates
// of roughly unit scale (callers balance pixel-scale inputs first).
AdaptedFrames build_adapted_frames(const Mat3& f) {
  Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 o1 = svd.matrixV().col(2);
  const Vec3 o2 = svd.matrixU().col(2);

  // Two directions completing o1 to a well-conditioned basis.
  int kmin = 0;
  o1.cwiseAbs().minCoeff(&kmin);
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Vec3 b1 = o1.cross(Vec3::Unit((kmin + attempt) % 3)).normalized();
    const Vec3 b2 = o1.cross(b1).normalized();

    const Vec3 p = b1;
    const Vec3 q = b2;
    const Vec3 r = (b1 + b2 + o1.normalized()).normalized();

    Mat3 basis1;
    basis1.col(0) = p;
    basis1.col(1) = q;
    basis1.col(2) = o1;
    const Mat3 h1_0 = basis1.inverse();
    const Vec3 t1 = h1_0 * r;
    if (t1.cwiseAbs().minCoeff() <= 1e-8 * t1.cwiseAbs().maxCoeff()) continue;

    Vec3 pp, qp, rp;
    try {
      pp = real_point_on_line(f * p, o2, 0.0);
      qp = real_point_on_line(f * q, o2, 0.0);
      rp = real_point_on_line(f * r, o2, 1.0);
    } catch (const Error&) {
      continue;
    }
    Mat3 basis2;
    basis2.col(0) = pp;
    basis2.col(1) = qp;
    basis2.col(2) = o2;
    if (std::abs(basis2.determinant()) <=
        1e-10 * std::pow(basis2.cwiseAbs().maxCoeff(), 3)) {
      continue;
    }
    const Mat3 h2_0 = basis2.inverse();
    const Vec3 t2 = h2_0 * rp;
    if (t2.cwiseAbs().minCoeff() <= 1e-8 * t2.cwiseAbs().maxCoeff()) continue;

    AdaptedFrames out;
    out.h1 = Vec3(1.0 / t1[0], 1.0 / t1[1], 1.0 / t1[2]).asDiagonal() * h1_0;
    out.h2 = Vec3(1.0 / t2[0], 1.0 / t2[1], 1.0 / t2[2]).asDiagonal() * h2_0;
    out.o1 = o1;
    out.o2 = o2;
    return out;
  }
  throw Error(ErrorCode::DegenerateConfiguration,
              "could not build adapted frames for this model");
}

double cleared_ratio(double ln, double ld, double rn, double rd) {
  const double denom = std::abs(ln * rd) + std::abs(rn * ld);
  if (denom == 0.0) return 0.0;
  return (ln * rd - rn * ld) / denom;
}

Mat3 image_scaling(double s) {
  return Vec3(1.0 / s, 1.0 / s, 1.0).asDiagonal();
}

}  // namespace

KruppaResidual kruppa_residual(const EssentialModel& f, const DualConic& diac1,
                               const DualConic& diac2) {
  // Pixel coordinates crowd toward the plane at infinity in homogeneous
  // space; balance each image with the focal-magnitude scale carried by its
  // dual conic before building frames.
  auto image_scale = [](const DualConic& d) {
    const double zz = std::abs(d.m(2, 2));
    if (zz <= 0.0) {
      throw Error(ErrorCode::ValidationError, "degenerate dual conic");
    }
    return std::max(1.0, std::sqrt(std::max(std::abs(d.m(0, 0)),
                                            std::abs(d.m(1, 1))) /
                                   zz));
  };
  const double s1 = image_scale(diac1);
  const double s2 = image_scale(diac2);
  const Mat3 t1 = image_scaling(s1);
  const Mat3 t2 = image_scaling(s2);
  const Mat3 t1_inv = image_scaling(1.0 / s1);
  const Mat3 t2_inv = image_scaling(1.0 / s2);

  const Mat3 fb = t2_inv.transpose() * f.matrix * t1_inv;

  auto primal_balanced = [](const DualConic& dual, const Mat3& t) {
    Mat3 star = t * dual.m * t.transpose();  // dual conic transform
    Mat3 m = adjugate(star);
    const double scale = m.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) {
      throw Error(ErrorCode::ValidationError, "singular dual conic");
    }
    return Conic(0.5 * (m + m.transpose()) / scale);
  };
  const Conic omega1 = primal_balanced(diac1, t1);
  const Conic omega2 = primal_balanced(diac2, t2);

  const AdaptedFrames frames = build_adapted_frames(fb);
  const Conic w1 = transform_conic(omega1, frames.h1.inverse());
  const Conic w2 = transform_conic(omega2, frames.h2.inverse());
  auto unit = [](const Conic& c) { return Conic(c.m / c.m.cwiseAbs().maxCoeff()); };
  const DualConic d1 = dual_of(unit(w1));
  const DualConic d2 = dual_of(unit(w2));

  const HomPoint2 vertex(0.0, 0.0, 1.0);
  const TangentPairCoeffs a = tangent_pair_coeffs(d1, vertex);
  const TangentPairCoeffs b = tangent_pair_coeffs(d2, vertex);

  KruppaResidual out;
  out.values[0] = cleared_ratio(a.a11, a.a12, b.a11, b.a12);
  out.values[1] = cleared_ratio(a.a22, a.a12, b.a22, b.a12);

  auto on_conic = [](const Conic& w, const Vec3& x) {
    return std::abs(w.evaluate(x)) <=
           1e-10 * w.m.cwiseAbs().maxCoeff() * x.squaredNorm();
  };
  out.degenerate = on_conic(omega1, frames.o1) || on_conic(omega2, frames.o2);
  return out;
}

FocalResult focal_from_f(const EssentialModel& f, const Vec2& principal1,
                         const Vec2& principal2) {
  // Principal-point-centered coordinates.
  Mat3 t1 = Mat3::Identity(), t2 = Mat3::Identity();
  t1(0, 2) = principal1.x();
  t1(1, 2) = principal1.y();
  t2(0, 2) = principal2.x();
  t2(1, 2) = principal2.y();
  const Mat3 f_centered = t2.transpose() * f.matrix * t1;

  // Scaled coordinates x/s keep the IAC in the diag(1, 1, phi_scaled) form
  // with phi = s^2 phi_scaled; walk a deterministic scale ladder so both
  // unit-focal and pixel-focal inputs meet well-balanced frames.
  auto solve_at_scale = [&f_centered](double s, FocalResult& out) {
    const Mat3 tinv = Vec3(s, s, 1.0).asDiagonal();  // x = tinv * x_scaled
    Mat3 fc = tinv.transpose() * f_centered * tinv;
    fc /= fc.norm();

    const AdaptedFrames frames = build_adapted_frames(fc);

    // The scaled IAC is diag(1, 1, phi) up to scale; its transform into the
    // adapted frame splits into a constant and a phi-linear part.
    auto conic_parts = [](const Mat3& h) {
      const Mat3 hi = h.inverse();
      Mat3 m0 = hi.transpose() * Vec3(1, 1, 0).asDiagonal() * hi;
      Mat3 m1 = hi.transpose() * Vec3(0, 0, 1).asDiagonal() * hi;
      const double scale =
          std::max(m0.cwiseAbs().maxCoeff(), m1.cwiseAbs().maxCoeff());
      m0 /= scale;
      m1 /= scale;
      return std::pair<Mat3, Mat3>(m0, m1);
    };

    // Tangent-pair coefficients at the frame vertex (0,0,1) as polynomials
    // in phi: A11 = delta_13, A12 = delta_3, A22 = delta_23.
    struct CoeffPolys {
      Poly a11, a12, a22;
    };
    auto coeff_polys = [](const std::pair<Mat3, Mat3>& parts) {
      auto entry = [&parts](int i, int j) {
        return Poly({parts.first(i, j), parts.second(i, j)});
      };
      CoeffPolys c;
      c.a11 = entry(0, 0) * entry(2, 2) - entry(0, 2) * entry(0, 2);
      c.a12 = entry(2, 2) * entry(1, 0) - entry(1, 2) * entry(2, 0);
      c.a22 = entry(1, 1) * entry(2, 2) - entry(1, 2) * entry(1, 2);
      return c;
    };
    const CoeffPolys ca = coeff_polys(conic_parts(frames.h1));
    const CoeffPolys cb = coeff_polys(conic_parts(frames.h2));

    const Poly e1 = (ca.a11 * cb.a12 - ca.a12 * cb.a11).trimmed(1e-13);
    const Poly e2 = (ca.a22 * cb.a12 - ca.a12 * cb.a22).trimmed(1e-13);

    out = FocalResult{};
    if (std::max(e1.coeff_norm(), e2.coeff_norm()) <= 1e-10) {
      out.continuum = true;
      return;
    }

    // Independent validation: dual-conic form of the same constraint,
    // [o]_x^T diag(phi,phi,1) [o]_x proportional to fc^T diag(phi,phi,1) fc.
    const Vec3 o = frames.o1.normalized();
    Mat3 skew_o;
    skew_o << 0.0, -o[2], o[1],
              o[2], 0.0, -o[0],
              -o[1], o[0], 0.0;
    auto dual_form_residual = [&](double phi) {
      const Mat3 d = Vec3(phi, phi, 1.0).asDiagonal();
      Mat3 lhs = skew_o.transpose() * d * skew_o;
      Mat3 rhs = fc.transpose() * d * fc;
      lhs /= lhs.norm();
      rhs /= rhs.norm();
      return std::min((lhs - rhs).norm(), (lhs + rhs).norm());
    };

    std::vector<double> roots;
    auto harvest = [&roots](const Poly& primary, const Poly& other) {
      if (primary.coeff_norm() <= 1e-10) return;
      const Poly p = primary * (1.0 / primary.coeff_norm());
      for (double phi : poly_real_roots(p.trimmed(1e-12), 1e-8)) {
        if (phi <= 0.0) continue;
        const double scale = other.coeff_norm() * std::pow(1.0 + phi, 4);
        if (other.coeff_norm() > 1e-10 &&
            std::abs(other.eval(phi)) > 1e-6 * scale) {
          continue;
        }
        roots.push_back(phi);
      }
    };
    harvest(e1, e2);
    harvest(e2, e1);

    std::sort(roots.begin(), roots.end());
    for (double phi : roots) {
      if (dual_form_residual(phi) > 1e-6) continue;
      const double focal = std::sqrt(phi);
      if (!out.candidates.empty() &&
          std::abs(out.candidates.back() - focal) <= 1e-9 * (1.0 + focal)) {
        continue;
      }
      out.candidates.push_back(focal);
    }
  };

  bool any_solved = false;
  for (double s : {1.0, 32.0, 1024.0}) {
    try {
      FocalResult scaled;
      solve_at_scale(s, scaled);
      any_solved = true;
      if (scaled.continuum || !scaled.candidates.empty()) {
        FocalResult out;
        out.continuum = scaled.continuum;
        for (double c : scaled.candidates) out.candidates.push_back(s * c);
        return out;
      }
    } catch (const Error&) {
      // Frames failed at this scale; try the next one.
    }
  }
  if (any_solved) return FocalResult{};  // determined motion, no real focal

  // Every scale degenerates: the motion leaves the constraint uninformative.
  // Decide continuum vs no-solution from the dual form sampled over phi.
  Eigen::JacobiSVD<Mat3> svd(f_centered, Eigen::ComputeFullV);
  const Vec3 o = svd.matrixV().col(2).normalized();
  Mat3 skew_o;
  skew_o << 0.0, -o[2], o[1],
            o[2], 0.0, -o[0],
            -o[1], o[0], 0.0;
  FocalResult out;
  out.continuum = true;
  for (double phi : {0.25, 1.0, 4.0}) {
    const Mat3 d = Vec3(phi, phi, 1.0).asDiagonal();
    Mat3 lhs = skew_o.transpose() * d * skew_o;
    Mat3 rhs = f_centered.transpose() * d * f_centered;
    lhs /= lhs.norm();
    rhs /= rhs.norm();
    if (std::min((lhs - rhs).norm(), (lhs + rhs).norm()) > 1e-8) {
      out.continuum = false;
    }
  }
  return out;
}

}  // namespace kruppa
