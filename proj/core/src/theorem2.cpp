#include <algorithm>
#include <cmath>
#include <limits>

#include "kruppa/polynomial.hpp"
#include "kruppa/solvers.hpp"

namespace kruppa {

namespace {

// Coefficient table of (a1 u + a2 v + a3)(b1 u + b2 v + b3) in the Poly2
// (s, t) = (u, v) layout.
Poly2 bilinear_quad(const Vec3& a, const Vec3& b) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
  c(2, 0) = a[0] * b[0];
  c(0, 2) = a[1] * b[1];
  c(1, 1) = a[0] * b[1] + a[1] * b[0];
  c(1, 0) = a[0] * b[2] + a[2] * b[0];
  c(0, 1) = a[1] * b[2] + a[2] * b[1];
  c(0, 0) = a[2] * b[2];
  return Poly2(c);
}

Poly2 add_constant(const Poly2& p, double v) {
  Eigen::MatrixXd c = p.table();
  c(0, 0) += v;
  return Poly2(c);
}

// A point of the (complex) line other than the pencil vertex.
Vec3c point_on_line(const Vec3c& line, const Vec3& vertex) {
  Vec3c best = Vec3c::Zero();
  double best_score = -1.0;
  for (int k = 0; k < 3; ++k) {
    Vec3c axis = Vec3c::Zero();
    axis[k] = cdouble(1, 0);
    const Vec3c p = line.cross(axis);
    const double pn = p.norm();
    if (pn <= 1e-14 * line.norm()) continue;
    const Vec3c cross = p.cross(vertex.cast<cdouble>());
    const double score = cross.norm() / (pn * vertex.norm());
    if (score > best_score) {
      best_score = score;
      best = p;
    }
  }
  if (best_score <= 1e-10) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "tangent line coincides with the epipole pencil vertex");
  }
  return best;
}

}  // namespace

Thm2Result solve_thm2(std::span<const Correspondence> corrs, const Conic& iac1,
                      double focal2, const SolveOptions& opts) {
  if (corrs.size() != 7) {
    throw Error(ErrorCode::ArityError,
                "the heptagon solver needs exactly 7 correspondences");
  }
  if (!(focal2 > 0.0)) {
    throw Error(ErrorCode::ValidationError, "focal2 must be positive");
  }

  Mat3 dual1 = adjugate(iac1.m);
  dual1 /= dual1.cwiseAbs().maxCoeff();

  Thm2Result result;
  for (EssentialModel& branch : solve_7pt(corrs, opts)) {
    ++result.branches;
    int branch_solutions = 0;
    try {
      const Vec3 o = branch.epipole1.v;
      const Mat3& f = branch.matrix;

      // Two generators of the line pencil through the epipole.
      int k1 = -1, k2 = -1;
      {
        Vec3 mags = o.cwiseAbs() / o.cwiseAbs().maxCoeff();
        double m1 = std::numeric_limits<double>::infinity();
        double m2 = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
          if (mags[k] < m1) {
            m2 = m1; k2 = k1;
            m1 = mags[k]; k1 = k;
          } else if (mags[k] < m2) {
            m2 = mags[k]; k2 = k;
          }
        }
      }
      const Vec3 la = o.cross(Vec3::Unit(k1)).normalized();
      const Vec3 lb = o.cross(Vec3::Unit(k2)).normalized();

      // Tangency along the pencil l(mu) = la + mu lb; the dual conic of a
      // definite IAC keeps both coefficients positive, so the pair is a
      // complex conjugate one.
      const double qa = lb.dot(dual1 * lb);
      const double qb = la.dot(dual1 * lb);
      const double qc = la.dot(dual1 * la);
      const cdouble disc = std::sqrt(cdouble(qb * qb - qa * qc, 0.0));
      if (std::abs(qa) <= 1e-14 * dual1.norm()) {
        ++result.skipped_branches;
        result.branch_solution_counts.push_back(0);
        continue;
      }
      const cdouble mu = (-qb + disc) / qa;
      const Vec3c tangent = la.cast<cdouble>() + mu * lb.cast<cdouble>();

      // Corresponding epipolar line in view 2 through any point of the
      // tangent except the epipole.
      const Vec3c p = point_on_line(tangent, o);
      Vec3c mapped = f.cast<cdouble>() * p;
      int imax = 0;
      double mmax = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(mapped[i]) > mmax) {
          mmax = std::abs(mapped[i]);
          imax = i;
        }
      }
      if (!(mmax > 0.0)) {
        ++result.skipped_branches;
        result.branch_solution_counts.push_back(0);
        continue;
      }
      mapped /= mapped[imax];

      // Tangency of `mapped` to the view-2 conic of calibration
      // (focal2, principal point): the complex equation
      //   (l . (u, v, 1))^2 + focal2^2 (l1^2 + l2^2) = 0
      // splits into two real quadratics in the principal point. Work in
      // focal-scaled coordinates to keep the quartic balanced.
      const double fs = focal2;
      const Vec3 alpha(fs * mapped[0].real(), fs * mapped[1].real(),
                       mapped[2].real());
      const Vec3 beta(fs * mapped[0].imag(), fs * mapped[1].imag(),
                      mapped[2].imag());
      const double c_re = alpha[0] * alpha[0] + alpha[1] * alpha[1] -
                          beta[0] * beta[0] - beta[1] * beta[1];
      const double c_im = 2.0 * (alpha[0] * beta[0] + alpha[1] * beta[1]);
      const Poly2 q_re = add_constant(
          Poly2(bilinear_quad(alpha, alpha).table() -
                bilinear_quad(beta, beta).table()),
          c_re);
      const Poly2 q_im = add_constant(Poly2(2.0 * bilinear_quad(alpha, beta).table()), c_im);

      const Poly quartic = sylvester_resultant_t(q_re, q_im, 4).trimmed(1e-10);
      result.enumerated_orientations += 2 * quartic.degree();

      const double qscale = std::max(q_re.coeff_norm(), q_im.coeff_norm());
      for (double u_scaled : poly_real_roots(quartic, 1e-8)) {
        const CPoly slice = q_re.at_s(u_scaled).trimmed(1e-13);
        double best = std::numeric_limits<double>::infinity();
        double v_best = 0.0;
        for (const cdouble& t : poly_roots(slice)) {
          if (std::abs(t.imag()) > 1e-8 * (1.0 + std::abs(t.real()))) continue;
          const double val = std::abs(q_im.eval(u_scaled, t.real()));
          if (val < best) {
            best = val;
            v_best = t.real();
          }
        }
        if (!std::isfinite(best)) continue;
        cdouble ps(u_scaled, 0.0), pt(v_best, 0.0);
        polish_common_zero(q_re, q_im, ps, pt, nullptr);
        if (std::abs(ps.imag()) > 1e-8 * (1.0 + std::abs(ps.real()))) continue;
        if (std::abs(q_re.eval(ps, pt)) > 1e-7 * qscale ||
            std::abs(q_im.eval(ps, pt)) > 1e-7 * qscale) {
          continue;
        }
        const Vec2 pp(fs * ps.real(), fs * pt.real());
        Thm2Solution sol;
        sol.fundamental = branch;
        sol.principal_point2 = pp;
        sol.focal2 = focal2;
        sol.conic2 = iac_from_intrinsics(Intrinsics(fs, fs, pp.x(), pp.y()));
        result.solutions.push_back(std::move(sol));
        ++branch_solutions;
      }
    } catch (const Error&) {
      ++result.skipped_branches;
    }
    result.branch_solution_counts.push_back(branch_solutions);
  }
  return result;
}

}  // namespace kruppa
