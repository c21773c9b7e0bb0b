#include "kruppa/kruppa_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kruppa/random.hpp"

namespace kruppa {

namespace {

struct EquationSides {
  double ln, ld, rn, rd;

  double cleared() const { return ln * rd - rn * ld; }
  double residual() const {
    const double denom = std::abs(ln * rd) + std::abs(rn * ld);
    if (denom == 0.0) return 0.0;
    return cleared() / denom;
  }
  // Both sides of the unabridged equation vanish individually (numerators
  // jointly, or denominators jointly) — the non-general-case signature.
  bool vacuous(double strict) const {
    const double m = std::max({std::abs(ln), std::abs(ld), std::abs(rn),
                               std::abs(rd), 1e-30});
    const bool numerators = std::abs(ln) <= strict * m && std::abs(rn) <= strict * m;
    const bool denominators = std::abs(ld) <= strict * m && std::abs(rd) <= strict * m;
    return numerators || denominators;
  }
};

EquationSides point_eq_sides(const Vec3& g, const Vec3& gp, const Vec3& x,
                             const Vec3& xp) {
  EquationSides s;
  s.ln = (g[2] * x[0] - g[0] * x[2]) * x[1];
  s.ld = (g[2] * x[1] - g[1] * x[2]) * x[0];
  s.rn = (gp[2] * xp[0] - gp[0] * xp[2]) * xp[1];
  s.rd = (gp[2] * xp[1] - gp[1] * xp[2]) * xp[0];
  return s;
}

EquationSides conic_eq_sides_a(const TangentPairCoeffs& t,
                               const TangentPairCoeffs& tp, const Vec3& x,
                               const Vec3& xp) {
  EquationSides s;
  s.ln = t.a11 * x[0];
  s.ld = t.a12 * x[1];
  s.rn = tp.a11 * xp[0];
  s.rd = tp.a12 * xp[1];
  return s;
}

EquationSides conic_eq_sides_b(const TangentPairCoeffs& t,
                               const TangentPairCoeffs& tp, const Vec3& x,
                               const Vec3& xp) {
  EquationSides s;
  s.ln = t.a22 * x[1];
  s.ld = t.a12 * x[0];
  s.rn = tp.a22 * xp[1];
  s.rd = tp.a12 * xp[0];
  return s;
}

void require_general_position(const Vec3& x, const char* which) {
  const double scale = x.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(x[i]) <= 1e-12 * scale) {
      throw Error(ErrorCode::GeneralPositionViolation,
                  std::string(which) + " has a zero coordinate");
    }
  }
}

// Symmetric coefficient matrices of the three quadratic forms entering the
// constraint pair: u^T M u.
Mat3 form_p(const DualConic& d) {
  Mat3 m = Mat3::Zero();
  m(1, 1) = d.d13;
  m(2, 2) = d.d12;
  m(1, 2) = m(2, 1) = d.d1;
  return m;
}

Mat3 form_q(const DualConic& d) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = d.d23;
  m(2, 2) = d.d12;
  m(0, 2) = m(2, 0) = d.d2;
  return m;
}

Mat3 form_r(const DualConic& d) {
  Mat3 m = Mat3::Zero();
  m(2, 2) = d.d12;
  m(1, 2) = m(2, 1) = 0.5 * d.d1;
  m(0, 2) = m(2, 0) = 0.5 * d.d2;
  m(0, 1) = m(1, 0) = -0.5 * d.d3;
  return m;
}

Poly3 quadratic_poly(const Mat3& m) {
  Poly3 p;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const double c = (i == j) ? m(i, i) : m(i, j) + m(j, i);
      int e[3] = {0, 0, 0};
      e[i] += 1;
      e[j] += 1;
      p.add_term(e[0], e[1], e[2], c);
    }
  }
  return p;
}

Poly3 compose_quadratic(const Mat3& m, const std::array<Poly3, 3>& comps) {
  Poly3 out;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const double c = (i == j) ? m(i, i) : m(i, j) + m(j, i);
      if (c == 0.0) continue;
      out = out + (comps[i] * comps[j]) * c;
    }
  }
  return out;
}

cdouble eval_form(const Mat3& m, const Vec3c& u) {
  cdouble acc(0, 0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) acc += m(i, j) * u[i] * u[j];
  }
  return acc;
}

Vec3c normalize_complex(const Vec3c& u) {
  int imax = 0;
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::abs(u[i]);
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best == 0.0) return u;
  return u / u[imax];
}

double proj_distance_c(const Vec3c& a, const Vec3c& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  const cdouble inner = (a.conjugate().transpose() * b)(0, 0);
  const double c = std::abs(inner) / (na * nb);
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

bool nearly_real(const Vec3c& u_normalized, double imag_tol) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(u_normalized[i].imag()) >
        imag_tol * (1.0 + std::abs(u_normalized[i].real()))) {
      return false;
    }
  }
  return true;
}

int degree_at_tol(const Poly3& p, double tol) {
  const double ref = tol * p.coeff_norm();
  int deg = -1;
  for (const auto& [key, v] : p.terms()) {
    if (std::abs(v) > ref) deg = std::max(deg, key[0] + key[1] + key[2]);
  }
  return deg;
}

}  // namespace

HomPoint2 cremona_phi(const HomPoint2& x) {
  const Vec3& v = x.v;
  const Vec3 image(v[1] * v[2], v[2] * v[0], v[0] * v[1]);
  const double scale = v.cwiseAbs().maxCoeff();
  if (image.cwiseAbs().maxCoeff() <= 1e-12 * scale * scale) {
    throw Error(ErrorCode::UndefinedImage,
                "reciprocal transform undefined: point on two sides of the "
                "coordinate triangle");
  }
  return HomPoint2(image);
}

std::array<double, 2> residual_point_eq(const HomPoint2& x,
                                        const HomPoint2& x_prime,
                                        const CanonicalFrame& frame1,
                                        const CanonicalFrame& frame2) {
  require_general_position(x.v, "epipole");
  require_general_position(x_prime.v, "epipole");
  const EquationSides sd =
      point_eq_sides(frame1.d.v, frame2.d.v, x.v, x_prime.v);
  const EquationSides se =
      point_eq_sides(frame1.e.v, frame2.e.v, x.v, x_prime.v);
  return {sd.residual(), se.residual()};
}

ConicResiduals residual_conic_eq(const HomPoint2& x, const HomPoint2& x_prime,
                                 const DualConic& delta,
                                 const DualConic& delta_prime) {
  require_general_position(x.v, "epipole");
  require_general_position(x_prime.v, "epipole");
  const TangentPairCoeffs t = tangent_pair_coeffs(delta, x);
  const TangentPairCoeffs tp = tangent_pair_coeffs(delta_prime, x_prime);

  ConicResiduals out;
  out.r_a = conic_eq_sides_a(t, tp, x.v, x_prime.v).residual();
  out.r_b = conic_eq_sides_b(t, tp, x.v, x_prime.v).residual();

  auto coincident = [](const TangentPairCoeffs& c) {
    const double scale =
        c.a11 * c.a11 + 2.0 * c.a12 * c.a12 + c.a22 * c.a22;
    const double disc = c.a12 * c.a12 - c.a11 * c.a22;
    return std::abs(disc) <= 1e-10 * scale;
  };
  out.tangency_degenerate = coincident(t) || coincident(tp);
  return out;
}

SigmaMap::SigmaMap(const Vec3& d, const Vec3& e, const Vec3& d_prime,
                   const Vec3& e_prime)
    : d_(d), e_(e), dp_(d_prime), ep_(e_prime) {
  // [g u]_1 = g2 u2 - g3 u3 and cyclic; weighted by the primed points.
  auto weighted_lines = [](const Vec3& g, const Vec3& gp) {
    std::array<Poly3, 3> lines;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      Poly3 br;
      int ej[3] = {0, 0, 0}, ek[3] = {0, 0, 0};
      ej[j] = 1;
      ek[k] = 1;
      br.add_term(ej[0], ej[1], ej[2], g[j]);
      br.add_term(ek[0], ek[1], ek[2], -g[k]);
      lines[i] = br * gp[i];
    }
    return lines;
  };
  const std::array<Poly3, 3> ld = weighted_lines(d_, dp_);
  const std::array<Poly3, 3> le = weighted_lines(e_, ep_);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    comps_[i] = ld[j] * le[k] - ld[k] * le[j];
  }
  scale_ = 0.0;
  for (const Poly3& c : comps_) scale_ = std::max(scale_, c.coeff_norm());
}

SigmaMap SigmaMap::between(const CanonicalFrame& frame1,
                           const CanonicalFrame& frame2) {
  return SigmaMap(frame1.d.v, frame1.e.v, frame2.d.v, frame2.e.v);
}

Vec3 SigmaMap::apply_raw(const Vec3& u) const {
  auto br = [&u](const Vec3& g) {
    return Vec3(g[1] * u[1] - g[2] * u[2], g[2] * u[2] - g[0] * u[0],
                g[0] * u[0] - g[1] * u[1]);
  };
  const Vec3 line_d = dp_.cwiseProduct(br(d_));
  const Vec3 line_e = ep_.cwiseProduct(br(e_));
  return line_d.cross(line_e);
}

Vec3c SigmaMap::apply_raw(const Vec3c& u) const {
  auto br = [&u](const Vec3& g) {
    return Vec3c(g[1] * u[1] - g[2] * u[2], g[2] * u[2] - g[0] * u[0],
                 g[0] * u[0] - g[1] * u[1]);
  };
  Vec3c line_d = br(d_);
  Vec3c line_e = br(e_);
  for (int i = 0; i < 3; ++i) {
    line_d[i] *= dp_[i];
    line_e[i] *= ep_[i];
  }
  return line_d.cross(line_e);
}

HomPoint2 sigma_map(const HomPoint2& u, const CanonicalFrame& frame1,
                    const CanonicalFrame& frame2) {
  const SigmaMap sigma = SigmaMap::between(frame1, frame2);
  const Vec3 un = u.normalized().v;
  const Vec3 image = sigma.apply_raw(un);
  if (image.cwiseAbs().maxCoeff() <= 1e-12 * sigma.scale()) {
    throw Error(ErrorCode::UndefinedImage,
                "point is a base point of the birational map");
  }
  return HomPoint2(image);
}

SexticPair sextic_curves(const CanonicalFrame& frame1,
                         const CanonicalFrame& frame2, const DualConic& delta,
                         const DualConic& delta_prime) {
  const SigmaMap sigma = SigmaMap::between(frame1, frame2);

  const Poly3 p = quadratic_poly(form_p(delta));
  const Poly3 q = quadratic_poly(form_q(delta));
  const Poly3 r = quadratic_poly(form_r(delta));
  const Poly3 rp_sigma = compose_quadratic(form_r(delta_prime), sigma.components());
  const Poly3 pp_sigma = compose_quadratic(form_p(delta_prime), sigma.components());
  const Poly3 qp_sigma = compose_quadratic(form_q(delta_prime), sigma.components());

  Poly3 a = p * rp_sigma - pp_sigma * r;
  Poly3 b = q * rp_sigma - qp_sigma * r;
  const double na = a.coeff_norm();
  const double nb = b.coeff_norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::DegenerateConfiguration, "constraint curves vanish");
  }
  a = (a * (1.0 / na)).pruned();
  b = (b * (1.0 / nb)).pruned();
  if (degree_at_tol(a, 1e-9) != 6 || degree_at_tol(b, 1e-9) != 6) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "constraint curves collapse below degree 6");
  }

  SexticPair out;
  out.a_hom = a;
  out.b_hom = b;
  out.a = dehomogenize(a, 2);
  out.b = dehomogenize(b, 2);
  return out;
}

std::array<HomPoint2, 3> sigma_base_points(const CanonicalFrame& frame1,
                                           const CanonicalFrame& frame2) {
  const SigmaMap sigma = SigmaMap::between(frame1, frame2);
  auto reciprocal = [](const Vec3& v) {
    return HomPoint2(1.0 / v[0], 1.0 / v[1], 1.0 / v[2]).normalized();
  };
  const HomPoint2 dbar = reciprocal(frame1.d.v);
  const HomPoint2 ebar = reciprocal(frame1.e.v);

  const std::array<Poly3, 3>& comps = sigma.components();
  const double comp_scale = sigma.scale();

  for (uint64_t attempt = 0; attempt < 4; ++attempt) {
    Rng rng(0xBA5EDull + attempt * 977);
    const Mat3 chart = rng.random_rotation();
    const Poly2 q1 = dehomogenize(comps[0].substitute(chart) * (1.0 / comp_scale), 2);
    const Poly2 q2 = dehomogenize(comps[1].substitute(chart) * (1.0 / comp_scale), 2);
    if (q1.deg_t() < 2 || q2.deg_t() < 2) continue;
    if (std::abs(q1.coeff(0, 2)) < 1e-9 * q1.coeff_norm() ||
        std::abs(q2.coeff(0, 2)) < 1e-9 * q2.coeff_norm()) {
      continue;
    }
    const std::vector<cdouble> quartic_roots = sylvester_pencil_roots(q1, q2);
    if (quartic_roots.size() != 4) continue;

    std::vector<Vec3c> points;
    for (const cdouble& s : quartic_roots) {
      const CPoly slice = q1.at_s(s).trimmed(1e-13);
      cdouble t_best(0, 0);
      double best = std::numeric_limits<double>::infinity();
      for (const cdouble& t : poly_roots(slice)) {
        const double v = std::abs(q2.eval(s, t));
        if (v < best) {
          best = v;
          t_best = t;
        }
      }
      cdouble ps = s, pt = t_best;
      polish_common_zero(q1, q2, ps, pt, nullptr);
      points.push_back(normalize_complex(chart * Vec3c(ps, pt, cdouble(1, 0))));
    }
    if (points.size() != 4) continue;

    auto drop_nearest = [&points](const Vec3& anchor) {
      const Vec3c a = anchor.cast<cdouble>();
      size_t best_i = 0;
      double best = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < points.size(); ++i) {
        const double dist = proj_distance_c(points[i], a);
        if (dist < best) {
          best = dist;
          best_i = i;
        }
      }
      points.erase(points.begin() + best_i);
    };
    drop_nearest(dbar.v);
    drop_nearest(ebar.v);

    // Of the remaining two intersections, the connected-pole image is the
    // one on the third component conic.
    size_t best_i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < points.size(); ++i) {
      const double v = std::abs(comps[2].eval(points[i])) / comp_scale;
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    const Vec3c pbar_c = points[best_i];
    if (best > 1e-5) continue;
    if (!nearly_real(pbar_c, 1e-6)) continue;

    const Vec3 pbar_v(pbar_c[0].real(), pbar_c[1].real(), pbar_c[2].real());
    return {dbar, ebar, HomPoint2(pbar_v).normalized()};
  }
  throw Error(ErrorCode::DegenerateConfiguration,
              "component conics in special position: base points not isolated");
}

EpipoleSystem::EpipoleSystem(const CanonicalFrame& frame1,
                             const CanonicalFrame& frame2)
    : frame1_(frame1),
      frame2_(frame2),
      sigma_(SigmaMap::between(frame1, frame2)) {
  auto normalized_conic = [](const Conic& c) {
    return Conic(c.m / c.m.cwiseAbs().maxCoeff());
  };
  delta_ = dual_of(normalized_conic(frame1.iac_t));
  delta_prime_ = dual_of(normalized_conic(frame2.iac_t));
  sextics_ = sextic_curves(frame1_, frame2_, delta_, delta_prime_);
  conic_c_ = quadratic_poly(form_r(delta_));
  conic_c_prime_ = quadratic_poly(form_r(delta_prime_));
  base_points_ = sigma_base_points(frame1_, frame2_);
}

IntersectionClass EpipoleSystem::classify(const Vec3c& u_in, const Options& opts,
                                          double anchor_radius) const {
  const Vec3c u = normalize_complex(u_in);

  static const Vec3 triangle[3] = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (const Vec3& anchor : triangle) {
    if (proj_distance_c(u, anchor.cast<cdouble>()) < anchor_radius) {
      return IntersectionClass::FundamentalTriangle;
    }
  }
  for (const HomPoint2& anchor : base_points_) {
    if (proj_distance_c(u, anchor.v.cast<cdouble>()) < anchor_radius) {
      return IntersectionClass::SigmaBasePoint;
    }
  }

  const Vec3c image = sigma_.apply_raw(u);
  double image_mag = 0.0;
  for (int i = 0; i < 3; ++i) image_mag = std::max(image_mag, std::abs(image[i]));
  if (image_mag <= opts.strict_tol * sigma_.scale()) {
    return IntersectionClass::SigmaBasePoint;
  }

  const Vec3c image_n = normalize_complex(image);
  const double r_here = std::abs(eval_form(form_r(delta_), u)) /
                        std::max(conic_c_.coeff_norm(), 1e-300);
  const double r_there = std::abs(eval_form(form_r(delta_prime_), image_n)) /
                         std::max(conic_c_prime_.coeff_norm(), 1e-300);
  if (r_here <= opts.strict_tol && r_there <= opts.strict_tol) {
    return IntersectionClass::ConicCSpurious;
  }
  return IntersectionClass::Solution;
}

namespace {

struct IntersectionSet {
  std::vector<IntersectionPoint> points;
  std::vector<cdouble> sroots;  // aligned with points
  Mat3 chart = Mat3::Identity();
  int eliminant_degree = 0;
};

}  // namespace

static BezoutAudit attribute_masses(const EpipoleSystem& sys,
                                    const IntersectionSet& set,
                                    const EpipoleSystem::Options& opts);

static IntersectionSet solve_intersections(const SexticPair& sextics,
                                           const EpipoleSystem::Options& opts) {
  for (uint64_t attempt = 0; attempt < 3; ++attempt) {
    Rng rng(derive_seed(opts.chart_seed, attempt));
    const Mat3 chart = rng.random_rotation();
    const Poly2 a = dehomogenize(sextics.a_hom.substitute(chart), 2);
    const Poly2 b = dehomogenize(sextics.b_hom.substitute(chart), 2);
    if (std::abs(a.coeff(0, 6)) < 1e-8 * a.coeff_norm() ||
        std::abs(b.coeff(0, 6)) < 1e-8 * b.coeff_norm()) {
      continue;
    }
    const std::vector<cdouble> sroots = sylvester_pencil_roots(a, b);
    if (sroots.size() != 36) continue;

    IntersectionSet out;
    out.chart = chart;
    out.eliminant_degree = static_cast<int>(sroots.size());
    const double curve_scale = std::max(a.coeff_norm(), b.coeff_norm());
    for (const cdouble& s : sroots) {
      // Candidate t values from the slices of both curves, cheapest first;
      // polish pairs until one converges onto a joint zero.
      std::vector<cdouble> t_candidates;
      for (const cdouble& t : poly_roots(a.at_s(s).trimmed(1e-13))) {
        t_candidates.push_back(t);
      }
      std::sort(t_candidates.begin(), t_candidates.end(),
                [&](const cdouble& x, const cdouble& y) {
                  return std::abs(b.eval(s, x)) < std::abs(b.eval(s, y));
                });
      if (t_candidates.size() > 2) t_candidates.resize(2);
      for (const cdouble& t : poly_roots(b.at_s(s).trimmed(1e-13))) {
        t_candidates.push_back(t);
      }
      if (t_candidates.empty()) continue;

      IntersectionPoint pt;
      cdouble best_s = s, best_t = t_candidates.front();
      double best = std::numeric_limits<double>::infinity();
      bool best_polished = false;
      for (size_t ci = 0; ci < t_candidates.size(); ++ci) {
        cdouble ps = s, ptt = t_candidates[ci];
        bool polished = false;
        polish_common_zero(a, b, ps, ptt, &polished);
        const double r = std::max(std::abs(a.eval(ps, ptt)),
                                  std::abs(b.eval(ps, ptt))) +
                         0.1 * curve_scale * std::abs(ps - s);
        if (r < best) {
          best = r;
          best_s = ps;
          best_t = ptt;
          best_polished = polished;
        }
        // The two closest candidates suffice when one truly converges.
        if (ci >= 1 && best_polished && best <= 1e-12 * curve_scale) break;
      }
      pt.polished = best_polished;
      pt.u = normalize_complex(chart.cast<cdouble>() *
                               Vec3c(best_s, best_t, cdouble(1, 0)));
      pt.real = nearly_real(pt.u, opts.imag_tol);
      out.points.push_back(pt);
      out.sroots.push_back(s);
    }
    if (out.points.size() == 36) return out;
  }
  throw Error(ErrorCode::DegenerateConfiguration,
              "could not isolate the 36 constraint-curve intersections");
}

std::vector<IntersectionPoint> EpipoleSystem::intersections(
    const Options& opts) const {
  IntersectionSet set = solve_intersections(sextics_, opts);
  for (IntersectionPoint& p : set.points) {
    p.classification = classify(p.u, opts, opts.cluster_radius);
  }
  return set.points;
}

namespace {

// Factors of one side of a cleared equation together with their gradients.
struct SideTerms {
  double n = 0, d = 0;  // numerator and denominator factors
  Vec3 dn = Vec3::Zero(), dd = Vec3::Zero();
};

SideTerms point_eq_side(const Vec3& g, const Vec3& x) {
  SideTerms s;
  s.n = (g[2] * x[0] - g[0] * x[2]) * x[1];
  s.d = (g[2] * x[1] - g[1] * x[2]) * x[0];
  s.dn = Vec3(g[2] * x[1], g[2] * x[0] - g[0] * x[2], -g[0] * x[1]);
  s.dd = Vec3(g[2] * x[1] - g[1] * x[2], g[2] * x[0], -g[1] * x[0]);
  return s;
}

struct TangentTerms {
  double a11 = 0, a12 = 0, a22 = 0;
  Vec3 da11 = Vec3::Zero(), da12 = Vec3::Zero(), da22 = Vec3::Zero();
};

TangentTerms tangent_terms(const DualConic& dc, const Vec3& x) {
  TangentTerms t;
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  t.a11 = dc.d12 * x2 * x2 + dc.d13 * x3 * x3 + 2.0 * dc.d1 * x2 * x3;
  t.a12 = dc.d3 * x3 * x3 - dc.d12 * x1 * x2 - dc.d1 * x1 * x3 - dc.d2 * x2 * x3;
  t.a22 = dc.d12 * x1 * x1 + dc.d23 * x3 * x3 + 2.0 * dc.d2 * x1 * x3;
  t.da11 = Vec3(0.0, 2.0 * (dc.d12 * x2 + dc.d1 * x3),
                2.0 * (dc.d13 * x3 + dc.d1 * x2));
  t.da12 = Vec3(-dc.d12 * x2 - dc.d1 * x3, -dc.d12 * x1 - dc.d2 * x3,
                2.0 * dc.d3 * x3 - dc.d1 * x1 - dc.d2 * x2);
  t.da22 = Vec3(2.0 * (dc.d12 * x1 + dc.d2 * x3), 0.0,
                2.0 * (dc.d23 * x3 + dc.d2 * x1));
  return t;
}

// Newton iteration with analytic Jacobian on the four cleared constraint
// equations, in the affine charts pinning the largest coordinate of each
// epipole. Quadratic convergence onto simple general-case zeros.
void polish_epipole_pair(const CanonicalFrame& f1, const CanonicalFrame& f2,
                         const DualConic& d1, const DualConic& d2, Vec3& o,
                         Vec3& op) {
  int c1 = 0, c2 = 0;
  o.cwiseAbs().maxCoeff(&c1);
  op.cwiseAbs().maxCoeff(&c2);
  o /= o[c1];
  op /= op[c2];

  struct Eval {
    Eigen::Matrix<double, 4, 1> r;
    Eigen::Matrix<double, 4, 3> jx, jxp;  // gradients w.r.t. both points
  };
  auto evaluate = [&](const Vec3& x, const Vec3& xp) {
    Eval e;
    // Ray constraints through the 4th and 5th points.
    const Vec3 gs[2] = {f1.d.v, f1.e.v};
    const Vec3 gps[2] = {f2.d.v, f2.e.v};
    for (int k = 0; k < 2; ++k) {
      const SideTerms l = point_eq_side(gs[k], x);
      const SideTerms rr = point_eq_side(gps[k], xp);
      e.r[k] = l.n * rr.d - rr.n * l.d;
      e.jx.row(k) = (rr.d * l.dn - rr.n * l.dd).transpose();
      e.jxp.row(k) = (l.n * rr.dd - l.d * rr.dn).transpose();
    }
    // Tangent-pair constraints.
    const TangentTerms t = tangent_terms(d1, x);
    const TangentTerms tp = tangent_terms(d2, xp);
    {
      const double ln = t.a11 * x[0], ld = t.a12 * x[1];
      const double rn = tp.a11 * xp[0], rd = tp.a12 * xp[1];
      const Vec3 dln = x[0] * t.da11 + t.a11 * Vec3::UnitX();
      const Vec3 dld = x[1] * t.da12 + t.a12 * Vec3::UnitY();
      const Vec3 drn = xp[0] * tp.da11 + tp.a11 * Vec3::UnitX();
      const Vec3 drd = xp[1] * tp.da12 + tp.a12 * Vec3::UnitY();
      e.r[2] = ln * rd - rn * ld;
      e.jx.row(2) = (rd * dln - rn * dld).transpose();
      e.jxp.row(2) = (ln * drd - ld * drn).transpose();
    }
    {
      const double ln = t.a22 * x[1], ld = t.a12 * x[0];
      const double rn = tp.a22 * xp[1], rd = tp.a12 * xp[0];
      const Vec3 dln = x[1] * t.da22 + t.a22 * Vec3::UnitY();
      const Vec3 dld = x[0] * t.da12 + t.a12 * Vec3::UnitX();
      const Vec3 drn = xp[1] * tp.da22 + tp.a22 * Vec3::UnitY();
      const Vec3 drd = xp[0] * tp.da12 + tp.a12 * Vec3::UnitX();
      e.r[3] = ln * rd - rn * ld;
      e.jx.row(3) = (rd * dln - rn * dld).transpose();
      e.jxp.row(3) = (ln * drd - ld * drn).transpose();
    }
    return e;
  };

  const int cols1[2] = {(c1 + 1) % 3, (c1 + 2) % 3};
  const int cols2[2] = {(c2 + 1) % 3, (c2 + 2) % 3};

  Vec3 x = o, xp = op;
  Vec3 best_x = x, best_xp = xp;
  Eval e = evaluate(x, xp);
  double best = e.r.norm();
  for (int it = 0; it < 12; ++it) {
    Eigen::Matrix<double, 4, 4> jac;
    jac.col(0) = e.jx.col(cols1[0]);
    jac.col(1) = e.jx.col(cols1[1]);
    jac.col(2) = e.jxp.col(cols2[0]);
    jac.col(3) = e.jxp.col(cols2[1]);
    const Eigen::Matrix<double, 4, 1> delta = jac.fullPivLu().solve(-e.r);
    if (!delta.allFinite()) break;
    x[cols1[0]] += delta[0];
    x[cols1[1]] += delta[1];
    xp[cols2[0]] += delta[2];
    xp[cols2[1]] += delta[3];
    e = evaluate(x, xp);
    const double rn = e.r.norm();
    if (rn < best) {
      best = rn;
      best_x = x;
      best_xp = xp;
    } else if (rn > 100.0 * best) {
      break;
    }
    if (delta.norm() < 1e-16 * (1.0 + x.norm() + xp.norm())) break;
  }
  o = best_x;
  op = best_xp;
}

}  // namespace

std::vector<EpipolePairCandidate> EpipoleSystem::candidates(
    const Options& opts, BezoutAudit* audit_out) const {
  // Every near-real intersection is mapped and put through the general-case
  // validation; the constraint equations themselves decide what counts as a
  // solution. The loose gate matters: a real solution adjacent to one of the
  // excluded points inherits imaginary noise from the merged root cluster,
  // but its real part still lies in the Newton basin.
  IntersectionSet set = solve_intersections(sextics_, opts);
  BezoutAudit local_audit = attribute_masses(*this, set, opts);
  for (IntersectionPoint& p : set.points) {
    p.classification = classify(p.u, opts, opts.cluster_radius);
  }

  std::vector<EpipolePairCandidate> out;
  for (const IntersectionPoint& pt : set.points) {
    if (!nearly_real(pt.u, 3e-2)) continue;

    EpipolePairCandidate cand;
    cand.classification = pt.classification == IntersectionClass::Solution
                              ? IntersectionClass::Unresolved
                              : pt.classification;
    try {
      const Vec3 u(pt.u[0].real(), pt.u[1].real(), pt.u[2].real());
      const HomPoint2 ubar = HomPoint2(u).normalized();
      const Vec3 image = sigma_.apply_raw(ubar.v);
      if (image.cwiseAbs().maxCoeff() <= opts.strict_tol * sigma_.scale()) {
        continue;  // exact base point
      }
      Vec3 o_v = cremona_phi(ubar).normalized().v;
      Vec3 op_v = cremona_phi(HomPoint2(image).normalized()).normalized().v;
      polish_epipole_pair(frame1_, frame2_, delta_, delta_prime_, o_v, op_v);
      cand.o = HomPoint2(o_v).normalized();
      cand.o_prime = HomPoint2(op_v).normalized();

      const EquationSides sd =
          point_eq_sides(frame1_.d.v, frame2_.d.v, cand.o.v, cand.o_prime.v);
      const EquationSides se =
          point_eq_sides(frame1_.e.v, frame2_.e.v, cand.o.v, cand.o_prime.v);
      const TangentPairCoeffs t = tangent_pair_coeffs(delta_, cand.o);
      const TangentPairCoeffs tp =
          tangent_pair_coeffs(delta_prime_, cand.o_prime);
      const EquationSides sa = conic_eq_sides_a(t, tp, cand.o.v, cand.o_prime.v);
      const EquationSides sb = conic_eq_sides_b(t, tp, cand.o.v, cand.o_prime.v);

      cand.residuals = {sd.residual(), se.residual(), sa.residual(),
                        sb.residual()};
      const ConicResiduals cr =
          residual_conic_eq(cand.o, cand.o_prime, delta_, delta_prime_);
      cand.tangency_degenerate = cr.tangency_degenerate;

      const bool vacuous = sd.vacuous(opts.strict_tol) ||
                           se.vacuous(opts.strict_tol) ||
                           sa.vacuous(opts.strict_tol) ||
                           sb.vacuous(opts.strict_tol);
      bool small = true;
      for (double r : cand.residuals) small = small && std::abs(r) < opts.tolerance;
      if (!vacuous && small) {
        cand.classification = IntersectionClass::Solution;
      } else if (cand.classification == IntersectionClass::Unresolved &&
                 vacuous) {
        cand.classification = IntersectionClass::ConicCSpurious;
      }
    } catch (const Error&) {
      if (pt.classification == IntersectionClass::Solution &&
          nearly_real(pt.u, 1e-4)) {
        ++local_audit.unresolved_real;
      }
      continue;  // general-position violation: not a usable candidate
    }

    if (cand.classification == IntersectionClass::Solution) {
      // The polish can pull two noisy starts onto the same zero.
      const bool duplicate = std::any_of(
          out.begin(), out.end(), [&](const EpipolePairCandidate& c) {
            return c.classification == IntersectionClass::Solution &&
                   proj_distance(c.o, cand.o) < 1e-7 &&
                   proj_distance(c.o_prime, cand.o_prime) < 1e-7;
          });
      if (duplicate) continue;
    } else if (pt.classification == IntersectionClass::Solution &&
               nearly_real(pt.u, 1e-4)) {
      ++local_audit.unresolved_real;  // isolated real candidate lost
    }
    out.push_back(cand);
  }
  if (audit_out) *audit_out = local_audit;
  return out;
}

static BezoutAudit attribute_masses(const EpipoleSystem& sys,
                                    const IntersectionSet& set,
                                    const EpipoleSystem::Options& opts) {
  BezoutAudit audit;
  audit.eliminant_degree = set.eliminant_degree;

  // Anchor eliminant coordinates are known exactly, so multiple-root
  // clusters are attributed by their (accurate) s coordinate instead of the
  // (noise-dominated) back-substituted position.
  static const Vec3 triangle[3] = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const Mat3 chart_inv = set.chart.inverse();
  std::vector<std::pair<int, cdouble>> anchor_s;  // anchor index, s value
  for (int i = 0; i < 6; ++i) {
    const Vec3 u = (i < 3) ? triangle[i] : sys.base_points()[i - 3].v;
    const Vec3 v = chart_inv * u;
    if (std::abs(v[2]) <= 1e-9 * v.norm()) continue;  // off the chart
    anchor_s.emplace_back(i, cdouble(v[0] / v[2], 0.0));
  }

  for (size_t k = 0; k < set.points.size(); ++k) {
    const cdouble s = set.sroots[k];
    int anchor = -1;
    double best = opts.cluster_radius * (1.0 + std::abs(s));
    for (const auto& [idx, sq] : anchor_s) {
      const double d = std::abs(s - sq);
      if (d < best) {
        best = d;
        anchor = idx;
      }
    }
    switch (anchor) {
      case 0: ++audit.mass_a; continue;
      case 1: ++audit.mass_b; continue;
      case 2: ++audit.mass_c; continue;
      case 3: ++audit.mass_dbar; continue;
      case 4: ++audit.mass_ebar; continue;
      case 5: ++audit.mass_pbar; continue;
      default: break;
    }
    const IntersectionClass cls =
        sys.classify(set.points[k].u, opts, opts.strict_tol);
    if (cls == IntersectionClass::ConicCSpurious) {
      ++audit.mass_conic;
    } else if (cls == IntersectionClass::SigmaBasePoint ||
               cls == IntersectionClass::FundamentalTriangle) {
      ++audit.mass_pbar;  // vacuous image without a nearby anchor coordinate
    } else {
      ++audit.mass_candidates;
    }
  }
  return audit;
}

BezoutAudit EpipoleSystem::audit(const Options& opts) const {
  const IntersectionSet set = solve_intersections(sextics_, opts);
  return attribute_masses(*this, set, opts);
}

IntersectionClass classify_intersection(const HomPoint2& u,
                                        const EpipoleSystem& context,
                                        const EpipoleSystem::Options& opts) {
  const Vec3c uc = u.normalized().v.cast<cdouble>();
  const IntersectionClass cls = context.classify(uc, opts, opts.strict_tol);
  if (cls != IntersectionClass::Solution) return cls;

  // Promote to Solution only when the candidate validates as a general-case
  // zero of all four constraint equations.
  try {
    const HomPoint2 ubar = u.normalized();
    const HomPoint2 o = cremona_phi(ubar);
    const HomPoint2 o_prime =
        cremona_phi(sigma_map(ubar, context.frame1(), context.frame2()));
    const auto pr =
        residual_point_eq(o, o_prime, context.frame1(), context.frame2());
    const ConicResiduals cr =
        residual_conic_eq(o, o_prime, context.delta(), context.delta_prime());
    const bool small = std::abs(pr[0]) < opts.tolerance &&
                       std::abs(pr[1]) < opts.tolerance &&
                       std::abs(cr.r_a) < opts.tolerance &&
                       std::abs(cr.r_b) < opts.tolerance;
    return small ? IntersectionClass::Solution : IntersectionClass::Unresolved;
  } catch (const Error&) {
    return IntersectionClass::Unresolved;
  }
}

PencilProjectivity pencil_from_epipoles(const HomPoint2& o_canonical,
                                        const HomPoint2& o_prime_canonical) {
  const Vec3 x = o_canonical.normalized().v;
  const Vec3 xp = o_prime_canonical.normalized().v;
  PencilProjectivity pencil;
  pencil.h11 = xp[0] * x[1];
  pencil.h22 = xp[1] * x[0];
  const double scale = std::max(std::abs(pencil.h11), std::abs(pencil.h22));
  if (scale == 0.0 || std::min(std::abs(pencil.h11), std::abs(pencil.h22)) <=
                          1e-14 * scale) {
    throw Error(ErrorCode::AssemblyError,
                "pencil projectivity degenerate for this epipole pair");
  }
  return pencil;
}

}  // namespace kruppa
