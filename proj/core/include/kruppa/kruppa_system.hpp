#pragma once

#include <array>
#include <optional>
#include <vector>

#include "kruppa/geometry.hpp"
#include "kruppa/polynomial.hpp"

namespace kruppa {

/// 1D homography between the two pencils of epipolar lines, written in the
/// canonical frames where it is diagonal (the basis rays map to each other).
struct PencilProjectivity {
  double h11 = 1.0;
  double h22 = 1.0;
};

enum class IntersectionClass {
  Solution,
  FundamentalTriangle,
  SigmaBasePoint,
  ConicCSpurious,
  Unresolved,
};

struct EpipolePairCandidate {
  HomPoint2 o;        // epipole in view 1, canonical frame-1 coordinates
  HomPoint2 o_prime;  // epipole in view 2, canonical frame-2 coordinates
  std::array<double, 4> residuals{};  // point-d, point-e, conic-a, conic-b
  IntersectionClass classification = IntersectionClass::Unresolved;
  bool tangency_degenerate = false;
};

/// The reciprocal transform u = (x2 x3, x3 x1, x1 x2); an involution away
/// from the coordinate triangle. Throws UndefinedImage when two or more
/// coordinates vanish (the image would be the zero vector).
HomPoint2 cremona_phi(const HomPoint2& x);

/// Cleared residuals of the two projective-ray constraints tying the
/// epipole pair to the 4th and 5th points:
///   (d3 x1 - d1 x3) x2 / ((d3 x2 - d2 x3) x1) = same primed,
/// one equation for d and one for e, each returned as
/// (LN*RD - RN*LD) / (|LN*RD| + |RN*LD|).
std::array<double, 2> residual_point_eq(const HomPoint2& x,
                                        const HomPoint2& x_prime,
                                        const CanonicalFrame& frame1,
                                        const CanonicalFrame& frame2);

struct ConicResiduals {
  double r_a = 0.0;  // A11-route constraint
  double r_b = 0.0;  // A22-route constraint
  bool tangency_degenerate = false;
};

/// Cleared residuals of the two tangent-pair constraints built from
/// tangent_pair_coeffs on both sides. x / x_prime in the respective frames.
ConicResiduals residual_conic_eq(const HomPoint2& x, const HomPoint2& x_prime,
                                 const DualConic& delta,
                                 const DualConic& delta_prime);

/// Quadratic birational map between the transformed planes: the image of u
/// is the cross product of the two reweighted bracket lines
///   (d'_i [d u]_i)  and  (e'_i [e u]_i),
/// with [d u]_1 = d2 u2 - d3 u3 and cyclic siblings.
class SigmaMap {
 public:
  SigmaMap(const Vec3& d, const Vec3& e, const Vec3& d_prime,
           const Vec3& e_prime);
  static SigmaMap between(const CanonicalFrame& frame1,
                          const CanonicalFrame& frame2);

  Vec3 apply_raw(const Vec3& u) const;
  Vec3c apply_raw(const Vec3c& u) const;
  SigmaMap inverse() const { return SigmaMap(dp_, ep_, d_, e_); }

  /// The three quadratic forms whose simultaneous zeros are the base points.
  const std::array<Poly3, 3>& components() const { return comps_; }
  double scale() const { return scale_; }

  const Vec3& d() const { return d_; }
  const Vec3& e() const { return e_; }
  const Vec3& d_prime() const { return dp_; }
  const Vec3& e_prime() const { return ep_; }

 private:
  Vec3 d_, e_, dp_, ep_;
  std::array<Poly3, 3> comps_;
  double scale_ = 1.0;
};

/// Evaluates the birational map; throws UndefinedImage at its base points.
HomPoint2 sigma_map(const HomPoint2& u, const CanonicalFrame& frame1,
                    const CanonicalFrame& frame2);

struct SexticPair {
  Poly3 a_hom;  // homogeneous sextic A in u
  Poly3 b_hom;  // homogeneous sextic B in u
  Poly2 a;      // u3 = 1 chart
  Poly2 b;
};

/// Substitutes the birational map into the two tangent-pair constraints;
/// the result is a pair of degree-6 curves whose common points contain the
/// transformed epipoles. Throws DegenerateConfiguration on degree collapse.
SexticPair sextic_curves(const CanonicalFrame& frame1,
                         const CanonicalFrame& frame2, const DualConic& delta,
                         const DualConic& delta_prime);

/// The three base points of the birational map: the reciprocal images of the
/// 4th and 5th points plus the reciprocal image of the connected pole,
/// computed as the third common zero of the component quadratics.
std::array<HomPoint2, 3> sigma_base_points(const CanonicalFrame& frame1,
                                           const CanonicalFrame& frame2);

struct IntersectionPoint {
  Vec3c u;        // scale-normalized: largest component exactly 1
  bool real = false;
  bool polished = false;
  IntersectionClass classification = IntersectionClass::Unresolved;
};

struct BezoutAudit {
  int eliminant_degree = 0;
  int mass_a = 0;      // vertex (1,0,0)
  int mass_b = 0;      // vertex (0,1,0)
  int mass_c = 0;      // vertex (0,0,1)
  int mass_dbar = 0;
  int mass_ebar = 0;
  int mass_pbar = 0;
  int mass_conic = 0;      // on C with image on C'
  int mass_candidates = 0; // everything not excluded (complex included)
  int unresolved_real = 0; // isolated real candidates that failed validation

  int fundamental_mass() const { return mass_a + mass_b + mass_c; }
  int base_mass() const { return mass_dbar + mass_ebar + mass_pbar; }
  int spurious_mass() const {
    return fundamental_mass() + base_mass() + mass_conic;
  }
  int classified_total() const { return spurious_mass() + mass_candidates; }
};

struct SystemOptions {
  double tolerance = 1e-9;       // residual acceptance for solutions
  uint64_t chart_seed = 1;       // elimination chart selection
  double strict_tol = 1e-7;      // point-membership predicates
  double cluster_radius = 1e-2;  // anchor radius absorbing multiple-root noise
  double imag_tol = 1e-8;        // realness of eliminant roots
};

/// One five-point problem instance after the frame change: owns the dual
/// conics, the birational map, both sextics and the base points.
class EpipoleSystem {
 public:
  using Options = SystemOptions;

  EpipoleSystem(const CanonicalFrame& frame1, const CanonicalFrame& frame2);

  const CanonicalFrame& frame1() const { return frame1_; }
  const CanonicalFrame& frame2() const { return frame2_; }
  const DualConic& delta() const { return delta_; }
  const DualConic& delta_prime() const { return delta_prime_; }
  const SigmaMap& sigma() const { return sigma_; }
  const SexticPair& sextics() const { return sextics_; }
  const std::array<HomPoint2, 3>& base_points() const { return base_points_; }

  /// All intersection points of the two sextics (complex included),
  /// recovered from the degree-36 eliminant of a generic chart.
  std::vector<IntersectionPoint> intersections(const Options& opts = {}) const;

  /// Real intersections mapped back to epipole pairs and validated against
  /// the four constraint equations. When `audit_out` is given, the
  /// multiplicity accounting of the same intersection set is stored there.
  std::vector<EpipolePairCandidate> candidates(const Options& opts = {},
                                               BezoutAudit* audit_out = nullptr) const;

  /// Full multiplicity accounting of the 36 intersections.
  BezoutAudit audit(const Options& opts = {}) const;

  IntersectionClass classify(const Vec3c& u, const Options& opts,
                             double anchor_radius) const;

 private:
  CanonicalFrame frame1_, frame2_;
  DualConic delta_, delta_prime_;
  SigmaMap sigma_;
  SexticPair sextics_;
  Poly3 conic_c_, conic_c_prime_;  // the shared-factor conics of both curves
  std::array<HomPoint2, 3> base_points_;
};

/// Tags a validated common zero of the two sextics. Strict membership
/// tolerances; intended for isolated (simple) intersections.
IntersectionClass classify_intersection(const HomPoint2& u,
                                        const EpipoleSystem& context,
                                        const EpipoleSystem::Options& opts = {});

/// Diagonal pencil projectivity consistent with an epipole pair in canonical
/// frames (ratio from the third basis ray correspondence).
PencilProjectivity pencil_from_epipoles(const HomPoint2& o_canonical,
                                        const HomPoint2& o_prime_canonical);

}  // namespace kruppa
