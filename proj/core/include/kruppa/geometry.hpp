#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace kruppa {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

enum class ErrorCode {
  InvalidIntrinsics,
  DegenerateBasis,
  GeneralPositionViolation,
  UndefinedImage,
  DegenerateConfiguration,
  DegenerateInput,
  InvalidModel,
  PointAtInfinity,
  NoValidPose,
  EstimationFailure,
  AssemblyError,
  NoSolution,
  ParseError,
  ValidationError,
  ArityError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Point of the projective plane. Never the zero vector; equal up to scale.
struct HomPoint2 {
  Vec3 v;

  HomPoint2() : v(0, 0, 1) {}
  explicit HomPoint2(const Vec3& coords);
  HomPoint2(double x1, double x2, double x3) : HomPoint2(Vec3(x1, x2, x3)) {}

  static HomPoint2 from_pixel(const Vec2& p) { return {p.x(), p.y(), 1.0}; }

  // Canonical representative: max-abs coordinate 1, first nonzero entry positive.
  HomPoint2 normalized() const;
  bool is_approx(const HomPoint2& other, double tol = 1e-10) const;
};

// Chordal metric between projective points: sin of the angle between the
// spanned lines. Zero iff equal up to scale.
double proj_distance(const Vec3& a, const Vec3& b);
double proj_distance(const HomPoint2& a, const HomPoint2& b);

struct Conic {
  Mat3 m;  // symmetric, nonzero

  Conic() : m(Mat3::Identity()) {}
  explicit Conic(const Mat3& coeffs);

  double evaluate(const Vec3& x) const { return x.dot(m * x); }
  bool is_degenerate() const;
};

/// Dual (line) conic together with the delta symbols of the source conic:
///   delta_ik = a_ii a_kk - a_ik^2
///   delta_1  = a_11 a_32 - a_31 a_12   (and cyclic siblings)
/// `m` is the plain adjugate; delta_matrix() places the same data in the
/// (-d23, d3, d2 / d3, -d13, d1 / d2, d1, -d12) sign layout, which equals -m.
struct DualConic {
  Mat3 m;
  double d12 = 0, d13 = 0, d23 = 0;  // delta_pairs
  double d1 = 0, d2 = 0, d3 = 0;     // delta_singles
  bool degenerate = false;

  Mat3 delta_matrix() const;
};

struct Intrinsics {
  Mat3 k;  // upper triangular, positive diagonal, k(2,2) = 1

  Intrinsics() : k(Mat3::Identity()) {}
  explicit Intrinsics(const Mat3& cal);
  Intrinsics(double fx, double fy, double cx, double cy, double skew = 0.0);

  Mat3 inverse() const { return k.inverse(); }
};

/// Projective basis adapted to five image points: h maps a,b,c to the unit
/// points exactly and d to (1,1,1); e and the conic are carried along.
struct CanonicalFrame {
  Mat3 h;
  Mat3 h_inv;
  HomPoint2 d;  // always (1,1,1) by construction
  HomPoint2 e;
  Conic iac_t;

  Vec3 to_frame(const Vec3& x) const { return h * x; }
  Vec3 from_frame(const Vec3& u) const { return h_inv * u; }
};

Mat3 adjugate(const Mat3& m);

/// omega = k^-T k^-1, the conic whose points are the images of the absolute
/// conic's (complex) points. Positive definite for valid intrinsics.
Conic iac_from_intrinsics(const Intrinsics& k);

/// Recovers the unique upper-triangular calibration (k(2,2)=1) whose IAC is
/// proportional to `iac`. Throws InvalidIntrinsics unless iac is definite.
Intrinsics intrinsics_from_iac(const Conic& iac);

DualConic dual_of(const Conic& c);

struct TangentPairCoeffs {
  double a11, a12, a22;
};

/// Coefficients of the binary quadratic A11 y1^2 + 2 A12 y1 y2 + A22 y2^2
/// whose roots on the line y3 = 0 are the intersections of the two tangents
/// drawn from x to the conic with delta symbols `delta`.
TangentPairCoeffs tangent_pair_coeffs(const DualConic& delta, const HomPoint2& x);

/// (d x)_1 = d2 x3 - d3 x2, remaining components by cyclic permutation;
/// equals the cross product of the coordinate vectors.
Vec3 bracket(const HomPoint2& d, const HomPoint2& x);

CanonicalFrame canonical_frame(const HomPoint2& a, const HomPoint2& b,
                               const HomPoint2& c, const HomPoint2& d,
                               const HomPoint2& e, const Conic& iac);

// Point-conic transform rule for y = h x: returns h^-T m h^-1.
Conic transform_conic(const Conic& c, const Mat3& h_inv);

}  // namespace kruppa
