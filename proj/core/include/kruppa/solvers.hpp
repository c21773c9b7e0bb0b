#pragma once

#include <span>
#include <vector>

#include "kruppa/geometry.hpp"
#include "kruppa/kruppa_system.hpp"

namespace kruppa {

struct Correspondence {
  Vec2 x1;  // view 1, pixels
  Vec2 x2;  // view 2, pixels
};

enum class ModelSource { KruppaClassic, Modern5pt, SevenPoint, Theorem2 };

const char* to_string(ModelSource source);

/// Rank-2 epipolar constraint matrix (essential or fundamental depending on
/// the producing solver) in canonical form, with its null-vector epipoles.
/// Convention: x2^T matrix x1 = 0.
struct EssentialModel {
  Mat3 matrix = Mat3::Zero();
  HomPoint2 epipole1;  // right null vector (view 1)
  HomPoint2 epipole2;  // left null vector (view 2)
  ModelSource source = ModelSource::Modern5pt;

  static EssentialModel from_matrix(const Mat3& m, ModelSource source);

  /// |x2^T F x1| / (|x1| |x2|) with homogenized pixel coordinates and the
  /// stored unit-Frobenius matrix.
  double epipolar_residual(const Correspondence& c) const;

  /// Two equal nonzero singular values (the calibrated case).
  bool is_essential(double tol = 1e-7) const;
};

/// Unit Frobenius norm; sign fixed so the entry of largest magnitude
/// (first in row-major order on ties) is positive.
Mat3 canonical_form(const Mat3& m);
double model_distance(const Mat3& a, const Mat3& b);

struct SolveOptions {
  double tolerance = 1e-9;  // constraint-residual acceptance
  uint64_t chart_seed = 1;
};

/// Classic five-point pipeline: canonical frames from the correspondences,
/// the reciprocal/birational constraint system, sextic intersection,
/// spurious-point exclusion, pencil recovery and model assembly.
/// Returns essential matrices in calibrated (ray) coordinates.
std::vector<EssentialModel> solve_kruppa_5pt(std::span<const Correspondence> corrs,
                                             const Conic& iac1,
                                             const Conic& iac2,
                                             const SolveOptions& opts = {});

/// Intersection-count accounting for the five-point constraint curves of a
/// problem instance, using the same frame construction as solve_kruppa_5pt.
BezoutAudit audit_five_point(std::span<const Correspondence> corrs,
                             const Conic& iac1, const Conic& iac2,
                             const SolveOptions& opts = {});

/// Null-space five-point solver: det and trace constraints reduced to a
/// degree-10 univariate polynomial, roots by companion eigenvalues.
std::vector<EssentialModel> solve_modern_5pt(std::span<const Correspondence> corrs,
                                             const Intrinsics& k1,
                                             const Intrinsics& k2,
                                             const SolveOptions& opts = {});

/// Seven-point uncalibrated solver; 1-3 fundamental matrices.
std::vector<EssentialModel> solve_7pt(std::span<const Correspondence> corrs,
                                      const SolveOptions& opts = {});

struct Thm2Solution {
  EssentialModel fundamental;
  Vec2 principal_point2 = Vec2::Zero();
  double focal2 = 0.0;
  Conic conic2;  // recovered image-2 IAC
};

struct Thm2Result {
  std::vector<Thm2Solution> solutions;
  int branches = 0;            // fundamental branches examined
  int skipped_branches = 0;    // degenerate tangent configurations
  int enumerated_orientations = 0;  // 2x algebraic principal-point count
  std::vector<int> branch_solution_counts;
};

/// Seven points, the image-1 IAC and the image-2 focal length: for every
/// fundamental branch, maps the tangent pair from the epipole through the
/// epipolar line homography and solves for the image-2 principal point
/// making its conic tangent to the mapped pair (quartic per branch).
Thm2Result solve_thm2(std::span<const Correspondence> corrs, const Conic& iac1,
                      double focal2, const SolveOptions& opts = {});

/// Assembles the fundamental matrix from an epipole pair and the pencil
/// projectivity: composition of the line-pencil homography with the skew
/// form of the second epipole. Epipoles in the coordinates the frames were
/// built from; the result lives in those coordinates too.
EssentialModel epipoles_to_model(const HomPoint2& o, const HomPoint2& o_prime,
                                 const PencilProjectivity& pencil,
                                 const CanonicalFrame& frame1,
                                 const CanonicalFrame& frame2,
                                 ModelSource source = ModelSource::KruppaClassic);

}  // namespace kruppa
