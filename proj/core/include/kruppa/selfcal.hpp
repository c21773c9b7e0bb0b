#pragma once

#include "kruppa/solvers.hpp"

namespace kruppa {

struct KruppaResidual {
  std::array<double, 2> values{};  // the two tangency-correspondence equations
  bool degenerate = false;         // epipole on a conic / coincident tangents
};

/// Epipolar constraint for conic images: the tangent pairs drawn from the
/// epipoles to the two conics must correspond under the epipolar line
/// homography. Evaluated in frames adapted to the model where the pencil
/// map is the identity, so the constraint reduces to proportionality of the
/// two tangent-pair coefficient triples. Vanishes at the true pair of dual
/// conics for exact epipolar geometry.
KruppaResidual kruppa_residual(const EssentialModel& f, const DualConic& diac1,
                               const DualConic& diac2);

struct FocalResult {
  std::vector<double> candidates;  // ascending
  bool continuum = false;          // constraints vanish identically
};

/// Single unknown focal length shared by both cameras, square pixels, zero
/// skew, known principal points: substitutes diag(phi, phi, 1) into the
/// constraint above and solves the resulting quartics in phi = focal^2.
FocalResult focal_from_f(const EssentialModel& f, const Vec2& principal1,
                         const Vec2& principal2);

}  // namespace kruppa
