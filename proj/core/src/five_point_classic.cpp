#include <algorithm>
#include <optional>

#include "kruppa/solvers.hpp"

namespace kruppa {

namespace {

struct FramePair {
  CanonicalFrame frame1, frame2;
  std::array<int, 5> labels;  // which correspondence plays a, b, c, d, e
  double condition;
};

double frame_condition(const CanonicalFrame& f) {
  return f.h.norm() * f.h_inv.norm();
}

// The construction works for any labeling of the five pairs as
// (a, b, c, d, e); the numerical quality does not. Rank the 20 essentially
// different labelings by the conditioning of the induced frames.
std::vector<FramePair> ranked_frames(const std::array<HomPoint2, 5>& rays1,
                                     const std::array<HomPoint2, 5>& rays2,
                                     const Conic& omega1, const Conic& omega2) {
  std::vector<FramePair> out;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      for (int k = j + 1; k < 5; ++k) {
        int rest[2];
        int r = 0;
        for (int m = 0; m < 5; ++m) {
          if (m != i && m != j && m != k) rest[r++] = m;
        }
        for (int swap = 0; swap < 2; ++swap) {
          const std::array<int, 5> lab = {i, j, k, rest[swap], rest[1 - swap]};
          try {
            FramePair fp;
            fp.labels = lab;
            fp.frame1 = canonical_frame(rays1[lab[0]], rays1[lab[1]],
                                        rays1[lab[2]], rays1[lab[3]],
                                        rays1[lab[4]], omega1);
            fp.frame2 = canonical_frame(rays2[lab[0]], rays2[lab[1]],
                                        rays2[lab[2]], rays2[lab[3]],
                                        rays2[lab[4]], omega2);
            fp.condition =
                std::max(frame_condition(fp.frame1), frame_condition(fp.frame2));
            out.push_back(std::move(fp));
          } catch (const Error&) {
            // Labeling puts a point on a side of the triangle; skip it.
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FramePair& a, const FramePair& b) {
              return a.condition < b.condition;
            });
  return out;
}

}  // namespace

std::vector<EssentialModel> solve_kruppa_5pt(std::span<const Correspondence> corrs,
                                             const Conic& iac1,
                                             const Conic& iac2,
                                             const SolveOptions& opts) {
  if (corrs.size() != 5) {
    throw Error(ErrorCode::ArityError,
                "classic five-point solver needs exactly 5 correspondences");
  }

  // Work in calibrated ray coordinates; the IAC transforms along and the
  // assembled fundamental matrix is then already the essential matrix.
  const Intrinsics k1 = intrinsics_from_iac(iac1);
  const Intrinsics k2 = intrinsics_from_iac(iac2);
  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_inv = k2.inverse();

  std::array<HomPoint2, 5> rays1, rays2;
  for (int i = 0; i < 5; ++i) {
    rays1[i] = HomPoint2(k1_inv * Vec3(corrs[i].x1.x(), corrs[i].x1.y(), 1.0));
    rays2[i] = HomPoint2(k2_inv * Vec3(corrs[i].x2.x(), corrs[i].x2.y(), 1.0));
  }
  const Conic omega1 = transform_conic(iac1, k1.k);
  const Conic omega2 = transform_conic(iac2, k2.k);

  const std::vector<FramePair> frames =
      ranked_frames(rays1, rays2, omega1, omega2);
  if (frames.empty()) {
    throw Error(ErrorCode::GeneralPositionViolation,
                "no labeling of the five pairs yields valid frames");
  }

  // The solution set is labeling-independent, so results from different
  // labelings can be merged. A solution whose epipole falls near a line
  // through two of the five points is numerically fragile in every labeling
  // whose triangle contains that pair, so the merged labelings are chosen
  // with maximally different triangles.
  std::vector<size_t> picked;
  for (size_t want = 0; want < 2 && picked.size() < frames.size(); ++want) {
    size_t best_i = SIZE_MAX;
    int best_overlap = 4;
    for (size_t i = 0; i < frames.size(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      int overlap = 0;
      for (size_t p : picked) {
        int common = 0;
        for (int x = 0; x < 3; ++x) {
          for (int y = 0; y < 3; ++y) {
            if (frames[i].labels[x] == frames[p].labels[y]) ++common;
          }
        }
        overlap = std::max(overlap, common);
      }
      if (overlap < best_overlap) {
        best_overlap = overlap;
        best_i = i;
      }
    }
    if (best_i == SIZE_MAX) break;
    picked.push_back(best_i);
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    if (std::find(picked.begin(), picked.end(), i) == picked.end()) {
      picked.push_back(i);  // fallback pool, walked only without a certificate
    }
  }

  std::optional<Error> last_error;
  std::vector<EssentialModel> models;
  int successes = 0;

  auto admit = [&](EssentialModel&& model) {
    // Calibrated solutions are essential; candidates that satisfy the
    // cleared equations only vacuously assemble into rank-2 matrices with
    // clearly split singular values and are dropped here.
    if (!model.is_essential(1e-7)) return;
    double worst_epi = 0.0;
    for (int ci = 0; ci < 5; ++ci) {
      const Vec3 x1 = rays1[ci].normalized().v;
      const Vec3 x2 = rays2[ci].normalized().v;
      worst_epi = std::max(worst_epi, std::abs(x2.dot(model.matrix * x1)) /
                                          (x1.norm() * x2.norm()));
    }
    if (worst_epi > 1e-8) return;
    auto essential_gap = [](const EssentialModel& m) {
      Eigen::JacobiSVD<Mat3> svd(m.matrix);
      return (svd.singularValues()[0] - svd.singularValues()[1]) /
             svd.singularValues()[0];
    };
    for (EssentialModel& existing : models) {
      if (model_distance(existing.matrix, model.matrix) < 1e-4) {
        // Same zero reached twice; keep the copy closer to the essential
        // manifold (a stalled polish leaves a slightly split spectrum).
        if (essential_gap(model) < essential_gap(existing)) {
          existing = std::move(model);
        }
        return;
      }
    }
    models.push_back(std::move(model));
  };

  // A solution sitting close to an excluded point of some labeling is
  // recovered by another labeling or by the mirrored plane. A run certifies
  // completeness when its intersection accounting shows the exact generic
  // pattern and every isolated candidate was either validated or is clearly
  // complex; runs are merged until one run certifies.
  bool certified = false;
  int solves = 0;
  int attempts = 0;
  for (size_t pi = 0;
       pi < picked.size() && !certified && solves < 12 && attempts < 24; ++pi) {
    const size_t fi = picked[pi];
    const FramePair& fp = frames[fi];
    EpipoleSystem::Options sys_opts;
    sys_opts.tolerance = opts.tolerance;
    sys_opts.chart_seed = opts.chart_seed + fi;

    for (int mirror = 0; mirror < 2 && !certified; ++mirror) {
      try {
        const CanonicalFrame& fa = mirror ? fp.frame2 : fp.frame1;
        const CanonicalFrame& fb = mirror ? fp.frame1 : fp.frame2;
        const EpipoleSystem system(fa, fb);
        BezoutAudit audit;
        bool lost_real = false;
        for (const EpipolePairCandidate& cand :
             system.candidates(sys_opts, &audit)) {
          if (cand.classification == IntersectionClass::Unresolved) {
            lost_real = true;  // isolated real candidate failed validation
          }
          if (cand.classification != IntersectionClass::Solution) continue;
          const Vec3 oc = mirror ? cand.o_prime.v : cand.o.v;
          const Vec3 opc = mirror ? cand.o.v : cand.o_prime.v;
          const HomPoint2 o(fp.frame1.from_frame(oc));
          const HomPoint2 o_prime(fp.frame2.from_frame(opc));
          const PencilProjectivity pencil =
              pencil_from_epipoles(HomPoint2(oc), HomPoint2(opc));
          admit(epipoles_to_model(o, o_prime, pencil, fp.frame1, fp.frame2,
                                  ModelSource::KruppaClassic));
        }
        ++successes;
        ++solves;
        ++attempts;
        const bool exact_pattern =
            audit.classified_total() == 36 && audit.mass_a == 3 &&
            audit.mass_b == 3 && audit.mass_c <= 2 && audit.mass_dbar == 4 &&
            audit.mass_ebar == 4 && audit.mass_pbar == 4 &&
            audit.mass_conic >= 5 && audit.mass_candidates >= 10;
        if (exact_pattern && !lost_real && audit.unresolved_real == 0) {
          certified = true;
        }
      } catch (const Error& e) {
        last_error = e;
        ++attempts;
      }
    }
  }
  if (successes == 0 && last_error) throw *last_error;
  return models;
}

BezoutAudit audit_five_point(std::span<const Correspondence> corrs,
                             const Conic& iac1, const Conic& iac2,
                             const SolveOptions& opts) {
  if (corrs.size() != 5) {
    throw Error(ErrorCode::ArityError, "the audit needs exactly 5 correspondences");
  }
  const Intrinsics k1 = intrinsics_from_iac(iac1);
  const Intrinsics k2 = intrinsics_from_iac(iac2);
  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_inv = k2.inverse();

  std::array<HomPoint2, 5> rays1, rays2;
  for (int i = 0; i < 5; ++i) {
    rays1[i] = HomPoint2(k1_inv * Vec3(corrs[i].x1.x(), corrs[i].x1.y(), 1.0));
    rays2[i] = HomPoint2(k2_inv * Vec3(corrs[i].x2.x(), corrs[i].x2.y(), 1.0));
  }
  const Conic omega1 = transform_conic(iac1, k1.k);
  const Conic omega2 = transform_conic(iac2, k2.k);

  const std::vector<FramePair> frames =
      ranked_frames(rays1, rays2, omega1, omega2);
  std::optional<Error> last_error;
  const size_t attempts = std::min<size_t>(frames.size(), 6);
  for (size_t fi = 0; fi < attempts; ++fi) {
    try {
      const EpipoleSystem system(frames[fi].frame1, frames[fi].frame2);
      EpipoleSystem::Options sys_opts;
      sys_opts.tolerance = opts.tolerance;
      sys_opts.chart_seed = opts.chart_seed + fi;
      return system.audit(sys_opts);
    } catch (const Error& e) {
      last_error = e;
    }
  }
  throw last_error.value_or(Error(ErrorCode::DegenerateConfiguration,
                                  "no labeling yields valid frames"));
}

}  // namespace kruppa
