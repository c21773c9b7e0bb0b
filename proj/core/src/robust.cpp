#include "kruppa/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kruppa/random.hpp"

namespace kruppa {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v[2], v[1],
       v[2], 0.0, -v[0],
       -v[1], v[0], 0.0;
  return s;
}

// Deterministic orthonormal basis of the plane orthogonal to t.
void translation_basis(const Vec3& t, Vec3& b1, Vec3& b2) {
  int k = 0;
  t.cwiseAbs().minCoeff(&k);
  b1 = Vec3::Unit(k).cross(t).normalized();
  b2 = t.cross(b1).normalized();
}

double sampson_from_matrix(const Mat3& f, const Correspondence& c) {
  const Vec3 x1(c.x1.x(), c.x1.y(), 1.0);
  const Vec3 x2(c.x2.x(), c.x2.y(), 1.0);
  const double e = x2.dot(f * x1);
  const Vec3 fx1 = f * x1;
  const Vec3 ftx2 = f.transpose() * x2;
  const double g = fx1[0] * fx1[0] + fx1[1] * fx1[1] + ftx2[0] * ftx2[0] +
                   ftx2[1] * ftx2[1];
  if (g <= 0.0) return 0.0;
  return e * e / g;
}

struct SampsonDerivatives {
  double value = 0.0;
  Eigen::Matrix<double, 5, 1> grad = Eigen::Matrix<double, 5, 1>::Zero();
  double residual = 0.0;                       // signed e / sqrt(g)
  Eigen::Matrix<double, 5, 1> jac = Eigen::Matrix<double, 5, 1>::Zero();
};

SampsonDerivatives sampson_derivatives(const RelativePose& pose,
                                       const Mat3& k1_inv, const Mat3& k2_invT,
                                       const Correspondence& c) {
  Vec3 b1, b2;
  translation_basis(pose.translation, b1, b2);

  const Mat3 r0 = pose.rotation;
  const Mat3 ct = skew(pose.translation);
  const Mat3 e0 = r0 * ct;

  std::array<Mat3, 5> de;
  for (int k = 0; k < 3; ++k) de[k] = skew(Vec3::Unit(k)) * e0;
  de[3] = r0 * skew(b1);
  de[4] = r0 * skew(b2);

  const Mat3 f = k2_invT * e0 * k1_inv;
  const Vec3 x1(c.x1.x(), c.x1.y(), 1.0);
  const Vec3 x2(c.x2.x(), c.x2.y(), 1.0);
  const Vec3 fx1 = f * x1;
  const Vec3 ftx2 = f.transpose() * x2;
  const double e = x2.dot(fx1);
  const double g = fx1[0] * fx1[0] + fx1[1] * fx1[1] + ftx2[0] * ftx2[0] +
                   ftx2[1] * ftx2[1];

  SampsonDerivatives out;
  if (g <= 0.0) return out;
  const double sg = std::sqrt(g);
  out.value = e * e / g;
  out.residual = e / sg;

  for (int k = 0; k < 5; ++k) {
    const Mat3 df = k2_invT * de[k] * k1_inv;
    const Vec3 dfx1 = df * x1;
    const Vec3 dftx2 = df.transpose() * x2;
    const double de_k = x2.dot(dfx1);
    const double dg_k = 2.0 * (fx1[0] * dfx1[0] + fx1[1] * dfx1[1] +
                               ftx2[0] * dftx2[0] + ftx2[1] * dftx2[1]);
    out.jac[k] = de_k / sg - e * dg_k / (2.0 * g * sg);
    out.grad[k] = (2.0 * e * de_k * g - e * e * dg_k) / (g * g);
  }
  return out;
}

}  // namespace

double sampson_error(const EssentialModel& model, const Correspondence& c) {
  return sampson_from_matrix(model.matrix, c);
}

RelativePose pose_retract(const RelativePose& pose, const PoseTangent& step) {
  Vec3 b1, b2;
  translation_basis(pose.translation, b1, b2);
  RelativePose out;
  const Vec3 omega(step[0], step[1], step[2]);
  const double angle = omega.norm();
  const Mat3 dr = (angle > 0.0)
                      ? Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix()
                      : Mat3::Identity();
  out.rotation = dr * pose.rotation;
  out.translation = (pose.translation + step[3] * b1 + step[4] * b2).normalized();
  return out;
}

double pose_objective(const RelativePose& pose,
                      std::span<const Correspondence> corrs,
                      const Intrinsics& k1, const Intrinsics& k2) {
  const Mat3 f = k2.inverse().transpose() * essential_from_pose(pose) * k1.inverse();
  double acc = 0.0;
  for (const Correspondence& c : corrs) acc += sampson_from_matrix(f, c);
  return acc;
}

PoseTangent pose_objective_gradient(const RelativePose& pose,
                                    std::span<const Correspondence> corrs,
                                    const Intrinsics& k1, const Intrinsics& k2) {
  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_invT = k2.inverse().transpose();
  PoseTangent grad = PoseTangent::Zero();
  for (const Correspondence& c : corrs) {
    grad += sampson_derivatives(pose, k1_inv, k2_invT, c).grad;
  }
  return grad;
}

RefineResult refine_pose(const RelativePose& initial,
                         std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2,
                         int iterations) {
  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_invT = k2.inverse().transpose();
  const int n = static_cast<int>(corrs.size());

  RefineResult out;
  out.pose = initial;
  out.initial_objective = pose_objective(initial, corrs, k1, k2);
  out.final_objective = out.initial_objective;

  double lambda = 1e-6;
  RelativePose current = initial;
  double current_obj = out.initial_objective;

  for (int it = 0; it < iterations; ++it) {
    Eigen::MatrixXd jac(n, 5);
    Eigen::VectorXd res(n);
    for (int i = 0; i < n; ++i) {
      const SampsonDerivatives d =
          sampson_derivatives(current, k1_inv, k2_invT, corrs[i]);
      res[i] = d.residual;
      jac.row(i) = d.jac.transpose();
    }
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> jtr = jac.transpose() * res;
    if (jtr.norm() <= 1e-14 * (1.0 + current_obj)) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int trial = 0; trial < 8; ++trial) {
      const Eigen::Matrix<double, 5, 5> normal =
          jtj + lambda * Eigen::Matrix<double, 5, 5>::Identity();
      const PoseTangent step = normal.ldlt().solve(-jtr);
      const RelativePose next = pose_retract(current, step);
      const double next_obj = pose_objective(next, corrs, k1, k2);
      if (next_obj < current_obj) {
        current = next;
        current_obj = next_obj;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    ++out.iterations;
    if (!accepted) {
      out.converged = false;
      break;
    }
    if (current_obj <= 1e-24 ||
        std::abs(out.final_objective - current_obj) <=
            1e-14 * (1.0 + current_obj)) {
      out.converged = true;
      out.final_objective = current_obj;
      break;
    }
    out.final_objective = current_obj;
  }
  out.pose = current;
  out.final_objective = current_obj;
  if (out.iterations == 0) out.converged = true;  // already stationary
  return out;
}

RobustResult ransac_pose(std::span<const Correspondence> corrs,
                         const Intrinsics& k1, const Intrinsics& k2,
                         const RansacConfig& cfg) {
  const int n = static_cast<int>(corrs.size());
  if (n < 5) {
    throw Error(ErrorCode::ArityError,
                "robust estimation needs at least 5 correspondences");
  }
  if (!(cfg.threshold > 0.0) || !(cfg.confidence > 0.0) ||
      !(cfg.confidence < 1.0)) {
    throw Error(ErrorCode::ValidationError, "invalid RANSAC configuration");
  }

  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_invT = k2.inverse().transpose();

  int best_count = 0;
  double best_error = std::numeric_limits<double>::infinity();
  Mat3 best_e = Mat3::Zero();
  bool have_model = false;

  int adaptive_cap = cfg.max_iterations;
  int trial = 0;
  std::vector<int> indices(n);
  for (; trial < adaptive_cap; ++trial) {
    Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(trial)));
    std::iota(indices.begin(), indices.end(), 0);
    std::array<Correspondence, 5> sample;
    for (int i = 0; i < 5; ++i) {
      const int j = i + rng.uniform_int(n - i);
      std::swap(indices[i], indices[j]);
      sample[i] = corrs[indices[i]];
    }

    std::vector<EssentialModel> models;
    try {
      models = solve_modern_5pt(sample, k1, k2);
    } catch (const Error&) {
      continue;
    }
    for (const EssentialModel& m : models) {
      const Mat3 f = k2_invT * m.matrix * k1_inv;
      int count = 0;
      double error = 0.0;
      for (const Correspondence& c : corrs) {
        const double s = sampson_from_matrix(f, c);
        if (s <= cfg.threshold) {
          ++count;
          error += s;
        }
      }
      if (count > best_count ||
          (count == best_count && have_model && error < best_error)) {
        best_count = count;
        best_error = error;
        best_e = m.matrix;
        have_model = true;
        const double w = static_cast<double>(count) / n;
        const double miss = 1.0 - std::pow(w, 5);
        if (miss <= 1e-12) {
          adaptive_cap = trial + 1;
        } else {
          const double needed =
              std::log(1.0 - cfg.confidence) / std::log(miss);
          adaptive_cap = std::min<int>(
              cfg.max_iterations,
              static_cast<int>(std::ceil(std::max(1.0, needed))));
        }
      }
    }
  }

  if (!have_model || best_count < 5) {
    throw Error(ErrorCode::EstimationFailure,
                "no minimal sample reached the required consensus");
  }

  RobustResult out;
  out.iterations_run = trial;
  const EssentialModel essential =
      EssentialModel::from_matrix(best_e, ModelSource::Modern5pt);
  out.model = EssentialModel::from_matrix(k2_invT * best_e * k1_inv,
                                          ModelSource::Modern5pt);
  out.inlier_mask.assign(n, 0);
  std::vector<Correspondence> inliers;
  for (int i = 0; i < n; ++i) {
    if (sampson_from_matrix(out.model.matrix, corrs[i]) <= cfg.threshold) {
      out.inlier_mask[i] = 1;
      inliers.push_back(corrs[i]);
    }
  }
  out.pose = select_pose(decompose_essential(essential), inliers, k1, k2);
  return out;
}

}  // namespace kruppa
