#include <algorithm>
#include <array>

#include "kruppa/polynomial.hpp"
#include "kruppa/solvers.hpp"

namespace kruppa {

namespace {

// Column order used for the elimination: ten leading monomials, then the
// trailing block grouped as x(z^2,z,1), y(z^2,z,1), (z^3,z^2,z,1).
constexpr std::array<std::array<int, 3>, 20> kMonomials = {{
    {3, 0, 0}, {0, 3, 0}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1},
    {2, 0, 0}, {0, 2, 1}, {0, 2, 0}, {1, 1, 1}, {1, 1, 0},
    {1, 0, 2}, {1, 0, 1}, {1, 0, 0}, {0, 1, 2}, {0, 1, 1},
    {0, 1, 0}, {0, 0, 3}, {0, 0, 2}, {0, 0, 1}, {0, 0, 0},
}};

int monomial_column(const std::array<int, 3>& key) {
  for (int i = 0; i < 20; ++i) {
    if (kMonomials[i] == key) return i;
  }
  return -1;
}

using PolyMat = std::array<std::array<Poly3, 3>, 3>;

PolyMat symbolic_essential(const std::array<Mat3, 4>& basis) {
  PolyMat e;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Poly3 p;
      p.add_term(1, 0, 0, basis[0](i, j));
      p.add_term(0, 1, 0, basis[1](i, j));
      p.add_term(0, 0, 1, basis[2](i, j));
      p.add_term(0, 0, 0, basis[3](i, j));
      e[i][j] = p;
    }
  }
  return e;
}

std::vector<Poly3> constraint_polynomials(const PolyMat& e) {
  std::vector<Poly3> out;
  out.reserve(10);

  // det(E) = 0.
  Poly3 det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
              e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
              e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
  out.push_back(det);

  // 2 E E^T E - tr(E E^T) E = 0.
  PolyMat eet;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Poly3 acc;
      for (int k = 0; k < 3; ++k) acc = acc + e[i][k] * e[j][k];
      eet[i][j] = acc;
    }
  }
  const Poly3 trace = eet[0][0] + eet[1][1] + eet[2][2];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Poly3 acc;
      for (int k = 0; k < 3; ++k) acc = acc + eet[i][k] * e[k][j];
      out.push_back(acc * 2.0 - trace * e[i][j]);
    }
  }
  return out;
}

// Gauss-Newton on the ten cubic constraints; cheap and pins the solution to
// machine precision after the eigenvalue stage.
void polish_solution(const std::vector<Poly3>& constraints, double& x,
                     double& y, double& z) {
  std::array<std::array<Poly3, 3>, 10> jac;
  for (int c = 0; c < 10; ++c) {
    for (int v = 0; v < 3; ++v) jac[c][v] = constraints[c].partial(v);
  }
  Vec3 p(x, y, z);
  for (int it = 0; it < 5; ++it) {
    Eigen::Matrix<double, 10, 1> r;
    Eigen::Matrix<double, 10, 3> j;
    for (int c = 0; c < 10; ++c) {
      r[c] = constraints[c].eval(p);
      for (int v = 0; v < 3; ++v) j(c, v) = jac[c][v].eval(p);
    }
    const Vec3 step = j.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    p += step;
    if (step.norm() < 1e-15 * (1.0 + p.norm())) break;
  }
  x = p[0];
  y = p[1];
  z = p[2];
}

}  // namespace

std::vector<EssentialModel> solve_modern_5pt(std::span<const Correspondence> corrs,
                                             const Intrinsics& k1,
                                             const Intrinsics& k2,
                                             const SolveOptions& opts) {
  if (corrs.size() != 5) {
    throw Error(ErrorCode::ArityError,
                "five-point solver needs exactly 5 correspondences");
  }
  const Mat3 k1_inv = k1.inverse();
  const Mat3 k2_inv = k2.inverse();

  Eigen::Matrix<double, 5, 9> a;
  for (int r = 0; r < 5; ++r) {
    Vec3 q1 = k1_inv * Vec3(corrs[r].x1.x(), corrs[r].x1.y(), 1.0);
    Vec3 q2 = k2_inv * Vec3(corrs[r].x2.x(), corrs[r].x2.y(), 1.0);
    q1.normalize();
    q2.normalize();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a(r, 3 * i + j) = q2[i] * q1[j];
    }
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 9>> svd(a, Eigen::ComputeFullV);
  if (svd.singularValues()[4] <= 1e-10 * svd.singularValues()[0]) {
    throw Error(ErrorCode::DegenerateInput,
                "rank-deficient epipolar constraints (coincident points?)");
  }
  std::array<Mat3, 4> basis;
  for (int b = 0; b < 4; ++b) {
    const Eigen::Matrix<double, 9, 1> col = svd.matrixV().col(5 + b);
    basis[b] = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(
        col.data());
  }

  const PolyMat e_sym = symbolic_essential(basis);
  const std::vector<Poly3> constraints = constraint_polynomials(e_sym);

  Eigen::Matrix<double, 10, 20> coeff = Eigen::Matrix<double, 10, 20>::Zero();
  for (int c = 0; c < 10; ++c) {
    for (const auto& [key, v] : constraints[c].terms()) {
      const int col = monomial_column(key);
      if (col < 0) {
        throw Error(ErrorCode::DegenerateConfiguration,
                    "unexpected monomial in constraint expansion");
      }
      coeff(c, col) += v;
    }
  }

  const Eigen::Matrix<double, 10, 10> left = coeff.leftCols<10>();
  Eigen::FullPivLU<Eigen::Matrix<double, 10, 10>> lu(left);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::DegenerateInput,
                "constraint elimination is rank deficient");
  }
  const Eigen::Matrix<double, 10, 10> reduced = lu.solve(coeff.rightCols<10>());

  // Pair rows with matching leading monomials up to a factor of z and cancel
  // it; each combination is linear in x and y with z-polynomial coefficients.
  auto b_row = [&reduced](int hi, int lo) {
    const auto rh = reduced.row(hi);
    const auto rl = reduced.row(lo);
    std::array<Poly, 3> row;
    row[0] = Poly({rh[2], rh[1] - rl[2], rh[0] - rl[1], -rl[0]});
    row[1] = Poly({rh[5], rh[4] - rl[5], rh[3] - rl[4], -rl[3]});
    row[2] = Poly({rh[9], rh[8] - rl[9], rh[7] - rl[8], rh[6] - rl[7], -rl[6]});
    return row;
  };
  // Row layout after the shift: trailing block columns 0..9 map to
  // xz^2, xz, x, yz^2, yz, y, z^3, z^2, z, 1.
  const std::array<Poly, 3> k_row = b_row(4, 5);
  const std::array<Poly, 3> l_row = b_row(6, 7);
  const std::array<Poly, 3> m_row = b_row(8, 9);

  const Poly n = (k_row[0] * (l_row[1] * m_row[2] - l_row[2] * m_row[1]) -
                  k_row[1] * (l_row[0] * m_row[2] - l_row[2] * m_row[0]) +
                  k_row[2] * (l_row[0] * m_row[1] - l_row[1] * m_row[0]))
                     .trimmed(1e-12);

  std::vector<EssentialModel> models;
  for (double z : poly_real_roots(n, 1e-8)) {
    Mat3 bz;
    bz << k_row[0].eval(z), k_row[1].eval(z), k_row[2].eval(z),
          l_row[0].eval(z), l_row[1].eval(z), l_row[2].eval(z),
          m_row[0].eval(z), m_row[1].eval(z), m_row[2].eval(z);
    Eigen::JacobiSVD<Mat3> null_svd(bz, Eigen::ComputeFullV);
    const Vec3 v = null_svd.matrixV().col(2);
    if (std::abs(v[2]) < 1e-12 * v.norm()) continue;
    double x = v[0] / v[2];
    double y = v[1] / v[2];
    double zz = z;
    polish_solution(constraints, x, y, zz);

    const Mat3 em = x * basis[0] + y * basis[1] + zz * basis[2] + basis[3];
    EssentialModel model = EssentialModel::from_matrix(em, ModelSource::Modern5pt);
    const bool duplicate =
        std::any_of(models.begin(), models.end(), [&](const EssentialModel& m) {
          return model_distance(m.matrix, model.matrix) < 1e-4;
        });
    if (!duplicate) models.push_back(std::move(model));
  }
  (void)opts;
  return models;
}

}  // namespace kruppa
