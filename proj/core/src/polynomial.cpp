#include "kruppa/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace kruppa {

namespace {

// Parlett-Reinsch balancing; improves companion-matrix eigenvalue accuracy.
template <typename Matrix>
void balance_companion(Matrix& m) {
  const int n = static_cast<int>(m.rows());
  const double gamma = 0.9;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      double row_norm = 0.0, col_norm = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row_norm += std::abs(m(i, j));
        col_norm += std::abs(m(j, i));
      }
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(row_norm / col_norm, &exponent);
      exponent /= 2;
      if (exponent != 0) {
        const double scaled_col = std::ldexp(col_norm, exponent);
        const double scaled_row = std::ldexp(row_norm, -exponent);
        if (scaled_col + scaled_row < gamma * (col_norm + row_norm)) {
          changed = true;
          const double up = std::ldexp(1.0, exponent);
          const double down = std::ldexp(1.0, -exponent);
          for (int j = 0; j < n; ++j) {
            if (j != i) m(i, j) *= down;
          }
          for (int j = 0; j < n; ++j) {
            if (j != i) m(j, i) *= up;
          }
        }
      }
    }
  }
}

template <typename Scalar, typename EvalFn, typename DerivFn>
void newton_polish(std::vector<cdouble>& roots, const EvalFn& f,
                   const DerivFn& df, double value_scale) {
  for (cdouble& r : roots) {
    cdouble best = r;
    double best_abs = std::abs(f(r));
    cdouble x = r;
    for (int it = 0; it < 12; ++it) {
      const cdouble fx = f(x);
      const cdouble dx = df(x);
      if (std::abs(dx) < 1e-300) break;
      const cdouble step = fx / dx;
      x -= step;
      const double fa = std::abs(f(x));
      if (fa < best_abs) {
        best_abs = fa;
        best = x;
      }
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
      if (fa > 1e6 * (value_scale + best_abs)) break;
    }
    r = best;
  }
  (void)value_scale;
}

std::vector<cdouble> quadratic_roots(const cdouble& a, const cdouble& b,
                                     const cdouble& c) {
  // Numerically stable form: q = -(b + sign * sqrt(disc)) / 2.
  const cdouble disc = std::sqrt(b * b - 4.0 * a * c);
  const cdouble q = (std::real(std::conj(b) * disc) >= 0.0)
                        ? -0.5 * (b + disc)
                        : -0.5 * (b - disc);
  std::vector<cdouble> out;
  out.push_back(q / a);
  if (std::abs(q) > 0.0) {
    out.push_back(c / q);
  } else {
    out.push_back(cdouble(0, 0));
  }
  return out;
}

}  // namespace

Poly::Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.assign(1, 0.0);
}

double Poly::coeff_norm() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

double Poly::eval(double x) const {
  double acc = 0.0;
  for (int i = degree(); i >= 0; --i) acc = acc * x + c_[i];
  return acc;
}

cdouble Poly::eval(const cdouble& x) const {
  cdouble acc(0, 0);
  for (int i = degree(); i >= 0; --i) acc = acc * x + c_[i];
  return acc;
}

Poly Poly::derivative() const {
  if (degree() == 0) return Poly();
  std::vector<double> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return Poly(std::move(d));
}

Poly Poly::trimmed(double tol) const {
  const double ref = tol * coeff_norm();
  int deg = degree();
  while (deg > 0 && std::abs(c_[deg]) <= ref) --deg;
  return Poly(std::vector<double>(c_.begin(), c_.begin() + deg + 1));
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<double> out(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) out[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) out[i] += o.c_[i];
  return Poly(std::move(out));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0; }

Poly Poly::operator*(const Poly& o) const {
  std::vector<double> out(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i) {
    for (size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
  }
  return Poly(std::move(out));
}

Poly Poly::operator*(double s) const {
  std::vector<double> out(c_);
  for (double& v : out) v *= s;
  return Poly(std::move(out));
}

CPoly::CPoly(std::vector<cdouble> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.assign(1, cdouble(0, 0));
}

double CPoly::coeff_norm() const {
  double m = 0.0;
  for (const cdouble& v : c_) m = std::max(m, std::abs(v));
  return m;
}

cdouble CPoly::eval(const cdouble& x) const {
  cdouble acc(0, 0);
  for (int i = degree(); i >= 0; --i) acc = acc * x + c_[i];
  return acc;
}

CPoly CPoly::derivative() const {
  if (degree() == 0) return CPoly();
  std::vector<cdouble> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return CPoly(std::move(d));
}

CPoly CPoly::trimmed(double tol) const {
  const double ref = tol * coeff_norm();
  int deg = degree();
  while (deg > 0 && std::abs(c_[deg]) <= ref) --deg;
  return CPoly(std::vector<cdouble>(c_.begin(), c_.begin() + deg + 1));
}

std::vector<cdouble> poly_roots(const Poly& p_in) {
  const Poly p = p_in.trimmed();
  const int n = p.degree();
  std::vector<cdouble> roots;
  if (n <= 0 || p.coeff_norm() == 0.0) return roots;
  if (n == 1) {
    roots.push_back(cdouble(-p.coeff(0) / p.coeff(1), 0.0));
  } else if (n == 2) {
    roots = quadratic_roots(p.coeff(2), p.coeff(1), p.coeff(0));
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    const double lead = p.coeff(n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeff(i) / lead;
    balance_companion(companion);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  "companion eigenvalue extraction failed");
    }
    roots.reserve(n);
    for (int i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()[i]);
  }
  const Poly dp = p.derivative();
  newton_polish<double>(
      roots, [&](const cdouble& x) { return p.eval(x); },
      [&](const cdouble& x) { return dp.eval(x); }, p.coeff_norm());
  return roots;
}

std::vector<cdouble> poly_roots(const CPoly& p_in) {
  const CPoly p = p_in.trimmed();
  const int n = p.degree();
  std::vector<cdouble> roots;
  if (n <= 0 || p.coeff_norm() == 0.0) return roots;
  if (n == 1) {
    roots.push_back(-p.coeff(0) / p.coeff(1));
  } else if (n == 2) {
    roots = quadratic_roots(p.coeff(2), p.coeff(1), p.coeff(0));
  } else {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    const cdouble lead = p.coeff(n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeff(i) / lead;
    balance_companion(companion);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  "companion eigenvalue extraction failed");
    }
    roots.reserve(n);
    for (int i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()[i]);
  }
  const CPoly dp = p.derivative();
  newton_polish<cdouble>(
      roots, [&](const cdouble& x) { return p.eval(x); },
      [&](const cdouble& x) { return dp.eval(x); }, p.coeff_norm());
  return roots;
}

std::vector<double> poly_real_roots(const Poly& p, double imag_tol) {
  std::vector<double> out;
  for (const cdouble& r : poly_roots(p)) {
    if (std::abs(r.imag()) <= imag_tol * (1.0 + std::abs(r.real()))) {
      out.push_back(r.real());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Poly3 Poly3::constant(double v) {
  Poly3 p;
  p.add_term(0, 0, 0, v);
  return p;
}

Poly3 Poly3::variable(int axis) {
  Poly3 p;
  int e[3] = {0, 0, 0};
  e[axis] = 1;
  p.add_term(e[0], e[1], e[2], 1.0);
  return p;
}

Poly3 Poly3::linear_form(const Vec3& l) {
  Poly3 p;
  p.add_term(1, 0, 0, l[0]);
  p.add_term(0, 1, 0, l[1]);
  p.add_term(0, 0, 1, l[2]);
  return p;
}

void Poly3::add_term(int i, int j, int k, double coeff) {
  if (coeff == 0.0) return;
  const Key key{i, j, k};
  auto [it, inserted] = terms_.try_emplace(key, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Poly3::coeff(int i, int j, int k) const {
  auto it = terms_.find(Key{i, j, k});
  return it == terms_.end() ? 0.0 : it->second;
}

bool Poly3::is_zero(double tol) const {
  const double ref = tol * coeff_norm();
  for (const auto& [key, v] : terms_) {
    if (std::abs(v) > ref) return false;
  }
  return true;
}

int Poly3::total_degree() const {
  int deg = -1;
  for (const auto& [key, v] : terms_) {
    deg = std::max(deg, key[0] + key[1] + key[2]);
  }
  return deg;
}

double Poly3::coeff_norm() const {
  double m = 0.0;
  for (const auto& [key, v] : terms_) m = std::max(m, std::abs(v));
  return m;
}

double Poly3::eval(const Vec3& u) const {
  double acc = 0.0;
  for (const auto& [key, v] : terms_) {
    acc += v * std::pow(u[0], key[0]) * std::pow(u[1], key[1]) *
           std::pow(u[2], key[2]);
  }
  return acc;
}

cdouble Poly3::eval(const Vec3c& u) const {
  cdouble acc(0, 0);
  for (const auto& [key, v] : terms_) {
    cdouble term(v, 0);
    for (int p = 0; p < key[0]; ++p) term *= u[0];
    for (int p = 0; p < key[1]; ++p) term *= u[1];
    for (int p = 0; p < key[2]; ++p) term *= u[2];
    acc += term;
  }
  return acc;
}

Poly3 Poly3::partial(int axis) const {
  Poly3 out;
  for (const auto& [key, v] : terms_) {
    if (key[axis] == 0) continue;
    Key k = key;
    const double c = v * k[axis];
    k[axis] -= 1;
    out.add_term(k[0], k[1], k[2], c);
  }
  return out;
}

Poly3 Poly3::operator+(const Poly3& o) const {
  Poly3 out = *this;
  for (const auto& [key, v] : o.terms_) out.add_term(key[0], key[1], key[2], v);
  return out;
}

Poly3 Poly3::operator-(const Poly3& o) const { return *this + o * -1.0; }

Poly3 Poly3::operator*(const Poly3& o) const {
  Poly3 out;
  for (const auto& [ka, va] : terms_) {
    for (const auto& [kb, vb] : o.terms_) {
      out.add_term(ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], va * vb);
    }
  }
  return out;
}

Poly3 Poly3::operator*(double s) const {
  Poly3 out;
  if (s == 0.0) return out;
  out.terms_ = terms_;
  for (auto& [key, v] : out.terms_) v *= s;
  return out;
}

Poly3 Poly3::substitute(const Mat3& m) const {
  const int deg = std::max(total_degree(), 0);
  // Powers of the three substituted linear forms, memoized up to deg.
  std::array<std::vector<Poly3>, 3> powers;
  for (int axis = 0; axis < 3; ++axis) {
    powers[axis].resize(deg + 1);
    powers[axis][0] = Poly3::constant(1.0);
    const Poly3 lin = Poly3::linear_form(m.row(axis));
    for (int p = 1; p <= deg; ++p) {
      powers[axis][p] = powers[axis][p - 1] * lin;
    }
  }
  Poly3 out;
  for (const auto& [key, v] : terms_) {
    Poly3 term = powers[0][key[0]] * powers[1][key[1]] * powers[2][key[2]];
    out = out + term * v;
  }
  return out;
}

Poly3 Poly3::pruned(double tol) const {
  const double ref = tol * coeff_norm();
  Poly3 out;
  for (const auto& [key, v] : terms_) {
    if (std::abs(v) > ref) out.add_term(key[0], key[1], key[2], v);
  }
  return out;
}

double Poly2::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i >= c_.rows() || j >= c_.cols()) return 0.0;
  return c_(i, j);
}

int Poly2::total_degree(double tol) const {
  const double ref = tol * coeff_norm();
  int deg = -1;
  for (int i = 0; i < c_.rows(); ++i) {
    for (int j = 0; j < c_.cols(); ++j) {
      if (std::abs(c_(i, j)) > ref) deg = std::max(deg, i + j);
    }
  }
  return deg;
}

double Poly2::eval(double s, double t) const {
  // Horner in s of Horner-in-t rows.
  double acc = 0.0;
  for (int i = static_cast<int>(c_.rows()) - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(c_.cols()) - 1; j >= 0; --j) {
      row = row * t + c_(i, j);
    }
    acc = acc * s + row;
  }
  return acc;
}

cdouble Poly2::eval(const cdouble& s, const cdouble& t) const {
  cdouble acc(0, 0);
  for (int i = static_cast<int>(c_.rows()) - 1; i >= 0; --i) {
    cdouble row(0, 0);
    for (int j = static_cast<int>(c_.cols()) - 1; j >= 0; --j) {
      row = row * t + c_(i, j);
    }
    acc = acc * s + row;
  }
  return acc;
}

Poly2 Poly2::partial_s() const {
  if (c_.rows() == 1) return Poly2();
  Eigen::MatrixXd out(c_.rows() - 1, c_.cols());
  for (int i = 1; i < c_.rows(); ++i) out.row(i - 1) = c_.row(i) * i;
  return Poly2(out);
}

Poly2 Poly2::partial_t() const {
  if (c_.cols() == 1) return Poly2();
  Eigen::MatrixXd out(c_.rows(), c_.cols() - 1);
  for (int j = 1; j < c_.cols(); ++j) out.col(j - 1) = c_.col(j) * j;
  return Poly2(out);
}

CPoly Poly2::at_s(const cdouble& s) const {
  std::vector<cdouble> coeffs(c_.cols(), cdouble(0, 0));
  for (int j = 0; j < c_.cols(); ++j) {
    cdouble acc(0, 0);
    for (int i = static_cast<int>(c_.rows()) - 1; i >= 0; --i) {
      acc = acc * s + c_(i, j);
    }
    coeffs[j] = acc;
  }
  return CPoly(std::move(coeffs));
}

Poly2 dehomogenize(const Poly3& p, int chart_axis) {
  const int axis_s = (chart_axis == 0) ? 1 : 0;
  const int axis_t = (chart_axis == 2) ? 1 : 2;
  const int deg = std::max(p.total_degree(), 0);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(deg + 1, deg + 1);
  for (const auto& [key, v] : p.terms()) {
    table(key[axis_s], key[axis_t]) += v;
  }
  return Poly2(table);
}

void polish_common_zero(const Poly2& a, const Poly2& b, cdouble& s, cdouble& t,
                        bool* converged) {
  const Poly2 as = a.partial_s();
  const Poly2 at = a.partial_t();
  const Poly2 bs = b.partial_s();
  const Poly2 bt = b.partial_t();
  const double scale = std::max(a.coeff_norm(), b.coeff_norm());

  auto norm_res = [&](const cdouble& x, const cdouble& y) {
    return std::max(std::abs(a.eval(x, y)), std::abs(b.eval(x, y)));
  };

  cdouble best_s = s, best_t = t;
  double best = norm_res(s, t);
  bool ok = false;
  cdouble xs = s, xt = t;
  for (int it = 0; it < 30; ++it) {
    const cdouble fa = a.eval(xs, xt);
    const cdouble fb = b.eval(xs, xt);
    const cdouble j11 = as.eval(xs, xt);
    const cdouble j12 = at.eval(xs, xt);
    const cdouble j21 = bs.eval(xs, xt);
    const cdouble j22 = bt.eval(xs, xt);
    const cdouble det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14 * scale * scale) break;
    const cdouble ds = (fa * j22 - fb * j12) / det;
    const cdouble dt = (fb * j11 - fa * j21) / det;
    xs -= ds;
    xt -= dt;
    const double r = norm_res(xs, xt);
    if (r < best) {
      best = r;
      best_s = xs;
      best_t = xt;
    } else if (r > 10.0 * best + scale) {
      break;
    }
    if (best <= 1e-15 * scale) {
      ok = true;
      break;
    }
    if (std::abs(ds) + std::abs(dt) <
        1e-16 * (1.0 + std::abs(xs) + std::abs(xt))) {
      ok = best <= 1e-10 * scale;
      break;
    }
  }
  s = best_s;
  t = best_t;
  if (converged) *converged = ok || best <= 1e-10 * scale;
}

namespace {

// Generalized eigenvalues (alpha, beta) from the quasi-triangular output of
// a real QZ decomposition, including the complex pairs hidden in the 2x2
// diagonal blocks.
std::vector<std::pair<cdouble, cdouble>> qz_eigenvalues(
    const Eigen::MatrixXd& s, const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(s.rows());
  std::vector<std::pair<cdouble, cdouble>> out;
  out.reserve(n);
  int i = 0;
  while (i < n) {
    const bool two_by_two = (i + 1 < n) && (s(i + 1, i) != 0.0);
    if (!two_by_two) {
      out.emplace_back(cdouble(s(i, i), 0.0), cdouble(t(i, i), 0.0));
      ++i;
      continue;
    }
    // det(S2 - lambda T2) = a2 lambda^2 + a1 lambda + a0 with T2 upper
    // triangular.
    const double s11 = s(i, i), s12 = s(i, i + 1);
    const double s21 = s(i + 1, i), s22 = s(i + 1, i + 1);
    const double t11 = t(i, i), t12 = t(i, i + 1), t22 = t(i + 1, i + 1);
    const double a2 = t11 * t22;
    const double a1 = -(s11 * t22 + s22 * t11 - s21 * t12);
    const double a0 = s11 * s22 - s12 * s21;
    const double scale = std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
    if (scale == 0.0) {
      out.emplace_back(cdouble(0, 0), cdouble(0, 0));
      out.emplace_back(cdouble(0, 0), cdouble(0, 0));
    } else if (std::abs(a2) > 1e-14 * scale) {
      const cdouble disc = std::sqrt(cdouble(a1 * a1 - 4.0 * a2 * a0, 0.0));
      const cdouble r1 = (-a1 + disc) / (2.0 * a2);
      const cdouble r2 = (-a1 - disc) / (2.0 * a2);
      out.emplace_back(r1, cdouble(1, 0));
      out.emplace_back(r2, cdouble(1, 0));
    } else if (std::abs(a1) > 1e-14 * scale) {
      out.emplace_back(cdouble(-a0 / a1, 0.0), cdouble(1, 0));
      out.emplace_back(cdouble(1, 0), cdouble(0, 0));  // infinite
    } else {
      out.emplace_back(cdouble(1, 0), cdouble(0, 0));
      out.emplace_back(cdouble(1, 0), cdouble(0, 0));
    }
    i += 2;
  }
  return out;
}

}  // namespace

std::vector<cdouble> sylvester_pencil_roots(const Poly2& a, const Poly2& b,
                                            double finite_tol) {
  const int p = a.deg_t();
  const int q = b.deg_t();
  if (p < 1 || q < 1) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "resultant requires positive degrees in t");
  }
  const int dim = p + q;
  const int ds = std::max(a.deg_s(), b.deg_s());

  // Sylvester matrix with polynomial entries, split by powers of s.
  std::vector<Eigen::MatrixXd> sk(ds + 1, Eigen::MatrixXd::Zero(dim, dim));
  for (int k = 0; k <= ds; ++k) {
    for (int row = 0; row < q; ++row) {
      for (int j = 0; j <= p; ++j) sk[k](row, row + (p - j)) = a.coeff(k, j);
    }
    for (int row = 0; row < p; ++row) {
      for (int j = 0; j <= q; ++j) sk[k](q + row, row + (q - j)) = b.coeff(k, j);
    }
  }
  int deg = ds;
  while (deg > 0 && sk[deg].cwiseAbs().maxCoeff() == 0.0) --deg;
  if (deg == 0) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "Sylvester pencil is constant in s");
  }

  // Variable scaling s = gamma * s_hat chosen by a log-linear fit of the
  // block norms; evens out the pencil before linearization.
  double gamma = 1.0;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = 0; k <= deg; ++k) {
      const double nk = sk[k].norm();
      if (nk <= 0.0) continue;
      const double x = k, y = std::log(nk);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m >= 2) {
      const double denom = m * sxx - sx * sx;
      if (std::abs(denom) > 0.0) {
        const double slope = (m * sxy - sx * sy) / denom;
        gamma = std::exp(slope);
        gamma = std::clamp(gamma, 1e-3, 1e3);
      }
    }
  }
  double pw = 1.0;
  double max_norm = 0.0;
  for (int k = 0; k <= deg; ++k) {
    sk[k] *= pw;
    pw /= gamma;
    max_norm = std::max(max_norm, sk[k].cwiseAbs().maxCoeff());
  }
  for (int k = 0; k <= deg; ++k) sk[k] /= max_norm;

  const int n = dim * deg;
  Eigen::MatrixXd lin_a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd lin_b = Eigen::MatrixXd::Zero(n, n);
  for (int blk = 0; blk + 1 < deg; ++blk) {
    lin_a.block(blk * dim, (blk + 1) * dim, dim, dim).setIdentity();
    lin_b.block(blk * dim, blk * dim, dim, dim).setIdentity();
  }
  for (int k = 0; k < deg; ++k) {
    lin_a.block((deg - 1) * dim, k * dim, dim, dim) = -sk[k];
  }
  lin_b.block((deg - 1) * dim, (deg - 1) * dim, dim, dim) = sk[deg];

  Eigen::RealQZ<Eigen::MatrixXd> qz(n);
  qz.setMaxIterations(200 * n);
  qz.compute(lin_a, lin_b, false);
  if (qz.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "QZ iteration failed on the Sylvester pencil");
  }

  std::vector<cdouble> roots;
  for (const auto& [alpha, beta] : qz_eigenvalues(qz.matrixS(), qz.matrixT())) {
    if (std::abs(beta) > finite_tol * (std::abs(alpha) + std::abs(beta))) {
      roots.push_back(alpha / beta / gamma);
    }
  }
  return roots;
}

Poly sylvester_resultant_t(const Poly2& a, const Poly2& b, int degree_bound) {
  const int p = a.deg_t();
  const int q = b.deg_t();
  if (p < 1 || q < 1) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "resultant requires positive degrees in t");
  }
  const int dim = p + q;

  int nodes = 1;
  while (nodes < degree_bound + 1) nodes <<= 1;

  // Evaluate det(Sylvester(s)) at scaled roots of unity; the inverse DFT is a
  // unitary interpolation, so no Vandermonde conditioning issues.
  const double radius = 1.0;
  std::vector<cdouble> values(nodes);
  Eigen::MatrixXcd syl(dim, dim);
  for (int k = 0; k < nodes; ++k) {
    const double angle = 2.0 * M_PI * k / nodes;
    const cdouble s = radius * cdouble(std::cos(angle), std::sin(angle));
    const CPoly as = a.at_s(s);
    const CPoly bs = b.at_s(s);
    syl.setZero();
    for (int row = 0; row < q; ++row) {
      for (int j = 0; j <= p; ++j) syl(row, row + (p - j)) = as.coeff(j);
    }
    for (int row = 0; row < p; ++row) {
      for (int j = 0; j <= q; ++j) syl(q + row, row + (q - j)) = bs.coeff(j);
    }
    values[k] = Eigen::PartialPivLU<Eigen::MatrixXcd>(syl).determinant();
  }

  std::vector<double> coeffs(degree_bound + 1, 0.0);
  double scale = 1.0;
  for (int j = 0; j <= degree_bound; ++j) {
    cdouble acc(0, 0);
    for (int k = 0; k < nodes; ++k) {
      const double angle = -2.0 * M_PI * j * k / nodes;
      acc += values[k] * cdouble(std::cos(angle), std::sin(angle));
    }
    coeffs[j] = acc.real() / (nodes * scale);
    scale *= radius;
  }
  return Poly(std::move(coeffs));
}

}  // namespace kruppa
