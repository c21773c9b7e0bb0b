#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "kruppa/geometry.hpp"

namespace kruppa {

using cdouble = std::complex<double>;
using Vec3c = Eigen::Vector3cd;

/// Dense univariate polynomial with real coefficients, ascending powers:
/// c[0] + c[1] x + ... + c[n] x^n.
class Poly {
 public:
  Poly() : c_(1, 0.0) {}
  explicit Poly(std::vector<double> coeffs);
  static Poly constant(double v) { return Poly({v}); }
  static Poly variable() { return Poly({0.0, 1.0}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int i) const {
    return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : 0.0;
  }
  const std::vector<double>& coeffs() const { return c_; }
  double coeff_norm() const;

  double eval(double x) const;
  cdouble eval(const cdouble& x) const;
  Poly derivative() const;

  // Drops leading coefficients below tol * coeff_norm().
  Poly trimmed(double tol = 1e-12) const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;
  Poly& operator+=(const Poly& o) { return *this = *this + o; }

 private:
  std::vector<double> c_;
};

/// Univariate polynomial with complex coefficients (back-substitution helper).
class CPoly {
 public:
  CPoly() : c_(1, cdouble(0, 0)) {}
  explicit CPoly(std::vector<cdouble> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  cdouble coeff(int i) const {
    return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : cdouble(0, 0);
  }
  double coeff_norm() const;
  cdouble eval(const cdouble& x) const;
  CPoly derivative() const;
  CPoly trimmed(double tol = 1e-12) const;

 private:
  std::vector<cdouble> c_;
};

/// All complex roots by balanced companion-matrix eigenvalues, each polished
/// by a few Newton steps. Constant polynomials yield no roots.
std::vector<cdouble> poly_roots(const Poly& p);
std::vector<cdouble> poly_roots(const CPoly& p);

/// Real roots: a complex root is accepted as real when
/// |imag| <= imag_tol * (1 + |real|).
std::vector<double> poly_real_roots(const Poly& p, double imag_tol = 1e-8);

/// Sparse trivariate polynomial over exponent triples.
class Poly3 {
 public:
  using Key = std::array<int, 3>;

  Poly3() = default;
  static Poly3 constant(double v);
  static Poly3 variable(int axis);
  static Poly3 linear_form(const Vec3& l);  // l0 u0 + l1 u1 + l2 u2

  void add_term(int i, int j, int k, double coeff);
  double coeff(int i, int j, int k) const;
  const std::map<Key, double>& terms() const { return terms_; }

  bool is_zero(double tol = 0.0) const;
  int total_degree() const;  // -1 for the zero polynomial
  double coeff_norm() const;

  double eval(const Vec3& u) const;
  cdouble eval(const Vec3c& u) const;
  Poly3 partial(int axis) const;

  Poly3 operator+(const Poly3& o) const;
  Poly3 operator-(const Poly3& o) const;
  Poly3 operator*(const Poly3& o) const;
  Poly3 operator*(double s) const;

  /// Composition with a linear change of variables: returns p(m * v).
  Poly3 substitute(const Mat3& m) const;

  /// Drops terms below tol * coeff_norm().
  Poly3 pruned(double tol = 1e-14) const;

 private:
  std::map<Key, double> terms_;
};

/// Dense bivariate polynomial, c(i, j) is the coefficient of s^i t^j.
class Poly2 {
 public:
  Poly2() : c_(Eigen::MatrixXd::Zero(1, 1)) {}
  explicit Poly2(const Eigen::MatrixXd& coeffs) : c_(coeffs) {}

  int deg_s() const { return static_cast<int>(c_.rows()) - 1; }
  int deg_t() const { return static_cast<int>(c_.cols()) - 1; }
  double coeff(int i, int j) const;
  const Eigen::MatrixXd& table() const { return c_; }
  double coeff_norm() const { return c_.cwiseAbs().maxCoeff(); }

  /// Largest i + j with |c(i,j)| > tol * coeff_norm().
  int total_degree(double tol = 1e-9) const;

  double eval(double s, double t) const;
  cdouble eval(const cdouble& s, const cdouble& t) const;
  Poly2 partial_s() const;
  Poly2 partial_t() const;

  /// Coefficients in t with s fixed.
  CPoly at_s(const cdouble& s) const;

 private:
  Eigen::MatrixXd c_;
};

/// Sets u[chart_axis] = 1; the remaining coordinates in index order become
/// (s, t).
Poly2 dehomogenize(const Poly3& p, int chart_axis = 2);

/// Resultant of a and b with respect to t: the Sylvester determinant,
/// interpolated from evaluations at scaled roots of unity. degree_bound is an
/// upper bound for the s-degree of the result (e.g. the product of total
/// degrees for curves with no common component).
Poly sylvester_resultant_t(const Poly2& a, const Poly2& b, int degree_bound);

/// Joint complex Newton iteration on two bivariate curves; keeps the best
/// iterate and never moves away from it. Simple zeros converge to machine
/// precision; multiple zeros stall nearby, which `converged` reports.
void polish_common_zero(const Poly2& a, const Poly2& b, cdouble& s, cdouble& t,
                        bool* converged);

/// Finite roots of det(Sylvester_t(a, b))(s) computed without forming the
/// scalar eliminant: block-companion linearization of the Sylvester matrix
/// polynomial solved by QZ. Immune to the coefficient dynamic range that
/// breaks interpolated determinants when roots spread over decades.
std::vector<cdouble> sylvester_pencil_roots(const Poly2& a, const Poly2& b,
                                            double finite_tol = 1e-10);

}  // namespace kruppa
