#pragma once

#include <vector>

#include "lsmimo/types.hpp"

namespace lsmimo {

/// Truncated Taylor series f(t) = sum_{n<=N} c_n t^n around t = 0.
///
/// Coefficients are stored as c_n = f^{(n)}(0) / n!, so products are plain
/// Cauchy products and nothing overflows at moderate orders. Every operation
/// is exact up to the truncation order; the order of both operands must match.
class Jet {
 public:
  explicit Jet(int order);
  Jet(int order, std::vector<double> coeffs);

  static Jet constant(int order, double c);
  /// The identity series f(t) = t.
  static Jet variable(int order);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int n) const { return c_[static_cast<std::size_t>(n)]; }
  double& operator[](int n) { return c_[static_cast<std::size_t>(n)]; }
  const std::vector<double>& coeffs() const { return c_; }

  /// f^{(n)}(0) = n! c_n.
  double derivative(int n) const;
  /// Evaluates the truncated polynomial at t.
  double evaluate(double t) const;
  /// t * f(t), dropping the term that falls past the order.
  Jet times_t() const;
  /// Same series at a lower order.
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(double s, const Jet& a);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

 private:
  std::vector<double> c_;
};

/// 1 / f. Throws std::domain_error when c_0 == 0.
Jet reciprocal(const Jet& a);
/// sqrt(f). Requires c_0 > 0.
Jet sqrt(const Jet& a);

/// Truncated bivariate series g(t, u) = sum_{l,m<=N} c_{l,m} t^l u^m, truncated
/// per variable (a tensor-product truncation).
class BiJet {
 public:
  explicit BiJet(int order);

  static BiJet constant(int order, double c);
  /// f(t) g(u).
  static BiJet outer(const Jet& f_t, const Jet& g_u);

  int order() const { return n_ - 1; }
  double operator()(int l, int m) const { return c_[idx(l, m)]; }
  double& operator()(int l, int m) { return c_[idx(l, m)]; }

  /// d^l/dt^l d^m/du^m g(0, 0) = l! m! c_{l,m}.
  double derivative(int l, int m) const;
  double evaluate(double t, double u) const;
  /// t u g(t, u), truncated.
  BiJet times_tu() const;

  BiJet& operator+=(const BiJet& o);
  BiJet& operator-=(const BiJet& o);
  BiJet& operator*=(const BiJet& o);
  BiJet& operator+=(double s);
  BiJet& operator*=(double s);

  friend BiJet operator+(BiJet a, const BiJet& b) { return a += b; }
  friend BiJet operator-(BiJet a, const BiJet& b) { return a -= b; }
  friend BiJet operator*(BiJet a, const BiJet& b) { return a *= b; }
  friend BiJet operator+(BiJet a, double s) { return a += s; }
  friend BiJet operator+(double s, BiJet a) { return a += s; }
  friend BiJet operator-(double s, const BiJet& a);
  friend BiJet operator*(BiJet a, double s) { return a *= s; }
  friend BiJet operator*(double s, BiJet a) { return a *= s; }

 private:
  std::size_t idx(int l, int m) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(m);
  }
  int n_;
  std::vector<double> c_;
};

BiJet reciprocal(const BiJet& a);

/// Taylor expansion of delta(t), the positive solution of
///   delta(t) = (M/K) / (1 + (t/K) sum_i b_i / (1 + t delta(t) b_i)),
/// with loads b_i = q_bar_i beta_i.
struct DeltaExpansion {
  Jet delta{0};
  RVector loads;
  int M = 0;
  int K = 0;
};

/// Solves the implicit equation coefficient by coefficient. Since t multiplies
/// every occurrence of delta on the right-hand side, coefficient n of the
/// right-hand side depends on c_0..c_{n-1} only, so each substitution pass
/// fixes one more coefficient and N passes are exact to order N.
DeltaExpansion expand_delta(const RVector& q_bar, const RVector& beta, int M, int K, int order);

/// delta(t)(1 + (t/K) sum_i b_i / (1 + t delta(t) b_i)) - M/K; the zero jet
/// for an exact expansion.
Jet delta_residual(const DeltaExpansion& e);

/// Scalar delta(t) by direct fixed-point iteration (t >= 0, or small |t|).
double delta_value(const RVector& loads, int M, int K, double t, double tol = 1e-14);

}  // namespace lsmimo
