#include "lsmimo/jet.hpp"

#include <cmath>
#include <stdexcept>

#include "lsmimo/errors.hpp"

namespace lsmimo {
namespace {

void check_order(int a, int b) {
  if (a != b) throw std::invalid_argument("jet orders differ");
}

}  // namespace

Jet::Jet(int order) : c_(static_cast<std::size_t>(order + 1), 0.0) {
  if (order < 0) throw std::invalid_argument("jet order must be non-negative");
}

Jet::Jet(int order, std::vector<double> coeffs) : c_(std::move(coeffs)) {
  c_.resize(static_cast<std::size_t>(order + 1), 0.0);
}

Jet Jet::constant(int order, double c) {
  Jet j(order);
  j.c_[0] = c;
  return j;
}

Jet Jet::variable(int order) {
  Jet j(order);
  if (order >= 1) j.c_[1] = 1.0;
  return j;
}

double Jet::derivative(int n) const {
  return std::tgamma(n + 1.0) * c_[static_cast<std::size_t>(n)];
}

double Jet::evaluate(double t) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Jet Jet::times_t() const {
  Jet r(order());
  for (int n = order(); n >= 1; --n) r[n] = (*this)[n - 1];
  return r;
}

Jet Jet::truncated(int new_order) const {
  if (new_order > order()) throw std::invalid_argument("cannot raise a jet's order");
  return Jet(new_order, std::vector<double>(c_.begin(), c_.begin() + new_order + 1));
}

Jet& Jet::operator+=(const Jet& o) {
  check_order(order(), o.order());
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_order(order(), o.order());
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  check_order(order(), o.order());
  const int N = order();
  std::vector<double> r(c_.size(), 0.0);
  for (int n = 0; n <= N; ++n) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) acc += (*this)[i] * o[n - i];
    r[static_cast<std::size_t>(n)] = acc;
  }
  c_ = std::move(r);
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : c_) c *= s;
  return *this;
}

Jet operator-(double s, const Jet& a) {
  Jet r = a * -1.0;
  r += s;
  return r;
}

Jet reciprocal(const Jet& a) {
  if (a[0] == 0.0) throw std::domain_error("jet reciprocal: zero constant term");
  const int N = a.order();
  Jet r(N);
  r[0] = 1.0 / a[0];
  for (int n = 1; n <= N; ++n) {
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) acc += a[i] * r[n - i];
    r[n] = -acc * r[0];
  }
  return r;
}

Jet sqrt(const Jet& a) {
  if (!(a[0] > 0.0)) throw std::domain_error("jet sqrt: constant term must be positive");
  const int N = a.order();
  Jet s(N);
  s[0] = std::sqrt(a[0]);
  for (int n = 1; n <= N; ++n) {
    double acc = a[n];
    for (int i = 1; i < n; ++i) acc -= s[i] * s[n - i];
    s[n] = acc / (2.0 * s[0]);
  }
  return s;
}

BiJet::BiJet(int order) : n_(order + 1), c_(static_cast<std::size_t>((order + 1) * (order + 1)), 0.0) {
  if (order < 0) throw std::invalid_argument("bijet order must be non-negative");
}

BiJet BiJet::constant(int order, double c) {
  BiJet b(order);
  b(0, 0) = c;
  return b;
}

BiJet BiJet::outer(const Jet& f_t, const Jet& g_u) {
  check_order(f_t.order(), g_u.order());
  BiJet b(f_t.order());
  for (int l = 0; l < b.n_; ++l) {
    for (int m = 0; m < b.n_; ++m) b(l, m) = f_t[l] * g_u[m];
  }
  return b;
}

double BiJet::derivative(int l, int m) const {
  return std::tgamma(l + 1.0) * std::tgamma(m + 1.0) * (*this)(l, m);
}

double BiJet::evaluate(double t, double u) const {
  double acc = 0.0;
  for (int l = n_ - 1; l >= 0; --l) {
    double row = 0.0;
    for (int m = n_ - 1; m >= 0; --m) row = row * u + (*this)(l, m);
    acc = acc * t + row;
  }
  return acc;
}

BiJet BiJet::times_tu() const {
  BiJet r(order());
  for (int l = 1; l < n_; ++l) {
    for (int m = 1; m < n_; ++m) r(l, m) = (*this)(l - 1, m - 1);
  }
  return r;
}

BiJet& BiJet::operator+=(const BiJet& o) {
  check_order(order(), o.order());
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

BiJet& BiJet::operator-=(const BiJet& o) {
  check_order(order(), o.order());
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

BiJet& BiJet::operator*=(const BiJet& o) {
  check_order(order(), o.order());
  BiJet r(order());
  for (int l = 0; l < n_; ++l) {
    for (int m = 0; m < n_; ++m) {
      double acc = 0.0;
      for (int i = 0; i <= l; ++i) {
        for (int j = 0; j <= m; ++j) acc += (*this)(i, j) * o(l - i, m - j);
      }
      r(l, m) = acc;
    }
  }
  *this = std::move(r);
  return *this;
}

BiJet& BiJet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

BiJet& BiJet::operator*=(double s) {
  for (auto& c : c_) c *= s;
  return *this;
}

BiJet operator-(double s, const BiJet& a) {
  BiJet r = a * -1.0;
  r += s;
  return r;
}

BiJet reciprocal(const BiJet& a) {
  if (a(0, 0) == 0.0) throw std::domain_error("bijet reciprocal: zero constant term");
  const int n = a.order() + 1;
  BiJet r(a.order());
  const double inv = 1.0 / a(0, 0);
  // Lexicographic order guarantees every r(l - i, m - j) used is already final.
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      if (l == 0 && m == 0) {
        r(0, 0) = inv;
        continue;
      }
      double acc = 0.0;
      for (int i = 0; i <= l; ++i) {
        for (int j = 0; j <= m; ++j) {
          if (i == 0 && j == 0) continue;
          acc += a(i, j) * r(l - i, m - j);
        }
      }
      r(l, m) = -acc * inv;
    }
  }
  return r;
}

DeltaExpansion expand_delta(const RVector& q_bar, const RVector& beta, int M, int K, int order) {
  if (order < 0) throw InputError("expand_delta: order must be non-negative");
  if (q_bar.size() != beta.size()) throw InputError("expand_delta: size mismatch");
  DeltaExpansion e;
  e.loads = q_bar.cwiseProduct(beta);
  e.M = M;
  e.K = K;
  const double ratio = static_cast<double>(M) / K;
  e.delta = Jet::constant(order, ratio);
  const Jet t = Jet::variable(order);
  for (int pass = 0; pass < order; ++pass) {
    const Jet t_delta = e.delta.times_t();
    Jet sum(order);
    for (Eigen::Index i = 0; i < e.loads.size(); ++i) {
      const double b = e.loads(i);
      sum += b * reciprocal(1.0 + b * t_delta);
    }
    e.delta = ratio * reciprocal(1.0 + sum.times_t() * (1.0 / K));
  }
  return e;
}

Jet delta_residual(const DeltaExpansion& e) {
  const int N = e.delta.order();
  const Jet t_delta = e.delta.times_t();
  Jet sum(N);
  for (Eigen::Index i = 0; i < e.loads.size(); ++i) {
    const double b = e.loads(i);
    sum += b * reciprocal(1.0 + b * t_delta);
  }
  Jet r = e.delta * (1.0 + sum.times_t() * (1.0 / e.K));
  r += -static_cast<double>(e.M) / e.K;
  return r;
}

double delta_value(const RVector& loads, int M, int K, double t, double tol) {
  const double ratio = static_cast<double>(M) / K;
  double d = ratio;
  for (int it = 0; it < 100'000; ++it) {
    const double s = (loads.array() / (1.0 + t * d * loads.array())).sum();
    const double next = ratio / (1.0 + t / K * s);
    if (std::abs(next - d) <= tol * std::abs(next)) return next;
    // Averaging keeps the map contractive for large t.
    d = 0.5 * (d + next);
  }
  throw ConvergenceError("delta_value: no convergence", 100'000, 0.0);
}

}  // namespace lsmimo
