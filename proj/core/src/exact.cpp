#include "lsmimo/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lsmimo/errors.hpp"

namespace lsmimo {
namespace {

// A = H diag(q/K) H^H + I/rho as a dense Hermitian matrix.
CMatrix interference_matrix(const CMatrix& h, const RVector& q, double rho) {
  const auto M = h.rows();
  const double K = static_cast<double>(h.cols());
  CMatrix scaled = h * (q.array() / K).sqrt().matrix().asDiagonal();
  CMatrix a = CMatrix::Identity(M, M) / rho;
  a.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  return a.selfadjointView<Eigen::Lower>();
}

void check_shapes(const CMatrix& h, const RVector& v, const char* who) {
  if (v.size() != h.cols()) {
    throw InputError(std::string(who) + ": vector length does not match the number of UEs");
  }
}

}  // namespace

RVector leave_one_out_gains(const CMatrix& h, const RVector& q, double rho) {
  const auto K = h.cols();
  const Eigen::LLT<CMatrix> llt(interference_matrix(h, q, rho));
  const CMatrix x = llt.solve(h);
  RVector d(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double full = h.col(k).dot(x.col(k)).real();
    // h^H Q_k h = h^H Q h / (1 - (q_k/K) h^H Q h)
    const double loo = full / (1.0 - q(k) / static_cast<double>(K) * full);
    d(k) = loo / static_cast<double>(K);
  }
  return d;
}

FixedPointResult solve_dual_powers(const CMatrix& h, const RVector& gamma, double rho, double p_max,
                                   const FixedPointOptions& options) {
  check_shapes(h, gamma, "solve_dual_powers");
  if (!(options.tol > 0.0)) throw InputError("solve_dual_powers: tol must be positive");
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    if (h.col(k).squaredNorm() == 0.0) throw InputError("solve_dual_powers: zero channel column");
  }
  const auto K = h.cols();
  const double Kd = static_cast<double>(K);

  FixedPointResult r;
  r.q = RVector::Constant(K, p_max);
  bool damped = false;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const RVector d = leave_one_out_gains(h, r.q, rho);
    const RVector ratio = gamma.cwiseQuotient(d);
    const double tau = Kd * p_max / ratio.sum();
    const RVector target = tau * ratio;

    const double residual = ((target - r.q).cwiseQuotient(r.q)).cwiseAbs().maxCoeff();
    r.tau = tau;
    r.iterations = it;
    r.residual = residual;
    if (residual <= options.tol) return r;

    if (residual < best) {
      best = residual;
      since_best = 0;
    } else if (++since_best >= options.stall_window) {
      damped = true;
    }
    r.q = damped ? RVector(0.5 * (r.q + target)) : target;
  }
  throw ConvergenceError("solve_dual_powers: no convergence", r.iterations, r.residual);
}

CMatrix compute_directions(const CMatrix& h, const RVector& q, double rho, DirectionMode mode) {
  check_shapes(h, q, "compute_directions");
  const auto K = h.cols();
  CMatrix v(h.rows(), K);
  if (mode == DirectionMode::Full) {
    v = Eigen::LLT<CMatrix>(interference_matrix(h, q, rho)).solve(h);
  } else {
    for (Eigen::Index k = 0; k < K; ++k) {
      RVector qk = q;
      qk(k) = 0.0;
      v.col(k) = Eigen::LLT<CMatrix>(interference_matrix(h, qk, rho)).solve(h.col(k));
    }
  }
  v.colwise().normalize();
  return v;
}

RVector allocate_dl_powers(const CMatrix& h_eval, const CMatrix& directions, const RVector& gamma,
                           double tau, double rho) {
  check_shapes(h_eval, gamma, "allocate_dl_powers");
  const auto K = h_eval.cols();
  const double Kd = static_cast<double>(K);
  // t(k, i) = h_k^H u_i
  const CMatrix t = h_eval.adjoint() * directions;
  const RMatrix gain = t.cwiseAbs2();

  RVector big_gamma(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double u2 = directions.col(k).squaredNorm();
    big_gamma(k) = Kd * gamma(k) * u2 / gain(k, k);
  }
  RMatrix f = gain / Kd;
  for (Eigen::Index k = 0; k < K; ++k) f(k, k) = 0.0;
  for (Eigen::Index i = 0; i < K; ++i) f.col(i) /= directions.col(i).squaredNorm();

  const RMatrix system = RMatrix::Identity(K, K) - tau * big_gamma.asDiagonal() * f;
  const Eigen::PartialPivLU<RMatrix> lu(system);
  if (!(lu.rcond() > 1e-12)) {
    throw InfeasibleError("allocate_dl_powers: power system is numerically singular");
  }
  const RVector p = lu.solve((tau / rho) * big_gamma);
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw InfeasibleError("allocate_dl_powers: SINR target requires a negative power");
  }
  return p;
}

RVector dl_sinr(const CMatrix& h_true, const Precoder& precoder, double rho) {
  const auto K = h_true.cols();
  const double Kd = static_cast<double>(K);
  const RMatrix gain = (h_true.adjoint() * precoder.directions).cwiseAbs2();
  RVector s(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double interference = 0.0;
    for (Eigen::Index i = 0; i < K; ++i) {
      if (i != k) interference += precoder.dl_powers(i) / Kd * gain(k, i);
    }
    s(k) = precoder.dl_powers(k) / Kd * gain(k, k) / (interference + 1.0 / rho);
  }
  return s;
}

RVector ul_sinr(const CMatrix& h_true, const CMatrix& directions, const RVector& q, double rho) {
  const auto K = h_true.cols();
  const double Kd = static_cast<double>(K);
  // gain(i, k) = |h_i^H v_k|^2
  const RMatrix gain = (h_true.adjoint() * directions).cwiseAbs2();
  RVector s(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double denom = directions.col(k).squaredNorm() / rho;
    for (Eigen::Index i = 0; i < K; ++i) {
      if (i != k) denom += q(i) / Kd * gain(i, k);
    }
    s(k) = q(k) / Kd * gain(k, k) / denom;
  }
  return s;
}

double weighted_min(const RVector& sinr, const RVector& gamma) {
  return sinr.cwiseQuotient(gamma).minCoeff();
}

OptimalTransceiver design_optimal(const CMatrix& h_est, const RVector& gamma, double rho, double p_max,
                                  const FixedPointOptions& options) {
  OptimalTransceiver t;
  t.dual = solve_dual_powers(h_est, gamma, rho, p_max, options);
  t.precoder.directions = compute_directions(h_est, t.dual.q, rho);
  t.precoder.dl_powers = allocate_dl_powers(h_est, t.precoder.directions, gamma, t.dual.tau, rho);
  return t;
}

SinrReport evaluate(const CMatrix& h_true, const OptimalTransceiver& t, const RVector& gamma, double rho) {
  SinrReport r;
  r.dl = dl_sinr(h_true, t.precoder, rho);
  r.ul = ul_sinr(h_true, t.precoder.directions, t.dual.q, rho);
  r.dl_weighted_min = weighted_min(r.dl, gamma);
  r.ul_weighted_min = weighted_min(r.ul, gamma);
  return r;
}

}  // namespace lsmimo
