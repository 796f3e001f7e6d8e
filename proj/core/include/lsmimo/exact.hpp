#pragma once

#include <cstddef>

#include "lsmimo/types.hpp"

namespace lsmimo {

// Exact max-min weighted SINR transceivers (optimal linear precoder and
// receiver) computed from one channel matrix. Under imperfect CSI every
// design step consumes the estimate while SINRs are evaluated on whichever
// matrix the caller passes, normally the true channel.

struct FixedPointOptions {
  double tol = 1e-10;
  std::size_t max_iter = 10'000;
  // Consecutive non-improving iterations before 0.5 damping switches on.
  std::size_t stall_window = 50;
};

/// Dual uplink powers q and the balanced weighted SINR tau. The mean of q
/// equals p_max at every iterate of the solver.
struct FixedPointResult {
  RVector q;
  double tau = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Unit-norm beam directions u_k plus downlink powers; the transmitted
/// precoder column is g_k = sqrt(p_k / K) u_k.
struct Precoder {
  CMatrix directions;
  RVector dl_powers;
};

struct SinrReport {
  RVector dl;
  RVector ul;
  double dl_weighted_min = 0.0;
  double ul_weighted_min = 0.0;
};

enum class DirectionMode {
  // (sum_i q_i/K h_i h_i^H + I/rho)^{-1} h_k with the full sum.
  Full,
  // Same with UE k removed from the sum. Yields identical unit directions.
  LeaveOneOut,
};

/// Leave-one-out signal gains d_k = (1/K) h_k^H (sum_{l != k} q_l/K h_l h_l^H + I/rho)^{-1} h_k,
/// obtained from a single Cholesky factorization and the rank-one downdate
/// identity.
RVector leave_one_out_gains(const CMatrix& h, const RVector& q, double rho);

/// Picard iteration q_k <- gamma_k tau / d_k(q), tau = K p_max / sum_n gamma_n / d_n(q),
/// started at q = p_max. Throws ConvergenceError after `max_iter` sweeps.
FixedPointResult solve_dual_powers(const CMatrix& h, const RVector& gamma, double rho, double p_max,
                                   const FixedPointOptions& options = {});

CMatrix compute_directions(const CMatrix& h, const RVector& q, double rho,
                           DirectionMode mode = DirectionMode::Full);

/// Powers that make every SINR_k / gamma_k equal tau on `h_eval`:
/// p = (tau/rho) (I - tau Gamma F)^{-1} Gamma 1. Throws InfeasibleError when
/// the system has condition number above 1e12 or yields a negative power.
RVector allocate_dl_powers(const CMatrix& h_eval, const CMatrix& directions, const RVector& gamma,
                           double tau, double rho);

RVector dl_sinr(const CMatrix& h_true, const Precoder& precoder, double rho);

/// Uplink SINR with receive vectors `directions` (any scaling) and UE powers q.
RVector ul_sinr(const CMatrix& h_true, const CMatrix& directions, const RVector& q, double rho);

double weighted_min(const RVector& sinr, const RVector& gamma);

/// Everything the exact scheme derives from a channel estimate.
struct OptimalTransceiver {
  FixedPointResult dual;
  Precoder precoder;
};

OptimalTransceiver design_optimal(const CMatrix& h_est, const RVector& gamma, double rho, double p_max,
                                  const FixedPointOptions& options = {});

SinrReport evaluate(const CMatrix& h_true, const OptimalTransceiver& t, const RVector& gamma, double rho);

}  // namespace lsmimo
