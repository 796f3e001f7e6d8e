#pragma once

#include <utility>

#include "lsmimo/types.hpp"

namespace lsmimo {

// Large-system (deterministic) counterparts of the exact max-min transceiver.
// Everything here depends only on priorities gamma, path losses beta, the
// per-UE CSI quality eta and the dimensions; nothing is random.

struct AsymptoticParams {
  double tau_bar = 0.0;
  RVector q_bar;
  RVector p_bar;
  double xi = 0.0;
  RVector mu;
};

/// Powers of the asymptotically optimal precoder (p_tilde) and receiver
/// (q_tilde); both average to p_max.
struct AolpPowers {
  RVector p_tilde;
  RVector q_tilde;
};

/// Right-hand side of the tau_bar fixed point:
/// rho p_max / mean(gamma/beta) * (M/K - mean(gamma tau / (1 + gamma tau))).
double tau_bar_rhs(double tau, const RVector& gamma, const RVector& beta, int M, int K, double rho,
                   double p_max);

/// Unique positive root of tau = tau_bar_rhs(tau). The right-hand side is
/// strictly decreasing, so bracketing plus bisection always converges.
/// On return |tau - rhs(tau)| <= tol * tau.
double solve_tau_bar(const RVector& gamma, const RVector& beta, int M, int K, double rho, double p_max,
                     double tol = 1e-12);

/// q_bar_k = (gamma_k / beta_k) p_max / mean(gamma / beta).
RVector q_bar(const RVector& gamma, const RVector& beta, double p_max);

/// xi = M/K - mean((gamma tau)^2 / (1 + gamma tau)^2) and
/// mu_k = (1 + 2 eta_k^2 gamma_k tau + eta_k^2 gamma_k^2 tau^2) / (1 + gamma_k tau)^2.
std::pair<double, RVector> xi_and_mu(const RVector& gamma, double tau_bar, const RVector& eta, int M,
                                     int K);

/// p_bar_k = (gamma_k / beta_k)(tau/xi)(beta_k p_max / (1 + gamma_k tau)^2 + 1/rho).
RVector p_bar(const RVector& gamma, const RVector& beta, double tau_bar, double xi, double rho,
              double p_max);

AsymptoticParams asymptotic_params(const RVector& gamma, const RVector& beta, const RVector& eta, int M,
                                   int K, double rho, double p_max);

/// Deterministic downlink SINR of the plug-in optimal precoder.
RVector asym_dl_sinr(const AsymptoticParams& params, const RVector& beta, double rho, double p_max,
                     const RVector& eta);

/// Deterministic uplink SINR of the plug-in optimal receiver.
RVector asym_ul_sinr(const AsymptoticParams& params, const RVector& beta, double rho, const RVector& eta);

/// Deterministic SINRs for arbitrary powers when the beam directions are the
/// asymptotic ones (full-sum regularized inverse with q_bar).
RVector asym_sinr_given_powers(const RVector& powers, Link link, const AsymptoticParams& params,
                               const RVector& beta, double rho, const RVector& eta);

/// Closed-form maximizers of the deterministic min weighted SINR.
AolpPowers aolp_powers(const RVector& gamma, const RVector& beta, const RVector& mu, double rho,
                       double p_max);

}  // namespace lsmimo
