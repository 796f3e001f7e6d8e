#pragma once

#include <vector>

#include "lsmimo/channel.hpp"
#include "lsmimo/exact.hpp"
#include "lsmimo/jet.hpp"
#include "lsmimo/types.hpp"

namespace lsmimo {

// User-specific truncated polynomial expansion (US-TPE) transceiver.
//
// UE k's beam is v_k = sum_{l<J} w_{l,k} S^l h_est_k / sqrt(K), where
// S = H_est Q_bar H_est^H / K. Applying it only needs J-1 products with S.
// The weights w_k and powers come from deterministic equivalents of the
// moment matrices a_k, E_k and B_{k,i}, which are Taylor coefficients of a
// few closed-form functions of delta(t).

// ---- Expansions behind the deterministic moments -------------------------

/// beta_k delta(t) / (1 + t b_k delta(t)), b_k = q_bar_k beta_k.
Jet x_bar_jet(const Jet& delta, double load_k, double beta_k);

/// 1 / (1 + t b delta(t)).
Jet resolvent_factor_jet(const Jet& delta, double load);

/// delta(t) delta(u) / (M/K - (t u / K) delta(t) delta(u) sum_i b_i^2 r_i(t) r_i(u)).
/// `delta` may be truncated below the expansion's own order.
BiJet alpha_bar_bijet(const Jet& delta, const RVector& loads, int M, int K);

/// beta_k (eta_k^2 + (1 - eta_k^2) r_k(t) r_k(u)).
BiJet f_bar_bijet(const Jet& delta, double load_k, double beta_k, double eta_k);

/// beta_i f_bar_k(t,u) alpha_bar(t,u) r_i(t) r_i(u).
BiJet z_bar_bijet(const BiJet& f_bar_k, const BiJet& alpha_bar, const Jet& delta, double load_i,
                  double beta_i);

// ---- Deterministic moments ------------------------------------------------

struct DeterministicMoments {
  int J = 0;
  int K = 0;
  std::vector<RVector> a_bar;       // K vectors of length J
  std::vector<RMatrix> E_bar;       // K symmetric positive definite J x J
  std::vector<RMatrix> B_bar;       // K*K matrices, row-major in (k, i)
  std::vector<RMatrix> E_inv_sqrt;  // E_bar_k^{-1/2}
  DeltaExpansion delta;             // order 2(J-1)

  const RMatrix& B(int k, int i) const {
    return B_bar[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) + static_cast<std::size_t>(i)];
  }
};

/// Builds a_bar, E_bar and B_bar from jets of order 2(J-1) (univariate) and
/// J-1 (bivariate). Throws ConditioningError when some E_bar_k has an
/// eigenvalue below 1e-12 times its largest one.
DeterministicMoments build_deterministic_moments(const RVector& beta, const RVector& q_bar,
                                                 const RVector& eta, int M, int K, int J);

/// Symmetric inverse square root with the relative eigenvalue floor above.
RMatrix inverse_sqrt_spd(const RMatrix& e);

// ---- Optimization -----------------------------------------------------------

/// psi_k(q) = x_k^T (sum_{i!=k} q_i/K Ebar_k^{-1/2} Bbar_{i,k} Ebar_k^{-1/2} + I/rho)^{-1} x_k
/// with x_k = Ebar_k^{-1/2} abar_k: the best achievable uplink SINR per unit
/// power of UE k.
RVector tpe_uplink_gains(const DeterministicMoments& m, const RVector& q, double rho);

/// Picard iteration q_k <- gamma_k tau / psi_k(q), tau = K p_max / sum gamma/psi,
/// from q = p_max. Same scheme and stopping rule as the exact solver.
FixedPointResult solve_qtpe(const DeterministicMoments& m, const RVector& gamma, double rho, double p_max,
                            const FixedPointOptions& options = {});

struct TpeWeights {
  std::vector<RVector> c;  // unit-norm whitened weights
  std::vector<RVector> w;  // polynomial coefficients, w_k = Ebar_k^{-1/2} c_k
};

TpeWeights optimal_weights(const DeterministicMoments& m, const RVector& q_tpe, double rho);

/// Whitened weights c_k = Ebar_k^{1/2} w_k / ||Ebar_k^{1/2} w_k|| for arbitrary w.
TpeWeights whiten(const DeterministicMoments& m, std::vector<RVector> w);

/// Downlink signal gains (c_k^T Ebar_k^{-1/2} abar_k)^2 and couplings
/// F_{k,i} = (1/K) c_i^T Ebar_i^{-1/2} Bbar_{k,i} Ebar_i^{-1/2} c_i.
RVector tpe_dl_signal_gains(const DeterministicMoments& m, const TpeWeights& weights);
RMatrix tpe_dl_coupling(const DeterministicMoments& m, const TpeWeights& weights);

/// p = (tau/rho)(I - tau Gamma F)^{-1} Gamma 1 with Gamma_k = gamma_k / gain_k.
RVector tpe_dl_powers(const DeterministicMoments& m, const TpeWeights& weights, const RVector& gamma,
                      double tau, double rho);

struct BalancedPowers {
  RVector p;
  double tau = 0.0;
};

/// Max-min weighted SINR powers for fixed beams: the tau whose equalizing
/// powers exactly exhaust the budget, found by bisection.
BalancedPowers balance_dl_powers(const RVector& signal_gain, const RMatrix& coupling, const RVector& gamma,
                                 double rho, double p_max);

struct TpeSolution {
  TpeWeights weights;
  RVector q_tpe;
  RVector p_tpe;
  double tau_tpe = 0.0;
  std::size_t iterations = 0;
};

TpeSolution design_tpe(const DeterministicMoments& m, const RVector& gamma, double rho, double p_max,
                       const FixedPointOptions& options = {});

/// Baseline that shares one polynomial across all UEs: the mean of the
/// per-UE unit-normalized w_k.
TpeWeights common_weights(const DeterministicMoments& m, const TpeWeights& per_ue);

struct AsymptoticTpeSinrs {
  RVector sinr;
  double power = 0.0;  // (1/K) sum_k w_k^T Ebar_k w_k
};

AsymptoticTpeSinrs tpe_asymptotic_sinrs(const DeterministicMoments& m, const std::vector<RVector>& w,
                                        const RVector& powers, double rho, Link link);

// ---- Realized channels ------------------------------------------------------

struct EmpiricalMoments {
  int J = 0;
  int K = 0;
  std::vector<CVector> a;
  std::vector<CMatrix> E;
  std::vector<CMatrix> B;  // K*K, row-major in (k, i)

  const CMatrix& b(int k, int i) const {
    return B[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) + static_cast<std::size_t>(i)];
  }
};

/// Krylov blocks S^l H_est for l < J (S is never formed).
std::vector<CMatrix> krylov_blocks(const CMatrix& h_est, const RVector& q_bar, int J);

EmpiricalMoments build_empirical_moments(const ChannelRealization& channel, const RVector& q_bar, int J);

/// Quadratic-form evaluation of the realized TPE SINRs.
RVector tpe_empirical_sinrs(const EmpiricalMoments& m, const std::vector<RVector>& w, const RVector& powers,
                            double rho, Link link);

/// Unnormalized beams v_k = sum_l w_{l,k} S^l h_est_k / sqrt(K), using only
/// matrix-vector products.
CMatrix tpe_beamformers(const CMatrix& h_est, const RVector& q_bar, const std::vector<RVector>& w);

/// Same SINRs as tpe_empirical_sinrs, obtained by forming the beams and
/// evaluating the ordinary SINR expressions on the true channel.
RVector tpe_beamformer_sinrs(const ChannelRealization& channel, const RVector& q_bar,
                             const std::vector<RVector>& w, const RVector& powers, double rho, Link link);

}  // namespace lsmimo
