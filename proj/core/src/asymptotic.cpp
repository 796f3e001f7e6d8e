#include "lsmimo/asymptotic.hpp"

#include <cmath>

#include "lsmimo/errors.hpp"

namespace lsmimo {
namespace {

void check_sizes(const RVector& a, const RVector& b, const char* who) {
  if (a.size() != b.size()) throw InputError(std::string(who) + ": vector sizes differ");
}

}  // namespace

double tau_bar_rhs(double tau, const RVector& gamma, const RVector& beta, int M, int K, double rho,
                   double p_max) {
  const double mean_gb = gamma.cwiseQuotient(beta).mean();
  const RVector gt = gamma * tau;
  const double load = (gt.array() / (1.0 + gt.array())).mean();
  return rho * p_max / mean_gb * (static_cast<double>(M) / K - load);
}

double solve_tau_bar(const RVector& gamma, const RVector& beta, int M, int K, double rho, double p_max,
                     double tol) {
  check_sizes(gamma, beta, "solve_tau_bar");
  if (K >= M) throw InputError("solve_tau_bar: requires K < M");
  if ((beta.array() <= 0.0).any()) throw InputError("solve_tau_bar: betas must be positive");
  auto g = [&](double t) { return t - tau_bar_rhs(t, gamma, beta, M, K, rho, p_max); };

  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InputError("solve_tau_bar: no bracket");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 0.25 * tol * hi) break;
  }
  const double tau = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  if (!(tau > 0.0) || std::abs(g(tau)) > tol * tau) {
    // Only reachable with tol below the floating-point resolution at tau.
    throw InputError("solve_tau_bar: tolerance not attainable");
  }
  return tau;
}

RVector q_bar(const RVector& gamma, const RVector& beta, double p_max) {
  check_sizes(gamma, beta, "q_bar");
  const RVector gb = gamma.cwiseQuotient(beta);
  return gb * (p_max / gb.mean());
}

std::pair<double, RVector> xi_and_mu(const RVector& gamma, double tau_bar, const RVector& eta, int M,
                                     int K) {
  check_sizes(gamma, eta, "xi_and_mu");
  const Eigen::ArrayXd gt = gamma.array() * tau_bar;
  const Eigen::ArrayXd denom = (1.0 + gt).square();
  const double xi = static_cast<double>(M) / K - (gt.square() / denom).mean();
  const Eigen::ArrayXd e2 = eta.array().square();
  const RVector mu = ((1.0 + 2.0 * e2 * gt + e2 * gt.square()) / denom).matrix();
  return {xi, mu};
}

RVector p_bar(const RVector& gamma, const RVector& beta, double tau_bar, double xi, double rho,
              double p_max) {
  check_sizes(gamma, beta, "p_bar");
  if (!(xi > 0.0)) throw InputError("p_bar: xi must be positive");
  const Eigen::ArrayXd g = gamma.array();
  const Eigen::ArrayXd b = beta.array();
  const Eigen::ArrayXd inner = b * p_max / (1.0 + g * tau_bar).square() + 1.0 / rho;
  return (g / b * (tau_bar / xi) * inner).matrix();
}

AsymptoticParams asymptotic_params(const RVector& gamma, const RVector& beta, const RVector& eta, int M,
                                   int K, double rho, double p_max) {
  AsymptoticParams p;
  p.tau_bar = solve_tau_bar(gamma, beta, M, K, rho, p_max);
  p.q_bar = q_bar(gamma, beta, p_max);
  auto [xi, mu] = xi_and_mu(gamma, p.tau_bar, eta, M, K);
  p.xi = xi;
  p.mu = std::move(mu);
  p.p_bar = p_bar(gamma, beta, p.tau_bar, p.xi, rho, p_max);
  return p;
}

RVector asym_dl_sinr(const AsymptoticParams& params, const RVector& beta, double rho, double p_max,
                     const RVector& eta) {
  const Eigen::ArrayXd num = params.p_bar.array() * (1.0 - eta.array().square()) * params.xi;
  const Eigen::ArrayXd den = params.mu.array() * p_max + 1.0 / (rho * beta.array());
  return (num / den).matrix();
}

RVector asym_ul_sinr(const AsymptoticParams& params, const RVector& beta, double rho, const RVector& eta) {
  return asym_sinr_given_powers(params.q_bar, Link::Uplink, params, beta, rho, eta);
}

RVector asym_sinr_given_powers(const RVector& powers, Link link, const AsymptoticParams& params,
                               const RVector& beta, double rho, const RVector& eta) {
  const Eigen::ArrayXd num = powers.array() * (1.0 - eta.array().square()) * params.xi;
  Eigen::ArrayXd den;
  if (link == Link::Downlink) {
    den = params.mu.array() * powers.mean() + 1.0 / (rho * beta.array());
  } else {
    // (1/K) sum_i (beta_i / beta_k) mu_i q_i
    const double coupled = (beta.array() * params.mu.array() * powers.array()).mean();
    den = coupled / beta.array() + 1.0 / (rho * beta.array());
  }
  return (num / den).matrix();
}

AolpPowers aolp_powers(const RVector& gamma, const RVector& beta, const RVector& mu, double rho,
                       double p_max) {
  check_sizes(gamma, beta, "aolp_powers");
  check_sizes(gamma, mu, "aolp_powers");
  const Eigen::ArrayXd g = gamma.array();
  const Eigen::ArrayXd b = beta.array();
  const Eigen::ArrayXd num = p_max * g * mu.array() + g / (rho * b);
  const double norm = (g * mu.array() + g / (rho * b * p_max)).mean();
  AolpPowers out;
  out.p_tilde = (num / norm).matrix();
  out.q_tilde = q_bar(gamma, beta, p_max);
  return out;
}

}  // namespace lsmimo
