#include "lsmimo/tpe.hpp"

#include <cmath>
#include <limits>

#include "lsmimo/errors.hpp"

namespace lsmimo {
namespace {

double sign(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

RVector solve_power_system(const RVector& big_gamma, const RMatrix& coupling, double tau, double rho) {
  const auto K = big_gamma.size();
  const RMatrix system = RMatrix::Identity(K, K) - tau * big_gamma.asDiagonal() * coupling;
  const Eigen::PartialPivLU<RMatrix> lu(system);
  if (!(lu.rcond() > 1e-12)) {
    throw InfeasibleError("TPE power system is numerically singular");
  }
  const RVector p = lu.solve((tau / rho) * big_gamma);
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw InfeasibleError("TPE SINR target requires a negative power");
  }
  return p;
}

// w^T A w for Hermitian A and real w.
double hermitian_form(const CMatrix& a, const RVector& w) {
  const CVector wc = w.cast<cdouble>();
  return wc.dot(a * wc).real();
}

}  // namespace

Jet x_bar_jet(const Jet& delta, double load_k, double beta_k) {
  return beta_k * delta * resolvent_factor_jet(delta, load_k);
}

Jet resolvent_factor_jet(const Jet& delta, double load) {
  return reciprocal(1.0 + load * delta.times_t());
}

BiJet alpha_bar_bijet(const Jet& delta, const RVector& loads, int M, int K) {
  const int n = delta.order();
  BiJet sum(n);
  for (Eigen::Index i = 0; i < loads.size(); ++i) {
    const Jet r = resolvent_factor_jet(delta, loads(i));
    sum += (loads(i) * loads(i)) * BiJet::outer(r, r);
  }
  const BiJet dd = BiJet::outer(delta, delta);
  BiJet denom = (dd * sum).times_tu() * (-1.0 / K);
  denom += static_cast<double>(M) / K;
  return dd * reciprocal(denom);
}

BiJet f_bar_bijet(const Jet& delta, double load_k, double beta_k, double eta_k) {
  const Jet r = resolvent_factor_jet(delta, load_k);
  const double e2 = eta_k * eta_k;
  BiJet f = (1.0 - e2) * BiJet::outer(r, r);
  f += e2;
  return beta_k * f;
}

BiJet z_bar_bijet(const BiJet& f_bar_k, const BiJet& alpha_bar, const Jet& delta, double load_i,
                  double beta_i) {
  const Jet r = resolvent_factor_jet(delta, load_i);
  return beta_i * (f_bar_k * alpha_bar * BiJet::outer(r, r));
}

RMatrix inverse_sqrt_spd(const RMatrix& e) {
  const Eigen::SelfAdjointEigenSolver<RMatrix> es(e);
  if (es.info() != Eigen::Success) throw ConditioningError("moment matrix eigendecomposition failed");
  const RVector& lambda = es.eigenvalues();
  const double top = lambda.maxCoeff();
  if (!(top > 0.0) || lambda.minCoeff() < 1e-12 * top) {
    throw ConditioningError("moment matrix is not positive definite at working precision; reduce J");
  }
  return es.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

DeterministicMoments build_deterministic_moments(const RVector& beta, const RVector& q_bar,
                                                 const RVector& eta, int M, int K, int J) {
  if (J < 1) throw InputError("build_deterministic_moments: J must be at least 1");
  if (beta.size() != K || q_bar.size() != K || eta.size() != K) {
    throw InputError("build_deterministic_moments: vector sizes must equal K");
  }
  const int n_uni = 2 * (J - 1);
  const int n_bi = J - 1;

  DeterministicMoments m;
  m.J = J;
  m.K = K;
  m.delta = expand_delta(q_bar, beta, M, K, n_uni);
  const RVector& loads = m.delta.loads;

  m.a_bar.resize(static_cast<std::size_t>(K));
  m.E_bar.resize(static_cast<std::size_t>(K));
  m.E_inv_sqrt.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const Jet x = x_bar_jet(m.delta.delta, loads(k), beta(k));
    const double scale = std::sqrt(1.0 - eta(k) * eta(k));
    RVector a(J);
    RMatrix e(J, J);
    for (int l = 0; l < J; ++l) {
      a(l) = sign(l) * scale * x[l];
      for (int c = 0; c < J; ++c) e(l, c) = sign(l + c) * x[l + c];
    }
    m.a_bar[static_cast<std::size_t>(k)] = std::move(a);
    m.E_inv_sqrt[static_cast<std::size_t>(k)] = inverse_sqrt_spd(e);
    m.E_bar[static_cast<std::size_t>(k)] = std::move(e);
  }

  const Jet delta_lo = m.delta.delta.truncated(n_bi);
  const BiJet alpha = alpha_bar_bijet(delta_lo, loads, M, K);
  std::vector<BiJet> r_outer;
  std::vector<BiJet> alpha_r;
  r_outer.reserve(static_cast<std::size_t>(K));
  alpha_r.reserve(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const Jet r = resolvent_factor_jet(delta_lo, loads(i));
    r_outer.push_back(BiJet::outer(r, r));
    alpha_r.push_back(alpha * r_outer.back());
  }

  // Z_{k,i} = beta_i beta_k (eta_k^2 + (1 - eta_k^2) R_k) alpha R_i
  m.B_bar.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), RMatrix(J, J));
  for (int k = 0; k < K; ++k) {
    const double e2 = eta(k) * eta(k);
    for (int i = 0; i < K; ++i) {
      const BiJet& ar = alpha_r[static_cast<std::size_t>(i)];
      BiJet z = (1.0 - e2) * (r_outer[static_cast<std::size_t>(k)] * ar);
      z += e2 * ar;
      z *= beta(i) * beta(k);
      RMatrix& b = m.B_bar[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) + static_cast<std::size_t>(i)];
      for (int l = 0; l < J; ++l) {
        for (int c = 0; c < J; ++c) b(l, c) = sign(l + c) * z(l, c);
      }
    }
  }
  return m;
}

RVector tpe_uplink_gains(const DeterministicMoments& m, const RVector& q, double rho) {
  const int K = m.K;
  const int J = m.J;
  RVector psi(K);
  for (int k = 0; k < K; ++k) {
    const RMatrix& es = m.E_inv_sqrt[static_cast<std::size_t>(k)];
    RMatrix acc = RMatrix::Zero(J, J);
    for (int i = 0; i < K; ++i) {
      if (i != k) acc += (q(i) / K) * m.B(i, k);
    }
    RMatrix w = es * acc * es;
    w.diagonal().array() += 1.0 / rho;
    const RVector x = es * m.a_bar[static_cast<std::size_t>(k)];
    psi(k) = x.dot(w.ldlt().solve(x));
    if (!(psi(k) > 0.0)) throw ConditioningError("TPE uplink gain is not positive");
  }
  return psi;
}

FixedPointResult solve_qtpe(const DeterministicMoments& m, const RVector& gamma, double rho, double p_max,
                            const FixedPointOptions& options) {
  if (gamma.size() != m.K) throw InputError("solve_qtpe: gamma must have K entries");
  const double Kd = static_cast<double>(m.K);
  FixedPointResult r;
  r.q = RVector::Constant(m.K, p_max);
  bool damped = false;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const RVector psi = tpe_uplink_gains(m, r.q, rho);
    const RVector ratio = gamma.cwiseQuotient(psi);
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
  throw ConvergenceError("solve_qtpe: no convergence", r.iterations, r.residual);
}

TpeWeights optimal_weights(const DeterministicMoments& m, const RVector& q_tpe, double rho) {
  const int K = m.K;
  const int J = m.J;
  TpeWeights out;
  out.c.resize(static_cast<std::size_t>(K));
  out.w.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const RMatrix& es = m.E_inv_sqrt[static_cast<std::size_t>(k)];
    RMatrix acc = RMatrix::Zero(J, J);
    for (int i = 0; i < K; ++i) {
      if (i != k) acc += (q_tpe(i) / K) * m.B(i, k);
    }
    RMatrix w = es * acc * es;
    w.diagonal().array() += 1.0 / rho;
    RVector c = w.ldlt().solve(es * m.a_bar[static_cast<std::size_t>(k)]);
    c.normalize();
    out.w[static_cast<std::size_t>(k)] = es * c;
    out.c[static_cast<std::size_t>(k)] = std::move(c);
  }
  return out;
}

TpeWeights whiten(const DeterministicMoments& m, std::vector<RVector> w) {
  TpeWeights out;
  out.c.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const RMatrix& es = m.E_inv_sqrt[k];
    // E^{1/2} w = E^{-1/2}^{-1} w
    RVector c = es.ldlt().solve(w[k]);
    const double n = c.norm();
    c /= n;
    w[k] /= n;
    out.c[k] = std::move(c);
  }
  out.w = std::move(w);
  return out;
}

RVector tpe_dl_signal_gains(const DeterministicMoments& m, const TpeWeights& weights) {
  RVector g(m.K);
  for (int k = 0; k < m.K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double s = weights.c[ks].dot(m.E_inv_sqrt[ks] * m.a_bar[ks]);
    g(k) = s * s;
  }
  return g;
}

RMatrix tpe_dl_coupling(const DeterministicMoments& m, const TpeWeights& weights) {
  const int K = m.K;
  RMatrix f = RMatrix::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    const auto is = static_cast<std::size_t>(i);
    const RVector x = m.E_inv_sqrt[is] * weights.c[is];
    for (int k = 0; k < K; ++k) {
      if (k != i) f(k, i) = x.dot(m.B(k, i) * x) / K;
    }
  }
  return f;
}

RVector tpe_dl_powers(const DeterministicMoments& m, const TpeWeights& weights, const RVector& gamma,
                      double tau, double rho) {
  const RVector big_gamma = gamma.cwiseQuotient(tpe_dl_signal_gains(m, weights));
  return solve_power_system(big_gamma, tpe_dl_coupling(m, weights), tau, rho);
}

BalancedPowers balance_dl_powers(const RVector& signal_gain, const RMatrix& coupling, const RVector& gamma,
                                 double rho, double p_max) {
  const RVector big_gamma = gamma.cwiseQuotient(signal_gain);
  // Budget use of the equalizing powers at tau, or +inf beyond feasibility.
  auto usage = [&](double tau) {
    try {
      return solve_power_system(big_gamma, coupling, tau, rho).mean();
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = 0.0;
  double hi = 1.0;
  while (usage(hi) < p_max) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InfeasibleError("balance_dl_powers: no bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (usage(mid) < p_max ? lo : hi) = mid;
  }
  BalancedPowers out;
  out.tau = lo;
  out.p = solve_power_system(big_gamma, coupling, lo, rho);
  return out;
}

TpeSolution design_tpe(const DeterministicMoments& m, const RVector& gamma, double rho, double p_max,
                       const FixedPointOptions& options) {
  TpeSolution s;
  const FixedPointResult fp = solve_qtpe(m, gamma, rho, p_max, options);
  s.q_tpe = fp.q;
  s.tau_tpe = fp.tau;
  s.iterations = fp.iterations;
  s.weights = optimal_weights(m, s.q_tpe, rho);
  s.p_tpe = tpe_dl_powers(m, s.weights, gamma, s.tau_tpe, rho);
  return s;
}

TpeWeights common_weights(const DeterministicMoments& m, const TpeWeights& per_ue) {
  RVector mean = RVector::Zero(m.J);
  for (const auto& w : per_ue.w) mean += w.normalized();
  mean /= static_cast<double>(per_ue.w.size());
  return whiten(m, std::vector<RVector>(per_ue.w.size(), mean));
}

AsymptoticTpeSinrs tpe_asymptotic_sinrs(const DeterministicMoments& m, const std::vector<RVector>& w,
                                        const RVector& powers, double rho, Link link) {
  const int K = m.K;
  AsymptoticTpeSinrs out;
  out.sinr.resize(K);
  RVector energy(K);
  RVector signal(K);
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    energy(k) = w[ks].dot(m.E_bar[ks] * w[ks]);
    const double s = w[ks].dot(m.a_bar[ks]);
    signal(k) = s * s;
  }
  out.power = energy.mean();
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    double interference = 0.0;
    if (link == Link::Downlink) {
      for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        const auto is = static_cast<std::size_t>(i);
        interference += powers(i) / K * w[is].dot(m.B(k, i) * w[is]) / energy(i);
      }
      out.sinr(k) = powers(k) * signal(k) / energy(k) / (interference + 1.0 / rho);
    } else {
      for (int i = 0; i < K; ++i) {
        if (i != k) interference += powers(i) / K * w[ks].dot(m.B(i, k) * w[ks]);
      }
      out.sinr(k) = powers(k) * signal(k) / (interference + energy(k) / rho);
    }
  }
  return out;
}

std::vector<CMatrix> krylov_blocks(const CMatrix& h_est, const RVector& q_bar, int J) {
  const double K = static_cast<double>(h_est.cols());
  std::vector<CMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(J));
  blocks.push_back(h_est);
  for (int l = 1; l < J; ++l) {
    const CMatrix inner = q_bar.asDiagonal() * (h_est.adjoint() * blocks.back());
    blocks.push_back(h_est * inner / K);
  }
  return blocks;
}

EmpiricalMoments build_empirical_moments(const ChannelRealization& channel, const RVector& q_bar, int J) {
  if (J < 1) throw InputError("build_empirical_moments: J must be at least 1");
  const int K = static_cast<int>(channel.h_est.cols());
  const double Kd = static_cast<double>(K);
  const auto blocks = krylov_blocks(channel.h_est, q_bar, J);

  // x[l](k, i) = h_k^H S^l h_est_i
  std::vector<CMatrix> x;
  x.reserve(blocks.size());
  for (const auto& b : blocks) x.push_back(channel.h_true.adjoint() * b);

  EmpiricalMoments m;
  m.J = J;
  m.K = K;
  m.a.assign(static_cast<std::size_t>(K), CVector(J));
  m.E.assign(static_cast<std::size_t>(K), CMatrix(J, J));
  m.B.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), CMatrix(J, J));
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    for (int l = 0; l < J; ++l) {
      m.a[ks](l) = x[static_cast<std::size_t>(l)](k, k) / Kd;
      for (int c = 0; c < J; ++c) {
        // S is Hermitian, so h^H S^{l+c} h = (S^l h)^H (S^c h).
        m.E[ks](l, c) = blocks[static_cast<std::size_t>(l)].col(k).dot(blocks[static_cast<std::size_t>(c)].col(k)) / Kd;
      }
    }
    for (int i = 0; i < K; ++i) {
      CMatrix& b = m.B[ks * static_cast<std::size_t>(K) + static_cast<std::size_t>(i)];
      for (int l = 0; l < J; ++l) {
        for (int c = 0; c < J; ++c) {
          b(l, c) = x[static_cast<std::size_t>(l)](k, i) * std::conj(x[static_cast<std::size_t>(c)](k, i)) / Kd;
        }
      }
    }
  }
  return m;
}

RVector tpe_empirical_sinrs(const EmpiricalMoments& m, const std::vector<RVector>& w, const RVector& powers,
                            double rho, Link link) {
  const int K = m.K;
  RVector energy(K);
  RVector signal(K);
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    energy(k) = hermitian_form(m.E[ks], w[ks]);
    signal(k) = std::norm(w[ks].cast<cdouble>().dot(m.a[ks]));
  }
  RVector sinr(K);
  for (int k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    double interference = 0.0;
    if (link == Link::Downlink) {
      for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        interference += powers(i) / K * hermitian_form(m.b(k, i), w[static_cast<std::size_t>(i)]) / energy(i);
      }
      sinr(k) = powers(k) * signal(k) / energy(k) / (interference + 1.0 / rho);
    } else {
      for (int i = 0; i < K; ++i) {
        if (i != k) interference += powers(i) / K * hermitian_form(m.b(i, k), w[ks]);
      }
      sinr(k) = powers(k) * signal(k) / (interference + energy(k) / rho);
    }
  }
  return sinr;
}

CMatrix tpe_beamformers(const CMatrix& h_est, const RVector& q_bar, const std::vector<RVector>& w) {
  const auto M = h_est.rows();
  const auto K = h_est.cols();
  const int J = static_cast<int>(w.front().size());
  const double Kd = static_cast<double>(K);
  CMatrix v = CMatrix::Zero(M, K);
  // One column at a time: S x = H (Q_bar (H^H x)) / K costs O(MK) per product.
  for (Eigen::Index k = 0; k < K; ++k) {
    CVector power = h_est.col(k);
    for (int l = 0; l < J; ++l) {
      if (l > 0) {
        const CVector inner = q_bar.cast<cdouble>().cwiseProduct(h_est.adjoint() * power);
        power = h_est * inner / Kd;
      }
      v.col(k) += w[static_cast<std::size_t>(k)](l) * power;
    }
  }
  return v / std::sqrt(Kd);
}

RVector tpe_beamformer_sinrs(const ChannelRealization& channel, const RVector& q_bar,
                             const std::vector<RVector>& w, const RVector& powers, double rho, Link link) {
  CMatrix v = tpe_beamformers(channel.h_est, q_bar, w);
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    if (v.col(k).squaredNorm() == 0.0) throw InputError("TPE beam has zero norm");
  }
  if (link == Link::Downlink) {
    v.colwise().normalize();
    return dl_sinr(channel.h_true, Precoder{std::move(v), powers}, rho);
  }
  return ul_sinr(channel.h_true, v, powers, rho);
}

}  // namespace lsmimo
