// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lsmimo/asymptotic.hpp"
#include "lsmimo/exact.hpp"
#include "lsmimo/experiment.hpp"
#include "lsmimo/jet.hpp"
#include "lsmimo/tpe.hpp"
#include "oracles.hpp"

using namespace lsmimo;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [X]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double relative_spread(const RVector& sinr, const RVector& gamma) {
  const RVector w = sinr.cwiseQuotient(gamma);
  return (w.maxCoeff() - w.minCoeff()) / w.minCoeff();
}

// ---------------------------------------------------------------------------

Outcome closed_form_tau() {
  Outcome o;
  const RVector ones = RVector::Ones(32);
  const double c = 100.0 * 5.0, r = 4.0;
  const double b = 1.0 + c - c * r;
  const double root = (-b + std::sqrt(b * b + 4.0 * c * r)) / 2.0;
  const auto t0 = Clock::now();
  const int reps = 100;
  double tau = 0.0;
  for (int i = 0; i < reps; ++i) tau = solve_tau_bar(ones, ones, 128, 32, 100.0, 5.0);
  const double per_call = seconds_since(t0) / reps;
  o.check(std::abs(tau - root) / root < 1e-10, "rel err " + fmt("%.2e", std::abs(tau - root) / root));
  o.check(per_call < 1e-3, "time " + fmt("%.3f ms", per_call * 1e3));
  return o;
}

Outcome exact_equalization() {
  Outcome o;
  const auto s = fixture::make(64, 16, 0.0, 1);
  const auto ch = fixture::draw(s, 0);
  const auto t0 = Clock::now();
  const auto t = design_optimal(ch.h_true, s.gamma, 100.0, 5.0);
  const auto rep = evaluate(ch.h_true, t, s.gamma, 100.0);
  const double elapsed = seconds_since(t0);
  o.check(relative_spread(rep.ul, s.gamma) < 1e-6, "UL spread " + fmt("%.1e", relative_spread(rep.ul, s.gamma)));
  o.check(relative_spread(rep.dl, s.gamma) < 1e-6, "DL spread " + fmt("%.1e", relative_spread(rep.dl, s.gamma)));
  const double qb = std::abs(t.dual.q.mean() - 5.0) / 5.0, pb = std::abs(t.precoder.dl_powers.mean() - 5.0) / 5.0;
  o.check(qb < 1e-8 && pb < 1e-8, "budgets " + fmt("%.1e", std::max(qb, pb)));
  const double dual = std::abs(rep.dl_weighted_min - rep.ul_weighted_min) / rep.ul_weighted_min;
  o.check(dual < 1e-6, "duality " + fmt("%.1e", dual));
  o.check(elapsed < 1.0, "time " + fmt("%.3f s", elapsed));
  return o;
}

struct Gaps {
  double q = 0.0;           // max_k of the draw-averaged relative gap
  double q_per_draw = 0.0;  // draw average of max_k, O(1/sqrt(M)) fluctuation included
  double tau = 0.0;
  RVector dl_mean, ul_mean, dl_bar, ul_bar;
  double per_draw_dl = 0.0, per_draw_ul = 0.0;
};

Gaps deterministic_gaps(int M, int K, double eta, int draws) {
  const auto s = fixture::make(M, K, eta, 1);
  const RVector e = s.config.eta_vector();
  const RVector& beta = s.geometry.betas;
  const auto a = asymptotic_params(s.gamma, beta, e, M, K, 100.0, 5.0);
  Gaps g;
  g.dl_bar = asym_dl_sinr(a, beta, 100.0, 5.0, e);
  g.ul_bar = asym_ul_sinr(a, beta, 100.0, e);
  g.dl_mean = RVector::Zero(K);
  g.ul_mean = RVector::Zero(K);
  RVector q_mean = RVector::Zero(K);
  for (int t = 0; t < draws; ++t) {
    const auto ch = fixture::draw(s, static_cast<std::uint64_t>(t));
    const auto tr = design_optimal(ch.h_est, s.gamma, 100.0, 5.0);
    const auto rep = evaluate(ch.h_true, tr, s.gamma, 100.0);
    q_mean += tr.dual.q / draws;
    g.q_per_draw += fixture::max_rel(tr.dual.q, a.q_bar) / draws;
    g.tau += std::abs(tr.dual.tau - a.tau_bar) / a.tau_bar / draws;
    g.dl_mean += rep.dl / draws;
    g.ul_mean += rep.ul / draws;
    g.per_draw_dl += ((rep.dl - g.dl_bar).cwiseQuotient(g.dl_bar)).cwiseAbs().mean() / draws;
    g.per_draw_ul += ((rep.ul - g.ul_bar).cwiseQuotient(g.ul_bar)).cwiseAbs().mean() / draws;
  }
  g.q = fixture::max_rel(q_mean, a.q_bar);
  return g;
}

const Gaps& gaps_128() {
  static const Gaps g = deterministic_gaps(128, 32, 0.3, 50);
  return g;
}

Outcome power_consistency() {
  Outcome o;
  const auto t0 = Clock::now();
  const Gaps& g = gaps_128();
  const Gaps big = deterministic_gaps(256, 64, 0.3, 50);
  const double elapsed = seconds_since(t0);
  o.check(g.q < 0.05, "q gap " + fmt("%.4f", g.q));
  o.check(g.tau < 0.03, "tau gap " + fmt("%.4f", g.tau));
  o.check(big.q < g.q, "q gap at 256 " + fmt("%.4f", big.q));
  o.check(big.tau < g.tau, "tau gap at 256 " + fmt("%.4f", big.tau));
  o.check(elapsed < 120.0, "time " + fmt("%.1f s", elapsed));
  o.detail += "; per-draw max_k gap " + fmt("%.4f", g.q_per_draw) + " -> " + fmt("%.4f", big.q_per_draw);
  return o;
}

Outcome sinr_consistency() {
  Outcome o;
  const Gaps& g = gaps_128();
  const double dl = ((g.dl_mean - g.dl_bar).cwiseQuotient(g.dl_bar)).cwiseAbs().mean();
  const double ul = ((g.ul_mean - g.ul_bar).cwiseQuotient(g.ul_bar)).cwiseAbs().mean();
  o.check(dl < 0.05, "DL " + fmt("%.4f", dl));
  o.check(ul < 0.05, "UL " + fmt("%.4f", ul));
  o.detail += "; per-draw mean abs err DL " + fmt("%.4f", g.per_draw_dl) + " UL " + fmt("%.4f", g.per_draw_ul);
  return o;
}

Outcome perfect_csi_sinrs() {
  Outcome o;
  const auto s = fixture::make(128, 32, 0.0, 1);
  const RVector e = RVector::Zero(32);
  const auto a = asymptotic_params(s.gamma, s.geometry.betas, e, 128, 32, 100.0, 5.0);
  const RVector target = a.tau_bar * s.gamma;
  const double dl = fixture::max_rel(asym_dl_sinr(a, s.geometry.betas, 100.0, 5.0, e), target);
  const double ul = fixture::max_rel(asym_ul_sinr(a, s.geometry.betas, 100.0, e), target);
  o.check(dl < 1e-12, "DL " + fmt("%.1e", dl));
  o.check(ul < 1e-12, "UL " + fmt("%.1e", ul));
  return o;
}

// Shared Monte Carlo for criteria 6 and 7.
struct Sweep {
  std::vector<double> etas{0.0, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::vector<ResultRow>> rows;  // per eta: OLP, A-OLP, US-TPE-dl, OLR, US-TPE-ul
  double seconds = 0.0;
};

const Sweep& rate_sweep() {
  static const Sweep sweep = [] {
    Sweep s;
    SystemConfig base;  // M = 128, K = 32, P_max = 5, rho = 20 dB, J = 2
    base.seed = 1;
    const UeGeometry geo = experiment_geometry(base);
    const auto g = experiment_priorities(base);
    const RVector gamma = Eigen::Map<const RVector>(g.data(), base.K);
    const auto t0 = Clock::now();
    for (double eta : s.etas) {
      const SystemConfig c = apply_sweep(base, SweepVar::Eta, eta);
      s.rows.push_back(run_point(c, geo, gamma, {Scheme::OLP, Scheme::AOLP, Scheme::TpeDl, Scheme::OLR, Scheme::TpeUl},
                                 200, SweepVar::Eta, eta));
    }
    s.seconds = seconds_since(t0);
    return s;
  }();
  return sweep;
}

double std_error(const ResultRow& r) { return r.std_rate / std::sqrt(static_cast<double>(r.n_trials)); }

Outcome aolp_dominance() {
  Outcome o;
  const Sweep& s = rate_sweep();
  double prev_gap = -1.0;
  for (std::size_t i = 0; i < s.etas.size(); ++i) {
    const ResultRow& olp = s.rows[i][0];
    const ResultRow& aolp = s.rows[i][1];
    o.check(olp.n_failed == 0 && aolp.n_failed == 0, "eta " + fmt("%.1f", s.etas[i]) + " failures " +
                                                         fmt("%.0f", olp.n_failed + aolp.n_failed));
    if (s.etas[i] == 0.0) {
      const double se = std::hypot(std_error(olp), std_error(aolp));
      const double diff = std::abs(olp.mean_rate - aolp.mean_rate);
      o.check(diff <= 2.0 * se, "eta 0 |diff| " + fmt("%.4f", diff) + " vs 2SE " + fmt("%.4f", 2.0 * se));
      continue;
    }
    const double gap = 1.0 - olp.mean_rate / aolp.mean_rate;
    o.check(aolp.mean_rate >= olp.mean_rate && gap > prev_gap,
            "eta " + fmt("%.1f", s.etas[i]) + " rel loss " + fmt("%.4f", gap) + " abs " +
                fmt("%.4f", aolp.mean_rate - olp.mean_rate));
    prev_gap = gap;
  }
  o.check(s.seconds < 600.0, "time " + fmt("%.0f s", s.seconds));
  return o;
}

Outcome tpe_near_optimal() {
  Outcome o;
  const Sweep& s = rate_sweep();
  for (std::size_t i = 0; i < s.etas.size(); ++i) {
    const auto& r = s.rows[i];
    const double dl = std::abs(r[2].mean_rate - r[1].mean_rate) / r[1].mean_rate;
    const double ul = std::abs(r[4].mean_rate - r[3].mean_rate) / r[3].mean_rate;
    o.check(dl < 0.05 && ul < 0.05 && r[2].n_failed == 0 && r[4].n_failed == 0,
            "eta " + fmt("%.1f", s.etas[i]) + " DL " + fmt("%.4f", dl) + " UL " + fmt("%.4f", ul));
  }
  return o;
}

Outcome jet_engine() {
  Outcome o;
  using oracle::Real;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kd(2, 16);
  std::uniform_real_distribution<double> ratio(1.5, 6.0), qd(0.5, 5.0), bd(0.05, 1.0);
  double worst_fd = 0.0, worst_res = 0.0, worst_scaled = 0.0, worst_abs_unit = 0.0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const int K = kd(rng);
    const int M = static_cast<int>(std::ceil(ratio(rng) * K));
    RVector q(K), b(K);
    for (int k = 0; k < K; ++k) {
      q(k) = qd(rng);
      b(k) = bd(rng);
    }
    const auto e = expand_delta(q, b, M, K, 4);
    const auto loads = oracle::make_loads(q, b, M, K);
    const auto fd = oracle::taylor_fd([&](const Real& t) { return oracle::delta(loads, t); }, Real("1e-6"));
    for (int n = 0; n <= 4; ++n) {
      const double ref = static_cast<double>(fd[n]);
      worst_fd = std::max(worst_fd, std::abs(e.delta[n] - ref) / std::abs(ref));
    }
    for (int J = 1; J <= 5; ++J) {
      const auto ej = expand_delta(q, b, M, K, 2 * (J - 1));
      const Jet r = delta_residual(ej);
      double scale = 1.0;
      for (int n = 0; n <= r.order(); ++n) {
        scale = std::max(scale, std::abs(ej.delta[n]));
        worst_scaled = std::max(worst_scaled, std::abs(r[n]) / scale);
        worst_abs_unit = std::max(worst_abs_unit, std::abs(r[n]));
      }
    }
  }
  // Absolute bound at the loads the system produces: q_bar from priorities
  // and path loss.
  std::uniform_int_distribution<int> kd2(2, 32);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const int K = kd2(rng);
    const int M = static_cast<int>(std::ceil(ratio(rng) * K));
    const auto s = fixture::make(M, K, 0.0, seed);
    const RVector q = q_bar(s.gamma, s.geometry.betas, 5.0);
    for (int J = 1; J <= 5; ++J) {
      const Jet r = delta_residual(expand_delta(q, s.geometry.betas, M, K, 2 * (J - 1)));
      for (double c : r.coeffs()) worst_res = std::max(worst_res, std::abs(c));
    }
  }
  o.check(worst_fd < 1e-6, "FD rel err " + fmt("%.2e", worst_fd));
  o.check(worst_res < 1e-10, "residual at operating loads " + fmt("%.2e", worst_res));
  o.check(worst_scaled < 1e-13, "residual / coefficient scale at unit loads " + fmt("%.2e", worst_scaled));
  o.detail += "; absolute residual at unit loads " + fmt("%.2e", worst_abs_unit);
  return o;
}

Outcome moment_oracle() {
  Outcome o;
  {
    const auto s = fixture::make(3, 2, 0.5, 13);
    const auto ch = fixture::draw(s, 0);
    const RVector q = q_bar(s.gamma, s.geometry.betas, 5.0);
    const auto m = build_empirical_moments(ch, q, 3);
    const auto d = oracle::dense_moments(ch, q, 3);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      worst = std::max(worst, (m.a[k] - d.a[k]).cwiseAbs().maxCoeff() / d.a[k].cwiseAbs().maxCoeff());
      worst = std::max(worst, (m.E[k] - d.E[k]).cwiseAbs().maxCoeff() / d.E[k].cwiseAbs().maxCoeff());
      for (int i = 0; i < 2; ++i) {
        const CMatrix& b = d.B[k * 2 + i];
        worst = std::max(worst, (m.b(k, i) - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff());
      }
    }
    o.check(worst < 1e-12, "dense oracle " + fmt("%.1e", worst));
  }
  {
    // Sample means of E_k against both factorial conventions.
    const auto s = fixture::make(48, 12, 0.0, 1);
    const RVector q = q_bar(s.gamma, s.geometry.betas, 5.0);
    const auto dm = build_deterministic_moments(s.geometry.betas, q, s.config.eta_vector(), 48, 12, 3);
    std::vector<RMatrix> mean(12, RMatrix::Zero(3, 3));
    const int draws = 2000;
    for (int t = 0; t < draws; ++t) {
      const auto em = build_empirical_moments(fixture::draw(s, static_cast<std::uint64_t>(t)), q, 3);
      for (int k = 0; k < 12; ++k) mean[k] += em.E[k].real() / draws;
    }
    const double fact[] = {1, 1, 2, 6, 24};
    double err_sum = 0.0, err_prod = 0.0;
    int wins = 0, cases = 0;
    for (int k = 0; k < 12; ++k) {
      for (int l = 1; l < 3; ++l) {
        for (int m = 1; m < 3; ++m) {
          const double sum_conv = dm.E_bar[k](l, m);
          const double prod_conv = sum_conv * fact[l + m] / (fact[l] * fact[m]);
          const double e1 = std::abs(mean[k](l, m) - sum_conv) / std::abs(sum_conv);
          const double e2 = std::abs(mean[k](l, m) - prod_conv) / std::abs(prod_conv);
          err_sum = std::max(err_sum, e1);
          err_prod = std::max(err_prod, e2);
          wins += e1 < e2;
          ++cases;
        }
      }
    }
    o.check(wins == cases, "(l+m)! closer in " + fmt("%.0f", wins) + "/" + fmt("%.0f", cases) + " entries, max err " +
                               fmt("%.3f", err_sum) + " vs l!m! " + fmt("%.3f", err_prod));
  }
  return o;
}

Outcome tpe_self_consistency() {
  Outcome o;
  const auto s = fixture::make(64, 16, 0.0, 1);
  const RVector e = s.config.eta_vector();
  const auto a = asymptotic_params(s.gamma, s.geometry.betas, e, 64, 16, 100.0, 5.0);
  const auto m = build_deterministic_moments(s.geometry.betas, a.q_bar, e, 64, 16, 2);
  const auto sol = design_tpe(m, s.gamma, 100.0, 5.0);
  for (Link link : {Link::Uplink, Link::Downlink}) {
    const RVector& pw = link == Link::Uplink ? sol.q_tpe : sol.p_tpe;
    const RVector w = tpe_asymptotic_sinrs(m, sol.weights.w, pw, 100.0, link).sinr.cwiseQuotient(s.gamma);
    const double err = (w.array() / sol.tau_tpe - 1.0).abs().maxCoeff();
    o.check(err < 1e-8, std::string(link == Link::Uplink ? "UL" : "DL") + " equalization " + fmt("%.1e", err));
  }
  double norm_err = 0.0;
  for (const auto& c : sol.weights.c) norm_err = std::max(norm_err, std::abs(c.norm() - 1.0));
  o.check(norm_err < 1e-14, "unit norm " + fmt("%.1e", norm_err));

  const RVector base = tpe_asymptotic_sinrs(m, sol.weights.w, sol.q_tpe, 100.0, Link::Uplink).sinr;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = -INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RVector> w = sol.weights.w;
    for (int k = 0; k < 16; ++k) {
      RVector c = sol.weights.c[k];
      for (int j = 0; j < 2; ++j) c(j) += 1e-3 * n(rng);
      w[k] = m.E_inv_sqrt[k] * c.normalized();
    }
    const RVector p = tpe_asymptotic_sinrs(m, w, sol.q_tpe, 100.0, Link::Uplink).sinr;
    worst = std::max(worst, ((p - base).cwiseQuotient(base)).maxCoeff());
  }
  o.check(worst <= 1e-10, "max perturbed gain " + fmt("%.1e", worst));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form tau_bar", closed_form_tau},
      {"exact solver equalization and duality", exact_equalization},
      {"exact powers approach deterministic powers", power_consistency},
      {"plug-in SINRs approach deterministic SINRs", sinr_consistency},
      {"deterministic SINRs equal gamma tau_bar at eta = 0", perfect_csi_sinrs},
      {"A-OLP dominates OLP under CSI error", aolp_dominance},
      {"US-TPE within 5% of A-OLP and OLR", tpe_near_optimal},
      {"jet engine vs finite differences", jet_engine},
      {"moment matrices vs dense oracle, factorial gate", moment_oracle},
      {"TPE optimization self-consistency", tpe_self_consistency},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
