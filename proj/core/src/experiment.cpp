#include "lsmimo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "lsmimo/errors.hpp"
#include "lsmimo/exact.hpp"

namespace lsmimo {
namespace {

struct SchemeInfo {
  Scheme scheme;
  const char* name;
};

constexpr SchemeInfo kSchemes[] = {
    {Scheme::OLP, "OLP"},
    {Scheme::AOLP, "A-OLP"},
    {Scheme::TpeDl, "US-TPE-dl"},
    {Scheme::OLR, "OLR"},
    {Scheme::AOLR, "A-OLR"},
    {Scheme::TpeUl, "US-TPE-ul"},
    {Scheme::TpeCommonDl, "TPE-common-dl"},
    {Scheme::AsymptoticCurves, "asymptotic-curves"},
};

bool wants_tpe(const std::vector<Scheme>& schemes) {
  return std::any_of(schemes.begin(), schemes.end(), [](Scheme s) {
    return s == Scheme::TpeDl || s == Scheme::TpeUl || s == Scheme::TpeCommonDl ||
           s == Scheme::AsymptoticCurves;
  });
}

// Running mean and variance (Welford) so rows are independent of trial count.
struct Accumulator {
  int n = 0;
  int failed = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double min_weighted = 0.0;

  void add(double rate, double weighted) {
    ++n;
    const double d = rate - mean;
    mean += d / n;
    m2 += d * (rate - mean);
    min_weighted += (weighted - min_weighted) / n;
  }

  double stddev() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
};

ResultRow deterministic_row(SweepVar var, double value, const std::string& name, const RVector& sinr,
                            const RVector& gamma) {
  ResultRow r;
  r.sweep_var = sweep_name(var);
  r.sweep_value = value;
  r.scheme = name;
  r.mean_rate = rate_per_ue(sinr);
  r.n_trials = 1;
  r.min_weighted_sinr_mean = weighted_min(sinr, gamma);
  return r;
}

ResultRow failed_row(SweepVar var, double value, const std::string& name, int failed) {
  ResultRow r;
  r.sweep_var = sweep_name(var);
  r.sweep_value = value;
  r.scheme = name;
  r.mean_rate = std::numeric_limits<double>::quiet_NaN();
  r.std_rate = std::numeric_limits<double>::quiet_NaN();
  r.min_weighted_sinr_mean = std::numeric_limits<double>::quiet_NaN();
  r.n_failed = failed;
  return r;
}

}  // namespace

std::string scheme_name(Scheme s) {
  for (const auto& info : kSchemes) {
    if (info.scheme == s) return info.name;
  }
  throw InputError("unknown scheme");
}

Scheme parse_scheme(const std::string& name) {
  for (const auto& info : kSchemes) {
    if (name == info.name) return info.scheme;
  }
  throw InputError("unknown scheme '" + name + "'");
}

std::string sweep_name(SweepVar v) {
  switch (v) {
    case SweepVar::Eta: return "eta";
    case SweepVar::PMax: return "p_max";
    case SweepVar::M: return "M";
  }
  throw InputError("unknown sweep variable");
}

SweepVar parse_sweep(const std::string& name) {
  if (name == "eta") return SweepVar::Eta;
  if (name == "p_max") return SweepVar::PMax;
  if (name == "M") return SweepVar::M;
  throw InputError("unknown sweep variable '" + name + "' (expected eta, p_max or M)");
}

void ExperimentPlan::validate() const {
  base.validate();
  if (values.empty()) throw InputError("sweep value list is empty");
  if (schemes.empty()) throw InputError("scheme list is empty");
  if (n_trials < 1) throw InputError("n_trials must be positive");
  for (double v : values) apply_sweep(base, sweep, v);
}

double rate_per_ue(const RVector& sinr) {
  return sinr.array().log1p().sum() / std::log(2.0) / static_cast<double>(sinr.size());
}

SystemConfig apply_sweep(const SystemConfig& base, SweepVar var, double value) {
  SystemConfig c = base;
  switch (var) {
    case SweepVar::Eta:
      c.eta = value;
      c.eta_per_ue.clear();
      break;
    case SweepVar::PMax:
      c.p_max = value;
      break;
    case SweepVar::M:
      if (value != std::floor(value)) throw InputError("M sweep values must be integers");
      c.M = static_cast<int>(value);
      break;
  }
  c.validate();
  return c;
}

PointDesign design_point(const SystemConfig& config, const UeGeometry& geometry, const RVector& gamma,
                         const std::vector<Scheme>& schemes) {
  config.validate();
  if (geometry.size() != config.K || gamma.size() != config.K) {
    throw InputError("geometry and priorities must have K entries");
  }
  PointDesign d;
  d.config = config;
  d.geometry = geometry;
  d.gamma = gamma;
  d.eta = config.eta_vector();
  d.asym = asymptotic_params(gamma, geometry.betas, d.eta, config.M, config.K, config.rho, config.p_max);
  d.aolp = aolp_powers(gamma, geometry.betas, d.asym.mu, config.rho, config.p_max);

  if (wants_tpe(schemes)) {
    try {
      d.moments = build_deterministic_moments(geometry.betas, d.asym.q_bar, d.eta, config.M, config.K, config.J);
      d.tpe = design_tpe(*d.moments, gamma, config.rho, config.p_max);
      if (std::find(schemes.begin(), schemes.end(), Scheme::TpeCommonDl) != schemes.end()) {
        d.tpe_common = common_weights(*d.moments, d.tpe->weights);
        d.tpe_common_powers = balance_dl_powers(tpe_dl_signal_gains(*d.moments, *d.tpe_common),
                                                tpe_dl_coupling(*d.moments, *d.tpe_common), gamma, config.rho,
                                                config.p_max);
      }
    } catch (const std::runtime_error& e) {
      d.tpe.reset();
      d.tpe_common.reset();
      d.tpe_common_powers.reset();
      d.tpe_error = e.what();
    }
  }
  return d;
}

RVector scheme_sinr(Scheme s, const PointDesign& d, const ChannelRealization& ch) {
  const double rho = d.config.rho;
  switch (s) {
    case Scheme::OLP: {
      const auto t = design_optimal(ch.h_est, d.gamma, rho, d.config.p_max);
      return dl_sinr(ch.h_true, t.precoder, rho);
    }
    case Scheme::OLR: {
      const auto dual = solve_dual_powers(ch.h_est, d.gamma, rho, d.config.p_max);
      return ul_sinr(ch.h_true, compute_directions(ch.h_est, dual.q, rho), dual.q, rho);
    }
    case Scheme::AOLP: {
      const CMatrix dirs = compute_directions(ch.h_est, d.asym.q_bar, rho);
      return dl_sinr(ch.h_true, Precoder{dirs, d.aolp.p_tilde}, rho);
    }
    case Scheme::AOLR: {
      const CMatrix dirs = compute_directions(ch.h_est, d.asym.q_bar, rho);
      return ul_sinr(ch.h_true, dirs, d.aolp.q_tilde, rho);
    }
    case Scheme::TpeDl:
    case Scheme::TpeUl:
    case Scheme::TpeCommonDl: {
      if (!d.tpe) throw ConditioningError("US-TPE design unavailable: " + d.tpe_error);
      if (s == Scheme::TpeDl) {
        return tpe_beamformer_sinrs(ch, d.asym.q_bar, d.tpe->weights.w, d.tpe->p_tpe, rho, Link::Downlink);
      }
      if (s == Scheme::TpeUl) {
        return tpe_beamformer_sinrs(ch, d.asym.q_bar, d.tpe->weights.w, d.tpe->q_tpe, rho, Link::Uplink);
      }
      return tpe_beamformer_sinrs(ch, d.asym.q_bar, d.tpe_common->w, d.tpe_common_powers->p, rho,
                                  Link::Downlink);
    }
    case Scheme::AsymptoticCurves:
      break;
  }
  throw InputError("scheme has no Monte Carlo evaluation");
}

std::vector<ResultRow> run_point(const SystemConfig& config, const UeGeometry& geometry, const RVector& gamma,
                                 const std::vector<Scheme>& schemes, int n_trials, SweepVar var,
                                 double sweep_value) {
  if (schemes.empty()) throw InputError("scheme list is empty");
  if (n_trials < 1) throw InputError("n_trials must be positive");
  const PointDesign d = design_point(config, geometry, gamma, schemes);

  std::vector<Scheme> sampled;
  for (Scheme s : schemes) {
    if (s != Scheme::AsymptoticCurves) sampled.push_back(s);
  }
  std::vector<Accumulator> acc(sampled.size());
  if (!sampled.empty()) {
    for (int t = 0; t < n_trials; ++t) {
      Rng rng = make_stream(config.seed, streams::kTrials, static_cast<std::uint64_t>(t));
      const ChannelRealization ch = draw_channel(rng, geometry, config);
      for (std::size_t j = 0; j < sampled.size(); ++j) {
        try {
          const RVector sinr = scheme_sinr(sampled[j], d, ch);
          if (!sinr.allFinite()) throw InfeasibleError("non-finite SINR");
          acc[j].add(rate_per_ue(sinr), weighted_min(sinr, gamma));
        } catch (const std::runtime_error&) {
          // Solver failures on a single draw are counted, not fatal.
          ++acc[j].failed;
        }
      }
    }
  }

  std::vector<ResultRow> rows;
  std::size_t j = 0;
  for (Scheme s : schemes) {
    if (s == Scheme::AsymptoticCurves) {
      const RVector& beta = geometry.betas;
      rows.push_back(deterministic_row(var, sweep_value, "asymptotic-OLP",
                                       asym_dl_sinr(d.asym, beta, config.rho, config.p_max, d.eta), gamma));
      rows.push_back(deterministic_row(var, sweep_value, "asymptotic-A-OLP",
                                       asym_sinr_given_powers(d.aolp.p_tilde, Link::Downlink, d.asym, beta,
                                                              config.rho, d.eta),
                                       gamma));
      rows.push_back(deterministic_row(var, sweep_value, "asymptotic-OLR",
                                       asym_ul_sinr(d.asym, beta, config.rho, d.eta), gamma));
      rows.push_back(deterministic_row(var, sweep_value, "asymptotic-A-OLR",
                                       asym_sinr_given_powers(d.aolp.q_tilde, Link::Uplink, d.asym, beta,
                                                              config.rho, d.eta),
                                       gamma));
      if (d.tpe) {
        const auto& w = d.tpe->weights.w;
        rows.push_back(deterministic_row(
            var, sweep_value, "asymptotic-US-TPE-dl",
            tpe_asymptotic_sinrs(*d.moments, w, d.tpe->p_tpe, config.rho, Link::Downlink).sinr, gamma));
        rows.push_back(deterministic_row(
            var, sweep_value, "asymptotic-US-TPE-ul",
            tpe_asymptotic_sinrs(*d.moments, w, d.tpe->q_tpe, config.rho, Link::Uplink).sinr, gamma));
      } else {
        rows.push_back(failed_row(var, sweep_value, "asymptotic-US-TPE-dl", 1));
        rows.push_back(failed_row(var, sweep_value, "asymptotic-US-TPE-ul", 1));
      }
      continue;
    }
    const Accumulator& a = acc[j++];
    if (a.n == 0) {
      rows.push_back(failed_row(var, sweep_value, scheme_name(s), a.failed));
      continue;
    }
    ResultRow r;
    r.sweep_var = sweep_name(var);
    r.sweep_value = sweep_value;
    r.scheme = scheme_name(s);
    r.mean_rate = a.mean;
    r.std_rate = a.stddev();
    r.n_trials = a.n;
    r.n_failed = a.failed;
    r.min_weighted_sinr_mean = a.min_weighted;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> run_sweep(const ExperimentPlan& plan) {
  plan.validate();
  const UeGeometry geometry = experiment_geometry(plan.base);
  const std::vector<double> g = experiment_priorities(plan.base);
  const RVector gamma = Eigen::Map<const RVector>(g.data(), static_cast<Eigen::Index>(g.size()));

  std::vector<ResultRow> rows;
  for (double v : plan.values) {
    const SystemConfig c = apply_sweep(plan.base, plan.sweep, v);
    auto point = run_point(c, geometry, gamma, plan.schemes, plan.n_trials, plan.sweep, v);
    rows.insert(rows.end(), point.begin(), point.end());
  }
  if (!plan.out.empty()) write_csv(plan.out, rows);
  return rows;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = "sweep_var,sweep_value,scheme,mean_rate_bps_hz,std_rate,n_trials,n_failed,min_weighted_sinr_mean\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%s,%.10g,%.10g,%d,%d,%.10g\n", r.sweep_var.c_str(), r.sweep_value,
                  r.scheme.c_str(), r.mean_rate, r.std_rate, r.n_trials, r.n_failed, r.min_weighted_sinr_mean);
    out += buf;
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + path.string());
  f << format_csv(rows);
  if (!f) throw std::runtime_error("failed writing output file " + path.string());
}

}  // namespace lsmimo
