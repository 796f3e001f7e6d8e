// lsmimo: Monte Carlo sweeps and a one-draw invariant check.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsmimo/asymptotic.hpp"
#include "lsmimo/channel.hpp"
#include "lsmimo/config_io.hpp"
#include "lsmimo/errors.hpp"
#include "lsmimo/exact.hpp"
#include "lsmimo/experiment.hpp"
#include "lsmimo/tpe.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) throw lsmimo::InputError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

lsmimo::SystemConfig config_from(const std::string& path) {
  return path.empty() ? lsmimo::SystemConfig{} : lsmimo::load_config(path);
}

// One line per check; returns false on failure.
bool report(const char* name, double value, double limit) {
  const bool ok = std::isfinite(value) && value <= limit;
  std::printf("%-4s %-44s %.3e (limit %.1e)\n", ok ? "ok" : "FAIL", name, value, limit);
  return ok;
}

int run_validate(const lsmimo::SystemConfig& config) {
  using namespace lsmimo;
  const UeGeometry geo = experiment_geometry(config);
  const auto g = experiment_priorities(config);
  const RVector gamma = Eigen::Map<const RVector>(g.data(), config.K);
  Rng rng = make_stream(config.seed, streams::kTrials, 0);
  const ChannelRealization ch = draw_channel(rng, geo, config);
  bool all = true;

  // Exact solver, judged on the matrix it was designed on.
  const auto t = design_optimal(ch.h_est, gamma, config.rho, config.p_max);
  const SinrReport rep = evaluate(ch.h_est, t, gamma, config.rho);
  const double tau = t.dual.tau;
  all &= report("exact: UL weighted SINR spread", (rep.ul / tau).cwiseQuotient(gamma).array().maxCoeff() -
                                                       (rep.ul / tau).cwiseQuotient(gamma).array().minCoeff(),
                1e-6);
  all &= report("exact: DL weighted SINR spread", (rep.dl / tau).cwiseQuotient(gamma).array().maxCoeff() -
                                                       (rep.dl / tau).cwiseQuotient(gamma).array().minCoeff(),
                1e-6);
  all &= report("exact: UL budget", std::abs(t.dual.q.mean() - config.p_max) / config.p_max, 1e-8);
  all &= report("exact: DL budget", std::abs(t.precoder.dl_powers.mean() - config.p_max) / config.p_max, 1e-8);
  all &= report("exact: UL/DL duality", std::abs(rep.dl_weighted_min - rep.ul_weighted_min) / rep.ul_weighted_min,
                1e-6);

  const RVector eta = config.eta_vector();
  const auto a = asymptotic_params(gamma, geo.betas, eta, config.M, config.K, config.rho, config.p_max);
  all &= report("asymptotic: tau_bar residual",
                std::abs(a.tau_bar - tau_bar_rhs(a.tau_bar, gamma, geo.betas, config.M, config.K, config.rho,
                                                 config.p_max)) /
                    a.tau_bar,
                1e-12);
  all &= report("asymptotic: mean q_bar", std::abs(a.q_bar.mean() - config.p_max) / config.p_max, 1e-12);
  all &= report("asymptotic: mean p_bar", std::abs(a.p_bar.mean() - config.p_max) / config.p_max, 1e-10);
  all &= report("asymptotic: xi > 0", a.xi > 0.0 ? 0.0 : 1.0, 0.0);

  const auto m = build_deterministic_moments(geo.betas, a.q_bar, eta, config.M, config.K, config.J);
  const Jet res = delta_residual(m.delta);
  double worst = 0.0;
  for (double c : res.coeffs()) worst = std::max(worst, std::abs(c));
  all &= report("jets: delta residual", worst, 1e-10);

  const auto s = design_tpe(m, gamma, config.rho, config.p_max);
  for (Link link : {Link::Uplink, Link::Downlink}) {
    const RVector& pw = link == Link::Uplink ? s.q_tpe : s.p_tpe;
    const RVector r = tpe_asymptotic_sinrs(m, s.weights.w, pw, config.rho, link).sinr.cwiseQuotient(gamma) /
                      s.tau_tpe;
    all &= report(link == Link::Uplink ? "tpe: UL equalization" : "tpe: DL equalization",
                  (r.array() - 1.0).abs().maxCoeff(), 1e-8);
  }
  all &= report("tpe: DL budget", std::abs(s.p_tpe.mean() - config.p_max) / config.p_max, 1e-6);
  const auto em = build_empirical_moments(ch, a.q_bar, config.J);
  const RVector quad = tpe_empirical_sinrs(em, s.weights.w, s.p_tpe, config.rho, Link::Downlink);
  const RVector beam = tpe_beamformer_sinrs(ch, a.q_bar, s.weights.w, s.p_tpe, config.rho, Link::Downlink);
  all &= report("tpe: quadratic vs beamformer route", ((quad - beam).cwiseQuotient(beam)).cwiseAbs().maxCoeff(),
                1e-10);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min SINR MU-MIMO transceiver simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string sweep = "eta";
  std::string values;
  std::string schemes = "OLP,A-OLP,US-TPE-dl,asymptotic-curves";
  int trials = 200;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string geometry_out;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo sweep, one CSV row per (value, scheme)");
  sim->add_option("--config", config_path, "YAML config (keys match SystemConfig fields)");
  sim->add_option("--sweep", sweep, "eta, p_max or M")->capture_default_str();
  sim->add_option("--values", values, "comma-separated sweep values")->required();
  sim->add_option("--schemes", schemes,
                  "comma-separated subset of OLP,A-OLP,US-TPE-dl,OLR,A-OLR,US-TPE-ul,TPE-common-dl,asymptotic-curves")
      ->capture_default_str();
  sim->add_option("--trials", trials, "channel draws per point")->capture_default_str();
  sim->add_option("--seed", seed, "overrides the config seed");
  sim->add_option("--out", out, "CSV path (stdout when omitted)");
  sim->add_option("--geometry-out", geometry_out, "also write the UE geometry as CSV");

  auto* val = app.add_subcommand("validate", "check solver invariants on one channel draw");
  val->add_option("--config", config_path, "YAML config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    lsmimo::SystemConfig config = config_from(config_path);
    if (seed) config.seed = *seed;
    if (*val) return run_validate(config);

    lsmimo::ExperimentPlan plan;
    plan.base = config;
    plan.sweep = lsmimo::parse_sweep(sweep);
    plan.values = parse_values(values);
    for (const auto& s : split(schemes)) plan.schemes.push_back(lsmimo::parse_scheme(s));
    plan.n_trials = trials;
    plan.out = out;
    if (!geometry_out.empty()) lsmimo::write_geometry_csv(geometry_out, lsmimo::experiment_geometry(config));
    const auto rows = lsmimo::run_sweep(plan);
    if (out.empty()) std::cout << lsmimo::format_csv(rows);
    return 0;
  } catch (const lsmimo::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lsmimo::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
