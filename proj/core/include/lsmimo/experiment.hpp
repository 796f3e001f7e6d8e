#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lsmimo/asymptotic.hpp"
#include "lsmimo/channel.hpp"
#include "lsmimo/tpe.hpp"

namespace lsmimo {

// Monte Carlo driver. Every scheme at a sweep point sees the same channel
// draws (trial t always uses stream (seed, trials, t)), and geometry and
// priorities are fixed once per experiment.

enum class Scheme {
  OLP,          // exact max-min precoder designed on the estimate
  AOLP,         // asymptotic directions with closed-form powers
  TpeDl,        // US-TPE precoder
  OLR,          // exact max-min receiver
  AOLR,         // asymptotic receiver
  TpeUl,        // US-TPE receiver
  TpeCommonDl,  // one polynomial shared by all UEs (baseline)
  AsymptoticCurves,
};

std::string scheme_name(Scheme s);
/// Accepts the names produced by scheme_name. Throws InputError otherwise.
Scheme parse_scheme(const std::string& name);

enum class SweepVar { Eta, PMax, M };

std::string sweep_name(SweepVar v);
SweepVar parse_sweep(const std::string& name);

struct ExperimentPlan {
  SystemConfig base;
  SweepVar sweep = SweepVar::Eta;
  std::vector<double> values;
  std::vector<Scheme> schemes;
  int n_trials = 200;
  std::filesystem::path out;

  void validate() const;
};

struct ResultRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string scheme;
  double mean_rate = 0.0;  // bits/s/Hz per UE
  double std_rate = 0.0;   // across trials
  int n_trials = 0;        // successful trials
  int n_failed = 0;
  double min_weighted_sinr_mean = 0.0;
};

/// (1/K) sum_k log2(1 + sinr_k).
double rate_per_ue(const RVector& sinr);

/// `config` with the sweep variable set to `value`. Throws InputError when
/// the result is invalid.
SystemConfig apply_sweep(const SystemConfig& base, SweepVar var, double value);

/// Everything a sweep point derives before sampling channels.
struct PointDesign {
  SystemConfig config;
  UeGeometry geometry;
  RVector gamma;
  RVector eta;
  AsymptoticParams asym;
  AolpPowers aolp;
  // Present when some TPE scheme was requested and its design succeeded.
  std::optional<DeterministicMoments> moments;
  std::optional<TpeSolution> tpe;
  std::optional<BalancedPowers> tpe_common_powers;
  std::optional<TpeWeights> tpe_common;
  std::string tpe_error;
};

PointDesign design_point(const SystemConfig& config, const UeGeometry& geometry, const RVector& gamma,
                         const std::vector<Scheme>& schemes);

/// SINRs of one Monte Carlo scheme on one channel draw, with the link that
/// the scheme serves.
RVector scheme_sinr(Scheme s, const PointDesign& design, const ChannelRealization& channel);

/// One row per requested scheme; the asymptotic-curves scheme expands into
/// several deterministic rows with zero spread.
std::vector<ResultRow> run_point(const SystemConfig& config, const UeGeometry& geometry, const RVector& gamma,
                                 const std::vector<Scheme>& schemes, int n_trials, SweepVar var = SweepVar::Eta,
                                 double sweep_value = 0.0);

std::vector<ResultRow> run_sweep(const ExperimentPlan& plan);

std::string format_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

}  // namespace lsmimo
