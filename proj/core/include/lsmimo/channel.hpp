#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "lsmimo/types.hpp"

namespace lsmimo {

using Rng = std::mt19937_64;

/// Independent generator for one (seed, stream, index) triple. Trial `i` of a
/// Monte Carlo point always sees the same draws regardless of execution order.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Well-known stream ids so that geometry, priorities and trials never share
/// draws.
namespace streams {
inline constexpr std::uint64_t kGeometry = 1;
inline constexpr std::uint64_t kPriorities = 2;
inline constexpr std::uint64_t kTrials = 3;
}  // namespace streams

struct SystemConfig {
  int M = 128;
  int K = 32;
  double rho = 100.0;  // linear; 20 dB
  double p_max = 5.0;
  double eta = 0.0;
  // Optional per-UE CSI quality; overrides `eta` when non-empty.
  std::vector<double> eta_per_ue;
  // Priorities; drawn from U[1,2] once per experiment when empty.
  std::vector<double> gamma;
  int J = 2;
  std::uint64_t seed = 1;
  double cell_radius = 250.0;
  double d0 = 30.0;
  double ple = 3.8;
  // Optional fixed UE distances in meters; sampled once per experiment when empty.
  std::vector<double> distances;

  /// Throws InputError on any violated invariant.
  void validate() const;

  double eta_of(int k) const;
  RVector eta_vector() const;
};

struct UeGeometry {
  RVector distances;
  RVector betas;

  int size() const { return static_cast<int>(betas.size()); }
};

/// Columns are per-UE channels: `h_true` is h_k, `h_est` is the base
/// station's Gauss-Markov estimate.
struct ChannelRealization {
  CMatrix h_true;
  CMatrix h_est;
};

/// beta_k = 1 / (1 + (x_k / d0)^ple).
UeGeometry generate_pathloss(std::span<const double> distances, double d0, double ple);

/// Distances of K points uniform over a disc of the given radius.
std::vector<double> sample_ue_positions(Rng& rng, int K, double cell_radius);

/// K priorities uniform on [1, 2].
std::vector<double> draw_priorities(Rng& rng, int K);

/// Resolves the geometry for an experiment: explicit distances if configured,
/// otherwise sampled from the geometry stream of `config.seed`.
UeGeometry experiment_geometry(const SystemConfig& config);

/// Resolves priorities the same way (configured, else drawn once from seed).
std::vector<double> experiment_priorities(const SystemConfig& config);

/// h_k = sqrt(beta_k) z_k and h_est_k = sqrt(1 - eta_k^2) h_k + sqrt(beta_k) eta_k w_k
/// with z_k, w_k ~ CN(0, I_M). Both z and w are always drawn so that h_true
/// does not depend on eta for a fixed generator state.
ChannelRealization draw_channel(Rng& rng, const UeGeometry& geometry, const SystemConfig& config);

/// CSV with header `ue_index,distance_m,beta`.
void write_geometry_csv(const std::filesystem::path& path, const UeGeometry& geometry);
UeGeometry read_geometry_csv(const std::filesystem::path& path);

}  // namespace lsmimo
