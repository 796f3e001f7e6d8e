#include "lsmimo/channel.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "lsmimo/errors.hpp"

namespace lsmimo {

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("config: " + msg); };
  if (M <= 0) fail("M must be positive");
  if (K <= 0) fail("K must be positive");
  if (K >= M) fail("K must be smaller than M");
  if (!(rho > 0.0) || !std::isfinite(rho)) fail("rho must be positive");
  if (!(p_max > 0.0) || !std::isfinite(p_max)) fail("p_max must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) fail("eta must lie in [0, 1]");
  if (!eta_per_ue.empty()) {
    if (static_cast<int>(eta_per_ue.size()) != K) fail("eta_per_ue must have K entries");
    for (double e : eta_per_ue) {
      if (!(e >= 0.0 && e <= 1.0)) fail("eta_per_ue entries must lie in [0, 1]");
    }
  }
  if (!gamma.empty()) {
    if (static_cast<int>(gamma.size()) != K) fail("gamma must have K entries");
    for (double g : gamma) {
      if (!(g > 0.0) || !std::isfinite(g)) fail("gamma entries must be positive");
    }
  }
  if (J < 1) fail("J must be at least 1");
  if (!(cell_radius > 0.0)) fail("cell_radius must be positive");
  if (!(d0 > 0.0)) fail("d0 must be positive");
  if (!(ple > 0.0)) fail("ple must be positive");
  if (!distances.empty()) {
    if (static_cast<int>(distances.size()) != K) fail("distances must have K entries");
    for (double x : distances) {
      if (!(x >= 0.0) || !std::isfinite(x)) fail("distances must be finite and non-negative");
    }
  }
}

double SystemConfig::eta_of(int k) const {
  return eta_per_ue.empty() ? eta : eta_per_ue[static_cast<std::size_t>(k)];
}

RVector SystemConfig::eta_vector() const {
  RVector e(K);
  for (int k = 0; k < K; ++k) e(k) = eta_of(k);
  return e;
}

UeGeometry generate_pathloss(std::span<const double> distances, double d0, double ple) {
  if (!(d0 > 0.0)) throw InputError("generate_pathloss: d0 must be positive");
  UeGeometry g;
  const auto n = static_cast<Eigen::Index>(distances.size());
  g.distances.resize(n);
  g.betas.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double x = distances[static_cast<std::size_t>(k)];
    if (!std::isfinite(x) || x < 0.0) {
      throw InputError("generate_pathloss: distance must be finite and non-negative");
    }
    g.distances(k) = x;
    g.betas(k) = 1.0 / (1.0 + std::pow(x / d0, ple));
  }
  return g;
}

std::vector<double> sample_ue_positions(Rng& rng, int K, double cell_radius) {
  if (!(cell_radius > 0.0)) throw InputError("sample_ue_positions: radius must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(K));
  // Radial CDF of a uniform disc is (x/R)^2.
  for (auto& xi : x) xi = cell_radius * std::sqrt(unif(rng));
  return x;
}

std::vector<double> draw_priorities(Rng& rng, int K) {
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::vector<double> g(static_cast<std::size_t>(K));
  for (auto& gi : g) gi = unif(rng);
  return g;
}

UeGeometry experiment_geometry(const SystemConfig& config) {
  if (!config.distances.empty()) {
    return generate_pathloss(config.distances, config.d0, config.ple);
  }
  Rng rng = make_stream(config.seed, streams::kGeometry, 0);
  const auto x = sample_ue_positions(rng, config.K, config.cell_radius);
  return generate_pathloss(x, config.d0, config.ple);
}

std::vector<double> experiment_priorities(const SystemConfig& config) {
  if (!config.gamma.empty()) return config.gamma;
  Rng rng = make_stream(config.seed, streams::kPriorities, 0);
  return draw_priorities(rng, config.K);
}

ChannelRealization draw_channel(Rng& rng, const UeGeometry& geometry, const SystemConfig& config) {
  const int M = config.M;
  const int K = config.K;
  if (geometry.size() != K) throw InputError("draw_channel: geometry size does not match K");

  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto cn = [&] {
    const double re = normal(rng);
    const double im = normal(rng);
    return cdouble(re, im);
  };

  ChannelRealization ch;
  ch.h_true.resize(M, K);
  ch.h_est.resize(M, K);
  for (int k = 0; k < K; ++k) {
    const double sb = std::sqrt(geometry.betas(k));
    for (int m = 0; m < M; ++m) ch.h_true(m, k) = sb * cn();
  }
  CMatrix w(M, K);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) w(m, k) = cn();
  }
  for (int k = 0; k < K; ++k) {
    const double eta = config.eta_of(k);
    if (eta == 0.0) {
      ch.h_est.col(k) = ch.h_true.col(k);
    } else {
      const double a = std::sqrt(1.0 - eta * eta);
      const double b = std::sqrt(geometry.betas(k)) * eta;
      ch.h_est.col(k) = a * ch.h_true.col(k) + b * w.col(k);
    }
  }
  return ch;
}

void write_geometry_csv(const std::filesystem::path& path, const UeGeometry& geometry) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "ue_index,distance_m,beta\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < geometry.size(); ++k) {
    out << k << ',' << geometry.distances(k) << ',' << geometry.betas(k) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

UeGeometry read_geometry_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open geometry file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ue_index,distance_m,beta", 0) != 0) {
    throw InputError("geometry file " + path.string() + ": bad header");
  }
  std::vector<double> x;
  std::vector<double> b;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f0, f1, f2;
    if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ',')) {
      throw InputError("geometry file " + path.string() + ": malformed row '" + line + "'");
    }
    if (std::stoul(f0) != x.size()) {
      throw InputError("geometry file " + path.string() + ": ue_index out of order");
    }
    x.push_back(std::stod(f1));
    b.push_back(std::stod(f2));
    if (!(b.back() > 0.0)) throw InputError("geometry file " + path.string() + ": beta must be positive");
  }
  UeGeometry g;
  g.distances = Eigen::Map<const RVector>(x.data(), static_cast<Eigen::Index>(x.size()));
  g.betas = Eigen::Map<const RVector>(b.data(), static_cast<Eigen::Index>(b.size()));
  return g;
}

}  // namespace lsmimo
