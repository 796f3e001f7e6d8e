// Per-coherence-block cost of each transceiver at growing array sizes (K = M/4).

#include <benchmark/benchmark.h>

#include "lsmimo/asymptotic.hpp"
#include "lsmimo/channel.hpp"
#include "lsmimo/exact.hpp"
#include "lsmimo/tpe.hpp"

namespace {

struct Fixture {
  lsmimo::SystemConfig config;
  lsmimo::UeGeometry geometry;
  lsmimo::RVector gamma;
  lsmimo::ChannelRealization channel;
  lsmimo::AsymptoticParams asym;

  explicit Fixture(int M, double eta = 0.3) {
    config.M = M;
    config.K = M / 4;
    config.eta = eta;
    geometry = lsmimo::experiment_geometry(config);
    const auto g = lsmimo::experiment_priorities(config);
    gamma = Eigen::Map<const lsmimo::RVector>(g.data(), config.K);
    lsmimo::Rng rng = lsmimo::make_stream(config.seed, lsmimo::streams::kTrials, 0);
    channel = lsmimo::draw_channel(rng, geometry, config);
    asym = lsmimo::asymptotic_params(gamma, geometry.betas, config.eta_vector(), config.M, config.K, config.rho,
                                     config.p_max);
  }
};

void BM_ExactDesign(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto t = lsmimo::design_optimal(f.channel.h_est, f.gamma, f.config.rho, f.config.p_max);
    benchmark::DoNotOptimize(t.precoder.dl_powers.data());
  }
}
BENCHMARK(BM_ExactDesign)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_AsymptoticDirections(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto d = lsmimo::compute_directions(f.channel.h_est, f.asym.q_bar, f.config.rho);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_AsymptoticDirections)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

// Weights and powers depend only on statistics; this runs once per geometry.
void BM_TpeDesign(benchmark::State& state) {
  const Fixture f(128);
  const int J = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto m = lsmimo::build_deterministic_moments(f.geometry.betas, f.asym.q_bar, f.config.eta_vector(), f.config.M,
                                                 f.config.K, J);
    auto s = lsmimo::design_tpe(m, f.gamma, f.config.rho, f.config.p_max);
    benchmark::DoNotOptimize(s.p_tpe.data());
  }
}
BENCHMARK(BM_TpeDesign)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_TpeBeamformers(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const auto m = lsmimo::build_deterministic_moments(f.geometry.betas, f.asym.q_bar, f.config.eta_vector(),
                                                     f.config.M, f.config.K, 2);
  const auto s = lsmimo::design_tpe(m, f.gamma, f.config.rho, f.config.p_max);
  for (auto _ : state) {
    auto v = lsmimo::tpe_beamformers(f.channel.h_est, f.asym.q_bar, s.weights.w);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_TpeBeamformers)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EmpiricalMoments(benchmark::State& state) {
  const Fixture f(128);
  const int J = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto e = lsmimo::build_empirical_moments(f.channel, f.asym.q_bar, J);
    benchmark::DoNotOptimize(e.a.data());
  }
}
BENCHMARK(BM_EmpiricalMoments)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
