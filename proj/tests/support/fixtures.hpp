#pragma once

#include "lsmimo/channel.hpp"

namespace fixture {

struct Setup {
  lsmimo::SystemConfig config;
  lsmimo::UeGeometry geometry;
  lsmimo::RVector gamma;
};

inline Setup make(int M, int K, double eta = 0.0, std::uint64_t seed = 7) {
  Setup s;
  s.config.M = M;
  s.config.K = K;
  s.config.eta = eta;
  s.config.seed = seed;
  s.geometry = lsmimo::experiment_geometry(s.config);
  const auto g = lsmimo::experiment_priorities(s.config);
  s.gamma = Eigen::Map<const lsmimo::RVector>(g.data(), K);
  return s;
}

inline lsmimo::ChannelRealization draw(const Setup& s, std::uint64_t index) {
  lsmimo::Rng rng = lsmimo::make_stream(s.config.seed, lsmimo::streams::kTrials, index);
  return lsmimo::draw_channel(rng, s.geometry, s.config);
}

inline double max_rel(const lsmimo::RVector& a, const lsmimo::RVector& b) {
  return ((a - b).cwiseQuotient(b)).cwiseAbs().maxCoeff();
}

}  // namespace fixture
