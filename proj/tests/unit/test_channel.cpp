#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "lsmimo/channel.hpp"
#include "lsmimo/errors.hpp"

using namespace lsmimo;

TEST(Pathloss, ReferencePoints) {
  const std::vector<double> x{0.0, 30.0, 250.0};
  const auto g = generate_pathloss(x, 30.0, 3.8);
  EXPECT_EQ(g.betas(0), 1.0);
  EXPECT_DOUBLE_EQ(g.betas(1), 0.5);
  const double direct = 1.0 / (1.0 + std::exp(3.8 * std::log(250.0 / 30.0)));
  EXPECT_NEAR(g.betas(2), direct, 1e-14 * direct);  // exp(log) oracle loses a few ulp
}

TEST(Pathloss, RejectsBadDistances) {
  EXPECT_THROW(generate_pathloss(std::vector<double>{-1.0}, 30.0, 3.8), InputError);
  EXPECT_THROW(generate_pathloss(std::vector<double>{NAN}, 30.0, 3.8), InputError);
  EXPECT_THROW(generate_pathloss(std::vector<double>{1.0}, 0.0, 3.8), InputError);
}

TEST(UePositions, SupportAndMean) {
  Rng rng = make_stream(3, streams::kGeometry, 0);
  const auto x = sample_ue_positions(rng, 100000, 250.0);
  double sum = 0.0;
  for (double v : x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 250.0);
    sum += v;
  }
  EXPECT_NEAR(sum / x.size(), 2.0 / 3.0 * 250.0, 0.01 * 2.0 / 3.0 * 250.0);
}

TEST(UePositions, Deterministic) {
  Rng a = make_stream(11, streams::kGeometry, 0);
  Rng b = make_stream(11, streams::kGeometry, 0);
  EXPECT_EQ(sample_ue_positions(a, 32, 250.0), sample_ue_positions(b, 32, 250.0));
}

TEST(Priorities, InUnitInterval) {
  Rng rng = make_stream(5, streams::kPriorities, 0);
  for (double g : draw_priorities(rng, 1000)) {
    EXPECT_GE(g, 1.0);
    EXPECT_LE(g, 2.0);
  }
}

TEST(Config, Validation) {
  SystemConfig c;
  EXPECT_NO_THROW(c.validate());
  c.K = c.M;
  EXPECT_THROW(c.validate(), InputError);
  c = SystemConfig{};
  c.eta = 1.5;
  EXPECT_THROW(c.validate(), InputError);
  c = SystemConfig{};
  c.gamma = {1.0, 2.0};
  EXPECT_THROW(c.validate(), InputError);
  c = SystemConfig{};
  c.J = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = SystemConfig{};
  c.rho = -1.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(DrawChannel, PerfectCsiIsBitExact) {
  const auto s = fixture::make(16, 4, 0.0);
  const auto ch = fixture::draw(s, 0);
  EXPECT_TRUE((ch.h_true.array() == ch.h_est.array()).all());
}

TEST(DrawChannel, DeterministicAndIndependentOfEta) {
  auto s = fixture::make(16, 4, 0.4);
  const auto a = fixture::draw(s, 3);
  const auto b = fixture::draw(s, 3);
  EXPECT_TRUE((a.h_est.array() == b.h_est.array()).all());
  s.config.eta = 0.8;
  const auto c = fixture::draw(s, 3);
  EXPECT_TRUE((a.h_true.array() == c.h_true.array()).all());
}

TEST(DrawChannel, SecondMomentsMatchPathloss) {
  auto s = fixture::make(64, 4, 0.5);
  const int draws = 10000;
  Eigen::ArrayXd power = Eigen::ArrayXd::Zero(4);
  for (int t = 0; t < draws; ++t) {
    const auto ch = fixture::draw(s, static_cast<std::uint64_t>(t));
    power += ch.h_est.colwise().squaredNorm().transpose().array() / 64.0;
  }
  power /= draws;
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(power(k) / s.geometry.betas(k), 1.0, 0.02) << k;
}

TEST(DrawChannel, CrossCorrelation) {
  auto s = fixture::make(256, 4, 0.6);
  const int draws = 2000;
  Eigen::ArrayXd corr = Eigen::ArrayXd::Zero(4);
  for (int t = 0; t < draws; ++t) {
    const auto ch = fixture::draw(s, static_cast<std::uint64_t>(t));
    for (int k = 0; k < 4; ++k) corr(k) += ch.h_est.col(k).dot(ch.h_true.col(k)).real() / 256.0;
  }
  corr /= draws;
  const double expected = std::sqrt(1.0 - 0.36);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(corr(k) / s.geometry.betas(k), expected, 0.02 * expected) << k;
}

TEST(DrawChannel, FullErrorDecorrelates) {
  auto s = fixture::make(4096, 2, 1.0);
  const auto ch = fixture::draw(s, 0);
  for (int k = 0; k < 2; ++k) {
    const double c = std::abs(ch.h_est.col(k).dot(ch.h_true.col(k))) / 4096.0 / s.geometry.betas(k);
    EXPECT_LT(c, 0.1);
  }
}

TEST(GeometryCsv, RoundTrip) {
  const auto s = fixture::make(16, 5);
  const auto path = std::filesystem::temp_directory_path() / "lsmimo_geometry_test.csv";
  write_geometry_csv(path, s.geometry);
  const auto g = read_geometry_csv(path);
  std::filesystem::remove(path);
  EXPECT_TRUE((g.distances.array() == s.geometry.distances.array()).all());
  EXPECT_TRUE((g.betas.array() == s.geometry.betas.array()).all());
}

TEST(Geometry, ExplicitDistancesWin) {
  SystemConfig c;
  c.M = 8;
  c.K = 2;
  c.distances = {30.0, 0.0};
  const auto g = experiment_geometry(c);
  EXPECT_DOUBLE_EQ(g.betas(0), 0.5);
  EXPECT_EQ(g.betas(1), 1.0);
}
