#include <gtest/gtest.h>

#include <set>

#include "hhcl/synthdata.hpp"

using namespace hhcl;

namespace {

double feature_norm(const Sample& s) {
  double a = 0.0;
  for (float x : s.feature) a += static_cast<double>(x) * x;
  return std::sqrt(a);
}

}  // namespace

TEST(Synth, ShapesAndUnitNorm) {
  const auto ds = generate(SynthSpec{});
  EXPECT_EQ(ds.train.size(), 50u * 20u);
  EXPECT_EQ(ds.query.size(), 50u * 3u);
  EXPECT_EQ(ds.gallery.size(), 50u * 17u);
  for (const auto* part : {&ds.train, &ds.query, &ds.gallery})
    for (const auto& s : *part) {
      EXPECT_EQ(s.feature.size(), 32u);
      EXPECT_NEAR(feature_norm(s), 1.0, 1e-6);
      EXPECT_LT(s.camera, 3u);
    }
}

TEST(Synth, TrainAndTestIdentitiesAreDisjoint) {
  const auto ds = generate(SynthSpec{});
  std::set<std::int64_t> train, test;
  for (const auto& s : ds.train) train.insert(s.identity);
  for (const auto& s : ds.query) test.insert(s.identity);
  for (const auto& s : ds.gallery) test.insert(s.identity);
  EXPECT_EQ(train.size(), 50u);
  EXPECT_EQ(test.size(), 50u);
  for (auto id : test) EXPECT_EQ(train.count(id), 0u);
}

TEST(Synth, EveryQueryHasCrossCameraMatch) {
  const auto ds = generate(SynthSpec{});
  for (const auto& q : ds.query) {
    const bool found = std::any_of(ds.gallery.begin(), ds.gallery.end(), [&](const Sample& g) {
      return g.identity == q.identity && g.camera != q.camera;
    });
    EXPECT_TRUE(found);
  }
}

TEST(Synth, DeterministicForSeed) {
  SynthSpec s;
  s.seed = 7;
  const auto a = generate(s), b = generate(s);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].feature, b.train[i].feature);
  s.seed = 8;
  EXPECT_NE(generate(s).train[0].feature, a.train[0].feature);
}

TEST(Synth, ZeroNoiseGivesIdenticalInstances) {
  SynthSpec s;
  s.sigma_within = 0.0;
  s.sigma_cam = 0.0;
  s.num_identities = 3;
  s.num_test_identities = 1;
  const auto ds = generate(s);
  for (const auto& x : ds.train) {
    const auto& first = ds.train[static_cast<std::size_t>(x.identity) * s.instances_per_identity];
    EXPECT_EQ(x.feature, first.feature);
  }
}

TEST(Synth, InfeasibleSpecsAreRejected) {
  SynthSpec s;
  s.min_angle = 3.0;  // cannot pack 100 prototypes this far apart
  s.max_attempts = 50;
  EXPECT_THROW(generate(s), InfeasibleSpecError);
  s = SynthSpec{};
  s.num_cameras = 1;
  EXPECT_THROW(generate(s), InfeasibleSpecError);
  s = SynthSpec{};
  s.instances_per_identity = 3;
  EXPECT_THROW(generate(s), InfeasibleSpecError);
  s = SynthSpec{};
  s.sigma_within = -1.0;
  EXPECT_THROW(generate(s), ParameterError);
}
