#include <gtest/gtest.h>

#include "hhcl/memory.hpp"
#include "oracles.hpp"

using namespace hhcl;

namespace {

EmbeddingMatrix rows(const std::vector<std::vector<double>>& r) {
  Matrix m(r.size(), r.front().size());
  for (std::size_t i = 0; i < r.size(); ++i) std::copy(r[i].begin(), r[i].end(), m.row(i).begin());
  return EmbeddingMatrix::normalized(std::move(m));
}

EmbeddingMatrix random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  return rows(oracle::random_unit_points(n, d, rng));
}

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(ClusterBankInit, SingletonCentroidIsTheSample) {
  const auto e = rows({{0.6, 0.8}, {1.0, 0.0}});
  const auto bank = ClusterBank::init(e, PseudoLabeling({0, PseudoLabeling::kOutlier}, 1), 0.2);
  EXPECT_EQ(vec(bank.centroid(0)), vec(e.row(0)));
}

TEST(ClusterBankInit, NormalizedMean) {
  const auto e = rows({{1.0, 0.0}, {0.0, 1.0}});
  const auto bank = ClusterBank::init(e, PseudoLabeling({0, 0}, 1), 0.2);
  EXPECT_NEAR(bank.centroid(0)[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(bank.centroid(0)[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ClusterBankInit, AntipodalMembersAreDegenerate) {
  const auto e = rows({{1.0, 0.0}, {-1.0, 0.0}});
  EXPECT_THROW(ClusterBank::init(e, PseudoLabeling({0, 0}, 1), 0.2), NumericError);
}

TEST(ClusterBankInit, OutliersIgnored) {
  const auto e = rows({{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}});
  const auto bank = ClusterBank::init(e, PseudoLabeling({0, PseudoLabeling::kOutlier, 1}, 2), 0.2);
  EXPECT_EQ(bank.num_clusters(), 2u);
  EXPECT_EQ(bank.centroid(0)[0], 1.0);
}

TEST(ClusterBankUpdate, AlphaOneIsIdentity) {
  std::mt19937_64 rng(1);
  const auto e = random_rows(6, 5, rng);
  auto bank = ClusterBank::init(e, PseudoLabeling({0, 0, 1, 1, 2, 2}, 3), 1.0);
  const Matrix before = bank.centroids();
  const std::vector<std::int32_t> labels{0, 1, 2, 0};
  bank.update(random_rows(4, 5, rng), labels);
  EXPECT_EQ(bank.centroids(), before);
}

TEST(ClusterBankUpdate, AlphaZeroTakesBatchMean) {
  auto bank = ClusterBank(Matrix(1, 2, std::vector<double>{1.0, 0.0}), 0.0);
  const std::vector<std::int32_t> labels{0, 0};
  bank.update(rows({{0.0, 1.0}, {0.6, 0.8}}), labels);
  const double nx = 0.3, ny = 0.9, n = std::hypot(nx, ny);
  EXPECT_NEAR(bank.centroid(0)[0], nx / n, 1e-15);
  EXPECT_NEAR(bank.centroid(0)[1], ny / n, 1e-15);
}

TEST(ClusterBankUpdate, HalfMomentumRenormalizes) {
  auto bank = ClusterBank(Matrix(1, 2, std::vector<double>{1.0, 0.0}), 0.5);
  const std::vector<std::int32_t> labels{0};
  bank.update(rows({{0.0, 1.0}}), labels);
  EXPECT_NEAR(bank.centroid(0)[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(bank.centroid(0)[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ClusterBankUpdate, VanishingBlendKeepsPreviousCentroid) {
  auto bank = ClusterBank(Matrix(1, 2, std::vector<double>{1.0, 0.0}), 0.5);
  const std::vector<std::int32_t> labels{0};
  EXPECT_EQ(bank.update(rows({{-1.0, 0.0}}), labels), 1u);
  EXPECT_EQ(bank.centroid(0)[0], 1.0);
}

TEST(ClusterBankUpdate, InvalidLabelRejected) {
  auto bank = ClusterBank(Matrix(1, 2, std::vector<double>{1.0, 0.0}), 0.5);
  const std::vector<std::int32_t> labels{3};
  EXPECT_THROW(bank.update(rows({{0.0, 1.0}}), labels), ParameterError);
}

TEST(InstanceBankInit, ExactlySMembersIsAPermutation) {
  std::mt19937_64 rng(2);
  const auto e = random_rows(4, 3, rng);
  const auto bank = InstanceBank::init(e, PseudoLabeling({0, 0, 0, 0}, 1), 4, 9);
  std::vector<std::vector<double>> got, want;
  for (std::size_t k = 0; k < 4; ++k) {
    got.push_back(vec(bank.slot(0, k)));
    want.push_back(vec(e.row(k)));
  }
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
}

TEST(InstanceBankInit, SingleMemberFillsEverySlot) {
  const auto e = rows({{0.6, 0.8}});
  const auto bank = InstanceBank::init(e, PseudoLabeling({0}, 1), 4, 1);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(vec(bank.slot(0, k)), vec(e.row(0)));
}

TEST(InstanceBankInit, DeterministicForSeed) {
  std::mt19937_64 rng(3);
  const auto e = random_rows(30, 4, rng);
  std::vector<std::int32_t> l(30);
  for (std::size_t i = 0; i < 30; ++i) l[i] = static_cast<std::int32_t>(i % 3);
  const PseudoLabeling labels(l, 3);
  const auto a = InstanceBank::init(e, labels, 4, 123);
  const auto b = InstanceBank::init(e, labels, 4, 123);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(vec(a.slot(c, k)), vec(b.slot(c, k)));
}

TEST(InstanceBankUpdate, FullBatchReplacesInOrder) {
  std::mt19937_64 rng(4);
  auto bank = InstanceBank::init(random_rows(4, 3, rng), PseudoLabeling({0, 0, 1, 1}, 2), 4, 0);
  const auto batch = random_rows(4, 3, rng);
  const std::vector<std::int32_t> labels{1, 1, 1, 1};
  std::vector<std::vector<double>> untouched;
  for (std::size_t k = 0; k < 4; ++k) untouched.push_back(vec(bank.slot(0, k)));
  bank.update(batch, labels);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(vec(bank.slot(1, k)), vec(batch.row(k)));
    EXPECT_EQ(vec(bank.slot(0, k)), untouched[k]);
  }
}

TEST(InstanceBankUpdate, RoundRobinCursorCoversAllSlots) {
  std::mt19937_64 rng(5);
  auto bank = InstanceBank::init(random_rows(1, 3, rng), PseudoLabeling({0}, 1), 4, 0);
  const auto b1 = random_rows(2, 3, rng);
  const auto b2 = random_rows(2, 3, rng);
  const std::vector<std::int32_t> labels{0, 0};
  bank.update(b1, labels);
  EXPECT_EQ(bank.cursor(0), 2u);
  bank.update(b2, labels);
  EXPECT_EQ(bank.cursor(0), 0u);
  EXPECT_EQ(vec(bank.slot(0, 0)), vec(b1.row(0)));
  EXPECT_EQ(vec(bank.slot(0, 1)), vec(b1.row(1)));
  EXPECT_EQ(vec(bank.slot(0, 2)), vec(b2.row(0)));
  EXPECT_EQ(vec(bank.slot(0, 3)), vec(b2.row(1)));
}

TEST(HardSelection, AnalyticCases) {
  InstanceBank bank = InstanceBank::init(rows({{1.0, 0.0}, {0.0, 1.0}}), PseudoLabeling({0, 0}, 1), 2, 0);
  // place slots deterministically: slot 0=(1,0), slot 1=(0,1)
  const std::vector<std::int32_t> labels{0, 0};
  bank.update(rows({{1.0, 0.0}, {0.0, 1.0}}), labels);
  const std::vector<double> q{1.0, 0.0};
  EXPECT_EQ(select_hard_positive(q, bank, 0).slot, 1u);
  EXPECT_EQ(select_hard_negative(q, bank, 0).slot, 0u);
  const std::vector<double> ortho{0.0, 0.0};
  EXPECT_EQ(select_hard_negative(ortho, bank, 0).slot, 0u);
}

TEST(HardSelection, AllSlotsEqualPicksSlotZero) {
  const auto bank = InstanceBank::init(rows({{0.6, 0.8}}), PseudoLabeling({0}, 1), 5, 0);
  const std::vector<double> q{1.0, 0.0};
  EXPECT_EQ(select_hard_positive(q, bank, 0).slot, 0u);
  EXPECT_EQ(select_hard_negative(q, bank, 0).slot, 0u);
}

TEST(HardSelection, MatchesExhaustiveScanAndIgnoresQueryScale) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto e = random_rows(16, 6, rng);
    const auto bank = InstanceBank::init(e, PseudoLabeling(std::vector<std::int32_t>(16, 0), 1), 16, trial);
    oracle::Points slots;
    for (std::size_t k = 0; k < 16; ++k) slots.push_back(vec(bank.slot(0, k)));
    auto q = oracle::random_unit_points(1, 6, rng)[0];
    auto q10 = q;
    for (double& x : q10) x *= 10.0;
    EXPECT_EQ(select_hard_positive(q, bank, 0).slot, oracle::argbest(q, slots, false));
    EXPECT_EQ(select_hard_negative(q, bank, 0).slot, oracle::argbest(q, slots, true));
    EXPECT_EQ(select_hard_positive(q10, bank, 0).slot, select_hard_positive(q, bank, 0).slot);
    EXPECT_EQ(select_hard_negative(q10, bank, 0).slot, select_hard_negative(q, bank, 0).slot);
  }
}
