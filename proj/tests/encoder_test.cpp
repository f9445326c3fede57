#include <gtest/gtest.h>

#include <filesystem>

#include "hhcl/encoder.hpp"
#include "hhcl/loss.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hhcl;

namespace {

Matrix random_inputs(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& x : m.data()) x = standard_normal(rng);
  return m;
}

// <G, f(X)> as a function of the flat parameter vector.
double probe(const EncoderModel& base, const std::vector<double>& params, const Matrix& x, const Matrix& g) {
  EncoderModel m = base;
  m.params() = params;
  const auto out = forward(m, x).embeddings;
  double s = 0.0;
  for (std::size_t i = 0; i < g.data().size(); ++i) s += g.data()[i] * out.matrix().data()[i];
  return s;
}

}  // namespace

TEST(Encoder, IdentityLayerNormalizesInput) {
  const auto m = EncoderModel::identity(3);
  const auto out = forward(m, Matrix(1, 3, std::vector<double>{3.0, 0.0, 4.0})).embeddings;
  EXPECT_NEAR(out.row(0)[0], 0.6, 1e-12);
  EXPECT_NEAR(out.row(0)[2], 0.8, 1e-12);
}

TEST(Encoder, OutputsAreUnitNorm) {
  Rng rng(1);
  const auto m = EncoderModel::random({8, 16, 4}, 2);
  const auto out = forward(m, random_inputs(20, 8, rng)).embeddings;
  for (std::size_t r = 0; r < out.rows(); ++r) EXPECT_NEAR(norm(out.row(r)), 1.0, 1e-9);
}

TEST(Encoder, RowsAreIndependentOfBatchComposition) {
  Rng rng(3);
  const auto m = EncoderModel::random({6, 10, 5}, 4);
  const Matrix x = random_inputs(7, 6, rng);
  const auto all = forward(m, x).embeddings;
  for (std::size_t r = 0; r < 7; ++r) {
    Matrix one(1, 6);
    std::copy(x.row(r).begin(), x.row(r).end(), one.row(0).begin());
    const auto single = forward(m, one).embeddings;
    for (std::size_t d = 0; d < 5; ++d) EXPECT_EQ(single.row(0)[d], all.row(r)[d]);
  }
  const auto chunked = embed(m, x, 3);
  EXPECT_EQ(chunked.matrix(), all.matrix());
}

TEST(Encoder, RejectsWrongInputWidth) {
  const auto m = EncoderModel::random({4, 3}, 0);
  EXPECT_THROW(forward(m, Matrix(2, 5)), ParameterError);
  EXPECT_THROW(EncoderModel({4}), ParameterError);
}

TEST(EncoderBackward, ZeroUpstreamGradientGivesZero) {
  Rng rng(5);
  const auto m = EncoderModel::random({8, 16, 4}, 6);
  const auto fwd = forward(m, random_inputs(4, 8, rng));
  const auto g = backward(m, fwd.cache, Matrix(4, 4));
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(EncoderBackward, RadialUpstreamGradientVanishes) {
  // The normalization discards the radial component of the upstream gradient.
  Rng rng(7);
  const auto m = EncoderModel::random({5, 4}, 8);
  const auto fwd = forward(m, random_inputs(3, 5, rng));
  const auto g = backward(m, fwd.cache, fwd.embeddings.matrix());
  for (double v : g) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(EncoderBackward, MatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = EncoderModel::random({8, 16, 4}, 100 + trial);
    const Matrix x = random_inputs(4, 8, rng);
    const Matrix up = random_inputs(4, 4, rng);
    const auto analytic = backward(m, forward(m, x).cache, up);
    const auto numeric =
        oracle::numeric_gradient([&](const std::vector<double>& p) { return probe(m, p, x, up); }, m.params());
    EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-4) << "trial " << trial;
  }
}

TEST(EncoderBackward, HybridLossThroughEncoderMatchesFiniteDifferences) {
  Rng rng(11);
  const auto m = EncoderModel::random({6, 12, 4}, 12);
  const Matrix x = random_inputs(6, 6, rng);
  const std::vector<std::int32_t> labels{0, 0, 1, 1, 2, 2};
  const PseudoLabeling pl(labels, 3);
  // banks built from a different random projection so the query is not a key
  const auto other = forward(EncoderModel::random({6, 12, 4}, 13), x).embeddings;
  const auto cls = ClusterBank::init(other, pl, 0.2);
  const auto ins = InstanceBank::init(other, pl, 2, 0);
  const LossWeights w{0.5, 0.5, 0.5};
  auto loss_at = [&](const std::vector<double>& p) {
    EncoderModel mm = m;
    mm.params() = p;
    return batch_loss(forward(mm, x).embeddings, labels, cls, ins, w).value;
  };
  const auto fwd = forward(m, x);
  const auto analytic = backward(m, fwd.cache, batch_loss(fwd.embeddings, labels, cls, ins, w).grad);
  EXPECT_LT(oracle::relative_error(analytic, oracle::numeric_gradient(loss_at, m.params())), 1e-4);
}

TEST(Adam, ZeroGradientOnlyAppliesWeightDecay) {
  auto m = EncoderModel::random({3, 2}, 1);
  const auto before = m.params();
  OptimizerState s(before.size(), 0.1, 0.0, 0.1, 20);
  adam_step(m, std::vector<double>(before.size(), 0.0), s);
  EXPECT_EQ(m.params(), before);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  EncoderModel m({1, 1});
  m.params() = {1.0, 0.0};
  OptimizerState s(2, 0.1, 0.0, 0.1, 20);
  adam_step(m, std::vector<double>{1.0, -1.0}, s);
  EXPECT_NEAR(m.params()[0], 0.9, 1e-6);
  EXPECT_NEAR(m.params()[1], 0.1, 1e-6);
}

TEST(Adam, DecoupledWeightDecay) {
  EncoderModel m({1, 1});
  m.params() = {2.0, 0.0};
  OptimizerState s(2, 0.1, 0.5, 0.1, 20);
  adam_step(m, std::vector<double>{0.0, 0.0}, s);
  EXPECT_DOUBLE_EQ(m.params()[0], 2.0 - 0.1 * 0.5 * 2.0);
}

TEST(Adam, StepSchedule) {
  OptimizerState s(1, 3.5e-4, 0.0, 0.1, 20);
  EXPECT_EQ(s.lr_at(0), 3.5e-4);
  EXPECT_EQ(s.lr_at(19), 3.5e-4);
  EXPECT_NEAR(s.lr_at(20), 3.5e-5, 1e-18);
  EXPECT_NEAR(s.lr_at(40), 3.5e-6, 1e-18);
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto dir = fs::temp_directory_path() / "hhcl_encoder_test";
  fs::create_directories(dir);
  const auto path = (dir / "ck.bin").string();
  Rng rng(2);
  Checkpoint ck{EncoderModel::random({5, 7, 3}, 3), {}, 9};
  ck.optimizer = OptimizerState(ck.model.params().size(), 1e-3, 5e-4, 0.1, 20);
  for (double& x : ck.optimizer.m) x = standard_normal(rng);
  for (double& x : ck.optimizer.v) x = std::abs(standard_normal(rng));
  ck.optimizer.step = 17;
  save_checkpoint(ck, path);
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.model, ck.model);
  EXPECT_EQ(back.optimizer.m, ck.optimizer.m);
  EXPECT_EQ(back.optimizer.v, ck.optimizer.v);
  EXPECT_EQ(back.optimizer.step, 17u);
  EXPECT_EQ(back.epoch, 9u);
  fs::resize_file(path, fs::file_size(path) - 3);
  EXPECT_THROW(load_checkpoint(path), IoError);
}
