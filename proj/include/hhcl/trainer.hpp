#pragma once

#include <chrono>
#include <functional>
#include <vector>

#include "hhcl/clustering.hpp"
#include "hhcl/config.hpp"
#include "hhcl/core.hpp"
#include "hhcl/encoder.hpp"
#include "hhcl/loss.hpp"
#include "hhcl/memory.hpp"
#include "hhcl/sampler.hpp"

namespace hhcl {

struct EpochReport {
  std::uint32_t epoch = 0;
  std::size_t num_clusters = 0;
  std::size_t num_outliers = 0;
  std::size_t iterations = 0;
  double loss = 0.0;
  double loss_cls = 0.0;
  double loss_ins = 0.0;
  double seconds = 0.0;
  bool skipped = false;  // too few clusters for one batch

  /// Everything except wall time.
  bool same_outcome(const EpochReport& o) const {
    return epoch == o.epoch && num_clusters == o.num_clusters && num_outliers == o.num_outliers &&
           iterations == o.iterations && loss == o.loss && loss_cls == o.loss_cls && loss_ins == o.loss_ins &&
           skipped == o.skipped;
  }
};

/// Observable steps of one training iteration, in the order they happen.
enum class TrainEvent {
  kClusterLossRead,
  kInstanceLossRead,
  kOptimizerStep,
  kClusterBankWrite,
  kInstanceBankWrite,
};

struct TrainHooks {
  std::function<void(TrainEvent)> on_event;
  std::function<void(const EpochReport&)> on_epoch;
  /// Called after clustering with the epoch's pseudo labels.
  std::function<void(std::uint32_t, const PseudoLabeling&)> on_labels;
};

struct TrainResult {
  EncoderModel model;
  OptimizerState optimizer;
  std::vector<EpochReport> reports;
};

/// Consecutive epochs with zero clusters tolerated before giving up.
inline constexpr std::size_t kMaxEmptyEpochs = 3;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Encoder with widths [input_dims, hidden_dims..., embedding_dim], seeded from cfg.
inline EncoderModel make_encoder(const TrainConfig& cfg, std::size_t input_dims) {
  std::vector<std::size_t> widths{input_dims};
  for (auto h : cfg.hidden_dims) widths.push_back(h);
  widths.push_back(cfg.embedding_dim);
  return EncoderModel::random(std::move(widths), mix_seed(cfg.seed, 0x656e63));
}

inline OptimizerState make_optimizer(const TrainConfig& cfg, const EncoderModel& model) {
  return OptimizerState(model.params().size(), cfg.lr, cfg.weight_decay, cfg.lr_decay_factor, cfg.lr_decay_every);
}

/// Embeddings of every sample, in sample order.
inline EmbeddingMatrix embed_all(const EncoderModel& model, const UnlabeledSamples& samples, std::size_t chunk = 256) {
  return embed(model, samples.features(), chunk);
}

inline ClusteringParams clustering_params(const TrainConfig& cfg) {
  return {cfg.dbscan_eps, cfg.dbscan_min_pts, cfg.kreciprocal_k, cfg.original_distance_weight};
}

/// One epoch per iteration of the outer loop: embed everything, cluster,
/// rebuild both memory banks, then for each identity-balanced batch compute
/// the hybrid loss against the iteration-start banks, backpropagate, take an
/// Adam step, and finally write the batch embeddings into both banks.
inline TrainResult train(const UnlabeledSamples& samples, const TrainConfig& cfg, EncoderModel model,
                         const TrainHooks& hooks = {}) {
  validate_config(cfg);
  if (samples.size() < 2) throw ParameterError("training needs at least 2 samples");
  if (samples.dims() != model.input_dims()) throw ParameterError("sample dimension does not match encoder input");

  auto emit = [&](TrainEvent e) {
    if (hooks.on_event) hooks.on_event(e);
  };

  TrainResult result;
  OptimizerState opt = make_optimizer(cfg, model);
  const LossWeights weights{cfg.mu, cfg.tau_c, cfg.tau_ins};
  std::size_t empty_streak = 0;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    opt.epoch = epoch;
    EpochReport report;
    report.epoch = epoch;

    const EmbeddingMatrix all = embed_all(model, samples);
    const PseudoLabeling labels = cluster_embeddings(all, clustering_params(cfg));
    if (hooks.on_labels) hooks.on_labels(epoch, labels);
    report.num_clusters = labels.num_clusters();
    report.num_outliers = labels.num_outliers();

    if (labels.num_clusters() == 0) {
      if (++empty_streak >= kMaxEmptyEpochs)
        throw ClusteringCollapseError("clustering produced no clusters for " + std::to_string(empty_streak) +
                                      " consecutive epochs (epoch " + std::to_string(epoch) + ", " +
                                      std::to_string(labels.num_outliers()) + " outliers, eps " +
                                      std::to_string(cfg.dbscan_eps) + ")");
    } else {
      empty_streak = 0;
    }

    if (labels.num_clusters() < cfg.num_identities_per_batch) {
      warn("epoch " + std::to_string(epoch) + ": " + std::to_string(labels.num_clusters()) +
           " clusters, fewer than the " + std::to_string(cfg.num_identities_per_batch) +
           " identities per batch; skipping");
      report.skipped = true;
    } else {
      ClusterBank cls_bank = ClusterBank::init(all, labels, cfg.alpha);
      InstanceBank ins_bank = InstanceBank::init(all, labels, cfg.slots_per_cluster, mix_seed(cfg.seed, epoch, 1));
      const auto batches = build_epoch_batches(labels, cfg.num_identities_per_batch, cfg.instances_per_identity,
                                               mix_seed(cfg.seed, epoch, 2));
      for (const auto& batch : batches) {
        Matrix inputs(batch.indices.size(), samples.dims());
        for (std::size_t r = 0; r < batch.indices.size(); ++r) {
          auto src = samples.features().row(batch.indices[r]);
          std::copy(src.begin(), src.end(), inputs.row(r).begin());
        }
        const ForwardResult fwd = forward(model, inputs);
        const BatchLoss loss = batch_loss(fwd.embeddings, batch.cluster_ids, cls_bank, ins_bank, weights);
        if (!std::isfinite(loss.value)) throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
        if (loss.read_cluster_bank) emit(TrainEvent::kClusterLossRead);
        if (loss.read_instance_bank) emit(TrainEvent::kInstanceLossRead);

        const auto grads = backward(model, fwd.cache, loss.grad);
        adam_step(model, grads, opt);
        emit(TrainEvent::kOptimizerStep);

        cls_bank.update(fwd.embeddings, batch.cluster_ids);
        emit(TrainEvent::kClusterBankWrite);
        ins_bank.update(fwd.embeddings, batch.cluster_ids);
        emit(TrainEvent::kInstanceBankWrite);

        report.loss += loss.value;
        report.loss_cls += loss.cluster;
        report.loss_ins += loss.instance;
        ++report.iterations;
      }
      if (report.iterations > 0) {
        const double inv = 1.0 / static_cast<double>(report.iterations);
        report.loss *= inv;
        report.loss_cls *= inv;
        report.loss_ins *= inv;
      }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (hooks.on_epoch) hooks.on_epoch(report);
    result.reports.push_back(report);
  }
  opt.epoch = cfg.epochs;
  result.model = std::move(model);
  result.optimizer = std::move(opt);
  return result;
}

}  // namespace hhcl
