#pragma once

#include <vector>

#include "hhcl/core.hpp"
#include "hhcl/memory.hpp"

namespace hhcl {

struct LossOutput {
  double value = 0.0;
  std::vector<double> grad_query;  // d value / d query
};

/// -log softmax(keys . query / tau)[positive], with its gradient w.r.t. query.
inline LossOutput softmax_contrastive(std::span<const double> query, const Matrix& keys, std::size_t positive,
                                      double tau) {
  const std::size_t m = keys.rows();
  if (m == 0) throw ParameterError("contrastive loss needs at least one key");
  if (positive >= m) throw ParameterError("positive index out of range");
  if (!(tau > 0.0)) throw ParameterError("temperature must be positive");
  if (keys.cols() != query.size()) throw ParameterError("query and key dimensions differ");

  std::vector<double> logits(m);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    logits[i] = dot(query, keys.row(i)) / tau;
    if (!std::isfinite(logits[i])) throw NumericError("non-finite logit in contrastive loss");
    top = std::max(top, logits[i]);
  }
  std::vector<double> weight(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    logits[i] -= top;
    weight[i] = std::exp(logits[i]);
    sum += weight[i];
  }
  LossOutput out;
  out.value = std::log(sum) - logits[positive];
  out.grad_query.assign(query.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = (weight[i] / sum - (i == positive ? 1.0 : 0.0)) / tau;
    if (w == 0.0) continue;
    auto k = keys.row(i);
    for (std::size_t d = 0; d < k.size(); ++d) out.grad_query[d] += w * k[d];
  }
  return out;
}

/// Contrast against every centroid; the query's own centroid is the positive.
inline LossOutput cluster_loss(std::span<const double> query, const ClusterBank& bank, std::size_t own_cluster,
                               double tau_c) {
  return softmax_contrastive(query, bank.centroids(), own_cluster, tau_c);
}

/// The C hard keys for `query`: the least similar instance of its own cluster
/// at position `own_cluster`, the most similar instance of every other cluster
/// elsewhere.
inline Matrix hard_keys(std::span<const double> query, const InstanceBank& bank, std::size_t own_cluster) {
  Matrix keys(bank.num_clusters(), bank.dims());
  for (std::size_t c = 0; c < bank.num_clusters(); ++c) {
    const HardSample h = c == own_cluster ? bank.hardest_positive(query, c) : bank.hardest_negative(query, c);
    std::copy(h.feature.begin(), h.feature.end(), keys.row(c).begin());
  }
  return keys;
}

/// Hard positive vs. one hard negative per other cluster. Selection is
/// treated as constant when differentiating.
inline LossOutput hard_instance_loss(std::span<const double> query, const InstanceBank& bank, std::size_t own_cluster,
                                     double tau_ins) {
  if (own_cluster >= bank.num_clusters()) throw ParameterError("own cluster out of range");
  return softmax_contrastive(query, hard_keys(query, bank, own_cluster), own_cluster, tau_ins);
}

/// mu * cls + (1 - mu) * ins, for value and gradient alike.
inline LossOutput hybrid_loss(const LossOutput& cls, const LossOutput& ins, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in [0, 1]");
  if (mu == 1.0) return cls;
  if (mu == 0.0) return ins;
  LossOutput out;
  out.value = mu * cls.value + (1.0 - mu) * ins.value;
  out.grad_query.resize(cls.grad_query.size());
  for (std::size_t d = 0; d < out.grad_query.size(); ++d)
    out.grad_query[d] = mu * cls.grad_query[d] + (1.0 - mu) * ins.grad_query[d];
  return out;
}

// ---------------------------------------------------------------------------
// Mini-batch objective
// ---------------------------------------------------------------------------

struct LossWeights {
  double mu = 0.5;
  double tau_c = 0.05;
  double tau_ins = 0.05;
};

struct BatchLoss {
  double value = 0.0;     // mean hybrid loss
  double cluster = 0.0;   // mean cluster loss (0 when mu == 0)
  double instance = 0.0;  // mean instance loss (0 when mu == 1)
  Matrix grad;            // d value / d embedding, one row per query
  bool read_cluster_bank = false;
  bool read_instance_bank = false;
};

/// Mean hybrid loss over the batch. A branch with zero weight is skipped
/// entirely and its bank is not read.
inline BatchLoss batch_loss(const EmbeddingMatrix& emb, std::span<const std::int32_t> labels, const ClusterBank& cls_bank,
                            const InstanceBank& ins_bank, const LossWeights& w) {
  const std::size_t b = emb.rows();
  if (labels.size() != b) throw ParameterError("batch labels and embeddings differ in length");
  if (b == 0) throw ParameterError("empty batch");
  const bool use_cls = w.mu > 0.0;
  const bool use_ins = w.mu < 1.0;

  std::vector<LossOutput> per_cls(b), per_ins(b);
  parallel_for(b, [&](std::size_t i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (use_cls) per_cls[i] = cluster_loss(emb.row(i), cls_bank, own, w.tau_c);
    if (use_ins) per_ins[i] = hard_instance_loss(emb.row(i), ins_bank, own, w.tau_ins);
  });

  BatchLoss out;
  out.grad = Matrix(b, emb.dims());
  out.read_cluster_bank = use_cls;
  out.read_instance_bank = use_ins;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    LossOutput h;
    if (use_cls && use_ins) {
      h = hybrid_loss(per_cls[i], per_ins[i], w.mu);
    } else {
      h = use_cls ? per_cls[i] : per_ins[i];
    }
    out.value += h.value * inv_b;
    if (use_cls) out.cluster += per_cls[i].value * inv_b;
    if (use_ins) out.instance += per_ins[i].value * inv_b;
    auto g = out.grad.row(i);
    for (std::size_t d = 0; d < g.size(); ++d) g[d] = h.grad_query[d] * inv_b;
  }
  return out;
}

}  // namespace hhcl
