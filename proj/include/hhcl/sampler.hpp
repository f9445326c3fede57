#pragma once

#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

/// N_id clusters x N_inst samples, laid out cluster-major.
struct Batch {
  std::vector<std::size_t> indices;
  std::vector<std::int32_t> cluster_ids;  // aligned with indices
};

/// Identity-balanced batches for one epoch. Cluster ids are shuffled and taken
/// n_id at a time, so every cluster lands in at most one batch and the
/// floor(C / n_id) * n_id remainder is dropped. Members are drawn without
/// replacement when a cluster is large enough; smaller clusters contribute
/// every member plus draws with replacement.
inline std::vector<Batch> build_epoch_batches(const PseudoLabeling& labels, std::size_t n_id, std::size_t n_inst,
                                              std::uint64_t seed) {
  const std::size_t c = labels.num_clusters();
  if (n_id < 1 || n_inst < 1) throw ParameterError("n_id and n_inst must be positive");
  if (c < n_id)
    throw ParameterError("need at least " + std::to_string(n_id) + " clusters per batch, have " + std::to_string(c));

  Rng rng(seed);
  std::vector<std::size_t> order(c);
  for (std::size_t i = 0; i < c; ++i) order[i] = i;
  shuffle(order, rng);

  const auto members = labels.members();
  std::vector<Batch> batches(c / n_id);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    auto& batch = batches[b];
    batch.indices.reserve(n_id * n_inst);
    batch.cluster_ids.reserve(n_id * n_inst);
    for (std::size_t j = 0; j < n_id; ++j) {
      const std::size_t cid = order[b * n_id + j];
      for (auto idx : draw_members(members[cid], n_inst, rng)) {
        batch.indices.push_back(idx);
        batch.cluster_ids.push_back(static_cast<std::int32_t>(cid));
      }
    }
  }
  return batches;
}

}  // namespace hhcl
