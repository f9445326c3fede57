#pragma once

#include <optional>
#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

using Ranking = std::vector<std::uint32_t>;

/// Gallery indices sorted by ascending Euclidean distance to each query;
/// equal distances keep the lower gallery index first.
inline std::vector<Ranking> rank_gallery(const Matrix& query, const Matrix& gallery) {
  if (gallery.rows() == 0) throw ParameterError("empty gallery");
  if (query.cols() != gallery.cols())
    throw ParameterError("query has " + std::to_string(query.cols()) + " dims, gallery has " +
                         std::to_string(gallery.cols()));
  std::vector<Ranking> out(query.rows());
  parallel_for(query.rows(), [&](std::size_t q) {
    auto qr = query.row(q);
    std::vector<double> dist(gallery.rows());
    for (std::size_t g = 0; g < gallery.rows(); ++g) {
      auto gr = gallery.row(g);
      double s = 0.0;
      for (std::size_t d = 0; d < qr.size(); ++d) {
        const double diff = qr[d] - gr[d];
        s += diff * diff;
      }
      dist[g] = std::sqrt(s);
    }
    Ranking r(gallery.rows());
    for (std::size_t g = 0; g < r.size(); ++g) r[g] = static_cast<std::uint32_t>(g);
    std::stable_sort(r.begin(), r.end(), [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b]; });
    out[q] = std::move(r);
  });
  return out;
}

/// One query's ranking after junk removal: `relevant[i]` tells whether the
/// i-th surviving gallery entry shares the query identity.
inline std::vector<char> relevance_after_junk(const Ranking& ranking, const SampleMeta& q,
                                              std::span<const SampleMeta> gallery, bool junk_filter) {
  std::vector<char> rel;
  rel.reserve(ranking.size());
  for (auto g : ranking) {
    const auto& gm = gallery[g];
    const bool same_id = gm.identity == q.identity;
    if (junk_filter && same_id && gm.camera == q.camera) continue;
    rel.push_back(same_id ? 1 : 0);
  }
  return rel;
}

/// Mean over relevant positions r of precision@r; nullopt when nothing is relevant.
inline std::optional<double> average_precision(std::span<const char> relevant) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < relevant.size(); ++i) {
    if (!relevant[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

struct QueryResult {
  std::optional<double> ap;                  // nullopt: no relevant gallery entry, query skipped
  std::optional<std::size_t> first_match;   // 1-based rank after junk removal
};

struct RetrievalResult {
  std::vector<Ranking> rankings;
  std::vector<QueryResult> queries;
  double mAP = 0.0;
  std::vector<double> cmc;  // cmc[k-1] = Rank-k accuracy, k = 1..gallery size
  std::size_t evaluated = 0;

  double rank(std::size_t k) const {
    if (cmc.empty()) return 0.0;
    return cmc[std::min(k, cmc.size()) - 1];
  }
};

inline std::vector<QueryResult> score_queries(const std::vector<Ranking>& rankings, std::span<const SampleMeta> query_meta,
                                              std::span<const SampleMeta> gallery_meta, bool junk_filter = true) {
  if (rankings.size() != query_meta.size()) throw ParameterError("rankings and query metadata differ in length");
  std::vector<QueryResult> out(rankings.size());
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const auto rel = relevance_after_junk(rankings[q], query_meta[q], gallery_meta, junk_filter);
    out[q].ap = average_precision(rel);
    const auto it = std::find(rel.begin(), rel.end(), 1);
    if (it != rel.end()) out[q].first_match = static_cast<std::size_t>(it - rel.begin()) + 1;
  }
  return out;
}

/// Mean AP over queries with at least one relevant gallery entry.
inline double mean_average_precision(const std::vector<Ranking>& rankings, std::span<const SampleMeta> query_meta,
                                     std::span<const SampleMeta> gallery_meta, bool junk_filter = true) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : score_queries(rankings, query_meta, gallery_meta, junk_filter)) {
    if (!r.ap) continue;
    sum += *r.ap;
    ++n;
  }
  if (n == 0) throw EvaluationError("no query has a relevant gallery entry");
  return sum / static_cast<double>(n);
}

/// Rank-k accuracy for each k in `ks`, over queries with a relevant entry.
inline std::vector<double> cmc_curve(const std::vector<Ranking>& rankings, std::span<const SampleMeta> query_meta,
                                     std::span<const SampleMeta> gallery_meta, std::span<const std::size_t> ks,
                                     bool junk_filter = true) {
  const auto scored = score_queries(rankings, query_meta, gallery_meta, junk_filter);
  std::vector<double> out(ks.size(), 0.0);
  std::size_t n = 0;
  for (const auto& r : scored) {
    if (!r.first_match) continue;
    ++n;
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (*r.first_match <= ks[i]) out[i] += 1.0;
  }
  if (n == 0) return out;
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

/// Ranking plus every metric in one pass.
inline RetrievalResult evaluate_retrieval(const Matrix& query, const Matrix& gallery, std::span<const SampleMeta> query_meta,
                                          std::span<const SampleMeta> gallery_meta, bool junk_filter = true) {
  if (query.rows() != query_meta.size() || gallery.rows() != gallery_meta.size())
    throw ParameterError("features and metadata differ in length");
  RetrievalResult res;
  res.rankings = rank_gallery(query, gallery);
  res.queries = score_queries(res.rankings, query_meta, gallery_meta, junk_filter);
  std::vector<std::size_t> hist(gallery.rows() + 1, 0);
  double ap_sum = 0.0;
  for (const auto& q : res.queries) {
    if (!q.ap) continue;
    ++res.evaluated;
    ap_sum += *q.ap;
    ++hist[*q.first_match];
  }
  if (res.evaluated == 0) throw EvaluationError("no query has a relevant gallery entry");
  res.mAP = ap_sum / static_cast<double>(res.evaluated);
  res.cmc.resize(gallery.rows());
  std::size_t cum = 0;
  for (std::size_t k = 1; k <= gallery.rows(); ++k) {
    cum += hist[k];
    res.cmc[k - 1] = static_cast<double>(cum) / static_cast<double>(res.evaluated);
  }
  return res;
}

}  // namespace hhcl
