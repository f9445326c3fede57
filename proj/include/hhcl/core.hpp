#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace hhcl {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, unsupported version).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Missing, unreadable, unwritable or truncated files.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Data that violates a type invariant (non-finite values, ragged rows).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// One or more TrainConfig fields out of range. `fields()` names them.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::vector<std::string> fields, const std::string& what)
      : ValidationError(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Caller-supplied argument out of range (k >= n, C < n_id, empty gallery...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// No evaluable query survived junk filtering.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ClusteringCollapseError : public Error {
 public:
  using Error::Error;
};

inline void warn(std::string_view msg) { std::cerr << "[hhcl] warning: " << msg << '\n'; }

// ---------------------------------------------------------------------------
// Dense row-major matrix
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw ValidationError("matrix data size does not match shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Matrix whose rows are unit vectors (within 1e-6). Read-only once built.
class EmbeddingMatrix {
 public:
  static constexpr double kNormTolerance = 1e-6;

  EmbeddingMatrix() = default;

  /// Rows scaled to unit length. Zero rows are rejected.
  static EmbeddingMatrix normalized(Matrix m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto row = m.row(r);
      if (!all_finite(row)) throw ValidationError("embedding row " + std::to_string(r) + " is not finite");
      const double n = norm(row);
      if (n == 0.0) throw NumericError("cannot normalize zero row " + std::to_string(r));
      for (double& x : row) x /= n;
    }
    return EmbeddingMatrix(std::move(m));
  }

  /// Wraps `m` after verifying every row is finite and unit-norm.
  static EmbeddingMatrix checked(Matrix m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto row = m.row(r);
      if (!all_finite(row)) throw ValidationError("embedding row " + std::to_string(r) + " is not finite");
      if (std::abs(norm(row) - 1.0) > kNormTolerance)
        throw ValidationError("embedding row " + std::to_string(r) + " is not unit-norm");
    }
    return EmbeddingMatrix(std::move(m));
  }

  /// For producers that normalize themselves (the encoder). A row that was
  /// exactly zero before its epsilon-guarded normalization stays zero.
  static EmbeddingMatrix trusted(Matrix m) { return EmbeddingMatrix(std::move(m)); }

  std::size_t rows() const noexcept { return m_.rows(); }
  std::size_t dims() const noexcept { return m_.cols(); }
  std::span<const double> row(std::size_t r) const { return m_.row(r); }
  const Matrix& matrix() const noexcept { return m_; }

  /// Selects rows by index (duplicates allowed).
  EmbeddingMatrix gather(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), dims());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = m_.row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return EmbeddingMatrix(std::move(out));
  }

 private:
  explicit EmbeddingMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

struct Sample {
  std::vector<float> feature;
  std::int64_t identity = 0;
  std::uint32_t camera = 0;

  bool operator==(const Sample&) const = default;
};

/// What the trainer is allowed to see: features and cameras, never identities.
class UnlabeledSamples {
 public:
  UnlabeledSamples() = default;
  UnlabeledSamples(Matrix features, std::vector<std::uint32_t> cameras)
      : features_(std::move(features)), cameras_(std::move(cameras)) {
    if (cameras_.size() != features_.rows()) throw ValidationError("camera count does not match feature rows");
  }

  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t dims() const noexcept { return features_.cols(); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::uint32_t>& cameras() const noexcept { return cameras_; }

 private:
  Matrix features_;
  std::vector<std::uint32_t> cameras_;
};

/// Ground truth used by the evaluator only.
struct SampleMeta {
  std::int64_t identity = 0;
  std::uint32_t camera = 0;
};

inline std::size_t feature_dims(std::span<const Sample> samples) {
  if (samples.empty()) return 0;
  const std::size_t d = samples.front().feature.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].feature.size() != d)
      throw ValidationError("sample " + std::to_string(i) + " has " + std::to_string(samples[i].feature.size()) +
                            " dims, expected " + std::to_string(d));
  }
  return d;
}

inline Matrix feature_matrix(std::span<const Sample> samples) {
  const std::size_t d = feature_dims(samples);
  Matrix m(samples.size(), d);
  for (std::size_t i = 0; i < samples.size(); ++i)
    std::copy(samples[i].feature.begin(), samples[i].feature.end(), m.row(i).begin());
  return m;
}

/// Drops identities. This is the only bridge from labeled data to training.
inline UnlabeledSamples strip_identities(std::span<const Sample> samples) {
  std::vector<std::uint32_t> cams;
  cams.reserve(samples.size());
  for (const auto& s : samples) cams.push_back(s.camera);
  return UnlabeledSamples(feature_matrix(samples), std::move(cams));
}

inline std::vector<SampleMeta> sample_meta(std::span<const Sample> samples) {
  std::vector<SampleMeta> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.identity, s.camera});
  return out;
}

// ---------------------------------------------------------------------------
// Pseudo labels
// ---------------------------------------------------------------------------

class PseudoLabeling {
 public:
  static constexpr std::int32_t kOutlier = -1;

  PseudoLabeling() = default;

  /// Validates that ids are in [0, C) or kOutlier and every id has a member.
  PseudoLabeling(std::vector<std::int32_t> assignment, std::size_t num_clusters)
      : assignment_(std::move(assignment)), num_clusters_(num_clusters) {
    std::vector<char> seen(num_clusters_, 0);
    for (auto a : assignment_) {
      if (a == kOutlier) continue;
      if (a < 0 || static_cast<std::size_t>(a) >= num_clusters_) throw ValidationError("cluster id out of range");
      seen[static_cast<std::size_t>(a)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw ValidationError("empty cluster in labeling");
  }

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t num_clusters() const noexcept { return num_clusters_; }
  std::int32_t operator[](std::size_t i) const { return assignment_[i]; }
  bool is_outlier(std::size_t i) const { return assignment_[i] == kOutlier; }
  const std::vector<std::int32_t>& assignment() const noexcept { return assignment_; }

  std::size_t num_outliers() const {
    return static_cast<std::size_t>(std::count(assignment_.begin(), assignment_.end(), kOutlier));
  }

  /// Sample indices per cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(num_clusters_);
    for (std::size_t i = 0; i < assignment_.size(); ++i)
      if (assignment_[i] != kOutlier) out[static_cast<std::size_t>(assignment_[i])].push_back(i);
    return out;
  }

 private:
  std::vector<std::int32_t> assignment_;
  std::size_t num_clusters_ = 0;
};

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Uniform integer in [0, n). Platform-independent (unlike std distributions).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Box-Muller standard normal.
inline double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

/// `count` draws from `pool`: without replacement when the pool is large
/// enough, otherwise the whole pool (shuffled) topped up by draws with
/// replacement.
inline std::vector<std::size_t> draw_members(std::span<const std::size_t> pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> shuffled(pool.begin(), pool.end());
  shuffle(shuffled, rng);
  if (shuffled.size() >= count) {
    shuffled.resize(count);
    return shuffled;
  }
  while (shuffled.size() < count) shuffled.push_back(pool[uniform_index(rng, pool.size())]);
  return shuffled;
}

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Upper bound on worker threads. 0 restores the default (HHCL_THREADS or
/// hardware concurrency).
inline void set_thread_limit(unsigned n) { detail::thread_cap() = n; }

inline unsigned thread_limit() {
  if (unsigned cap = detail::thread_cap(); cap != 0) return cap;
  if (const char* env = std::getenv("HHCL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) over contiguous blocks. Callers write results
/// into per-index slots, so output never depends on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_limit(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Little-endian binary helpers
// ---------------------------------------------------------------------------

namespace binio {

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError(std::string("truncated file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace binio

// ---------------------------------------------------------------------------
// Feature files
//
//   "HHCL" | u32 version=1 | u64 N | u32 D_in |
//   N x ( D_in x f32 feature | i64 identity | u32 camera )
// ---------------------------------------------------------------------------

inline constexpr char kFeatureMagic[4] = {'H', 'H', 'C', 'L'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 4 + 8 + 4;

inline std::size_t feature_record_bytes(std::size_t dims) { return dims * 4 + 8 + 4; }

inline void save_features(std::span<const Sample> samples, const std::string& path) {
  const std::size_t d = feature_dims(samples);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kFeatureMagic, 4);
  binio::put<std::uint32_t>(os, kFeatureVersion);
  binio::put<std::uint64_t>(os, samples.size());
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (const auto& s : samples) {
    for (float x : s.feature) binio::put<float>(os, x);
    binio::put<std::int64_t>(os, s.identity);
    binio::put<std::uint32_t>(os, s.camera);
  }
  if (!os.flush()) throw IoError("write failed for " + path);
}

inline std::vector<Sample> load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw IoError("truncated header in " + path);
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) throw FormatError("bad magic in " + path);
  const auto version = binio::get<std::uint32_t>(is, "version");
  if (version != kFeatureVersion) throw FormatError("unsupported feature file version " + std::to_string(version));
  const auto n = binio::get<std::uint64_t>(is, "sample count");
  const auto d = binio::get<std::uint32_t>(is, "dimension");

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 20)));
  for (std::uint64_t i = 0; i < n; ++i) {
    Sample s;
    s.feature.resize(d);
    for (auto& x : s.feature) {
      x = binio::get<float>(is, "feature");
      if (!std::isfinite(x)) throw ValidationError("non-finite feature in record " + std::to_string(i) + " of " + path);
    }
    s.identity = binio::get<std::int64_t>(is, "identity");
    s.camera = binio::get<std::uint32_t>(is, "camera");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hhcl
