#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "cosseg/types.hpp"

namespace cosseg {

/// Accounts for working buffers of a loss evaluation. Every allocation made through
/// a TrackedBuffer bound to this ledger adds to the current total; the peak is kept.
class BufferLedger {
 public:
  explicit BufferLedger(std::size_t capacity_bytes = std::numeric_limits<std::size_t>::max())
      : capacity_(capacity_bytes) {}

  void acquire(std::size_t bytes);
  void release(std::size_t bytes) { current_ -= bytes; }

  [[nodiscard]] std::size_t current_bytes() const { return current_; }
  [[nodiscard]] std::size_t peak_bytes() const { return peak_; }
  [[nodiscard]] std::size_t capacity_bytes() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

/// Heap array of doubles whose size is charged to a ledger for its lifetime.
class TrackedBuffer {
 public:
  TrackedBuffer(BufferLedger& ledger, std::size_t count);
  ~TrackedBuffer();
  TrackedBuffer(const TrackedBuffer&) = delete;
  TrackedBuffer& operator=(const TrackedBuffer&) = delete;

  [[nodiscard]] double* data() { return data_.get(); }
  [[nodiscard]] std::size_t size() const { return count_; }

 private:
  BufferLedger& ledger_;
  std::size_t count_;
  std::unique_ptr<double[]> data_;
};

struct LossMeasurement {
  double value = 0.0;
  std::size_t peak_bytes = 0;
};

/// Fills out (N x N, row-major) with S_ij = |f_i - f_j| computed as
/// sqrt(|f_i|^2 - 2 f_i.f_j + |f_j|^2), clamping round-off below zero.
void pairwise_similarity_matrix(const Matrix& features, Matrix& out);

/// Materializes the full similarity matrix (the pairwise-similarity baseline) and returns
/// the sum of its entries. Throws CapacityError when N^2 doubles exceed capacity_bytes
/// or the allocation fails.
LossMeasurement pairwise_similarity_loss(
    const Matrix& features, std::size_t capacity_bytes = std::numeric_limits<std::size_t>::max());

/// Forward pass of l_var + l_dist of the cosine loss using only per-point and per-cluster
/// buffers. instance ids must be compacted (0..C-1, or -1 for noise).
LossMeasurement centroid_similarity_loss(const Matrix& embeddings, std::span<const int> instance,
                                         double delta_v, double delta_d);

enum class BenchMethod { pairwise, centroid };

std::string_view to_string(BenchMethod method);

struct BenchResult {
  std::size_t n_points = 0;
  BenchMethod method = BenchMethod::pairwise;
  double wall_time = 0.0;  // seconds per evaluation, median over repeats
  std::size_t peak_bytes = 0;
  double loss_value = 0.0;
  bool skipped = false;  // pairwise buffer exceeded the capacity cap
};

struct ScalingSweepConfig {
  std::vector<std::size_t> n_points{1024, 2048, 4096, 8192, 16384};
  Index feature_dim = 32;
  Index embedding_dim = 32;
  std::size_t repeats = 5;
  int n_clusters = 8;
  std::size_t capacity_bytes = std::size_t{3} << 30;
  double min_time = 0.05;  // seconds; short evaluations are looped until this is reached
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Times both losses on identical seeded data for each N (median of repeats).
std::vector<BenchResult> run_scaling_sweep(const ScalingSweepConfig& cfg);

/// Columns n_points,method,wall_time_s,peak_bytes,loss. Skipped rows leave wall time and
/// loss empty and report the bytes that were requested.
void write_bench_csv(std::ostream& os, std::span<const BenchResult> results);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cosseg
