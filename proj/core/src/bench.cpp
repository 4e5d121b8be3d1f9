#include "cosseg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <new>
#include <ostream>
#include <random>
#include <string>

#include "cosseg/errors.hpp"
#include "cosseg/scene_io.hpp"

namespace cosseg {
namespace {

constexpr std::size_t kMaxCount = std::numeric_limits<std::size_t>::max() / sizeof(double);

template <typename Fn>
double seconds_per_call(Fn&& fn, double min_time, double& value) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  value = fn();
  double elapsed = std::chrono::duration<double>(clock::now() - start).count();
  if (elapsed >= min_time) return elapsed;

  const auto loops = static_cast<std::size_t>(std::ceil(min_time / std::max(elapsed, 1e-9)));
  start = clock::now();
  for (std::size_t i = 0; i < loops; ++i) value = fn();
  elapsed = std::chrono::duration<double>(clock::now() - start).count();
  return elapsed / static_cast<double>(loops);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

void BufferLedger::acquire(std::size_t bytes) {
  if (bytes > capacity_ - current_) {
    throw CapacityError("working buffers would need " + std::to_string(current_ + bytes) + " bytes, cap is " +
                        std::to_string(capacity_));
  }
  current_ += bytes;
  peak_ = std::max(peak_, current_);
}

TrackedBuffer::TrackedBuffer(BufferLedger& ledger, std::size_t count) : ledger_(ledger), count_(count) {
  if (count > kMaxCount) throw CapacityError("buffer size overflows size_t");
  ledger_.acquire(count * sizeof(double));
  data_.reset(new (std::nothrow) double[count]);
  if (!data_) {
    ledger_.release(count * sizeof(double));
    throw CapacityError("allocation of " + std::to_string(count * sizeof(double)) + " bytes failed");
  }
}

TrackedBuffer::~TrackedBuffer() { ledger_.release(count_ * sizeof(double)); }

void pairwise_similarity_matrix(const Matrix& features, Matrix& out) {
  const Index n = features.rows();
  const Vector norms = features.rowwise().squaredNorm();
  out.resize(n, n);
  out.noalias() = features * features.transpose();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = std::sqrt(std::max(0.0, norms(i) - 2.0 * out(i, j) + norms(j)));
    out(i, i) = 0.0;  // the expansion leaves sqrt(round-off) here
  }
}

LossMeasurement pairwise_similarity_loss(const Matrix& features, std::size_t capacity_bytes) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n < 2) throw InvalidArgument("pairwise similarity needs at least two points");
  if (n > kMaxCount / n) throw CapacityError("similarity matrix size overflows size_t");

  BufferLedger ledger(capacity_bytes);
  TrackedBuffer norms_buf(ledger, n);
  TrackedBuffer sim_buf(ledger, n * n);
  const auto rows = static_cast<Index>(n);
  Eigen::Map<Vector> norms(norms_buf.data(), rows);
  Eigen::Map<Matrix> sim(sim_buf.data(), rows, rows);

  norms = features.rowwise().squaredNorm();
  sim.noalias() = features * features.transpose();
  double total = 0.0;
  for (Index i = 0; i < rows; ++i) {
    const double ni = norms(i);
    double row_sum = 0.0;
    for (Index j = 0; j < rows; ++j) {
      const double s = i == j ? 0.0 : std::sqrt(std::max(0.0, ni - 2.0 * sim(i, j) + norms(j)));
      sim(i, j) = s;
      row_sum += s;
    }
    total += row_sum;
  }
  return {total, ledger.peak_bytes()};
}

LossMeasurement centroid_similarity_loss(const Matrix& embeddings, std::span<const int> instance, double delta_v,
                                         double delta_d) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  const Index dim = embeddings.cols();
  if (instance.size() != n) throw ShapeError("one instance id per embedding row required");
  int most = -1;
  for (int v : instance) most = std::max(most, v);
  if (most < 0) throw InvalidArgument("no labeled points");
  const auto n_clusters = static_cast<std::size_t>(most + 1);

  BufferLedger ledger;
  TrackedBuffer centroid_buf(ledger, n_clusters * static_cast<std::size_t>(dim));
  TrackedBuffer count_buf(ledger, n_clusters);
  TrackedBuffer hinge_buf(ledger, n_clusters);
  TrackedBuffer centroid_norm_buf(ledger, n_clusters);
  TrackedBuffer point_norm_buf(ledger, n);
  TrackedBuffer sim_buf(ledger, n);

  const auto c_rows = static_cast<Index>(n_clusters);
  Eigen::Map<Matrix> centroids(centroid_buf.data(), c_rows, dim);
  Eigen::Map<Vector> counts(count_buf.data(), c_rows);
  Eigen::Map<Vector> hinge(hinge_buf.data(), c_rows);
  Eigen::Map<Vector> centroid_norms(centroid_norm_buf.data(), c_rows);
  Eigen::Map<Vector> point_norms(point_norm_buf.data(), static_cast<Index>(n));
  Eigen::Map<Vector> sims(sim_buf.data(), static_cast<Index>(n));

  centroids.setZero();
  counts.setZero();
  hinge.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    if (instance[i] < 0) continue;
    centroids.row(instance[i]) += embeddings.row(static_cast<Index>(i));
    counts(instance[i]) += 1.0;
  }
  for (Index c = 0; c < c_rows; ++c) {
    if (counts(c) > 0.0) centroids.row(c) /= counts(c);
    centroid_norms(c) = centroids.row(c).norm();
  }
  // Norms and similarities in one pass: the embeddings are read twice in total.
  for (std::size_t i = 0; i < n; ++i) {
    const int c = instance[i];
    const auto row = static_cast<Index>(i);
    point_norms(row) = embeddings.row(row).norm();
    if (c < 0) continue;
    sims(row) = centroids.row(c).dot(embeddings.row(row)) / (centroid_norms(c) * point_norms(row));
    hinge(c) += std::max(0.0, delta_v - sims(row));
  }

  Index present = 0;
  double l_var = 0.0;
  for (Index c = 0; c < c_rows; ++c) {
    if (counts(c) == 0.0) continue;
    ++present;
    l_var += hinge(c) / counts(c);
  }
  l_var /= static_cast<double>(present);

  double l_dist = 0.0;
  if (present >= 2) {
    for (Index a = 0; a < c_rows; ++a) {
      for (Index b = 0; b < c_rows; ++b) {
        if (a == b || counts(a) == 0.0 || counts(b) == 0.0) continue;
        const double s = centroids.row(a).dot(centroids.row(b)) / (centroid_norms(a) * centroid_norms(b));
        l_dist += std::max(0.0, s - delta_d);
      }
    }
    l_dist /= static_cast<double>(present * (present - 1));
  }
  return {l_var + l_dist, ledger.peak_bytes()};
}

std::string_view to_string(BenchMethod method) {
  return method == BenchMethod::pairwise ? "pairwise" : "centroid";
}

void ScalingSweepConfig::validate() const {
  if (n_points.empty()) throw InvalidArgument("scaling sweep needs at least one point count");
  if (!std::is_sorted(n_points.begin(), n_points.end())) throw InvalidArgument("point counts must be sorted ascending");
  if (n_points.front() < 2) throw InvalidArgument("point counts must be at least 2");
  if (feature_dim < 1 || embedding_dim < 2) throw InvalidArgument("feature_dim >= 1 and embedding_dim >= 2 required");
  if (repeats < 1) throw InvalidArgument("repeats must be at least 1");
  if (n_clusters < 1) throw InvalidArgument("n_clusters must be at least 1");
  if (!(min_time >= 0.0)) throw InvalidArgument("min_time must be >= 0");
}

std::vector<BenchResult> run_scaling_sweep(const ScalingSweepConfig& cfg) {
  cfg.validate();
  std::vector<BenchResult> results;
  for (std::size_t n : cfg.n_points) {
    std::mt19937_64 rng(cfg.rng_seed + n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index rows = static_cast<Index>(n);
    const Index cols = std::max(cfg.feature_dim, cfg.embedding_dim);
    Matrix data(rows, cols);
    for (Index i = 0; i < data.size(); ++i) data.data()[i] = gauss(rng);
    const Matrix features = data.leftCols(cfg.feature_dim);
    const Matrix embeddings = data.leftCols(cfg.embedding_dim);
    std::vector<int> instance(n);
    for (std::size_t i = 0; i < n; ++i) instance[i] = static_cast<int>(i % static_cast<std::size_t>(cfg.n_clusters));

    BenchResult pair{n, BenchMethod::pairwise, 0.0, 0, 0.0, false};
    const std::size_t required = (n * n + n) * sizeof(double);
    if (n > kMaxCount / (n + 1) || required > cfg.capacity_bytes) {
      pair.skipped = true;
      pair.peak_bytes = n > kMaxCount / (n + 1) ? std::numeric_limits<std::size_t>::max() : required;
    } else {
      try {
        std::vector<double> times;
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
          times.push_back(seconds_per_call(
              [&] {
                const auto m = pairwise_similarity_loss(features, cfg.capacity_bytes);
                pair.peak_bytes = m.peak_bytes;
                return m.value;
              },
              cfg.min_time, pair.loss_value));
        }
        pair.wall_time = median(std::move(times));
      } catch (const CapacityError&) {
        pair.skipped = true;
        pair.peak_bytes = required;
      }
    }
    results.push_back(pair);

    BenchResult cent{n, BenchMethod::centroid, 0.0, 0, 0.0, false};
    std::vector<double> times;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      times.push_back(seconds_per_call(
          [&] {
            const auto m = centroid_similarity_loss(embeddings, instance, 0.9, 0.4);
            cent.peak_bytes = m.peak_bytes;
            return m.value;
          },
          cfg.min_time, cent.loss_value));
    }
    cent.wall_time = median(std::move(times));
    results.push_back(cent);
  }
  return results;
}

void write_bench_csv(std::ostream& os, std::span<const BenchResult> results) {
  os << "n_points,method,wall_time_s,peak_bytes,loss\n";
  for (const auto& r : results) {
    os << r.n_points << ',' << to_string(r.method) << ',';
    if (!r.skipped) os << format_real(r.wall_time);
    os << ',' << r.peak_bytes << ',';
    if (!r.skipped) os << format_real(r.loss_value);
    os << '\n';
  }
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs at least two paired samples");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log slope needs positive samples");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("log-log slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace cosseg
