#include "cosseg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "cosseg/errors.hpp"

namespace cosseg {
namespace {

// Cosine similarity together with its partial derivatives in both arguments.
struct CosineTerm {
  double value;
  RowVector d_a;
  RowVector d_b;
};

CosineTerm cosine_term(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero vector");
  const double s = a.dot(b) / (na * nb);
  return {s, b / (na * nb) - s * a / (na * na), a / (na * nb) - s * b / (nb * nb)};
}

void check_shapes(const Matrix& embeddings, const Matrix& logits, const SceneLabels& labels) {
  const auto n = static_cast<Index>(labels.size());
  if (labels.semantic.size() != labels.instance.size()) throw ShapeError("label vectors differ in length");
  if (embeddings.rows() != n || logits.rows() != n)
    throw ShapeError("embeddings, logits and labels must have one row per point");
  if (logits.cols() < 1) throw ShapeError("logits need at least one category column");
}

// Class weights, falling back to all ones.
std::vector<double> effective_weights(const LossConfig& cfg, Index n_categories) {
  if (cfg.class_weights.empty()) return std::vector<double>(static_cast<std::size_t>(n_categories), 1.0);
  if (static_cast<Index>(cfg.class_weights.size()) != n_categories)
    throw ShapeError("class_weights length must equal the number of logit columns");
  return cfg.class_weights;
}

}  // namespace

void LossConfig::validate_cosine() const {
  if (!(delta_v > 0.0 && delta_v <= 1.0)) throw InvalidArgument("delta_v must lie in (0, 1]");
  if (!(delta_d >= -1.0 && delta_d < 1.0)) throw InvalidArgument("delta_d must lie in [-1, 1)");
  if (!(delta_d < delta_v)) throw InvalidArgument("cosine loss requires delta_d < delta_v");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("alpha and beta must be >= 0");
  for (double w : class_weights) {
    if (!(w > 0.0)) throw InvalidArgument("class weights must be positive");
  }
}

void LossConfig::validate_euclidean() const {
  if (!(delta_v > 0.0) || !(delta_d > 0.0)) throw InvalidArgument("Euclidean margins must be positive");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
    throw InvalidArgument("alpha, beta and gamma must be >= 0");
  for (double w : class_weights) {
    if (!(w > 0.0)) throw InvalidArgument("class weights must be positive");
  }
}

double cosine_similarity(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) {
  if (a.size() != b.size()) throw ShapeError("cosine similarity of vectors of different length");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

ClusterStats cluster_stats(const Matrix& embeddings, const SceneLabels& labels) {
  if (static_cast<Index>(labels.instance.size()) != embeddings.rows())
    throw ShapeError("labels and embeddings differ in length");

  std::map<int, int> index_of;
  for (int id : labels.instance) {
    if (id >= 0) index_of.emplace(id, 0);
  }
  if (index_of.empty()) throw InvalidArgument("no labeled (non-noise) points");
  int next = 0;
  for (auto& [id, idx] : index_of) idx = next++;

  ClusterStats stats;
  stats.n_clusters = next;
  stats.centroids = Matrix::Zero(next, embeddings.cols());
  stats.sizes.assign(static_cast<std::size_t>(next), 0);
  stats.assignment.assign(labels.instance.size(), kNoise);
  for (std::size_t i = 0; i < labels.instance.size(); ++i) {
    if (labels.instance[i] < 0) continue;
    const int c = index_of.at(labels.instance[i]);
    stats.assignment[i] = c;
    stats.centroids.row(c) += embeddings.row(static_cast<Index>(i));
    ++stats.sizes[static_cast<std::size_t>(c)];
  }
  for (Index c = 0; c < next; ++c) stats.centroids.row(c) /= static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]);
  return stats;
}

CrossEntropy weighted_cross_entropy(const Matrix& logits, std::span<const int> semantic,
                                    std::span<const double> class_weights) {
  const Index n = logits.rows();
  const Index k = logits.cols();
  if (static_cast<Index>(semantic.size()) != n) throw ShapeError("one semantic label per logit row required");
  if (static_cast<Index>(class_weights.size()) != k) throw ShapeError("one class weight per category required");
  for (double w : class_weights) {
    if (!(w > 0.0)) throw InvalidArgument("class weights must be positive");
  }

  CrossEntropy ce;
  ce.grad_logits = Matrix::Zero(n, k);
  if (n == 0) return ce;
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int y = semantic[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) throw InvalidArgument("semantic label " + std::to_string(y) + " out of range");
    const double w = class_weights[static_cast<std::size_t>(y)];
    const double top = logits.row(i).maxCoeff();
    const RowVector shifted = logits.row(i).array() - top;
    const RowVector e = shifted.array().exp();
    const double z = e.sum();
    sum += w * (std::log(z) - shifted(y));
    ce.grad_logits.row(i) = (w * inv_n / z) * e;
    ce.grad_logits(i, y) -= w * inv_n;
  }
  ce.value = sum * inv_n;
  return ce;
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> counts) {
  std::vector<double> w(counts.size(), 1.0);
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    w[k] = 1.0 / static_cast<double>(counts[k]);
    total += w[k];
    ++present;
  }
  if (present == 0) return w;
  const double scale = static_cast<double>(present) / total;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] != 0) w[k] *= scale;
  }
  return w;
}

LossReport cosine_loss(const Matrix& embeddings, const Matrix& logits, const SceneLabels& labels,
                       const LossConfig& cfg) {
  cfg.validate_cosine();
  check_shapes(embeddings, logits, labels);
  check_embeddings(embeddings);

  const ClusterStats stats = cluster_stats(embeddings, labels);
  const Index n_clusters = stats.n_clusters;
  const auto c_real = static_cast<double>(n_clusters);
  const Index dim = embeddings.cols();
  for (Index c = 0; c < n_clusters; ++c) {
    if (stats.centroids.row(c).squaredNorm() == 0.0)
      throw DomainError("centroid of cluster " + std::to_string(c) + " is the zero vector");
  }

  LossReport report;
  report.grad_embeddings = Matrix::Zero(embeddings.rows(), dim);
  Matrix grad_centroids = Matrix::Zero(n_clusters, dim);

  std::vector<double> hinge_sum(static_cast<std::size_t>(n_clusters), 0.0);
  for (std::size_t i = 0; i < stats.assignment.size(); ++i) {
    const int c = stats.assignment[i];
    if (c < 0) continue;
    const auto row = static_cast<Index>(i);
    const CosineTerm term = cosine_term(stats.centroids.row(c), embeddings.row(row));
    const double margin = cfg.delta_v - term.value;
    if (margin <= 0.0) continue;
    hinge_sum[static_cast<std::size_t>(c)] += margin;
    const double w = -cfg.alpha / (c_real * static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]));
    report.grad_embeddings.row(row) += w * term.d_b;
    grad_centroids.row(c) += w * term.d_a;
  }
  for (Index c = 0; c < n_clusters; ++c) {
    report.l_var += hinge_sum[static_cast<std::size_t>(c)] / static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]);
  }
  report.l_var /= c_real;

  if (n_clusters >= 2) {
    const double norm = 1.0 / (c_real * (c_real - 1.0));
    double sum = 0.0;
    for (Index a = 0; a < n_clusters; ++a) {
      for (Index b = 0; b < n_clusters; ++b) {
        if (a == b) continue;
        const CosineTerm term = cosine_term(stats.centroids.row(a), stats.centroids.row(b));
        const double margin = term.value - cfg.delta_d;
        if (margin <= 0.0) continue;
        sum += margin;
        grad_centroids.row(a) += cfg.beta * norm * term.d_a;
        grad_centroids.row(b) += cfg.beta * norm * term.d_b;
      }
    }
    report.l_dist = sum * norm;
  }

  // d mu_c / d x_i = I / N_c for every member i of c.
  for (std::size_t i = 0; i < stats.assignment.size(); ++i) {
    const int c = stats.assignment[i];
    if (c < 0) continue;
    report.grad_embeddings.row(static_cast<Index>(i)) +=
        grad_centroids.row(c) / static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]);
  }

  const auto weights = effective_weights(cfg, logits.cols());
  CrossEntropy ce = weighted_cross_entropy(logits, labels.semantic, weights);
  report.l_sem = ce.value;
  report.grad_logits = std::move(ce.grad_logits);
  report.total = report.l_sem + cfg.alpha * report.l_var + cfg.beta * report.l_dist;
  return report;
}

LossReport euclidean_discriminative_loss(const Matrix& embeddings, const Matrix& logits,
                                         const SceneLabels& labels, const LossConfig& cfg) {
  cfg.validate_euclidean();
  check_shapes(embeddings, logits, labels);
  check_embeddings(embeddings);

  const ClusterStats stats = cluster_stats(embeddings, labels);
  const Index n_clusters = stats.n_clusters;
  const auto c_real = static_cast<double>(n_clusters);
  const Index dim = embeddings.cols();

  LossReport report;
  report.grad_embeddings = Matrix::Zero(embeddings.rows(), dim);
  Matrix grad_centroids = Matrix::Zero(n_clusters, dim);

  std::vector<double> hinge_sum(static_cast<std::size_t>(n_clusters), 0.0);
  for (std::size_t i = 0; i < stats.assignment.size(); ++i) {
    const int c = stats.assignment[i];
    if (c < 0) continue;
    const auto row = static_cast<Index>(i);
    const RowVector diff = embeddings.row(row) - stats.centroids.row(c);
    const double dist = diff.norm();
    const double margin = dist - cfg.delta_v;
    if (margin <= 0.0) continue;
    hinge_sum[static_cast<std::size_t>(c)] += margin * margin;
    const double w = cfg.alpha / (c_real * static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]));
    const RowVector g = (w * 2.0 * margin / dist) * diff;
    report.grad_embeddings.row(row) += g;
    grad_centroids.row(c) -= g;
  }
  for (Index c = 0; c < n_clusters; ++c) {
    report.l_var += hinge_sum[static_cast<std::size_t>(c)] / static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]);
  }
  report.l_var /= c_real;

  if (n_clusters >= 2) {
    const double norm = 1.0 / (c_real * (c_real - 1.0));
    double sum = 0.0;
    for (Index a = 0; a < n_clusters; ++a) {
      for (Index b = 0; b < n_clusters; ++b) {
        if (a == b) continue;
        const RowVector diff = stats.centroids.row(a) - stats.centroids.row(b);
        const double dist = diff.norm();
        const double margin = 2.0 * cfg.delta_d - dist;
        if (margin <= 0.0) continue;
        sum += margin * margin;
        if (dist == 0.0) continue;  // coincident centroids: no defined direction
        const RowVector g = (-cfg.beta * norm * 2.0 * margin / dist) * diff;
        grad_centroids.row(a) += g;
        grad_centroids.row(b) -= g;
      }
    }
    report.l_dist = sum * norm;
  }

  for (Index c = 0; c < n_clusters; ++c) {
    const double len = stats.centroids.row(c).norm();
    report.l_reg += len;
    if (len > 0.0) grad_centroids.row(c) += (cfg.gamma / (c_real * len)) * stats.centroids.row(c);
  }
  report.l_reg /= c_real;

  for (std::size_t i = 0; i < stats.assignment.size(); ++i) {
    const int c = stats.assignment[i];
    if (c < 0) continue;
    report.grad_embeddings.row(static_cast<Index>(i)) +=
        grad_centroids.row(c) / static_cast<double>(stats.sizes[static_cast<std::size_t>(c)]);
  }

  const auto weights = effective_weights(cfg, logits.cols());
  CrossEntropy ce = weighted_cross_entropy(logits, labels.semantic, weights);
  report.l_sem = ce.value;
  report.grad_logits = std::move(ce.grad_logits);
  report.total = report.l_sem + cfg.alpha * report.l_var + cfg.beta * report.l_dist + cfg.gamma * report.l_reg;
  return report;
}

LossFn loss_function(LossKind kind) {
  if (kind == LossKind::cosine) return cosine_loss;
  return euclidean_discriminative_loss;
}

double min_hinge_margin(LossKind kind, const Matrix& embeddings, const SceneLabels& labels,
                        const LossConfig& cfg) {
  const ClusterStats stats = cluster_stats(embeddings, labels);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < stats.assignment.size(); ++i) {
    const int c = stats.assignment[i];
    if (c < 0) continue;
    const auto row = static_cast<Index>(i);
    const double m = kind == LossKind::cosine
                         ? cfg.delta_v - cosine_similarity(stats.centroids.row(c), embeddings.row(row))
                         : (embeddings.row(row) - stats.centroids.row(c)).norm() - cfg.delta_v;
    best = std::min(best, std::abs(m));
  }
  for (Index a = 0; a < stats.n_clusters; ++a) {
    for (Index b = a + 1; b < stats.n_clusters; ++b) {
      const double m = kind == LossKind::cosine
                           ? cosine_similarity(stats.centroids.row(a), stats.centroids.row(b)) - cfg.delta_d
                           : 2.0 * cfg.delta_d - (stats.centroids.row(a) - stats.centroids.row(b)).norm();
      best = std::min(best, std::abs(m));
    }
  }
  return best;
}

double finite_difference_check(const LossFn& loss_fn, const Matrix& embeddings, const Matrix& logits,
                               const SceneLabels& labels, const LossConfig& cfg, double epsilon) {
  const LossReport base = loss_fn(embeddings, logits, labels, cfg);
  double worst = 0.0;
  auto compare = [&](double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };

  Matrix emb = embeddings;
  for (Index i = 0; i < emb.rows(); ++i) {
    for (Index j = 0; j < emb.cols(); ++j) {
      const double saved = emb(i, j);
      emb(i, j) = saved + epsilon;
      const double plus = loss_fn(emb, logits, labels, cfg).total;
      emb(i, j) = saved - epsilon;
      const double minus = loss_fn(emb, logits, labels, cfg).total;
      emb(i, j) = saved;
      compare(base.grad_embeddings(i, j), (plus - minus) / (2.0 * epsilon));
    }
  }
  Matrix lg = logits;
  for (Index i = 0; i < lg.rows(); ++i) {
    for (Index j = 0; j < lg.cols(); ++j) {
      const double saved = lg(i, j);
      lg(i, j) = saved + epsilon;
      const double plus = loss_fn(embeddings, lg, labels, cfg).total;
      lg(i, j) = saved - epsilon;
      const double minus = loss_fn(embeddings, lg, labels, cfg).total;
      lg(i, j) = saved;
      compare(base.grad_logits(i, j), (plus - minus) / (2.0 * epsilon));
    }
  }
  return worst;
}

}  // namespace cosseg
