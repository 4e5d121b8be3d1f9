#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cosseg/types.hpp"

namespace cosseg {

/// Margins and weights of the embedding losses.
///
/// For the cosine loss delta_v and delta_d are cosine similarities
/// (delta_d < delta_v); for the Euclidean baseline they are distances.
struct LossConfig {
  double delta_v = 0.9;
  double delta_d = 0.4;
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.001;  // baseline regularizer weight
  std::vector<double> class_weights;  // empty means all ones

  void validate_cosine() const;
  void validate_euclidean() const;
};

struct LossReport {
  double l_sem = 0.0;
  double l_var = 0.0;
  double l_dist = 0.0;
  double l_reg = 0.0;
  double total = 0.0;
  Matrix grad_embeddings;  // d total / d embeddings
  Matrix grad_logits;      // d total / d logits
};

/// Per-instance centroids of the raw (unnormalized) embeddings.
struct ClusterStats {
  Index n_clusters = 0;
  Matrix centroids;
  std::vector<std::size_t> sizes;
  std::vector<int> assignment;  // per point: cluster index, or -1 for noise
};

/// x.y / (|x| |y|). Throws DomainError if either vector has zero norm.
double cosine_similarity(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b);

/// Clusters are ordered by ascending instance id. Throws InvalidArgument when no point is labeled.
ClusterStats cluster_stats(const Matrix& embeddings, const SceneLabels& labels);

/// Cosine-margin loss on the unit hypersphere with linear hinges:
///   l_var  = 1/C sum_c 1/N_c sum_{i in c} [delta_v - s(mu_c, x_i)]_+
///   l_dist = 1/(C(C-1)) sum_{a != b} [s(mu_a, mu_b) - delta_d]_+
///   total  = l_sem + alpha l_var + beta l_dist
/// Gradients include the dependence of each centroid on its members.
LossReport cosine_loss(const Matrix& embeddings, const Matrix& logits, const SceneLabels& labels,
                       const LossConfig& cfg);

/// Euclidean discriminative loss with squared hinges and a centroid-norm regularizer.
LossReport euclidean_discriminative_loss(const Matrix& embeddings, const Matrix& logits,
                                         const SceneLabels& labels, const LossConfig& cfg);

struct CrossEntropy {
  double value = 0.0;
  Matrix grad_logits;
};

/// Mean over points of w_{y_i} * -log softmax(logits_i)[y_i].
CrossEntropy weighted_cross_entropy(const Matrix& logits, std::span<const int> semantic,
                                    std::span<const double> class_weights);

/// Inverse point-frequency class weights, normalized to mean 1 over the categories that occur.
/// Categories with no points get weight 1.
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> counts);

enum class LossKind { cosine, euclidean };

using LossFn = std::function<LossReport(const Matrix&, const Matrix&, const SceneLabels&, const LossConfig&)>;

LossFn loss_function(LossKind kind);

/// Smallest |argument| over every hinge of the chosen loss (distance to the nearest kink).
double min_hinge_margin(LossKind kind, const Matrix& embeddings, const SceneLabels& labels,
                        const LossConfig& cfg);

/// Central differences of the total loss on every coordinate of embeddings and logits.
/// Returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
double finite_difference_check(const LossFn& loss_fn, const Matrix& embeddings, const Matrix& logits,
                               const SceneLabels& labels, const LossConfig& cfg, double epsilon);

}  // namespace cosseg
