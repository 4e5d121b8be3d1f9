#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cosseg/loss.hpp"
#include "cosseg/types.hpp"

namespace cosseg {

/// One fully connected layer mapping [features; rgb] to an embedding, plus a
/// parallel linear classifier on the same input.
struct EmbeddingHead {
  Matrix weight;             // d_e x d_in
  Vector bias;               // d_e
  Matrix classifier_weight;  // n_categories x d_in
  Vector classifier_bias;    // n_categories
  bool normalize_rows = false;

  /// Uniform init in [-1/sqrt(d_in), 1/sqrt(d_in)] for all parameters.
  static EmbeddingHead initialize(Index input_dim, Index embedding_dim, Index n_categories,
                                  bool normalize_rows, std::uint64_t seed);

  [[nodiscard]] Index input_dim() const { return weight.cols(); }
  [[nodiscard]] Index embedding_dim() const { return weight.rows(); }
  [[nodiscard]] Index n_categories() const { return classifier_weight.rows(); }
  [[nodiscard]] Index parameter_count() const;

  void validate() const;

  /// Flat parameter vector: weight, bias, classifier_weight, classifier_bias.
  [[nodiscard]] Vector pack() const;
  void unpack(const Vector& params);
};

/// Head input per point: features followed by colors.
Matrix head_input(const PointCloud& cloud);

struct HeadOutput {
  Matrix embeddings;
  Matrix logits;
};

HeadOutput forward(const EmbeddingHead& head, const PointCloud& cloud);
HeadOutput forward(const EmbeddingHead& head, const Matrix& input);

/// Loss on one scene and its gradient with respect to the flat head parameters.
struct HeadLoss {
  LossReport report;
  Vector grad_params;
};

HeadLoss head_loss(const EmbeddingHead& head, const Matrix& input, const SceneLabels& labels,
                   const LossConfig& cfg);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t lr_drop_step = 1500;
  double lr_drop_factor = 0.1;
  std::size_t batch_size = 4;
  std::size_t total_steps = 2000;
  std::size_t max_points = 2048;  // per sampled scene; 0 keeps every point
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossConfig loss;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Adam with bias correction over one flat parameter vector.
class Adam {
 public:
  Adam(Index n_params, double beta1, double beta2, double eps);

  void step(Vector& params, const Vector& grad, double learning_rate);
  [[nodiscard]] std::size_t steps_taken() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
};

struct StepLoss {
  double total = 0.0;
  double l_sem = 0.0;
  double l_var = 0.0;
  double l_dist = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  EmbeddingHead head;
  std::vector<StepLoss> history;
};

/// Minimizes the cosine loss with Adam. Each step samples batch_size scenes with
/// replacement, averages their parameter gradients and applies one update. The
/// learning rate is multiplied by lr_drop_factor from step lr_drop_step onwards.
/// Throws DivergenceError if the loss becomes non-finite.
TrainResult train(EmbeddingHead head, std::span<const Scene> scenes, const TrainConfig& cfg);

// Checkpoint: "HEAD1 <d_in> <d_e> <n_categories> <normalize:0|1>" then row-major
// weight, bias, classifier_weight, classifier_bias as whitespace-separated decimals.
void write_head(std::ostream& os, const EmbeddingHead& head);
EmbeddingHead read_head(std::istream& is);
void save_head(const std::filesystem::path& path, const EmbeddingHead& head);
EmbeddingHead load_head(const std::filesystem::path& path);

void write_history_csv(std::ostream& os, std::span<const StepLoss> history);

}  // namespace cosseg
