#include "cosseg/trainer.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "cosseg/errors.hpp"
#include "cosseg/scene_io.hpp"

namespace cosseg {

EmbeddingHead EmbeddingHead::initialize(Index input_dim, Index embedding_dim, Index n_categories,
                                        bool normalize_rows, std::uint64_t seed) {
  if (input_dim < 1 || embedding_dim < 2 || n_categories < 1)
    throw InvalidArgument("head needs input_dim >= 1, embedding_dim >= 2, n_categories >= 1");
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](auto& m) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };

  EmbeddingHead head;
  head.weight.resize(embedding_dim, input_dim);
  head.bias.resize(embedding_dim);
  head.classifier_weight.resize(n_categories, input_dim);
  head.classifier_bias.resize(n_categories);
  fill(head.weight);
  fill(head.bias);
  fill(head.classifier_weight);
  fill(head.classifier_bias);
  head.normalize_rows = normalize_rows;
  return head;
}

Index EmbeddingHead::parameter_count() const {
  return weight.size() + bias.size() + classifier_weight.size() + classifier_bias.size();
}

void EmbeddingHead::validate() const {
  if (weight.rows() < 2 || weight.cols() < 1) throw ShapeError("head weight must be d_e x d_in with d_e >= 2");
  if (bias.size() != weight.rows()) throw ShapeError("head bias length must equal d_e");
  if (classifier_weight.cols() != weight.cols() || classifier_weight.rows() < 1)
    throw ShapeError("classifier weight must be n_categories x d_in");
  if (classifier_bias.size() != classifier_weight.rows())
    throw ShapeError("classifier bias length must equal n_categories");
}

Vector EmbeddingHead::pack() const {
  Vector p(parameter_count());
  Index at = 0;
  auto put = [&](const auto& m) {
    p.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    at += m.size();
  };
  put(weight);
  put(bias);
  put(classifier_weight);
  put(classifier_bias);
  return p;
}

void EmbeddingHead::unpack(const Vector& params) {
  if (params.size() != parameter_count()) throw ShapeError("parameter vector has the wrong length");
  Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Vector>(m.data(), m.size()) = params.segment(at, m.size());
    at += m.size();
  };
  take(weight);
  take(bias);
  take(classifier_weight);
  take(classifier_bias);
}

Matrix head_input(const PointCloud& cloud) {
  Matrix input(cloud.coords.rows(), cloud.features.cols() + 3);
  input << cloud.features, cloud.colors;
  return input;
}

HeadOutput forward(const EmbeddingHead& head, const Matrix& input) {
  head.validate();
  if (input.cols() != head.input_dim())
    throw ShapeError("head expects " + std::to_string(head.input_dim()) + " input columns, got " +
                     std::to_string(input.cols()));
  HeadOutput out;
  out.embeddings = (input * head.weight.transpose()).rowwise() + head.bias.transpose();
  if (head.normalize_rows) {
    for (Index i = 0; i < out.embeddings.rows(); ++i) {
      const double len = out.embeddings.row(i).norm();
      if (len == 0.0) throw DomainError("cannot normalize a zero embedding");
      out.embeddings.row(i) /= len;
    }
  }
  out.logits = (input * head.classifier_weight.transpose()).rowwise() + head.classifier_bias.transpose();
  return out;
}

HeadOutput forward(const EmbeddingHead& head, const PointCloud& cloud) {
  return forward(head, head_input(cloud));
}

HeadLoss head_loss(const EmbeddingHead& head, const Matrix& input, const SceneLabels& labels,
                   const LossConfig& cfg) {
  EmbeddingHead raw = head;
  raw.normalize_rows = false;
  const HeadOutput pre = forward(raw, input);

  Matrix embeddings = pre.embeddings;
  if (head.normalize_rows) embeddings.rowwise().normalize();

  HeadLoss out;
  out.report = cosine_loss(embeddings, pre.logits, labels, cfg);

  Matrix grad_pre = out.report.grad_embeddings;
  if (head.normalize_rows) {
    // d(h/|h|) applied to g: (g - u (u.g)) / |h| with u = h/|h|.
    for (Index i = 0; i < grad_pre.rows(); ++i) {
      const double len = pre.embeddings.row(i).norm();
      const RowVector u = embeddings.row(i);
      grad_pre.row(i) = (grad_pre.row(i) - u * u.dot(grad_pre.row(i))) / len;
    }
  }

  EmbeddingHead grad = head;
  grad.weight = grad_pre.transpose() * input;
  grad.bias = grad_pre.colwise().sum().transpose();
  grad.classifier_weight = out.report.grad_logits.transpose() * input;
  grad.classifier_bias = out.report.grad_logits.colwise().sum().transpose();
  out.grad_params = grad.pack();
  return out;
}

void TrainConfig::validate() const {
  if (total_steps < 1) throw InvalidArgument("total_steps must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(lr_drop_factor > 0.0)) throw InvalidArgument("lr_drop_factor must be positive");
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw InvalidArgument("adam_eps must be positive");
  loss.validate_cosine();
}

Adam::Adam(Index n_params, double beta1, double beta2, double eps)
    : m_(Vector::Zero(n_params)), v_(Vector::Zero(n_params)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Vector& params, const Vector& grad, double learning_rate) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeError("Adam parameter size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

TrainResult train(EmbeddingHead head, std::span<const Scene> scenes, const TrainConfig& cfg) {
  if (scenes.empty()) throw InvalidArgument("training needs at least one scene");
  head.validate();
  if (cfg.total_steps == 0) return {std::move(head), {}};
  cfg.validate();

  std::vector<Matrix> inputs;
  std::vector<std::size_t> counts(static_cast<std::size_t>(head.n_categories()), 0);
  for (const auto& scene : scenes) {
    scene.cloud.validate();
    scene.labels.validate(static_cast<int>(head.n_categories()));
    if (scene.labels.size() != scene.cloud.size()) throw ShapeError("scene labels and cloud differ in size");
    inputs.push_back(head_input(scene.cloud));
    if (inputs.back().cols() != head.input_dim()) throw ShapeError("scene feature dimension does not match the head");
    for (int s : scene.labels.semantic) ++counts[static_cast<std::size_t>(s)];
  }

  LossConfig loss_cfg = cfg.loss;
  if (loss_cfg.class_weights.empty()) loss_cfg.class_weights = inverse_frequency_weights(counts);

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, scenes.size() - 1);
  Adam adam(head.parameter_count(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  Vector params = head.pack();

  TrainResult result;
  result.history.reserve(cfg.total_steps);
  std::vector<std::size_t> order;
  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    const double lr = step >= cfg.lr_drop_step ? cfg.learning_rate * cfg.lr_drop_factor : cfg.learning_rate;
    Vector grad = Vector::Zero(params.size());
    StepLoss record;
    record.learning_rate = lr;

    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t s = pick(rng);
      const Matrix* input = &inputs[s];
      const SceneLabels* labels = &scenes[s].labels;
      Matrix sub_input;
      SceneLabels sub_labels;
      const std::size_t n = labels->size();
      if (cfg.max_points != 0 && n > cfg.max_points) {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = 0; i < cfg.max_points; ++i) {
          std::uniform_int_distribution<std::size_t> j(i, n - 1);
          std::swap(order[i], order[j(rng)]);
        }
        order.resize(cfg.max_points);
        sub_input = select_rows(*input, order);
        for (std::size_t i : order) {
          sub_labels.semantic.push_back(labels->semantic[i]);
          sub_labels.instance.push_back(labels->instance[i]);
        }
        input = &sub_input;
        labels = &sub_labels;
      }

      const HeadLoss hl = head_loss(head, *input, *labels, loss_cfg);
      grad += hl.grad_params;
      record.total += hl.report.total;
      record.l_sem += hl.report.l_sem;
      record.l_var += hl.report.l_var;
      record.l_dist += hl.report.l_dist;
    }
    const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
    grad *= inv_b;
    record.total *= inv_b;
    record.l_sem *= inv_b;
    record.l_var *= inv_b;
    record.l_dist *= inv_b;
    if (!std::isfinite(record.total) || !grad.allFinite())
      throw DivergenceError("training loss became non-finite at step " + std::to_string(step));
    result.history.push_back(record);

    adam.step(params, grad, lr);
    head.unpack(params);
  }
  result.head = std::move(head);
  return result;
}

void write_head(std::ostream& os, const EmbeddingHead& head) {
  head.validate();
  os << "HEAD1 " << head.input_dim() << ' ' << head.embedding_dim() << ' ' << head.n_categories() << ' '
     << (head.normalize_rows ? 1 : 0) << '\n';
  auto rows = [&](const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_real(m(i, j));
      os << '\n';
    }
  };
  auto line = [&](const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_real(v(i));
    os << '\n';
  };
  rows(head.weight);
  line(head.bias);
  rows(head.classifier_weight);
  line(head.classifier_bias);
}

EmbeddingHead read_head(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw HeaderError("empty checkpoint");
  std::istringstream hs(header);
  std::string magic;
  long long d_in = 0;
  long long d_e = 0;
  long long n_cat = 0;
  int normalize = -1;
  std::string extra;
  if (!(hs >> magic) || magic != "HEAD1") throw HeaderError("checkpoint header must start with HEAD1");
  if (!(hs >> d_in >> d_e >> n_cat >> normalize) || d_in < 1 || d_e < 2 || n_cat < 1 ||
      (normalize != 0 && normalize != 1) || (hs >> extra))
    throw HeaderError("malformed checkpoint header");

  EmbeddingHead head;
  head.weight.resize(d_e, d_in);
  head.bias.resize(d_e);
  head.classifier_weight.resize(n_cat, d_in);
  head.classifier_bias.resize(n_cat);
  head.normalize_rows = normalize == 1;
  Vector params(head.parameter_count());
  for (Index i = 0; i < params.size(); ++i) {
    std::string tok;
    if (!(is >> tok)) throw FormatError("checkpoint truncated");
    std::size_t used = 0;
    try {
      params(i) = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw FormatError("checkpoint value is not a number: " + tok);
  }
  std::string tail;
  if (is >> tail) throw FormatError("checkpoint has trailing values");
  head.unpack(params);
  return head;
}

void save_head(const std::filesystem::path& path, const EmbeddingHead& head) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_head(out, head);
}

EmbeddingHead load_head(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_head(in);
}

void write_history_csv(std::ostream& os, std::span<const StepLoss> history) {
  os << "step,total,l_sem,l_var,l_dist,learning_rate\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    os << i << ',' << format_real(h.total) << ',' << format_real(h.l_sem) << ',' << format_real(h.l_var) << ','
       << format_real(h.l_dist) << ',' << format_real(h.learning_rate) << '\n';
  }
}

}  // namespace cosseg
