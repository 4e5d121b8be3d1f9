#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cosseg/types.hpp"

namespace cosseg {

struct EvalConfig {
  double ios_threshold = 0.75;
  double iou_threshold = 0.5;
  std::size_t min_pred_size = 1;

  void validate() const;
};

/// N(A and B) / N(A). Inputs are treated as sets of point ids. Throws InvalidArgument if A is empty.
double ios(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Which predictions lie inside each GT and which GTs lie inside each prediction.
/// Objects are indexed by compacted instance id; noise belongs to no object.
struct Containment {
  std::vector<std::vector<std::size_t>> gt2pred;  // gt2pred[g]: p with IoS(p, g) > t
  std::vector<std::vector<std::size_t>> pred2gt;  // pred2gt[p]: g with IoS(g, p) > t
};

Containment aggregate_results(const SceneLabels& gt, const SceneLabels& pred, double t);

enum class Pattern : std::uint8_t {
  true_positive = 1,
  partial_detection = 2,
  false_merging = 4,
  false_positive = 8,
};

/// Deduplicated set of patterns attached to one prediction.
class PatternSet {
 public:
  void add(Pattern p) { bits_ |= static_cast<std::uint8_t>(p); }
  [[nodiscard]] bool has(Pattern p) const { return (bits_ & static_cast<std::uint8_t>(p)) != 0; }
  [[nodiscard]] bool empty() const { return bits_ == 0; }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(PatternSet, PatternSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct EvalReport {
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
  std::size_t tp = 0;
  std::size_t pd = 0;
  std::size_t fm = 0;
  std::size_t fp = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double pd_ratio = 0.0;
  double fm_ratio = 0.0;
  double fp_ratio = 0.0;
  std::vector<PatternSet> per_prediction_labels;
};

/// Labels every prediction with TP/PD/FM/FP and derives the ratios. Semantics are ignored.
EvalReport summarize(const Containment& containment, std::size_t n_pred);

/// Drops predictions smaller than min_pred_size, then aggregates and summarizes at ios_threshold.
EvalReport evaluate(const SceneLabels& gt, const SceneLabels& pred, const EvalConfig& cfg);

struct SweepRow {
  double t = 0.0;
  EvalReport report;
  bool exclusive = true;  // false when t <= 0.5 (containment may be ambiguous)
};

/// Evaluates at t = 0.50, 0.55, ..., 0.95.
std::vector<SweepRow> sweep_ios_threshold(const SceneLabels& gt, const SceneLabels& pred,
                                          std::size_t min_pred_size);

/// Columns t,precision,recall,f1,pd,fm,fp (pd/fm/fp as ratios of predictions).
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

struct CategoryRecall {
  int category = 0;
  std::size_t n_gt = 0;
  std::size_t n_detected = 0;
  double recall = 0.0;
};

struct ProposalRecall {
  std::vector<CategoryRecall> per_category;  // categories with at least one GT, ascending
  double mean = 0.0;
  double total = 0.0;
};

/// For each GT the best-IoU prediction (ties: lowest id), regardless of category, counts
/// as detected when IoU > iou_threshold. A GT's category is the semantic id of its points.
ProposalRecall proposal_recall(const SceneLabels& gt, const SceneLabels& pred, double iou_threshold);

/// Writes the report and proposal recall as a JSON object.
void write_report_json(std::ostream& os, const EvalReport& report, const ProposalRecall& recall);

}  // namespace cosseg
