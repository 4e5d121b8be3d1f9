#include "cosseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "cosseg/errors.hpp"
#include "cosseg/scene_io.hpp"

namespace cosseg {
namespace {

// Object sizes and the G x P intersection table of two compacted labelings.
struct Overlap {
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
  std::vector<std::size_t> gt_size;
  std::vector<std::size_t> pred_size;
  std::vector<std::size_t> inter;  // row-major, n_gt x n_pred

  [[nodiscard]] std::size_t at(std::size_t g, std::size_t p) const { return inter[g * n_pred + p]; }
};

std::size_t object_count(const std::vector<int>& compacted) {
  int most = -1;
  for (int v : compacted) most = std::max(most, v);
  return static_cast<std::size_t>(most + 1);
}

Overlap overlap(const SceneLabels& gt, const SceneLabels& pred) {
  if (gt.instance.size() != pred.instance.size()) throw ShapeError("GT and prediction differ in point count");
  const auto g_ids = compact_ids(gt.instance);
  const auto p_ids = compact_ids(pred.instance);
  Overlap o;
  o.n_gt = object_count(g_ids);
  o.n_pred = object_count(p_ids);
  o.gt_size.assign(o.n_gt, 0);
  o.pred_size.assign(o.n_pred, 0);
  o.inter.assign(o.n_gt * o.n_pred, 0);
  for (std::size_t i = 0; i < g_ids.size(); ++i) {
    const int g = g_ids[i];
    const int p = p_ids[i];
    if (g >= 0) ++o.gt_size[static_cast<std::size_t>(g)];
    if (p >= 0) ++o.pred_size[static_cast<std::size_t>(p)];
    if (g >= 0 && p >= 0) ++o.inter[static_cast<std::size_t>(g) * o.n_pred + static_cast<std::size_t>(p)];
  }
  return o;
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

SceneLabels drop_small_predictions(const SceneLabels& pred, std::size_t min_pred_size) {
  SceneLabels out = pred;
  out.instance = compact_ids(pred.instance);
  std::map<int, std::size_t> size;
  for (int v : out.instance) {
    if (v >= 0) ++size[v];
  }
  for (int& v : out.instance) {
    if (v >= 0 && size[v] < min_pred_size) v = kNoise;
  }
  out.instance = compact_ids(out.instance);
  return out;
}

}  // namespace

void EvalConfig::validate() const {
  if (!(ios_threshold > 0.5 && ios_threshold <= 1.0)) throw InvalidArgument("IoS threshold t must lie in (0.5, 1]");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw InvalidArgument("IoU threshold must lie in (0, 1]");
}

double ios(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> sa(a.begin(), a.end());
  std::vector<std::size_t> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  if (sa.empty()) throw InvalidArgument("IoS is undefined for an empty first set");
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::size_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(sa.size());
}

Containment aggregate_results(const SceneLabels& gt, const SceneLabels& pred, double t) {
  const Overlap o = overlap(gt, pred);
  Containment c;
  c.gt2pred.resize(o.n_gt);
  c.pred2gt.resize(o.n_pred);
  for (std::size_t g = 0; g < o.n_gt; ++g) {
    for (std::size_t p = 0; p < o.n_pred; ++p) {
      const auto shared = static_cast<double>(o.at(g, p));
      if (shared / static_cast<double>(o.gt_size[g]) > t) c.pred2gt[p].push_back(g);    // g is included in p
      if (shared / static_cast<double>(o.pred_size[p]) > t) c.gt2pred[g].push_back(p);  // p is included in g
    }
  }
  return c;
}

std::string PatternSet::to_string() const {
  std::string out;
  auto add_name = [&](Pattern p, const char* name) {
    if (!has(p)) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add_name(Pattern::true_positive, "TP");
  add_name(Pattern::partial_detection, "PD");
  add_name(Pattern::false_merging, "FM");
  add_name(Pattern::false_positive, "FP");
  return out;
}

EvalReport summarize(const Containment& containment, std::size_t n_pred) {
  const auto& gt2pred = containment.gt2pred;
  const auto& pred2gt = containment.pred2gt;
  if (pred2gt.size() != n_pred) throw ShapeError("pred2gt must have one entry per prediction");
  auto contains = [](const std::vector<std::size_t>& list, std::size_t v) {
    return std::find(list.begin(), list.end(), v) != list.end();
  };

  std::vector<PatternSet> results(n_pred);
  for (std::size_t g = 0; g < gt2pred.size(); ++g) {
    for (std::size_t p : gt2pred[g]) {
      results[p].add(contains(pred2gt[p], g) ? Pattern::true_positive : Pattern::partial_detection);
    }
  }
  for (std::size_t p = 0; p < n_pred; ++p) {
    if (pred2gt[p].empty() && results[p].empty()) results[p].add(Pattern::false_positive);
    for (std::size_t g : pred2gt[p]) {
      if (!contains(gt2pred[g], p)) results[p].add(Pattern::false_merging);
    }
  }

  EvalReport r;
  r.n_gt = gt2pred.size();
  r.n_pred = n_pred;
  for (const auto& s : results) {
    r.tp += s.has(Pattern::true_positive) ? 1 : 0;
    r.pd += s.has(Pattern::partial_detection) ? 1 : 0;
    r.fm += s.has(Pattern::false_merging) ? 1 : 0;
    r.fp += s.has(Pattern::false_positive) ? 1 : 0;
  }
  r.precision = safe_ratio(r.tp, r.n_pred);
  r.recall = safe_ratio(r.tp, r.n_gt);
  r.f_score = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.pd_ratio = safe_ratio(r.pd, r.n_pred);
  r.fm_ratio = safe_ratio(r.fm, r.n_pred);
  r.fp_ratio = safe_ratio(r.fp, r.n_pred);
  r.per_prediction_labels = std::move(results);
  return r;
}

EvalReport evaluate(const SceneLabels& gt, const SceneLabels& pred, const EvalConfig& cfg) {
  cfg.validate();
  const SceneLabels kept = drop_small_predictions(pred, cfg.min_pred_size);
  const Containment c = aggregate_results(gt, kept, cfg.ios_threshold);
  return summarize(c, c.pred2gt.size());
}

std::vector<SweepRow> sweep_ios_threshold(const SceneLabels& gt, const SceneLabels& pred, std::size_t min_pred_size) {
  const SceneLabels kept = drop_small_predictions(pred, min_pred_size);
  std::vector<SweepRow> rows;
  for (int step = 0; step < 10; ++step) {
    SweepRow row;
    row.t = 0.5 + 0.05 * step;
    row.exclusive = row.t > 0.5;
    const Containment c = aggregate_results(gt, kept, row.t);
    row.report = summarize(c, c.pred2gt.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  for (const auto& row : rows) {
    if (!row.exclusive) {
      os << "# t=" << format_real(row.t) << " does not guarantee exclusive containment (requires t > 0.5)\n";
    }
  }
  os << "t,precision,recall,f1,pd,fm,fp\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << format_real(row.t) << ',' << format_real(r.precision) << ',' << format_real(r.recall) << ','
       << format_real(r.f_score) << ',' << format_real(r.pd_ratio) << ',' << format_real(r.fm_ratio) << ','
       << format_real(r.fp_ratio) << '\n';
  }
}

ProposalRecall proposal_recall(const SceneLabels& gt, const SceneLabels& pred, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw InvalidArgument("IoU threshold must lie in (0, 1]");
  const Overlap o = overlap(gt, pred);

  // Category of each GT object: the semantic id of its first point.
  const auto g_ids = compact_ids(gt.instance);
  std::vector<int> category(o.n_gt, -1);
  for (std::size_t i = 0; i < g_ids.size(); ++i) {
    if (g_ids[i] >= 0 && category[static_cast<std::size_t>(g_ids[i])] < 0)
      category[static_cast<std::size_t>(g_ids[i])] = gt.semantic[i];
  }

  std::map<int, CategoryRecall> by_category;
  std::size_t detected = 0;
  for (std::size_t g = 0; g < o.n_gt; ++g) {
    double best = 0.0;
    for (std::size_t p = 0; p < o.n_pred; ++p) {
      const std::size_t shared = o.at(g, p);
      const double iou = static_cast<double>(shared) / static_cast<double>(o.gt_size[g] + o.pred_size[p] - shared);
      if (iou > best) best = iou;
    }
    const bool hit = best > iou_threshold;
    auto& entry = by_category[category[g]];
    entry.category = category[g];
    ++entry.n_gt;
    if (hit) {
      ++entry.n_detected;
      ++detected;
    }
  }

  ProposalRecall out;
  for (auto& [k, entry] : by_category) {
    entry.recall = safe_ratio(entry.n_detected, entry.n_gt);
    out.mean += entry.recall;
    out.per_category.push_back(entry);
  }
  if (!out.per_category.empty()) out.mean /= static_cast<double>(out.per_category.size());
  out.total = safe_ratio(detected, o.n_gt);
  return out;
}

void write_report_json(std::ostream& os, const EvalReport& report, const ProposalRecall& recall) {
  nlohmann::ordered_json j;
  j["n_gt"] = report.n_gt;
  j["n_pred"] = report.n_pred;
  j["tp"] = report.tp;
  j["pd"] = report.pd;
  j["fm"] = report.fm;
  j["fp"] = report.fp;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f_score"] = report.f_score;
  j["pd_ratio"] = report.pd_ratio;
  j["fm_ratio"] = report.fm_ratio;
  j["fp_ratio"] = report.fp_ratio;
  auto& labels = j["per_prediction_labels"] = nlohmann::ordered_json::array();
  for (const auto& s : report.per_prediction_labels) labels.push_back(s.to_string());

  auto& pr = j["proposal_recall"];
  pr["mean"] = recall.mean;
  pr["total"] = recall.total;
  auto& cats = pr["per_category"] = nlohmann::ordered_json::array();
  for (const auto& c : recall.per_category) {
    cats.push_back({{"category", c.category}, {"n_gt", c.n_gt}, {"n_detected", c.n_detected}, {"recall", c.recall}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace cosseg
