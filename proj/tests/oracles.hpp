#pragma once

// Independent reference implementations used only by the tests. They follow the
// textbook definitions directly and share no code path with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "cosseg/metrics.hpp"
#include "cosseg/types.hpp"

namespace oracle {

using cosseg::Index;
using cosseg::Matrix;
using cosseg::SceneLabels;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

inline std::vector<double> row(const Matrix& m, Index i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
  return r;
}

// Groups rows by instance id (ascending id), noise skipped.
inline std::vector<std::vector<std::vector<double>>> clusters(const Matrix& emb, const std::vector<int>& inst) {
  std::map<int, std::vector<std::vector<double>>> by_id;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst[i] >= 0) by_id[inst[i]].push_back(row(emb, static_cast<Index>(i)));
  }
  std::vector<std::vector<std::vector<double>>> out;
  for (auto& [id, members] : by_id) out.push_back(members);
  return out;
}

inline std::vector<double> mean(const std::vector<std::vector<double>>& pts) {
  std::vector<double> m(pts.front().size(), 0.0);
  for (const auto& p : pts) {
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += p[j];
  }
  for (double& v : m) v /= static_cast<double>(pts.size());
  return m;
}

// Direct scalar evaluation of the cosine l_var and l_dist.
inline double cosine_l_var(const Matrix& emb, const std::vector<int>& inst, double delta_v) {
  const auto cs = clusters(emb, inst);
  double total = 0.0;
  for (const auto& members : cs) {
    const auto mu = mean(members);
    double s = 0.0;
    for (const auto& x : members) s += std::max(0.0, delta_v - cosine(mu, x));
    total += s / static_cast<double>(members.size());
  }
  return total / static_cast<double>(cs.size());
}

inline double cosine_l_dist(const Matrix& emb, const std::vector<int>& inst, double delta_d) {
  const auto cs = clusters(emb, inst);
  const std::size_t c = cs.size();
  if (c < 2) return 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      if (a != b) total += std::max(0.0, cosine(mean(cs[a]), mean(cs[b])) - delta_d);
    }
  }
  return total / static_cast<double>(c * (c - 1));
}

// |f_i - f_j| by explicit differences.
inline Matrix pairwise_distances(const Matrix& f) {
  Matrix out(f.rows(), f.rows());
  for (Index i = 0; i < f.rows(); ++i) {
    for (Index j = 0; j < f.rows(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < f.cols(); ++k) s += (f(i, k) - f(j, k)) * (f(i, k) - f(j, k));
      out(i, j) = std::sqrt(s);
    }
  }
  return out;
}

// Textbook DBSCAN: O(N^2) neighbor table, union-find over core points, clusters
// numbered by their smallest core index, border points to the lowest-numbered
// adjacent cluster.
inline std::vector<int> dbscan(const Matrix& x, double eps, std::size_t min_pts) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index k = 0; k < x.cols(); ++k) {
        const double d = x(static_cast<Index>(i), k) - x(static_cast<Index>(j), k);
        s += d * d;
      }
      if (s <= eps * eps) {
        adj[i][j] = true;
        ++degree[i];
      }
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = degree[i] >= min_pts;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[i] && core[j] && adj[i][j]) {
        const auto a = find(i);
        const auto b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, int> number;  // root -> cluster id in order of smallest core index
  std::vector<int> label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const auto r = find(i);
    auto it = number.find(r);
    if (it == number.end()) it = number.emplace(r, static_cast<int>(number.size())).first;
    label[i] = it->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && adj[i][j] && (best < 0 || label[j] < best)) best = label[j];
    }
    label[i] = best;
  }
  return label;
}

// Two labelings describe the same partition (noise must match exactly).
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab;
  std::map<int, int> ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

struct PairClassification {
  std::vector<cosseg::PatternSet> labels;
  std::size_t n_gt = 0;
  std::size_t tp = 0, pd = 0, fm = 0, fp = 0;
  // How many predictions contain each GT, and how many GTs contain each prediction.
  std::vector<std::size_t> containers_of_gt;
  std::vector<std::size_t> containers_of_pred;
};

// Classifies every prediction by examining every (g, p) pair straight from the point labels.
inline PairClassification classify(const SceneLabels& gt, const SceneLabels& pred, double t) {
  std::set<int> gids;
  std::set<int> pids;
  for (int v : gt.instance) {
    if (v >= 0) gids.insert(v);
  }
  for (int v : pred.instance) {
    if (v >= 0) pids.insert(v);
  }
  auto size_of = [](const std::vector<int>& lab, int id) {
    return static_cast<double>(std::count(lab.begin(), lab.end(), id));
  };
  auto shared = [&](int g, int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < gt.instance.size(); ++i) s += (gt.instance[i] == g && pred.instance[i] == p) ? 1.0 : 0.0;
    return s;
  };

  PairClassification out;
  out.n_gt = gids.size();
  out.containers_of_gt.assign(gids.size(), 0);
  out.containers_of_pred.assign(pids.size(), 0);
  std::size_t pi = 0;
  for (int p : pids) {
    bool tp = false, pd = false, fm = false, any = false;
    std::size_t gi = 0;
    for (int g : gids) {
      const double inter = shared(g, p);
      const bool p_in_g = inter / size_of(pred.instance, p) > t;
      const bool g_in_p = inter / size_of(gt.instance, g) > t;
      if (p_in_g && g_in_p) tp = true;
      if (p_in_g && !g_in_p) pd = true;
      if (g_in_p && !p_in_g) fm = true;
      if (p_in_g || g_in_p) any = true;
      if (g_in_p) ++out.containers_of_gt[gi];
      if (p_in_g) ++out.containers_of_pred[pi];
      ++gi;
    }
    cosseg::PatternSet s;
    if (tp) s.add(cosseg::Pattern::true_positive);
    if (pd) s.add(cosseg::Pattern::partial_detection);
    if (fm) s.add(cosseg::Pattern::false_merging);
    if (!any) s.add(cosseg::Pattern::false_positive);
    out.tp += tp;
    out.pd += pd;
    out.fm += fm;
    out.fp += !any;
    out.labels.push_back(s);
    ++pi;
  }
  return out;
}

// Random GT/prediction pair: the prediction is derived from the GT by a random mix of
// exact copies, splits, merges, shifted boundaries, noise and spurious objects.
inline std::pair<SceneLabels, SceneLabels> random_label_pair(std::mt19937_64& rng, std::size_t max_points = 300,
                                                             int max_instances = 6) {
  std::uniform_int_distribution<std::size_t> npts(10, max_points);
  std::uniform_int_distribution<int> ninst(1, max_instances);
  const std::size_t n = npts(rng);
  const int k = ninst(rng);
  std::uniform_int_distribution<int> pick_inst(0, k - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  SceneLabels gt;
  gt.instance.resize(n);
  gt.semantic.resize(n);
  // Sizes are skewed by sampling a random weight per instance.
  std::vector<double> w(static_cast<std::size_t>(k));
  for (double& v : w) v = 0.1 + u(rng);
  std::discrete_distribution<int> by_weight(w.begin(), w.end());
  for (std::size_t i = 0; i < n; ++i) {
    gt.instance[i] = u(rng) < 0.05 ? -1 : by_weight(rng) * 3 + 2;  // sparse, non-compact ids
    gt.semantic[i] = gt.instance[i] < 0 ? 0 : gt.instance[i] % 2;
  }

  SceneLabels pred = gt;
  const int mode = std::uniform_int_distribution<int>(0, 5)(rng);
  std::vector<int> remap(static_cast<std::size_t>(k));
  for (int g = 0; g < k; ++g) {
    const double r = u(rng);
    remap[static_cast<std::size_t>(g)] = r < 0.3 ? pick_inst(rng) : g;  // merges
  }
  const double split_p = u(rng);
  const double noise_p = 0.3 * u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    int p = gt.instance[i] < 0 ? -1 : remap[static_cast<std::size_t>((gt.instance[i] - 2) / 3)];
    if (mode == 0) {
      p = std::uniform_int_distribution<int>(-1, k + 2)(rng);  // unrelated prediction
    } else if (mode >= 2) {
      if (p >= 0 && u(rng) < split_p * 0.5) p += 100;                          // split off a part
      if (u(rng) < noise_p) p = -1;                                            // dropped points
      if (u(rng) < 0.05) p = 200 + std::uniform_int_distribution<int>(0, 2)(rng);  // spurious
    }
    pred.instance[i] = p;
    pred.semantic[i] = std::uniform_int_distribution<int>(0, 1)(rng);
  }
  return {gt, pred};
}

}  // namespace oracle
