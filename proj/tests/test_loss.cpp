#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cosseg/errors.hpp"
#include "cosseg/loss.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cosseg;

namespace {

SceneLabels labels_of(std::vector<int> instance, int category = 0) {
  SceneLabels l;
  l.instance = std::move(instance);
  l.semantic.assign(l.instance.size(), category);
  return l;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
  Index i = 0;
  for (const auto& line : r) {
    Index j = 0;
    for (double v : line) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("cosine_similarity examples") {
  CHECK(cosine_similarity(RowVector::Unit(2, 0), RowVector::Unit(2, 0)) == doctest::Approx(1.0));
  CHECK(cosine_similarity(RowVector::Unit(2, 0), RowVector::Unit(2, 1)) == doctest::Approx(0.0));
  CHECK(cosine_similarity(RowVector::Unit(2, 0), -RowVector::Unit(2, 0)) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine_similarity(RowVector::Zero(2), RowVector::Unit(2, 0)), DomainError);
}

TEST_CASE("cosine_similarity is symmetric and scale invariant") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    RowVector a(5), b(5);
    for (Index i = 0; i < 5; ++i) {
      a(i) = g(rng);
      b(i) = g(rng);
    }
    const double s = cosine_similarity(a, b);
    CHECK(s == doctest::Approx(cosine_similarity(b, a)).epsilon(1e-14));
    CHECK(s == doctest::Approx(cosine_similarity(7.5 * a, b)).epsilon(1e-12));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("cluster_stats examples") {
  const auto two = cluster_stats(rows({{1, 0}, {0, 1}}), labels_of({0, 0}));
  CHECK(two.n_clusters == 1);
  CHECK(two.centroids(0, 0) == doctest::Approx(0.5));
  CHECK(two.centroids(0, 1) == doctest::Approx(0.5));

  const auto single = cluster_stats(rows({{3, 4}}), labels_of({0}));
  CHECK(single.centroids(0, 0) == 3.0);
  CHECK(single.centroids(0, 1) == 4.0);
  CHECK(single.sizes == std::vector<std::size_t>{1});

  Matrix e = Matrix::Ones(9, 2);
  const auto three = cluster_stats(e, labels_of({7, 7, 2, 2, 2, 2, 2, 9, -1}));
  CHECK(three.n_clusters == 3);
  CHECK(three.sizes == std::vector<std::size_t>{5, 2, 1});  // ordered by id: 2, 7, 9
  CHECK(three.assignment[8] == -1);

  CHECK_THROWS_AS(cluster_stats(e, labels_of(std::vector<int>(9, -1))), InvalidArgument);
}

TEST_CASE("cosine_loss: identical unit vectors give zero embedding loss") {
  Matrix e = rows({{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}});
  LossConfig cfg;
  const auto r = cosine_loss(e, Matrix::Zero(3, 1), labels_of({0, 0, 0}), cfg);
  CHECK(r.l_var == 0.0);
  CHECK(r.l_dist == 0.0);
  CHECK(r.grad_embeddings.isZero());
}

TEST_CASE("cosine_loss: l_var of {(1,0),(0,1)} matches direct evaluation") {
  const Matrix e = rows({{1, 0}, {0, 1}});
  const auto labels = labels_of({0, 0});
  LossConfig cfg;
  cfg.delta_v = 0.9;
  const double expected = oracle::cosine_l_var(e, labels.instance, 0.9);
  CHECK(expected == doctest::Approx(0.9 - 1.0 / std::numbers::sqrt2).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.19289321881345).epsilon(1e-12));
  const auto r = cosine_loss(e, Matrix::Zero(2, 1), labels, cfg);
  CHECK(r.l_var == doctest::Approx(expected).epsilon(1e-15));
  CHECK(r.l_dist == 0.0);
}

TEST_CASE("cosine_loss: two singleton clusters at cosine 0.5") {
  const Matrix e = rows({{1, 0}, {0.5, std::sqrt(3.0) / 2.0}});
  const auto labels = labels_of({0, 1});
  LossConfig cfg;
  cfg.delta_d = 0.4;
  const double expected = oracle::cosine_l_dist(e, labels.instance, 0.4);
  CHECK(expected == doctest::Approx(0.1).epsilon(1e-12));
  const auto r = cosine_loss(e, Matrix::Zero(2, 1), labels, cfg);
  CHECK(r.l_dist == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.l_var == 0.0);
}

TEST_CASE("cosine_loss agrees with the scalar oracle on random instances") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    auto inst = gen::loss_instance(rng, 30, 1 + t % 5, 4, 3);
    LossConfig cfg;
    cfg.delta_v = 0.7;
    cfg.delta_d = -0.2;
    const auto r = cosine_loss(inst.emb, inst.logits, inst.labels, cfg);
    CHECK(r.l_var == doctest::Approx(oracle::cosine_l_var(inst.emb, inst.labels.instance, 0.7)).epsilon(1e-12));
    CHECK(r.l_dist == doctest::Approx(oracle::cosine_l_dist(inst.emb, inst.labels.instance, -0.2)).epsilon(1e-12));
    CHECK(r.total == r.l_sem + cfg.alpha * r.l_var + cfg.beta * r.l_dist);
    CHECK(r.grad_embeddings.rows() == inst.emb.rows());
    CHECK(r.grad_embeddings.cols() == inst.emb.cols());
    CHECK(r.grad_logits.rows() == inst.logits.rows());
    CHECK(r.grad_logits.cols() == inst.logits.cols());
  }
}

TEST_CASE("cosine_loss error paths") {
  LossConfig cfg;
  const auto labels = labels_of({0, 1});
  CHECK_THROWS_AS(cosine_loss(rows({{1, 0}, {0, 0}}), Matrix::Zero(2, 1), labels, cfg), DomainError);
  CHECK_THROWS_AS(cosine_loss(rows({{1, 0}, {0, 1}}), Matrix::Zero(3, 1), labels, cfg), ShapeError);
  CHECK_THROWS_AS(cosine_loss(rows({{1, 0}, {0, 1}, {1, 1}}), Matrix::Zero(3, 1), labels, cfg), ShapeError);
  cfg.delta_d = 0.95;
  CHECK_THROWS_AS(cosine_loss(rows({{1, 0}, {0, 1}}), Matrix::Zero(2, 1), labels, cfg), InvalidArgument);
  cfg = {};
  // Antipodal members give a zero centroid.
  CHECK_THROWS_AS(cosine_loss(rows({{1, 0}, {-1, 0}}), Matrix::Zero(2, 1), labels_of({0, 0}), cfg), DomainError);
}

TEST_CASE("euclidean_discriminative_loss examples") {
  LossConfig cfg;
  cfg.delta_v = 0.5;
  cfg.delta_d = 1.0;

  const auto same = euclidean_discriminative_loss(rows({{2, 1}, {2, 1}}), Matrix::Zero(2, 1), labels_of({0, 0}), cfg);
  CHECK(same.l_var == 0.0);

  const auto reg = euclidean_discriminative_loss(rows({{3, 4}}), Matrix::Zero(1, 1), labels_of({0}), cfg);
  CHECK(reg.l_reg == doctest::Approx(5.0));
  CHECK(reg.l_dist == 0.0);

  // Two singleton clusters one unit apart: ordered pairs (a,b),(b,a), each (2*1 - 1)^2.
  const auto dist = euclidean_discriminative_loss(rows({{1, 0}, {2, 0}}), Matrix::Zero(2, 1), labels_of({0, 1}), cfg);
  double direct = 0.0;
  for (int pair = 0; pair < 2; ++pair) direct += std::pow(std::max(0.0, 2.0 * 1.0 - 1.0), 2);
  direct /= 2.0 * 1.0;
  CHECK(direct == 1.0);
  CHECK(dist.l_dist == doctest::Approx(direct));
  CHECK(dist.total == dist.l_sem + cfg.alpha * dist.l_var + cfg.beta * dist.l_dist + cfg.gamma * dist.l_reg);
}

TEST_CASE("weighted_cross_entropy examples") {
  const std::vector<double> ones{1.0, 1.0};
  const auto uniform = weighted_cross_entropy(Matrix::Zero(4, 2), std::vector<int>{0, 1, 1, 0}, ones);
  CHECK(uniform.value == doctest::Approx(std::log(2.0)));

  Matrix confident(1, 2);
  confident << 1000.0, 0.0;
  const auto sure = weighted_cross_entropy(confident, std::vector<int>{0}, ones);
  CHECK(sure.value == doctest::Approx(0.0));
  CHECK(sure.grad_logits.cwiseAbs().maxCoeff() < 1e-300);

  const std::vector<double> weights{2.0, 1.0};
  const auto weighted = weighted_cross_entropy(Matrix::Zero(3, 2), std::vector<int>{0, 0, 0}, weights);
  CHECK(weighted.value == doctest::Approx(2.0 * std::log(2.0)));

  CHECK_THROWS_AS(weighted_cross_entropy(Matrix::Zero(1, 2), std::vector<int>{2}, ones), InvalidArgument);
  CHECK_THROWS_AS(weighted_cross_entropy(Matrix::Zero(1, 2), std::vector<int>{0}, std::vector<double>{1.0, 0.0}),
                  InvalidArgument);
}

TEST_CASE("inverse_frequency_weights") {
  const auto w = inverse_frequency_weights(std::vector<std::size_t>{100, 300, 0});
  CHECK(w[0] / w[1] == doctest::Approx(3.0));
  CHECK((w[0] + w[1]) / 2.0 == doctest::Approx(1.0));
  CHECK(w[2] == 1.0);
}

TEST_CASE("finite differences: cosine and baseline losses on a 10-point, 2-cluster instance") {
  std::mt19937_64 rng(23);
  auto inst = gen::loss_instance(rng, 10, 2, 3, 2);
  LossConfig cfg;
  cfg.delta_v = 0.95;
  cfg.delta_d = 0.1;
  REQUIRE(min_hinge_margin(LossKind::cosine, inst.emb, inst.labels, cfg) > 1e-4);
  const auto cos_report = cosine_loss(inst.emb, inst.logits, inst.labels, cfg);
  CHECK(cos_report.l_var > 0.0);
  CHECK(finite_difference_check(loss_function(LossKind::cosine), inst.emb, inst.logits, inst.labels, cfg, 1e-5) < 1e-5);

  LossConfig base;
  base.delta_v = 0.3;
  base.delta_d = 3.0;
  base.gamma = 0.01;
  REQUIRE(min_hinge_margin(LossKind::euclidean, inst.emb, inst.labels, base) > 1e-4);
  const auto eu_report = euclidean_discriminative_loss(inst.emb, inst.logits, inst.labels, base);
  CHECK(eu_report.l_var > 0.0);
  CHECK(eu_report.l_dist > 0.0);
  CHECK(finite_difference_check(loss_function(LossKind::euclidean), inst.emb, inst.logits, inst.labels, base, 1e-5) <
        1e-5);
}

TEST_CASE("finite differences: zero-gradient region") {
  // Tight, well separated clusters: every hinge inactive. Logits strongly favor the
  // true class, so l_sem sits at its optimum to double precision.
  Matrix e = rows({{1, 0.01, 0}, {1, -0.01, 0}, {0, 0, 1}, {0, 0.01, 1}});
  Matrix logits = rows({{60, 0}, {60, 0}, {0, 60}, {0, 60}});
  SceneLabels l;
  l.instance = {0, 0, 1, 1};
  l.semantic = {0, 0, 1, 1};
  LossConfig cfg;
  const auto r = cosine_loss(e, logits, l, cfg);
  CHECK(r.l_var == 0.0);
  CHECK(r.l_dist == 0.0);
  CHECK(r.grad_embeddings.isZero());
  CHECK(finite_difference_check(loss_function(LossKind::cosine), e, logits, l, cfg, 1e-5) < 1e-9);
}

TEST_CASE("scale invariance of the cosine embedding terms") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    auto inst = gen::loss_instance(rng, 24, 1 + t % 4, 5, 2);
    LossConfig cfg;
    cfg.delta_v = 0.8;
    cfg.delta_d = 0.0;
    const auto base = cosine_loss(inst.emb, inst.logits, inst.labels, cfg);
    for (double lambda : {0.1, 3.0, 100.0}) {
      const Matrix scaled = lambda * inst.emb;
      const auto r = cosine_loss(scaled, inst.logits, inst.labels, cfg);
      CHECK(std::abs(r.l_var - base.l_var) < 1e-12);
      CHECK(std::abs(r.l_dist - base.l_dist) < 1e-12);
    }
  }
}

TEST_CASE("baseline separation guarantee when delta_d >= delta_v") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const Index dim = 2 + t % 4;
    const int clusters = 2 + t % 4;
    LossConfig cfg;
    cfg.delta_v = 0.2 + 0.5 * u(rng);
    cfg.delta_d = cfg.delta_v * (1.0 + u(rng));

    // Centroids with pairwise distance >= 2 delta_d; members at mu +- v with |v| <= delta_v.
    std::vector<RowVector> mu;
    while (static_cast<int>(mu.size()) < clusters) {
      RowVector c(dim);
      for (Index j = 0; j < dim; ++j) c(j) = 10.0 * g(rng);
      bool ok = c.norm() > 0.0;
      for (const auto& m : mu) ok = ok && (m - c).norm() >= 2.0 * cfg.delta_d + 1e-9;
      if (ok) mu.push_back(c);
    }
    Matrix e(2 * clusters * 3, dim);
    SceneLabels l;
    Index r = 0;
    for (int c = 0; c < clusters; ++c) {
      for (int k = 0; k < 3; ++k) {
        RowVector v(dim);
        for (Index j = 0; j < dim; ++j) v(j) = g(rng);
        v *= cfg.delta_v * u(rng) / v.norm();
        e.row(r++) = mu[static_cast<std::size_t>(c)] + v;
        e.row(r++) = mu[static_cast<std::size_t>(c)] - v;
        l.instance.insert(l.instance.end(), {c, c});
        l.semantic.insert(l.semantic.end(), {0, 0});
      }
    }
    const auto rep = euclidean_discriminative_loss(e, Matrix::Zero(e.rows(), 1), l, cfg);
    REQUIRE(rep.l_var == 0.0);
    REQUIRE(rep.l_dist == 0.0);

    const auto stats = cluster_stats(e, l);
    for (Index i = 0; i < e.rows(); ++i) {
      for (Index c = 0; c < stats.n_clusters; ++c) {
        if (c == stats.assignment[static_cast<std::size_t>(i)]) continue;
        CHECK((e.row(i) - stats.centroids.row(c)).norm() > cfg.delta_v);
      }
    }
  }
}

TEST_CASE("cosine geometric analogue: zero loss bounds angles") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const Index dim = 3 + t % 6;
    const int clusters = 1 + t % 4;
    LossConfig cfg;
    cfg.delta_v = 0.7 + 0.25 * u(rng);
    cfg.delta_d = 0.1 + 0.3 * u(rng);

    std::vector<RowVector> dir;
    while (static_cast<int>(dir.size()) < clusters) {
      RowVector c(dim);
      for (Index j = 0; j < dim; ++j) c(j) = g(rng);
      c.normalize();
      bool ok = true;
      for (const auto& d : dir) ok = ok && c.dot(d) <= cfg.delta_d - 1e-6;
      if (ok) dir.push_back(c);
    }
    // Members mu +- v with v orthogonal to mu: cos(mu, mu +- v) = 1/sqrt(1+|v|^2).
    const double max_tan = std::sqrt(1.0 / (cfg.delta_v * cfg.delta_v) - 1.0);
    Matrix e(clusters * 6, dim);
    SceneLabels l;
    Index r = 0;
    for (int c = 0; c < clusters; ++c) {
      const RowVector& m = dir[static_cast<std::size_t>(c)];
      for (int k = 0; k < 3; ++k) {
        RowVector v(dim);
        for (Index j = 0; j < dim; ++j) v(j) = g(rng);
        v -= v.dot(m) * m;
        v *= max_tan * u(rng) / v.norm();
        const double scale = 0.5 + 2.0 * u(rng);
        e.row(r++) = scale * (m + v);
        e.row(r++) = scale * (m - v);
        l.instance.insert(l.instance.end(), {c, c});
        l.semantic.insert(l.semantic.end(), {0, 0});
      }
    }
    // Unequal member scales move the raw centroid off m; rescale each pair so the
    // centroid stays on m (pairs share a scale, so the mean is exactly along m).
    const auto rep = cosine_loss(e, Matrix::Zero(e.rows(), 1), l, cfg);
    REQUIRE(rep.l_var == 0.0);
    REQUIRE(rep.l_dist == 0.0);

    const auto stats = cluster_stats(e, l);
    const double bound = 2.0 * std::acos(cfg.delta_v);
    for (Index i = 0; i < e.rows(); ++i) {
      for (Index j = 0; j < e.rows(); ++j) {
        if (l.instance[static_cast<std::size_t>(i)] != l.instance[static_cast<std::size_t>(j)]) continue;
        const double angle = std::acos(std::clamp(cosine_similarity(e.row(i), e.row(j)), -1.0, 1.0));
        CHECK(angle <= bound + 1e-9);
      }
    }
    for (Index a = 0; a < stats.n_clusters; ++a) {
      for (Index b = 0; b < stats.n_clusters; ++b) {
        if (a != b) CHECK(cosine_similarity(stats.centroids.row(a), stats.centroids.row(b)) <= cfg.delta_d);
      }
    }
  }
}

TEST_CASE("hinge monotonicity in the margins") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    auto inst = gen::loss_instance(rng, 20, 2 + t % 3, 3, 2);
    double prev_var = -1.0;
    for (double dv : {0.3, 0.5, 0.7, 0.9, 1.0}) {
      LossConfig cfg;
      cfg.delta_v = dv;
      cfg.delta_d = 0.0;
      const double v = cosine_loss(inst.emb, inst.logits, inst.labels, cfg).l_var;
      CHECK(v >= prev_var);
      prev_var = v;
    }
    double prev_dist = -1.0;
    for (double dd : {0.9, 0.5, 0.1, -0.3, -0.9}) {
      LossConfig cfg;
      cfg.delta_v = 0.95;
      cfg.delta_d = dd;
      const double d = cosine_loss(inst.emb, inst.logits, inst.labels, cfg).l_dist;
      CHECK(d >= prev_dist);
      prev_dist = d;
    }
  }
}

TEST_CASE("permuting points permutes gradient rows") {
  std::mt19937_64 rng(43);
  for (LossKind kind : {LossKind::cosine, LossKind::euclidean}) {
    for (int t = 0; t < 10; ++t) {
      auto inst = gen::loss_instance(rng, 16, 3, 4, 3);
      LossConfig cfg;
      cfg.delta_v = kind == LossKind::cosine ? 0.9 : 0.5;
      cfg.delta_d = kind == LossKind::cosine ? 0.2 : 2.0;
      const auto fn = loss_function(kind);
      const auto base = fn(inst.emb, inst.logits, inst.labels, cfg);

      std::vector<std::size_t> perm(16);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      SceneLabels pl;
      for (auto p : perm) {
        pl.instance.push_back(inst.labels.instance[p]);
        pl.semantic.push_back(inst.labels.semantic[p]);
      }
      const auto r = fn(select_rows(inst.emb, perm), select_rows(inst.logits, perm), pl, cfg);
      CHECK(r.l_var == doctest::Approx(base.l_var).epsilon(1e-12));
      CHECK(r.l_dist == doctest::Approx(base.l_dist).epsilon(1e-12));
      CHECK(r.l_sem == doctest::Approx(base.l_sem).epsilon(1e-12));
      CHECK(r.l_reg == doctest::Approx(base.l_reg).epsilon(1e-12));
      for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto pi = static_cast<Index>(perm[i]);
        CHECK((r.grad_embeddings.row(static_cast<Index>(i)) - base.grad_embeddings.row(pi)).cwiseAbs().maxCoeff() <
              1e-12);
        CHECK((r.grad_logits.row(static_cast<Index>(i)) - base.grad_logits.row(pi)).cwiseAbs().maxCoeff() < 1e-15);
      }
    }
  }
}

TEST_CASE("noise points contribute only to the semantic term") {
  Matrix e = rows({{1, 0}, {0.9, 0.1}, {-5, 3}});
  SceneLabels l = labels_of({0, 0, -1});
  LossConfig cfg;
  const auto r = cosine_loss(e, Matrix::Zero(3, 2), l, cfg);
  CHECK(r.grad_embeddings.row(2).isZero());
  const auto without = cosine_loss(e.topRows(2), Matrix::Zero(2, 2), labels_of({0, 0}), cfg);
  CHECK(r.l_var == doctest::Approx(without.l_var));
}
