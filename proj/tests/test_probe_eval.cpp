#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cte/eval.hpp"
#include "ref_oracles.hpp"

using namespace cte;

TEST_CASE("probe: exact linear targets interpolate at ridge 0") {
  Rng rng(1);
  Eigen::MatrixXd X(20, 3);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform01();
  Eigen::VectorXd w_true(3);
  w_true << 1.0, -2.0, 0.5;
  Eigen::VectorXd y = X * w_true;
  y.array() += 0.25;
  ProbeModel m = fit_linear_probe(X, y, 0.0);
  Eigen::VectorXd resid = m.predict(X).col(0) - y;
  REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("probe: infinite ridge shrinks weights to zero") {
  Rng rng(2);
  Eigen::MatrixXd X(15, 2);
  Eigen::VectorXd y(15);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform01();
  for (int i = 0; i < 15; ++i) y(i) = rng.uniform01();
  ProbeModel m = fit_linear_probe(X, y, 1e12);
  REQUIRE(m.W.cwiseAbs().maxCoeff() < 1e-8);
  REQUIRE(std::abs(m.b(0) - y.mean()) < 1e-6);
}

TEST_CASE("probe: two-point ridge matches the closed form") {
  Eigen::MatrixXd X(2, 1);
  X << 1.0, 3.0;
  Eigen::VectorXd y(2);
  y << 2.0, 4.0;
  ProbeModel m = fit_linear_probe(X, y, 1.0);
  // (A^T A + diag(1,0)) [w;b] = A^T y with A = [[1,1],[3,1]]
  REQUIRE(m.W(0, 0) == Catch::Approx(2.0 / 3.0).margin(1e-12));
  REQUIRE(m.b(0) == Catch::Approx(5.0 / 3.0).margin(1e-12));
}

TEST_CASE("probe: singular system with ridge 0 is reported") {
  Eigen::MatrixXd X(4, 3);
  X << 1, 1, 2, 2, 2, 4, 3, 3, 6, 4, 4, 8;  // col3 = col1 + col2 dependent
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  REQUIRE_THROWS_AS(fit_linear_probe(X, y, 0.0), Error);
}

TEST_CASE("map recovery: exact posteriors on separable topics") {
  std::vector<Eigen::VectorXd> scores;
  std::vector<int> truth;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    p(k) = 1.0;
    scores.push_back(p);
    truth.push_back(k);
  }
  REQUIRE(map_topic_recovery(scores, truth) == 1.0);
}

TEST_CASE("map recovery: uniform posteriors hit chance level") {
  Rng rng(3);
  std::vector<Eigen::VectorXd> scores;
  std::vector<int> truth;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    scores.push_back(Eigen::VectorXd::Constant(4, 0.25));
    truth.push_back(static_cast<int>(rng.uniform_below(4)));
  }
  double acc = map_topic_recovery(scores, truth);  // ties resolve to topic 0
  REQUIRE(std::abs(acc - 0.25) < 0.01);
}

TEST_CASE("map recovery: invariant to order and positive scaling") {
  Rng rng(4);
  std::vector<Eigen::VectorXd> scores;
  std::vector<int> truth;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd p = ref::random_simplex(5, rng);
    scores.push_back(p);
    truth.push_back(static_cast<int>(rng.uniform_below(5)));
  }
  double base = map_topic_recovery(scores, truth);
  auto scaled = scores;
  for (auto& s : scaled) s *= 17.3;
  REQUIRE(map_topic_recovery(scaled, truth) == base);
  std::vector<Eigen::VectorXd> rev(scores.rbegin(), scores.rend());
  std::vector<int> rev_truth(truth.rbegin(), truth.rend());
  REQUIRE(map_topic_recovery(rev, rev_truth) == base);
}

TEST_CASE("tv separation: identical, disjoint, and hand-computed") {
  TopicModel m;
  m.K = 2;
  m.V = 2;
  m.prior = PriorSpec::pure_topic_uniform(2);
  m.length = LengthSpec::fixed(2);

  m.O.resize(2, 2);
  m.O << 0.6, 0.4, 0.6, 0.4;
  REQUIRE(topic_tv_separation(m) == Catch::Approx(0.0).margin(1e-15));

  m.O << 1.0, 0.0, 0.0, 1.0;
  REQUIRE(topic_tv_separation(m) == Catch::Approx(1.0).margin(1e-15));

  m.O << 0.75, 0.25, 0.25, 0.75;
  REQUIRE(topic_tv_separation(m) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("tv separation: symmetric and bounded") {
  auto m = sample_topic_model(4, 30, 1.0, 6);
  double tv = topic_tv_separation(m);
  REQUIRE(tv >= 0.0);
  REQUIRE(tv <= 1.0);
  // permuting topic rows leaves the mean pairwise distance unchanged
  TopicModel p = m;
  p.O.row(0) = m.O.row(3);
  p.O.row(3) = m.O.row(0);
  REQUIRE(topic_tv_separation(p) == Catch::Approx(tv).margin(1e-14));
}

TEST_CASE("estimate_risk: oracle embedding with full-rank L is riskless") {
  auto model = sample_topic_model(3, 8, 1.0, 9, LengthSpec::fixed(4));
  LandmarkSet set = sampled_landmarks(model, 10, 2, 42);
  REQUIRE(set.full_row_rank());
  auto draw = [&model](std::uint64_t tag, int n) {
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(tag, static_cast<std::uint64_t>(i)));
      docs.push_back(sample_document_with_length(model, sample_w(model, rng), 2, rng));
    }
    return docs;
  };
  auto fit_docs = draw(1, 200);
  auto eval_docs = draw(2, 200);
  Eigen::VectorXd theta(3);
  theta << 1.0, -0.5, 2.0;
  auto targets = [&](const std::vector<Document>& docs) {
    Eigen::VectorXd t(static_cast<int>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      t(static_cast<int>(i)) = st_posterior(model, docs[i]).dot(theta);
    }
    return t;
  };
  Eigen::MatrixXd Pf = oracle_embed_all(model, set.landmarks(), fit_docs);
  Eigen::MatrixXd Pe = oracle_embed_all(model, set.landmarks(), eval_docs);
  double risk = estimate_risk(Pf, targets(fit_docs), Pe, targets(eval_docs));
  REQUIRE(risk < 1e-10);
}

TEST_CASE("estimate_risk: constant embedding pays the target variance") {
  auto model = sample_topic_model(2, 4, 1.0, 11, LengthSpec::fixed(4));
  Eigen::VectorXd theta(2);
  theta << 1.0, 0.0;
  // enumerate the exact variance of eta^T theta over mu_1 at half length 2
  double mean = 0.0, second = 0.0;
  for (const auto& x : ref::all_docs(4, 2)) {
    double p = marginal_prob(model, x, Half::First);
    double t = st_posterior(model, x).dot(theta);
    mean += p * t;
    second += p * t * t;
  }
  double variance = second - mean * mean;

  auto draw = [&model](std::uint64_t tag, int n) {
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(tag, static_cast<std::uint64_t>(i)));
      docs.push_back(sample_document_with_length(model, sample_w(model, rng), 2, rng));
    }
    return docs;
  };
  auto fit_docs = draw(21, 4000);
  auto eval_docs = draw(22, 4000);
  auto targets = [&](const std::vector<Document>& docs) {
    Eigen::VectorXd t(static_cast<int>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      t(static_cast<int>(i)) = st_posterior(model, docs[i]).dot(theta);
    }
    return t;
  };
  Eigen::MatrixXd Pf = Eigen::MatrixXd::Ones(4000, 1);
  double risk = estimate_risk(Pf, targets(fit_docs), Pf, targets(eval_docs));
  REQUIRE(risk == Catch::Approx(variance).margin(0.05 * variance + 0.002));
}

TEST_CASE("estimate_risk: invariant under invertible re-parameterization") {
  Rng rng(31);
  Eigen::MatrixXd Phi(100, 3), T(3, 3);
  Eigen::VectorXd y(100);
  for (int i = 0; i < Phi.size(); ++i) Phi.data()[i] = rng.uniform01();
  for (int i = 0; i < 100; ++i) y(i) = rng.uniform01();
  T << 2, 0.3, 0, 0.1, 1, 0, 0, -0.4, 1.5;
  Eigen::MatrixXd Phi2 = Phi * T;
  double a = estimate_risk(Phi.topRows(50), y.head(50), Phi.bottomRows(50), y.tail(50));
  double b = estimate_risk(Phi2.topRows(50), y.head(50), Phi2.bottomRows(50), y.tail(50));
  REQUIRE(a == Catch::Approx(b).margin(1e-10));
}

TEST_CASE("error bound: quadruples when theta* doubles") {
  double b1 = error_bound_value(1.0, 0.5, 0.9, 0.01, 0.05, 50);
  double b4 = error_bound_value(4.0, 0.5, 0.9, 0.01, 0.05, 50);
  REQUIRE(b4 == Catch::Approx(4.0 * b1).margin(1e-12));
}

TEST_CASE("error bound: oracle plug-in predictor gives eps 0 and holds") {
  auto model = sample_topic_model(2, 6, 1.0, 13, LengthSpec::fixed(4));
  LandmarkSet set = sampled_landmarks(model, 20, 2, 7);
  Eigen::VectorXd theta(2);
  theta << 0.7, -0.2;
  // ingredients computed with fhat = f*: eps_n = 0 by construction
  double sigma_min = set.min_singular() / std::sqrt(20.0);
  double bound = error_bound_value(theta.squaredNorm(), sigma_min, 0.995, 0.0,
                                   0.05, 20);
  REQUIRE(bound > 0.0);
  // risk of the exact oracle embedding is ~0, so the bound trivially holds
  auto draw = [&model](std::uint64_t tag, int n) {
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(tag, static_cast<std::uint64_t>(i)));
      docs.push_back(sample_document_with_length(model, sample_w(model, rng), 2, rng));
    }
    return docs;
  };
  auto fit_docs = draw(3, 300);
  auto eval_docs = draw(4, 300);
  auto targets = [&](const std::vector<Document>& docs) {
    Eigen::VectorXd t(static_cast<int>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      t(static_cast<int>(i)) = st_posterior(model, docs[i]).dot(theta);
    }
    return t;
  };
  Eigen::MatrixXd Pf = oracle_embed_all(model, set.landmarks(), fit_docs);
  Eigen::MatrixXd Pe = oracle_embed_all(model, set.landmarks(), eval_docs);
  double risk = estimate_risk(Pf, targets(fit_docs), Pe, targets(eval_docs));
  REQUIRE(risk <= bound);
}

TEST_CASE("spearman: monotone and anti-monotone sequences") {
  Eigen::VectorXd a(5), b(5), c(5);
  a << 1, 2, 3, 4, 5;
  b << 10, 20, 30, 40, 50;
  c << 5, 4, 3, 2, 1;
  REQUIRE(spearman_correlation(a, b) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(spearman_correlation(a, c) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("learning curve: full-pool replicates have zero CI width") {
  Rng rng(41);
  Eigen::MatrixXd X(30, 4), Xe(50, 4);
  std::vector<int> y, ye;
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform01();
  for (int i = 0; i < Xe.size(); ++i) Xe.data()[i] = rng.uniform01();
  for (int i = 0; i < 30; ++i) y.push_back(static_cast<int>(rng.uniform_below(3)));
  for (int i = 0; i < 50; ++i) ye.push_back(static_cast<int>(rng.uniform_below(3)));
  auto reports = learning_curve(X, y, Xe, ye, 3, {30}, 10, 1e-6, 5);
  for (const auto& r : reports) {
    if (r.task == "probe-mean") REQUIRE(r.ci_half == 0.0);
  }
}

TEST_CASE("learning curve: chance-level embedding stays near 1/K") {
  Rng rng(43);
  const int K = 4;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(400, 3);
  Eigen::MatrixXd Xe = Eigen::MatrixXd::Zero(1000, 3);
  std::vector<int> y, ye;
  for (int i = 0; i < 400; ++i) y.push_back(static_cast<int>(rng.uniform_below(K)));
  for (int i = 0; i < 1000; ++i) ye.push_back(static_cast<int>(rng.uniform_below(K)));
  auto reports = learning_curve(X, y, Xe, ye, K, {10, 100}, 10, 1e-6, 7);
  for (const auto& r : reports) {
    if (r.task == "probe-mean") {
      REQUIRE(std::abs(r.metric - 1.0 / K) < 0.06);
    }
  }
}

TEST_CASE("learning curve: more labels do not hurt on a separable task") {
  Rng rng(47);
  const int K = 3;
  auto make = [&rng, K](int n, Eigen::MatrixXd& X, std::vector<int>& y) {
    X.resize(n, K);
    y.clear();
    for (int i = 0; i < n; ++i) {
      int k = static_cast<int>(rng.uniform_below(K));
      for (int j = 0; j < K; ++j) X(i, j) = (j == k ? 1.0 : 0.0) + 0.3 * rng.uniform01();
      y.push_back(k);
    }
  };
  Eigen::MatrixXd X, Xe;
  std::vector<int> y, ye;
  make(600, X, y);
  make(800, Xe, ye);
  auto reports = learning_curve(X, y, Xe, ye, K, {10, 300}, 10, 1e-6, 9);
  double acc10 = -1, acc300 = -1, ci10 = 0;
  for (const auto& r : reports) {
    if (r.task == "probe-mean" && r.n_labeled == 10) acc10 = r.metric, ci10 = r.ci_half;
    if (r.task == "probe-mean" && r.n_labeled == 300) acc300 = r.metric;
  }
  REQUIRE(acc10 <= acc300 + ci10 + 0.02);
}
