#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cte/embedding.hpp"

using namespace cte;

namespace {

TopicModel deterministic_two_topic() {
  TopicModel m;
  m.K = 2;
  m.V = 2;
  m.O.resize(2, 2);
  m.O << 1.0, 0.0, 0.0, 1.0;
  m.prior = PriorSpec::pure_topic_uniform(2);
  m.length = LengthSpec::fixed(2);
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("landmark embedding: one-half prediction maps to odds 1") {
  std::vector<Document> landmarks{Document{{0}}, Document{{1}}};
  auto half = [](const Document&, const Document&) { return 0.5; };
  Embedding e = landmark_embed(half, landmarks, Document{{0}});
  REQUIRE(e.values(0) == 1.0);
  REQUIRE(e.values(1) == 1.0);
}

TEST_CASE("landmark embedding: clamp ceiling produces f_max odds") {
  std::vector<Document> landmarks{Document{{0}}};
  auto high = [](const Document&, const Document&) { return 0.9999; };
  Embedding e = landmark_embed(high, landmarks, Document{{0}}, 0.99);
  REQUIRE(e.values(0) == Catch::Approx(99.0).margin(1e-9));
  REQUIRE(e.f_max == 0.99);
}

TEST_CASE("landmark embedding with exact f* reproduces the oracle embedding") {
  // all f* strictly inside (eps, f_max), so neither clamp is active
  TopicModel m;
  m.K = 2;
  m.V = 2;
  m.O.resize(2, 2);
  m.O << 0.75, 0.25, 0.25, 0.75;
  m.prior = PriorSpec::pure_topic_uniform(2);
  m.length = LengthSpec::fixed(2);
  m.validate();
  std::vector<Document> landmarks{Document{{0}}, Document{{1}}, Document{{0, 0}}};
  auto fstar_fn = [&m](const Document& x, const Document& l) {
    return f_star(m, x, l);
  };
  Document x{{0}};
  Embedding learned = landmark_embed(fstar_fn, landmarks, x);
  Embedding oracle = oracle_embed(m, landmarks, x);
  REQUIRE((learned.values - oracle.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("oracle embedding: one topic gives all ones") {
  TopicModel m;
  m.K = 1;
  m.V = 3;
  m.O.resize(1, 3);
  m.O << 0.2, 0.3, 0.5;
  m.prior = PriorSpec::pure_topic_uniform(1);
  m.length = LengthSpec::fixed(2);
  m.validate();
  std::vector<Document> landmarks{Document{{0}}, Document{{1, 2}}};
  Embedding e = oracle_embed(m, landmarks, Document{{2, 2}});
  REQUIRE(e.values(0) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(e.values(1) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("oracle embedding: hand-computed joint/product values") {
  auto m = deterministic_two_topic();
  std::vector<Document> landmarks{Document{{0}}, Document{{1}}};
  Embedding e = oracle_embed(m, landmarks, Document{{0}});
  REQUIRE(e.values(0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(e.values(1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("oracle embedding equals L^T eta") {
  TopicModel m;
  m.K = 2;
  m.V = 4;
  m.O.resize(2, 4);
  m.O << 0.6, 0.2, 0.2, 0.0, 0.2, 0.6, 0.0, 0.2;
  m.prior = PriorSpec::pure_topic_uniform(2);
  m.length = LengthSpec::fixed(2);
  m.validate();
  LandmarkSet set = anchor_landmarks(m, 2);
  MonomialBasis const& basis = *set.basis();
  for (const Document& x : {Document{{0}}, Document{{1, 2}}, Document{{3, 3}}}) {
    Embedding e = oracle_embed(m, set.landmarks(), x);
    Eigen::VectorXd eta = eta_vector(m, x, basis);
    Eigen::VectorXd viaL = set.L().transpose() * eta;
    REQUIRE((e.values - viaL).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("tower embedding: zero tower maps every document to zero") {
  auto net = ContrastiveNet::make({ModelKind::Bilinear, 4, 1, 6, 3, false, 0.0, 3});
  net.unflatten(Eigen::VectorXd::Zero(net.param_count()));
  Embedding e = tower_embed(net, Document{{0, 1, 2}});
  REQUIRE(e.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tower embedding depends on counts only") {
  auto net = ContrastiveNet::make({ModelKind::Bilinear, 4, 2, 6, 3, false, 0.0, 5});
  Embedding a = tower_embed(net, Document{{0, 1, 1, 3}});
  Embedding b = tower_embed(net, Document{{1, 3, 0, 1}});
  REQUIRE((a.values.array() == b.values.array()).all());
}

TEST_CASE("tower embeddings stay finite across sampled documents") {
  auto model = sample_topic_model(3, 10, 1.0, 7, LengthSpec::poisson(8.0));
  auto net = ContrastiveNet::make({ModelKind::Bilinear, 10, 2, 16, 4, false, 0.0, 7});
  Corpus c = sample_corpus(model, 2000, 9);
  Eigen::MatrixXd F = tower_embed_all(net, c.docs);
  REQUIRE(F.allFinite());
}

TEST_CASE("embeddings are equivariant under landmark permutation") {
  auto m = deterministic_two_topic();
  std::vector<Document> landmarks{Document{{0}}, Document{{1}}, Document{{0, 0}}};
  std::vector<Document> swapped{Document{{0, 0}}, Document{{0}}, Document{{1}}};
  Document x{{0, 0}};
  Embedding a = oracle_embed(m, landmarks, x);
  Embedding b = oracle_embed(m, swapped, x);
  REQUIRE(a.values(0) == b.values(1));
  REQUIRE(a.values(1) == b.values(2));
  REQUIRE(a.values(2) == b.values(0));
}

TEST_CASE("taylor link: exp(s) is within 3% of 1+s for |s| < 0.2") {
  for (double s = -0.2; s <= 0.2; s += 0.01) {
    REQUIRE(std::abs(std::exp(s) - (1.0 + s)) / std::exp(s) <= 0.03);
  }
}

TEST_CASE("f_max from p_min") {
  REQUIRE(f_max_from_p_min(0.25) == Catch::Approx(0.8).margin(1e-15));
  REQUIRE_THROWS_AS(f_max_from_p_min(0.0), Error);
}
