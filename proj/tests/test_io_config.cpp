#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "cte/config.hpp"
#include "cte/io.hpp"
#include "cte/svg.hpp"

using namespace cte;

namespace {

fs::path tmp_dir() {
  fs::path p = fs::temp_directory_path() / "cte_io_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("topic model round trip is bitwise exact") {
  auto m = sample_topic_model(3, 12, 1.0, 5, LengthSpec::poisson(8.0));
  fs::path p = tmp_dir() / "model.json";
  save_topic_model(m, p);
  TopicModel back = load_topic_model(p);
  REQUIRE(back.K == m.K);
  REQUIRE(back.V == m.V);
  REQUIRE((back.O.array() == m.O.array()).all());
  REQUIRE(back.prior.pure_topic());
  REQUIRE(back.length.kind == LengthSpec::Kind::PoissonTruncated);
}

TEST_CASE("finite-support prior round trip") {
  auto m = sample_topic_model(2, 5, 1.0, 6);
  Eigen::VectorXd a(2), b(2);
  a << 0.3, 0.7;
  b << 0.6, 0.4;
  m.prior = PriorSpec::finite_support({a, b}, {0.25, 0.75});
  fs::path p = tmp_dir() / "model_fs.json";
  save_topic_model(m, p);
  TopicModel back = load_topic_model(p);
  REQUIRE(back.prior.atoms.size() == 2);
  REQUIRE(back.prior.atoms[0](1) == 0.7);
  REQUIRE(back.prior.atom_probs[1] == 0.75);
}

TEST_CASE("corpus JSONL round trip with topics") {
  auto m = sample_topic_model(3, 8, 1.0, 7, LengthSpec::fixed(5));
  Corpus c = sample_corpus(m, 20, 9);
  fs::path p = tmp_dir() / "corpus.jsonl";
  save_corpus(c, p);
  Corpus back = load_corpus(p);
  REQUIRE(back.size() == c.size());
  for (int i = 0; i < c.size(); ++i) {
    REQUIRE(back.docs[static_cast<std::size_t>(i)] ==
            c.docs[static_cast<std::size_t>(i)]);
    REQUIRE(back.topics[static_cast<std::size_t>(i)] ==
            c.topics[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("corpus reader accepts bare token arrays") {
  fs::path p = tmp_dir() / "bare.jsonl";
  write_file(p, "[0,1,2]\n[3,4]\n");
  Corpus c = load_corpus(p);
  REQUIRE(c.size() == 2);
  REQUIRE(c.docs[0].tokens == std::vector<TokenId>{0, 1, 2});
  REQUIRE(c.topics.empty());
}

TEST_CASE("dataset round trip preserves pairs and provenance") {
  auto m = sample_topic_model(2, 6, 1.0, 8, LengthSpec::fixed(4));
  Corpus c = sample_corpus(m, 15, 11);
  auto ds = build_paired_permutation(c, SplitMode::RandomPartition, 13);
  fs::path p = tmp_dir() / "pairs.jsonl";
  save_dataset(ds, p);
  auto back = load_dataset(p);
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.provenance.corpus_hash == ds.provenance.corpus_hash);
  REQUIRE(back.provenance.discarded_collisions == ds.provenance.discarded_collisions);
  for (int i = 0; i < ds.size(); ++i) {
    REQUIRE(back.pairs[static_cast<std::size_t>(i)].first ==
            ds.pairs[static_cast<std::size_t>(i)].first);
    REQUIRE(back.pairs[static_cast<std::size_t>(i)].label ==
            ds.pairs[static_cast<std::size_t>(i)].label);
  }
}

TEST_CASE("checkpoint round trip restores predictions exactly") {
  auto net = ContrastiveNet::make({ModelKind::Bilinear, 6, 2, 8, 4, true, 0.0, 21});
  fs::path p = tmp_dir() / "ckpt.json";
  save_checkpoint(net, 17, "abc123", p);
  LoadedCheckpoint back = load_checkpoint(p);
  REQUIRE(back.epoch == 17);
  REQUIRE(back.config_hash == "abc123");
  Rng rng(3);
  Eigen::MatrixXd X1(4, 6), X2(4, 6);
  for (int i = 0; i < X1.size(); ++i) X1.data()[i] = double(rng.uniform_below(3));
  for (int i = 0; i < X2.size(); ++i) X2.data()[i] = double(rng.uniform_below(3));
  Eigen::VectorXd a = net.predict_prob(X1, X2);
  Eigen::VectorXd b = back.net.predict_prob(X1, X2);
  REQUIRE((a.array() == b.array()).all());
}

TEST_CASE("landmark set round trip preserves L and decode behavior") {
  auto m = sample_topic_model(3, 10, 1.0, 31, LengthSpec::fixed(6));
  LandmarkSet set = sampled_landmarks(m, 9, 3, 41);
  fs::path p = tmp_dir() / "landmarks.json";
  save_landmarks(set, p);
  LandmarkSet back = load_landmarks(p);
  REQUIRE(back.num_landmarks() == set.num_landmarks());
  REQUIRE((back.L().array() == set.L().array()).all());
  Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(9, 0.1, 1.0);
  REQUIRE((back.decode(phi) - set.decode(phi)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("config: hash is stable and seed is mandatory") {
  json j;
  j["model"] = {{"K", 3}, {"V", 50}};
  j["seed"] = 7;
  auto cfg = ExperimentConfig::from_json(j);
  cfg.validate();
  auto cfg2 = ExperimentConfig::from_json(j);
  REQUIRE(cfg.hash() == cfg2.hash());

  json no_seed;
  no_seed["model"] = {{"K", 3}, {"V", 50}};
  auto bad = ExperimentConfig::from_json(no_seed);
  REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("config: validation rejects bad fields") {
  json j;
  j["seed"] = 1;
  j["data"] = {{"scheme", "bogus"}};
  auto cfg = ExperimentConfig::from_json(j);
  REQUIRE_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("manifest lists artifacts with content hashes") {
  fs::path dir = tmp_dir();
  write_file(dir / "a.csv", "x,y\n1,2\n");
  RunManifest m;
  m.config_hash = "deadbeef";
  m.version = "0.1.0";
  m.add_artifact(dir / "a.csv");
  m.save(dir / "manifest.json");
  RunManifest back = RunManifest::load(dir / "manifest.json");
  REQUIRE(back.config_hash == "deadbeef");
  REQUIRE(back.artifacts.size() == 1);
  REQUIRE(back.artifacts[0].first == "a.csv");
  REQUIRE(back.artifacts[0].second == hash_hex(file_hash(dir / "a.csv")));
}

TEST_CASE("dir lock refuses a second owner") {
  fs::path dir = tmp_dir() / "locked_run";
  fs::remove_all(dir);
  {
    DirLock lock(dir);
    REQUIRE_THROWS_AS(DirLock(dir), Error);
  }
  // released on destruction
  DirLock again(dir);
}

TEST_CASE("svg output is deterministic") {
  svg::Series s{"acc", {1, 2, 3}, {0.5, 0.7, 0.9}};
  std::string a = svg::line_chart("t", "x", "y", {s});
  std::string b = svg::line_chart("t", "x", "y", {s});
  REQUIRE(a == b);
  REQUIRE(a.find("<svg") == 0);
  std::string h = svg::heatmap("h", {"r1", "r2"}, {"c1"}, {{0.1}, {0.9}}, "rows", "cols");
  REQUIRE(h.find("<svg") == 0);
}

TEST_CASE("fnv hashing is stable") {
  REQUIRE(fnv1a64(std::string("")) == 0xcbf29ce484222325ULL);
  REQUIRE(fnv1a64(std::string("a")) == 0xaf63dc4c8601ec8cULL);
}
