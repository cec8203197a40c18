#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cte/contrastive.hpp"
#include "cte/io.hpp"
#include "cte/learner.hpp"
#include "cte/topic_model.hpp"

namespace cte {

// One experiment = one JSON config file. CLI flags only choose the config
// path, subcommand, output directory, and overwrite behavior.
struct ExperimentConfig {
  // model
  int K = 5;
  int V = 200;
  double alpha = 1.0;
  double lambda = 20.0;      // Poisson length; <= 0 selects fixed_length
  int fixed_length = 0;
  std::string prior = "uniform-single-topic";  // or "symmetric-dirichlet"
  double prior_beta = 0.0;
  double anchor_mass = 0.0;  // > 0 selects the anchored model family

  // data
  int corpus_size = 3000;
  std::string scheme = "paired-permutation";  // or "algorithm1"
  int algorithm1_pairs = 0;
  std::string split_mode = "random-partition";  // or "contiguous"
  double resample_rate = 1.0;
  int resample_period = 0;  // overrides rate when >= 1

  // learner
  std::string learner_kind = "bilinear";  // or "pair-mlp"
  int depth = 3;
  int width = 128;
  int embed_dim = 32;
  int epochs = 30;
  int batch_size = 256;
  double lr = 1e-3;
  double momentum = 0.009;
  double weight_decay = 1e-4;
  double rmsprop_alpha = 0.99;
  int lr_halve_epoch = 250;
  bool dropout = false;
  bool batchnorm = false;
  int checkpoint_every = 0;

  // embedding
  std::string embed_mode = "landmark";  // "tower" | "oracle"
  int num_landmarks = 200;
  std::string landmark_strategy = "sampled";  // "anchor" | "file"
  int landmark_length = 10;
  int anchor_d_o = 2;
  double f_max = kDefaultFmax;

  // eval
  std::vector<int> n_grid{10, 50, 200};
  int replicates = 10;
  double delta = 0.05;
  int n_test = 1000;
  double ridge = 1e-6;

  std::uint64_t seed = 0;
  bool seed_set = false;

  int effective_period() const {
    return resample_period >= 1 ? resample_period : period_from_rate(resample_rate);
  }

  int half_length() const {
    int full = fixed_length > 0 ? fixed_length
                                : std::max(2, static_cast<int>(std::llround(lambda)));
    return (full + 1) / 2;
  }

  PairScheme pair_scheme() const {
    return scheme == "algorithm1" ? PairScheme::Algorithm1
                                  : PairScheme::PairedPermutation;
  }

  SplitMode split() const {
    return split_mode == "contiguous" ? SplitMode::Contiguous
                                      : SplitMode::RandomPartition;
  }

  ModelKind model_kind() const {
    return learner_kind == "pair-mlp" ? ModelKind::PairMlp : ModelKind::Bilinear;
  }

  void validate() const {
    CTE_CHECK(seed_set, "config: a seed is mandatory");
    CTE_CHECK(K >= 1 && V >= 2, "config: bad model dims");
    CTE_CHECK(alpha > 0.0, "config: alpha must be positive");
    CTE_CHECK(lambda > 0.0 || fixed_length >= 2,
              "config: need a positive lambda or a fixed length >= 2");
    CTE_CHECK(corpus_size >= 1, "config: corpus_size must be >= 1");
    CTE_CHECK(scheme == "paired-permutation" || scheme == "algorithm1",
              "config: unknown scheme " + scheme);
    CTE_CHECK(split_mode == "random-partition" || split_mode == "contiguous",
              "config: unknown split_mode " + split_mode);
    CTE_CHECK(resample_period >= 1 ||
                  (resample_rate > 0.0 && resample_rate <= 1.0),
              "config: resample rate in (0,1] or period >= 1");
    CTE_CHECK(learner_kind == "bilinear" || learner_kind == "pair-mlp",
              "config: unknown learner kind " + learner_kind);
    CTE_CHECK(epochs >= 0 && batch_size >= 1, "config: bad training params");
    CTE_CHECK(embed_mode == "landmark" || embed_mode == "tower" ||
                  embed_mode == "oracle",
              "config: unknown embed mode " + embed_mode);
    CTE_CHECK(landmark_strategy == "sampled" || landmark_strategy == "anchor" ||
                  landmark_strategy == "file",
              "config: unknown landmark strategy " + landmark_strategy);
    CTE_CHECK(f_max > 0.0 && f_max < 1.0, "config: f_max in (0,1)");
    CTE_CHECK(delta > 0.0 && delta < 1.0, "config: delta in (0,1)");
    CTE_CHECK(replicates >= 1 && n_test >= 1, "config: bad eval params");
  }

  TopicModel build_model() const {
    LengthSpec len = fixed_length > 0 ? LengthSpec::fixed(fixed_length)
                                      : LengthSpec::poisson(lambda);
    PriorSpec pr = prior == "symmetric-dirichlet"
                       ? PriorSpec::symmetric_dirichlet(prior_beta)
                       : PriorSpec{};
    if (anchor_mass > 0.0) {
      return sample_anchored_topic_model(K, V, alpha, anchor_mass,
                                         derive_seed(seed, 0x300dULL), len, pr);
    }
    return sample_topic_model(K, V, alpha, derive_seed(seed, 0x300dULL), len, pr);
  }

  NetConfig net_config() const {
    NetConfig c;
    c.kind = model_kind();
    c.vocab = V;
    c.depth = depth;
    c.width = width;
    c.embed_dim = embed_dim;
    c.batchnorm = batchnorm;
    c.dropout = dropout ? 0.5 : 0.0;
    c.init_seed = derive_seed(seed, 0x1217ULL);
    return c;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.seed = derive_seed(seed, 0x7124ULL);
    t.opt.lr = lr;
    t.opt.momentum = momentum;
    t.opt.weight_decay = weight_decay;
    t.opt.alpha = rmsprop_alpha;
    t.opt.lr_halve_epoch = lr_halve_epoch;
    t.checkpoint_every = checkpoint_every;
    return t;
  }

  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  static ExperimentConfig load(const fs::path& path) {
    return from_json(json::parse(read_file(path)));
  }

  std::string hash() const { return hash_hex(fnv1a64(to_json().dump())); }
};

inline json ExperimentConfig::to_json() const {
  json j;
  j["model"] = {{"K", K},
                {"V", V},
                {"alpha", alpha},
                {"lambda", lambda},
                {"fixed_length", fixed_length},
                {"prior", prior},
                {"prior_beta", prior_beta},
                {"anchor_mass", anchor_mass}};
  j["data"] = {{"corpus_size", corpus_size},
               {"scheme", scheme},
               {"algorithm1_pairs", algorithm1_pairs},
               {"split_mode", split_mode},
               {"resample_rate", resample_rate},
               {"resample_period", resample_period}};
  j["learner"] = {{"kind", learner_kind},
                  {"depth", depth},
                  {"width", width},
                  {"embed_dim", embed_dim},
                  {"epochs", epochs},
                  {"batch_size", batch_size},
                  {"lr", lr},
                  {"momentum", momentum},
                  {"weight_decay", weight_decay},
                  {"rmsprop_alpha", rmsprop_alpha},
                  {"lr_halve_epoch", lr_halve_epoch},
                  {"dropout", dropout},
                  {"batchnorm", batchnorm},
                  {"checkpoint_every", checkpoint_every}};
  j["embedding"] = {{"mode", embed_mode},
                    {"num_landmarks", num_landmarks},
                    {"strategy", landmark_strategy},
                    {"landmark_length", landmark_length},
                    {"anchor_d_o", anchor_d_o},
                    {"f_max", f_max}};
  j["eval"] = {{"n_grid", n_grid},
               {"replicates", replicates},
               {"delta", delta},
               {"n_test", n_test},
               {"ridge", ridge}};
  j["seed"] = seed;
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  auto get = [](const json& obj, const char* key, auto fallback) {
    using T = decltype(fallback);
    if (obj.contains(key)) return obj.at(key).get<T>();
    return fallback;
  };
  if (j.contains("model")) {
    const auto& m = j["model"];
    c.K = get(m, "K", c.K);
    c.V = get(m, "V", c.V);
    c.alpha = get(m, "alpha", c.alpha);
    c.lambda = get(m, "lambda", c.lambda);
    c.fixed_length = get(m, "fixed_length", c.fixed_length);
    c.prior = get(m, "prior", c.prior);
    c.prior_beta = get(m, "prior_beta", c.prior_beta);
    c.anchor_mass = get(m, "anchor_mass", c.anchor_mass);
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    c.corpus_size = get(d, "corpus_size", c.corpus_size);
    c.scheme = get(d, "scheme", c.scheme);
    c.algorithm1_pairs = get(d, "algorithm1_pairs", c.algorithm1_pairs);
    c.split_mode = get(d, "split_mode", c.split_mode);
    c.resample_rate = get(d, "resample_rate", c.resample_rate);
    c.resample_period = get(d, "resample_period", c.resample_period);
  }
  if (j.contains("learner")) {
    const auto& l = j["learner"];
    c.learner_kind = get(l, "kind", c.learner_kind);
    c.depth = get(l, "depth", c.depth);
    c.width = get(l, "width", c.width);
    c.embed_dim = get(l, "embed_dim", c.embed_dim);
    c.epochs = get(l, "epochs", c.epochs);
    c.batch_size = get(l, "batch_size", c.batch_size);
    c.lr = get(l, "lr", c.lr);
    c.momentum = get(l, "momentum", c.momentum);
    c.weight_decay = get(l, "weight_decay", c.weight_decay);
    c.rmsprop_alpha = get(l, "rmsprop_alpha", c.rmsprop_alpha);
    c.lr_halve_epoch = get(l, "lr_halve_epoch", c.lr_halve_epoch);
    c.dropout = get(l, "dropout", c.dropout);
    c.batchnorm = get(l, "batchnorm", c.batchnorm);
    c.checkpoint_every = get(l, "checkpoint_every", c.checkpoint_every);
  }
  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    c.embed_mode = get(e, "mode", c.embed_mode);
    c.num_landmarks = get(e, "num_landmarks", c.num_landmarks);
    c.landmark_strategy = get(e, "strategy", c.landmark_strategy);
    c.landmark_length = get(e, "landmark_length", c.landmark_length);
    c.anchor_d_o = get(e, "anchor_d_o", c.anchor_d_o);
    c.f_max = get(e, "f_max", c.f_max);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    c.n_grid = get(e, "n_grid", c.n_grid);
    c.replicates = get(e, "replicates", c.replicates);
    c.delta = get(e, "delta", c.delta);
    c.n_test = get(e, "n_test", c.n_test);
    c.ridge = get(e, "ridge", c.ridge);
  }
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_set = true;
  }
  return c;
}

}  // namespace cte
