#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "cte/config.hpp"
#include "cte/contrastive.hpp"
#include "cte/embedding.hpp"
#include "cte/eval.hpp"
#include "cte/learner.hpp"
#include "cte/oracle.hpp"
#include "cte/probe.hpp"
#include "cte/topic_model.hpp"

namespace cte {

inline constexpr const char* kVersion = "0.1.0";

// chunk-free index parallelism; work items must own their seeds
inline void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
  if (num_threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(num_threads, n); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// fresh documents at a fixed length with known generating topics
inline std::pair<std::vector<Document>, std::vector<int>> sample_labeled_docs(
    const TopicModel& model, int n, int length, std::uint64_t seed) {
  std::vector<Document> docs(static_cast<std::size_t>(n));
  std::vector<int> topics(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd w = sample_w(model, rng);
    docs[static_cast<std::size_t>(i)] =
        sample_document_with_length(model, w, length, rng);
    topics[static_cast<std::size_t>(i)] = basis_index(w);
  }
  return {std::move(docs), std::move(topics)};
}

inline DatasetStream make_stream(const ExperimentConfig& cfg, const TopicModel& model) {
  return DatasetStream::simulation(model, cfg.corpus_size, cfg.pair_scheme(),
                                   cfg.split(), cfg.effective_period(),
                                   derive_seed(cfg.seed, 0xdaaULL),
                                   cfg.algorithm1_pairs);
}

// decode learned landmark embeddings through the exact L and take the MAP topic
inline double map_accuracy_of_net(const ContrastiveNet& net, const TopicModel& model,
                                  const LandmarkSet& set,
                                  const std::vector<Document>& test_docs,
                                  const std::vector<int>& test_topics, double f_max) {
  Eigen::MatrixXd Phi = landmark_embed_all(net, set.landmarks(), test_docs, f_max);
  Eigen::MatrixXd decoded = set.decode_all(Phi);
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(test_docs.size());
  for (int i = 0; i < decoded.rows(); ++i) rows.push_back(decoded.row(i));
  return map_topic_recovery(rows, test_topics);
}

struct CheckpointEval {
  int epoch = 0;
  double holdout_loss = 0.0;
  double probe_accuracy = 0.0;
  double map_accuracy = 0.0;
};

struct MapExperimentResult {
  double accuracy = 0.0;  // final MAP recovery accuracy
  double tv_separation = 0.0;
  TrainResult train_result;
  std::vector<CheckpointEval> checkpoint_evals;
};

// The simulation-protocol experiment: train a contrastive model against a
// resampling stream, embed fresh test documents at the landmarks, decode the
// model-based posterior through the exact L, and score MAP recovery.
inline MapExperimentResult run_map_experiment(const ExperimentConfig& cfg,
                                              bool eval_checkpoints = false) {
  cfg.validate();
  TopicModel model = cfg.build_model();
  MapExperimentResult out;
  out.tv_separation = model.K >= 2 ? topic_tv_separation(model) : 0.0;

  DatasetStream stream = make_stream(cfg, model);
  ContrastiveNet net = ContrastiveNet::make(cfg.net_config());
  TrainConfig tc = cfg.train_config();
  out.train_result = train(net, stream, tc);

  int half_len = cfg.landmark_length;
  LandmarkSet set = sampled_landmarks(model, cfg.num_landmarks, half_len,
                                      derive_seed(cfg.seed, 0x1a23ULL));
  auto [test_docs, test_topics] =
      sample_labeled_docs(model, cfg.n_test, half_len, derive_seed(cfg.seed, 0x7e57ULL));
  out.accuracy =
      map_accuracy_of_net(net, model, set, test_docs, test_topics, cfg.f_max);

  if (eval_checkpoints) {
    auto [pool_docs, pool_topics] = sample_labeled_docs(
        model, 400, half_len, derive_seed(cfg.seed, 0x9001ULL));
    Eigen::MatrixXd X_eval_bow = bow_matrix(test_docs, model.V);
    Eigen::MatrixXd X_pool_bow = bow_matrix(pool_docs, model.V);
    for (const auto& ckpt : out.train_result.checkpoints) {
      ContrastiveNet net_at = net;
      net_at.unflatten(ckpt.params);
      net_at.state_unflatten(ckpt.bn_state);
      CheckpointEval ce;
      ce.epoch = ckpt.epoch;
      ce.holdout_loss =
          out.train_result.trace[static_cast<std::size_t>(ckpt.epoch)].holdout_loss;
      Eigen::MatrixXd Fp = net_at.tower_embed_matrix(X_pool_bow);
      Eigen::MatrixXd Fe = net_at.tower_embed_matrix(X_eval_bow);
      ProbeModel probe =
          fit_linear_probe(Fp, one_hot(pool_topics, model.K), cfg.ridge);
      ce.probe_accuracy = probe_accuracy(probe, Fe, test_topics);
      ce.map_accuracy =
          map_accuracy_of_net(net_at, model, set, test_docs, test_topics, cfg.f_max);
      out.checkpoint_evals.push_back(ce);
    }
  }
  return out;
}

// Theorem-2 style bound verification on a fresh synthetic instance built from
// the config: train briefly, sample landmarks, measure every ingredient.
inline BoundReport run_bound_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  TopicModel model = cfg.build_model();
  DatasetStream stream = make_stream(cfg, model);
  ContrastiveNet net = ContrastiveNet::make(cfg.net_config());
  TrainConfig tc = cfg.train_config();
  train(net, stream, tc);

  int half_len = cfg.landmark_length;
  LandmarkSet set = sampled_landmarks(model, cfg.num_landmarks, half_len,
                                      derive_seed(cfg.seed, 0x1a23ULL));
  Rng theta_rng(derive_seed(cfg.seed, 0x7210ULL));
  Eigen::VectorXd theta(model.K);
  for (int k = 0; k < model.K; ++k) theta(k) = 2.0 * theta_rng.uniform01() - 1.0;
  return verify_error_bound(net, model, set, theta, cfg.delta, cfg.f_max, half_len,
                            4000, 1500, derive_seed(cfg.seed, 0xec2ULL));
}

}  // namespace cte
