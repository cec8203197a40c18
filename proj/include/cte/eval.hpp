#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cte/embedding.hpp"
#include "cte/learner.hpp"
#include "cte/linalg.hpp"
#include "cte/oracle.hpp"
#include "cte/probe.hpp"
#include "cte/rng.hpp"
#include "cte/topic_model.hpp"

namespace cte {

struct EvalReport {
  std::string task;
  int n_labeled = 0;
  int replicate = -1;
  double metric = 0.0;       // accuracy or mse, per task
  double ci_half = 0.0;      // 1.96 * sd / sqrt(replicates) on aggregate rows
  std::uint64_t seed = 0;
  std::string ci_method = "normal-approx";
};

// argmax of each decoded posterior's topic block vs the generating topic;
// ties broken by lowest index
inline double map_topic_recovery(const std::vector<Eigen::VectorXd>& topic_scores,
                                 const std::vector<int>& true_topics) {
  CTE_CHECK(topic_scores.size() == true_topics.size(),
            "map_topic_recovery: size mismatch");
  CTE_CHECK(!topic_scores.empty(), "map_topic_recovery: empty input");
  int correct = 0;
  for (std::size_t i = 0; i < topic_scores.size(); ++i) {
    const auto& s = topic_scores[i];
    int arg = 0;
    for (int k = 1; k < s.size(); ++k) {
      if (s(k) > s(arg)) arg = k;
    }
    if (arg == true_topics[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(topic_scores.size());
}

// mean over unordered topic pairs of (1/2) || O_i - O_j ||_1
inline double topic_tv_separation(const TopicModel& model) {
  CTE_CHECK(model.K >= 2, "topic_tv_separation: needs K >= 2");
  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < model.K; ++i) {
    for (int j = i + 1; j < model.K; ++j) {
      sum += 0.5 * (model.O.row(i) - model.O.row(j)).lpNorm<1>();
      ++pairs;
    }
  }
  return sum / pairs;
}

// R-hat: fit the minimizing v (no intercept, min-norm least squares) on a fit
// sample and report the mean squared residual on a held-out sample. The value
// is invariant under invertible re-parameterization of the embedding.
inline double estimate_risk(const Eigen::MatrixXd& Phi_fit,
                            const Eigen::VectorXd& target_fit,
                            const Eigen::MatrixXd& Phi_eval,
                            const Eigen::VectorXd& target_eval) {
  CTE_CHECK(Phi_fit.rows() == target_fit.size() && Phi_eval.rows() == target_eval.size(),
            "estimate_risk: shape mismatch");
  Eigen::VectorXd v = least_squares(Phi_fit, target_fit);
  Eigen::VectorXd resid = Phi_eval * v - target_eval;
  return resid.squaredNorm() / static_cast<double>(resid.size());
}

// Monte-Carlo estimate of eps_n = E_{D_c}[(fhat - f*)^2] against the exact
// Bayes predictor. Pairs are drawn from the contrastive distribution at fixed
// half lengths.
inline double contrastive_mse_vs_oracle(const ContrastiveNet& net,
                                        const TopicModel& model, int n_pairs,
                                        int half_len, std::uint64_t seed) {
  CTE_CHECK(n_pairs > 0, "contrastive_mse: n_pairs must be positive");
  std::vector<Document> xs, xps;
  std::vector<double> fstar;
  xs.reserve(static_cast<std::size_t>(n_pairs));
  for (int t = 0; t < n_pairs; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd w = sample_w(model, rng);
    Document x = sample_document_with_length(model, w, half_len, rng);
    Document xp;
    if (rng.uniform01() < 0.5) {
      xp = sample_document_with_length(model, w, half_len, rng);  // positive
    } else {
      Eigen::VectorXd w2 = sample_w(model, rng);
      xp = sample_document_with_length(model, w2, half_len, rng);  // negative
    }
    fstar.push_back(f_star(model, x, xp));
    xs.push_back(std::move(x));
    xps.push_back(std::move(xp));
  }
  Eigen::MatrixXd X1 = bow_matrix(xs, model.V);
  Eigen::MatrixXd X2 = bow_matrix(xps, model.V);
  Eigen::VectorXd fhat = net.predict_prob(X1, X2);
  double mse = 0.0;
  for (int t = 0; t < n_pairs; ++t) {
    double d = fhat(t) - fstar[static_cast<std::size_t>(t)];
    mse += d * d;
  }
  return mse / n_pairs;
}

// exact Bayes loss of the squared contrastive objective, E[f*(1 - f*)],
// by Monte-Carlo over the contrastive distribution
inline double bayes_loss_mc(const TopicModel& model, int n_pairs, int half_len,
                            std::uint64_t seed) {
  double sum = 0.0;
  for (int t = 0; t < n_pairs; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd w = sample_w(model, rng);
    Document x = sample_document_with_length(model, w, half_len, rng);
    Document xp;
    if (rng.uniform01() < 0.5) {
      xp = sample_document_with_length(model, w, half_len, rng);
    } else {
      Eigen::VectorXd w2 = sample_w(model, rng);
      xp = sample_document_with_length(model, w2, half_len, rng);
    }
    double f = f_star(model, x, xp);
    sum += f * (1.0 - f);
  }
  return sum / n_pairs;
}

struct BoundReport {
  double eps_n = 0.0;       // measured E[(fhat - f*)^2]
  double sigma_min = 0.0;   // min singular of L divided by sqrt(M)
  double f_max = 0.0;
  double theta_norm_sq = 0.0;
  int M = 0;
  double delta = 0.0;
  double bound = 0.0;
  double risk = 0.0;        // measured R-hat
  bool holds = false;
};

// bound = ||theta*||^2 / (sigma_min^2 (1-f_max)^4) * (2 eps_n + sqrt(2 log(2/delta)/M))
inline double error_bound_value(double theta_norm_sq, double sigma_min, double f_max,
                                double eps_n, double delta, int M) {
  CTE_CHECK(sigma_min > 0.0, "error bound: sigma_min must be positive");
  CTE_CHECK(f_max > 0.0 && f_max < 1.0, "error bound: f_max in (0,1)");
  CTE_CHECK(delta > 0.0 && delta < 1.0, "error bound: delta in (0,1)");
  double one_minus = 1.0 - f_max;
  double tail = std::sqrt(2.0 * std::log(2.0 / delta) / M);
  return theta_norm_sq / (sigma_min * sigma_min * one_minus * one_minus * one_minus *
                          one_minus) *
         (2.0 * eps_n + tail);
}

// Measures every ingredient of the risk bound on a synthetic instance:
// eps_n by Monte-Carlo against f*, sigma_min from the realized L, f_max from
// the clamp configuration, and R-hat from a fresh fit/holdout sample of the
// clamped landmark embedding against the target eta(x)^T theta*.
inline BoundReport verify_error_bound(const ContrastiveNet& net,
                                      const TopicModel& model,
                                      const LandmarkSet& set,
                                      const Eigen::VectorXd& theta_star, double delta,
                                      double f_max, int half_len, int n_mc,
                                      int n_risk, std::uint64_t seed) {
  CTE_CHECK(set.mode() == LandmarkSet::Mode::SingleTopic,
            "verify_error_bound: single-topic landmark mode expected");
  CTE_CHECK(theta_star.size() == set.representation_dim(),
            "verify_error_bound: theta* dimension mismatch");
  BoundReport r;
  r.M = set.num_landmarks();
  r.delta = delta;
  r.f_max = f_max;
  r.theta_norm_sq = theta_star.squaredNorm();
  r.sigma_min = set.min_singular() / std::sqrt(static_cast<double>(r.M));
  r.eps_n = contrastive_mse_vs_oracle(net, model, n_mc, half_len,
                                      derive_seed(seed, 1));

  // risk of the learned embedding against eta(x)^T theta*
  auto draw_docs = [&](std::uint64_t tag, int n) {
    std::vector<Document> docs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(derive_seed(seed, tag), static_cast<std::uint64_t>(i)));
      Eigen::VectorXd w = sample_w(model, rng);
      docs[static_cast<std::size_t>(i)] =
          sample_document_with_length(model, w, half_len, rng);
    }
    return docs;
  };
  std::vector<Document> fit_docs = draw_docs(2, n_risk);
  std::vector<Document> eval_docs = draw_docs(3, n_risk);
  auto targets = [&](const std::vector<Document>& docs) {
    Eigen::VectorXd t(static_cast<int>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      t(static_cast<int>(i)) = st_posterior(model, docs[i]).dot(theta_star);
    }
    return t;
  };
  Eigen::MatrixXd Phi_fit =
      landmark_embed_all(net, set.landmarks(), fit_docs, f_max);
  Eigen::MatrixXd Phi_eval =
      landmark_embed_all(net, set.landmarks(), eval_docs, f_max);
  r.risk = estimate_risk(Phi_fit, targets(fit_docs), Phi_eval, targets(eval_docs));
  r.bound = error_bound_value(r.theta_norm_sq, r.sigma_min, r.f_max, r.eps_n,
                              r.delta, r.M);
  r.holds = r.risk <= r.bound;
  return r;
}

// ranks with ties averaged
inline Eigen::VectorXd rank_vector(const Eigen::VectorXd& x) {
  int n = static_cast<int>(x.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&x](int a, int b) { return x(a) < x(b); });
  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x(order[static_cast<std::size_t>(j + 1)]) ==
                            x(order[static_cast<std::size_t>(i)])) {
      ++j;
    }
    double avg = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = avg;
    i = j + 1;
  }
  return ranks;
}

inline double spearman_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  CTE_CHECK(a.size() == b.size() && a.size() >= 2, "spearman: bad inputs");
  Eigen::VectorXd ra = rank_vector(a), rb = rank_vector(b);
  Eigen::VectorXd ca = ra.array() - ra.mean();
  Eigen::VectorXd cb = rb.array() - rb.mean();
  double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  CTE_CHECK(denom > 0.0, "spearman: constant input");
  return ca.dot(cb) / denom;
}

// For each n in the grid: fit a probe on n randomly chosen labeled examples,
// evaluate held-out accuracy; mean +- normal-approximation CI over replicates.
inline std::vector<EvalReport> learning_curve(
    const Eigen::MatrixXd& X_pool, const std::vector<int>& labels_pool,
    const Eigen::MatrixXd& X_eval, const std::vector<int>& labels_eval,
    int num_classes, const std::vector<int>& n_grid, int replicates, double ridge,
    std::uint64_t seed) {
  CTE_CHECK(replicates >= 1, "learning_curve: replicates must be >= 1");
  int pool = static_cast<int>(X_pool.rows());
  for (int n : n_grid) {
    CTE_CHECK(n >= 1 && n <= pool, "learning_curve: grid value outside pool");
  }
  std::vector<EvalReport> out;
  for (int n : n_grid) {
    std::vector<double> accs;
    for (int rep = 0; rep < replicates; ++rep) {
      Rng rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)),
                          static_cast<std::uint64_t>(rep)));
      std::vector<int> idx = rng.permutation(pool);
      idx.resize(static_cast<std::size_t>(n));
      Eigen::MatrixXd Xn(n, X_pool.cols());
      std::vector<int> yn(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        Xn.row(i) = X_pool.row(idx[static_cast<std::size_t>(i)]);
        yn[static_cast<std::size_t>(i)] =
            labels_pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      }
      ProbeModel probe = fit_linear_probe(Xn, one_hot(yn, num_classes), ridge);
      double acc = probe_accuracy(probe, X_eval, labels_eval);
      accs.push_back(acc);
      EvalReport row;
      row.task = "probe";
      row.n_labeled = n;
      row.replicate = rep;
      row.metric = acc;
      row.seed = seed;
      out.push_back(row);
    }
    double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / replicates;
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    double sd = replicates > 1 ? std::sqrt(var / (replicates - 1)) : 0.0;
    EvalReport agg;
    agg.task = "probe-mean";
    agg.n_labeled = n;
    agg.metric = mean;
    agg.ci_half = 1.96 * sd / std::sqrt(static_cast<double>(replicates));
    agg.seed = seed;
    out.push_back(agg);
  }
  return out;
}

}  // namespace cte
