#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "cte/learner.hpp"
#include "cte/numeric.hpp"
#include "cte/oracle.hpp"
#include "cte/topic_model.hpp"

namespace cte {

enum class EmbedMode { Landmark, Tower, Oracle };

struct Embedding {
  std::int64_t doc_id = -1;
  Eigen::VectorXd values;
  EmbedMode mode = EmbedMode::Landmark;
  double f_max = 0.0;  // clamp ceiling used (landmark mode)
};

inline constexpr double kDefaultFmax = 1.0 - 1e-4;
inline constexpr double kEpsClamp = 1e-6;  // lower clamp on fhat before odds

// f_max = 1/(1+p_min) when a lower bound on landmark marginals is known
inline double f_max_from_p_min(double p_min) {
  CTE_CHECK(p_min > 0.0, "f_max_from_p_min: p_min must be positive");
  return 1.0 / (1.0 + p_min);
}

// phi_hat(x) = ( fhat(x, l_i) / (1 - fhat(x, l_i)) : i in [M] ),
// fhat clamped to [eps, f_max] so the odds map has no singularity
using PairPredictor = std::function<double(const Document&, const Document&)>;

inline Embedding landmark_embed(const PairPredictor& fhat,
                                const std::vector<Document>& landmarks,
                                const Document& doc, double f_max = kDefaultFmax,
                                std::int64_t doc_id = -1) {
  CTE_CHECK(f_max > 0.0 && f_max < 1.0, "landmark_embed: f_max must be in (0,1)");
  Embedding e;
  e.doc_id = doc_id;
  e.mode = EmbedMode::Landmark;
  e.f_max = f_max;
  e.values.resize(static_cast<int>(landmarks.size()));
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    double f = clamp(fhat(doc, landmarks[i]), kEpsClamp, f_max);
    e.values(static_cast<int>(i)) = odds(f);
  }
  return e;
}

inline Embedding landmark_embed(const ContrastiveNet& net,
                                const std::vector<Document>& landmarks,
                                const Document& doc, double f_max = kDefaultFmax,
                                std::int64_t doc_id = -1) {
  return landmark_embed(
      [&net](const Document& x, const Document& l) {
        return net.predict_prob_one(x, l);
      },
      landmarks, doc, f_max, doc_id);
}

// batched landmark embeddings, docs x landmarks
inline Eigen::MatrixXd landmark_embed_all(const ContrastiveNet& net,
                                          const std::vector<Document>& landmarks,
                                          const std::vector<Document>& docs,
                                          double f_max = kDefaultFmax) {
  CTE_CHECK(f_max > 0.0 && f_max < 1.0, "landmark_embed: f_max must be in (0,1)");
  Eigen::MatrixXd P = net.prob_matrix(docs, landmarks);
  return P.unaryExpr(
      [f_max](double f) { return odds(clamp(f, kEpsClamp, f_max)); });
}

// f1(x), evaluation mode
inline Embedding tower_embed(const ContrastiveNet& net, const Document& doc,
                             std::int64_t doc_id = -1) {
  Embedding e;
  e.doc_id = doc_id;
  e.mode = EmbedMode::Tower;
  Eigen::MatrixXd X = bow_matrix({doc}, net.vocab());
  e.values = net.tower_embed_matrix(X).row(0);
  return e;
}

inline Eigen::MatrixXd tower_embed_all(const ContrastiveNet& net,
                                       const std::vector<Document>& docs) {
  return net.tower_embed_matrix(bow_matrix(docs, net.vocab()));
}

// exact g*(x, l_i) per landmark, computed through the joint/marginal route
inline Embedding oracle_embed(const TopicModel& model,
                              const std::vector<Document>& landmarks,
                              const Document& doc, std::int64_t doc_id = -1) {
  Embedding e;
  e.doc_id = doc_id;
  e.mode = EmbedMode::Oracle;
  e.values.resize(static_cast<int>(landmarks.size()));
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    e.values(static_cast<int>(i)) = g_star_direct(model, doc, landmarks[i]);
  }
  return e;
}

inline Eigen::MatrixXd oracle_embed_all(const TopicModel& model,
                                        const std::vector<Document>& landmarks,
                                        const std::vector<Document>& docs) {
  Eigen::MatrixXd Phi(static_cast<int>(docs.size()),
                      static_cast<int>(landmarks.size()));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < landmarks.size(); ++j) {
      Phi(static_cast<int>(i), static_cast<int>(j)) =
          g_star_direct(model, docs[i], landmarks[j]);
    }
  }
  return Phi;
}

}  // namespace cte
