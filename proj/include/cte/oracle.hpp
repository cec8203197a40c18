#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cte/linalg.hpp"
#include "cte/monomials.hpp"
#include "cte/numeric.hpp"
#include "cte/topic_model.hpp"

namespace cte {

// ---------------------------------------------------------------------------
// Exact analytic quantities for finite-support priors. Everything here is a
// pure function of an immutable model; parallel evaluation is safe.
// ---------------------------------------------------------------------------

// Cumulative polynomial likelihood vector psi(x) over a monomial basis.
// For a document of length m only the degree-m block is populated; all other
// entries are structural zeros (log value -inf).
struct PsiVector {
  std::shared_ptr<const MonomialBasis> basis;
  Eigen::VectorXd log_values;
  int doc_length = 0;

  Eigen::VectorXd values() const {
    Eigen::VectorXd out(log_values.size());
    for (int i = 0; i < log_values.size(); ++i) {
      out(i) = log_values(i) == kNegInf ? 0.0 : std::exp(log_values(i));
    }
    return out;
  }
};

// DP over words: psi^{(i)}_beta = sum_k psi^{(i-1)}_{beta - e_k} O(x_i | k),
// accumulated in log space. Equals the brute-force sum over z in [K]^m.
inline PsiVector psi_vector(const TopicModel& model, const Document& doc,
                            std::shared_ptr<const MonomialBasis> basis) {
  CTE_CHECK(basis->K() == model.K, "psi_vector: basis K mismatch");
  CTE_CHECK(doc.size() <= basis->max_degree(),
            "psi_vector: document longer than basis max degree");
  model.check_tokens(doc);

  PsiVector psi;
  psi.basis = basis;
  psi.doc_length = doc.size();
  psi.log_values = Eigen::VectorXd::Constant(basis->size(), kNegInf);

  const int m = doc.size();
  std::vector<double> cur(static_cast<std::size_t>(basis->size()), kNegInf);
  cur[0] = 0.0;  // empty product
  std::vector<int> beta;
  std::vector<double> terms;
  for (int i = 0; i < m; ++i) {
    std::vector<double> next(static_cast<std::size_t>(basis->size()), kNegInf);
    TokenId tok = doc.tokens[static_cast<std::size_t>(i)];
    for (int j = basis->degree_begin(i + 1); j < basis->degree_end(i + 1); ++j) {
      beta = basis->alpha(j);
      terms.clear();
      for (int k = 0; k < model.K; ++k) {
        if (beta[static_cast<std::size_t>(k)] == 0) continue;
        double o = model.O(k, tok);
        if (o <= 0.0) continue;
        beta[static_cast<std::size_t>(k)] -= 1;
        double prev = cur[static_cast<std::size_t>(basis->index_of(beta))];
        beta[static_cast<std::size_t>(k)] += 1;
        if (prev != kNegInf) terms.push_back(prev + std::log(o));
      }
      next[static_cast<std::size_t>(j)] = log_sum_exp(terms);
    }
    cur.swap(next);
  }
  for (int j = basis->degree_begin(m); j < basis->degree_end(m); ++j) {
    psi.log_values(j) = cur[static_cast<std::size_t>(j)];
  }
  return psi;
}

// Posterior over prior atoms, P(w_j | x).  Closed form exists only for
// finite-support priors; Dirichlet priors are rejected by the oracle.
inline Eigen::VectorXd posterior_weights(const TopicModel& model,
                                         const Document& doc) {
  CTE_CHECK(model.prior.finite(),
            "oracle: closed-form posterior needs a finite-support prior");
  int J = static_cast<int>(model.prior.atoms.size());
  Eigen::VectorXd logw(J);
  for (int j = 0; j < J; ++j) {
    double pj = model.prior.atom_probs[static_cast<std::size_t>(j)];
    logw(j) = pj <= 0.0
                  ? kNegInf
                  : std::log(pj) + doc_loglik_given_w(
                                       model, doc,
                                       model.prior.atoms[static_cast<std::size_t>(j)]);
  }
  double z = log_sum_exp(std::span<const double>(logw.data(),
                                                 static_cast<std::size_t>(J)));
  CTE_CHECK(z != kNegInf, "oracle: document has zero probability under the prior");
  Eigen::VectorXd w(J);
  for (int j = 0; j < J; ++j) w(j) = std::exp(logw(j) - z);
  return w;
}

// log P(half = doc), conditional on the half's length (length factors are
// constants under the fixed-half-length convention and cancel in g*)
enum class Half { First, Second };

inline double log_marginal_prob(const TopicModel& model, const Document& doc,
                                Half /*half*/ = Half::Second) {
  CTE_CHECK(model.prior.finite(),
            "oracle: marginal needs a finite-support prior");
  int J = static_cast<int>(model.prior.atoms.size());
  std::vector<double> logw(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    double pj = model.prior.atom_probs[static_cast<std::size_t>(j)];
    logw[static_cast<std::size_t>(j)] =
        pj <= 0.0 ? kNegInf
                  : std::log(pj) + doc_loglik_given_w(
                                       model, doc,
                                       model.prior.atoms[static_cast<std::size_t>(j)]);
  }
  return log_sum_exp(logw);
}

inline double marginal_prob(const TopicModel& model, const Document& doc,
                            Half half = Half::Second) {
  return std::exp(log_marginal_prob(model, doc, half));
}

// eta(x) = E[pi(w) | x^{(1)} = x] over the basis; degree-0 entry is always 1
inline Eigen::VectorXd eta_vector(const TopicModel& model, const Document& doc,
                                  const MonomialBasis& basis) {
  Eigen::VectorXd w = posterior_weights(model, doc);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(basis.size());
  for (int j = 0; j < w.size(); ++j) {
    if (w(j) == 0.0) continue;
    eta += w(j) * pi_vector(model.prior.atoms[static_cast<std::size_t>(j)], basis);
  }
  return eta;
}

// Single-topic specialization (Lemma-style K-vector): posterior over topics.
inline Eigen::VectorXd st_posterior(const TopicModel& model, const Document& doc) {
  CTE_CHECK(model.prior.pure_topic(),
            "oracle: topic posterior needs a pure-topic prior");
  Eigen::VectorXd logw(model.K);
  logw.setConstant(kNegInf);
  Eigen::VectorXd ll = doc_loglik_per_topic(model, doc);
  for (std::size_t j = 0; j < model.prior.atoms.size(); ++j) {
    int k = basis_index(model.prior.atoms[j]);
    double pj = model.prior.atom_probs[j];
    if (pj > 0.0) logw(k) = log_add_exp(logw(k), std::log(pj) + ll(k));
  }
  double z = log_sum_exp(std::span<const double>(logw.data(),
                                                 static_cast<std::size_t>(model.K)));
  CTE_CHECK(z != kNegInf, "oracle: document has zero probability under the prior");
  Eigen::VectorXd post(model.K);
  for (int k = 0; k < model.K; ++k) post(k) = std::exp(logw(k) - z);
  return post;
}

// log P(x, x' from one document | lengths) = logsumexp_j p_j P(x|w_j) P(x'|w_j)
inline double log_joint_prob(const TopicModel& model, const Document& x,
                             const Document& xp) {
  CTE_CHECK(model.prior.finite(), "oracle: joint needs a finite-support prior");
  int J = static_cast<int>(model.prior.atoms.size());
  std::vector<double> logw(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    const auto& wj = model.prior.atoms[static_cast<std::size_t>(j)];
    double pj = model.prior.atom_probs[static_cast<std::size_t>(j)];
    logw[static_cast<std::size_t>(j)] =
        pj <= 0.0 ? kNegInf
                  : std::log(pj) + doc_loglik_given_w(model, x, wj) +
                        doc_loglik_given_w(model, xp, wj);
  }
  return log_sum_exp(logw);
}

// g*(x,x') = P(x,x') / (P(x) P(x')), computed from joint and marginals
inline double g_star_direct(const TopicModel& model, const Document& x,
                            const Document& xp) {
  double lp1 = log_marginal_prob(model, x, Half::First);
  double lp2 = log_marginal_prob(model, xp, Half::Second);
  CTE_CHECK(lp1 != kNegInf && lp2 != kNegInf,
            "g_star: undefined for zero-probability documents");
  return std::exp(log_joint_prob(model, x, xp) - lp1 - lp2);
}

// Factorized form of g* (the representation identity):
// g*(x,x') = eta(x)^T psi(x') / P(x^{(2)} = x')
inline double g_star(const TopicModel& model, const Document& x,
                     const Document& xp, std::shared_ptr<const MonomialBasis> basis) {
  double lp2 = log_marginal_prob(model, xp, Half::Second);
  CTE_CHECK(lp2 != kNegInf, "g_star: landmark has zero marginal probability");
  Eigen::VectorXd eta = eta_vector(model, x, *basis);
  PsiVector psi = psi_vector(model, xp, std::move(basis));
  double dot = 0.0;
  for (int i = 0; i < eta.size(); ++i) {
    if (psi.log_values(i) != kNegInf) dot += eta(i) * std::exp(psi.log_values(i));
  }
  return dot / std::exp(lp2);
}

// Bayes optimal contrastive predictor f*(x,x') = P(y=1 | x,x') = g*/(1+g*)
inline double f_star(const TopicModel& model, const Document& x,
                     const Document& xp) {
  double lp1 = log_marginal_prob(model, x, Half::First);
  double lp2 = log_marginal_prob(model, xp, Half::Second);
  CTE_CHECK(lp1 != kNegInf && lp2 != kNegInf,
            "f_star: undefined for zero-probability documents");
  return sigmoid(log_joint_prob(model, x, xp) - lp1 - lp2);
}

// ---------------------------------------------------------------------------
// Landmarks and decoding
// ---------------------------------------------------------------------------

// anchor word per topic (O(a|k) > 0 only for topic k), highest-mass candidate;
// topics without one are reported in the thrown error
inline std::vector<int> find_anchor_words(const TopicModel& model) {
  std::vector<int> anchors(static_cast<std::size_t>(model.K), -1);
  std::vector<int> missing;
  for (int k = 0; k < model.K; ++k) {
    double best = 0.0;
    for (int v = 0; v < model.V; ++v) {
      if (model.O(k, v) <= 0.0) continue;
      bool exclusive = true;
      for (int j = 0; j < model.K && exclusive; ++j) {
        if (j != k && model.O(j, v) > 0.0) exclusive = false;
      }
      if (exclusive && model.O(k, v) > best) {
        best = model.O(k, v);
        anchors[static_cast<std::size_t>(k)] = v;
      }
    }
    if (anchors[static_cast<std::size_t>(k)] < 0) missing.push_back(k);
  }
  if (!missing.empty()) {
    std::string msg = "anchor_landmarks: topics without anchor words:";
    for (int k : missing) msg += " " + std::to_string(k);
    throw Error(msg);
  }
  return anchors;
}

// Landmark documents with their normalized likelihood columns
// L = [ psi(l_i) / P(x^{(2)} = l_i) ],  N rows (representation dim) x M columns.
// Monomial mode uses the cumulative polynomial psi over a basis; SingleTopic
// mode uses the per-topic likelihood vector (the Lemma-1 specialization).
class LandmarkSet {
 public:
  enum class Mode { Monomial, SingleTopic };
  enum class Strategy { Anchor, Sampled, User };

  const Eigen::MatrixXd& L() const { return L_; }
  double min_singular() const { return min_singular_; }
  double max_singular() const { return max_singular_; }
  bool full_row_rank() const { return rank_ == static_cast<int>(L_.rows()); }
  int num_landmarks() const { return static_cast<int>(landmarks_.size()); }
  int representation_dim() const { return static_cast<int>(L_.rows()); }
  const std::vector<Document>& landmarks() const { return landmarks_; }
  Mode mode() const { return mode_; }
  Strategy strategy() const { return strategy_; }
  int anchor_degree() const { return d_o_; }
  const std::shared_ptr<const MonomialBasis>& basis() const { return basis_; }

  // L^dagger phi in the row space sense: recovers eta(x) from exact
  // phi = g*(x, l_{1:M}).  Rank deficiency is flagged, never silently
  // projected away.
  Eigen::VectorXd decode(const Eigen::VectorXd& phi) const {
    require_full_rank();
    CTE_CHECK(phi.size() == num_landmarks(), "decode: phi dimension mismatch");
    return decode_mat_ * phi;
  }

  // rows of Phi are per-document landmark vectors; returns rows of decoded eta
  Eigen::MatrixXd decode_all(const Eigen::MatrixXd& Phi) const {
    require_full_rank();
    CTE_CHECK(Phi.cols() == num_landmarks(), "decode: Phi dimension mismatch");
    return Phi * decode_mat_.transpose();
  }

  // theta with <theta, g*(x, l_{1:M})> = E[Pi(w) | x] for Pi = <v, pi(w)>;
  // theta = L^{-1} v on anchor-built sets
  Eigen::VectorXd functional_weights(const Eigen::VectorXd& v) const {
    CTE_CHECK(strategy_ == Strategy::Anchor,
              "functional_weights: landmark set was not anchor-built");
    CTE_CHECK(v.size() == representation_dim(),
              "functional_weights: coefficient vector does not match basis");
    require_full_rank();
    return decode_mat_.transpose() * v;
  }

  static LandmarkSet make(std::vector<Document> docs, Eigen::MatrixXd L, Mode mode,
                          Strategy strategy, int d_o,
                          std::shared_ptr<const MonomialBasis> basis) {
    LandmarkSet s;
    s.landmarks_ = std::move(docs);
    s.L_ = std::move(L);
    s.mode_ = mode;
    s.strategy_ = strategy;
    s.d_o_ = d_o;
    s.basis_ = std::move(basis);
    SvdPinv p = svd_pinv(s.L_);
    s.min_singular_ = p.min_singular;
    s.max_singular_ = p.max_singular;
    s.rank_ = p.rank;
    s.decode_mat_ = p.pinv.transpose();  // pinv(L^T)
    return s;
  }

 private:
  void require_full_rank() const {
    if (!full_row_rank()) {
      throw Error("landmark matrix is rank deficient (min singular " +
                  std::to_string(min_singular_) + ", max " +
                  std::to_string(max_singular_) + "); decoding is ill-posed");
    }
  }

  std::vector<Document> landmarks_;
  Eigen::MatrixXd L_;
  Eigen::MatrixXd decode_mat_;  // pinv(L^T), N x M
  double min_singular_ = 0.0;
  double max_singular_ = 0.0;
  int rank_ = 0;
  Mode mode_ = Mode::SingleTopic;
  Strategy strategy_ = Strategy::User;
  int d_o_ = 0;
  std::shared_ptr<const MonomialBasis> basis_;
};

inline Eigen::VectorXd monomial_column(const TopicModel& model, const Document& doc,
                                       std::shared_ptr<const MonomialBasis> basis) {
  double lp = log_marginal_prob(model, doc, Half::Second);
  CTE_CHECK(lp != kNegInf,
            "landmark has zero marginal probability; the prior must place mass "
            "where the landmark can occur (Theorem assumption on the prior)");
  PsiVector psi = psi_vector(model, doc, std::move(basis));
  Eigen::VectorXd col(psi.log_values.size());
  for (int i = 0; i < col.size(); ++i) {
    col(i) = psi.log_values(i) == kNegInf ? 0.0 : std::exp(psi.log_values(i) - lp);
  }
  return col;
}

inline Eigen::VectorXd single_topic_column(const TopicModel& model,
                                           const Document& doc) {
  double lp = log_marginal_prob(model, doc, Half::Second);
  CTE_CHECK(lp != kNegInf, "landmark has zero marginal probability");
  Eigen::VectorXd ll = doc_loglik_per_topic(model, doc);
  Eigen::VectorXd col(model.K);
  for (int k = 0; k < model.K; ++k) {
    col(k) = ll(k) == kNegInf ? 0.0 : std::exp(ll(k) - lp);
  }
  return col;
}

// One landmark per alpha with |alpha| <= d_o: alpha_k copies of anchor word
// a_k, ordered like the basis. The resulting L is square and invertible.
inline LandmarkSet anchor_landmarks(const TopicModel& model, int d_o) {
  CTE_CHECK(d_o >= 1, "anchor_landmarks: d_o must be >= 1");
  std::vector<int> anchors = find_anchor_words(model);
  auto basis = std::make_shared<const MonomialBasis>(model.K, d_o);
  std::vector<Document> docs;
  Eigen::MatrixXd L(basis->size(), basis->size());
  for (int i = 0; i < basis->size(); ++i) {
    Document l;
    const auto& alpha = basis->alpha(i);
    for (int k = 0; k < model.K; ++k) {
      for (int rep = 0; rep < alpha[static_cast<std::size_t>(k)]; ++rep) {
        l.tokens.push_back(static_cast<TokenId>(anchors[static_cast<std::size_t>(k)]));
      }
    }
    L.col(i) = monomial_column(model, l, basis);
    docs.push_back(std::move(l));
  }
  return LandmarkSet::make(std::move(docs), std::move(L), LandmarkSet::Mode::Monomial,
                           LandmarkSet::Strategy::Anchor, d_o, basis);
}

// M iid landmarks from the second-half marginal at a fixed length
// (Assumption-2 setting); single-topic representation
inline LandmarkSet sampled_landmarks(const TopicModel& model, int M, int length,
                                     std::uint64_t seed) {
  CTE_CHECK(M >= 1, "sampled_landmarks: M must be >= 1");
  CTE_CHECK(model.prior.pure_topic(),
            "sampled_landmarks: single-topic mode needs a pure-topic prior");
  std::vector<Document> docs(static_cast<std::size_t>(M));
  Eigen::MatrixXd L(model.K, M);
  for (int j = 0; j < M; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    Eigen::VectorXd w = sample_w(model, rng);
    docs[static_cast<std::size_t>(j)] = sample_document_with_length(model, w, length, rng);
    L.col(j) = single_topic_column(model, docs[static_cast<std::size_t>(j)]);
  }
  return LandmarkSet::make(std::move(docs), std::move(L),
                           LandmarkSet::Mode::SingleTopic,
                           LandmarkSet::Strategy::Sampled, 0, nullptr);
}

inline LandmarkSet user_landmarks(const TopicModel& model, std::vector<Document> docs,
                                  LandmarkSet::Mode mode, int m_max = 0) {
  CTE_CHECK(!docs.empty(), "user_landmarks: need at least one landmark");
  if (mode == LandmarkSet::Mode::SingleTopic) {
    Eigen::MatrixXd L(model.K, static_cast<int>(docs.size()));
    for (std::size_t j = 0; j < docs.size(); ++j) {
      L.col(static_cast<int>(j)) = single_topic_column(model, docs[j]);
    }
    return LandmarkSet::make(std::move(docs), std::move(L), mode,
                             LandmarkSet::Strategy::User, 0, nullptr);
  }
  int need = 0;
  for (const auto& d : docs) need = std::max(need, d.size());
  m_max = std::max(m_max, need);
  auto basis = std::make_shared<const MonomialBasis>(model.K, m_max);
  Eigen::MatrixXd L(basis->size(), static_cast<int>(docs.size()));
  for (std::size_t j = 0; j < docs.size(); ++j) {
    L.col(static_cast<int>(j)) = monomial_column(model, docs[j], basis);
  }
  return LandmarkSet::make(std::move(docs), std::move(L), mode,
                           LandmarkSet::Strategy::User, 0, basis);
}

inline Eigen::VectorXd decode_posterior(const LandmarkSet& set,
                                        const Eigen::VectorXd& phi) {
  return set.decode(phi);
}

inline Eigen::VectorXd polynomial_functional(const LandmarkSet& set,
                                             const Eigen::VectorXd& coeffs) {
  return set.functional_weights(coeffs);
}

// lambda_min of (1/M) sum_j psi(l_j) psi(l_j)^T / P(x^{(2)} = l_j)^2 over the
// single-topic representation
inline double second_moment_min_eigenvalue(const TopicModel& model,
                                           const std::vector<Document>& landmarks) {
  CTE_CHECK(!landmarks.empty(), "second_moment: need at least one landmark");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(model.K, model.K);
  for (const auto& l : landmarks) {
    Eigen::VectorXd c = single_topic_column(model, l);
    S.noalias() += c * c.transpose();
  }
  S /= static_cast<double>(landmarks.size());
  return min_eigenvalue_sym(S);
}

}  // namespace cte
