#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cte/numeric.hpp"
#include "cte/rng.hpp"

namespace cte {

using TokenId = std::int32_t;

struct Document {
  std::vector<TokenId> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Document&) const = default;
};

struct SplitDocument {
  Document first_half;   // gets the extra token on odd lengths
  Document second_half;
};

enum class SplitMode { Contiguous, RandomPartition };

struct LengthSpec {
  enum class Kind { Fixed, PoissonTruncated } kind = Kind::Fixed;
  int fixed_m = 0;
  double lambda = 0.0;

  static LengthSpec fixed(int m) { return {Kind::Fixed, m, 0.0}; }
  // Poisson(lambda) rejected below 2 so every document is splittable
  static LengthSpec poisson(double lambda) {
    return {Kind::PoissonTruncated, 0, lambda};
  }

  int sample(Rng& rng) const {
    if (kind == Kind::Fixed) return fixed_m;
    return rng.poisson_at_least(lambda, 2);
  }
};

// Prior over topic-weight vectors w in the simplex. PureTopic is stored as
// FiniteSupport with basis-vector atoms so the oracle has one code path.
struct PriorSpec {
  enum class Kind { FiniteSupport, SymmetricDirichlet } kind = Kind::FiniteSupport;
  std::vector<Eigen::VectorXd> atoms;
  std::vector<double> atom_probs;
  double beta = 0.0;  // SymmetricDirichlet concentration

  static PriorSpec pure_topic_uniform(int K) {
    PriorSpec p;
    p.kind = Kind::FiniteSupport;
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
      e(k) = 1.0;
      p.atoms.push_back(std::move(e));
      p.atom_probs.push_back(1.0 / K);
    }
    return p;
  }

  static PriorSpec pure_topic(const Eigen::VectorXd& topic_probs) {
    PriorSpec p;
    p.kind = Kind::FiniteSupport;
    int K = static_cast<int>(topic_probs.size());
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
      e(k) = 1.0;
      p.atoms.push_back(std::move(e));
      p.atom_probs.push_back(topic_probs(k));
    }
    return p;
  }

  static PriorSpec finite_support(std::vector<Eigen::VectorXd> atoms,
                                  std::vector<double> probs) {
    PriorSpec p;
    p.kind = Kind::FiniteSupport;
    p.atoms = std::move(atoms);
    p.atom_probs = std::move(probs);
    return p;
  }

  static PriorSpec symmetric_dirichlet(double beta) {
    PriorSpec p;
    p.kind = Kind::SymmetricDirichlet;
    p.beta = beta;
    return p;
  }

  bool finite() const { return kind == Kind::FiniteSupport; }

  // all atoms are basis vectors
  bool pure_topic() const {
    if (!finite()) return false;
    for (const auto& a : atoms) {
      int ones = 0;
      for (int i = 0; i < a.size(); ++i) {
        if (a(i) == 1.0) {
          ++ones;
        } else if (a(i) != 0.0) {
          return false;
        }
      }
      if (ones != 1) return false;
    }
    return true;
  }

  void validate(int K) const {
    if (kind == Kind::SymmetricDirichlet) {
      CTE_CHECK(beta > 0.0, "prior: Dirichlet beta must be positive");
      return;
    }
    CTE_CHECK(!atoms.empty(), "prior: finite support needs at least one atom");
    CTE_CHECK(atoms.size() == atom_probs.size(), "prior: atom/prob size mismatch");
    double psum = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      CTE_CHECK(atoms[j].size() == K, "prior: atom dimension != K");
      double s = 0.0;
      for (int k = 0; k < K; ++k) {
        CTE_CHECK(atoms[j](k) >= 0.0, "prior: atom has negative entry");
        s += atoms[j](k);
      }
      CTE_CHECK(std::abs(s - 1.0) <= 1e-12, "prior: atom does not sum to 1");
      CTE_CHECK(atom_probs[j] >= 0.0, "prior: negative atom probability");
      psum += atom_probs[j];
    }
    CTE_CHECK(std::abs(psum - 1.0) <= 1e-12, "prior: atom probs do not sum to 1");
  }
};

struct TopicModel {
  int K = 0;
  int V = 0;
  Eigen::MatrixXd O;  // K x V, row k = word distribution of topic k
  PriorSpec prior;
  LengthSpec length;

  void validate() const {
    CTE_CHECK(K >= 1, "model: K must be >= 1");
    CTE_CHECK(V >= 1, "model: V must be >= 1");
    CTE_CHECK(O.rows() == K && O.cols() == V, "model: O must be K x V");
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (int v = 0; v < V; ++v) {
        CTE_CHECK(O(k, v) >= 0.0, "model: O has a negative entry");
        s += O(k, v);
      }
      CTE_CHECK(std::abs(s - 1.0) <= 1e-12, "model: O row does not sum to 1");
    }
    prior.validate(K);
    if (length.kind == LengthSpec::Kind::Fixed) {
      CTE_CHECK(length.fixed_m >= 2, "model: fixed length must be >= 2");
    } else {
      CTE_CHECK(length.lambda > 0.0, "model: Poisson lambda must be positive");
    }
  }

  void check_tokens(const Document& doc) const {
    for (TokenId t : doc.tokens) {
      CTE_CHECK(t >= 0 && t < V, "document: token id out of range");
    }
  }
};

struct Corpus {
  std::vector<Document> docs;
  std::vector<int> topics;  // generating topic per doc; empty when unknown

  int size() const { return static_cast<int>(docs.size()); }
};

// Topics drawn iid symmetric Dirichlet(alpha/K) over V outcomes.
// alpha = +inf selects the uniform-row limit.
inline TopicModel sample_topic_model(int K, int V, double dirichlet_alpha,
                                     std::uint64_t seed,
                                     LengthSpec length = LengthSpec::fixed(2),
                                     PriorSpec prior = {}) {
  CTE_CHECK(K >= 1, "sample_topic_model: K must be >= 1");
  CTE_CHECK(V >= 2, "sample_topic_model: V must be >= 2");
  CTE_CHECK(dirichlet_alpha > 0.0, "sample_topic_model: alpha must be positive");
  TopicModel m;
  m.K = K;
  m.V = V;
  m.O.resize(K, V);
  for (int k = 0; k < K; ++k) {
    Rng row_rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    auto row = row_rng.dirichlet_symmetric(dirichlet_alpha / K, V);
    for (int v = 0; v < V; ++v) m.O(k, v) = row[static_cast<std::size_t>(v)];
  }
  m.length = length;
  m.prior = prior.atoms.empty() && prior.kind == PriorSpec::Kind::FiniteSupport
                ? PriorSpec::pure_topic_uniform(K)
                : std::move(prior);
  m.validate();
  return m;
}

// Anchored variant: token k is an anchor word for topic k with mass
// anchor_mass; the remaining mass is Dirichlet over the non-anchor tokens.
inline TopicModel sample_anchored_topic_model(int K, int V, double dirichlet_alpha,
                                              double anchor_mass, std::uint64_t seed,
                                              LengthSpec length = LengthSpec::fixed(2),
                                              PriorSpec prior = {}) {
  CTE_CHECK(V >= 2 * K, "sample_anchored_topic_model: need V >= 2K");
  CTE_CHECK(anchor_mass > 0.0 && anchor_mass < 1.0,
            "sample_anchored_topic_model: anchor_mass in (0,1)");
  TopicModel m;
  m.K = K;
  m.V = V;
  m.O = Eigen::MatrixXd::Zero(K, V);
  int rest = V - K;
  for (int k = 0; k < K; ++k) {
    Rng row_rng(derive_seed(seed, static_cast<std::uint64_t>(k) + 0x9e37ULL));
    auto row = row_rng.dirichlet_symmetric(dirichlet_alpha / K, rest);
    m.O(k, k) = anchor_mass;
    for (int v = 0; v < rest; ++v) {
      m.O(k, K + v) = (1.0 - anchor_mass) * row[static_cast<std::size_t>(v)];
    }
  }
  m.length = length;
  m.prior = prior.atoms.empty() && prior.kind == PriorSpec::Kind::FiniteSupport
                ? PriorSpec::pure_topic_uniform(K)
                : std::move(prior);
  m.validate();
  return m;
}

inline Eigen::VectorXd sample_w(const TopicModel& model, Rng& rng) {
  if (model.prior.kind == PriorSpec::Kind::SymmetricDirichlet) {
    auto v = rng.dirichlet_symmetric(model.prior.beta, model.K);
    return Eigen::Map<Eigen::VectorXd>(v.data(), model.K);
  }
  int j = rng.categorical(model.prior.atom_probs);
  return model.prior.atoms[static_cast<std::size_t>(j)];
}

// index of the single unit entry, or -1 if w is not a basis vector
inline int basis_index(const Eigen::VectorXd& w) {
  int idx = -1;
  for (int k = 0; k < w.size(); ++k) {
    if (w(k) == 1.0) {
      if (idx >= 0) return -1;
      idx = k;
    } else if (w(k) != 0.0) {
      return -1;
    }
  }
  return idx;
}

inline Document sample_document_with_length(const TopicModel& model,
                                            const Eigen::VectorXd& w, int m,
                                            Rng& rng) {
  // tokens are iid from the mixture sum_k w_k O(.|k)
  Eigen::VectorXd mix;
  int k0 = basis_index(w);
  if (k0 >= 0) {
    mix = model.O.row(k0);
  } else {
    mix = model.O.transpose() * w;
  }
  std::vector<double> cdf(static_cast<std::size_t>(model.V));
  double acc = 0.0;
  for (int v = 0; v < model.V; ++v) {
    acc += mix(v);
    cdf[static_cast<std::size_t>(v)] = acc;
  }
  Document doc;
  doc.tokens.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double u = rng.uniform01() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int v = static_cast<int>(it - cdf.begin());
    doc.tokens.push_back(static_cast<TokenId>(std::min(v, model.V - 1)));
  }
  return doc;
}

inline Document sample_document(const TopicModel& model, const Eigen::VectorXd& w,
                                Rng& rng) {
  int m = model.length.sample(rng);
  return sample_document_with_length(model, w, m, rng);
}

// Per-document derived seeds; order-free and parallelizable across docs.
inline Corpus sample_corpus(const TopicModel& model, int n, std::uint64_t seed) {
  CTE_CHECK(n >= 1, "sample_corpus: n must be >= 1");
  Corpus c;
  c.docs.resize(static_cast<std::size_t>(n));
  bool pure = model.prior.pure_topic();
  if (pure) c.topics.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd w = sample_w(model, rng);
    c.docs[static_cast<std::size_t>(i)] = sample_document(model, w, rng);
    if (pure) c.topics[static_cast<std::size_t>(i)] = basis_index(w);
  }
  return c;
}

// First half gets the extra token on odd lengths.
inline SplitDocument split_document(const Document& doc, SplitMode mode, Rng& rng) {
  CTE_CHECK(doc.size() >= 2, "split_document: document must have >= 2 tokens");
  std::vector<TokenId> toks = doc.tokens;
  if (mode == SplitMode::RandomPartition) rng.shuffle(toks);
  std::size_t cut = (toks.size() + 1) / 2;
  SplitDocument s;
  s.first_half.tokens.assign(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(cut));
  s.second_half.tokens.assign(toks.begin() + static_cast<std::ptrdiff_t>(cut), toks.end());
  return s;
}

inline SplitDocument split_document(const Document& doc, SplitMode mode,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return split_document(doc, mode, rng);
}

// log P(doc | w) = sum_i log( sum_k w_k O(x_i | k) ).
// -inf for impossible documents, never NaN; empty documents give 0.
inline double doc_loglik_given_w(const TopicModel& model, const Document& doc,
                                 const Eigen::VectorXd& w) {
  model.check_tokens(doc);
  double ll = 0.0;
  for (TokenId t : doc.tokens) {
    double p = w.dot(model.O.col(t));
    if (p <= 0.0) return kNegInf;
    ll += std::log(p);
  }
  return ll;
}

// log P(doc | w = e_k) for every topic; the Lemma-style likelihood vector
inline Eigen::VectorXd doc_loglik_per_topic(const TopicModel& model,
                                            const Document& doc) {
  model.check_tokens(doc);
  Eigen::VectorXd ll = Eigen::VectorXd::Zero(model.K);
  for (TokenId t : doc.tokens) {
    for (int k = 0; k < model.K; ++k) {
      double p = model.O(k, t);
      ll(k) = (p <= 0.0) ? kNegInf : ll(k) + std::log(p);
    }
  }
  return ll;
}

}  // namespace cte
