// Test-only reference oracles, deliberately independent of the library's
// psi/eta/likelihood implementation path: everything here is brute-force
// enumeration straight from the generative definitions.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "cte/topic_model.hpp"

namespace ref {

// P(x | w) = sum over all topic assignments z in [K]^m of
// prod_i w_{z_i} O(x_i | z_i)
inline double brute_likelihood(const cte::TopicModel& model,
                               const cte::Document& doc,
                               const Eigen::VectorXd& w) {
  const int m = doc.size();
  const int K = model.K;
  double total = 0.0;
  std::vector<int> z(static_cast<std::size_t>(m), 0);
  for (;;) {
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
      prod *= w(z[static_cast<std::size_t>(i)]) *
              model.O(z[static_cast<std::size_t>(i)],
                      doc.tokens[static_cast<std::size_t>(i)]);
    }
    total += prod;
    int pos = m - 1;
    while (pos >= 0 && z[static_cast<std::size_t>(pos)] == K - 1) {
      z[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    z[static_cast<std::size_t>(pos)] += 1;
  }
  return total;
}

// psi entries by brute force: bucket prod_i O(x_i | z_i) by the composition
// counts of z
inline std::vector<std::pair<std::vector<int>, double>> brute_psi(
    const cte::TopicModel& model, const cte::Document& doc) {
  const int m = doc.size();
  const int K = model.K;
  std::vector<std::pair<std::vector<int>, double>> buckets;
  auto find = [&buckets](const std::vector<int>& alpha) -> double& {
    for (auto& [a, v] : buckets) {
      if (a == alpha) return v;
    }
    buckets.emplace_back(alpha, 0.0);
    return buckets.back().second;
  };
  std::vector<int> z(static_cast<std::size_t>(m), 0);
  for (;;) {
    double prod = 1.0;
    std::vector<int> alpha(static_cast<std::size_t>(K), 0);
    for (int i = 0; i < m; ++i) {
      prod *= model.O(z[static_cast<std::size_t>(i)],
                      doc.tokens[static_cast<std::size_t>(i)]);
      alpha[static_cast<std::size_t>(z[static_cast<std::size_t>(i)])] += 1;
    }
    find(alpha) += prod;
    int pos = m - 1;
    while (pos >= 0 && z[static_cast<std::size_t>(pos)] == K - 1) {
      z[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    z[static_cast<std::size_t>(pos)] += 1;
  }
  return buckets;
}

inline double marginal(const cte::TopicModel& model, const cte::Document& doc) {
  double p = 0.0;
  for (std::size_t j = 0; j < model.prior.atoms.size(); ++j) {
    p += model.prior.atom_probs[j] * brute_likelihood(model, doc, model.prior.atoms[j]);
  }
  return p;
}

inline double joint(const cte::TopicModel& model, const cte::Document& x,
                    const cte::Document& xp) {
  double p = 0.0;
  for (std::size_t j = 0; j < model.prior.atoms.size(); ++j) {
    p += model.prior.atom_probs[j] *
         brute_likelihood(model, x, model.prior.atoms[j]) *
         brute_likelihood(model, xp, model.prior.atoms[j]);
  }
  return p;
}

inline double g_star(const cte::TopicModel& model, const cte::Document& x,
                     const cte::Document& xp) {
  return joint(model, x, xp) / (marginal(model, x) * marginal(model, xp));
}

// E[ f(w) | x ] under a finite-support prior
inline double posterior_expectation(
    const cte::TopicModel& model, const cte::Document& doc,
    const std::function<double(const Eigen::VectorXd&)>& f) {
  double z = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < model.prior.atoms.size(); ++j) {
    double pj = model.prior.atom_probs[j] *
                brute_likelihood(model, doc, model.prior.atoms[j]);
    z += pj;
    acc += pj * f(model.prior.atoms[j]);
  }
  return acc / z;
}

// all documents of length m over vocab V, lexicographic
inline std::vector<cte::Document> all_docs(int V, int m) {
  std::vector<cte::Document> out;
  cte::Document d;
  d.tokens.assign(static_cast<std::size_t>(m), 0);
  for (;;) {
    out.push_back(d);
    int pos = m - 1;
    while (pos >= 0 && d.tokens[static_cast<std::size_t>(pos)] == V - 1) {
      d.tokens[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    d.tokens[static_cast<std::size_t>(pos)] += 1;
  }
  return out;
}

// random interior simplex point
inline Eigen::VectorXd random_simplex(int K, cte::Rng& rng) {
  Eigen::VectorXd w(K);
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    w(k) = rng.exponential() + 1e-3;
    s += w(k);
  }
  w /= s;
  return w;
}

}  // namespace ref
