#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cte/numeric.hpp"

namespace cte {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

// number of alpha in Z_+^K with sum = m
inline std::uint64_t compositions_count(int K, int m) {
  return binomial(K + m - 1, m);
}

// All alpha in Z_+^K with sum(alpha) <= m_max, graded lexicographic:
// degree blocks in increasing degree; within a degree, exponent of the first
// coordinate descending (w1 > w2 > ... monomial order). Index 0 is alpha = 0.
class MonomialBasis {
 public:
  MonomialBasis(int K, int m_max) : K_(K), m_max_(m_max) {
    CTE_CHECK(K >= 1, "basis: K must be >= 1");
    CTE_CHECK(m_max >= 0, "basis: m_max must be >= 0");
    degree_offset_.push_back(0);
    std::vector<int> alpha(static_cast<std::size_t>(K), 0);
    for (int d = 0; d <= m_max; ++d) {
      emit(alpha, 0, d);
      degree_offset_.push_back(static_cast<int>(alphas_.size()));
    }
    for (int i = 0; i < size(); ++i) index_[alphas_[static_cast<std::size_t>(i)]] = i;
  }

  int K() const { return K_; }
  int max_degree() const { return m_max_; }
  int size() const { return static_cast<int>(alphas_.size()); }

  const std::vector<int>& alpha(int i) const {
    return alphas_[static_cast<std::size_t>(i)];
  }

  int degree(int i) const {
    int d = 0;
    for (int a : alpha(i)) d += a;
    return d;
  }

  // flat index of alpha, or -1 when absent
  int index_of(const std::vector<int>& a) const {
    auto it = index_.find(a);
    return it == index_.end() ? -1 : it->second;
  }

  // [begin, end) of the degree-d block
  int degree_begin(int d) const { return degree_offset_[static_cast<std::size_t>(d)]; }
  int degree_end(int d) const { return degree_offset_[static_cast<std::size_t>(d) + 1]; }

  // entries of the degree-1 block in topic order e_1..e_K
  Eigen::VectorXd degree1_block(const Eigen::VectorXd& values) const {
    CTE_CHECK(m_max_ >= 1, "basis: no degree-1 block");
    Eigen::VectorXd out(K_);
    for (int k = 0; k < K_; ++k) {
      std::vector<int> e(static_cast<std::size_t>(K_), 0);
      e[static_cast<std::size_t>(k)] = 1;
      out(k) = values(index_of(e));
    }
    return out;
  }

 private:
  void emit(std::vector<int>& alpha, int pos, int remaining) {
    if (pos == K_ - 1) {
      alpha[static_cast<std::size_t>(pos)] = remaining;
      alphas_.push_back(alpha);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[static_cast<std::size_t>(pos)] = a;
      emit(alpha, pos + 1, remaining - a);
    }
    alpha[static_cast<std::size_t>(pos)] = 0;
  }

  int K_;
  int m_max_;
  std::vector<std::vector<int>> alphas_;
  std::vector<int> degree_offset_;
  std::map<std::vector<int>, int> index_;
};

// pi(w): entry at alpha is prod_k w_k^{alpha_k}; entry 0 is 1
inline Eigen::VectorXd pi_vector(const Eigen::VectorXd& w, const MonomialBasis& basis) {
  CTE_CHECK(w.size() == basis.K(), "pi_vector: dimension mismatch");
  Eigen::VectorXd out(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    double v = 1.0;
    const auto& a = basis.alpha(i);
    for (int k = 0; k < basis.K(); ++k) {
      for (int rep = 0; rep < a[static_cast<std::size_t>(k)]; ++rep) v *= w(k);
    }
    out(i) = v;
  }
  return out;
}

}  // namespace cte
