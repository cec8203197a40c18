#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cte/numeric.hpp"
#include "cte/rng.hpp"
#include "cte/topic_model.hpp"

namespace cte {

struct ContrastivePair {
  Document first;
  Document second;
  int label = 0;       // 1 = halves of one document, 0 = cross-document
  int src_first = -1;  // corpus indices used
  int src_second = -1;
};

enum class PairScheme { Algorithm1, PairedPermutation };

struct DatasetProvenance {
  std::uint64_t corpus_hash = 0;
  std::uint64_t seed = 0;
  PairScheme scheme = PairScheme::Algorithm1;
  SplitMode split_mode = SplitMode::RandomPartition;
  int self_negatives = 0;   // negatives whose two sources coincide
  int discarded_collisions = 0;  // permutation fixed points dropped
  bool shared_split = true;  // positives and negatives reuse one split per doc
};

struct ContrastiveDataset {
  std::vector<ContrastivePair> pairs;
  DatasetProvenance provenance;

  int size() const { return static_cast<int>(pairs.size()); }
};

inline std::uint64_t corpus_hash(const Corpus& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(corpus.size()));
  for (const auto& d : corpus.docs) {
    mix(static_cast<std::uint64_t>(d.size()));
    for (TokenId t : d.tokens) mix(static_cast<std::uint64_t>(t) + 1);
  }
  return h;
}

// Per iteration: two uniform documents, split both, emit the positive split
// of the first or the cross pair, each with probability 1/2.
inline ContrastiveDataset build_algorithm1(const Corpus& corpus, int n,
                                           SplitMode split_mode, std::uint64_t seed) {
  CTE_CHECK(n > 0, "build_algorithm1: n must be positive");
  CTE_CHECK(corpus.size() >= 1, "build_algorithm1: corpus is empty");
  for (const auto& d : corpus.docs) {
    CTE_CHECK(d.size() >= 2, "build_algorithm1: all documents must have >= 2 tokens");
  }
  ContrastiveDataset ds;
  ds.pairs.reserve(static_cast<std::size_t>(n));
  ds.provenance = {corpus_hash(corpus), seed, PairScheme::Algorithm1, split_mode, 0, 0,
                   true};
  auto u = static_cast<std::uint64_t>(corpus.size());
  for (int t = 0; t < n; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    int i = static_cast<int>(rng.uniform_below(u));
    int j = static_cast<int>(rng.uniform_below(u));
    SplitDocument si = split_document(corpus.docs[static_cast<std::size_t>(i)],
                                      split_mode, rng);
    SplitDocument sj = split_document(corpus.docs[static_cast<std::size_t>(j)],
                                      split_mode, rng);
    bool positive = rng.uniform01() < 0.5;
    ContrastivePair p;
    p.first = si.first_half;
    p.src_first = i;
    if (positive) {
      p.second = si.second_half;
      p.label = 1;
      p.src_second = i;
    } else {
      p.second = sj.second_half;
      p.label = 0;
      p.src_second = j;
      if (i == j) ds.provenance.self_negatives += 1;  // replacement sampling
    }
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

// Implementation detail exposed for tests: explicit permutation of second
// halves. Fixed points are collisions and are discarded.
inline ContrastiveDataset build_paired_permutation_with(
    const Corpus& corpus, const std::vector<int>& perm, SplitMode split_mode,
    std::uint64_t seed) {
  CTE_CHECK(corpus.size() >= 2, "build_paired_permutation: corpus size must be >= 2");
  CTE_CHECK(static_cast<int>(perm.size()) == corpus.size(),
            "build_paired_permutation: permutation size mismatch");
  ContrastiveDataset ds;
  ds.provenance = {corpus_hash(corpus), seed, PairScheme::PairedPermutation,
                   split_mode, 0, 0, true};
  std::vector<SplitDocument> splits(static_cast<std::size_t>(corpus.size()));
  for (int i = 0; i < corpus.size(); ++i) {
    Rng rng(derive_seed(seed, 0x5eedULL + static_cast<std::uint64_t>(i)));
    splits[static_cast<std::size_t>(i)] =
        split_document(corpus.docs[static_cast<std::size_t>(i)], split_mode, rng);
  }
  for (int i = 0; i < corpus.size(); ++i) {
    const auto& s = splits[static_cast<std::size_t>(i)];
    ds.pairs.push_back({s.first_half, s.second_half, 1, i, i});
  }
  for (int i = 0; i < corpus.size(); ++i) {
    int j = perm[static_cast<std::size_t>(i)];
    if (j == i) {
      ds.provenance.discarded_collisions += 1;
      continue;
    }
    ds.pairs.push_back({splits[static_cast<std::size_t>(i)].first_half,
                        splits[static_cast<std::size_t>(j)].second_half, 0, i, j});
  }
  return ds;
}

// One positive per document plus one negative per non-fixed-point of a
// uniform permutation of second halves; yields ~2x the corpus size.
inline ContrastiveDataset build_paired_permutation(const Corpus& corpus,
                                                   SplitMode split_mode,
                                                   std::uint64_t seed) {
  CTE_CHECK(corpus.size() >= 2, "build_paired_permutation: corpus size must be >= 2");
  Rng rng(derive_seed(seed, 0x9e2aULL));
  std::vector<int> perm = rng.permutation(corpus.size());
  return build_paired_permutation_with(corpus, perm, split_mode, seed);
}

inline int period_from_rate(double r) {
  CTE_CHECK(r > 0.0 && r <= 1.0, "resampling rate must be in (0, 1]");
  return std::max(1, static_cast<int>(std::llround(1.0 / r)));
}

// Stream of contrastive datasets refreshed every `period` epochs.
// Simulation sources draw fresh documents from the generative model at each
// boundary; corpus sources re-split / re-permute a fixed corpus.
class DatasetStream {
 public:
  using CorpusSource = std::function<Corpus(std::uint64_t seed)>;
  using DatasetGenerator = std::function<ContrastiveDataset(std::uint64_t seed)>;

  DatasetStream(DatasetGenerator generator, int period, std::uint64_t seed)
      : generator_(std::move(generator)), period_(period), seed_(seed) {
    CTE_CHECK(period_ >= 1, "resampling period must be >= 1 epoch");
  }

  DatasetStream(CorpusSource source, PairScheme scheme, SplitMode split_mode,
                int period, std::uint64_t seed, int algorithm1_pairs = 0)
      : period_(period), seed_(seed) {
    CTE_CHECK(period_ >= 1, "resampling period must be >= 1 epoch");
    generator_ = [source = std::move(source), scheme, split_mode,
                  algorithm1_pairs](std::uint64_t s) {
      Corpus c = source(derive_seed(s, 1));
      if (scheme == PairScheme::Algorithm1) {
        int n = algorithm1_pairs > 0 ? algorithm1_pairs : 2 * c.size();
        return build_algorithm1(c, n, split_mode, derive_seed(s, 2));
      }
      return build_paired_permutation(c, split_mode, derive_seed(s, 2));
    };
  }

  static DatasetStream simulation(const TopicModel& model, int corpus_size,
                                  PairScheme scheme, SplitMode split_mode, int period,
                                  std::uint64_t seed, int algorithm1_pairs = 0) {
    TopicModel m = model;
    return DatasetStream(
        [m, corpus_size](std::uint64_t s) { return sample_corpus(m, corpus_size, s); },
        scheme, split_mode, period, seed, algorithm1_pairs);
  }

  static DatasetStream fixed_corpus(Corpus corpus, PairScheme scheme,
                                    SplitMode split_mode, int period,
                                    std::uint64_t seed, int algorithm1_pairs = 0) {
    return DatasetStream([corpus](std::uint64_t) { return corpus; }, scheme,
                         split_mode, period, seed, algorithm1_pairs);
  }

  int period() const { return period_; }
  int regenerations() const { return regenerations_; }

  const ContrastiveDataset& for_epoch(int epoch) {
    int boundary = epoch / period_;
    if (!have_ || boundary != cached_boundary_) {
      cached_ = generator_(derive_seed(seed_, static_cast<std::uint64_t>(boundary)));
      cached_boundary_ = boundary;
      have_ = true;
      ++regenerations_;
    }
    return cached_;
  }

  // independent dataset for holdout evaluation
  ContrastiveDataset make_holdout(std::uint64_t tag) const {
    return generator_(derive_seed(seed_, 0xb01dULL + tag));
  }

 private:
  DatasetGenerator generator_;
  int period_;
  std::uint64_t seed_;
  ContrastiveDataset cached_;
  int cached_boundary_ = -1;
  bool have_ = false;
  int regenerations_ = 0;
};

}  // namespace cte
