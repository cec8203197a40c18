#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <map>

#include "cte/contrastive.hpp"

using namespace cte;

namespace {

Corpus toy_corpus(int n, int len, std::uint64_t seed) {
  auto model = sample_topic_model(2, 6, 1.0, seed, LengthSpec::fixed(len));
  return sample_corpus(model, n, derive_seed(seed, 77));
}

std::vector<TokenId> sorted_tokens(const Document& a, const Document& b) {
  std::vector<TokenId> out = a.tokens;
  out.insert(out.end(), b.tokens.begin(), b.tokens.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("algorithm1: single-document corpus flags self negatives") {
  Corpus c = toy_corpus(1, 4, 1);
  auto ds = build_algorithm1(c, 200, SplitMode::RandomPartition, 3);
  int negatives = 0;
  for (const auto& p : ds.pairs) {
    if (p.label == 0) {
      ++negatives;
      REQUIRE(p.src_first == p.src_second);
    }
  }
  REQUIRE(negatives > 0);
  REQUIRE(ds.provenance.self_negatives == negatives);
}

TEST_CASE("algorithm1: positive fraction within the binomial band") {
  Corpus c = toy_corpus(50, 6, 2);
  auto ds = build_algorithm1(c, 100000, SplitMode::RandomPartition, 11);
  double pos = 0;
  for (const auto& p : ds.pairs) pos += p.label;
  double frac = pos / ds.size();
  REQUIRE(frac >= 0.494);
  REQUIRE(frac <= 0.506);
}

TEST_CASE("algorithm1: deterministic given corpus and seed") {
  Corpus c = toy_corpus(20, 5, 4);
  auto a = build_algorithm1(c, 500, SplitMode::RandomPartition, 9);
  auto b = build_algorithm1(c, 500, SplitMode::RandomPartition, 9);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    REQUIRE(a.pairs[static_cast<std::size_t>(i)].first ==
            b.pairs[static_cast<std::size_t>(i)].first);
    REQUIRE(a.pairs[static_cast<std::size_t>(i)].second ==
            b.pairs[static_cast<std::size_t>(i)].second);
    REQUIRE(a.pairs[static_cast<std::size_t>(i)].label ==
            b.pairs[static_cast<std::size_t>(i)].label);
  }
}

TEST_CASE("algorithm1: rejects non-positive n") {
  Corpus c = toy_corpus(5, 4, 5);
  REQUIRE_THROWS_AS(build_algorithm1(c, 0, SplitMode::Contiguous, 0), Error);
}

TEST_CASE("positive pairs reassemble a corpus document") {
  Corpus c = toy_corpus(30, 7, 8);
  auto ds = build_algorithm1(c, 400, SplitMode::RandomPartition, 21);
  for (const auto& p : ds.pairs) {
    if (p.label == 1) {
      std::vector<TokenId> orig =
          c.docs[static_cast<std::size_t>(p.src_first)].tokens;
      std::sort(orig.begin(), orig.end());
      REQUIRE(sorted_tokens(p.first, p.second) == orig);
    }
  }
}

TEST_CASE("paired permutation: swap gives two positives and two negatives") {
  Corpus c = toy_corpus(2, 4, 10);
  auto ds = build_paired_permutation_with(c, {1, 0}, SplitMode::RandomPartition, 5);
  int pos = 0, neg = 0;
  for (const auto& p : ds.pairs) (p.label ? pos : neg)++;
  REQUIRE(pos == 2);
  REQUIRE(neg == 2);
  REQUIRE(ds.provenance.discarded_collisions == 0);
}

TEST_CASE("paired permutation: identity discards every collision") {
  Corpus c = toy_corpus(2, 4, 12);
  auto ds = build_paired_permutation_with(c, {0, 1}, SplitMode::RandomPartition, 5);
  int pos = 0, neg = 0;
  for (const auto& p : ds.pairs) (p.label ? pos : neg)++;
  REQUIRE(pos == 2);
  REQUIRE(neg == 0);
  REQUIRE(ds.provenance.discarded_collisions == 2);
}

TEST_CASE("paired permutation: expected collisions of a uniform permutation is ~1") {
  Corpus c = toy_corpus(1000, 4, 13);
  double total = 0.0;
  const int seeds = 40;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    auto ds = build_paired_permutation(c, SplitMode::RandomPartition, 1000 + s);
    total += ds.provenance.discarded_collisions;
  }
  double mean = total / seeds;  // fixed points of a uniform permutation
  REQUIRE(mean > 0.3);
  REQUIRE(mean < 2.0);
}

TEST_CASE("paired permutation: sizes and no self negatives") {
  Corpus c = toy_corpus(200, 5, 14);
  auto ds = build_paired_permutation(c, SplitMode::RandomPartition, 31);
  int pos = 0, neg = 0;
  for (const auto& p : ds.pairs) {
    if (p.label == 1) {
      ++pos;
    } else {
      ++neg;
      REQUIRE(p.src_first != p.src_second);
    }
  }
  REQUIRE(pos == c.size());
  REQUIRE(neg == c.size() - ds.provenance.discarded_collisions);
  REQUIRE(ds.provenance.shared_split);
}

TEST_CASE("resampling schedule: rate 1.0 regenerates every epoch") {
  auto model = sample_topic_model(2, 6, 1.0, 3, LengthSpec::fixed(4));
  auto stream = DatasetStream::simulation(model, 10, PairScheme::Algorithm1,
                                          SplitMode::RandomPartition,
                                          period_from_rate(1.0), 5, 20);
  for (int e = 0; e < 100; ++e) stream.for_epoch(e);
  REQUIRE(stream.regenerations() == 100);
}

TEST_CASE("resampling schedule: rate 0.1 regenerates every 10 epochs") {
  auto model = sample_topic_model(2, 6, 1.0, 3, LengthSpec::fixed(4));
  auto stream = DatasetStream::simulation(model, 10, PairScheme::Algorithm1,
                                          SplitMode::RandomPartition,
                                          period_from_rate(0.1), 5, 20);
  for (int e = 0; e < 100; ++e) stream.for_epoch(e);
  REQUIRE(stream.regenerations() == 10);
}

TEST_CASE("resampling schedule: period 3 refreshes at epochs 0, 3, 6") {
  Corpus c = toy_corpus(12, 4, 15);
  auto stream = DatasetStream::fixed_corpus(c, PairScheme::PairedPermutation,
                                            SplitMode::RandomPartition, 3, 7);
  std::map<int, std::uint64_t> first_pair_hash;
  int regen_before = 0;
  for (int e = 0; e < 9; ++e) {
    int before = stream.regenerations();
    stream.for_epoch(e);
    if (stream.regenerations() > before) first_pair_hash[e] = 1;
    regen_before = stream.regenerations();
  }
  REQUIRE(regen_before == 3);
  REQUIRE(first_pair_hash.count(0) == 1);
  REQUIRE(first_pair_hash.count(3) == 1);
  REQUIRE(first_pair_hash.count(6) == 1);
}

TEST_CASE("simulation streams draw fresh documents at each boundary") {
  auto model = sample_topic_model(2, 6, 1.0, 3, LengthSpec::fixed(4));
  auto stream = DatasetStream::simulation(model, 8, PairScheme::PairedPermutation,
                                          SplitMode::RandomPartition, 1, 5);
  auto h0 = stream.for_epoch(0).provenance.corpus_hash;
  auto h1 = stream.for_epoch(1).provenance.corpus_hash;
  REQUIRE(h0 != h1);
}
