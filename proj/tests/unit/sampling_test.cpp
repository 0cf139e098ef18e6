#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "pcr/random.hpp"
#include "pcr/sampling.hpp"
#include "pcr/synthetic.hpp"
#include "test_support.hpp"

using namespace pcr;
using pcr::testing::make_article;
using pcr::testing::make_paragraph;
using pcr::testing::make_sentence;
using L = DiscourseLabel;

namespace {

IdSet ids(const std::string& prefix, int n) {
  IdSet out;
  for (int i = 0; i < n; ++i) out.insert(prefix + std::to_string(i));
  return out;
}

ParagraphRecord two_positive_paragraph() {
  return make_paragraph("para", "c", {make_sentence(L::kTransition), make_sentence(L::kOther, {"a", "b"})});
}

std::array<int, 3> histogram(const std::vector<Quadruplet>& qs) {
  std::array<int, 3> h{};
  for (const auto& q : qs) ++h[static_cast<int>(q.neg_pool)];
  return h;
}

// Set construction straight from the definitions.
NegativePools oracle_pools(const ParagraphRecord& p, const Article& citing,
                           const std::vector<ParagraphRecord>& all, const std::vector<Article>& arts) {
  IdSet own;
  for (const auto& s : p.sentences) own.insert(s.cited_ids.begin(), s.cited_ids.end());
  auto keep = [&](const ArticleId& id) { return !own.contains(id) && id != citing.id; };
  NegativePools out;
  for (const auto& other : all) {
    if (other.citing_id != citing.id || other.id == p.id) continue;
    for (const auto& s : other.sentences) {
      for (const auto& id : s.cited_ids) {
        if (keep(id)) out.pool1.insert(id);
      }
    }
  }
  for (const auto& id : citing.rw_citations) {
    if (keep(id)) out.pool1.insert(id);
  }
  for (const auto& id : citing.other_citations) {
    if (keep(id)) out.pool2.insert(id);
  }
  for (const auto& rel : p.relevant_ids()) {
    for (const auto& a : arts) {
      if (a.id != rel) continue;
      for (const auto* src : {&a.rw_citations, &a.other_citations}) {
        for (const auto& id : *src) {
          if (keep(id) && !citing.cites(id)) out.pool3.insert(id);
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST(NegativePools, DefinitionExamples) {
  Article citing = make_article("c", 2018, "t", "a", {"x", "y", "w"}, {});
  auto pa = make_paragraph("A", "c", {make_sentence(L::kTransition), make_sentence(L::kOther, {"x"})});
  auto pb = make_paragraph("B", "c", {make_sentence(L::kTransition), make_sentence(L::kOther, {"y"})});
  std::vector<Article> arts{citing, make_article("x", 2010, "t", "a", {"z", "w"}), make_article("y", 2010),
                            make_article("z", 2000), make_article("w", 2000)};
  NegativePools pools = build_negative_pools(pa, citing, {pa, pb}, citation_lookup(arts));
  // w is an RW citation outside paragraph A as well
  EXPECT_EQ(pools.pool1, (IdSet{"w", "y"}));
  EXPECT_TRUE(pools.pool2.empty());
  EXPECT_EQ(pools.pool3, (IdSet{"z"}));
}

TEST(NegativePools, MatchesOracleOnSyntheticCorpus) {
  SyntheticConfig cfg;
  cfg.seed = 5;
  SyntheticCorpus corpus = generate_synthetic_corpus(cfg);
  auto lookup = citation_lookup(corpus.articles);
  std::map<std::string, const Article*> by_id;
  for (const auto& a : corpus.articles) by_id[a.id] = &a;
  for (const auto& p : corpus.paragraphs) {
    const Article& citing = *by_id.at(p.citing_id);
    NegativePools got = build_negative_pools(p, citing, corpus.paragraphs, lookup);
    NegativePools want = oracle_pools(p, citing, corpus.paragraphs, corpus.articles);
    EXPECT_EQ(got.pool1, want.pool1) << p.id;
    EXPECT_EQ(got.pool2, want.pool2) << p.id;
    EXPECT_EQ(got.pool3, want.pool3) << p.id;
    for (const auto* pool : {&got.pool1, &got.pool2, &got.pool3}) {
      EXPECT_FALSE(pool->contains(citing.id));
      for (const auto& r : p.relevant_ids()) EXPECT_FALSE(pool->contains(r));
    }
    for (const auto& id : got.pool3) EXPECT_FALSE(citing.cites(id));
  }
}

TEST(SampleQuadruplets, FullQuota) {
  NegativePools pools{ids("n1_", 3), ids("n2_", 3), ids("n3_", 4)};
  auto qs = sample_quadruplets(two_positive_paragraph(), pools, 11);
  ASSERT_EQ(qs.size(), 10u);
  EXPECT_EQ(histogram(qs), (std::array<int, 3>{3, 3, 4}));
}

TEST(SampleQuadruplets, BackfillFromP3) {
  NegativePools pools{ids("n1_", 5), {}, ids("n3_", 9)};
  auto qs = sample_quadruplets(two_positive_paragraph(), pools, 11);
  ASSERT_EQ(qs.size(), 10u);
  EXPECT_EQ(histogram(qs), (std::array<int, 3>{3, 0, 7}));
}

TEST(SampleQuadruplets, BackfillOrderThenP1ThenP2) {
  // P3 short by 3: P3 exhausted, P1 refills before P2.
  NegativePools pools{ids("n1_", 10), ids("n2_", 10), ids("n3_", 1)};
  auto qs = sample_quadruplets(two_positive_paragraph(), pools, 2);
  EXPECT_EQ(histogram(qs), (std::array<int, 3>{6, 3, 1}));
  NegativePools tiny{ids("n1_", 1), ids("n2_", 1), ids("n3_", 1)};
  auto few = sample_quadruplets(two_positive_paragraph(), tiny, 2);
  EXPECT_EQ(few.size(), 3u);
}

TEST(SampleQuadruplets, EmptyPoolsAndSinglePositive) {
  EXPECT_TRUE(sample_quadruplets(two_positive_paragraph(), NegativePools{}, 1).empty());
  auto single = make_paragraph("p", "c", {make_sentence(L::kTransition), make_sentence(L::kOther, {"a"})});
  EXPECT_TRUE(sample_quadruplets(single, NegativePools{ids("n", 5), {}, {}}, 1).empty());
}

TEST(SampleQuadruplets, DeterministicAndInvariant) {
  auto p = make_paragraph("para", "c", {make_sentence(L::kTransition),
                                        make_sentence(L::kOther, {"a", "b", "d"})});
  NegativePools pools{ids("n1_", 6), ids("n2_", 2), ids("n3_", 8)};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto first = sample_quadruplets(p, pools, seed);
    EXPECT_EQ(first, sample_quadruplets(p, pools, seed));
    ASSERT_EQ(first.size(), 10u);
    std::set<ArticleId> negs;
    for (const auto& q : first) {
      EXPECT_NE(q.pos1, q.pos2);
      EXPECT_TRUE(p.relevant_ids().contains(q.pos1));
      EXPECT_TRUE(p.relevant_ids().contains(q.pos2));
      EXPECT_FALSE(p.relevant_ids().contains(q.neg));
      EXPECT_NE(q.neg, "c");
      EXPECT_TRUE(pools.get(q.neg_pool).contains(q.neg));
      EXPECT_TRUE(negs.insert(q.neg).second) << "repeated negative";
      EXPECT_EQ(q.paragraph_id, "para");
    }
  }
  EXPECT_NE(sample_quadruplets(p, pools, 1), sample_quadruplets(p, pools, 2));
}

TEST(SampleQuadruplets, PositivePairsRoughlyUniform) {
  auto p = make_paragraph("para", "c", {make_sentence(L::kTransition),
                                        make_sentence(L::kOther, {"a", "b", "d"})});
  NegativePools pools{ids("n1_", 3), ids("n2_", 3), ids("n3_", 4)};
  std::map<std::set<ArticleId>, int> pairs;
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    for (const auto& q : sample_quadruplets(p, pools, seed)) ++pairs[{q.pos1, q.pos2}];
  }
  ASSERT_EQ(pairs.size(), 3u);
  for (const auto& [pair, n] : pairs) EXPECT_NEAR(n, 2000, 200);
}

TEST(SampleCorpus, QuotaOnAbundantPoolsAndFileBytes) {
  auto corpus = pcr::testing::abundant_pool_corpus(20);
  auto lookup = citation_lookup(corpus.articles);
  for (const auto& p : corpus.paragraphs) {
    const Article& citing = *std::find_if(corpus.articles.begin(), corpus.articles.end(),
                                          [&](const Article& a) { return a.id == p.citing_id; });
    NegativePools pools = build_negative_pools(p, citing, corpus.paragraphs, lookup);
    ASSERT_GE(pools.pool1.size(), 10u);
    ASSERT_GE(pools.pool2.size(), 10u);
    ASSERT_GE(pools.pool3.size(), 10u);
  }
  QuadrupletSet set = sample_corpus(eligible_paragraphs(corpus.paragraphs), corpus.paragraphs,
                                    corpus.articles, 77);
  std::map<std::string, std::array<int, 3>> per_paragraph;
  for (const auto& q : set.quadruplets) ++per_paragraph[q.paragraph_id][static_cast<int>(q.neg_pool)];
  EXPECT_EQ(per_paragraph.size(), 40u);
  for (const auto& [id, h] : per_paragraph) EXPECT_EQ(h, (std::array<int, 3>{3, 3, 4})) << id;

  pcr::testing::TempDir dir;
  write_quadruplets(dir / "a.jsonl", set);
  QuadrupletSet again = sample_corpus(eligible_paragraphs(corpus.paragraphs), corpus.paragraphs,
                                      corpus.articles, 77);
  write_quadruplets(dir / "b.jsonl", again);
  EXPECT_EQ(pcr::testing::read_file(dir / "a.jsonl"), pcr::testing::read_file(dir / "b.jsonl"));

  QuadrupletSet back = load_quadruplets(dir / "a.jsonl");
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.quadruplets, set.quadruplets);
  std::string first_line = pcr::testing::read_file(dir / "a.jsonl").substr(0, 30);
  EXPECT_EQ(first_line.rfind("{\"seed\":77,\"quota\":[3,3,4]}", 0), 0u) << first_line;
}

TEST(SampleCorpus, SeedXorHashOfParagraph) {
  EXPECT_EQ(paragraph_seed(5, "p1"), 5ULL ^ fnv1a64("p1"));
}

TEST(PoolNames, RoundTrip) {
  for (auto p : {NegativePool::kP1, NegativePool::kP2, NegativePool::kP3}) {
    EXPECT_EQ(parse_pool_name(pool_name(p)), p);
  }
  EXPECT_THROW(parse_pool_name("P4"), std::exception);
}
