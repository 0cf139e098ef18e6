#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "pcr/index.hpp"
#include "pcr/random.hpp"
#include "test_support.hpp"

using namespace pcr;

namespace {

struct RandomIndex {
  std::vector<std::string> ids;
  std::vector<int> years;
  std::vector<std::vector<float>> rows;
  VectorIndex index;
};

RandomIndex random_index(Rng& rng, std::size_t n, std::size_t d, bool coarse) {
  RandomIndex r;
  std::vector<float> flat;
  for (std::size_t i = 0; i < n; ++i) {
    r.ids.push_back("id" + std::to_string(rng.next() % 100000));
    r.years.push_back(2000 + static_cast<int>(rng.uniform_index(10)));
    std::vector<float> row(d);
    // coarse values force exact distance ties
    for (float& v : row) v = coarse ? static_cast<float>(rng.uniform_index(3)) : static_cast<float>(rng.uniform(-1, 1));
    r.rows.push_back(row);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  // ids must be unique
  std::set<std::string> seen;
  for (auto& id : r.ids) {
    while (!seen.insert(id).second) id += "x";
  }
  r.index = VectorIndex(r.ids, r.years, d, flat);
  return r;
}

}  // namespace

TEST(Index, MatchesFullSortOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    auto r = random_index(rng, 50, 8, trial % 2 == 0);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> query(8);
      for (double& v : query) v = trial % 2 == 0 ? static_cast<double>(rng.uniform_index(3)) : rng.uniform(-1, 1);
      EXPECT_EQ(hit_ids(r.index.search(query, 10)), oracle::nearest(r.ids, r.rows, query, 10));
    }
  }
}

TEST(Index, YearFilterAndFullRanking) {
  Rng rng(14);
  auto r = random_index(rng, 40, 4, false);
  std::vector<double> query{0.1, 0.2, -0.3, 0.0};
  auto hits = r.index.search(query, 100, 2005);
  std::vector<std::string> ids;
  std::vector<std::vector<float>> rows;
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    if (r.years[i] < 2005) {
      ids.push_back(r.ids[i]);
      rows.push_back(r.rows[i]);
    }
  }
  EXPECT_EQ(hit_ids(hits), oracle::nearest(ids, rows, query, 100));
  EXPECT_EQ(r.index.full_ranking(query).size(), 40u);
  EXPECT_TRUE(r.index.search(query, 5, 1990).empty());
  EXPECT_THROW(r.index.search(query, 0), IndexError);
  EXPECT_THROW(r.index.search(std::vector<double>{1.0}, 3), IndexError);
}

TEST(Index, DistancesSortedAndTiesById) {
  VectorIndex idx({"b", "a", "c"}, {2000, 2000, 2000}, 1, {1.0f, 1.0f, 0.0f});
  auto hits = idx.search(std::vector<double>{1.0}, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].id, "a");
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_EQ(hits[2].id, "c");
  EXPECT_EQ(hits[2].distance, 1.0);
}

TEST(Index, ConstructorValidates) {
  EXPECT_THROW(VectorIndex({"a", "a"}, {1, 1}, 1, {0.f, 0.f}), IndexError);
  EXPECT_THROW(VectorIndex({"a"}, {1, 2}, 1, {0.f}), IndexError);
  EXPECT_THROW(VectorIndex({"a"}, {1}, 2, {0.f}), IndexError);
  EXPECT_THROW(VectorIndex({"a"}, {1}, 1, {NAN}), IndexError);
}

TEST(Index, SaveLoadRoundTrip) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    auto r = random_index(rng, 1 + rng.uniform_index(30), 1 + rng.uniform_index(9), false);
    std::stringstream buf;
    r.index.save(buf);
    VectorIndex back = VectorIndex::load(buf);
    EXPECT_TRUE(back == r.index);
    EXPECT_EQ(back.position(r.ids[0]), r.index.position(r.ids[0]));
  }
  std::stringstream junk("{\"format\":\"other\"}\n");
  EXPECT_THROW(VectorIndex::load(junk), IndexError);
}

TEST(Index, BuildFromPoolUsesArticleEncoding) {
  std::vector<Article> arts{pcr::testing::make_article("b", 2001, "graph", "parsing"),
                            pcr::testing::make_article("a", 2003, "neural", "translation")};
  CandidatePool pool(arts);
  EncoderParams params = pcr::testing::small_params();
  VectorIndex idx = VectorIndex::build(pool, params);
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_EQ(idx.ids()[0], "a");
  Embedding e = encode_article(params, arts[1]);
  for (std::size_t j = 0; j < e.size(); ++j) EXPECT_EQ(idx.row(0)[j], static_cast<float>(e[j]));
  EXPECT_EQ(idx.years()[1], 2001);
}
