#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcr/corpus.hpp"

namespace pcr {

enum class NegativePool { kP1, kP2, kP3 };

std::string_view pool_name(NegativePool pool);
NegativePool parse_pool_name(std::string_view name);

// Hard-negative sources for one paragraph:
//   pool1: cited in the related-work section of the citing article, in a
//          different paragraph;
//   pool2: cited by the citing article outside the related-work section;
//   pool3: cited by the paragraph's cited articles but not by the citing
//          article.
// Every pool excludes all ids cited in the paragraph itself and the citing id.
struct NegativePools {
  IdSet pool1;
  IdSet pool2;
  IdSet pool3;

  const IdSet& get(NegativePool pool) const;
  IdSet& get(NegativePool pool);
  std::size_t total() const { return pool1.size() + pool2.size() + pool3.size(); }
};

struct Quadruplet {
  std::string paragraph_id;
  ArticleId pos1;
  ArticleId pos2;
  ArticleId neg;
  NegativePool neg_pool = NegativePool::kP1;

  friend bool operator==(const Quadruplet&, const Quadruplet&) = default;
};

// Per-pool sample counts, indexed by NegativePool.
struct Quota {
  std::array<std::size_t, 3> per_pool{3, 3, 4};

  std::size_t total() const { return per_pool[0] + per_pool[1] + per_pool[2]; }
  std::size_t operator[](NegativePool pool) const { return per_pool[static_cast<int>(pool)]; }
};

// Order in which pools make up for a deficit in another pool.
inline constexpr std::array<NegativePool, 3> kBackfillOrder{NegativePool::kP3, NegativePool::kP1,
                                                            NegativePool::kP2};

using CitationLookup = std::unordered_map<ArticleId, IdSet>;

// id -> every article it cites (related-work and other sections).
CitationLookup citation_lookup(const std::vector<Article>& articles);

NegativePools build_negative_pools(const ParagraphRecord& paragraph, const Article& citing,
                                   const std::vector<ParagraphRecord>& all_paragraphs,
                                   const CitationLookup& lookup);

// Sub-seed for one paragraph so paragraphs can be sampled independently.
std::uint64_t paragraph_seed(std::uint64_t seed, std::string_view paragraph_id);

// Samples up to quota.total() quadruplets. Positives are an unordered pair of
// distinct relevant ids drawn uniformly per quadruplet; negatives are drawn
// without replacement across the whole paragraph. Returns an empty list when
// the paragraph has fewer than two relevant ids or all pools are empty.
std::vector<Quadruplet> sample_quadruplets(const ParagraphRecord& paragraph,
                                           const NegativePools& pools, std::uint64_t seed,
                                           const Quota& quota = {});

struct QuadrupletSet {
  std::uint64_t seed = 0;
  Quota quota;
  std::vector<Quadruplet> quadruplets;
};

struct SamplingStats {
  std::size_t paragraphs = 0;
  std::size_t skipped_single_positive = 0;
  std::size_t skipped_no_negatives = 0;
  std::size_t short_of_quota = 0;
};

// Samples every paragraph in `paragraphs` (typically the training split).
// Negatives are restricted to ids in `known_articles` so that every sampled
// id can be embedded.
QuadrupletSet sample_corpus(const std::vector<ParagraphRecord>& paragraphs,
                            const std::vector<ParagraphRecord>& all_paragraphs,
                            const std::vector<Article>& known_articles, std::uint64_t seed,
                            const Quota& quota = {}, SamplingStats* stats = nullptr);

// Header line {"seed":..,"quota":[..]} followed by one quadruplet per line.
void write_quadruplets(const std::filesystem::path& path, const QuadrupletSet& set);
QuadrupletSet load_quadruplets(const std::filesystem::path& path);

}  // namespace pcr
