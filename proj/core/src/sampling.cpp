#include "pcr/sampling.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pcr/jsonl.hpp"
#include "pcr/random.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

constexpr std::array<NegativePool, 3> kPools{NegativePool::kP1, NegativePool::kP2,
                                             NegativePool::kP3};

std::size_t slot(NegativePool pool) { return static_cast<std::size_t>(pool); }

void erase_all(IdSet& from, const IdSet& ids) {
  for (const auto& id : ids) from.erase(id);
}

}  // namespace

std::string_view pool_name(NegativePool pool) {
  switch (pool) {
    case NegativePool::kP1: return "P1";
    case NegativePool::kP2: return "P2";
    case NegativePool::kP3: return "P3";
  }
  return "P?";
}

NegativePool parse_pool_name(std::string_view name) {
  if (name == "P1") return NegativePool::kP1;
  if (name == "P2") return NegativePool::kP2;
  if (name == "P3") return NegativePool::kP3;
  throw std::invalid_argument("unknown negative pool \"" + std::string(name) + "\"");
}

const IdSet& NegativePools::get(NegativePool pool) const {
  switch (pool) {
    case NegativePool::kP1: return pool1;
    case NegativePool::kP2: return pool2;
    case NegativePool::kP3: return pool3;
  }
  throw std::logic_error("bad pool");
}

IdSet& NegativePools::get(NegativePool pool) {
  return const_cast<IdSet&>(std::as_const(*this).get(pool));
}

CitationLookup citation_lookup(const std::vector<Article>& articles) {
  CitationLookup lookup;
  lookup.reserve(articles.size());
  for (const auto& article : articles) {
    auto& cited = lookup[article.id];
    cited.insert(article.rw_citations.begin(), article.rw_citations.end());
    cited.insert(article.other_citations.begin(), article.other_citations.end());
  }
  return lookup;
}

NegativePools build_negative_pools(const ParagraphRecord& paragraph, const Article& citing,
                                   const std::vector<ParagraphRecord>& all_paragraphs,
                                   const CitationLookup& lookup) {
  if (paragraph.citing_id != citing.id) {
    throw CorpusError("paragraph " + paragraph.id + " belongs to " + paragraph.citing_id +
                      ", not " + citing.id);
  }
  const IdSet own = paragraph.all_cited_ids();

  NegativePools pools;
  pools.pool1 = citing.rw_citations;
  for (const auto& other : all_paragraphs) {
    if (other.citing_id != citing.id || other.id == paragraph.id) continue;
    const auto cited = other.all_cited_ids();
    pools.pool1.insert(cited.begin(), cited.end());
  }

  pools.pool2 = citing.other_citations;

  for (const auto& positive : paragraph.relevant_ids()) {
    const auto it = lookup.find(positive);
    if (it == lookup.end()) continue;
    for (const auto& id : it->second) {
      if (!citing.cites(id)) pools.pool3.insert(id);
    }
  }

  for (const auto pool : kPools) {
    auto& ids = pools.get(pool);
    erase_all(ids, own);
    ids.erase(citing.id);
  }
  return pools;
}

std::uint64_t paragraph_seed(std::uint64_t seed, std::string_view paragraph_id) {
  return seed ^ fnv1a64(paragraph_id);
}

std::vector<Quadruplet> sample_quadruplets(const ParagraphRecord& paragraph,
                                           const NegativePools& pools, std::uint64_t seed,
                                           const Quota& quota) {
  const IdSet relevant_set = paragraph.relevant_ids();
  const std::vector<ArticleId> relevant(relevant_set.begin(), relevant_set.end());
  if (relevant.size() < 2) {
    spdlog::debug("paragraph {}: fewer than two positives, skipped", paragraph.id);
    return {};
  }
  if (pools.total() == 0) {
    spdlog::info("paragraph {}: all negative pools empty, skipped", paragraph.id);
    return {};
  }

  const Rng root(paragraph_seed(seed, paragraph.id));

  // Each pool is visited in a seeded random order; an id drawn once is never
  // drawn again for this paragraph, even from a different pool.
  std::array<std::deque<ArticleId>, 3> order;
  for (const auto pool : kPools) {
    std::vector<ArticleId> ids;
    for (const auto& id : pools.get(pool)) {
      if (!relevant_set.contains(id) && id != paragraph.citing_id) ids.push_back(id);
    }
    Rng rng = root.split(std::string("pool:") + std::string(pool_name(pool)));
    rng.shuffle(ids);
    order[slot(pool)].assign(ids.begin(), ids.end());
  }

  std::unordered_set<ArticleId> used;
  std::array<std::vector<ArticleId>, 3> drawn;
  auto draw = [&](NegativePool pool, std::size_t wanted) {
    auto& queue = order[slot(pool)];
    std::size_t taken = 0;
    while (taken < wanted && !queue.empty()) {
      ArticleId id = std::move(queue.front());
      queue.pop_front();
      if (!used.insert(id).second) continue;
      drawn[slot(pool)].push_back(std::move(id));
      ++taken;
    }
    return taken;
  };

  std::size_t total = 0;
  for (const auto pool : kPools) total += draw(pool, quota[pool]);
  for (const auto pool : kBackfillOrder) {
    if (total >= quota.total()) break;
    total += draw(pool, quota.total() - total);
  }

  Rng positives = root.split("positives");
  std::vector<Quadruplet> quadruplets;
  quadruplets.reserve(total);
  for (const auto pool : kPools) {
    for (auto& neg : drawn[slot(pool)]) {
      const auto first = positives.uniform_index(relevant.size());
      auto second = positives.uniform_index(relevant.size() - 1);
      if (second >= first) ++second;
      quadruplets.push_back({paragraph.id, relevant[first], relevant[second], std::move(neg), pool});
    }
  }
  return quadruplets;
}

QuadrupletSet sample_corpus(const std::vector<ParagraphRecord>& paragraphs,
                            const std::vector<ParagraphRecord>& all_paragraphs,
                            const std::vector<Article>& known_articles, std::uint64_t seed,
                            const Quota& quota, SamplingStats* stats) {
  const auto by_id = index_by_id(known_articles);
  const auto lookup = citation_lookup(known_articles);
  SamplingStats local;
  QuadrupletSet set{seed, quota, {}};
  for (const auto& paragraph : paragraphs) {
    ++local.paragraphs;
    const auto citing = by_id.find(paragraph.citing_id);
    if (citing == by_id.end()) {
      throw CorpusError("paragraph " + paragraph.id + ": unknown citing article " +
                        paragraph.citing_id);
    }
    if (paragraph.relevant_ids().size() < 2) {
      ++local.skipped_single_positive;
      continue;
    }
    auto pools = build_negative_pools(paragraph, *citing->second, all_paragraphs, lookup);
    for (const auto pool : kPools) {
      std::erase_if(pools.get(pool), [&](const ArticleId& id) { return !by_id.contains(id); });
    }
    auto sampled = sample_quadruplets(paragraph, pools, seed, quota);
    if (sampled.empty()) {
      ++local.skipped_no_negatives;
      continue;
    }
    if (sampled.size() < quota.total()) ++local.short_of_quota;
    set.quadruplets.insert(set.quadruplets.end(), std::make_move_iterator(sampled.begin()),
                           std::make_move_iterator(sampled.end()));
  }
  if (stats != nullptr) *stats = local;
  return set;
}

void write_quadruplets(const std::filesystem::path& path, const QuadrupletSet& set) {
  auto out = jsonl::open_output(path);
  nlohmann::ordered_json header;
  header["seed"] = set.seed;
  header["quota"] = {set.quota.per_pool[0], set.quota.per_pool[1], set.quota.per_pool[2]};
  out << jsonl::dump(header) << '\n';
  for (const auto& quad : set.quadruplets) {
    nlohmann::ordered_json record;
    record["paragraph_id"] = quad.paragraph_id;
    record["pos1"] = quad.pos1;
    record["pos2"] = quad.pos2;
    record["neg"] = quad.neg;
    record["neg_pool"] = pool_name(quad.neg_pool);
    out << jsonl::dump(record) << '\n';
  }
}

QuadrupletSet load_quadruplets(const std::filesystem::path& path) {
  auto in = jsonl::open_input(path);
  QuadrupletSet set;
  bool have_header = false;
  try {
    jsonl::for_each(in, [&](const nlohmann::json& record, std::size_t) {
      if (!have_header) {
        const auto& seed = jsonl::require(record, "seed");
        const auto& quota = jsonl::require(record, "quota");
        if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
          throw std::invalid_argument("header field \"seed\" must be an integer");
        }
        if (!quota.is_array() || quota.size() != 3) {
          throw std::invalid_argument("header field \"quota\" must hold three counts");
        }
        set.seed = seed.get<std::uint64_t>();
        for (std::size_t i = 0; i < 3; ++i) set.quota.per_pool[i] = quota[i].get<std::size_t>();
        have_header = true;
        return;
      }
      Quadruplet quad;
      quad.paragraph_id = jsonl::require_string(record, "paragraph_id");
      quad.pos1 = jsonl::require_string(record, "pos1");
      quad.pos2 = jsonl::require_string(record, "pos2");
      quad.neg = jsonl::require_string(record, "neg");
      quad.neg_pool = parse_pool_name(jsonl::require_string(record, "neg_pool"));
      set.quadruplets.push_back(std::move(quad));
    });
  } catch (const jsonl::LineError& e) {
    throw CorpusError("quadruplet file " + path.string() + " " + e.what());
  }
  if (!have_header) throw CorpusError("quadruplet file " + path.string() + " has no header");
  return set;
}

}  // namespace pcr
