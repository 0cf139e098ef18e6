#include "pcr/pipeline.hpp"

#include "pcr/text.hpp"

namespace pcr {

std::string query_input_text(const Query& query, QueryVariant variant) {
  if (variant == QueryVariant::kWithTopicSentence) return query.text;
  const auto separator = query.text.find(kTopicSeparator);
  std::string text = query.text.substr(0, separator);
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

std::vector<RankedQuery> rank_queries(const VectorIndex& index, const EncoderParams& params,
                                      const std::vector<Query>& queries, QueryVariant variant) {
  std::vector<RankedQuery> run;
  run.reserve(queries.size());
  for (const auto& query : queries) {
    const auto embedding = encode(params, query_input_text(query, variant));
    RankedQuery ranked;
    ranked.query_id = query.id();
    ranked.relevant = query.relevant_ids;
    ranked.year = query.year;
    for (auto& hit : index.full_ranking(embedding, query.year)) {
      if (hit.id != query.citing_id) ranked.ranking.push_back(std::move(hit.id));
    }
    run.push_back(std::move(ranked));
  }
  return run;
}

MetricReport evaluate_queries(const VectorIndex& index, const EncoderParams& params,
                              const std::vector<Query>& queries, QueryVariant variant) {
  return evaluate_run(rank_queries(index, params, queries, variant));
}

}  // namespace pcr
