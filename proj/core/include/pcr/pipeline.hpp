#pragma once

#include <vector>

#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"
#include "pcr/evaluate.hpp"
#include "pcr/index.hpp"

namespace pcr {

enum class QueryVariant {
  kWithTopicSentence,  // title + abstract + [TS] + topic sentence
  kTitleAbstractOnly,  // text before the [TS] separator
};

// Query text as fed to the encoder for `variant`.
std::string query_input_text(const Query& query, QueryVariant variant);

// Full year-filtered ranking for every query (candidates strictly older than
// the query, the citing article excluded).
std::vector<RankedQuery> rank_queries(const VectorIndex& index, const EncoderParams& params,
                                      const std::vector<Query>& queries,
                                      QueryVariant variant = QueryVariant::kWithTopicSentence);

MetricReport evaluate_queries(const VectorIndex& index, const EncoderParams& params,
                              const std::vector<Query>& queries,
                              QueryVariant variant = QueryVariant::kWithTopicSentence);

}  // namespace pcr
