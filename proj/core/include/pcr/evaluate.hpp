#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pcr/corpus.hpp"

namespace pcr {

class EvaluationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Ranking = std::span<const ArticleId>;

// |relevant ∩ top-R| / R with R = |relevant|.
double r_precision(Ranking ranking, const IdSet& relevant);
// |relevant ∩ top-k| / |relevant|.
double recall_at_k(Ranking ranking, const IdSet& relevant, std::size_t k);
// 1 / rank of the first relevant item, 0 when none is ranked.
double mrr(Ranking ranking, const IdSet& relevant);

// Full ranking produced for one query plus its gold set. The gold set may
// name ids that are not in the ranking; those count as out of pool.
struct RankedQuery {
  std::string query_id;
  std::vector<ArticleId> ranking;
  IdSet relevant;
  int year = 0;
};

struct MetricReport {
  double r_precision = 0.0;
  double r_at_5 = 0.0;
  double r_at_10 = 0.0;
  double mrr = 0.0;
  std::size_t n_queries = 0;
  double pool_coverage = 0.0;  // in-pool gold ids / all gold ids
  std::size_t gold_total = 0;
  std::size_t gold_in_pool = 0;
  std::size_t excluded_queries = 0;  // no in-pool gold id
};

// Unweighted mean over queries, each scored against its in-pool gold ids.
// Queries are processed in query-id order. Throws when no query is eligible.
MetricReport evaluate_run(const std::vector<RankedQuery>& run);

// key=value lines with metrics scaled to 0-100, two decimals.
std::string format_report(const MetricReport& report);
nlohmann::ordered_json report_to_json(const MetricReport& report);

// Mean 1-based rank of cited articles, grouped by the cited article's year.
std::map<int, double> rank_by_year(const std::vector<RankedQuery>& run,
                                   const std::unordered_map<ArticleId, int>& years);

// Sample Pearson correlation. Throws on size mismatch, fewer than two points,
// or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

// |a ∩ b| / |a ∪ b|. Throws when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Year-gap diagnostics over every (query, in-pool cited article) pair, with
// Δt = citing year - cited year.
struct YearGapAnalysis {
  std::map<int, double> mean_rank_by_year;
  std::size_t pairs = 0;
  // Empty when fewer than two pairs or either side has zero variance.
  std::optional<double> pearson_gap_rank;
  std::optional<double> pearson_gap_jaccard;
};

// `query_texts` maps query id to query text; `article_texts` maps article id
// to title + abstract.
YearGapAnalysis analyze_year_gap(const std::vector<RankedQuery>& run,
                                 const std::unordered_map<ArticleId, int>& years,
                                 const std::unordered_map<std::string, std::string>& query_texts,
                                 const std::unordered_map<ArticleId, std::string>& article_texts);

// Run file: query_id TAB comma-separated ranked ids, one query per line.
void write_run(const std::filesystem::path& path, const std::vector<RankedQuery>& run);
// Reads rankings and attaches gold sets and years from `gold`; queries in the
// run file that are absent from `gold` are an error.
std::vector<RankedQuery> read_run(const std::filesystem::path& path, const std::vector<Query>& gold);

}  // namespace pcr
