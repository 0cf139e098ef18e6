#include "pcr/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "pcr/jsonl.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

void require_relevant(const IdSet& relevant) {
  if (relevant.empty()) throw EvaluationError("relevant set is empty");
}

std::size_t hits_in_top(Ranking ranking, const IdSet& relevant, std::size_t k) {
  const auto cutoff = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cutoff; ++i) hits += relevant.contains(ranking[i]) ? 1 : 0;
  return hits;
}

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::optional<double> try_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  try {
    return pearson(xs, ys);
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

}  // namespace

double r_precision(Ranking ranking, const IdSet& relevant) {
  require_relevant(relevant);
  return static_cast<double>(hits_in_top(ranking, relevant, relevant.size())) /
         static_cast<double>(relevant.size());
}

double recall_at_k(Ranking ranking, const IdSet& relevant, std::size_t k) {
  require_relevant(relevant);
  if (k < 1) throw EvaluationError("k must be at least 1");
  return static_cast<double>(hits_in_top(ranking, relevant, k)) /
         static_cast<double>(relevant.size());
}

double mrr(Ranking ranking, const IdSet& relevant) {
  require_relevant(relevant);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.contains(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

MetricReport evaluate_run(const std::vector<RankedQuery>& run) {
  std::vector<const RankedQuery*> ordered;
  ordered.reserve(run.size());
  for (const auto& query : run) ordered.push_back(&query);
  std::sort(ordered.begin(), ordered.end(),
            [](const RankedQuery* a, const RankedQuery* b) { return a->query_id < b->query_id; });

  MetricReport report;
  double sum_rp = 0.0, sum_r5 = 0.0, sum_r10 = 0.0, sum_mrr = 0.0;
  for (const auto* query : ordered) {
    std::unordered_set<std::string_view> ranked;
    ranked.reserve(query->ranking.size());
    for (const auto& id : query->ranking) {
      if (!ranked.insert(id).second) {
        throw EvaluationError("query " + query->query_id + " ranks " + id + " twice");
      }
    }
    IdSet in_pool;
    for (const auto& id : query->relevant) {
      if (ranked.contains(id)) in_pool.insert(id);
    }
    report.gold_total += query->relevant.size();
    report.gold_in_pool += in_pool.size();
    if (in_pool.empty()) {
      ++report.excluded_queries;
      continue;
    }
    sum_rp += r_precision(query->ranking, in_pool);
    sum_r5 += recall_at_k(query->ranking, in_pool, 5);
    sum_r10 += recall_at_k(query->ranking, in_pool, 10);
    sum_mrr += mrr(query->ranking, in_pool);
    ++report.n_queries;
  }
  if (report.n_queries == 0) throw EvaluationError("no query has an in-pool relevant article");
  const double n = static_cast<double>(report.n_queries);
  report.r_precision = sum_rp / n;
  report.r_at_5 = sum_r5 / n;
  report.r_at_10 = sum_r10 / n;
  report.mrr = sum_mrr / n;
  report.pool_coverage =
      static_cast<double>(report.gold_in_pool) / static_cast<double>(report.gold_total);
  return report;
}

std::string format_report(const MetricReport& report) {
  std::string out;
  out += "r_precision=" + fixed2(100.0 * report.r_precision) + "\n";
  out += "r_at_5=" + fixed2(100.0 * report.r_at_5) + "\n";
  out += "r_at_10=" + fixed2(100.0 * report.r_at_10) + "\n";
  out += "mrr=" + fixed2(100.0 * report.mrr) + "\n";
  out += "n_queries=" + std::to_string(report.n_queries) + "\n";
  out += "excluded_queries=" + std::to_string(report.excluded_queries) + "\n";
  out += "pool_coverage=" + fixed2(100.0 * report.pool_coverage) + "\n";
  return out;
}

nlohmann::ordered_json report_to_json(const MetricReport& report) {
  nlohmann::ordered_json out;
  out["r_precision"] = report.r_precision;
  out["r_at_5"] = report.r_at_5;
  out["r_at_10"] = report.r_at_10;
  out["mrr"] = report.mrr;
  out["n_queries"] = report.n_queries;
  out["excluded_queries"] = report.excluded_queries;
  out["pool_coverage"] = report.pool_coverage;
  return out;
}

std::map<int, double> rank_by_year(const std::vector<RankedQuery>& run,
                                   const std::unordered_map<ArticleId, int>& years) {
  std::map<int, std::pair<double, std::size_t>> sums;
  for (const auto& query : run) {
    for (std::size_t i = 0; i < query.ranking.size(); ++i) {
      const auto& id = query.ranking[i];
      if (!query.relevant.contains(id)) continue;
      const auto year = years.find(id);
      if (year == years.end()) continue;
      auto& [sum, count] = sums[year->second];
      sum += static_cast<double>(i + 1);
      ++count;
    }
  }
  std::map<int, double> means;
  for (const auto& [year, acc] : sums) means[year] = acc.first / static_cast<double>(acc.second);
  return means;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw EvaluationError("pearson: size mismatch");
  if (xs.size() < 2) throw EvaluationError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw EvaluationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) throw EvaluationError("jaccard: both sets are empty");
  std::size_t common = 0;
  for (const auto& token : a) common += b.contains(token) ? 1 : 0;
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

YearGapAnalysis analyze_year_gap(const std::vector<RankedQuery>& run,
                                 const std::unordered_map<ArticleId, int>& years,
                                 const std::unordered_map<std::string, std::string>& query_texts,
                                 const std::unordered_map<ArticleId, std::string>& article_texts) {
  YearGapAnalysis analysis;
  analysis.mean_rank_by_year = rank_by_year(run, years);
  std::vector<double> gaps, ranks, overlaps;
  for (const auto& query : run) {
    const auto text = query_texts.find(query.query_id);
    const auto query_tokens = text == query_texts.end() ? std::set<std::string>{}
                                                        : content_token_set(text->second);
    for (std::size_t i = 0; i < query.ranking.size(); ++i) {
      const auto& id = query.ranking[i];
      if (!query.relevant.contains(id)) continue;
      const auto year = years.find(id);
      if (year == years.end()) continue;
      gaps.push_back(static_cast<double>(query.year - year->second));
      ranks.push_back(static_cast<double>(i + 1));
      const auto article = article_texts.find(id);
      const auto article_tokens = article == article_texts.end() ? std::set<std::string>{}
                                                                 : content_token_set(article->second);
      overlaps.push_back(query_tokens.empty() && article_tokens.empty()
                             ? 0.0
                             : jaccard(query_tokens, article_tokens));
    }
  }
  analysis.pairs = gaps.size();
  analysis.pearson_gap_rank = try_pearson(gaps, ranks);
  analysis.pearson_gap_jaccard = try_pearson(gaps, overlaps);
  return analysis;
}

void write_run(const std::filesystem::path& path, const std::vector<RankedQuery>& run) {
  auto out = jsonl::open_output(path);
  for (const auto& query : run) {
    if (query.query_id.find_first_of("\t\n") != std::string::npos) {
      throw EvaluationError("query id " + query.query_id + " cannot be written to a run file");
    }
    out << query.query_id << '\t';
    for (std::size_t i = 0; i < query.ranking.size(); ++i) {
      const auto& id = query.ranking[i];
      if (id.find_first_of(",\t\n") != std::string::npos) {
        throw EvaluationError("article id " + id + " cannot be written to a run file");
      }
      if (i > 0) out << ',';
      out << id;
    }
    out << '\n';
  }
}

std::vector<RankedQuery> read_run(const std::filesystem::path& path,
                                  const std::vector<Query>& gold) {
  std::unordered_map<std::string, const Query*> by_id;
  for (const auto& query : gold) by_id.emplace(query.id(), &query);
  auto in = jsonl::open_input(path);
  std::vector<RankedQuery> run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw EvaluationError("run file line " + std::to_string(line_no) + ": missing tab");
    }
    RankedQuery query;
    query.query_id = line.substr(0, tab);
    const auto it = by_id.find(query.query_id);
    if (it == by_id.end()) {
      throw EvaluationError("run file line " + std::to_string(line_no) + ": unknown query " +
                            query.query_id);
    }
    query.relevant = it->second->relevant_ids;
    query.year = it->second->year;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      query.ranking.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    run.push_back(std::move(query));
  }
  return run;
}

}  // namespace pcr
