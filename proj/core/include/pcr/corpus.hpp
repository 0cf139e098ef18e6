#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pcr {

using ArticleId = std::string;
using IdSet = std::set<ArticleId>;

inline constexpr int kDefaultPivotYear = 2017;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Article {
  ArticleId id;
  std::string title;
  std::string abstract;
  int year = 0;
  bool is_acl = false;
  IdSet rw_citations;     // cited in the related-work section
  IdSet other_citations;  // cited anywhere else

  bool cites(const ArticleId& other) const {
    return rw_citations.contains(other) || other_citations.contains(other);
  }
};

enum class DiscourseLabel { kTransition, kOther };

struct Sentence {
  std::string text;
  DiscourseLabel label = DiscourseLabel::kOther;
  IdSet cited_ids;
};

struct ParagraphRecord {
  std::string id;
  ArticleId citing_id;
  std::vector<Sentence> sentences;

  // Union of cited ids over every sentence but the first.
  IdSet relevant_ids() const;
  // Union of cited ids over all sentences.
  IdSet all_cited_ids() const;
};

struct Query {
  std::string paragraph_id;
  ArticleId citing_id;
  std::string text;
  int year = 0;
  IdSet relevant_ids;

  const std::string& id() const { return paragraph_id; }
};

// Year-indexed set of rankable articles, stored in ascending id order.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::vector<Article> articles);

  const std::vector<Article>& articles() const { return articles_; }
  const std::map<int, std::vector<ArticleId>>& by_year() const { return by_year_; }
  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }

  const Article* find(const ArticleId& id) const;
  bool contains(const ArticleId& id) const { return find(id) != nullptr; }

 private:
  std::vector<Article> articles_;
  std::unordered_map<ArticleId, std::size_t> position_;
  std::map<int, std::vector<ArticleId>> by_year_;
};

struct ArticleLoad {
  std::vector<Article> articles;
  std::size_t dropped_empty = 0;
};

struct YearSplit {
  std::vector<Query> train;
  std::vector<Query> validation;
  std::vector<Query> test;
};

// Article JSONL. Records with an empty title or abstract are dropped and
// counted. Throws CorpusError on malformed lines (naming the line number),
// missing required fields, and duplicate ids.
ArticleLoad load_articles(const std::filesystem::path& path);
ArticleLoad parse_articles(std::istream& in);

std::vector<ParagraphRecord> load_paragraphs(const std::filesystem::path& path);
std::vector<ParagraphRecord> parse_paragraphs(std::istream& in);

// Paragraphs that open with a Transition sentence and cite at least one
// article after it. Order preserved.
std::vector<ParagraphRecord> eligible_paragraphs(const std::vector<ParagraphRecord>& paragraphs);

Query build_query(const ParagraphRecord& paragraph, const Article& article);

YearSplit split_by_year(const std::vector<Query>& queries, int pivot = kDefaultPivotYear);

// ACL articles plus everything an ACL article cites, restricted to articles
// present in the input with a non-empty title and abstract.
CandidatePool build_candidate_pool(const std::vector<Article>& articles);

// Ids strictly older than the query, excluding the citing article, ascending.
std::vector<ArticleId> filter_pool_for_query(const CandidatePool& pool, const Query& query);

std::unordered_map<ArticleId, const Article*> index_by_id(const std::vector<Article>& articles);

// Builds queries for every eligible paragraph whose citing article is known.
// Paragraphs with an unknown citing article are skipped and counted.
struct QueryBuild {
  std::vector<Query> queries;
  std::size_t skipped_unknown_citing = 0;
};
QueryBuild build_queries(const std::vector<ParagraphRecord>& paragraphs,
                         const std::vector<Article>& articles);

// Query JSONL: {"paragraph_id","citing_id","text","year","relevant_ids"}.
void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries);
std::vector<Query> load_queries(const std::filesystem::path& path);

void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles);
void write_paragraphs(const std::filesystem::path& path,
                      const std::vector<ParagraphRecord>& paragraphs);

}  // namespace pcr
