#include "pcr/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pcr/jsonl.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

IdSet require_id_list(const json& record, std::string_view field) {
  const auto& value = jsonl::require(record, field);
  if (!value.is_array()) {
    throw std::invalid_argument("field \"" + std::string(field) + "\" must be an array");
  }
  IdSet ids;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw std::invalid_argument("field \"" + std::string(field) + "\" must hold strings");
    }
    ids.insert(item.get<std::string>());
  }
  return ids;
}

DiscourseLabel parse_label(const std::string& label) {
  if (label == "Transition") return DiscourseLabel::kTransition;
  if (label == "Other") return DiscourseLabel::kOther;
  throw std::invalid_argument("unknown discourse label \"" + label + "\"");
}

std::string_view label_name(DiscourseLabel label) {
  return label == DiscourseLabel::kTransition ? "Transition" : "Other";
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

ordered_json ids_to_json(const IdSet& ids) { return ordered_json(std::vector<std::string>(ids.begin(), ids.end())); }

}  // namespace

IdSet ParagraphRecord::relevant_ids() const {
  IdSet ids;
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    ids.insert(sentences[i].cited_ids.begin(), sentences[i].cited_ids.end());
  }
  return ids;
}

IdSet ParagraphRecord::all_cited_ids() const {
  IdSet ids;
  for (const auto& sentence : sentences) ids.insert(sentence.cited_ids.begin(), sentence.cited_ids.end());
  return ids;
}

CandidatePool::CandidatePool(std::vector<Article> articles) : articles_(std::move(articles)) {
  std::sort(articles_.begin(), articles_.end(),
            [](const Article& a, const Article& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < articles_.size(); ++i) {
    const auto& article = articles_[i];
    if (article.title.empty() || article.abstract.empty()) {
      throw CorpusError("pool member " + article.id + " has an empty title or abstract");
    }
    if (!position_.emplace(article.id, i).second) {
      throw CorpusError("duplicate pool member " + article.id);
    }
    by_year_[article.year].push_back(article.id);
  }
}

const Article* CandidatePool::find(const ArticleId& id) const {
  const auto it = position_.find(id);
  return it == position_.end() ? nullptr : &articles_[it->second];
}

ArticleLoad parse_articles(std::istream& in) {
  ArticleLoad load;
  std::unordered_map<ArticleId, std::size_t> seen;  // id -> line
  try {
    jsonl::for_each(in, [&](const json& record, std::size_t line) {
      Article article;
      article.id = jsonl::require_string(record, "id");
      article.title = jsonl::require_string(record, "title");
      article.abstract = jsonl::require_string(record, "abstract");
      article.year = jsonl::require_int(record, "year");
      article.is_acl = jsonl::require_bool(record, "is_acl");
      article.rw_citations = require_id_list(record, "rw_citations");
      article.other_citations = require_id_list(record, "other_citations");
      article.rw_citations.erase(article.id);
      article.other_citations.erase(article.id);
      if (const auto [it, inserted] = seen.emplace(article.id, line); !inserted) {
        throw CorpusError("duplicate article id \"" + article.id + "\" (lines " +
                          std::to_string(it->second) + " and " + std::to_string(line) + ")");
      }
      if (article.title.empty() || article.abstract.empty()) {
        ++load.dropped_empty;
        return;
      }
      load.articles.push_back(std::move(article));
    });
  } catch (const jsonl::LineError& e) {
    throw CorpusError(std::string("article file ") + e.what());
  }
  if (load.dropped_empty > 0) {
    spdlog::info("dropped {} article(s) with empty title or abstract", load.dropped_empty);
  }
  return load;
}

ArticleLoad load_articles(const std::filesystem::path& path) {
  auto in = jsonl::open_input(path);
  return parse_articles(in);
}

std::vector<ParagraphRecord> parse_paragraphs(std::istream& in) {
  std::vector<ParagraphRecord> paragraphs;
  std::unordered_set<std::string> seen;
  try {
    jsonl::for_each(in, [&](const json& record, std::size_t) {
      ParagraphRecord paragraph;
      paragraph.id = jsonl::require_string(record, "id");
      paragraph.citing_id = jsonl::require_string(record, "citing_id");
      const auto& sentences = jsonl::require(record, "sentences");
      if (!sentences.is_array() || sentences.empty()) {
        throw std::invalid_argument("field \"sentences\" must be a non-empty array");
      }
      for (const auto& item : sentences) {
        Sentence sentence;
        sentence.text = jsonl::require_string(item, "text");
        sentence.label = parse_label(jsonl::require_string(item, "label"));
        sentence.cited_ids = require_id_list(item, "cited_ids");
        paragraph.sentences.push_back(std::move(sentence));
      }
      if (!seen.insert(paragraph.id).second) {
        throw CorpusError("duplicate paragraph id \"" + paragraph.id + "\"");
      }
      paragraphs.push_back(std::move(paragraph));
    });
  } catch (const jsonl::LineError& e) {
    throw CorpusError(std::string("paragraph file ") + e.what());
  }
  return paragraphs;
}

std::vector<ParagraphRecord> load_paragraphs(const std::filesystem::path& path) {
  auto in = jsonl::open_input(path);
  return parse_paragraphs(in);
}

std::vector<ParagraphRecord> eligible_paragraphs(const std::vector<ParagraphRecord>& paragraphs) {
  std::vector<ParagraphRecord> kept;
  for (const auto& paragraph : paragraphs) {
    if (paragraph.sentences.empty()) continue;
    if (paragraph.sentences.front().label != DiscourseLabel::kTransition) continue;
    if (paragraph.relevant_ids().empty()) continue;
    kept.push_back(paragraph);
  }
  return kept;
}

Query build_query(const ParagraphRecord& paragraph, const Article& article) {
  if (paragraph.citing_id != article.id) {
    throw CorpusError("paragraph " + paragraph.id + " belongs to " + paragraph.citing_id +
                      ", not " + article.id);
  }
  if (article.title.empty() || article.abstract.empty()) {
    throw CorpusError("citing article " + article.id + " has an empty title or abstract");
  }
  if (paragraph.sentences.empty() ||
      paragraph.sentences.front().label != DiscourseLabel::kTransition) {
    throw CorpusError("paragraph " + paragraph.id + " does not open with a topic sentence");
  }
  const auto& topic = paragraph.sentences.front().text;
  if (topic.empty()) throw CorpusError("paragraph " + paragraph.id + " has an empty topic sentence");
  for (const auto& id : paragraph.all_cited_ids()) {
    if (!article.rw_citations.contains(id)) {
      throw CorpusError("paragraph " + paragraph.id + " cites " + id +
                        ", which is missing from the related-work citations of " + article.id);
    }
  }

  Query query;
  query.paragraph_id = paragraph.id;
  query.citing_id = article.id;
  query.text = compose_query_text(article.title, article.abstract, topic);
  query.year = article.year;
  query.relevant_ids = paragraph.relevant_ids();
  if (query.relevant_ids.empty()) {
    throw CorpusError("paragraph " + paragraph.id + " cites nothing after its topic sentence");
  }
  if (count_occurrences(query.text, kTopicSeparator) != 1) {
    throw CorpusError("query text for paragraph " + paragraph.id +
                      " must contain exactly one [TS] separator");
  }
  return query;
}

YearSplit split_by_year(const std::vector<Query>& queries, int pivot) {
  YearSplit split;
  for (const auto& query : queries) {
    if (query.year < pivot) {
      split.train.push_back(query);
    } else if (query.year == pivot) {
      split.validation.push_back(query);
    } else {
      split.test.push_back(query);
    }
  }
  return split;
}

CandidatePool build_candidate_pool(const std::vector<Article>& articles) {
  IdSet members;
  for (const auto& article : articles) {
    if (!article.is_acl) continue;
    members.insert(article.id);
    members.insert(article.rw_citations.begin(), article.rw_citations.end());
    members.insert(article.other_citations.begin(), article.other_citations.end());
  }
  std::vector<Article> selected;
  for (const auto& article : articles) {
    if (article.title.empty() || article.abstract.empty()) continue;
    if (members.contains(article.id)) selected.push_back(article);
  }
  return CandidatePool(std::move(selected));
}

std::vector<ArticleId> filter_pool_for_query(const CandidatePool& pool, const Query& query) {
  std::vector<ArticleId> ids;
  for (const auto& article : pool.articles()) {
    if (article.year < query.year && article.id != query.citing_id) ids.push_back(article.id);
  }
  return ids;
}

std::unordered_map<ArticleId, const Article*> index_by_id(const std::vector<Article>& articles) {
  std::unordered_map<ArticleId, const Article*> index;
  index.reserve(articles.size());
  for (const auto& article : articles) index.emplace(article.id, &article);
  return index;
}

QueryBuild build_queries(const std::vector<ParagraphRecord>& paragraphs,
                         const std::vector<Article>& articles) {
  const auto by_id = index_by_id(articles);
  QueryBuild build;
  for (const auto& paragraph : eligible_paragraphs(paragraphs)) {
    const auto it = by_id.find(paragraph.citing_id);
    if (it == by_id.end()) {
      ++build.skipped_unknown_citing;
      continue;
    }
    build.queries.push_back(build_query(paragraph, *it->second));
  }
  if (build.skipped_unknown_citing > 0) {
    spdlog::warn("skipped {} paragraph(s) whose citing article is not loaded",
                 build.skipped_unknown_citing);
  }
  return build;
}

void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries) {
  auto out = jsonl::open_output(path);
  for (const auto& query : queries) {
    ordered_json record;
    record["paragraph_id"] = query.paragraph_id;
    record["citing_id"] = query.citing_id;
    record["text"] = query.text;
    record["year"] = query.year;
    record["relevant_ids"] = ids_to_json(query.relevant_ids);
    out << jsonl::dump(record) << '\n';
  }
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  auto in = jsonl::open_input(path);
  std::vector<Query> queries;
  try {
    jsonl::for_each(in, [&](const json& record, std::size_t) {
      Query query;
      query.paragraph_id = jsonl::require_string(record, "paragraph_id");
      query.citing_id = jsonl::require_string(record, "citing_id");
      query.text = jsonl::require_string(record, "text");
      query.year = jsonl::require_int(record, "year");
      query.relevant_ids = require_id_list(record, "relevant_ids");
      queries.push_back(std::move(query));
    });
  } catch (const jsonl::LineError& e) {
    throw CorpusError("query file " + path.string() + " " + e.what());
  }
  return queries;
}

void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles) {
  auto out = jsonl::open_output(path);
  for (const auto& article : articles) {
    ordered_json record;
    record["id"] = article.id;
    record["title"] = article.title;
    record["abstract"] = article.abstract;
    record["year"] = article.year;
    record["is_acl"] = article.is_acl;
    record["rw_citations"] = ids_to_json(article.rw_citations);
    record["other_citations"] = ids_to_json(article.other_citations);
    out << jsonl::dump(record) << '\n';
  }
}

void write_paragraphs(const std::filesystem::path& path,
                      const std::vector<ParagraphRecord>& paragraphs) {
  auto out = jsonl::open_output(path);
  for (const auto& paragraph : paragraphs) {
    ordered_json record;
    record["id"] = paragraph.id;
    record["citing_id"] = paragraph.citing_id;
    ordered_json sentences = ordered_json::array();
    for (const auto& sentence : paragraph.sentences) {
      ordered_json item;
      item["text"] = sentence.text;
      item["label"] = label_name(sentence.label);
      item["cited_ids"] = ids_to_json(sentence.cited_ids);
      sentences.push_back(std::move(item));
    }
    record["sentences"] = std::move(sentences);
    out << jsonl::dump(record) << '\n';
  }
}

}  // namespace pcr
