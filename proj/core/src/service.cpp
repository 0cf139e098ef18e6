#include "pcr/service.hpp"

#include <chrono>

#include "pcr/evaluate.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ServiceError bad_request(const std::string& message) {
  return ServiceError(400, "bad_request", message);
}

std::string optional_string(const json& body, const char* field) {
  const auto it = body.find(field);
  if (it == body.end() || it->is_null()) return {};
  if (!it->is_string()) throw bad_request(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

std::optional<int> optional_int(const json& body, const char* field) {
  const auto it = body.find(field);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw bad_request(std::string("field \"") + field + "\" must be an integer");
  }
  return it->get<int>();
}

bool blank(std::string_view text) { return tokenize(text).empty(); }

}  // namespace

RecommendRequest RecommendRequest::from_json(const json& body) {
  if (!body.is_object()) throw bad_request("request body must be a JSON object");
  RecommendRequest request;
  request.title = optional_string(body, "title");
  request.abstract = optional_string(body, "abstract");
  request.topic_sentence = optional_string(body, "topic_sentence");
  if (const auto k = body.find("k"); k != body.end() && !k->is_null()) {
    if (!k->is_number_integer() || k->get<long long>() < 1) {
      throw bad_request("field \"k\" must be a positive integer");
    }
    request.k = k->get<std::size_t>();
  }
  request.max_year = optional_int(body, "max_year");
  if (blank(request.topic_sentence)) throw bad_request("topic_sentence must not be empty");
  if (blank(request.title) && blank(request.abstract)) {
    throw bad_request("title or abstract must not be empty");
  }
  for (const auto* field : {&request.title, &request.abstract, &request.topic_sentence}) {
    if (field->find(kTopicSeparator) != std::string::npos) {
      throw bad_request("request text must not contain the [TS] separator");
    }
  }
  return request;
}

std::string RecommendRequest::query_text() const {
  return compose_query_text(title, abstract, topic_sentence);
}

ordered_json RecommendResponse::to_json() const {
  ordered_json out;
  ordered_json rows = ordered_json::array();
  for (const auto& r : results) {
    rows.push_back({{"article_id", r.article_id},
                    {"title", r.title},
                    {"year", r.year},
                    {"distance", r.distance},
                    {"rank", r.rank}});
  }
  out["results"] = std::move(rows);
  out["model_version"] = model_version;
  out["latency_ms"] = latency_ms;
  return out;
}

RecommendService::RecommendService(EncoderParams params, VectorIndex index,
                                   std::vector<Article> articles, std::vector<Query> queries)
    : params_(std::move(params)), index_(std::move(index)), articles_(std::move(articles)) {
  params_.validate();
  if (params_.config.out_dim != index_.dim()) {
    throw ServiceError(500, "model_mismatch", "checkpoint and index dimensions differ");
  }
  for (std::size_t i = 0; i < articles_.size(); ++i) article_position_.emplace(articles_[i].id, i);
  for (auto& query : queries) queries_.emplace(query.id(), std::move(query));
  model_version_ = pcr::model_version(params_);
}

RecommendResponse RecommendService::recommend(const RecommendRequest& request) const {
  const auto start = std::chrono::steady_clock::now();
  if (request.k < 1) throw bad_request("k must be at least 1");
  if (blank(request.topic_sentence)) throw bad_request("topic_sentence must not be empty");

  const auto embedding = encode(params_, request.query_text());
  RecommendResponse response;
  response.model_version = model_version_;
  std::size_t rank = 0;
  for (auto& hit : index_.search(embedding, request.k, request.max_year)) {
    RecommendResult result;
    result.rank = ++rank;
    result.distance = hit.distance;
    result.year = index_.years()[*index_.position(hit.id)];
    if (const auto it = article_position_.find(hit.id); it != article_position_.end()) {
      result.title = articles_[it->second].title;
    }
    result.article_id = std::move(hit.id);
    response.results.push_back(std::move(result));
  }
  response.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return response;
}

ordered_json RecommendService::explain(const json& body) const {
  if (!body.is_object()) throw bad_request("request body must be a JSON object");
  const auto candidate_id = optional_string(body, "candidate_id");
  if (candidate_id.empty()) throw bad_request("candidate_id is required");

  std::string query_text;
  std::optional<int> query_year;
  if (const auto query_id = optional_string(body, "query_id"); !query_id.empty()) {
    const auto it = queries_.find(query_id);
    if (it == queries_.end()) {
      throw ServiceError(404, "unknown_query", "unknown query id " + query_id);
    }
    query_text = it->second.text;
    query_year = it->second.year;
  } else {
    const auto request = RecommendRequest::from_json(body);
    query_text = request.query_text();
    query_year = request.max_year;
  }

  const auto row = index_.position(candidate_id);
  if (!row) throw ServiceError(404, "unknown_candidate", "unknown candidate id " + candidate_id);
  const int candidate_year = index_.years()[*row];

  const auto embedding = encode(params_, query_text);
  const double distance = index_.distance_to(embedding, *row);
  const bool outside = query_year.has_value() && candidate_year >= *query_year;

  std::optional<std::size_t> rank;
  if (!outside) {
    const auto ranking = index_.full_ranking(embedding, query_year);
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      if (ranking[i].id == candidate_id) {
        rank = i + 1;
        break;
      }
    }
  }

  std::string candidate_text;
  if (const auto it = article_position_.find(candidate_id); it != article_position_.end()) {
    const auto& article = articles_[it->second];
    candidate_text = compose_article_text(article.title, article.abstract);
  }
  const auto query_tokens = content_token_set(query_text);
  const auto candidate_tokens = content_token_set(candidate_text);
  const double overlap = (query_tokens.empty() && candidate_tokens.empty())
                             ? 0.0
                             : jaccard(query_tokens, candidate_tokens);

  ordered_json out;
  out["candidate_id"] = candidate_id;
  out["candidate_year"] = candidate_year;
  out["query_year"] = query_year ? json(*query_year) : json(nullptr);
  out["delta_t"] = query_year ? json(*query_year - candidate_year) : json(nullptr);
  out["jaccard"] = overlap;
  out["distance"] = distance;
  out["rank"] = rank ? json(*rank) : json(nullptr);
  out["outside_year_filter"] = outside;
  return out;
}

ordered_json RecommendService::health() const {
  ordered_json out;
  out["status"] = "ok";
  out["model_version"] = model_version_;
  out["pool_size"] = index_.size();
  return out;
}

ordered_json RecommendService::article(const ArticleId& id) const {
  const auto it = article_position_.find(id);
  if (it == article_position_.end()) {
    throw ServiceError(404, "unknown_article", "unknown article id " + id);
  }
  const auto& a = articles_[it->second];
  ordered_json out;
  out["id"] = a.id;
  out["title"] = a.title;
  out["abstract"] = a.abstract;
  out["year"] = a.year;
  out["is_acl"] = a.is_acl;
  out["in_pool"] = index_.position(id).has_value();
  return out;
}

ordered_json error_body(const std::string& code, const std::string& message) {
  ordered_json out;
  out["error"] = {{"code", code}, {"message", message}};
  return out;
}

ApiResponse handle_api(const RecommendService* service, const std::string& method,
                       const std::string& path, const std::string& body) {
  static constexpr std::string_view kArticlePrefix = "/api/v1/article/";
  const bool known = path == "/api/v1/recommend" || path == "/api/v1/explain" ||
                     path == "/api/v1/health" || path.starts_with(kArticlePrefix);
  if (!known) return {404, error_body("not_found", "no such endpoint " + path)};
  if (service == nullptr) {
    return {503, error_body("unavailable", "service has no checkpoint or index loaded")};
  }

  auto parse_body = [&]() -> json {
    try {
      return json::parse(body);
    } catch (const json::parse_error& e) {
      throw bad_request(std::string("malformed JSON body: ") + e.what());
    }
  };

  try {
    if (path == "/api/v1/recommend") {
      if (method != "POST") return {405, error_body("method_not_allowed", "use POST")};
      return {200, service->recommend(RecommendRequest::from_json(parse_body())).to_json()};
    }
    if (path == "/api/v1/explain") {
      if (method != "POST") return {405, error_body("method_not_allowed", "use POST")};
      return {200, service->explain(parse_body())};
    }
    if (method != "GET") return {405, error_body("method_not_allowed", "use GET")};
    if (path == "/api/v1/health") return {200, service->health()};
    return {200, service->article(path.substr(kArticlePrefix.size()))};
  } catch (const ServiceError& e) {
    return {e.status(), error_body(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what())};
  }
}

}  // namespace pcr
