#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"
#include "pcr/index.hpp"

namespace pcr {

// Error with an HTTP-style status and a short machine-readable code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct RecommendRequest {
  std::string title;
  std::string abstract;
  std::string topic_sentence;
  std::size_t k = 10;
  std::optional<int> max_year;  // candidates must be strictly older

  // Throws ServiceError(400) on bad field types or broken invariants.
  static RecommendRequest from_json(const nlohmann::json& body);
  std::string query_text() const;
};

struct RecommendResult {
  ArticleId article_id;
  std::string title;
  int year = 0;
  double distance = 0.0;
  std::size_t rank = 0;
};

struct RecommendResponse {
  std::vector<RecommendResult> results;
  std::string model_version;
  double latency_ms = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Read-only state of one service process: a checkpoint, the index built from
// it, article metadata, and optionally the queries that `explain` may refer
// to by id.
class RecommendService {
 public:
  RecommendService(EncoderParams params, VectorIndex index, std::vector<Article> articles,
                   std::vector<Query> queries = {});

  const std::string& model_version() const { return model_version_; }
  std::size_t pool_size() const { return index_.size(); }

  RecommendResponse recommend(const RecommendRequest& request) const;

  // Body: {"candidate_id", and either "query_id" or the request fields}.
  // Returns Δt, Jaccard word overlap, distance and rank for the pair.
  nlohmann::ordered_json explain(const nlohmann::json& body) const;

  nlohmann::ordered_json health() const;
  nlohmann::ordered_json article(const ArticleId& id) const;

 private:
  EncoderParams params_;
  VectorIndex index_;
  std::vector<Article> articles_;
  std::unordered_map<ArticleId, std::size_t> article_position_;
  std::unordered_map<std::string, Query> queries_;
  std::string model_version_;
};

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

// Transport-independent router for the /api/v1 endpoints. `service` may be
// null, in which case every endpoint answers 503.
ApiResponse handle_api(const RecommendService* service, const std::string& method,
                       const std::string& path, const std::string& body);

nlohmann::ordered_json error_body(const std::string& code, const std::string& message);

}  // namespace pcr
