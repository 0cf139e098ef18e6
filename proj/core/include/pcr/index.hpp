#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"

namespace pcr {

class IndexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchHit {
  ArticleId id;
  double distance = 0.0;
};

// Exact L2 nearest-neighbour index. Rows are float32, distances accumulate
// in float64; ties are broken by ascending id.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::vector<ArticleId> ids, std::vector<int> years, std::size_t dim,
              std::vector<float> matrix);

  // One row per pool article (encode_article), in ascending id order.
  static VectorIndex build(const CandidatePool& pool, const EncoderParams& params);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<ArticleId>& ids() const { return ids_; }
  const std::vector<int>& years() const { return years_; }
  const std::vector<float>& matrix() const { return matrix_; }
  std::span<const float> row(std::size_t i) const { return {matrix_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> position(const ArticleId& id) const;

  // Up to k nearest rows; with max_year, only rows strictly older than it.
  std::vector<SearchHit> search(std::span<const double> query, std::size_t k,
                                std::optional<int> max_year = std::nullopt) const;
  std::vector<SearchHit> full_ranking(std::span<const double> query,
                                      std::optional<int> max_year = std::nullopt) const;

  double distance_to(std::span<const double> query, std::size_t row) const;

  // Header line {"format","version","n","d"}, then per row a uint32 id
  // length and the id bytes, then N int32 years, then the float32 matrix.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(std::istream& in);
  static VectorIndex load(const std::filesystem::path& path);

  friend bool operator==(const VectorIndex& a, const VectorIndex& b) {
    return a.ids_ == b.ids_ && a.years_ == b.years_ && a.dim_ == b.dim_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<SearchHit> ranked(std::span<const double> query, std::optional<std::size_t> k,
                                std::optional<int> max_year) const;

  std::vector<ArticleId> ids_;
  std::vector<int> years_;
  std::size_t dim_ = 0;
  std::vector<float> matrix_;
  std::unordered_map<ArticleId, std::size_t> position_;
};

inline constexpr int kIndexVersion = 1;

std::vector<ArticleId> hit_ids(const std::vector<SearchHit>& hits);

}  // namespace pcr
