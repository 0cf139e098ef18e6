#include "pcr/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "binary_io.hpp"

namespace pcr {
namespace {

constexpr std::string_view kIndexFormat = "pcr-index";

bool hit_before(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace

VectorIndex::VectorIndex(std::vector<ArticleId> ids, std::vector<int> years, std::size_t dim,
                         std::vector<float> matrix)
    : ids_(std::move(ids)), years_(std::move(years)), dim_(dim), matrix_(std::move(matrix)) {
  if (years_.size() != ids_.size() || matrix_.size() != ids_.size() * dim_) {
    throw IndexError("index ids, years and rows disagree in size");
  }
  if (dim_ == 0 && !ids_.empty()) throw IndexError("index dimension must be positive");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!position_.emplace(ids_[i], i).second) throw IndexError("duplicate index id " + ids_[i]);
  }
  for (const float v : matrix_) {
    if (!std::isfinite(v)) throw IndexError("non-finite entry in index matrix");
  }
}

VectorIndex VectorIndex::build(const CandidatePool& pool, const EncoderParams& params) {
  if (pool.empty()) throw IndexError("cannot index an empty pool");
  const std::size_t dim = params.config.out_dim;
  std::vector<ArticleId> ids;
  std::vector<int> years;
  std::vector<float> matrix;
  ids.reserve(pool.size());
  years.reserve(pool.size());
  matrix.reserve(pool.size() * dim);
  for (const auto& article : pool.articles()) {
    const auto embedding = encode_article(params, article);
    ids.push_back(article.id);
    years.push_back(article.year);
    for (const double v : embedding) matrix.push_back(static_cast<float>(v));
  }
  return VectorIndex(std::move(ids), std::move(years), dim, std::move(matrix));
}

std::optional<std::size_t> VectorIndex::position(const ArticleId& id) const {
  const auto it = position_.find(id);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

double VectorIndex::distance_to(std::span<const double> query, std::size_t row_index) const {
  const auto r = row(row_index);
  double sum = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double d = query[j] - static_cast<double>(r[j]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<SearchHit> VectorIndex::ranked(std::span<const double> query,
                                           std::optional<std::size_t> k,
                                           std::optional<int> max_year) const {
  if (query.size() != dim_) {
    throw IndexError("query dimension " + std::to_string(query.size()) + " does not match index " +
                     std::to_string(dim_));
  }
  std::vector<SearchHit> hits;
  hits.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (max_year && years_[i] >= *max_year) continue;
    hits.push_back({ids_[i], distance_to(query, i)});
  }
  const std::size_t keep = k ? std::min(*k, hits.size()) : hits.size();
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    hit_before);
  hits.resize(keep);
  return hits;
}

std::vector<SearchHit> VectorIndex::search(std::span<const double> query, std::size_t k,
                                           std::optional<int> max_year) const {
  if (k < 1) throw IndexError("k must be at least 1");
  return ranked(query, k, max_year);
}

std::vector<SearchHit> VectorIndex::full_ranking(std::span<const double> query,
                                                 std::optional<int> max_year) const {
  return ranked(query, std::nullopt, max_year);
}

void VectorIndex::save(std::ostream& out) const {
  nlohmann::ordered_json header;
  header["format"] = kIndexFormat;
  header["version"] = kIndexVersion;
  header["n"] = ids_.size();
  header["d"] = dim_;
  out << header.dump() << '\n';
  for (const auto& id : ids_) {
    binary::write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (const int year : years_) binary::write_i32(out, year);
  binary::write_floats(out, matrix_);
  if (!out) throw IndexError("failed to write index");
}

void VectorIndex::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IndexError("cannot open " + path.string() + " for writing");
  save(out);
}

VectorIndex VectorIndex::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IndexError("index file is empty");
  std::size_t n = 0;
  std::size_t d = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != kIndexFormat) throw IndexError("not an index file");
    if (header.at("version").get<int>() != kIndexVersion) {
      throw IndexError("unsupported index version " + header.at("version").dump());
    }
    n = header.at("n").get<std::size_t>();
    d = header.at("d").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IndexError(std::string("bad index header: ") + e.what());
  }
  try {
    std::vector<ArticleId> ids(n);
    for (auto& id : ids) {
      const auto length = binary::read_u32(in, "index id");
      id.resize(length);
      binary::read_exact(in, id.data(), length, "index id");
    }
    std::vector<int> years(n);
    for (auto& year : years) year = binary::read_i32(in, "index year");
    std::vector<float> matrix(n * d);
    binary::read_floats(in, matrix, "index matrix");
    return VectorIndex(std::move(ids), std::move(years), d, std::move(matrix));
  } catch (const IndexError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IndexError(std::string("bad index file: ") + e.what());
  }
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError("cannot open index " + path.string());
  return load(in);
}

std::vector<ArticleId> hit_ids(const std::vector<SearchHit>& hits) {
  std::vector<ArticleId> ids;
  ids.reserve(hits.size());
  for (const auto& hit : hits) ids.push_back(hit.id);
  return ids;
}

}  // namespace pcr
