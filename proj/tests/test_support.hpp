#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"
#include "pcr/random.hpp"

namespace pcr::testing {

inline Article make_article(std::string id, int year, std::string title = "title",
                            std::string abstract = "abstract", IdSet rw = {},
                            IdSet other = {}, bool is_acl = true) {
  Article a;
  a.id = std::move(id);
  a.title = std::move(title);
  a.abstract = std::move(abstract);
  a.year = year;
  a.is_acl = is_acl;
  a.rw_citations = std::move(rw);
  a.other_citations = std::move(other);
  return a;
}

inline Sentence make_sentence(DiscourseLabel label, IdSet cited = {}, std::string text = "s") {
  return Sentence{std::move(text), label, std::move(cited)};
}

inline ParagraphRecord make_paragraph(std::string id, std::string citing,
                                      std::vector<Sentence> sentences) {
  return ParagraphRecord{std::move(id), std::move(citing), std::move(sentences)};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream(path, std::ios::binary | std::ios::trunc) << content;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pcr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_vector(Rng& rng, std::size_t dim, double scale = 1.0) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

inline EncoderParams small_params(std::uint64_t seed = 3, std::size_t buckets = 257) {
  EncoderConfig cfg;
  cfg.hash_buckets = buckets;
  cfg.embed_dim = 6;
  cfg.hidden_dim = 5;
  cfg.out_dim = 4;
  cfg.seed = seed;
  return EncoderParams::initialize(cfg);
}

// Corpus in which every eligible paragraph has at least 10 members in each
// negative pool: each citing article owns two paragraphs with 3 positives
// each, 10 extra related-work citations, 12 other citations, and every
// positive cites 6 articles nobody else cites.
struct AbundantCorpus {
  std::vector<Article> articles;
  std::vector<ParagraphRecord> paragraphs;
};

inline AbundantCorpus abundant_pool_corpus(std::size_t citing_articles) {
  AbundantCorpus c;
  std::size_t next = 0;
  auto fresh = [&](int year) {
    Article a = make_article("n" + std::to_string(next++), year, "t", "a");
    c.articles.push_back(a);
    return a.id;
  };
  for (std::size_t i = 0; i < citing_articles; ++i) {
    Article citing = make_article("c" + std::to_string(i), 2015, "citing", "abstract");
    for (int p = 0; p < 2; ++p) {
      IdSet positives;
      for (int k = 0; k < 3; ++k) {
        ArticleId pos = fresh(2010);
        IdSet refs;
        for (int r = 0; r < 6; ++r) refs.insert(fresh(2000));
        for (auto& a : c.articles) {
          if (a.id == pos) a.rw_citations = refs;
        }
        positives.insert(pos);
      }
      citing.rw_citations.insert(positives.begin(), positives.end());
      c.paragraphs.push_back(make_paragraph(
          citing.id + "-p" + std::to_string(p), citing.id,
          {make_sentence(DiscourseLabel::kTransition, {}, "topic"),
           make_sentence(DiscourseLabel::kOther, positives, "body")}));
    }
    for (int k = 0; k < 10; ++k) citing.rw_citations.insert(fresh(2009));
    for (int k = 0; k < 12; ++k) citing.other_citations.insert(fresh(2009));
    c.articles.push_back(citing);
  }
  return c;
}

}  // namespace pcr::testing
