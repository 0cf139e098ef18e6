#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcr/corpus.hpp"

namespace pcr {

// Generator for a clustered toy corpus. Every article belongs to a topic
// cluster and a subtopic inside it; its text mixes subtopic, cluster,
// "writing style" and generic words. Styles are shared across clusters and
// dominate the word counts, so an untrained encoder mostly sees style.
// Citing articles each own two related-work paragraphs about two different
// subtopics of their cluster; paragraphs cite older same-subtopic articles.
struct SyntheticConfig {
  std::size_t articles = 500;
  std::size_t clusters = 10;
  std::size_t subtopics_per_cluster = 5;
  std::size_t styles = 4;
  std::size_t train_paragraphs = 200;
  std::size_t validation_paragraphs = 30;
  std::size_t test_paragraphs = 50;
  std::size_t extra_rw_citations = 3;  // RW citations outside the two paragraphs
  std::size_t other_citations = 5;     // non-RW citations of each citing article
  std::size_t citations_per_background_article = 5;
  int pivot_year = kDefaultPivotYear;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  std::vector<Article> articles;
  std::vector<ParagraphRecord> paragraphs;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace pcr
