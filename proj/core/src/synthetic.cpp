#include "pcr/synthetic.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "pcr/random.hpp"

namespace pcr {
namespace {

constexpr std::size_t kClusterWords = 40;
constexpr std::size_t kSubtopicWords = 8;
constexpr std::size_t kStyleWords = 30;
constexpr std::size_t kGenericWords = 300;

class Lexicon {
 public:
  explicit Lexicon(Rng rng) : rng_(std::move(rng)) {}

  std::vector<std::string> words(std::size_t n) {
    std::vector<std::string> out;
    while (out.size() < n) {
      auto word = make_word();
      if (seen_.insert(word).second) out.push_back(std::move(word));
    }
    return out;
  }

 private:
  std::string make_word() {
    static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                                   "r", "s", "t", "v", "z", "br", "st", "tr", "pl"};
    static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "eo"};
    const std::size_t syllables = 2 + rng_.uniform_index(3);
    std::string word;
    for (std::size_t i = 0; i < syllables; ++i) {
      word += kOnsets[rng_.uniform_index(std::size(kOnsets))];
      word += kVowels[rng_.uniform_index(std::size(kVowels))];
    }
    if (rng_.uniform_index(3) == 0) word += "n";
    return word;
  }

  Rng rng_;
  std::unordered_set<std::string> seen_;
};

struct Slot {
  std::size_t cluster = 0;
  std::size_t subtopic = 0;
  std::size_t style = 0;
  bool citing = false;
};

class Writer {
 public:
  Writer(const SyntheticConfig& config, Rng rng) : rng_(std::move(rng)) {
    Lexicon lexicon(rng_.split("lexicon"));
    for (std::size_t c = 0; c < config.clusters; ++c) cluster_.push_back(lexicon.words(kClusterWords));
    for (std::size_t s = 0; s < config.clusters * config.subtopics_per_cluster; ++s) {
      subtopic_.push_back(lexicon.words(kSubtopicWords));
    }
    for (std::size_t s = 0; s < config.styles; ++s) style_.push_back(lexicon.words(kStyleWords));
    generic_ = lexicon.words(kGenericWords);
    subtopics_per_cluster_ = config.subtopics_per_cluster;
  }

  struct Mix {
    std::vector<std::size_t> subtopics;  // global subtopic indices, drawn evenly
    std::size_t subtopic_words = 0;
    std::size_t cluster = 0;
    std::size_t cluster_words = 0;
    std::size_t style = 0;
    std::size_t style_words = 0;
    std::size_t generic_words = 0;
  };

  std::string text(const Mix& mix, bool capitalize) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < mix.subtopic_words; ++i) {
      words.push_back(pick(subtopic_[mix.subtopics[i % mix.subtopics.size()]]));
    }
    for (std::size_t i = 0; i < mix.cluster_words; ++i) words.push_back(pick(cluster_[mix.cluster]));
    for (std::size_t i = 0; i < mix.style_words; ++i) words.push_back(pick(style_[mix.style]));
    for (std::size_t i = 0; i < mix.generic_words; ++i) words.push_back(pick(generic_));
    rng_.shuffle(words);
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) out += (i % 9 == 0) ? ", " : " ";
      out += words[i];
    }
    if (capitalize && !out.empty()) out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
  }

  std::size_t global_subtopic(std::size_t cluster, std::size_t subtopic) const {
    return cluster * subtopics_per_cluster_ + subtopic;
  }

  Rng& rng() { return rng_; }

 private:
  const std::string& pick(const std::vector<std::string>& vocab) {
    return vocab[rng_.uniform_index(vocab.size())];
  }

  Rng rng_;
  std::vector<std::vector<std::string>> cluster_;
  std::vector<std::vector<std::string>> subtopic_;
  std::vector<std::vector<std::string>> style_;
  std::vector<std::string> generic_;
  std::size_t subtopics_per_cluster_ = 1;
};

std::string article_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "a%04zu", index);
  return buf;
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t n, Rng& rng) {
  rng.shuffle(items);
  if (items.size() > n) items.resize(n);
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  if (config.clusters == 0 || config.subtopics_per_cluster < 2 || config.styles == 0) {
    throw std::invalid_argument("synthetic corpus needs clusters, >= 2 subtopics and styles");
  }
  const std::size_t n_paragraphs =
      config.train_paragraphs + config.validation_paragraphs + config.test_paragraphs;
  auto citing_for = [](std::size_t paragraphs) { return (paragraphs + 1) / 2; };
  const std::size_t train_citing = citing_for(config.train_paragraphs);
  const std::size_t val_citing = citing_for(config.validation_paragraphs);
  const std::size_t test_citing = citing_for(config.test_paragraphs);
  const std::size_t n_citing = train_citing + val_citing + test_citing;
  if (n_citing >= config.articles) {
    throw std::invalid_argument("synthetic corpus has too few articles for its paragraphs");
  }
  (void)n_paragraphs;

  const Rng root(config.seed);
  Writer writer(config, root.split("writer"));
  Rng structure = root.split("structure");

  // Citing articles occupy the first n_citing slots.
  std::vector<Slot> slots(config.articles);
  std::vector<int> years(config.articles);
  const std::size_t n_background = config.articles - n_citing;
  for (std::size_t i = 0; i < config.articles; ++i) {
    auto& slot = slots[i];
    slot.citing = i < n_citing;
    const std::size_t j = slot.citing ? i : i - n_citing;
    slot.cluster = j % config.clusters;
    slot.subtopic = (j / config.clusters) % config.subtopics_per_cluster;
    slot.style = structure.uniform_index(config.styles);
    if (slot.citing) {
      if (i < train_citing) {
        years[i] = config.pivot_year - 4 + static_cast<int>(structure.uniform_index(4));
      } else if (i < train_citing + val_citing) {
        years[i] = config.pivot_year;
      } else {
        years[i] = config.pivot_year + 1 + static_cast<int>(structure.uniform_index(3));
      }
    } else {
      years[i] = config.pivot_year - 17 + static_cast<int>(structure.uniform_index(13));
    }
  }
  (void)n_background;

  // Background articles grouped by (cluster, subtopic) and by cluster.
  std::vector<std::vector<std::size_t>> by_subtopic(config.clusters * config.subtopics_per_cluster);
  std::vector<std::vector<std::size_t>> by_cluster(config.clusters);
  std::vector<std::size_t> background;
  for (std::size_t i = n_citing; i < config.articles; ++i) {
    by_subtopic[writer.global_subtopic(slots[i].cluster, slots[i].subtopic)].push_back(i);
    by_cluster[slots[i].cluster].push_back(i);
    background.push_back(i);
  }

  SyntheticCorpus corpus;
  corpus.articles.resize(config.articles);
  for (std::size_t i = 0; i < config.articles; ++i) {
    auto& article = corpus.articles[i];
    article.id = article_id(i);
    article.year = years[i];
    article.is_acl = true;
  }

  // Background citations: older articles of the same cluster.
  for (const std::size_t i : background) {
    std::vector<std::size_t> older;
    for (const std::size_t j : by_cluster[slots[i].cluster]) {
      if (years[j] < years[i]) older.push_back(j);
    }
    const auto cited =
        sample_without_replacement(older, config.citations_per_background_article, structure);
    for (std::size_t k = 0; k < cited.size(); ++k) {
      auto& target = (k % 2 == 0) ? corpus.articles[i].rw_citations
                                  : corpus.articles[i].other_citations;
      target.insert(article_id(cited[k]));
    }
  }

  // Citing articles and their paragraphs.
  std::vector<std::size_t> paragraph_budget(n_citing, 2);
  auto trim_odd = [&](std::size_t first, std::size_t count, std::size_t paragraphs) {
    if (count > 0 && paragraphs % 2 == 1) paragraph_budget[first + count - 1] = 1;
  };
  trim_odd(0, train_citing, config.train_paragraphs);
  trim_odd(train_citing, val_citing, config.validation_paragraphs);
  trim_odd(train_citing + val_citing, test_citing, config.test_paragraphs);

  std::vector<std::vector<std::size_t>> paragraph_subtopics(n_citing);
  for (std::size_t i = 0; i < n_citing; ++i) {
    const auto& slot = slots[i];
    auto& article = corpus.articles[i];
    std::vector<std::size_t> local(config.subtopics_per_cluster);
    for (std::size_t s = 0; s < local.size(); ++s) local[s] = s;
    structure.shuffle(local);
    local.resize(paragraph_budget[i]);
    for (const std::size_t s : local) {
      paragraph_subtopics[i].push_back(writer.global_subtopic(slot.cluster, s));
    }

    IdSet paragraph_cites;
    for (std::size_t p = 0; p < paragraph_subtopics[i].size(); ++p) {
      const auto& members = by_subtopic[paragraph_subtopics[i][p]];
      const std::size_t want = 2 + structure.uniform_index(3);
      const auto cited = sample_without_replacement(members, want + 1, structure);
      if (cited.size() < 3) {
        throw std::invalid_argument("synthetic subtopic too small; add articles");
      }

      ParagraphRecord paragraph;
      paragraph.id = article.id + "-p" + std::to_string(p);
      paragraph.citing_id = article.id;

      Writer::Mix topic{{paragraph_subtopics[i][p]}, 4, slot.cluster, 1, slot.style, 1, 3};
      Sentence first{writer.text(topic, true) + ".", DiscourseLabel::kTransition, {}};
      // The topic sentence sometimes cites the extra draw itself.
      std::vector<std::size_t> relevant(cited.begin(), cited.end());
      const std::size_t extra = relevant.back();
      relevant.pop_back();
      if (structure.uniform_index(3) == 0) first.cited_ids.insert(article_id(extra));
      paragraph.sentences.push_back(std::move(first));

      const std::size_t split = 1 + structure.uniform_index(relevant.size() - 1);
      for (const auto& range : {std::pair<std::size_t, std::size_t>{0, split},
                                std::pair<std::size_t, std::size_t>{split, relevant.size()}}) {
        Writer::Mix body{{paragraph_subtopics[i][p]}, 2, slot.cluster, 2, slot.style, 2, 4};
        Sentence sentence{writer.text(body, true) + ".", DiscourseLabel::kOther, {}};
        for (std::size_t k = range.first; k < range.second; ++k) {
          sentence.cited_ids.insert(article_id(relevant[k]));
        }
        paragraph.sentences.push_back(std::move(sentence));
      }
      for (const auto& s : paragraph.sentences) {
        paragraph_cites.insert(s.cited_ids.begin(), s.cited_ids.end());
      }
      corpus.paragraphs.push_back(std::move(paragraph));
    }

    article.rw_citations = paragraph_cites;
    std::vector<std::size_t> same_cluster;
    for (const std::size_t j : by_cluster[slot.cluster]) {
      if (!paragraph_cites.contains(article_id(j))) same_cluster.push_back(j);
    }
    for (const std::size_t j :
         sample_without_replacement(same_cluster, config.extra_rw_citations, structure)) {
      article.rw_citations.insert(article_id(j));
    }
    std::vector<std::size_t> elsewhere;
    for (const std::size_t j : background) {
      if (!article.rw_citations.contains(article_id(j))) elsewhere.push_back(j);
    }
    for (const std::size_t j :
         sample_without_replacement(elsewhere, config.other_citations, structure)) {
      article.other_citations.insert(article_id(j));
    }
  }

  // Texts. Citing abstracts cover both paragraph subtopics evenly, so only the
  // topic sentence tells the two paragraphs apart.
  for (std::size_t i = 0; i < config.articles; ++i) {
    const auto& slot = slots[i];
    auto& article = corpus.articles[i];
    const std::vector<std::size_t> subtopics =
        slot.citing ? paragraph_subtopics[i]
                    : std::vector<std::size_t>{writer.global_subtopic(slot.cluster, slot.subtopic)};
    Writer::Mix title{subtopics, 2, slot.cluster, 1, slot.style, 1, 1};
    Writer::Mix abstract{subtopics, 6, slot.cluster, 5, slot.style, 16, 12};
    article.title = writer.text(title, true);
    article.abstract = writer.text(abstract, true) + ".";
  }
  return corpus;
}

}  // namespace pcr
