#include "pcr/text.hpp"

#include <cstdio>

namespace pcr {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool starts_with_separator(std::string_view text, std::size_t pos) {
  if (text.size() - pos < kTopicSeparatorToken.size()) return false;
  for (std::size_t i = 0; i < kTopicSeparatorToken.size(); ++i) {
    if (lower_ascii(text[pos + i]) != kTopicSeparatorToken[i]) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[' && starts_with_separator(text, i)) {
      flush();
      tokens.emplace_back(kTopicSeparatorToken);
      i += kTopicSeparatorToken.size();
      continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      current.push_back(lower_ascii(text[i]));
    } else {
      flush();
    }
    ++i;
  }
  flush();
  return tokens;
}

std::set<std::string> token_set(std::string_view text) {
  auto tokens = tokenize(text);
  return {std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end())};
}

std::set<std::string> content_token_set(std::string_view text) {
  auto tokens = token_set(text);
  tokens.erase(std::string(kTopicSeparatorToken));
  return tokens;
}

std::string compose_query_text(std::string_view title, std::string_view abstract,
                               std::string_view topic_sentence) {
  std::string text;
  text.reserve(title.size() + abstract.size() + topic_sentence.size() + 8);
  text.append(title).append(" ").append(abstract);
  text.append(" ").append(kTopicSeparator).append(" ");
  text.append(topic_sentence);
  return text;
}

std::string compose_article_text(std::string_view title, std::string_view abstract) {
  std::string text;
  text.reserve(title.size() + abstract.size() + 1);
  text.append(title).append(" ").append(abstract);
  return text;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace pcr
