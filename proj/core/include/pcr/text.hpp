#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pcr {

// Literal separator placed between the title+abstract segment and the topic
// sentence of a query.
inline constexpr std::string_view kTopicSeparator = "[TS]";
inline constexpr std::string_view kTopicSeparatorToken = "[ts]";

// FNV-1a, 64-bit. Offset basis 0xcbf29ce484222325, prime 0x100000001b3.
// Fixed so that hashed checkpoints stay portable.
constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = kFnvOffsetBasis) {
  for (const char c : bytes) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= kFnvPrime;
  }
  return hash;
}

// Lowercases ASCII letters and splits on maximal runs of characters that are
// not ASCII alphanumerics. Bytes >= 0x80 count as word characters so UTF-8
// words survive intact. The sequence "[ts]" (any case) is kept as one token.
std::vector<std::string> tokenize(std::string_view text);

std::set<std::string> token_set(std::string_view text);

// token_set without the [ts] separator; used for word-overlap measures.
std::set<std::string> content_token_set(std::string_view text);

// title ⧺ " " ⧺ abstract ⧺ " [TS] " ⧺ topic sentence.
std::string compose_query_text(std::string_view title, std::string_view abstract,
                               std::string_view topic_sentence);

// title ⧺ " " ⧺ abstract, the text an article is embedded from.
std::string compose_article_text(std::string_view title, std::string_view abstract);

std::string to_hex(std::uint64_t value);

}  // namespace pcr
