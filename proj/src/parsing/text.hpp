#pragma once

// Tokenizer shared by the count and route extractors.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detvlm::parsing::detail {

enum class TokenKind { Word, Number, Colon };

struct Token {
  TokenKind kind = TokenKind::Word;
  std::string text;           // lowercased
  std::optional<long> value;  // integer value for Number tokens and number words
  int sentence = 0;
  int index = 0;  // position among Word/Number tokens; colons share the next index
};

// Lowercases, maps typographic apostrophes to '\'', joins comma-grouped
// digits ("1,024" -> "1024") and splits digit-letter hyphens
// ("14-plane" -> "14 plane").
std::string normalize(std::string_view text);

// Removes "(...)" asides, nesting aware.
std::string strip_parentheticals(std::string_view text);

// Sentence boundaries: . ! ? ; and newlines (a '.' between digits is a
// decimal point).
std::vector<Token> tokenize(std::string_view normalized);

std::optional<long> number_word(std::string_view word);

bool is_blank(std::string_view text);

}  // namespace detvlm::parsing::detail
