#include "text.hpp"

#include <array>
#include <cctype>
#include <regex>

namespace detvlm::parsing::detail {
namespace {

bool is_word_char(unsigned char c) { return std::isalpha(c) || c == '\'' || c >= 0x80; }

}  // namespace

bool is_blank(std::string_view text) {
  for (unsigned char c : text) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

std::optional<long> number_word(std::string_view word) {
  static constexpr std::array<std::string_view, 21> kWords{
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
  for (std::size_t i = 0; i < kWords.size(); ++i) {
    if (kWords[i] == word) return static_cast<long>(i);
  }
  return std::nullopt;
}

std::string normalize(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+2018 / U+2019 -> '
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 || static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      s += '\'';
      i += 2;
      continue;
    }
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
  }
  static const std::regex kGrouped(R"((^|[^\d,])(\d{1,3}(?:,\d{3})+)(?![\d]))");
  std::string joined;
  auto begin = std::sregex_iterator(s.begin(), s.end(), kGrouped);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto group_pos = static_cast<std::size_t>(m.position(2));
    joined.append(s, last, group_pos - last);
    for (char c : m.str(2)) {
      if (c != ',') joined += c;
    }
    last = group_pos + static_cast<std::size_t>(m.length(2));
  }
  joined.append(s, last, std::string::npos);

  static const std::regex kDigitHyphen(R"((\d)-([a-z]))");
  return std::regex_replace(joined, kDigitHyphen, "$1 $2");
}

std::string strip_parentheticals(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  int depth = 0;
  for (char c : text) {
    if (c == '(') {
      ++depth;
      continue;
    }
    if (c == ')' && depth > 0) {
      --depth;
      continue;
    }
    if (depth == 0) out += c;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  int sentence = 0;
  int index = 0;
  bool sentence_has_tokens = false;
  auto boundary = [&] {
    if (sentence_has_tokens) ++sentence;
    sentence_has_tokens = false;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      bool decimal = false;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        decimal = true;
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      Token t{TokenKind::Number, std::string(s.substr(i, j - i)), std::nullopt, sentence, index++};
      if (!decimal && j - i <= 9) t.value = std::stol(t.text);
      tokens.push_back(std::move(t));
      sentence_has_tokens = true;
      i = j;
    } else if (is_word_char(c)) {
      std::size_t j = i;
      while (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) ++j;
      Token t{TokenKind::Word, std::string(s.substr(i, j - i)), std::nullopt, sentence, index++};
      t.value = number_word(t.text);
      tokens.push_back(std::move(t));
      sentence_has_tokens = true;
      i = j;
    } else {
      if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
        boundary();
      } else if (c == ':') {
        tokens.push_back({TokenKind::Colon, ":", std::nullopt, sentence, index});
      }
      ++i;
    }
  }
  return tokens;
}

}  // namespace detvlm::parsing::detail
