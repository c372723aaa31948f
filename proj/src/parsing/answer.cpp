#include "detvlm/parsing/answer.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <tuple>

#include "text.hpp"

namespace detvlm::parsing {
namespace {

using detail::Token;
using detail::TokenKind;

constexpr std::array<std::string_view, 12> kRefusalPhrases{
    "unable to",        "cannot determine", "can't determine", "can not determine",
    "i can't",          "i cannot",         "i am not able",   "i'm not able",
    "not able to determine", "i'm sorry",   "i am sorry",      "i apologize"};

bool has_refusal(const std::string& normalized) {
  return std::any_of(kRefusalPhrases.begin(), kRefusalPhrases.end(),
                     [&](std::string_view p) { return normalized.find(p) != std::string::npos; });
}

// Word/number tokens only; colons are tracked separately.
struct Stream {
  std::vector<Token> words;
  std::vector<bool> colon_before;  // colon immediately before words[i]
};

Stream word_stream(const std::vector<Token>& tokens) {
  Stream st;
  bool colon = false;
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::Colon) {
      colon = true;
      continue;
    }
    st.words.push_back(t);
    st.colon_before.push_back(colon);
    colon = false;
  }
  return st;
}

bool is_keyword(const Token& t, const std::vector<std::string>& keywords) {
  return t.kind == TokenKind::Word && std::find(keywords.begin(), keywords.end(), t.text) != keywords.end();
}

CountQualifier qualifier_at(const std::vector<Token>& w, std::size_t i) {
  auto word = [&](std::size_t back) -> std::string_view {
    if (i < back || w[i - back].sentence != w[i].sentence) return {};
    return w[i - back].text;
  };
  if (word(2) == "at" && word(1) == "least") return CountQualifier::AtLeast;
  const auto prev = word(1);
  if (prev == "approximately" || prev == "about" || prev == "around") return CountQualifier::Approximate;
  return CountQualifier::Exact;
}

int rule_rank(CountQualifier q) {
  switch (q) {
    case CountQualifier::AtLeast: return 0;
    case CountQualifier::Approximate: return 1;
    case CountQualifier::Exact: return 2;
  }
  return 3;
}

struct RouteKeyword {
  std::vector<std::string_view> words;
  RouteStatus status;
};

const std::vector<RouteKeyword>& route_keywords() {
  static const std::vector<RouteKeyword> kKeywords{
      {{"partially", "obstructed"}, RouteStatus::PartiallyObstructed},
      {{"partially", "blocked"}, RouteStatus::PartiallyObstructed},
      {{"unobstructed"}, RouteStatus::Unobstructed},
      {{"obstructed"}, RouteStatus::Obstructed},
      {{"blocked"}, RouteStatus::Obstructed},
      {{"clear"}, RouteStatus::Unobstructed},
  };
  return kKeywords;
}

bool matches_at(const std::vector<Token>& w, std::size_t i, const std::vector<std::string_view>& seq) {
  if (i + seq.size() > w.size()) return false;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (w[i + k].text != seq[k] || w[i + k].sentence != w[i].sentence) return false;
  }
  return true;
}

bool is_negator(std::string_view word) {
  return word == "not" || word == "no" || word == "never" ||
         (word.size() > 3 && word.substr(word.size() - 3) == "n't");
}

struct StatusMention {
  std::size_t position;
  RouteStatus status;
};

std::vector<StatusMention> find_statuses(const std::vector<Token>& w) {
  std::vector<StatusMention> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (const auto& kw : route_keywords()) {
      if (!matches_at(w, i, kw.words)) continue;
      const auto after = i + kw.words.size();
      // "clear obstructions", "clear signs of ..." use clear as an adjective.
      if (kw.words.front() == "clear" && after < w.size() && w[after].sentence == w[i].sentence &&
          (w[after].text.rfind("obstruct", 0) == 0 || w[after].text.rfind("sign", 0) == 0)) {
        break;
      }
      bool negated = false;
      for (std::size_t back = 1; back <= 4 && back <= i; ++back) {
        if (w[i - back].sentence != w[i].sentence) break;
        if (is_negator(w[i - back].text)) negated = true;
      }
      if (!negated) {
        out.push_back({i, kw.status});
      } else if (kw.status == RouteStatus::Obstructed) {
        out.push_back({i, RouteStatus::Unobstructed});
      }
      i += kw.words.size() - 1;
      break;
    }
  }
  return out;
}

std::vector<std::vector<std::string_view>> split_labels(const std::vector<std::string>& labels,
                                                        std::vector<std::string>& storage) {
  storage.clear();
  for (const auto& l : labels) storage.push_back(detail::normalize(l));
  std::vector<std::vector<std::string_view>> out;
  for (const auto& l : storage) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < l.size()) {
      while (i < l.size() && l[i] == ' ') ++i;
      auto j = l.find(' ', i);
      if (j == std::string::npos) j = l.size();
      if (j > i) words.push_back(std::string_view(l).substr(i, j - i));
      i = j;
    }
    out.push_back(std::move(words));
  }
  return out;
}

std::vector<RouteEntry> assess_routes(const std::vector<Token>& w, const std::vector<std::string>& labels) {
  std::vector<std::string> storage;
  const auto label_words = split_labels(labels, storage);
  const auto statuses = find_statuses(w);

  struct Found {
    std::size_t first_mention;
    RouteEntry entry;
  };
  std::vector<Found> found;
  for (std::size_t li = 0; li < labels.size(); ++li) {
    if (label_words[li].empty()) continue;
    std::optional<std::size_t> first;
    std::optional<RouteStatus> status;
    for (std::size_t i = 0; i < w.size() && !status; ++i) {
      if (!matches_at(w, i, label_words[li])) continue;
      if (!first) first = i;
      std::size_t best_distance = std::numeric_limits<std::size_t>::max();
      for (const auto& s : statuses) {
        if (w[s.position].sentence != w[i].sentence) continue;
        const auto d = s.position >= i ? s.position - i : i - s.position;
        if (d < best_distance) {
          best_distance = d;
          status = s.status;
        }
      }
    }
    if (first) found.push_back({*first, {labels[li], status.value_or(RouteStatus::Unknown)}});
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const Found& a, const Found& b) { return a.first_mention < b.first_mention; });
  std::vector<RouteEntry> out;
  for (auto& f : found) out.push_back(std::move(f.entry));
  return out;
}

std::string escape_line(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\\') {
      out += "\\\\";
    } else if (c != '\r') {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(CountQualifier q) {
  switch (q) {
    case CountQualifier::Exact: return "exact";
    case CountQualifier::AtLeast: return "at_least";
    case CountQualifier::Approximate: return "approximate";
  }
  return "?";
}

std::string_view to_string(RouteStatus s) {
  switch (s) {
    case RouteStatus::Unobstructed: return "unobstructed";
    case RouteStatus::PartiallyObstructed: return "partially_obstructed";
    case RouteStatus::Obstructed: return "obstructed";
    case RouteStatus::Unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(UndefinedReason r) {
  switch (r) {
    case UndefinedReason::Refusal: return "refusal";
    case UndefinedReason::NoNumber: return "no_number";
    case UndefinedReason::EmptyResponse: return "empty_response";
    case UndefinedReason::BackendFailure: return "backend_failure";
  }
  return "?";
}

std::string to_key_value(const ParsedAnswer& answer) {
  struct Visitor {
    std::string operator()(const CountAnswer& c) const {
      return "kind: count\nvalue: " + std::to_string(c.value) + "\nqualifier: " + std::string(to_string(c.qualifier)) +
             "\n";
    }
    std::string operator()(const RouteAssessment& r) const {
      std::string out = "kind: route\n";
      for (const auto& e : r.entries) out += "route." + e.label + ": " + std::string(to_string(e.status)) + "\n";
      return out;
    }
    std::string operator()(const CaptionAnswer& c) const { return "kind: caption\ntext: " + escape_line(c.text) + "\n"; }
    std::string operator()(const Undefined& u) const {
      return "kind: undefined\nreason: " + std::string(to_string(u.reason)) + "\n";
    }
  };
  return std::visit(Visitor{}, answer);
}

const std::vector<std::string>& default_count_keywords() {
  static const std::vector<std::string> kKeywords{"aircraft", "aircrafts", "airplane", "airplanes",
                                                  "plane",    "planes",    "aeroplane", "aeroplanes"};
  return kKeywords;
}

const std::vector<std::string>& default_route_labels() {
  static const std::vector<std::string> kLabels{"primary", "secondary", "main road", "lower road"};
  return kLabels;
}

ParsedAnswer extract_count(std::string_view text, const std::vector<std::string>& object_keywords) {
  if (detail::is_blank(text)) return Undefined{UndefinedReason::EmptyResponse};
  const auto normalized = detail::normalize(text);
  if (has_refusal(normalized)) return Undefined{UndefinedReason::Refusal};

  std::vector<std::string> keywords;
  for (const auto& k : object_keywords) keywords.push_back(detail::normalize(k));

  const auto stream = word_stream(detail::tokenize(normalized));
  const auto& w = stream.words;

  // (rule rank, distance, position) -> smallest wins.
  std::optional<std::tuple<int, std::size_t, std::size_t>> best;
  std::optional<CountAnswer> best_answer;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!w[i].value) continue;
    std::optional<std::size_t> distance;
    // "N ... <keyword>", no other number in between.
    for (std::size_t j = i + 1; j < w.size() && j - i <= static_cast<std::size_t>(kProximityWindow); ++j) {
      if (w[j].sentence != w[i].sentence || w[j].kind == TokenKind::Number || w[j].value) break;
      if (is_keyword(w[j], keywords)) {
        distance = j - i;
        break;
      }
    }
    // "<keyword>: N"
    if (!distance && i > 0 && stream.colon_before[i] && w[i - 1].sentence == w[i].sentence &&
        is_keyword(w[i - 1], keywords)) {
      distance = 1;
    }
    if (!distance) continue;
    const auto q = qualifier_at(w, i);
    const auto key = std::make_tuple(rule_rank(q), *distance, i);
    if (!best || key < *best) {
      best = key;
      best_answer = CountAnswer{static_cast<int>(*w[i].value), q};
    }
  }
  if (best_answer) return *best_answer;
  return Undefined{UndefinedReason::NoNumber};
}

ParsedAnswer extract_route_status(std::string_view text, const std::vector<std::string>& route_labels) {
  if (detail::is_blank(text)) return Undefined{UndefinedReason::EmptyResponse};
  const auto normalized = detail::normalize(detail::strip_parentheticals(text));
  const auto stream = word_stream(detail::tokenize(normalized));
  const auto& w = stream.words;

  auto summary = std::find_if(w.begin(), w.end(), [](const Token& t) { return t.text == "summary"; });
  if (summary != w.end()) {
    const std::vector<Token> section(summary, w.end());
    auto entries = assess_routes(section, route_labels);
    if (!entries.empty()) return RouteAssessment{std::move(entries)};
  }
  auto entries = assess_routes(w, route_labels);
  if (!entries.empty()) return RouteAssessment{std::move(entries)};
  if (has_refusal(normalized)) return Undefined{UndefinedReason::Refusal};
  return Undefined{UndefinedReason::NoNumber};
}

ParsedAnswer classify_text(std::string_view text, prompting::TaskKind task) {
  switch (task) {
    case prompting::TaskKind::CountAircraft:
      return extract_count(text);
    case prompting::TaskKind::RouteStatus:
      return extract_route_status(text);
    case prompting::TaskKind::Caption:
      if (detail::is_blank(text)) return Undefined{UndefinedReason::EmptyResponse};
      {
        const auto first = text.find_first_not_of(" \t\r\n");
        const auto last = text.find_last_not_of(" \t\r\n");
        return CaptionAnswer{std::string(text.substr(first, last - first + 1))};
      }
  }
  return Undefined{UndefinedReason::NoNumber};
}

ParsedAnswer classify_exchange(const gateway::VlmExchange& exchange, prompting::TaskKind task) {
  if (!exchange.ok()) return Undefined{UndefinedReason::BackendFailure};
  return classify_text(*exchange.response, task);
}

}  // namespace detvlm::parsing
