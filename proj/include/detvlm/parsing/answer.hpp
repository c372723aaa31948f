#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "detvlm/gateway/types.hpp"
#include "detvlm/prompting/prompt.hpp"

namespace detvlm::parsing {

enum class CountQualifier { Exact, AtLeast, Approximate };
enum class RouteStatus { Unobstructed, PartiallyObstructed, Obstructed, Unknown };
enum class UndefinedReason { Refusal, NoNumber, EmptyResponse, BackendFailure };

struct CountAnswer {
  int value = 0;
  CountQualifier qualifier = CountQualifier::Exact;
  friend bool operator==(const CountAnswer&, const CountAnswer&) = default;
};

struct RouteEntry {
  std::string label;
  RouteStatus status = RouteStatus::Unknown;
  friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

// Never empty.
struct RouteAssessment {
  std::vector<RouteEntry> entries;
  friend bool operator==(const RouteAssessment&, const RouteAssessment&) = default;
};

struct CaptionAnswer {
  std::string text;
  friend bool operator==(const CaptionAnswer&, const CaptionAnswer&) = default;
};

struct Undefined {
  UndefinedReason reason = UndefinedReason::NoNumber;
  friend bool operator==(const Undefined&, const Undefined&) = default;
};

using ParsedAnswer = std::variant<CountAnswer, RouteAssessment, CaptionAnswer, Undefined>;

std::string_view to_string(CountQualifier q);
std::string_view to_string(RouteStatus s);
std::string_view to_string(UndefinedReason r);

// Key-value rendering, one `key: value` per line, e.g.
//   kind: count / value: 13 / qualifier: at_least
//   kind: route / route.primary: partially_obstructed
//   kind: undefined / reason: no_number
// Used by the `parse` CLI subcommand and the transcript corpus.
std::string to_key_value(const ParsedAnswer& answer);

// Default object keywords for counting.
const std::vector<std::string>& default_count_keywords();
// Default route labels.
const std::vector<std::string>& default_route_labels();

// Tokens a number and an object keyword may be apart and still pair up.
inline constexpr int kProximityWindow = 4;

// Extracts an object count. Rules, first match wins:
//  1. a refusal phrase -> Undefined(Refusal)
//  2. "at least N <keyword>" -> Count(N, AtLeast)
//  3. "approximately|about|around N <keyword>" -> Count(N, Approximate)
//  4. "N <keyword>" or "<keyword>: N" -> Count(N, Exact)
//  5. otherwise -> Undefined(NoNumber)
// N is digits (commas/hyphens normalized) or a number word zero..twenty,
// within kProximityWindow tokens of a keyword in the same sentence. Among
// candidates of one rule the one nearest a keyword wins, then the earliest.
// Case-insensitive. Empty text -> Undefined(EmptyResponse).
ParsedAnswer extract_count(std::string_view text, const std::vector<std::string>& object_keywords = default_count_keywords());

// For each route label mentioned, the status keyword nearest to it in the
// same sentence. If the text has a "summary" section that mentions any
// label, only that section is read. Parenthesized asides are ignored, so a
// label inside "(...)" does not count as a separate route.
ParsedAnswer extract_route_status(std::string_view text,
                                  const std::vector<std::string>& route_labels = default_route_labels());

// Failure -> Undefined(BackendFailure); otherwise dispatch on the task.
ParsedAnswer classify_exchange(const gateway::VlmExchange& exchange, prompting::TaskKind task);
ParsedAnswer classify_text(std::string_view text, prompting::TaskKind task);

}  // namespace detvlm::parsing
