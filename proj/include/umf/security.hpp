#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "umf/core.hpp"

namespace umf::security {

inline constexpr std::string_view kRedactionMarker = "[REDACTED]";

enum class Mode { RuleBased, LmPowered, Both };
enum class Decision { Allow, Redact, Block };  // ordered by precedence
enum class Axis { Prompt, Response, Privacy };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);
std::string_view to_string(Decision d);
std::string_view to_string(Axis a);

struct Policy {
  std::string policy_id;
  std::vector<std::string> deny_patterns;
  std::vector<std::string> canonical_forms;
  double jaccard_threshold = 0.8;
  std::vector<std::string> secrets;
  std::set<std::string> blocked_categories;
  Mode mode = Mode::RuleBased;
};

/// Throws InvalidPolicy unless the threshold is in (0, 1] and every secret is nonempty,
/// free of brackets and JSON-escaped characters, and not a fragment of the redaction
/// marker. Those secret restrictions make redaction provably leak-free.
void validate_policy(const Policy& policy);

struct Verdict {
  Decision decision = Decision::Allow;
  Axis axis = Axis::Prompt;
  std::optional<std::string> matched_rule;
  std::optional<std::string> redacted_text;
};

Json to_json(const Verdict& verdict);

struct CanonicalMatch {
  std::string form;
  double similarity = 0.0;
};

/// Lowercase, drop punctuation, collapse whitespace.
std::string normalize(std::string_view text);

/// Token-set Jaccard similarity of the normalized texts (1.0 when both are empty).
double jaccard(std::string_view a, std::string_view b);

/// Highest-similarity form at or above threshold; earlier forms win ties.
std::optional<CanonicalMatch> canonical_match(std::string_view text,
                                              const std::vector<std::string>& forms,
                                              double threshold);

/// Replaces every occurrence of every policy secret with the redaction marker.
/// Returns the rewritten text and whether anything was replaced.
std::pair<std::string, bool> redact_secrets(std::string_view text, const Policy& policy);

Verdict check_prompt(std::string_view text, const Policy& policy, const ModelPort* model);
Verdict check_response(std::string_view text, const Policy& policy, const ModelPort* model);

struct EgressResult {
  std::string payload;
  Verdict verdict;
};

/// Internal destinations pass unchanged. External destinations get secrets redacted,
/// or an empty payload and a block verdict when a deny pattern matches.
EgressResult filter_egress(std::string_view payload, const ToolSpec& destination,
                           const Policy& policy);

}  // namespace umf::security
