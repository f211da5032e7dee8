#include "umf/security.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace umf::security {

namespace {

std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> tokens;
  std::istringstream in(normalize(text));
  std::string tok;
  while (in >> tok) tokens.insert(tok);
  return tokens;
}

std::optional<std::string> deny_hit(std::string_view text, const Policy& policy) {
  const std::string lowered = to_lower(text);
  for (const auto& pattern : policy.deny_patterns) {
    if (pattern_matches(to_lower(pattern), lowered)) return "deny:" + pattern;
  }
  return std::nullopt;
}

std::optional<std::string> rule_based_block(std::string_view text, const Policy& policy) {
  if (auto hit = deny_hit(text, policy)) return hit;
  if (auto m = canonical_match(text, policy.canonical_forms, policy.jaccard_threshold)) {
    return "canonical:" + m->form;
  }
  return std::nullopt;
}

std::optional<std::string> lm_block(std::string_view text, const Policy& policy,
                                    const ModelPort& model) {
  ModelRequest req;
  req.prompt = "CLASSIFY: " + std::string(text);
  req.max_candidates = 1;
  const ModelResponse resp = model.complete(req);
  if (resp.candidates.empty()) return std::nullopt;
  const std::string& label = resp.candidates.front();
  if (policy.blocked_categories.count(label)) return "lm:" + label;
  return std::nullopt;
}

std::optional<std::string> blocking_rule(std::string_view text, const Policy& policy,
                                         const ModelPort* model) {
  if (policy.mode != Mode::RuleBased && model == nullptr) {
    throw Error(ErrorCode::GuardrailUnavailable,
                "policy '" + policy.policy_id + "' needs a model port for its lm guardrail");
  }
  if (policy.mode != Mode::LmPowered) {
    if (auto hit = rule_based_block(text, policy)) return hit;
  }
  if (policy.mode != Mode::RuleBased) {
    if (auto hit = lm_block(text, policy, *model)) return hit;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::RuleBased: return "rule_based";
    case Mode::LmPowered: return "lm_powered";
    case Mode::Both: return "both";
  }
  return "rule_based";
}

Mode mode_from_string(std::string_view s) {
  if (s == "rule_based") return Mode::RuleBased;
  if (s == "lm_powered") return Mode::LmPowered;
  if (s == "both") return Mode::Both;
  throw Error(ErrorCode::ParseError, "unknown guardrail mode '" + std::string(s) + "'");
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Allow: return "allow";
    case Decision::Redact: return "redact";
    case Decision::Block: return "block";
  }
  return "allow";
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::Prompt: return "prompt";
    case Axis::Response: return "response";
    case Axis::Privacy: return "privacy";
  }
  return "prompt";
}

void validate_policy(const Policy& policy) {
  if (!(policy.jaccard_threshold > 0.0 && policy.jaccard_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidPolicy, "jaccard_threshold must lie in (0, 1]");
  }
  for (const auto& secret : policy.secrets) {
    if (secret.empty()) throw Error(ErrorCode::InvalidPolicy, "empty secret");
    for (unsigned char c : secret) {
      if (c == '[' || c == ']' || c == '"' || c == '\\' || c < 0x20) {
        throw Error(ErrorCode::InvalidPolicy,
                    "secrets may not contain brackets, quotes, backslashes or control bytes");
      }
    }
    if (kRedactionMarker.find(secret) != std::string_view::npos) {
      throw Error(ErrorCode::InvalidPolicy, "secret is a fragment of the redaction marker");
    }
  }
}

Json to_json(const Verdict& verdict) {
  Json j;
  j["decision"] = to_string(verdict.decision);
  j["axis"] = to_string(verdict.axis);
  j["matched_rule"] = verdict.matched_rule ? Json(*verdict.matched_rule) : Json(nullptr);
  if (verdict.redacted_text) j["redacted_text"] = *verdict.redacted_text;
  return j;
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

double jaccard(std::string_view a, std::string_view b) {
  const auto ta = token_set(a);
  const auto tb = token_set(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : ta) inter += tb.count(t);
  const std::size_t uni = ta.size() + tb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<CanonicalMatch> canonical_match(std::string_view text,
                                              const std::vector<std::string>& forms,
                                              double threshold) {
  std::optional<CanonicalMatch> best;
  for (const auto& form : forms) {
    const double sim = jaccard(text, form);
    if (sim >= threshold && (!best || sim > best->similarity)) best = CanonicalMatch{form, sim};
  }
  return best;
}

std::pair<std::string, bool> redact_secrets(std::string_view text, const Policy& policy) {
  // Longest secrets first so a secret that contains another is replaced whole.
  std::vector<std::string> secrets = policy.secrets;
  std::stable_sort(secrets.begin(), secrets.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::string out(text);
  bool changed = false;
  for (const auto& secret : secrets) {
    if (secret.empty()) continue;
    std::string next;
    std::size_t pos = 0;
    while (true) {
      const std::size_t hit = out.find(secret, pos);
      if (hit == std::string::npos) break;
      next.append(out, pos, hit - pos);
      next.append(kRedactionMarker);
      pos = hit + secret.size();
      changed = true;
    }
    next.append(out, pos, std::string::npos);
    out = std::move(next);
  }
  return {std::move(out), changed};
}

Verdict check_prompt(std::string_view text, const Policy& policy, const ModelPort* model) {
  Verdict v;
  v.axis = Axis::Prompt;
  if (auto rule = blocking_rule(text, policy, model)) {
    v.decision = Decision::Block;
    v.matched_rule = std::move(rule);
  }
  return v;
}

Verdict check_response(std::string_view text, const Policy& policy, const ModelPort* model) {
  Verdict v;
  v.axis = Axis::Response;
  if (auto rule = blocking_rule(text, policy, model)) {
    v.decision = Decision::Block;
    v.matched_rule = std::move(rule);
    return v;
  }
  auto [redacted, changed] = redact_secrets(text, policy);
  if (changed) {
    v.decision = Decision::Redact;
    v.matched_rule = "secret";
    v.redacted_text = std::move(redacted);
  }
  return v;
}

EgressResult filter_egress(std::string_view payload, const ToolSpec& destination,
                           const Policy& policy) {
  EgressResult out;
  out.verdict.axis = Axis::Privacy;
  if (!destination.external) {
    out.payload = std::string(payload);
    return out;
  }
  if (auto hit = deny_hit(payload, policy)) {
    out.verdict.decision = Decision::Block;
    out.verdict.matched_rule = std::move(hit);
    return out;
  }
  auto [redacted, changed] = redact_secrets(payload, policy);
  if (changed) {
    out.verdict.decision = Decision::Redact;
    out.verdict.matched_rule = "secret";
    out.verdict.redacted_text = redacted;
  }
  out.payload = std::move(redacted);
  return out;
}

}  // namespace umf::security
