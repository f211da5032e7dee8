#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "umf/core.hpp"

namespace umf::profile {

enum class Method { HandcraftedIcl, LlmGenerated, DatasetAligned, Pluggable };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

struct Profile {
  std::string profile_id;
  Method method = Method::HandcraftedIcl;
  std::optional<std::string> system_text;
  std::optional<std::string> adapter_tag;
  std::optional<Json> source_record;
  // Selection tags consulted by the orchestrator: phase names ("decompose", "plan",
  // "formalize", "respond"), "worker:<id>", or subtask domain tags.
  std::set<std::string> applies_to;
};

/// Text methods carry system_text only; pluggable carries adapter_tag only.
void validate_profile(const Profile& profile);

/// Text profiles replace system_prefix (last applied wins); pluggable profiles append
/// their adapter tag once. The prompt is never touched.
ModelRequest apply_profile(const Profile& profile, ModelRequest request);

inline constexpr std::string_view kGenerateProfilePrefix = "GENERATE-PROFILE:";

/// Prompts the model with the attributes and any seed profiles as examples; the first
/// candidate becomes the system text of a new llm_generated profile.
Profile generate_profile(const std::vector<Profile>& seed_profiles, const Json& attributes,
                         const ModelPort& model, std::string profile_id = "generated");

/// Substitutes `{field}` placeholders in template_text from record.
Profile align_profile(const Json& record, std::string_view template_text,
                      std::string profile_id = "aligned");

}  // namespace umf::profile
