#include "umf/profile.hpp"

#include <algorithm>

namespace umf::profile {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::HandcraftedIcl: return "handcrafted_icl";
    case Method::LlmGenerated: return "llm_generated";
    case Method::DatasetAligned: return "dataset_aligned";
    case Method::Pluggable: return "pluggable";
  }
  return "handcrafted_icl";
}

Method method_from_string(std::string_view s) {
  if (s == "handcrafted_icl") return Method::HandcraftedIcl;
  if (s == "llm_generated") return Method::LlmGenerated;
  if (s == "dataset_aligned") return Method::DatasetAligned;
  if (s == "pluggable") return Method::Pluggable;
  throw Error(ErrorCode::ParseError, "unknown profile method '" + std::string(s) + "'");
}

void validate_profile(const Profile& profile) {
  if (profile.method == Method::Pluggable) {
    if (!profile.adapter_tag || profile.adapter_tag->empty() || profile.system_text) {
      throw Error(ErrorCode::InvalidProfile,
                  "pluggable profile '" + profile.profile_id + "' needs an adapter tag and no system text");
    }
  } else if (!profile.system_text || profile.adapter_tag) {
    throw Error(ErrorCode::InvalidProfile,
                "profile '" + profile.profile_id + "' needs system text and no adapter tag");
  }
}

ModelRequest apply_profile(const Profile& profile, ModelRequest request) {
  validate_profile(profile);
  if (profile.method == Method::Pluggable) {
    auto& tags = request.adapter_tags;
    if (std::find(tags.begin(), tags.end(), *profile.adapter_tag) == tags.end()) {
      tags.push_back(*profile.adapter_tag);
    }
  } else {
    request.system_prefix = profile.system_text;
  }
  return request;
}

Profile generate_profile(const std::vector<Profile>& seed_profiles, const Json& attributes,
                         const ModelPort& model, std::string profile_id) {
  if (!attributes.is_object() || attributes.empty()) {
    throw Error(ErrorCode::MissingField, "profile generation needs at least one attribute");
  }
  std::string prompt(kGenerateProfilePrefix);
  prompt += "\nattributes:";
  for (const auto& [name, value] : attributes.items()) {
    prompt += "\n- " + name + ": " + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  bool header = false;
  for (const auto& seed : seed_profiles) {
    if (!seed.system_text) continue;
    if (!header) prompt += "\nexamples:";
    header = true;
    prompt += "\n- " + *seed.system_text;
  }

  ModelRequest req;
  req.prompt = std::move(prompt);
  const auto resp = model.complete(req);
  if (resp.candidates.empty() || resp.candidates.front().empty()) {
    throw Error(ErrorCode::EmptyGeneration, "model produced an empty profile");
  }
  Profile p;
  p.profile_id = std::move(profile_id);
  p.method = Method::LlmGenerated;
  p.system_text = resp.candidates.front();
  p.source_record = attributes;
  return p;
}

Profile align_profile(const Json& record, std::string_view template_text, std::string profile_id) {
  std::string out;
  std::size_t pos = 0;
  while (pos < template_text.size()) {
    const std::size_t open = template_text.find('{', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = template_text.find('}', open + 1);
    if (close == std::string_view::npos) break;
    const std::string name(template_text.substr(open + 1, close - open - 1));
    out.append(template_text.substr(pos, open - pos));
    auto it = record.is_object() ? record.find(name) : record.end();
    if (it == record.end()) {
      throw Error(ErrorCode::MissingField, "record has no field '" + name + "'");
    }
    out += it->is_string() ? it->get<std::string>() : it->dump();
    pos = close + 1;
  }
  out.append(template_text.substr(pos));

  Profile p;
  p.profile_id = std::move(profile_id);
  p.method = Method::DatasetAligned;
  p.system_text = std::move(out);
  p.source_record = record;
  return p;
}

}  // namespace umf::profile
