#include "umf/classifier.hpp"

#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>

namespace umf::classifier {

namespace {

constexpr const char* kModules[] = {"planning", "profile", "memory", "action", "security"};

Presence& slot(ModuleMatrix& m, std::string_view module) {
  if (module == "planning") return m.planning;
  if (module == "profile") return m.profile;
  if (module == "memory") return m.memory;
  if (module == "action") return m.action;
  return m.security;
}

Presence slot(const ModuleMatrix& m, std::string_view module) {
  return slot(const_cast<ModuleMatrix&>(m), module);
}

Json matrix_json(const ModuleMatrix& m) {
  Json j = Json::object();
  for (const char* mod : kModules) j[mod] = to_symbol(slot(m, mod));
  return j;
}

[[noreturn]] void parse_fail(const std::string& where, const std::string& why) {
  throw Error(ErrorCode::ParseError, where + ": " + why);
}

ModuleMatrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "matrix must be an object");
  ModuleMatrix m;
  for (const char* mod : kModules) {
    if (!j.contains(mod) || !j[mod].is_string()) parse_fail(where, std::string("missing module '") + mod + "'");
    slot(m, mod) = presence_from_symbol(j[mod].get<std::string>());
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "planning" && key != "profile" && key != "memory" && key != "action" && key != "security") {
      parse_fail(where, "unknown module '" + key + "'");
    }
  }
  try {
    return validate_module_matrix(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidMatrix, where + ": " + e.detail());
  }
}

Variant parse_variant(const Json& j, const std::string& agent_id, std::size_t index) {
  const std::string where = agent_id + "[" + std::to_string(index) + "]";
  if (!j.is_object()) parse_fail(where, "variant must be an object");
  if (!j.contains("variant_id") || !j["variant_id"].is_string()) parse_fail(where, "missing variant_id");
  Variant v;
  v.variant_id = j["variant_id"].get<std::string>();
  v.canonical = j.value("canonical", false);
  v.uses_external_tools = j.value("uses_external_tools", false);
  v.notes = j.value("notes", "");
  if (!j.contains("matrix")) parse_fail(where, "missing matrix");
  v.matrix = parse_matrix(j["matrix"], agent_id + "/" + v.variant_id);
  return v;
}

}  // namespace

const Variant& AgentDescriptor::canonical() const {
  for (const auto& v : variants) {
    if (v.canonical) return v;
  }
  throw Error(ErrorCode::ParseError, "'" + agent_id + "' has no canonical variant");
}

CoreAgentKind classify_matrix(const ModuleMatrix& m) {
  if (m.all_absent()) return CoreAgentKind::NotAnAgent;
  if (!is_present(m.planning) && !is_present(m.memory) && !is_present(m.profile)) {
    return CoreAgentKind::Passive;
  }
  return CoreAgentKind::Active;
}

std::vector<AgentDescriptor> parse_descriptors(const Json& doc) {
  std::vector<AgentDescriptor> out;
  if (doc.is_null()) return out;
  if (!doc.is_array()) parse_fail("descriptors", "top level must be a list");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& d = doc[i];
    if (!d.is_object() || !d.contains("agent_id") || !d["agent_id"].is_string()) {
      parse_fail("descriptor " + std::to_string(i), "missing agent_id");
    }
    AgentDescriptor a;
    a.agent_id = d["agent_id"].get<std::string>();
    if (!seen.insert(a.agent_id).second) {
      throw Error(ErrorCode::DuplicateAgent, "agent '" + a.agent_id + "' appears twice");
    }
    if (!d.contains("variants") || !d["variants"].is_array() || d["variants"].empty()) {
      parse_fail(a.agent_id, "needs a nonempty variants list");
    }
    std::set<std::string> variant_ids;
    for (std::size_t k = 0; k < d["variants"].size(); ++k) {
      auto v = parse_variant(d["variants"][k], a.agent_id, k);
      if (!variant_ids.insert(v.variant_id).second) {
        parse_fail(a.agent_id, "duplicate variant '" + v.variant_id + "'");
      }
      a.variants.push_back(std::move(v));
    }
    if (a.variants.size() == 1 && !d["variants"][0].contains("canonical")) a.variants[0].canonical = true;
    std::size_t canonical = 0;
    for (const auto& v : a.variants) canonical += v.canonical ? 1 : 0;
    if (canonical != 1) {
      parse_fail(a.agent_id, "needs exactly one canonical variant, found " + std::to_string(canonical));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AgentDescriptor> load_descriptors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  const Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON");
  return parse_descriptors(doc);
}

Json to_json(const AgentDescriptor& d) {
  Json variants = Json::array();
  for (const auto& v : d.variants) {
    variants.push_back(Json{{"variant_id", v.variant_id},
                            {"canonical", v.canonical},
                            {"matrix", matrix_json(v.matrix)},
                            {"uses_external_tools", v.uses_external_tools},
                            {"notes", v.notes}});
  }
  return Json{{"agent_id", d.agent_id}, {"variants", variants}};
}

AuditReport audit(const std::vector<AgentDescriptor>& descriptors) {
  AuditReport r;
  for (const auto& d : descriptors) {
    for (const auto& v : d.variants) {
      r.rows.push_back(AuditRow{d.agent_id, v.variant_id, v.canonical, v.matrix, classify_matrix(v.matrix)});
    }
    const Variant& c = d.canonical();
    ++r.total_agents;
    switch (classify_matrix(c.matrix)) {
      case CoreAgentKind::Passive: ++r.passive_count; break;
      case CoreAgentKind::Active: ++r.active_count; break;
      case CoreAgentKind::NotAnAgent: ++r.not_agent_count; break;
    }
    if (c.uses_external_tools) {
      ++r.tool_users;
      if (!is_present(c.matrix.security)) {
        ++r.tool_users_without_security;
        r.findings.push_back(Finding{"warning", d.agent_id,
                                     "uses external tools without a security module"});
      }
    }
  }
  return r;
}

long percent(std::size_t num, std::size_t den) {
  if (den == 0) return 0;
  return static_cast<long>((200 * num + den) / (2 * den));
}

Json to_json(const AuditReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"agent_id", row.agent_id},
                        {"variant_id", row.variant_id},
                        {"canonical", row.canonical},
                        {"matrix", matrix_json(row.matrix)},
                        {"category", to_string(row.category)}});
  }
  Json findings = Json::array();
  for (const auto& f : r.findings) {
    findings.push_back(Json{{"severity", f.severity}, {"agent_id", f.agent_id}, {"message", f.message}});
  }
  return Json{{"rows", rows},
              {"passive_count", r.passive_count},
              {"active_count", r.active_count},
              {"not_agent_count", r.not_agent_count},
              {"total_agents", r.total_agents},
              {"passive_percent", percent(r.passive_count, r.total_agents)},
              {"active_percent", percent(r.active_count, r.total_agents)},
              {"tool_users", r.tool_users},
              {"tool_users_without_security", r.tool_users_without_security},
              {"tool_users_without_security_percent",
               percent(r.tool_users_without_security, r.tool_users)},
              {"findings", findings}};
}

std::string to_text(const AuditReport& r) {
  std::size_t w_agent = 5, w_variant = 7;
  for (const auto& row : r.rows) {
    w_agent = std::max(w_agent, row.agent_id.size());
    w_variant = std::max(w_variant, row.variant_id.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(w_agent)) << "agent" << "  "
      << std::setw(static_cast<int>(w_variant)) << "variant" << " pl pr me ac se  category\n";
  for (const auto& row : r.rows) {
    out << std::setw(static_cast<int>(w_agent)) << row.agent_id << "  "
        << std::setw(static_cast<int>(w_variant)) << row.variant_id;
    for (const char* mod : kModules) out << "  " << to_symbol(slot(row.matrix, mod));
    out << "  " << to_string(row.category) << (row.canonical ? "" : "  (non-canonical)") << '\n';
  }
  out << "\npassive: " << r.passive_count << "/" << r.total_agents << " ("
      << percent(r.passive_count, r.total_agents) << "%)\n";
  out << "active: " << r.active_count << "/" << r.total_agents << " ("
      << percent(r.active_count, r.total_agents) << "%)\n";
  out << "not an agent: " << r.not_agent_count << "/" << r.total_agents << '\n';
  out << "tool users without security: " << r.tool_users_without_security << "/" << r.tool_users
      << " (" << percent(r.tool_users_without_security, r.tool_users) << "%)\n";
  for (const auto& f : r.findings) out << f.severity << ": " << f.agent_id << ": " << f.message << '\n';
  return out.str();
}

}  // namespace umf::classifier
