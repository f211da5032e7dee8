#include "umf/action.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace umf::action {

std::string_view to_string(Trigger t) {
  return t == Trigger::PlanFollowing ? "plan_following" : "api_call_request";
}

std::string_view to_string(Goal g) {
  switch (g) {
    case Goal::TaskCompletion: return "task_completion";
    case Goal::Communication: return "communication";
    case Goal::EnvironmentExploration: return "environment_exploration";
  }
  return "task_completion";
}

std::string_view to_string(Impact i) {
  switch (i) {
    case Impact::EnvironmentChange: return "environment_change";
    case Impact::InternalStateChange: return "internal_state_change";
    case Impact::Chained: return "chained";
  }
  return "chained";
}

// ---------------------------------------------------------------------------
// Inline-call grammar

namespace {

constexpr std::string_view kCallOpen = "[CALL ";

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class CallParser {
 public:
  CallParser(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  std::optional<InlineCall> parse() {
    const std::size_t begin = pos_;
    pos_ += kCallOpen.size();
    InlineCall call;
    if (!ident(call.tool_id) || !eat('(')) return std::nullopt;
    skip_ws();
    if (!peek(')')) {
      while (true) {
        skip_ws();
        std::string name, value;
        if (!ident(name)) return std::nullopt;
        skip_ws();
        if (!eat('=')) return std::nullopt;
        skip_ws();
        if (!quoted(value)) return std::nullopt;
        if (find_arg(call.args, name)) return std::nullopt;
        call.args.emplace_back(std::move(name), std::move(value));
        skip_ws();
        if (eat(',')) continue;
        break;
      }
    }
    if (!eat(')') || !eat(']')) return std::nullopt;
    call.span = Span{begin, pos_};
    return call;
  }

 private:
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  bool eat(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void skip_ws() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }
  bool ident(std::string& out) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    out.assign(text_.substr(start, pos_ - start));
    return !out.empty();
  }
  bool quoted(std::string& out) {
    if (!eat('"')) return false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '"') return true;
      if (c == '\\') {
        if (pos_ >= text_.size()) return false;
        const char next = text_[pos_++];
        if (next != '"' && next != '\\') return false;
        out.push_back(next);
      } else {
        out.push_back(c);
      }
    }
    return false;
  }

  std::string_view text_;
  std::size_t pos_;
};

}  // namespace

std::vector<InlineCall> parse_inline_calls(std::string_view text) {
  std::vector<InlineCall> calls;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(kCallOpen, pos);
    if (hit == std::string_view::npos) break;
    if (auto call = CallParser(text, hit).parse()) {
      pos = call->span.end;
      calls.push_back(std::move(*call));
    } else {
      pos = hit + 1;
    }
  }
  return calls;
}

std::string render_inline_call(std::string_view tool_id, const Args& args) {
  std::string out(kCallOpen);
  out += tool_id;
  out += '(';
  bool first = true;
  for (const auto& [name, value] : args) {
    if (!first) out += ", ";
    first = false;
    out += name;
    out += "=\"";
    for (char c : value) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  out += ")]";
  return out;
}

// ---------------------------------------------------------------------------
// Repositories

Repository::Repository(std::vector<std::string> passages) : passages_(std::move(passages)) {
  vectors_.reserve(passages_.size());
  for (const auto& p : passages_) vectors_.push_back(memory::embed(p));
}

std::vector<Passage> Repository::query(std::string_view text, std::size_t top_n) const {
  const memory::Embedding probe = memory::embed(text);
  std::vector<Passage> scored;
  scored.reserve(passages_.size());
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    scored.push_back(Passage{i, passages_[i], memory::cosine(probe, vectors_[i])});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Passage& a, const Passage& b) { return a.score > b.score; });
  if (scored.size() > top_n) scored.resize(top_n);
  return scored;
}

std::vector<Passage> query_repository(const RepositorySet& repos, std::string_view repo_id,
                                      std::string_view query, std::size_t top_n) {
  auto it = repos.find(repo_id);
  if (it == repos.end()) {
    throw Error(ErrorCode::UnknownRepository, "no repository '" + std::string(repo_id) + "'");
  }
  return it->second.query(query, top_n);
}

// ---------------------------------------------------------------------------
// Registry

void ToolRegistry::add(Tool tool) {
  const std::string id = tool.spec.tool_id;
  if (tools_.count(id)) throw Error(ErrorCode::ScenarioInvalid, "duplicate tool '" + id + "'");
  tools_.emplace(id, std::move(tool));
}

const Tool* ToolRegistry::find(std::string_view tool_id) const {
  auto it = tools_.find(tool_id);
  return it == tools_.end() ? nullptr : &it->second;
}

const Tool& ToolRegistry::at(std::string_view tool_id) const {
  if (const Tool* t = find(tool_id)) return *t;
  throw Error(ErrorCode::UnknownTool, "no tool '" + std::string(tool_id) + "'");
}

std::vector<std::string> ToolRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, tool] : tools_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// Mock behaviors

namespace {

class Arithmetic {
 public:
  explicit Arithmetic(std::string_view expr) : s_(expr) {}

  double run() {
    const double v = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorCode::ToolFailure, "malformed expression: " + what);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expression() {
    double v = term();
    while (true) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  double term() {
    double v = factor();
    while (true) {
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        const double d = factor();
        if (d == 0.0) throw Error(ErrorCode::ToolFailure, "division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  double factor() {
    if (eat('-')) return -factor();
    if (eat('(')) {
      const double v = expression();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a number");
    try {
      return std::stod(std::string(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      fail("bad number");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

const std::string& required_arg(const Args& args, std::string_view name) {
  if (const std::string* v = find_arg(args, name)) return *v;
  throw Error(ErrorCode::ToolFailure, "missing argument '" + std::string(name) + "'");
}

}  // namespace

double evaluate_arithmetic(std::string_view expr) { return Arithmetic(expr).run(); }

std::string format_number(double value) {
  if (std::isfinite(value) && std::floor(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

ToolBehavior make_calculator() {
  return [](const std::string&, const Args& args, ToolContext&) {
    return format_number(evaluate_arithmetic(required_arg(args, "expr")));
  };
}

ToolBehavior make_translator(std::map<std::string, std::string> phrases) {
  return [phrases = std::move(phrases)](const std::string&, const Args& args, ToolContext&) {
    const std::string& text = required_arg(args, "text");
    auto it = phrases.find(text);
    if (it == phrases.end()) throw Error(ErrorCode::ToolFailure, "no translation for '" + text + "'");
    return it->second;
  };
}

ToolBehavior make_wiki(std::string repo_id) {
  return [repo_id = std::move(repo_id)](const std::string&, const Args& args, ToolContext& ctx) {
    if (!ctx.repositories) throw Error(ErrorCode::UnknownRepository, "no repositories loaded");
    const auto hits = query_repository(*ctx.repositories, repo_id, required_arg(args, "query"), 1);
    if (hits.empty()) throw Error(ErrorCode::ToolFailure, "empty repository");
    return hits.front().text;
  };
}

ToolBehavior make_remote_api() {
  return [](const std::string& payload, const Args&, ToolContext&) {
    return "ACK " + payload;
  };
}

ToolBehavior make_code_runner(std::map<std::string, std::string> scripted_results) {
  return [results = std::move(scripted_results)](const std::string&, const Args& args,
                                                 ToolContext&) {
    const std::string& code = required_arg(args, "code");
    auto it = results.find(code);
    if (it == results.end()) throw Error(ErrorCode::ToolFailure, "no scripted result for code");
    return it->second;
  };
}

ToolBehavior make_calendar(std::string today) {
  return [today = std::move(today)](const std::string&, const Args&, ToolContext&) {
    return today;
  };
}

ToolBehavior make_env_set() {
  return [](const std::string&, const Args& args, ToolContext& ctx) {
    if (!ctx.environment) throw Error(ErrorCode::ToolFailure, "no environment attached");
    const std::string& key = required_arg(args, "key");
    const std::string& value = required_arg(args, "value");
    (*ctx.environment)[key] = value;
    return key + "=" + value;
  };
}

// ---------------------------------------------------------------------------
// Execution

std::string serialize_args(const Args& args) {
  Json obj = Json::object();
  for (const auto& [name, value] : args) obj[name] = value;
  return obj.dump();
}

Args decode_payload(const std::string& payload) {
  Args args;
  const Json j = Json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return args;
  for (const auto& [name, value] : j.items()) {
    args.emplace_back(name, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return args;
}

ActionResult execute_action(const ActionRequest& request, const ActionContext& ctx) {
  if (ctx.tools == nullptr) throw Error(ErrorCode::UnknownTool, "no tool registry");
  const Tool& tool = ctx.tools->at(request.target);

  const std::string payload = serialize_args(request.args);
  std::string delivered = payload;
  if (tool.spec.external && ctx.guard != nullptr) {
    auto egress = security::filter_egress(payload, tool.spec, *ctx.guard);
    if (ctx.observer) ctx.observer->on_egress_verdict(tool.spec, payload, egress.verdict);
    if (egress.verdict.decision == security::Decision::Block) {
      throw Error(ErrorCode::BlockedByPolicy,
                  "egress to '" + tool.spec.tool_id + "' blocked by " +
                      egress.verdict.matched_rule.value_or("policy"));
    }
    delivered = std::move(egress.payload);
  }
  if (ctx.observer) ctx.observer->on_delivery(tool.spec, delivered);

  ToolContext tool_ctx = ctx.tool_context;
  ActionResult result;
  result.output = tool.behavior(delivered, decode_payload(delivered), tool_ctx);
  result.delivered_payload = std::move(delivered);

  if (tool.spec.mutates_environment) result.impact.insert(Impact::EnvironmentChange);
  if (request.remember_as && ctx.memory != nullptr) {
    memory::MemoryRecord rec;
    rec.key = *request.remember_as;
    rec.content = result.output;
    rec.scope = ctx.task_id.empty() ? memory::Scope::long_term()
                                    : memory::Scope::short_term(ctx.task_id);
    ctx.memory->write(std::move(rec));
    result.impact.insert(Impact::InternalStateChange);
  }
  for (auto& call : parse_inline_calls(result.output)) {
    ActionRequest chained;
    chained.trigger = Trigger::ApiCallRequest;
    chained.goal = request.goal;
    chained.target = std::move(call.tool_id);
    chained.args = std::move(call.args);
    result.chained_requests.push_back(std::move(chained));
  }
  if (!result.chained_requests.empty()) result.impact.insert(Impact::Chained);
  return result;
}

}  // namespace umf::action
