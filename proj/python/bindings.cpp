#include <optional>
#include <set>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "umf/classifier.hpp"
#include "umf/consensus.hpp"
#include "umf/gateway.hpp"
#include "umf/memory.hpp"
#include "umf/planning.hpp"
#include "umf/scenario.hpp"
#include "umf/security.hpp"

namespace py = pybind11;
using namespace umf;

namespace {

// Hands a Json value to Python as native dicts and lists.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Json run_json(const scenario::ScenarioSpec& spec, const scenario::ScenarioRun& run) {
  Json results = Json::array();
  for (const auto& r : run.results) results.push_back(scenario::to_json(r));
  Json trace = Json::array();
  for (const auto& e : run.trace.events()) trace.push_back(to_json(e));
  Json out{{"scenario_id", run.scenario_id},
           {"seed", run.seed},
           {"passed", run.passed(spec)},
           {"error", run.error ? Json(*run.error) : Json()},
           {"results", std::move(results)},
           {"trace", std::move(trace)},
           {"memory", run.memory_dump}};
  return out;
}

security::Policy make_policy(const std::vector<std::string>& deny, const std::vector<std::string>& canonical,
                             double threshold, const std::vector<std::string>& secrets) {
  security::Policy p;
  p.policy_id = "py";
  p.deny_patterns = deny;
  p.canonical_forms = canonical;
  p.jaccard_threshold = threshold;
  p.secrets = secrets;
  security::validate_policy(p);
  return p;
}

planning::Operator make_operator(const py::dict& d) {
  planning::Operator op;
  op.name = d["name"].cast<std::string>();
  auto atoms = [&](const char* key) {
    if (!d.contains(key)) return std::set<std::string>{};
    const auto atoms = d[key].cast<std::vector<std::string>>();
    return std::set<std::string>(atoms.begin(), atoms.end());
  };
  op.preconditions = atoms("pre");
  op.add_effects = atoms("add");
  op.del_effects = atoms("del");
  return op;
}

}  // namespace

PYBIND11_MODULE(_umf, m) {
  m.doc() = "Core-agent orchestration, descriptor classification and leader election";
  py::register_exception<Error>(m, "UmfError");

  m.def(
      "audit",
      [](const py::object& descriptors) {
        return to_py(classifier::to_json(classifier::audit(classifier::parse_descriptors(from_py(descriptors)))));
      },
      py::arg("descriptors"), "Classify descriptor variants and summarize them.");
  m.def(
      "audit_file", [](const std::string& path) { return to_py(classifier::to_json(classifier::audit(classifier::load_descriptors(path)))); },
      py::arg("path"));
  m.def(
      "audit_text", [](const std::string& path) { return classifier::to_text(classifier::audit(classifier::load_descriptors(path))); },
      py::arg("path"));

  m.def(
      "run_scenario",
      [](const py::object& doc, std::optional<std::uint64_t> seed) {
        const auto spec = scenario::parse_scenario(from_py(doc));
        scenario::ScenarioRun run;
        {
          py::gil_scoped_release release;
          run = scenario::run_scenario(spec, seed);
        }
        return to_py(run_json(spec, run));
      },
      py::arg("scenario"), py::arg("seed") = std::nullopt);
  m.def(
      "run_scenario_file",
      [](const std::string& path, std::optional<std::uint64_t> seed) {
        const auto spec = scenario::load_scenario(path);
        const auto run = scenario::run_scenario(spec, seed);
        return to_py(run_json(spec, run));
      },
      py::arg("path"), py::arg("seed") = std::nullopt);

  m.def(
      "elect",
      [](std::size_t nodes, double drop, std::uint64_t seed, std::uint64_t max_ticks) {
        consensus::NetConfig cfg;
        cfg.drop_prob = drop;
        const auto run = consensus::run_election(nodes, cfg, seed, max_ticks);
        Json events = Json::array();
        for (const auto& e : run.events) events.push_back(consensus::to_json(e));
        Json out{{"leader", run.leader ? Json(run.leader->node_id) : Json()},
                 {"term", run.leader ? Json(run.leader->term) : Json()},
                 {"ticks", run.ticks_elapsed},
                 {"safe", consensus::election_safe(run.events)},
                 {"events", std::move(events)}};
        return to_py(out);
      },
      py::arg("nodes") = 5, py::arg("drop") = 0.0, py::arg("seed") = 1, py::arg("max_ticks") = 50);

  m.def(
      "plan",
      [](const std::set<std::string>& facts, const std::vector<py::dict>& operators,
         const std::set<std::string>& goal, std::size_t max_depth) {
        std::vector<planning::Operator> ops;
        for (const auto& d : operators) ops.push_back(make_operator(d));
        return planning::rule_based_plan(facts, ops, goal, max_depth).operator_sequence;
      },
      py::arg("facts"), py::arg("operators"), py::arg("goal"), py::arg("max_depth") = 6,
      "Shortest operator-name sequence reaching goal.");

  m.def(
      "check_prompt",
      [](const std::string& text, const std::vector<std::string>& deny, const std::vector<std::string>& canonical,
         double threshold) {
        return to_py(security::to_json(security::check_prompt(text, make_policy(deny, canonical, threshold, {}), nullptr)));
      },
      py::arg("text"), py::arg("deny") = std::vector<std::string>{},
      py::arg("canonical") = std::vector<std::string>{}, py::arg("threshold") = 0.8);
  m.def(
      "filter_egress",
      [](const std::string& payload, const std::vector<std::string>& secrets, bool external,
         const std::vector<std::string>& deny) {
        const ToolSpec dest{"destination", {}, external, {}, false};
        const auto out = security::filter_egress(payload, dest, make_policy(deny, {}, 0.8, secrets));
        return py::make_tuple(out.payload, to_py(security::to_json(out.verdict)));
      },
      py::arg("payload"), py::arg("secrets"), py::arg("external") = true,
      py::arg("deny") = std::vector<std::string>{});

  py::class_<memory::MemoryStore>(m, "MemoryStore")
      .def(py::init([](std::size_t capacity) { return memory::MemoryStore(memory::Location::Embedded, capacity); }),
           py::arg("capacity"))
      .def(
          "write",
          [](memory::MemoryStore& s, const std::string& key, const py::object& content, double importance,
             std::optional<std::string> task) {
            memory::MemoryRecord r;
            r.key = key;
            r.content = from_py(content);
            r.importance = importance;
            if (task) r.scope = memory::Scope::short_term(*task);
            s.write(std::move(r));
          },
          py::arg("key"), py::arg("content"), py::arg("importance") = 0.5, py::arg("task") = std::nullopt)
      .def("get",
           [](memory::MemoryStore& s, const std::string& key) -> py::object {
             const auto hits = s.read(memory::ByKey{key});
             if (hits.empty()) return py::none();
             return to_py(hits.front().content);
           })
      .def("end_task_scope", [](memory::MemoryStore& s, const std::string& task) { s.end_task_scope(task); })
      .def("keys",
           [](const memory::MemoryStore& s) {
             std::vector<std::string> keys;
             for (const auto& [k, _] : s.records()) keys.push_back(k);
             return keys;
           })
      .def_property_readonly("capacity", &memory::MemoryStore::capacity)
      .def("__len__", &memory::MemoryStore::size);

  py::class_<orchestration::Gateway>(m, "Gateway")
      .def(py::init<std::uint64_t>(), py::arg("ttl") = orchestration::kDefaultGatewayTtl)
      .def(
          "register",
          [](orchestration::Gateway& g, const std::string& id, const std::set<std::string>& domains,
             std::size_t capacity) { g.register_agent(orchestration::GatewayRegistration{id, domains, capacity}); },
          py::arg("core_agent_id"), py::arg("domains"), py::arg("capacity") = 1)
      .def(
          "heartbeat",
          [](orchestration::Gateway& g, const std::string& id, std::size_t load, const std::string& status) {
            g.heartbeat(id, load, orchestration::agent_status_from_string(status));
          },
          py::arg("core_agent_id"), py::arg("load"), py::arg("status") = "available")
      .def("set_now", &orchestration::Gateway::set_now)
      .def("route", &orchestration::Gateway::route, py::arg("domains"))
      .def("release", [](orchestration::Gateway& g, const std::string& id) { g.release(id); })
      .def("status",
           [](const orchestration::Gateway& g, const std::string& id) {
             return std::string(orchestration::to_string(g.registration(id).status));
           })
      .def_property_readonly("now", &orchestration::Gateway::now);
}
