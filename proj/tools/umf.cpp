#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "umf/classifier.hpp"
#include "umf/consensus.hpp"
#include "umf/scenario.hpp"

namespace {

std::string with_suffix(const std::string& path, const std::string& id) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + id;
  return path.substr(0, dot) + "." + id + path.substr(dot);
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

struct RunOptions {
  std::vector<std::string> files;
  std::optional<std::uint64_t> seed;
  std::string trace_path;
  std::string memory_path;
  unsigned jobs = 1;
};

int cmd_run(const RunOptions& opt) {
  std::vector<std::string> reports(opt.files.size());
  std::vector<int> codes(opt.files.size(), 0);
  const bool many = opt.files.size() > 1;

  auto one = [&](std::size_t i) {
    std::ostringstream out;
    try {
      const auto spec = umf::scenario::load_scenario(opt.files[i]);
      auto run = umf::scenario::run_scenario(spec, opt.seed);
      const bool ok = run.passed(spec);
      std::size_t passed = 0;
      for (const auto& r : run.results) passed += r.passed ? 1 : 0;
      out << (ok ? "PASS " : "FAIL ") << spec.scenario_id << " seed=" << run.seed << " assertions "
          << passed << "/" << run.results.size() << " events " << run.trace.size() << '\n';
      for (const auto& r : run.results) {
        out << "  [" << (r.passed ? "ok" : "FAIL") << "] " << r.description << ": " << r.detail << '\n';
      }
      if (run.error) {
        const bool expected = run.error_code == spec.expect_error;
        out << "  " << (expected ? "expected error: " : "error: ") << *run.error << '\n';
      } else if (spec.expect_error) {
        out << "  missing expected error " << umf::to_string(*spec.expect_error) << '\n';
      }
      if (!opt.trace_path.empty()) {
        const auto path = many ? with_suffix(opt.trace_path, spec.scenario_id) : opt.trace_path;
        if (!write_file(path, run.trace.to_jsonl())) {
          out << "  cannot write trace to " << path << '\n';
          codes[i] = 2;
        }
      }
      if (!opt.memory_path.empty()) {
        const auto path = many ? with_suffix(opt.memory_path, spec.scenario_id) : opt.memory_path;
        if (!write_file(path, run.memory_dump.dump(2) + "\n")) {
          out << "  cannot write memory dump to " << path << '\n';
          codes[i] = 2;
        }
      }
      if (!ok && codes[i] == 0) codes[i] = 1;
    } catch (const std::exception& e) {
      out << "FAIL " << opt.files[i] << ": " << e.what() << '\n';
      codes[i] = 2;
    }
    reports[i] = out.str();
  };

  std::atomic<std::size_t> next{0};
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(opt.files.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < opt.files.size(); i = next++) one(i);
    });
  }
  for (auto& t : pool) t.join();

  int code = 0;
  for (std::size_t i = 0; i < opt.files.size(); ++i) {
    std::cout << reports[i];
    code = std::max(code, codes[i]);
  }
  return code;
}

int cmd_classify(const std::string& file, bool report, const std::string& format) {
  try {
    const auto descriptors = umf::classifier::load_descriptors(file);
    const auto audit = umf::classifier::audit(descriptors);
    if (format == "json") {
      umf::Json out = umf::classifier::to_json(audit);
      if (!report) out = out["rows"];
      std::cout << out.dump(2) << '\n';
    } else if (report) {
      std::cout << umf::classifier::to_text(audit);
    } else {
      for (const auto& row : audit.rows) {
        std::cout << row.agent_id << '\t' << row.variant_id << '\t' << umf::to_string(row.category) << '\n';
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "umf classify: " << e.what() << '\n';
    return 2;
  }
}

int cmd_elect(std::size_t nodes, double drop, std::uint64_t seed, std::uint64_t max_ticks) {
  if (nodes == 0) {
    std::cerr << "umf elect: --nodes must be positive\n";
    return 2;
  }
  umf::consensus::NetConfig cfg;
  cfg.drop_prob = drop;
  const auto run = umf::consensus::run_election(nodes, cfg, seed, max_ticks);
  for (const auto& e : run.events) std::cout << umf::consensus::to_json(e).dump() << '\n';
  umf::Json summary{{"outcome", run.leader ? "leader" : "ElectionTimeout"},
                    {"ticks", run.ticks_elapsed},
                    {"safe", umf::consensus::election_safe(run.events)}};
  if (run.leader) {
    summary["leader"] = run.leader->node_id;
    summary["term"] = run.leader->term;
  }
  std::cout << summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"umf: agent orchestration scenarios, descriptor classification, leader election"};
  app.require_subcommand(1);

  RunOptions run_opt;
  std::uint64_t seed_value = 0;
  auto* run = app.add_subcommand("run", "Run scenario files and check their assertions");
  run->add_option("scenario", run_opt.files, "Scenario JSON file(s)")->required()->check(CLI::ExistingFile);
  auto* seed_flag = run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_option("--trace", run_opt.trace_path, "Write the trace as JSON lines");
  run->add_option("--memory-dump", run_opt.memory_path, "Write active core-agent memory as JSON");
  run->add_option("--jobs,-j", run_opt.jobs, "Scenarios to run concurrently")->check(CLI::PositiveNumber);

  std::string descriptors;
  bool report = false;
  std::string format = "text";
  auto* classify = app.add_subcommand("classify", "Classify agent descriptors");
  classify->add_option("descriptors", descriptors, "Descriptor JSON file")->required()->check(CLI::ExistingFile);
  classify->add_flag("--report", report, "Print the audit report");
  classify->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));

  std::size_t nodes = 5;
  double drop = 0.0;
  std::uint64_t elect_seed = 1;
  std::uint64_t max_ticks = 50;
  auto* elect = app.add_subcommand("elect", "Simulate one leader election");
  elect->add_option("--nodes", nodes, "Cluster size");
  elect->add_option("--drop", drop, "Message drop probability")->check(CLI::Range(0.0, 1.0));
  elect->add_option("--seed", elect_seed, "Random seed");
  elect->add_option("--max-ticks", max_ticks, "Tick budget");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    if (*seed_flag) run_opt.seed = seed_value;
    return cmd_run(run_opt);
  }
  if (*classify) return cmd_classify(descriptors, report, format);
  return cmd_elect(nodes, drop, elect_seed, max_ticks);
}
