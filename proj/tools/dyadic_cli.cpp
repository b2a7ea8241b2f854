#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyadic/error.hpp"
#include "dyadic/experiment.hpp"
#include "dyadic/io.hpp"
#include "dyadic/scenarios.hpp"
#include "dyadic/testing/acceptance.hpp"

namespace {

enum Exit : int { kOk = 0, kInvalidConfig = 1, kPropertyViolation = 2, kIo = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::string check;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) std::cout << text;
  else dyadic::io::write_file(out, text);
}

dyadic::ScenarioConfig load_config(const Options& o) {
  dyadic::ScenarioConfig c = dyadic::config_from_json(dyadic::io::parse_json(dyadic::io::read_file(o.config)));
  if (o.seed) c.seed = *o.seed;
  return c;
}

int scenario_command(const Options& o) {
  const dyadic::Scenario s = dyadic::generate_scenario(load_config(o));
  nlohmann::ordered_json j;
  j["config"] = dyadic::config_to_json(s.config);
  j["space"] = dyadic::io::space_to_json(*s.space);
  j["processes"] = nlohmann::ordered_json::object();
  for (const auto& [name, p] : s.processes) j["processes"][name] = dyadic::io::process_to_json(p);
  j["stopping_times"] = nlohmann::ordered_json::object();
  for (const auto& [name, t] : s.stopping_times) j["stopping_times"][name] = dyadic::io::stopping_time_to_json(t);
  emit(j.dump(2) + "\n", o.out);
  return kOk;
}

int task_command(const Options& o, dyadic::Task task) {
  const auto format = o.format == "json" ? dyadic::ReportFormat::Json : dyadic::ReportFormat::Csv;
  const dyadic::ExperimentReport r = dyadic::run_convergence_experiment(load_config(o), task);
  emit(dyadic::render_report(r, format), o.out);
  for (const auto& v : r.verdicts)
    if (!v.passed) std::cerr << v.name << ": " << v.text() << "\n";
  return r.all_passed() ? kOk : kPropertyViolation;
}

int selftest_command(const Options& o) {
  std::string text;
  bool ok = true;
  for (const auto& r : o.seed ? dyadic::testing::run_acceptance(*o.seed) : dyadic::testing::run_acceptance()) {
    text += dyadic::testing::format_result(r) + "\n";
    ok = ok && r.passed;
  }
  emit(text, o.out);
  return ok ? kOk : kPropertyViolation;
}

int exit_code(dyadic::ErrorCode code) {
  switch (code) {
    case dyadic::ErrorCode::BadConfig: return kInvalidConfig;
    case dyadic::ErrorCode::IoError: return kIo;
    default: return kPropertyViolation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic compensator toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* config = sub->add_option("--config", o.config, "scenario config (JSON)");
    if (needs_config) config->required();
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_option("--seed", o.seed, "override the config seed");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* scenario = app.add_subcommand("scenario", "generate a scenario and print it as JSON");
  add_common(scenario, true);
  auto* compensate = app.add_subcommand("compensate", "dyadic compensator approximations across levels");
  auto* stop = app.add_subcommand("stop-approx", "announcing approximations of a predictable time");
  auto* exhaust = app.add_subcommand("exhaust-jumps", "jump exhaustion by predictable times");
  for (auto* sub : {compensate, stop, exhaust}) {
    add_common(sub, true);
    add_format(sub);
  }
  auto* check = app.add_subcommand("check", "natural, fair or continuity diagnostics");
  check->add_option("property", o.check, "property to check")->required()->check(
      CLI::IsMember({"natural", "fair", "continuity"}));
  add_common(check, true);
  add_format(check);
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_option("--out", o.out, "output path (default stdout)");
  selftest->add_option("--seed", o.seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (scenario->parsed()) return scenario_command(o);
    if (compensate->parsed()) return task_command(o, dyadic::Task::Compensate);
    if (stop->parsed()) return task_command(o, dyadic::Task::StopApprox);
    if (exhaust->parsed()) return task_command(o, dyadic::Task::Exhaust);
    if (check->parsed()) return task_command(o, dyadic::parse_task(o.check));
    if (selftest->parsed()) return selftest_command(o);
  } catch (const dyadic::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  }
  return kOk;
}
