#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "codrill/common/error.hpp"
#include "codrill/scenario/metrics.hpp"
#include "codrill/scenario/runlog.hpp"
#include "codrill/scenario/scenario.hpp"
#include "codrill/scenario/simulation.hpp"
#include "codrill/session/server.hpp"
#include "codrill/twin/phantom.hpp"
#include "codrill/twin/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace codrill;

namespace {

#ifndef CODRILL_DEFAULT_FIXTURE_DIR
#define CODRILL_DEFAULT_FIXTURE_DIR "fixtures"
#endif

int fail(const std::string& code, const std::string& message, int status = 1) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return status;
}

fs::path fixture_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CODRILL_FIXTURE_DIR"); env && *env) return env;
  return CODRILL_DEFAULT_FIXTURE_DIR;
}

// A path as given, then with a log or scenario extension, then under the
// fixture directory.
fs::path resolve(const std::string& name, const fs::path& fixtures, const fs::path& subdir,
                 std::initializer_list<const char*> extensions) {
  std::vector<fs::path> bases{name, fixtures / subdir / name, fixtures / name};
  for (const auto& base : bases) {
    if (fs::is_regular_file(base)) return base;
    for (const char* ext : extensions) {
      fs::path p = base;
      p += ext;
      if (fs::is_regular_file(p)) return p;
    }
  }
  throw ConfigurationError("cannot find '" + name + "'");
}

fs::path resolve_log(const std::string& name, const fs::path& fixtures) {
  return resolve(name, fixtures, "", {".csv", ".cdlog"});
}

scenario::Scenario load(const std::string& name, const fs::path& fixtures) {
  return scenario::load_scenario(resolve(name, fixtures, "scenarios", {".json"}));
}

void save_log(const fs::path& path, const scenario::RunLog& log) {
  if (path.extension() == ".csv")
    scenario::save_csv(path, log);
  else
    scenario::save_runlog(path, log);
}

struct MetricFlags {
  std::string format = "text";
  std::string force = "measured";
  std::string attribution = "controller";

  void add(CLI::App* app) {
    app->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    app->add_option("--force", force, "force used for the metrics")->check(CLI::IsMember({"measured", "truth"}));
    app->add_option("--attribution", attribution, "structure attribution")
        ->check(CLI::IsMember({"controller", "nearest"}));
  }

  scenario::MetricsOptions options() const {
    scenario::MetricsOptions o;
    o.force = force == "truth" ? scenario::ForceSource::truth : scenario::ForceSource::measured;
    o.attribution = attribution == "nearest" ? scenario::Attribution::nearest : scenario::Attribution::controller;
    return o;
  }
};

void print_report(const scenario::MetricsReport& report, const std::string& format) {
  if (format == "json")
    std::cout << scenario::report_json(report).dump(2) << '\n';
  else if (format == "csv")
    std::cout << scenario::report_csv(report);
  else
    std::cout << scenario::format_report(report);
}

session::SessionServer* active_server = nullptr;

extern "C" void on_signal(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative drilling simulator with situation-aware force scaling"};
  app.require_subcommand(1);
  std::string fixtures_flag;
  app.add_option("--fixture-dir", fixtures_flag, "fixture directory (default $CODRILL_FIXTURE_DIR)");

  std::string scenario_name, out, log_path, on_path, off_path;
  std::optional<std::uint64_t> seed;
  std::string controller;
  MetricFlags metrics;

  auto* run = app.add_subcommand("run", "execute a scenario to a run log");
  run->add_option("--scenario", scenario_name, "scenario file or shipped name")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out, "run log path (.csv for text)");
  run->add_option("--controller", controller, "override controller enablement")->check(CLI::IsMember({"on", "off"}));
  metrics.add(run);

  auto* replay = app.add_subcommand("replay", "re-execute a log's recorded inputs");
  replay->add_option("--log", log_path, "recorded run log")->required();
  replay->add_option("--out", out, "replayed run log path");

  auto* report = app.add_subcommand("report", "metrics of a run log");
  report->add_option("--log", log_path, "run log")->required();
  metrics.add(report);

  auto* compare = app.add_subcommand("compare", "controller-on against controller-off");
  compare->add_option("--on", on_path, "controller-on run log");
  compare->add_option("--off", off_path, "controller-off run log");
  compare->add_option("--scenario", scenario_name, "run the scenario both ways instead");
  compare->add_option("--seed", seed, "override the scenario seed");
  compare->add_option("--format", metrics.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* describe = app.add_subcommand("describe", "print every parameter with its default");
  describe->add_option("--scenario", scenario_name, "describe this scenario instead of the defaults");

  std::uint16_t port = 8765;
  std::optional<double> rate;
  std::size_t sessions = 0;
  auto* serve = app.add_subcommand("serve", "live WebSocket sessions");
  serve->add_option("--scenario", scenario_name, "live scenario")->required();
  serve->add_option("--port", port, "TCP port, 0 for any");
  serve->add_option("--rate", rate, "snapshot rate [Hz]");
  serve->add_option("--out", out, "session log path");
  serve->add_option("--sessions", sessions, "exit after this many sessions");

  std::uint64_t phantom_seed = 1;
  std::vector<int> dims;
  double spacing = 0.5;
  auto* phantom = app.add_subcommand("phantom", "generate synthetic anatomy");
  phantom->add_option("--seed", phantom_seed, "generator seed");
  phantom->add_option("--out", out, "volume path (.cdvol)")->required();
  phantom->add_option("--dims", dims, "voxels along x y z")->expected(3);
  phantom->add_option("--spacing", spacing, "voxel size [mm]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), 2);
  }

  try {
    const fs::path fixtures = fixture_dir(fixtures_flag);

    if (run->parsed()) {
      auto s = load(scenario_name, fixtures);
      if (seed) s.seed = *seed;
      if (!controller.empty()) s.controller.enabled = controller == "on";
      const auto log = scenario::run_simulation(s);
      if (!out.empty()) save_log(out, log);
      print_report(scenario::compute_metrics(log, metrics.options()), metrics.format);
    } else if (replay->parsed()) {
      const auto recorded = scenario::load_runlog(resolve_log(log_path, fixtures));
      const auto replayed = scenario::replay_run(recorded);
      if (!out.empty()) save_log(out, replayed);
      const bool identical = scenario::serialize(replayed) == scenario::serialize(recorded);
      std::cout << json{{"records", replayed.records.size()}, {"identical", identical}}.dump() << '\n';
      if (!identical) return fail("replay_mismatch", "replayed trace differs from the recording");
    } else if (report->parsed()) {
      const auto log = scenario::load_runlog(resolve_log(log_path, fixtures));
      print_report(scenario::compute_metrics(log, metrics.options()), metrics.format);
    } else if (compare->parsed()) {
      scenario::RunLog on, off;
      if (!scenario_name.empty()) {
        if (!on_path.empty() || !off_path.empty())
          throw ConfigurationError("use either --scenario or --on/--off");
        auto s = load(scenario_name, fixtures);
        if (seed) s.seed = *seed;
        s.controller.enabled = true;
        on = scenario::run_simulation(s);
        s.controller.enabled = false;
        off = scenario::run_simulation(s);
      } else {
        if (on_path.empty() || off_path.empty()) throw ConfigurationError("compare needs --on and --off, or --scenario");
        on = scenario::load_runlog(resolve_log(on_path, fixtures));
        off = scenario::load_runlog(resolve_log(off_path, fixtures));
      }
      const auto comparison = scenario::compare_runs(on, off);
      if (metrics.format == "json")
        std::cout << scenario::comparison_json(comparison).dump(2) << '\n';
      else
        std::cout << scenario::format_comparison(comparison);
    } else if (describe->parsed()) {
      const auto s = scenario_name.empty() ? scenario::Scenario{} : load(scenario_name, fixtures);
      const auto volume = scenario::build_volume(s);
      const auto header = scenario::header_to_json(scenario::make_header(s, volume.structures));
      std::cout << json{{"scenario", scenario::scenario_to_json(s)}, {"structures", header.at("structures")}}.dump(2)
                << '\n';
    } else if (serve->parsed()) {
      session::ServeOptions options;
      options.port = port;
      options.snapshot_rate = rate;
      options.max_sessions = sessions;
      if (!out.empty()) options.out = fs::path(out);
      session::SessionServer server(load(scenario_name, fixtures), options);
      active_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << json{{"listening", server.port()}}.dump() << std::endl;
      server.run();
      active_server = nullptr;
    } else if (phantom->parsed()) {
      twin::PhantomSpec spec;
      spec.seed = phantom_seed;
      spec.spacing = spacing;
      if (!dims.empty()) spec.dims = {dims[0], dims[1], dims[2]};
      twin::save_volume(out, twin::generate_phantom(spec));
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail("format_error", e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return 0;
}
