#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "codrill/common/error.hpp"
#include "codrill/scenario/metrics.hpp"
#include "codrill/scenario/simulation.hpp"

using namespace codrill;
using namespace codrill::scenario;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(CODRILL_FIXTURE_DIR) / "scenarios";

json minimal() {
  return {{"format_version", 1},
          {"name", "minimal"},
          {"seed", 3},
          {"duration", 0.5},
          {"anatomy", {{"phantom", {{"dims", {48, 48, 40}}, {"spacing", 0.5}}}}}};
}

double max_force(const RunLog& log) {
  double m = 0.0;
  for (const auto& r : log.records) m = std::max(m, r.force_true.norm());
  return m;
}

Segment idle(double duration) {
  Segment s;
  s.type = SegmentType::idle;
  s.duration = duration;
  return s;
}

}  // namespace

TEST(ScenarioConfig, DefaultRates) {
  const Scenario s;
  EXPECT_EQ(s.rates.sim, 1000.0);
  EXPECT_EQ(s.rates.control, 500.0);
  EXPECT_EQ(s.rates.sensor, 200.0);
  EXPECT_EQ(s.control_divisor(), 2u);
}

TEST(ScenarioConfig, ShippedScenariosValidate) {
  for (const char* name : {"aggressive", "nerve_press_off", "gentle_press", "tremor_hold", "live"}) {
    SCOPED_TRACE(name);
    const Scenario s = load_scenario(kScenarios / (std::string(name) + ".json"));
    EXPECT_NO_THROW(validate_scenario(s));
    EXPECT_EQ(s.name, name);
  }
}

TEST(ScenarioConfig, CanonicalFormRoundTrips) {
  const Scenario s = load_scenario(kScenarios / "aggressive.json");
  const json canonical = scenario_to_json(s);
  const json again = scenario_to_json(scenario_from_json(canonical));
  EXPECT_EQ(canonical, again);
  EXPECT_EQ(config_hash(s), config_hash(scenario_from_json(canonical)));
}

TEST(ScenarioConfig, UnknownKeysAndBadTypesAreAllReported) {
  json j = minimal();
  j["bogus"] = 1;
  j["duration"] = "long";
  j["controller"] = {{"sigma_high", "fast"}, {"extra", true}};
  try {
    scenario_from_json(j);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const auto& issues = e.issues();
    EXPECT_GE(issues.size(), 4u);
    auto mentions = [&](const std::string& s) {
      return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(mentions("bogus"));
    EXPECT_TRUE(mentions("duration"));
    EXPECT_TRUE(mentions("sigma_high"));
    EXPECT_TRUE(mentions("extra"));
  }
}

TEST(ScenarioConfig, SchemaVersionMismatch) {
  json j = minimal();
  j["format_version"] = 2;
  EXPECT_THROW(scenario_from_json(j), SchemaVersionError);
}

TEST(ScenarioConfig, RatesMustDivideTheSimRate) {
  Scenario s = scenario_from_json(minimal());
  s.rates.control = 300.0;
  EXPECT_THROW(validate_scenario(s), ValidationError);
  s.rates.control = 2000.0;
  EXPECT_THROW(validate_scenario(s), ValidationError);
  s.rates.control = 500.0;
  s.rates.sensor = 1000.0;
  EXPECT_THROW(validate_scenario(s), ValidationError);
}

TEST(ScenarioConfig, ReplayNeedsALog) {
  json j = minimal();
  j["input"] = {{"type", "replay"}};
  EXPECT_THROW(validate_scenario(scenario_from_json(j)), ValidationError);
}

TEST(ScenarioConfig, ComparisonKeyIgnoresOnlyControllerEnablement) {
  Scenario on = load_scenario(kScenarios / "aggressive.json");
  Scenario off = on;
  off.controller.enabled = false;
  EXPECT_EQ(comparison_key(on), comparison_key(off));
  EXPECT_NE(config_hash(on), config_hash(off));
  Scenario other_seed = on;
  other_seed.seed = 2;
  EXPECT_NE(comparison_key(on), comparison_key(other_seed));
  Scenario other_gain = on;
  other_gain.controller.eta = 2.0;
  EXPECT_NE(comparison_key(on), comparison_key(other_gain));
}

TEST(ScenarioConfig, StructureOverridesApply) {
  json j = minimal();
  j["anatomy"]["structures"] = {{{"index", 1}, {"lambda", 0.6}}};
  const auto volume = build_volume(scenario_from_json(j));
  EXPECT_EQ(twin::find_structure(volume.structures, 1)->lambda, 0.6);
  j["anatomy"]["structures"] = {{{"index", 9}, {"lambda", 0.6}}};
  EXPECT_THROW(build_volume(scenario_from_json(j)), Error);
}

TEST(Trajectory, EmptySpecIsZeroForce) {
  const auto tr = generate_trajectory({}, 5);
  EXPECT_EQ(tr.duration(), 0.0);
  EXPECT_EQ(tr.segment_at(0.0), -1);
  EXPECT_EQ(tr.tremor_at(1.0), Eigen::Vector3d::Zero());
}

TEST(Trajectory, SameSeedSameSamples) {
  const Scenario s = load_scenario(kScenarios / "aggressive.json");
  const auto a = generate_trajectory(s.trajectory, 7);
  const auto b = generate_trajectory(s.trajectory, 7);
  const auto c = generate_trajectory(s.trajectory, 8);
  ASSERT_EQ(a.segments.size(), b.segments.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    EXPECT_EQ(a.segments[i].start, b.segments[i].start);
    EXPECT_EQ(a.segments[i].force, b.segments[i].force);
    differs |= a.segments[i].force != c.segments[i].force;
  }
  for (double t = 0.0; t < 5.0; t += 0.37) EXPECT_EQ(a.tremor_at(t), b.tremor_at(t));
  EXPECT_TRUE(differs);
}

TEST(Trajectory, SegmentsTileTimeAndJitterStaysBounded) {
  const Scenario s = load_scenario(kScenarios / "aggressive.json");
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto tr = generate_trajectory(s.trajectory, seed);
    double t = 0.0;
    for (std::size_t i = 0; i < tr.segments.size(); ++i) {
      const auto& p = tr.segments[i];
      EXPECT_EQ(p.start, t);
      EXPECT_GT(p.end, p.start);
      const auto& spec = s.trajectory.segments[i];
      if (spec.type == SegmentType::press) {
        EXPECT_GE(p.force, 0.5 * spec.force);
        EXPECT_LE(p.force, 1.5 * spec.force);
      } else {
        EXPECT_NEAR(p.end - p.start, spec.duration, 1e-9);
      }
      t = p.end;
    }
  }
}

TEST(Trajectory, TremorHasRequestedSpread) {
  TrajectorySpec spec;
  spec.human.tremor.std = 0.05;
  spec.segments.push_back(idle(1.0));
  const auto tr = generate_trajectory(spec, 4);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = tr.tremor_at(i * 0.0013).x();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.05, 0.01);
}

TEST(Trajectory, UnreachablePressOnCriticalStructureIsRejected) {
  const Scenario base = load_scenario(kScenarios / "gentle_press.json");
  const twin::AnatomyModel anatomy(build_volume(base));
  TrajectorySpec spec = base.trajectory;
  EXPECT_NO_THROW(check_press_reachability(spec, anatomy));
  for (auto& seg : spec.segments)
    if (seg.type == SegmentType::press) seg.force = 20.0;
  EXPECT_THROW(check_press_reachability(spec, anatomy), ValidationError);

  Scenario s = base;
  s.trajectory = spec;
  EXPECT_THROW(run_simulation(s), ValidationError);
}

TEST(Simulation, ZeroDurationGivesHeaderOnlyLog) {
  json j = minimal();
  j["duration"] = 0.0;
  const RunLog log = run_simulation(scenario_from_json(j));
  EXPECT_TRUE(log.records.empty());
  EXPECT_TRUE(log.events.empty());
  EXPECT_EQ(log.header.name, "minimal");
  EXPECT_EQ(log.header.structures.size(), 5u);
  std::stringstream csv;
  write_csv(csv, log);
  EXPECT_TRUE(read_csv(csv).records.empty());
}

TEST(Simulation, RecordsOnePerControlTick) {
  const RunLog log = run_simulation(scenario_from_json(minimal()));
  ASSERT_EQ(log.records.size(), 250u);
  for (std::size_t i = 0; i < log.records.size(); ++i) EXPECT_DOUBLE_EQ(log.records[i].t, 0.002 * i);
  EXPECT_EQ(log.header.config_hash, config_hash(scenario_from_json(minimal())));
}

TEST(Simulation, NoInputHoldsStill) {
  Scenario s = scenario_from_json(minimal());
  s.trajectory.segments.push_back(idle(0.5));
  const RunLog log = run_simulation(s);
  for (const auto& r : log.records) {
    EXPECT_EQ(r.q, log.records.front().q);
    EXPECT_EQ(r.tip, log.records.front().tip);
  }
}

TEST(Simulation, SameSeedIsBitIdentical) {
  Scenario s = load_scenario(kScenarios / "tremor_hold.json");
  s.duration = 12.0;
  const auto a = serialize(run_simulation(s));
  const auto b = serialize(run_simulation(s));
  EXPECT_EQ(a, b);
  s.seed = 2;
  EXPECT_NE(serialize(run_simulation(s)), a);
}

TEST(Simulation, ReplayReproducesTheStateTrace) {
  Scenario s = load_scenario(kScenarios / "aggressive.json");
  s.duration = 22.0;
  const RunLog recorded = run_simulation(s);
  const RunLog replayed = replay_run(recorded);
  EXPECT_EQ(serialize(replayed), serialize(recorded));
}

TEST(Simulation, ReplayFromCsvExport) {
  Scenario s = load_scenario(kScenarios / "gentle_press.json");
  s.duration = 10.0;
  const RunLog recorded = run_simulation(s);
  std::stringstream csv;
  write_csv(csv, recorded);
  const RunLog loaded = read_csv(csv);
  EXPECT_EQ(serialize(replay_run(loaded)), serialize(recorded));
}

TEST(Simulation, DisabledControllerOverforcesTheNerve) {
  const Scenario s = load_scenario(kScenarios / "nerve_press_off.json");
  ASSERT_FALSE(s.controller.enabled);
  const RunLog log = run_simulation(s);
  EXPECT_GT(max_force(log), 0.8 + 0.2);
  for (const auto& r : log.records) EXPECT_EQ(r.sigma, 1.0);
}

TEST(Simulation, OpenLoopPressReachesItsTarget) {
  const Scenario s = load_scenario(kScenarios / "gentle_press.json");
  ASSERT_FALSE(s.controller.enabled);
  const RunLog log = run_simulation(s);
  EXPECT_NEAR(max_force(log), 1.0, 0.05);
}

TEST(Simulation, PressOnNerveWalksThroughTheRegimes) {
  Scenario s = load_scenario(kScenarios / "gentle_press.json");
  s.controller.enabled = true;
  const RunLog log = run_simulation(s);
  std::vector<control::Regime> sequence;
  for (const auto& r : log.records)
    if (sequence.empty() || sequence.back() != r.regime) sequence.push_back(r.regime);
  ASSERT_GE(sequence.size(), 3u);
  EXPECT_EQ(sequence[0], control::Regime::free);
  EXPECT_EQ(sequence[1], control::Regime::contact);
  EXPECT_EQ(sequence[2], control::Regime::overforce);
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    const auto& a = log.records[i - 1];
    const auto& b = log.records[i];
    if (a.regime == control::Regime::overforce && b.regime == control::Regime::overforce) {
      EXPECT_LE(b.sigma, a.sigma) << "t=" << b.t;
    }
    EXPECT_GE(b.sigma, 0.3);
    EXPECT_LE(b.sigma, 1.7);
  }
  bool nerve = false;
  for (const auto& r : log.records) nerve |= r.structure == 1;
  EXPECT_TRUE(nerve);
}

TEST(Simulation, MetricsSurviveTheLogRoundTrip) {
  Scenario s = load_scenario(kScenarios / "aggressive.json");
  s.duration = 22.0;
  const RunLog log = run_simulation(s);
  const auto expected = report_json(compute_metrics(log));
  std::stringstream bin;
  write_runlog(bin, log);
  EXPECT_EQ(report_json(compute_metrics(read_runlog(bin))), expected);
  std::stringstream csv;
  write_csv(csv, log);
  EXPECT_EQ(report_json(compute_metrics(read_csv(csv))), expected);
}

TEST(Simulation, MetricSetsNestOnSimulatedRuns) {
  Scenario s = load_scenario(kScenarios / "tremor_hold.json");
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    s.seed = seed;
    const auto report = compute_metrics(run_simulation(s));
    for (const auto& r : report.rows) {
      EXPECT_LE(r.undesired.samples, r.high.samples);
      EXPECT_LE(r.high.samples, r.contact.samples);
    }
  }
}

TEST(Simulation, ScenarioIsRecoveredFromTheLog) {
  const Scenario s = load_scenario(kScenarios / "gentle_press.json");
  Scenario z = s;
  z.duration = 0.0;
  const RunLog log = run_simulation(z);
  EXPECT_EQ(scenario_to_json(scenario_from_log(log)), scenario_to_json(z));
  RunLog external = log;
  external.header.scenario = nullptr;
  EXPECT_THROW(scenario_from_log(external), FormatError);
}
