#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "codrill/common/error.hpp"
#include "codrill/common/rng.hpp"
#include "codrill/scenario/metrics.hpp"
#include "codrill/session/live_session.hpp"
#include "codrill/session/server.hpp"

using namespace codrill;
using namespace codrill::session;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(CODRILL_FIXTURE_DIR) / "scenarios";

scenario::Scenario live_scenario() { return scenario::load_scenario(kScenarios / "live.json"); }

SteerCommand push(Eigen::Vector3d f) {
  SteerCommand c;
  c.force = f;
  return c;
}

// Headless operator: servo over the facial nerve, then press down holding
// about 1.3 N, reacting only to received snapshots.
struct NerveClient {
  Eigen::Vector3d goal{13.6, 12.0, 11.0};
  bool pressing = false;

  SteerCommand command(const Snapshot& s) {
    if (!pressing && (s.tip - goal).norm() < 0.3) pressing = true;
    if (!pressing) {
      Eigen::Vector3d f = 1.0 * (goal - s.tip);
      if (f.norm() > 1.5) f *= 1.5 / f.norm();
      return push(f);
    }
    const double magnitude = std::clamp(1.5 * (1.3 - s.force), -1.0, 1.5);
    return push(Eigen::Vector3d(0.0, 0.0, -magnitude));
  }
};

std::vector<Snapshot> drive_nerve_client(LiveSession& session, double seconds) {
  NerveClient client;
  std::vector<Snapshot> seen;
  const double frame = 1.0 / 60.0;
  for (double t = frame; t <= seconds; t += frame) {
    session.advance_to(t);
    for (const auto& m : session.drain())
      if (m.at("type") == "snapshot") seen.push_back(snapshot_from_json(m));
    if (!seen.empty()) session.submit(client.command(seen.back()));
  }
  return seen;
}

}  // namespace

TEST(Messages, SteerRoundTrip) {
  SteerCommand c;
  c.client_time = 1.25;
  c.force = {1.0, -2.0, 3.5};
  c.torque = {0.1, 0.2, 0.3};
  c.drill = true;
  const auto back = steer_from_json(parse_frame(to_json(c).dump()));
  EXPECT_EQ(back.client_time, 1.25);
  EXPECT_EQ(back.force, c.force);
  EXPECT_EQ(back.torque, c.torque);
  EXPECT_TRUE(back.drill);
}

TEST(Messages, MalformedFramesAreRejected) {
  EXPECT_THROW(parse_frame("not json"), FormatError);
  EXPECT_THROW(parse_frame("[1,2]"), FormatError);
  EXPECT_THROW(parse_frame(R"({"type":"steer"})"), FormatError);
  EXPECT_THROW(parse_frame(R"({"type":"steer","protocol":2,"force":[0,0,0]})"), SchemaVersionError);
  EXPECT_THROW(parse_frame(std::string(kMaxMessageBytes + 1, ' ')), FormatError);
  auto steer = [](const char* text) { return steer_from_json(parse_frame(text)); };
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,0]})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,"x",0]})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,0,1e999]})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,0,0],"drill":1})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,0,0],"speed":3})"), FormatError);
  EXPECT_THROW(steer(R"({"type":"hello","protocol":1})"), FormatError);
  EXPECT_NO_THROW(steer(R"({"type":"steer","protocol":1,"force":[0,0,-1]})"));
}

TEST(Messages, ClampBoundsEveryComponent) {
  RandomStream rng(21, "clamp");
  for (int trial = 0; trial < 2000; ++trial) {
    SteerCommand c;
    for (int i = 0; i < 3; ++i) {
      c.force[i] = rng.uniform(-100.0, 100.0);
      c.torque[i] = rng.uniform(-100.0, 100.0);
    }
    const double max = rng.uniform(0.5, 30.0);
    const auto out = clamp(c, max);
    for (int i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs(out.force[i]), max);
      EXPECT_LE(std::abs(out.torque[i]), max);
      const double expected = std::abs(c.force[i]) <= max ? c.force[i] : std::copysign(max, c.force[i]);
      EXPECT_EQ(out.force[i], expected);
    }
  }
}

TEST(Messages, HelloAndSnapshotRoundTrip) {
  LiveSession session(live_scenario());
  const auto hello = hello_from_json(to_json(session.hello()));
  EXPECT_EQ(hello.scenario, "live");
  EXPECT_EQ(hello.structures.size(), 5u);
  EXPECT_NEAR(hello.margin, 0.2, 1e-12);
  EXPECT_EQ(hello.max_force, 15.0);
  EXPECT_EQ(hello.deadman, 0.2);
  EXPECT_EQ(hello.snapshot_rate, 60.0);
  EXPECT_EQ(hello.sigma_high, 1.7);

  session.advance(0.1);
  const auto messages = session.drain();
  ASSERT_FALSE(messages.empty());
  const auto& last = messages.back();
  const auto s = snapshot_from_json(last);
  EXPECT_EQ(to_json(s), last);
  EXPECT_EQ(s.regime, "FREE");
  EXPECT_EQ(s.sigma, 1.7);
  EXPECT_EQ(s.distances.size(), 5u);
}

TEST(LiveSession, RejectsNonLiveScenarios) {
  const auto s = scenario::load_scenario(kScenarios / "gentle_press.json");
  EXPECT_THROW(LiveSession{s}, ConfigurationError);
  EXPECT_THROW(SessionServer(s, {}), ConfigurationError);
}

TEST(LiveSession, NoInputHoldsStill) {
  LiveSession session(live_scenario());
  session.advance(2.0);
  const auto log = session.finish();
  ASSERT_EQ(log.records.size(), 1000u);
  for (const auto& r : log.records) {
    EXPECT_EQ(r.q, log.records.front().q);
    EXPECT_EQ(r.hand, scenario::RunRecord{}.hand);
  }
}

TEST(LiveSession, InputIsClampedOnIngest) {
  LiveSession session(live_scenario());
  SteerCommand c = push({100.0, -100.0, 3.0});
  c.torque = {-40.0, 0.5, 16.0};
  const auto clamped = session.submit(c);
  EXPECT_EQ(clamped.force, Eigen::Vector3d(15.0, -15.0, 3.0));
  session.advance(0.01);
  const auto log = session.finish();
  for (const auto& r : log.records) {
    for (int i = 0; i < 6; ++i) EXPECT_LE(std::abs(r.hand[i]), 15.0);
  }
  EXPECT_EQ(log.records.front().hand.head<3>(), Eigen::Vector3d(15.0, -15.0, 3.0));
  EXPECT_EQ(log.records.front().hand.tail<3>(), Eigen::Vector3d(-15.0, 0.5, 15.0));
}

TEST(LiveSession, LatestCommandWinsWithinATick) {
  LiveSession session(live_scenario());
  session.submit(push({1.0, 0.0, 0.0}));
  session.submit(push({0.0, 2.0, 0.0}));
  session.advance(0.004);
  const auto log = session.finish();
  for (const auto& r : log.records) EXPECT_EQ(r.hand.head<3>(), Eigen::Vector3d(0.0, 2.0, 0.0));
}

TEST(LiveSession, DeadmanDecaysStalledInput) {
  LiveSession session(live_scenario());
  session.submit(push({0.0, 0.0, -2.0}));
  session.advance(1.0);
  bool flagged_snapshot = false;
  for (const auto& m : session.drain())
    if (m.at("type") == "snapshot") flagged_snapshot |= m.at("deadman").get<bool>();
  EXPECT_TRUE(flagged_snapshot);
  const auto log = session.finish();
  for (const auto& r : log.records) {
    const double f = r.hand.head<3>().norm();
    const bool deadman = (r.flags & scenario::kFlagDeadman) != 0;
    if (r.t <= 0.2) {
      EXPECT_EQ(f, 2.0) << r.t;
      EXPECT_FALSE(deadman);
    } else if (r.t > 0.2 + 1e-9) {
      EXPECT_TRUE(deadman) << r.t;
      EXPECT_LT(f, 2.0);
    }
    if (r.t > 0.6) {
      EXPECT_LT(f, 1e-3);
    }
  }
  EXPECT_NEAR(log.records.back().hand.head<3>().norm(), 2.0 * std::exp(-0.8 / 0.05), 1e-8);
}

TEST(LiveSession, NewCommandReleasesTheDeadman) {
  LiveSession session(live_scenario());
  session.submit(push({0.0, 0.0, -2.0}));
  session.advance(0.5);
  session.submit(push({0.0, 0.0, -1.0}));
  session.advance(0.1);
  const auto log = session.finish();
  EXPECT_EQ(log.records.back().hand.head<3>(), Eigen::Vector3d(0.0, 0.0, -1.0));
  EXPECT_EQ(log.records.back().flags & scenario::kFlagDeadman, 0);
}

TEST(LiveSession, SnapshotsAreDecimatedAndEventsAreComplete) {
  LiveSession session(live_scenario());
  NerveClient client;
  std::size_t snapshots = 0, events = 0;
  std::uint64_t last_seq = 0;
  double last_t = -1.0;
  bool first = true;
  for (int frame = 1; frame <= 600; ++frame) {
    session.advance_to(frame / 60.0);
    for (const auto& m : session.drain()) {
      const auto seq = m.at("seq").get<std::uint64_t>();
      if (!first) {
        EXPECT_EQ(seq, last_seq + 1);
      }
      first = false;
      last_seq = seq;
      EXPECT_LE(m.dump().size(), kMaxMessageBytes);
      if (m.at("type") == "snapshot") {
        ++snapshots;
        EXPECT_GE(m.at("t").get<double>(), last_t);
        last_t = m.at("t").get<double>();
      } else {
        ++events;
      }
    }
    if (session.last_snapshot()) session.submit(client.command(*session.last_snapshot()));
  }
  EXPECT_NEAR(static_cast<double>(snapshots), 600.0, 1.0);
  const auto log = session.finish();
  EXPECT_GT(log.events.size(), 0u);
  EXPECT_EQ(events, log.events.size());
}

TEST(LiveSession, PressingTheNerveDrivesSigmaTowardLow) {
  LiveSession session(live_scenario());
  const auto seen = drive_nerve_client(session, 12.0);
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.front().sigma, 1.7);
  bool contact = false;
  double lowest = 2.0;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    const auto& s = seen[i];
    EXPECT_GE(s.sigma, 0.3);
    EXPECT_LE(s.sigma, 1.7);
    if (s.regime == "CONTACT" && s.sigma == 0.7) contact = true;
    if (s.regime == "OVERFORCE") {
      EXPECT_EQ(s.structure, 1);
      lowest = std::min(lowest, s.sigma);
      if (i > 0 && seen[i - 1].regime == "OVERFORCE") {
        EXPECT_LE(s.sigma, seen[i - 1].sigma);
      }
    }
  }
  EXPECT_TRUE(contact);
  EXPECT_LT(lowest, 0.45);
  EXPECT_GT(lowest, 0.3);
}

TEST(LiveSession, RecordingReplaysIdentically) {
  LiveSession session(live_scenario());
  drive_nerve_client(session, 8.0);
  session.submit(push({0.0, 0.0, 1.0}));
  session.advance(0.7);
  const auto recorded = session.finish();
  const auto replayed = scenario::replay_run(recorded);
  EXPECT_EQ(scenario::serialize(replayed), scenario::serialize(recorded));
  EXPECT_EQ(scenario::report_json(scenario::compute_metrics(replayed)),
            scenario::report_json(scenario::compute_metrics(recorded)));
}

TEST(Pacer, RealTimeWhenKeepingUp) {
  Pacer p(0.05);
  EXPECT_DOUBLE_EQ(p.target(0.010, 0.0), 0.010);
  EXPECT_DOUBLE_EQ(p.target(0.020, 0.010), 0.020);
  EXPECT_EQ(p.dropped(), 0.0);
}

TEST(Pacer, CatchUpIsBounded) {
  Pacer p(0.05);
  EXPECT_DOUBLE_EQ(p.target(1.0, 0.0), 0.05);
  EXPECT_NEAR(p.dropped(), 0.95, 1e-12);
  EXPECT_NEAR(p.target(1.005, 0.05), 0.055, 1e-12);
}

TEST(Pacer, NeverRunsAheadByMoreThanTheBound) {
  RandomStream rng(22, "pacer");
  for (int trial = 0; trial < 50; ++trial) {
    Pacer p(0.05, rng.uniform(0.5, 4.0));
    double wall = 0.0, sim = 0.0;
    for (int k = 0; k < 200; ++k) {
      wall += rng.uniform(0.0, 0.3);
      const double target = p.target(wall, sim);
      EXPECT_LE(target - sim, 0.05 + 1e-12);
      // A slow simulation may only get part of the way there.
      sim = std::max(sim, sim + (target - sim) * rng.uniform());
    }
  }
}

TEST(Server, SessionOverWebSocket) {
  namespace beast = boost::beast;
  namespace net = boost::asio;
  const auto out = std::filesystem::temp_directory_path() / "codrill_session_test.cdlog";
  std::filesystem::remove(out);
  ServeOptions options;
  options.port = 0;
  options.out = out;
  options.max_sessions = 1;
  SessionServer server(live_scenario(), options);
  EXPECT_THROW(SessionServer(live_scenario(), [&] {
                 ServeOptions busy;
                 busy.port = server.port();
                 return busy;
               }()),
               ConfigurationError);
  std::thread thread([&] { server.run(); });

  net::io_context ioc;
  net::ip::tcp::resolver resolver(ioc);
  beast::websocket::stream<net::ip::tcp::socket> ws(ioc);
  net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  ws.handshake("127.0.0.1", "/");
  auto read = [&] {
    beast::flat_buffer buffer;
    ws.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  };
  const auto hello = hello_from_json(read());
  EXPECT_EQ(hello.scenario, "live");

  ws.text(true);
  ws.write(net::buffer(std::string("{not json")));
  bool saw_error = false;
  for (int i = 0; i < 500 && !saw_error; ++i) {
    const auto m = read();
    if (m.at("type") == "error") {
      saw_error = true;
      EXPECT_EQ(m.at("code"), "format_error");
    }
  }
  EXPECT_TRUE(saw_error);

  ws.write(net::buffer(to_json(push({0.0, 0.0, -40.0})).dump()));
  int snapshots = 0;
  double moved = 0.0;
  std::optional<Eigen::Vector3d> first_tip;
  const auto start = std::chrono::steady_clock::now();
  while (std::chrono::steady_clock::now() - start < std::chrono::milliseconds(400)) {
    const auto m = read();
    if (m.at("type") != "snapshot") continue;
    const auto s = snapshot_from_json(m);
    ++snapshots;
    if (!first_tip) first_tip = s.tip;
    moved = std::max(moved, (*first_tip - s.tip).norm());
    EXPECT_LE(std::abs(s.hand.z()), 15.0);
  }
  EXPECT_GT(snapshots, 10);
  EXPECT_GT(moved, 0.0);
  ws.close(beast::websocket::close_code::normal);
  thread.join();

  ASSERT_EQ(server.saved_logs().size(), 1u);
  const auto log = scenario::load_runlog(out);
  ASSERT_FALSE(log.records.empty());
  double max_hand = 0.0;
  for (const auto& r : log.records) max_hand = std::max(max_hand, r.hand.cwiseAbs().maxCoeff());
  EXPECT_EQ(max_hand, 15.0);
  EXPECT_EQ(scenario::serialize(scenario::replay_run(log)), scenario::serialize(log));
  std::filesystem::remove(out);
}
