#include "codrill/scenario/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "codrill/common/error.hpp"
#include "codrill/common/rng.hpp"
#include "codrill/twin/phantom.hpp"

namespace codrill::scenario {

namespace {

constexpr double kWaypointTolerance = 0.3;  // mm

Eigen::Vector3d saturate(const Eigen::Vector3d& v, double limit) {
  const double n = v.norm();
  return n > limit ? Eigen::Vector3d(v * (limit / n)) : v;
}

Eigen::Vector3d outward_normal(const twin::AnatomyModel& anatomy, int index, const Eigen::Vector3d& p) {
  const auto* field = anatomy.sdf().field(index);
  if (field == nullptr || field->absent) return Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d g = twin::gradient(anatomy.sdf(), *field, p);
  return g.norm() > 1e-9 ? Eigen::Vector3d(g.normalized()) : Eigen::Vector3d::UnitZ();
}

}  // namespace

int HandForceTrajectory::segment_at(double t) const {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (t < segments[i].end) return static_cast<int>(i);
  return -1;
}

Eigen::Vector3d HandForceTrajectory::tremor_at(double t) const {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int axis = 0; axis < 3; ++axis)
    for (const auto& c : tremor[static_cast<std::size_t>(axis)])
      out[axis] += c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * t + c.phase);
  return out;
}

HandForceTrajectory generate_trajectory(const TrajectorySpec& spec, std::uint64_t seed) {
  HandForceTrajectory out;
  out.human = spec.human;
  RandomStream rng(seed, "human");
  double t = 0.0;
  for (const auto& seg : spec.segments) {
    const bool varied = seg.type == SegmentType::press || seg.type == SegmentType::sweep;
    auto jitter = [&](double value) {
      const double g = rng.gaussian();
      const double v = varied ? spec.human.variability : 0.0;
      return v > 0.0 ? value * std::clamp(1.0 + v * g, 0.5, 1.5) : value;
    };
    PlannedSegment p;
    p.segment = seg;
    p.start = t;
    p.end = t + jitter(seg.duration);
    p.force = jitter(seg.force);
    p.push = seg.push.value_or(spec.human.max_push);
    p.gain = seg.gain.value_or(spec.human.force_gain);
    out.segments.push_back(p);
    t = p.end;
  }
  RandomStream tremor_rng(seed, "tremor");
  const auto& tr = spec.human.tremor;
  for (auto& axis : out.tremor) {
    for (int i = 0; i < kTremorComponents; ++i) {
      TremorComponent c;
      c.frequency = tremor_rng.uniform(tr.band_low, tr.band_high);
      c.phase = tremor_rng.uniform(0.0, 2.0 * std::numbers::pi);
      c.amplitude = tr.std / 2.0;
      if (tr.std > 0.0) axis.push_back(c);
    }
  }
  return out;
}

ScriptedHuman::ScriptedHuman(HandForceTrajectory trajectory, const twin::AnatomyModel& anatomy, double control_dt)
    : trajectory_(std::move(trajectory)), control_dt_(control_dt) {
  Eigen::Vector3d last_target = Eigen::Vector3d::Zero();
  bool have_last = false;
  std::optional<Eigen::Vector3d> last_press;
  for (const auto& p : trajectory_.segments) {
    const auto& seg = p.segment;
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = -Eigen::Vector3d::UnitZ();
    bool has_target = false;
    if (seg.type == SegmentType::approach) {
      const auto& ts = seg.target;
      if (ts.structure) {
        const Eigen::Vector3d surface = twin::exposed_surface_point(anatomy.volume(), *ts.structure, ts.from);
        target = surface + ts.standoff * outward_normal(anatomy, *ts.structure, surface) + ts.offset;
      } else {
        target = ts.point.value_or(Eigen::Vector3d::Zero()) + ts.offset;
      }
      has_target = true;
      last_target = target;
      have_last = true;
    } else if (seg.type == SegmentType::retract) {
      direction = last_press ? Eigen::Vector3d(-*last_press) : Eigen::Vector3d::UnitZ();
    }
    const bool presses = seg.type == SegmentType::press || seg.type == SegmentType::sweep;
    if (seg.direction) {
      direction = seg.direction->normalized();
    } else if (presses && seg.structure && have_last) {
      const Eigen::Vector3d surface = twin::exposed_surface_point(anatomy.volume(), *seg.structure, last_target);
      direction = -outward_normal(anatomy, *seg.structure, surface);
    }
    if (presses) last_press = direction;
    targets_.push_back(target);
    directions_.push_back(direction);
    has_target_.push_back(has_target);
  }
}

double ScriptedHuman::delayed_force(double t) const {
  const double when = t - trajectory_.human.delay + 1e-12;
  double value = 0.0;
  for (const auto& [ts, f] : history_) {
    if (ts > when) break;
    value = f;
  }
  return value;
}

HandCommand ScriptedHuman::step(const HumanObservation& obs) {
  const auto& h = trajectory_.human;
  history_.emplace_back(obs.t, obs.tip_force.norm());
  while (history_.size() > 2 && history_[1].first <= obs.t - h.delay - control_dt_) history_.pop_front();

  const int i = trajectory_.segment_at(obs.t);
  if (i != current_) {
    current_ = i;
    anchor_ = obs.tip;
    start_tip_ = obs.tip;
    stage_ = 0;
  }
  HandCommand cmd;
  if (i < 0) return cmd;
  const auto idx = static_cast<std::size_t>(i);
  const auto& plan = trajectory_.segments[idx];
  const auto& seg = plan.segment;
  cmd.drill = seg.drill;
  const Eigen::Vector3d dir = directions_[idx];

  auto press = [&](const Eigen::Vector3d& anchor) {
    const double along = std::clamp(plan.gain * (plan.force - delayed_force(obs.t)), -plan.push, plan.push);
    Eigen::Vector3d err = anchor - obs.tip;
    err -= dir * dir.dot(err);
    return Eigen::Vector3d(dir * along + saturate(h.position_gain * err, h.max_force));
  };

  switch (seg.type) {
    case SegmentType::idle:
      return cmd;
    case SegmentType::approach: {
      const Eigen::Vector3d& target = targets_[idx];
      Eigen::Vector3d goal = target;
      if (const auto& via = seg.target.via_height) {
        const Eigen::Vector3d rise(start_tip_.x(), start_tip_.y(), *via);
        const Eigen::Vector3d over(target.x(), target.y(), *via);
        if (stage_ == 0 && (rise - obs.tip).norm() < kWaypointTolerance) stage_ = 1;
        if (stage_ == 1 && (over - obs.tip).norm() < kWaypointTolerance) stage_ = 2;
        goal = stage_ == 0 ? rise : stage_ == 1 ? over : target;
      }
      cmd.force = saturate(h.position_gain * (goal - obs.tip), h.max_force);
      break;
    }
    case SegmentType::press:
      cmd.force = press(anchor_);
      break;
    case SegmentType::sweep:
      cmd.force = press(start_tip_ + seg.velocity * (obs.t - plan.start));
      break;
    case SegmentType::retract:
      cmd.force = saturate(h.position_gain * (start_tip_ + seg.distance * dir - obs.tip), h.max_force);
      break;
  }
  cmd.force += trajectory_.tremor_at(obs.t);
  return cmd;
}

void check_press_reachability(const TrajectorySpec& spec, const twin::AnatomyModel& anatomy) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& seg = spec.segments[i];
    if (seg.type != SegmentType::press && seg.type != SegmentType::sweep) continue;
    if (!seg.structure) continue;
    const auto* s = twin::find_structure(anatomy.structures(), *seg.structure);
    const std::string tag = "input.segments[" + std::to_string(i) + "]";
    if (s == nullptr) {
      issues.push_back(tag + ".structure " + std::to_string(*seg.structure) + " is not in the anatomy");
      continue;
    }
    if (!s->critical) continue;
    const double needed = seg.force / s->stiffness;
    const double available = anatomy.max_depth(s->index);
    if (needed > available)
      issues.push_back(tag + ".force " + std::to_string(seg.force) + " N needs " + std::to_string(needed) +
                       " mm into " + s->name + " but only " + std::to_string(available) + " mm is available");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

}  // namespace codrill::scenario
