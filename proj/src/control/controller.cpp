#include "codrill/control/controller.hpp"

#include <algorithm>
#include <cmath>

#include "codrill/common/error.hpp"

namespace codrill::control {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::free: return "FREE";
    case Regime::contact: return "CONTACT";
    case Regime::overforce: return "OVERFORCE";
  }
  return "UNKNOWN";
}

std::string_view to_string(SigmaLaw law) { return law == SigmaLaw::integral ? "integral" : "literal"; }

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::regime_change: return "regime_change";
    case EventKind::structure_change: return "structure_change";
    case EventKind::overforce_entry: return "overforce_entry";
    case EventKind::overforce_exit: return "overforce_exit";
    case EventKind::structure_fallback: return "structure_fallback";
  }
  return "unknown";
}

void ControllerParams::validate() const {
  std::vector<std::string> issues;
  if (!(sigma_low < sigma_contact && sigma_contact < sigma_high))
    issues.push_back("controller: require sigma_low < sigma_contact < sigma_high");
  if (!(sigma_low > 0.0)) issues.push_back("controller.sigma_low must be > 0");
  if (!(eta > 0.0)) issues.push_back("controller.eta must be > 0");
  if (!(contact_threshold > 0.0)) issues.push_back("controller.contact_threshold must be > 0");
  if (!(activation_margin >= 0.0)) issues.push_back("controller.activation_margin must be >= 0");
  if (!(hysteresis >= 0.0 && hysteresis < contact_threshold))
    issues.push_back("controller.hysteresis must be in [0, contact_threshold)");
  if (!(slew_limit > 0.0)) issues.push_back("controller.slew_limit must be > 0");
  if (!(disabled_sigma > 0.0) || !std::isfinite(disabled_sigma))
    issues.push_back("controller.disabled_sigma must be positive");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

ControllerState initial_state(const ControllerParams& params) {
  ControllerState s;
  s.sigma = params.enabled ? params.sigma_high : params.disabled_sigma;
  return s;
}

bool detect_contact(double force, bool was_in_contact, const ControllerParams& params) {
  if (was_in_contact) return force >= params.contact_threshold - params.hysteresis;
  return force >= params.contact_threshold;
}

StructureEstimate estimate_operating_structure(std::span<const double> distances, bool contact,
                                               const twin::StructureTable& specs) {
  if (distances.empty() || distances.size() != specs.size())
    throw ConfigurationError("distance vector must have one entry per structure");
  StructureEstimate out;
  if (!contact) return out;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (std::isnan(distances[i]) || std::isinf(distances[i])) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double d = distances[i], b = distances[*best];
    const auto& si = specs[i];
    const auto& sb = specs[*best];
    if (d < b || (d == b && (si.critical != sb.critical ? si.critical : si.index < sb.index))) best = i;
  }
  if (!best) {
    out.fallback = true;
    return out;
  }
  out.index = specs[*best].index;
  out.fallback = !(distances[*best] <= specs[*best].gamma);
  return out;
}

double compute_gain_adjustment(double force, double threshold, const ControllerState& state, double t,
                               const ControllerParams& params) {
  if (!state.in_contact) return params.sigma_high;
  if (force < threshold) return params.sigma_contact;
  const double x =
      params.law == SigmaLaw::integral ? state.excess_integral : (force - threshold) * (t - state.t0);
  const double sigma0 = params.sigma_contact - params.sigma_low;
  return sigma0 * std::exp(-params.eta * x) + params.sigma_low;
}

StepResult step_controller(const ControllerInputs& in, const ControllerState& prev, const ControllerParams& params,
                           const twin::StructureTable& specs) {
  if (prev.last_t && in.t < *prev.last_t)
    throw ConfigurationError("controller time went backwards");
  if (!std::isfinite(in.force) || in.force < 0.0) throw ConfigurationError("force magnitude must be finite and >= 0");
  const double dt = prev.last_t ? in.t - *prev.last_t : 0.0;

  StepResult r;
  ControllerState& s = r.state;
  s = prev;
  s.last_t = in.t;
  s.force = in.force;
  s.in_contact = detect_contact(in.force, prev.in_contact, params);

  const auto estimate = estimate_operating_structure(in.distances, s.in_contact, specs);
  s.structure = estimate.index;
  s.structure_fallback = s.in_contact && estimate.fallback;
  if (s.structure) {
    s.threshold = twin::find_structure(specs, *s.structure)->lambda;
  } else if (s.in_contact) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& spec : specs) lowest = std::min(lowest, spec.lambda);
    s.threshold = lowest;
  } else {
    s.threshold = std::numeric_limits<double>::infinity();
  }

  if (!s.in_contact) s.regime = Regime::free;
  else if (in.force >= s.threshold) s.regime = Regime::overforce;
  else s.regime = Regime::contact;

  if (s.regime == Regime::overforce) {
    const bool onset = prev.regime != Regime::overforce || prev.structure != s.structure;
    if (onset) {
      s.t0 = in.t;
      s.excess_integral = 0.0;
    } else {
      s.excess_integral += 0.5 * ((prev.force - s.threshold) + (in.force - s.threshold)) * dt;
    }
  } else {
    s.excess_integral = 0.0;
  }

  double sigma = compute_gain_adjustment(in.force, s.threshold, s, in.t, params);
  // The slew limit only smooths the snap back up after overforce; drops and
  // the free-motion gain stay immediate.
  if (std::isfinite(params.slew_limit) && prev.last_t && s.in_contact && prev.in_contact && sigma > prev.sigma)
    sigma = std::min(sigma, prev.sigma + params.slew_limit * dt);
  sigma = std::clamp(sigma, params.sigma_low, params.sigma_high);
  if (!params.enabled) sigma = params.disabled_sigma;
  s.sigma = sigma;
  r.sigma = sigma;

  auto emit = [&](EventKind kind) {
    r.events.push_back({in.t, kind, s.regime, s.structure, s.sigma, in.force,
                        std::isfinite(s.threshold) ? s.threshold : 0.0});
  };
  if (s.regime != prev.regime) emit(EventKind::regime_change);
  if (s.structure != prev.structure) emit(EventKind::structure_change);
  if (s.regime == Regime::overforce && prev.regime != Regime::overforce) emit(EventKind::overforce_entry);
  if (s.regime != Regime::overforce && prev.regime == Regime::overforce) emit(EventKind::overforce_exit);
  if (s.structure_fallback && !(prev.structure_fallback && prev.structure == s.structure))
    emit(EventKind::structure_fallback);
  return r;
}

}  // namespace codrill::control
