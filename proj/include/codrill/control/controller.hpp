#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "codrill/twin/structure.hpp"

namespace codrill::control {

enum class Regime { free, contact, overforce };
enum class SigmaLaw { integral, literal };

std::string_view to_string(Regime regime);
std::string_view to_string(SigmaLaw law);

struct ControllerParams {
  double sigma_high = 1.7;
  double sigma_contact = 0.7;
  double sigma_low = 0.3;
  double eta = 1.0;                 ///< 1/(N*s)
  double contact_threshold = 0.3;   ///< C [N]
  double activation_margin = 0.2;   ///< safety limit = lambda + margin [N]
  double hysteresis = 0.05;         ///< contact exits below C - hysteresis [N]
  double slew_limit = std::numeric_limits<double>::infinity();  ///< max rise of sigma while in contact [1/s]
  SigmaLaw law = SigmaLaw::integral;
  bool enabled = true;
  double disabled_sigma = 1.0;      ///< fixed gain when the adaptive law is switched off

  /// Throws ValidationError listing every violated constraint.
  void validate() const;
};

struct ControllerState {
  Regime regime = Regime::free;
  bool in_contact = false;
  std::optional<int> structure;       ///< operating structure S
  bool structure_fallback = false;    ///< S is the nearest structure but outside its gamma
  double sigma = 1.7;
  double t0 = 0.0;                    ///< overforce onset [s]
  double excess_integral = 0.0;       ///< integral of (|F_T| - U) since t0 [N*s]
  double threshold = std::numeric_limits<double>::infinity();  ///< U [N]
  double force = 0.0;                 ///< |F_T| seen on the last step [N]
  std::optional<double> last_t;
};

ControllerState initial_state(const ControllerParams& params);

enum class EventKind { regime_change, structure_change, overforce_entry, overforce_exit, structure_fallback };

std::string_view to_string(EventKind kind);

struct ControllerEvent {
  double t = 0.0;
  EventKind kind = EventKind::regime_change;
  Regime regime = Regime::free;
  std::optional<int> structure;
  double sigma = 0.0;
  double force = 0.0;
  double threshold = 0.0;
};

/// Contact with hysteresis: enter at |F_T| >= C, leave below C - band.
bool detect_contact(double force, bool was_in_contact, const ControllerParams& params);

struct StructureEstimate {
  std::optional<int> index;
  bool fallback = false;  ///< in contact but outside every gamma_n
};

/// Nearest structure by d_n (ties: critical first, then lowest index) when in
/// contact. `distances` follows the order of `specs`. Throws
/// ConfigurationError on an empty or mismatched distance vector.
StructureEstimate estimate_operating_structure(std::span<const double> distances, bool contact,
                                               const twin::StructureTable& specs);

/// Three-regime gain law. Uses `state.in_contact`; `threshold` is U. The
/// overforce exponent is eta * X with X = state.excess_integral (integral law)
/// or (|F_T| - U)(t - t0) (literal law).
double compute_gain_adjustment(double force, double threshold, const ControllerState& state, double t,
                               const ControllerParams& params);

struct ControllerInputs {
  double force = 0.0;                ///< |F_T| estimate [N]
  std::span<const double> distances; ///< d_n this tick
  double t = 0.0;
};

struct StepResult {
  double sigma = 0.0;
  ControllerState state;
  std::vector<ControllerEvent> events;
};

/// One control tick: contact, operating structure, U, regime and sigma.
/// Throws ConfigurationError if t decreases.
StepResult step_controller(const ControllerInputs& inputs, const ControllerState& state,
                           const ControllerParams& params, const twin::StructureTable& specs);

}  // namespace codrill::control
