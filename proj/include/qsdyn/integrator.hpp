#ifndef QSDYN_INTEGRATOR_HPP
#define QSDYN_INTEGRATOR_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qsdyn/model.hpp"

namespace qsdyn {

struct IntegratorConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h_init = 1e-3;
  double h_max = 1.0;
  double t_max = 1e5;
  double drift_tol = 1e-10;

  /// Throws Error(InvalidArgument) on non-positive tolerances, h_init > h_max
  /// or t_max <= 0.
  void validate() const;
};

/// Smallest step the controller may take before giving up.
inline constexpr double kMinStep = 1e-14;
/// Width of the bracket an event time is bisected down to.
inline constexpr double kEventTimeResolution = 1e-6;

struct OrbitResult {
  std::vector<double> final_state;
  double final_time = 0.0;
  bool event_fired = false;
  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
  double max_drift = 0.0;

  /// The final state collapsed to (x0, x1, sum of the rest).
  SimplexState final_simplex() const { return aggregate(final_state); }
};

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;
using EventPredicate = std::function<bool(double, std::span<const double>)>;
using Observer = std::function<void(double, std::span<const double>)>;

/// Optional callbacks. `on_sample` fires at t = 0, k * sample_interval and at
/// the final time; steps are shortened to land on sample times exactly.
/// `on_step` fires after every accepted step.
struct IntegrationHooks {
  EventPredicate until;
  double sample_interval = 0.0;
  Observer on_sample;
  Observer on_step;
};

/// Dormand-Prince 5(4) with local extrapolation and max-norm error control.
///
/// Stops when `hooks.until` first holds (bracketed by bisection of the last
/// step to kEventTimeResolution) or at cfg.t_max. The sum of the state is
/// monitored; a departure from 1 beyond cfg.drift_tol raises DriftExceeded.
OrbitResult integrate_field(const VectorField& field, std::span<const double> s0,
                            const IntegratorConfig& cfg,
                            const IntegrationHooks& hooks = {});

OrbitResult integrate(const ModelParams& p, const SimplexState& s0,
                      const IntegratorConfig& cfg, const IntegrationHooks& hooks = {});

OrbitResult integrate_general(const GeneralModel& g, std::span<const double> s0,
                              const IntegratorConfig& cfg,
                              const IntegrationHooks& hooks = {});

/// Predicate "Euclidean distance of the (aggregated) state to target < tol".
EventPredicate distance_below(const SimplexState& target, double tol);

}  // namespace qsdyn

#endif  // QSDYN_INTEGRATOR_HPP
