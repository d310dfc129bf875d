#include "qsdyn/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "qsdyn/error.hpp"

namespace qsdyn {

void IntegratorConfig::validate() const {
  auto bad = [](const char* msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) bad("integrator tolerances must be > 0");
  if (!(drift_tol > 0.0)) bad("drift_tol must be > 0");
  if (!(h_init > 0.0) || !(h_max > 0.0)) bad("step sizes must be > 0");
  if (h_init > h_max) bad("h_init must not exceed h_max");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) bad("t_max must be finite and > 0");
}

namespace {

// Dormand & Prince (1980), RK5(4)7M. The fifth-order solution is propagated;
// the last stage is evaluated at the new point (FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

double sum_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

template <class Field>
class Stepper {
 public:
  Stepper(const Field& f, std::size_t n, const IntegratorConfig& cfg)
      : f_(f), cfg_(cfg), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), tmp_(n) {}

  // One step of size h from (x, k1). Writes the fifth-order solution into
  // x_new and f(x_new) into k7; returns the scaled error estimate.
  double attempt(std::span<const double> x, std::span<const double> k1, double h,
                 std::span<double> x_new, std::span<double> k7) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * (a21 * k1[i]);
    f_(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * (a31 * k1[i] + a32 * k2_[i]);
    f_(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a41 * k1[i] + a42 * k2_[i] + a43 * k3_[i]);
    f_(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a51 * k1[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    f_(tmp_, k5_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a61 * k1[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                            a65 * k5_[i]);
    f_(tmp_, k6_);
    for (std::size_t i = 0; i < n; ++i)
      x_new[i] = x[i] + h * (b1 * k1[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] +
                             b6 * k6_[i]);
    f_(std::span<const double>(x_new.data(), n), k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                            e6 * k6_[i] + e7 * k7[i]);
      // NaN would be swallowed by std::max; a non-finite step is a rejection.
      if (!std::isfinite(e) || !std::isfinite(x_new[i]))
        return std::numeric_limits<double>::infinity();
      err = std::max(err, std::abs(e));
    }
    const double scale =
        std::max(cfg_.abs_tol, cfg_.rel_tol * std::max(inf_norm(x), inf_norm(x_new)));
    return err / scale;
  }

 private:
  const Field& f_;
  const IntegratorConfig& cfg_;
  std::vector<double> k2_, k3_, k4_, k5_, k6_, tmp_;
};

template <class Field>
OrbitResult run(const Field& f, std::span<const double> s0, const IntegratorConfig& cfg,
                const IntegrationHooks& hooks) {
  cfg.validate();
  const std::size_t n = s0.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty initial state");
  const bool sampling = hooks.sample_interval > 0.0 && static_cast<bool>(hooks.on_sample);

  std::vector<double> x(s0.begin(), s0.end()), x_new(n), k1(n), k7(n), x_probe(n), k_probe(n);
  Stepper<Field> stepper(f, n, cfg);

  OrbitResult out;
  double t = 0.0;
  out.max_drift = std::abs(sum_of(x) - 1.0);
  auto finish = [&](double tf, std::span<const double> xf, bool fired) {
    out.final_time = tf;
    out.final_state.assign(xf.begin(), xf.end());
    out.event_fired = fired;
    if (sampling) hooks.on_sample(tf, xf);
    return out;
  };

  f(std::span<const double>(x), std::span<double>(k1));
  if (sampling) hooks.on_sample(0.0, x);
  std::size_t sample_index = 1;
  double next_sample = hooks.sample_interval;
  bool last_was_sample = true;

  if (hooks.until && hooks.until(0.0, x)) {
    out.final_time = 0.0;
    out.final_state = x;
    out.event_fired = true;
    return out;
  }

  double h = std::min(cfg.h_init, cfg.h_max);
  while (t < cfg.t_max) {
    double h_try = std::min(h, cfg.t_max - t);
    bool lands_on_sample = false;
    if (sampling && next_sample - t <= h_try) {
      h_try = next_sample - t;
      lands_on_sample = true;
    }
    const bool lands_on_end = !lands_on_sample && h_try == cfg.t_max - t;
    const bool clipped = h_try < h;

    double err = 0.0;
    bool rejected_once = false;
    for (;;) {
      err = stepper.attempt(x, k1, h_try, x_new, k7);
      if (err <= 1.0) break;
      const double factor = std::isfinite(err)
                                ? std::max(kMinFactor, kSafety * std::pow(err, -0.2))
                                : kMinFactor;
      h_try *= factor;
      lands_on_sample = false;
      rejected_once = true;
      ++out.steps_rejected;
      if (h_try < kMinStep) {
        throw Error(ErrorCode::StepUnderflow,
                    "step size fell below 1e-14 at t = " + std::to_string(t));
      }
    }

    double t_new = t + h_try;
    if (lands_on_sample) t_new = next_sample;
    else if (lands_on_end && !rejected_once) t_new = cfg.t_max;

    const double drift = std::abs(sum_of(x_new) - 1.0);
    out.max_drift = std::max(out.max_drift, drift);
    if (drift > cfg.drift_tol) {
      std::ostringstream msg;
      msg << "|x0+x1+x2-1| = " << drift << " at t = " << t_new << " exceeds drift_tol "
          << cfg.drift_tol;
      throw Error(ErrorCode::DriftExceeded, msg.str());
    }

    if (hooks.until && hooks.until(t_new, x_new)) {
      // Bisect on the step length; the predicate is false at lo, true at hi.
      double lo = 0.0, hi = t_new - t;
      std::vector<double> x_hi = x_new;
      while (hi - lo > kEventTimeResolution) {
        const double mid = 0.5 * (lo + hi);
        stepper.attempt(x, k1, mid, x_probe, k_probe);
        if (hooks.until(t + mid, x_probe)) {
          hi = mid;
          x_hi = x_probe;
        } else {
          lo = mid;
        }
      }
      const double drift_hi = std::abs(sum_of(x_hi) - 1.0);
      out.max_drift = std::max(out.max_drift, drift_hi);
      ++out.steps_taken;
      return finish(t + hi, x_hi, true);
    }

    t = t_new;
    x.swap(x_new);
    k1.swap(k7);
    ++out.steps_taken;
    if (hooks.on_step) hooks.on_step(t, x);

    last_was_sample = false;
    if (lands_on_sample) {
      hooks.on_sample(t, x);
      last_was_sample = true;
      ++sample_index;
      next_sample = static_cast<double>(sample_index) * hooks.sample_interval;
    }

    double factor = err > 0.0 ? kSafety * std::pow(err, -0.2) : kMaxFactor;
    factor = std::clamp(factor, kMinFactor, rejected_once ? 1.0 : kMaxFactor);
    double h_next = h_try * factor;
    if (clipped && !rejected_once) h_next = std::max(h_next, h);
    h = std::min(h_next, cfg.h_max);
  }

  out.final_time = t;
  out.final_state = x;
  out.event_fired = false;
  if (sampling && !last_was_sample) hooks.on_sample(t, x);
  return out;
}

}  // namespace

OrbitResult integrate_field(const VectorField& field, std::span<const double> s0,
                            const IntegratorConfig& cfg, const IntegrationHooks& hooks) {
  return run(field, s0, cfg, hooks);
}

OrbitResult integrate(const ModelParams& p, const SimplexState& s0,
                      const IntegratorConfig& cfg, const IntegrationHooks& hooks) {
  if (!s0.on_simplex(kSimplexTolerance)) {
    throw Error(ErrorCode::InvalidState, "initial state is not on the simplex");
  }
  auto field = [&p](std::span<const double> x, std::span<double> dx) {
    vector_field(p, std::span<const double, 3>(x.data(), 3), std::span<double, 3>(dx.data(), 3));
  };
  return run(field, std::span<const double>(s0.x), cfg, hooks);
}

OrbitResult integrate_general(const GeneralModel& g, std::span<const double> s0,
                              const IntegratorConfig& cfg, const IntegrationHooks& hooks) {
  if (s0.size() != g.dimension()) {
    throw Error(ErrorCode::InvalidArgument, "initial state has the wrong dimension");
  }
  double sum = 0.0;
  for (double v : s0) {
    if (!(v >= -kSimplexTolerance)) {
      throw Error(ErrorCode::InvalidState, "initial state has a negative component");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::InvalidState, "initial state is not on the simplex");
  }
  auto field = [&g](std::span<const double> x, std::span<double> dx) { g.vector_field(x, dx); };
  return run(field, s0, cfg, hooks);
}

EventPredicate distance_below(const SimplexState& target, double tol) {
  return [target, tol](double, std::span<const double> x) {
    return distance(aggregate(x), target) < tol;
  };
}

}  // namespace qsdyn
