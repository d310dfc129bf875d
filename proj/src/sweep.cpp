#include "qsdyn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qsdyn {

std::vector<double> GridRange::nodes() const {
  std::vector<double> out;
  // The small slack keeps max itself when (max - min) / step is integral.
  const double span = (max - min) / step;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(min + static_cast<double>(k) * step);
  return out;
}

void GridRange::validate(const char* name) const {
  const std::string n(name);
  if (!(min > 0.0)) throw Error(ErrorCode::InvalidArgument, n + " range must start above 0");
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, n + " step must be > 0");
  if (!(max >= min)) throw Error(ErrorCode::InvalidArgument, n + " range max must be >= min");
  if (!std::isfinite(max) || !std::isfinite(step))
    throw Error(ErrorCode::InvalidArgument, n + " range must be finite");
}

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::UnstableDominance: return "UnstableDominance";
    case Outcome::MutatorCoexistence: return "MutatorCoexistence";
    case Outcome::FullCoexistence: return "FullCoexistence";
    case Outcome::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

Outcome outcome_of(FixedPointKind k) noexcept {
  switch (k) {
    case FixedPointKind::UnstableDominance: return Outcome::UnstableDominance;
    case FixedPointKind::MutatorCoexistence: return Outcome::MutatorCoexistence;
    case FixedPointKind::FullCoexistence: return Outcome::FullCoexistence;
  }
  return Outcome::Unresolved;
}

std::optional<Outcome> parse_outcome(const std::string& s) noexcept {
  for (Outcome o : {Outcome::UnstableDominance, Outcome::MutatorCoexistence,
                    Outcome::FullCoexistence, Outcome::Unresolved}) {
    if (s == to_string(o)) return o;
  }
  return std::nullopt;
}

const char* to_string(SweepKind k) noexcept {
  switch (k) {
    case SweepKind::Classify: return "classify";
    case SweepKind::Densities: return "densities";
    case SweepKind::Transients: return "transients";
  }
  return "classify";
}

void SweepSpec::validate() const {
  (void)ModelParams(1.0, 1.0, f2, Q, Qp);
  f0.validate("f0");
  f1.validate("f1");
  if (!(classify_tol > 0.0 && classify_tol < 1.0))
    throw Error(ErrorCode::InvalidArgument, "classify_tol must lie in (0,1)");
  if (!(transient_tol > 0.0 && transient_tol < 1.0))
    throw Error(ErrorCode::InvalidArgument, "transient_tol must lie in (0,1)");
  (void)SimplexState::from(initial.x[0], initial.x[1], initial.x[2]);
  integrator.validate();
}

namespace {

void record_error(SweepCell& cell, const Error& e) {
  if (!cell.error) {
    cell.error = e.code();
    cell.error_message = e.what();
  }
}

}  // namespace

SweepCell classify_cell(const SweepSpec& spec, double f0, double f1, SweepKind kind) {
  SweepCell cell;
  cell.f0 = f0;
  cell.f1 = f1;
  cell.f0Q = f0 * spec.Q;
  cell.f1Qp = f1 * spec.Qp;
  cell.densities = spec.initial;

  std::optional<ModelParams> params;
  try {
    params.emplace(f0, f1, spec.f2, spec.Q, spec.Qp);
  } catch (const Error& e) {
    record_error(cell, e);
    return cell;
  }
  const ModelParams& p = *params;

  std::vector<Equilibrium> existing;
  for (const auto& e : all_equilibria(p).points)
    if (e && e->exists) existing.push_back(*e);

  std::optional<FixedPointKind> predicted;
  try {
    predicted = classify_analytic(p).kind;
    cell.analytic_outcome = outcome_of(*predicted);
  } catch (const Error&) {
    cell.analytic_outcome = Outcome::Unresolved;
  }

  IntegrationHooks hooks;
  const double tol = spec.classify_tol;
  hooks.until = [&existing, tol](double, std::span<const double> x) {
    const SimplexState s{{x[0], x[1], x[2]}};
    for (const auto& e : existing)
      if (distance(s, e.coords) < tol) return true;
    return false;
  };

  try {
    const OrbitResult orbit = integrate(p, spec.initial, spec.integrator, hooks);
    cell.max_drift = orbit.max_drift;
    cell.densities = orbit.final_simplex();
    cell.arrival_time = orbit.final_time;
    if (orbit.event_fired) {
      const Equilibrium* match = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& e : existing) {
        const double d = distance(cell.densities, e.coords);
        if (d >= tol) continue;
        const bool preferred = predicted && e.kind == *predicted;
        if (d < best || (d == best && preferred)) {
          best = d;
          match = &e;
        }
      }
      if (match) cell.outcome = outcome_of(match->kind);
    }
  } catch (const Error& e) {
    record_error(cell, e);
  }

  if (kind == SweepKind::Transients) {
    try {
      const Equilibrium target = predicted_attractor(p);
      IntegrationHooks timing;
      timing.until = distance_below(target.coords, spec.transient_tol);
      const OrbitResult orbit = integrate(p, spec.initial, spec.integrator, timing);
      cell.max_drift = std::max(cell.max_drift, orbit.max_drift);
      if (orbit.event_fired) cell.transient_time = orbit.final_time;
    } catch (const Error& e) {
      record_error(cell, e);
    }
  }

  cell.agreement = cell.outcome == cell.analytic_outcome;
  return cell;
}

namespace {

unsigned worker_count(unsigned threads, std::size_t jobs) {
  unsigned n = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, count) on a fixed set of workers. Each job writes
// only its own output slot.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job job) {
  const unsigned workers = worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

SweepGrid run_sweep(const SweepSpec& spec, SweepKind kind, unsigned threads) {
  spec.validate();
  SweepGrid grid;
  grid.kind = kind;
  grid.f0_nodes = spec.f0.nodes();
  grid.f1_nodes = spec.f1.nodes();
  const std::size_t cols = grid.f1_nodes.size();
  grid.cells.resize(grid.f0_nodes.size() * cols);
  parallel_for(grid.cells.size(), threads, [&](std::size_t k) {
    grid.cells[k] = classify_cell(spec, grid.f0_nodes[k / cols], grid.f1_nodes[k % cols], kind);
  });
  return grid;
}

SweepGrid sweep_classification(const SweepSpec& spec, unsigned threads) {
  return run_sweep(spec, SweepKind::Classify, threads);
}
SweepGrid sweep_densities(const SweepSpec& spec, unsigned threads) {
  return run_sweep(spec, SweepKind::Densities, threads);
}
SweepGrid sweep_transients(const SweepSpec& spec, unsigned threads) {
  return run_sweep(spec, SweepKind::Transients, threads);
}

std::vector<double> detect_bifurcations(const std::vector<SectionPoint>& points) {
  std::vector<double> out;
  const SectionPoint* last = nullptr;
  for (const auto& pt : points) {
    if (pt.cell.outcome == Outcome::Unresolved) continue;
    if (last && last->cell.outcome != pt.cell.outcome) {
      out.push_back(0.5 * (last->abscissa + pt.abscissa));
    }
    last = &pt;
  }
  return out;
}

namespace {

Equilibrium branch_point(const ModelParams& p, FixedPointKind k) {
  switch (k) {
    case FixedPointKind::UnstableDominance: return fixed_point_unstable_dominance(p);
    case FixedPointKind::MutatorCoexistence: return fixed_point_mutator_coexistence(p);
    case FixedPointKind::FullCoexistence: return fixed_point_full_coexistence(p);
  }
  return fixed_point_unstable_dominance(p);
}

}  // namespace

Section section(const SweepSpec& spec, SweepKind kind, Axis fixed_axis, double fixed_value,
                bool with_eigen, std::optional<FixedPointKind> branch, unsigned threads) {
  spec.validate();
  const bool f0_fixed = fixed_axis == Axis::F0Q;
  const double fidelity = f0_fixed ? spec.Q : spec.Qp;
  const GridRange& fixed_range = f0_fixed ? spec.f0 : spec.f1;
  const double fixed_raw = fixed_value / fidelity;
  const double slack = 1e-9 * std::max(1.0, std::abs(fixed_range.max));
  if (!(fixed_raw >= fixed_range.min - slack && fixed_raw <= fixed_range.max + slack)) {
    throw Error(ErrorCode::InvalidArgument, "section value lies outside the parameter range");
  }

  Section out;
  out.fixed_axis = fixed_axis;
  out.fixed_value = fixed_value;
  out.kind = kind;
  out.with_eigen = with_eigen;

  const std::vector<double> free_nodes = (f0_fixed ? spec.f1 : spec.f0).nodes();
  const double free_fidelity = f0_fixed ? spec.Qp : spec.Q;
  out.points.resize(free_nodes.size());
  parallel_for(free_nodes.size(), threads, [&](std::size_t k) {
    const double f0 = f0_fixed ? fixed_raw : free_nodes[k];
    const double f1 = f0_fixed ? free_nodes[k] : fixed_raw;
    out.points[k].abscissa = free_nodes[k] * free_fidelity;
    out.points[k].cell = classify_cell(spec, f0, f1, kind);
  });
  out.bifurcations = detect_bifurcations(out.points);

  if (branch) {
    out.tracked_branch = *branch;
  } else {
    for (const auto& pt : out.points) {
      try {
        out.tracked_branch =
            classify_analytic(ModelParams(pt.cell.f0, pt.cell.f1, spec.f2, spec.Q, spec.Qp)).kind;
        break;
      } catch (const Error&) {
      }
    }
  }

  if (with_eigen) {
    for (auto& pt : out.points) {
      try {
        const ModelParams p(pt.cell.f0, pt.cell.f1, spec.f2, spec.Q, spec.Qp);
        const Equilibrium e = branch_point(p, out.tracked_branch);
        pt.eigen = eigen3(jacobian(p, e.coords));
      } catch (const Error& e) {
        pt.eigen_error = to_string(e.code());
      }
    }
  }
  return out;
}

bool near_boundary(const SweepSpec& spec, double f0, double f1, double steps,
                   bool include_equal_fitness) noexcept {
  const double a = f0 * spec.Q;
  const double b = f1 * spec.Qp;
  const double da = steps * spec.Q * spec.f0.step;
  const double db = steps * spec.Qp * spec.f1.step;
  if (std::abs(a - b) <= da + db) return true;
  if (std::abs(a - spec.f2) <= da) return true;
  if (std::abs(b - spec.f2) <= db) return true;
  if (include_equal_fitness && std::abs(f1 - spec.f2) <= steps * spec.f1.step) return true;
  return false;
}

}  // namespace qsdyn
