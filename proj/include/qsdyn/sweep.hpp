#ifndef QSDYN_SWEEP_HPP
#define QSDYN_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include "qsdyn/eigensolver.hpp"
#include "qsdyn/equilibria.hpp"
#include "qsdyn/error.hpp"
#include "qsdyn/integrator.hpp"
#include "qsdyn/model.hpp"

namespace qsdyn {

/// Inclusive of min; nodes are min + k * step <= max.
struct GridRange {
  double min = 0.01;
  double max = 1.0;
  double step = 0.01;

  std::vector<double> nodes() const;
  void validate(const char* name) const;
};

enum class Outcome { UnstableDominance, MutatorCoexistence, FullCoexistence, Unresolved };
const char* to_string(Outcome o) noexcept;
Outcome outcome_of(FixedPointKind k) noexcept;
std::optional<Outcome> parse_outcome(const std::string& s) noexcept;

enum class SweepKind { Classify, Densities, Transients };
const char* to_string(SweepKind k) noexcept;

struct SweepSpec {
  double Q = 0.7;
  double Qp = 0.3;
  double f2 = 0.42;
  GridRange f0{0.01, 1.0 / 0.7, 0.01};
  GridRange f1{0.01, 1.0 / 0.3, 0.01};
  double classify_tol = 1e-10;
  double transient_tol = 1e-2;
  SimplexState initial{{1.0, 0.0, 0.0}};
  IntegratorConfig integrator;

  void validate() const;
};

struct SweepCell {
  double f0 = 0.0, f1 = 0.0, f0Q = 0.0, f1Qp = 0.0;
  Outcome outcome = Outcome::Unresolved;
  SimplexState densities;           // state at arrival, or at t_max
  double arrival_time = 0.0;
  std::optional<double> transient_time;
  Outcome analytic_outcome = Outcome::Unresolved;
  bool agreement = false;
  double max_drift = 0.0;
  std::optional<ErrorCode> error;
  std::string error_message;
};

/// Cells are stored f0-major: cells[i * f1_nodes.size() + j].
struct SweepGrid {
  SweepKind kind = SweepKind::Classify;
  std::vector<double> f0_nodes, f1_nodes;
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t i, std::size_t j) const {
    return cells[i * f1_nodes.size() + j];
  }
};

/// Integrates from spec.initial until the orbit is within classify_tol of an
/// existing fixed point (nearest first, ties to the analytic prediction) or
/// t_max passes. With SweepKind::Transients the time to reach transient_tol of
/// the predicted attractor is measured as well. Errors are recorded, never
/// thrown.
SweepCell classify_cell(const SweepSpec& spec, double f0, double f1,
                        SweepKind kind = SweepKind::Classify);

/// threads = 0 uses std::thread::hardware_concurrency(). Result does not
/// depend on the thread count.
SweepGrid run_sweep(const SweepSpec& spec, SweepKind kind, unsigned threads = 0);
SweepGrid sweep_classification(const SweepSpec& spec, unsigned threads = 0);
SweepGrid sweep_densities(const SweepSpec& spec, unsigned threads = 0);
SweepGrid sweep_transients(const SweepSpec& spec, unsigned threads = 0);

/// Which product coordinate a section holds fixed.
enum class Axis { F0Q, F1Qp };

struct SectionPoint {
  double abscissa = 0.0;  // the free product coordinate
  SweepCell cell;
  std::optional<EigenReport> eigen;  // tracked branch, when requested
  std::string eigen_error;
};

struct Section {
  Axis fixed_axis = Axis::F0Q;
  double fixed_value = 0.0;
  SweepKind kind = SweepKind::Classify;
  bool with_eigen = false;
  FixedPointKind tracked_branch = FixedPointKind::UnstableDominance;
  std::vector<SectionPoint> points;
  std::vector<double> bifurcations;  // midpoints between differing outcomes
};

/// 1-D slice of a sweep at fixed f0Q or f1Q'. The free variable runs over
/// the spec's range for it. Eigenvalues (when requested) follow one analytic
/// branch along the whole slice: `branch`, or by default the analytic
/// attractor at the first classifiable node. Throws InvalidArgument when
/// fixed_value maps outside the spec's range.
Section section(const SweepSpec& spec, SweepKind kind, Axis fixed_axis, double fixed_value,
                bool with_eigen = false, std::optional<FixedPointKind> branch = std::nullopt,
                unsigned threads = 0);

/// Abscissas where consecutive resolved outcomes differ.
std::vector<double> detect_bifurcations(const std::vector<SectionPoint>& points);

/// True if (f0, f1) lies within `steps` grid steps of f0Q=f1Q', f0Q=f2 or
/// f1Q'=f2 (and of f1=f2 when include_equal_fitness).
bool near_boundary(const SweepSpec& spec, double f0, double f1, double steps = 2.0,
                   bool include_equal_fitness = false) noexcept;

}  // namespace qsdyn

#endif  // QSDYN_SWEEP_HPP
