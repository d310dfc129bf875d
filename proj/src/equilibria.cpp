#include "qsdyn/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsdyn/error.hpp"

namespace qsdyn {

const char* to_string(FixedPointKind k) noexcept {
  switch (k) {
    case FixedPointKind::UnstableDominance: return "UnstableDominance";
    case FixedPointKind::MutatorCoexistence: return "MutatorCoexistence";
    case FixedPointKind::FullCoexistence: return "FullCoexistence";
  }
  return "Unknown";
}

std::string Stability::label() const {
  switch (kind) {
    case StabilityClass::Attractor: return "Attractor";
    case StabilityClass::Saddle: return "Saddle(" + std::to_string(unstable_dimension) + ")";
    case StabilityClass::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

Stability classify_stability(const std::array<std::complex<double>, 3>& eigenvalues) {
  int unstable = 0;
  for (const auto& l : eigenvalues) {
    if (std::abs(l.real()) <= kDegeneracyWidth) return {StabilityClass::Unresolved, 0};
    if (l.real() > 0.0) ++unstable;
  }
  if (unstable == 0) return {StabilityClass::Attractor, 0};
  return {StabilityClass::Saddle, unstable};
}

namespace {

std::array<std::complex<double>, 3> as_complex(const std::array<double, 3>& v) {
  return {std::complex<double>{v[0]}, std::complex<double>{v[1]}, std::complex<double>{v[2]}};
}

void check_membership(Equilibrium& e) {
  static const char* names[] = {"x0*", "x1*", "x2*"};
  e.violated.clear();
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = e.coords.x[i];
    if (v < -kMembershipTolerance) e.violated.push_back(std::string(names[i]) + " < 0");
    if (v > 1.0 + kMembershipTolerance) e.violated.push_back(std::string(names[i]) + " > 1");
  }
  e.exists = e.violated.empty();
}

void require_distinct_fitness(const ModelParams& p) {
  if (std::abs(p.f1() - p.f2()) < kDegenerateFitnessWidth) {
    throw Error(ErrorCode::DegenerateFitness,
                "f1 = f2: the mutator-coexistence fixed point does not exist");
  }
}

}  // namespace

std::array<double, 3> eigen_unstable_dominance(const ModelParams& p) {
  return {p.f0Q() - p.f2(), p.f1Qp() - p.f2(), -p.f2()};
}

std::array<double, 3> eigen_mutator_coexistence(const ModelParams& p) {
  require_distinct_fitness(p);
  return {p.f0Q() - p.f1Qp(), p.f2() - p.f1Qp(), -p.f1Qp()};
}

Equilibrium fixed_point_unstable_dominance(const ModelParams& p) {
  Equilibrium e;
  e.kind = FixedPointKind::UnstableDominance;
  e.coords = SimplexState{{0.0, 0.0, 1.0}};
  e.exists = true;
  e.eigenvalues = as_complex(eigen_unstable_dominance(p));
  e.eigen_source = EigenSource::Analytic;
  e.stability = classify_stability(e.eigenvalues);
  return e;
}

Equilibrium fixed_point_mutator_coexistence(const ModelParams& p) {
  require_distinct_fitness(p);
  const double f1 = p.f1(), f2 = p.f2();
  const double denom = f1 - f2;
  Equilibrium e;
  e.kind = FixedPointKind::MutatorCoexistence;
  e.coords = SimplexState{{0.0, (p.f1Qp() - f2) / denom, (f1 - p.f1Qp()) / denom}};
  check_membership(e);
  e.eigenvalues = as_complex(eigen_mutator_coexistence(p));
  e.eigen_source = EigenSource::Analytic;
  e.stability = classify_stability(e.eigenvalues);
  return e;
}

double full_coexistence_denominator(const ModelParams& p) noexcept {
  const double a = p.f0Q() - p.f1Qp();
  const double b = p.f0Q() - p.f2();
  const double n0 = a * b;
  const double n1 = p.f0() * p.mu0() * b;
  const double n2 = p.f1() * p.mu1() * p.f0() * p.mu0();
  return n0 + n1 + n2;
}

Equilibrium fixed_point_full_coexistence(const ModelParams& p) {
  const double a = p.f0Q() - p.f1Qp();
  const double b = p.f0Q() - p.f2();
  const double n0 = a * b;
  const double n1 = p.f0() * p.mu0() * b;
  const double n2 = p.f1() * p.mu1() * p.f0() * p.mu0();
  const double phi = n0 + n1 + n2;
  if (std::abs(phi) < kSingularDenominatorWidth) {
    throw Error(ErrorCode::SingularDenominator,
                "full-coexistence denominator vanishes for these parameters");
  }
  Equilibrium e;
  e.kind = FixedPointKind::FullCoexistence;
  e.coords = SimplexState{{n0 / phi, n1 / phi, n2 / phi}};
  check_membership(e);
  const EigenReport rep = eigen3(jacobian(p, e.coords));
  e.eigenvalues = rep.values;
  e.eigen_source = EigenSource::Numeric;
  e.numeric_method = rep.method;
  e.stability = classify_stability(e.eigenvalues);
  return e;
}

CriticalMutationRates critical_mutation_rates(const ModelParams& p) noexcept {
  return {std::clamp(1.0 - p.f2() / p.f0(), 0.0, 1.0),
          std::clamp(1.0 - p.f2() / p.f1(), 0.0, 1.0)};
}

EquilibriumSet all_equilibria(const ModelParams& p) {
  EquilibriumSet set;
  set.points[0] = fixed_point_unstable_dominance(p);
  try {
    set.points[1] = fixed_point_mutator_coexistence(p);
  } catch (const Error& e) {
    set.errors[1] = to_string(e.code());
  }
  try {
    set.points[2] = fixed_point_full_coexistence(p);
  } catch (const Error& e) {
    set.errors[2] = to_string(e.code());
  }
  return set;
}

bool on_bifurcation_surface(const ModelParams& p, double width) noexcept {
  return std::abs(p.f0Q() - p.f1Qp()) <= width || std::abs(p.f0Q() - p.f2()) <= width ||
         std::abs(p.f1Qp() - p.f2()) <= width;
}

bool on_attractor_boundary(const ModelParams& p, double width) noexcept {
  std::array<double, 3> r{p.f0Q(), p.f1Qp(), p.f2()};
  std::sort(r.begin(), r.end());
  return r[2] - r[1] <= width;
}

Equilibrium classify_analytic(const ModelParams& p) {
  if (on_attractor_boundary(p)) {
    throw Error(ErrorCode::Degenerate, "parameters lie on a bifurcation surface");
  }
  const EquilibriumSet set = all_equilibria(p);
  std::optional<Equilibrium> found;
  for (const auto& e : set.points) {
    if (!e || !e->exists || e->stability.kind != StabilityClass::Attractor) continue;
    if (found) throw Error(ErrorCode::Degenerate, "more than one attracting fixed point");
    found = e;
  }
  if (!found) throw Error(ErrorCode::Degenerate, "no attracting fixed point");
  return *found;
}

Equilibrium predicted_attractor(const ModelParams& p) {
  if (!on_attractor_boundary(p)) return classify_analytic(p);
  const EquilibriumSet set = all_equilibria(p);
  std::optional<Equilibrium> best;
  double best_top = std::numeric_limits<double>::infinity();
  for (const auto& e : set.points) {
    if (!e || !e->exists) continue;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& l : e->eigenvalues) top = std::max(top, l.real());
    if (top < best_top) {
      best_top = top;
      best = e;
    }
  }
  if (!best) throw Error(ErrorCode::Degenerate, "no fixed point exists");
  return *best;
}

}  // namespace qsdyn
