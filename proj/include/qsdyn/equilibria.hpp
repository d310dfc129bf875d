#ifndef QSDYN_EQUILIBRIA_HPP
#define QSDYN_EQUILIBRIA_HPP

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "qsdyn/eigensolver.hpp"
#include "qsdyn/model.hpp"

namespace qsdyn {

enum class FixedPointKind { UnstableDominance, MutatorCoexistence, FullCoexistence };
const char* to_string(FixedPointKind k) noexcept;

enum class StabilityClass { Attractor, Saddle, Unresolved };

/// Attractor, Saddle(k) with k unstable directions, or Unresolved when some
/// eigenvalue has |Re| within the degeneracy width of zero.
struct Stability {
  StabilityClass kind = StabilityClass::Unresolved;
  int unstable_dimension = 0;

  std::string label() const;
  bool operator==(const Stability&) const = default;
};

enum class EigenSource { Analytic, Numeric };

struct Equilibrium {
  FixedPointKind kind = FixedPointKind::UnstableDominance;
  SimplexState coords;
  bool exists = false;
  std::vector<std::string> violated;  // failed existence conditions
  std::array<std::complex<double>, 3> eigenvalues{};
  EigenSource eigen_source = EigenSource::Analytic;
  EigenMethod numeric_method = EigenMethod::PowerTriple;  // when Numeric
  Stability stability;
};

/// Width around bifurcation surfaces (and around Re(lambda) = 0) inside which
/// stability is treated as undecidable.
inline constexpr double kDegeneracyWidth = 1e-10;
inline constexpr double kDegenerateFitnessWidth = 1e-12;
inline constexpr double kSingularDenominatorWidth = 1e-14;
inline constexpr double kMembershipTolerance = 1e-12;

Stability classify_stability(const std::array<std::complex<double>, 3>& eigenvalues);

/// (f0Q - f2, f1Q' - f2, -f2): spectrum of the Jacobian at (0,0,1).
std::array<double, 3> eigen_unstable_dominance(const ModelParams& p);

/// (f0Q - f1Q', f2 - f1Q', -f1Q'): spectrum of the Jacobian at
/// (0, x1*, x2*). Throws DegenerateFitness when f1 = f2.
std::array<double, 3> eigen_mutator_coexistence(const ModelParams& p);

Equilibrium fixed_point_unstable_dominance(const ModelParams& p);
/// Throws DegenerateFitness when |f1 - f2| < 1e-12.
Equilibrium fixed_point_mutator_coexistence(const ModelParams& p);
/// Eigenvalues are numeric (eigen3 on the Jacobian). Throws
/// SingularDenominator when |phi| < 1e-14.
Equilibrium fixed_point_full_coexistence(const ModelParams& p);

/// Denominator of the full-coexistence point; equals the sum of the three
/// numerators, so the coordinates sum to one identically.
double full_coexistence_denominator(const ModelParams& p) noexcept;

struct CriticalMutationRates {
  double mu0;  // 1 - f2/f0 clamped to [0,1]
  double mu1;  // 1 - f2/f1 clamped to [0,1]
};
CriticalMutationRates critical_mutation_rates(const ModelParams& p) noexcept;

/// All three branches; a branch whose constructor throws is reported as
/// absent with the error code's name in `violated`.
struct EquilibriumSet {
  std::array<std::optional<Equilibrium>, 3> points;
  std::array<std::string, 3> errors;
};
EquilibriumSet all_equilibria(const ModelParams& p);

/// True if (f0Q, f1Q', f2) lies within `width` of f0Q=f1Q', f0Q=f2 or f1Q'=f2.
bool on_bifurcation_surface(const ModelParams& p, double width = kDegeneracyWidth) noexcept;

/// The part of the bifurcation surfaces where the attractor changes: the two
/// largest of f0Q, f1Q', f2 coincide. A tie between the two smaller rates
/// swaps saddles only.
bool on_attractor_boundary(const ModelParams& p, double width = kDegeneracyWidth) noexcept;

/// The unique attracting fixed point. Throws Degenerate on an attractor
/// boundary. f1 = f2 only removes the mutator branch.
Equilibrium classify_analytic(const ModelParams& p);

/// classify_analytic off the attractor boundaries; on them, the existing
/// fixed point whose largest eigenvalue real part is smallest (the colliding,
/// marginally stable point).
Equilibrium predicted_attractor(const ModelParams& p);

}  // namespace qsdyn

#endif  // QSDYN_EQUILIBRIA_HPP
