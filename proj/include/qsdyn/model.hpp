#ifndef QSDYN_MODEL_HPP
#define QSDYN_MODEL_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace qsdyn {

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kIntegratedSimplexTolerance = 1e-10;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

/// Replication rates and copying fidelities of the reduced three-population
/// system. Immutable once constructed.
class ModelParams {
 public:
  /// Throws Error(InvalidArgument) unless f0, f1, f2 > 0 and Q, Qp in (0,1).
  ModelParams(double f0, double f1, double f2, double Q, double Qp);

  double f0() const noexcept { return f0_; }
  double f1() const noexcept { return f1_; }
  double f2() const noexcept { return f2_; }
  double Q() const noexcept { return Q_; }
  double Qp() const noexcept { return Qp_; }
  double mu0() const noexcept { return 1.0 - Q_; }
  double mu1() const noexcept { return 1.0 - Qp_; }

  double f0Q() const noexcept { return f0_ * Q_; }
  double f1Qp() const noexcept { return f1_ * Qp_; }

 private:
  double f0_, f1_, f2_, Q_, Qp_;
};

/// Population fractions (x0, x1, x2).
struct SimplexState {
  Vec3 x{1.0, 0.0, 0.0};

  /// Validating constructor: components >= -tol and |sum - 1| <= tol.
  static SimplexState from(double x0, double x1, double x2,
                           double tol = kSimplexTolerance);

  double sum() const noexcept { return x[0] + x[1] + x[2]; }
  bool on_simplex(double tol = kSimplexTolerance) const noexcept;

  /// Explicit projection back onto the simplex (divide by the sum).
  SimplexState renormalized() const;

  double operator[](std::size_t i) const noexcept { return x[i]; }
};

double distance(const SimplexState& a, const SimplexState& b) noexcept;

double mean_fitness(const ModelParams& p, const SimplexState& s) noexcept;
Vec3 vector_field(const ModelParams& p, const SimplexState& s) noexcept;
Mat3 jacobian(const ModelParams& p, const SimplexState& s) noexcept;

// Raw-span form used by the integrator; no simplex validation.
void vector_field(const ModelParams& p, std::span<const double, 3> x,
                  std::span<double, 3> dx) noexcept;

/// n-subclone model: x = (x0, x1, x2^1 .. x2^n).
///
/// The mutation kernel is stored column-major by mutation source, so
/// `kernel(i, j)` (probability j -> i) lives at `mmu[j * n + i]` and each
/// column is a contiguous run.
class GeneralModel {
 public:
  GeneralModel(double f0, double f1, double Q, double Qp,
               std::vector<double> f2, std::vector<double> qprime,
               std::vector<double> mmu_column_major);

  std::size_t subclones() const noexcept { return f2_.size(); }
  std::size_t dimension() const noexcept { return f2_.size() + 2; }

  double f0() const noexcept { return f0_; }
  double f1() const noexcept { return f1_; }
  double Q() const noexcept { return Q_; }
  double Qp() const noexcept { return Qp_; }
  std::span<const double> f2() const noexcept { return f2_; }
  std::span<const double> qprime() const noexcept { return qprime_; }
  double kernel(std::size_t i, std::size_t j) const noexcept {
    return mmu_[j * f2_.size() + i];
  }

  /// The full (n+2)x(n+2) column-stochastic matrix M, row-major.
  std::vector<double> markov_matrix() const;

  double mean_fitness(std::span<const double> x) const noexcept;
  void vector_field(std::span<const double> x, std::span<double> dx) const noexcept;
  std::vector<double> vector_field(std::span<const double> x) const;

 private:
  double f0_, f1_, Q_, Qp_;
  std::vector<double> f2_, qprime_, mmu_;
  std::vector<double> branch_;  // (1 - Qp) q'_i
};

/// (x0, x1, sum_i x2^i).
SimplexState aggregate(std::span<const double> state);

}  // namespace qsdyn

#endif  // QSDYN_MODEL_HPP
