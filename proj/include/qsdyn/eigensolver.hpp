#ifndef QSDYN_EIGENSOLVER_HPP
#define QSDYN_EIGENSOLVER_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "qsdyn/model.hpp"

namespace qsdyn {

/// Dense square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  Matrix(std::size_t n, std::vector<double> row_major);
  static Matrix identity(std::size_t n);
  static Matrix from(const Mat3& m) { return Matrix(3, std::vector<double>(m.begin(), m.end())); }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  const std::vector<double>& data() const noexcept { return a_; }

  double frobenius_norm() const noexcept;
  std::vector<double> apply(const std::vector<double>& v) const;
  Matrix operator*(const Matrix& rhs) const;
  Matrix transposed() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct QRDecomposition {
  Matrix q;             // orthogonal
  Matrix r;             // upper triangular, exact zeros below the diagonal
  double det_q = 1.0;   // +-1, product of the reflector determinants

  double determinant() const noexcept;
  /// Solves A x = b as R x = Q^T b.
  std::vector<double> solve(const std::vector<double>& b) const;
};

/// Householder QR.
QRDecomposition qr_decompose(const Matrix& a);

struct PowerResult {
  double value = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
};

inline constexpr double kPowerTolerance = 1e-12;
inline constexpr std::size_t kPowerMaxIterations = 100000;

/// Eigenvalue of maximal modulus by normalized power iteration. The estimate
/// is the Rayleigh quotient; convergence needs its relative change to drop
/// below tol and the residual |Av - lv| below tol * |A|. Throws
/// Error(NoConvergence) after max_iter iterations.
PowerResult power_dominant(const Matrix& a, std::vector<double> v0 = {},
                           double tol = kPowerTolerance,
                           std::size_t max_iter = kPowerMaxIterations);

/// Eigenvalue of minimal modulus: power iteration on A^-1, applied through
/// the QR factors. Throws SingularMatrix when |det A| <= 1e-14 |A|^3.
PowerResult smallest_by_inverse(const Matrix& a, double tol = kPowerTolerance,
                                std::size_t max_iter = kPowerMaxIterations);

/// det(A) / (l_max * l_min), det from the QR factors. Throws
/// InaccurateInputs when the resulting triple does not reproduce the trace
/// and second invariant of A.
double third_by_determinant(const Matrix& a, double lambda_max, double lambda_min);

enum class EigenMethod { PowerTriple, Fallback };
const char* to_string(EigenMethod m) noexcept;

struct EigenReport {
  std::array<std::complex<double>, 3> values{};  // sorted by descending real part
  std::array<double, 3> residuals{};             // |Av - lv| / |v|
  std::array<std::size_t, 3> iterations{};       // power, inverse, determinant stage
  EigenMethod method = EigenMethod::PowerTriple;
};

/// Power / inverse / determinant triple with a closed-form cubic fallback.
/// Never throws for finite input.
EigenReport eigen3(const Mat3& a);

/// Roots of the characteristic polynomial of a 3x3 matrix.
std::array<std::complex<double>, 3> characteristic_roots(const Mat3& a);

}  // namespace qsdyn

#endif  // QSDYN_EIGENSOLVER_HPP
