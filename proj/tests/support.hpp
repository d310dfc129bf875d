// Shared generators and oracles for the test binaries.
#ifndef QSDYN_TESTS_SUPPORT_HPP
#define QSDYN_TESTS_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qsdyn/model.hpp"

namespace qstest {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
  }

  qsdyn::ModelParams params() {
    return qsdyn::ModelParams(uniform(0.05, 3.0), uniform(0.05, 3.0), uniform(0.05, 3.0),
                              uniform(0.02, 0.98), uniform(0.02, 0.98));
  }

  // Uniform on the simplex (normalized exponentials).
  std::vector<double> simplex(std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(n);
    double s = 0.0;
    for (auto& v : x) s += (v = e(gen_));
    for (auto& v : x) v /= s;
    return x;
  }

  qsdyn::SimplexState state() {
    const auto x = simplex(3);
    return qsdyn::SimplexState{{x[0], x[1], x[2]}};
  }

  // n columns, each a point on the simplex: column-major stochastic kernel.
  std::vector<double> stochastic_kernel(std::size_t n) {
    std::vector<double> m;
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = simplex(n);
      m.insert(m.end(), col.begin(), col.end());
    }
    return m;
  }

  qsdyn::Mat3 matrix(double lo, double hi) {
    qsdyn::Mat3 a;
    for (auto& v : a) v = uniform(lo, hi);
    return a;
  }

 private:
  std::mt19937_64 gen_;
};

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline std::array<double, 3> sorted_desc(std::array<double, 3> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

inline double trace(const qsdyn::Mat3& a) { return a[0] + a[4] + a[8]; }

inline double det(const qsdyn::Mat3& a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

inline double frobenius(const qsdyn::Mat3& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// Direct transcription of the reduced field, written independently of the
// library for use as an oracle.
inline std::array<double, 3> field_oracle(double f0, double f1, double f2, double Q, double Qp,
                                          const std::array<double, 3>& x) {
  const double phi = f0 * x[0] + f1 * x[1] + f2 * x[2];
  return {f0 * Q * x[0] - phi * x[0],
          f0 * (1 - Q) * x[0] + f1 * Qp * x[1] - phi * x[1],
          f1 * (1 - Qp) * x[1] + f2 * x[2] - phi * x[2]};
}

// Full-coexistence fixed point and its spectrum in closed form (derived from
// the triangular growth matrix); the library only computes this spectrum
// numerically.
inline std::array<double, 3> full_coexistence_oracle(const qsdyn::ModelParams& p) {
  const double a = p.f0Q(), b = p.f1Qp(), f2 = p.f2();
  const double n0 = (a - b) * (a - f2);
  const double n1 = p.f0() * (1 - p.Q()) * (a - f2);
  const double n2 = p.f1() * (1 - p.Qp()) * p.f0() * (1 - p.Q());
  const double s = n0 + n1 + n2;
  return {n0 / s, n1 / s, n2 / s};
}

inline std::array<double, 3> full_coexistence_spectrum(const qsdyn::ModelParams& p) {
  return sorted_desc({p.f1Qp() - p.f0Q(), p.f2() - p.f0Q(), -p.f0Q()});
}

}  // namespace qstest

#endif  // QSDYN_TESTS_SUPPORT_HPP
