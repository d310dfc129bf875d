#include "qsdyn/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsdyn/error.hpp"

namespace qsdyn {

using cd = std::complex<double>;

Matrix::Matrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
  if (a_.size() != n * n) throw Error(ErrorCode::InvalidArgument, "matrix data is not n x n");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

std::vector<double> Matrix::apply(const std::vector<double>& v) const {
  std::vector<double> w(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += a_[i * n_ + j] * v[j];
    w[i] = acc;
  }
  return w;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  Matrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const double aik = (*this)(i, k);
      for (std::size_t j = 0; j < n_; ++j) out(i, j) += aik * rhs(k, j);
    }
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double QRDecomposition::determinant() const noexcept {
  double d = det_q;
  for (std::size_t i = 0; i < r.size(); ++i) d *= r(i, i);
  return d;
}

std::vector<double> QRDecomposition::solve(const std::vector<double>& b) const {
  const std::size_t n = r.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += q(k, i) * b[k];
    y[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= r(ii, j) * y[j];
    y[ii] = acc / r(ii, ii);
  }
  return y;
}

QRDecomposition qr_decompose(const Matrix& a) {
  const std::size_t n = a.size();
  QRDecomposition out{Matrix::identity(n), a, 1.0};
  Matrix& q = out.q;
  Matrix& r = out.r;
  std::vector<double> v(n);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += r(i, k) * r(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;

    const double alpha = r(k, k) > 0.0 ? -norm : norm;
    double vnorm = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      v[i] = r(i, k) - (i == k ? alpha : 0.0);
      vnorm += v[i] * v[i];
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (std::size_t i = k; i < n; ++i) v[i] /= vnorm;

    // R <- H R, Q <- Q H with H = I - 2 v v^T.
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * r(i, j);
      for (std::size_t i = k; i < n; ++i) r(i, j) -= 2.0 * v[i] * dot;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = k; j < n; ++j) dot += q(i, j) * v[j];
      for (std::size_t j = k; j < n; ++j) q(i, j) -= 2.0 * dot * v[j];
    }
    out.det_q = -out.det_q;
  }
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) r(i, j) = 0.0;
  return out;
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> start_vector(std::size_t n, std::vector<double> v0) {
  if (v0.empty()) v0.assign(n, 1.0 / static_cast<double>(n));
  if (v0.size() != n) throw Error(ErrorCode::InvalidArgument, "start vector has the wrong size");
  const double nv = norm2(v0);
  if (!(nv > 0.0)) throw Error(ErrorCode::InvalidArgument, "start vector must be nonzero");
  for (double& x : v0) x /= nv;
  return v0;
}

bool settled(double value, double previous, double tol, double scale) {
  return std::abs(value - previous) <= tol * std::max(std::abs(value), tol * scale);
}

double pair_residual(const Matrix& a, const std::vector<double>& v, double lambda) {
  const std::vector<double> av = a.apply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = av[i] - lambda * v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

PowerResult power_dominant(const Matrix& a, std::vector<double> v0, double tol,
                           std::size_t max_iter) {
  const std::size_t n = a.size();
  std::vector<double> v = start_vector(n, std::move(v0));
  const double scale = a.frobenius_norm();
  double previous = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> w = a.apply(v);
    const double nw = norm2(w);
    if (nw == 0.0) return {0.0, v, it};

    const double lambda = dot(v, w);  // Rayleigh quotient, |v| = 1
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
    res = std::sqrt(res);

    if (it > 1 && settled(lambda, previous, tol, scale) && res <= tol * scale) {
      return {lambda, v, it};
    }
    previous = lambda;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  throw Error(ErrorCode::NoConvergence, "power iteration did not converge");
}

PowerResult smallest_by_inverse(const Matrix& a, double tol, std::size_t max_iter) {
  const std::size_t n = a.size();
  const double scale = a.frobenius_norm();
  const QRDecomposition qr = qr_decompose(a);
  const double det = qr.determinant();
  if (!(std::abs(det) > 1e-14 * scale * scale * scale)) {
    throw Error(ErrorCode::SingularMatrix, "matrix is singular to working precision");
  }

  std::vector<double> v = start_vector(n, {});
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> w = qr.solve(v);
    const double nw = norm2(w);
    if (!(nw > 0.0) || !std::isfinite(nw)) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;

    // The sign is recovered from A's own Rayleigh quotient on the iterate.
    const double lambda = dot(v, a.apply(v));
    if (it > 1 && settled(lambda, previous, tol, scale) &&
        pair_residual(a, v, lambda) <= tol * scale) {
      return {lambda, v, it};
    }
    previous = lambda;
  }
  throw Error(ErrorCode::NoConvergence, "inverse iteration did not converge");
}

namespace {

struct Invariants {
  double trace, second, det;
};

Invariants invariants(const Mat3& m) {
  const double tr = m[0] + m[4] + m[8];
  const double c2 = (m[0] * m[4] - m[1] * m[3]) + (m[0] * m[8] - m[2] * m[6]) +
                    (m[4] * m[8] - m[5] * m[7]);
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  return {tr, c2, det};
}

Mat3 to_mat3(const Matrix& a) {
  Mat3 m{};
  std::copy(a.data().begin(), a.data().end(), m.begin());
  return m;
}

double frob(const Mat3& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

constexpr double kIdentityTolerance = 1e-9;

}  // namespace

double third_by_determinant(const Matrix& a, double lambda_max, double lambda_min) {
  if (a.size() != 3) throw Error(ErrorCode::InvalidArgument, "third_by_determinant needs a 3x3 matrix");
  const double det = qr_decompose(a).determinant();
  const double denom = lambda_max * lambda_min;
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw Error(ErrorCode::InaccurateInputs, "extreme eigenvalues must be finite and nonzero");
  }
  const double mid = det / denom;

  const Invariants inv = invariants(to_mat3(a));
  const double scale = a.frobenius_norm();
  const double trace_gap = std::abs(lambda_max + mid + lambda_min - inv.trace);
  const double second_gap =
      std::abs(lambda_max * mid + lambda_max * lambda_min + mid * lambda_min - inv.second);
  if (!(trace_gap <= kIdentityTolerance * scale) ||
      !(second_gap <= kIdentityTolerance * scale * scale)) {
    throw Error(ErrorCode::InaccurateInputs,
                "eigenvalue triple does not reproduce the characteristic polynomial");
  }
  return mid;
}

std::array<cd, 3> characteristic_roots(const Mat3& a) {
  const double scale = frob(a);
  if (scale == 0.0 || !std::isfinite(scale)) return {cd{0.0}, cd{0.0}, cd{0.0}};

  Mat3 m = a;
  for (double& v : m) v /= scale;
  const Invariants inv = invariants(m);
  const double c1 = inv.trace, c2 = inv.second, c3 = inv.det;
  auto poly = [&](double l) { return ((l - c1) * l + c2) * l - c3; };
  auto dpoly = [&](double l) { return (3.0 * l - 2.0 * c1) * l + c2; };
  auto polish = [&](double l) {
    for (int k = 0; k < 4; ++k) {
      const double d = dpoly(l);
      if (d == 0.0) break;
      const double next = l - poly(l) / d;
      if (!(std::abs(poly(next)) < std::abs(poly(l)))) break;
      l = next;
    }
    return l;
  };

  // l = t + c1/3 turns l^3 - c1 l^2 + c2 l - c3 into t^3 + p t + q.
  const double shift = c1 / 3.0;
  const double p = c2 - c1 * c1 / 3.0;
  const double q = -2.0 * c1 * c1 * c1 / 27.0 + c1 * c2 / 3.0 - c3;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::array<cd, 3> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(q > 0.0 ? -0.5 * q - sq : -0.5 * q + sq);
    const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
    const double r = polish(u + v + shift);
    // Deflate: the remaining pair has sum c1 - r and product c2 - r (c1 - r).
    const double s = c1 - r;
    const double prod = c2 - r * s;
    const double qd = s * s - 4.0 * prod;
    if (qd < 0.0) {
      const double im = 0.5 * std::sqrt(-qd);
      roots = {cd{r, 0.0}, cd{0.5 * s, im}, cd{0.5 * s, -im}};
    } else {
      const double t = -0.5 * (-s + (s >= 0.0 ? -1.0 : 1.0) * std::sqrt(qd));
      const double r1 = t;
      const double r2 = t != 0.0 ? prod / t : 0.0;
      roots = {cd{r, 0.0}, cd{r1, 0.0}, cd{r2, 0.0}};
    }
  } else if (p == 0.0) {
    roots = {cd{shift}, cd{shift}, cd{shift}};
  } else {
    const double rad = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double t = rad * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
      roots[static_cast<std::size_t>(k)] = cd{polish(t + shift), 0.0};
    }
  }
  for (cd& r : roots) r *= scale;
  return roots;
}

const char* to_string(EigenMethod m) noexcept {
  return m == EigenMethod::PowerTriple ? "PowerTriple" : "Fallback";
}

namespace {

using CVec = std::array<cd, 3>;

CVec cross(const CVec& a, const CVec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double cnorm(const CVec& v) {
  return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
}

double residual_of(const Mat3& a, cd lambda, const CVec& v) {
  CVec r{};
  for (std::size_t i = 0; i < 3; ++i) {
    cd acc = -lambda * v[i];
    for (std::size_t j = 0; j < 3; ++j) acc += a[i * 3 + j] * v[j];
    r[i] = acc;
  }
  return cnorm(r) / cnorm(v);
}

// Best eigenvector residual over null-space candidates of A - lambda I:
// cross products of row pairs, and vectors orthogonal to the largest row for
// the rank-deficient cases.
double eigen_residual(const Mat3& a, cd lambda) {
  std::array<CVec, 3> rows;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      rows[i][j] = cd{a[i * 3 + j]} - (i == j ? lambda : cd{0.0});

  std::vector<CVec> candidates{cross(rows[0], rows[1]), cross(rows[0], rows[2]),
                               cross(rows[1], rows[2])};
  std::size_t big = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (cnorm(rows[i]) > cnorm(rows[big])) big = i;
  for (std::size_t k = 0; k < 3; ++k) {
    CVec e{};
    e[k] = 1.0;
    candidates.push_back(cross(rows[big], e));
    candidates.push_back(e);
  }

  double best = std::numeric_limits<double>::infinity();
  for (const CVec& v : candidates) {
    const double nv = cnorm(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) continue;
    best = std::min(best, residual_of(a, lambda, v));
  }
  return best;
}

void sort_descending(EigenReport& rep) {
  std::array<std::size_t, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    if (rep.values[i].real() != rep.values[j].real())
      return rep.values[i].real() > rep.values[j].real();
    return rep.values[i].imag() > rep.values[j].imag();
  });
  EigenReport sorted = rep;
  for (std::size_t k = 0; k < 3; ++k) {
    sorted.values[k] = rep.values[idx[k]];
    sorted.residuals[k] = rep.residuals[idx[k]];
  }
  rep.values = sorted.values;
  rep.residuals = sorted.residuals;
}

EigenReport fallback_report(const Mat3& a, const std::array<cd, 3>& roots,
                            std::array<std::size_t, 3> iterations) {
  EigenReport rep;
  rep.method = EigenMethod::Fallback;
  rep.values = roots;
  rep.iterations = iterations;
  for (std::size_t k = 0; k < 3; ++k) rep.residuals[k] = eigen_residual(a, roots[k]);
  sort_descending(rep);
  return rep;
}

// Relative modulus gap below which the power method would need more than
// ~3e4 iterations to reach 1e-12; such spectra go straight to the fallback.
constexpr double kModulusTieGap = 1e-3;

bool modulus_tie(const std::array<cd, 3>& roots, double scale) {
  for (const cd& r : roots)
    if (std::abs(r.imag()) > 1e-12 * scale) return true;  // conjugate pair
  std::array<double, 3> mods{std::abs(roots[0]), std::abs(roots[1]), std::abs(roots[2])};
  std::sort(mods.begin(), mods.end());
  auto close = [](double lo, double hi) { return hi == 0.0 || (hi - lo) <= kModulusTieGap * hi; };
  return close(mods[1], mods[2]) || close(mods[0], mods[1]);
}

}  // namespace

EigenReport eigen3(const Mat3& a) {
  const double scale = frob(a);
  const std::array<cd, 3> roots = characteristic_roots(a);
  if (scale == 0.0 || !std::isfinite(scale) || modulus_tie(roots, scale)) {
    return fallback_report(a, roots, {0, 0, 0});
  }

  const Matrix m = Matrix::from(a);
  std::array<std::size_t, 3> iterations{0, 0, 0};
  try {
    const PowerResult top = power_dominant(m);
    iterations[0] = top.iterations;
    const PowerResult low = smallest_by_inverse(m);
    iterations[1] = low.iterations;
    const double mid = third_by_determinant(m, top.value, low.value);
    iterations[2] = 1;

    EigenReport rep;
    rep.method = EigenMethod::PowerTriple;
    rep.iterations = iterations;
    rep.values = {cd{top.value}, cd{mid}, cd{low.value}};
    rep.residuals = {pair_residual(m, top.vector, top.value), eigen_residual(a, cd{mid}),
                     pair_residual(m, low.vector, low.value)};
    const bool ordered = std::abs(top.value) >= std::abs(mid) && std::abs(mid) >= std::abs(low.value);
    const bool accurate = std::all_of(rep.residuals.begin(), rep.residuals.end(),
                                      [&](double r) { return r <= 1e-8 * scale; });
    if (ordered && accurate) {
      sort_descending(rep);
      return rep;
    }
  } catch (const Error&) {
    // NoConvergence, SingularMatrix or InaccurateInputs: fall through.
  }
  return fallback_report(a, roots, iterations);
}

}  // namespace qsdyn
