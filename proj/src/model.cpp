#include "qsdyn/model.hpp"

#include <cmath>
#include <string>

#include "qsdyn/error.hpp"

namespace qsdyn {

namespace {

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

}  // namespace

ModelParams::ModelParams(double f0, double f1, double f2, double Q, double Qp)
    : f0_(f0), f1_(f1), f2_(f2), Q_(Q), Qp_(Qp) {
  require(std::isfinite(f0) && f0 > 0.0, ErrorCode::InvalidArgument, "f0 must be > 0");
  require(std::isfinite(f1) && f1 > 0.0, ErrorCode::InvalidArgument, "f1 must be > 0");
  require(std::isfinite(f2) && f2 > 0.0, ErrorCode::InvalidArgument, "f2 must be > 0");
  require(open_unit(Q), ErrorCode::InvalidArgument, "Q must lie in (0,1)");
  require(open_unit(Qp), ErrorCode::InvalidArgument, "Qp must lie in (0,1)");
}

SimplexState SimplexState::from(double x0, double x1, double x2, double tol) {
  SimplexState s{{x0, x1, x2}};
  if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(x2) ||
      !s.on_simplex(tol)) {
    throw Error(ErrorCode::InvalidState,
                "state (" + std::to_string(x0) + ", " + std::to_string(x1) + ", " +
                    std::to_string(x2) + ") is not on the simplex");
  }
  return s;
}

bool SimplexState::on_simplex(double tol) const noexcept {
  return x[0] >= -tol && x[1] >= -tol && x[2] >= -tol && std::abs(sum() - 1.0) <= tol;
}

SimplexState SimplexState::renormalized() const {
  const double s = sum();
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidState, "cannot renormalize a state with sum <= 0");
  return SimplexState{{x[0] / s, x[1] / s, x[2] / s}};
}

double distance(const SimplexState& a, const SimplexState& b) noexcept {
  const double d0 = a.x[0] - b.x[0];
  const double d1 = a.x[1] - b.x[1];
  const double d2 = a.x[2] - b.x[2];
  return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

double mean_fitness(const ModelParams& p, const SimplexState& s) noexcept {
  return p.f0() * s.x[0] + p.f1() * s.x[1] + p.f2() * s.x[2];
}

// The arithmetic is ordered exactly like GeneralModel::vector_field with a
// single subclone, so both produce bit-identical rates.
void vector_field(const ModelParams& p, std::span<const double, 3> x,
                  std::span<double, 3> dx) noexcept {
  const double g0 = p.f0() * x[0];
  const double g1 = p.f1() * x[1];
  const double g2 = p.f2() * x[2];
  const double phi = g0 + g1 + g2;
  const double y0 = p.Q() * g0;
  const double y1 = (1.0 - p.Q()) * g0 + p.Qp() * g1;
  const double y2 = (1.0 - p.Qp()) * g1 + g2;
  dx[0] = y0 - phi * x[0];
  dx[1] = y1 - phi * x[1];
  dx[2] = y2 - phi * x[2];
}

Vec3 vector_field(const ModelParams& p, const SimplexState& s) noexcept {
  Vec3 dx{};
  vector_field(p, std::span<const double, 3>(s.x), std::span<double, 3>(dx));
  return dx;
}

Mat3 jacobian(const ModelParams& p, const SimplexState& s) noexcept {
  const double f0 = p.f0(), f1 = p.f1(), f2 = p.f2();
  const double x0 = s.x[0], x1 = s.x[1], x2 = s.x[2];
  const double phi = mean_fitness(p, s);
  return Mat3{
      f0 * p.Q() - phi - x0 * f0,   -x0 * f1,                          -x0 * f2,
      f0 * p.mu0() - x1 * f0,       f1 * p.Qp() - phi - x1 * f1,       -x1 * f2,
      -x2 * f0,                     f1 * p.mu1() - x2 * f1,            f2 - phi - x2 * f2,
  };
}

GeneralModel::GeneralModel(double f0, double f1, double Q, double Qp,
                           std::vector<double> f2, std::vector<double> qprime,
                           std::vector<double> mmu_column_major)
    : f0_(f0), f1_(f1), Q_(Q), Qp_(Qp), f2_(std::move(f2)),
      qprime_(std::move(qprime)), mmu_(std::move(mmu_column_major)) {
  // Reuse the scalar checks; f2 is validated per subclone below.
  (void)ModelParams(f0, f1, 1.0, Q, Qp);
  const std::size_t n = f2_.size();
  require(n >= 1, ErrorCode::InvalidArgument, "at least one subclone is required");
  require(qprime_.size() == n, ErrorCode::InvalidArgument, "qprime must have n entries");
  require(mmu_.size() == n * n, ErrorCode::InvalidArgument, "mutation kernel must be n x n");
  for (double f : f2_) {
    require(std::isfinite(f) && f > 0.0, ErrorCode::InvalidArgument, "every f2^j must be > 0");
  }

  constexpr double tol = 1e-12;
  double qsum = 0.0;
  for (double q : qprime_) {
    require(std::isfinite(q) && q >= 0.0 && q <= 1.0, ErrorCode::MalformedKernel,
            "branching probabilities must lie in [0,1]");
    qsum += q;
  }
  require(std::abs(qsum - 1.0) <= tol, ErrorCode::MalformedKernel,
          "branching probabilities must sum to 1");
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = mmu_[j * n + i];
      require(std::isfinite(m) && m >= 0.0 && m <= 1.0, ErrorCode::MalformedKernel,
              "mutation kernel entries must lie in [0,1]");
      col += m;
    }
    require(std::abs(col - 1.0) <= tol, ErrorCode::MalformedKernel,
            "mutation kernel column " + std::to_string(j) + " does not sum to 1");
  }

  branch_.resize(n);
  for (std::size_t i = 0; i < n; ++i) branch_[i] = (1.0 - Qp_) * qprime_[i];
}

std::vector<double> GeneralModel::markov_matrix() const {
  const std::size_t n = subclones();
  const std::size_t d = n + 2;
  std::vector<double> m(d * d, 0.0);
  m[0 * d + 0] = Q_;
  m[1 * d + 0] = 1.0 - Q_;
  m[1 * d + 1] = Qp_;
  for (std::size_t i = 0; i < n; ++i) {
    m[(i + 2) * d + 1] = branch_[i];
    for (std::size_t j = 0; j < n; ++j) m[(i + 2) * d + (j + 2)] = kernel(i, j);
  }
  return m;
}

double GeneralModel::mean_fitness(std::span<const double> x) const noexcept {
  double phi = f0_ * x[0] + f1_ * x[1];
  for (std::size_t i = 0; i < f2_.size(); ++i) phi += f2_[i] * x[i + 2];
  return phi;
}

void GeneralModel::vector_field(std::span<const double> x,
                                std::span<double> dx) const noexcept {
  const std::size_t n = f2_.size();
  const double g0 = f0_ * x[0];
  const double g1 = f1_ * x[1];
  double phi = g0 + g1;
  for (std::size_t j = 0; j < n; ++j) phi += f2_[j] * x[j + 2];

  dx[0] = Q_ * g0 - phi * x[0];
  dx[1] = ((1.0 - Q_) * g0 + Qp_ * g1) - phi * x[1];
  for (std::size_t i = 0; i < n; ++i) {
    double acc = branch_[i] * g1;
    for (std::size_t j = 0; j < n; ++j) acc += mmu_[j * n + i] * (f2_[j] * x[j + 2]);
    dx[i + 2] = acc - phi * x[i + 2];
  }
}

std::vector<double> GeneralModel::vector_field(std::span<const double> x) const {
  std::vector<double> dx(dimension());
  vector_field(x, dx);
  return dx;
}

SimplexState aggregate(std::span<const double> state) {
  if (state.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "state must have at least three components");
  }
  double x2 = 0.0;
  for (std::size_t i = 2; i < state.size(); ++i) x2 += state[i];
  return SimplexState{{state[0], state[1], x2}};
}

}  // namespace qsdyn
