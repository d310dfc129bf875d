#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "qsdyn/error.hpp"
#include "qsdyn/model.hpp"
#include "support.hpp"

using namespace qsdyn;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("model parameters are validated") {
  CHECK_NOTHROW(ModelParams(0.3, 0.7, 0.42, 0.7, 0.3));
  CHECK(code_of([] { ModelParams(0.0, 0.7, 0.42, 0.7, 0.3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ModelParams(0.3, -1.0, 0.42, 0.7, 0.3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ModelParams(0.3, 0.7, 0.0, 0.7, 0.3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ModelParams(0.3, 0.7, 0.42, 1.0, 0.3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ModelParams(0.3, 0.7, 0.42, 0.7, 0.0); }) == ErrorCode::InvalidArgument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { ModelParams(nan, 0.7, 0.42, 0.7, 0.3); }) == ErrorCode::InvalidArgument);

  const ModelParams p(0.3, 0.7, 0.42, 0.7, 0.3);
  CHECK(p.mu0() == doctest::Approx(0.3));
  CHECK(p.mu1() == doctest::Approx(0.7));
  CHECK(p.f0Q() == doctest::Approx(0.21));
  CHECK(p.f1Qp() == doctest::Approx(0.21));
}

TEST_CASE("simplex states") {
  CHECK_NOTHROW(SimplexState::from(0.2, 0.3, 0.5));
  CHECK_NOTHROW(SimplexState::from(1.0, -1e-13, 1e-13));
  CHECK(code_of([] { SimplexState::from(0.5, 0.5, 0.1); }) == ErrorCode::InvalidState);
  CHECK(code_of([] { SimplexState::from(1.2, -0.2, 0.0); }) == ErrorCode::InvalidState);

  const SimplexState off{{0.2, 0.2, 0.2}};
  CHECK_FALSE(off.on_simplex());
  const auto fixed = off.renormalized();
  CHECK(fixed.on_simplex());
  CHECK(fixed[0] == doctest::Approx(1.0 / 3.0));
  // renormalization is explicit: the original is untouched
  CHECK(off.sum() == doctest::Approx(0.6));
}

TEST_CASE("mean fitness") {
  const ModelParams p(0.3, 0.7, 0.42, 0.7, 0.3);
  CHECK(mean_fitness(p, SimplexState{{1, 0, 0}}) == doctest::Approx(0.3));
  CHECK(mean_fitness(p, SimplexState{{0, 0, 1}}) == doctest::Approx(0.42));
  CHECK(mean_fitness(p, SimplexState{{0.5, 0.5, 0}}) == doctest::Approx(0.5));
}

TEST_CASE("vector field at known points") {
  const ModelParams p(0.3, 0.7, 0.42, 0.7, 0.3);
  const auto v = vector_field(p, SimplexState{{1, 0, 0}});
  CHECK(v[0] == doctest::Approx(-0.09));
  CHECK(v[1] == doctest::Approx(0.09));
  CHECK(v[2] == doctest::Approx(0.0));

  qstest::Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto q = rng.params();
    const auto z = vector_field(q, SimplexState{{0, 0, 1}});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == 0.0);
  }
}

TEST_CASE("vector field matches an independent transcription and is tangent to the simplex") {
  qstest::Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto p = rng.params();
    const auto s = rng.state();
    const auto v = vector_field(p, s);
    const auto w = qstest::field_oracle(p.f0(), p.f1(), p.f2(), p.Q(), p.Qp(), s.x);
    for (int k = 0; k < 3; ++k) CHECK(v[k] == doctest::Approx(w[k]).epsilon(1e-13));
    CHECK(std::abs(v[0] + v[1] + v[2]) <= 1e-14 * std::max(1.0, std::abs(p.f0()) + p.f1() + p.f2()));

    double dx[3];
    vector_field(p, std::span<const double, 3>(s.x.data(), 3), std::span<double, 3>(dx, 3));
    for (int k = 0; k < 3; ++k) CHECK(dx[k] == v[k]);
  }
}

TEST_CASE("jacobian matches central finite differences") {
  qstest::Rng rng(13);
  const double h = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = rng.params();
    const auto s = rng.state();
    const auto j = jacobian(p, s);
    double scale = 0.0;
    for (double v : j) scale = std::max(scale, std::abs(v));
    for (int c = 0; c < 3; ++c) {
      SimplexState up = s, dn = s;
      up.x[c] += h;
      dn.x[c] -= h;
      const auto fu = vector_field(p, up);
      const auto fd = vector_field(p, dn);
      for (int r = 0; r < 3; ++r) {
        const double fdiff = (fu[r] - fd[r]) / (2 * h);
        CHECK(std::abs(j[r * 3 + c] - fdiff) <= 1e-6 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("jacobian structure") {
  const ModelParams p(0.3, 2.1, 0.42, 0.7, 0.3);
  const auto j = jacobian(p, SimplexState{{0, 0.125, 0.875}});
  CHECK(j[1] == 0.0);  // -x0 f1 with x0 = 0
  const auto a = jacobian(p, SimplexState{{0, 0, 1}});
  // spectrum at (0,0,1): f0Q - f2, f1Q' - f2, -f2
  CHECK(a[0] == doctest::Approx(p.f0Q() - p.f2()));
  CHECK(qstest::trace(a) == doctest::Approx(p.f0Q() + p.f1Qp() - 3 * p.f2()));
  CHECK(qstest::det(a) ==
        doctest::Approx((p.f0Q() - p.f2()) * (p.f1Qp() - p.f2()) * -p.f2()));
}

TEST_CASE("general model validation") {
  CHECK_NOTHROW(GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.5, 0.5}, {0.9, 0.1, 0.2, 0.8}));
  auto bad_column = [] {
    GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.5, 0.5}, {0.9, 0.2, 0.2, 0.8});
  };
  CHECK(code_of(bad_column) == ErrorCode::MalformedKernel);
  auto bad_branch = [] {
    GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.6, 0.5}, {0.9, 0.1, 0.2, 0.8});
  };
  CHECK(code_of(bad_branch) == ErrorCode::MalformedKernel);
  auto negative = [] {
    GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.5, 0.5}, {1.1, -0.1, 0.2, 0.8});
  };
  CHECK(code_of(negative) == ErrorCode::MalformedKernel);
  auto bad_fitness = [] {
    GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.0}, {0.5, 0.5}, {0.9, 0.1, 0.2, 0.8});
  };
  CHECK(code_of(bad_fitness) == ErrorCode::InvalidArgument);
  auto bad_shape = [] { GeneralModel(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.5, 0.5}, {1.0, 0.0}); };
  CHECK(code_of(bad_shape) == ErrorCode::InvalidArgument);
}

TEST_CASE("kernel is stored column-major by source") {
  // column 0 = mutations out of subclone 0
  const GeneralModel g(0.3, 0.7, 0.7, 0.3, {0.42, 0.5}, {0.5, 0.5}, {0.9, 0.1, 0.2, 0.8});
  CHECK(g.kernel(0, 0) == 0.9);
  CHECK(g.kernel(1, 0) == 0.1);
  CHECK(g.kernel(0, 1) == 0.2);
  CHECK(g.kernel(1, 1) == 0.8);
}

TEST_CASE("assembled Markov matrix is column-stochastic") {
  qstest::Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.index(1, 8);
    std::vector<double> f2(n);
    for (auto& f : f2) f = rng.uniform(0.05, 3.0);
    const GeneralModel g(rng.uniform(0.05, 3), rng.uniform(0.05, 3), rng.uniform(0.02, 0.98),
                         rng.uniform(0.02, 0.98), f2, rng.simplex(n), rng.stochastic_kernel(n));
    const auto m = g.markov_matrix();
    const std::size_t d = n + 2;
    for (std::size_t c = 0; c < d; ++c) {
      double col = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        CHECK(m[r * d + c] >= 0.0);
        col += m[r * d + c];
      }
      CHECK(std::abs(col - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("one subclone reproduces the reduced field exactly") {
  qstest::Rng rng(15);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = rng.params();
    const GeneralModel g(p.f0(), p.f1(), p.Q(), p.Qp(), {p.f2()}, {1.0}, {1.0});
    const auto s = rng.state();
    const auto dg = g.vector_field(s.x);
    const auto dr = vector_field(p, s);
    for (int k = 0; k < 3; ++k) CHECK(dg[k] == dr[k]);
    CHECK(g.mean_fitness(s.x) == mean_fitness(p, s));
  }
}

TEST_CASE("a subclone vertex with identity kernel is stationary") {
  const GeneralModel g(0.3, 0.7, 0.7, 0.3, {0.42, 0.9, 0.1}, {0.2, 0.3, 0.5},
                       {1, 0, 0, 0, 1, 0, 0, 0, 1});
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> x(5, 0.0);
    x[i + 2] = 1.0;
    for (double v : g.vector_field(x)) CHECK(v == 0.0);
  }
}

TEST_CASE("equal subclone fitness aggregates to the reduced field") {
  qstest::Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = rng.params();
    const std::size_t n = 4;
    const GeneralModel g(p.f0(), p.f1(), p.Q(), p.Qp(), std::vector<double>(n, p.f2()),
                         rng.simplex(n), rng.stochastic_kernel(n));
    const auto x = rng.simplex(n + 2);
    const auto dx = g.vector_field(x);
    const auto agg = aggregate(x);
    const auto dr = vector_field(p, agg);
    double d2 = 0.0;
    for (std::size_t i = 2; i < n + 2; ++i) d2 += dx[i];
    CHECK(std::abs(dx[0] - dr[0]) <= 1e-12);
    CHECK(std::abs(dx[1] - dr[1]) <= 1e-12);
    CHECK(std::abs(d2 - dr[2]) <= 1e-12);
  }
}

TEST_CASE("aggregate") {
  const std::vector<double> x{0.2, 0.3, 0.1, 0.4};
  const auto a = aggregate(x);
  CHECK(a[0] == 0.2);
  CHECK(a[1] == 0.3);
  CHECK(a[2] == doctest::Approx(0.5));
  const std::vector<double> v{1, 0, 0, 0, 0};
  CHECK(aggregate(v).x == Vec3{1, 0, 0});
  const std::vector<double> short_state{0.5, 0.5};
  CHECK(code_of([&] { aggregate(short_state); }) == ErrorCode::InvalidArgument);

  qstest::Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto y = rng.simplex(rng.index(3, 10));
    CHECK(aggregate(y).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("distance is Euclidean") {
  CHECK(distance(SimplexState{{1, 0, 0}}, SimplexState{{0, 1, 0}}) == doctest::Approx(std::sqrt(2.0)));
}
