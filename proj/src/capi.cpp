#include "qsdyn/qsdyn.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "qsdyn/csv.hpp"
#include "qsdyn/eigensolver.hpp"
#include "qsdyn/equilibria.hpp"
#include "qsdyn/error.hpp"
#include "qsdyn/integrator.hpp"
#include "qsdyn/model.hpp"
#include "qsdyn/sweep.hpp"

struct qs_model {
  qsdyn::ModelParams params;
};

struct qs_general_model {
  qsdyn::GeneralModel model;
};

struct qs_orbit {
  std::size_t width = 0;
  std::vector<double> data;  // rows of `width`
  qs_orbit_summary summary{};
};

struct qs_grid {
  qsdyn::SweepGrid grid;
};

struct qs_section {
  qsdyn::Section section;
};

namespace {

thread_local std::string last_error;

qs_status fail(qs_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

qs_status status_of(qsdyn::ErrorCode c) { return static_cast<qs_status>(static_cast<int>(c)); }

// Runs `body`, translating exceptions into status codes.
template <class F>
qs_status guarded(F&& body) noexcept {
  try {
    body();
    return QS_OK;
  } catch (const qsdyn::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QS_ERR_INTERNAL, "unknown exception");
  }
}

qs_status null_arg(const char* name) {
  return fail(QS_ERR_INVALID_ARGUMENT, std::string("null argument: ") + name);
}

qsdyn::SimplexState state_of(const double s[3]) { return qsdyn::SimplexState{{s[0], s[1], s[2]}}; }

qsdyn::IntegratorConfig config_of(const qs_integrator_config* c) {
  qsdyn::IntegratorConfig cfg;
  if (c) {
    cfg.abs_tol = c->abs_tol;
    cfg.rel_tol = c->rel_tol;
    cfg.h_init = c->h_init;
    cfg.h_max = c->h_max;
    cfg.t_max = c->t_max;
    cfg.drift_tol = c->drift_tol;
  }
  return cfg;
}

qs_kind kind_of(qsdyn::FixedPointKind k) { return static_cast<qs_kind>(static_cast<int>(k)); }
qs_kind kind_of(qsdyn::Outcome o) { return static_cast<qs_kind>(static_cast<int>(o)); }

qsdyn::SweepSpec spec_of(const qs_sweep_spec& s) {
  qsdyn::SweepSpec spec;
  spec.Q = s.Q;
  spec.Qp = s.Qp;
  spec.f2 = s.f2;
  spec.f0 = {s.f0.min, s.f0.max, s.f0.step};
  spec.f1 = {s.f1.min, s.f1.max, s.f1.step};
  spec.classify_tol = s.classify_tol;
  spec.transient_tol = s.transient_tol;
  spec.initial = state_of(s.initial);
  spec.integrator = config_of(&s.integrator);
  return spec;
}

qs_cell cell_of(const qsdyn::SweepCell& c) {
  qs_cell out{};
  out.f0 = c.f0;
  out.f1 = c.f1;
  out.f0Q = c.f0Q;
  out.f1Qp = c.f1Qp;
  out.outcome = kind_of(c.outcome);
  std::copy(c.densities.x.begin(), c.densities.x.end(), out.densities);
  out.arrival_time = c.arrival_time;
  out.has_time = c.transient_time.has_value() ? 1 : 0;
  out.transient_time = c.transient_time.value_or(0.0);
  out.analytic_outcome = kind_of(c.analytic_outcome);
  out.agreement = c.agreement ? 1 : 0;
  out.max_drift = c.max_drift;
  out.error = c.error ? status_of(*c.error) : QS_OK;
  return out;
}

qs_equilibrium equilibrium_of(const qsdyn::Equilibrium& e) {
  qs_equilibrium out{};
  out.kind = kind_of(e.kind);
  out.status = QS_OK;
  out.exists = e.exists ? 1 : 0;
  std::copy(e.coords.x.begin(), e.coords.x.end(), out.coords);
  for (int i = 0; i < 3; ++i) {
    out.eig_re[i] = e.eigenvalues[i].real();
    out.eig_im[i] = e.eigenvalues[i].imag();
  }
  out.eigen_analytic = e.eigen_source == qsdyn::EigenSource::Analytic ? 1 : 0;
  out.eigen_method = static_cast<qs_eigen_method>(static_cast<int>(e.numeric_method));
  out.stability = static_cast<qs_stability_class>(static_cast<int>(e.stability.kind));
  out.unstable_dimension = e.stability.unstable_dimension;
  std::string joined;
  for (const auto& v : e.violated) {
    if (!joined.empty()) joined += "; ";
    joined += v;
  }
  std::strncpy(out.violated, joined.c_str(), sizeof out.violated - 1);
  return out;
}

template <class Write>
qs_status write_file(const char* path, Write&& write) {
  if (!path) return null_arg("path");
  return guarded([&] {
    std::ofstream os(path);
    if (!os) throw qsdyn::Error(qsdyn::ErrorCode::Io, std::string("cannot open ") + path);
    write(os);
    os.flush();
    if (!os) throw qsdyn::Error(qsdyn::ErrorCode::Io, std::string("write failed: ") + path);
  });
}

void fill_orbit(qs_orbit& orbit, const qsdyn::OrbitResult& r) {
  orbit.summary.final_time = r.final_time;
  orbit.summary.event_fired = r.event_fired ? 1 : 0;
  orbit.summary.steps_taken = r.steps_taken;
  orbit.summary.max_drift = r.max_drift;
}

qsdyn::IntegrationHooks recording_hooks(qs_orbit& orbit, double sample_interval) {
  qsdyn::IntegrationHooks hooks;
  hooks.sample_interval = sample_interval;
  hooks.on_sample = [&orbit](double t, std::span<const double> x) {
    orbit.data.push_back(t);
    orbit.data.insert(orbit.data.end(), x.begin(), x.end());
  };
  return hooks;
}

}  // namespace

extern "C" {

const char* qs_status_name(qs_status status) {
  switch (status) {
    case QS_OK: return "Ok";
    case QS_ERR_INTERNAL: return "Internal";
    default:
      if (status >= QS_ERR_INVALID_ARGUMENT && status <= QS_ERR_IO)
        return qsdyn::to_string(static_cast<qsdyn::ErrorCode>(status));
      return "unknown";
  }
}

const char* qs_last_error(void) { return last_error.c_str(); }

int qs_status_is_numerical(qs_status status) {
  switch (status) {
    case QS_ERR_DRIFT_EXCEEDED:
    case QS_ERR_STEP_UNDERFLOW:
    case QS_ERR_NO_CONVERGENCE:
    case QS_ERR_SINGULAR_MATRIX:
    case QS_ERR_INACCURATE_INPUTS:
    case QS_ERR_SINGULAR_DENOMINATOR:
    case QS_ERR_DEGENERATE_FITNESS:
    case QS_ERR_DEGENERATE:
    case QS_ERR_INTERNAL:
      return 1;
    default:
      return 0;
  }
}

const char* qs_kind_name(qs_kind kind) {
  if (kind < QS_UNSTABLE_DOMINANCE || kind > QS_UNRESOLVED) return "unknown";
  return qsdyn::to_string(static_cast<qsdyn::Outcome>(kind));
}

qs_status qs_model_create(const qs_params* p, qs_model** out) {
  if (!p) return null_arg("params");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new qs_model{qsdyn::ModelParams(p->f0, p->f1, p->f2, p->Q, p->Qp)}; });
}

void qs_model_destroy(qs_model* model) { delete model; }

qs_status qs_model_params(const qs_model* m, qs_params* out) {
  if (!m || !out) return null_arg("model/out");
  *out = {m->params.f0(), m->params.f1(), m->params.f2(), m->params.Q(), m->params.Qp()};
  return QS_OK;
}

qs_status qs_mean_fitness(const qs_model* m, const double state[3], double* out) {
  if (!m || !state || !out) return null_arg("model/state/out");
  *out = qsdyn::mean_fitness(m->params, state_of(state));
  return QS_OK;
}

qs_status qs_vector_field(const qs_model* m, const double state[3], double out[3]) {
  if (!m || !state || !out) return null_arg("model/state/out");
  const auto dx = qsdyn::vector_field(m->params, state_of(state));
  std::copy(dx.begin(), dx.end(), out);
  return QS_OK;
}

qs_status qs_jacobian(const qs_model* m, const double state[3], double out[9]) {
  if (!m || !state || !out) return null_arg("model/state/out");
  const auto j = qsdyn::jacobian(m->params, state_of(state));
  std::copy(j.begin(), j.end(), out);
  return QS_OK;
}

qs_status qs_general_model_create(double f0, double f1, double Q, double Qp, size_t n,
                                  const double* f2, const double* qprime, const double* mmu,
                                  qs_general_model** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (n == 0) return fail(QS_ERR_INVALID_ARGUMENT, "at least one subclone is required");
  if (!f2 || !qprime || !mmu) return null_arg("f2/qprime/mmu");
  return guarded([&] {
    *out = new qs_general_model{qsdyn::GeneralModel(f0, f1, Q, Qp, std::vector<double>(f2, f2 + n),
                                                    std::vector<double>(qprime, qprime + n),
                                                    std::vector<double>(mmu, mmu + n * n))};
  });
}

void qs_general_model_destroy(qs_general_model* model) { delete model; }

size_t qs_general_model_dimension(const qs_general_model* m) {
  return m ? m->model.dimension() : 0;
}

qs_status qs_general_vector_field(const qs_general_model* m, const double* state, size_t len,
                                  double* out) {
  if (!m || !state || !out) return null_arg("model/state/out");
  if (len != m->model.dimension()) return fail(QS_ERR_INVALID_ARGUMENT, "state length mismatch");
  m->model.vector_field({state, len}, {out, len});
  return QS_OK;
}

qs_status qs_aggregate(const double* state, size_t len, double out[3]) {
  if (!state || !out) return null_arg("state/out");
  if (len < 3) return fail(QS_ERR_INVALID_ARGUMENT, "state needs at least 3 components");
  const auto s = qsdyn::aggregate({state, len});
  std::copy(s.x.begin(), s.x.end(), out);
  return QS_OK;
}

qs_status qs_equilibria(const qs_model* m, qs_equilibrium out[3]) {
  if (!m || !out) return null_arg("model/out");
  return guarded([&] {
    const auto set = qsdyn::all_equilibria(m->params);
    for (int i = 0; i < 3; ++i) {
      if (set.points[i]) {
        out[i] = equilibrium_of(*set.points[i]);
      } else {
        out[i] = qs_equilibrium{};
        out[i].kind = static_cast<qs_kind>(i);
        out[i].stability = QS_STABILITY_UNRESOLVED;
        auto code = qsdyn::ErrorCode::InvalidState;
        for (int c = 1; c <= static_cast<int>(qsdyn::ErrorCode::Io); ++c)
          if (set.errors[i] == qsdyn::to_string(static_cast<qsdyn::ErrorCode>(c)))
            code = static_cast<qsdyn::ErrorCode>(c);
        out[i].status = status_of(code);
        std::strncpy(out[i].violated, set.errors[i].c_str(), sizeof out[i].violated - 1);
      }
    }
  });
}

qs_status qs_critical_mutation_rates(const qs_model* m, double* mu0c, double* mu1c) {
  if (!m || !mu0c || !mu1c) return null_arg("model/out");
  const auto r = qsdyn::critical_mutation_rates(m->params);
  *mu0c = r.mu0;
  *mu1c = r.mu1;
  return QS_OK;
}

qs_status qs_classify_analytic(const qs_model* m, qs_kind* out) {
  if (!m || !out) return null_arg("model/out");
  return guarded([&] { *out = kind_of(qsdyn::classify_analytic(m->params).kind); });
}

qs_status qs_eigen3(const double a[9], qs_eigen_report* out) {
  if (!a || !out) return null_arg("matrix/out");
  return guarded([&] {
    qsdyn::Mat3 m;
    std::copy(a, a + 9, m.begin());
    for (double v : m)
      if (!std::isfinite(v)) throw qsdyn::Error(qsdyn::ErrorCode::InvalidArgument, "non-finite matrix entry");
    const auto r = qsdyn::eigen3(m);
    for (int i = 0; i < 3; ++i) {
      out->re[i] = r.values[i].real();
      out->im[i] = r.values[i].imag();
      out->residual[i] = r.residuals[i];
      out->iterations[i] = r.iterations[i];
    }
    out->method = static_cast<qs_eigen_method>(static_cast<int>(r.method));
  });
}

void qs_integrator_config_default(qs_integrator_config* cfg) {
  if (!cfg) return;
  const qsdyn::IntegratorConfig d;
  *cfg = {d.abs_tol, d.rel_tol, d.h_init, d.h_max, d.t_max, d.drift_tol};
}

qs_status qs_simulate(const qs_model* m, const double s0[3], const qs_integrator_config* cfg,
                      double sample_interval, const double stop_target[3], double stop_distance,
                      qs_orbit** out) {
  if (!m || !s0 || !out) return null_arg("model/s0/out");
  *out = nullptr;
  if (!(sample_interval > 0.0)) return fail(QS_ERR_INVALID_ARGUMENT, "sample interval must be > 0");
  if (stop_distance > 0.0 && !stop_target) return null_arg("stop_target");
  return guarded([&] {
    auto orbit = std::make_unique<qs_orbit>();
    orbit->width = 4;
    const auto initial = qsdyn::SimplexState::from(s0[0], s0[1], s0[2]);
    auto hooks = recording_hooks(*orbit, sample_interval);
    if (stop_distance > 0.0) hooks.until = qsdyn::distance_below(state_of(stop_target), stop_distance);
    fill_orbit(*orbit, qsdyn::integrate(m->params, initial, config_of(cfg), hooks));
    *out = orbit.release();
  });
}

qs_status qs_simulate_general(const qs_general_model* m, const double* s0, size_t len,
                              const qs_integrator_config* cfg, double sample_interval,
                              qs_orbit** out) {
  if (!m || !s0 || !out) return null_arg("model/s0/out");
  *out = nullptr;
  if (len != m->model.dimension()) return fail(QS_ERR_INVALID_ARGUMENT, "state length mismatch");
  if (!(sample_interval > 0.0)) return fail(QS_ERR_INVALID_ARGUMENT, "sample interval must be > 0");
  return guarded([&] {
    auto orbit = std::make_unique<qs_orbit>();
    orbit->width = len + 1;
    auto hooks = recording_hooks(*orbit, sample_interval);
    fill_orbit(*orbit, qsdyn::integrate_general(m->model, {s0, len}, config_of(cfg), hooks));
    *out = orbit.release();
  });
}

void qs_orbit_destroy(qs_orbit* orbit) { delete orbit; }

size_t qs_orbit_rows(const qs_orbit* o) { return o && o->width ? o->data.size() / o->width : 0; }

size_t qs_orbit_width(const qs_orbit* o) { return o ? o->width : 0; }

qs_status qs_orbit_row(const qs_orbit* o, size_t i, double* row, size_t len) {
  if (!o || !row) return null_arg("orbit/row");
  if (i >= qs_orbit_rows(o)) return fail(QS_ERR_INVALID_ARGUMENT, "row index out of range");
  if (len < o->width) return fail(QS_ERR_INVALID_ARGUMENT, "row buffer too small");
  std::copy_n(o->data.begin() + static_cast<std::ptrdiff_t>(i * o->width), o->width, row);
  return QS_OK;
}

qs_status qs_orbit_summary_get(const qs_orbit* o, qs_orbit_summary* out) {
  if (!o || !out) return null_arg("orbit/out");
  *out = o->summary;
  return QS_OK;
}

qs_status qs_orbit_write_csv(const qs_orbit* o, const char* path) {
  if (!o) return null_arg("orbit");
  return write_file(path, [&](std::ostream& os) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < qs_orbit_rows(o); ++i) {
      auto first = o->data.begin() + static_cast<std::ptrdiff_t>(i * o->width);
      rows.emplace_back(first, first + static_cast<std::ptrdiff_t>(o->width));
    }
    qsdyn::write_orbit_csv(os, rows, o->width - 3);
  });
}

void qs_sweep_spec_default(qs_sweep_spec* s) {
  if (!s) return;
  const qsdyn::SweepSpec d;
  s->Q = d.Q;
  s->Qp = d.Qp;
  s->f2 = d.f2;
  s->f0 = {d.f0.min, d.f0.max, d.f0.step};
  s->f1 = {d.f1.min, d.f1.max, d.f1.step};
  s->classify_tol = d.classify_tol;
  s->transient_tol = d.transient_tol;
  std::copy(d.initial.x.begin(), d.initial.x.end(), s->initial);
  qs_integrator_config_default(&s->integrator);
}

qs_status qs_sweep_run(const qs_sweep_spec* spec, qs_sweep_kind kind, unsigned threads,
                       qs_grid** out) {
  if (!spec || !out) return null_arg("spec/out");
  *out = nullptr;
  if (kind < QS_SWEEP_CLASSIFY || kind > QS_SWEEP_TRANSIENTS)
    return fail(QS_ERR_INVALID_ARGUMENT, "unknown sweep kind");
  return guarded([&] {
    *out = new qs_grid{qsdyn::run_sweep(spec_of(*spec), static_cast<qsdyn::SweepKind>(kind), threads)};
  });
}

void qs_grid_destroy(qs_grid* grid) { delete grid; }

size_t qs_grid_size(const qs_grid* g) { return g ? g->grid.cells.size() : 0; }
size_t qs_grid_f0_count(const qs_grid* g) { return g ? g->grid.f0_nodes.size() : 0; }
size_t qs_grid_f1_count(const qs_grid* g) { return g ? g->grid.f1_nodes.size() : 0; }

qs_status qs_grid_cell(const qs_grid* g, size_t i, qs_cell* out) {
  if (!g || !out) return null_arg("grid/out");
  if (i >= g->grid.cells.size()) return fail(QS_ERR_INVALID_ARGUMENT, "cell index out of range");
  *out = cell_of(g->grid.cells[i]);
  return QS_OK;
}

qs_status qs_grid_write_csv(const qs_grid* g, const char* path) {
  if (!g) return null_arg("grid");
  return write_file(path, [&](std::ostream& os) { qsdyn::write_grid_csv(os, g->grid); });
}

qs_status qs_section_run(const qs_sweep_spec* spec, qs_sweep_kind kind, qs_axis fixed_axis,
                         double fixed_value, int with_eigen, qs_kind branch, unsigned threads,
                         qs_section** out) {
  if (!spec || !out) return null_arg("spec/out");
  *out = nullptr;
  if (kind < QS_SWEEP_CLASSIFY || kind > QS_SWEEP_TRANSIENTS)
    return fail(QS_ERR_INVALID_ARGUMENT, "unknown sweep kind");
  if (fixed_axis != QS_AXIS_F0Q && fixed_axis != QS_AXIS_F1QP)
    return fail(QS_ERR_INVALID_ARGUMENT, "unknown axis");
  if (branch < QS_UNSTABLE_DOMINANCE || branch > QS_UNRESOLVED)
    return fail(QS_ERR_INVALID_ARGUMENT, "unknown branch");
  return guarded([&] {
    std::optional<qsdyn::FixedPointKind> b;
    if (branch != QS_UNRESOLVED) b = static_cast<qsdyn::FixedPointKind>(branch);
    *out = new qs_section{qsdyn::section(spec_of(*spec), static_cast<qsdyn::SweepKind>(kind),
                                         static_cast<qsdyn::Axis>(fixed_axis), fixed_value,
                                         with_eigen != 0, b, threads)};
  });
}

void qs_section_destroy(qs_section* section) { delete section; }

size_t qs_section_size(const qs_section* s) { return s ? s->section.points.size() : 0; }

qs_status qs_section_cell(const qs_section* s, size_t i, qs_cell* out, double* abscissa) {
  if (!s || !out) return null_arg("section/out");
  if (i >= s->section.points.size()) return fail(QS_ERR_INVALID_ARGUMENT, "index out of range");
  *out = cell_of(s->section.points[i].cell);
  if (abscissa) *abscissa = s->section.points[i].abscissa;
  return QS_OK;
}

qs_status qs_section_eigen(const qs_section* s, size_t i, double eig_re[3],
                           qs_eigen_method* method) {
  if (!s) return null_arg("section");
  if (i >= s->section.points.size()) return fail(QS_ERR_INVALID_ARGUMENT, "index out of range");
  const auto& p = s->section.points[i];
  if (!p.eigen)
    return fail(QS_ERR_INVALID_STATE, p.eigen_error.empty() ? "no eigenvalues" : p.eigen_error);
  if (eig_re)
    for (int k = 0; k < 3; ++k) eig_re[k] = p.eigen->values[k].real();
  if (method) *method = static_cast<qs_eigen_method>(static_cast<int>(p.eigen->method));
  return QS_OK;
}

qs_kind qs_section_tracked_branch(const qs_section* s) {
  return s ? kind_of(s->section.tracked_branch) : QS_UNRESOLVED;
}

size_t qs_section_bifurcation_count(const qs_section* s) {
  return s ? s->section.bifurcations.size() : 0;
}

double qs_section_bifurcation(const qs_section* s, size_t i) {
  if (!s || i >= s->section.bifurcations.size()) return 0.0;
  return s->section.bifurcations[i];
}

qs_status qs_section_write_csv(const qs_section* s, const char* path) {
  if (!s) return null_arg("section");
  return write_file(path, [&](std::ostream& os) { qsdyn::write_section_csv(os, s->section); });
}

}  // extern "C"
