// qsdyn command-line front end. Talks to the library only through qsdyn.h.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsdyn/qsdyn.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string out_dir = ".";
  bool emit_plots = false;
  unsigned threads = 0;
  double f0 = 0.9, f1 = 0.7, f2 = 0.42, Q = 0.7, Qp = 0.3;
  std::optional<double> tmax;
  std::optional<double> step;
  double abs_tol = 1e-12, rel_tol = 1e-12, drift_tol = 1e-10;

  // simulate
  double x0 = 1.0, x1 = 0.0, x2 = 0.0;
  double sample = 0.1;
  double stop_distance = 0.0;

  // equilibria
  std::string format = "text";

  // sweep / section
  std::string kind = "classify";
  std::optional<double> f0_min, f0_max, f1_min, f1_max;
  double classify_tol = 1e-10, transient_tol = 1e-2;
  std::string axis = "f0Q";
  double value = 0.63;
  bool with_eigen = false;
  std::string branch = "auto";
  std::optional<double> abscissa_step;
};

// Reports a failed library call and picks the exit code for it.
int report(qs_status s, const char* what) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, qs_last_error(), qs_status_name(s));
  return qs_status_is_numerical(s) ? kExitNumerical : kExitConfig;
}

int config_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return kExitConfig;
}

bool prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) return false;
  const fs::path probe = fs::path(dir) / ".qsdyn_write_probe";
  {
    std::ofstream os(probe);
    if (!os) return false;
  }
  fs::remove(probe, ec);
  return true;
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  return static_cast<bool>(os);
}

qs_integrator_config integrator_of(const Options& o, double default_tmax) {
  qs_integrator_config cfg;
  qs_integrator_config_default(&cfg);
  cfg.abs_tol = o.abs_tol;
  cfg.rel_tol = o.rel_tol;
  cfg.drift_tol = o.drift_tol;
  cfg.t_max = o.tmax.value_or(default_tmax);
  return cfg;
}

qs_sweep_kind sweep_kind_of(const std::string& k) {
  if (k == "densities") return QS_SWEEP_DENSITIES;
  if (k == "transients") return QS_SWEEP_TRANSIENTS;
  return QS_SWEEP_CLASSIFY;
}

qs_sweep_spec sweep_spec_of(const Options& o) {
  qs_sweep_spec spec;
  qs_sweep_spec_default(&spec);
  spec.Q = o.Q;
  spec.Qp = o.Qp;
  spec.f2 = o.f2;
  const double step = o.step.value_or(0.01);
  spec.f0 = {o.f0_min.value_or(0.01), o.f0_max.value_or(1.0 / o.Q), step};
  spec.f1 = {o.f1_min.value_or(0.01), o.f1_max.value_or(1.0 / o.Qp), step};
  spec.classify_tol = o.classify_tol;
  spec.transient_tol = o.transient_tol;
  spec.integrator = integrator_of(o, 1e5);
  return spec;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string stability_label(const qs_equilibrium& e) {
  switch (e.stability) {
    case QS_ATTRACTOR: return "Attractor";
    case QS_SADDLE: return "Saddle(" + std::to_string(e.unstable_dimension) + ")";
    default: return "Unresolved";
  }
}

// ---- plot scripts (gnuplot syntax, paths relative to the script) ----------

const char* kPlotPreamble =
    "set datafile separator ','\n"
    "set terminal pngcairo size 900,700\n";

std::string orbit_plot() {
  return std::string(kPlotPreamble) +
         "set output 'orbit.png'\n"
         "set xlabel 't'\nset ylabel 'population'\n"
         "plot 'orbit.csv' using 1:2 with lines lc rgb 'red' title 'x0', \\\n"
         "     '' using 1:3 with lines lc rgb 'green' title 'x1', \\\n"
         "     '' using 1:4 with lines lc rgb 'blue' title 'x2'\n";
}

std::string sweep_plot(const std::string& csv, const std::string& kind) {
  std::string s = std::string(kPlotPreamble) + "set xlabel 'f0 Q'\nset ylabel 'f1 Q'''\n";
  const std::string stem = csv.substr(0, csv.size() - 4);
  if (kind == "classify") {
    s += "set output '" + stem + ".png'\n"
         "code(s) = s eq 'UnstableDominance' ? 0 : s eq 'MutatorCoexistence' ? 1 : "
         "s eq 'FullCoexistence' ? 2 : 3\n"
         "set palette defined (0 'red', 1 'blue', 2 'green', 3 'black')\n"
         "set cbrange [0:3]\nunset colorbox\n"
         "plot '" + csv + "' using 3:4:(code(strcol(5))) with points pt 5 ps 0.6 lc palette notitle\n";
  } else if (kind == "densities") {
    s += "set output '" + stem + ".png'\n"
         "set multiplot layout 1,3\nset cbrange [0:1]\n"
         "set title 'x0*'\nplot '" + csv + "' using 3:4:6 with points pt 5 ps 0.6 lc palette notitle\n"
         "set title 'x1*'\nplot '" + csv + "' using 3:4:7 with points pt 5 ps 0.6 lc palette notitle\n"
         "set title 'x2*'\nplot '" + csv + "' using 3:4:8 with points pt 5 ps 0.6 lc palette notitle\n"
         "unset multiplot\n";
  } else {
    s += "set output '" + stem + ".png'\n"
         "set cblabel 'log10(t)'\n"
         "plot '" + csv + "' using 3:4:10 with points pt 5 ps 0.6 lc palette notitle\n";
  }
  return s;
}

std::string section_plot(const std::string& csv, qs_axis axis, bool with_eigen) {
  const std::string x = axis == QS_AXIS_F0Q ? "4" : "3";
  const std::string xlabel = axis == QS_AXIS_F0Q ? "f1 Q'''" : "f0 Q";
  const std::string stem = csv.substr(0, csv.size() - 4);
  std::string s = std::string(kPlotPreamble) + "set xlabel '" + xlabel + "'\n" +
                  "set output '" + stem + ".png'\n"
                  "plot '" + csv + "' using " + x + ":6 with lines lc rgb 'red' title 'x0', \\\n"
                  "     '' using " + x + ":7 with lines lc rgb 'green' title 'x1', \\\n"
                  "     '' using " + x + ":8 with lines lc rgb 'blue' title 'x2', \\\n"
                  "     '' using " + x + ":11 with lines dt 2 lc rgb 'orange' title '(log10(t)-2)/2'\n";
  if (with_eigen) {
    s += "set output '" + stem + "_eigen.png'\n"
         "set ylabel 'Re(lambda)'\n"
         "plot '" + csv + "' using " + x + ":14 with lines title 'lambda1', \\\n"
         "     '' using " + x + ":15 with lines title 'lambda2', \\\n"
         "     '' using " + x + ":16 with lines title 'lambda3', \\\n"
         "     0 with lines dt 3 lc rgb 'black' notitle\n";
  }
  return s;
}

// ---- subcommands -----------------------------------------------------------

qs_params params_of(const Options& o) { return {o.f0, o.f1, o.f2, o.Q, o.Qp}; }

int cmd_simulate(const Options& o) {
  qs_params params = params_of(o);
  qs_model* model = nullptr;
  if (qs_status s = qs_model_create(&params, &model); s != QS_OK) return report(s, "model");
  const double s0[3] = {o.x0, o.x1, o.x2};
  const qs_integrator_config cfg = integrator_of(o, 100.0);
  qs_orbit* orbit = nullptr;
  qs_status s = QS_OK;
  if (o.stop_distance > 0.0) {
    qs_equilibrium eq[3];
    qs_kind k;
    s = qs_equilibria(model, eq);
    if (s == QS_OK) s = qs_classify_analytic(model, &k);
    if (s != QS_OK) {
      qs_model_destroy(model);
      return report(s, "stop target");
    }
    s = qs_simulate(model, s0, &cfg, o.sample, eq[k].coords, o.stop_distance, &orbit);
  } else {
    s = qs_simulate(model, s0, &cfg, o.sample, nullptr, 0.0, &orbit);
  }
  qs_model_destroy(model);
  if (s != QS_OK) return report(s, "simulate");

  const fs::path csv = fs::path(o.out_dir) / "orbit.csv";
  s = qs_orbit_write_csv(orbit, csv.c_str());
  qs_orbit_summary sum{};
  qs_orbit_summary_get(orbit, &sum);
  std::vector<double> last(qs_orbit_width(orbit));
  qs_orbit_row(orbit, qs_orbit_rows(orbit) - 1, last.data(), last.size());
  const std::size_t rows = qs_orbit_rows(orbit);
  qs_orbit_destroy(orbit);
  if (s != QS_OK) return report(s, "write");
  if (o.emit_plots && !write_text(fs::path(o.out_dir) / "orbit.gp", orbit_plot()))
    return config_error("cannot write plot script");

  std::printf("rows %zu  final_time %s  steps %zu  max_drift %s%s\n", rows,
              num(sum.final_time).c_str(), sum.steps_taken, num(sum.max_drift).c_str(),
              sum.event_fired ? "  (stopped at target)" : "");
  std::printf("final_state %s %s %s\n", num(last[1]).c_str(), num(last[2]).c_str(),
              num(last[3]).c_str());
  std::printf("wrote %s\n", csv.c_str());
  return kExitOk;
}

int cmd_equilibria(const Options& o) {
  qs_params params = params_of(o);
  qs_model* model = nullptr;
  if (qs_status s = qs_model_create(&params, &model); s != QS_OK) return report(s, "model");
  qs_equilibrium eq[3];
  double mu0c = 0.0, mu1c = 0.0;
  qs_kind predicted = QS_UNRESOLVED;
  qs_status s = qs_equilibria(model, eq);
  if (s == QS_OK) s = qs_critical_mutation_rates(model, &mu0c, &mu1c);
  const qs_status cls = qs_classify_analytic(model, &predicted);
  qs_model_destroy(model);
  if (s != QS_OK) return report(s, "equilibria");
  if (cls != QS_OK && cls != QS_ERR_DEGENERATE) return report(cls, "classify");

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["params"] = {{"f0", o.f0}, {"f1", o.f1}, {"f2", o.f2}, {"Q", o.Q}, {"Qp", o.Qp},
                   {"f0Q", o.f0 * o.Q}, {"f1Qp", o.f1 * o.Qp}};
    j["critical_mutation_rates"] = {{"mu0", mu0c}, {"mu1", mu1c}};
    j["predicted_attractor"] = cls == QS_OK ? qs_kind_name(predicted) : "Degenerate";
    j["fixed_points"] = nlohmann::ordered_json::array();
    for (const auto& e : eq) {
      nlohmann::ordered_json p;
      p["kind"] = qs_kind_name(e.kind);
      p["status"] = qs_status_name(e.status);
      if (e.status == QS_OK) {
        p["exists"] = e.exists != 0;
        p["coords"] = {e.coords[0], e.coords[1], e.coords[2]};
        p["eigenvalues"] = nlohmann::ordered_json::array();
        for (int i = 0; i < 3; ++i) p["eigenvalues"].push_back({{"re", e.eig_re[i]}, {"im", e.eig_im[i]}});
        p["eigen_source"] = e.eigen_analytic ? "analytic" : "numeric";
        p["stability"] = stability_label(e);
        p["violated"] = e.violated;
      }
      j["fixed_points"].push_back(p);
    }
    std::printf("%s\n", j.dump(2).c_str());
    return kExitOk;
  }

  std::printf("f0=%s f1=%s f2=%s Q=%s Qp=%s  (f0Q=%s, f1Qp=%s)\n", num(o.f0).c_str(),
              num(o.f1).c_str(), num(o.f2).c_str(), num(o.Q).c_str(), num(o.Qp).c_str(),
              num(o.f0 * o.Q).c_str(), num(o.f1 * o.Qp).c_str());
  std::printf("critical mutation rates: mu0c=%s mu1c=%s\n", num(mu0c).c_str(), num(mu1c).c_str());
  std::printf("predicted attractor: %s\n",
              cls == QS_OK ? qs_kind_name(predicted) : "none (bifurcation surface)");
  for (const auto& e : eq) {
    std::printf("\n[%s]\n", qs_kind_name(e.kind));
    if (e.status != QS_OK) {
      std::printf("  status: %s\n", qs_status_name(e.status));
      continue;
    }
    std::printf("  exists: %s\n", e.exists ? "yes" : "no");
    if (e.violated[0]) std::printf("  violated: %s\n", e.violated);
    std::printf("  coords: %s %s %s\n", num(e.coords[0]).c_str(), num(e.coords[1]).c_str(),
                num(e.coords[2]).c_str());
    std::printf("  eigenvalues (%s):", e.eigen_analytic ? "analytic" : "numeric");
    for (int i = 0; i < 3; ++i) {
      std::printf(" %s", num(e.eig_re[i]).c_str());
      if (e.eig_im[i] != 0.0) std::printf("%+.10gi", e.eig_im[i]);
    }
    std::printf("\n  stability: %s\n", stability_label(e).c_str());
  }
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const qs_sweep_spec spec = sweep_spec_of(o);
  qs_grid* grid = nullptr;
  if (qs_status s = qs_sweep_run(&spec, sweep_kind_of(o.kind), o.threads, &grid); s != QS_OK)
    return report(s, "sweep");
  const std::string name = "sweep_" + o.kind + ".csv";
  const qs_status s = qs_grid_write_csv(grid, (fs::path(o.out_dir) / name).c_str());
  std::map<std::string, std::size_t> counts;
  std::size_t errors = 0, disagree = 0;
  for (std::size_t i = 0; i < qs_grid_size(grid); ++i) {
    qs_cell c;
    qs_grid_cell(grid, i, &c);
    ++counts[qs_kind_name(c.outcome)];
    errors += c.error != QS_OK;
    disagree += !c.agreement;
  }
  const std::size_t n0 = qs_grid_f0_count(grid), n1 = qs_grid_f1_count(grid);
  qs_grid_destroy(grid);
  if (s != QS_OK) return report(s, "write");
  if (o.emit_plots && !write_text(fs::path(o.out_dir) / ("sweep_" + o.kind + ".gp"),
                                  sweep_plot(name, o.kind)))
    return config_error("cannot write plot script");

  std::printf("grid %zu x %zu (%s)\n", n0, n1, o.kind.c_str());
  for (const auto& [k, n] : counts) std::printf("  %-20s %zu\n", k.c_str(), n);
  std::printf("  disagreements %zu, cell errors %zu\n", disagree, errors);
  std::printf("wrote %s\n", (fs::path(o.out_dir) / name).c_str());
  return kExitOk;
}

int cmd_section(const Options& o) {
  qs_sweep_spec spec = sweep_spec_of(o);
  const qs_axis axis = o.axis == "f0Q" ? QS_AXIS_F0Q : QS_AXIS_F1QP;
  if (o.abscissa_step) {
    const double d = *o.abscissa_step;
    if (!(d > 0.0)) return config_error("--abscissa-step must be > 0");
    const bool f1_free = axis == QS_AXIS_F0Q;
    qs_range& free_range = f1_free ? spec.f1 : spec.f0;
    const double fidelity = f1_free ? spec.Qp : spec.Q;
    // Explicit bounds (raw f0/f1) are kept; only the defaults move onto the product grid.
    const auto& lo = f1_free ? o.f1_min : o.f0_min;
    const auto& hi = f1_free ? o.f1_max : o.f0_max;
    free_range = {lo.value_or(d / fidelity), hi.value_or(1.0 / fidelity), d / fidelity};
  }
  qs_kind branch = QS_UNRESOLVED;
  if (o.branch == "UnstableDominance") branch = QS_UNSTABLE_DOMINANCE;
  if (o.branch == "MutatorCoexistence") branch = QS_MUTATOR_COEXISTENCE;
  if (o.branch == "FullCoexistence") branch = QS_FULL_COEXISTENCE;

  qs_section* sec = nullptr;
  if (qs_status s = qs_section_run(&spec, sweep_kind_of(o.kind), axis, o.value, o.with_eigen,
                                   branch, o.threads, &sec);
      s != QS_OK)
    return report(s, "section");
  const std::string name = "section_" + o.axis + "_" + o.kind + ".csv";
  const qs_status s = qs_section_write_csv(sec, (fs::path(o.out_dir) / name).c_str());
  std::vector<double> bifurcations;
  for (std::size_t i = 0; i < qs_section_bifurcation_count(sec); ++i)
    bifurcations.push_back(qs_section_bifurcation(sec, i));
  const std::size_t n = qs_section_size(sec);
  const qs_kind tracked = qs_section_tracked_branch(sec);
  qs_section_destroy(sec);
  if (s != QS_OK) return report(s, "write");
  if (o.emit_plots &&
      !write_text(fs::path(o.out_dir) / ("section_" + o.axis + "_" + o.kind + ".gp"),
                  section_plot(name, axis, o.with_eigen)))
    return config_error("cannot write plot script");

  std::printf("section %s = %s: %zu points (%s)\n", o.axis.c_str(), num(o.value).c_str(), n,
              o.kind.c_str());
  if (o.with_eigen) std::printf("eigenvalues follow the %s branch\n", qs_kind_name(tracked));
  for (double b : bifurcations) std::printf("bifurcation near %s\n", num(b).c_str());
  std::printf("wrote %s\n", (fs::path(o.out_dir) / name).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Replicator dynamics of a three-population tumor quasispecies model"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat 'key = value' file; flags override it");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_flag("--emit-plots", o.emit_plots, "write gnuplot scripts next to the CSVs");
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)")
      ->envname("QSDYN_THREADS");
  app.add_option("--f0", o.f0, "replication rate of stable cells")->capture_default_str();
  app.add_option("--f1", o.f1, "replication rate of mutator cells")->capture_default_str();
  app.add_option("--f2", o.f2, "replication rate of tumor cells")->capture_default_str();
  app.add_option("--Q", o.Q, "copying fidelity of stable cells")->capture_default_str();
  app.add_option("--Qp", o.Qp, "copying fidelity of mutator cells")->capture_default_str();
  app.add_option("--tmax", o.tmax, "integration horizon (simulate: 100, sweeps: 1e5)");
  app.add_option("--step", o.step, "grid step in f0 and f1 (default 0.01)");
  app.add_option("--abs-tol", o.abs_tol, "absolute local error tolerance")->capture_default_str();
  app.add_option("--rel-tol", o.rel_tol, "relative local error tolerance")->capture_default_str();
  app.add_option("--drift-tol", o.drift_tol, "allowed |x0+x1+x2-1| before the run fails")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "integrate one orbit and write orbit.csv");
  sim->add_option("--x0", o.x0, "initial x0")->capture_default_str();
  sim->add_option("--x1", o.x1, "initial x1")->capture_default_str();
  sim->add_option("--x2", o.x2, "initial x2")->capture_default_str();
  sim->add_option("--sample", o.sample, "output sampling interval")->capture_default_str();
  sim->add_option("--stop-distance", o.stop_distance,
                  "stop once this close to the predicted attractor (0 = run to tmax)");

  auto* eq = app.add_subcommand("equilibria", "report fixed points, eigenvalues and stability");
  eq->add_option("--format", o.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  const std::vector<std::string> kinds{"classify", "densities", "transients"};
  auto add_grid_options = [&](CLI::App* cmd) {
    cmd->add_option("--kind", o.kind, "classify, densities or transients")
        ->check(CLI::IsMember(kinds))
        ->capture_default_str();
    cmd->add_option("--f0-min", o.f0_min, "lowest f0 (default 0.01)");
    cmd->add_option("--f0-max", o.f0_max, "highest f0 (default 1/Q)");
    cmd->add_option("--f1-min", o.f1_min, "lowest f1 (default 0.01)");
    cmd->add_option("--f1-max", o.f1_max, "highest f1 (default 1/Qp)");
    cmd->add_option("--classify-tol", o.classify_tol, "arrival distance")->capture_default_str();
    cmd->add_option("--transient-tol", o.transient_tol, "distance for transient timing")
        ->capture_default_str();
  };
  auto* sweep = app.add_subcommand("sweep", "grid sweep over (f0Q, f1Q')");
  add_grid_options(sweep);

  auto* section = app.add_subcommand("section", "1-D slice at fixed f0Q or f1Q'");
  add_grid_options(section);
  section->add_option("--axis", o.axis, "coordinate held fixed: f0Q or f1Qp")
      ->check(CLI::IsMember({"f0Q", "f1Qp"}))
      ->capture_default_str();
  section->add_option("--value", o.value, "value of the fixed coordinate")->capture_default_str();
  section->add_flag("--with-eigen", o.with_eigen, "add eigenvalue columns of the tracked branch");
  section->add_option("--branch", o.branch, "branch whose eigenvalues are tracked")
      ->check(CLI::IsMember({"auto", "UnstableDominance", "MutatorCoexistence", "FullCoexistence"}))
      ->capture_default_str();
  section->add_option("--abscissa-step", o.abscissa_step,
                      "step of the free product coordinate (overrides --step for it)");

  for (auto* cmd : {sim, eq, sweep, section}) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const bool writes = !eq->parsed();
  if (writes && !prepare_out_dir(o.out_dir))
    return config_error("output directory '" + o.out_dir + "' is not writable");

  if (sim->parsed()) return cmd_simulate(o);
  if (eq->parsed()) return cmd_equilibria(o);
  if (sweep->parsed()) return cmd_sweep(o);
  return cmd_section(o);
}
