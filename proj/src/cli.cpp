// Copyright 2026 The lindmag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lindmag/cli.hpp"

#include "lindmag/plot.hpp"
#include "lindmag/reference_solver.hpp"
#include "lindmag/statistics.hpp"
#include "lindmag/wiener.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <omp.h>

namespace lindmag {

namespace {

using nlohmann::json;

const std::map<std::string, double>& si_seconds() {
  static const std::map<std::string, double> table = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
  return table;
}

std::string builtin_time_unit(const std::string& name) {
  if (name == "tfim") return "tJ";
  if (name == "fmo") return "fs";
  if (name == "rpm") return "s";
  throw ConfigError("unknown built-in model '" + name + "'");
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

Unraveling parse_unraveling(const std::string& s) {
  if (s == "linear") return Unraveling::linear;
  if (s == "nonlinear") return Unraveling::nonlinear;
  throw ConfigError("scheme: unraveling must be linear or nonlinear");
}

Method parse_method(const std::string& s) {
  if (s == "magnus") return Method::magnus;
  if (s == "euler_maruyama" || s == "em") return Method::euler_maruyama;
  throw ConfigError("scheme: method must be magnus or euler_maruyama");
}

SchemeConfig parse_scheme(const json& j, double default_delta, int fourier_p, const std::string& unit) {
  if (!j.is_object()) throw ConfigError("scheme: expected an object");
  reject_unknown_keys(j, {"method", "order", "unraveling", "rkmk", "delta", "radius_check", "order4_policy"},
                      "scheme");
  SchemeConfig s;
  s.method = parse_method(get_or<std::string>(j, "method", "magnus"));
  s.order = get_or<int>(j, "order", 1);
  s.unraveling = parse_unraveling(get_or<std::string>(j, "unraveling", "linear"));
  s.rkmk_correction = get_or<bool>(j, "rkmk", false);
  s.delta = j.contains("delta") ? to_model_time(j.at("delta"), unit) : default_delta;
  s.radius_check = get_or<bool>(j, "radius_check", true);
  s.fourier_p = fourier_p;
  const std::string policy = get_or<std::string>(j, "order4_policy", "downgrade");
  if (policy == "downgrade") {
    s.order4_policy = Order4Policy::downgrade;
  } else if (policy == "error") {
    s.order4_policy = Order4Policy::error;
  } else {
    throw ConfigError("scheme: order4_policy must be downgrade or error");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }
  return s;
}

json scheme_json(const SchemeConfig& s) {
  return {{"label", s.label()},
          {"method", to_string(s.method)},
          {"order", s.order},
          {"unraveling", to_string(s.unraveling)},
          {"rkmk", s.rkmk_correction},
          {"delta", s.delta},
          {"radius_check", s.radius_check},
          {"fourier_p", s.fourier_p},
          {"order4_policy", s.order4_policy == Order4Policy::downgrade ? "downgrade" : "error"}};
}

json run_json(const EnsembleEstimate& e) {
  json diags = json::array();
  for (std::size_t k = 0; k < e.diagnostics.size() && k < 10; ++k) diags.push_back(e.diagnostics[k]);
  return {{"scheme", scheme_json(e.scheme)},
          {"effective_order", e.effective_order},
          {"downgraded", e.downgraded},
          {"omitted_terms", e.omitted_terms},
          {"radius_violations", e.radius_violations},
          {"total_steps", e.total_steps},
          {"aborted", e.aborted},
          {"failed", e.failed},
          {"n_traj", e.n_traj},
          {"n_repeats", e.n_repeats},
          {"diagnostics", diags}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void write_svg_file(const std::string& path, const std::string& svg) {
  try {
    plot::write_svg(path, svg);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

const char* const kPresetTfim = R"({
  "model": {"name": "tfim", "params": {"n_sites": 2, "J": 1.0, "h": 1.0, "gamma": 0.1}},
  "delta": {"value": 0.25, "unit": "tJ"},
  "t_stop": {"value": 25.0, "unit": "tJ"},
  "n_traj": 1000,
  "n_repeats": 10,
  "master_seed": 20240101,
  "fourier_p": 200,
  "observables": ["p00", "p01", "p11"],
  "compare_exact": true,
  "schemes": [
    {"method": "magnus", "order": 1, "unraveling": "linear"},
    {"method": "magnus", "order": 2, "unraveling": "linear"},
    {"method": "magnus", "order": 1, "unraveling": "nonlinear"},
    {"method": "magnus", "order": 2, "unraveling": "nonlinear"}
  ]
})";

const char* const kPresetFmo = R"({
  "model": {"name": "fmo", "params": {}},
  "delta": {"value": 5.0, "unit": "fs"},
  "t_stop": {"value": 500.0, "unit": "fs"},
  "n_traj": 1000,
  "n_repeats": 10,
  "master_seed": 20240102,
  "fourier_p": 200,
  "observables": ["p0", "p1", "p2", "p3", "p4"],
  "compare_exact": true,
  "schemes": [
    {"method": "magnus", "order": 1, "unraveling": "linear"},
    {"method": "magnus", "order": 1, "unraveling": "nonlinear"},
    {"method": "magnus", "order": 1, "unraveling": "nonlinear", "rkmk": true}
  ]
})";

const char* const kPresetRpm = R"({
  "model": {"name": "rpm", "params": {"theta_deg": 0.0, "phi_deg": 0.0}},
  "delta": {"value": 0.1, "unit": "us"},
  "t_stop": {"value": 50.0, "unit": "us"},
  "n_traj": 1000,
  "n_repeats": 10,
  "master_seed": 20240103,
  "fourier_p": 200,
  "observables": ["singlet_yield", "triplet_yield"],
  "compare_exact": true,
  "angles_deg": [0, 10, 20, 30, 40, 50, 60, 70, 80, 90],
  "schemes": [
    {"method": "magnus", "order": 1, "unraveling": "linear"},
    {"method": "magnus", "order": 2, "unraveling": "linear"},
    {"method": "magnus", "order": 3, "unraveling": "linear"},
    {"method": "magnus", "order": 4, "unraveling": "linear"}
  ]
})";

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string out = "out";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CommonFlags& f) {
  json j;
  if (!f.config.empty() && !f.preset.empty()) throw ConfigError("use either --config or --preset");
  if (!f.config.empty()) {
    j = read_json_file(f.config);
  } else if (!f.preset.empty()) {
    j = preset_config(f.preset);
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  if (f.seed) j["master_seed"] = *f.seed;
  return parse_run_config(j);
}

EnsembleOptions ensemble_options(const CommonFlags& f) {
  EnsembleOptions o;
  o.threads = f.threads;
  return o;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_meta(const std::string& dir, const std::string& command, const RunConfig& cfg,
                const std::vector<EnsembleEstimate>& runs, const CommonFlags& flags, json extra = {}) {
  json meta = {{"library_version", kLibraryVersion},
               {"command", command},
               {"master_seed", cfg.master_seed},
               {"threads", flags.threads},
               {"config", cfg.resolved}};
  json rs = json::array();
  for (const auto& r : runs) rs.push_back(run_json(r));
  meta["runs"] = rs;
  if (!extra.is_null()) meta["report"] = extra;
  write_text(dir + "/meta.json", meta.dump(2) + "\n");
}

void populations_plot(const std::string& path, const std::vector<EnsembleEstimate>& runs,
                      const std::optional<ExactSeries>& exact, const std::string& unit) {
  plot::LineChart chart;
  chart.title = "Populations";
  chart.x_label = "time [" + unit + "]";
  chart.y_label = "population";
  for (const auto& r : runs) {
    for (const auto& o : r.observables) {
      chart.series.push_back({r.scheme.label() + " " + o.name, r.times, o.mean, o.ci_halfwidth, false});
    }
  }
  if (exact) {
    for (std::size_t o = 0; o < exact->names.size(); ++o) {
      chart.series.push_back({"exact " + exact->names[o], exact->times, exact->values[o], {}, true});
    }
  }
  write_svg_file(path, plot::render_svg(chart));
}

void errors_plot(const std::string& path, const std::vector<EnsembleEstimate>& runs,
                 const std::vector<ErrorReport>& reports, const std::string& unit) {
  plot::LineChart chart;
  chart.title = "Error versus exact solution";
  chart.x_label = "time [" + unit + "]";
  chart.y_label = "mean |error| over observables";
  chart.log_y = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& rep = reports[k];
    std::vector<double> y(runs[k].times.size(), 0.0);
    for (const auto& per : rep.per_step) {
      for (std::size_t n = 0; n < y.size() && n < per.size(); ++n) y[n] += per[n] / rep.per_step.size();
    }
    chart.series.push_back({runs[k].scheme.label(), runs[k].times, y, {}, false});
  }
  write_svg_file(path, plot::render_svg(chart));
}

ExactSeries exact_for(const LindbladModel& model, double delta, int n_steps,
                      const std::vector<std::string>& observables) {
  return exact_series(model, model.initial.density_matrix(), delta, n_steps, observables);
}

EnsembleEstimate run_or_capture(const LindbladModel& model, const SchemeConfig& s, int n_steps,
                                const RunConfig& cfg, const EnsembleOptions& opt, bool& failed) {
  try {
    return run_ensemble(model, model.initial, s, n_steps, cfg.observables, cfg.n_traj, cfg.master_seed,
                        cfg.n_repeats, opt);
  } catch (const RunFailure& e) {
    std::cerr << "run failure (" << s.label() << "): " << e.what() << "\n";
    failed = true;
    return e.estimate();
  }
}

int cmd_run(const CommonFlags& flags) {
  const RunConfig cfg = load_config(flags);
  const LindbladModel model = build_model(cfg.model);
  ensure_out_dir(flags.out);
  std::vector<EnsembleEstimate> runs;
  if (cfg.observables.empty()) {
    write_meta(flags.out, "run", cfg, runs, flags);
    return kExitOk;
  }
  bool failed = false;
  const EnsembleOptions opt = ensemble_options(flags);
  for (const auto& s : cfg.schemes) runs.push_back(run_or_capture(model, s, cfg.n_steps(s.delta), cfg, opt, failed));
  std::optional<ExactSeries> exact;
  std::vector<ErrorReport> reports;
  if (cfg.compare_exact) {
    exact = exact_for(model, cfg.delta, cfg.n_steps(cfg.delta), cfg.observables);
    for (const auto& r : runs) {
      reports.push_back(r.scheme.delta == cfg.delta
                            ? error_vs_exact(r, *exact)
                            : error_vs_exact(r, exact_for(model, r.scheme.delta,
                                                          cfg.n_steps(r.scheme.delta), cfg.observables)));
    }
  }
  write_results_csv(flags.out + "/results.csv", runs, exact);
  json report = json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    report.push_back({{"scheme", runs[k].scheme.label()},
                      {"time_averaged_error", reports[k].mean},
                      {"ci_halfwidth", reports[k].ci_halfwidth}});
  }
  write_meta(flags.out, "run", cfg, runs, flags, report);
  populations_plot(flags.out + "/populations.svg", runs, exact, model.time_unit);
  if (cfg.compare_exact) errors_plot(flags.out + "/errors.svg", runs, reports, model.time_unit);
  return failed ? kExitRunFailure : kExitOk;
}

std::string delta_label(double d) {
  std::ostringstream s;
  s.precision(3);
  s << d;
  return s.str();
}

int cmd_compare(const CommonFlags& flags) {
  const RunConfig cfg = load_config(flags);
  if (cfg.schemes.size() < 2) throw ConfigError("compare: at least two schemes are required");
  if (cfg.observables.empty()) throw ConfigError("compare: observables must not be empty");
  const LindbladModel model = build_model(cfg.model);
  ensure_out_dir(flags.out);
  const EnsembleOptions opt = ensemble_options(flags);
  std::vector<EnsembleEstimate> runs;
  std::vector<ErrorReport> reports;
  std::vector<bool> failed_runs;
  for (const auto& s : cfg.schemes) {
    bool failed = false;
    const int n = cfg.n_steps(s.delta);
    runs.push_back(run_or_capture(model, s, n, cfg, opt, failed));
    failed_runs.push_back(failed);
    reports.push_back(error_vs_exact(runs.back(), exact_for(model, s.delta, n, cfg.observables)));
  }
  std::ostringstream table;
  table << "scheme,delta,time_averaged_error,ci_halfwidth,aborted,failed\n";
  table.precision(10);
  json report = json::array();
  plot::BarChart bars;
  bars.title = "Time-averaged error";
  bars.y_label = "error";
  bars.log_y = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& s = runs[k].scheme;
    table << s.label() << "," << s.delta << "," << reports[k].mean << "," << reports[k].ci_halfwidth << ","
          << runs[k].aborted << "," << (failed_runs[k] ? 1 : 0) << "\n";
    json p = json::object();
    for (std::size_t l = 0; l < runs.size(); ++l) {
      if (l == k || reports[k].repeat_errors.size() < 2 || reports[l].repeat_errors.size() < 2) continue;
      p[runs[l].scheme.label() + "@" + delta_label(runs[l].scheme.delta)] =
          stats::welch_less_pvalue(reports[k].repeat_errors, reports[l].repeat_errors);
    }
    report.push_back({{"scheme", s.label()},
                      {"delta", s.delta},
                      {"time_averaged_error", reports[k].mean},
                      {"ci_halfwidth", reports[k].ci_halfwidth},
                      {"failed", failed_runs[k]},
                      {"p_less_than", p}});
    bars.bars.push_back({s.label() + " @" + delta_label(s.delta), reports[k].mean, reports[k].ci_halfwidth});
  }
  write_text(flags.out + "/compare.csv", table.str());
  write_results_csv(flags.out + "/results.csv", runs, std::nullopt);
  write_meta(flags.out, "compare", cfg, runs, flags, report);
  write_svg_file(flags.out + "/errors.svg", plot::render_svg(bars));
  std::cout << table.str();
  return kExitOk;
}

int cmd_converge(const CommonFlags& flags) {
  const RunConfig cfg = load_config(flags);
  if (cfg.deltas.size() < 3) throw ConfigError("converge: at least three deltas are required");
  if (cfg.observables.empty()) throw ConfigError("converge: observables must not be empty");
  const LindbladModel model = build_model(cfg.model);
  ensure_out_dir(flags.out);
  json report = json::array();
  plot::LineChart chart;
  chart.title = "Weak convergence";
  chart.x_label = "step size [" + model.time_unit + "]";
  chart.y_label = "|E[O(T)] - exact|";
  chart.log_x = chart.log_y = true;
  for (const auto& s : cfg.schemes) {
    const WeakOrderResult r = estimate_weak_order(model, s, cfg.deltas, cfg.n_traj, cfg.observables.front(),
                                                  cfg.t_stop, cfg.master_seed, cfg.n_repeats,
                                                  ensemble_options(flags));
    json pts = json::array();
    plot::LineSeries line{s.label(), {}, {}, {}, false};
    for (const auto& p : r.points) {
      pts.push_back({{"delta", p.delta}, {"n_steps", p.n_steps}, {"error", p.error}, {"se", p.se},
                     {"below_noise_floor", p.below_noise_floor}});
      line.x.push_back(p.delta);
      line.y.push_back(p.error);
      line.err.push_back(3.0 * p.se);
    }
    chart.series.push_back(line);
    report.push_back({{"scheme", s.label()}, {"observable", cfg.observables.front()}, {"slope", r.slope},
                      {"slope_ci", r.slope_ci}, {"inconclusive", r.inconclusive}, {"points", pts}});
    std::cout << s.label() << " slope " << r.slope << " +- " << r.slope_ci
              << (r.inconclusive ? " (inconclusive)" : "") << "\n";
  }
  write_text(flags.out + "/converge.json", report.dump(2) + "\n");
  write_meta(flags.out, "converge", cfg, {}, flags, report);
  write_svg_file(flags.out + "/converge.svg", plot::render_svg(chart));
  return kExitOk;
}

int cmd_rpm_yield(const CommonFlags& flags) {
  const RunConfig cfg = load_config(flags);
  if (cfg.model.name != "rpm") throw ConfigError("rpm-yield: model must be the built-in rpm");
  if (cfg.angles_deg.empty()) throw ConfigError("rpm-yield: angles_deg must not be empty");
  for (double a : cfg.angles_deg) {
    if (a < 0.0 || a > 90.0) throw ConfigError("rpm-yield: angles must lie in [0, 90] degrees");
  }
  ensure_out_dir(flags.out);
  RunConfig run_cfg = cfg;
  run_cfg.observables = {"singlet_yield"};
  EnsembleOptions opt = ensemble_options(flags);
  opt.final_only = true;
  const int n_steps = cfg.n_steps(cfg.delta);
  const double horizon = cfg.exact_t_stop > 0.0 ? cfg.exact_t_stop : cfg.t_stop;
  std::ostringstream table;
  table.precision(10);
  table << "angle_deg,scheme,yield,ci_halfwidth,exact\n";
  std::vector<EnsembleEstimate> runs;
  std::vector<double> exact_curve;
  std::vector<plot::LineSeries> curves(cfg.schemes.size());
  bool failed = false;
  for (double a : cfg.angles_deg) {
    ModelSpec spec = cfg.model;
    spec.params["theta_deg"] = a;
    spec.params.erase("theta");
    const LindbladModel model = build_model(spec);
    const SteadyStateResult ss = steady_state(model, model.initial.density_matrix(), horizon);
    const double exact = (ss.rho * model.observable("singlet_yield")).trace().real();
    exact_curve.push_back(exact);
    for (std::size_t k = 0; k < cfg.schemes.size(); ++k) {
      EnsembleEstimate e = run_or_capture(model, cfg.schemes[k], n_steps, run_cfg, opt, failed);
      const auto& o = e.at("singlet_yield");
      table << a << "," << e.scheme.label() << "," << o.mean.back() << "," << o.ci_halfwidth.back() << ","
            << exact << "\n";
      curves[k].name = e.scheme.label();
      curves[k].x.push_back(a);
      curves[k].y.push_back(o.mean.back());
      curves[k].err.push_back(o.ci_halfwidth.back());
      runs.push_back(std::move(e));
    }
  }
  plot::LineChart chart;
  chart.title = "Singlet yield versus field angle";
  chart.x_label = "theta [deg]";
  chart.y_label = "singlet yield";
  chart.series = curves;
  chart.series.push_back({"exact", cfg.angles_deg, exact_curve, {}, true});
  write_text(flags.out + "/yields.csv", table.str());
  write_results_csv(flags.out + "/results.csv", runs, std::nullopt);
  write_meta(flags.out, "rpm-yield", cfg, runs, flags);
  write_svg_file(flags.out + "/rpm_yield.svg", plot::render_svg(chart));
  std::cout << table.str();
  return failed ? kExitRunFailure : kExitOk;
}

struct SamplerFlags {
  double delta = 0.25;
  int p = kDefaultFourierOrder;
  long samples = 1000000;
  int channels = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
};

int cmd_sampler_diag(const SamplerFlags& f) {
  if (!(f.delta > 0.0) || f.p < 1 || f.samples < 1 || f.channels < 1) {
    throw ConfigError("sampler-diag: delta > 0, p >= 1, samples >= 1, channels >= 1 required");
  }
  ensure_out_dir(f.out);
  const std::string path = f.out + "/sampler.csv";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  out << "sample,channel,w,a0,b,c2,c3,c4,q,same_channel_triple";
  for (int j = 0; j < f.channels; ++j) out << ",levy_" << j;
  out << "\n";
  for (long s = 0; s < f.samples; ++s) {
    CounterRng rng(f.seed, static_cast<std::uint64_t>(s), 1, StreamPurpose::diagnostics);
    const StochasticIncrementSet inc = sample_increments_series(f.channels, f.delta, f.p, 4, rng);
    for (int j = 0; j < f.channels; ++j) {
      const auto u = static_cast<std::size_t>(j);
      out << s << "," << j << "," << inc.w[u] << "," << inc.a0[u] << "," << inc.b[u] << "," << inc.c2[u]
          << "," << inc.c3[u] << "," << inc.c4[u] << "," << inc.q[u] << "," << inc.same_channel_triple(j);
      for (int k = 0; k < f.channels; ++k) out << "," << inc.levy_at(j, k);
      out << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
  return kExitOk;
}

}  // namespace

int RunConfig::n_steps(double step) const {
  const double ratio = t_stop / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("t_stop / delta must be a positive integer");
  }
  return static_cast<int>(n);
}

double to_model_time(const json& q, const std::string& model_unit) {
  if (!q.is_object() || !q.contains("value") || !q.contains("unit")) {
    throw ConfigError("time quantities must be {\"value\": number, \"unit\": string}");
  }
  double value = 0.0;
  std::string unit;
  try {
    value = q.at("value").get<double>();
    unit = q.at("unit").get<std::string>();
  } catch (const json::exception&) {
    throw ConfigError("time quantity: value must be a number and unit a string");
  }
  if (!std::isfinite(value)) throw ConfigError("time quantity: value must be finite");
  if (unit == model_unit) return value;
  const auto& si = si_seconds();
  const auto from = si.find(unit), to = si.find(model_unit);
  if (from == si.end() || to == si.end()) {
    throw ConfigError("time unit '" + unit + "' is not convertible to model unit '" + model_unit + "'");
  }
  return value * from->second / to->second;
}

LindbladModel build_model(const ModelSpec& spec) {
  try {
    if (!spec.file.empty()) return load_model_json(spec.file);
    const json& p = spec.params;
    if (spec.name == "tfim") {
      reject_unknown_keys(p, {"n_sites", "J", "h", "gamma"}, "tfim params");
      const int n = get_or<int>(p, "n_sites", 2);
      std::vector<double> gamma;
      if (p.contains("gamma") && p.at("gamma").is_array()) {
        gamma = p.at("gamma").get<std::vector<double>>();
      } else {
        gamma.assign(static_cast<std::size_t>(std::max(n, 0)), get_or<double>(p, "gamma", 0.1));
      }
      return build_tfim(n, get_or<double>(p, "J", 1.0), get_or<double>(p, "h", 1.0), gamma);
    }
    if (spec.name == "fmo") {
      reject_unknown_keys(p, {"h11", "h12", "h13", "h22", "h23", "h33", "alpha", "beta", "gamma", "hbar"},
                          "fmo params");
      FmoParameters f;
      f.h11 = get_or(p, "h11", f.h11);
      f.h12 = get_or(p, "h12", f.h12);
      f.h13 = get_or(p, "h13", f.h13);
      f.h22 = get_or(p, "h22", f.h22);
      f.h23 = get_or(p, "h23", f.h23);
      f.h33 = get_or(p, "h33", f.h33);
      f.alpha = get_or(p, "alpha", f.alpha);
      f.beta = get_or(p, "beta", f.beta);
      f.gamma = get_or(p, "gamma", f.gamma);
      f.hbar = get_or(p, "hbar", f.hbar);
      return build_fmo(f);
    }
    if (spec.name == "rpm") {
      reject_unknown_keys(p, {"theta", "phi", "theta_deg", "phi_deg", "b0", "a_x", "a_y", "a_z", "g_factor",
                              "decay_rate", "spin_scale", "mu_b", "hbar"},
                          "rpm params");
      RpmParameters r;
      constexpr double kDeg = std::numbers::pi / 180.0;
      r.theta = p.contains("theta_deg") ? kDeg * get_or<double>(p, "theta_deg", 0.0) : get_or(p, "theta", r.theta);
      r.phi = p.contains("phi_deg") ? kDeg * get_or<double>(p, "phi_deg", 0.0) : get_or(p, "phi", r.phi);
      r.b0 = get_or(p, "b0", r.b0);
      r.a_x = get_or(p, "a_x", r.a_x);
      r.a_y = get_or(p, "a_y", r.a_y);
      r.a_z = get_or(p, "a_z", r.a_z);
      r.g_factor = get_or(p, "g_factor", r.g_factor);
      r.decay_rate = get_or(p, "decay_rate", r.decay_rate);
      r.spin_scale = get_or(p, "spin_scale", r.spin_scale);
      r.mu_b = get_or(p, "mu_b", r.mu_b);
      r.hbar = get_or(p, "hbar", r.hbar);
      return build_rpm(r);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown built-in model '" + spec.name + "'");
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(j, {"model", "delta", "t_stop", "schemes", "n_traj", "n_repeats", "master_seed",
                          "fourier_p", "observables", "compare_exact", "deltas", "angles_deg", "exact_t_stop"},
                      "config");
  RunConfig c;
  if (!j.contains("model")) throw ConfigError("config: 'model' is required");
  const json& m = j.at("model");
  if (m.is_string()) {
    c.model.name = m.get<std::string>();
  } else if (m.is_object()) {
    reject_unknown_keys(m, {"name", "params", "file"}, "model");
    c.model.name = get_or<std::string>(m, "name", "");
    c.model.file = get_or<std::string>(m, "file", "");
    if (m.contains("params")) c.model.params = m.at("params");
    if (c.model.name.empty() == c.model.file.empty()) {
      throw ConfigError("model: exactly one of 'name' or 'file' is required");
    }
  } else {
    throw ConfigError("model: expected a name or an object");
  }
  std::string unit;
  LindbladModel model;
  if (c.model.file.empty()) {
    unit = builtin_time_unit(c.model.name);
  } else {
    try {
      model = load_model_json(c.model.file);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    unit = model.time_unit;
  }
  if (!j.contains("delta") || !j.contains("t_stop")) throw ConfigError("config: 'delta' and 't_stop' are required");
  c.delta = to_model_time(j.at("delta"), unit);
  c.t_stop = to_model_time(j.at("t_stop"), unit);
  if (!(c.delta > 0.0) || !(c.t_stop > 0.0)) throw ConfigError("config: delta and t_stop must be > 0");
  c.n_traj = get_or<int>(j, "n_traj", c.n_traj);
  c.n_repeats = get_or<int>(j, "n_repeats", c.n_repeats);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed);
  c.fourier_p = get_or<int>(j, "fourier_p", c.fourier_p);
  c.compare_exact = get_or<bool>(j, "compare_exact", c.compare_exact);
  if (c.n_traj < 1) throw ConfigError("config: n_traj must be >= 1");
  if (c.n_repeats < 1) throw ConfigError("config: n_repeats must be >= 1");
  if (c.fourier_p < 1) throw ConfigError("config: fourier_p must be >= 1");
  if (j.contains("schemes")) {
    if (!j.at("schemes").is_array() || j.at("schemes").empty()) {
      throw ConfigError("config: 'schemes' must be a non-empty list");
    }
    for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s, c.delta, c.fourier_p, unit));
  } else {
    c.schemes.push_back(parse_scheme(json::object(), c.delta, c.fourier_p, unit));
  }
  for (const auto& s : c.schemes) c.n_steps(s.delta);
  if (j.contains("observables")) {
    c.observables = get_or<std::vector<std::string>>(j, "observables", {});
    c.observables_given = true;
  } else {
    const LindbladModel built = c.model.file.empty() ? build_model(c.model) : model;
    for (const auto& o : built.observables) c.observables.push_back(o.name);
  }
  if (j.contains("deltas")) {
    if (!j.at("deltas").is_array()) throw ConfigError("config: 'deltas' must be a list");
    for (const auto& d : j.at("deltas")) {
      c.deltas.push_back(to_model_time(d, unit));
      c.n_steps(c.deltas.back());
    }
  }
  if (j.contains("angles_deg")) c.angles_deg = get_or<std::vector<double>>(j, "angles_deg", {});
  if (j.contains("exact_t_stop")) c.exact_t_stop = to_model_time(j.at("exact_t_stop"), unit);
  {
    const LindbladModel built = c.model.file.empty() ? build_model(c.model) : model;
    for (const auto& o : c.observables) {
      try {
        built.observable(o);
      } catch (const std::exception&) {
        throw ConfigError("config: unknown observable '" + o + "'");
      }
    }
  }
  json schemes = json::array();
  for (const auto& s : c.schemes) schemes.push_back(scheme_json(s));
  c.resolved = {{"model", {{"name", c.model.name}, {"file", c.model.file}, {"params", c.model.params}}},
                {"time_unit", unit},
                {"delta", c.delta},
                {"t_stop", c.t_stop},
                {"n_traj", c.n_traj},
                {"n_repeats", c.n_repeats},
                {"master_seed", c.master_seed},
                {"fourier_p", c.fourier_p},
                {"observables", c.observables},
                {"compare_exact", c.compare_exact},
                {"schemes", schemes},
                {"deltas", c.deltas},
                {"angles_deg", c.angles_deg},
                {"exact_t_stop", c.exact_t_stop}};
  return c;
}

std::vector<std::string> preset_names() { return {"tfim", "fmo", "rpm"}; }

json preset_config(const std::string& name) {
  if (name == "tfim") return json::parse(kPresetTfim);
  if (name == "fmo") return json::parse(kPresetFmo);
  if (name == "rpm") return json::parse(kPresetRpm);
  throw ConfigError("unknown preset '" + name + "'");
}

void write_results_csv(const std::string& path, const std::vector<EnsembleEstimate>& runs,
                       const std::optional<ExactSeries>& exact) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(12);
  out << "scheme,repeat,time,observable,mean,ci_halfwidth\n";
  for (const auto& r : runs) {
    const std::string label = r.scheme.label();
    for (const auto& o : r.observables) {
      for (std::size_t rep = 0; rep < o.repeat_means.size(); ++rep) {
        for (std::size_t n = 0; n < r.times.size(); ++n) {
          const double sd = std::sqrt(std::max(0.0, o.repeat_variances[rep][n]));
          out << label << "," << rep << "," << r.times[n] << "," << o.name << "," << o.repeat_means[rep][n]
              << "," << stats::ci_halfwidth(sd, static_cast<std::size_t>(r.n_traj)) << "\n";
        }
      }
      for (std::size_t n = 0; n < r.times.size(); ++n) {
        out << label << ",all," << r.times[n] << "," << o.name << "," << o.mean[n] << "," << o.ci_halfwidth[n]
            << "\n";
      }
    }
  }
  if (exact) {
    for (std::size_t o = 0; o < exact->names.size(); ++o) {
      for (std::size_t n = 0; n < exact->times.size(); ++n) {
        out << "exact,all," << exact->times[n] << "," << exact->names[o] << "," << exact->values[o][n] << ",0\n";
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

int cli_main(int argc, char** argv) {
  CLI::App app{"lindmag: stochastic Magnus integrators for Lindblad dynamics"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--preset", flags.preset, "built-in preset: tfim, fmo, rpm");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "OpenMP threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", flags.seed, "master seed override");
  };
  CLI::App* run = app.add_subcommand("run", "run the configured schemes and write results");
  CLI::App* compare = app.add_subcommand("compare", "time-averaged error table for several schemes");
  CLI::App* converge = app.add_subcommand("converge", "weak-order regression over a list of step sizes");
  CLI::App* rpm = app.add_subcommand("rpm-yield", "singlet yield versus field angle");
  for (CLI::App* sub : {run, compare, converge, rpm}) add_common(sub);
  CLI::App* models = app.add_subcommand("models", "model catalogue");
  models->require_subcommand(1);
  CLI::App* list = models->add_subcommand("list", "list built-in models and presets");
  SamplerFlags sf;
  CLI::App* diag = app.add_subcommand("sampler-diag", "dump stochastic integral samples to CSV");
  diag->add_option("--delta", sf.delta, "step size");
  diag->add_option("--p", sf.p, "Fourier truncation order");
  diag->add_option("--samples", sf.samples, "number of samples");
  diag->add_option("--channels", sf.channels, "number of Wiener channels");
  diag->add_option("--seed", sf.seed, "seed");
  diag->add_option("--out", sf.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (flags.threads > 0) omp_set_num_threads(flags.threads);
    if (run->parsed()) return cmd_run(flags);
    if (compare->parsed()) return cmd_compare(flags);
    if (converge->parsed()) return cmd_converge(flags);
    if (rpm->parsed()) return cmd_rpm_yield(flags);
    if (list->parsed()) {
      for (const auto& m : builtin_models()) std::cout << m.name << "\t" << m.description << "\n";
      std::cout << "presets:";
      for (const auto& p : preset_names()) std::cout << " " << p;
      std::cout << "\n";
      return kExitOk;
    }
    if (diag->parsed()) return cmd_sampler_diag(sf);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RunFailure& e) {
    std::cerr << "run failure: " << e.what() << "\n";
    return kExitRunFailure;
  } catch (const std::exception& e) {
    std::cerr << "run failure: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfig;
}

}  // namespace lindmag
