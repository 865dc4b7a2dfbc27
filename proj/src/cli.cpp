#include "lasernoise/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lasernoise/analytic.hpp"
#include "lasernoise/dynamics.hpp"
#include "lasernoise/errors.hpp"
#include "lasernoise/fitting.hpp"
#include "lasernoise/heterodyne.hpp"
#include "lasernoise/io.hpp"
#include "lasernoise/spectra.hpp"
#include "lasernoise/synth.hpp"

namespace lasernoise {

namespace {

namespace fs = std::filesystem;

const nlohmann::json& require_field(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) {
    throw validation_error(std::string("config: missing field \"") + field + "\"");
  }
  return j.at(field);
}

double require_number(const nlohmann::json& j, const char* field) {
  const auto& v = require_field(j, field);
  if (!v.is_number()) {
    throw validation_error(std::string("config: field \"") + field + "\" must be numeric");
  }
  return v.get<double>();
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

SynthesisConfig parse_synthesis(const nlohmann::json& j) {
  SynthesisConfig cfg;
  if (j.contains("duration_s")) cfg.duration_s = j.at("duration_s").get<double>();
  if (j.contains("bandwidth_hz")) cfg.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

IntegratorConfig parse_integrator(const nlohmann::json& j) {
  IntegratorConfig icfg;
  if (j.contains("rel_tol")) icfg.rel_tol = j.at("rel_tol").get<double>();
  if (j.contains("abs_tol")) icfg.abs_tol = j.at("abs_tol").get<double>();
  if (j.contains("max_step_s")) icfg.max_step = j.at("max_step_s").get<double>();
  icfg.validate();
  return icfg;
}

nlohmann::json error_estimate_json(const ErrorEstimate& e) {
  nlohmann::json j;
  j["mean_error"] = e.mean_error;
  j["std_error"] = e.std_error;
  j["n_trials"] = e.n_trials;
  switch (e.method) {
    case ErrorMethod::Analytic: j["method"] = "analytic"; break;
    case ErrorMethod::MonteCarlo: j["method"] = "monte_carlo"; break;
    case ErrorMethod::Quadrature: j["method"] = "quadrature"; break;
  }
  return j;
}

}  // namespace

nlohmann::json cmd_synth(const nlohmann::json& config, const std::string& out_dir) {
  const NoiseModel model = NoiseModel::from_json(require_field(config, "model"));
  const SynthesisConfig cfg = parse_synthesis(require_field(config, "synthesis"));
  std::string kind = "phase";
  if (config.contains("kind")) kind = config.at("kind").get<std::string>();

  NoiseTrace trace = [&]() {
    if (kind == "phase") return synth_phase_trace(model, cfg);
    if (kind == "frequency_deviation") return synth_frequency_trace(model, cfg);
    if (kind == "relative_intensity") return synth_intensity_trace(model, cfg);
    throw validation_error("config: field \"kind\" must be phase | frequency_deviation | relative_intensity");
  }();

  const std::string csv = out_path(out_dir, "trace.csv");
  const std::string meta = out_path(out_dir, "trace_meta.json");
  write_trace_csv(trace, csv);
  write_json_file(meta, trace_sidecar(trace));

  nlohmann::json resolved = config;
  resolved["synthesis"]["duration_s"] = cfg.duration_s;
  resolved["synthesis"]["bandwidth_hz"] = cfg.bandwidth_hz;
  resolved["synthesis"]["base_seed"] = cfg.base_seed;
  auto manifest = make_manifest("synth", resolved, cfg.base_seed, {csv, meta});
  write_json_file(out_path(out_dir, "manifest.json"), manifest);
  return manifest;
}

nlohmann::json cmd_heterodyne(const nlohmann::json& config, const std::string& out_dir) {
  const NoiseModel model = NoiseModel::from_json(require_field(config, "model"));
  HeterodyneConfig cfg;
  cfg.delay_td_s = require_number(config, "delay_td_s");
  if (config.contains("tau_max_s")) cfg.tau_max_s = config.at("tau_max_s").get<double>();

  if (config.contains("freq_grid_hz")) {
    cfg.freq_grid_hz = config.at("freq_grid_hz").get<std::vector<double>>();
  } else {
    const double fmin = require_number(config, "freq_min_hz");
    const double fmax = require_number(config, "freq_max_hz");
    const auto npts = static_cast<std::size_t>(require_number(config, "freq_points"));
    if (!(fmax > fmin) || npts < 2) {
      throw validation_error("config: need freq_max_hz > freq_min_hz and freq_points >= 2");
    }
    for (std::size_t i = 0; i < npts; ++i) {
      cfg.freq_grid_hz.push_back(fmin + (fmax - fmin) * double(i) / double(npts - 1));
    }
  }

  std::vector<std::string> modes = {"exact"};
  if (config.contains("modes")) modes = config.at("modes").get<std::vector<std::string>>();

  std::vector<std::string> outputs;
  nlohmann::json sidecar;
  sidecar["delay_td_s"] = cfg.delay_td_s;
  sidecar["model"] = model.to_json();
  sidecar["normalization"] = "unit_integral";

  for (const auto& m : modes) {
    HetMode hm;
    if (m == "exact") hm = HetMode::Exact;
    else if (m == "weak_noise") hm = HetMode::WeakNoise;
    else throw validation_error("config: modes entries must be exact | weak_noise");
    const SpectrumCurve c = self_het_spectrum(model, cfg, hm);
    const std::string path = out_path(out_dir, "si_" + m + ".csv");
    write_csv_pairs(path, "freq_hz,psd", c.frequencies_hz, c.values);
    outputs.push_back(path);
    sidecar["si_" + m + "_delta_weight"] = c.delta_weight;
  }
  if (config.value("lineshape", false)) {
    const SpectrumCurve c = lineshape_SE(model, cfg, LineshapeMode::Exact);
    const std::string path = out_path(out_dir, "se_exact.csv");
    write_csv_pairs(path, "freq_hz,psd", c.frequencies_hz, c.values);
    outputs.push_back(path);
    sidecar["se_delta_weight"] = c.delta_weight;
  }
  const std::string meta = out_path(out_dir, "spectrum_meta.json");
  write_json_file(meta, sidecar);
  outputs.push_back(meta);

  auto manifest = make_manifest("heterodyne", config, 0, outputs);
  write_json_file(out_path(out_dir, "manifest.json"), manifest);
  return manifest;
}

nlohmann::json cmd_fit(const std::string& data_csv, const std::string& meta_json,
                       std::size_t n_bumps, const std::string& out_dir) {
  const CsvTable data = read_csv_pairs(data_csv);
  const nlohmann::json meta = read_json_file(meta_json);
  const double rbw = meta.value("rbw_hz", 0.0);
  const double td = require_number(meta, "td_s");
  const double window = meta.value("peak_window_hz", 25e3);

  SpectrumRecord rec = ingest_spectrum(data.col1, data.col2, rbw, td);
  const PeakFit peak = fit_peak(rec, window);
  normalize_record(&rec, peak, window);
  const NoiseFit fit = fit_noise_model(rec, n_bumps, window);

  nlohmann::json out;
  out["h0_hz2_per_hz"] = fit.h0;
  out["peak"] = {{"alpha", peak.alpha},
                 {"sigma_hz", peak.sigma},
                 {"s_p", peak.s_p},
                 {"fwhm_hz", peak.fwhm},
                 {"integrated_power", peak_integrated_power(peak)}};
  nlohmann::json bump_arr = nlohmann::json::array();
  for (const auto& b : fit.bumps) {
    bump_arr.push_back({{"hg_hz2_per_hz", b.hg},
                        {"sigma_g_hz", b.sigma_g},
                        {"fg_hz", b.fg},
                        {"s_g", b.s_g}});
  }
  out["bumps"] = bump_arr;
  out["residual_norm"] = fit.residual_norm;
  out["degenerate_bump_warning"] = fit.degenerate_bump_warning;
  out["covariance"] = fit.covariance;
  out["center_found_hz"] = rec.center_found_hz;
  out["noise_model"] = fit.to_noise_model().to_json();

  const std::string fit_path = out_path(out_dir, "noise_fit.json");
  write_json_file(fit_path, out);

  // human-readable report with a gate-error budget at the default benchmark
  const double omega0 = meta.value("omega0_rad_per_s", 2.0 * M_PI * 1e6);
  const double n_gate = meta.value("gate_multiple_n", 0.5);
  const ErrorBudget budget = error_budget(fit, omega0, n_gate);
  std::ostringstream rep;
  rep.precision(6);
  rep << "noise fit report\n";
  rep << "  center offset applied: " << rec.center_found_hz << " Hz\n";
  rep << "  peak: alpha=" << peak.alpha << " sigma=" << peak.sigma
      << " Hz, FWHM=" << peak.fwhm << " Hz\n";
  rep << "  white floor h0 = " << fit.h0 << " Hz^2/Hz\n";
  for (const auto& b : fit.bumps) {
    rep << "  bump fg=" << b.fg << " Hz: hg=" << b.hg << " Hz^2/Hz, sigma_g=" << b.sigma_g
        << " Hz, s_g=" << b.s_g << "\n";
  }
  rep << "  residual (rms log) = " << fit.residual_norm << "\n";
  rep << "gate-error budget (Omega0 = " << omega0 << " rad/s, N = " << n_gate << ")\n";
  rep << "  white-noise error: " << budget.white_error << "\n";
  rep << "  servo-bump threshold s_g < " << budget.sg_threshold << "\n";
  for (const auto& b : budget.bumps) {
    rep << "  bump at " << b.fg << " Hz: error " << b.error << (b.flagged ? "  [exceeds threshold]" : "")
        << "\n";
  }
  for (const auto& w : budget.avoid_rabi_hz) {
    rep << "  avoid Rabi frequencies (Omega0/2pi) in [" << w.first << ", " << w.second << "] Hz\n";
  }
  const std::string rep_path = out_path(out_dir, "fit_report.txt");
  std::ofstream repf(rep_path);
  if (!repf) throw io_error("cannot open " + rep_path);
  repf << rep.str();

  nlohmann::json resolved;
  resolved["data_csv"] = data_csv;
  resolved["meta"] = meta;
  resolved["n_bumps"] = n_bumps;
  auto manifest = make_manifest("fit", resolved, 0, {fit_path, rep_path});
  write_json_file(out_path(out_dir, "manifest.json"), manifest);
  return manifest;
}

namespace {

DriveConfig parse_drive(const nlohmann::json& j) {
  const std::string type = require_field(j, "type").get<std::string>();
  if (type == "one_photon") {
    OnePhotonDrive d;
    d.omega0 = require_number(j, "omega0_rad_per_s");
    d.validate();
    return d;
  }
  if (type == "two_photon_ladder") {
    TwoPhotonLadderDrive d;
    d.omega1 = require_number(j, "omega1_rad_per_s");
    d.omega2 = require_number(j, "omega2_rad_per_s");
    d.delta1 = require_number(j, "delta1_rad_per_s");
    d.delta2 = require_number(j, "delta2_rad_per_s");
    d.validate();
    return d;
  }
  if (type == "lambda") {
    LambdaDrive d;
    d.omega1 = require_number(j, "omega1_rad_per_s");
    d.omega2 = require_number(j, "omega2_rad_per_s");
    d.delta = require_number(j, "delta_rad_per_s");
    d.correlated_phase = j.value("correlated_phase", true);
    d.validate();
    return d;
  }
  throw validation_error("config: drive.type must be one_photon | two_photon_ladder | lambda");
}

GateSpec parse_gate(const nlohmann::json& j) {
  GateSpec g;
  if (j.contains("n")) g.n = j.at("n").get<double>();
  if (j.contains("t_g_s")) g.t_g = j.at("t_g_s").get<double>();
  const std::string st = j.value("initial_state", "x_plus");
  if (st == "x_plus") g.initial_state = InitialState::XPlus;
  else if (st == "y_plus") g.initial_state = InitialState::YPlus;
  else if (st == "z_plus") g.initial_state = InitialState::ZPlus;
  else throw validation_error("config: gate.initial_state must be x_plus | y_plus | z_plus");
  g.validate();
  return g;
}

NoiseChannels parse_noise(const nlohmann::json& j) {
  NoiseChannels n;
  if (j.contains("phase_laser1")) n.phase1 = NoiseModel::from_json(j.at("phase_laser1"));
  if (j.contains("phase_laser2")) n.phase2 = NoiseModel::from_json(j.at("phase_laser2"));
  if (j.contains("intensity_laser1")) n.intensity1 = NoiseModel::from_json(j.at("intensity_laser1"));
  if (j.contains("intensity_laser2")) n.intensity2 = NoiseModel::from_json(j.at("intensity_laser2"));
  return n;
}

ErrorEstimate run_simulation_once(const nlohmann::json& config) {
  const DriveConfig drive = parse_drive(require_field(config, "drive"));
  const GateSpec gate = parse_gate(require_field(config, "gate"));
  const NoiseChannels noise = parse_noise(config.value("noise", nlohmann::json::object()));
  const auto trials = require_field(config, "trials").get<long long>();
  if (trials <= 0) throw validation_error("config: trials must be > 0");
  const auto seed = config.value("base_seed", std::uint64_t{1});
  const SynthesisConfig scfg = parse_synthesis(config.value("synthesis", nlohmann::json::object()));
  const IntegratorConfig icfg = parse_integrator(config.value("integrator", nlohmann::json::object()));
  return monte_carlo_error(drive, gate, noise, static_cast<std::size_t>(trials), seed, icfg, scfg)
      .estimate;
}

}  // namespace

nlohmann::json cmd_simulate(nlohmann::json config, const std::string& out_dir,
                            long long trials_override, long long seed_override) {
  if (trials_override > 0) config["trials"] = trials_override;
  if (seed_override >= 0) config["base_seed"] = static_cast<std::uint64_t>(seed_override);
  if (!config.contains("trials")) config["trials"] = 500;

  std::vector<std::string> outputs;
  nlohmann::json result;

  if (config.contains("sweep")) {
    const auto& sweep = config.at("sweep");
    const std::string pointer = require_field(sweep, "pointer").get<std::string>();
    std::vector<std::string> mirrors;
    if (sweep.contains("mirror")) mirrors = sweep.at("mirror").get<std::vector<std::string>>();
    const auto values = require_field(sweep, "values").get<std::vector<double>>();
    if (values.empty()) throw validation_error("config: sweep.values must be non-empty");

    std::vector<double> errs, stderrs;
    for (double v : values) {
      nlohmann::json point = config;
      point.erase("sweep");
      point[nlohmann::json::json_pointer(pointer)] = v;
      for (const auto& m : mirrors) point[nlohmann::json::json_pointer(m)] = v;
      const ErrorEstimate e = run_simulation_once(point);
      errs.push_back(e.mean_error);
      stderrs.push_back(e.std_error);
    }
    const std::string sweep_path = out_path(out_dir, "sweep.csv");
    std::ofstream sf(sweep_path);
    if (!sf) throw io_error("cannot open " + sweep_path);
    sf.precision(17);
    sf << "sweep_param,error,stderr\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      sf << values[i] << ',' << errs[i] << ',' << stderrs[i] << '\n';
    }
    outputs.push_back(sweep_path);
    result["sweep_pointer"] = pointer;
    result["sweep_values"] = values;
    result["errors"] = errs;
    result["std_errors"] = stderrs;
  } else {
    const ErrorEstimate e = run_simulation_once(config);
    result = error_estimate_json(e);
  }

  const std::string res_path = out_path(out_dir, "result.json");
  write_json_file(res_path, result);
  outputs.push_back(res_path);

  auto manifest = make_manifest("simulate", config, config.value("base_seed", std::uint64_t{1}),
                                outputs);
  write_json_file(out_path(out_dir, "manifest.json"), manifest);
  return manifest;
}

namespace {

// Closed-form error for a model decomposed into white / bump / band-limited
// components (contributions additive in the weak-noise regime).
double closed_form_error(const NoiseModel& model, double n, double omega0, Averaging avg) {
  switch (model.kind()) {
    case NoiseKind::White:
      return error_white_1p(model.h0(), n, omega0, avg).value;
    case NoiseKind::BandLimitedWhite:
      return error_bandlimited_1p(model.h0(), model.fc(), n, omega0, avg).value;
    case NoiseKind::ServoBump: {
      const double sg = servo_bump_power(model.hg(), model.sigma_g(), model.fg()).value;
      return error_servo_1p(sg, model.fg(), n, omega0, avg).value;
    }
    case NoiseKind::Composite: {
      double tot = 0.0;
      for (const auto& t : model.terms()) tot += closed_form_error(t, n, omega0, avg);
      return tot;
    }
  }
  return 0.0;
}

}  // namespace

nlohmann::json cmd_analytic(const nlohmann::json& config, const std::string& out_dir) {
  const auto& q = require_field(config, "query");
  const std::string drive = require_field(q, "drive").get<std::string>();
  double omega0;
  if (drive == "one_photon") {
    omega0 = require_number(q, "omega0_rad_per_s");
  } else if (drive == "two_photon") {
    omega0 = require_number(q, "omega_tilde0_rad_per_s");
  } else {
    throw validation_error("config: query.drive must be one_photon | two_photon");
  }
  const std::string avg_s = q.value("averaging", "initial_x");
  Averaging avg;
  if (avg_s == "initial_x") avg = Averaging::InitialX;
  else if (avg_s == "state_averaged") avg = Averaging::StateAveraged;
  else throw validation_error("config: query.averaging must be initial_x | state_averaged");

  ErrorEstimate est;
  double phase_error = 0.0;
  bool used_quadrature = false;

  const bool has_model = config.contains("noise_model");
  const bool has_t_g = q.contains("t_g_s");
  if (has_model) {
    const NoiseModel m1 = NoiseModel::from_json(config.at("noise_model"));
    std::optional<NoiseModel> m2;
    if (config.contains("noise_model_laser2")) {
      m2 = NoiseModel::from_json(config.at("noise_model_laser2"));
    } else if (drive == "two_photon") {
      m2 = m1;
    }
    if (has_t_g) {
      const double t_g = q.at("t_g_s").get<double>();
      phase_error = error_general(m1, omega0, t_g, avg).value;
      if (m2) phase_error += error_general(*m2, omega0, t_g, avg).value;
      used_quadrature = true;
    } else {
      const double n = require_number(q, "n");
      phase_error = closed_form_error(m1, n, omega0, avg);
      if (m2) phase_error += closed_form_error(*m2, n, omega0, avg);
    }
  }

  double intensity_error = 0.0;
  if (config.contains("intensity_variances")) {
    const auto vars = config.at("intensity_variances").get<std::vector<double>>();
    const double n = require_number(q, "n");
    intensity_error = error_intensity(vars, n).value;
  }
  if (!has_model && !config.contains("intensity_variances")) {
    throw validation_error("config: provide noise_model and/or intensity_variances");
  }

  est.mean_error = phase_error + intensity_error;
  est.std_error = 0.0;
  est.n_trials = 0;
  est.method = used_quadrature ? ErrorMethod::Quadrature : ErrorMethod::Analytic;

  const std::string res_path = out_path(out_dir, "result.json");
  write_json_file(res_path, error_estimate_json(est));
  auto manifest = make_manifest("analytic", config, 0, {res_path});
  write_json_file(out_path(out_dir, "manifest.json"), manifest);
  return manifest;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"laser phase/intensity noise and quantum-gate error toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path, meta_path;
  long long trials = 0, seed = -1;
  std::size_t n_bumps = 0;

  auto* synth = app.add_subcommand("synth", "synthesize a noise trace");
  synth->add_option("config", config_path, "config JSON")->required();
  synth->add_option("--out-dir", out_dir);
  synth->add_option("--seed", seed);

  auto* het = app.add_subcommand("heterodyne", "compute lineshape / self-heterodyne spectra");
  het->add_option("config", config_path, "config JSON")->required();
  het->add_option("--out-dir", out_dir);

  auto* fit = app.add_subcommand("fit", "fit a measured self-heterodyne spectrum");
  fit->add_option("data", data_path, "CSV freq_hz,psd")->required();
  fit->add_option("meta", meta_path, "JSON metadata {rbw_hz, td_s}")->required();
  fit->add_option("--bumps", n_bumps, "number of servo bumps");
  fit->add_option("--out-dir", out_dir);

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo gate-error simulation");
  sim->add_option("config", config_path, "config JSON")->required();
  sim->add_option("--out-dir", out_dir);
  sim->add_option("--trials", trials);
  sim->add_option("--seed", seed);

  auto* ana = app.add_subcommand("analytic", "closed-form / quadrature gate errors");
  ana->add_option("config", config_path, "query JSON")->required();
  ana->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) {
      nlohmann::json cfg = read_json_file(config_path);
      if (seed >= 0) cfg["synthesis"]["base_seed"] = static_cast<std::uint64_t>(seed);
      cmd_synth(cfg, out_dir);
    } else if (het->parsed()) {
      cmd_heterodyne(read_json_file(config_path), out_dir);
    } else if (fit->parsed()) {
      cmd_fit(data_path, meta_path, n_bumps, out_dir);
    } else if (sim->parsed()) {
      cmd_simulate(read_json_file(config_path), out_dir, trials, seed);
    } else if (ana->parsed()) {
      cmd_analytic(read_json_file(config_path), out_dir);
    }
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace lasernoise
