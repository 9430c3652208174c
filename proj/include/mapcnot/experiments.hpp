// Copyright 2026 The mapcnot Authors
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

#ifndef MAPCNOT_EXPERIMENTS_HPP_
#define MAPCNOT_EXPERIMENTS_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mapcnot/calibration.hpp"
#include "mapcnot/dj.hpp"
#include "mapcnot/io.hpp"

namespace mapcnot {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> n{"spectroscopy", "stark-ramsey", "calibrate-zgate", "calibrate-map-phases",
                                          "qst",          "qpt",          "cnot-fidelity",   "dj"};
  return n;
}

struct ExperimentConfig {
  std::string name;
  DeviceSpec device;
  bool align = true;  // move Q1 to the |12>/|03> alignment point before gate experiments
  bool noise = false;
  ReadoutModel readout;
  fs::path output_dir = "out";
  std::uint64_t rng_seed = 1;
  std::optional<MapCalibration> calibration;
  Ptree section;  // experiment-specific block
};

inline std::string section_name(const std::string& experiment) {
  std::string s = experiment;
  for (char& c : s) c = c == '-' ? '_' : c;
  return s;
}

// Reads the run file. Relative paths inside it resolve against its directory.
inline ExperimentConfig load_experiment_config(const std::string& name, const fs::path& path) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + name + "'");
  }
  const Ptree pt = load_ini(path);
  const fs::path base = path.parent_path();
  ExperimentConfig c;
  c.name = name;
  const Ptree run = pt.get_child("run", Ptree{});
  if (auto dev = run.get_optional<std::string>("device_file")) {
    c.device = device_from_ptree(load_ini(base / *dev));
  } else {
    c.device = device_from_ptree(pt.get_child("device", Ptree{}));
  }
  c.align = get_flag(run, "align", true);
  c.noise = get_flag(run, "noise", false);
  c.readout = readout_from_ptree(pt.get_child("readout", Ptree{}));
  c.readout.shot_count = get_or(run, "shots", c.readout.shot_count);
  if (c.readout.shot_count < 0) fail(ErrorCode::kConfigError, "shots must be non-negative");
  c.output_dir = base / get_or<std::string>(run, "output_dir", "out");
  c.rng_seed = get_or<std::uint64_t>(run, "rng_seed", 1);
  if (auto cal = run.get_optional<std::string>("calibration_file")) {
    c.calibration = calibration_from_ptree(load_ini(base / *cal));
  } else if (pt.get_child_optional("calibration")) {
    c.calibration = calibration_from_ptree(pt.get_child("calibration"));
  }
  c.section = pt.get_child(section_name(name), Ptree{});
  return c;
}

// Self-contained config that reproduces the run.
inline std::string resolved_config_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[run]\n"
    << "align = " << (c.align ? "on" : "off") << "\n"
    << "noise = " << (c.noise ? "on" : "off") << "\n"
    << "shots = " << c.readout.shot_count << "\n"
    << "rng_seed = " << c.rng_seed << "\n"
    << "output_dir = .\n\n"
    << "[device]\n" << device_to_ini(c.device) << "\n"
    << "[readout]\n"
    << "beta_ii = " << fmt_num(c.readout.beta_ii) << "\n"
    << "beta_zi = " << fmt_num(c.readout.beta_zi) << "\n"
    << "beta_iz = " << fmt_num(c.readout.beta_iz) << "\n"
    << "beta_zz = " << fmt_num(c.readout.beta_zz) << "\n"
    << "multinomial = " << (c.readout.multinomial ? "on" : "off") << "\n";
  if (c.calibration) o << "\n[calibration]\n" << calibration_to_ini(*c.calibration);
  if (!c.section.empty()) {
    o << "\n[" << section_name(c.name) << "]\n";
    for (const auto& [k, v] : c.section) o << k << " = " << v.data() << "\n";
  }
  return o.str();
}

namespace detail {

struct Run {
  const ExperimentConfig& cfg;
  OutputDir& out;
  std::mt19937_64 rng;
  Json summary;
  std::mt19937_64* shots() { return cfg.readout.shot_count > 0 ? &rng : nullptr; }
  double num(const std::string& key, double fallback) const { return get_or(cfg.section, key, fallback); }
  int integer(const std::string& key, int fallback) const { return get_or(cfg.section, key, fallback); }
  std::string text(const std::string& key, const std::string& fallback) const {
    return get_or<std::string>(cfg.section, key, fallback);
  }
  DeviceSpec gate_device() const { return cfg.align ? aligned(cfg.device) : cfg.device; }
};

inline std::vector<double> grid_from(const Run& r, const std::string& prefix, double lo, double hi, int n) {
  const int pts = r.integer(prefix + "_points", n);
  if (pts < 2) fail(ErrorCode::kConfigError, prefix + "_points must be at least 2");
  return linspace(r.num(prefix + "_min_mhz", lo), r.num(prefix + "_max_mhz", hi), pts);
}

inline MapCalibrationOptions map_options(const Run& r) {
  MapCalibrationOptions o;
  o.tone_detuning_mhz = r.num("tone_detuning_mhz", o.tone_detuning_mhz);
  o.rise_fall = r.num("rise_fall_ns", o.rise_fall);
  o.target_df_mhz = r.num("target_df_mhz", o.target_df_mhz);
  o.z_pulse_length = r.num("z_pulse_length_ns", o.z_pulse_length);
  const std::string mode = r.text("sweep_mode", "ideal");
  if (mode != "ideal" && mode != "simulate") fail(ErrorCode::kConfigError, "sweep_mode must be ideal or simulate");
  o.sweep.mode = mode == "ideal" ? SweepMode::kIdeal : SweepMode::kSimulate;
  o.sweep_grid = grid_from(r, "sweep", -8.0, 8.0, 65);
  return o;
}

// Calibration from the config, or a fresh calibration written next to the outputs.
inline MapCalibration obtain_calibration(Run& r, const DeviceSpec& spec) {
  if (r.cfg.calibration) return *r.cfg.calibration;
  const MapCalibrationReport rep = calibrate_map(spec, map_options(r), r.cfg.readout);
  r.out.write("calibration.ini", calibration_to_ini(rep.cal));
  return rep.cal;
}

inline std::string ramsey_csv(const RamseyTrace& t) {
  Csv c({"delay_ns", "p_q2_ground", "fit"});
  for (size_t k = 0; k < t.delays.size(); ++k) {
    const double d = t.delays[k];
    const double rate = std::isfinite(t.fitted_decay) ? 1e-3 / t.fitted_decay : 0.0;
    const double fit = t.fitted_offset + t.fitted_amplitude * std::exp(-rate * d) *
                                             std::cos(kTwoPi * t.fitted_freq * 1e-3 * d + t.fitted_phase);
    c.row({d, t.values[k], fit});
  }
  return c.str();
}

inline Json ramsey_json(const RamseyTrace& t) {
  return Json{{"control_state", t.control_state},
              {"fitted_freq_mhz", t.fitted_freq},
              {"fitted_decay_us", std::isfinite(t.fitted_decay) ? Json(t.fitted_decay) : Json(nullptr)},
              {"fitted_phase_rad", t.fitted_phase},
              {"fit_rms", t.fit_rms},
              {"fitted_amplitude", t.fitted_amplitude}};
}

inline std::string sweep_csv(const PhaseSweep& s) {
  Csv c({"detuning_mhz", "I(x)I", "X90(x)X90", "Y90(x)Y90"});
  for (size_t k = 0; k < s.detunings.size(); ++k) {
    c.row({s.detunings[k], s.curves.at("I(x)I")[k], s.curves.at("X90(x)X90")[k], s.curves.at("Y90(x)Y90")[k]});
  }
  return c.str();
}

inline void spectroscopy(Run& r) {
  DeviceSpec spec = r.cfg.device;
  const double target = r.num("target_delta_mhz", 0.0);
  if (target > 0) spec = calibrate_coupling(spec, target);
  const double half = r.num("flux_half_width_mhz", 20.0);
  const int fpts = r.integer("flux_points", 81);
  const std::vector<double> flux = default_alignment_grid(spec, half, fpts);
  const AlignmentResult al = level_alignment_scan(spec, flux);
  const double center = spec.q1_w01 + al.flux_param * 1e-3;
  const std::vector<double> probe =
      linspace(r.num("probe_min_ghz", center - 0.06), r.num("probe_max_ghz", center + 0.06), r.integer("probe_points", 241));
  const SpectrumTable t = three_tone_spectrum(spec, flux, probe, r.num("linewidth_mhz", 2.0));
  Csv c({"flux_mhz", "probe_ghz", "intensity"});
  for (size_t i = 0; i < flux.size(); ++i) {
    for (size_t j = 0; j < probe.size(); ++j) c.row({flux[i], probe[j], t.intensity(i, j)});
  }
  r.out.write("spectrum.csv", c.str());
  Csv g({"flux_mhz", "gap_mhz"});
  for (auto [f, gap] : al.eigenbranch_gap_curve) g.row({f, gap});
  r.out.write("gap_curve.csv", g.str());
  DeviceSpec at = spec;
  at.flux_offset = al.flux_param;
  r.out.write("device_aligned.ini", device_to_ini(at));
  r.summary = {{"flux_param_mhz", al.flux_param}, {"delta_mhz", al.delta},           {"epsilon_ghz", al.epsilon},
               {"epsilon_center_ghz", al.epsilon_center}, {"epsilon_prime_ghz", al.epsilon_prime},
               {"j_eff_mhz", spec.j_eff},  {"g_mhz", spec.g}};
}

inline StarkTone ramsey_tone(Run& r, const DeviceSpec& spec) {
  StarkTone tone;
  const AlignmentResult al = alignment_at(spec, spec.flux_offset);
  tone.frequency = r.num("frequency_ghz", al.epsilon + r.num("tone_detuning_mhz", -24.0) * 1e-3);
  tone.rise_fall = r.num("rise_fall_ns", 60.0);
  const double amp = r.num("amplitude_mhz", -1.0);
  tone.amplitude = amp >= 0 ? mhz(amp) : tune_stark_amplitude(spec, tone.frequency, r.num("target_df_mhz", 0.467));
  return tone;
}

inline void stark_ramsey_experiment(Run& r) {
  const DeviceSpec spec = r.gate_device();
  const StarkTone tone = ramsey_tone(r, spec);
  const double start = r.num("delay_start_ns", 121.0), stop = r.num("delay_stop_ns", 2001.0);
  const double step = r.num("delay_step_ns", 5.0);
  if (!(step > 0) || !(stop > start)) fail(ErrorCode::kConfigError, "bad delay grid");
  std::vector<double> delays;
  for (int k = 0; start + k * step <= stop + 1e-9; ++k) delays.push_back(start + k * step);
  RamseyOptions ro;
  ro.with_noise = r.cfg.noise;
  const RamseyTrace t0 = stark_ramsey(spec, tone, 0, delays, ro);
  const RamseyTrace t1 = stark_ramsey(spec, tone, 1, delays, ro);
  r.out.write("ramsey_q1_0.csv", ramsey_csv(t0));
  r.out.write("ramsey_q1_1.csv", ramsey_csv(t1));
  r.summary = {{"tone_frequency_ghz", tone.frequency},
               {"tone_amplitude_mhz", to_mhz(tone.amplitude)},
               {"rise_fall_ns", tone.rise_fall},
               {"control0", ramsey_json(t0)},
               {"control1", ramsey_json(t1)}};
  try {
    const TgResult tg = find_tg(t0, t1);
    r.summary["t_g_ns"] = tg.t_g;
    r.summary["delta_f_mhz"] = tg.delta_f;
    r.summary["anti_phase_delay_ns"] = tg.anti_phase_delay;
    r.summary["cross_check_mismatch"] = tg.relative_mismatch;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateFrequencies) throw;
    r.summary["t_g_ns"] = nullptr;
    r.summary["note"] = e.what();
  }
}

inline void calibrate_zgate(Run& r) {
  const double length = r.num("pulse_length_ns", 400.0);
  const int levels = r.integer("levels", 2);
  const double alpha = r.num("alpha_mhz", levels > 2 ? r.cfg.device.alpha1 : 0.0);
  const std::vector<double> grid = grid_from(r, "delta", -5.0, 5.0, 11);
  const PhaseMap pm = build_phase_map(length, levels, alpha, grid);
  Csv c({"delta_mhz", "phase_rad", "model_rad", "p_excited"});
  double worst_p = 0;
  for (double d : grid) {
    const SechResponse s = simulate_sech(length, d, levels, alpha);
    worst_p = std::max(worst_p, s.p_excited);
    c.row({d, s.phase, wrap_phase(pm.phase(d)), s.p_excited});
  }
  r.out.write("phase_map.csv", c.str());
  r.summary = {{"pulse_length_ns", length},         {"levels", levels},
               {"rho_eff_mhz", pm.rho_eff_mhz},     {"rho_analytic_mhz", 2e3 / length},
               {"sign", pm.sign},                   {"offset_rad", pm.offset},
               {"max_residual_rad", pm.max_residual}, {"max_excited_population", worst_p}};
}

inline void calibrate_map_phases(Run& r) {
  const DeviceSpec spec = r.gate_device();
  const MapCalibrationReport rep = calibrate_map(spec, map_options(r), r.cfg.readout);
  r.out.write("calibration.ini", calibration_to_ini(rep.cal));
  r.out.write("ramsey_q1_0.csv", ramsey_csv(rep.ramsey0));
  r.out.write("ramsey_q1_1.csv", ramsey_csv(rep.ramsey1));
  r.out.write("sweep_delta2.csv", sweep_csv(rep.sweep2));
  r.out.write("sweep_delta1.csv", sweep_csv(rep.sweep1));
  const CancellationCheck chk = verify_cancellation(spec, rep.cal, r.cfg.readout, true, r.cfg.noise, r.shots());
  r.out.write("cancellation_rho.csv", density_csv(chk.rho.data));
  const PhaseMap pm = build_phase_map(rep.cal.z_pulse_length);
  r.summary = {{"t_g_ns", rep.cal.t_g},
               {"t_g_fit_ns", rep.tg.t_g},
               {"anti_phase_delay_ns", rep.tg.anti_phase_delay},
               {"stark_frequency_ghz", rep.cal.stark.frequency},
               {"stark_amplitude_mhz", to_mhz(rep.cal.stark.amplitude)},
               {"delta_eps_mhz", rep.cal.delta_eps},
               {"delta_eps_prime_mhz", rep.cal.delta_eps_prime},
               {"phi_rad", rep.cal.phi},
               {"phi_prime_rad", rep.cal.phi_prime},
               {"phi_from_sweep_rad", wrap_phase(-pm.phase(rep.cal.delta2))},
               {"phi_prime_from_sweep_rad", wrap_phase(-pm.phase(rep.cal.delta1) - pm.phase(rep.cal.delta2))},
               {"delta2_mhz", rep.cal.delta2},
               {"delta1_mhz", rep.cal.delta1},
               {"cancellation_fidelity", chk.fidelity}};
}

inline Vec named_state(const std::string& s) {
  Vec v = Vec::Zero(4);
  const double h = 1.0 / std::sqrt(2.0);
  if (s == "ground") {
    v(0) = 1;
  } else if (s == "bell") {
    v(0) = v(3) = h;
  } else if (s == "plus") {
    v.setConstant(0.5);
  } else {
    fail(ErrorCode::kConfigError, "unknown state '" + s + "'");
  }
  return v;
}

inline void qst(Run& r) {
  const std::string state = r.text("state", "bell");
  Mat rho;
  Vec target;
  std::optional<GateChannel> gate;
  if (state == "cnot_output") {
    const DeviceSpec spec = r.gate_device();
    const bool sim = r.text("mode", "simulate") == "simulate";
    const MapCalibration cal = obtain_calibration(r, spec);
    gate = compose_cnot(spec, cal, r.cfg.noise, sim);
    const Mat prep = kron(ry(0.5 * kPi), rx(kPi));
    rho = prep * ground_state_4() * prep.adjoint();
    target = Vec::Zero(4);
    target(1) = target(2) = 1.0 / std::sqrt(2.0);
  } else {
    target = named_state(state);
    rho = target * target.adjoint();
  }
  const MeasurementRecord rec = run_qst(rho, gate ? &*gate : nullptr, r.cfg.readout, r.shots());
  const StateFit fit = reconstruct_state_mle(rec, r.cfg.readout);
  r.out.write("record.csv", record_csv(rec));
  r.out.write("rho.csv", density_csv(fit.rho.data));
  r.summary = {{"state", state},
               {"fidelity", state_fidelity(fit.rho, DensityMatrix::pure({2, 2}, target))},
               {"residual", fit.residual},
               {"iterations", fit.iterations}};
}

// Gate under test for qpt: ideal or simulated cNOT, Z90 on one qubit, or identity.
inline std::pair<GateChannel, Mat> qpt_gate(Run& r) {
  const std::string gate = r.text("gate", "cnot");
  const bool sim = r.text("mode", "ideal") == "simulate";
  if (gate == "identity") return {GateChannel::from_unitary(Mat::Identity(4, 4), 0.0), Mat::Identity(4, 4)};
  if (gate == "cnot") {
    if (!sim) return {GateChannel::from_unitary(cnot_matrix(), 1470.0), cnot_matrix()};
    const DeviceSpec spec = r.gate_device();
    const MapCalibration cal = obtain_calibration(r, spec);
    return {compose_cnot(spec, cal, r.cfg.noise, true), cnot_matrix()};
  }
  if (gate == "z90") {
    const int qubit = r.integer("qubit", 1);
    const double length = r.num("pulse_length_ns", 300.0);
    const PhaseMap pm = build_phase_map(length);
    const double d = pm.detuning_for(0.5 * kPi);
    const Mat z = phase_gate(0.5 * kPi);
    const Mat ideal = qubit == 1 ? on_q1(z) : on_q2(z);
    if (!sim) return {GateChannel::from_unitary(ideal, length), ideal};
    return {z_phase_gate(qubit, d, length, true, r.gate_device(), r.cfg.noise), ideal};
  }
  fail(ErrorCode::kConfigError, "unknown gate '" + gate + "'");
}

inline void qpt(Run& r) {
  const auto [channel, ideal] = qpt_gate(r);
  const MeasurementRecord rec = run_qpt(channel, r.cfg.readout, r.shots());
  const PtmFit fit = reconstruct_ptm_mle(rec, r.cfg.readout);
  const Ptm ri = ptm_of_unitary(ideal);
  r.out.write("record.csv", record_csv(rec));
  r.out.write_json("ptm.json", ptm_json(fit.r, ri, r.text("gate", "cnot")));
  r.out.write_json("channel.json", channel_json(channel));
  r.summary = {{"gate", r.text("gate", "cnot")},
               {"mode", r.text("mode", "ideal")},
               {"fidelity_mle", process_fidelity(fit.r, ri)},
               {"fidelity_channel", process_fidelity(ptm_of_channel(channel), ri)},
               {"residual", fit.residual},
               {"choi_min_eigenvalue", fit.choi_min_eig},
               {"iterations", fit.iterations},
               {"leakage", channel.total_leakage()}};
}

inline void cnot_fidelity(Run& r) {
  const DeviceSpec spec = r.gate_device();
  const MapCalibration cal = obtain_calibration(r, spec);
  const Ptm ri = ptm_of_unitary(cnot_matrix());
  const GateChannel clean = compose_cnot(spec, cal, false, true);
  const GateChannel noisy = compose_cnot(spec, cal, true, true);
  const GateChannel& used = r.cfg.noise ? noisy : clean;
  const MeasurementRecord rec = run_qpt(used, r.cfg.readout, r.shots());
  const PtmFit fit = reconstruct_ptm_mle(rec, r.cfg.readout);
  r.out.write("record.csv", record_csv(rec));
  r.out.write_json("ptm.json", ptm_json(fit.r, ri, "cnot"));
  r.out.write_json("channel.json", channel_json(used));
  r.summary = {{"duration_ns", used.duration},
               {"fidelity_noiseless", process_fidelity(ptm_of_channel(clean), ri)},
               {"fidelity_noisy", process_fidelity(ptm_of_channel(noisy), ri)},
               {"fidelity_qpt_mle", process_fidelity(fit.r, ri)},
               {"leakage_noiseless", clean.total_leakage()},
               {"noise", r.cfg.noise}};
}

inline void dj(Run& r) {
  const std::string mode = r.text("cnot", "ideal");
  GateChannel cnot = GateChannel::from_unitary(cnot_matrix(), 1470.0);
  if (mode == "simulate") {
    const DeviceSpec spec = r.gate_device();
    cnot = compose_cnot(spec, obtain_calibration(r, spec), r.cfg.noise, true);
  } else if (mode != "ideal") {
    fail(ErrorCode::kConfigError, "cnot must be ideal or simulate");
  }
  Json oracles = Json::array();
  bool all = true;
  for (int i = 0; i < 4; ++i) {
    const DjResult d = run_dj(OracleIndex(i), cnot);
    r.out.write("dj_oracle_" + std::to_string(i) + ".csv", density_csv(d.rho.data));
    all = all && d.correct;
    oracles.push_back({{"oracle", i},
                       {"kind", i < 2 ? "constant" : "balanced"},
                       {"p_query_zero", d.p_query_zero},
                       {"classified", d.classified_constant ? "constant" : "balanced"},
                       {"correct", d.correct},
                       {"fidelity_to_ideal", d.ideal_fidelity}});
  }
  r.summary = {{"cnot", mode}, {"all_correct", all}, {"oracles", oracles}};
}

}  // namespace detail

// Runs one experiment, writing outputs and manifest.json under cfg.output_dir.
inline Json run_experiment(const ExperimentConfig& cfg) {
  OutputDir out(cfg.output_dir);
  detail::Run r{cfg, out, std::mt19937_64(cfg.rng_seed), Json::object()};
  out.write("config.resolved.ini", resolved_config_ini(cfg));
  if (cfg.name == "spectroscopy") detail::spectroscopy(r);
  else if (cfg.name == "stark-ramsey") detail::stark_ramsey_experiment(r);
  else if (cfg.name == "calibrate-zgate") detail::calibrate_zgate(r);
  else if (cfg.name == "calibrate-map-phases") detail::calibrate_map_phases(r);
  else if (cfg.name == "qst") detail::qst(r);
  else if (cfg.name == "qpt") detail::qpt(r);
  else if (cfg.name == "cnot-fidelity") detail::cnot_fidelity(r);
  else if (cfg.name == "dj") detail::dj(r);
  else fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + cfg.name + "'");
  out.write_json("summary.json", r.summary);
  Json files = Json::array();
  for (const auto& [name, bytes] : out.files()) files.push_back({{"file", name}, {"bytes", bytes}});
  Json manifest = {{"tool", "mapcnot"},
                   {"experiment", cfg.name},
                   {"rng_seed", cfg.rng_seed},
                   {"noise", cfg.noise},
                   {"shots", cfg.readout.shot_count},
                   {"config", "config.resolved.ini"},
                   {"outputs", files}};
  out.write_json("manifest.json", manifest);
  return r.summary;
}

// 0 ok, 1 config, 2 simulation, 3 reconstruction.
inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kConfigError:
    case ErrorCode::kUnknownExperiment:
    case ErrorCode::kIoError:
      return 1;
    case ErrorCode::kOptimizerFailed:
      return 3;
    default:
      return 2;
  }
}

}  // namespace mapcnot

#endif  // MAPCNOT_EXPERIMENTS_HPP_
