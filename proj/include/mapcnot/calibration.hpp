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

#ifndef MAPCNOT_CALIBRATION_HPP_
#define MAPCNOT_CALIBRATION_HPP_

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include "mapcnot/device.hpp"
#include "mapcnot/gates.hpp"
#include "mapcnot/optim.hpp"
#include "mapcnot/pulse.hpp"
#include "mapcnot/tomography.hpp"

namespace mapcnot {

struct RamseyTrace {
  std::vector<double> delays;  // ns
  std::vector<double> values;  // population of Q2 in |0>
  int control_state = 0;
  double fitted_freq = 0;      // MHz, magnitude
  double fitted_decay = 0;     // us, infinity when no decay is resolved
  double fitted_phase = 0;     // rad, for a positive fitted amplitude
  double fitted_amplitude = 0;
  double fitted_offset = 0;
  double fit_rms = 0;
};

struct DampedSine {
  double offset = 0, amplitude = 0, rate = 0, freq = 0, phase = 0;  // rate 1/ns, freq cycles/ns
  double rms = 0;
  double operator()(double t) const {
    return offset + amplitude * std::exp(-rate * t) * std::cos(kTwoPi * freq * t + phase);
  }
};

// Least-squares damped sinusoid, frequency seeded from the periodogram peak.
inline DampedSine fit_damped_sine(const std::vector<double>& t, const std::vector<double>& y) {
  const int n = static_cast<int>(t.size());
  if (n < 5 || t.size() != y.size()) fail(ErrorCode::kFitFailed, "need at least five samples");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= n;
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= n;
  DampedSine out;
  out.offset = mean;
  if (std::sqrt(var) < 1e-7) return out;  // flat trace: no fringe

  double min_dt = 1e300;
  for (int i = 1; i < n; ++i) min_dt = std::min(min_dt, t[i] - t[i - 1]);
  const double span = t.back() - t.front();
  if (!(min_dt > 0) || !(span > 0)) fail(ErrorCode::kFitFailed, "delays must be increasing");
  const double f_max = 0.5 / min_dt;
  const double df = 0.1 / span;
  double best_f = 0, best_p = -1;
  for (double f = 0; f <= f_max; f += df) {
    cd acc = 0;
    for (int i = 0; i < n; ++i) acc += (y[i] - mean) * std::exp(cd(0, -kTwoPi * f * t[i]));
    if (std::norm(acc) > best_p) {
      best_p = std::norm(acc);
      best_f = f;
    }
  }
  // Linear solve for cos/sin quadratures at the seed frequency.
  RMat a(n, 3);
  RVec b(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(kTwoPi * best_f * t[i]);
    a(i, 2) = std::sin(kTwoPi * best_f * t[i]);
    b(i) = y[i];
  }
  RVec q = a.colPivHouseholderQr().solve(b);
  RVec x0(5);
  x0 << q(0), std::hypot(q(1), q(2)), 0.0, best_f, std::atan2(-q(2), q(1));
  auto model = [&](const RVec& x, double ti) {
    return x(0) + x(1) * std::exp(-x(2) * ti) * std::cos(kTwoPi * x(3) * ti + x(4));
  };
  auto res = [&](const RVec& x, RVec& r) {
    for (int i = 0; i < n; ++i) r(i) = model(x, t[i]) - y[i];
  };
  auto fit = least_squares(res, n, x0);
  RVec x = fit.x;
  if (x(1) < 0) {
    x(1) = -x(1);
    x(4) += kPi;
  }
  if (x(3) < 0) {
    x(3) = -x(3);
    x(4) = -x(4);
  }
  out = {x(0), x(1), x(2), x(3), wrap_phase(x(4)), std::sqrt(fit.cost / n)};
  if (!std::isfinite(fit.cost) || out.rms > 0.05 * out.amplitude) {
    fail(ErrorCode::kFitFailed, "damped-sine residual too large");
  }
  return out;
}

struct RamseyOptions {
  double dt = 0.0625;
  bool with_noise = false;
  double dissipator_chunk = 1.0;
};

// pi/2 (Q2) - Stark tone for each delay - pi/2 (Q2), Q1 held in control_state.
inline RamseyTrace stark_ramsey(const DeviceSpec& spec, const StarkTone& stark, int control_state,
                                const std::vector<double>& delays, const RamseyOptions& ro = {}) {
  if (control_state != 0 && control_state != 1) fail(ErrorCode::kBadIndex, "control state must be 0 or 1");
  if (delays.empty()) fail(ErrorCode::kInvalidArgument, "no delays");
  for (size_t i = 1; i < delays.size(); ++i) {
    if (!(delays[i] > delays[i - 1])) fail(ErrorCode::kInvalidArgument, "delays must increase");
  }
  const std::vector<int> dims = spec.dims();
  const int n = product(dims);
  const Mat half = embed_qubit_gate(ry(0.5 * kPi), dims, 1);
  Vec psi0 = basis_ket(dims, {control_state, 0});
  psi0 = half * psi0;
  const NoiseSpec noise = ro.with_noise ? NoiseSpec::from_device(spec) : NoiseSpec::none();

  auto population = [&](const Mat& rho_q) {
    const Mat r = half * rho_q * half.adjoint();
    double p = 0;
    for (int q1 = 0; q1 < dims[0]; ++q1) p += r(ravel({q1, 0}, dims), ravel({q1, 0}, dims)).real();
    return p;
  };

  RamseyTrace tr;
  tr.control_state = control_state;
  tr.delays = delays;
  const double r = stark.rise_fall;
  StarkTone tone = stark;

  // Full evolution for one delay; used for short delays and as the generic path.
  auto direct = [&](double tau) {
    tone.duration = tau;
    StarkFrame f = stark_frame(spec, tone);
    const double dt = tau / std::max(1.0, std::ceil(tau / ro.dt));
    if (!ro.with_noise) {
      const Vec out = f.to_qubit(evolve_unitary(f.h, {f.drive}, tau, dt), tau) * psi0;
      return population(out * out.adjoint());
    }
    std::vector<Mat> st{psi0 * psi0.adjoint()};
    EvolveOptions eo;
    eo.dissipator_chunk = ro.dissipator_chunk;
    evolve_lindblad_batch(st, dims, f.h, {f.drive}, noise, tau, dt, eo);
    const Mat k = f.to_qubit(Mat::Identity(n, n), tau);
    return population(k * st[0] * k.adjoint());
  };

  // Ramps are fixed for tau >= 2r, so the plateau is handled separately.
  StarkTone pair = stark;
  pair.duration = 2 * r;
  StarkFrame f = stark_frame(spec, pair);
  const double amp = stark.amplitude / std::sqrt(2.0);
  Drive flat = f.drive;
  flat.envelope = Envelope::constant(amp);
  Drive fall = f.drive;
  fall.envelope = f.drive.envelope.shifted(r);
  const std::vector<Drive> ramp_drives{f.drive}, flat_drives{flat}, fall_drives{fall};
  const int nr = static_cast<int>(std::lround(r / ro.dt));
  const bool fast = r > 0 && std::abs(nr * ro.dt - r) < 1e-9;
  Mat u_up = Mat::Identity(n, n), u_down = Mat::Identity(n, n);
  if (fast) {
    detail::Stepper st(f.h, ramp_drives, ro.dt, 0.0);
    u_up = st.run(0, nr);
    u_down = st.run(nr, 2 * nr);
  }
  const Eigen::SelfAdjointEigenSolver<Mat> plateau(
      detail::step_hamiltonian(f.h, flat_drives, detail::coefficients(flat_drives, 0, 0)));

  std::vector<Mat> state;
  double plateau_done = 0;
  bool started = false;
  EvolveOptions eo;
  eo.dissipator_chunk = ro.dissipator_chunk;
  for (double tau : delays) {
    if (!fast || tau < 2 * r + 1e-9) {
      tr.values.push_back(direct(tau));
      continue;
    }
    const double plat = tau - 2 * r;
    const Mat k = f.to_qubit(Mat::Identity(n, n), tau);
    if (!ro.with_noise) {
      const Vec ph = (plateau.eigenvalues().cast<cd>() * cd(0, -plat)).array().exp();
      const Mat u_plat = plateau.eigenvectors() * ph.asDiagonal() * plateau.eigenvectors().adjoint();
      const Vec out = k * u_down * u_plat * u_up * psi0;
      tr.values.push_back(population(out * out.adjoint()));
      continue;
    }
    if (!started) {
      state = {psi0 * psi0.adjoint()};
      evolve_lindblad_batch(state, dims, f.h, ramp_drives, noise, r, ro.dt, eo);
      started = true;
    }
    const double step = plat - plateau_done;
    if (step > 1e-12) {
      const double dt = step / std::max(1.0, std::ceil(step / ro.dt - 1e-9));
      evolve_lindblad_batch(state, dims, f.h, flat_drives, noise, step, dt, eo);
      plateau_done = plat;
    }
    std::vector<Mat> tail = state;
    evolve_lindblad_batch(tail, dims, f.h, fall_drives, noise, r, ro.dt, eo);
    tr.values.push_back(population(k * tail[0] * k.adjoint()));
  }

  const DampedSine fit = fit_damped_sine(tr.delays, tr.values);
  tr.fitted_freq = fit.freq * 1e3;
  tr.fitted_decay = fit.rate > 1e-12 ? 1e-3 / fit.rate : std::numeric_limits<double>::infinity();
  tr.fitted_phase = fit.phase;
  tr.fitted_amplitude = fit.amplitude;
  tr.fitted_offset = fit.offset;
  tr.fit_rms = fit.rms;
  return tr;
}

struct TgResult {
  double t_g = 0;              // ns, 1/(2|f0 - f1|)
  double delta_f = 0;          // MHz, |f0 - f1|
  double anti_phase_delay = 0; // ns, first delay where the fitted fringes are pi apart
  double relative_mismatch = 0;
};

// Gate time from the two conditional Ramsey frequencies.
inline TgResult find_tg(const RamseyTrace& q1_ground, const RamseyTrace& q1_excited) {
  const double df = std::abs(q1_ground.fitted_freq - q1_excited.fitted_freq);
  if (df < 0.01) fail(ErrorCode::kDegenerateFrequencies, "conditional frequencies differ by less than 10 kHz");
  TgResult out;
  out.delta_f = df;
  out.t_g = 1e3 / (2.0 * df);
  // Fitted phase difference 2 pi (f0 - f1) t + (p0 - p1) reaches pi (mod 2 pi) first at:
  const double w = kTwoPi * (q1_ground.fitted_freq - q1_excited.fitted_freq) * 1e-3;
  double dp = q1_ground.fitted_phase - q1_excited.fitted_phase;
  double t = (kPi - dp) / w;
  const double period = std::abs(kTwoPi / w);
  t = std::fmod(t, period);
  if (t < 0) t += period;
  // Prefer the crossing that belongs to the same half-period as the nominal t_g.
  if (std::abs(t + period - out.t_g) < std::abs(t - out.t_g)) t += period;
  out.anti_phase_delay = t;
  out.relative_mismatch = std::abs(t - out.t_g) / out.t_g;
  return out;
}

struct StarkShifts {
  double f_ground = 0;  // MHz, Q2 frequency shift with Q1 in |0>
  double f_excited = 0; // MHz, same with Q1 in |1>, static ZZ included
  double delta_f() const { return f_ground - f_excited; }
};

// Steady-state conditional frequencies from the dressed plateau Hamiltonian.
inline StarkShifts stark_shift_estimate(const DeviceSpec& spec, double tone_ghz, double amplitude, int steps = 40) {
  StarkTone tone;
  tone.frequency = tone_ghz;
  tone.duration = 1.0;
  StarkFrame f = stark_frame(spec, tone);
  const std::vector<int> dims = f.dims;
  const int n = static_cast<int>(f.h.rows());
  const Mat coupling = f.drive.lowering + f.drive.lowering.adjoint();
  std::vector<int> idx{ravel({0, 0}, dims), ravel({0, 1}, dims), ravel({1, 0}, dims), ravel({1, 1}, dims)};
  std::vector<Vec> track(4);
  RVec energy(4);
  for (int k = 0; k < 4; ++k) track[k] = Vec::Unit(n, idx[k]);
  for (int s = 0; s <= steps; ++s) {
    const double a = amplitude * s / steps;
    Eigen::SelfAdjointEigenSolver<Mat> es(f.h + 0.5 * (a / std::sqrt(2.0)) * coupling);
    for (int k = 0; k < 4; ++k) {
      int best = 0;
      double ov = -1;
      for (int m = 0; m < n; ++m) {
        const double o = std::norm(es.eigenvectors().col(m).dot(track[k]));
        if (o > ov) {
          ov = o;
          best = m;
        }
      }
      track[k] = es.eigenvectors().col(best);
      energy(k) = es.eigenvalues()(best) - f.k_diag(idx[k]);
    }
  }
  StarkShifts out;
  out.f_ground = -(energy(1) - energy(0)) / kTwoPi * 1e3;
  out.f_excited = -(energy(3) - energy(2)) / kTwoPi * 1e3;
  return out;
}

// Drive amplitude giving the requested |f0 - f1| (MHz) at the given tone.
inline double tune_stark_amplitude(const DeviceSpec& spec, double tone_ghz, double target_df_mhz,
                                   double max_amplitude = mhz(80.0)) {
  auto df = [&](double a) { return std::abs(stark_shift_estimate(spec, tone_ghz, a).delta_f()); };
  double lo = 0, hi = max_amplitude / 16;
  if (df(0) > target_df_mhz) fail(ErrorCode::kCalibrationDiverged, "static shift already exceeds target");
  while (df(hi) < target_df_mhz) {
    lo = hi;
    hi *= 2;
    if (hi > max_amplitude) fail(ErrorCode::kCalibrationDiverged, "target conditional shift out of reach");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (df(mid) < target_df_mhz ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Q1 = 0 phase of the Stark segment, used as the virtual-Z axis of the closing pulse.
inline double stark_closing_phase(const DeviceSpec& spec, const StarkTone& tone, double dt = 0.0625) {
  const Mat u = stark_propagator(spec, tone, dt);
  const std::vector<int> dims = spec.dims();
  return std::arg(u(ravel({0, 1}, dims), ravel({0, 1}, dims)) / u(ravel({0, 0}, dims), ravel({0, 0}, dims)));
}

struct PhaseSweep {
  std::vector<double> detunings;  // MHz
  std::map<std::string, std::vector<double>> curves;
  std::string target;             // "phi" for the Delta2 sweep, "phi_prime" for Delta1
  double optimum = 0;             // MHz
};

enum class SweepMode { kIdeal, kSimulate };

struct SweepOptions {
  SweepMode mode = SweepMode::kIdeal;
  bool with_noise = false;
  SimOptions sim;
};

namespace detail {

inline const std::vector<std::pair<std::string, int>>& sweep_prepulses() {
  static const std::vector<std::pair<std::string, int>> p{{"I(x)I", 0}, {"X90(x)X90", 14}, {"Y90(x)Y90", 28}};
  return p;
}

// Vertex of the parabola through the extremum and its neighbours.
inline double refine_extremum(const std::vector<double>& x, const std::vector<double>& y, bool minimum) {
  const int n = static_cast<int>(x.size());
  int k = 0;
  for (int i = 1; i < n; ++i) {
    if (minimum ? y[i] < y[k] : y[i] > y[k]) k = i;
  }
  if (k == 0 || k == n - 1) return x[k];
  const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
  const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  if (std::abs(a) < 1e-300) return x1;
  const double v = -b / (2 * a);
  return std::clamp(v, x0, x2);
}

inline GateChannel z_slot(const DeviceSpec& spec, const MapCalibration& cal, std::optional<double> d1,
                          std::optional<double> d2, const SweepOptions& so, const PhaseMap& pm) {
  if (so.mode == SweepMode::kSimulate) return simulate_z_slot(spec, d1, d2, cal.z_pulse_length, so.with_noise, so.sim);
  return ideal_z_slot(pm, d1, d2);
}

inline PhaseSweep run_sweep(const DeviceSpec& spec, const MapCalibration& cal, const std::vector<double>& grid,
                            const ReadoutModel& model, const SweepOptions& so, bool sweep_q1) {
  if (grid.size() < 3) fail(ErrorCode::kInvalidArgument, "sweep grid needs at least three points");
  const GateChannel map = so.mode == SweepMode::kSimulate
                              ? simulate_map_gate(spec, cal, so.with_noise, so.sim)
                              : GateChannel::from_unitary(ideal_map_unitary(cal.phi, cal.phi_prime).data, cal.t_g);
  const PhaseMap pm = so.mode == SweepMode::kIdeal ? build_phase_map(cal.z_pulse_length) : PhaseMap{};
  const Mat prep = sweep_q1 ? on_q1(ry(0.5 * kPi)) : on_q2(ry(0.5 * kPi));
  const Mat rho0 = prep * ground_state_4() * prep.adjoint();
  const Mat after_map = map.apply(rho0);
  PhaseSweep out;
  out.detunings = grid;
  out.target = sweep_q1 ? "phi_prime" : "phi";
  const auto pres = prepulse_set();
  for (double d : grid) {
    const GateChannel z = sweep_q1 ? z_slot(spec, cal, d, cal.delta2, so, pm) : z_slot(spec, cal, std::nullopt, d, so, pm);
    const Mat rho = z.apply(after_map);
    for (const auto& [label, index] : sweep_prepulses()) {
      const Mat r = pres[index] * rho * pres[index].adjoint();
      out.curves[label].push_back(readout_expectation(r, model, nullptr));
    }
  }
  // Delta2 cancels phi where Y90(x)Y90 is minimal; Delta1 cancels phi' where it is maximal.
  out.optimum = refine_extremum(grid, out.curves["Y90(x)Y90"], !sweep_q1);
  return out;
}

}  // namespace detail

inline PhaseSweep sweep_delta2(const DeviceSpec& spec, const MapCalibration& cal, const std::vector<double>& grid,
                               const ReadoutModel& model, const SweepOptions& so = {}) {
  return detail::run_sweep(spec, cal, grid, model, so, false);
}

inline PhaseSweep sweep_delta1(const DeviceSpec& spec, const MapCalibration& cal, const std::vector<double>& grid,
                               const ReadoutModel& model, const SweepOptions& so = {}) {
  return detail::run_sweep(spec, cal, grid, model, so, true);
}

struct CancellationCheck {
  DensityMatrix rho;
  double fidelity = 0;
};

// cNOT on (|0>+|1>)|1>/sqrt2, reconstructed by QST and compared with (|01>+|10>)/sqrt2.
inline CancellationCheck verify_cancellation(const DeviceSpec& spec, const MapCalibration& cal,
                                             const ReadoutModel& model, bool simulate, bool with_noise,
                                             std::mt19937_64* rng = nullptr, const SimOptions& so = {}) {
  const GateChannel g = compose_cnot(spec, cal, with_noise, simulate, so);
  const Mat prep = kron(ry(0.5 * kPi), rx(kPi));
  const Mat rho0 = prep * ground_state_4() * prep.adjoint();
  const MeasurementRecord rec = run_qst(rho0, &g, model, rng);
  StateFit fit = reconstruct_state_mle(rec, model);
  Vec target = Vec::Zero(4);
  target(1) = target(2) = 1.0 / std::sqrt(2.0);
  return {fit.rho, state_fidelity(fit.rho, DensityMatrix::pure({2, 2}, target))};
}

struct MapCalibrationOptions {
  double tone_detuning_mhz = -24.0;  // from the dressed |01>-|02> line
  double rise_fall = 60.0;           // ns
  double target_df_mhz = 0.467;
  std::vector<double> ramsey_delays = linspace(121.0, 2001.0, 377);
  std::vector<double> sweep_grid = linspace(-8.0, 8.0, 65);
  SweepOptions sweep;
  RamseyOptions ramsey;
  double z_pulse_length = 400.0;
  double time_step = 1.0;  // t_g is rounded to this grid (ns)
};

struct MapCalibrationReport {
  MapCalibration cal;
  AlignmentResult alignment;
  RamseyTrace ramsey0, ramsey1;
  TgResult tg;
  StarkShifts predicted;
  PhaseSweep sweep2, sweep1;
};

// Full MAP calibration on an aligned device: tone, t_g, closing phase, Z-gate detunings.
inline MapCalibrationReport calibrate_map(const DeviceSpec& spec, const MapCalibrationOptions& o = {},
                                          const ReadoutModel& model = {}) {
  require_aligned(spec);
  MapCalibrationReport rep;
  rep.alignment = alignment_at(spec, spec.flux_offset);
  StarkTone tone;
  tone.frequency = rep.alignment.epsilon + o.tone_detuning_mhz * 1e-3;
  tone.rise_fall = o.rise_fall;
  tone.amplitude = tune_stark_amplitude(spec, tone.frequency, o.target_df_mhz);
  rep.predicted = stark_shift_estimate(spec, tone.frequency, tone.amplitude);
  rep.ramsey0 = stark_ramsey(spec, tone, 0, o.ramsey_delays, o.ramsey);
  rep.ramsey1 = stark_ramsey(spec, tone, 1, o.ramsey_delays, o.ramsey);
  rep.tg = find_tg(rep.ramsey0, rep.ramsey1);
  MapCalibration& cal = rep.cal;
  cal.t_g = std::round(rep.tg.t_g / o.time_step) * o.time_step;
  tone.duration = cal.t_g;
  cal.stark = tone;
  cal.delta_eps = rep.ramsey0.fitted_freq;
  cal.delta_eps_prime = rep.ramsey1.fitted_freq;
  cal.z_pulse_length = o.z_pulse_length;
  cal.closing_phase = stark_closing_phase(spec, tone, o.sweep.sim.dt_map);
  const MapPhases ph = extract_map_phases(simulate_map_gate(spec, cal, false, o.sweep.sim));
  cal.phi = ph.phi;
  cal.phi_prime = ph.phi_prime;
  rep.sweep2 = sweep_delta2(spec, cal, o.sweep_grid, model, o.sweep);
  cal.delta2 = rep.sweep2.optimum;
  rep.sweep1 = sweep_delta1(spec, cal, o.sweep_grid, model, o.sweep);
  cal.delta1 = rep.sweep1.optimum;
  return rep;
}

}  // namespace mapcnot

#endif  // MAPCNOT_CALIBRATION_HPP_
