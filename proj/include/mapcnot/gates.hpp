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

#ifndef MAPCNOT_GATES_HPP_
#define MAPCNOT_GATES_HPP_

#include <array>
#include <optional>

#include "mapcnot/device.hpp"
#include "mapcnot/linalg.hpp"
#include "mapcnot/optim.hpp"
#include "mapcnot/pulse.hpp"

namespace mapcnot {

// exp(-i theta/2 (cos(axis) X + sin(axis) Y)).
inline Mat rotation(double axis, double theta) {
  const Mat n = std::cos(axis) * pauli(1) + std::sin(axis) * pauli(2);
  return std::cos(0.5 * theta) * Mat::Identity(2, 2) - cd(0, std::sin(0.5 * theta)) * n;
}
inline Mat rx(double theta) { return rotation(0.0, theta); }
inline Mat ry(double theta) { return rotation(0.5 * kPi, theta); }
inline Mat rz(double theta) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = std::exp(cd(0, -0.5 * theta));
  m(1, 1) = std::exp(cd(0, 0.5 * theta));
  return m;
}
// diag(1, e^{i phi}).
inline Mat phase_gate(double phi) {
  Mat m = Mat::Identity(2, 2);
  m(1, 1) = std::exp(cd(0, phi));
  return m;
}
inline Mat on_q1(const Mat& u) { return kron(u, Mat::Identity(2, 2)); }
inline Mat on_q2(const Mat& u) { return kron(Mat::Identity(2, 2), u); }

inline Mat cnot_matrix() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(3, 2) = m(2, 3) = 1.0;
  return m;
}

// Basis {|00>, |01>, |10>, |11>}; |10> -> e^{i phi'}|11>, |11> -> e^{i(phi+phi')}|10>.
inline Operator ideal_map_unitary(double phi, double phi_prime) {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = std::exp(cd(0, phi));
  m(2, 3) = std::exp(cd(0, phi + phi_prime));
  m(3, 2) = std::exp(cd(0, phi_prime));
  return Operator({2, 2}, m);
}

// Column-stacking superoperator of rho -> u rho u^dagger.
inline Mat unitary_superop(const Mat& u) { return kron(u.conjugate(), u); }

inline Mat apply_superop(const Mat& s, const Mat& rho) {
  const Eigen::Index d = rho.rows();
  Vec v = Eigen::Map<const Vec>(rho.data(), d * d);
  Vec out = s * v;
  return Eigen::Map<const Mat>(out.data(), d, d);
}

struct GateChannel {
  enum class Kind { kUnitary, kSuperoperator };
  Kind kind = Kind::kUnitary;
  Mat unitary;  // 4x4, unitary kind
  Mat superop;  // 16x16 column-stacking, superoperator kind
  double duration = 0;
  std::array<double, 4> leakage{0, 0, 0, 0};
  std::optional<Mat> coherent_block;  // projected 4x4 propagator of a noiseless simulation

  static GateChannel from_unitary(const Mat& u, double duration) {
    GateChannel g;
    g.unitary = u;
    g.duration = duration;
    return g;
  }
  static GateChannel from_superop(const Mat& s, double duration) {
    GateChannel g;
    g.kind = Kind::kSuperoperator;
    g.superop = s;
    g.duration = duration;
    return g;
  }

  Mat superoperator() const { return kind == Kind::kUnitary ? unitary_superop(unitary) : superop; }
  Mat apply(const Mat& rho) const {
    return kind == Kind::kUnitary ? Mat(unitary * rho * unitary.adjoint()) : apply_superop(superop, rho);
  }
  // Phase-carrying 4x4 matrix: the unitary, or the projected block of a simulation.
  const Mat& coherent() const {
    if (kind == Kind::kUnitary) return unitary;
    if (!coherent_block) fail(ErrorCode::kInvalidArgument, "channel has no coherent block");
    return *coherent_block;
  }
  double total_leakage() const { return leakage[0] + leakage[1] + leakage[2] + leakage[3]; }
};

// Choi matrix sum_ab |a><b| (x) E(|a><b|) of a column-stacking superoperator.
inline Mat choi_of_superop(const Mat& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  Mat j = Mat::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      Mat unit = Mat::Zero(d, d);
      unit(a, b) = 1.0;
      j.block(a * d, b * d, d, d) = apply_superop(s, unit);
    }
  }
  return j;
}

inline double tp_residual(const Mat& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  double worst = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      Mat unit = Mat::Zero(d, d);
      unit(a, b) = 1.0;
      worst = std::max(worst, std::abs(apply_superop(s, unit).trace() - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

inline double min_choi_eigenvalue(const Mat& s) {
  Mat j = choi_of_superop(s);
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (j + j.adjoint()), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline void validate_channel(const GateChannel& g) {
  if (g.kind == GateChannel::Kind::kUnitary) {
    if (unitarity_error(g.unitary) > 1e-8) fail(ErrorCode::kNonUnitaryInput, "unitary channel is not unitary");
  } else {
    if (tp_residual(g.superop) > kTol.tp_residual) fail(ErrorCode::kInvalidArgument, "channel is not TP");
    if (min_choi_eigenvalue(g.superop) < kTol.cp_eigenvalue) fail(ErrorCode::kInvalidArgument, "channel is not CP");
  }
}

// second after first.
inline GateChannel compose(const GateChannel& first, const GateChannel& second) {
  GateChannel out;
  if (first.kind == GateChannel::Kind::kUnitary && second.kind == GateChannel::Kind::kUnitary) {
    out = GateChannel::from_unitary(second.unitary * first.unitary, first.duration + second.duration);
  } else {
    out = GateChannel::from_superop(second.superoperator() * first.superoperator(), first.duration + second.duration);
    std::optional<Mat> a, b;
    if (first.kind == GateChannel::Kind::kUnitary) a = first.unitary; else a = first.coherent_block;
    if (second.kind == GateChannel::Kind::kUnitary) b = second.unitary; else b = second.coherent_block;
    if (a && b) out.coherent_block = (*b) * (*a);
  }
  // First-order bookkeeping: second-stage leakage weighted by first-stage output populations.
  for (int i = 0; i < 4; ++i) {
    Mat in = Mat::Zero(4, 4);
    in(i, i) = 1.0;
    Mat mid = first.apply(in);
    double l = first.leakage[i];
    for (int j = 0; j < 4; ++j) l += mid(j, j).real() * (1.0 - first.leakage[i]) * second.leakage[j];
    out.leakage[i] = std::min(1.0, l);
  }
  return out;
}

// Indices of |q1 q2>, q in {0,1}, inside a two-transmon space.
inline std::array<int, 4> computational_indices(const std::vector<int>& dims) {
  return {ravel({0, 0}, dims), ravel({0, 1}, dims), ravel({1, 0}, dims), ravel({1, 1}, dims)};
}

// Ideal qubit rotation acting on levels {0,1} of one transmon, identity above.
inline Mat embed_qubit_gate(const Mat& u2, const std::vector<int>& dims, int subsystem) {
  Mat u = Mat::Identity(dims[subsystem], dims[subsystem]);
  u.topLeftCorner(2, 2) = u2;
  return embed(u, dims, subsystem);
}

// Projects a full propagator and completes the leaked weight as I/4.
inline GateChannel channel_from_unitary(const Mat& u_full, const std::vector<int>& dims, double duration) {
  const auto idx = computational_indices(dims);
  Mat k(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) k(r, c) = u_full(idx[r], idx[c]);
  }
  const Mat lost = Mat::Identity(4, 4) - k.adjoint() * k;
  Mat s = unitary_superop(k);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const cd w = lost(b, a);  // Tr[lost |a><b|]
      for (int i = 0; i < 4; ++i) s(i + 4 * i, a + 4 * b) += 0.25 * w;
    }
  }
  GateChannel g = GateChannel::from_superop(s, duration);
  for (int a = 0; a < 4; ++a) g.leakage[a] = std::max(0.0, lost(a, a).real());
  g.coherent_block = k;
  return g;
}

// Channel from evolving the 16 computational matrix units; evolve acts in place.
inline GateChannel channel_from_evolution(const std::function<void(std::vector<Mat>&)>& evolve,
                                          const std::vector<int>& dims, double duration) {
  const auto idx = computational_indices(dims);
  const int n = product(dims);
  std::vector<Mat> states;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      Mat m = Mat::Zero(n, n);
      m(idx[a], idx[b]) = 1.0;
      states.push_back(m);
    }
  }
  evolve(states);
  Mat s = Mat::Zero(16, 16);
  GateChannel g;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const Mat& out = states[a + 4 * b];
      cd inside = 0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) s(i + 4 * j, a + 4 * b) = out(idx[i], idx[j]);
        inside += out(idx[i], idx[i]);
      }
      const cd leaked = out.trace() - inside;
      for (int i = 0; i < 4; ++i) s(i + 4 * i, a + 4 * b) += 0.25 * leaked;
      if (a == b) g.leakage[a] = std::max(0.0, leaked.real());
    }
  }
  g.kind = GateChannel::Kind::kSuperoperator;
  g.superop = s;
  g.duration = duration;
  return g;
}

// Sech phase law phi(Delta) = sign * 4 atan(Delta / rho_eff) + offset, fitted to simulation.
struct PhaseMap {
  double pulse_length = 400;
  double rho_eff_mhz = 5.0;  // rho_eff / 2pi
  double offset = 0;
  int sign = -1;
  std::vector<std::pair<double, double>> samples;  // (Delta MHz, simulated phase)
  double max_residual = 0;

  double phase(double delta_mhz) const { return sign * 4.0 * std::atan(delta_mhz / rho_eff_mhz) + offset; }
  // Smallest-|Delta| detuning producing phi (mod 2 pi).
  double detuning_for(double phi) const {
    double x = std::remainder(phi - offset, kTwoPi);
    return rho_eff_mhz * std::tan(x / (4.0 * sign));
  }
};

inline double wrap_phase(double x) { return std::remainder(x, kTwoPi); }

struct SechResponse {
  double phase = 0;        // qubit-frame arg(U11/U00)
  double p_excited = 0;    // |<1|U|0>|^2
  double p_return = 0;     // |<0|U|0>|^2
};

// Single transmon driven by a cyclic sech pulse at the given detuning.
inline SechResponse simulate_sech(double pulse_length, double delta_mhz, int levels = 2, double alpha_mhz = 0.0,
                                  double dt = 0.125) {
  const Mat n = number_op(levels);
  const Mat h = 0.5 * mhz(alpha_mhz) * n * (n - Mat::Identity(levels, levels));
  const SechPulse p = SechPulse::cyclic(pulse_length, delta_mhz);
  std::vector<Drive> drives{charge_drive({levels}, 0, Envelope::sech_pulse(p), mhz(delta_mhz))};
  const Mat u = evolve_unitary(h, drives, pulse_length, dt);
  return {std::arg(u(1, 1) / u(0, 0)), std::norm(u(1, 0)), std::norm(u(0, 0))};
}

inline double simulate_sech_phase(double pulse_length, double delta_mhz, int levels = 2, double alpha_mhz = 0.0,
                                  double dt = 0.125) {
  return simulate_sech(pulse_length, delta_mhz, levels, alpha_mhz, dt).phase;
}

inline PhaseMap build_phase_map(double pulse_length, int levels = 2, double alpha_mhz = 0.0,
                                const std::vector<double>& grid = linspace(-5, 5, 41)) {
  PhaseMap pm;
  pm.pulse_length = pulse_length;
  for (double d : grid) pm.samples.push_back({d, simulate_sech_phase(pulse_length, d, levels, alpha_mhz)});
  const double rho0 = 2e3 / pulse_length;  // pi/(2 sigma) / 2pi in MHz with sigma = T/8
  const bool fit_offset = levels > 2;
  double best_cost = 1e300;
  for (int s : {-1, 1}) {
    auto res = [&](const RVec& x, RVec& r) {
      for (size_t i = 0; i < pm.samples.size(); ++i) {
        const double model = s * 4.0 * std::atan(pm.samples[i].first / x(0)) + (fit_offset ? x(1) : 0.0);
        r(i) = wrap_phase(model - pm.samples[i].second);
      }
    };
    RVec x0(fit_offset ? 2 : 1);
    x0(0) = rho0;
    if (fit_offset) x0(1) = 0.0;
    auto out = least_squares(res, static_cast<int>(pm.samples.size()), x0);
    if (out.cost < best_cost) {
      best_cost = out.cost;
      pm.sign = s;
      pm.rho_eff_mhz = out.x(0);
      pm.offset = fit_offset ? out.x(1) : 0.0;
    }
  }
  pm.max_residual = 0;
  for (auto [d, ph] : pm.samples) pm.max_residual = std::max(pm.max_residual, std::abs(wrap_phase(pm.phase(d) - ph)));
  return pm;
}

struct MapCalibration {
  double t_g = 1070.0;
  StarkTone stark;
  double delta_eps = 0;        // MHz
  double delta_eps_prime = 0;  // MHz
  double phi = 0;
  double phi_prime = 0;
  double delta1 = 0;  // MHz
  double delta2 = 0;  // MHz
  double closing_phase = 0;     // axis offset of the closing -pi/2 pulse on Q2
  double z_pulse_length = 400;  // ns

  void validate() const {
    if (!(t_g > 0)) fail(ErrorCode::kInvalidArgument, "t_g must be positive");
    const double df = std::abs(delta_eps - delta_eps_prime);
    if (df > 0 && std::abs(df * 1e-3 * t_g - 0.5) > 0.02 * 0.5) {
      fail(ErrorCode::kInvalidArgument, "t_g is not the out-of-phase time of the Stark shifts");
    }
  }
};

struct SimOptions {
  double dt_map = 0.0625;  // ns, common-frame Stark segment
  double dt_z = 0.125;   // ns, dispersive Z segment
  double dissipator_chunk = 1.0;
};

// Common-frame Hamiltonian of the Stark segment and the map back to the qubit frame.
struct StarkFrame {
  Mat h;        // H_lab - w_s N
  RVec k_diag;  // qubit-frame minus common-frame energies per basis state
  Drive drive;
  std::vector<int> dims;

  // U_qubit(t) = exp(i K t) U_common(t)
  Mat to_qubit(const Mat& u_common, double t) const {
    Vec ph = (k_diag.cast<cd>() * cd(0, t)).array().exp();
    return ph.asDiagonal() * u_common;
  }
};

inline StarkFrame stark_frame(const DeviceSpec& spec, const StarkTone& tone) {
  StarkFrame f;
  Operator h = build_hamiltonian(spec);
  f.dims = h.dims;
  const QubitFrame qf = qubit_frame(spec);
  const double ws = ghz(tone.frequency);
  const int n = h.dim();
  f.h = h.data;
  f.k_diag.resize(n);
  for (int m = 0; m < n; ++m) {
    std::vector<int> d = unravel(m, h.dims);
    f.h(m, m) -= ws * (d[0] + d[1]);
    f.k_diag(m) = qf.frame_diag(m) - ws * (d[0] + d[1]);
  }
  f.drive = charge_drive(h.dims, 1, Envelope::stark_pulse(tone, tone.amplitude / std::sqrt(2.0)), 0.0);
  return f;
}

// Full-space qubit-frame propagator of the Stark tone alone.
inline Mat stark_propagator(const DeviceSpec& spec, const StarkTone& tone, double dt = 0.0625) {
  StarkFrame f = stark_frame(spec, tone);
  return f.to_qubit(evolve_unitary(f.h, {f.drive}, tone.duration, dt), tone.duration);
}

inline void require_aligned(const DeviceSpec& spec) {
  const double d0 = level_alignment_scan(spec, default_alignment_grid(spec)).delta;
  const double now = branch_gap_at(spec, spec.flux_offset);
  if (now > 2.0 * d0) fail(ErrorCode::kUnalignedDevice, "device is not at the |12>/|03> alignment point");
}

inline GateChannel simulate_map_gate(const DeviceSpec& spec, const MapCalibration& cal, bool with_noise,
                                     const SimOptions& so = {}) {
  require_aligned(spec);
  if (std::abs(cal.stark.duration - cal.t_g) > 1e-9) fail(ErrorCode::kInvalidArgument, "stark duration must equal t_g");
  StarkFrame f = stark_frame(spec, cal.stark);
  const Mat open = embed_qubit_gate(ry(0.5 * kPi), f.dims, 1);
  const Mat close = embed_qubit_gate(rotation(0.5 * kPi + cal.closing_phase, -0.5 * kPi), f.dims, 1);
  const Mat uc = evolve_unitary(f.h, {f.drive}, cal.t_g, so.dt_map);
  const Mat u = close * f.to_qubit(uc, cal.t_g) * open;
  GateChannel unitary_part = channel_from_unitary(u, f.dims, cal.t_g);
  if (!with_noise) return unitary_part;
  const NoiseSpec noise = NoiseSpec::from_device(spec);
  EvolveOptions eo;
  eo.dissipator_chunk = so.dissipator_chunk;
  GateChannel g = channel_from_evolution(
      [&](std::vector<Mat>& states) {
        for (auto& r : states) r = open * r * open.adjoint();
        evolve_lindblad_batch(states, f.dims, f.h, {f.drive}, noise, cal.t_g, so.dt_map, eo);
        const Mat kq = f.to_qubit(Mat::Identity(f.h.rows(), f.h.cols()), cal.t_g);
        const Mat w = close * kq;
        for (auto& r : states) r = w * r * w.adjoint();
      },
      f.dims, cal.t_g);
  g.coherent_block = unitary_part.coherent_block;
  return g;
}

struct MapPhases {
  double phi = 0, phi_prime = 0, phi11 = 0;
};

inline MapPhases extract_map_phases(const GateChannel& g) {
  const Mat& b = g.coherent();
  MapPhases p;
  p.phi = std::arg(b(1, 1) / b(0, 0));
  p.phi_prime = std::arg(b(3, 2) / b(0, 0));
  p.phi11 = std::arg(b(2, 3) / b(0, 0));
  return p;
}

// Simultaneous sech Z gates; a missing detuning leaves that qubit idle.
inline GateChannel simulate_z_slot(const DeviceSpec& spec, std::optional<double> delta1_mhz,
                                   std::optional<double> delta2_mhz, double pulse_length, bool with_noise,
                                   const SimOptions& so = {}) {
  const QubitFrame qf = qubit_frame(spec);
  const std::vector<int> dims = spec.dims();
  const Mat h = qf.dispersive_diag.cast<cd>().asDiagonal();
  std::vector<Drive> drives;
  if (delta1_mhz) {
    drives.push_back(charge_drive(dims, 0, Envelope::sech_pulse(SechPulse::cyclic(pulse_length, *delta1_mhz)),
                                  mhz(*delta1_mhz)));
  }
  if (delta2_mhz) {
    drives.push_back(charge_drive(dims, 1, Envelope::sech_pulse(SechPulse::cyclic(pulse_length, *delta2_mhz)),
                                  mhz(*delta2_mhz)));
  }
  const Mat u = evolve_unitary(h, drives, pulse_length, so.dt_z);
  GateChannel unitary_part = channel_from_unitary(u, dims, pulse_length);
  if (!with_noise) return unitary_part;
  const NoiseSpec noise = NoiseSpec::from_device(spec);
  EvolveOptions eo;
  eo.dissipator_chunk = so.dissipator_chunk;
  GateChannel g = channel_from_evolution(
      [&](std::vector<Mat>& states) { evolve_lindblad_batch(states, dims, h, drives, noise, pulse_length, so.dt_z, eo); },
      dims, pulse_length);
  g.coherent_block = unitary_part.coherent_block;
  return g;
}

inline GateChannel z_phase_gate(int qubit, double detuning_mhz, double pulse_length, bool simulate,
                                const DeviceSpec& spec, bool with_noise = false, const SimOptions& so = {}) {
  if (qubit != 1 && qubit != 2) fail(ErrorCode::kBadIndex, "qubit must be 1 or 2");
  if (!simulate) {
    const PhaseMap pm = build_phase_map(pulse_length);
    const Mat z = phase_gate(pm.phase(detuning_mhz));
    return GateChannel::from_unitary(qubit == 1 ? on_q1(z) : on_q2(z), pulse_length);
  }
  std::optional<double> d1, d2;
  (qubit == 1 ? d1 : d2) = detuning_mhz;
  return simulate_z_slot(spec, d1, d2, pulse_length, with_noise, so);
}

inline GateChannel ideal_z_slot(const PhaseMap& pm, std::optional<double> d1, std::optional<double> d2) {
  const Mat z1 = d1 ? phase_gate(pm.phase(*d1)) : Mat::Identity(2, 2).eval();
  const Mat z2 = d2 ? phase_gate(pm.phase(*d2)) : Mat::Identity(2, 2).eval();
  return GateChannel::from_unitary(kron(z1, z2), pm.pulse_length);
}

// (Z1(Delta1) (x) Z2(Delta2)) after MAP. simulate=false uses the ideal MAP matrix and phase map.
inline GateChannel compose_cnot(const DeviceSpec& spec, const MapCalibration& cal, bool with_noise, bool simulate = true,
                                const SimOptions& so = {}) {
  if (!simulate) {
    const PhaseMap pm = build_phase_map(cal.z_pulse_length);
    GateChannel map = GateChannel::from_unitary(ideal_map_unitary(cal.phi, cal.phi_prime).data, cal.t_g);
    return compose(map, ideal_z_slot(pm, cal.delta1, cal.delta2));
  }
  GateChannel map = simulate_map_gate(spec, cal, with_noise, so);
  GateChannel z = simulate_z_slot(spec, cal.delta1, cal.delta2, cal.z_pulse_length, with_noise, so);
  return compose(map, z);
}

}  // namespace mapcnot

#endif  // MAPCNOT_GATES_HPP_
