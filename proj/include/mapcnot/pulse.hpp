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

#ifndef MAPCNOT_PULSE_HPP_
#define MAPCNOT_PULSE_HPP_

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mapcnot/device.hpp"
#include "mapcnot/linalg.hpp"

namespace mapcnot {

struct SechPulse {
  double sigma = 50.0;                  // ns
  double rho_bandwidth = kPi / 100.0;   // rad/ns
  double amplitude = kPi / 50.0;        // peak 0<->1 Rabi rate, rad/ns
  double carrier_detuning = 0.0;        // MHz, relative to the addressed transition
  double total_length = 400.0;          // ns
  double phase = 0.0;                   // rad

  // 2*pi-area pulse of the given length: sigma = T/8, rho = pi/(2 sigma), amplitude = 2 rho.
  static SechPulse cyclic(double total_length_ns, double detuning_mhz, double phase_rad = 0.0) {
    SechPulse p;
    p.total_length = total_length_ns;
    p.sigma = total_length_ns / 8.0;
    p.rho_bandwidth = kPi / (2.0 * p.sigma);
    p.amplitude = 2.0 * p.rho_bandwidth;
    p.carrier_detuning = detuning_mhz;
    p.phase = phase_rad;
    return p;
  }
};

inline double sech_envelope(const SechPulse& p, double t) {
  if (t < -1e-9 || t > p.total_length + 1e-9) fail(ErrorCode::kOutOfWindow, "time outside sech window");
  return p.amplitude / std::cosh(p.rho_bandwidth * (t - 0.5 * p.total_length));
}

struct StarkTone {
  double frequency = 6.0152;  // GHz
  double amplitude = 0.0;     // 1<->2 Rabi rate of Q2, rad/ns
  double duration = 0.0;      // ns, ramps included
  double rise_fall = 10.0;    // ns, cosine edges
};

inline double stark_ramp(const StarkTone& s, double t) {
  if (t < -1e-9 || t > s.duration + 1e-9) return 0.0;
  const double r = std::min(s.rise_fall, 0.5 * s.duration);
  if (r <= 0) return 1.0;
  if (t < r) return 0.5 * (1.0 - std::cos(kPi * t / r));
  if (t > s.duration - r) return 0.5 * (1.0 - std::cos(kPi * (s.duration - t) / r));
  return 1.0;
}

struct NoiseSpec {
  std::vector<double> t1;      // us per transmon
  std::vector<double> t2star;  // us per transmon

  static NoiseSpec none() { return {}; }
  static NoiseSpec from_device(const DeviceSpec& s) { return {{s.t1_q1, s.t1_q2}, {s.t2star_q1, s.t2star_q2}}; }
  // Rates in 1/ns; a non-positive time means no process.
  double gamma1(size_t k) const { return k < t1.size() && t1[k] > 0 ? 1e-3 / t1[k] : 0.0; }
  double gamma_phi(size_t k) const {
    if (k >= t2star.size() || !(t2star[k] > 0)) return 0.0;
    return 1e-3 / t2star[k] - 0.5 * gamma1(k);
  }
  bool active() const {
    for (size_t k = 0; k < std::max(t1.size(), t2star.size()); ++k) {
      if (gamma1(k) > 0 || gamma_phi(k) > 0) return true;
    }
    return false;
  }
  void validate() const {
    for (size_t k = 0; k < std::max(t1.size(), t2star.size()); ++k) {
      if (gamma1(k) < 0 || gamma_phi(k) < -1e-15) fail(ErrorCode::kInvalidSpec, "negative decoherence rate");
    }
  }
};

struct Envelope {
  enum class Kind { kConstant, kSquare, kSech, kStark, kGaussian };
  Kind kind = Kind::kConstant;
  double amplitude = 0;  // constant, square, gaussian peak
  double start = 0, stop = 0;
  double center = 0, width = 0;
  double shift = 0;  // evaluate at t + shift
  SechPulse sech;
  StarkTone stark;

  static Envelope constant(double a) { Envelope e; e.amplitude = a; return e; }
  static Envelope square(double a, double t0, double t1) {
    Envelope e; e.kind = Kind::kSquare; e.amplitude = a; e.start = t0; e.stop = t1; return e;
  }
  static Envelope sech_pulse(const SechPulse& p) { Envelope e; e.kind = Kind::kSech; e.sech = p; return e; }
  static Envelope stark_pulse(const StarkTone& s, double scale) {
    Envelope e; e.kind = Kind::kStark; e.stark = s; e.amplitude = scale; return e;
  }
  static Envelope gaussian(double a, double c, double w) {
    Envelope e; e.kind = Kind::kGaussian; e.amplitude = a; e.center = c; e.width = w; return e;
  }

  Envelope shifted(double s) const { Envelope e = *this; e.shift += s; return e; }
  double operator()(double t) const {
    t += shift;
    switch (kind) {
      case Kind::kConstant: return amplitude;
      case Kind::kSquare: return (t >= start && t < stop) ? amplitude : 0.0;
      case Kind::kSech: return (t < 0 || t > sech.total_length) ? 0.0 : sech_envelope(sech, t);
      case Kind::kStark: return amplitude * stark_ramp(stark, t);
      case Kind::kGaussian: return amplitude * std::exp(-0.5 * (t - center) * (t - center) / (width * width));
    }
    return 0.0;
  }
};

// Rotating-frame drive term (env(t)/2) (exp(-i(delta t + phase)) A^dagger + h.c.).
struct Drive {
  Mat lowering;
  Envelope envelope;
  double detuning = 0;  // rad/ns, carrier minus frame
  double phase = 0;
  std::string target;
};

// Charge drive a + a^dagger on one subsystem; env is the 0<->1 Rabi rate.
inline Drive charge_drive(const std::vector<int>& dims, int subsystem, Envelope env, double detuning, double phase = 0.0) {
  return Drive{embed(destroy(dims[subsystem]), dims, subsystem), std::move(env), detuning, phase,
               "q" + std::to_string(subsystem + 1)};
}

struct EvolveOptions {
  double t0 = 0.0;               // absolute start time for carrier phases
  bool verify_step = false;      // run the dt-halving check
  double dissipator_chunk = 1.0; // ns, Lindblad splitting interval
  std::function<void(double, const Mat&)> on_step;  // unitary path: (t, U so far)
};

namespace detail {

inline int step_count(double t_total, double dt) {
  if (!(dt > 0) || t_total < 0) fail(ErrorCode::kInvalidArgument, "dt must be positive and t_total non-negative");
  const double n = t_total / dt;
  const long k = std::lround(n);
  if (std::abs(n - k) > 1e-6) fail(ErrorCode::kInvalidArgument, "dt must divide t_total");
  return static_cast<int>(k);
}

inline std::vector<cd> coefficients(const std::vector<Drive>& drives, double t_local, double t_abs) {
  std::vector<cd> c(drives.size());
  for (size_t k = 0; k < drives.size(); ++k) {
    c[k] = 0.5 * drives[k].envelope(t_local) * std::exp(cd(0, -(drives[k].detuning * t_abs + drives[k].phase)));
  }
  return c;
}

inline Mat step_hamiltonian(const Mat& h_static, const std::vector<Drive>& drives, const std::vector<cd>& c) {
  Mat h = h_static;
  for (size_t k = 0; k < drives.size(); ++k) {
    if (c[k] == cd(0.0)) continue;
    h.noalias() += c[k] * drives[k].lowering.adjoint();
    h.noalias() += std::conj(c[k]) * drives[k].lowering;
  }
  return h;
}

// Steps [first, last) of size dt from local time offset; returns ordered product.
class Stepper {
 public:
  Stepper(const Mat& h_static, const std::vector<Drive>& drives, double dt, double t0)
      : h_(h_static), drives_(drives), dt_(dt), t0_(t0) {}

  Mat run(int first, int last, const std::function<void(double, const Mat&)>& cb = nullptr) {
    const int n = static_cast<int>(h_.rows());
    Mat u = Mat::Identity(n, n);
    for (int s = first; s < last; ++s) {
      const double tm = (s + 0.5) * dt_;
      std::vector<cd> c = coefficients(drives_, tm, t0_ + tm);
      if (!valid_ || c != last_c_) {
        step_u_ = propagator(step_hamiltonian(h_, drives_, c), dt_);
        last_c_ = std::move(c);
        valid_ = true;
      }
      u = step_u_ * u;
      if (cb) cb((s + 1) * dt_, u);
    }
    return u;
  }

 private:
  const Mat& h_;
  const std::vector<Drive>& drives_;
  double dt_, t0_;
  bool valid_ = false;
  std::vector<cd> last_c_;
  Mat step_u_;
};

}  // namespace detail

inline Mat evolve_unitary(const Mat& h_static, const std::vector<Drive>& drives, double t_total, double dt,
                          const EvolveOptions& opts = {}) {
  if (hermiticity_error(h_static) > kTol.hermiticity) fail(ErrorCode::kNonHermitianInput, "static Hamiltonian");
  const int n = detail::step_count(t_total, dt);
  detail::Stepper stepper(h_static, drives, dt, opts.t0);
  Mat u = stepper.run(0, n, opts.on_step);
  if (opts.verify_step) {
    detail::Stepper fine(h_static, drives, 0.5 * dt, opts.t0);
    const double diff = max_abs(fine.run(0, 2 * n) - u);
    if (diff > kTol.step_halving) {
      fail(ErrorCode::kNonConvergedStep, "dt-halving changed the propagator by " + std::to_string(diff));
    }
  }
  return u;
}

inline Operator evolve_unitary(const Operator& h_static, const std::vector<Drive>& drives, double t_total, double dt,
                               const EvolveOptions& opts = {}) {
  return Operator(h_static.dims, evolve_unitary(h_static.data, drives, t_total, dt, opts));
}

// Local Lindblad dissipators, applied subsystem by subsystem.
class Dissipator {
 public:
  Dissipator(const std::vector<int>& dims, const NoiseSpec& noise) : dims_(dims) {
    noise.validate();
    const int n = product(dims);
    for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
      const double g1 = noise.gamma1(k), gp = noise.gamma_phi(k);
      if (g1 <= 0 && gp <= 0) continue;
      const int d = dims[k];
      Mat l = Mat::Zero(d * d, d * d);
      auto add = [&](const Mat& c) {
        const Mat cdc = c.adjoint() * c;
        const Mat id = Mat::Identity(d, d);
        l += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
      };
      if (g1 > 0) add(std::sqrt(g1) * destroy(d));
      if (gp > 0) add(std::sqrt(2.0 * gp) * number_op(d));
      Local loc{k, d, l, {}};
      const int others = n / d;
      loc.index.assign(others, std::vector<int>(d));
      for (int full = 0; full < n; ++full) {
        std::vector<int> digits = unravel(full, dims);
        const int i = digits[k];
        digits[k] = 0;
        int o = 0;
        for (int q = 0; q < static_cast<int>(dims.size()); ++q) {
          if (q != k) o = o * dims[q] + digits[q];
        }
        loc.index[o][i] = full;
      }
      locals_.push_back(std::move(loc));
    }
  }

  bool active() const { return !locals_.empty(); }

  // rho <- exp(L_D tau) rho.
  void apply(Mat& rho, double tau) {
    for (auto& loc : locals_) {
      const Mat& s = map_for(loc, tau);
      const int d = loc.d;
      const int others = static_cast<int>(loc.index.size());
      Vec block(d * d), out(d * d);
      for (int ro = 0; ro < others; ++ro) {
        for (int co = 0; co < others; ++co) {
          for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) block(i + d * j) = rho(loc.index[ro][i], loc.index[co][j]);
          }
          out.noalias() = s * block;
          for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) rho(loc.index[ro][i], loc.index[co][j]) = out(i + d * j);
          }
        }
      }
    }
  }

 private:
  struct Local {
    int k, d;
    Mat generator;
    std::vector<std::vector<int>> index;
    std::map<long long, Mat> cache = {};
  };

  const Mat& map_for(Local& loc, double tau) {
    const long long key = std::llround(tau * 1e9);
    auto it = loc.cache.find(key);
    if (it != loc.cache.end()) return it->second;
    Mat m = (loc.generator * tau).exp();
    return loc.cache.emplace(key, std::move(m)).first->second;
  }

  std::vector<int> dims_;
  std::vector<Local> locals_;
};

// Strang splitting: exact dissipator half-steps around exact unitary chunks.
inline void evolve_lindblad_batch(std::vector<Mat>& states, const std::vector<int>& dims, const Mat& h_static,
                                  const std::vector<Drive>& drives, const NoiseSpec& noise, double t_total,
                                  double dt, const EvolveOptions& opts = {}) {
  if (hermiticity_error(h_static) > kTol.hermiticity) fail(ErrorCode::kNonHermitianInput, "static Hamiltonian");
  const int n = detail::step_count(t_total, dt);
  Dissipator diss(dims, noise);
  const int m = std::max(1, static_cast<int>(std::lround(opts.dissipator_chunk / dt)));
  detail::Stepper stepper(h_static, drives, dt, opts.t0);
  auto chunk_len = [&](int first) { return std::min(m, n - first) * dt; };
  if (n == 0) return;
  if (diss.active()) {
    for (auto& r : states) diss.apply(r, 0.5 * chunk_len(0));
  }
  Mat last_u;
  std::vector<std::vector<cd>> last_coeffs;
  for (int first = 0; first < n; first += m) {
    const int last = std::min(n, first + m);
    std::vector<std::vector<cd>> coeffs;
    for (int s = first; s < last; ++s) {
      const double tm = (s + 0.5) * dt;
      coeffs.push_back(detail::coefficients(drives, tm, opts.t0 + tm));
    }
    if (coeffs != last_coeffs) {
      last_u = stepper.run(first, last);
      last_coeffs = std::move(coeffs);
    }
    const Mat ud = last_u.adjoint();
    for (auto& r : states) r = last_u * r * ud;
    if (diss.active()) {
      const double tau = 0.5 * (last - first) * dt + (last < n ? 0.5 * chunk_len(last) : 0.0);
      for (auto& r : states) diss.apply(r, tau);
    }
  }
}

inline DensityMatrix evolve_lindblad(const DensityMatrix& rho0, const Operator& h_static,
                                     const std::vector<Drive>& drives, const NoiseSpec& noise, double t_total,
                                     double dt, const EvolveOptions& opts = {}) {
  if (opts.verify_step) evolve_unitary(h_static.data, drives, t_total, dt, opts);
  EvolveOptions o = opts;
  o.verify_step = false;
  std::vector<Mat> states{rho0.data};
  evolve_lindblad_batch(states, h_static.dims, h_static.data, drives, noise, t_total, dt, o);
  Mat r = 0.5 * (states[0] + states[0].adjoint());
  return DensityMatrix(rho0.dims, r / r.trace().real());
}

// Plain-text pulse sequence: one "segment key=value ..." line per segment.
struct PulseSegment {
  std::string target;
  std::string envelope;
  std::map<std::string, double> params;
};

struct PulseSequence {
  std::vector<PulseSegment> segments;

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& s : segments) {
      os << "segment target=" << s.target << " envelope=" << s.envelope;
      for (const auto& [k, v] : s.params) os << ' ' << k << '=' << v;
      os << '\n';
    }
    return os.str();
  }

  static PulseSequence parse(const std::string& text) {
    PulseSequence seq;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string word;
      ls >> word;
      if (word != "segment") fail(ErrorCode::kConfigError, "expected 'segment' line: " + line);
      PulseSegment seg;
      while (ls >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) fail(ErrorCode::kConfigError, "expected key=value: " + word);
        const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
        if (key == "target") {
          seg.target = val;
        } else if (key == "envelope") {
          seg.envelope = val;
        } else {
          try {
            seg.params[key] = std::stod(val);
          } catch (const std::exception&) {
            fail(ErrorCode::kConfigError, "bad number for " + key);
          }
        }
      }
      if (seg.target.empty() || seg.envelope.empty()) fail(ErrorCode::kConfigError, "segment needs target and envelope");
      seq.segments.push_back(std::move(seg));
    }
    return seq;
  }
};

}  // namespace mapcnot

#endif  // MAPCNOT_PULSE_HPP_
