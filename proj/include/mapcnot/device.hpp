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

#ifndef MAPCNOT_DEVICE_HPP_
#define MAPCNOT_DEVICE_HPP_

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "mapcnot/linalg.hpp"

namespace mapcnot {

// Frequencies in GHz, anharmonicities and couplings in MHz, coherence times in us.
struct DeviceSpec {
  double q1_w01 = 5.6498;
  double q1_w12 = 5.3336;
  double q2_w01 = 6.2903;
  double q2_w12 = 5.9852;
  double alpha1 = -316.2;
  double alpha2 = -305.1;
  double g = 122.0;
  double cavity_freq = 7.16207;
  double t1_q1 = 21.0;
  double t1_q2 = 15.0;
  double t2star_q1 = 5.0;
  double t2star_q2 = 11.0;
  int levels_per_transmon = 4;
  int cavity_levels = 0;
  // Direct exchange coupling of the two-mode model.
  double j_eff = 4.3306;
  // Offset of Q1's transition frequencies set by flux, MHz.
  double flux_offset = 0.0;

  void validate() const {
    auto bad = [](const char* what) { fail(ErrorCode::kInvalidSpec, what); };
    if (std::abs(q1_w01 + alpha1 * 1e-3 - q1_w12) > 1e-6) bad("q1: w12 != w01 + alpha");
    if (std::abs(q2_w01 + alpha2 * 1e-3 - q2_w12) > 1e-6) bad("q2: w12 != w01 + alpha");
    if (!(alpha1 < 0) || !(alpha2 < 0)) bad("anharmonicity must be negative");
    if (!(t1_q1 > 0) || !(t1_q2 > 0) || !(t2star_q1 > 0) || !(t2star_q2 > 0)) bad("coherence times must be positive");
    if (t2star_q1 > 2 * t1_q1 || t2star_q2 > 2 * t1_q2) bad("t2star exceeds 2*t1");
    if (levels_per_transmon < 4) bad("levels_per_transmon must be at least 4");
    if (cavity_levels != 0 && cavity_levels < 3) bad("cavity_levels must be 0 or at least 3");
    if (g < 0 || j_eff < 0) bad("couplings must be non-negative");
  }

  bool three_mode() const { return cavity_levels > 0; }
  std::vector<int> dims() const {
    std::vector<int> d{levels_per_transmon, levels_per_transmon};
    if (three_mode()) d.push_back(cavity_levels);
    return d;
  }
  double q1_w01_effective() const { return q1_w01 + flux_offset * 1e-3; }
  // Bare Q1 offset (MHz) where |12> and |03> are degenerate.
  double bare_crossing_offset() const { return (q2_w01 - q1_w01) * 1e3 + 2 * alpha2; }
};

// Lab-frame Hamiltonian in rad/ns.
inline Operator build_hamiltonian(const DeviceSpec& spec, std::optional<double> q1_w01_override = std::nullopt) {
  spec.validate();
  const std::vector<int> dims = spec.dims();
  const int L = spec.levels_per_transmon;
  const double w1 = ghz(q1_w01_override ? *q1_w01_override : spec.q1_w01_effective());
  const double w2 = ghz(spec.q2_w01);
  const Mat n = number_op(L);
  const Mat anh = n * (n - Mat::Identity(L, L));
  const Mat a = embed(destroy(L), dims, 0);
  const Mat b = embed(destroy(L), dims, 1);
  Mat h = embed(w1 * n + 0.5 * mhz(spec.alpha1) * anh, dims, 0) +
          embed(w2 * n + 0.5 * mhz(spec.alpha2) * anh, dims, 1);
  if (spec.three_mode()) {
    const Mat c = embed(destroy(spec.cavity_levels), dims, 2);
    h += ghz(spec.cavity_freq) * c.adjoint() * c;
    h += mhz(spec.g) * (a.adjoint() * c + a * c.adjoint() + b.adjoint() * c + b * c.adjoint());
  } else {
    h += mhz(spec.j_eff) * (a.adjoint() * b + a * b.adjoint());
  }
  return Operator(dims, 0.5 * (h + h.adjoint()));
}

// Eigen-decomposition with a one-to-one assignment of dressed states to bare labels.
struct DressedSpectrum {
  std::vector<int> dims;
  RVec energies;   // ascending, rad/ns
  Mat vectors;     // columns are eigenvectors
  std::vector<int> label_to_state;

  explicit DressedSpectrum(const Operator& h) : dims(h.dims) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h.data);
    energies = es.eigenvalues();
    vectors = es.eigenvectors();
    const int n = h.dim();
    std::vector<std::pair<double, std::pair<int, int>>> pairs;
    pairs.reserve(n * n);
    for (int m = 0; m < n; ++m) {
      for (int k = 0; k < n; ++k) pairs.push_back({std::norm(vectors(m, k)), {m, k}});
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    label_to_state.assign(n, -1);
    std::vector<bool> used(n, false);
    for (const auto& p : pairs) {
      auto [m, k] = p.second;
      if (label_to_state[m] < 0 && !used[k]) {
        label_to_state[m] = k;
        used[k] = true;
      }
    }
  }

  int index(int q1, int q2) const {
    std::vector<int> digits{q1, q2};
    if (dims.size() == 3) digits.push_back(0);
    return ravel(digits, dims);
  }
  double energy(int q1, int q2) const { return energies(label_to_state[index(q1, q2)]); }

  // The two eigenstates with the largest weight in span{|12>, |03>}, sorted by energy.
  std::pair<int, int> branches() const {
    const int i12 = index(1, 2), i03 = index(0, 3);
    std::vector<std::pair<double, int>> w;
    for (int k = 0; k < vectors.cols(); ++k) w.push_back({std::norm(vectors(i12, k)) + std::norm(vectors(i03, k)), k});
    std::partial_sort(w.begin(), w.begin() + 2, w.end(), [](auto& x, auto& y) { return x.first > y.first; });
    int a = w[0].second, b = w[1].second;
    if (energies(a) > energies(b)) std::swap(a, b);
    return {a, b};
  }
  double branch_gap() const {
    auto [a, b] = branches();
    return energies(b) - energies(a);
  }
};

struct AlignmentResult {
  double flux_param = 0;       // Q1 offset, MHz
  double delta = 0;            // minimum branch gap, MHz
  double epsilon = 0;          // dressed |01> -> |02>, GHz
  double epsilon_center = 0;   // branch centre minus E|11>, GHz
  double epsilon_prime = 0;    // |11> -> lower branch, GHz
  std::vector<std::pair<double, double>> eigenbranch_gap_curve;  // (offset MHz, gap MHz)
};

inline double branch_gap_at(const DeviceSpec& spec, double offset_mhz) {
  DeviceSpec s = spec;
  s.flux_offset = offset_mhz;
  return to_mhz(DressedSpectrum(build_hamiltonian(s)).branch_gap());
}

inline AlignmentResult alignment_at(const DeviceSpec& spec, double offset_mhz) {
  DeviceSpec s = spec;
  s.flux_offset = offset_mhz;
  DressedSpectrum ds(build_hamiltonian(s));
  auto [lo, hi] = ds.branches();
  AlignmentResult r;
  r.flux_param = offset_mhz;
  r.delta = to_mhz(ds.energies(hi) - ds.energies(lo));
  r.epsilon = to_ghz(ds.energy(0, 2) - ds.energy(0, 1));
  r.epsilon_center = to_ghz(0.5 * (ds.energies(hi) + ds.energies(lo)) - ds.energy(1, 1));
  r.epsilon_prime = to_ghz(ds.energies(lo) - ds.energy(1, 1));
  return r;
}

inline AlignmentResult level_alignment_scan(const DeviceSpec& spec, const std::vector<double>& flux_grid) {
  spec.validate();
  if (flux_grid.size() < 2) fail(ErrorCode::kNoCrossingInRange, "grid needs at least two points");
  const double bare = spec.bare_crossing_offset();
  bool below = false, above = false;
  for (double x : flux_grid) {
    below |= (x <= bare);
    above |= (x >= bare);
  }
  if (!(below && above)) fail(ErrorCode::kNoCrossingInRange, "bare |12>-|03> detuning keeps its sign");

  std::vector<std::pair<double, double>> curve;
  size_t best = 0;
  for (size_t i = 0; i < flux_grid.size(); ++i) {
    curve.push_back({flux_grid[i], branch_gap_at(spec, flux_grid[i])});
    if (curve[i].second < curve[best].second) best = i;
  }
  // Golden-section refinement between the neighbours of the best grid point.
  double lo = flux_grid[best > 0 ? best - 1 : best];
  double hi = flux_grid[best + 1 < flux_grid.size() ? best + 1 : best];
  if (lo > hi) std::swap(lo, hi);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = branch_gap_at(spec, c), fd = branch_gap_at(spec, d);
  for (int it = 0; it < 80 && hi - lo > 1e-9; ++it) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - gr * (hi - lo); fc = branch_gap_at(spec, c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + gr * (hi - lo); fd = branch_gap_at(spec, d);
    }
  }
  double x = 0.5 * (lo + hi);
  if (branch_gap_at(spec, x) > curve[best].second) x = curve[best].first;
  AlignmentResult r = alignment_at(spec, x);
  r.eigenbranch_gap_curve = std::move(curve);
  return r;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

// Grid centred on the bare crossing, wide enough for any coupling of interest.
inline std::vector<double> default_alignment_grid(const DeviceSpec& spec, double half_width = 20.0, int points = 81) {
  const double c = spec.bare_crossing_offset();
  return linspace(c - half_width, c + half_width, points);
}

// Returns spec with flux_offset at the alignment point.
inline DeviceSpec aligned(const DeviceSpec& spec) {
  DeviceSpec s = spec;
  s.flux_offset = level_alignment_scan(spec, default_alignment_grid(spec)).flux_param;
  return s;
}

inline DeviceSpec calibrate_coupling(const DeviceSpec& spec, double target_delta) {
  spec.validate();
  if (!(target_delta > 0)) fail(ErrorCode::kCalibrationDiverged, "target splitting must be positive");
  auto with = [&](double c) {
    DeviceSpec s = spec;
    (s.three_mode() ? s.g : s.j_eff) = c;
    return s;
  };
  auto delta_of = [&](double c) {
    DeviceSpec s = with(c);
    return level_alignment_scan(s, default_alignment_grid(s, std::max(20.0, 4 * target_delta))).delta;
  };
  double lo = 0.0, hi = std::max(1.0, target_delta / 3.0);
  int it = 0;
  while (delta_of(hi) < target_delta) {
    lo = hi;
    hi *= 2;
    if (++it > 30) fail(ErrorCode::kCalibrationDiverged, "cannot bracket target splitting");
  }
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double dm = delta_of(mid);
    if (std::abs(dm - target_delta) < 1e-4 * target_delta) return with(mid);
    (dm < target_delta ? lo : hi) = mid;
  }
  fail(ErrorCode::kCalibrationDiverged, "bisection did not converge in 100 iterations");
}

struct SpectrumTable {
  std::vector<double> flux;   // MHz offsets
  std::vector<double> probe;  // GHz
  RMat intensity;             // rows: flux, cols: probe
};

// Peak-normalised Lorentzian with full width at half maximum fwhm.
inline double lorentzian(double x, double x0, double fwhm) {
  const double h = 0.5 * fwhm;
  return h * h / ((x - x0) * (x - x0) + h * h);
}

inline SpectrumTable three_tone_spectrum(const DeviceSpec& spec, const std::vector<double>& flux_grid,
                                         const std::vector<double>& probe_grid, double linewidth_mhz = 2.0,
                                         double q1_line_weight = 0.5) {
  if (flux_grid.empty() || probe_grid.empty()) fail(ErrorCode::kInvalidArgument, "empty grid");
  SpectrumTable t{flux_grid, probe_grid, RMat::Zero(flux_grid.size(), probe_grid.size())};
  const double fwhm = linewidth_mhz * 1e-3;
  for (size_t i = 0; i < flux_grid.size(); ++i) {
    DeviceSpec s = spec;
    s.flux_offset = flux_grid[i];
    Operator h = build_hamiltonian(s);
    DressedSpectrum ds(h);
    const Mat a = embed(destroy(s.levels_per_transmon), h.dims, 0);
    const Mat b = embed(destroy(s.levels_per_transmon), h.dims, 1);
    const int k02 = ds.label_to_state[ds.index(0, 2)];
    const Vec v02 = ds.vectors.col(k02);
    const Vec up_a = a.adjoint() * v02, up_b = b.adjoint() * v02;
    std::vector<std::pair<double, double>> lines;  // (GHz, weight)
    auto [lo, hi] = ds.branches();
    for (int k : {lo, hi}) {
      const Vec vk = ds.vectors.col(k);
      const double w = std::norm(vk.dot(up_a)) + std::norm(vk.dot(up_b)) / 3.0;
      lines.push_back({to_ghz(ds.energies(k) - ds.energies(k02)), w});
    }
    lines.push_back({to_ghz(ds.energy(1, 0) - ds.energy(0, 0)), q1_line_weight});
    for (size_t j = 0; j < probe_grid.size(); ++j) {
      double acc = 0;
      for (auto [f, w] : lines) acc += w * lorentzian(probe_grid[j], f, fwhm);
      t.intensity(i, j) = acc;
    }
  }
  return t;
}

// Rotating-frame data for dynamics on the two-mode model.
struct QubitFrame {
  double w1 = 0;  // dressed 0->1 of Q1 with Q2 in |0>, rad/ns
  double w2 = 0;
  RVec frame_diag;       // w1*n1 + w2*n2 per basis state
  RVec dispersive_diag;  // dressed energy per bare label minus frame, E00 = 0
};

inline QubitFrame qubit_frame(const DeviceSpec& spec) {
  if (spec.three_mode()) fail(ErrorCode::kInvalidSpec, "dynamics use the two-mode model");
  Operator h = build_hamiltonian(spec);
  DressedSpectrum ds(h);
  QubitFrame f;
  const double e00 = ds.energy(0, 0);
  f.w1 = ds.energy(1, 0) - e00;
  f.w2 = ds.energy(0, 1) - e00;
  const int n = h.dim();
  f.frame_diag.resize(n);
  f.dispersive_diag.resize(n);
  for (int m = 0; m < n; ++m) {
    std::vector<int> d = unravel(m, h.dims);
    f.frame_diag(m) = f.w1 * d[0] + f.w2 * d[1];
    f.dispersive_diag(m) = ds.energies(ds.label_to_state[m]) - e00 - f.frame_diag(m);
  }
  return f;
}

// Static ZZ coupling of the dressed computational levels, MHz.
inline double static_zz(const DeviceSpec& spec) {
  DressedSpectrum ds(build_hamiltonian(spec));
  return to_mhz(ds.energy(1, 1) - ds.energy(1, 0) - ds.energy(0, 1) + ds.energy(0, 0));
}

}  // namespace mapcnot

#endif  // MAPCNOT_DEVICE_HPP_
