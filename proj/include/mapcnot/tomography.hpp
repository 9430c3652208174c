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

#ifndef MAPCNOT_TOMOGRAPHY_HPP_
#define MAPCNOT_TOMOGRAPHY_HPP_

#include <algorithm>
#include <functional>
#include <random>

#include "mapcnot/gates.hpp"
#include "mapcnot/linalg.hpp"
#include "mapcnot/optim.hpp"

namespace mapcnot {

using Ptm = Eigen::Matrix<double, 16, 16>;

struct ReadoutModel {
  double beta_ii = 2.72;
  double beta_zi = 1.1;
  double beta_iz = 0.86;
  double beta_zz = 0.44;
  int shot_count = 0;        // 0: exact expectation values
  bool multinomial = false;  // sample computational outcomes instead of a Gaussian

  void validate() const {
    if (!(beta_ii > 0)) fail(ErrorCode::kInvalidArgument, "beta_II must be positive");
    if (shot_count < 0) fail(ErrorCode::kInvalidArgument, "shot count must be non-negative");
  }
  // Eigenvalues of M on |00>, |01>, |10>, |11>.
  std::array<double, 4> levels() const {
    return {beta_ii + beta_zi + beta_iz + beta_zz, beta_ii + beta_zi - beta_iz - beta_zz,
            beta_ii - beta_zi + beta_iz - beta_zz, beta_ii - beta_zi - beta_iz + beta_zz};
  }
  Mat operator_m() const {
    Mat m = Mat::Zero(4, 4);
    auto l = levels();
    for (int k = 0; k < 4; ++k) m(k, k) = l[k];
    return m;
  }
};

// Fits the four betas from <M> measured on |00>, |01>, |10>, |11>.
inline ReadoutModel fit_readout_betas(const std::array<double, 4>& basis_values) {
  Eigen::Matrix4d a;
  a << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  Eigen::Vector4d v(basis_values[0], basis_values[1], basis_values[2], basis_values[3]);
  Eigen::Vector4d b = a.partialPivLu().solve(v);
  ReadoutModel m;
  m.beta_ii = b(0); m.beta_zi = b(1); m.beta_iz = b(2); m.beta_zz = b(3);
  return m;
}

inline double readout_expectation(const Mat& rho, const ReadoutModel& model, std::mt19937_64* rng = nullptr) {
  if (rho.rows() != 4 || rho.cols() != 4) fail(ErrorCode::kDimensionMismatch, "readout needs a 4x4 state");
  const auto l = model.levels();
  std::array<double, 4> p;
  double mean = 0, second = 0;
  for (int k = 0; k < 4; ++k) {
    p[k] = std::max(0.0, rho(k, k).real());
    mean += p[k] * l[k];
    second += p[k] * l[k] * l[k];
  }
  if (model.shot_count <= 0) {
    mean = 0;
    for (int k = 0; k < 4; ++k) mean += rho(k, k).real() * l[k];
    return mean;
  }
  if (!rng) fail(ErrorCode::kInvalidArgument, "shot noise needs a random generator");
  if (model.multinomial) {
    std::discrete_distribution<int> pick(p.begin(), p.end());
    double acc = 0;
    for (int s = 0; s < model.shot_count; ++s) acc += l[pick(*rng)];
    return acc / model.shot_count;
  }
  const double var = std::max(0.0, second - mean * mean) / model.shot_count;
  std::normal_distribution<double> noise(0.0, 1.0);
  return mean + std::sqrt(var) * noise(*rng);
}

inline double readout_expectation(const DensityMatrix& rho, const ReadoutModel& model, std::mt19937_64* rng = nullptr) {
  return readout_expectation(rho.data, model, rng);
}

// Single-qubit order: I, X_pi, X_pi/2, X_-pi/2, Y_pi/2, Y_-pi/2; index = 6*q1 + q2.
inline const std::array<Mat, 6>& single_prepulses() {
  static const std::array<Mat, 6> set = {Mat::Identity(2, 2), rx(kPi), rx(0.5 * kPi), rx(-0.5 * kPi), ry(0.5 * kPi),
                                         ry(-0.5 * kPi)};
  return set;
}

inline std::string prepulse_label(int k) {
  static const char* names[6] = {"I", "Xpi", "Xpi/2", "X-pi/2", "Ypi/2", "Y-pi/2"};
  if (k < 0 || k >= 36) fail(ErrorCode::kBadIndex, "prepulse index out of range");
  return std::string(names[k / 6]) + "(x)" + names[k % 6];
}

inline const std::vector<Mat>& prepulse_set() {
  static const std::vector<Mat> set = [] {
    std::vector<Mat> s;
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) s.push_back(kron(single_prepulses()[a], single_prepulses()[b]));
    }
    return s;
  }();
  return set;
}

struct MeasurementRecord {
  std::vector<std::pair<int, int>> settings;  // (prep index, prepulse index)
  std::vector<double> values;
  int shots = 0;
};

inline Mat ground_state_4() {
  Mat r = Mat::Zero(4, 4);
  r(0, 0) = 1.0;
  return r;
}

inline MeasurementRecord run_qst(const Mat& rho_prepared, const GateChannel* gate, const ReadoutModel& model,
                                 std::mt19937_64* rng = nullptr, int prep_index = 0) {
  model.validate();
  const Mat rho = gate ? gate->apply(rho_prepared) : rho_prepared;
  MeasurementRecord rec;
  rec.shots = model.shot_count;
  for (int j = 0; j < 36; ++j) {
    const Mat& p = prepulse_set()[j];
    rec.settings.push_back({prep_index, j});
    rec.values.push_back(readout_expectation(Mat(p * rho * p.adjoint()), model, rng));
  }
  return rec;
}

inline MeasurementRecord run_qpt(const GateChannel& channel, const ReadoutModel& model, std::mt19937_64* rng = nullptr) {
  model.validate();
  MeasurementRecord rec;
  rec.shots = model.shot_count;
  const Mat g = ground_state_4();
  for (int i = 0; i < 36; ++i) {
    const Mat& pi = prepulse_set()[i];
    const Mat out = channel.apply(pi * g * pi.adjoint());
    for (int j = 0; j < 36; ++j) {
      const Mat& pj = prepulse_set()[j];
      rec.settings.push_back({i, j});
      rec.values.push_back(readout_expectation(Mat(pj * out * pj.adjoint()), model, rng));
    }
  }
  return rec;
}

// Pauli vector o_k = Tr[P_j^dagger M P_j P_k] of the rotated readout operator.
inline PauliVector observable_vector(int prepulse, const ReadoutModel& model) {
  const Mat& p = prepulse_set()[prepulse];
  const Mat o = p.adjoint() * model.operator_m() * p;
  PauliVector v;
  for (int k = 0; k < 16; ++k) v(k) = (o * pauli_basis()[k]).trace().real();
  return v;
}

inline PauliVector prepared_vector(int prep) {
  const Mat& p = prepulse_set()[prep];
  return pauli_vector(Mat(p * ground_state_4() * p.adjoint()));
}

inline void check_record(const MeasurementRecord& rec) {
  if (rec.settings.size() != rec.values.size()) fail(ErrorCode::kInvalidArgument, "record size mismatch");
  for (auto [i, j] : rec.settings) {
    if (i < 0 || i >= 36 || j < 0 || j >= 36) fail(ErrorCode::kBadIndex, "setting index out of range");
  }
}

struct StateFit {
  DensityMatrix rho;
  double residual = 0;  // sum of squared residuals
  int iterations = 0;
};

namespace detail {

inline Mat t_from_params(const RVec& x) {
  Mat t(4, 4);
  for (int k = 0; k < 16; ++k) t(k % 4, k / 4) = cd(x(k), x(16 + k));
  return t;
}

inline RVec params_from_t(const Mat& t) {
  RVec x(32);
  for (int k = 0; k < 16; ++k) {
    x(k) = t(k % 4, k / 4).real();
    x(16 + k) = t(k % 4, k / 4).imag();
  }
  return x;
}

}  // namespace detail

// Least-squares objective sum_s (Tr[O_s rho] - m_s)^2 with rho = T^dagger T / Tr.
class StateObjective {
 public:
  StateObjective(const MeasurementRecord& rec, const ReadoutModel& model) {
    check_record(rec);
    for (size_t s = 0; s < rec.settings.size(); ++s) {
      const Mat& p = prepulse_set()[rec.settings[s].second];
      obs_.push_back(p.adjoint() * model.operator_m() * p);
      data_.push_back(rec.values[s]);
    }
  }

  Mat rho(const Mat& t) const {
    const Mat a = t.adjoint() * t;
    return a / a.trace().real();
  }

  double value(const Mat& rho) const {
    double f = 0;
    for (size_t s = 0; s < obs_.size(); ++s) {
      const double r = (obs_[s] * rho).trace().real() - data_[s];
      f += r * r;
    }
    return f;
  }

  double operator()(const RVec& x, RVec& grad) const {
    const Mat t = detail::t_from_params(x);
    const Mat a = t.adjoint() * t;
    const double tr = a.trace().real();
    if (!(tr > 0)) {
      grad.setZero(x.size());
      return std::numeric_limits<double>::infinity();
    }
    const Mat r = a / tr;
    Mat g = Mat::Zero(4, 4);
    double f = 0;
    for (size_t s = 0; s < obs_.size(); ++s) {
      const double res = (obs_[s] * r).trace().real() - data_[s];
      f += res * res;
      g += 2.0 * res * obs_[s];
    }
    const Mat gp = (g - (g * r).trace().real() * Mat::Identity(4, 4)) / tr;
    // dL = 2 Re Tr[gp T^dagger dT]; W_ij = (gp T^dagger)_ji.
    const Mat w = (gp * t.adjoint()).transpose();
    grad.resize(32);
    for (int k = 0; k < 16; ++k) {
      grad(k) = 2.0 * w(k % 4, k / 4).real();
      grad(16 + k) = -2.0 * w(k % 4, k / 4).imag();
    }
    return f;
  }

  size_t size() const { return obs_.size(); }
  const std::vector<Mat>& observables() const { return obs_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::vector<Mat> obs_;
  std::vector<double> data_;
};

// Unconstrained linear inversion, projected to the nearest positive matrix with trace 1.
inline Mat linear_inversion_state(const StateObjective& obj) {
  const size_t n = obj.size();
  RMat a(n, 16);
  RVec b(n);
  for (size_t s = 0; s < n; ++s) {
    for (int k = 0; k < 16; ++k) a(s, k) = (obj.observables()[s] * pauli_basis()[k]).trace().real() / 4.0;
    b(s) = obj.data()[s];
  }
  RVec v = a.colPivHouseholderQr().solve(b);
  Mat rho = Mat::Zero(4, 4);
  for (int k = 0; k < 16; ++k) rho += v(k) * pauli_basis()[k] / 4.0;
  rho = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  RVec ev = es.eigenvalues().cwiseMax(0.0);
  if (ev.sum() <= 0) ev.setOnes();
  ev /= ev.sum();
  return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

// Euclidean projection of a Hermitian matrix onto unit-trace PSD matrices.
inline Mat project_density(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  RVec ev = es.eigenvalues();
  const int n = static_cast<int>(ev.size());
  RVec sorted = ev;
  std::sort(sorted.data(), sorted.data() + n, std::greater<double>());
  double cum = 0, theta = 0;
  for (int k = 0; k < n; ++k) {
    cum += sorted(k);
    const double t = (cum - 1.0) / (k + 1);
    if (sorted(k) - t > 0) theta = t;
  }
  ev = (ev.array() - theta).cwiseMax(0.0);
  return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

// Convex least squares over density matrices by accelerated projected gradient.
inline Mat state_least_squares(const StateObjective& obj, const Mat& start, int max_iterations = 20000) {
  double lip = 0;
  {
    const size_t n = obj.size();
    RMat a(n, 16);
    for (size_t s = 0; s < n; ++s) {
      for (int k = 0; k < 16; ++k) a(s, k) = (obj.observables()[s] * pauli_basis()[k]).trace().real() / 2.0;
    }
    const double smax = Eigen::JacobiSVD<RMat>(a).singularValues()(0);
    lip = 2.0 * smax * smax;
  }
  auto grad = [&](const Mat& r) {
    Mat g = Mat::Zero(4, 4);
    for (size_t s = 0; s < obj.size(); ++s) {
      g += 2.0 * ((obj.observables()[s] * r).trace().real() - obj.data()[s]) * obj.observables()[s];
    }
    return g;
  };
  Mat x = project_density(start), y = x;
  double t = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Mat xn = project_density(y - grad(y) / lip);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Gradient-based adaptive restart; objective values are too flat to compare near the optimum.
    if ((y - xn).cwiseProduct((xn - x).conjugate()).sum().real() > 0) {
      y = xn;
      t = 1.0;
    } else {
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
    }
    x = xn;
    if (it % 10 == 9 && max_abs(x - project_density(x - grad(x) / lip)) < 1e-15) break;
  }
  return x;
}

inline StateFit reconstruct_state_mle(const MeasurementRecord& rec, const ReadoutModel& model,
                                      const LbfgsOptions& opt = {}) {
  StateObjective obj(rec, model);
  const Mat rho_ls = state_least_squares(obj, linear_inversion_state(obj));
  // T = rho^(1/2) puts the factorised problem at the convex optimum; L-BFGS certifies it.
  Eigen::SelfAdjointEigenSolver<Mat> es(rho_ls);
  const RVec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Mat t = es.eigenvectors() * root.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  const LbfgsResult res = lbfgs([&](const RVec& v, RVec& g) { return obj(v, g); }, detail::params_from_t(t), opt);
  if (!res.converged) {
    fail(ErrorCode::kOptimizerFailed, "state MLE gradient norm " + std::to_string(res.gradient_norm));
  }
  const Mat r = obj.rho(detail::t_from_params(res.x));
  return StateFit{DensityMatrix({2, 2}, 0.5 * (r + r.adjoint())), obj.value(r), res.iterations};
}

// ---- Pauli transfer matrices ----

inline Ptm ptm_of_superop(const Mat& s) {
  Ptm r;
  for (int j = 0; j < 16; ++j) {
    const Mat out = apply_superop(s, pauli_basis()[j]);
    for (int i = 0; i < 16; ++i) r(i, j) = (pauli_basis()[i] * out).trace().real() / 4.0;
  }
  return r;
}

inline Ptm ptm_of_unitary(const Mat& u) {
  if (u.rows() != 4 || unitarity_error(u) > kTol.unitarity) fail(ErrorCode::kNonUnitaryInput, "ptm_of_unitary");
  Ptm r;
  for (int j = 0; j < 16; ++j) {
    const Mat out = u * pauli_basis()[j] * u.adjoint();
    for (int i = 0; i < 16; ++i) r(i, j) = (pauli_basis()[i] * out).trace().real() / 4.0;
  }
  return r;
}

inline Ptm ptm_of_channel(const GateChannel& g) {
  return g.kind == GateChannel::Kind::kUnitary ? ptm_of_unitary(g.unitary) : ptm_of_superop(g.superop);
}

inline Mat superop_of_ptm(const Ptm& r) {
  Mat s = Mat::Zero(16, 16);
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      Mat unit = Mat::Zero(4, 4);
      unit(a, b) = 1.0;
      Eigen::Matrix<cd, 16, 1> pc;
      for (int j = 0; j < 16; ++j) pc(j) = (pauli_basis()[j] * unit).trace();
      Eigen::Matrix<cd, 16, 1> q = r.cast<cd>() * pc;
      Mat out = Mat::Zero(4, 4);
      for (int i = 0; i < 16; ++i) out += q(i) * pauli_basis()[i] / 4.0;
      s.col(a + 4 * b) = Eigen::Map<const Vec>(out.data(), 16);
    }
  }
  return s;
}

namespace detail {

// B_ij = P_j^T (x) P_i so that J = (1/16) sum R_ij B_ij and R_ij = Tr[B_ij J].
inline const std::vector<Mat>& choi_basis() {
  static const std::vector<Mat> basis = [] {
    std::vector<Mat> b(256);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) b[i * 16 + j] = kron(pauli_basis()[j].transpose(), pauli_basis()[i]);
    }
    return b;
  }();
  return basis;
}

}  // namespace detail

inline Mat choi_of_ptm(const Ptm& r) {
  Mat j = Mat::Zero(16, 16);
  for (int a = 0; a < 256; ++a) j += (r(a / 16, a % 16) / 16.0) * detail::choi_basis()[a];
  return j;
}

inline Ptm ptm_of_choi(const Mat& j) {
  Ptm r;
  for (int a = 0; a < 256; ++a) r(a / 16, a % 16) = (detail::choi_basis()[a].transpose().cwiseProduct(j)).sum().real();
  return r;
}

inline double choi_min_eigenvalue(const Ptm& r) {
  Mat j = choi_of_ptm(r);
  return Eigen::SelfAdjointEigenSolver<Mat>(j, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double process_fidelity(const Ptm& r_exp, const Ptm& r_ideal) {
  return ((r_ideal.transpose() * r_exp).trace() + 4.0) / 20.0;
}

inline double process_fidelity(const RMat& r_exp, const RMat& r_ideal) {
  if (r_exp.rows() != 16 || r_exp.cols() != 16 || r_ideal.rows() != 16 || r_ideal.cols() != 16) {
    fail(ErrorCode::kDimensionMismatch, "PTMs must be 16x16");
  }
  return ((r_ideal.transpose() * r_exp).trace() + 4.0) / 20.0;
}

inline Ptm project_tp(Ptm r) {
  r.row(0).setZero();
  r(0, 0) = 1.0;
  return r;
}

inline Ptm project_cp(const Ptm& r) {
  Eigen::SelfAdjointEigenSolver<Mat> es(choi_of_ptm(r));
  RVec ev = es.eigenvalues().cwiseMax(0.0);
  return ptm_of_choi(es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint());
}

// Euclidean projection onto CPTP maps by Dykstra alternation, finished with an exact TP step.
inline Ptm project_cptp(const Ptm& r0, double tol = 1e-12, int max_iter = 5000) {
  Ptm x = r0, p = Ptm::Zero(), q = Ptm::Zero();
  for (int it = 0; it < max_iter; ++it) {
    const Ptm y = project_tp(x + p);
    p = x + p - y;
    const Ptm xn = project_cp(y + q);
    q = y + q - xn;
    const double change = (xn - x).norm();
    x = xn;
    if (change < tol && (project_tp(x) - x).norm() < tol) break;
  }
  return project_tp(x);
}

struct PtmFit {
  Ptm r;
  double residual = 0;       // sum of squared residuals
  double choi_min_eig = 0;
  double tp_residual = 0;
  int iterations = 0;
};

struct PtmMleOptions {
  int max_iterations = 20000;
  double tolerance = 1e-10;  // primal and dual residuals
};

// Least squares over CPTP maps by ADMM. The first PTM row is fixed, so TP holds exactly;
// CP is imposed through the Choi matrix, which is isometric to the PTM up to a factor 4.
inline PtmFit reconstruct_ptm_mle(const MeasurementRecord& rec, const ReadoutModel& model,
                                  const PtmMleOptions& opt = {}) {
  check_record(rec);
  model.validate();
  const int n = static_cast<int>(rec.settings.size());
  if (n < 256) fail(ErrorCode::kInvalidArgument, "process tomography needs at least 256 settings");
  std::array<PauliVector, 36> o, p;
  for (int k = 0; k < 36; ++k) {
    o[k] = observable_vector(k, model);
    p[k] = prepared_vector(k);
  }
  // Column-major vec(R); free entries are every row but the first.
  std::vector<int> free_idx;
  for (int c = 0; c < 16; ++c) {
    for (int r = 1; r < 16; ++r) free_idx.push_back(r + 16 * c);
  }
  const int m = static_cast<int>(free_idx.size());
  RMat a(n, m);
  RVec b(n);
  for (int s = 0; s < n; ++s) {
    const auto [i, j] = rec.settings[s];
    const Eigen::Matrix<double, 16, 16> outer = o[j] * p[i].transpose() / 4.0;
    for (int k = 0; k < m; ++k) a(s, k) = outer.data()[free_idx[k]];
    b(s) = rec.values[s] - outer(0, 0);  // fixed entry R_00 = 1
  }
  auto to_ptm = [&](const RVec& w) {
    Ptm r = Ptm::Zero();
    r(0, 0) = 1.0;
    for (int k = 0; k < m; ++k) r.data()[free_idx[k]] = w(k);
    return r;
  };
  auto to_free = [&](const Ptm& r) {
    RVec w(m);
    for (int k = 0; k < m; ++k) w(k) = r.data()[free_idx[k]];
    return w;
  };
  const RMat ata = 2.0 * a.transpose() * a;
  const RVec atb = 2.0 * a.transpose() * b;
  Eigen::SelfAdjointEigenSolver<RMat> spec(ata, Eigen::EigenvaluesOnly);
  double rho = std::sqrt(std::max(spec.eigenvalues().maxCoeff(), 1e-12) * std::max(spec.eigenvalues().minCoeff(), 1e-6));
  Eigen::LLT<RMat> llt(ata + rho * RMat::Identity(m, m));

  // Warm start from unconstrained least squares.
  RVec w = Eigen::LDLT<RMat>(ata + 1e-12 * RMat::Identity(m, m)).solve(atb);
  Ptm z = project_cp(to_ptm(w));
  Ptm u = Ptm::Zero();
  int it = 0;
  double primal = 0, dual = 0;
  for (; it < opt.max_iterations; ++it) {
    w = llt.solve(atb + rho * to_free(z - u));
    const Ptm x = to_ptm(w);
    const Ptm z_old = z;
    z = project_cp(x + u);
    u += x - z;
    primal = (x - z).norm();
    dual = rho * (z - z_old).norm();
    if (primal < opt.tolerance && dual < opt.tolerance) break;
    // Residual balancing keeps both residuals shrinking at a similar rate.
    if (it % 50 == 49 && (primal > 10 * dual || dual > 10 * primal)) {
      const double f = primal > dual ? 2.0 : 0.5;
      rho *= f;
      u /= f;
      llt.compute(ata + rho * RMat::Identity(m, m));
    }
  }
  if (it >= opt.max_iterations) {
    fail(ErrorCode::kOptimizerFailed, "PTM MLE did not converge, primal " + std::to_string(primal));
  }
  const Ptm x = project_tp(z);
  PtmFit fit;
  fit.r = x;
  fit.residual = (a * to_free(x) - b).squaredNorm();
  fit.choi_min_eig = choi_min_eigenvalue(x);
  fit.tp_residual = (project_tp(x) - x).cwiseAbs().maxCoeff();
  fit.iterations = it;
  if (fit.choi_min_eig < kTol.cp_eigenvalue) fail(ErrorCode::kOptimizerFailed, "PTM MLE left the CP set");
  return fit;
}

}  // namespace mapcnot

#endif  // MAPCNOT_TOMOGRAPHY_HPP_
