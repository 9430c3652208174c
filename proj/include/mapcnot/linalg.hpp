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

#ifndef MAPCNOT_LINALG_HPP_
#define MAPCNOT_LINALG_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "mapcnot/errors.hpp"

namespace mapcnot {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using PauliVector = Eigen::Matrix<double, 16, 1>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Angular frequencies are rad/ns throughout; times are ns.
inline constexpr double mhz(double f) { return kTwoPi * 1e-3 * f; }
inline constexpr double ghz(double f) { return kTwoPi * f; }
inline constexpr double to_mhz(double w) { return w / (kTwoPi * 1e-3); }
inline constexpr double to_ghz(double w) { return w / kTwoPi; }

struct Tolerances {
  double hermiticity = 1e-10;
  double unitarity = 1e-9;
  double trace = 1e-10;
  double min_eigenvalue = -1e-9;
  double pauli_roundtrip = 1e-12;
  double step_halving = 1e-6;
  double cp_eigenvalue = -1e-6;
  double tp_residual = 1e-6;
};
inline constexpr Tolerances kTol{};

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double hermiticity_error(const Mat& m) { return max_abs(m - m.adjoint()); }
inline double unitarity_error(const Mat& u) {
  return max_abs(u.adjoint() * u - Mat::Identity(u.cols(), u.cols()));
}

inline int product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
}

struct Operator {
  std::vector<int> dims;
  Mat data;

  Operator() = default;
  Operator(std::vector<int> d, Mat m) : dims(std::move(d)), data(std::move(m)) {
    for (int x : dims) {
      if (x < 2) fail(ErrorCode::kDimensionMismatch, "subsystem dimension below 2");
    }
    const int n = product(dims);
    if (data.rows() != n || data.cols() != n) {
      fail(ErrorCode::kDimensionMismatch, "matrix side does not match product of dims");
    }
  }
  int dim() const { return static_cast<int>(data.rows()); }
  static Operator identity(const std::vector<int>& d) {
    const int n = product(d);
    return Operator(d, Mat::Identity(n, n));
  }
};

struct DensityMatrix {
  std::vector<int> dims;
  Mat data;

  DensityMatrix() = default;
  DensityMatrix(std::vector<int> d, Mat m) : dims(std::move(d)), data(std::move(m)) {
    Operator check(dims, data);
    if (hermiticity_error(data) > kTol.hermiticity) {
      fail(ErrorCode::kNonHermitianInput, "density matrix is not Hermitian");
    }
    if (std::abs(data.trace() - cd(1.0)) > kTol.trace) {
      fail(ErrorCode::kInvalidArgument, "density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(data, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kTol.min_eigenvalue) {
      fail(ErrorCode::kInvalidArgument, "density matrix has a negative eigenvalue");
    }
  }
  int dim() const { return static_cast<int>(data.rows()); }
  static DensityMatrix pure(const std::vector<int>& d, const Vec& psi) {
    Vec v = psi / psi.norm();
    return DensityMatrix(d, v * v.adjoint());
  }
};

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Operator kron(const Operator& a, const Operator& b) {
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return Operator(std::move(dims), kron(a.data, b.data));
}

// exp(-i h t) for Hermitian h.
inline Mat propagator(const Mat& h, double t) {
  if (hermiticity_error(h) > kTol.hermiticity) {
    fail(ErrorCode::kNonHermitianInput, "generator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec phases = (es.eigenvalues().cast<cd>() * cd(0.0, -t)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Operator propagator(const Operator& h, double t) { return Operator(h.dims, propagator(h.data, t)); }

// Row-major multi-index helpers for tensor-product spaces.
inline std::vector<int> unravel(int index, const std::vector<int>& dims) {
  std::vector<int> digits(dims.size());
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    digits[k] = index % dims[k];
    index /= dims[k];
  }
  return digits;
}

inline int ravel(const std::vector<int>& digits, const std::vector<int>& dims) {
  int index = 0;
  for (size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + digits[k];
  return index;
}

inline Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  if (keep.empty()) fail(ErrorCode::kBadSubsystemIndex, "keep set is empty");
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n || kept[k]) fail(ErrorCode::kBadSubsystemIndex, "bad subsystem index");
    kept[k] = true;
  }
  std::vector<int> kdims, tdims;
  for (int k = 0; k < n; ++k) (kept[k] ? kdims : tdims).push_back(dims[k]);
  const int dk = product(kdims);
  const int dt = tdims.empty() ? 1 : product(tdims);
  Mat out = Mat::Zero(dk, dk);
  std::vector<int> digits(n);
  auto compose = [&](int ik, int it) {
    std::vector<int> kd = unravel(ik, kdims);
    std::vector<int> td = tdims.empty() ? std::vector<int>{} : unravel(it, tdims);
    size_t a = 0, b = 0;
    for (int k = 0; k < n; ++k) digits[k] = kept[k] ? kd[a++] : td[b++];
    return ravel(digits, dims);
  };
  for (int i = 0; i < dk; ++i) {
    for (int j = 0; j < dk; ++j) {
      cd acc = 0.0;
      for (int t = 0; t < dt; ++t) acc += rho(compose(i, t), compose(j, t));
      out(i, j) = acc;
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  for (int k : keep) {
    if (k < 0 || k >= static_cast<int>(rho.dims.size())) {
      fail(ErrorCode::kBadSubsystemIndex, "bad subsystem index");
    }
  }
  std::vector<int> kdims;
  for (int k : keep) kdims.push_back(rho.dims[k]);
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != keep) fail(ErrorCode::kBadSubsystemIndex, "keep indices must be increasing");
  return DensityMatrix(kdims, partial_trace(rho.data, rho.dims, keep));
}

// Linear overlap Tr[a b]; equals the usual fidelity when either state is pure.
inline double state_fidelity(const DensityMatrix& rho_the, const DensityMatrix& rho_exp) {
  if (rho_the.dims != rho_exp.dims) fail(ErrorCode::kDimensionMismatch, "state dims differ");
  return (rho_the.data * rho_exp.data).trace().real();
}

inline Mat pauli(int k) {
  Mat p(2, 2);
  switch (k) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, cd(0, -1), cd(0, 1), 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: fail(ErrorCode::kBadIndex, "pauli index out of range");
  }
  return p;
}

// Two-qubit Pauli P_k with k = 4*a + b; the second qubit runs fastest.
inline const std::array<Mat, 16>& pauli_basis() {
  static const std::array<Mat, 16> basis = [] {
    std::array<Mat, 16> b;
    for (int k = 0; k < 16; ++k) b[k] = kron(pauli(k / 4), pauli(k % 4));
    return b;
  }();
  return basis;
}

inline std::string pauli_label(int k) {
  static const char* names = "IXYZ";
  return std::string{names[k / 4], names[k % 4]};
}

inline PauliVector pauli_vector(const Mat& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) fail(ErrorCode::kDimensionMismatch, "pauli_vector needs 4x4");
  PauliVector v;
  for (int k = 0; k < 16; ++k) v(k) = (pauli_basis()[k] * rho).trace().real();
  return v;
}

inline PauliVector pauli_vector(const DensityMatrix& rho) { return pauli_vector(rho.data); }

inline Mat pauli_assemble_matrix(const PauliVector& v) {
  Mat rho = Mat::Zero(4, 4);
  for (int k = 0; k < 16; ++k) rho += v(k) * pauli_basis()[k];
  return rho / 4.0;
}

inline DensityMatrix pauli_assemble(const PauliVector& v) {
  return DensityMatrix({2, 2}, pauli_assemble_matrix(v));
}

inline Mat destroy(int levels) {
  Mat a = Mat::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Mat number_op(int levels) {
  Mat n = Mat::Zero(levels, levels);
  for (int k = 0; k < levels; ++k) n(k, k) = k;
  return n;
}

// Places a single-subsystem operator at position idx of a tensor product.
inline Mat embed(const Mat& op, const std::vector<int>& dims, int idx) {
  Mat out = Mat::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    out = kron(out, k == idx ? op : Mat::Identity(dims[k], dims[k]).eval());
  }
  return out;
}

inline Vec basis_ket(const std::vector<int>& dims, const std::vector<int>& digits) {
  Vec v = Vec::Zero(product(dims));
  v(ravel(digits, dims)) = 1.0;
  return v;
}

// Removes the global phase of b relative to a and returns max |a - b|.
inline double phase_aligned_distance(const Mat& a, const Mat& b) {
  cd overlap = (a.adjoint() * b).trace();
  cd phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cd(1.0);
  return max_abs(a - b / phase);
}

}  // namespace mapcnot

#endif  // MAPCNOT_LINALG_HPP_
