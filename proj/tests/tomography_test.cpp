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

#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

namespace mapcnot {
namespace {

using testing::ket4;
using testing::projector;

// <Z> of each single-qubit prepulse applied to |0>.
constexpr std::array<double, 6> kZ{1, -1, 0, 0, 0, 0};

double analytic_ground_value(int prepulse, const ReadoutModel& m) {
  const double za = kZ[prepulse / 6], zb = kZ[prepulse % 6];
  return m.beta_ii + m.beta_zi * za + m.beta_iz * zb + m.beta_zz * za * zb;
}

TEST(Prepulses, ThirtySixUnitaryProducts) {
  const auto& set = prepulse_set();
  ASSERT_EQ(set.size(), 36u);
  EXPECT_EQ(max_abs(set[0] - Mat::Identity(4, 4)), 0.0);
  for (const Mat& u : set) EXPECT_LT(unitarity_error(u), 1e-12);
  for (int k = 0; k < 36; ++k) {
    EXPECT_LT(max_abs(set[k] - kron(single_prepulses()[k / 6], single_prepulses()[k % 6])), 1e-15);
  }
}

TEST(Prepulses, SingleQubitMembersReachTheSixAxisStates) {
  std::set<std::array<int, 3>> axes;
  for (const Mat& u : single_prepulses()) {
    const Vec psi = u.col(0);
    const Mat rho = psi * psi.adjoint();
    std::array<int, 3> b{};
    for (int k = 0; k < 3; ++k) {
      const double v = (pauli(k + 1) * rho).trace().real();
      EXPECT_NEAR(std::abs(v), std::round(std::abs(v)), 1e-12);
      b[k] = static_cast<int>(std::lround(v));
    }
    EXPECT_EQ(std::abs(b[0]) + std::abs(b[1]) + std::abs(b[2]), 1);
    axes.insert(b);
  }
  EXPECT_EQ(axes.size(), 6u);
}

TEST(Readout, GroundAndMixedStateValues) {
  const ReadoutModel m;
  EXPECT_NEAR(readout_expectation(projector(ket4(1, 0, 0, 0)), m), 5.12, 1e-12);
  EXPECT_NEAR(readout_expectation(Mat(0.25 * Mat::Identity(4, 4)), m), 2.72, 1e-12);
  EXPECT_THROW(readout_expectation(Mat(Mat::Identity(2, 2)), m), Error);
}

// With R(theta) = exp(-i theta sigma / 2) the Y90(x)Y90 curve is beta_II - beta_IZ cos(phi), minimal at phi = 0.
TEST(Readout, PhaseSensitiveCurvesOnTargetSuperposition) {
  const ReadoutModel m;
  for (double phi : {-2.0, -0.5, 0.0, 0.9, 2.7}) {
    Vec v(4);
    v << 1, std::exp(cd(0, phi)), 0, 0;
    const Mat rho = projector(v / v.norm());
    const Mat& y = prepulse_set()[28];
    const Mat& x = prepulse_set()[14];
    EXPECT_NEAR(readout_expectation(Mat(y * rho * y.adjoint()), m), m.beta_ii - m.beta_iz * std::cos(phi), 1e-12);
    EXPECT_NEAR(readout_expectation(Mat(x * rho * x.adjoint()), m), m.beta_ii + m.beta_iz * std::sin(phi), 1e-12);
    EXPECT_NEAR(readout_expectation(rho, m), m.beta_ii + m.beta_zi, 1e-12);
  }
}

TEST(Readout, BetasRecoveredFromBasisStates) {
  ReadoutModel m;
  m.beta_ii = 3.1;
  m.beta_zz = -0.2;
  const ReadoutModel back = fit_readout_betas(m.levels());
  EXPECT_NEAR(back.beta_ii, 3.1, 1e-12);
  EXPECT_NEAR(back.beta_zi, m.beta_zi, 1e-12);
  EXPECT_NEAR(back.beta_iz, m.beta_iz, 1e-12);
  EXPECT_NEAR(back.beta_zz, -0.2, 1e-12);
}

TEST(Readout, ShotNoiseVarianceScalesInverselyWithShots) {
  const Mat rho = projector(ket4(1, 0, 1, 0));
  std::mt19937_64 rng(11);
  std::vector<double> scaled;
  for (int n : {100, 1000, 10000}) {
    ReadoutModel m;
    m.shot_count = n;
    double s = 0, s2 = 0;
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
      const double v = readout_expectation(rho, m, &rng);
      s += v;
      s2 += v * v;
    }
    const double var = s2 / reps - (s / reps) * (s / reps);
    scaled.push_back(var * n);
  }
  for (double v : scaled) {
    EXPECT_LT(v / scaled[0], 2.0);
    EXPECT_GT(v / scaled[0], 0.5);
  }
}

TEST(Readout, MultinomialSamplingIsUnbiased) {
  const Mat rho = projector(ket4(1, 1, 1, 0));
  ReadoutModel m;
  m.shot_count = 200;
  m.multinomial = true;
  std::mt19937_64 rng(12);
  double s = 0;
  for (int r = 0; r < 2000; ++r) s += readout_expectation(rho, m, &rng);
  ReadoutModel exact;
  EXPECT_NEAR(s / 2000, readout_expectation(rho, exact), 0.01);
}

TEST(Qst, GroundRecordMatchesAnalyticValues) {
  const ReadoutModel m;
  const MeasurementRecord rec = run_qst(ground_state_4(), nullptr, m);
  ASSERT_EQ(rec.values.size(), 36u);
  for (int j = 0; j < 36; ++j) EXPECT_NEAR(rec.values[j], analytic_ground_value(j, m), 1e-10);
}

TEST(Qst, IdentityGateLeavesRecordUnchanged) {
  const GateChannel id = GateChannel::from_unitary(Mat::Identity(4, 4), 0);
  const Mat rho = projector(ket4(1, 0, 0, 1));
  EXPECT_EQ(run_qst(rho, &id, ReadoutModel{}).values, run_qst(rho, nullptr, ReadoutModel{}).values);
}

TEST(Qpt, RecordShapeAndComposedPrerotationIdentity) {
  const ReadoutModel m;
  const GateChannel id = GateChannel::from_unitary(Mat::Identity(4, 4), 0);
  const MeasurementRecord rec = run_qpt(id, m);
  ASSERT_EQ(rec.values.size(), 1296u);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, 35);
  for (int k = 0; k < 20; ++k) {
    const int i = pick(rng), j = pick(rng);
    const Mat u = prepulse_set()[j] * prepulse_set()[i];
    const double expect = readout_expectation(Mat(u * ground_state_4() * u.adjoint()), m);
    EXPECT_NEAR(rec.values[36 * i + j], expect, 1e-12);
    EXPECT_EQ(rec.settings[36 * i + j], std::make_pair(i, j));
  }
}

TEST(Qpt, CnotOnExcitedControlReadsOnePointTwo) {
  const MeasurementRecord rec = run_qpt(GateChannel::from_unitary(cnot_matrix(), 0), ReadoutModel{});
  EXPECT_NEAR(rec.values[36 * 6 + 0], 1.2, 1e-12);
}

TEST(StateMle, NoiselessRoundTrips) {
  const ReadoutModel m;
  const StateFit g = reconstruct_state_mle(run_qst(ground_state_4(), nullptr, m), m);
  EXPECT_GE(state_fidelity(g.rho, DensityMatrix({2, 2}, ground_state_4())), 0.9999);
  const Mat bell = projector(ket4(1, 0, 0, 1));
  const StateFit b = reconstruct_state_mle(run_qst(bell, nullptr, m), m);
  EXPECT_GE(state_fidelity(b.rho, DensityMatrix({2, 2}, bell)), 0.999);
}

void expect_physical(const Mat& r) {
  EXPECT_LT(hermiticity_error(r), 1e-12);
  EXPECT_NEAR(r.trace().real(), 1.0, 1e-10);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(r).eigenvalues().minCoeff(), -1e-12);
}

TEST(StateMle, PhysicalAndLocallyOptimalOnNoisyAndInconsistentRecords) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> junk(0.0, 6.0);
  ReadoutModel noisy;
  noisy.shot_count = 500;
  for (int trial = 0; trial < 20; ++trial) {
    MeasurementRecord rec;
    if (trial % 2 == 0) {
      rec = run_qst(testing::random_density(4, rng, 1 + trial % 4), nullptr, noisy, &rng);
    } else {
      rec = run_qst(ground_state_4(), nullptr, ReadoutModel{});
      for (double& v : rec.values) v = junk(rng);
    }
    const StateFit fit = reconstruct_state_mle(rec, noisy);
    expect_physical(fit.rho.data);
    const StateObjective obj(rec, noisy);
    const double f0 = obj.value(fit.rho.data);
    EXPECT_NEAR(f0, fit.residual, 1e-9 * std::max(1.0, f0));
    for (int k = 0; k < 10; ++k) {
      const Mat sigma = testing::random_density(4, rng, 1 + k % 4);
      const Mat perturbed = 0.99 * fit.rho.data + 0.01 * sigma;
      EXPECT_LE(f0, obj.value(perturbed) + 1e-12);
    }
  }
}

TEST(Ptm, UnitaryExamples) {
  EXPECT_LT((ptm_of_unitary(Mat::Identity(4, 4)) - Ptm::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  const Ptm c = ptm_of_unitary(cnot_matrix());
  // Columns are inputs: IX -> IX, XI -> XX, IZ -> ZZ, ZI -> ZI.
  EXPECT_NEAR(c(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(c(5, 4), 1.0, 1e-15);
  EXPECT_NEAR(c(15, 3), 1.0, 1e-15);
  EXPECT_NEAR(c(12, 12), 1.0, 1e-15);
  for (int j = 0; j < 16; ++j) EXPECT_NEAR(c.col(j).cwiseAbs().sum(), 1.0, 1e-14);
}

TEST(Ptm, OrthogonalHomomorphicAndSelfFidelityOne) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 20; ++k) {
    const Mat a = testing::random_unitary(4, rng), b = testing::random_unitary(4, rng);
    const Ptm ra = ptm_of_unitary(a), rb = ptm_of_unitary(b);
    EXPECT_LT((ra * ra.transpose() - Ptm::Identity()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR((ra.transpose() * ra).trace(), 16.0, 1e-10);
    EXPECT_LT((ptm_of_unitary(Mat(a * b)) - ra * rb).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(process_fidelity(ra, ra), 1.0, 1e-12);
  }
}

TEST(Ptm, CompletelyDepolarizingAgainstIdentity) {
  Ptm dep = Ptm::Zero();
  dep(0, 0) = 1.0;
  EXPECT_NEAR(process_fidelity(dep, ptm_of_unitary(Mat::Identity(4, 4))), 0.25, 1e-15);
  EXPECT_THROW(process_fidelity(RMat(RMat::Zero(4, 4)), RMat(RMat::Zero(16, 16))), Error);
  EXPECT_THROW(ptm_of_unitary(Mat(2.0 * Mat::Identity(4, 4))), Error);
}

TEST(Ptm, ChoiRoundTripAndSuperoperatorAgreement) {
  std::mt19937_64 rng(16);
  const GateChannel g = testing::random_channel(3, rng);
  const Ptm r = ptm_of_channel(g);
  EXPECT_LT((ptm_of_choi(choi_of_ptm(r)) - r).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(max_abs(superop_of_ptm(r) - g.superop), 1e-12);
  EXPECT_GT(choi_min_eigenvalue(r), -1e-12);
}

GateChannel depolarizing(double p) {
  const Mat id = Mat::Identity(4, 4);
  Mat s = (1 - p) * unitary_superop(id);
  for (int i = 0; i < 4; ++i) {
    for (int a = 0; a < 4; ++a) s(i + 4 * i, a + 4 * a) += 0.25 * p;
  }
  return GateChannel::from_superop(s, 0);
}

TEST(PtmMle, NoiselessRoundTrips) {
  const ReadoutModel m;
  const Ptm cnot = ptm_of_unitary(cnot_matrix());
  const PtmFit f = reconstruct_ptm_mle(run_qpt(GateChannel::from_unitary(cnot_matrix(), 0), m), m);
  EXPECT_GE(process_fidelity(f.r, cnot), 0.999);
  const Mat z = on_q1(phase_gate(0.5 * kPi));
  const PtmFit fz = reconstruct_ptm_mle(run_qpt(GateChannel::from_unitary(z, 0), m), m);
  EXPECT_GE(process_fidelity(fz.r, ptm_of_unitary(z)), 0.999);
}

TEST(PtmMle, DepolarizingStrengthRecovered) {
  const ReadoutModel m;
  const double p = 0.3;
  const PtmFit f = reconstruct_ptm_mle(run_qpt(depolarizing(p), m), m);
  Ptm expected = (1 - p) * Ptm::Identity();
  expected(0, 0) = 1.0;
  EXPECT_LT((f.r - expected).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(PtmMle, TraceAndCompletePositivityOnRandomRecords) {
  std::mt19937_64 rng(17);
  ReadoutModel noisy;
  noisy.shot_count = 300;
  std::normal_distribution<double> kick(0.0, 0.5);
  for (int trial = 0; trial < 6; ++trial) {
    MeasurementRecord rec = run_qpt(testing::random_channel(1 + trial % 4, rng), noisy, &rng);
    if (trial % 3 == 2) {
      for (double& v : rec.values) v += kick(rng);
    }
    const PtmFit f = reconstruct_ptm_mle(rec, noisy);
    EXPECT_LT((f.r.row(0) - Ptm::Identity().row(0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(choi_min_eigenvalue(f.r), -1e-6);
    EXPECT_LE(f.r.cwiseAbs().maxCoeff(), 1 + 1e-6);
  }
}

}  // namespace
}  // namespace mapcnot
