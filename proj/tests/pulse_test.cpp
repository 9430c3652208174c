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

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_support.hpp"

namespace mapcnot {
namespace {

namespace odeint = boost::numeric::odeint;

Mat sigma_minus() { return destroy(2); }

TEST(SechPulse, CyclicInvariants) {
  const SechPulse p = SechPulse::cyclic(400.0, 1.5);
  EXPECT_NEAR(p.rho_bandwidth * 2 * p.sigma, kPi, 1e-12);
  EXPECT_DOUBLE_EQ(p.total_length, 8 * p.sigma);
  EXPECT_DOUBLE_EQ(p.amplitude, 2 * p.rho_bandwidth);
  EXPECT_NEAR(to_mhz(p.rho_bandwidth), 5.0, 1e-12);
}

TEST(SechPulse, PeakAndEdgeValues) {
  const SechPulse p = SechPulse::cyclic(400.0, 0.0);
  EXPECT_DOUBLE_EQ(sech_envelope(p, 200.0), p.amplitude);
  EXPECT_NEAR(sech_envelope(p, 0.0) / p.amplitude, 1.0 / std::cosh(2 * kPi), 1e-15);
  EXPECT_NEAR(sech_envelope(p, 0.0) / p.amplitude, 0.00373, 1e-5);
  EXPECT_DOUBLE_EQ(sech_envelope(p, 0.0), sech_envelope(p, 400.0));
}

TEST(SechPulse, AreaMatchesAnalyticIntegral) {
  const SechPulse p = SechPulse::cyclic(300.0, 0.0);
  const int n = 3000;
  const double h = p.total_length / n;
  double area = 0;  // Simpson's rule
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
    area += w * sech_envelope(p, k * h);
  }
  area *= h / 3;
  // Integral of sech over [-X, X] is 4 atan(tanh(X / 2)), X = rho T / 2.
  const double x = 0.5 * p.rho_bandwidth * p.total_length;
  const double exact = p.amplitude / p.rho_bandwidth * 4 * std::atan(std::tanh(0.5 * x));
  EXPECT_NEAR(area / exact, 1.0, 5e-3);
  EXPECT_NEAR(exact, 2 * kPi, 0.03);
}

TEST(SechPulse, OutsideWindowThrows) {
  const SechPulse p = SechPulse::cyclic(400.0, 0.0);
  try {
    sech_envelope(p, 401.0);
    FAIL() << "expected OutOfWindow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfWindow);
  }
}

TEST(StarkTone, CosineRampsAndPlateau) {
  StarkTone s;
  s.duration = 100;
  s.rise_fall = 10;
  EXPECT_NEAR(stark_ramp(s, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(stark_ramp(s, 5.0), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(stark_ramp(s, 50.0), 1.0);
  EXPECT_NEAR(stark_ramp(s, 100.0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(stark_ramp(s, 120.0), 0.0);
}

TEST(NoiseSpec, RatesFollowCoherenceTimes) {
  const NoiseSpec n = NoiseSpec::from_device(DeviceSpec{});
  EXPECT_NEAR(n.gamma1(0), 1e-3 / 21.0, 1e-15);
  EXPECT_NEAR(n.gamma_phi(0), 1e-3 / 5.0 - 0.5e-3 / 21.0, 1e-15);
  for (size_t k = 0; k < 2; ++k) {
    EXPECT_GE(n.gamma1(k), 0.0);
    EXPECT_GE(n.gamma_phi(k), 0.0);
  }
  const NoiseSpec bad{{1.0}, {3.0}};
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_FALSE(NoiseSpec::none().active());
}

TEST(EvolveUnitary, NoDrivesGivesDiagonalPhases) {
  Mat h = Mat::Zero(3, 3);
  h(1, 1) = 0.4;
  h(2, 2) = -1.3;
  const Mat u = evolve_unitary(h, {}, 12.0, 0.5);
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(u(k, k) - std::exp(cd(0, -12.0 * h(k, k).real()))), 1e-12);
  EXPECT_LT(max_abs(u - Mat(u.diagonal().asDiagonal())), 1e-15);
}

TEST(EvolveUnitary, ResonantSquarePiPulseFlipsPopulation) {
  const double omega = mhz(10.0), t = kPi / omega;
  const std::vector<Drive> d{{sigma_minus(), Envelope::square(omega, 0.0, t), 0.0, 0.0, "q"}};
  const Mat u = evolve_unitary(Mat::Zero(2, 2), d, t, t / 40);
  EXPECT_NEAR(std::norm(u(1, 0)), 1.0, 1e-6);
  EXPECT_LT(unitarity_error(u), 1e-8);
}

TEST(EvolveUnitary, RejectsStepThatDoesNotDivideDuration) {
  EXPECT_THROW(evolve_unitary(Mat::Zero(2, 2), {}, 10.0, 0.3), Error);
}

TEST(EvolveUnitary, EqualsOrderedProductOfSteps) {
  const SechPulse p = SechPulse::cyclic(40.0, 2.0);
  const std::vector<Drive> d{{sigma_minus(), Envelope::sech_pulse(p), mhz(2.0), 0.0, "q"}};
  const Mat whole = evolve_unitary(Mat::Zero(2, 2), d, 40.0, 0.5);
  EvolveOptions first, second;
  second.t0 = 20.0;
  const std::vector<Drive> late{{sigma_minus(), Envelope::sech_pulse(p).shifted(20.0), mhz(2.0), 0.0, "q"}};
  const Mat split = evolve_unitary(Mat::Zero(2, 2), late, 20.0, 0.5, second) *
                    evolve_unitary(Mat::Zero(2, 2), d, 20.0, 0.5, first);
  EXPECT_LT(max_abs(whole - split), 1e-13);
}

std::vector<Drive> sech_drive(double length, double delta_mhz) {
  return {{sigma_minus(), Envelope::sech_pulse(SechPulse::cyclic(length, delta_mhz)), mhz(delta_mhz), 0.0, "q"}};
}

TEST(EvolveUnitary, SechPulseIsTransparentOffResonance) {
  const Mat u = evolve_unitary(Mat::Zero(2, 2), sech_drive(400.0, 3.0), 400.0, 0.25);
  EXPECT_GE(std::norm(u(0, 0)), 1.0 - 1e-3);
}

TEST(EvolveUnitary, SechTransparencyAcrossDetuningGrid) {
  for (int k = -5; k <= 5; ++k) {
    const Mat u = evolve_unitary(Mat::Zero(2, 2), sech_drive(400.0, k), 400.0, 0.25);
    EXPECT_LT(std::norm(u(1, 0)), 1e-3) << "Delta=" << k;
  }
}

TEST(EvolveUnitary, StepHalvingCheckPassesAtProductionStep) {
  EvolveOptions o;
  o.verify_step = true;
  EXPECT_NO_THROW(evolve_unitary(Mat::Zero(2, 2), sech_drive(400.0, 2.5), 400.0, 0.125, o));
}

TEST(EvolveUnitary, StepHalvingCheckRejectsCoarseStep) {
  EvolveOptions o;
  o.verify_step = true;
  try {
    evolve_unitary(Mat::Zero(2, 2), sech_drive(400.0, 2.5), 400.0, 20.0, o);
    FAIL() << "expected NonConvergedStep";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonConvergedStep);
  }
}

// Lab-frame Schroedinger equation with a rotating-wave Stark drive, integrated by adaptive Dormand-Prince.
TEST(Frames, CommonFramePropagatorMatchesLabEvolution) {
  const DeviceSpec spec = testing::aligned_device();
  StarkTone tone;
  tone.frequency = alignment_at(spec, spec.flux_offset).epsilon - 0.024;
  tone.amplitude = mhz(28.0);
  tone.duration = 30.0;
  tone.rise_fall = 10.0;
  const StarkFrame f = stark_frame(spec, tone);
  const Mat u_qubit = f.to_qubit(evolve_unitary(f.h, {f.drive}, tone.duration, 0.01), tone.duration);

  const Operator h = build_hamiltonian(spec);
  const QubitFrame qf = qubit_frame(spec);
  const Mat b = embed(destroy(4), h.dims, 1);
  const double ws = ghz(tone.frequency), scale = tone.amplitude / std::sqrt(2.0);
  using State = std::vector<cd>;
  auto rhs = [&](const State& x, State& dx, double t) {
    const Eigen::Map<const Vec> psi(x.data(), 16);
    const cd c = 0.5 * scale * stark_ramp(tone, t) * std::exp(cd(0, -ws * t));
    const Vec hpsi = h.data * psi + c * (b.adjoint() * psi) + std::conj(c) * (b * psi);
    dx.resize(16);
    for (int k = 0; k < 16; ++k) dx[k] = cd(0, -1) * hpsi(k);
  };
  for (auto label : {std::vector<int>{0, 1}, std::vector<int>{1, 1}, std::vector<int>{0, 2}}) {
    const Vec psi0 = basis_ket(h.dims, label);
    State x(psi0.data(), psi0.data() + 16);
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12, 1e-12), rhs, x, 0.0,
                               tone.duration, 1e-3);
    Vec lab = Eigen::Map<Vec>(x.data(), 16);
    const Vec frame = (qf.frame_diag.cast<cd>() * cd(0, tone.duration)).array().exp();
    const Vec expected = frame.asDiagonal() * lab;
    EXPECT_LT((u_qubit * psi0 - expected).cwiseAbs().maxCoeff(), 1e-5);
  }
}

DensityMatrix single(int levels, const Vec& psi) { return DensityMatrix::pure({levels}, psi); }

TEST(Lindblad, AmplitudeDampingFollowsT1) {
  const NoiseSpec n{{21.0}, {0.0}};
  Vec one = Vec::Zero(4);
  one(1) = 1;
  const DensityMatrix out = evolve_lindblad(single(4, one), Operator::identity({4}), {}, n, 1000.0, 1.0);
  EXPECT_NEAR(out.data(1, 1).real(), std::exp(-1.0 / 21.0), 1e-4);
  EXPECT_NEAR(out.data(0, 0).real(), 1 - std::exp(-1.0 / 21.0), 1e-4);
}

TEST(Lindblad, PureDephasingFollowsT2Star) {
  const NoiseSpec n{{0.0}, {5.0}};
  Vec plus = Vec::Zero(4);
  plus(0) = plus(1) = 1;
  const DensityMatrix out = evolve_lindblad(single(4, plus), Operator({4}, Mat::Zero(4, 4)), {}, n, 1070.0, 1.0);
  EXPECT_NEAR(2 * std::abs(out.data(0, 1)), std::exp(-1.07 / 5.0), 1e-4);
  EXPECT_NEAR(std::exp(-1.07 / 5.0), 0.807, 1e-3);
}

struct RandomProblem {
  Mat h;
  std::vector<Drive> drives;
  Mat rho0;
};

RandomProblem random_problem(std::mt19937_64& rng) {
  const std::vector<int> dims{3, 3};
  std::uniform_real_distribution<double> u(-1, 1);
  RandomProblem p;
  p.h = Mat::Zero(9, 9);
  for (int k = 0; k < 9; ++k) p.h(k, k) = mhz(20.0 * u(rng));
  p.h += mhz(2.0) * (embed(destroy(3), dims, 0) * embed(destroy(3), dims, 1).adjoint());
  p.h = 0.5 * (p.h + p.h.adjoint()).eval();
  p.drives.push_back(charge_drive(dims, 0, Envelope::gaussian(mhz(8.0), 30.0, 10.0), mhz(3.0 * u(rng))));
  p.drives.push_back(charge_drive(dims, 1, Envelope::square(mhz(5.0), 10.0, 45.0), mhz(2.0 * u(rng)), u(rng)));
  p.rho0 = testing::random_density(9, rng);
  return p;
}

TEST(Lindblad, ZeroNoiseMatchesUnitaryConjugation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    const RandomProblem p = random_problem(rng);
    const Operator h({3, 3}, p.h);
    const DensityMatrix out = evolve_lindblad(DensityMatrix({3, 3}, p.rho0), h, p.drives, NoiseSpec::none(), 60.0, 0.25);
    const Mat u = evolve_unitary(p.h, p.drives, 60.0, 0.25);
    EXPECT_LT(max_abs(out.data - u * p.rho0 * u.adjoint()), 1e-7);
  }
}

TEST(Lindblad, TraceAndPositivityWithoutRenormalisation) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0.2, 30.0);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomProblem p = random_problem(rng);
    const double t1a = t(rng), t1b = t(rng);
    const NoiseSpec n{{t1a, t1b}, {std::min(t(rng), 2 * t1a), std::min(t(rng), 2 * t1b)}};
    std::vector<Mat> states{p.rho0};
    evolve_lindblad_batch(states, {3, 3}, p.h, p.drives, n, 60.0, 0.25);
    const Mat& r = states[0];
    EXPECT_LT(std::abs(r.trace() - cd(1.0)), 1e-8);
    EXPECT_LT(hermiticity_error(r), 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r + r.adjoint()));
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-7);
  }
}

TEST(Lindblad, SplittingAgreesWithExactLiouvillian) {
  // Two-level system, constant resonant drive and strong noise, so the splitting error is visible.
  const double omega = mhz(5.0), delta = mhz(1.0), g1 = 1e-3 / 0.5, gphi = 1e-3 / 0.3 - 0.5 * g1;
  Mat h(2, 2);
  h << 0, 0.5 * omega, 0.5 * omega, delta;
  const Mat a = sigma_minus(), nop = number_op(2), id = Mat::Identity(2, 2);
  // Column-stacking: vec(A X B) = (B^T (x) A) vec(X).
  Mat l = cd(0, -1) * (kron(id, h) - kron(h.transpose(), id));
  for (const Mat& c : {Mat(std::sqrt(g1) * a), Mat(std::sqrt(2 * gphi) * nop)}) {
    const Mat cdc = c.adjoint() * c;
    l += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
  }
  Mat hs = Mat::Zero(2, 2);
  hs(1, 1) = delta;
  const std::vector<Drive> drive{{a, Envelope::constant(omega), 0.0, 0.0, "q"}};
  const NoiseSpec n{{0.5}, {0.3}};
  const double t = 200.0;
  Vec psi(2);
  psi << 1, 0;
  const Mat rho0 = psi * psi.adjoint();
  const Mat prop = (l * t).exp();
  const Vec v = prop * Eigen::Map<const Vec>(rho0.data(), 4);
  const Mat exact = Eigen::Map<const Mat>(v.data(), 2, 2);
  std::vector<Mat> states{rho0};
  evolve_lindblad_batch(states, {2}, hs, drive, n, t, 0.25);
  EXPECT_LT(max_abs(states[0] - exact), 1e-5);
}

TEST(PulseSequence, TextRoundTrip) {
  PulseSequence seq;
  seq.segments.push_back({"q2", "stark", {{"frequency_ghz", 5.96129}, {"duration_ns", 1071}}});
  seq.segments.push_back({"q1", "sech", {{"detuning_mhz", -5.12}, {"length_ns", 400}}});
  const PulseSequence back = PulseSequence::parse(seq.to_text());
  ASSERT_EQ(back.segments.size(), 2u);
  EXPECT_EQ(back.segments[1].target, "q1");
  EXPECT_EQ(back.segments[0].params.at("frequency_ghz"), 5.96129);
  EXPECT_EQ(back.to_text(), seq.to_text());
  EXPECT_THROW(PulseSequence::parse("segment target=q1 envelope=sech width=abc\n"), Error);
}

}  // namespace
}  // namespace mapcnot
