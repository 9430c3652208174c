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

#include "test_support.hpp"

namespace mapcnot {
namespace {

using testing::aligned_device;
using testing::default_calibration;

const GateChannel& ideal_cnot() {
  static const GateChannel g = GateChannel::from_unitary(cnot_matrix(), 1470.0);
  return g;
}

const GateChannel& noisy_cnot() {
  static const GateChannel g = compose_cnot(aligned_device(), default_calibration().cal, true, true);
  return g;
}

TEST(OracleIndex, RejectsOutOfRange) {
  for (int i : {-1, 4, 17}) {
    try {
      OracleIndex o(i);
      FAIL() << i;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBadIndex);
    }
  }
  EXPECT_EQ(OracleIndex(1).kind(), OracleKind::kConstant);
  EXPECT_EQ(OracleIndex(2).kind(), OracleKind::kBalanced);
}

TEST(Encoding, IdealUnitariesImplementTheFourFunctions) {
  // U|x, y> = |x, y xor f(x)> for f = 0, 1, x, not x.
  const int f[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  for (int i = 0; i < 4; ++i) {
    const GateChannel g = encoding_unitary(OracleIndex(i), ideal_cnot());
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const Mat in = testing::projector(basis_ket({2, 2}, {x, y}));
        const Mat expect = testing::projector(basis_ket({2, 2}, {x, y ^ f[i][x]}));
        EXPECT_LT((g.apply(in) - expect).norm(), 1e-12) << i << x << y;
      }
    }
  }
}

TEST(DeutschJozsa, IdealCnotClassifiesAllOracles) {
  for (int i = 0; i < 4; ++i) {
    const DjResult r = run_dj(OracleIndex(i), ideal_cnot());
    EXPECT_TRUE(r.correct) << i;
    EXPECT_GE(r.ideal_fidelity, 1 - 1e-9);
    EXPECT_NEAR(r.p_query_zero, i < 2 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(DeutschJozsa, ConstantOraclesIgnoreTheCnot) {
  std::mt19937_64 rng(3);
  const GateChannel junk = GateChannel::from_unitary(testing::random_unitary(4, rng), 0.0);
  for (int i = 0; i < 2; ++i) {
    const DjResult a = run_dj(OracleIndex(i), ideal_cnot());
    const DjResult b = run_dj(OracleIndex(i), junk);
    EXPECT_LT((a.rho.data - b.rho.data).norm(), 1e-14);
  }
}

TEST(DeutschJozsa, NoisySimulatedCnotStillClassifies) {
  double worst_constant = 1, best_balanced = 0;
  for (int i = 0; i < 4; ++i) {
    const DjResult r = run_dj(OracleIndex(i), noisy_cnot());
    EXPECT_TRUE(r.correct) << i;
    if (i < 2) worst_constant = std::min(worst_constant, r.ideal_fidelity);
    else best_balanced = std::max(best_balanced, r.ideal_fidelity);
  }
  EXPECT_LT(best_balanced, worst_constant);
}

}  // namespace
}  // namespace mapcnot
