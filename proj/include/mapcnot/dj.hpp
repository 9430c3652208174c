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

#ifndef MAPCNOT_DJ_HPP_
#define MAPCNOT_DJ_HPP_

#include "mapcnot/gates.hpp"
#include "mapcnot/tomography.hpp"

namespace mapcnot {

enum class OracleKind { kConstant, kBalanced };

struct OracleIndex {
  int index = 0;
  explicit OracleIndex(int i) : index(i) {
    if (i < 0 || i > 3) fail(ErrorCode::kBadIndex, "oracle index must be in 0..3");
  }
  OracleKind kind() const { return index < 2 ? OracleKind::kConstant : OracleKind::kBalanced; }
};

// U0 = I, U1 = I (x) X_pi, U2 = cNOT, U3 = (Y_pi (x) I) cNOT (Y_-pi (x) I).
inline GateChannel encoding_unitary(OracleIndex i, const GateChannel& cnot) {
  switch (i.index) {
    case 0: return GateChannel::from_unitary(Mat::Identity(4, 4), 0.0);
    case 1: return GateChannel::from_unitary(on_q2(rx(kPi)), 0.0);
    case 2: return cnot;
    default: {
      const GateChannel pre = GateChannel::from_unitary(on_q1(ry(-kPi)), 0.0);
      const GateChannel post = GateChannel::from_unitary(on_q1(ry(kPi)), 0.0);
      return compose(compose(pre, cnot), post);
    }
  }
}

struct DjResult {
  int oracle = 0;
  DensityMatrix rho;
  double p_query_zero = 0;    // P(Q1 = 0)
  bool classified_constant = false;
  bool correct = false;
  double ideal_fidelity = 0;  // Tr[rho_ideal rho]
};

// Y90 on Q1 and Y-90 on Q2, oracle, Y-90 on Q1; Q1 reads 0 for constant functions.
inline DjResult run_dj(OracleIndex i, const GateChannel& cnot) {
  const Mat pre = kron(ry(0.5 * kPi), ry(-0.5 * kPi));
  const Mat post = on_q1(ry(-0.5 * kPi));
  auto circuit = [&](const GateChannel& oracle) {
    Mat rho = pre * ground_state_4() * pre.adjoint();
    rho = oracle.apply(rho);
    rho = post * rho * post.adjoint();
    return Mat(0.5 * (rho + rho.adjoint()));
  };
  const Mat out = circuit(encoding_unitary(i, cnot));
  const Mat ideal = circuit(encoding_unitary(i, GateChannel::from_unitary(cnot_matrix(), 0.0)));
  DjResult r;
  r.oracle = i.index;
  r.rho = DensityMatrix({2, 2}, out);
  r.p_query_zero = out(0, 0).real() + out(1, 1).real();
  r.classified_constant = r.p_query_zero > 0.5;
  r.correct = r.classified_constant == (i.kind() == OracleKind::kConstant);
  r.ideal_fidelity = state_fidelity(DensityMatrix({2, 2}, ideal), r.rho);
  return r;
}

}  // namespace mapcnot

#endif  // MAPCNOT_DJ_HPP_
