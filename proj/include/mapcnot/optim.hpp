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

#ifndef MAPCNOT_OPTIM_HPP_
#define MAPCNOT_OPTIM_HPP_

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <deque>
#include <functional>

#include "mapcnot/linalg.hpp"

namespace mapcnot {

using ResidualFn = std::function<void(const RVec& x, RVec& r)>;

namespace detail {

struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = RVec;
  using ValueType = RVec;
  using JacobianType = RMat;

  ResidualFn fn;
  int n_in, n_out;
  int inputs() const { return n_in; }
  int values() const { return n_out; }
  int operator()(const RVec& x, RVec& r) const {
    r.resize(n_out);
    fn(x, r);
    return 0;
  }
};

}  // namespace detail

struct LeastSquaresResult {
  RVec x;
  double cost = 0;  // sum of squared residuals
  bool converged = false;
};

// Levenberg-Marquardt with forward-difference Jacobian.
inline LeastSquaresResult least_squares(const ResidualFn& fn, int n_residuals, RVec x0, int max_evals = 4000) {
  detail::ResidualFunctor f{fn, static_cast<int>(x0.size()), n_residuals};
  Eigen::NumericalDiff<detail::ResidualFunctor> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ResidualFunctor>, double> lm(nd);
  lm.parameters.maxfev = max_evals;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  auto status = lm.minimize(x0);
  LeastSquaresResult out;
  out.x = x0;
  RVec r(n_residuals);
  fn(x0, r);
  out.cost = r.squaredNorm();
  out.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
  return out;
}

using ObjectiveFn = std::function<double(const RVec& x, RVec& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
};

struct LbfgsResult {
  RVec x;
  double value = 0;
  double gradient_norm = 0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with backtracking on Armijo or approximate Wolfe conditions.
inline LbfgsResult lbfgs(const ObjectiveFn& f, RVec x, const LbfgsOptions& opt = {}) {
  RVec g(x.size());
  double fx = f(x, g);
  std::deque<RVec> s_hist, y_hist;
  std::deque<double> rho_hist;
  LbfgsResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (g.norm() < opt.gradient_tolerance) break;
    RVec q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += s_hist[i] * (alpha[i] - beta);
    }
    RVec d = -q;
    double slope = g.dot(d);
    if (slope >= 0) {
      d = -g;
      slope = -g.squaredNorm();
      s_hist.clear(); y_hist.clear(); rho_hist.clear();
    }
    double step = 1.0;
    RVec xn, gn(x.size());
    double fn = 0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * d;
      fn = f(xn, gn);
      // Approximate Wolfe test: once f is flat to rounding, judge the step by its slope.
      const bool flat = fn <= fx + 1e-12 * std::abs(fx) && std::abs(gn.dot(d)) <= 0.9 * std::abs(slope);
      if (std::isfinite(fn) && (fn <= fx + 1e-4 * step * slope || flat)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    RVec s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      s_hist.push_back(s); y_hist.push_back(y); rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front(); y_hist.pop_front(); rho_hist.pop_front();
      }
    }
    x = xn; g = gn; fx = fn;
  }
  res.x = x;
  res.value = fx;
  res.gradient_norm = g.norm();
  res.iterations = it;
  res.converged = res.gradient_norm < opt.gradient_tolerance;
  return res;
}

}  // namespace mapcnot

#endif  // MAPCNOT_OPTIM_HPP_
