// Copyright 2026 The shadowsim authors
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

#ifndef SHADOWSIM_SAMPLING_HPP_
#define SHADOWSIM_SAMPLING_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "shadowsim/channels.hpp"

namespace shadowsim {

struct SamplingPlan {
  QuasiDecomposition decomposition;
  Matrix observable;  // Hermitian with operator norm <= 1, on (R (x)) out.
  Matrix state;       // density operator on (R (x)) in.
  long rounds = 0;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct RoundRecord {
  int sign = 1;
  double outcome = 0.0;
};

struct SampleEstimate {
  double xi = 0.0;
  long rounds = 0;
  double gamma = 0.0;
  std::vector<RoundRecord> trace;  // filled only when requested
};

// Round budget guaranteeing |xi - E[xi]| <= eps with confidence 1 - delta:
// ceil(2 gamma^2 ln(2/delta) / eps^2).
inline long hoeffding_rounds(double gamma, double eps, double delta) {
  if (!(gamma > 0.0) || !(eps > 0.0) || !(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("hoeffding_rounds: domain violation");
  return static_cast<long>(
      std::ceil(2.0 * gamma * gamma * std::log(2.0 / delta) / (eps * eps)));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based uniform draw: independent of evaluation order across rounds.
inline double uniform01(std::uint64_t seed, std::uint64_t round,
                        std::uint64_t draw) {
  std::uint64_t z = splitmix64(splitmix64(seed ^ (round * 0xD1342543DE82EF95ULL)) ^
                               (draw * 0x2545F4914F6CDD1DULL));
  return (z >> 11) * 0x1.0p-53;
}

// Extends a branch Choi by an identity on the reference system implied by
// the state dimension.
inline ChoiOperator extend_branch(const ChoiOperator& branch, int state_dim) {
  if (state_dim == branch.in_dim) return branch;
  if (state_dim % branch.in_dim != 0)
    throw std::invalid_argument("sampling: state dim incompatible with branch");
  return tensor_channels(identity_choi(state_dim / branch.in_dim), branch);
}

inline void validate_plan(const SamplingPlan& plan) {
  if (plan.rounds < 1)
    throw std::invalid_argument("sampling: rounds must be >= 1");
  const Matrix& rho = plan.state;
  if (rho.rows() != rho.cols() || plan.observable.rows() != plan.observable.cols())
    throw std::invalid_argument("sampling: state and observable must be square");
  if (!is_hermitian(plan.observable, 1e-9))
    throw std::invalid_argument("sampling: observable must be Hermitian");
  EigResult oe = eig_hermitian(plan.observable);
  if (oe.eigenvalues.cwiseAbs().maxCoeff() > 1.0 + 1e-9)
    throw std::invalid_argument("sampling: observable norm exceeds 1");
  if (!is_psd(rho, 1e-9) || std::abs(rho.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("sampling: state must be a density operator");
}

}  // namespace detail

// Splits the virtual channel realized by a code acting on source n into its
// two CPTP branches with weights (p+, p-), ready for Monte Carlo sampling.
inline QuasiDecomposition branch_decomposition(const SuperchannelChoi& code,
                                               const ChoiOperator& n) {
  auto branch = [&](const Matrix& j, double p) {
    SuperchannelChoi part;
    part.dim_a_in = code.dim_a_in;
    part.dim_b = code.dim_b;
    part.dim_a = code.dim_a;
    part.dim_b_out = code.dim_b_out;
    part.j_plus = j;
    part.j_minus = Matrix::Zero(j.rows(), j.cols());
    part.p_plus = p;
    part.p_minus = 0.0;
    if (p < 1e-12) {
      // Degenerate branch: never sampled; use a maximally mixing stand-in.
      const int din = code.dim_a_in, dout = code.dim_b_out;
      return ChoiOperator(Matrix(identity(din * dout) / dout), din, dout);
    }
    VirtualChannel v = compose_superchannel(part, n);
    return ChoiOperator(Matrix(v.choi.matrix / p), v.choi.in_dim,
                        v.choi.out_dim);
  };
  QuasiDecomposition q;
  q.p_plus = code.p_plus;
  q.p_minus = code.p_minus;
  q.choi_plus = branch(code.j_plus, code.p_plus);
  q.choi_minus = branch(code.j_minus, code.p_minus);
  return q;
}

// Exact expectation tr[(p+ C+(rho) - p- C-(rho)) O] the sampler estimates.
inline double true_expectation(const QuasiDecomposition& decomposition,
                               const Matrix& observable, const Matrix& state) {
  const int sd = static_cast<int>(state.rows());
  ChoiOperator cp = detail::extend_branch(decomposition.choi_plus, sd);
  Matrix out = decomposition.p_plus * apply_channel(cp, state);
  if (decomposition.p_minus > 0.0) {
    ChoiOperator cm = detail::extend_branch(decomposition.choi_minus, sd);
    out -= decomposition.p_minus * apply_channel(cm, state);
  }
  if (out.rows() != observable.rows())
    throw std::invalid_argument("true_expectation: dimension mismatch");
  return (observable * out).trace().real();
}

// Monte Carlo protocol: per round, sample a signed branch with probability
// p(+-)/gamma, push the state through it, sample an eigenvalue of the
// observable with Born probabilities, and average gamma * sign * outcome.
inline SampleEstimate run(const SamplingPlan& plan) {
  detail::validate_plan(plan);
  const QuasiDecomposition& q = plan.decomposition;
  const double gamma = q.sampling_cost();
  const int sd = static_cast<int>(plan.state.rows());
  ChoiOperator cp = detail::extend_branch(q.choi_plus, sd);
  ChoiOperator cm_store = q.p_minus > 0.0
                              ? detail::extend_branch(q.choi_minus, sd)
                              : cp;
  Matrix sigma_plus = apply_channel(cp, plan.state);
  Matrix sigma_minus = q.p_minus > 0.0 ? apply_channel(cm_store, plan.state)
                                       : sigma_plus;
  if (sigma_plus.rows() != plan.observable.rows())
    throw std::invalid_argument("run: observable dimension mismatch");

  EigResult obs = eig_hermitian(plan.observable);
  const int n_out = static_cast<int>(obs.eigenvalues.size());
  // Born probabilities of observable eigenvectors for both branch outputs.
  auto born = [&](const Matrix& sigma) {
    std::vector<double> probs(static_cast<size_t>(n_out));
    double total = 0.0;
    for (int k = 0; k < n_out; ++k) {
      Eigen::VectorXcd v = obs.eigenvectors.col(k);
      double pr = std::max(0.0, (v.adjoint() * sigma * v)(0, 0).real());
      probs[static_cast<size_t>(k)] = pr;
      total += pr;
    }
    for (double& pr : probs) pr /= total;
    return probs;
  };
  std::vector<double> born_plus = born(sigma_plus);
  std::vector<double> born_minus =
      q.p_minus > 0.0 ? born(sigma_minus) : born_plus;

  SampleEstimate est;
  est.rounds = plan.rounds;
  est.gamma = gamma;
  if (plan.record_trace) est.trace.reserve(static_cast<size_t>(plan.rounds));
  const double prob_plus = q.p_plus / gamma;
  double acc = 0.0;
  for (long m = 0; m < plan.rounds; ++m) {
    const auto round = static_cast<std::uint64_t>(m);
    const bool plus =
        detail::uniform01(plan.seed, round, 0) < prob_plus;
    const std::vector<double>& probs = plus ? born_plus : born_minus;
    double u = detail::uniform01(plan.seed, round, 1);
    int pick = n_out - 1;
    double cdf = 0.0;
    for (int k = 0; k < n_out; ++k) {
      cdf += probs[static_cast<size_t>(k)];
      if (u < cdf) {
        pick = k;
        break;
      }
    }
    const double outcome = obs.eigenvalues(pick);
    const int sign = plus ? 1 : -1;
    acc += sign * outcome;
    if (plan.record_trace)
      est.trace.push_back(RoundRecord{sign, outcome});
  }
  est.xi = gamma * acc / static_cast<double>(plan.rounds);
  return est;
}

}  // namespace shadowsim

#endif  // SHADOWSIM_SAMPLING_HPP_
