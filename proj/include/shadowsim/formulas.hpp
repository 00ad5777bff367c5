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

#ifndef SHADOWSIM_FORMULAS_HPP_
#define SHADOWSIM_FORMULAS_HPP_

#include <cmath>

#include "shadowsim/programs.hpp"

namespace shadowsim {

// Zero-error capacity of a single-qubit depolarizing channel under a
// sampling budget gamma: log2 floor sqrt(2 p gamma + p + 1).
inline double depo_capacity_formula(double p, double gamma) {
  check_probability(p);
  if (gamma < 1.0)
    throw std::invalid_argument("depo_capacity_formula: gamma < 1");
  return std::log2(std::floor(std::sqrt(2.0 * p * gamma + p + 1.0)));
}

// Exact cost of shadow-simulating a d'-dimensional identity from a
// d-dimensional one: 2 (d'/d)^2 - 1.
inline double identity_sim_cost_formula(int d, int d_prime) {
  if (d < 2 || d_prime < d)
    throw std::invalid_argument(
        "identity_sim_cost_formula: need d' >= d >= 2");
  const double r = double(d_prime) / d;
  return 2.0 * r * r - 1.0;
}

// Zero-error cost of shadow communication over a d-dimensional system using
// a single-qubit depolarizing channel: (d^2 - 1 - p) / (2 p).
inline double depo_zero_error_cost_formula(double p, int d) {
  check_probability(p);
  if (d < 2) throw std::invalid_argument("depo_zero_error_cost_formula: d < 2");
  if (p == 0.0)
    throw std::invalid_argument(
        "depo_zero_error_cost_formula: undefined at p = 0 (infeasible)");
  return (double(d) * d - 1.0 - p) / (2.0 * p);
}

enum class CertificateId {
  kDepoZeroErrorCostPrimal,
  kDepoZeroErrorCostDual,
  kIdentityFormationPrimal,
  kIdentityFormationDual,
};

struct CertificateParams {
  double p = 0.0;  // depolarizing certificates
  int d = 0;       // communication dimension / source identity dimension
  int d_prime = 0; // identity-formation target dimension
};

// A feasible point of a primal or dual program, transcribed symbolically.
// check_feasible(program, block_values, tol) must pass, and `objective`
// bounds the corresponding SDP optimum (upper for primal, lower for dual).
struct CertificatePoint {
  CertificateId id = CertificateId::kDepoZeroErrorCostDual;
  SdpProgram program;
  std::vector<Matrix> block_values;
  double objective = 0.0;
};

namespace detail {

// Dual of the twirl-reduced communication cost program:
// sup lambda - mu s.t. M(+-) >= 0, M(+-) + d^2 I_A (x) N(+-) >= +-lambda
// (J^n)^T, tr_B M(+-) = (1 - tr N(+-) +- mu) I_A.
struct CommCostDual {
  SdpProgram prog;
  int mp = -1, mm = -1, sp = -1, sm = -1;
  int np = -1, nm = -1, lambda = -1, mu = -1;
};

inline CommCostDual build_comm_cost_dual(const ChoiOperator& n, int d) {
  CommCostDual dual;
  SdpProgram& p = dual.prog;
  const int da = n.in_dim, db = n.out_dim;
  const int ts = da * db;
  p.sense = Sense::kMax;
  dual.mp = p.add_block("m_plus", ts);
  dual.mm = p.add_block("m_minus", ts);
  dual.sp = p.add_block("s_plus", ts);
  dual.sm = p.add_block("s_minus", ts);
  dual.np = p.add_block("n_plus", db, Cone::kFreeHermitian);
  dual.nm = p.add_block("n_minus", db, Cone::kFreeHermitian);
  dual.lambda = p.add_block("lambda", 1, Cone::kFreeHermitian);
  dual.mu = p.add_block("mu", 1, Cone::kFreeHermitian);
  const Matrix jt = n.matrix.transpose();

  auto add_sign = [&](int mblk, int nblk, int sblk, double sign) {
    // M + d^2 I (x) N - sign lambda (J^n)^T - S = 0.
    add_matrix_equality(
        p, ts,
        [&](int i, int j) {
          Kernels k;
          kernel_for(k, p, mblk)(i, j) += 1.0;
          kernel_for(k, p, sblk)(i, j) -= 1.0;
          if (i / db == j / db)
            kernel_for(k, p, nblk)(i % db, j % db) += double(d) * d;
          kernel_for(k, p, dual.lambda)(0, 0) -= sign * jt(i, j);
          return k;
        },
        Matrix::Zero(ts, ts));
    // tr_B M + tr[N] I - sign mu I = I.
    add_matrix_equality(
        p, da,
        [&](int a, int a2) {
          Kernels k;
          Matrix& km = kernel_for(k, p, mblk);
          for (int b = 0; b < db; ++b) km(a * db + b, a2 * db + b) += 1.0;
          if (a == a2) {
            kernel_for(k, p, nblk).diagonal().array() += 1.0;
            kernel_for(k, p, dual.mu)(0, 0) -= sign;
          }
          return k;
        },
        identity(da));
  };
  add_sign(dual.mp, dual.np, dual.sp, 1.0);
  add_sign(dual.mm, dual.nm, dual.sm, -1.0);
  p.add_objective_entry(dual.lambda, 0, 0, 1.0);
  p.add_objective_entry(dual.mu, 0, 0, -1.0);
  return dual;
}

// Dual of the formation cost program for target m:
// sup tr[M J^m] - lambda s.t. M >= 0, N >= 0, M + N + K (x) I >= 0,
// d^2 tr_A' M = (1 + lambda) I_B', d^2 tr_A' N = (1 - lambda - tr K) I_B'.
struct FormationCostDual {
  SdpProgram prog;
  int m = -1, n = -1, s = -1, k = -1, lambda = -1;
};

inline FormationCostDual build_formation_cost_dual(int d,
                                                   const ChoiOperator& tgt) {
  FormationCostDual dual;
  SdpProgram& p = dual.prog;
  const int dap = tgt.in_dim, dbp = tgt.out_dim;
  const int ms = dap * dbp;
  p.sense = Sense::kMax;
  dual.m = p.add_block("m", ms);
  dual.n = p.add_block("n", ms);
  dual.s = p.add_block("shifted_sum", ms);
  dual.k = p.add_block("k", dap, Cone::kFreeHermitian);
  dual.lambda = p.add_block("lambda", 1, Cone::kFreeHermitian);

  // M + N + K (x) I - S = 0.
  add_matrix_equality(
      p, ms,
      [&](int i, int j) {
        Kernels kk;
        kernel_for(kk, p, dual.m)(i, j) += 1.0;
        kernel_for(kk, p, dual.n)(i, j) += 1.0;
        kernel_for(kk, p, dual.s)(i, j) -= 1.0;
        if (i % dbp == j % dbp)
          kernel_for(kk, p, dual.k)(i / dbp, j / dbp) += 1.0;
        return kk;
      },
      Matrix::Zero(ms, ms));
  // d^2 tr_A' M - lambda I = I.
  add_matrix_equality(
      p, dbp,
      [&](int b, int b2) {
        Kernels kk;
        Matrix& km = kernel_for(kk, p, dual.m);
        for (int a = 0; a < dap; ++a)
          km(a * dbp + b, a * dbp + b2) += double(d) * d;
        if (b == b2) kernel_for(kk, p, dual.lambda)(0, 0) -= 1.0;
        return kk;
      },
      identity(dbp));
  // d^2 tr_A' N + lambda I + tr[K] I = I.
  add_matrix_equality(
      p, dbp,
      [&](int b, int b2) {
        Kernels kk;
        Matrix& kn = kernel_for(kk, p, dual.n);
        for (int a = 0; a < dap; ++a)
          kn(a * dbp + b, a * dbp + b2) += double(d) * d;
        if (b == b2) {
          kernel_for(kk, p, dual.lambda)(0, 0) += 1.0;
          kernel_for(kk, p, dual.k).diagonal().array() += 1.0;
        }
        return kk;
      },
      identity(dbp));
  p.add_objective_coeff(dual.m, tgt.matrix);
  p.add_objective_entry(dual.lambda, 0, 0, -1.0);
  return dual;
}

inline Matrix scalar1(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace detail

inline CertificatePoint certificate(CertificateId id,
                                    const CertificateParams& params) {
  CertificatePoint cert;
  cert.id = id;
  switch (id) {
    case CertificateId::kDepoZeroErrorCostPrimal: {
      const double p = params.p;
      const int d = params.d;
      if (p <= 0.0 || p > 1.0 || d < 2)
        throw std::invalid_argument("certificate: depo params out of domain");
      const double d2 = double(d) * d;
      ChoiOperator n = depolarizing_choi(p);
      detail::CommProgram cp =
          detail::build_comm(n, d, detail::CommMode::kZeroErrorCost, 0.0);
      const Matrix g = gamma_operator(2);
      Matrix t_plus = (d2 - 1.0 + p) / (4.0 * p) * g;
      Matrix t_minus = (d2 - 1.0 - 3.0 * p) / (6.0 * p) * identity(4) -
                       (d2 - 1.0 - 3.0 * p) / (12.0 * p) * g;
      Matrix v_plus = d2 * (d2 - 1.0 + p) / (8.0 * p) * identity(2);
      Matrix v_minus = d2 * (d2 - 1.0 - 3.0 * p) / (8.0 * p) * identity(2);
      cert.block_values.assign(cp.prog.blocks.size(), Matrix());
      cert.block_values[static_cast<size_t>(cp.tp)] = t_plus;
      cert.block_values[static_cast<size_t>(cp.tm)] = t_minus;
      cert.block_values[static_cast<size_t>(cp.vp)] = v_plus;
      cert.block_values[static_cast<size_t>(cp.vm)] = v_minus;
      cert.block_values[static_cast<size_t>(cp.up)] =
          tensor(v_plus, identity(2)) - t_plus;
      cert.block_values[static_cast<size_t>(cp.um)] =
          tensor(v_minus, identity(2)) - t_minus;
      cert.objective = (v_plus.trace().real() + v_minus.trace().real()) / d2;
      cert.program = std::move(cp.prog);
      break;
    }
    case CertificateId::kDepoZeroErrorCostDual: {
      const double p = params.p;
      const int d = params.d;
      if (p <= 0.0 || p > 1.0 || d < 2)
        throw std::invalid_argument("certificate: depo params out of domain");
      const double d2 = double(d) * d;
      ChoiOperator n = depolarizing_choi(p);
      detail::CommCostDual dual = detail::build_comm_cost_dual(n, d);
      const double lambda = d2 / (2.0 * p);
      const double mu = (1.0 + p) / (2.0 * p);
      Matrix n_plus = (1.0 + 3.0 * p) / (4.0 * p) * identity(2);
      Matrix n_minus = (p - 1.0) / (4.0 * p) * identity(2);
      Matrix jt = n.matrix.transpose();
      cert.block_values.assign(dual.prog.blocks.size(), Matrix());
      cert.block_values[static_cast<size_t>(dual.mp)] = Matrix::Zero(4, 4);
      cert.block_values[static_cast<size_t>(dual.mm)] = Matrix::Zero(4, 4);
      cert.block_values[static_cast<size_t>(dual.sp)] =
          d2 * tensor(identity(2), n_plus) - lambda * jt;
      cert.block_values[static_cast<size_t>(dual.sm)] =
          d2 * tensor(identity(2), n_minus) + lambda * jt;
      cert.block_values[static_cast<size_t>(dual.np)] = n_plus;
      cert.block_values[static_cast<size_t>(dual.nm)] = n_minus;
      cert.block_values[static_cast<size_t>(dual.lambda)] =
          detail::scalar1(lambda);
      cert.block_values[static_cast<size_t>(dual.mu)] = detail::scalar1(mu);
      cert.objective = lambda - mu;
      cert.program = std::move(dual.prog);
      break;
    }
    case CertificateId::kIdentityFormationPrimal: {
      const int d = params.d, dp = params.d_prime;
      if (d < 2 || dp < d)
        throw std::invalid_argument(
            "certificate: identity params out of domain");
      const double d2 = double(d) * d, dp2 = double(dp) * dp;
      ChoiOperator tgt = identity_choi(dp);
      detail::FormationCostProgram fc = detail::build_formation_cost(d, tgt);
      const Matrix g = gamma_operator(dp);
      Matrix v_plus = double(dp) * identity(dp);
      Matrix v_minus = (dp2 - d2) / dp * identity(dp);
      Matrix r = double(dp) * (dp2 - d2) / ((dp2 - 1.0) * d2) *
                     identity(dp * dp) -
                 (dp2 - d2) / ((dp2 - 1.0) * d2) * g;
      cert.block_values.assign(fc.prog.blocks.size(), Matrix());
      cert.block_values[static_cast<size_t>(fc.vp)] = v_plus;
      cert.block_values[static_cast<size_t>(fc.vm)] = v_minus;
      cert.block_values[static_cast<size_t>(fc.r)] = r;
      cert.block_values[static_cast<size_t>(fc.s1)] =
          tensor(identity(dp), v_plus) - tgt.matrix - r;
      cert.block_values[static_cast<size_t>(fc.s2)] =
          tensor(identity(dp), v_minus) - r;
      cert.objective = (v_plus.trace().real() + v_minus.trace().real()) / d2;
      cert.program = std::move(fc.prog);
      break;
    }
    case CertificateId::kIdentityFormationDual: {
      const int d = params.d, dp = params.d_prime;
      if (d < 2 || dp < d)
        throw std::invalid_argument(
            "certificate: identity params out of domain");
      const double d2 = double(d) * d;
      ChoiOperator tgt = identity_choi(dp);
      detail::FormationCostDual dual = detail::build_formation_cost_dual(d, tgt);
      Matrix m = 2.0 / d2 * gamma_operator(dp);
      cert.block_values.assign(dual.prog.blocks.size(), Matrix());
      cert.block_values[static_cast<size_t>(dual.m)] = m;
      cert.block_values[static_cast<size_t>(dual.n)] =
          Matrix::Zero(dp * dp, dp * dp);
      cert.block_values[static_cast<size_t>(dual.s)] = m;
      cert.block_values[static_cast<size_t>(dual.k)] = Matrix::Zero(dp, dp);
      cert.block_values[static_cast<size_t>(dual.lambda)] =
          detail::scalar1(1.0);
      cert.objective =
          (m * tgt.matrix).trace().real() - 1.0;
      cert.program = std::move(dual.prog);
      break;
    }
  }
  return cert;
}

}  // namespace shadowsim

#endif  // SHADOWSIM_FORMULAS_HPP_
