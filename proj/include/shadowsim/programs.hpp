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

#ifndef SHADOWSIM_PROGRAMS_HPP_
#define SHADOWSIM_PROGRAMS_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "shadowsim/channels.hpp"
#include "shadowsim/sdp_solver.hpp"

namespace shadowsim {

// Noise added to / subtracted from tr V before floor / ceil extraction of the
// integer channel dimension.
inline constexpr double kBoundaryTol = 1e-6;
// |sqrt(tr V) - round(sqrt(tr V))| below this flags a near-integer optimum.
inline constexpr double kBoundaryFlagTol = 1e-4;

struct TaskResult {
  double value = 0.0;
  SdpSolution solution;
  std::optional<SuperchannelChoi> realized_code;
  // Continuous SDP optimum (tr V) behind a floored / ceiled value.
  double surrogate = 0.0;
  bool boundary_flag = false;
};

namespace detail {

// A complex-valued linear functional on the program's blocks, stored as
// kernels: f(X) = sum_b sum_{r,c} K_b(r,c) X_b(r,c).
using Kernels = std::map<int, Matrix>;

inline Matrix& kernel_for(Kernels& k, const SdpProgram& p, int block) {
  auto it = k.find(block);
  if (it == k.end()) {
    const int n = p.blocks[static_cast<size_t>(block)].side;
    it = k.emplace(block, Matrix::Zero(n, n)).first;
  }
  return it->second;
}

// f(X) = rhs with f real-valued on Hermitian inputs; the Hermitian
// coefficient matrix of block b is K_b^T.
inline void add_kernel_equality(SdpProgram& p, const Kernels& k, double rhs) {
  int eq = p.add_equality(rhs);
  for (const auto& [b, km] : k) {
    if (km.cwiseAbs().maxCoeff() == 0.0) continue;
    p.add_coeff(eq, b, km.transpose());
  }
}

// Hermitian matrix equality L(X) = rhs of side `side`; entry(i, j) yields the
// kernels of the complex functional X -> [L(X)](i, j). Emits one real
// equality per diagonal entry and two per off-diagonal pair.
template <typename F>
inline void add_matrix_equality(SdpProgram& p, int side, F entry,
                                const Matrix& rhs) {
  for (int i = 0; i < side; ++i) {
    for (int j = i; j < side; ++j) {
      Kernels k = entry(i, j);
      Kernels re, im;
      for (const auto& [b, km] : k) {
        re[b] = (km + km.adjoint()) / 2.0;
        if (i != j) im[b] = (km - km.adjoint()) / Complex(0.0, 2.0);
      }
      add_kernel_equality(p, re, rhs(i, j).real());
      if (i != j) add_kernel_equality(p, im, rhs(i, j).imag());
    }
  }
}

enum class GeneralMode { kMinError, kMinCost, kQuantum };

struct GeneralProgram {
  SdpProgram prog;
  int jp = -1, jm = -1, z = -1, g = -1, sl = -1;
  int eps = -1, pp = -1, pm = -1, bs = -1;
  int da = 0, db = 0, dap = 0, dbp = 0;
};

// Shadow simulation of target m from source n under no-signaling codes.
// Code variables live on (A', B, A, B') with A: source input, B: source
// output, A': target input, B': target output.
inline GeneralProgram build_general(const ChoiOperator& n,
                                    const ChoiOperator& m, GeneralMode mode,
                                    double bound) {
  GeneralProgram gp;
  SdpProgram& p = gp.prog;
  const int da = n.in_dim, db = n.out_dim, dap = m.in_dim, dbp = m.out_dim;
  gp.da = da;
  gp.db = db;
  gp.dap = dap;
  gp.dbp = dbp;
  const int code_side = dap * db * da * dbp;
  const int dz = dap * dbp;
  const bool quantum = (mode == GeneralMode::kQuantum);

  gp.jp = p.add_block("code_plus", code_side);
  if (!quantum) gp.jm = p.add_block("code_minus", code_side);
  gp.z = p.add_block("z", dz);
  gp.g = p.add_block("z_gap", dz);
  gp.sl = p.add_block("z_trace_slack", dap);
  if (mode != GeneralMode::kMinCost) gp.eps = p.add_block("eps", 1);
  if (!quantum) {
    gp.pp = p.add_block("p_plus", 1);
    gp.pm = p.add_block("p_minus", 1);
  }
  if (mode == GeneralMode::kMinError && !quantum)
    gp.bs = p.add_block("budget_slack", 1);

  auto code_idx = [=](int xp, int b, int a, int yp) {
    return ((xp * db + b) * da + a) * dbp + yp;
  };
  auto z_idx = [=](int xp, int yp) { return xp * dbp + yp; };

  // Z + J_sim - G = J_target over A'B', where J_sim is the simulated map's
  // Choi tr_AB[((J^n)^T (x) I) (J+ - J-)].
  add_matrix_equality(
      p, dz,
      [&](int i, int j) {
        Kernels k;
        kernel_for(k, p, gp.z)(i, j) += 1.0;
        kernel_for(k, p, gp.g)(i, j) -= 1.0;
        const int xp = i / dbp, yp = i % dbp, up = j / dbp, vp = j % dbp;
        Matrix& kp = kernel_for(k, p, gp.jp);
        for (int a3 = 0; a3 < da; ++a3)
          for (int b3 = 0; b3 < db; ++b3)
            for (int a = 0; a < da; ++a)
              for (int b = 0; b < db; ++b) {
                Complex w = n.matrix(a3 * db + b3, a * db + b);
                kp(code_idx(xp, b3, a3, yp), code_idx(up, b, a, vp)) += w;
              }
        if (!quantum) kernel_for(k, p, gp.jm) = -kp;
        return k;
      },
      m.matrix);

  // tr_B' Z + SL = (2 eps + 1 - p+ + p-)/2 * I_A'.
  add_matrix_equality(
      p, dap,
      [&](int xp, int up) {
        Kernels k;
        Matrix& kz = kernel_for(k, p, gp.z);
        for (int yp = 0; yp < dbp; ++yp) kz(z_idx(xp, yp), z_idx(up, yp)) += 1.0;
        kernel_for(k, p, gp.sl)(xp, up) += 1.0;
        if (xp == up) {
          if (gp.eps >= 0) kernel_for(k, p, gp.eps)(0, 0) -= 1.0;
          if (!quantum) {
            kernel_for(k, p, gp.pp)(0, 0) += 0.5;
            kernel_for(k, p, gp.pm)(0, 0) -= 0.5;
          }
        }
        return k;
      },
      [&] {
        double diag = 0.5;
        if (quantum) diag = 0.0;  // p+ = 1, p- = 0 cancel the 1/2
        if (mode == GeneralMode::kMinCost) diag += bound;  // fixed tolerance
        return Matrix(diag * identity(dap));
      }());

  // CPTP parts: tr_{AB'} J(+-) = p(+-) I_{A'B}; quantum mode pins p+ = 1.
  auto add_cptp = [&](int jblk, int pblk, double fixed) {
    add_matrix_equality(
        p, dap * db,
        [&](int i, int j) {
          Kernels k;
          const int xp = i / db, b = i % db, up = j / db, b2 = j % db;
          Matrix& kj = kernel_for(k, p, jblk);
          for (int a = 0; a < da; ++a)
            for (int yp = 0; yp < dbp; ++yp)
              kj(code_idx(xp, b, a, yp), code_idx(up, b2, a, yp)) += 1.0;
          if (pblk >= 0 && i == j) kernel_for(k, p, pblk)(0, 0) -= 1.0;
          return k;
        },
        fixed * identity(dap * db));
  };
  add_cptp(gp.jp, gp.pp, quantum ? 1.0 : 0.0);
  if (!quantum) add_cptp(gp.jm, gp.pm, 0.0);

  // No-signaling from Bob to Alice: tr_B' J = tr_BB' J (x) I_B / d_B,
  // expressed on (A', B, A).
  auto add_ns_b_to_a = [&](int jblk) {
    const int side = dap * db * da;
    add_matrix_equality(
        p, side,
        [&](int i, int j) {
          Kernels k;
          int rem = i;
          const int a = rem % da;
          rem /= da;
          const int b = rem % db;
          const int xp = rem / db;
          rem = j;
          const int a2 = rem % da;
          rem /= da;
          const int b2 = rem % db;
          const int up = rem / db;
          Matrix& kj = kernel_for(k, p, jblk);
          for (int yp = 0; yp < dbp; ++yp)
            kj(code_idx(xp, b, a, yp), code_idx(up, b2, a2, yp)) += 1.0;
          if (b == b2) {
            for (int b3 = 0; b3 < db; ++b3)
              for (int yp = 0; yp < dbp; ++yp)
                kj(code_idx(xp, b3, a, yp), code_idx(up, b3, a2, yp)) -=
                    1.0 / db;
          }
          return k;
        },
        Matrix::Zero(side, side));
  };
  // No-signaling from Alice to Bob: tr_A J = tr_{A'A} J (x) I_{A'} / d_{A'},
  // expressed on (A', B, B').
  auto add_ns_a_to_b = [&](int jblk) {
    const int side = dap * db * dbp;
    add_matrix_equality(
        p, side,
        [&](int i, int j) {
          Kernels k;
          int rem = i;
          const int yp = rem % dbp;
          rem /= dbp;
          const int b = rem % db;
          const int xp = rem / db;
          rem = j;
          const int vp = rem % dbp;
          rem /= dbp;
          const int b2 = rem % db;
          const int up = rem / db;
          Matrix& kj = kernel_for(k, p, jblk);
          for (int a = 0; a < da; ++a)
            kj(code_idx(xp, b, a, yp), code_idx(up, b2, a, vp)) += 1.0;
          if (xp == up) {
            for (int x2 = 0; x2 < dap; ++x2)
              for (int a = 0; a < da; ++a)
                kj(code_idx(x2, b, a, yp), code_idx(x2, b2, a, vp)) -=
                    1.0 / dap;
          }
          return k;
        },
        Matrix::Zero(side, side));
  };
  add_ns_b_to_a(gp.jp);
  add_ns_a_to_b(gp.jp);
  if (!quantum) {
    add_ns_b_to_a(gp.jm);
    add_ns_a_to_b(gp.jm);
  }

  if (mode == GeneralMode::kMinError && !quantum) {
    Kernels k;
    kernel_for(k, p, gp.pp)(0, 0) = 1.0;
    kernel_for(k, p, gp.pm)(0, 0) = 1.0;
    kernel_for(k, p, gp.bs)(0, 0) = 1.0;
    add_kernel_equality(p, k, bound);  // p+ + p- + slack = gamma
  }

  if (mode == GeneralMode::kMinCost) {
    p.add_objective_entry(gp.pp, 0, 0, 1.0);
    p.add_objective_entry(gp.pm, 0, 0, 1.0);
  } else {
    p.add_objective_entry(gp.eps, 0, 0, 1.0);
  }
  return gp;
}

inline SuperchannelChoi extract_general_code(const GeneralProgram& gp,
                                             const SdpSolution& sol) {
  SuperchannelChoi code;
  code.dim_a_in = gp.dap;
  code.dim_b = gp.db;
  code.dim_a = gp.da;
  code.dim_b_out = gp.dbp;
  code.j_plus = sol.block_values[static_cast<size_t>(gp.jp)];
  if (gp.jm >= 0) {
    code.j_minus = sol.block_values[static_cast<size_t>(gp.jm)];
    code.p_plus = sol.block_values[static_cast<size_t>(gp.pp)](0, 0).real();
    code.p_minus = sol.block_values[static_cast<size_t>(gp.pm)](0, 0).real();
  } else {
    code.j_minus = Matrix::Zero(code.j_plus.rows(), code.j_plus.cols());
    code.p_plus = 1.0;
    code.p_minus = 0.0;
  }
  return code;
}

}  // namespace detail

inline TaskResult min_error_ns(const ChoiOperator& n, const ChoiOperator& m,
                               double gamma, const SolverOptions& opts = {}) {
  if (gamma < 0.0) throw std::invalid_argument("min_error_ns: gamma < 0");
  detail::GeneralProgram gp =
      detail::build_general(n, m, detail::GeneralMode::kMinError, gamma);
  TaskResult res;
  res.solution = solve(gp.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    res.realized_code = detail::extract_general_code(gp, res.solution);
  }
  return res;
}

inline TaskResult min_cost_ns(const ChoiOperator& n, const ChoiOperator& m,
                              double eps, const SolverOptions& opts = {}) {
  if (eps < 0.0) throw std::invalid_argument("min_cost_ns: eps < 0");
  detail::GeneralProgram gp =
      detail::build_general(n, m, detail::GeneralMode::kMinCost, eps);
  TaskResult res;
  res.solution = solve(gp.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    res.realized_code = detail::extract_general_code(gp, res.solution);
  }
  return res;
}

inline double min_error_quantum(const ChoiOperator& n, const ChoiOperator& m,
                                const SolverOptions& opts = {}) {
  detail::GeneralProgram gp =
      detail::build_general(n, m, detail::GeneralMode::kQuantum, 0.0);
  SdpSolution sol = solve(gp.prog, opts);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("min_error_quantum: solver failed");
  return sol.primal_value;
}

// Half diamond distance between two trace-scaling Hermitian-preserving maps:
// inf { mu - (p - q)/2 : Z >= 0, Z >= J1 - J2, tr_out Z <= mu I }.
inline double diamond_distance(const VirtualChannel& v1,
                               const VirtualChannel& v2,
                               const SolverOptions& opts = {}) {
  if (v1.choi.in_dim != v2.choi.in_dim || v1.choi.out_dim != v2.choi.out_dim)
    throw std::invalid_argument("diamond_distance: dimension mismatch");
  const int da = v1.choi.in_dim, db = v1.choi.out_dim;
  SdpProgram p;
  int z = p.add_block("z", da * db);
  int g = p.add_block("z_gap", da * db);
  int sl = p.add_block("trace_slack", da);
  int mu = p.add_block("mu", 1);
  detail::add_matrix_equality(
      p, da * db,
      [&](int i, int j) {
        detail::Kernels k;
        detail::kernel_for(k, p, z)(i, j) += 1.0;
        detail::kernel_for(k, p, g)(i, j) -= 1.0;
        return k;
      },
      Matrix(v1.choi.matrix - v2.choi.matrix));
  detail::add_matrix_equality(
      p, da,
      [&](int a, int a2) {
        detail::Kernels k;
        Matrix& kz = detail::kernel_for(k, p, z);
        for (int b = 0; b < db; ++b) kz(a * db + b, a2 * db + b) += 1.0;
        detail::kernel_for(k, p, sl)(a, a2) += 1.0;
        if (a == a2) detail::kernel_for(k, p, mu)(0, 0) -= 1.0;
        return k;
      },
      Matrix::Zero(da, da));
  p.add_objective_entry(mu, 0, 0, 1.0);
  SdpSolution sol = solve(p, opts);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("diamond_distance: solver failed");
  return sol.primal_value - (v1.scaling - v2.scaling) / 2.0;
}

namespace detail {

struct CommProgram {
  SdpProgram prog;
  int tp = -1, tm = -1, vp = -1, vm = -1, up = -1, um = -1;
  int z = -1, g = -1, sl = -1, eps = -1, bs = -1;
  int d = 0, da = 0, db = 0;
};

enum class CommMode { kMinError, kZeroErrorCost };

// Twirl-reduced communication program (source n, target identity of
// dimension d). Variables T(+-) on AB, V(+-) on A, with the simulated map
// J_sim = tr[(J^n)^T dT] (d^2 Phi - I)/(d(d^2-1)) + tr[dV] (I - Phi)/(d(d^2-1)).
inline CommProgram build_comm(const ChoiOperator& n, int d, CommMode mode,
                              double gamma) {
  CommProgram cp;
  SdpProgram& p = cp.prog;
  const int da = n.in_dim, db = n.out_dim;
  cp.d = d;
  cp.da = da;
  cp.db = db;
  const int ts = da * db;

  cp.tp = p.add_block("t_plus", ts);
  cp.tm = p.add_block("t_minus", ts);
  cp.vp = p.add_block("v_plus", da);
  cp.vm = p.add_block("v_minus", da);
  int up = cp.up = p.add_block("t_plus_gap", ts);   // V+ (x) I - T+
  int um = cp.um = p.add_block("t_minus_gap", ts);  // V- (x) I - T-
  if (mode == CommMode::kMinError) {
    cp.z = p.add_block("z", d * d);
    cp.g = p.add_block("z_gap", d * d);
    cp.sl = p.add_block("z_trace_slack", d);
    cp.eps = p.add_block("eps", 1);
    cp.bs = p.add_block("budget_slack", 1);
  }

  // T(+-) + gap = V(+-) (x) I_B.
  auto add_gap = [&](int tblk, int vblk, int gblk) {
    add_matrix_equality(
        p, ts,
        [&](int i, int j) {
          Kernels k;
          kernel_for(k, p, tblk)(i, j) += 1.0;
          kernel_for(k, p, gblk)(i, j) += 1.0;
          if (i % db == j % db)
            kernel_for(k, p, vblk)(i / db, j / db) -= 1.0;
          return k;
        },
        Matrix::Zero(ts, ts));
  };
  add_gap(cp.tp, cp.vp, up);
  add_gap(cp.tm, cp.vm, um);

  // tr_A T(+-) = tr[V(+-)]/d^2 I_B.
  auto add_trace_a = [&](int tblk, int vblk) {
    add_matrix_equality(
        p, db,
        [&](int b, int b2) {
          Kernels k;
          Matrix& kt = kernel_for(k, p, tblk);
          for (int a = 0; a < da; ++a) kt(a * db + b, a * db + b2) += 1.0;
          if (b == b2)
            kernel_for(k, p, vblk).diagonal().array() -= 1.0 / (d * d);
          return k;
        },
        Matrix::Zero(db, db));
  };
  add_trace_a(cp.tp, cp.vp);
  add_trace_a(cp.tm, cp.vm);

  if (mode == CommMode::kZeroErrorCost) {
    {  // tr[(J^n)^T (T+ - T-)] = d^2
      Kernels k;
      kernel_for(k, p, cp.tp) = n.matrix;
      kernel_for(k, p, cp.tm) = -n.matrix;
      add_kernel_equality(p, k, double(d) * d);
    }
    {  // tr[V+ - V-] = d^2
      Kernels k;
      kernel_for(k, p, cp.vp) = identity(da);
      kernel_for(k, p, cp.vm) = -identity(da);
      add_kernel_equality(p, k, double(d) * d);
    }
    for (int vblk : {cp.vp, cp.vm})
      p.add_objective_coeff(vblk, identity(da) / (double(d) * d));
    return cp;
  }

  // Min-error mode: Z + J_sim - G = Gamma_{A'B'} on the d^2-dimensional
  // target space.
  const Matrix phi = phi_state(d);
  const Matrix c1 =
      (double(d) * d * phi - identity(d * d)) / (d * (double(d) * d - 1.0));
  const Matrix c2 = (identity(d * d) - phi) / (d * (double(d) * d - 1.0));
  add_matrix_equality(
      p, d * d,
      [&](int i, int j) {
        Kernels k;
        kernel_for(k, p, cp.z)(i, j) += 1.0;
        kernel_for(k, p, cp.g)(i, j) -= 1.0;
        kernel_for(k, p, cp.tp) += c1(i, j) * n.matrix;
        kernel_for(k, p, cp.tm) -= c1(i, j) * n.matrix;
        kernel_for(k, p, cp.vp) += c2(i, j) * identity(da);
        kernel_for(k, p, cp.vm) -= c2(i, j) * identity(da);
        return k;
      },
      gamma_operator(d));

  // tr_B' Z + SL = (2 eps + 1 - tr[V+ - V-]/d^2)/2 I_A'.
  add_matrix_equality(
      p, d,
      [&](int xp, int up2) {
        Kernels k;
        Matrix& kz = kernel_for(k, p, cp.z);
        for (int yp = 0; yp < d; ++yp) kz(xp * d + yp, up2 * d + yp) += 1.0;
        kernel_for(k, p, cp.sl)(xp, up2) += 1.0;
        if (xp == up2) {
          kernel_for(k, p, cp.eps)(0, 0) -= 1.0;
          kernel_for(k, p, cp.vp).diagonal().array() += 0.5 / (d * d);
          kernel_for(k, p, cp.vm).diagonal().array() -= 0.5 / (d * d);
        }
        return k;
      },
      0.5 * identity(d));

  {  // tr[V+ + V-]/d^2 + slack = gamma
    Kernels k;
    kernel_for(k, p, cp.vp) = identity(da) / (double(d) * d);
    kernel_for(k, p, cp.vm) = identity(da) / (double(d) * d);
    kernel_for(k, p, cp.bs)(0, 0) = 1.0;
    add_kernel_equality(p, k, gamma);
  }
  p.add_objective_entry(cp.eps, 0, 0, 1.0);
  return cp;
}

// Rebuilds the full bipartite code from the twirl-reduced solution:
// J(+-) = Phi_{A'B'} (x) T(+-)/d + (I - Phi)_{A'B'} (x) W(+-) with
// W(+-) = (V(+-) (x) I_B - T(+-)) / ((d^2-1) d), reordered to (A', B, A, B').
inline SuperchannelChoi extract_comm_code(const CommProgram& cp,
                                          const SdpSolution& sol) {
  const int d = cp.d, da = cp.da, db = cp.db;
  auto lift = [&](int tblk, int vblk) {
    const Matrix& t = sol.block_values[static_cast<size_t>(tblk)];
    const Matrix& v = sol.block_values[static_cast<size_t>(vblk)];
    Matrix w = (tensor(v, identity(db)) - t) / ((double(d) * d - 1.0) * d);
    Matrix raw = tensor(phi_state(d), t / d) +
                 tensor(identity(d * d) - phi_state(d), w);
    // Ordering (A', B', A, B) -> (A', B, A, B').
    return permute_systems(raw, SubsystemShape{d, d, da, db}, {0, 3, 2, 1});
  };
  SuperchannelChoi code;
  code.dim_a_in = d;
  code.dim_b = db;
  code.dim_a = da;
  code.dim_b_out = d;
  code.j_plus = lift(cp.tp, cp.vp);
  code.j_minus = lift(cp.tm, cp.vm);
  code.p_plus =
      sol.block_values[static_cast<size_t>(cp.vp)].trace().real() / (d * d);
  code.p_minus =
      sol.block_values[static_cast<size_t>(cp.vm)].trace().real() / (d * d);
  return code;
}

}  // namespace detail

inline TaskResult comm_min_error(const ChoiOperator& n, int d, double gamma,
                                 const SolverOptions& opts = {}) {
  if (d < 2) throw std::invalid_argument("comm_min_error: d < 2");
  if (gamma < 0.0) throw std::invalid_argument("comm_min_error: gamma < 0");
  detail::CommProgram cp =
      detail::build_comm(n, d, detail::CommMode::kMinError, gamma);
  TaskResult res;
  res.solution = solve(cp.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    res.realized_code = detail::extract_comm_code(cp, res.solution);
  }
  return res;
}

inline TaskResult comm_zero_error_cost(const ChoiOperator& n, int d,
                                       const SolverOptions& opts = {}) {
  if (d < 2) throw std::invalid_argument("comm_zero_error_cost: d < 2");
  detail::CommProgram cp =
      detail::build_comm(n, d, detail::CommMode::kZeroErrorCost, 0.0);
  TaskResult res;
  res.solution = solve(cp.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    res.realized_code = detail::extract_comm_code(cp, res.solution);
  }
  return res;
}

namespace detail {

struct FormationProgram {
  SdpProgram prog;
  int yp = -1, ym = -1, vp = -1, vm = -1;
  int z = -1, g = -1, sl = -1, eps = -1, bs = -1;
  int d = 0, dap = 0, dbp = 0;
};

// Twirl-reduced formation program: source identity of dimension d, target m
// on A' -> B'. Variables Y(+-) on A'B', V(+-) on B'.
inline FormationProgram build_formation_min_error(int d, const ChoiOperator& m,
                                                  double gamma) {
  FormationProgram fp;
  SdpProgram& p = fp.prog;
  const int dap = m.in_dim, dbp = m.out_dim;
  fp.d = d;
  fp.dap = dap;
  fp.dbp = dbp;
  const int ys = dap * dbp;

  fp.yp = p.add_block("y_plus", ys);
  fp.ym = p.add_block("y_minus", ys);
  fp.vp = p.add_block("v_plus", dbp);
  fp.vm = p.add_block("v_minus", dbp);
  int up = p.add_block("y_plus_gap", ys);   // I (x) V+ - Y+
  int um = p.add_block("y_minus_gap", ys);  // I (x) V- - Y-
  fp.z = p.add_block("z", ys);
  fp.g = p.add_block("z_gap", ys);
  fp.sl = p.add_block("z_trace_slack", dap);
  fp.eps = p.add_block("eps", 1);
  fp.bs = p.add_block("budget_slack", 1);

  // Y(+-) + gap = I_A' (x) V(+-).
  auto add_gap = [&](int yblk, int vblk, int gblk) {
    add_matrix_equality(
        p, ys,
        [&](int i, int j) {
          Kernels k;
          kernel_for(k, p, yblk)(i, j) += 1.0;
          kernel_for(k, p, gblk)(i, j) += 1.0;
          if (i / dbp == j / dbp)
            kernel_for(k, p, vblk)(i % dbp, j % dbp) -= 1.0;
          return k;
        },
        Matrix::Zero(ys, ys));
  };
  add_gap(fp.yp, fp.vp, up);
  add_gap(fp.ym, fp.vm, um);

  // tr_B' Y(+-) = tr[V(+-)]/d^2 I_A'.
  auto add_trace_bp = [&](int yblk, int vblk) {
    add_matrix_equality(
        p, dap,
        [&](int xp, int up2) {
          Kernels k;
          Matrix& ky = kernel_for(k, p, yblk);
          for (int yq = 0; yq < dbp; ++yq)
            ky(xp * dbp + yq, up2 * dbp + yq) += 1.0;
          if (xp == up2)
            kernel_for(k, p, vblk).diagonal().array() -= 1.0 / (d * d);
          return k;
        },
        Matrix::Zero(dap, dap));
  };
  add_trace_bp(fp.yp, fp.vp);
  add_trace_bp(fp.ym, fp.vm);

  // Z + (Y+ - Y-) - G = J^m.
  add_matrix_equality(
      p, ys,
      [&](int i, int j) {
        Kernels k;
        kernel_for(k, p, fp.z)(i, j) += 1.0;
        kernel_for(k, p, fp.g)(i, j) -= 1.0;
        kernel_for(k, p, fp.yp)(i, j) += 1.0;
        kernel_for(k, p, fp.ym)(i, j) -= 1.0;
        return k;
      },
      m.matrix);

  // tr_B' Z + SL = (2 eps + 1 - tr[V+ - V-]/d^2)/2 I_A'.
  add_matrix_equality(
      p, dap,
      [&](int xp, int up2) {
        Kernels k;
        Matrix& kz = kernel_for(k, p, fp.z);
        for (int yq = 0; yq < dbp; ++yq)
          kz(xp * dbp + yq, up2 * dbp + yq) += 1.0;
        kernel_for(k, p, fp.sl)(xp, up2) += 1.0;
        if (xp == up2) {
          kernel_for(k, p, fp.eps)(0, 0) -= 1.0;
          kernel_for(k, p, fp.vp).diagonal().array() += 0.5 / (d * d);
          kernel_for(k, p, fp.vm).diagonal().array() -= 0.5 / (d * d);
        }
        return k;
      },
      0.5 * identity(dap));

  {  // tr[V+ + V-]/d^2 + slack = gamma
    Kernels k;
    kernel_for(k, p, fp.vp) = identity(dbp) / (double(d) * d);
    kernel_for(k, p, fp.vm) = identity(dbp) / (double(d) * d);
    kernel_for(k, p, fp.bs)(0, 0) = 1.0;
    add_kernel_equality(p, k, gamma);
  }
  p.add_objective_entry(fp.eps, 0, 0, 1.0);
  return fp;
}

// Lifts the twirl-reduced formation solution back to a full code on
// (A', B, A, B') with A = B = the d-dimensional source:
// J(+-) = Phi_{AB} (x) Y(+-)/d + (I - Phi)_{AB} (x) W(+-),
// W(+-) = (I (x) V(+-) - Y(+-)) / ((d^2-1) d).
inline SuperchannelChoi extract_formation_code(int d, int dap, int dbp,
                                               const Matrix& y_plus,
                                               const Matrix& y_minus,
                                               const Matrix& v_plus,
                                               const Matrix& v_minus) {
  auto lift = [&](const Matrix& y, const Matrix& v) {
    Matrix w = (tensor(identity(dap), v) - y) / ((double(d) * d - 1.0) * d);
    Matrix raw = tensor(phi_state(d), y / d) +
                 tensor(identity(d * d) - phi_state(d), w);
    // Ordering (A, B, A', B') -> (A', B, A, B').
    return permute_systems(raw, SubsystemShape{d, d, dap, dbp}, {2, 1, 0, 3});
  };
  SuperchannelChoi code;
  code.dim_a_in = dap;
  code.dim_b = d;
  code.dim_a = d;
  code.dim_b_out = dbp;
  code.j_plus = lift(y_plus, v_plus);
  code.j_minus = lift(y_minus, v_minus);
  code.p_plus = v_plus.trace().real() / (d * d);
  code.p_minus = v_minus.trace().real() / (d * d);
  return code;
}

}  // namespace detail

inline TaskResult formation_min_error(int d, const ChoiOperator& m,
                                      double gamma,
                                      const SolverOptions& opts = {}) {
  if (d < 2) throw std::invalid_argument("formation_min_error: d < 2");
  if (gamma < 0.0)
    throw std::invalid_argument("formation_min_error: gamma < 0");
  detail::FormationProgram fp =
      detail::build_formation_min_error(d, m, gamma);
  TaskResult res;
  res.solution = solve(fp.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    const auto& v = res.solution.block_values;
    res.realized_code = detail::extract_formation_code(
        d, fp.dap, fp.dbp, v[static_cast<size_t>(fp.yp)],
        v[static_cast<size_t>(fp.ym)], v[static_cast<size_t>(fp.vp)],
        v[static_cast<size_t>(fp.vm)]);
  }
  return res;
}

namespace detail {

struct FormationCostProgram {
  SdpProgram prog;
  int vp = -1, vm = -1, r = -1, s1 = -1, s2 = -1;
  int d = 0, dap = 0, dbp = 0;
};

// Zero-error cost of realizing target m from a d-dimensional identity:
// min tr[V+ + V-]/d^2 with tr[V+ - V-] = d^2, tr_B' R = tr[V-]/d^2 I_A',
// J^m + R <= I (x) V+, 0 <= R <= I (x) V-.
inline FormationCostProgram build_formation_cost(int d,
                                                 const ChoiOperator& m) {
  FormationCostProgram fc;
  SdpProgram& p = fc.prog;
  const int dap = m.in_dim, dbp = m.out_dim;
  fc.d = d;
  fc.dap = dap;
  fc.dbp = dbp;
  const int rs = dap * dbp;
  int vp = fc.vp = p.add_block("v_plus", dbp);
  int vm = fc.vm = p.add_block("v_minus", dbp);
  int r = fc.r = p.add_block("r", rs);
  int s1 = fc.s1 = p.add_block("upper_gap", rs);  // I (x) V+ - J^m - R
  int s2 = fc.s2 = p.add_block("r_gap", rs);      // I (x) V- - R

  {  // tr[V+ - V-] = d^2
    detail::Kernels k;
    detail::kernel_for(k, p, vp) = identity(dbp);
    detail::kernel_for(k, p, vm) = -identity(dbp);
    detail::add_kernel_equality(p, k, double(d) * d);
  }
  detail::add_matrix_equality(
      p, dap,
      [&](int xp, int up2) {
        detail::Kernels k;
        Matrix& kr = detail::kernel_for(k, p, r);
        for (int yq = 0; yq < dbp; ++yq)
          kr(xp * dbp + yq, up2 * dbp + yq) += 1.0;
        if (xp == up2)
          detail::kernel_for(k, p, vm).diagonal().array() -= 1.0 / (d * d);
        return k;
      },
      Matrix::Zero(dap, dap));
  detail::add_matrix_equality(
      p, rs,
      [&](int i, int j) {
        detail::Kernels k;
        detail::kernel_for(k, p, r)(i, j) += 1.0;
        detail::kernel_for(k, p, s1)(i, j) += 1.0;
        if (i / dbp == j / dbp)
          detail::kernel_for(k, p, vp)(i % dbp, j % dbp) -= 1.0;
        return k;
      },
      Matrix(-m.matrix));
  detail::add_matrix_equality(
      p, rs,
      [&](int i, int j) {
        detail::Kernels k;
        detail::kernel_for(k, p, r)(i, j) += 1.0;
        detail::kernel_for(k, p, s2)(i, j) += 1.0;
        if (i / dbp == j / dbp)
          detail::kernel_for(k, p, vm)(i % dbp, j % dbp) -= 1.0;
        return k;
      },
      Matrix::Zero(rs, rs));
  for (int vblk : {vp, vm})
    p.add_objective_coeff(vblk, identity(dbp) / (double(d) * d));
  return fc;
}

}  // namespace detail

inline TaskResult formation_zero_error_cost(int d, const ChoiOperator& m,
                                            const SolverOptions& opts = {}) {
  if (d < 2) throw std::invalid_argument("formation_zero_error_cost: d < 2");
  detail::FormationCostProgram fc = detail::build_formation_cost(d, m);
  TaskResult res;
  res.solution = solve(fc.prog, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.value = res.solution.primal_value;
    const auto& bv = res.solution.block_values;
    // Reconstruct Y- = R, Y+ = J^m + R for the code lift.
    Matrix y_minus = bv[static_cast<size_t>(fc.r)];
    Matrix y_plus = m.matrix + y_minus;
    res.realized_code = detail::extract_formation_code(
        d, fc.dap, fc.dbp, y_plus, y_minus, bv[static_cast<size_t>(fc.vp)],
        bv[static_cast<size_t>(fc.vm)]);
  }
  return res;
}

namespace detail {

inline double floor_log2_dim(double trace_v, bool* flag) {
  const double root = std::sqrt(std::max(0.0, trace_v + kBoundaryTol));
  if (flag)
    *flag = std::abs(std::sqrt(std::max(0.0, trace_v)) -
                     std::round(std::sqrt(std::max(0.0, trace_v)))) <
            kBoundaryFlagTol;
  return std::log2(std::max(1.0, std::floor(root)));
}

inline double ceil_log2_dim(double trace_v, bool* flag) {
  const double root = std::sqrt(std::max(0.0, trace_v - kBoundaryTol));
  if (flag)
    *flag = std::abs(std::sqrt(std::max(0.0, trace_v)) -
                     std::round(std::sqrt(std::max(0.0, trace_v)))) <
            kBoundaryFlagTol;
  return std::log2(std::max(1.0, std::ceil(root)));
}

}  // namespace detail

// One-shot zero-error capacity under a sampling budget gamma:
// max tr[V] s.t. tr[(J^n)^T T] = tr V, tr_A T = I_B,
// 0 <= T + R <= (V + W) (x) I_B, 0 <= R <= W (x) I_B,
// tr_A R = (gamma-1)/2 I_B, tr W = (gamma-1)/2 tr V; report log2 floor sqrt.
// The sign-free V is carried as P - W with P := V + W >= 0; at gamma = 1 the
// R and W blocks are forced to zero and are dropped up front.
inline TaskResult shadow_capacity(const ChoiOperator& n, double gamma,
                                  const SolverOptions& opts = {}) {
  if (gamma < 1.0) throw std::invalid_argument("shadow_capacity: gamma < 1");
  const int da = n.in_dim, db = n.out_dim;
  const int ts = da * db;
  const bool unit = gamma <= 1.0 + 1e-12;
  SdpProgram p;
  p.sense = Sense::kMax;
  int u = p.add_block("t_shift", ts);  // T + R
  int pb = p.add_block("v_shift", da);  // V + W
  int s1 = p.add_block("upper_gap", ts);
  int rb = -1, wb = -1, s2 = -1;
  if (!unit) {
    rb = p.add_block("r", ts);
    wb = p.add_block("w", da);
    s2 = p.add_block("r_gap", ts);
  }

  {  // tr[(J^n)^T (U - R)] = tr[P - W]
    detail::Kernels k;
    detail::kernel_for(k, p, u) = n.matrix;
    detail::kernel_for(k, p, pb) = -identity(da);
    if (!unit) {
      detail::kernel_for(k, p, rb) = -n.matrix;
      detail::kernel_for(k, p, wb) = identity(da);
    }
    detail::add_kernel_equality(p, k, 0.0);
  }
  detail::add_matrix_equality(  // tr_A (U - R) = I_B
      p, db,
      [&](int b, int b2) {
        detail::Kernels k;
        Matrix& ku = detail::kernel_for(k, p, u);
        for (int a = 0; a < da; ++a) ku(a * db + b, a * db + b2) += 1.0;
        if (!unit) {
          Matrix& kr = detail::kernel_for(k, p, rb);
          for (int a = 0; a < da; ++a) kr(a * db + b, a * db + b2) -= 1.0;
        }
        return k;
      },
      identity(db));
  detail::add_matrix_equality(  // U + S1 = P (x) I_B
      p, ts,
      [&](int i, int j) {
        detail::Kernels k;
        detail::kernel_for(k, p, u)(i, j) += 1.0;
        detail::kernel_for(k, p, s1)(i, j) += 1.0;
        if (i % db == j % db)
          detail::kernel_for(k, p, pb)(i / db, j / db) -= 1.0;
        return k;
      },
      Matrix::Zero(ts, ts));
  if (!unit) {
    detail::add_matrix_equality(  // R + S2 = W (x) I_B
        p, ts,
        [&](int i, int j) {
          detail::Kernels k;
          detail::kernel_for(k, p, rb)(i, j) += 1.0;
          detail::kernel_for(k, p, s2)(i, j) += 1.0;
          if (i % db == j % db)
            detail::kernel_for(k, p, wb)(i / db, j / db) -= 1.0;
          return k;
        },
        Matrix::Zero(ts, ts));
    detail::add_matrix_equality(  // tr_A R = (gamma-1)/2 I_B
        p, db,
        [&](int b, int b2) {
          detail::Kernels k;
          Matrix& kr = detail::kernel_for(k, p, rb);
          for (int a = 0; a < da; ++a) kr(a * db + b, a * db + b2) += 1.0;
          return k;
        },
        (gamma - 1.0) / 2.0 * identity(db));
    {  // tr W = (gamma-1)/2 tr[P - W]
      detail::Kernels k;
      detail::kernel_for(k, p, wb) =
          (1.0 + (gamma - 1.0) / 2.0) * identity(da);
      detail::kernel_for(k, p, pb) = -(gamma - 1.0) / 2.0 * identity(da);
      detail::add_kernel_equality(p, k, 0.0);
    }
  }
  p.add_objective_coeff(pb, identity(da));
  if (!unit) p.add_objective_coeff(wb, -identity(da));

  TaskResult res;
  res.solution = solve(p, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.surrogate = res.solution.primal_value;
    res.value = detail::floor_log2_dim(res.surrogate, &res.boundary_flag);
  }
  return res;
}

// One-shot zero-error simulation cost of m under a sampling budget gamma:
// min tr[V] s.t. J^m + R <= I (x) (gamma+1)/2 V, 0 <= R <= I (x) W,
// tr_B' R = (gamma-1)/2 I_A', tr W = (gamma-1)/2 tr V; report log2 ceil sqrt.
inline TaskResult shadow_sim_cost(const ChoiOperator& m, double gamma,
                                  const SolverOptions& opts = {}) {
  if (gamma < 1.0) throw std::invalid_argument("shadow_sim_cost: gamma < 1");
  const int dap = m.in_dim, dbp = m.out_dim;
  const int rs = dap * dbp;
  const bool unit = gamma <= 1.0 + 1e-12;
  SdpProgram p;
  int v = p.add_block("v", dbp);
  int s1 = p.add_block("upper_gap", rs);
  int rb = -1, wb = -1, s2 = -1;
  if (!unit) {
    rb = p.add_block("r", rs);
    wb = p.add_block("w", dbp);
    s2 = p.add_block("r_gap", rs);
  }

  detail::add_matrix_equality(  // R + S1 = I (x) (gamma+1)/2 V - J^m
      p, rs,
      [&](int i, int j) {
        detail::Kernels k;
        if (!unit) detail::kernel_for(k, p, rb)(i, j) += 1.0;
        detail::kernel_for(k, p, s1)(i, j) += 1.0;
        if (i / dbp == j / dbp)
          detail::kernel_for(k, p, v)(i % dbp, j % dbp) -=
              (gamma + 1.0) / 2.0;
        return k;
      },
      Matrix(-m.matrix));
  if (!unit) {
    detail::add_matrix_equality(  // R + S2 = I (x) W
        p, rs,
        [&](int i, int j) {
          detail::Kernels k;
          detail::kernel_for(k, p, rb)(i, j) += 1.0;
          detail::kernel_for(k, p, s2)(i, j) += 1.0;
          if (i / dbp == j / dbp)
            detail::kernel_for(k, p, wb)(i % dbp, j % dbp) -= 1.0;
          return k;
        },
        Matrix::Zero(rs, rs));
    detail::add_matrix_equality(  // tr_B' R = (gamma-1)/2 I_A'
        p, dap,
        [&](int xp, int up2) {
          detail::Kernels k;
          Matrix& kr = detail::kernel_for(k, p, rb);
          for (int yq = 0; yq < dbp; ++yq)
            kr(xp * dbp + yq, up2 * dbp + yq) += 1.0;
          return k;
        },
        (gamma - 1.0) / 2.0 * identity(dap));
    {  // tr W = (gamma-1)/2 tr V
      detail::Kernels k;
      detail::kernel_for(k, p, wb) = identity(dbp);
      detail::kernel_for(k, p, v) = -(gamma - 1.0) / 2.0 * identity(dbp);
      detail::add_kernel_equality(p, k, 0.0);
    }
  }
  p.add_objective_coeff(v, identity(dbp));

  TaskResult res;
  res.solution = solve(p, opts);
  if (res.solution.status == SdpStatus::kOptimal) {
    res.surrogate = res.solution.primal_value;
    res.value = detail::ceil_log2_dim(res.surrogate, &res.boundary_flag);
  }
  return res;
}

// Published no-signaling zero-error capacity SDP (the gamma = 1 point of
// shadow_capacity), built independently as a cross-check:
// max tr V s.t. tr[(J^n)^T T] = tr V, tr_A T = I_B, 0 <= T <= V (x) I_B.
inline double ns_zero_error_capacity_value(const ChoiOperator& n,
                                           const SolverOptions& opts = {}) {
  const int da = n.in_dim, db = n.out_dim;
  const int ts = da * db;
  SdpProgram p;
  p.sense = Sense::kMax;
  int t = p.add_block("t", ts);
  int v = p.add_block("v", da);
  int s1 = p.add_block("upper_gap", ts);
  {
    detail::Kernels k;
    detail::kernel_for(k, p, t) = n.matrix;
    detail::kernel_for(k, p, v) = -identity(da);
    detail::add_kernel_equality(p, k, 0.0);
  }
  detail::add_matrix_equality(
      p, db,
      [&](int b, int b2) {
        detail::Kernels k;
        Matrix& kt = detail::kernel_for(k, p, t);
        for (int a = 0; a < da; ++a) kt(a * db + b, a * db + b2) += 1.0;
        return k;
      },
      identity(db));
  detail::add_matrix_equality(
      p, ts,
      [&](int i, int j) {
        detail::Kernels k;
        detail::kernel_for(k, p, t)(i, j) += 1.0;
        detail::kernel_for(k, p, s1)(i, j) += 1.0;
        if (i % db == j % db)
          detail::kernel_for(k, p, v)(i / db, j / db) -= 1.0;
        return k;
      },
      Matrix::Zero(ts, ts));
  p.add_objective_coeff(v, identity(da));
  SdpSolution sol = solve(p, opts);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("ns_zero_error_capacity_value: solver failed");
  return sol.primal_value;
}

}  // namespace shadowsim

#endif  // SHADOWSIM_PROGRAMS_HPP_
