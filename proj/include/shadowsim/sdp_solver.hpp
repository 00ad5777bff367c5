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

#ifndef SHADOWSIM_SDP_SOLVER_HPP_
#define SHADOWSIM_SDP_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "shadowsim/sdp.hpp"

namespace shadowsim {

struct SolverOptions {
  double gap_tol = 1e-7;
  double res_tol = 1e-8;
  int max_iterations = 200;
};

namespace detail {

using RealMatrix = Eigen::MatrixXd;

// Hermitian blocks are handled through the real-symmetric embedding
// H -> [[Re H, -Im H], [Im H, Re H]]; traces in the embedded space carry a
// factor 2, so embedded coefficients are pre-divided by 2 and objective /
// constraint values transfer unchanged. Free-Hermitian blocks are split into
// a difference of two PSD blocks.

struct RealTriplet {
  int r = 0;
  int c = 0;
  double v = 0.0;
};

struct CompiledBlock {
  int side = 0;    // real side, 2x the complex side
  int src = 0;     // program block index
  double sign = 1.0;
};

struct CompiledProgram {
  std::vector<CompiledBlock> blocks;
  // eq_terms[i] lists (compiled block, triplets) pairs for equality i; the
  // triplets enumerate every nonzero of the symmetric coefficient matrix.
  std::vector<std::vector<std::pair<int, std::vector<RealTriplet>>>> eq_terms;
  Eigen::VectorXd rhs;
  std::vector<RealMatrix> cost;  // dense, sign-adjusted so the solve is a min
  double objective_sign = 1.0;   // +1 for min programs, -1 for max
};

// Emits the real triplets of the embedded Hermitian pair generated by one
// sparse term, scaled by 1/2 (trace convention) and by the block sign.
inline void append_term(const SdpProgram::Term& t, int n, double sign,
                        std::vector<RealTriplet>* out) {
  const double re = 0.5 * sign * t.value.real();
  const double im = 0.5 * sign * t.value.imag();
  const int i = t.row, j = t.col;
  if (i == j) {
    if (re != 0.0) {
      out->push_back({i, i, re});
      out->push_back({n + i, n + i, re});
    }
    return;
  }
  if (re != 0.0) {
    out->push_back({i, j, re});
    out->push_back({j, i, re});
    out->push_back({n + i, n + j, re});
    out->push_back({n + j, n + i, re});
  }
  if (im != 0.0) {
    out->push_back({i, n + j, -im});
    out->push_back({n + j, i, -im});
    out->push_back({j, n + i, im});
    out->push_back({n + i, j, im});
  }
}

inline CompiledProgram compile(const SdpProgram& p) {
  CompiledProgram cp;
  cp.objective_sign = (p.sense == Sense::kMin) ? 1.0 : -1.0;
  // Program block -> list of (compiled index, sign).
  std::vector<std::vector<std::pair<int, double>>> expansion(p.blocks.size());
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const int side = 2 * p.blocks[b].side;
    expansion[b].push_back({static_cast<int>(cp.blocks.size()), 1.0});
    cp.blocks.push_back({side, static_cast<int>(b), 1.0});
    if (p.blocks[b].cone == Cone::kFreeHermitian) {
      expansion[b].push_back({static_cast<int>(cp.blocks.size()), -1.0});
      cp.blocks.push_back({side, static_cast<int>(b), -1.0});
    }
  }
  auto compile_terms = [&](const std::vector<SdpProgram::Term>& terms,
                           double extra_sign) {
    std::vector<std::pair<int, std::vector<RealTriplet>>> out;
    auto slot = [&](int cb) -> std::vector<RealTriplet>* {
      for (auto& kv : out)
        if (kv.first == cb) return &kv.second;
      out.push_back({cb, {}});
      return &out.back().second;
    };
    for (const SdpProgram::Term& t : terms) {
      const int n = p.blocks[static_cast<size_t>(t.block)].side;
      for (auto [cb, sign] : expansion[static_cast<size_t>(t.block)])
        append_term(t, n, sign * extra_sign, slot(cb));
    }
    return out;
  };
  cp.eq_terms.reserve(p.equalities.size());
  cp.rhs.resize(static_cast<Eigen::Index>(p.equalities.size()));
  for (size_t e = 0; e < p.equalities.size(); ++e) {
    cp.eq_terms.push_back(compile_terms(p.equalities[e].terms, 1.0));
    cp.rhs(static_cast<Eigen::Index>(e)) = p.equalities[e].rhs;
  }
  auto obj = compile_terms(p.objective, cp.objective_sign);
  for (const CompiledBlock& cb : cp.blocks)
    cp.cost.push_back(RealMatrix::Zero(cb.side, cb.side));
  for (const auto& [cb, trips] : obj)
    for (const RealTriplet& t : trips)
      cp.cost[static_cast<size_t>(cb)](t.r, t.c) += t.v;
  return cp;
}

// Largest alpha in (0, cap] with X + alpha * dX psd, given X = L L^T.
inline double max_step(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& dx,
                       double cap) {
  RealMatrix m = llt.matrixL().solve(dx);
  m = llt.matrixL().solve(m.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es((m + m.transpose()) / 2.0);
  const double lam = es.eigenvalues().minCoeff();
  if (lam >= -1e-13) return cap;
  return std::min(cap, -1.0 / lam);
}

struct RealSolveResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::vector<RealMatrix> x;
  Eigen::VectorXd y;
  double primal = 0.0;
  double dual = 0.0;
  int iterations = 0;
};

inline RealSolveResult solve_real(const CompiledProgram& cp,
                                  const SolverOptions& opts) {
  const int nb = static_cast<int>(cp.blocks.size());
  const int m = static_cast<int>(cp.rhs.size());
  int n_total = 0;
  for (const CompiledBlock& b : cp.blocks) n_total += b.side;

  auto op_a = [&](const std::vector<RealMatrix>& x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (int e = 0; e < m; ++e)
      for (const auto& [cb, trips] : cp.eq_terms[static_cast<size_t>(e)])
        for (const RealTriplet& t : trips)
          out(e) += t.v * x[static_cast<size_t>(cb)](t.r, t.c);
    return out;
  };
  auto op_at = [&](const Eigen::VectorXd& y) {
    std::vector<RealMatrix> out;
    for (const CompiledBlock& b : cp.blocks)
      out.push_back(RealMatrix::Zero(b.side, b.side));
    for (int e = 0; e < m; ++e)
      for (const auto& [cb, trips] : cp.eq_terms[static_cast<size_t>(e)])
        for (const RealTriplet& t : trips)
          out[static_cast<size_t>(cb)](t.r, t.c) += y(e) * t.v;
    return out;
  };
  auto inner = [&](const std::vector<RealMatrix>& a,
                   const std::vector<RealMatrix>& b) {
    double acc = 0.0;
    for (int k = 0; k < nb; ++k)
      acc += (a[static_cast<size_t>(k)].array() *
              b[static_cast<size_t>(k)].array())
                 .sum();
    return acc;
  };

  // Equalities touching each block, for Schur column assembly.
  std::vector<std::vector<std::pair<int, const std::vector<RealTriplet>*>>>
      block_eqs(static_cast<size_t>(nb));
  for (int e = 0; e < m; ++e)
    for (const auto& [cb, trips] : cp.eq_terms[static_cast<size_t>(e)])
      block_eqs[static_cast<size_t>(cb)].push_back({e, &trips});

  double cost_scale = 1.0;
  for (const RealMatrix& c : cp.cost)
    if (c.size() > 0)
      cost_scale = std::max(cost_scale, c.cwiseAbs().maxCoeff());
  const double rhs_scale =
      std::max(1.0, m > 0 ? cp.rhs.cwiseAbs().maxCoeff() : 0.0);

  RealSolveResult res;
  const double eta = std::max(rhs_scale, cost_scale);
  std::vector<RealMatrix> x, s;
  for (const CompiledBlock& b : cp.blocks) {
    x.push_back(eta * RealMatrix::Identity(b.side, b.side));
    s.push_back(eta * RealMatrix::Identity(b.side, b.side));
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  const double kCertTol = 1e-7;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    Eigen::VectorXd r_p = cp.rhs - op_a(x);
    std::vector<RealMatrix> aty = op_at(y);
    std::vector<RealMatrix> r_d;
    double dual_res = 0.0;
    for (int k = 0; k < nb; ++k) {
      r_d.push_back(cp.cost[static_cast<size_t>(k)] -
                    aty[static_cast<size_t>(k)] - s[static_cast<size_t>(k)]);
      dual_res = std::max(dual_res, r_d.back().cwiseAbs().maxCoeff());
    }
    const double mu = inner(x, s) / n_total;
    const double pobj = inner(cp.cost, x);
    const double dobj = m > 0 ? cp.rhs.dot(y) : 0.0;
    const double primal_res = m > 0 ? r_p.cwiseAbs().maxCoeff() : 0.0;
    const double gap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double xs_gap = inner(x, s) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (std::max(gap, xs_gap) <= opts.gap_tol &&
        primal_res <= opts.res_tol * rhs_scale &&
        dual_res <= opts.res_tol * cost_scale) {
      res.status = SdpStatus::kOptimal;
      res.x = x;
      res.y = y;
      res.primal = pobj;
      res.dual = dobj;
      return res;
    }

    // Farkas-type certificate scans, meaningful once the iterates diverge.
    const double y_norm = m > 0 ? y.norm() : 0.0;
    if (y_norm > 1.0) {
      const double beta = cp.rhs.dot(y) / y_norm;
      if (beta > kCertTol) {
        double viol = 0.0;
        for (int k = 0; k < nb; ++k) {
          Eigen::SelfAdjointEigenSolver<RealMatrix> es(
              aty[static_cast<size_t>(k)] / y_norm);
          viol = std::max(viol, es.eigenvalues().maxCoeff());
        }
        if (viol <= kCertTol * 1e-1 * beta) {
          res.status = SdpStatus::kInfeasible;
          res.y = y / y_norm;
          return res;
        }
      }
    }
    double x_trace = 0.0;
    for (int k = 0; k < nb; ++k) x_trace += x[static_cast<size_t>(k)].trace();
    if (x_trace > 1e5 * eta * n_total) {
      const double c_dir = inner(cp.cost, x) / x_trace;
      const double a_dir =
          m > 0 ? op_a(x).cwiseAbs().maxCoeff() / x_trace : 0.0;
      if (c_dir < -kCertTol && a_dir <= kCertTol * 1e-1 * (-c_dir)) {
        res.status = SdpStatus::kUnbounded;
        return res;
      }
    }

    // NT scaling per block: X = L L^T, S = R R^T, svd(R^T L) = U Sig V^T,
    // G = L V Sig^{-1/2}, W = G G^T so that W S W = X.
    std::vector<Eigen::LLT<RealMatrix>> lx, ls;
    std::vector<RealMatrix> g, g_inv, w;
    std::vector<Eigen::VectorXd> lambda;
    bool chol_ok = true;
    for (int k = 0; k < nb; ++k) {
      lx.emplace_back(x[static_cast<size_t>(k)]);
      ls.emplace_back(s[static_cast<size_t>(k)]);
      if (lx.back().info() != Eigen::Success ||
          ls.back().info() != Eigen::Success) {
        chol_ok = false;
        break;
      }
      RealMatrix l = lx.back().matrixL();
      RealMatrix r = ls.back().matrixL();
      Eigen::JacobiSVD<RealMatrix> svd(r.transpose() * l,
                                       Eigen::ComputeFullU |
                                           Eigen::ComputeFullV);
      Eigen::VectorXd sig = svd.singularValues();
      if (sig.minCoeff() <= 0.0) {
        chol_ok = false;
        break;
      }
      lambda.push_back(sig);
      Eigen::VectorXd inv_sqrt = sig.array().rsqrt();
      g.push_back(l * svd.matrixV() * inv_sqrt.asDiagonal());
      RealMatrix linv_t = l.triangularView<Eigen::Lower>().solve(
          RealMatrix::Identity(l.rows(), l.cols()));
      g_inv.push_back(sig.array().sqrt().matrix().asDiagonal() *
                      svd.matrixV().transpose() * linv_t);
      w.push_back(g.back() * g.back().transpose());
    }
    if (!chol_ok) break;

    // Schur matrix M_ij = sum_blocks <A_i, W A_j W>.
    RealMatrix schur = RealMatrix::Zero(m, m);
    for (int k = 0; k < nb; ++k) {
      const RealMatrix& wk = w[static_cast<size_t>(k)];
      for (const auto& [j, jt] : block_eqs[static_cast<size_t>(k)]) {
        RealMatrix t = RealMatrix::Zero(wk.rows(), wk.cols());
        for (const RealTriplet& tr : *jt)
          t.noalias() += tr.v * wk.col(tr.r) * wk.col(tr.c).transpose();
        for (const auto& [i, it] : block_eqs[static_cast<size_t>(k)]) {
          double acc = 0.0;
          for (const RealTriplet& tr : *it) acc += tr.v * t(tr.r, tr.c);
          schur(i, j) += acc;
        }
      }
    }
    schur = (schur + schur.transpose()) / 2.0;
    const double ridge =
        1e-13 * (1.0 + (m > 0 ? schur.trace() / m : 0.0));
    schur.diagonal().array() += ridge;
    Eigen::LDLT<RealMatrix> schur_fac(schur);
    if (m > 0 && schur_fac.info() != Eigen::Success) break;

    // Direction for a given complementarity target V:
    //   dX + W dS W = V,  A(dX) = r_p,  A*(dy) + dS = R_d.
    auto solve_direction = [&](const std::vector<RealMatrix>& v,
                               std::vector<RealMatrix>* dx,
                               Eigen::VectorXd* dy,
                               std::vector<RealMatrix>* ds) {
      std::vector<RealMatrix> base;
      for (int k = 0; k < nb; ++k)
        base.push_back(v[static_cast<size_t>(k)] -
                       w[static_cast<size_t>(k)] *
                           r_d[static_cast<size_t>(k)] *
                           w[static_cast<size_t>(k)]);
      Eigen::VectorXd rhs_vec = r_p - op_a(base);
      *dy = m > 0 ? Eigen::VectorXd(schur_fac.solve(rhs_vec))
                  : Eigen::VectorXd();
      std::vector<RealMatrix> atdy = op_at(*dy);
      ds->clear();
      dx->clear();
      for (int k = 0; k < nb; ++k) {
        RealMatrix dsk =
            r_d[static_cast<size_t>(k)] - atdy[static_cast<size_t>(k)];
        dsk = (dsk + dsk.transpose()) / 2.0;
        RealMatrix dxk = v[static_cast<size_t>(k)] -
                         w[static_cast<size_t>(k)] * dsk *
                             w[static_cast<size_t>(k)];
        dx->push_back((dxk + dxk.transpose()) / 2.0);
        ds->push_back(dsk);
      }
    };

    // Predictor, target V = -X.
    std::vector<RealMatrix> v_aff;
    for (int k = 0; k < nb; ++k) v_aff.push_back(-x[static_cast<size_t>(k)]);
    std::vector<RealMatrix> dx_a, ds_a;
    Eigen::VectorXd dy_a;
    solve_direction(v_aff, &dx_a, &dy_a, &ds_a);

    double ap = 1.0, ad = 1.0;
    for (int k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(lx[static_cast<size_t>(k)],
                                 dx_a[static_cast<size_t>(k)], 1.0));
      ad = std::min(ad, max_step(ls[static_cast<size_t>(k)],
                                 ds_a[static_cast<size_t>(k)], 1.0));
    }
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      mu_aff += ((x[static_cast<size_t>(k)] + ap * dx_a[static_cast<size_t>(k)])
                     .array() *
                 (s[static_cast<size_t>(k)] + ad * ds_a[static_cast<size_t>(k)])
                     .array())
                    .sum();
    mu_aff = std::max(0.0, mu_aff / n_total);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector target in the scaled space where both variables equal
    // diag(lambda): symmetric Lyapunov solve entry by entry.
    std::vector<RealMatrix> v_cc;
    for (int k = 0; k < nb; ++k) {
      const RealMatrix& gi = g_inv[static_cast<size_t>(k)];
      const RealMatrix& gk = g[static_cast<size_t>(k)];
      RealMatrix dxh = gi * dx_a[static_cast<size_t>(k)] * gi.transpose();
      RealMatrix dsh =
          gk.transpose() * ds_a[static_cast<size_t>(k)] * gk;
      const Eigen::VectorXd& lam = lambda[static_cast<size_t>(k)];
      RealMatrix r_cc = -(dxh * dsh + dsh * dxh) / 2.0;
      r_cc.diagonal().array() += sigma * mu;
      r_cc.diagonal().array() -= lam.array().square();
      RealMatrix kmat(r_cc.rows(), r_cc.cols());
      for (int i = 0; i < r_cc.rows(); ++i)
        for (int j = 0; j < r_cc.cols(); ++j)
          kmat(i, j) = 2.0 * r_cc(i, j) / (lam(i) + lam(j));
      v_cc.push_back(gk * kmat * gk.transpose());
    }
    std::vector<RealMatrix> dx, ds;
    Eigen::VectorXd dy;
    solve_direction(v_cc, &dx, &dy, &ds);

    ap = ad = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(lx[static_cast<size_t>(k)],
                                 dx[static_cast<size_t>(k)], 10.0));
      ad = std::min(ad, max_step(ls[static_cast<size_t>(k)],
                                 ds[static_cast<size_t>(k)], 10.0));
    }
    ap = std::min(1.0, 0.99 * ap);
    ad = std::min(1.0, 0.99 * ad);
    for (int k = 0; k < nb; ++k) {
      x[static_cast<size_t>(k)] += ap * dx[static_cast<size_t>(k)];
      s[static_cast<size_t>(k)] += ad * ds[static_cast<size_t>(k)];
      x[static_cast<size_t>(k)] = (x[static_cast<size_t>(k)] +
                                   x[static_cast<size_t>(k)].transpose()) /
                                  2.0;
      s[static_cast<size_t>(k)] = (s[static_cast<size_t>(k)] +
                                   s[static_cast<size_t>(k)].transpose()) /
                                  2.0;
    }
    y += ad * dy;
  }

  res.x = x;
  res.y = y;
  res.primal = inner(cp.cost, x);
  res.dual = m > 0 ? cp.rhs.dot(y) : 0.0;
  return res;
}

// Projects an embedded real block back to a complex Hermitian matrix,
// averaging over the embedding's symmetry.
inline Matrix unembed(const RealMatrix& xr) {
  const int n = static_cast<int>(xr.rows()) / 2;
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) = Complex((xr(i, j) + xr(n + i, n + j)) / 2.0,
                          (xr(n + i, j) - xr(i, n + j)) / 2.0);
  return (out + out.adjoint()) / 2.0;
}

}  // namespace detail

inline SdpSolution solve(const SdpProgram& p, const SolverOptions& opts) {
  detail::CompiledProgram cp = detail::compile(p);
  detail::RealSolveResult rr = detail::solve_real(cp, opts);

  SdpSolution sol;
  sol.status = rr.status;
  sol.iterations = rr.iterations;
  if (rr.status == SdpStatus::kInfeasible ||
      rr.status == SdpStatus::kUnbounded)
    return sol;

  // Recover complex blocks (free blocks are a difference of two PSD parts).
  sol.block_values.assign(p.blocks.size(), Matrix());
  for (size_t k = 0; k < cp.blocks.size(); ++k) {
    const detail::CompiledBlock& cb = cp.blocks[k];
    Matrix part = cb.sign * detail::unembed(rr.x[k]);
    Matrix& dst = sol.block_values[static_cast<size_t>(cb.src)];
    if (dst.size() == 0)
      dst = part;
    else
      dst += part;
  }
  sol.dual_multipliers.assign(rr.y.data(), rr.y.data() + rr.y.size());

  sol.primal_value = cp.objective_sign * rr.primal;
  sol.dual_value = cp.objective_sign * rr.dual;
  sol.duality_gap = std::abs(sol.primal_value - sol.dual_value) /
                    (1.0 + std::abs(sol.primal_value));

  if (rr.status == SdpStatus::kOptimal) {
    double worst = 0.0;
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      if (p.blocks[b].cone != Cone::kPsd) continue;
      double lam = min_eigenvalue(sol.block_values[b]);
      worst = std::max(worst, std::max(0.0, -lam));
    }
    for (const SdpProgram::Equality& eq : p.equalities)
      worst = std::max(worst,
                       std::abs(p.eval(eq.terms, sol.block_values) - eq.rhs));
    sol.max_residual = worst;
  }
  return sol;
}

inline SdpSolution solve(const SdpProgram& p, double gap_tol = 1e-7,
                         double res_tol = 1e-8) {
  SolverOptions opts;
  opts.gap_tol = gap_tol;
  opts.res_tol = res_tol;
  return solve(p, opts);
}

// Backend seam: the built-in interior point method is the default; an
// external conic solver can be swapped in behind the same post-conditions.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual SdpSolution solve(const SdpProgram& p,
                            const SolverOptions& opts) const = 0;
};

class InteriorPointBackend final : public SdpBackend {
 public:
  SdpSolution solve(const SdpProgram& p,
                    const SolverOptions& opts) const override {
    return shadowsim::solve(p, opts);
  }
};

}  // namespace shadowsim

#endif  // SHADOWSIM_SDP_SOLVER_HPP_
