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

#ifndef SHADOWSIM_SDP_HPP_
#define SHADOWSIM_SDP_HPP_

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shadowsim/linalg.hpp"

namespace shadowsim {

enum class Cone { kPsd, kFreeHermitian };
enum class Sense { kMin, kMax };

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    default: return "numerical_failure";
  }
}

struct SdpBlock {
  std::string name;
  int side = 0;
  Cone cone = Cone::kPsd;
};

// Linear SDP over complex Hermitian blocks:
//   optimize sum_b tr[C_b X_b]  s.t.  sum_b tr[A_{i,b} X_b] = rhs_i,
// with X_b >= 0 for PSD blocks and X_b merely Hermitian for free blocks.
// Coefficient matrices are stored sparsely; an entry (i, j, v) with i != j
// stands for the Hermitian pair A[i,j] += v, A[j,i] += conj(v).
struct SdpProgram {
  struct Term {
    int block = 0;
    int row = 0;
    int col = 0;
    Complex value;
  };
  struct Equality {
    std::vector<Term> terms;
    double rhs = 0.0;
  };

  std::vector<SdpBlock> blocks;
  Sense sense = Sense::kMin;
  std::vector<Term> objective;
  std::vector<Equality> equalities;

  int add_block(std::string name, int side, Cone cone = Cone::kPsd) {
    if (side < 1) throw std::invalid_argument("SdpProgram: block side must be >=1");
    blocks.push_back(SdpBlock{std::move(name), side, cone});
    return static_cast<int>(blocks.size()) - 1;
  }

  int add_equality(double rhs) {
    equalities.push_back(Equality{{}, rhs});
    return static_cast<int>(equalities.size()) - 1;
  }

  void add_entry(int eq, int block, int row, int col, Complex v) {
    check_entry(block, row, col, v);
    equalities.at(static_cast<size_t>(eq))
        .terms.push_back(Term{block, row, col, v});
  }

  void add_objective_entry(int block, int row, int col, Complex v) {
    check_entry(block, row, col, v);
    objective.push_back(Term{block, row, col, v});
  }

  // Adds a whole Hermitian coefficient matrix for one block.
  void add_coeff(int eq, int block, const Matrix& a) {
    for (const Term& t : matrix_terms(block, a)) {
      equalities.at(static_cast<size_t>(eq)).terms.push_back(t);
    }
  }

  void add_objective_coeff(int block, const Matrix& a) {
    for (const Term& t : matrix_terms(block, a)) objective.push_back(t);
  }

  int block_index(const std::string& name) const {
    for (size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].name == name) return static_cast<int>(b);
    throw std::invalid_argument("SdpProgram: unknown block " + name);
  }

  // Dense Hermitian coefficient of one block in one functional.
  Matrix coeff_matrix(const std::vector<Term>& terms, int block) const {
    const int n = blocks.at(static_cast<size_t>(block)).side;
    Matrix a = Matrix::Zero(n, n);
    for (const Term& t : terms) {
      if (t.block != block) continue;
      a(t.row, t.col) += t.value;
      if (t.row != t.col) a(t.col, t.row) += std::conj(t.value);
    }
    return a;
  }

  double eval(const std::vector<Term>& terms,
              const std::vector<Matrix>& values) const {
    Complex acc = 0.0;
    for (const Term& t : terms) {
      const Matrix& x = values.at(static_cast<size_t>(t.block));
      acc += t.value * x(t.col, t.row);
      if (t.row != t.col) acc += std::conj(t.value) * x(t.row, t.col);
    }
    return acc.real();
  }

  double eval_objective(const std::vector<Matrix>& values) const {
    return eval(objective, values);
  }

 private:
  void check_entry(int block, int row, int col, Complex v) const {
    const SdpBlock& b = blocks.at(static_cast<size_t>(block));
    if (row < 0 || col < 0 || row >= b.side || col >= b.side)
      throw std::invalid_argument("SdpProgram: entry index out of range");
    if (row == col && std::abs(v.imag()) > 1e-14)
      throw std::invalid_argument("SdpProgram: diagonal entry must be real");
  }

  std::vector<Term> matrix_terms(int block, const Matrix& a) const {
    const SdpBlock& b = blocks.at(static_cast<size_t>(block));
    if (a.rows() != b.side || a.cols() != b.side)
      throw std::invalid_argument("SdpProgram: coefficient side mismatch");
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!is_hermitian(a, 1e-12 * scale))
      throw std::invalid_argument("SdpProgram: coefficient is not Hermitian");
    std::vector<Term> out;
    for (int i = 0; i < b.side; ++i) {
      if (std::abs(a(i, i)) > 0.0)
        out.push_back(Term{block, i, i, Complex(a(i, i).real(), 0.0)});
      for (int j = i + 1; j < b.side; ++j) {
        Complex v = (a(i, j) + std::conj(a(j, i))) / 2.0;
        if (std::abs(v) > 0.0) out.push_back(Term{block, i, j, v});
      }
    }
    return out;
  }
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<Matrix> block_values;
  std::vector<double> dual_multipliers;
  double duality_gap = 0.0;
  double max_residual = 0.0;
  int iterations = 0;
};

struct FeasibilityReport {
  bool feasible = false;
  double max_violation = 0.0;
};

// Checks candidate block values against the program's equalities and cones.
// Feasible iff every |tr[A_i X] - rhs_i| <= tol and every PSD block has
// minimum eigenvalue >= -tol.
inline FeasibilityReport check_feasible(const SdpProgram& p,
                                        const std::vector<Matrix>& values,
                                        double tol) {
  if (values.size() != p.blocks.size())
    throw std::invalid_argument("check_feasible: block count mismatch");
  double worst = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const SdpBlock& blk = p.blocks[b];
    if (values[b].rows() != blk.side || values[b].cols() != blk.side)
      throw std::invalid_argument("check_feasible: block side mismatch");
    double scale = std::max(1.0, values[b].cwiseAbs().maxCoeff());
    if (!is_hermitian(values[b], 1e-10 * scale))
      throw std::invalid_argument("check_feasible: block is not Hermitian");
    if (blk.cone == Cone::kPsd) {
      double lam = min_eigenvalue((values[b] + values[b].adjoint()) / 2.0);
      worst = std::max(worst, std::max(0.0, -lam));
    }
  }
  for (const SdpProgram::Equality& eq : p.equalities) {
    worst = std::max(worst, std::abs(p.eval(eq.terms, values) - eq.rhs));
  }
  return FeasibilityReport{worst <= tol, worst};
}

// Plain-text dump for cross-checking against other solvers. Format:
//   sense min|max
//   block <index> <name> <side> psd|free
//   objective / equality <index> rhs <value>, then one line per dense
//   nonzero coefficient: "  <block> <row> <col> <re> <im>".
inline std::string dump_program(const SdpProgram& p) {
  std::ostringstream os;
  os.precision(17);
  os << "sense " << (p.sense == Sense::kMin ? "min" : "max") << "\n";
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    os << "block " << b << " " << p.blocks[b].name << " " << p.blocks[b].side
       << " " << (p.blocks[b].cone == Cone::kPsd ? "psd" : "free") << "\n";
  }
  auto dump_terms = [&](const std::vector<SdpProgram::Term>& terms) {
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      Matrix a = p.coeff_matrix(terms, static_cast<int>(b));
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
          if (std::abs(a(i, j)) > 0.0)
            os << "  " << b << " " << i << " " << j << " " << a(i, j).real()
               << " " << a(i, j).imag() << "\n";
    }
  };
  os << "objective\n";
  dump_terms(p.objective);
  for (size_t e = 0; e < p.equalities.size(); ++e) {
    os << "equality " << e << " rhs " << p.equalities[e].rhs << "\n";
    dump_terms(p.equalities[e].terms);
  }
  return os.str();
}

}  // namespace shadowsim

#endif  // SHADOWSIM_SDP_HPP_
