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

#include "shadowsim/sdp_solver.hpp"

#include <random>

#include "gtest/gtest.h"

using namespace shadowsim;

namespace {

Matrix random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  return (m + m.adjoint()) / 2.0;
}

// min x s.t. [[x,1],[1,x]] >= 0, modeled as X >= 0 with X01 pinned to 1 and
// X00 = X11.
SdpProgram arrow_program() {
  SdpProgram p;
  int x = p.add_block("x", 2);
  p.add_objective_entry(x, 0, 0, 1.0);
  int off = p.add_equality(1.0);
  p.add_entry(off, x, 0, 1, 0.5);  // Re X01 = 1
  int diag = p.add_equality(0.0);
  p.add_entry(diag, x, 0, 0, 1.0);
  p.add_entry(diag, x, 1, 1, -1.0);
  int im = p.add_equality(0.0);
  p.add_entry(im, x, 0, 1, Complex(0.0, 0.5));  // Im X01 = 0
  return p;
}

}  // namespace

TEST(Solve, ArrowMatrixMinimum) {
  SdpSolution sol = solve(arrow_program());
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.primal_value, 1.0, 1e-6);
  EXPECT_LE(sol.duality_gap, 1e-7);
  EXPECT_LE(sol.max_residual, 1e-7);
}

TEST(Solve, MaxTraceUnitTrace) {
  SdpProgram p;
  p.sense = Sense::kMax;
  int x = p.add_block("x", 3);
  p.add_objective_coeff(x, identity(3));
  int tr = p.add_equality(1.0);
  p.add_coeff(tr, x, identity(3));
  SdpSolution sol = solve(p);
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.primal_value, 1.0, 1e-7);
}

TEST(Solve, MinTraceWithEntangledConstraint) {
  SdpProgram p;
  int x = p.add_block("x", 4);
  p.add_objective_coeff(x, identity(4));
  int c = p.add_equality(1.0);
  p.add_coeff(c, x, phi_state(2));
  SdpSolution sol = solve(p);
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.primal_value, 1.0, 1e-6);
  // Optimum is the entangled projector itself.
  EXPECT_LE((sol.block_values[0] - phi_state(2)).cwiseAbs().maxCoeff(), 1e-5);
  // Weak duality for a min program.
  EXPECT_LE(sol.dual_value, sol.primal_value + 1e-7);
}

TEST(Solve, Reproducible) {
  SdpSolution a = solve(arrow_program());
  SdpSolution b = solve(arrow_program());
  ASSERT_EQ(a.status, SdpStatus::kOptimal);
  EXPECT_NEAR(a.primal_value, b.primal_value, 1e-9);
}

TEST(Solve, RandomGroundEnergies) {
  // min tr[CX] over density-like X: optimum is the smallest eigenvalue of C.
  std::mt19937 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    Matrix c = random_hermitian(n, rng);
    SdpProgram p;
    int x = p.add_block("x", n);
    p.add_objective_coeff(x, c);
    int tr = p.add_equality(1.0);
    p.add_coeff(tr, x, identity(n));
    SdpSolution sol = solve(p);
    ASSERT_EQ(sol.status, SdpStatus::kOptimal) << "trial " << trial;
    double ground = eig_hermitian(c).eigenvalues.minCoeff();
    EXPECT_NEAR(sol.primal_value, ground, 1e-6) << "trial " << trial;
    // The recovered complex block reproduces the same objective value.
    EXPECT_NEAR(p.eval_objective(sol.block_values), sol.primal_value, 1e-7);
    EXPECT_TRUE(check_feasible(p, sol.block_values, 1e-6).feasible);
    EXPECT_LE(sol.dual_value, sol.primal_value + 1e-7);
  }
}

TEST(Solve, FreeScalarEquality) {
  SdpProgram p;
  int t = p.add_block("t", 1, Cone::kFreeHermitian);
  p.add_objective_entry(t, 0, 0, 1.0);
  int c = p.add_equality(-3.0);
  p.add_entry(c, t, 0, 0, 1.0);
  SdpSolution sol = solve(p);
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.primal_value, -3.0, 1e-6);
  EXPECT_NEAR(sol.block_values[0](0, 0).real(), -3.0, 1e-5);
}

TEST(Solve, DetectsInfeasibleSign) {
  SdpProgram p;
  int x = p.add_block("x", 2);
  int tr = p.add_equality(-1.0);
  p.add_coeff(tr, x, identity(2));
  p.add_objective_coeff(x, identity(2));
  SdpSolution sol = solve(p);
  EXPECT_EQ(sol.status, SdpStatus::kInfeasible);
}

TEST(Solve, DetectsInfeasibleInconsistentEqualities) {
  SdpProgram p;
  int x = p.add_block("x", 2);
  p.add_objective_coeff(x, identity(2));
  int a = p.add_equality(1.0);
  p.add_entry(a, x, 0, 0, 1.0);
  int b = p.add_equality(2.0);
  p.add_entry(b, x, 0, 0, 1.0);
  SdpSolution sol = solve(p);
  EXPECT_EQ(sol.status, SdpStatus::kInfeasible);
}

TEST(Solve, DetectsUnbounded) {
  SdpProgram p;
  int x = p.add_block("x", 2);
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = -1.0;
  p.add_objective_coeff(x, c);
  int fix = p.add_equality(1.0);
  p.add_entry(fix, x, 0, 0, 1.0);
  SdpSolution sol = solve(p);
  EXPECT_EQ(sol.status, SdpStatus::kUnbounded);
}

TEST(CheckFeasible, ZeroAgainstHomogeneous) {
  SdpProgram p;
  int x = p.add_block("x", 3);
  int h = p.add_equality(0.0);
  p.add_entry(h, x, 0, 1, Complex(1.0, 2.0));
  auto rep = check_feasible(p, {Matrix::Zero(3, 3)}, 1e-12);
  EXPECT_TRUE(rep.feasible);
  EXPECT_EQ(rep.max_violation, 0.0);
}

TEST(CheckFeasible, FlagsViolations) {
  SdpProgram p;
  int x = p.add_block("x", 2);
  int tr = p.add_equality(1.0);
  p.add_coeff(tr, x, identity(2));
  Matrix bad = -identity(2);
  auto rep = check_feasible(p, {bad}, 1e-9);
  EXPECT_FALSE(rep.feasible);
  EXPECT_GE(rep.max_violation, 1.0);
  EXPECT_THROW(check_feasible(p, {Matrix::Zero(3, 3)}, 1e-9),
               std::invalid_argument);
}

TEST(DumpProgram, ListsBlocksAndCoefficients) {
  SdpProgram p = arrow_program();
  std::string text = dump_program(p);
  EXPECT_NE(text.find("sense min"), std::string::npos);
  EXPECT_NE(text.find("block 0 x 2 psd"), std::string::npos);
  EXPECT_NE(text.find("equality 0 rhs 1"), std::string::npos);
}
