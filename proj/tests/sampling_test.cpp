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

#include "shadowsim/sampling.hpp"

#include "gtest/gtest.h"
#include "shadowsim/programs.hpp"

using namespace shadowsim;

namespace {

Matrix pauli_z() {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return z;
}

Matrix ket0_density() {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  return rho;
}

Matrix ket_plus_density() {
  Matrix rho = Matrix::Constant(2, 2, Complex(0.5, 0.0));
  return rho;
}

QuasiDecomposition identity_decomposition() {
  QuasiDecomposition q;
  q.p_plus = 1.0;
  q.choi_plus = identity_choi(2);
  q.p_minus = 0.0;
  q.choi_minus = identity_choi(2);
  return q;
}

}  // namespace

TEST(HoeffdingRounds, KnownValues) {
  EXPECT_EQ(hoeffding_rounds(1.0, 0.1, 0.05), 738);
  // 4x the gamma=1 budget, up to the outer ceil.
  EXPECT_EQ(hoeffding_rounds(2.0, 0.1, 0.05), 2952);
  EXPECT_THROW(hoeffding_rounds(0.0, 0.1, 0.05), std::invalid_argument);
  EXPECT_THROW(hoeffding_rounds(1.0, 0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(hoeffding_rounds(1.0, 0.1, 1.0), std::invalid_argument);
}

TEST(Run, DeterministicOutcome) {
  SamplingPlan plan;
  plan.decomposition = identity_decomposition();
  plan.observable = pauli_z();
  plan.state = ket0_density();
  plan.rounds = 64;
  plan.seed = 7;
  SampleEstimate est = run(plan);
  EXPECT_DOUBLE_EQ(est.xi, 1.0);
  EXPECT_DOUBLE_EQ(est.gamma, 1.0);
}

TEST(Run, SymmetricInputAveragesToZero) {
  SamplingPlan plan;
  plan.decomposition = identity_decomposition();
  plan.observable = pauli_z();
  plan.state = ket_plus_density();
  plan.rounds = 100000;
  plan.seed = 11;
  SampleEstimate est = run(plan);
  EXPECT_LT(std::abs(est.xi), 0.02);
}

TEST(Run, SeedDeterminism) {
  SamplingPlan plan;
  plan.decomposition = identity_decomposition();
  plan.observable = pauli_z();
  plan.state = ket_plus_density();
  plan.rounds = 5000;
  plan.seed = 42;
  SampleEstimate a = run(plan);
  SampleEstimate b = run(plan);
  EXPECT_EQ(a.xi, b.xi);
  plan.seed = 43;
  EXPECT_NE(run(plan).xi, a.xi);
}

TEST(Run, TraceStaysInRange) {
  SamplingPlan plan;
  plan.decomposition.p_plus = 1.25;
  plan.decomposition.choi_plus = identity_choi(2);
  plan.decomposition.p_minus = 0.25;
  plan.decomposition.choi_minus = depolarizing_choi(0.0);
  plan.observable = pauli_z();
  plan.state = ket_plus_density();
  plan.rounds = 2000;
  plan.seed = 3;
  plan.record_trace = true;
  SampleEstimate est = run(plan);
  const double gamma = 1.5;
  EXPECT_DOUBLE_EQ(est.gamma, gamma);
  EXPECT_LE(std::abs(est.xi), gamma);
  ASSERT_EQ(est.trace.size(), 2000u);
  for (const RoundRecord& r : est.trace) {
    EXPECT_TRUE(r.sign == 1 || r.sign == -1);
    EXPECT_LE(std::abs(r.outcome), 1.0 + 1e-12);
    EXPECT_LE(std::abs(gamma * r.sign * r.outcome), gamma + 1e-12);
  }
}

TEST(Run, RejectsInvalidPlans) {
  SamplingPlan plan;
  plan.decomposition = identity_decomposition();
  plan.observable = 2.0 * pauli_z();  // norm 2
  plan.state = ket0_density();
  plan.rounds = 10;
  EXPECT_THROW(run(plan), std::invalid_argument);
  plan.observable = pauli_z();
  plan.state = 2.0 * ket0_density();  // trace 2
  EXPECT_THROW(run(plan), std::invalid_argument);
  plan.state = ket0_density();
  plan.rounds = 0;
  EXPECT_THROW(run(plan), std::invalid_argument);
}

TEST(TrueExpectation, ClosedCases) {
  EXPECT_DOUBLE_EQ(
      true_expectation(identity_decomposition(), pauli_z(), ket0_density()),
      1.0);
  QuasiDecomposition cancel;
  cancel.p_plus = 0.75;
  cancel.choi_plus = depolarizing_choi(0.5);
  cancel.p_minus = 0.75;
  cancel.choi_minus = depolarizing_choi(0.5);
  EXPECT_NEAR(true_expectation(cancel, pauli_z(), ket0_density()), 0.0, 1e-12);
}

TEST(TrueExpectation, MatchesSeedAveragedRuns) {
  SamplingPlan plan;
  plan.decomposition.p_plus = 1.25;
  plan.decomposition.choi_plus = identity_choi(2);
  plan.decomposition.p_minus = 0.25;
  plan.decomposition.choi_minus = depolarizing_choi(0.0);
  plan.observable = pauli_z();
  plan.state = ket0_density();
  plan.rounds = 20000;
  const double truth =
      true_expectation(plan.decomposition, plan.observable, plan.state);
  EXPECT_NEAR(truth, 1.25, 1e-12);
  double mean = 0.0;
  for (int s = 0; s < 50; ++s) {
    plan.seed = static_cast<std::uint64_t>(s);
    mean += run(plan).xi;
  }
  mean /= 50.0;
  const double band = 3.0 * 1.5 / std::sqrt(50.0 * 20000.0);
  EXPECT_NEAR(mean, truth, band);
}

TEST(Run, ReferenceSystemEntangledInput) {
  SamplingPlan plan;
  plan.decomposition = identity_decomposition();
  plan.observable = tensor(pauli_z(), pauli_z());
  plan.state = phi_state(2);  // maximally entangled on R (x) A
  plan.rounds = 128;
  plan.seed = 9;
  EXPECT_NEAR(
      true_expectation(plan.decomposition, plan.observable, plan.state), 1.0,
      1e-12);
  SampleEstimate est = run(plan);
  EXPECT_DOUBLE_EQ(est.xi, 1.0);
}

TEST(BranchDecomposition, ZeroErrorDepolarizingCode) {
  ChoiOperator n = depolarizing_choi(0.9);
  TaskResult res = comm_zero_error_cost(n, 2);
  ASSERT_EQ(res.solution.status, SdpStatus::kOptimal);
  ASSERT_TRUE(res.realized_code.has_value());
  QuasiDecomposition q = branch_decomposition(*res.realized_code, n);
  EXPECT_NEAR(q.sampling_cost(), 7.0 / 6.0, 1e-5);
  EXPECT_TRUE(is_cptp(q.choi_plus, 1e-6));
  EXPECT_TRUE(is_cptp(q.choi_minus, 1e-6));
  const double truth = true_expectation(q, pauli_z(), ket0_density());
  EXPECT_NEAR(truth, 1.0, 1e-5);

  SamplingPlan plan;
  plan.decomposition = q;
  plan.observable = pauli_z();
  plan.state = ket0_density();
  plan.rounds = hoeffding_rounds(q.sampling_cost(), 0.05, 0.01);
  plan.seed = 2026;
  SampleEstimate est = run(plan);
  EXPECT_LT(std::abs(est.xi - 1.0), 0.05);
}
