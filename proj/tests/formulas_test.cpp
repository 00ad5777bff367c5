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

#include "shadowsim/formulas.hpp"

#include "gtest/gtest.h"

using namespace shadowsim;

TEST(DepoCapacityFormula, KnownValues) {
  EXPECT_DOUBLE_EQ(depo_capacity_formula(0.9, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(depo_capacity_formula(0.9, 5.0), std::log2(3.0));
  EXPECT_DOUBLE_EQ(depo_capacity_formula(1.0, 1.0), 1.0);
  EXPECT_THROW(depo_capacity_formula(0.9, 0.5), std::invalid_argument);
  EXPECT_THROW(depo_capacity_formula(1.5, 2.0), std::invalid_argument);
}

TEST(IdentitySimCostFormula, KnownValues) {
  EXPECT_DOUBLE_EQ(identity_sim_cost_formula(2, 4), 7.0);
  EXPECT_DOUBLE_EQ(identity_sim_cost_formula(3, 3), 1.0);
  EXPECT_DOUBLE_EQ(identity_sim_cost_formula(2, 3), 3.5);
  EXPECT_THROW(identity_sim_cost_formula(1, 2), std::invalid_argument);
  EXPECT_THROW(identity_sim_cost_formula(3, 2), std::invalid_argument);
}

TEST(DepoZeroErrorCostFormula, KnownValues) {
  EXPECT_NEAR(depo_zero_error_cost_formula(0.9, 2), 7.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(depo_zero_error_cost_formula(1.0, 2), 1.0);
  EXPECT_NEAR(depo_zero_error_cost_formula(0.9, 3), (9.0 - 1.9) / 1.8, 1e-15);
  EXPECT_THROW(depo_zero_error_cost_formula(0.0, 2), std::invalid_argument);
  EXPECT_THROW(depo_zero_error_cost_formula(0.5, 1), std::invalid_argument);
}

TEST(Certificate, DepoCertificatesFeasibleOnGrid) {
  for (int ip = 1; ip <= 10; ++ip) {
    const double p = 0.1 * ip;
    for (int d : {2, 3, 4}) {
      const double formula = depo_zero_error_cost_formula(p, d);
      for (CertificateId id : {CertificateId::kDepoZeroErrorCostPrimal,
                               CertificateId::kDepoZeroErrorCostDual}) {
        CertificatePoint cert = certificate(id, {p, d, 0});
        auto rep = check_feasible(cert.program, cert.block_values, 1e-9);
        EXPECT_TRUE(rep.feasible)
            << "p=" << p << " d=" << d << " violation=" << rep.max_violation;
        EXPECT_NEAR(cert.objective, formula, 1e-9) << "p=" << p << " d=" << d;
        EXPECT_NEAR(cert.program.eval_objective(cert.block_values),
                    cert.objective, 1e-9);
      }
    }
  }
}

TEST(Certificate, IdentityCertificatesFeasibleOnGrid) {
  for (int d : {2, 3, 4}) {
    for (int dp : {2, 3, 4}) {
      if (dp < d) continue;
      const double formula = identity_sim_cost_formula(d, dp);
      for (CertificateId id : {CertificateId::kIdentityFormationPrimal,
                               CertificateId::kIdentityFormationDual}) {
        CertificatePoint cert = certificate(id, {0.0, d, dp});
        auto rep = check_feasible(cert.program, cert.block_values, 1e-9);
        EXPECT_TRUE(rep.feasible)
            << "d=" << d << " d'=" << dp << " violation=" << rep.max_violation;
        EXPECT_NEAR(cert.objective, formula, 1e-9) << "d=" << d << " d'=" << dp;
        EXPECT_NEAR(cert.program.eval_objective(cert.block_values),
                    cert.objective, 1e-9);
      }
    }
  }
}

TEST(Certificate, RejectsOutOfDomainParams) {
  EXPECT_THROW(certificate(CertificateId::kDepoZeroErrorCostDual, {0.0, 2, 0}),
               std::invalid_argument);
  EXPECT_THROW(certificate(CertificateId::kIdentityFormationDual, {0.0, 3, 2}),
               std::invalid_argument);
}

TEST(Certificate, SandwichesCommCostSdpOnGrid) {
  // Primal certificate upper-bounds, dual certificate lower-bounds, and the
  // closed form pins the SDP value itself.
  for (int ip = 1; ip <= 10; ++ip) {
    const double p = 0.1 * ip;
    for (int d : {2, 3, 4}) {
      const double formula = depo_zero_error_cost_formula(p, d);
      TaskResult res = comm_zero_error_cost(depolarizing_choi(p), d);
      ASSERT_EQ(res.solution.status, SdpStatus::kOptimal)
          << "p=" << p << " d=" << d;
      EXPECT_NEAR(res.value, formula, 1e-5) << "p=" << p << " d=" << d;
      CertificatePoint primal =
          certificate(CertificateId::kDepoZeroErrorCostPrimal, {p, d, 0});
      CertificatePoint dual =
          certificate(CertificateId::kDepoZeroErrorCostDual, {p, d, 0});
      EXPECT_LE(dual.objective, res.value + 1e-5);
      EXPECT_GE(primal.objective, res.value - 1e-5);
    }
  }
}

TEST(Certificate, SandwichesFormationCostSdpOnGrid) {
  for (int d : {2, 3, 4}) {
    for (int dp : {2, 3, 4}) {
      if (dp < d) continue;
      const double formula = identity_sim_cost_formula(d, dp);
      TaskResult res = formation_zero_error_cost(d, identity_choi(dp));
      ASSERT_EQ(res.solution.status, SdpStatus::kOptimal)
          << "d=" << d << " d'=" << dp;
      EXPECT_NEAR(res.value, formula, 1e-5) << "d=" << d << " d'=" << dp;
      CertificatePoint primal =
          certificate(CertificateId::kIdentityFormationPrimal, {0.0, d, dp});
      CertificatePoint dual =
          certificate(CertificateId::kIdentityFormationDual, {0.0, d, dp});
      EXPECT_LE(dual.objective, res.value + 1e-5);
      EXPECT_GE(primal.objective, res.value - 1e-5);
    }
  }
}

TEST(Certificate, CapacityFormulaMatchesSdpOnGammaGrid) {
  for (double p : {0.3, 0.6, 0.9}) {
    for (double gamma : {1.0, 2.0, 3.5, 5.0, 8.0}) {
      TaskResult res = shadow_capacity(depolarizing_choi(p), gamma);
      ASSERT_EQ(res.solution.status, SdpStatus::kOptimal)
          << "p=" << p << " gamma=" << gamma;
      EXPECT_NEAR(res.value, depo_capacity_formula(p, gamma), 1e-12)
          << "p=" << p << " gamma=" << gamma;
    }
  }
}
