#include <cmath>

#include <gtest/gtest.h>

#include "cvseq/metrics.hpp"
#include "cvseq/scenarios.hpp"

namespace cvseq {
namespace {

struct TableRow {
  const char* point;
  double gate_db;
  double beta_db;  // 0 = vacuum
  double g_paper;
};

const TableRow kTable1[] = {
    {"a", 0, 0, 0.72},  {"b", -3, 0, 0.81},  {"c", -6, 0, 0.87},
    {"d", -9, 0, 0.92}, {"e", -12, 0, 0.95}, {"f", 0, -4, 0.83},
    {"g", -3, -4, 0.90}, {"h", -6, -4, 0.94}, {"i", -9, -4, 0.96},
    {"j", -12, -4, 0.98}};

SequenceConfig row_config(const TableRow& row, double cluster_db = -4.0) {
  SequenceConfig cfg;
  if (row.beta_db < 0.0) cfg.beta = InputSpec::p_squeezed(row.beta_db);
  cfg.cluster_r = squeeze_r_from_db(cluster_db);
  cfg.angles = angle_for_squeezing(row.gate_db);
  return cfg;
}

double row_r_beta(const TableRow& row) {
  return row.beta_db < 0.0 ? squeeze_r_from_db(row.beta_db) : 0.0;
}

TEST(OptimalGain, TableOneRegression) {
  double r = squeeze_r_from_db(-4.0);
  for (const auto& row : kTable1) {
    double theta2 = angle_for_squeezing(row.gate_db).theta2;
    EXPECT_NEAR(optimal_gain(r, row_r_beta(row), theta2), row.g_paper, 0.005)
        << "row " << row.point;
  }
}

TEST(OptimalGain, SpotValues) {
  double r = squeeze_r_from_db(-4.0);
  EXPECT_NEAR(optimal_gain(r, 0.0, angle_for_squeezing(0.0).theta2), 0.722954, 1e-5);
  EXPECT_NEAR(optimal_gain(r, squeeze_r_from_db(-4.0),
                           angle_for_squeezing(-12.0).theta2),
              0.979473, 1e-5);
  EXPECT_NEAR(optimal_gain(r, 0.0, angle_for_squeezing(-12.0).theta2), 0.950057, 1e-5);
  EXPECT_THROW(optimal_gain(r, 0.0, 0.0), std::invalid_argument);
}

TEST(OptimalGainNumeric, AgreesWithClosedFormOnLosslessGrid) {
  for (double cluster_db : {-2.0, -4.0, -6.0}) {
    for (const auto& row : kTable1) {
      auto out = run_sequence(row_config(row, cluster_db));
      double closed = optimal_gain(squeeze_r_from_db(cluster_db), row_r_beta(row),
                                   out.config.angles.theta2);
      EXPECT_NEAR(optimal_gain_numeric(out), closed, 1e-6)
          << "row " << row.point << " cluster " << cluster_db;
    }
  }
}

TEST(OptimalGainNumeric, WellDefinedOnUncorrelatedVacua) {
  SequenceConfig cfg;
  cfg.angles = angle_for_squeezing(0.0);
  cfg.ancilla = AncillaMode::coherent_substitute;
  auto out = run_sequence(cfg);
  double g = optimal_gain_numeric(out);
  EXPECT_GT(g, 0.0);
  EXPECT_LT(g, 1.0);
}

TEST(EntanglementE, SeparableBoundaryAtUnitGain) {
  // two independent vacuum outputs: E = 0.5 + 0.5 - 1 = 0
  GaussianState s = GaussianState::vacuum(2);
  SequenceOutput fake;
  fake.state = s;
  fake.config.angles = angle_for_squeezing(0.0);
  EXPECT_NEAR(entanglement_E(fake, 1.0), 0.0, 1e-12);
  EXPECT_THROW(entanglement_E(fake, 0.0), std::invalid_argument);
}

TEST(EntanglementE, LosslessTableValues) {
  const double expected[10] = {0.058820, -0.000439, -0.031448, -0.045349,
                               -0.050694, -0.013340, -0.101530, -0.150899,
                               -0.176985, -0.190330};
  for (int i = 0; i < 10; ++i) {
    const auto& row = kTable1[i];
    auto out = run_sequence(row_config(row));
    double g = optimal_gain(squeeze_r_from_db(-4.0), row_r_beta(row),
                            out.config.angles.theta2);
    EXPECT_NEAR(entanglement_E(out, g), expected[i], 1e-5) << "row " << row.point;
  }
}

TEST(DuanCheck, PointJBelowShotNoise) {
  const auto& row = kTable1[9];
  auto out = run_sequence(row_config(row));
  double g = optimal_gain(squeeze_r_from_db(-4.0), row_r_beta(row),
                          out.config.angles.theta2);
  auto rep = duan_check(out, g);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.v1_db, -0.8646, 1e-3);
  EXPECT_NEAR(rep.v2_db, -1.0153, 1e-3);
  // lossless correlations sit below the measured -0.53 / -0.65 dB
  EXPECT_LT(rep.v1_db, -0.53);
  EXPECT_LT(rep.v2_db, -0.65);
  EXPECT_NEAR(rep.v1 + rep.v2, 0.789143, 1e-5);
}

TEST(DuanCheck, SubstituteAncillaFailsAtPointJ) {
  SequenceConfig cfg = row_config(kTable1[9]);
  cfg.ancilla = AncillaMode::coherent_substitute;
  auto out = run_sequence(cfg);
  double g = optimal_gain(squeeze_r_from_db(-4.0), row_r_beta(kTable1[9]),
                          cfg.angles.theta2);
  EXPECT_FALSE(duan_check(out, g).pass);
}

TEST(DuanCheck, VanishingGainFails) {
  auto out = run_sequence(row_config(kTable1[9]));
  auto rep = duan_check(out, 1e-6);
  EXPECT_FALSE(rep.pass);  // left side -> var(x_nu) + var(x_mu) > 0 = boundary
}

TEST(GaussianFidelity, IdenticalVacuaGiveUnity) {
  FidelityInputs fi;  // identity covariances, zero mean difference
  EXPECT_NEAR(gaussian_fidelity(fi), 1.0, 1e-12);
}

TEST(GaussianFidelity, IdenticalMixedStatesGiveUnity) {
  FidelityInputs fi;
  fi.a1 << 3.0, 0.2, 0.2, 1.5;
  fi.a2 = fi.a1;
  EXPECT_NEAR(gaussian_fidelity(fi), 1.0, 1e-12);
}

TEST(GaussianFidelity, SymmetricUnderSwap) {
  FidelityInputs fi;
  fi.a1 << 2.0, 0.0, 0.0, 0.9;
  fi.a2 << 1.3, 0.1, 0.1, 1.8;
  fi.mean_diff << 0.4, -0.2;
  FidelityInputs swapped;
  swapped.a1 = fi.a2;
  swapped.a2 = fi.a1;
  swapped.mean_diff = -fi.mean_diff;
  EXPECT_NEAR(gaussian_fidelity(fi), gaussian_fidelity(swapped), 1e-12);
}

TEST(GaussianFidelity, DecreasesWithMeanSeparation) {
  FidelityInputs fi;
  fi.a1 << 2.0, 0.0, 0.0, 1.0;
  fi.a2 << 1.5, 0.0, 0.0, 1.2;
  double prev = gaussian_fidelity(fi);
  for (double d : {0.2, 0.5, 1.0, 2.0}) {
    fi.mean_diff << d, 0.0;
    double f = gaussian_fidelity(fi);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(GaussianFidelity, SingularSumThrows) {
  FidelityInputs fi;
  fi.a1.setZero();
  fi.a2.setZero();
  EXPECT_THROW(gaussian_fidelity(fi), std::invalid_argument);
}

TEST(OutputFidelities, InfiniteSqueezingGivesUnity) {
  SequenceConfig cfg;
  cfg.beta = InputSpec::p_squeezed(-4.0);
  cfg.cluster_r = ideal_cluster_r();
  cfg.angles = angle_for_squeezing(-12.0);
  auto [fmu, fnu] = output_fidelities(run_sequence(cfg));
  EXPECT_NEAR(fmu, 1.0, 1e-6);
  EXPECT_NEAR(fnu, 1.0, 1e-6);
}

TEST(OutputFidelities, LosslessTableValues) {
  const double expected_mu[10] = {0.850667, 0.894044, 0.906102, 0.905545, 0.902375,
                                  0.897576, 0.945838, 0.964329, 0.969760, 0.970899};
  const double expected_nu[10] = {0.886010, 0.921699, 0.943319, 0.953319, 0.957003,
                                  0.911905, 0.954804, 0.977270, 0.986356, 0.989381};
  for (int i = 0; i < 10; ++i) {
    auto [fmu, fnu] = output_fidelities(run_sequence(row_config(kTable1[i])));
    EXPECT_NEAR(fmu, expected_mu[i], 1e-5) << "row " << kTable1[i].point;
    EXPECT_NEAR(fnu, expected_nu[i], 1e-5) << "row " << kTable1[i].point;
  }
}

TEST(OutputFidelities, MeansCancelWhenBothStatesShareThem) {
  // same displacement on engine + ideal leaves epsilon = 0
  SequenceConfig cfg;
  cfg.alpha = InputSpec::coherent(Quad::x, 12.0);
  cfg.cluster_r = squeeze_r_from_db(-4.0);
  cfg.angles = angle_for_squeezing(-6.0);
  auto quiet_cfg = cfg;
  quiet_cfg.alpha = InputSpec::vacuum();
  auto [fmu_loud, fnu_loud] = output_fidelities(run_sequence(cfg));
  auto [fmu_quiet, fnu_quiet] = output_fidelities(run_sequence(quiet_cfg));
  EXPECT_NEAR(fmu_loud, fmu_quiet, 1e-9);
  EXPECT_NEAR(fnu_loud, fnu_quiet, 1e-9);
}

TEST(ClassicalLimit, ClusterAlwaysWins) {
  for (double beta_db : {0.0, -4.0}) {
    for (double gate_db : {0.0, -3.0, -6.0, -9.0, -12.0}) {
      SequenceConfig cfg;
      if (beta_db < 0.0) cfg.beta = InputSpec::p_squeezed(beta_db);
      cfg.cluster_r = squeeze_r_from_db(-4.0);
      cfg.angles = angle_for_squeezing(gate_db);
      auto [fmu, fnu] = output_fidelities(run_sequence(cfg));
      auto [smu, snu] = classical_limit_fidelity(cfg);
      EXPECT_GT(fmu, smu) << "gate " << gate_db << " beta " << beta_db;
      EXPECT_GT(fnu, snu) << "gate " << gate_db << " beta " << beta_db;
    }
  }
}

TEST(ClassicalLimit, SubstituteEqualsZeroSqueezingCluster) {
  SequenceConfig cfg;
  cfg.beta = InputSpec::p_squeezed(-4.0);
  cfg.cluster_r = 0.0;
  cfg.angles = angle_for_squeezing(-12.0);
  auto [fmu_zero, fnu_zero] = output_fidelities(run_sequence(cfg));
  auto [fmu_sub, fnu_sub] = classical_limit_fidelity(cfg);
  EXPECT_NEAR(fmu_zero, fmu_sub, 1e-9);
  EXPECT_NEAR(fnu_zero, fnu_sub, 1e-9);
}

TEST(Metrics, EMonotoneOrderings) {
  // deeper gate squeezing, deeper control squeezing, deeper cluster
  // squeezing: each strictly improves E on the five-point grid
  const double gates[5] = {0.0, -3.0, -6.0, -9.0, -12.0};
  auto e_value = [](double gate_db, double beta_db, double cluster_db) {
    SequenceConfig cfg;
    if (beta_db < 0.0) cfg.beta = InputSpec::p_squeezed(beta_db);
    cfg.cluster_r = squeeze_r_from_db(cluster_db);
    cfg.angles = angle_for_squeezing(gate_db);
    auto out = run_sequence(cfg);
    double g = optimal_gain(cfg.cluster_r,
                            beta_db < 0.0 ? squeeze_r_from_db(beta_db) : 0.0,
                            cfg.angles.theta2);
    return entanglement_E(out, g);
  };
  for (double beta : {0.0, -4.0, -12.0}) {
    double prev = 1e9;
    for (double g : gates) {
      double e = e_value(g, beta, -4.0);
      EXPECT_LT(e, prev);
      prev = e;
    }
  }
  for (double g : gates) {
    EXPECT_LT(e_value(g, 0.0, -6.0), e_value(g, 0.0, -4.0));
    EXPECT_LT(e_value(g, -12.0, -4.0), e_value(g, -4.0, -4.0));
    EXPECT_LT(e_value(g, -4.0, -4.0), e_value(g, 0.0, -4.0));
  }
}

}  // namespace
}  // namespace cvseq
