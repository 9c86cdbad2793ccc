#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cvseq/metrics.hpp"
#include "cvseq/monte_carlo.hpp"

namespace cvseq {
namespace {

SequenceConfig point_e() {
  SequenceConfig cfg;
  cfg.cluster_r = squeeze_r_from_db(-4.0);
  cfg.angles = angle_for_squeezing(-12.0);
  return cfg;
}

SequenceConfig point_j() {
  SequenceConfig cfg = point_e();
  cfg.beta = InputSpec::p_squeezed(-4.0);
  return cfg;
}

TEST(SplitMix, KnownStream) {
  SplitMix64 g(0);
  EXPECT_EQ(g.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g.next(), 0x6E789E6AA1B965F4ULL);
  SplitMix64 h(0);
  double u = h.next_unit();
  EXPECT_GT(u, 0.0);
  EXPECT_LE(u, 1.0);
}

TEST(McRun, FixedSeedIsReproducible) {
  MCConfig cfg;
  cfg.sequence = point_e();
  cfg.shots = 1;
  cfg.seed = 42;
  MCRun a = mc_run(cfg);
  MCRun b = mc_run(cfg);
  EXPECT_EQ(a.first_shot, b.first_shot);
  EXPECT_EQ(a.mean, b.mean);
}

TEST(McRun, ThreadCountDoesNotChangeResults) {
  MCConfig cfg;
  cfg.sequence = point_j();
  cfg.shots = 20000;
  cfg.seed = 7;
  cfg.threads = 1;
  MCRun a = mc_run(cfg);
  cfg.threads = 3;
  MCRun b = mc_run(cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.cov, b.cov);
}

TEST(McRun, DifferentSeedsDiffer) {
  MCConfig cfg;
  cfg.sequence = point_e();
  cfg.shots = 8;
  cfg.seed = 1;
  MCRun a = mc_run(cfg);
  cfg.seed = 2;
  MCRun b = mc_run(cfg);
  EXPECT_NE(a.first_shot, b.first_shot);
}

TEST(McRun, AgreesWithAnalyticEngineAtPointE) {
  MCConfig cfg;
  cfg.sequence = point_e();
  cfg.shots = 200000;
  cfg.seed = 11;
  cfg.threads = 2;
  auto cmp = compare_mc(mc_run(cfg), run_sequence(cfg.sequence));
  EXPECT_TRUE(cmp.within(5.0)) << "mean z " << cmp.worst_mean_z << " cov z "
                               << cmp.worst_cov_z;
}

TEST(McRun, AgreesWithAnalyticEngineAtPointJ) {
  MCConfig cfg;
  cfg.sequence = point_j();
  cfg.shots = 200000;
  cfg.seed = 12;
  cfg.threads = 2;
  auto cmp = compare_mc(mc_run(cfg), run_sequence(cfg.sequence));
  EXPECT_TRUE(cmp.within(5.0)) << "mean z " << cmp.worst_mean_z << " cov z "
                               << cmp.worst_cov_z;
}

TEST(McRun, AgreesWithAnalyticEngineUnderLoss) {
  MCConfig cfg;
  cfg.sequence = point_j();
  cfg.sequence.imperfections = ImperfectionSpec::default_loss();
  cfg.sequence.imperfections.detector_efficiency = 0.95;
  cfg.shots = 200000;
  cfg.seed = 13;
  cfg.threads = 2;
  auto cmp = compare_mc(mc_run(cfg), run_sequence(cfg.sequence));
  EXPECT_TRUE(cmp.within(5.0)) << "mean z " << cmp.worst_mean_z << " cov z "
                               << cmp.worst_cov_z;
}

TEST(McRun, CoherentSignalPower) {
  MCConfig cfg;
  cfg.sequence = point_e();
  cfg.sequence.alpha = InputSpec::coherent(Quad::x, 15.0);
  cfg.shots = 400000;
  cfg.seed = 21;
  cfg.threads = 2;
  MCRun run = mc_run(cfg);
  double x_mu_power = 10.0 * std::log10(run.mean[0] * run.mean[0] / kVacuumVariance);
  double p_nu_power = 10.0 * std::log10(run.mean[3] * run.mean[3] / kVacuumVariance);
  EXPECT_NEAR(x_mu_power, 27.0, 0.1);
  EXPECT_NEAR(p_nu_power, 27.0, 0.1);
}

TEST(McRun, SubstituteAncillaMatchesAnalytic) {
  MCConfig cfg;
  cfg.sequence = point_j();
  cfg.sequence.ancilla = AncillaMode::coherent_substitute;
  cfg.shots = 150000;
  cfg.seed = 31;
  auto cmp = compare_mc(mc_run(cfg), run_sequence(cfg.sequence));
  EXPECT_TRUE(cmp.within(5.0)) << "mean z " << cmp.worst_mean_z << " cov z "
                               << cmp.worst_cov_z;
}

TEST(McRun, JitterCorrectionTracksShotSampling) {
  // Jitter drags the two quadrature variances of a detected mode toward
  // each other. x_nu has the positive contrast at this working point, so
  // its noise must rise, and the corrected analytic value must sit closer
  // to the MC result than the uncorrected one.
  MCConfig cfg;
  cfg.sequence = point_j();
  cfg.sequence.imperfections.phase_jitter_sd = 2.5 * M_PI / 180.0;
  cfg.shots = 400000;
  cfg.seed = 41;
  cfg.threads = 2;
  MCRun run = mc_run(cfg);

  auto raw_out = run_sequence(point_j());
  auto corrected = cfg.sequence;
  corrected.imperfections.analytic_jitter = true;
  auto corr_out = run_sequence(corrected);

  double raw = raw_out.variance(raw_out.x_nu());
  double corr = corr_out.output_variance(1, Quad::x);
  EXPECT_GT(corr, raw);
  EXPECT_GT(run.cov[2][2], raw + 0.002);
  EXPECT_LT(std::abs(run.cov[2][2] - corr), std::abs(run.cov[2][2] - raw));
}

TEST(McRun, AgreementHoldsAcrossRandomConfigurations) {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> gate(-14.0, -0.5);
  std::uniform_real_distribution<double> cluster(-8.0, -1.0);
  std::uniform_real_distribution<double> beta(-8.0, 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    SequenceConfig cfg;
    cfg.cluster_r = squeeze_r_from_db(cluster(rng));
    cfg.angles = angle_for_squeezing(gate(rng));
    if (unit(rng) < 0.5) cfg.beta = InputSpec::p_squeezed(beta(rng) - 0.1);
    if (unit(rng) < 0.3) cfg.alpha = InputSpec::coherent(Quad::p, 10.0);
    if (unit(rng) < 0.3) cfg.ancilla = AncillaMode::coherent_substitute;
    if (unit(rng) < 0.5) {
      cfg.imperfections.source_efficiency = 0.85 + 0.15 * unit(rng);
      cfg.imperfections.detector_efficiency = 0.85 + 0.15 * unit(rng);
    }
    MCConfig mcfg;
    mcfg.sequence = cfg;
    mcfg.shots = 60000;
    mcfg.seed = 1000 + static_cast<std::uint64_t>(trial);
    auto cmp = compare_mc(mc_run(mcfg), run_sequence(cfg));
    EXPECT_TRUE(cmp.within(5.0))
        << "trial " << trial << " mean z " << cmp.worst_mean_z << " cov z "
        << cmp.worst_cov_z;
  }
}

TEST(McRun, RejectsZeroShots) {
  MCConfig cfg;
  cfg.sequence = point_e();
  cfg.shots = 0;
  EXPECT_THROW(mc_run(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace cvseq
