#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "cvseq/cluster.hpp"
#include "cvseq/sequence.hpp"

namespace cvseq {

/// SplitMix64: tiny, portable, fully specified. One instance per shot keyed
/// by (seed, shot index), so results do not depend on worker count.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  static SplitMix64 for_shot(std::uint64_t seed, std::uint64_t shot) {
    SplitMix64 g(seed);
    std::uint64_t a = g.next();
    SplitMix64 h(a ^ (shot * 0x9E3779B97F4A7C15ULL));
    h.next();
    return h;
  }

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1].
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Box-Muller, two uniforms per draw (the sine partner is discarded so the
  /// draw count stays fixed).
  double next_gaussian() {
    double u1 = next_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

struct MCConfig {
  SequenceConfig sequence;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Empirical output statistics (x_mu, p_mu, x_nu, p_nu) with standard errors.
struct MCRun {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::array<double, 4> mean{};
  std::array<std::array<double, 4>, 4> cov{};
  std::array<double, 4> first_shot{};  // reproducibility probe

  double mean_se(int i) const { return std::sqrt(cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] / static_cast<double>(shots)); }
  double cov_se(int i, int j) const {
    auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
    double vii = cov[ii][ii], vjj = cov[jj][jj], cij = cov[ii][jj];
    return std::sqrt((vii * vjj + cij * cij) / static_cast<double>(shots));
  }
};

namespace detail {

struct ShotWorkspace {
  std::array<double, 8> x{}, p{};  // modes: alpha(0), C1..C6(1..6), beta(7)
};

/// Numeric mirror of the physical run: random homodyne outcomes, classical
/// displacement feedforward. The cluster is built by applying the
/// beam-splitter decomposition shot by shot, which keeps this path
/// independent of the analytic engine's direct matrix lift.
class ShotSampler {
 public:
  explicit ShotSampler(const SequenceConfig& cfg) : cfg_(cfg), ops_(u6_decomposition()) {
    theta2_ = cfg.angles.theta2;
    theta1_ = cfg.angles.theta1;
    csc_ = 1.0 / std::sin(theta2_);
    sec_ = 1.0 / std::cos(theta2_);
    r_beta_ = cfg.beta.kind == InputSpec::Kind::p_squeezed
                  ? squeeze_r_from_db(cfg.beta.squeeze_db)
                  : 0.0;
  }

  std::array<double, 4> sample(SplitMix64& rng) const {
    ShotWorkspace w;
    const auto& imp = cfg_.imperfections;
    // inputs
    sample_input(rng, cfg_.alpha, 0.0, &w.x[0], &w.p[0]);
    if (cfg_.ancilla == AncillaMode::cluster) {
      for (int k = 0; k < 6; ++k) {
        double r = cfg_.cluster_r;
        double sx = (k % 2 == 0) ? kVacuumSd * std::exp(-r) : kVacuumSd * std::exp(r);
        double sp = (k % 2 == 0) ? kVacuumSd * std::exp(r) : kVacuumSd * std::exp(-r);
        w.x[static_cast<std::size_t>(1 + k)] = sx * rng.next_gaussian();
        w.p[static_cast<std::size_t>(1 + k)] = sp * rng.next_gaussian();
      }
      if (imp.source_efficiency < 1.0)
        for (int k = 1; k <= 6; ++k) loss(rng, imp.source_efficiency, &w.x[static_cast<std::size_t>(k)], &w.p[static_cast<std::size_t>(k)]);
      // network applied right-to-left, input 6 phase-pinned by a half turn
      w.x[6] = -w.x[6];
      w.p[6] = -w.p[6];
      for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) apply_op(*it, &w);
    } else {
      for (int k = 1; k <= 6; ++k) {
        w.x[static_cast<std::size_t>(k)] = kVacuumSd * rng.next_gaussian();
        w.p[static_cast<std::size_t>(k)] = kVacuumSd * rng.next_gaussian();
      }
    }
    sample_input(rng, cfg_.beta, r_beta_, &w.x[7], &w.p[7]);
    if (cfg_.beta.kind == InputSpec::Kind::p_squeezed && imp.source_efficiency < 1.0)
      loss(rng, imp.source_efficiency, &w.x[7], &w.p[7]);

    // couplers: alpha slot -> d2, C1 slot -> d1; C6 rotated by -90 first
    mix(&w.x[0], &w.x[1]);
    mix(&w.p[0], &w.p[1]);
    rot(-M_PI / 2.0, &w.x[6], &w.p[6]);
    mix(&w.x[7], &w.x[6]);
    mix(&w.p[7], &w.p[6]);

    if (imp.detector_efficiency < 1.0)
      for (int m : {1, 0, 2, 3, 6, 7})
        loss(rng, imp.detector_efficiency, &w.x[static_cast<std::size_t>(m)], &w.p[static_cast<std::size_t>(m)]);

    auto homodyne = [&](int m, double angle) {
      double a = angle;
      if (imp.phase_jitter_sd > 0.0) a += imp.phase_jitter_sd * rng.next_gaussian();
      auto mm = static_cast<std::size_t>(m);
      return std::cos(a) * w.x[mm] + std::sin(a) * w.p[mm];
    };
    double o_d1 = homodyne(1, theta1_);
    double o_d2 = homodyne(0, theta2_);
    double o_p2 = homodyne(2, M_PI / 2.0);
    double o_p3 = homodyne(3, M_PI / 2.0);
    double o_d3 = homodyne(6, 0.0);
    double o_d4 = homodyne(7, M_PI / 2.0);

    const double rt2 = std::sqrt(2.0);
    double f1 = -o_p3 + csc_ / rt2 * (o_d1 + o_d2);
    double f2 = -o_p2 + rt2 * o_d3 - sec_ / rt2 * o_d1 + sec_ / rt2 * o_d2;
    double f3 = rt2 * o_d3;
    double f4 = -o_p3 + rt2 * o_d4 + csc_ / rt2 * (o_d1 + o_d2);
    w.x[4] += f1;
    w.p[4] += f2;
    w.x[5] += f3;
    w.p[5] += f4;

    for (int m : {4, 5}) {
      auto mm = static_cast<std::size_t>(m);
      if (imp.detector_efficiency < 1.0) loss(rng, imp.detector_efficiency, &w.x[mm], &w.p[mm]);
      if (imp.phase_jitter_sd > 0.0) {
        double e = imp.phase_jitter_sd * rng.next_gaussian();
        rot(e, &w.x[mm], &w.p[mm]);
      }
    }
    return {w.x[4], w.p[4], w.x[5], w.p[5]};
  }

 private:
  static void mix(double* qa, double* qb) {
    // 50% mirror splitter: slot a -> (a+b)/sqrt2, slot b -> (a-b)/sqrt2
    double a = *qa, b = *qb;
    const double inv = 1.0 / std::sqrt(2.0);
    *qa = (a + b) * inv;
    *qb = (a - b) * inv;
  }

  static void rot(double phi, double* x, double* p) {
    double c = std::cos(phi), s = std::sin(phi);
    double nx = c * *x - s * *p;
    double np = s * *x + c * *p;
    *x = nx;
    *p = np;
  }

  static void loss(SplitMix64& rng, double eta, double* x, double* p) {
    double t = std::sqrt(eta), c = std::sqrt(1.0 - eta);
    *x = t * *x + c * kVacuumSd * rng.next_gaussian();
    *p = t * *p + c * kVacuumSd * rng.next_gaussian();
  }

  void apply_op(const ElementaryOp& op, ShotWorkspace* w) const {
    switch (op.kind) {
      case ElementaryOp::Kind::fourier: {
        auto m = static_cast<std::size_t>(1 + op.mode);
        rot(M_PI / 2.0, &w->x[m], &w->p[m]);
        break;
      }
      case ElementaryOp::Kind::half_turn: {
        auto m = static_cast<std::size_t>(1 + op.mode);
        w->x[m] = -w->x[m];
        w->p[m] = -w->p[m];
        break;
      }
      case ElementaryOp::Kind::splitter: {
        Eigen::Matrix2d b = op.bs.mode_map();
        auto k = static_cast<std::size_t>(1 + op.bs.mode_k);
        auto l = static_cast<std::size_t>(1 + op.bs.mode_l);
        double xk = w->x[k], xl = w->x[l], pk = w->p[k], pl = w->p[l];
        w->x[k] = b(0, 0) * xk + b(0, 1) * xl;
        w->x[l] = b(1, 0) * xk + b(1, 1) * xl;
        w->p[k] = b(0, 0) * pk + b(0, 1) * pl;
        w->p[l] = b(1, 0) * pk + b(1, 1) * pl;
        break;
      }
    }
  }

  void sample_input(SplitMix64& rng, const InputSpec& in, double r, double* x,
                    double* p) const {
    switch (in.kind) {
      case InputSpec::Kind::vacuum:
        *x = kVacuumSd * rng.next_gaussian();
        *p = kVacuumSd * rng.next_gaussian();
        break;
      case InputSpec::Kind::p_squeezed:
        *x = kVacuumSd * std::exp(r) * rng.next_gaussian();
        *p = kVacuumSd * std::exp(-r) * rng.next_gaussian();
        break;
      case InputSpec::Kind::coherent:
        *x = kVacuumSd * rng.next_gaussian();
        *p = kVacuumSd * rng.next_gaussian();
        (in.axis == Quad::x ? *x : *p) += in.mean_amplitude();
        break;
    }
  }

  SequenceConfig cfg_;
  std::vector<ElementaryOp> ops_;
  double theta1_ = 0.0, theta2_ = 0.0, csc_ = 0.0, sec_ = 0.0, r_beta_ = 0.0;
};

struct BlockMoments {
  std::array<double, 4> sum{};
  std::array<std::array<double, 4>, 4> sumsq{};
  std::array<double, 4> first{};
  bool has_first = false;

  void add(const std::array<double, 4>& v) {
    if (!has_first) {
      first = v;
      has_first = true;
    }
    for (int i = 0; i < 4; ++i) {
      auto ii = static_cast<std::size_t>(i);
      sum[ii] += v[ii];
      for (int j = i; j < 4; ++j)
        sumsq[ii][static_cast<std::size_t>(j)] += v[ii] * v[static_cast<std::size_t>(j)];
    }
  }
};

}  // namespace detail

/// Shot-sampling oracle. Deterministic for a fixed seed regardless of thread
/// count: per-shot RNG streams plus block-ordered reduction.
inline MCRun mc_run(const MCConfig& cfg) {
  if (cfg.shots < 1) throw std::invalid_argument("shot count must be >= 1");
  detail::ShotSampler sampler(cfg.sequence);

  constexpr std::uint64_t kBlock = 8192;
  std::uint64_t nblocks = (cfg.shots + kBlock - 1) / kBlock;
  std::vector<detail::BlockMoments> blocks(nblocks);

  std::atomic<std::uint64_t> next_block{0};
  auto worker = [&]() {
    for (;;) {
      std::uint64_t b = next_block.fetch_add(1);
      if (b >= nblocks) return;
      std::uint64_t lo = b * kBlock;
      std::uint64_t hi = std::min(cfg.shots, lo + kBlock);
      for (std::uint64_t s = lo; s < hi; ++s) {
        SplitMix64 rng = SplitMix64::for_shot(cfg.seed, s);
        blocks[b].add(sampler.sample(rng));
      }
    }
  };
  int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  detail::BlockMoments total;
  for (const auto& b : blocks) {
    if (!total.has_first && b.has_first) {
      total.first = b.first;
      total.has_first = true;
    }
    for (int i = 0; i < 4; ++i) {
      auto ii = static_cast<std::size_t>(i);
      total.sum[ii] += b.sum[ii];
      for (int j = i; j < 4; ++j)
        total.sumsq[ii][static_cast<std::size_t>(j)] += b.sumsq[ii][static_cast<std::size_t>(j)];
    }
  }

  MCRun run;
  run.shots = cfg.shots;
  run.seed = cfg.seed;
  run.first_shot = total.first;
  double n = static_cast<double>(cfg.shots);
  for (int i = 0; i < 4; ++i) run.mean[static_cast<std::size_t>(i)] = total.sum[static_cast<std::size_t>(i)] / n;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      double c = total.sumsq[ii][jj] / n - run.mean[ii] * run.mean[jj];
      run.cov[ii][jj] = c;
      run.cov[jj][ii] = c;
    }
  return run;
}

/// Worst z-score of the MC run against the analytic engine, over the four
/// means and the ten distinct second moments.
struct MCComparison {
  double worst_mean_z = 0.0;
  double worst_cov_z = 0.0;
  bool within(double z) const { return worst_mean_z <= z && worst_cov_z <= z; }
};

inline MCComparison compare_mc(const MCRun& mc, const SequenceOutput& analytic) {
  const QuadExpr* qs[4] = {&analytic.x_mu(), &analytic.p_mu(), &analytic.x_nu(),
                           &analytic.p_nu()};
  MCComparison c;
  for (int i = 0; i < 4; ++i) {
    auto ii = static_cast<std::size_t>(i);
    double se = mc.mean_se(i);
    double z = std::abs(mc.mean[ii] - qs[i]->mean()) / se;
    c.worst_mean_z = std::max(c.worst_mean_z, z);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      double a = analytic.state.covariance(*qs[i], *qs[j]);
      double z = std::abs(mc.cov[ii][jj] - a) / mc.cov_se(i, j);
      c.worst_cov_z = std::max(c.worst_cov_z, z);
    }
  return c;
}

}  // namespace cvseq
