#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "cvseq/sequence.hpp"

namespace cvseq {

/// Closed-form optimal gain for the two-mode inseparability check, vacuum
/// target input and p-squeezed (or vacuum) control input:
///
///   g = (2 + e^{2 r_b} + cot^2 t2 + 3 e^{-2r})
///       / (tan^2 t2 + cot^2 t2 + e^{2 r_b} + e^{-2 r_b} + 8 e^{-2r})
///
/// This is the argmin of E(g) = V1(g) + V2(g) - g, not of the bare sum.
inline double optimal_gain(double r, double r_beta, double theta2) {
  if (theta2 <= 0.0 || theta2 >= M_PI / 2.0)
    throw std::invalid_argument("theta2 must lie in (0, 90) degrees");
  double t2 = std::tan(theta2) * std::tan(theta2);
  double c2 = 1.0 / t2;
  double eb = std::exp(2.0 * r_beta);
  double k = std::exp(-2.0 * r);
  return (2.0 + eb + c2 + 3.0 * k) / (t2 + c2 + eb + 1.0 / eb + 8.0 * k);
}

inline double entanglement_E(const SequenceOutput& out, double g) {
  if (g <= 0.0) throw std::invalid_argument("gain must be positive");
  double v1 = out.variance(out.p_mu() * g - out.x_nu());
  double v2 = out.variance(out.p_nu() * g - out.x_mu());
  return v1 + v2 - g;
}

/// Golden-section minimization of E(g) over g > 0; cross-validates the
/// closed form on lossless runs and extends it to lossy ones.
inline double optimal_gain_numeric(const SequenceOutput& out) {
  if (out.variance(out.p_mu()) <= 0.0 || out.variance(out.p_nu()) <= 0.0)
    throw std::invalid_argument("degenerate zero-variance output");
  auto f = [&](double g) { return entanglement_E(out, g); };
  double lo = 1e-4, hi = 16.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Two-mode inseparability verdict at gain g. Each correlation variance is
/// also reported in dB relative to its own combination shot noise
/// (g^2 + 1)/4; the pass condition is V1 + V2 < g in absolute units.
struct DuanReport {
  double v1 = 0.0, v2 = 0.0;
  double snl = 0.0;
  double v1_db = 0.0, v2_db = 0.0;
  double boundary = 0.0;
  bool pass = false;
};

inline DuanReport duan_check(const SequenceOutput& out, double g) {
  if (g <= 0.0) throw std::invalid_argument("gain must be positive");
  DuanReport r;
  r.v1 = out.variance(out.p_mu() * g - out.x_nu());
  r.v2 = out.variance(out.p_nu() * g - out.x_mu());
  r.snl = (g * g + 1.0) * kVacuumVariance;
  r.v1_db = 10.0 * std::log10(r.v1 / r.snl);
  r.v2_db = 10.0 * std::log10(r.v2 / r.snl);
  r.boundary = g;
  r.pass = r.v1 + r.v2 < g;
  return r;
}

/// Covariance matrices normalized so vacuum = 1 (a factor 4 on this
/// engine's 1/4-variance units) plus the mean difference in matching units.
struct FidelityInputs {
  Eigen::Matrix2d a1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d a2 = Eigen::Matrix2d::Identity();
  Eigen::Vector2d mean_diff = Eigen::Vector2d::Zero();
};

/// F = 2 / (sqrt(Delta + sigma) - sqrt(sigma)) * exp(-eps^T (A1+A2)^{-1} eps)
/// with Delta = det(A1+A2), sigma = (det A1 - 1)(det A2 - 1).
inline double gaussian_fidelity(const FidelityInputs& fi) {
  Eigen::Matrix2d sum = fi.a1 + fi.a2;
  double delta = sum.determinant();
  if (std::abs(delta) < 1e-300)
    throw std::invalid_argument("A1 + A2 is singular");
  double sigma = (fi.a1.determinant() - 1.0) * (fi.a2.determinant() - 1.0);
  if (sigma < 0.0) {
    if (sigma < -1e-9) throw std::invalid_argument("unphysical covariance (det < 1)");
    sigma = 0.0;
  }
  double expo = fi.mean_diff.dot(sum.inverse() * fi.mean_diff);
  return 2.0 / (std::sqrt(delta + sigma) - std::sqrt(sigma)) * std::exp(-expo);
}

/// SNL-normalized 2x2 covariance of one mode, off-diagonal kept whenever the
/// x-p correlation survives (the diagonal form is a special case).
inline Eigen::Matrix2d fidelity_covariance(const GaussianState& s, int mode) {
  Eigen::Matrix2d a;
  double vx = s.variance(s.x(mode));
  double vp = s.variance(s.p(mode));
  double cxp = s.covariance(s.x(mode), s.p(mode));
  if (std::abs(cxp) < 1e-12 * std::max(vx, vp)) cxp = 0.0;
  a << 4.0 * vx, 4.0 * cxp, 4.0 * cxp, 4.0 * vp;
  return a;
}

inline Eigen::Vector2d fidelity_mean(const GaussianState& s, int mode) {
  // variance x4 <=> amplitude x2
  return {2.0 * s.x(mode).mean(), 2.0 * s.p(mode).mean()};
}

/// (F_mu, F_nu) of a finished run against its own noiseless reference.
/// Output covariances and means go through the run's jitter correction when
/// that is enabled.
inline std::pair<double, double> output_fidelities(const SequenceOutput& out) {
  GaussianState ideal = ideal_reference(out.config);
  auto one = [&](int mode) {
    FidelityInputs fi;
    fi.a1 = fidelity_covariance(ideal, mode);
    Eigen::Matrix2d c = out.output_covariance(mode);
    if (std::abs(c(0, 1)) < 1e-12 * std::max(c(0, 0), c(1, 1))) {
      c(0, 1) = 0.0;
      c(1, 0) = 0.0;
    }
    fi.a2 = 4.0 * c;
    fi.mean_diff = 2.0 * out.output_mean(mode) - fidelity_mean(ideal, mode);
    return gaussian_fidelity(fi);
  };
  return {one(0), one(1)};
}

/// Classical benchmark: the same configuration run with every cluster
/// submode replaced by vacuum-noise light.
inline std::pair<double, double> classical_limit_fidelity(SequenceConfig cfg) {
  cfg.ancilla = AncillaMode::coherent_substitute;
  return output_fidelities(run_sequence(cfg));
}

}  // namespace cvseq
