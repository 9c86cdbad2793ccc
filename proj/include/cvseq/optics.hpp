#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cvseq/core.hpp"

namespace cvseq {

/// Real beam splitter acting identically on the x and p pairs of modes
/// (k, l). Mode map, rows = (out_k, out_l):
///
///     [  sqrt(T)       sqrt(1-T) ]
///     [ s*sqrt(1-T)   -s*sqrt(T) ]      s = +1 or -1
///
/// T is the straight-through power fraction: each port keeps sqrt(T) of
/// itself. Orthogonal for any T, so all-vacuum inputs stay at vacuum noise.
struct BeamSplitterSpec {
  double transmission = 0.5;
  int sign = +1;  // +1 or -1
  int mode_k = 0;
  int mode_l = 1;

  Eigen::Matrix2d mode_map() const {
    if (transmission < 0.0 || transmission > 1.0)
      throw std::invalid_argument("beam splitter transmission outside [0,1]");
    if (sign != 1 && sign != -1)
      throw std::invalid_argument("beam splitter sign must be +1 or -1");
    double t = std::sqrt(transmission);
    double c = std::sqrt(1.0 - transmission);
    Eigen::Matrix2d m;
    m << t, c, sign * c, -sign * t;
    return m;
  }
};

/// Imperfection model for lossy runs. Efficiencies are power transmissions;
/// 1 everywhere reproduces the lossless engine bit for bit.
///
/// source_efficiency acts once per squeezed resource beam at injection
/// (the six cluster inputs and a squeezed control input); detector_efficiency
/// acts on every detected mode just before its homodyne. Phase jitter is
/// modeled per shot in the Monte-Carlo path; the analytic engine applies an
/// optional variance-level correction to the two output modes only.
struct ImperfectionSpec {
  double source_efficiency = 1.0;
  double detector_efficiency = 1.0;
  double phase_jitter_sd = 0.0;  // radians
  bool analytic_jitter = false;

  static ImperfectionSpec lossless() { return {}; }

  /// Path (96%), photodiode (95%) and interference (99%) efficiencies folded
  /// into one per-beam factor.
  static ImperfectionSpec default_loss() {
    ImperfectionSpec s;
    s.source_efficiency = 0.96 * 0.95 * 0.99;
    return s;
  }

  bool is_lossless() const {
    return source_efficiency >= 1.0 && detector_efficiency >= 1.0 &&
           phase_jitter_sd == 0.0;
  }
};

/// Phase-space rotation: x' = x cos(phi) - p sin(phi), p' = x sin(phi) + p cos(phi).
/// phi = pi/2 is the Fourier gate, phi = pi the 180-degree flip.
inline void rotate(GaussianState& s, int mode, double phi) {
  QuadExpr x = s.x(mode), p = s.p(mode);
  double c = std::cos(phi), sn = std::sin(phi);
  s.x(mode) = x * c - p * sn;
  s.p(mode) = x * sn + p * c;
}

/// x' = e^{r_s} x, p' = e^{-r_s} p. Unit-determinant map; r_s > 0 squeezes
/// the phase quadrature.
inline void squeeze(GaussianState& s, int mode, double r_s) {
  s.x(mode) *= std::exp(r_s);
  s.p(mode) *= std::exp(-r_s);
}

inline void beam_splitter(GaussianState& s, const BeamSplitterSpec& spec) {
  if (spec.mode_k == spec.mode_l)
    throw std::invalid_argument("beam splitter needs two distinct modes");
  Eigen::Matrix2d m = spec.mode_map();
  QuadExpr xk = s.x(spec.mode_k), xl = s.x(spec.mode_l);
  QuadExpr pk = s.p(spec.mode_k), pl = s.p(spec.mode_l);
  s.x(spec.mode_k) = xk * m(0, 0) + xl * m(0, 1);
  s.x(spec.mode_l) = xk * m(1, 0) + xl * m(1, 1);
  s.p(spec.mode_k) = pk * m(0, 0) + pl * m(0, 1);
  s.p(spec.mode_l) = pk * m(1, 0) + pl * m(1, 1);
}

/// Controlled-phase coupling e^{2i x_j x_k}: each mode's amplitude feeds the
/// other's phase, amplitudes unchanged.
inline void cz(GaussianState& s, int j, int k) {
  if (j == k) throw std::invalid_argument("cz needs two distinct modes");
  s.p(j) += s.x(k);
  s.p(k) += s.x(j);
}

inline void cz_inverse(GaussianState& s, int j, int k) {
  if (j == k) throw std::invalid_argument("cz needs two distinct modes");
  s.p(j) -= s.x(k);
  s.p(k) -= s.x(j);
}

/// Classical displacement of one quadrature's mean. Never touches noise.
inline void displace(GaussianState& s, int mode, Quad axis, double amount) {
  QuadExpr& q = axis == Quad::x ? s.x(mode) : s.p(mode);
  q.set_mean(q.mean() + amount);
}

/// Mixes the mode with a fresh vacuum on a virtual eta-transmission port:
/// q' = sqrt(eta) q + sqrt(1-eta) q_vac, means scaled by sqrt(eta).
inline void apply_loss(GaussianState& s, int mode, double eta) {
  if (eta <= 0.0 || eta > 1.0)
    throw std::invalid_argument("loss efficiency must lie in (0, 1]");
  if (eta == 1.0) return;
  int anc = s.basis().add(SqueezeKind::vacuum, 0.0);
  double t = std::sqrt(eta), c = std::sqrt(1.0 - eta);
  s.x(mode) *= t;
  s.x(mode) += QuadExpr::term(anc, Quad::x, c);
  s.p(mode) *= t;
  s.p(mode) += QuadExpr::term(anc, Quad::p, c);
}

}  // namespace cvseq
