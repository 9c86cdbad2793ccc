#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "cvseq/cluster.hpp"
#include "cvseq/core.hpp"
#include "cvseq/optics.hpp"

namespace cvseq {

/// One gate-sequence input beam.
struct InputSpec {
  enum class Kind { vacuum, p_squeezed, coherent };

  Kind kind = Kind::vacuum;
  double squeeze_db = 0.0;     // <= 0 by CLI convention; magnitude used
  Quad axis = Quad::x;         // coherent only
  double modulation_db = 0.0;  // coherent only, >= 0

  static InputSpec vacuum() { return {}; }

  static InputSpec p_squeezed(double db) {
    InputSpec s;
    s.kind = Kind::p_squeezed;
    s.squeeze_db = db;
    return s;
  }

  static InputSpec coherent(Quad axis, double modulation_db) {
    if (modulation_db < 0.0)
      throw std::invalid_argument("coherent modulation must be >= 0 dB");
    InputSpec s;
    s.kind = Kind::coherent;
    s.axis = axis;
    s.modulation_db = modulation_db;
    return s;
  }

  /// Mean amplitude giving mean^2 / (1/4) = 10^{modulation_db/10}.
  double mean_amplitude() const {
    return kVacuumSd * std::pow(10.0, modulation_db / 20.0);
  }
};

/// Homodyne angles of the two squeezing-gate detectors; theta1 = -theta2.
struct MeasurementAngles {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Angles implementing a phase-squeezing gate of the given depth:
/// tan(theta2) = 10^{db/20} so that cot(theta2) = e^{r_s}.
inline MeasurementAngles angle_for_squeezing(double db) {
  if (db > 0.0)
    throw std::invalid_argument("squeezing gate depth must be <= 0 dB");
  double theta2 = std::atan(std::pow(10.0, db / 20.0));
  return {-theta2, theta2};
}

enum class AncillaMode { cluster, coherent_substitute };

struct SequenceConfig {
  InputSpec alpha = InputSpec::vacuum();
  InputSpec beta = InputSpec::vacuum();
  double cluster_r = 0.0;
  MeasurementAngles angles = angle_for_squeezing(0.0);
  ImperfectionSpec imperfections = ImperfectionSpec::lossless();
  AncillaMode ancilla = AncillaMode::cluster;
};

/// The two surviving modes after the gate sequence, with the six measured
/// observables kept for audit. Mode 0 is mu (target), mode 1 is nu (control).
struct SequenceOutput {
  GaussianState state;
  std::array<QuadExpr, 6> observables{};  // o_d1, o_d2, p_2, p_3, x_d3, p_d4
  std::array<int, 6> cluster_basis{};
  int alpha_basis = -1;
  int beta_basis = -1;
  SequenceConfig config;

  const QuadExpr& x_mu() const { return state.x(0); }
  const QuadExpr& p_mu() const { return state.p(0); }
  const QuadExpr& x_nu() const { return state.x(1); }
  const QuadExpr& p_nu() const { return state.p(1); }

  double variance(const QuadExpr& e) const { return state.variance(e); }

  bool jitter_correction_active() const {
    return config.imperfections.analytic_jitter &&
           config.imperfections.phase_jitter_sd > 0.0;
  }

  /// 2x2 covariance of one output mode in engine units. With the analytic
  /// jitter correction enabled this is the Gaussian average over a random
  /// rotation of the detected mode: the diagonals mix by
  /// (1 - e^{-2 sigma^2})/2 and the x-p covariance scales by e^{-2 sigma^2}.
  Eigen::Matrix2d output_covariance(int mode) const {
    double vx = state.variance(state.x(mode));
    double vp = state.variance(state.p(mode));
    double cxp = state.covariance(state.x(mode), state.p(mode));
    if (jitter_correction_active()) {
      double sd = config.imperfections.phase_jitter_sd;
      double damp = std::exp(-2.0 * sd * sd);
      double s2 = 0.5 * (1.0 - damp);
      double nvx = vx + (vp - vx) * s2;
      double nvp = vp + (vx - vp) * s2;
      vx = nvx;
      vp = nvp;
      cxp *= damp;
    }
    Eigen::Matrix2d m;
    m << vx, cxp, cxp, vp;
    return m;
  }

  /// Mean quadrature vector of one output mode; jitter attenuates means by
  /// e^{-sigma^2/2}.
  Eigen::Vector2d output_mean(int mode) const {
    Eigen::Vector2d m{state.x(mode).mean(), state.p(mode).mean()};
    if (jitter_correction_active()) {
      double sd = config.imperfections.phase_jitter_sd;
      m *= std::exp(-0.5 * sd * sd);
    }
    return m;
  }

  double output_variance(int mode, Quad q) const {
    return output_covariance(mode)(static_cast<int>(q), static_cast<int>(q));
  }

  /// Noise level relative to the output detector's shot noise (vacuum = 1/4).
  double output_db(int mode, Quad q) const {
    return db_above_vacuum(output_variance(mode, q));
  }

  std::array<double, 4> output_levels_db() const {
    return {output_db(0, Quad::x), output_db(0, Quad::p),
            output_db(1, Quad::x), output_db(1, Quad::p)};
  }
};

namespace detail {

inline int add_input_mode(GaussianState& s, const InputSpec& in, int* basis_id) {
  *basis_id = static_cast<int>(s.basis().size());
  int mode;
  switch (in.kind) {
    case InputSpec::Kind::vacuum:
      mode = s.add_mode(SqueezeKind::vacuum, 0.0);
      break;
    case InputSpec::Kind::p_squeezed:
      mode = s.add_mode(SqueezeKind::p_squeezed, squeeze_r_from_db(in.squeeze_db));
      break;
    case InputSpec::Kind::coherent:
      mode = s.add_mode(SqueezeKind::vacuum, 0.0);
      displace(s, mode, in.axis, in.mean_amplitude());
      break;
  }
  return mode;
}

}  // namespace detail

/// Runs the full measurement-based sequence: couples alpha to C1 and beta to
/// C6 on 50% splitters, measures the six observables, and realizes the
/// feedforward as exact operator substitution -- the G-weighted measured
/// expressions are added onto C4 and C5, which survive as mu and nu.
inline SequenceOutput run_sequence(const SequenceConfig& cfg) {
  double theta2 = cfg.angles.theta2;
  double theta1 = cfg.angles.theta1;
  if (std::abs(std::sin(theta2)) < 1e-12 || std::abs(std::cos(theta2)) < 1e-12)
    throw std::invalid_argument("theta2 makes the feedforward gains singular");
  const auto& imp = cfg.imperfections;

  GaussianState s;
  SequenceOutput out;
  int alpha = detail::add_input_mode(s, cfg.alpha, &out.alpha_basis);

  std::array<int, 6> cl{};
  if (cfg.ancilla == AncillaMode::cluster) {
    std::array<double, 6> r;
    r.fill(cfg.cluster_r);
    out.cluster_basis = prepare_cluster_into(s, 1, r, imp.source_efficiency);
  } else {
    // Classical benchmark: every cluster submode replaced by vacuum-noise light.
    for (int k = 0; k < 6; ++k) {
      out.cluster_basis[static_cast<std::size_t>(k)] = static_cast<int>(s.basis().size());
      s.add_mode(SqueezeKind::vacuum, 0.0);
    }
  }
  for (int k = 0; k < 6; ++k) cl[static_cast<std::size_t>(k)] = 1 + k;

  int beta = detail::add_input_mode(s, cfg.beta, &out.beta_basis);
  if (cfg.beta.kind == InputSpec::Kind::p_squeezed && imp.source_efficiency < 1.0)
    apply_loss(s, beta, imp.source_efficiency);

  const int C1 = cl[0], C2 = cl[1], C3 = cl[2], C4 = cl[3], C5 = cl[4], C6 = cl[5];

  // Input couplers. Port map of the 50% splitter: the alpha slot carries
  // (alpha + C1)/sqrt2 = d2 and the C1 slot (alpha - C1)/sqrt2 = d1; the
  // control side couples to C6 rotated by -90 degrees so that
  // x_d3 = (x_beta - p_6)/sqrt2 and p_d4 = (p_beta - x_6)/sqrt2.
  beam_splitter(s, BeamSplitterSpec{0.5, +1, alpha, C1});
  rotate(s, C6, -M_PI / 2.0);
  beam_splitter(s, BeamSplitterSpec{0.5, +1, beta, C6});

  if (imp.detector_efficiency < 1.0)
    for (int m : {C1, alpha, C2, C3, C6, beta})
      apply_loss(s, m, imp.detector_efficiency);

  QuadExpr o_d1 = s.x(C1) * std::cos(theta1) + s.p(C1) * std::sin(theta1);
  QuadExpr o_d2 = s.x(alpha) * std::cos(theta2) + s.p(alpha) * std::sin(theta2);
  QuadExpr o_p2 = s.p(C2);
  QuadExpr o_p3 = s.p(C3);
  QuadExpr o_d3 = s.x(C6);
  QuadExpr o_d4 = s.p(beta);
  out.observables = {o_d1, o_d2, o_p2, o_p3, o_d3, o_d4};

  double csc = 1.0 / std::sin(theta2);
  double sec = 1.0 / std::cos(theta2);
  const double rt2 = std::sqrt(2.0);

  QuadExpr f1 = -o_p3 + (o_d1 + o_d2) * (csc / rt2);
  QuadExpr f2 = -o_p2 + o_d3 * rt2 - o_d1 * (sec / rt2) + o_d2 * (sec / rt2);
  QuadExpr f3 = o_d3 * rt2;
  QuadExpr f4 = -o_p3 + o_d4 * rt2 + (o_d1 + o_d2) * (csc / rt2);

  s.x(C4) += f1;
  s.p(C4) += f2;
  s.x(C5) += f3;
  s.p(C5) += f4;

  if (imp.detector_efficiency < 1.0) {
    apply_loss(s, C4, imp.detector_efficiency);
    apply_loss(s, C5, imp.detector_efficiency);
  }

  out.state = s.subset({C4, C5});
  out.config = cfg;
  return out;
}

/// The noiseless reference: the same two inputs sent through an in-line
/// squeezer S(r_s) on the target followed by a CZ coupling, with
/// e^{r_s} = cot(theta2).
inline GaussianState ideal_reference(const SequenceConfig& cfg) {
  GaussianState s;
  int dummy;
  int a = detail::add_input_mode(s, cfg.alpha, &dummy);
  int b = detail::add_input_mode(s, cfg.beta, &dummy);
  double rs = std::log(1.0 / std::tan(cfg.angles.theta2));
  squeeze(s, a, rs);
  cz(s, a, b);
  return s;  // mode 0 = mu, mode 1 = nu
}

/// Checks the closed-form input-output relation term by term:
///   x_mu = e^{r_s} x_alpha + d1 - d3
///   p_mu = e^{-r_s} p_alpha + x_beta - d2 + d4 - d6
///   x_nu = x_beta - d6
///   p_nu = p_beta + e^{r_s} x_alpha + d1 + d5 - d3
/// with the d_a rebuilt independently from the known excess-noise forms.
inline bool verify_io_identity(const SequenceOutput& out, double tol = 1e-9,
                               std::string* diff = nullptr) {
  auto forms = expected_nullifier_forms(out.cluster_basis);
  const QuadExpr &d1 = forms[0], &d2 = forms[1], &d3 = forms[2];
  const QuadExpr &d4 = forms[3], &d5 = forms[4], &d6 = forms[5];

  double ers = 1.0 / std::tan(out.config.angles.theta2);
  double emrs = std::tan(out.config.angles.theta2);
  QuadExpr x_a = QuadExpr::term(out.alpha_basis, Quad::x);
  QuadExpr p_a = QuadExpr::term(out.alpha_basis, Quad::p);
  QuadExpr x_b = QuadExpr::term(out.beta_basis, Quad::x);
  QuadExpr p_b = QuadExpr::term(out.beta_basis, Quad::p);
  if (out.config.alpha.kind == InputSpec::Kind::coherent) {
    (out.config.alpha.axis == Quad::x ? x_a : p_a)
        .set_mean(out.config.alpha.mean_amplitude());
  }
  if (out.config.beta.kind == InputSpec::Kind::coherent) {
    (out.config.beta.axis == Quad::x ? x_b : p_b)
        .set_mean(out.config.beta.mean_amplitude());
  }

  struct Line {
    const char* name;
    QuadExpr lhs, rhs;
  };
  const Line lines[] = {
      {"x_mu", out.x_mu(), x_a * ers + d1 - d3},
      {"p_mu", out.p_mu(), p_a * emrs + x_b - d2 + d4 - d6},
      {"x_nu", out.x_nu(), x_b - d6},
      {"p_nu", out.p_nu(), p_b + x_a * ers + d1 + d5 - d3},
  };
  bool ok = true;
  std::ostringstream os;
  for (const auto& ln : lines) {
    double d = QuadExpr::max_coeff_distance(ln.lhs, ln.rhs);
    if (d > tol) {
      ok = false;
      os << ln.name << ": max coefficient mismatch " << d << "\n";
    }
  }
  if (diff) *diff = os.str();
  return ok;
}

/// Mean-power report: 10 log10(mean^2 / (1/4)) per output quadrature, or
/// nullopt where the mean vanishes.
struct SignalReport {
  std::array<std::optional<double>, 4> signal_db{};  // x_mu, p_mu, x_nu, p_nu
};

inline SignalReport propagate_signal(const SequenceOutput& out) {
  SignalReport r;
  const QuadExpr* qs[4] = {&out.x_mu(), &out.p_mu(), &out.x_nu(), &out.p_nu()};
  for (int i = 0; i < 4; ++i) {
    double m = qs[i]->mean();
    if (m * m / kVacuumVariance > 1e-12)
      r.signal_db[static_cast<std::size_t>(i)] = 10.0 * std::log10(m * m / kVacuumVariance);
  }
  return r;
}

}  // namespace cvseq
