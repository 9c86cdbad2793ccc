#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cvseq {

/// Quadrature label. Convention: x = (a + a^dag)/2, p = (a - a^dag)/2i,
/// vacuum variance 1/4 in both.
enum class Quad : int { x = 0, p = 1 };

enum class SqueezeKind : int { vacuum = 0, x_squeezed = 1, p_squeezed = 2 };

constexpr double kVacuumVariance = 0.25;
constexpr double kVacuumSd = 0.5;

/// Squeezing parameter r for a squeezing depth given in dB (sign ignored,
/// -4 dB and 4 dB both mean e^{-2r} = 10^{-0.4}).
inline double squeeze_r_from_db(double db) {
  return std::log(std::pow(10.0, std::abs(db) / 20.0));
}

inline double squeeze_db_from_r(double r) { return -20.0 * r / std::log(10.0); }

/// Noise level of `variance` relative to the single-detector shot noise (1/4).
inline double db_above_vacuum(double variance) {
  return 10.0 * std::log10(variance / kVacuumVariance);
}

/// One independent Gaussian basis mode. Squeezing lives here, not in
/// expression coefficients: an x-squeezed mode has sd(x) = e^{-r}/2 and
/// sd(p) = e^{+r}/2.
struct BasisMode {
  int id = -1;
  SqueezeKind kind = SqueezeKind::vacuum;
  double r = 0.0;

  double sd(Quad q) const {
    switch (kind) {
      case SqueezeKind::vacuum:
        return kVacuumSd;
      case SqueezeKind::x_squeezed:
        return q == Quad::x ? kVacuumSd * std::exp(-r) : kVacuumSd * std::exp(r);
      case SqueezeKind::p_squeezed:
        return q == Quad::p ? kVacuumSd * std::exp(-r) : kVacuumSd * std::exp(r);
    }
    throw std::logic_error("unreachable");
  }
};

class BasisTable {
 public:
  int add(SqueezeKind kind, double r) {
    if (r < 0.0) throw std::invalid_argument("squeezing parameter must be >= 0");
    if (kind == SqueezeKind::vacuum && r != 0.0)
      throw std::invalid_argument("vacuum basis mode must have r = 0");
    int id = static_cast<int>(modes_.size());
    modes_.push_back(BasisMode{id, kind, r});
    return id;
  }

  const BasisMode& at(int id) const {
    if (id < 0 || id >= static_cast<int>(modes_.size()))
      throw std::out_of_range("unknown basis mode id " + std::to_string(id));
    return modes_[static_cast<std::size_t>(id)];
  }

  bool contains(int id) const {
    return id >= 0 && id < static_cast<int>(modes_.size());
  }

  std::size_t size() const { return modes_.size(); }

  /// Same modes with all squeezing removed; shot-noise reference basis.
  BasisTable with_zero_squeezing() const {
    BasisTable t;
    for (const auto& m : modes_) t.add(SqueezeKind::vacuum, 0.0);
    return t;
  }

 private:
  std::vector<BasisMode> modes_;
};

/// A quadrature observable: exact linear combination of basis-mode
/// quadratures plus a classical mean. Coefficients below kCoeffEps are
/// dropped so the term map stays sparse and roundoff-free comparisons work.
class QuadExpr {
 public:
  static constexpr double kCoeffEps = 1e-12;
  using Key = std::pair<int, Quad>;

  QuadExpr() = default;

  static QuadExpr term(int basis_id, Quad q, double coeff = 1.0) {
    QuadExpr e;
    e.add_term(basis_id, q, coeff);
    return e;
  }

  void add_term(int basis_id, Quad q, double coeff) {
    Key k{basis_id, q};
    auto it = terms_.find(k);
    double v = coeff + (it == terms_.end() ? 0.0 : it->second);
    if (std::abs(v) < kCoeffEps) {
      if (it != terms_.end()) terms_.erase(it);
    } else {
      terms_[k] = v;
    }
  }

  double coefficient(int basis_id, Quad q) const {
    auto it = terms_.find(Key{basis_id, q});
    return it == terms_.end() ? 0.0 : it->second;
  }

  const std::map<Key, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double mean() const { return mean_; }
  void set_mean(double m) { mean_ = m; }

  QuadExpr& operator+=(const QuadExpr& o) {
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    mean_ += o.mean_;
    return *this;
  }
  QuadExpr& operator-=(const QuadExpr& o) {
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
    mean_ -= o.mean_;
    return *this;
  }
  QuadExpr& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      mean_ = 0.0;
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (std::abs(it->second) < kCoeffEps)
        it = terms_.erase(it);
      else
        ++it;
    }
    mean_ *= s;
    return *this;
  }

  friend QuadExpr operator+(QuadExpr a, const QuadExpr& b) { return a += b; }
  friend QuadExpr operator-(QuadExpr a, const QuadExpr& b) { return a -= b; }
  friend QuadExpr operator*(QuadExpr a, double s) { return a *= s; }
  friend QuadExpr operator*(double s, QuadExpr a) { return a *= s; }
  QuadExpr operator-() const {
    QuadExpr e = *this;
    e *= -1.0;
    return e;
  }

  /// Largest absolute coefficient difference; means compared on top.
  static double max_coeff_distance(const QuadExpr& a, const QuadExpr& b) {
    double d = std::abs(a.mean_ - b.mean_);
    for (const auto& [k, c] : a.terms_)
      d = std::max(d, std::abs(c - b.coefficient(k.first, k.second)));
    for (const auto& [k, c] : b.terms_)
      d = std::max(d, std::abs(c - a.coefficient(k.first, k.second)));
    return d;
  }

 private:
  std::map<Key, double> terms_;
  double mean_ = 0.0;
};

/// <Delta^2 e>: basis modes are independent and axis-aligned, so the
/// variance is a weighted sum of squared coefficients. The mean never
/// contributes.
inline double variance(const QuadExpr& e, const BasisTable& basis) {
  double v = 0.0;
  for (const auto& [k, c] : e.terms()) {
    double sd = basis.at(k.first).sd(k.second);
    v += c * c * sd * sd;
  }
  return v;
}

inline double covariance(const QuadExpr& a, const QuadExpr& b,
                         const BasisTable& basis) {
  double v = 0.0;
  for (const auto& [k, c] : a.terms()) {
    double cb = b.coefficient(k.first, k.second);
    if (cb == 0.0) continue;
    double sd = basis.at(k.first).sd(k.second);
    v += c * cb * sd * sd;
  }
  return v;
}

/// Shot-noise level of a combination: its variance with every contributing
/// basis mode replaced by vacuum, i.e. sum of coeff^2 / 4.
inline double snl(const QuadExpr& e) {
  double v = 0.0;
  for (const auto& [k, c] : e.terms()) v += c * c;
  return v * kVacuumVariance;
}

inline double snl(const QuadExpr& e, const BasisTable& basis) {
  for (const auto& [k, c] : e.terms()) basis.at(k.first);  // id check
  return snl(e);
}

/// 10 log10(variance / SNL). Valid for passive combinations of detected
/// mode quadratures (nullifiers and the like); single-detector levels use
/// db_above_vacuum instead.
inline double variance_db(const QuadExpr& e, const BasisTable& basis) {
  double s = snl(e, basis);
  if (s <= 0.0)
    throw std::invalid_argument("variance_db: SNL undefined for zero expression");
  return 10.0 * std::log10(variance(e, basis) / s);
}

/// Ordered set of optical modes, each a pair of quadrature expressions over
/// a shared basis table.
class GaussianState {
 public:
  GaussianState() = default;

  static GaussianState vacuum(int n) {
    GaussianState s;
    for (int i = 0; i < n; ++i) s.add_mode(SqueezeKind::vacuum, 0.0);
    return s;
  }

  /// Appends a fresh mode backed by its own new basis mode; the new mode's
  /// quadratures reference only that basis mode with coefficient 1.
  int add_mode(SqueezeKind kind, double r = 0.0) {
    int id = basis_.add(kind, r);
    ModeQuads m;
    m.x = QuadExpr::term(id, Quad::x);
    m.p = QuadExpr::term(id, Quad::p);
    modes_.push_back(std::move(m));
    return static_cast<int>(modes_.size()) - 1;
  }

  int mode_count() const { return static_cast<int>(modes_.size()); }

  const QuadExpr& x(int mode) const { return quads(mode).x; }
  const QuadExpr& p(int mode) const { return quads(mode).p; }
  QuadExpr& x(int mode) { return quads(mode).x; }
  QuadExpr& p(int mode) { return quads(mode).p; }
  const QuadExpr& quad(int mode, Quad q) const {
    return q == Quad::x ? x(mode) : p(mode);
  }

  const BasisTable& basis() const { return basis_; }
  BasisTable& basis() { return basis_; }

  double variance(const QuadExpr& e) const { return cvseq::variance(e, basis_); }
  double covariance(const QuadExpr& a, const QuadExpr& b) const {
    return cvseq::covariance(a, b, basis_);
  }
  double variance_db(const QuadExpr& e) const {
    return cvseq::variance_db(e, basis_);
  }

  /// New state keeping only the given modes (shared basis copied whole).
  GaussianState subset(const std::vector<int>& modes) const {
    GaussianState s;
    s.basis_ = basis_;
    for (int m : modes) s.modes_.push_back(quads(m));
    return s;
  }

 private:
  struct ModeQuads {
    QuadExpr x, p;
  };

  const ModeQuads& quads(int mode) const {
    if (mode < 0 || mode >= mode_count())
      throw std::out_of_range("mode index out of range");
    return modes_[static_cast<std::size_t>(mode)];
  }
  ModeQuads& quads(int mode) {
    if (mode < 0 || mode >= mode_count())
      throw std::out_of_range("mode index out of range");
    return modes_[static_cast<std::size_t>(mode)];
  }

  BasisTable basis_;
  std::vector<ModeQuads> modes_;
};

/// Quadrature covariance matrix in (x1, p1, x2, p2, ...) ordering.
struct CovarianceMatrix {
  Eigen::MatrixXd entries;

  int dim() const { return static_cast<int>(entries.rows()); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries);
    return es.eigenvalues().minCoeff();
  }

  bool is_positive_semidefinite(double tol = 1e-10) const {
    return min_eigenvalue() > -tol;
  }

  /// det of mode m's 2x2 block; >= 1/16 for physical states.
  double mode_block_det(int m) const {
    return entries.block<2, 2>(2 * m, 2 * m).determinant();
  }
};

inline CovarianceMatrix covariance_matrix(const GaussianState& s) {
  int n = s.mode_count();
  CovarianceMatrix cm;
  cm.entries.resize(2 * n, 2 * n);
  auto q = [&](int i) -> const QuadExpr& {
    return (i % 2 == 0) ? s.x(i / 2) : s.p(i / 2);
  };
  for (int i = 0; i < 2 * n; ++i)
    for (int j = i; j < 2 * n; ++j) {
      double c = s.covariance(q(i), q(j));
      cm.entries(i, j) = c;
      cm.entries(j, i) = c;
    }
  return cm;
}

}  // namespace cvseq
