#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cvseq/core.hpp"
#include "cvseq/optics.hpp"

namespace cvseq {

using Matrix6c = Eigen::Matrix<std::complex<double>, 6, 6>;

struct ClusterGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // 0-based, unordered pairs

  static ClusterGraph chain(int n) {
    ClusterGraph g;
    g.n = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
    return g;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (auto [a, b] : edges) {
      if (a == v) out.push_back(b);
      if (b == v) out.push_back(a);
    }
    return out;
  }

  void validate() const {
    for (auto [a, b] : edges) {
      if (a == b) throw std::invalid_argument("cluster graph has a self-loop");
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw std::invalid_argument("cluster graph edge out of range");
    }
  }
};

/// The six-mode linear-cluster network matrix: output modes b_k = sum_l U_kl a_l
/// for inputs a_1, a_3, a_5 x-squeezed and a_2, a_4, a_6 p-squeezed.
inline Matrix6c u6_matrix() {
  const std::complex<double> i(0.0, 1.0);
  auto rt = [](double v) { return std::sqrt(v); };
  Matrix6c u;
  u.setZero();
  u(0, 0) = i / rt(2);   u(0, 1) = i / rt(3);     u(0, 2) = -rt(2.0 / 39);  u(0, 3) = -rt(3.0 / 26);
  u(1, 0) = -1 / rt(2);  u(1, 1) = 1 / rt(3);     u(1, 2) = i * rt(2.0 / 39); u(1, 3) = i * rt(3.0 / 26);
  u(2, 1) = i / rt(3);   u(2, 2) = 2 * rt(2.0 / 39); u(2, 3) = rt(6.0 / 13);
  u(3, 2) = -i * rt(6.0 / 13); u(3, 3) = 2.0 * i * rt(2.0 / 39); u(3, 4) = -1 / rt(3);
  u(4, 2) = rt(3.0 / 26); u(4, 3) = -rt(2.0 / 39); u(4, 4) = i / rt(3);  u(4, 5) = -i / rt(2);
  u(5, 2) = i * rt(3.0 / 26); u(5, 3) = -i * rt(2.0 / 39); u(5, 4) = -1 / rt(3); u(5, 5) = -1 / rt(2);
  return u;
}

/// One factor of the network decomposition.
struct ElementaryOp {
  enum class Kind { fourier, half_turn, splitter };
  Kind kind = Kind::fourier;
  int mode = 0;  // 0-based, fourier/half_turn only
  BeamSplitterSpec bs;

  static ElementaryOp fourier(int mode) { return {Kind::fourier, mode, {}}; }
  static ElementaryOp half_turn(int mode) { return {Kind::half_turn, mode, {}}; }
  static ElementaryOp splitter(int k, int l, double t, int sign) {
    ElementaryOp op;
    op.kind = Kind::splitter;
    op.bs = BeamSplitterSpec{t, sign, k, l};
    return op;
  }

  Matrix6c matrix() const {
    Matrix6c m = Matrix6c::Identity();
    const std::complex<double> i(0.0, 1.0);
    switch (kind) {
      case Kind::fourier:
        m(mode, mode) = i;
        break;
      case Kind::half_turn:
        m(mode, mode) = -1.0;
        break;
      case Kind::splitter: {
        Eigen::Matrix2d b = bs.mode_map();
        m(bs.mode_k, bs.mode_k) = b(0, 0);
        m(bs.mode_k, bs.mode_l) = b(0, 1);
        m(bs.mode_l, bs.mode_k) = b(1, 0);
        m(bs.mode_l, bs.mode_l) = b(1, 1);
        break;
      }
    }
    return m;
  }

  /// Physical application to six consecutive state modes starting at `base`.
  void apply(GaussianState& s, int base) const {
    switch (kind) {
      case Kind::fourier:
        rotate(s, base + mode, M_PI / 2.0);
        break;
      case Kind::half_turn:
        rotate(s, base + mode, M_PI);
        break;
      case Kind::splitter: {
        BeamSplitterSpec shifted = bs;
        shifted.mode_k += base;
        shifted.mode_l += base;
        beam_splitter(s, shifted);
        break;
      }
    }
  }
};

/// Factor list in matrix-product order (leftmost printed first); the last
/// entry acts first on the inputs. Transmissions are 4/13 on the 3-4
/// splitter, 2/3 on 2-3 and 4-5, 1/2 on 1-2 and 5-6. The 5-6 splitter is
/// pinned as sign -1 with ports (6,5); the golden composition test against
/// u6_matrix() fixes this convention.
inline std::vector<ElementaryOp> u6_decomposition() {
  using Op = ElementaryOp;
  return {
      Op::fourier(0),   Op::half_turn(1), Op::fourier(2), Op::fourier(3),
      Op::fourier(4),   Op::half_turn(5),
      Op::splitter(5, 4, 1.0 / 2.0, -1),
      Op::fourier(4),
      Op::splitter(0, 1, 1.0 / 2.0, +1),
      Op::splitter(3, 4, 2.0 / 3.0, +1),
      Op::fourier(4),
      Op::splitter(1, 2, 2.0 / 3.0, +1),
      Op::fourier(2),
      Op::splitter(2, 3, 4.0 / 13.0, -1),
  };
}

inline Matrix6c compose(const std::vector<ElementaryOp>& ops) {
  Matrix6c m = Matrix6c::Identity();
  for (const auto& op : ops) m = m * op.matrix();
  return m;
}

/// Applies a 6x6 complex mode transform to six consecutive state modes via
/// its real quadrature representation [[Re U, -Im U], [Im U, Re U]].
inline void apply_complex_unitary(GaussianState& s, int base, const Matrix6c& u) {
  std::array<QuadExpr, 6> xs, ps;
  for (int k = 0; k < 6; ++k) {
    xs[k] = s.x(base + k);
    ps[k] = s.p(base + k);
  }
  for (int k = 0; k < 6; ++k) {
    QuadExpr nx, np;
    for (int l = 0; l < 6; ++l) {
      double re = u(k, l).real(), im = u(k, l).imag();
      if (re != 0.0) {
        nx += xs[l] * re;
        np += ps[l] * re;
      }
      if (im != 0.0) {
        nx -= ps[l] * im;
        np += xs[l] * im;
      }
    }
    s.x(base + k) = std::move(nx);
    s.p(base + k) = std::move(np);
  }
}

/// Builds the six-mode linear cluster from alternating x/p-squeezed inputs
/// placed at state modes base..base+5. Input 6 enters with a 180-degree
/// phase pin so the excess-noise terms come out with the canonical signs.
/// `source_efficiency` < 1 inserts per-beam loss before the network.
inline std::array<int, 6> prepare_cluster_into(GaussianState& s, int base,
                                               const std::array<double, 6>& r,
                                               double source_efficiency = 1.0) {
  std::array<int, 6> basis_ids{};
  for (int k = 0; k < 6; ++k) {
    if (s.mode_count() != base + k)
      throw std::invalid_argument("cluster modes must be appended in order");
    SqueezeKind kind = (k % 2 == 0) ? SqueezeKind::x_squeezed : SqueezeKind::p_squeezed;
    basis_ids[static_cast<std::size_t>(k)] = static_cast<int>(s.basis().size());
    s.add_mode(kind, r[static_cast<std::size_t>(k)]);
  }
  if (source_efficiency < 1.0)
    for (int k = 0; k < 6; ++k) apply_loss(s, base + k, source_efficiency);
  rotate(s, base + 5, M_PI);
  apply_complex_unitary(s, base, u6_matrix());
  return basis_ids;
}

inline GaussianState prepare_cluster(const std::array<double, 6>& r) {
  GaussianState s;
  prepare_cluster_into(s, 0, r);
  return s;
}

inline GaussianState prepare_cluster(double r) {
  return prepare_cluster({r, r, r, r, r, r});
}

/// Canonical excess-noise forms of the six-mode chain in terms of the input
/// basis modes (squeezing carried by the basis; every term references the
/// squeezed quadrature of its mode so all of them vanish at r -> infinity):
///   d1 = sqrt(2) x1            d2 = sqrt(3) p2
///   d3 = x1/sqrt2 + sqrt(13/6) p4 + x5/sqrt3
///   d4 = p2/sqrt3 - sqrt(13/6) x3 + p6/sqrt2
///   d5 = sqrt(3) x5            d6 = sqrt(2) p6
inline std::array<QuadExpr, 6> expected_nullifier_forms(
    const std::array<int, 6>& basis_ids) {
  auto xt = [&](int k, double c) {
    return QuadExpr::term(basis_ids[static_cast<std::size_t>(k)], Quad::x, c);
  };
  auto pt = [&](int k, double c) {
    return QuadExpr::term(basis_ids[static_cast<std::size_t>(k)], Quad::p, c);
  };
  const double rt2 = std::sqrt(2.0), rt3 = std::sqrt(3.0);
  const double c136 = std::sqrt(13.0 / 6.0);
  return {
      xt(0, rt2),
      pt(1, rt3),
      xt(0, 1.0 / rt2) + pt(3, c136) + xt(4, 1.0 / rt3),
      pt(1, 1.0 / rt3) - xt(2, c136) + pt(5, 1.0 / rt2),
      xt(4, rt3),
      pt(5, rt2),
  };
}

/// delta_a = p_a - sum_{b in N(a)} x_b for every vertex.
inline std::vector<QuadExpr> nullifiers(const GaussianState& s, const ClusterGraph& g) {
  g.validate();
  if (s.mode_count() != g.n)
    throw std::invalid_argument("state mode count does not match graph");
  std::vector<QuadExpr> out;
  out.reserve(static_cast<std::size_t>(g.n));
  for (int a = 0; a < g.n; ++a) {
    QuadExpr d = s.p(a);
    for (int b : g.neighbors(a)) d -= s.x(b);
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<double> nullifier_variances_db(const GaussianState& s) {
  auto ds = nullifiers(s, ClusterGraph::chain(s.mode_count()));
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(s.variance_db(d));
  return out;
}

/// Pairwise nullifier-variance sums for the linear six-mode chain, absolute
/// units (vacuum = 1/4). Full inseparability needs every value below 1.
struct VlfReport {
  std::array<double, 5> combinations{};
  std::array<bool, 5> pass{};
  bool all_pass = false;
};

inline VlfReport vlf_inseparability(const GaussianState& s) {
  if (s.mode_count() != 6)
    throw std::invalid_argument("vlf_inseparability expects the six-mode chain");
  auto ds = nullifiers(s, ClusterGraph::chain(6));
  VlfReport r;
  r.all_pass = true;
  for (int k = 0; k < 5; ++k) {
    double v = s.variance(ds[static_cast<std::size_t>(k)]) +
               s.variance(ds[static_cast<std::size_t>(k) + 1]);
    r.combinations[static_cast<std::size_t>(k)] = v;
    r.pass[static_cast<std::size_t>(k)] = v < 1.0;
    r.all_pass = r.all_pass && v < 1.0;
  }
  return r;
}

}  // namespace cvseq
