#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hypscatter/errors.hpp"
#include "hypscatter/quadrature.hpp"

namespace hypscatter {

/// A point x + iy of the upper half-plane.
struct HPoint {
  double x = 0.0;
  double y = 1.0;

  HPoint() = default;
  HPoint(double x_, double y_) : x(x_), y(y_) {
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      raise(ErrorKind::DomainError, "HPoint requires finite x and y > 0");
    }
  }
  explicit HPoint(cplx z) : HPoint(z.real(), z.imag()) {}

  cplx z() const { return {x, y}; }
};

/// Hyperbolic distance, cosh d = 1 + |z - w|^2 / (2 Im z Im w).
inline double hyp_distance(const HPoint& z, const HPoint& w) {
  const double e = std::hypot(z.x - w.x, z.y - w.y);
  return 2.0 * std::asinh(e / (2.0 * std::sqrt(z.y * w.y)));
}

/// Tolerance on the determinant and on the projective sign normalization.
inline constexpr double kMoebiusTol = 1e-12;

/// Real unit-determinant 2x2 matrix acting by z -> (az + b)/(cz + d), stored in
/// the representative whose entry tuple is lexicographically >= its negative.
class MoebiusMap {
 public:
  MoebiusMap() = default;

  static MoebiusMap make(double a, double b, double c, double d) {
    const double det = a * d - b * c;
    const double scale = std::max({1.0, std::abs(a * d), std::abs(b * c)});
    if (std::abs(det - 1.0) > kMoebiusTol * scale) {
      raise(ErrorKind::DomainError, "MoebiusMap requires ad - bc = 1");
    }
    MoebiusMap m;
    m.e_ = {a, b, c, d};
    m.normalize();
    return m;
  }

  static MoebiusMap identity() { return make(1.0, 0.0, 0.0, 1.0); }
  /// z -> z + 1.
  static MoebiusMap T() { return make(1.0, 1.0, 0.0, 1.0); }
  /// z -> -1/z.
  static MoebiusMap S() { return make(0.0, -1.0, 1.0, 0.0); }

  double a() const { return e_[0]; }
  double b() const { return e_[1]; }
  double c() const { return e_[2]; }
  double d() const { return e_[3]; }
  const std::array<double, 4>& entries() const { return e_; }

  MoebiusMap inverse() const { return make(e_[3], -e_[1], -e_[2], e_[0]); }

  cplx operator()(cplx z) const { return (e_[0] * z + e_[1]) / (e_[2] * z + e_[3]); }

  bool is_identity(double tol = 1e-9) const {
    return std::abs(e_[0] - 1.0) <= tol && std::abs(e_[1]) <= tol && std::abs(e_[2]) <= tol &&
           std::abs(e_[3] - 1.0) <= tol;
  }

  /// Entrywise closeness of normalized representatives.
  bool close_to(const MoebiusMap& o, double tol) const {
    for (int k = 0; k < 4; ++k) {
      const double scale = std::max(1.0, std::abs(e_[k]));
      if (std::abs(e_[k] - o.e_[k]) > tol * scale) return false;
    }
    return true;
  }

  friend MoebiusMap operator*(const MoebiusMap& p, const MoebiusMap& q) {
    MoebiusMap m;
    m.e_ = {p.e_[0] * q.e_[0] + p.e_[1] * q.e_[2], p.e_[0] * q.e_[1] + p.e_[1] * q.e_[3],
            p.e_[2] * q.e_[0] + p.e_[3] * q.e_[2], p.e_[2] * q.e_[1] + p.e_[3] * q.e_[3]};
    m.normalize();
    return m;
  }

 private:
  void normalize() {
    for (double v : e_) {
      if (v > kMoebiusTol) return;
      if (v < -kMoebiusTol) {
        for (double& w : e_) w = 0.0 - w;
        return;
      }
    }
  }

  std::array<double, 4> e_{1.0, 0.0, 0.0, 1.0};
};

inline HPoint apply_moebius(const MoebiusMap& m, const HPoint& z) {
  const cplx w = m(z.z());
  // ad - bc = 1 gives Im w = y / |cz + d|^2 exactly; use that form to keep y > 0.
  const double den = std::norm(cplx(m.c() * z.x + m.d(), m.c() * z.y));
  return {w.real(), z.y / den};
}

inline MoebiusMap compose_normalize(const MoebiusMap& m1, const MoebiusMap& m2) { return m1 * m2; }

enum class GroupKind { Modular, Generic };

/// A Fuchsian group given by generators. The generator list is made closed
/// under inversion at construction.
class FuchsianGroup {
 public:
  static FuchsianGroup modular() {
    return FuchsianGroup(GroupKind::Modular, {MoebiusMap::T(), MoebiusMap::S()}, true);
  }

  static FuchsianGroup generic(std::vector<MoebiusMap> generators) {
    bool integral = true;
    for (const auto& g : generators) {
      for (double v : g.entries()) integral = integral && (v == std::round(v));
    }
    return FuchsianGroup(GroupKind::Generic, std::move(generators), integral);
  }

  GroupKind kind() const { return kind_; }
  const std::vector<MoebiusMap>& generators() const { return gens_; }
  bool arithmetic_flag() const { return arithmetic_; }

 private:
  FuchsianGroup(GroupKind kind, std::vector<MoebiusMap> gens, bool arithmetic)
      : kind_(kind), arithmetic_(arithmetic) {
    if (gens.empty()) raise(ErrorKind::DomainError, "FuchsianGroup needs at least one generator");
    auto contains = [&](const MoebiusMap& m) {
      return std::any_of(gens_.begin(), gens_.end(), [&](const MoebiusMap& g) { return g.close_to(m, 1e-12); });
    };
    for (const auto& g : gens) {
      if (g.is_identity()) continue;
      if (!contains(g)) gens_.push_back(g);
      const MoebiusMap gi = g.inverse();
      if (!contains(gi)) gens_.push_back(gi);
    }
    if (gens_.empty()) raise(ErrorKind::DomainError, "FuchsianGroup generators are all trivial");
  }

  GroupKind kind_;
  std::vector<MoebiusMap> gens_;
  bool arithmetic_;
};

/// Displacement below which a group element is taken to fix a point.
inline constexpr double kFixTol = 1e-9;

struct OrbitElement {
  MoebiusMap g;
  double length = 0.0;
};

/// Group elements gamma outside the stabilizer of the base point with
/// d(gamma z0, z0) <= radius, sorted by length.
struct OrbitBall {
  HPoint base;
  double radius = 0.0;
  int stabilizer_order = 1;
  std::vector<OrbitElement> elements;
  std::vector<MoebiusMap> stabilizer;
  double completeness_margin = 0.0;
};

struct OrbitBallOptions {
  std::size_t max_elements = 5'000'000;
  /// Number of margin doublings allowed when the arithmetic recount disagrees.
  int max_margin_doublings = 3;
};

namespace detail {

/// Set of normalized maps with quantized-key lookup and a closeness fallback
/// for maps whose entries straddle a quantization boundary.
class MoebiusSet {
 public:
  explicit MoebiusSet(double quantum = 1e-9) : quantum_(quantum) {}

  /// Returns true when `m` was not present yet.
  bool insert(const MoebiusMap& m, double displacement) {
    const Key k = key(m);
    if (exact_.count(k) != 0) return false;
    const auto lo = by_disp_.lower_bound(displacement - 1e-7);
    const auto hi = by_disp_.upper_bound(displacement + 1e-7);
    for (auto it = lo; it != hi; ++it) {
      if (items_[it->second].close_to(m, 1e-9)) return false;
    }
    exact_.emplace(k, items_.size());
    by_disp_.emplace(displacement, items_.size());
    items_.push_back(m);
    return true;
  }

  std::size_t size() const { return items_.size(); }

 private:
  using Key = std::array<std::int64_t, 4>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ULL;
      for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
      return h;
    }
  };

  Key key(const MoebiusMap& m) const {
    Key k;
    for (int i = 0; i < 4; ++i) k[i] = static_cast<std::int64_t>(std::llround(m.entries()[i] / quantum_));
    return k;
  }

  double quantum_;
  std::unordered_map<Key, std::size_t, KeyHash> exact_;
  std::multimap<double, std::size_t> by_disp_;
  std::vector<MoebiusMap> items_;
};

/// Breadth-first search over right multiplication by generators, keeping
/// every element whose displacement of z0 is at most `threshold`.
inline std::vector<OrbitElement> bfs_orbit(const FuchsianGroup& g, const HPoint& z0, double threshold,
                                           std::size_t cap) {
  MoebiusSet seen;
  std::vector<OrbitElement> found;
  std::deque<MoebiusMap> queue;
  const MoebiusMap id = MoebiusMap::identity();
  seen.insert(id, 0.0);
  found.push_back({id, 0.0});
  queue.push_back(id);
  while (!queue.empty()) {
    const MoebiusMap cur = queue.front();
    queue.pop_front();
    for (const auto& h : g.generators()) {
      const MoebiusMap nxt = cur * h;
      const double l = hyp_distance(apply_moebius(nxt, z0), z0);
      if (l > threshold) continue;
      if (!seen.insert(nxt, l)) continue;
      found.push_back({nxt, l});
      if (found.size() > cap) {
        raise(ErrorKind::BallOverflow, "orbit ball exceeds " + std::to_string(cap) + " elements");
      }
      queue.push_back(nxt);
    }
  }
  return found;
}

inline std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  std::int64_t x1 = 0;
  std::int64_t y1 = 0;
  const std::int64_t gg = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return gg;
}

using IntMat = std::array<std::int64_t, 4>;

inline IntMat normalized_int(IntMat m) {
  for (auto v : m) {
    if (v > 0) return m;
    if (v < 0) return {-m[0], -m[1], -m[2], -m[3]};
  }
  return m;
}

/// Exact enumeration of PSL(2,Z) elements with d(gamma z0, z0) <= R: the
/// bottom row (c, d) satisfies |c z0 + d|^2 <= 2 cosh R, and the top row runs
/// over a translate family a + kc, b + kd.
inline std::vector<IntMat> modular_ball_exact(const HPoint& z0, double R, std::size_t cap) {
  std::vector<IntMat> out;
  const double bound = 2.0 * std::cosh(R) + 1e-9;
  const auto cmax = static_cast<std::int64_t>(std::floor(std::sqrt(bound) / z0.y));
  const double slack = 1e-9;
  for (std::int64_t c = 0; c <= cmax; ++c) {
    const double rem = bound - static_cast<double>(c * c) * z0.y * z0.y;
    if (rem < 0.0) continue;
    const double r = std::sqrt(rem);
    const auto dlo = static_cast<std::int64_t>(std::ceil(-c * z0.x - r));
    const auto dhi = static_cast<std::int64_t>(std::floor(-c * z0.x + r));
    for (std::int64_t d = dlo; d <= dhi; ++d) {
      if (c == 0 && d != 1) continue;
      std::int64_t a0 = 0;
      std::int64_t b0 = 0;
      if (c == 0) {
        a0 = 1;
        b0 = 0;
      } else {
        std::int64_t x = 0;
        std::int64_t y = 0;
        if (ext_gcd(d, c, x, y) != 1) continue;
        // x d + y c = 1, so (a, b) = (x, -y) satisfies a d - b c = 1.
        a0 = x;
        b0 = -y;
      }
      const MoebiusMap m0 = MoebiusMap::make(static_cast<double>(a0), static_cast<double>(b0), static_cast<double>(c),
                                             static_cast<double>(d));
      const HPoint w0 = apply_moebius(m0, z0);
      // cosh l = 1 + ((u + k)^2 + (v - y)^2)/(2 y v), u = Re w0 - x0, v = Im w0.
      const double u = w0.x - z0.x;
      const double v = w0.y;
      const double q = 2.0 * z0.y * v * (std::cosh(R) - 1.0) - (v - z0.y) * (v - z0.y);
      if (q < -slack) continue;
      const double sq = std::sqrt(std::max(0.0, q));
      const auto klo = static_cast<std::int64_t>(std::ceil(-u - sq - 1e-7));
      const auto khi = static_cast<std::int64_t>(std::floor(-u + sq + 1e-7));
      for (std::int64_t k = klo; k <= khi; ++k) {
        const IntMat mk = normalized_int({a0 + k * c, b0 + k * d, c, d});
        const MoebiusMap mm = MoebiusMap::make(static_cast<double>(mk[0]), static_cast<double>(mk[1]),
                                               static_cast<double>(mk[2]), static_cast<double>(mk[3]));
        if (hyp_distance(apply_moebius(mm, z0), z0) > R) continue;
        out.push_back(mk);
        if (out.size() > cap) raise(ErrorKind::BallOverflow, "modular recount exceeds the element cap");
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline IntMat to_int(const MoebiusMap& m) {
  return normalized_int({std::llround(m.a()), std::llround(m.b()), std::llround(m.c()), std::llround(m.d())});
}

inline double max_generator_displacement(const FuchsianGroup& g, const HPoint& z0) {
  double margin = 0.0;
  for (const auto& h : g.generators()) margin = std::max(margin, hyp_distance(apply_moebius(h, z0), z0));
  return margin;
}

}  // namespace detail

/// Order of the stabilizer of z0, found by a pruned word search. The candidate
/// set must be closed under composition to be accepted.
inline int stabilizer_order(const FuchsianGroup& g, const HPoint& z0) {
  const double margin = detail::max_generator_displacement(g, z0);
  std::vector<MoebiusMap> stab;
  for (const auto& e : detail::bfs_orbit(g, z0, margin, 1'000'000)) {
    if (e.length < kFixTol) stab.push_back(e.g);
  }
  for (const auto& p : stab) {
    for (const auto& q : stab) {
      const MoebiusMap r = p * q;
      const bool closed = std::any_of(stab.begin(), stab.end(), [&](const MoebiusMap& s) { return s.close_to(r, 1e-9); });
      if (!closed) raise(ErrorKind::GroupTooCoarse, "stabilizer candidate set is not closed under composition");
    }
  }
  return static_cast<int>(stab.size());
}

/// All group elements moving z0 by at most R, excluding the stabilizer.
///
/// The search prunes at R + margin with margin the largest generator
/// displacement at z0. For arithmetic modular groups the result is recounted
/// by exact integer enumeration; a disagreement doubles the margin and retries.
inline OrbitBall enumerate_orbit_ball(const FuchsianGroup& g, const HPoint& z0, double R,
                                      const OrbitBallOptions& opt = {}) {
  if (!(R > 0.0)) raise(ErrorKind::DomainError, "orbit ball radius must be positive");
  double margin = detail::max_generator_displacement(g, z0);
  const bool recount = g.arithmetic_flag() && g.kind() == GroupKind::Modular;
  for (int attempt = 0;; ++attempt) {
    // The stabilizer and the pruning margin both need the search radius to cover the generators.
    const auto raw = detail::bfs_orbit(g, z0, std::max(R, 0.0) + margin, opt.max_elements * 4 + 64);
    OrbitBall ball;
    ball.base = z0;
    ball.radius = R;
    ball.completeness_margin = margin;
    for (const auto& e : raw) {
      if (e.length < kFixTol) {
        ball.stabilizer.push_back(e.g);
      } else if (e.length <= R) {
        ball.elements.push_back(e);
      }
    }
    if (ball.elements.size() > opt.max_elements) {
      raise(ErrorKind::BallOverflow, "orbit ball exceeds " + std::to_string(opt.max_elements) + " elements");
    }
    ball.stabilizer_order = static_cast<int>(ball.stabilizer.size());
    std::sort(ball.elements.begin(), ball.elements.end(), [](const OrbitElement& p, const OrbitElement& q) {
      if (p.length != q.length) return p.length < q.length;
      return p.g.entries() < q.g.entries();
    });
    if (!recount) return ball;

    std::vector<detail::IntMat> bfs_set;
    bfs_set.reserve(ball.elements.size() + ball.stabilizer.size());
    for (const auto& e : ball.elements) bfs_set.push_back(detail::to_int(e.g));
    for (const auto& s : ball.stabilizer) bfs_set.push_back(detail::to_int(s));
    std::sort(bfs_set.begin(), bfs_set.end());
    const auto exact = detail::modular_ball_exact(z0, R, opt.max_elements + 64);
    if (bfs_set == exact) return ball;
    if (attempt >= opt.max_margin_doublings) {
      raise(ErrorKind::GroupTooCoarse, "word search disagrees with the exact modular recount (" +
                                           std::to_string(bfs_set.size()) + " vs " +
                                           std::to_string(exact.size()) + ")");
    }
    margin *= 2.0;
  }
}

/// Reduction of z into the standard fundamental domain of PSL(2,Z):
/// returns (z*, gamma) with gamma z = z*, |Re z*| <= 1/2 and |z*| >= 1.
inline std::pair<HPoint, MoebiusMap> reduce_to_fundamental_domain(const HPoint& z) {
  MoebiusMap gamma = MoebiusMap::identity();
  HPoint w = z;
  for (int iter = 0; iter < 10000; ++iter) {
    const double n = std::round(w.x);
    if (n != 0.0 && std::abs(w.x) > 0.5) {
      gamma = MoebiusMap::make(1.0, -n, 0.0, 1.0) * gamma;
      w = HPoint(w.x - n, w.y);
    }
    const double r2 = w.x * w.x + w.y * w.y;
    if (r2 < 1.0 - 1e-15) {
      gamma = MoebiusMap::S() * gamma;
      w = HPoint(-w.x / r2, w.y / r2);
      continue;
    }
    break;
  }
  return {w, gamma};
}

inline std::pair<HPoint, MoebiusMap> reduce_to_fundamental_domain(const FuchsianGroup& g, const HPoint& z) {
  if (g.kind() != GroupKind::Modular) {
    raise(ErrorKind::NonModularGroup, "fundamental-domain reduction is implemented for the modular group only");
  }
  return reduce_to_fundamental_domain(z);
}

/// CSV export with header `a,b,c,d,length`.
inline void write_orbit_ball_csv(std::ostream& os, const OrbitBall& ball) {
  os << "a,b,c,d,length\n";
  char buf[160];
  for (const auto& e : ball.elements) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", e.g.a(), e.g.b(), e.g.c(), e.g.d(), e.length);
    os << buf;
  }
}

}  // namespace hypscatter
