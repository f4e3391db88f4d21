#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <vector>

namespace oracle {

using IntMat = std::array<std::int64_t, 4>;

/// Projective normal form of an integer matrix: first nonzero entry positive.
inline IntMat projective(IntMat m) {
  for (auto v : m) {
    if (v == 0) continue;
    if (v < 0) {
      for (auto& w : m) w = -w;
    }
    break;
  }
  return m;
}

inline IntMat mul(const IntMat& p, const IntMat& q) {
  return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2],
          p[2] * q[1] + p[3] * q[3]};
}

/// Every element of PSL(2, Z) expressible as a word of length <= depth in T, T^-1, S.
inline std::set<IntMat> modular_words(int depth) {
  const std::vector<IntMat> gens = {{1, 1, 0, 1}, {1, -1, 0, 1}, {0, -1, 1, 0}};
  std::set<IntMat> seen = {projective({1, 0, 0, 1})};
  std::vector<IntMat> frontier(seen.begin(), seen.end());
  for (int k = 0; k < depth; ++k) {
    std::vector<IntMat> next;
    for (const auto& w : frontier) {
      for (const auto& g : gens) {
        const IntMat p = projective(mul(w, g));
        if (seen.insert(p).second) next.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

/// cosh of the hyperbolic distance between z0 and gamma z0, straight from the distance formula.
inline double cosh_displacement(const IntMat& m, double x, double y) {
  const std::complex<double> z(x, y);
  const std::complex<double> w = (static_cast<double>(m[0]) * z + static_cast<double>(m[1])) /
                                 (static_cast<double>(m[2]) * z + static_cast<double>(m[3]));
  return 1.0 + std::norm(z - w) / (2.0 * y * w.imag());
}

}  // namespace oracle
