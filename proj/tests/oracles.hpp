#pragma once

// Independent reference implementations used to check the library. They are
// written for clarity, not speed, and share no code with src/.

#include "brepchain/complex.hpp"
#include "brepchain/ilp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using brepchain::Vec3;

// Minimum over all injective maps of the smaller side into the larger one.
inline double brute_assignment(const Eigen::MatrixXd& cost) {
  const Eigen::MatrixXd c = cost.rows() <= cost.cols() ? cost : Eigen::MatrixXd(cost.transpose());
  const int r = static_cast<int>(c.rows()), n = static_cast<int>(c.cols());
  if (r == 0) return 0.0;
  std::vector<int> cols(static_cast<size_t>(n));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Every permutation of all columns; the first r entries form the map.
  do {
    double s = 0.0;
    for (int i = 0; i < r; ++i) s += c(i, cols[static_cast<size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

inline double mean_sq(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return s / static_cast<double>(a.size());
}

// All alignments of curve samples: reversal, and cyclic shifts when closed.
inline std::vector<std::vector<Vec3>> curve_alignments(const std::vector<Vec3>& b, bool closed) {
  std::vector<std::vector<Vec3>> out;
  const int n = static_cast<int>(b.size());
  const int shifts = closed ? n : 1;
  for (int rev = 0; rev < 2; ++rev)
    for (int s = 0; s < shifts; ++s) {
      std::vector<Vec3> v(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) {
        int idx = rev ? n - 1 - k : k;
        v[static_cast<size_t>(k)] = b[static_cast<size_t>((idx + s) % n)];
      }
      out.push_back(std::move(v));
    }
  return out;
}

inline double brute_curve_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : curve_alignments(b, closed)) best = std::min(best, mean_sq(a, v));
  return best;
}

// Grid alignments: the four axis reversals, with every (x, y) roll when closed.
inline std::vector<std::vector<Vec3>> patch_alignments(const std::vector<Vec3>& b, bool closed, int side = 10) {
  std::vector<std::vector<Vec3>> out;
  const int rolls = closed ? side : 1;
  for (int fu = 0; fu < 2; ++fu)
    for (int fv = 0; fv < 2; ++fv)
      for (int ru = 0; ru < rolls; ++ru)
        for (int rv = 0; rv < rolls; ++rv) {
          std::vector<Vec3> g(b.size());
          for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j) {
              int si = ((fu ? side - 1 - i : i) + ru) % side;
              int sj = ((fv ? side - 1 - j : j) + rv) % side;
              g[static_cast<size_t>(i * side + j)] = b[static_cast<size_t>(si * side + sj)];
            }
          out.push_back(std::move(g));
        }
  return out;
}

inline double brute_patch_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : patch_alignments(b, closed)) best = std::min(best, mean_sq(a, g));
  return best;
}

struct Residuals {
  double manifold, endpoint, closure;
};

// Direct evaluation of the three constraint residuals with all elements
// existing: each edge borders two faces, open edges have two endpoints and
// FE * EV = 2 FV.
inline Residuals residuals(const brepchain::ChainComplex& c) {
  const int nf = c.num_faces(), ne = c.num_edges(), nv = c.num_vertices();
  Residuals r{0, 0, 0};
  for (int j = 0; j < ne; ++j) {
    int s = 0;
    for (int i = 0; i < nf; ++i) s += c.fe(i, j);
    r.manifold += std::abs(s - 2);
  }
  for (int i = 0; i < ne; ++i) {
    int s = 0;
    for (int k = 0; k < nv; ++k) s += c.ev(i, k);
    r.endpoint += std::abs(s - (c.edges[static_cast<size_t>(i)].closed ? 0 : 2));
  }
  for (int i = 0; i < nf; ++i)
    for (int k = 0; k < nv; ++k) {
      int s = 0;
      for (int j = 0; j < ne; ++j) s += c.fe(i, j) * c.ev(j, k);
      r.closure += std::abs(s - 2 * c.fv(i, k));
    }
  if (ne > 0) {
    r.manifold /= ne;
    r.endpoint /= ne;
  }
  if (nf > 0 && nv > 0) r.closure /= static_cast<double>(nf) * nv;
  return r;
}

inline bool satisfies(const brepchain::Constraint& con, const std::vector<std::uint8_t>& x) {
  long double lhs = 0;
  for (const auto& t : con.terms) lhs += static_cast<long double>(t.coef) * x[static_cast<size_t>(t.var)];
  const long double rhs = con.rhs;
  switch (con.sense) {
    case brepchain::Sense::LessEqual: return lhs <= rhs + 1e-12L;
    case brepchain::Sense::GreaterEqual: return lhs >= rhs - 1e-12L;
    case brepchain::Sense::Equal: return std::fabs(static_cast<double>(lhs - rhs)) <= 1e-12;
  }
  return false;
}

inline bool feasible(const brepchain::IlpModel& m, const std::vector<std::uint8_t>& x) {
  for (const auto& con : m.constraints())
    if (!satisfies(con, x)) return false;
  return true;
}

inline double objective(const brepchain::IlpModel& m, const std::vector<std::uint8_t>& x) {
  double s = 0.0;
  for (size_t v = 0; v < x.size(); ++v)
    if (x[v]) s += m.variables()[v].objective;
  return s;
}

// Best objective over all 2^n assignments; nullopt when infeasible.
inline std::optional<double> brute_ilp(const brepchain::IlpModel& m) {
  const int n = m.num_variables();
  std::optional<double> best;
  std::vector<std::uint8_t> x(static_cast<size_t>(n));
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (int v = 0; v < n; ++v) x[static_cast<size_t>(v)] = (mask >> v) & 1u;
    if (!feasible(m, x)) continue;
    double o = objective(m, x);
    if (!best || o > *best) best = o;
  }
  return best;
}

inline double angle_deg(const Vec3& a, const Vec3& b) {
  double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c)) * 180.0 / M_PI;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do v = Vec3(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-6);
  return v.normalized();
}

inline std::vector<Vec3> random_points(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> p(static_cast<size_t>(n));
  for (auto& q : p) q = Vec3(u(rng), u(rng), u(rng));
  return p;
}

}  // namespace oracle
