#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "molblocks/pocket.h"

namespace molblocks::testing {

/// Structure with one residue per `per_residue` atoms, all carbon.
inline Structure make_structure(const std::vector<Vec3>& pts, int per_residue = 1,
                                const char* chain = "A") {
  Structure s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int r = static_cast<int>(i) / per_residue;
    if (r == static_cast<int>(s.residues.size())) {
      s.residues.push_back({{chain, "ALA", r + 1, ""}, {}});
    }
    s.residues.back().atoms.push_back(static_cast<int>(i));
    s.atoms.push_back({"C", pts[i], "CA", 1.0, r});
  }
  return s;
}

inline std::vector<Vec3> random_points(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

// Exhaustive reference implementations.

inline std::vector<ResidueId> oracle_residues(const Vec3& a, const Structure& rec, double dc) {
  std::vector<int> hit;
  for (const auto& atom : rec.atoms) {
    if (atom.is_heavy() && distance_squared(a, atom.pos) <= dc * dc) hit.push_back(atom.residue);
  }
  std::sort(hit.begin(), hit.end());
  hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
  std::vector<ResidueId> out;
  for (int r : hit) out.push_back(rec.residues[static_cast<std::size_t>(r)].id);
  return out;
}

inline int oracle_grid_count(const Vec3& a, const Structure& rec, const Structure& lig,
                             const GridConfig& cfg) {
  const int half = cfg.points_per_axis() / 2;
  const double rr = cfg.receptor_clearance * cfg.receptor_clearance;
  const double lr = cfg.ligand_clearance * cfg.ligand_clearance;
  int n = 0;
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      for (int k = -half; k <= half; ++k) {
        const Vec3 g{a.x + i * cfg.resolution, a.y + j * cfg.resolution, a.z + k * cfg.resolution};
        bool free = true;
        for (const auto& atom : rec.atoms) {
          if (atom.is_heavy() && distance_squared(g, atom.pos) <= rr) free = false;
        }
        for (const auto& atom : lig.atoms) {
          if (atom.is_heavy() && distance_squared(g, atom.pos) <= lr) free = false;
        }
        n += free;
      }
    }
  }
  return n;
}

inline std::pair<int, double> oracle_nearest(const Vec3& p, const std::vector<Vec3>& pts) {
  std::pair<int, double> best{-1, 0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = distance_squared(p, pts[i]);
    if (best.first < 0 || d2 < best.second) best = {static_cast<int>(i), d2};
  }
  return best;
}

}  // namespace molblocks::testing
