#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molblocks/tokenizer.h"

namespace molblocks {

struct Vec3 {
  double x = 0;
  double y = 0;
  double z = 0;
};

inline double distance_squared(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

struct ResidueId {
  std::string chain;
  std::string name;
  int seq = 0;
  std::string icode;

  auto operator<=>(const ResidueId&) const = default;
  /// "A/ASP/189", insertion code appended to the number ("A/ASP/189B").
  std::string to_string() const;
};

struct StructAtom {
  std::string element;  // normalized symbol, "Cl" not "CL"
  Vec3 pos;
  std::string name;
  double occupancy = 1.0;
  int residue = 0;  // index into Structure::residues
  bool is_heavy() const { return element != "H" && element != "D"; }
};

struct Residue {
  ResidueId id;
  std::vector<int> atoms;
};

struct Structure {
  std::vector<StructAtom> atoms;
  std::vector<Residue> residues;

  std::vector<int> heavy_atoms() const;
};

enum class StructureFormat { kPdb, kPdbqt };

/// Fixed-column ATOM/HETATM parse. Only the first MODEL is read; for
/// alternate locations the highest-occupancy record of each atom is kept.
/// PDBQT AutoDock types map to elements (A -> C, OA -> O, HD -> H, ...).
/// Throws FormatError without atom records or on a bad coordinate field.
Structure parse_structure(std::string_view text, StructureFormat format);
/// Format taken from the extension (.pdbqt, otherwise pdb).
Structure load_structure(const std::string& path);

/// Uniform cell list over a fixed point set. Distance tests use
/// distance_squared, so results match an exhaustive scan exactly.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(std::vector<Vec3> points, double cell);

  std::size_t size() const { return points_.size(); }
  /// Indices with distance <= r, ascending.
  std::vector<int> within(const Vec3& p, double r) const;
  /// Whether some point has distance <= r.
  bool any_within(const Vec3& p, double r) const;
  /// Nearest point as (index, squared distance); (-1, inf) when empty.
  /// Ties go to the lower index.
  std::pair<int, double> nearest(const Vec3& p) const;

 private:
  long cell_of(double v, int axis) const;
  template <class Fn>
  void scan_box(long x0, long x1, long y0, long y1, long z0, long z1, Fn&& fn) const;

  std::vector<Vec3> points_;
  double cell_ = 1.0;
  double origin_[3] = {0, 0, 0};
  long dims_[3] = {0, 0, 0};
  std::vector<int> start_;  // CSR offsets per cell, x-major
  std::vector<int> items_;
};

struct GridConfig {
  double edge = 5.0;
  double resolution = 0.5;
  double receptor_clearance = 2.2;
  double ligand_clearance = 1.2;

  /// Throws InvalidArgument unless edge > 0, 0 < resolution <= edge and
  /// both clearances are positive.
  void validate() const;
  /// Lattice points per axis: 2 * floor(edge / (2 * resolution)) + 1.
  int points_per_axis() const;
};

struct VolumeResult {
  double volume = 0;  // grid_count * resolution^3, A^3
  int grid_count = 0;
};

/// Residues with a heavy atom at distance <= contact, in receptor order.
std::vector<ResidueId> neighboring_residues(const Vec3& atom, const Structure& receptor,
                                            double contact = 7.0);

/// Lattice points around `atom` farther than receptor_clearance from every
/// receptor heavy atom and farther than ligand_clearance from every ligand
/// heavy atom.
VolumeResult available_volume(const Vec3& atom, const Structure& receptor,
                              const Structure& ligand, const GridConfig& cfg = {});

struct Hotspot {
  int ligand_atom_index = 0;  // index into the ligand's atom list
  std::string element;
  double volume = 0;
  int grid_count = 0;
  std::vector<ResidueId> neighbors;
  int rank = 0;
};

/// Scores every ligand heavy atom, sorts by volume descending (ties: lower
/// atom index first) and keeps the first k. Throws InvalidArgument for a
/// ligand without heavy atoms, k < 1 or contact <= 0.
std::vector<Hotspot> identify_hotspots(const Structure& receptor, const Structure& ligand,
                                       int k = 5, double contact = 7.0,
                                       const GridConfig& cfg = {}, int threads = 1);

/// JSON array of {rank, ligand_atom_index, element, available_volume_A3,
/// grid_count, neighboring_residues: [{chain, resname, resseq, icode}]}.
std::string hotspots_to_json(const std::vector<Hotspot>& hotspots);

struct ContextRecord {
  std::string json;  // {atom_type, available_volume_A3, neighboring_residues, fragments}
  std::string text;  // English paragraph for a downstream prompt
};

ContextRecord context_record(const Hotspot& h, const Fragmentation& fragments,
                             const NameTable& names = NameTable::standard(),
                             double contact = 7.0);

}  // namespace molblocks
