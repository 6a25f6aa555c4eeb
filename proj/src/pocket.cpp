#include "molblocks/pocket.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "molblocks/element.h"
#include "molblocks/errors.h"

namespace molblocks {

std::string ResidueId::to_string() const {
  return chain + "/" + name + "/" + std::to_string(seq) + icode;
}

std::vector<int> Structure::heavy_atoms() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(atoms.size()); ++i) {
    if (atoms[static_cast<std::size_t>(i)].is_heavy()) out.push_back(i);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// 1-based inclusive columns, clipped to the line.
std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
  if (line.size() < first) return {};
  return trim(line.substr(first - 1, std::min(last, line.size()) - first + 1));
}

std::string normalize_symbol(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    out += static_cast<char>(i == 0 ? std::toupper(static_cast<unsigned char>(c))
                                    : std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool known_symbol(const std::string& s) {
  if (s.empty()) return false;
  if (s == "D") return true;
  const auto z = atomic_number_of(s);
  return z.has_value() && *z > 0;
}

std::string autodock_element(std::string_view type) {
  static const std::map<std::string_view, const char*> kTypes = {
      {"A", "C"},  {"NA", "N"}, {"NS", "N"},  {"OA", "O"},  {"OS", "O"},  {"SA", "S"},
      {"HD", "H"}, {"HS", "H"}, {"G0", "C"},  {"G1", "C"},  {"G2", "C"},  {"G3", "C"},
      {"CG0", "C"}, {"CG1", "C"}, {"CG2", "C"}, {"CG3", "C"},
  };
  auto it = kTypes.find(type);
  return it != kTypes.end() ? it->second : normalize_symbol(type);
}

std::string element_from_name(std::string_view line) {
  const std::string_view raw = line.size() >= 16 ? line.substr(12, 4) : std::string_view{};
  const std::string_view name = trim(raw);
  std::string letters;
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      letters += c;
    } else if (!letters.empty()) {
      break;
    }
  }
  if (letters.empty()) return {};
  const bool left_aligned = !raw.empty() && std::isalpha(static_cast<unsigned char>(raw[0]));
  // four-character hydrogen names (HG12) start in column 13 too
  const bool hydrogen_name = (letters[0] == 'H' || letters[0] == 'h') && name.size() == 4;
  if (left_aligned && letters.size() >= 2 && !hydrogen_name) {
    const std::string two = normalize_symbol(letters.substr(0, 2));
    if (known_symbol(two)) return two;
  }
  return normalize_symbol(letters.substr(0, 1));
}

double parse_coordinate(std::string_view field, std::size_t line_no) {
  double v = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw FormatError("line " + std::to_string(line_no) + ": malformed coordinate '" +
                      std::string(field) + "'");
  }
  return v;
}

}  // namespace

Structure parse_structure(std::string_view text, StructureFormat format) {
  Structure s;
  std::map<ResidueId, int> residue_index;
  std::map<std::pair<int, std::string>, int> alt_atoms;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string_view record = line.substr(0, std::min<std::size_t>(6, line.size()));
    if (record.starts_with("ENDMDL") || trim(record) == "END") {
      if (!s.atoms.empty()) break;
      continue;
    }
    if (!record.starts_with("ATOM") && !record.starts_with("HETATM")) continue;
    if (line.size() < 54) {
      throw FormatError("line " + std::to_string(line_no) + ": atom record ends before column 54");
    }

    StructAtom atom;
    atom.pos = {parse_coordinate(column(line, 31, 38), line_no),
                parse_coordinate(column(line, 39, 46), line_no),
                parse_coordinate(column(line, 47, 54), line_no)};
    atom.name = std::string(column(line, 13, 16));
    const auto occ = column(line, 55, 60);
    if (!occ.empty()) {
      double v = 0;
      auto res = std::from_chars(occ.data(), occ.data() + occ.size(), v);
      if (res.ec == std::errc() && std::isfinite(v)) atom.occupancy = v;
    }
    const auto type = format == StructureFormat::kPdbqt ? column(line, 77, 79) : column(line, 77, 78);
    atom.element = format == StructureFormat::kPdbqt ? autodock_element(type) : normalize_symbol(type);
    if (!known_symbol(atom.element)) atom.element = element_from_name(line);
    if (!known_symbol(atom.element)) {
      throw FormatError("line " + std::to_string(line_no) + ": cannot determine element");
    }

    ResidueId rid;
    rid.chain = std::string(column(line, 22, 22));
    rid.name = std::string(column(line, 18, 20));
    rid.icode = std::string(column(line, 27, 27));
    const auto seq = column(line, 23, 26);
    if (!seq.empty()) {
      auto res = std::from_chars(seq.data(), seq.data() + seq.size(), rid.seq);
      if (res.ec != std::errc() || res.ptr != seq.data() + seq.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": malformed residue number");
      }
    }
    auto [it, inserted] = residue_index.emplace(rid, static_cast<int>(s.residues.size()));
    if (inserted) s.residues.push_back({rid, {}});
    atom.residue = it->second;

    const char alt = line.size() >= 17 ? line[16] : ' ';
    if (alt != ' ') {
      const auto key = std::make_pair(atom.residue, atom.name);
      auto found = alt_atoms.find(key);
      if (found != alt_atoms.end()) {
        auto& kept = s.atoms[static_cast<std::size_t>(found->second)];
        if (atom.occupancy > kept.occupancy) kept = std::move(atom);
        continue;
      }
      alt_atoms.emplace(key, static_cast<int>(s.atoms.size()));
    }
    s.residues[static_cast<std::size_t>(atom.residue)].atoms.push_back(
        static_cast<int>(s.atoms.size()));
    s.atoms.push_back(std::move(atom));
  }
  if (s.atoms.empty()) throw FormatError("no ATOM/HETATM records");
  return s;
}

Structure load_structure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool pdbqt = path.size() >= 6 && path.ends_with(".pdbqt");
  return parse_structure(buf.str(), pdbqt ? StructureFormat::kPdbqt : StructureFormat::kPdb);
}

// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(std::vector<Vec3> points, double cell)
    : points_(std::move(points)), cell_(cell) {
  if (!(cell > 0) || !std::isfinite(cell)) throw InvalidArgument("cell size must be positive");
  if (points_.empty()) return;
  double lo[3] = {points_[0].x, points_[0].y, points_[0].z};
  double hi[3] = {lo[0], lo[1], lo[2]};
  for (const auto& p : points_) {
    const double c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  constexpr double kMaxCells = 1 << 22;
  for (;;) {
    double total = 1;
    for (int a = 0; a < 3; ++a) total *= std::floor((hi[a] - lo[a]) / cell_) + 1;
    if (total <= kMaxCells) break;
    cell_ *= std::cbrt(total / kMaxCells) * 1.01;
  }
  for (int a = 0; a < 3; ++a) {
    origin_[a] = lo[a];
    dims_[a] = static_cast<long>(std::floor((hi[a] - lo[a]) / cell_)) + 1;
  }
  const auto ncells = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  std::vector<std::size_t> slot(points_.size());
  start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    const long x = std::clamp(cell_of(p.x, 0), 0L, dims_[0] - 1);
    const long y = std::clamp(cell_of(p.y, 1), 0L, dims_[1] - 1);
    const long z = std::clamp(cell_of(p.z, 2), 0L, dims_[2] - 1);
    slot[i] = static_cast<std::size_t>((x * dims_[1] + y) * dims_[2] + z);
    ++start_[slot[i] + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) start_[c + 1] += start_[c];
  items_.resize(points_.size());
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    items_[static_cast<std::size_t>(fill[slot[i]]++)] = static_cast<int>(i);
  }
}

long SpatialIndex::cell_of(double v, int axis) const {
  const double c = std::floor((v - origin_[axis]) / cell_);
  return static_cast<long>(std::clamp(c, -1e15, 1e15));
}

template <class Fn>
void SpatialIndex::scan_box(long x0, long x1, long y0, long y1, long z0, long z1, Fn&& fn) const {
  x0 = std::max(x0, 0L), y0 = std::max(y0, 0L), z0 = std::max(z0, 0L);
  x1 = std::min(x1, dims_[0] - 1), y1 = std::min(y1, dims_[1] - 1), z1 = std::min(z1, dims_[2] - 1);
  for (long x = x0; x <= x1; ++x) {
    for (long y = y0; y <= y1; ++y) {
      for (long z = z0; z <= z1; ++z) {
        const auto c = static_cast<std::size_t>((x * dims_[1] + y) * dims_[2] + z);
        for (int k = start_[c]; k < start_[c + 1]; ++k) {
          if (fn(items_[static_cast<std::size_t>(k)])) return;
        }
      }
    }
  }
}

std::vector<int> SpatialIndex::within(const Vec3& p, double r) const {
  std::vector<int> out;
  if (points_.empty() || !(r >= 0)) return out;
  const double slack = r + 1e-9 * (1 + r + std::abs(p.x) + std::abs(p.y) + std::abs(p.z));
  const double r2 = r * r;
  scan_box(cell_of(p.x - slack, 0), cell_of(p.x + slack, 0), cell_of(p.y - slack, 1),
           cell_of(p.y + slack, 1), cell_of(p.z - slack, 2), cell_of(p.z + slack, 2), [&](int i) {
             if (distance_squared(p, points_[static_cast<std::size_t>(i)]) <= r2) out.push_back(i);
             return false;
           });
  std::sort(out.begin(), out.end());
  return out;
}

bool SpatialIndex::any_within(const Vec3& p, double r) const {
  if (points_.empty() || !(r >= 0)) return false;
  const double slack = r + 1e-9 * (1 + r + std::abs(p.x) + std::abs(p.y) + std::abs(p.z));
  const double r2 = r * r;
  bool hit = false;
  scan_box(cell_of(p.x - slack, 0), cell_of(p.x + slack, 0), cell_of(p.y - slack, 1),
           cell_of(p.y + slack, 1), cell_of(p.z - slack, 2), cell_of(p.z + slack, 2), [&](int i) {
             hit = distance_squared(p, points_[static_cast<std::size_t>(i)]) <= r2;
             return hit;
           });
  return hit;
}

std::pair<int, double> SpatialIndex::nearest(const Vec3& p) const {
  std::pair<int, double> best{-1, std::numeric_limits<double>::infinity()};
  if (points_.empty()) return best;
  const long c[3] = {cell_of(p.x, 0), cell_of(p.y, 1), cell_of(p.z, 2)};
  long ring = 0;
  long full = 0;
  for (int a = 0; a < 3; ++a) {
    ring = std::max(ring, std::max(-c[a], c[a] - (dims_[a] - 1)));
    full = std::max(full, std::max(c[a], dims_[a] - 1 - c[a]));
  }
  auto visit = [&](int i) {
    const double d2 = distance_squared(p, points_[static_cast<std::size_t>(i)]);
    if (d2 < best.second || (d2 == best.second && i < best.first)) best = {i, d2};
    return false;
  };
  for (;; ++ring) {
    if (ring == 0) {
      scan_box(c[0], c[0], c[1], c[1], c[2], c[2], visit);
    } else {
      // the two x faces, then y faces, then z faces without overlap
      scan_box(c[0] - ring, c[0] - ring, c[1] - ring, c[1] + ring, c[2] - ring, c[2] + ring, visit);
      scan_box(c[0] + ring, c[0] + ring, c[1] - ring, c[1] + ring, c[2] - ring, c[2] + ring, visit);
      scan_box(c[0] - ring + 1, c[0] + ring - 1, c[1] - ring, c[1] - ring, c[2] - ring, c[2] + ring, visit);
      scan_box(c[0] - ring + 1, c[0] + ring - 1, c[1] + ring, c[1] + ring, c[2] - ring, c[2] + ring, visit);
      scan_box(c[0] - ring + 1, c[0] + ring - 1, c[1] - ring + 1, c[1] + ring - 1, c[2] - ring,
               c[2] - ring, visit);
      scan_box(c[0] - ring + 1, c[0] + ring - 1, c[1] - ring + 1, c[1] + ring - 1, c[2] + ring,
               c[2] + ring, visit);
    }
    if (ring >= full) break;
    // anything beyond this ring is at least ring * cell away
    const double bound = static_cast<double>(ring) * cell_ * (1 - 1e-9);
    if (best.first >= 0 && best.second < bound * bound) break;
  }
  return best;
}

// ---------------------------------------------------------------------------

void GridConfig::validate() const {
  if (!(edge > 0) || !std::isfinite(edge)) throw InvalidArgument("grid edge must be positive");
  if (!(resolution > 0) || resolution > edge) {
    throw InvalidArgument("grid resolution must lie in (0, edge]");
  }
  if (!(receptor_clearance > 0) || !(ligand_clearance > 0)) {
    throw InvalidArgument("clearances must be positive");
  }
}

int GridConfig::points_per_axis() const {
  return 2 * static_cast<int>(std::floor(edge / (2 * resolution) + 1e-9)) + 1;
}

namespace {

std::vector<Vec3> heavy_positions(const Structure& s) {
  std::vector<Vec3> out;
  for (const auto& a : s.atoms) {
    if (a.is_heavy()) out.push_back(a.pos);
  }
  return out;
}

struct PocketIndex {
  PocketIndex(const Structure& receptor, const Structure& ligand, const GridConfig& cfg,
              double contact)
      : receptor_heavy(receptor.heavy_atoms()),
        clash(heavy_positions(receptor), cfg.receptor_clearance),
        self(heavy_positions(ligand), cfg.ligand_clearance),
        contacts(heavy_positions(receptor), contact) {}

  std::vector<int> receptor_heavy;
  SpatialIndex clash;
  SpatialIndex self;
  SpatialIndex contacts;
};

VolumeResult volume_at(const Vec3& atom, const PocketIndex& idx, const GridConfig& cfg) {
  const int half = cfg.points_per_axis() / 2;
  VolumeResult r;
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      for (int k = -half; k <= half; ++k) {
        const Vec3 g{atom.x + i * cfg.resolution, atom.y + j * cfg.resolution,
                     atom.z + k * cfg.resolution};
        if (idx.clash.any_within(g, cfg.receptor_clearance)) continue;
        if (idx.self.any_within(g, cfg.ligand_clearance)) continue;
        ++r.grid_count;
      }
    }
  }
  r.volume = r.grid_count * cfg.resolution * cfg.resolution * cfg.resolution;
  return r;
}

std::vector<ResidueId> residues_near(const Vec3& atom, const Structure& receptor,
                                     const std::vector<int>& heavy, const SpatialIndex& index,
                                     double contact) {
  std::vector<int> hit;
  for (int i : index.within(atom, contact)) {
    hit.push_back(receptor.atoms[static_cast<std::size_t>(heavy[static_cast<std::size_t>(i)])].residue);
  }
  std::sort(hit.begin(), hit.end());
  hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
  std::vector<ResidueId> out;
  for (int r : hit) out.push_back(receptor.residues[static_cast<std::size_t>(r)].id);
  return out;
}

void check_contact(double contact) {
  if (!(contact > 0) || !std::isfinite(contact)) throw InvalidArgument("contact distance must be positive");
}

nlohmann::ordered_json residues_json(const std::vector<ResidueId>& ids) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : ids) {
    arr.push_back({{"chain", r.chain}, {"resname", r.name}, {"resseq", r.seq}, {"icode", r.icode}});
  }
  return arr;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::vector<ResidueId> neighboring_residues(const Vec3& atom, const Structure& receptor,
                                            double contact) {
  check_contact(contact);
  const SpatialIndex index(heavy_positions(receptor), contact);
  return residues_near(atom, receptor, receptor.heavy_atoms(), index, contact);
}

VolumeResult available_volume(const Vec3& atom, const Structure& receptor, const Structure& ligand,
                              const GridConfig& cfg) {
  cfg.validate();
  const PocketIndex idx(receptor, ligand, cfg, 1.0);
  return volume_at(atom, idx, cfg);
}

std::vector<Hotspot> identify_hotspots(const Structure& receptor, const Structure& ligand, int k,
                                       double contact, const GridConfig& cfg, int threads) {
  cfg.validate();
  check_contact(contact);
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const auto heavy = ligand.heavy_atoms();
  if (heavy.empty()) throw InvalidArgument("ligand has no heavy atoms");
  const PocketIndex idx(receptor, ligand, cfg, contact);

  std::vector<Hotspot> all(heavy.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < heavy.size(); i += stride) {
      const auto& atom = ligand.atoms[static_cast<std::size_t>(heavy[i])];
      auto& h = all[i];
      h.ligand_atom_index = heavy[i];
      h.element = atom.element;
      const auto v = volume_at(atom.pos, idx, cfg);
      h.volume = v.volume;
      h.grid_count = v.grid_count;
      h.neighbors = residues_near(atom.pos, receptor, idx.receptor_heavy, idx.contacts, contact);
    }
  };
  if (threads < 1) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), heavy.size());
  if (n <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    for (auto& t : pool) t.join();
  }

  std::sort(all.begin(), all.end(), [](const Hotspot& a, const Hotspot& b) {
    if (a.grid_count != b.grid_count) return a.grid_count > b.grid_count;
    return a.ligand_atom_index < b.ligand_atom_index;
  });
  if (all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = static_cast<int>(i) + 1;
  return all;
}

std::string hotspots_to_json(const std::vector<Hotspot>& hotspots) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& h : hotspots) {
    arr.push_back({{"rank", h.rank},
                   {"ligand_atom_index", h.ligand_atom_index},
                   {"element", h.element},
                   {"available_volume_A3", round3(h.volume)},
                   {"grid_count", h.grid_count},
                   {"neighboring_residues", residues_json(h.neighbors)}});
  }
  return arr.dump(2);
}

ContextRecord context_record(const Hotspot& h, const Fragmentation& fragments,
                             const NameTable& names, double contact) {
  ContextRecord rec;
  nlohmann::ordered_json j;
  j["atom_type"] = h.element;
  j["available_volume_A3"] = round3(h.volume);
  j["neighboring_residues"] = residues_json(h.neighbors);
  j["fragments"] = nlohmann::ordered_json::parse(to_json(fragments, names));
  rec.json = j.dump();

  std::ostringstream text;
  text << "Growth site: ligand atom " << h.ligand_atom_index << " (" << h.element << ") with "
       << fixed(h.volume, 3) << " A^3 of unoccupied space around it. ";
  if (h.neighbors.empty()) {
    text << "No receptor residues lie within " << fixed(contact, 1) << " A of this atom. ";
  } else {
    text << "Receptor residues within " << fixed(contact, 1) << " A: ";
    for (std::size_t i = 0; i < h.neighbors.size(); ++i) {
      text << (i ? ", " : "") << h.neighbors[i].to_string();
    }
    text << ". ";
  }
  text << "Current fragments: " << render(fragments, names, RenderStyle::kFull) << ".";
  rec.text = text.str();
  return rec;
}

}  // namespace molblocks
