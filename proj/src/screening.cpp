#include "molblocks/screening.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "molblocks/errors.h"
#include "molblocks/smiles.h"

namespace molblocks {

Fingerprint::Fingerprint(int bits, int radius) : bits_(bits), radius_(radius) {
  if (bits < 1) throw InvalidArgument("fingerprint needs at least one bit");
  if (radius < 0) throw InvalidArgument("fingerprint radius must be >= 0");
  words_.assign(static_cast<std::size_t>((bits + 63) / 64), 0);
}

Fingerprint Fingerprint::from_bits(int bits, std::span<const int> on) {
  Fingerprint fp(bits, 0);
  for (int b : on) fp.set(b);
  return fp;
}

void Fingerprint::set(int bit) {
  if (bit < 0 || bit >= bits_) throw InvalidArgument("bit index out of range");
  words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1} << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  if (bit < 0 || bit >= bits_) return false;
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1U;
}

int Fingerprint::count() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < bits_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix(h ^ mix(v)); }

}  // namespace

Fingerprint circular_fingerprint(const Molecule& m, int radius, int bits) {
  Fingerprint fp(bits, radius);
  std::vector<int> atoms;
  for (int i = 0; i < m.atom_count(); ++i) {
    if (!m.atom(i).is_hydrogen()) atoms.push_back(i);
  }
  std::vector<std::uint64_t> id(static_cast<std::size_t>(m.atom_count()), 0);
  for (int i : atoms) {
    const auto& a = m.atom(i);
    int heavy_degree = 0;
    for (const auto& nb : m.neighbors(i)) heavy_degree += !m.atom(nb.atom).is_hydrogen();
    std::uint64_t h = mix(static_cast<std::uint64_t>(a.atomic_number));
    h = combine(h, static_cast<std::uint64_t>(heavy_degree));
    h = combine(h, static_cast<std::uint64_t>(m.total_h(i)));
    h = combine(h, static_cast<std::uint64_t>(a.formal_charge + 16));
    h = combine(h, a.aromatic ? 1U : 0U);
    h = combine(h, m.atom_in_ring(i) ? 1U : 0U);
    id[static_cast<std::size_t>(i)] = h;
    fp.set(static_cast<int>(h % static_cast<std::uint64_t>(bits)));
  }
  // bond coverage per atom; an environment that covers nothing new, or the
  // same bonds as another atom's in this round, is not emitted
  using Cover = std::vector<bool>;
  std::vector<Cover> cover(static_cast<std::size_t>(m.atom_count()),
                           Cover(static_cast<std::size_t>(m.bond_count()), false));
  std::vector<bool> live(static_cast<std::size_t>(m.atom_count()), true);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int round = 1; round <= radius; ++round) {
    auto next = id;
    auto next_cover = cover;
    std::map<Cover, std::uint64_t> emitted;
    for (int i : atoms) {
      if (!live[static_cast<std::size_t>(i)]) continue;
      env.clear();
      auto& cv = next_cover[static_cast<std::size_t>(i)];
      for (const auto& nb : m.neighbors(i)) {
        if (m.atom(nb.atom).is_hydrogen()) continue;
        env.emplace_back(static_cast<std::uint64_t>(m.bond(nb.bond).order),
                         id[static_cast<std::size_t>(nb.atom)]);
        cv[static_cast<std::size_t>(nb.bond)] = true;
        const auto& other = cover[static_cast<std::size_t>(nb.atom)];
        for (std::size_t k = 0; k < other.size(); ++k) {
          if (other[k]) cv[k] = true;
        }
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = combine(static_cast<std::uint64_t>(round), id[static_cast<std::size_t>(i)]);
      for (const auto& [order, nid] : env) h = combine(combine(h, order), nid);
      next[static_cast<std::size_t>(i)] = h;
      if (cv == cover[static_cast<std::size_t>(i)]) {
        live[static_cast<std::size_t>(i)] = false;
        continue;
      }
      auto [it, fresh] = emitted.emplace(cv, h);
      if (!fresh) it->second = std::min(it->second, h);
    }
    for (const auto& [cv, h] : emitted) fp.set(static_cast<int>(h % static_cast<std::uint64_t>(bits)));
    id = std::move(next);
    cover = std::move(next_cover);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) throw InvalidArgument("fingerprint sizes differ");
  int both = 0;
  int either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / either;
}

std::vector<Cluster> butina_cluster(std::span<const Fingerprint> fps, double cutoff, int threads) {
  if (fps.empty()) throw InvalidArgument("nothing to cluster");
  if (!(cutoff > 0) || cutoff > 1) throw InvalidArgument("cutoff must lie in (0, 1]");
  const auto n = fps.size();
  std::vector<std::vector<int>> nbrs(n);
  auto rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && 1.0 - tanimoto(fps[i], fps[j]) < cutoff) nbrs[i].push_back(static_cast<int>(j));
      }
    }
  };
  if (threads < 1) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(rows, t, workers);
    for (auto& t : pool) t.join();
  }

  std::vector<int> open(n);
  for (std::size_t i = 0; i < n; ++i) open[i] = static_cast<int>(nbrs[i].size());
  std::vector<bool> assigned(n, false);
  std::vector<Cluster> out;
  std::size_t left = n;
  while (left > 0) {
    std::size_t c = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!assigned[i] && (c == n || open[i] > open[c])) c = i;
    }
    Cluster cl;
    cl.id = static_cast<int>(out.size());
    cl.centroid = static_cast<int>(c);
    cl.members.push_back(cl.centroid);
    for (int j : nbrs[c]) {
      if (!assigned[static_cast<std::size_t>(j)]) cl.members.push_back(j);
    }
    for (int x : cl.members) {
      assigned[static_cast<std::size_t>(x)] = true;
      --left;
      for (int y : nbrs[static_cast<std::size_t>(x)]) --open[static_cast<std::size_t>(y)];
    }
    out.push_back(std::move(cl));
  }
  return out;
}

std::vector<Cluster> butina_cluster(std::span<const Molecule> mols, double cutoff, int threads) {
  std::vector<Fingerprint> fps;
  fps.reserve(mols.size());
  for (const auto& m : mols) fps.push_back(circular_fingerprint(m));
  return butina_cluster(fps, cutoff, threads);
}

void write_clusters_jsonl(const std::vector<Cluster>& clusters, std::span<const std::string> smiles,
                          std::ostream& out) {
  for (const auto& c : clusters) {
    nlohmann::ordered_json j;
    j["cluster_id"] = c.id;
    j["representative_smiles"] = smiles[static_cast<std::size_t>(c.centroid)];
    auto members = nlohmann::ordered_json::array();
    for (int m : c.members) members.push_back(smiles[static_cast<std::size_t>(m)]);
    j["member_smiles"] = std::move(members);
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

double admet_score(const AdmetProbabilities& p) {
  const std::pair<const char*, const std::optional<double>*> required[] = {
      {"p_dili", &p.p_dili}, {"p_ames", &p.p_ames}, {"p_herg", &p.p_herg},
      {"p_pgp", &p.p_pgp},   {"p_hia", &p.p_hia},
  };
  for (const auto& [name, v] : required) {
    if (!v->has_value()) throw InvalidArgument(std::string("missing ") + name);
    if (!(**v >= 0.0 && **v <= 1.0)) throw InvalidArgument(std::string(name) + " outside [0, 1]");
  }
  return (1.0 - *p.p_dili) + (1.0 - *p.p_ames) + (1.0 - *p.p_herg) + (1.0 - *p.p_pgp) + *p.p_hia;
}

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

FormatError line_error(std::size_t line, const std::string& what) {
  return FormatError("line " + std::to_string(line) + ": " + what);
}

std::optional<double> parse_cell(std::string_view cell, std::size_t line) {
  cell = strip(cell);
  if (cell.empty() || cell == "NA" || cell == "null") return std::nullopt;
  double v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw line_error(line, "not a number: '" + std::string(cell) + "'");
  }
  return v;
}

std::optional<double>* field(CandidateRecord& r, std::string_view name) {
  if (name == "p_dili") return &r.admet.p_dili;
  if (name == "p_ames") return &r.admet.p_ames;
  if (name == "p_herg") return &r.admet.p_herg;
  if (name == "p_pgp") return &r.admet.p_pgp;
  if (name == "p_hia") return &r.admet.p_hia;
  if (name == "p_bbb") return &r.admet.p_bbb;
  if (name == "qed") return &r.qed;
  if (name == "sa") return &r.sa;
  if (name == "logp") return &r.logp;
  return nullptr;
}

void finish(CandidateRecord& r, std::size_t line) {
  if (r.smiles.empty()) throw line_error(line, "missing smiles");
  try {
    r.descriptors = compute_descriptors(parse_smiles(r.smiles));
  } catch (const Error& e) {
    throw line_error(line, e.what());
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto tab = line.find('\t');
    out.push_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return out;
}

}  // namespace

std::optional<CandidateRecord> CandidateReader::next() {
  if (fatal_) return std::nullopt;
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto body = strip(text);
    if (body.empty() || body.front() == '#') continue;
    if (!started_) {
      started_ = true;
      jsonl_ = body.front() == '{';
      if (!jsonl_) {
        for (auto col : split_tabs(body)) header_.emplace_back(strip(col));
        if (std::find(header_.begin(), header_.end(), "smiles") == header_.end()) {
          fatal_ = true;
          throw line_error(line_, "header lacks a smiles column");
        }
        continue;
      }
    }
    CandidateRecord r;
    if (jsonl_) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        throw line_error(line_, e.what());
      }
      if (!j.is_object()) throw line_error(line_, "expected a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (key == "smiles") {
          if (!value.is_string()) throw line_error(line_, "smiles must be a string");
          r.smiles = value.get<std::string>();
        } else if (auto* f = field(r, key)) {
          if (value.is_null()) continue;
          if (!value.is_number()) throw line_error(line_, key + " must be a number");
          *f = value.get<double>();
        }
      }
    } else {
      const auto cells = split_tabs(body);
      if (cells.size() > header_.size()) throw line_error(line_, "more cells than header columns");
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (header_[c] == "smiles") {
          r.smiles = std::string(strip(cells[c]));
        } else if (auto* f = field(r, header_[c])) {
          *f = parse_cell(cells[c], line_);
        }
      }
    }
    finish(r, line_);
    return r;
  }
  if (in_.bad()) throw Error("I/O failure while reading candidates");
  return std::nullopt;
}

std::vector<CandidateRecord> read_candidates(std::istream& in) {
  CandidateReader reader(in);
  std::vector<CandidateRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

bool passes_filter(const CandidateRecord& r, const FilterConfig& cfg) {
  double score = 0;
  try {
    score = admet_score(r.admet);
  } catch (const InvalidArgument&) {
    return false;
  }
  if (!(score > cfg.admet_threshold)) return false;
  if (r.qed) return *r.qed > cfg.qed_threshold;
  return cfg.admet_only;
}

std::vector<CandidateRecord> filter_candidates(std::span<const CandidateRecord> records,
                                               const FilterConfig& cfg) {
  std::vector<CandidateRecord> out;
  for (const auto& r : records) {
    if (passes_filter(r, cfg)) out.push_back(r);
  }
  return out;
}

RuleOfThree rule_of_three(const Descriptors& d, std::optional<double> logp) {
  RuleOfThree r;
  if (d.molecular_weight > 300.0) r.violations.emplace_back("MW");
  if (d.hbd > 3) r.violations.emplace_back("HBD");
  if (d.hba > 3) r.violations.emplace_back("HBA");
  if (logp) {
    r.logp_evaluated = true;
    if (*logp > 3.0) r.violations.emplace_back("cLogP");
  }
  r.pass = r.violations.empty();
  return r;
}

}  // namespace molblocks
