#include "molblocks/vocab.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "molblocks/errors.h"
#include "molblocks/smiles.h"

namespace molblocks {

std::uint64_t Vocabulary::frequency(const std::string& key) const {
  const auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, std::uint64_t>> Vocabulary::sorted() const {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return rows;
}

std::vector<std::string> enumerate_blocks(const Molecule& m, bool include_full,
                                          std::uint64_t* breaks, const BricsRules& rules) {
  const auto brics = find_brics_bonds(m, rules);
  const int k = static_cast<int>(brics.size());
  std::vector<std::string> out;
  std::uint64_t visited = 0;
  // index 0 and k + 1 are the virtual terminal bonds
  for (int i = 0; i <= k + 1; ++i) {
    for (int j = i + 1; j <= k + 1; ++j) {
      ++visited;
      const bool vi = i == 0;
      const bool vj = j == k + 1;
      if (vi && vj) {
        if (include_full) out.push_back(write_smiles(m));
        continue;
      }
      if (vi || vj) {
        const BricsBond& b = brics[static_cast<std::size_t>(vi ? j - 1 : i - 1)];
        const Bond& bond = m.bond(b.bond_index);
        const int cut[] = {b.bond_index};
        out.push_back(write_smiles(extract_fragment(m, cut, vi ? bond.begin : bond.end)));
        continue;
      }
      const Bond& first = m.bond(brics[static_cast<std::size_t>(i - 1)].bond_index);
      const int cut[] = {brics[static_cast<std::size_t>(i - 1)].bond_index,
                         brics[static_cast<std::size_t>(j - 1)].bond_index};
      Molecule middle = extract_fragment(m, cut, first.begin);
      if (middle.wildcard_count() != 2) middle = extract_fragment(m, cut, first.end);
      out.push_back(write_smiles(middle));
    }
  }
  if (breaks) *breaks += visited;
  return out;
}

namespace {

struct Partial {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t parsed = 0;
  std::uint64_t skipped = 0;
  std::uint64_t breaks = 0;
};

void count_range(std::span<const std::string> smiles, bool include_full, Partial& out) {
  for (const auto& s : smiles) {
    Molecule m;
    try {
      m = parse_smiles(s);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    ++out.parsed;
    for (auto& key : enumerate_blocks(m, include_full, &out.breaks)) ++out.counts[std::move(key)];
  }
}

}  // namespace

VocabBuild build_vocabulary(std::span<const std::string> smiles, const VocabConfig& config) {
  if (smiles.empty()) throw InvalidArgument("empty corpus");
  if (config.f_min < 1) throw InvalidArgument("f_min must be >= 1");
  const std::size_t parts =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.threads, 1)), 1,
                              smiles.size());
  std::vector<Partial> partial(parts);
  std::vector<std::thread> workers;
  const std::size_t chunk = (smiles.size() + parts - 1) / parts;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t begin = std::min(p * chunk, smiles.size());
    const std::size_t end = std::min(begin + chunk, smiles.size());
    auto range = smiles.subspan(begin, end - begin);
    if (parts == 1) {
      count_range(range, config.include_full, partial[p]);
    } else {
      workers.emplace_back(count_range, range, config.include_full, std::ref(partial[p]));
    }
  }
  for (auto& w : workers) w.join();

  VocabBuild result;
  result.vocab.f_min = config.f_min;
  result.vocab.include_full = config.include_full;
  for (auto& p : partial) {
    for (auto& [key, n] : p.counts) result.vocab.counts[key] += n;
    result.vocab.corpus_size += p.parsed;
    result.skipped += p.skipped;
    result.breaks += p.breaks;
  }
  return result;
}

VocabBuild build_vocabulary(std::istream& corpus, const VocabConfig& config) {
  std::vector<std::string> smiles;
  std::string line;
  SmilesRecord rec;
  while (std::getline(corpus, line)) {
    if (split_smiles_record(line, rec)) smiles.push_back(rec.smiles);
  }
  if (corpus.bad()) throw Error("I/O failure while reading corpus");
  return build_vocabulary(smiles, config);
}

void save_vocabulary(const Vocabulary& v, std::ostream& out) {
  out << "# " << v.version << '\n'
      << "# f_min=" << v.f_min << '\n'
      << "# corpus_size=" << v.corpus_size << '\n'
      << "# include_full=" << (v.include_full ? "true" : "false") << '\n';
  for (const auto& [key, n] : v.sorted()) out << key << '\t' << n << '\n';
}

void save_vocabulary(const Vocabulary& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  save_vocabulary(v, out);
  if (!out) throw Error("write failed for '" + path + "'");
}

namespace {

std::uint64_t parse_count(std::string_view text, int line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("vocabulary line " + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
  }
  return v;
}

}  // namespace

Vocabulary load_vocabulary(std::istream& in) {
  Vocabulary v;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line.rfind("# bfe-vocab ", 0) != 0) throw FormatError("vocabulary: missing header");
      v.version = line.substr(2);
      header = true;
      continue;
    }
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view body = std::string_view(line).substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view name = body.substr(0, eq);
      while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
      const std::string_view value = body.substr(eq + 1);
      if (name == "f_min") {
        const auto f = parse_count(value, lineno);
        if (f < 1) throw FormatError("vocabulary: f_min must be >= 1");
        v.f_min = static_cast<int>(f);
      } else if (name == "corpus_size") {
        v.corpus_size = parse_count(value, lineno);
      } else if (name == "include_full") {
        if (value != "true" && value != "false") {
          throw FormatError("vocabulary line " + std::to_string(lineno) + ": bad flag");
        }
        v.include_full = value == "true";
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError("vocabulary line " + std::to_string(lineno) + ": expected key<TAB>count");
    }
    const auto n = parse_count(std::string_view(line).substr(tab + 1), lineno);
    if (n < 1) throw FormatError("vocabulary line " + std::to_string(lineno) + ": zero count");
    if (!v.counts.emplace(line.substr(0, tab), n).second) {
      throw FormatError("vocabulary line " + std::to_string(lineno) + ": duplicate key");
    }
  }
  if (!header) throw FormatError("vocabulary: missing header");
  return v;
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary '" + path + "'");
  return load_vocabulary(in);
}

Vocabulary parse_vocabulary(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_vocabulary(in);
}

}  // namespace molblocks
