#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molblocks/descriptors.h"
#include "molblocks/molecule.h"

namespace molblocks {

class Fingerprint {
 public:
  explicit Fingerprint(int bits = 2048, int radius = 2);
  static Fingerprint from_bits(int bits, std::span<const int> on);

  int size() const { return bits_; }
  int radius() const { return radius_; }
  void set(int bit);
  bool test(int bit) const;
  int count() const;
  std::vector<int> on_bits() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Fingerprint& o) const { return bits_ == o.bits_ && words_ == o.words_; }

 private:
  int bits_;
  int radius_;
  std::vector<std::uint64_t> words_;
};

/// Morgan-style environment hashing. Atom seeds combine element, heavy
/// degree, hydrogen count, charge, aromaticity and ring membership; each
/// round folds in sorted (bond order, neighbour id) pairs. Every
/// environment id at radii 0..radius sets bit id % bits.
Fingerprint circular_fingerprint(const Molecule& m, int radius = 2, int bits = 2048);

/// |a & b| / |a | b|, 1.0 when both are empty. Throws InvalidArgument on a
/// size mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

struct Cluster {
  int id = 0;
  int centroid = 0;          // input index, also the representative
  std::vector<int> members;  // centroid first, then ascending input index
};

/// Butina clustering with neighbour criterion 1 - tanimoto < cutoff. The
/// unassigned item with the most unassigned neighbours (ties: lowest index)
/// becomes the next centroid. Throws InvalidArgument on empty input or a
/// cutoff outside (0, 1].
std::vector<Cluster> butina_cluster(std::span<const Fingerprint> fps, double cutoff = 0.7,
                                    int threads = 1);
std::vector<Cluster> butina_cluster(std::span<const Molecule> mols, double cutoff = 0.7,
                                    int threads = 1);

/// One JSON object per line: {cluster_id, representative_smiles, member_smiles}.
void write_clusters_jsonl(const std::vector<Cluster>& clusters,
                          std::span<const std::string> smiles, std::ostream& out);

struct AdmetProbabilities {
  std::optional<double> p_dili;
  std::optional<double> p_ames;
  std::optional<double> p_herg;
  std::optional<double> p_pgp;
  std::optional<double> p_hia;
  std::optional<double> p_bbb;  // reported, never scored
};

/// (1 - p_dili) + (1 - p_ames) + (1 - p_herg) + (1 - p_pgp) + p_hia.
/// Throws InvalidArgument when one of the five is missing or outside [0, 1].
double admet_score(const AdmetProbabilities& p);

struct CandidateRecord {
  std::string smiles;
  AdmetProbabilities admet;
  std::optional<double> qed;
  std::optional<double> sa;
  std::optional<double> logp;
  Descriptors descriptors;
};

/// Tab-separated with a header row, or JSON lines (detected from the first
/// non-blank character). Columns: smiles, p_dili, p_ames, p_herg, p_pgp,
/// p_hia and optional p_bbb, qed, sa, logp; blank, NA or null cells are
/// absent. next() throws FormatError with the line number on a bad record
/// and can be called again to continue after it.
class CandidateReader {
 public:
  explicit CandidateReader(std::istream& in) : in_(in) {}
  std::optional<CandidateRecord> next();
  std::size_t line() const { return line_; }
  /// Set after a header error; later records cannot be interpreted.
  bool fatal() const { return fatal_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  bool started_ = false;
  bool jsonl_ = false;
  bool fatal_ = false;
  std::vector<std::string> header_;
};

/// All records; the first bad one throws.
std::vector<CandidateRecord> read_candidates(std::istream& in);

struct FilterConfig {
  double admet_threshold = 2.5;
  double qed_threshold = 0.7;
  bool admet_only = false;  // keep records that carry no qed
};

bool passes_filter(const CandidateRecord& r, const FilterConfig& cfg = {});
std::vector<CandidateRecord> filter_candidates(std::span<const CandidateRecord> records,
                                               const FilterConfig& cfg = {});

struct RuleOfThree {
  bool pass = true;
  std::vector<std::string> violations;  // subset of MW, HBD, HBA, cLogP
  bool logp_evaluated = false;
};

/// MW <= 300, HBD <= 3, HBA <= 3 and, when given, cLogP <= 3.
RuleOfThree rule_of_three(const Descriptors& d, std::optional<double> logp = std::nullopt);

}  // namespace molblocks
