#include "molblocks/cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "molblocks/brics.h"
#include "molblocks/errors.h"
#include "molblocks/graph_bpe.h"
#include "molblocks/pocket.h"
#include "molblocks/screening.h"
#include "molblocks/smiles.h"
#include "molblocks/tokenizer.h"
#include "molblocks/vocab.h"

#ifndef MOLBLOCKS_VERSION
#define MOLBLOCKS_VERSION "0.0.0"
#endif

namespace molblocks::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Options {
  std::string input;
  std::string output;
  std::string vocab;
  std::string names;
  std::string format = "text";
  std::string hot_format = "json";
  int threads = 1;
  bool strict = false;

  int f_min = kDefaultFMin;
  bool include_full = false;

  std::string smiles;
  std::string mode = "bfe";
  std::string style = "names";
  int max_bonds = kDefaultMaxBonds;

  std::string receptor;
  std::string ligand;
  int k = 5;
  double contact = 7.0;
  GridConfig grid;

  double cutoff = 0.7;
  int radius = 2;
  int bits = 2048;

  FilterConfig filter;

  BenchConfig bench;
};

/// A usage problem found after CLI11 accepted the arguments.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double round_to(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

class Input {
 public:
  Input(const std::string& path, std::istream& stdin_stream) {
    if (path == "-") {
      stream_ = &stdin_stream;
      return;
    }
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw Error("cannot read '" + path + "'");
    stream_ = file_.get();
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& stdout_stream) {
    if (path.empty() || path == "-") {
      stream_ = &stdout_stream;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error("cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

const CLI::Validator kInputPath(
    [](std::string& p) -> std::string {
      if (p == "-") return {};
      return CLI::ExistingFile(p);
    },
    "FILE|-");

// Per-line work in chunks; results are emitted in input order.
struct LineResult {
  std::string output;
  std::string error;
};

template <class Fn>
int process_lines(std::istream& in, std::ostream& out, std::ostream& err, int threads, bool strict,
                  Fn&& fn) {
  constexpr std::size_t kChunk = 2048;
  if (threads < 1) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::vector<LineResult> results;
  std::size_t line_no = 0;
  bool eof = false;
  while (!eof) {
    lines.clear();
    std::string text;
    while (lines.size() < kChunk) {
      if (!std::getline(in, text)) {
        eof = true;
        break;
      }
      ++line_no;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      const auto first = text.find_first_not_of(" \t");
      if (first == std::string::npos || text[first] == '#') continue;
      lines.emplace_back(line_no, std::move(text));
    }
    results.assign(lines.size(), {});
    auto work = [&](std::size_t first, std::size_t stride) {
      for (std::size_t i = first; i < lines.size(); i += stride) {
        try {
          results[i].output = fn(lines[i].second);
        } catch (const std::exception& e) {
          results[i].error = e.what();
        }
      }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), lines.size());
    if (n <= 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!results[i].error.empty()) {
        err << "line " << lines[i].first << ": " << results[i].error << '\n';
        if (strict) return kExitData;
        continue;
      }
      out << results[i].output << '\n';
    }
  }
  if (in.bad()) throw Error("I/O failure while reading input");
  return kExitOk;
}

const NameTable& name_table(const Options& o, std::optional<NameTable>& holder) {
  if (o.names.empty()) return NameTable::standard();
  holder = NameTable::load(o.names);
  return *holder;
}

const Vocabulary& vocabulary(const Options& o, std::optional<Vocabulary>& holder) {
  if (o.vocab.empty()) return demo_vocabulary();
  holder = load_vocabulary(o.vocab);
  return *holder;
}

// ---------------------------------------------------------------------------

int cmd_vocab(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  Input input(o.input, in);
  Output output(o.output, out);
  VocabConfig cfg;
  cfg.f_min = o.f_min;
  cfg.include_full = o.include_full;
  cfg.threads = o.threads;
  const auto build = build_vocabulary(input.get(), cfg);
  save_vocabulary(build.vocab, output.get());
  output.finish();
  err << "vocab: " << build.vocab.counts.size() << " blocks from " << build.vocab.corpus_size
      << " molecules, " << build.skipped << " skipped\n";
  return kExitOk;
}

int cmd_tokenize(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  std::optional<Vocabulary> vh;
  std::optional<NameTable> nh;
  const auto& vocab = vocabulary(o, vh);
  const auto& names = name_table(o, nh);
  const auto mode = o.mode == "naive" ? TokenizeMode::kNaiveBrics : TokenizeMode::kBfe;
  const auto style = o.style == "full" ? RenderStyle::kFull : RenderStyle::kNames;
  const bool json = o.format == "json";
  auto one = [&](const std::string& line) {
    SmilesRecord rec;
    if (!split_smiles_record(line, rec)) throw Error("no SMILES on line");
    const auto f = tokenize(parse_smiles(rec.smiles), vocab, mode, o.max_bonds);
    if (!json) return render(f, names, style);
    ordered_json j;
    j["smiles"] = rec.smiles;
    if (!rec.name.empty()) j["name"] = rec.name;
    j["fragments"] = ordered_json::parse(to_json(f, names));
    return j.dump();
  };
  Output output(o.output, out);
  int status = kExitOk;
  if (!o.smiles.empty()) {
    std::istringstream single(o.smiles);
    status = process_lines(single, output.get(), err, 1, true, one);
  } else {
    Input input(o.input, in);
    status = process_lines(input.get(), output.get(), err, o.threads, o.strict, one);
  }
  output.finish();
  return status;
}

int cmd_detokenize(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  auto one = [](const std::string& line) {
    Fragmentation f;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '{') {
      const auto j = nlohmann::json::parse(line);
      for (const auto& b : j.at("fragments")) {
        f.blocks.push_back(make_block(parse_smiles(b.at("smiles").get<std::string>())));
      }
    } else {
      std::istringstream words(line);
      std::string w;
      while (words >> w) {
        if (w != "->") f.blocks.push_back(make_block(parse_smiles(w)));
      }
    }
    return write_smiles(detokenize(f));
  };
  Input input(o.input, in);
  Output output(o.output, out);
  const int status = process_lines(input.get(), output.get(), err, o.threads, o.strict, one);
  output.finish();
  return status;
}

int cmd_hotspots(const Options& o, std::istream&, std::ostream& out, std::ostream&) {
  if (o.hot_format == "context" && o.smiles.empty()) {
    throw UsageError("--format context needs --smiles for the ligand fragmentation");
  }
  const auto receptor = load_structure(o.receptor);
  const auto ligand = load_structure(o.ligand);
  const auto hs = identify_hotspots(receptor, ligand, o.k, o.contact, o.grid, o.threads);
  Output output(o.output, out);
  auto& os = output.get();
  if (o.hot_format == "json") {
    os << hotspots_to_json(hs) << '\n';
  } else if (o.hot_format == "text") {
    os << "rank\tatom\telement\tvolume_A3\tgrid_count\tresidues\n";
    for (const auto& h : hs) {
      os << h.rank << '\t' << h.ligand_atom_index << '\t' << h.element << '\t' << fixed(h.volume, 3)
         << '\t' << h.grid_count << '\t';
      for (std::size_t i = 0; i < h.neighbors.size(); ++i) {
        os << (i ? "," : "") << h.neighbors[i].to_string();
      }
      os << '\n';
    }
  } else {
    std::optional<Vocabulary> vh;
    std::optional<NameTable> nh;
    const auto frag = tokenize(parse_smiles(o.smiles), vocabulary(o, vh));
    const auto& names = name_table(o, nh);
    for (const auto& h : hs) {
      const auto rec = context_record(h, frag, names, o.contact);
      ordered_json j;
      j["rank"] = h.rank;
      j["record"] = ordered_json::parse(rec.json);
      j["prompt"] = rec.text;
      os << j.dump() << '\n';
    }
  }
  output.finish();
  return kExitOk;
}

int cmd_cluster(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  Input input(o.input, in);
  std::vector<std::string> smiles;
  std::vector<Fingerprint> fps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input.get(), line)) {
    ++line_no;
    SmilesRecord rec;
    if (!split_smiles_record(line, rec)) continue;
    try {
      fps.push_back(circular_fingerprint(parse_smiles(rec.smiles), o.radius, o.bits));
      smiles.push_back(rec.smiles);
    } catch (const Error& e) {
      err << "line " << line_no << ": " << e.what() << '\n';
      if (o.strict) return kExitData;
    }
  }
  if (fps.empty()) throw Error("no molecules to cluster");
  const auto clusters = butina_cluster(fps, o.cutoff, o.threads);
  Output output(o.output, out);
  write_clusters_jsonl(clusters, smiles, output.get());
  output.finish();
  err << "cluster: " << clusters.size() << " clusters from " << fps.size() << " molecules\n";
  return kExitOk;
}

int cmd_filter(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  Input input(o.input, in);
  Output output(o.output, out);
  auto& os = output.get();
  const bool json = o.format == "json";
  if (!json) os << "smiles\tadmet_score\tqed\trule_of_three\n";
  CandidateReader reader(input.get());
  std::size_t seen = 0;
  std::size_t kept = 0;
  for (;;) {
    std::optional<CandidateRecord> r;
    try {
      r = reader.next();
    } catch (const FormatError& e) {
      err << e.what() << '\n';
      if (o.strict || reader.fatal()) return kExitData;
      continue;
    }
    if (!r) break;
    ++seen;
    if (!passes_filter(*r, o.filter)) continue;
    ++kept;
    const double score = round_to(admet_score(r->admet), 6);
    const auto ro3 = rule_of_three(r->descriptors, r->logp);
    if (json) {
      ordered_json j;
      j["smiles"] = r->smiles;
      j["admet_score"] = score;
      j["qed"] = r->qed ? ordered_json(round_to(*r->qed, 6)) : ordered_json(nullptr);
      j["rule_of_three"] = {{"pass", ro3.pass},
                            {"violations", ro3.violations},
                            {"logp_evaluated", ro3.logp_evaluated}};
      os << j.dump() << '\n';
    } else {
      os << r->smiles << '\t' << fixed(score, 6) << '\t' << (r->qed ? fixed(*r->qed, 6) : "") << '\t';
      if (ro3.pass) {
        os << "pass";
      } else {
        os << "fail:";
        for (std::size_t i = 0; i < ro3.violations.size(); ++i) os << (i ? "," : "") << ro3.violations[i];
      }
      os << '\n';
    }
  }
  output.finish();
  err << "filter: kept " << kept << " of " << seen << '\n';
  return kExitOk;
}

int cmd_bench(const Options& o, std::istream&, std::ostream& out, std::ostream&) {
  const auto report = benchmark_break_vs_merge(o.bench);
  Output output(o.output, out);
  auto& os = output.get();
  if (o.format == "csv") {
    write_bench_csv(report, os);
  } else if (o.format == "json") {
    auto arr = ordered_json::array();
    for (const auto& r : report.rows) {
      arr.push_back({{"size", r.size},
                     {"break_mean_s", r.break_mean_s},
                     {"merge_mean_s", r.merge_mean_s},
                     {"ratio", round_to(r.ratio, 6)},
                     {"samples", r.samples}});
    }
    os << arr.dump(2) << '\n';
  } else {
    write_bench_table(report, os);
  }
  output.finish();
  return kExitOk;
}

void add_grid_options(CLI::App* sub, Options& o) {
  sub->add_option("--edge", o.grid.edge, "Grid edge, A")->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--resolution", o.grid.resolution, "Grid spacing, A")
      ->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--receptor-clearance", o.grid.receptor_clearance, "Receptor clearance, A")
      ->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--ligand-clearance", o.grid.ligand_clearance, "Ligand clearance, A")
      ->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app("Fragment-level molecule tokenization, pocket hotspots and screening utilities",
               args.empty() ? "molblocks" : args[0]);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("molblocks ") + MOLBLOCKS_VERSION +
                                        " (BRICS rules " + BricsRules::standard().version() + ")");
  app.set_config("--config", "", "TOML/INI file with option defaults")->envname("MOLBLOCKS_CONFIG");

  auto add_io = [&](CLI::App* sub, bool input_required) {
    auto* opt = sub->add_option("-i,--in", o.input, "Input file, - for stdin")->check(kInputPath);
    if (input_required) opt->required();
    sub->add_option("-o,--out", o.output, "Output file (default stdout)");
    return opt;
  };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores")
        ->check(CLI::Range(0, 1024))->capture_default_str();
  };
  auto add_strict = [&](CLI::App* sub) {
    sub->add_flag("--strict", o.strict, "Stop at the first malformed record");
  };

  auto* vocab = app.add_subcommand("vocab", "Count BFE blocks over a SMILES corpus");
  add_io(vocab, true);
  vocab->add_option("--f-min", o.f_min, "Minimum block frequency")->check(CLI::PositiveNumber)
      ->capture_default_str();
  vocab->add_flag("--include-full", o.include_full, "Also count whole molecules");
  add_threads(vocab);

  auto* tok = app.add_subcommand("tokenize", "Fragment molecules into named blocks");
  auto* tok_in = add_io(tok, false);
  auto* tok_smiles = tok->add_option("--smiles", o.smiles, "Tokenize one SMILES");
  tok_in->excludes(tok_smiles);
  tok->add_option("--vocab", o.vocab, "Vocabulary file (default: shipped demo vocabulary)")
      ->check(CLI::ExistingFile);
  tok->add_option("--names", o.names, "Name table file")->check(CLI::ExistingFile);
  tok->add_option("--mode", o.mode, "bfe or naive")->check(CLI::IsMember({"bfe", "naive"}))
      ->capture_default_str();
  tok->add_option("--style", o.style, "Text rendering: names or full")
      ->check(CLI::IsMember({"names", "full"}))->capture_default_str();
  tok->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  tok->add_option("--max-bonds", o.max_bonds, "Enumeration limit on BRICS bonds")
      ->check(CLI::Range(1, 24))->capture_default_str();
  add_threads(tok);
  add_strict(tok);

  auto* detok = app.add_subcommand("detokenize", "Reassemble molecules from block lists");
  add_io(detok, true);
  add_threads(detok);
  add_strict(detok);

  auto* hot = app.add_subcommand("hotspots", "Rank ligand atoms by free volume around them");
  hot->add_option("--receptor", o.receptor, "Receptor PDB/PDBQT")->required()
      ->check(CLI::ExistingFile);
  hot->add_option("--ligand", o.ligand, "Docked ligand PDB/PDBQT")->required()
      ->check(CLI::ExistingFile);
  hot->add_option("-o,--out", o.output, "Output file (default stdout)");
  hot->add_option("-k,--k", o.k, "Hotspots to keep")->check(CLI::PositiveNumber)
      ->capture_default_str();
  hot->add_option("--contact", o.contact, "Residue contact distance, A")
      ->check(CLI::PositiveNumber)->capture_default_str();
  add_grid_options(hot, o);
  hot->add_option("--format", o.hot_format, "json, text or context")
      ->check(CLI::IsMember({"json", "text", "context"}))->capture_default_str();
  hot->add_option("--smiles", o.smiles, "Ligand SMILES for context records");
  hot->add_option("--vocab", o.vocab, "Vocabulary file")->check(CLI::ExistingFile);
  hot->add_option("--names", o.names, "Name table file")->check(CLI::ExistingFile);
  add_threads(hot);

  auto* clu = app.add_subcommand("cluster", "Butina clustering on circular fingerprints");
  add_io(clu, true);
  clu->add_option("--cutoff", o.cutoff, "Tanimoto distance cutoff")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  clu->add_option("--radius", o.radius, "Fingerprint radius")->check(CLI::Range(0, 8))
      ->capture_default_str();
  clu->add_option("--bits", o.bits, "Fingerprint size")->check(CLI::Range(64, 1 << 20))
      ->capture_default_str();
  add_threads(clu);
  add_strict(clu);

  auto* fil = app.add_subcommand("filter", "Keep candidates above ADMET and QED thresholds");
  add_io(fil, true);
  fil->add_option("--admet", o.filter.admet_threshold, "ADMET score threshold (strict)")
      ->check(CLI::Range(0.0, 5.0))->capture_default_str();
  fil->add_option("--qed", o.filter.qed_threshold, "QED threshold (strict)")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  fil->add_flag("--admet-only", o.filter.admet_only, "Keep records without a qed value");
  fil->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  add_strict(fil);

  auto* bench = app.add_subcommand("bench", "Time BRICS breaks against fragment merges");
  bench->add_option("--sizes", o.bench.sizes, "Heavy-atom sizes")->delimiter(',')
      ->check(CLI::Range(9, 200));
  bench->add_option("--samples", o.bench.samples, "Molecules per size")
      ->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--repetitions", o.bench.repetitions, "Timed passes per size")
      ->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seed", o.bench.seed, "Generator seed")->capture_default_str();
  bench->add_option("--format", o.format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
  bench->add_option("-o,--out", o.output, "Output file (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("molblocks");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (tok->parsed() && o.input.empty() && o.smiles.empty()) {
    err << "tokenize: one of --in or --smiles is required\n";
    return kExitUsage;
  }

  try {
    o.grid.validate();
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (bench->parsed() && (o.bench.sizes.empty() ||
                          !std::is_sorted(o.bench.sizes.begin(), o.bench.sizes.end()) ||
                          std::adjacent_find(o.bench.sizes.begin(), o.bench.sizes.end()) !=
                              o.bench.sizes.end())) {
    err << "usage error: --sizes must be strictly increasing\n";
    return kExitUsage;
  }

  try {
    if (vocab->parsed()) return cmd_vocab(o, in, out, err);
    if (tok->parsed()) return cmd_tokenize(o, in, out, err);
    if (detok->parsed()) return cmd_detokenize(o, in, out, err);
    if (hot->parsed()) return cmd_hotspots(o, in, out, err);
    if (clu->parsed()) return cmd_cluster(o, in, out, err);
    if (fil->parsed()) return cmd_filter(o, in, out, err);
    if (bench->parsed()) return cmd_bench(o, in, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace molblocks::cli
