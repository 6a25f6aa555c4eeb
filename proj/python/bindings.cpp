#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "molblocks/cli.h"
#include "molblocks/errors.h"
#include "molblocks/pocket.h"
#include "molblocks/screening.h"
#include "molblocks/smiles.h"
#include "molblocks/tokenizer.h"
#include "molblocks/vocab.h"

namespace py = pybind11;
using namespace molblocks;

namespace {

py::list blocks_of(const Fragmentation& f, const NameTable& names) {
  py::list out;
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    py::dict d;
    d["smiles"] = f.blocks[i].canonical_key;
    d["name"] = names.name_for(f.blocks[i]);
    if (!f.frequencies.empty()) d["frequency"] = f.frequencies[i];
    out.append(d);
  }
  return out;
}

Vocabulary vocab_or_demo(const std::optional<std::string>& text) {
  return text ? parse_vocabulary(*text) : demo_vocabulary();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "BRICS building-block tokenizer, pocket hotspots and screening filters";

  py::register_exception<SmilesSyntaxError>(m, "SmilesSyntaxError", PyExc_ValueError);
  py::register_exception<SanitizationError>(m, "SanitizationError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<TooManyBondsError>(m, "TooManyBondsError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("canonical_smiles", [](const std::string& s) { return canonical_smiles(s); });
  m.def("brics_bond_count",
        [](const std::string& s) { return find_brics_bonds(parse_smiles(s)).size(); });

  m.def(
      "enumerate_blocks",
      [](const std::string& s, bool include_full) {
        return enumerate_blocks(parse_smiles(s), include_full);
      },
      py::arg("smiles"), py::arg("include_full") = false);

  m.def(
      "build_vocabulary",
      [](const std::vector<std::string>& corpus, int f_min, bool include_full, int threads) {
        VocabBuild b;
        {
          py::gil_scoped_release release;
          b = build_vocabulary(corpus, {f_min, include_full, threads});
        }
        std::ostringstream out;
        save_vocabulary(b.vocab, out);
        return out.str();
      },
      py::arg("corpus"), py::arg("f_min") = kDefaultFMin, py::arg("include_full") = false,
      py::arg("threads") = 1, "Saved vocabulary text.");

  m.def(
      "tokenize",
      [](const std::string& s, std::optional<std::string> vocab, const std::string& mode,
         int max_bonds) {
        if (mode != "bfe" && mode != "naive") throw InvalidArgument("mode must be bfe or naive");
        const auto f = tokenize(parse_smiles(s), vocab_or_demo(vocab),
                                mode == "bfe" ? TokenizeMode::kBfe : TokenizeMode::kNaiveBrics,
                                max_bonds);
        return blocks_of(f, NameTable::standard());
      },
      py::arg("smiles"), py::arg("vocab") = py::none(), py::arg("mode") = "bfe",
      py::arg("max_bonds") = kDefaultMaxBonds);

  m.def(
      "render",
      [](const std::string& s, std::optional<std::string> vocab, bool full) {
        const auto f = tokenize(parse_smiles(s), vocab_or_demo(vocab));
        return render(f, NameTable::standard(), full ? RenderStyle::kFull : RenderStyle::kNames);
      },
      py::arg("smiles"), py::arg("vocab") = py::none(), py::arg("full") = false);

  m.def("detokenize", [](const std::vector<std::string>& blocks) {
    Fragmentation f;
    for (const auto& b : blocks) f.blocks.push_back(make_block(parse_smiles(b)));
    return write_smiles(detokenize(f));
  });

  m.def(
      "hotspots",
      [](const std::string& receptor, const std::string& ligand, int k, double contact,
         int threads) {
        const auto hs =
            identify_hotspots(load_structure(receptor), load_structure(ligand), k, contact, {}, threads);
        return hotspots_to_json(hs);
      },
      py::arg("receptor"), py::arg("ligand"), py::arg("k") = 5, py::arg("contact") = 7.0,
      py::arg("threads") = 1, "Ranked hotspots as JSON text.");

  m.def(
      "tanimoto",
      [](const std::string& a, const std::string& b, int radius, int bits) {
        return tanimoto(circular_fingerprint(parse_smiles(a), radius, bits),
                        circular_fingerprint(parse_smiles(b), radius, bits));
      },
      py::arg("a"), py::arg("b"), py::arg("radius") = 2, py::arg("bits") = 2048);

  m.def(
      "butina",
      [](const std::vector<std::string>& smiles, double cutoff) {
        std::vector<Molecule> mols;
        for (const auto& s : smiles) mols.push_back(parse_smiles(s));
        std::vector<std::vector<int>> out;
        for (const auto& c : butina_cluster(std::span<const Molecule>(mols), cutoff)) {
          out.push_back(c.members);
        }
        return out;
      },
      py::arg("smiles"), py::arg("cutoff") = 0.7);

  m.def(
      "admet_score",
      [](double p_dili, double p_ames, double p_herg, double p_pgp, double p_hia) {
        return admet_score({p_dili, p_ames, p_herg, p_pgp, p_hia, std::nullopt});
      },
      py::arg("p_dili"), py::arg("p_ames"), py::arg("p_herg"), py::arg("p_pgp"), py::arg("p_hia"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args, const std::string& stdin_text) {
        args.insert(args.begin(), "molblocks");
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        const int status = cli::run(args, in, out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "", "(exit status, stdout, stderr)");
}
