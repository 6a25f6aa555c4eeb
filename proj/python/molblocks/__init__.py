"""BRICS building-block tokenizer, pocket hotspots and screening filters."""

from molblocks._core import (
    FormatError,
    InvalidArgument,
    SanitizationError,
    SmilesSyntaxError,
    TooManyBondsError,
    admet_score,
    brics_bond_count,
    build_vocabulary,
    butina,
    canonical_smiles,
    detokenize,
    enumerate_blocks,
    hotspots,
    render,
    run_cli,
    tanimoto,
    tokenize,
)

__all__ = [
    "FormatError",
    "InvalidArgument",
    "SanitizationError",
    "SmilesSyntaxError",
    "TooManyBondsError",
    "admet_score",
    "brics_bond_count",
    "build_vocabulary",
    "butina",
    "canonical_smiles",
    "detokenize",
    "enumerate_blocks",
    "hotspots",
    "render",
    "run_cli",
    "tanimoto",
    "tokenize",
]
