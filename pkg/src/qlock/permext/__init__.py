"""Seeded permutation condensers and extractors."""

from .base import (
    Contract,
    IdentityFamily,
    PermutationFamily,
    PrefixLift,
    check_bijective,
    lift,
)
from .evaluate import (
    ExtractorReport,
    FlatSource,
    eval_extractor_tv,
    nested_flat_sources,
    prefix_source,
    random_flat_source,
)
from .families import (
    ChainedExtractor,
    ComposedCondenser,
    LeftoverHashFamily,
    ReedSolomonCondenser,
    SeededRecursionStep,
    SharedSeedBlockHash,
    build_block_extractor,
    compose_condensers,
    desk_step,
    lhl_bound,
    lhl_extract,
    rs_condense,
)
from .guv import (
    CondenserSpec,
    DeskConstants,
    DeskExtractor,
    build_guv_extractor,
    recursion_seed_bound,
    top_spec,
)

__all__ = [
    "ChainedExtractor",
    "ComposedCondenser",
    "CondenserSpec",
    "Contract",
    "DeskConstants",
    "DeskExtractor",
    "ExtractorReport",
    "FlatSource",
    "IdentityFamily",
    "LeftoverHashFamily",
    "PermutationFamily",
    "PrefixLift",
    "ReedSolomonCondenser",
    "SeededRecursionStep",
    "SharedSeedBlockHash",
    "build_block_extractor",
    "build_guv_extractor",
    "check_bijective",
    "compose_condensers",
    "desk_step",
    "eval_extractor_tv",
    "lhl_bound",
    "lhl_extract",
    "lift",
    "nested_flat_sources",
    "prefix_source",
    "random_flat_source",
    "recursion_seed_bound",
    "rs_condense",
    "top_spec",
]
