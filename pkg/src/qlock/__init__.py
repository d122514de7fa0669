"""Uncertainty relations, permutation extractors and information locking.

Small, exactly simulable instances of metric uncertainty families built from
mutually unbiased bases and seeded permutation extractors, together with the
locking and identification schemes they support.
"""

from .codes import BinaryCode, build_binary_code
from .gf2x import (
    FieldContext,
    field_context,
    find_irreducible,
    poly_eval,
    poly_interpolate,
)
from .locking import (
    LockingScheme,
    accessible_info_search,
    adversary_posterior,
    lock_decode,
    lock_encode,
    pauli_locking_bound,
)
from .mub import (
    GaloisMubFamily,
    HadamardFamily,
    build_galois_mub_tables,
    build_hadamard_family,
    build_mub_family,
)
from .qid import forgetfulness_deficit, qid_encode_state
from .qsim import (
    StructuredUnitary,
    apply_structured_unitary,
    distance_and_entropy,
    marginal_distribution,
    sample_haar_state,
)
from .report import ExperimentReport, rng_stream
from .urel import (
    UnitaryFamily,
    build_metric_ur,
    compose_metric_ur,
    eval_metric_ur,
    expected_fidelity,
    gram_schmidt_orthonormalize,
    minentropy_relation_check,
    projector_overlap,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryCode",
    "ExperimentReport",
    "FieldContext",
    "GaloisMubFamily",
    "HadamardFamily",
    "LockingScheme",
    "StructuredUnitary",
    "UnitaryFamily",
    "accessible_info_search",
    "adversary_posterior",
    "apply_structured_unitary",
    "build_binary_code",
    "build_galois_mub_tables",
    "build_hadamard_family",
    "build_metric_ur",
    "build_mub_family",
    "compose_metric_ur",
    "distance_and_entropy",
    "eval_metric_ur",
    "expected_fidelity",
    "field_context",
    "find_irreducible",
    "forgetfulness_deficit",
    "gram_schmidt_orthonormalize",
    "lock_decode",
    "lock_encode",
    "marginal_distribution",
    "minentropy_relation_check",
    "pauli_locking_bound",
    "poly_eval",
    "poly_interpolate",
    "projector_overlap",
    "qid_encode_state",
    "rng_stream",
    "sample_haar_state",
]
