"""Hyperrigidity decision and witness toolkit for graph correspondences.

The package decides whether the tensor algebra of a finitely presented
correspondence is hyperrigid, and for negative discrete verdicts builds
and re-verifies an explicit non-maximal dilation on a truncated Fock
representation.  Instances, verdicts, and witness certificates all have
a canonical JSON form; the `hyperrig` console script wraps the same
entry points.
"""

from .errors import (
    BudgetExceededError, DomainError, HyperrigError,
    InternalInconsistencyError, MalformedInputError, SymbolicOnlyError,
    WitnessRefusedError,
)
from .fock import build_fock, verify_isometric_rep, witness_pipeline
from .graphs import (
    DiscreteGraphPresentation, IntervalGraphPresentation, Verdict,
    check_row_finite, decide_hyperrigid,
)
from .records import (
    canonical_json, instance_digest, instance_payload, load_instance,
    load_witness_record, parse_instance, verdict_record,
    verify_witness_record, witness_record,
)

__all__ = [
    "BudgetExceededError",
    "DiscreteGraphPresentation",
    "DomainError",
    "HyperrigError",
    "InternalInconsistencyError",
    "IntervalGraphPresentation",
    "MalformedInputError",
    "SymbolicOnlyError",
    "Verdict",
    "WitnessRefusedError",
    "build_fock",
    "canonical_json",
    "check_row_finite",
    "decide_hyperrigid",
    "instance_digest",
    "instance_payload",
    "load_instance",
    "load_witness_record",
    "parse_instance",
    "verdict_record",
    "verify_isometric_rep",
    "verify_witness_record",
    "witness_pipeline",
    "witness_record",
]
