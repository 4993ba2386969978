"""Incoherence, coherent projection, Dutch books and aggregation of credences."""
from ._backend import BACKEND
from .credence import (
    AtomSpace,
    CoherenceVerdict,
    CredenceBase,
    build_base,
    coherence_check,
    from_matrix,
    implied_belief,
    reduce_full_rank,
)
from .dissimilarity import (
    BRIER,
    EXACT,
    FO,
    HALF_F,
    HALF_FO,
    LOG,
    SQUARED,
    DissimilaritySpec,
    F,
    ScoringRule,
    ell_from_scoring,
    evaluate,
    score_forecast,
)
from .projection import (
    ProjectionResult,
    closed_form_complement_pair,
    closed_form_partition,
    closed_form_repetition,
    incoherence_gradient,
    project,
)
from .solver import SeparableLoss, SolveOutcome, SolverConfig, minimize_on_simplex
from .polytope import BetCertificate, FacetInequality, dutch_book, enumerate_facets, hull_violation
from .aggregation import AggregationMethod, AggregationResult, ExpertReport, aggregate
from .elicitation import ProbeCredences, probe_loss

__version__ = "0.1.0"

__all__ = [
    "AggregationMethod",
    "AggregationResult",
    "AtomSpace",
    "BACKEND",
    "BRIER",
    "BetCertificate",
    "CoherenceVerdict",
    "CredenceBase",
    "DissimilaritySpec",
    "EXACT",
    "ExpertReport",
    "F",
    "FO",
    "FacetInequality",
    "HALF_F",
    "HALF_FO",
    "LOG",
    "ProbeCredences",
    "ProjectionResult",
    "SQUARED",
    "ScoringRule",
    "SeparableLoss",
    "SolveOutcome",
    "SolverConfig",
    "aggregate",
    "build_base",
    "closed_form_complement_pair",
    "closed_form_partition",
    "closed_form_repetition",
    "coherence_check",
    "dutch_book",
    "ell_from_scoring",
    "enumerate_facets",
    "evaluate",
    "from_matrix",
    "hull_violation",
    "implied_belief",
    "incoherence_gradient",
    "minimize_on_simplex",
    "probe_loss",
    "project",
    "reduce_full_rank",
    "score_forecast",
]
