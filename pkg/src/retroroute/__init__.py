"""Root-aligned retrosynthetic route notation: SMILES graph core, route DAG
model, aligned rendering, plan scoring, evaluation and consensus voting."""

from .align import (
    AlignedSequence,
    AlignedStep,
    align_route,
    augment_roots,
    default_root,
    parse_sequence,
    render_sequence,
)
from .consensus import (
    CandidateSlate,
    RankedCandidate,
    RankingPair,
    SlateEntry,
    build_ranking_pairs,
    margin_rank_loss,
    vote,
)
from .errors import (
    ConfigError,
    CycleError,
    DomainError,
    MissingRootError,
    SchemaError,
    SmilesSyntaxError,
)
from .evaluate import (
    EvalCandidate,
    EvalRecord,
    EvalReport,
    is_success,
    levenshtein,
    nld_profile,
    topk_accuracy,
)
from .reward import (
    GeneratedPlan,
    PlanLineIssue,
    PlanScore,
    RewardConfig,
    jaccard,
    parse_plan,
    score_plan,
    weighted_loss,
)
from .routes import (
    Reaction,
    Route,
    RouteNode,
    RouteRecord,
    RouteTree,
    StockSet,
    ValidationReport,
    ingest_dataset,
    linearize,
    linearize_nodes,
    load_stock,
    route_depth,
    to_tree,
    validate_route,
    write_dataset,
)
from .smiles import (
    Atom,
    Bond,
    CanonicalKey,
    Molecule,
    canonical_key,
    canonical_ranks,
    corresponding_atom,
    is_isomorphic,
    molecule_is_valid,
    parse_smiles,
    write_rooted,
)

__all__ = [
    "AlignedSequence",
    "AlignedStep",
    "Atom",
    "Bond",
    "CandidateSlate",
    "CanonicalKey",
    "ConfigError",
    "CycleError",
    "DomainError",
    "EvalCandidate",
    "EvalRecord",
    "EvalReport",
    "GeneratedPlan",
    "MissingRootError",
    "Molecule",
    "PlanLineIssue",
    "PlanScore",
    "RankedCandidate",
    "RankingPair",
    "Reaction",
    "RewardConfig",
    "Route",
    "RouteNode",
    "RouteRecord",
    "RouteTree",
    "SchemaError",
    "SlateEntry",
    "SmilesSyntaxError",
    "StockSet",
    "ValidationReport",
    "align_route",
    "augment_roots",
    "build_ranking_pairs",
    "canonical_key",
    "canonical_ranks",
    "corresponding_atom",
    "default_root",
    "ingest_dataset",
    "is_isomorphic",
    "is_success",
    "jaccard",
    "levenshtein",
    "linearize",
    "linearize_nodes",
    "load_stock",
    "margin_rank_loss",
    "molecule_is_valid",
    "nld_profile",
    "parse_plan",
    "parse_sequence",
    "parse_smiles",
    "render_sequence",
    "route_depth",
    "score_plan",
    "to_tree",
    "topk_accuracy",
    "validate_route",
    "vote",
    "weighted_loss",
    "write_dataset",
    "write_rooted",
]
