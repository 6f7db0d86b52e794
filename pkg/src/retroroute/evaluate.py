"""Search-free evaluation: top-k accuracy over ranked candidate plans,
accuracy sliced by reference depth, and edit-distance profiles of rendered
routes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .align import AlignedSequence
from .smiles import CanonicalKey

DEPTH_BUCKETS = ("1", "2", "3", "4", ">=5")


@dataclass(frozen=True)
class EvalCandidate:
    """One ranked prediction: its leaf set and route depth."""

    precursors: frozenset[CanonicalKey]
    depth: int
    plan_id: str = ""


@dataclass(frozen=True)
class EvalRecord:
    """One target: ranked candidates plus the reference answers."""

    target_key: CanonicalKey
    candidates: tuple[EvalCandidate, ...]
    references: tuple[frozenset[CanonicalKey], ...]
    ref_depth: int


@dataclass(frozen=True)
class EvalReport:
    top_k: dict[int, float]
    depth_accuracy: dict[str, float | None]
    depth_counts: dict[str, int]
    total: int


def is_success(
    candidate_set: frozenset[CanonicalKey],
    candidate_depth: int,
    references: Sequence[frozenset[CanonicalKey]],
    ref_depth: int,
) -> bool:
    """A candidate solves the target when its leaf set equals some reference
    set and it is no deeper than the reference route."""
    if candidate_depth > ref_depth:
        return False
    return any(candidate_set == frozenset(ref) for ref in references)


def depth_bucket(ref_depth: int) -> str:
    return str(ref_depth) if ref_depth < 5 else ">=5"


def topk_accuracy(records: Sequence[EvalRecord], k_max: int = 5) -> EvalReport:
    """Cumulative accuracy at ranks 1..k_max, plus top-1 accuracy per
    reference-depth bucket."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    hits = {k: 0 for k in range(1, k_max + 1)}
    bucket_hits = {label: 0 for label in DEPTH_BUCKETS}
    bucket_counts = {label: 0 for label in DEPTH_BUCKETS}
    for record in records:
        first_hit: int | None = None
        for rank, candidate in enumerate(record.candidates, start=1):
            if rank > k_max:
                break
            if is_success(
                candidate.precursors,
                candidate.depth,
                record.references,
                record.ref_depth,
            ):
                first_hit = rank
                break
        for k in hits:
            if first_hit is not None and first_hit <= k:
                hits[k] += 1
        label = depth_bucket(record.ref_depth)
        bucket_counts[label] += 1
        if first_hit == 1:
            bucket_hits[label] += 1
    total = len(records)
    return EvalReport(
        top_k={k: (hits[k] / total if total else 0.0) for k in hits},
        depth_accuracy={
            label: (bucket_hits[label] / bucket_counts[label] if bucket_counts[label] else None)
            for label in DEPTH_BUCKETS
        },
        depth_counts=dict(bucket_counts),
        total=total,
    )


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, char_a in enumerate(a, start=1):
        current = [i]
        for j, char_b in enumerate(b, start=1):
            cost = 0 if char_a == char_b else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[len(b)]


def _sequence_lines(sequence: AlignedSequence | Sequence[str]) -> list[tuple[str, str]]:
    if isinstance(sequence, AlignedSequence):
        return [
            (step.product_text, ".".join(step.precursor_texts))
            for step in sequence.steps
        ]
    pairs: list[tuple[str, str]] = []
    for line in sequence:
        product, _, rhs = line.partition(">>")
        pairs.append((product, rhs))
    return pairs


def nld_profile(sequence: AlignedSequence | Sequence[str]) -> list[tuple[int, float]]:
    """Per-step normalized edit distance between the first product (the
    target as written) and each step's full precursor side."""
    pairs = _sequence_lines(sequence)
    if not pairs:
        return []
    target_text = pairs[0][0]
    profile: list[tuple[int, float]] = []
    for k, (_, rhs) in enumerate(pairs, start=1):
        denominator = max(len(target_text), len(rhs))
        profile.append((k, levenshtein(target_text, rhs) / denominator))
    return profile
