"""Dual-coder validation of query output: sampling, agreement, gating.

For each query a fixed-size random sample of its matches is labeled
valid/invalid by two coders; per-query percent agreement, percent valid
and Cohen's kappa are computed from the paired labels, and queries at or
above a validity threshold form the validated set used downstream.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .catalog import ValidatedSet
from .engine import MatchRecord

VALID = "valid"
INVALID = "invalid"

DEFAULT_SAMPLE_SIZE = 50

CitanceKey = tuple[str, int]


@dataclass(frozen=True)
class AnnotationRecord:
    doc_id: str
    sentence_index: int
    query_id: str
    coder_id: str
    label: str

    def __post_init__(self):
        if self.label not in (VALID, INVALID):
            raise ValueError(f"label must be {VALID!r} or {INVALID!r}: {self.label!r}")

    @property
    def unit(self) -> tuple[str, int, str]:
        return (self.doc_id, self.sentence_index, self.query_id)


@dataclass(frozen=True)
class ValidationStats:
    query_id: str
    n: int
    pct_agree: float
    pct_valid: float
    kappa: float | None

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        if not 0.0 <= self.pct_valid <= self.pct_agree <= 1.0:
            raise ValueError("requires 0 <= pct_valid <= pct_agree <= 1")


def derive_seed(seed: int, query_id: str) -> int:
    """Stable per-query seed; independent of process hash randomization."""
    digest = hashlib.sha256(f"{seed}:{query_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_matches(
    matches: Sequence[MatchRecord], n: int = DEFAULT_SAMPLE_SIZE, seed: int = 0
) -> list[CitanceKey]:
    """Sample up to ``n`` distinct citances from one query's matches.

    Simple random sampling without replacement, reproducible per seed
    and invariant to the input ordering of the matches.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    if not matches:
        raise ValueError("no matches to sample")
    query_ids = {m.query_id for m in matches}
    if len(query_ids) != 1:
        raise ValueError(f"matches span several queries: {sorted(query_ids)}")
    keys = sorted({(m.doc_id, m.sentence_index) for m in matches})
    rng = random.Random(derive_seed(seed, query_ids.pop()))
    if n >= len(keys):
        return keys
    return rng.sample(keys, n)


def _paired_labels(
    annotations: Iterable[AnnotationRecord], coders: tuple[str, str]
) -> list[tuple[str, str]]:
    coder_a, coder_b = coders
    if coder_a == coder_b:
        raise ValueError("two distinct coders required")
    by_unit: dict[tuple[str, int, str], dict[str, str]] = {}
    for record in annotations:
        if record.coder_id not in coders:
            continue
        labels = by_unit.setdefault(record.unit, {})
        if record.coder_id in labels and labels[record.coder_id] != record.label:
            raise ValueError(f"conflicting labels for {record.unit} by {record.coder_id}")
        labels[record.coder_id] = record.label
    missing = sorted(u for u, labels in by_unit.items() if len(labels) != 2)
    if missing:
        raise ValueError(f"units missing a label from one coder: {missing}")
    if not by_unit:
        raise ValueError("no annotations for the given coders")
    return [
        (labels[coder_a], labels[coder_b])
        for _, labels in sorted(by_unit.items())
    ]


def percent_agreement(
    annotations: Iterable[AnnotationRecord], coders: tuple[str, str]
) -> float:
    """Fraction of annotated citances both coders labeled identically."""
    pairs = _paired_labels(annotations, coders)
    return sum(1 for a, b in pairs if a == b) / len(pairs)


def percent_valid(
    annotations: Iterable[AnnotationRecord], coders: tuple[str, str]
) -> float:
    """Fraction of annotated citances both coders labeled valid."""
    pairs = _paired_labels(annotations, coders)
    return sum(1 for a, b in pairs if a == b == VALID) / len(pairs)


def cohens_kappa(
    annotations: Iterable[AnnotationRecord], coders: tuple[str, str]
) -> float | None:
    """Cohen's kappa for the two coders; None when chance agreement is 1."""
    pairs = _paired_labels(annotations, coders)
    n = len(pairs)
    observed = sum(1 for a, b in pairs if a == b) / n
    a_valid = sum(1 for a, _ in pairs if a == VALID) / n
    b_valid = sum(1 for _, b in pairs if b == VALID) / n
    expected = a_valid * b_valid + (1 - a_valid) * (1 - b_valid)
    if expected == 1.0:
        return None
    return (observed - expected) / (1 - expected)


def compute_stats(
    annotations: Iterable[AnnotationRecord], coders: tuple[str, str]
) -> list[ValidationStats]:
    """Per-query validation statistics from both coders' annotations."""
    by_query: dict[str, list[AnnotationRecord]] = {}
    for record in annotations:
        by_query.setdefault(record.query_id, []).append(record)
    stats = []
    for query_id in sorted(by_query):
        records = by_query[query_id]
        pairs = _paired_labels(records, coders)
        stats.append(
            ValidationStats(
                query_id=query_id,
                n=len(pairs),
                pct_agree=percent_agreement(records, coders),
                pct_valid=percent_valid(records, coders),
                kappa=cohens_kappa(records, coders),
            )
        )
    return stats


def gate_queries(
    stats: Iterable[ValidationStats] | Mapping[str, float], threshold: float
) -> ValidatedSet:
    """Queries whose percent valid meets the threshold (inclusive)."""
    if isinstance(stats, Mapping):
        items = stats.items()
    else:
        items = ((s.query_id, s.pct_valid) for s in stats)
    kept = frozenset(query_id for query_id, pct_valid in items if pct_valid >= threshold)
    return ValidatedSet(threshold, kept)
