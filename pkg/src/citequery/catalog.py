"""Cue-phrase queries as data: the built-in catalog and the query-file format.

A query pairs one of thirteen signal term sets with either no filter
(standalone) or one of four filter term sets (studies, ideas, methods,
results), for 65 queries total. Signal sets may carry variants,
per-signal exclusion rules, and a proximity budget between signal and
filter (four words by default).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

NEGATION_TOKENS = frozenset({"no", "not", "cannot", "nor", "neither"})

FILTER_SET_NAMES = ("standalone", "studies", "ideas", "methods", "results")

TOKEN_CARVEOUT = "token_carveout"
MATCH_CONTEXT = "match_context"
CITANCE_PHRASE = "citance_phrase"
COOCCURRENCE_WINDOW = "cooccurrence_window"
EXCLUSION_KINDS = (TOKEN_CARVEOUT, MATCH_CONTEXT, CITANCE_PHRASE, COOCCURRENCE_WINDOW)

DEFAULT_MAX_GAP = 4


class QueryFileError(ValueError):
    """Syntax or consistency error in a query file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        place = ""
        if line is not None:
            place = f"line {line}"
            if column is not None:
                place += f", column {column}"
            place += ": "
        super().__init__(place + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Pattern:
    """A token-sequence pattern; a trailing ``*`` on a token marks a prefix."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("pattern has no tokens")
        for token in self.tokens:
            if not token or token != token.lower():
                raise ValueError(f"pattern token must be non-empty lowercase: {token!r}")
            star = token.find("*")
            if star != -1 and (star != len(token) - 1 or star == 0):
                raise ValueError(f"wildcard only allowed trailing a stem: {token!r}")

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        return cls(tuple(text.lower().split()))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @property
    def contains_negation_token(self) -> bool:
        return any(t in NEGATION_TOKENS for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ExclusionRule:
    kind: str
    patterns: tuple[Pattern, ...]
    window: int | None = None

    def __post_init__(self):
        if self.kind not in EXCLUSION_KINDS:
            raise ValueError(f"unknown exclusion kind: {self.kind!r}")
        if not self.patterns:
            raise ValueError("exclusion rule has no patterns")
        if self.kind == TOKEN_CARVEOUT and any(len(p) != 1 for p in self.patterns):
            raise ValueError("token_carveout patterns must be single-token")
        if self.kind == COOCCURRENCE_WINDOW:
            if self.window is None or self.window < 1:
                raise ValueError("cooccurrence_window requires window >= 1")
            if len(self.patterns) != 2:
                raise ValueError("cooccurrence_window requires exactly 2 pattern groups")
        elif self.window is not None:
            raise ValueError(f"window not allowed for {self.kind}")


@dataclass(frozen=True)
class QuerySpec:
    query_id: str
    signal_id: str
    signal_patterns: tuple[Pattern, ...]
    filter_set: str
    filter_patterns: tuple[Pattern, ...] = ()
    exclusions: tuple[ExclusionRule, ...] = ()
    max_gap: int = DEFAULT_MAX_GAP
    negation_exempt: bool = False

    def __post_init__(self):
        if not self.signal_patterns:
            raise ValueError("query has no signal patterns")
        if self.filter_set not in FILTER_SET_NAMES:
            raise ValueError(f"unknown filter set: {self.filter_set!r}")
        if (self.filter_set == "standalone") != (not self.filter_patterns):
            raise ValueError("filter_patterns must be empty exactly for standalone")
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")
        if self.negation_exempt != self.signal_patterns[0].contains_negation_token:
            raise ValueError(
                "negation_exempt must mirror a negation token in the main signal pattern"
            )


@dataclass(frozen=True)
class ValidatedSet:
    threshold: float
    query_ids: frozenset[str]


def _patterns(*texts: str) -> tuple[Pattern, ...]:
    return tuple(Pattern.parse(t) for t in texts)


FILTER_SETS: dict[str, tuple[Pattern, ...]] = {
    "standalone": (),
    "studies": _patterns(
        "studies", "study", "previous work", "earlier work", "literature",
        "analysis", "analyses", "report", "reports",
    ),
    "ideas": _patterns(
        "idea*", "theory", "theories", "assumption*", "hypothesis", "hypotheses",
    ),
    "methods": _patterns("model*", "method*", "approach*", "technique*"),
    "results": _patterns(
        "result*", "finding*", "outcome*", "evidence", "data",
        "conclusion*", "observation*",
    ),
}

# Signal term sets: key, display form, patterns (main first), exclusions.
_SIGNAL_TABLE: tuple[tuple[str, str, tuple[str, ...], tuple[ExclusionRule, ...]], ...] = (
    ("challenge", "challenge*", ("challenge*",), ()),
    ("conflict", "conflict*", ("conflict*",), ()),
    ("contradict", "contradict*", ("contradict*",), ()),
    ("contrary", "contrary", ("contrary",), ()),
    ("contrast", "contrast*", ("contrast*",), ()),
    ("controvers", "controvers*", ("controvers*",), ()),
    (
        "debat", "debat*", ("debat*",),
        (ExclusionRule(
            MATCH_CONTEXT,
            _patterns("parliament*", "congress*", "senate*", "polic*",
                      "politic*", "public*", "societ*"),
        ),),
    ),
    (
        "differ", "differ*", ("differ*",),
        (ExclusionRule(TOKEN_CARVEOUT, _patterns("different*")),),
    ),
    (
        "disagree", "disagree*", ("disagree*", "not agree*", "no agreement"),
        (
            ExclusionRule(CITANCE_PHRASE, _patterns("range", "scale", "kappa", "likert")),
            ExclusionRule(COOCCURRENCE_WINDOW, _patterns("agree*", "disagree"), window=10),
        ),
    ),
    (
        "disprov", "disprov*", ("disprov*",),
        (ExclusionRule(COOCCURRENCE_WINDOW, _patterns("prove*", "disprove*"), window=10),),
    ),
    (
        "no_consensus", "no consensus", ("no consensus", "lack of consensus"),
        (ExclusionRule(CITANCE_PHRASE, _patterns("consensus sequence", "consensus site")),),
    ),
    ("questionable", "questionable", ("questionable",), ()),
    (
        "refut", "refut*", ("refut*",),
        (ExclusionRule(TOKEN_CARVEOUT, _patterns("refutab*")),),
    ),
)


def query_id_for(signal_key: str, filter_set: str) -> str:
    return f"{signal_key}.{filter_set}"


def builtin_catalog() -> list[QuerySpec]:
    """The 65 built-in queries: 13 signal sets x 5 filter options."""
    queries = []
    for key, display, pattern_texts, exclusions in _SIGNAL_TABLE:
        patterns = _patterns(*pattern_texts)
        exempt = patterns[0].contains_negation_token
        for filter_set in FILTER_SET_NAMES:
            queries.append(
                QuerySpec(
                    query_id=query_id_for(key, filter_set),
                    signal_id=display,
                    signal_patterns=patterns,
                    filter_set=filter_set,
                    filter_patterns=FILTER_SETS[filter_set],
                    exclusions=exclusions,
                    max_gap=DEFAULT_MAX_GAP,
                    negation_exempt=exempt,
                )
            )
    return queries


def catalog_ids() -> frozenset[str]:
    return frozenset(q.query_id for q in builtin_catalog())


# Queries whose membership in the default 80%-validity set is fixed.
_VALIDATED_80_FIXED = tuple(
    [query_id_for("no_consensus", f) for f in FILTER_SET_NAMES]
    + [query_id_for("controvers", f) for f in FILTER_SET_NAMES]
    + [query_id_for("debat", f) for f in ("standalone", "studies", "methods", "results")]
    + [query_id_for("disagree", f) for f in ("studies", "results")]
    + [query_id_for("contrast", "ideas")]
)

# Additional members of the default 70%-validity set.
_VALIDATED_70_EXTRA = (
    "contradict.standalone",
    "contrary.studies",
    "contrary.methods",
    "conflict.results",
    "disagree.methods",
    "disagree.ideas",
    "disprov.methods",
    "disprov.ideas",
    "refut.studies",
    "refut.results",
    "refut.ideas",
    "debat.ideas",
    "questionable.ideas",
)


def _read_id_lines(text: str) -> list[str]:
    ids = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            ids.append(line)
    return ids


def load_resolution_file(path: str | Path | None = None) -> list[str]:
    """Query ids resolving the ambiguous slots of the 80% validated set.

    Without a path the file shipped with the package is used; the file
    lists one query id per line, ``#`` starts a comment.
    """
    if path is None:
        text = (
            importlib.resources.files("citequery")
            .joinpath("data/resolution_80.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    ids = _read_id_lines(text)
    known = catalog_ids()
    for query_id in ids:
        if query_id not in known:
            raise ValueError(f"resolution file names unknown query id: {query_id!r}")
    return ids


def default_validated_set(
    threshold: float, resolution_path: str | Path | None = None
) -> ValidatedSet:
    """The shipped validated query sets for the 0.80 and 0.70 thresholds.

    Other thresholds have no shipped membership and require gating real
    annotation data instead.
    """
    ids = set(_VALIDATED_80_FIXED)
    ids.update(load_resolution_file(resolution_path))
    if abs(threshold - 0.80) < 1e-9:
        return ValidatedSet(0.80, frozenset(ids))
    if abs(threshold - 0.70) < 1e-9:
        ids.update(_VALIDATED_70_EXTRA)
        return ValidatedSet(0.70, frozenset(ids))
    raise ValueError(
        f"no shipped validated set for threshold {threshold}; gate annotation data instead"
    )


def _parse_pattern_or_fail(text: str, line: int) -> Pattern:
    try:
        return Pattern.parse(text)
    except ValueError as exc:
        star = text.find("*")
        column = star + 1 if star != -1 else None
        raise QueryFileError(str(exc), line, column)


def _finish_block(fields: dict, line: int) -> QuerySpec:
    if "id" not in fields:
        raise QueryFileError("block missing 'query' line", line)
    if "signal" not in fields:
        raise QueryFileError(f"query {fields['id']} missing 'signal' line", line)
    filter_set = fields.get("filter", "standalone")
    patterns: tuple[Pattern, ...] = fields["signal"]
    try:
        return QuerySpec(
            query_id=fields["id"],
            signal_id=fields.get("signal_id", patterns[0].text),
            signal_patterns=patterns,
            filter_set=filter_set,
            filter_patterns=FILTER_SETS[filter_set],
            exclusions=tuple(fields.get("exclusions", ())),
            max_gap=fields.get("maxgap", DEFAULT_MAX_GAP),
            negation_exempt=patterns[0].contains_negation_token,
        )
    except ValueError as exc:
        raise QueryFileError(str(exc), line)


def parse_query_file(text: str) -> list[QuerySpec]:
    """Parse the query-file format; see the repository README for the grammar."""
    queries: list[QuerySpec] = []
    fields: dict = {}
    seen_ids: set[str] = set()
    block_line = 0

    def close(line: int):
        nonlocal fields
        if fields:
            query = _finish_block(fields, block_line)
            if query.query_id in seen_ids:
                raise QueryFileError(f"duplicate query id {query.query_id!r}", block_line)
            seen_ids.add(query.query_id)
            queries.append(query)
            fields = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            close(lineno)
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "query":
            close(lineno)
            if not rest:
                raise QueryFileError("query line missing id", lineno)
            fields["id"] = rest
            block_line = lineno
        elif keyword == "signal":
            parts = [p.strip() for p in rest.split("|")]
            if not all(parts):
                raise QueryFileError("empty signal pattern", lineno)
            fields["signal"] = tuple(_parse_pattern_or_fail(p, lineno) for p in parts)
            fields["signal_id"] = parts[0]
        elif keyword == "filter":
            if rest == "none":
                fields["filter"] = "standalone"
            elif rest in FILTER_SET_NAMES and rest != "standalone":
                fields["filter"] = rest
            else:
                raise QueryFileError(f"unknown filter set {rest!r}", lineno)
        elif keyword == "exclude":
            kind, sep, spec = rest.partition(":")
            if not sep:
                raise QueryFileError("exclude line needs '<kind>:<patterns>'", lineno)
            kind = kind.strip()
            if kind not in EXCLUSION_KINDS:
                raise QueryFileError(f"unknown exclusion kind {kind!r}", lineno)
            window = None
            if " window=" in spec:
                spec, _, window_text = spec.rpartition(" window=")
                try:
                    window = int(window_text)
                except ValueError:
                    raise QueryFileError(f"bad window value {window_text!r}", lineno)
            patterns = tuple(
                _parse_pattern_or_fail(p.strip(), lineno)
                for p in spec.split(",") if p.strip()
            )
            try:
                rule = ExclusionRule(kind, patterns, window)
            except ValueError as exc:
                raise QueryFileError(str(exc), lineno)
            fields.setdefault("exclusions", []).append(rule)
        elif keyword == "maxgap":
            try:
                fields["maxgap"] = int(rest)
            except ValueError:
                raise QueryFileError(f"bad maxgap value {rest!r}", lineno)
        else:
            raise QueryFileError(f"unknown keyword {keyword!r}", lineno)
    close(len(text.splitlines()) + 1)
    return queries


def serialize_query_file(queries: Iterable[QuerySpec]) -> str:
    """Write queries in the query-file format; inverse of parse_query_file."""
    blocks = []
    for q in queries:
        lines = [f"query {q.query_id}"]
        lines.append("signal " + "|".join(p.text for p in q.signal_patterns))
        lines.append(f"filter {'none' if q.filter_set == 'standalone' else q.filter_set}")
        for rule in q.exclusions:
            spec = ",".join(p.text for p in rule.patterns)
            suffix = f" window={rule.window}" if rule.window is not None else ""
            lines.append(f"exclude {rule.kind}:{spec}{suffix}")
        lines.append(f"maxgap {q.max_gap}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def serialize_validated_set(validated: ValidatedSet) -> str:
    lines = [f"threshold {validated.threshold}"]
    lines.extend(sorted(validated.query_ids))
    return "\n".join(lines) + "\n"


def parse_validated_set(text: str) -> ValidatedSet:
    threshold = None
    ids = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("threshold "):
            threshold = float(line.split(None, 1)[1])
        else:
            ids.append(line)
    if threshold is None:
        raise ValueError("validated-set file missing threshold line")
    return ValidatedSet(threshold, frozenset(ids))
