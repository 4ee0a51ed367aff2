"""Query execution over citances.

Two implementations live here and must stay exactly equivalent:

* the definitional path (``match_pattern``, ``suppress_negation``,
  ``apply_exclusions``, ``check_proximity``, composed by ``run_query``),
  which evaluates one query against one citance by direct scanning, and
* ``CatalogMatcher`` / ``run_all``, which compiles a whole catalog into
  a shared token classifier so each citance is scanned once for all
  queries. The classifier memoizes, per distinct word, the set of
  pattern tokens (literal or prefix) it satisfies, so steady-state cost
  per word is one dictionary lookup; queries whose signal terms never
  occur in a citance are skipped outright.

Matching conventions, shared by both paths (and by any external oracle):

* All indices are word indices; ref sentinels and punctuation do not
  count. Span ends are inclusive.
* Spans are ordered by (start, end, pattern text). A standalone match
  records the first surviving signal span; a filtered match records the
  first surviving signal span that has a qualifying filter span, with
  the first qualifying filter span in the same order.
* The gap between two spans is the number of word tokens strictly
  between their closest edges; overlapping spans have gap 0.
* A signal match is suppressed when a generic negation token (no, not,
  cannot, nor, neither) occurs within the two word tokens immediately
  before the span, unless the query or the matched pattern itself
  carries a negation token. Tokens inside the span never count.
* Token carve-outs void an occurrence whose matched word also matches a
  carve-out pattern. Citance-phrase and co-occurrence exclusions reject
  the whole citance for that query; match-context exclusions drop only
  signal spans immediately preceded by a context pattern.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import (
    CITANCE_PHRASE,
    COOCCURRENCE_WINDOW,
    MATCH_CONTEXT,
    NEGATION_TOKENS,
    TOKEN_CARVEOUT,
    ExclusionRule,
    Pattern,
    QuerySpec,
)
from .ingest import Citance
from .tokens import Token

THREADS_ENV_VAR = "CITEQUERY_THREADS"

NEGATION_WINDOW = 2


@dataclass(frozen=True)
class Span:
    start: int
    end: int  # inclusive
    pattern_id: str

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start must not exceed end")

    def sort_key(self) -> tuple[int, int, str]:
        return (self.start, self.end, self.pattern_id)


@dataclass(frozen=True)
class MatchRecord:
    doc_id: str
    sentence_index: int
    query_id: str
    signal_span: Span
    filter_span: Span | None = None


def _words(tokens: Sequence[Token] | Sequence[str]) -> list[str]:
    if tokens and isinstance(tokens[0], Token):
        return [t.text for t in tokens if not t.is_ref_sentinel]
    return list(tokens)  # type: ignore[arg-type]


def _token_matches(pattern_token: str, word: str) -> bool:
    if pattern_token.endswith("*"):
        return word.startswith(pattern_token[:-1])
    return word == pattern_token


def _occurrences(words: Sequence[str], pattern: Pattern) -> list[int]:
    """Start positions of every occurrence of ``pattern`` in ``words``."""
    length = len(pattern.tokens)
    starts = []
    for i in range(len(words) - length + 1):
        if all(_token_matches(t, words[i + j]) for j, t in enumerate(pattern.tokens)):
            starts.append(i)
    return starts


def match_pattern(
    tokens: Sequence[Token] | Sequence[str],
    pattern: Pattern,
    carveouts: Sequence[Pattern] = (),
) -> list[Span]:
    """All spans of ``pattern`` over the word tokens, carve-outs applied.

    A carve-out (single-token pattern of the owning signal) voids an
    occurrence whose matched words include a word the carve-out matches;
    the same word elsewhere in the citance does not.
    """
    words = _words(tokens)
    length = len(pattern.tokens)
    spans = []
    for start in _occurrences(words, pattern):
        if carveouts and any(
            _token_matches(c.tokens[0], words[start + j])
            for c in carveouts
            for j in range(length)
        ):
            continue
        spans.append(Span(start, start + length - 1, pattern.text))
    return spans


def suppress_negation(
    tokens: Sequence[Token] | Sequence[str], span: Span, exempt: bool
) -> bool:
    """Whether to keep a signal span given the preceding negation window."""
    if exempt:
        return True
    words = _words(tokens)
    window = words[max(0, span.start - NEGATION_WINDOW):span.start]
    return not any(w in NEGATION_TOKENS for w in window)


def apply_exclusions(
    tokens: Sequence[Token] | Sequence[str],
    spans: Sequence[Span],
    rules: Sequence[ExclusionRule],
) -> list[Span] | None:
    """Apply a query's exclusion rules; ``None`` means the citance is rejected."""
    words = _words(tokens)
    surviving = list(spans)
    for rule in rules:
        if rule.kind == TOKEN_CARVEOUT:
            continue  # applied during match_pattern
        if rule.kind == CITANCE_PHRASE:
            if any(_occurrences(words, p) for p in rule.patterns):
                return None
        elif rule.kind == COOCCURRENCE_WINDOW:
            first, second = rule.patterns
            starts_a = _occurrences(words, first)
            starts_b = _occurrences(words, second)
            if any(abs(a - b) <= rule.window for a in starts_a for b in starts_b):
                return None
        elif rule.kind == MATCH_CONTEXT:
            context_ends = {
                start + len(p.tokens) - 1
                for p in rule.patterns
                for start in _occurrences(words, p)
            }
            surviving = [s for s in surviving if s.start - 1 not in context_ends]
    return surviving


def span_gap(a: Span, b: Span) -> int:
    """Word tokens strictly between two spans; 0 when they touch or overlap."""
    if a.start > b.end:
        return a.start - b.end - 1
    if b.start > a.end:
        return b.start - a.end - 1
    return 0


def check_proximity(
    signal_span: Span, filter_spans: Sequence[Span], max_gap: int = 4
) -> Span | None:
    """The nearest filter span within ``max_gap`` of the signal, either side.

    Ties on distance resolve to the span ordering (start, end, pattern).
    """
    best: tuple[int, tuple[int, int, str]] | None = None
    chosen = None
    for span in filter_spans:
        gap = span_gap(signal_span, span)
        if gap > max_gap:
            continue
        key = (gap, span.sort_key())
        if best is None or key < best:
            best = key
            chosen = span
    return chosen


def _signal_spans(words: Sequence[str], query: QuerySpec) -> list[Span] | None:
    """Surviving signal spans for a query, or None when the citance is rejected."""
    carveouts = tuple(
        p for rule in query.exclusions if rule.kind == TOKEN_CARVEOUT
        for p in rule.patterns
    )
    spans = []
    for pattern in query.signal_patterns:
        exempt = query.negation_exempt or pattern.contains_negation_token
        for span in match_pattern(words, pattern, carveouts):
            if suppress_negation(words, span, exempt):
                spans.append(span)
    spans.sort(key=Span.sort_key)
    return apply_exclusions(words, spans, query.exclusions)


def run_query(citance: Citance, query: QuerySpec) -> MatchRecord | None:
    """Evaluate one query against one citance."""
    words = citance.words
    spans = _signal_spans(words, query)
    if not spans:
        return None
    if query.filter_set == "standalone":
        return MatchRecord(citance.doc_id, citance.sentence_index, query.query_id, spans[0])
    filter_spans = sorted(
        (s for p in query.filter_patterns for s in match_pattern(words, p)),
        key=Span.sort_key,
    )
    for signal in spans:
        qualifying = [f for f in filter_spans if span_gap(signal, f) <= query.max_gap]
        if qualifying:
            return MatchRecord(
                citance.doc_id, citance.sentence_index, query.query_id,
                signal, qualifying[0],
            )
    return None


# --- shared-pass matcher -------------------------------------------------


class _TokenClassifier:
    """Maps each distinct word to the set of pattern tokens it satisfies."""

    def __init__(self, pattern_tokens: Iterable[str]):
        self._literals: dict[str, str] = {}
        by_initial: dict[str, list[str]] = {}
        for token in set(pattern_tokens):
            if token.endswith("*"):
                stem = token[:-1]
                by_initial.setdefault(stem[0], []).append(token)
            else:
                self._literals[token] = token
        self._prefixes = {k: tuple(v) for k, v in by_initial.items()}
        self._cache: dict[str, frozenset[str]] = {}
        self._empty: frozenset[str] = frozenset()

    def classify(self, word: str) -> frozenset[str]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        matched = []
        literal = self._literals.get(word)
        if literal is not None:
            matched.append(literal)
        for token in self._prefixes.get(word[:1], ()):
            if word.startswith(token[:-1]):
                matched.append(token)
        result = frozenset(matched) if matched else self._empty
        self._cache[word] = result
        return result


@dataclass(frozen=True)
class _CompiledQuery:
    query: QuerySpec
    carveout_tokens: frozenset[str]
    pattern_exempt: tuple[bool, ...]  # parallel to query.signal_patterns
    citance_phrases: tuple[Pattern, ...]
    cooccurrences: tuple[ExclusionRule, ...]
    context_patterns: tuple[Pattern, ...]


def _compile_query(query: QuerySpec) -> _CompiledQuery:
    carveouts = []
    phrases = []
    cooccurrences = []
    contexts = []
    for rule in query.exclusions:
        if rule.kind == TOKEN_CARVEOUT:
            carveouts.extend(p.tokens[0] for p in rule.patterns)
        elif rule.kind == CITANCE_PHRASE:
            phrases.extend(rule.patterns)
        elif rule.kind == COOCCURRENCE_WINDOW:
            cooccurrences.append(rule)
        elif rule.kind == MATCH_CONTEXT:
            contexts.extend(rule.patterns)
    return _CompiledQuery(
        query=query,
        carveout_tokens=frozenset(carveouts),
        pattern_exempt=tuple(
            query.negation_exempt or p.contains_negation_token
            for p in query.signal_patterns
        ),
        citance_phrases=tuple(phrases),
        cooccurrences=tuple(cooccurrences),
        context_patterns=tuple(contexts),
    )


class CatalogMatcher:
    """Single-pass execution of a fixed query catalog over citances.

    Compiling collects every pattern token from every query into one
    classifier; matching a citance classifies each word once and then
    evaluates only the queries whose signal terms actually occurred.
    Results are identical to running ``run_query`` per query.
    """

    def __init__(self, queries: Sequence[QuerySpec]):
        self.queries = list(queries)
        self._compiled = [_compile_query(q) for q in self.queries]
        tokens: set[str] = set()
        for compiled in self._compiled:
            q = compiled.query
            for pattern in q.signal_patterns:
                tokens.update(pattern.tokens)
            for pattern in q.filter_patterns:
                tokens.update(pattern.tokens)
            tokens.update(compiled.carveout_tokens)
            for pattern in compiled.citance_phrases + compiled.context_patterns:
                tokens.update(pattern.tokens)
            for rule in compiled.cooccurrences:
                for pattern in rule.patterns:
                    tokens.update(pattern.tokens)
        self._classifier = _TokenClassifier(tokens)
        # Queries indexed by the lead token of each signal pattern, so a
        # citance only evaluates queries whose signals can occur in it.
        self._by_lead: dict[str, list[int]] = {}
        for index, compiled in enumerate(self._compiled):
            for pattern in compiled.query.signal_patterns:
                self._by_lead.setdefault(pattern.tokens[0], []).append(index)

    def _pattern_starts(
        self, pattern: Pattern, classes: list[frozenset[str]]
    ) -> list[int]:
        first = pattern.tokens[0]
        rest = pattern.tokens[1:]
        limit = len(classes) - len(rest)
        starts = []
        for i in range(limit):
            if first in classes[i] and all(
                t in classes[i + 1 + j] for j, t in enumerate(rest)
            ):
                starts.append(i)
        return starts

    def match_citance(self, citance: Citance) -> list[MatchRecord]:
        words = citance.words
        classify = self._classifier.classify
        classes: list[frozenset[str]] = []
        seen: set[str] = set()
        for word in words:
            c = classify(word)
            classes.append(c)
            if c:
                seen.update(c)
        if not seen:
            return []
        candidates: set[int] = set()
        for token in seen:
            hits = self._by_lead.get(token)
            if hits:
                candidates.update(hits)
        records = []
        for index in sorted(candidates):
            record = self._evaluate(self._compiled[index], citance, words, classes)
            if record is not None:
                records.append(record)
        return records

    def _evaluate(
        self,
        compiled: _CompiledQuery,
        citance: Citance,
        words: Sequence[str],
        classes: list[frozenset[str]],
    ) -> MatchRecord | None:
        query = compiled.query

        for pattern in compiled.citance_phrases:
            if self._pattern_starts(pattern, classes):
                return None
        for rule in compiled.cooccurrences:
            starts_a = self._pattern_starts(rule.patterns[0], classes)
            if starts_a:
                starts_b = self._pattern_starts(rule.patterns[1], classes)
                if any(abs(a - b) <= rule.window for a in starts_a for b in starts_b):
                    return None

        context_ends: set[int] | None = None
        spans: list[Span] = []
        carveouts = compiled.carveout_tokens
        for pattern, exempt in zip(query.signal_patterns, compiled.pattern_exempt):
            length = len(pattern.tokens)
            for start in self._pattern_starts(pattern, classes):
                if carveouts and any(
                    not carveouts.isdisjoint(classes[start + j]) for j in range(length)
                ):
                    continue
                if not exempt and any(
                    w in NEGATION_TOKENS
                    for w in words[max(0, start - NEGATION_WINDOW):start]
                ):
                    continue
                if compiled.context_patterns:
                    if context_ends is None:
                        context_ends = {
                            s + len(p.tokens) - 1
                            for p in compiled.context_patterns
                            for s in self._pattern_starts(p, classes)
                        }
                    if start - 1 in context_ends:
                        continue
                spans.append(Span(start, start + length - 1, pattern.text))
        if not spans:
            return None
        spans.sort(key=Span.sort_key)

        if query.filter_set == "standalone":
            return MatchRecord(
                citance.doc_id, citance.sentence_index, query.query_id, spans[0]
            )
        filter_spans = sorted(
            (
                Span(s, s + len(p.tokens) - 1, p.text)
                for p in query.filter_patterns
                for s in self._pattern_starts(p, classes)
            ),
            key=Span.sort_key,
        )
        if not filter_spans:
            return None
        for signal in spans:
            for filter_span in filter_spans:
                if span_gap(signal, filter_span) <= query.max_gap:
                    return MatchRecord(
                        citance.doc_id, citance.sentence_index, query.query_id,
                        signal, filter_span,
                    )
        return None


def resolve_threads(threads: int | None = None) -> int:
    """Effective worker count: explicit argument, else the env cap, else 1."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV_VAR, "1")
        try:
            threads = int(raw)
        except ValueError:
            threads = 1
    return max(1, threads)


def run_all(
    citances: Iterable[Citance],
    queries: Sequence[QuerySpec],
    threads: int | None = None,
    chunk_size: int = 2048,
) -> list[MatchRecord]:
    """Match every citance against every query.

    Output is sorted by (doc_id, sentence_index, query_id) and is
    byte-identical for any worker count.
    """
    matcher = CatalogMatcher(queries)
    workers = resolve_threads(threads)
    records: list[MatchRecord] = []
    if workers <= 1:
        match = matcher.match_citance
        for citance in citances:
            found = match(citance)
            if found:
                records.extend(found)
    else:
        from concurrent.futures import ThreadPoolExecutor

        def match_chunk(chunk: list[Citance]) -> list[MatchRecord]:
            out = []
            for c in chunk:
                out.extend(matcher.match_citance(c))
            return out

        def chunks():
            chunk: list[Citance] = []
            for citance in citances:
                chunk.append(citance)
                if len(chunk) >= chunk_size:
                    yield chunk
                    chunk = []
            if chunk:
                yield chunk

        # Dispatch a bounded window of chunks so a streamed corpus is never
        # materialized whole; in-order collection keeps output deterministic.
        with ThreadPoolExecutor(max_workers=workers) as pool:
            window: list = []
            for chunk in chunks():
                window.append(pool.submit(match_chunk, chunk))
                if len(window) >= workers * 4:
                    records.extend(window.pop(0).result())
            for future in window:
                records.extend(future.result())
    records.sort(key=lambda r: (r.doc_id, r.sentence_index, r.query_id))
    return records
