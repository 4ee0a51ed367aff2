"""Corpus ingestion: documents, sentences, reference links and citances.

The interchange format is UTF-8 JSON Lines, one document per line. A
record carries either a pre-segmented ``sentences`` array or a raw
``body`` string with inline ``<ref .../>`` markers; in the latter case
the rule-based sentence splitter below is applied. A citance is any
sentence carrying at least one reference link.
"""

from __future__ import annotations

import functools
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

from .tokens import Token, tokenize, word_texts

DOC_TYPES = ("full-article", "review", "short-communication", "other")
MAIN_FIELDS = ("BioHealth", "LifeEarth", "MathComp", "PhysEngr", "SocHum")

SELF = "self"
NON_SELF = "non-self"
UNKNOWN = "unknown"

# Trailing-period chunks whose period never ends a sentence, plus
# single-letter initials handled separately.
ABBREVIATIONS = frozenset(
    {"al", "e.g", "i.e", "fig", "figs", "eq", "eqs", "et", "vs", "cf",
     "dr", "no", "ref", "refs"}
)

_REF_MARKER = re.compile(r"<ref\b([^<>]*?)/>")
_MARKER_ATTR = re.compile(r"(\w+)\s*=\s*(?:\"([^\"]*)\"|'([^']*)'|([^\s/>]+))")
_TERMINATORS = ".!?"


def _fold(value: str) -> str:
    """Lowercase and strip diacritics from a name component."""
    decomposed = unicodedata.normalize("NFKD", value)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return stripped.casefold().strip()


@dataclass(frozen=True)
class AuthorName:
    family: str
    given_initial: str | None = None

    @classmethod
    def from_parts(cls, family: str, given: str | None = None) -> "AuthorName":
        folded = _fold(family)
        if not folded:
            raise ValueError("author family name empty after normalization")
        initial = None
        if given:
            for c in _fold(given):
                if c.isalpha():
                    initial = c
                    break
        return cls(folded, initial)


@dataclass(frozen=True)
class RefLink:
    ref_id: str
    cited_doc_id: str | None = None
    cited_year: int | None = None
    cited_authors: tuple[AuthorName, ...] | None = None
    span: tuple[int, int] | None = None  # marker offsets within the sentence text


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    refs: tuple[RefLink, ...] = ()


@dataclass(frozen=True)
class Document:
    doc_id: str
    year: int
    doc_type: str = "other"
    main_field: str | None = None
    meso_field: int | None = None
    authors: tuple[AuthorName, ...] = ()
    sentences: tuple[Sentence, ...] = ()


@dataclass(frozen=True)
class Citance:
    """A citing sentence: position metadata plus its token sequence."""

    doc_id: str
    sentence_index: int
    tokens: tuple[Token, ...]
    refs: tuple[RefLink, ...]
    position_fraction: float

    @functools.cached_property
    def words(self) -> tuple[str, ...]:
        return word_texts(self.tokens)


class RecordError(ValueError):
    """A malformed corpus record; ``code`` is a short machine-readable tag."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}{': ' + detail if detail else ''}")
        self.code = code


@dataclass(frozen=True)
class LoadError:
    line: int
    code: str

    def report(self) -> str:
        return f"line={self.line} error={self.code}"


@dataclass
class LoadResult:
    documents: list[Document] = field(default_factory=list)
    errors: list[LoadError] = field(default_factory=list)


def parse_ref_markers(text: str) -> list[tuple[tuple[int, int], dict[str, str]]]:
    """Find inline ``<ref .../>`` markers; returns (span, attributes) pairs."""
    found = []
    for m in _REF_MARKER.finditer(text):
        attrs = {a.group(1): a.group(2) or a.group(3) or a.group(4) or ""
                 for a in _MARKER_ATTR.finditer(m.group(1))}
        found.append(((m.start(), m.end()), attrs))
    return found


def _is_abbreviation(text: str, dot_index: int) -> bool:
    """True when the period at ``dot_index`` ends a known abbreviation."""
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    chunk = text[start:dot_index].lower()
    core = chunk.lstrip("([{'\"").rstrip(".")
    if not core:
        return False
    if core in ABBREVIATIONS:
        return True
    return len(core) == 1 and core.isalpha()


def sentence_spans(
    text: str, protected_spans: Sequence[tuple[int, int]] = ()
) -> list[tuple[int, int]]:
    """Character spans of the sentences in ``text``.

    A boundary is a terminator (``.``, ``!``, ``?``) followed by
    whitespace and an uppercase letter or digit, never inside a
    protected span and never after a listed abbreviation or a
    single-letter initial. Spans are trimmed of surrounding whitespace;
    everything dropped between consecutive spans is whitespace.
    """
    n = len(text)
    boundaries: list[int] = []  # index one past the terminator
    for i, c in enumerate(text):
        if c not in _TERMINATORS:
            continue
        if any(s <= i < e for s, e in protected_spans):
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j >= n or not (text[j].isupper() or text[j].isdigit()):
            continue
        if c == "." and _is_abbreviation(text, i):
            continue
        boundaries.append(i + 1)

    spans: list[tuple[int, int]] = []
    start = 0
    for cut in boundaries + [n]:
        segment_start, segment_end = start, cut
        while segment_start < segment_end and text[segment_start].isspace():
            segment_start += 1
        while segment_end > segment_start and text[segment_end - 1].isspace():
            segment_end -= 1
        if segment_end > segment_start:
            spans.append((segment_start, segment_end))
        start = cut
    return spans


def split_sentences(text: str, refs: Sequence[RefLink] = ()) -> list[Sentence]:
    """Split raw text into sentences, distributing refs by marker span.

    ``refs`` carry document-level marker spans; the returned sentences
    hold the same links rebased to sentence-local offsets. No sentence
    boundary is ever placed inside a marker span.
    """
    protected = [r.span for r in refs if r.span is not None]
    sentences = []
    for index, (start, end) in enumerate(sentence_spans(text, protected)):
        local = tuple(
            RefLink(
                r.ref_id, r.cited_doc_id, r.cited_year, r.cited_authors,
                (r.span[0] - start, r.span[1] - start),
            )
            for r in refs
            if r.span is not None and start <= r.span[0] and r.span[1] <= end
        )
        sentences.append(Sentence(index, text[start:end], local))
    return sentences


def _require_str(obj: dict, key: str, code: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise RecordError(code)
    return value


def _parse_authors(raw, code: str) -> tuple[AuthorName, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise RecordError(code)
    authors = []
    for item in raw:
        if not isinstance(item, dict) or not isinstance(item.get("family"), str):
            raise RecordError(code)
        try:
            authors.append(AuthorName.from_parts(item["family"], item.get("given")))
        except ValueError:
            raise RecordError(code)
    return tuple(authors)


def _parse_ref_obj(obj, seen_ids: set[str]) -> RefLink:
    if not isinstance(obj, dict):
        raise RecordError("bad_ref")
    ref_id = _require_str(obj, "ref_id", "bad_ref")
    if ref_id in seen_ids:
        raise RecordError("dup_ref_id", ref_id)
    seen_ids.add(ref_id)
    cited_year = obj.get("cited_year")
    if cited_year is not None and not isinstance(cited_year, int):
        raise RecordError("bad_ref", "cited_year")
    cited_authors = obj.get("cited_authors")
    authors = _parse_authors(cited_authors, "bad_ref") if cited_authors is not None else None
    cited_doc = obj.get("cited_doc_id")
    if cited_doc is not None and not isinstance(cited_doc, str):
        raise RecordError("bad_ref", "cited_doc_id")
    return RefLink(ref_id, cited_doc, cited_year, authors)


def _marker_ref(attrs: dict[str, str], span: tuple[int, int], seen_ids: set[str]) -> RefLink:
    ref_id = attrs.get("id", "")
    if not ref_id:
        raise RecordError("bad_ref", "marker without id")
    if ref_id in seen_ids:
        raise RecordError("dup_ref_id", ref_id)
    seen_ids.add(ref_id)
    year = attrs.get("cited_year")
    cited_year = None
    if year is not None:
        try:
            cited_year = int(year)
        except ValueError:
            raise RecordError("bad_ref", "cited_year")
    return RefLink(ref_id, attrs.get("cited_doc_id"), cited_year, None, span)


def _parse_presegmented(raw, seen_ids: set[str]) -> tuple[Sentence, ...]:
    if not isinstance(raw, list):
        raise RecordError("bad_sentences")
    sentences = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict):
            raise RecordError("bad_sentences")
        text = item.get("text")
        if not isinstance(text, str):
            raise RecordError("bad_sentences", "missing text")
        refs = [_parse_ref_obj(o, seen_ids) for o in item.get("refs") or []]
        # Markers embedded in the text contribute spans; ids absent from
        # the refs array become links of their own.
        markers = parse_ref_markers(text)
        by_id = {r.ref_id: i for i, r in enumerate(refs)}
        for span, attrs in markers:
            marker_id = attrs.get("id", "")
            if marker_id in by_id:
                i = by_id[marker_id]
                refs[i] = RefLink(
                    refs[i].ref_id, refs[i].cited_doc_id, refs[i].cited_year,
                    refs[i].cited_authors, span,
                )
            else:
                refs.append(_marker_ref(attrs, span, seen_ids))
        sentences.append(Sentence(index, text, tuple(refs)))
    return tuple(sentences)


def _parse_rawtext(body, seen_ids: set[str]) -> tuple[Sentence, ...]:
    if not isinstance(body, str):
        raise RecordError("bad_body")
    refs = [_marker_ref(attrs, span, seen_ids) for span, attrs in parse_ref_markers(body)]
    return tuple(split_sentences(body, refs))


def record_to_document(obj, mode: str) -> Document:
    """Validate one decoded JSON record and build a Document.

    Raises RecordError with a stable code for malformed records.
    """
    if not isinstance(obj, dict):
        raise RecordError("not_object")
    if "doc_id" not in obj or not isinstance(obj["doc_id"], str) or not obj["doc_id"]:
        raise RecordError("missing_doc_id")
    if "year" not in obj or obj["year"] is None:
        raise RecordError("missing_year")
    year = obj["year"]
    if not isinstance(year, int) or not 1900 <= year <= 2100:
        raise RecordError("bad_year", repr(year))
    doc_type = obj.get("doc_type", "other")
    if doc_type not in DOC_TYPES:
        raise RecordError("bad_doc_type", repr(doc_type))
    main_field = obj.get("main_field")
    if main_field is not None and main_field not in MAIN_FIELDS:
        raise RecordError("bad_main_field", repr(main_field))
    meso_field = obj.get("meso_field")
    if meso_field is not None and (not isinstance(meso_field, int) or meso_field < 0):
        raise RecordError("bad_meso_field", repr(meso_field))
    authors = _parse_authors(obj.get("authors"), "bad_authors")

    seen_ids: set[str] = set()
    if mode == "presegmented":
        if "sentences" not in obj:
            raise RecordError("missing_sentences")
        sentences = _parse_presegmented(obj["sentences"], seen_ids)
    elif mode == "rawtext":
        if "body" not in obj:
            raise RecordError("missing_body")
        sentences = _parse_rawtext(obj["body"], seen_ids)
    else:
        raise ValueError(f"unknown mode: {mode!r}")

    return Document(
        doc_id=obj["doc_id"],
        year=year,
        doc_type=doc_type,
        main_field=main_field,
        meso_field=meso_field,
        authors=authors,
        sentences=sentences,
    )


def load_corpus(path: str | Path, mode: str = "presegmented") -> LoadResult:
    """Load a JSON Lines corpus file.

    Malformed records are skipped and collected as LoadErrors carrying
    their 1-based line numbers; an unreadable file raises OSError.
    """
    if mode not in ("presegmented", "rawtext"):
        raise ValueError(f"unknown mode: {mode!r}")
    result = LoadResult()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                result.errors.append(LoadError(lineno, "bad_json"))
                continue
            try:
                result.documents.append(record_to_document(obj, mode))
            except RecordError as exc:
                result.errors.append(LoadError(lineno, exc.code))
    return result


def _author_obj(author: AuthorName) -> dict:
    return {"family": author.family, "given": author.given_initial}


def document_to_record(doc: Document) -> dict:
    """Presegmented JSON record for a Document (round-trips via load)."""
    return {
        "doc_id": doc.doc_id,
        "year": doc.year,
        "doc_type": doc.doc_type,
        "main_field": doc.main_field,
        "meso_field": doc.meso_field,
        "authors": [_author_obj(a) for a in doc.authors],
        "sentences": [
            {
                "text": s.text,
                "refs": [
                    {
                        "ref_id": r.ref_id,
                        "cited_doc_id": r.cited_doc_id,
                        "cited_year": r.cited_year,
                        "cited_authors": None if r.cited_authors is None
                        else [_author_obj(a) for a in r.cited_authors],
                    }
                    for r in s.refs
                ],
            }
            for s in doc.sentences
        ],
    }


def write_corpus(documents: Iterable[Document], handle: IO[str]) -> int:
    """Serialize documents as presegmented JSON Lines; returns record count."""
    count = 0
    for doc in documents:
        handle.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")
        count += 1
    return count


def extract_citances(doc: Document) -> list[Citance]:
    """Citances of a document: its ref-bearing sentences, tokenized."""
    total = len(doc.sentences)
    denominator = max(1, total - 1)
    citances = []
    for sentence in doc.sentences:
        if not sentence.refs:
            continue
        spans = sorted(r.span for r in sentence.refs if r.span is not None)
        citances.append(
            Citance(
                doc_id=doc.doc_id,
                sentence_index=sentence.index,
                tokens=tuple(tokenize(sentence.text, spans)),
                refs=sentence.refs,
                position_fraction=sentence.index / denominator,
            )
        )
    return citances


def iter_citances(documents: Iterable[Document]) -> Iterator[Citance]:
    for doc in documents:
        yield from extract_citances(doc)


def is_self_citation(
    citing: Sequence[AuthorName], cited: Sequence[AuthorName] | None
) -> str:
    """Classify a citing/cited author-list pair: self, non-self or unknown.

    Two names agree when their family names match and, where both carry
    a given initial, the initials match as well. An absent or empty
    cited list yields ``unknown``.
    """
    if not cited:
        return UNKNOWN
    for a in citing:
        for b in cited:
            if a.family != b.family:
                continue
            if a.given_initial and b.given_initial and a.given_initial != b.given_initial:
                continue
            return SELF
    return NON_SELF


def relative_age(citing_year: int, cited_year: int) -> int:
    """Age of the cited paper relative to the citing one; may be negative."""
    return citing_year - cited_year
