"""Triple-file ingestion and grouping of triples into tail-entity classes.

A triple file is 3-column TSV: ``head<TAB>relation<TAB>tail``, one triple
per line, blank lines allowed. Duplicate triples are kept as distinct
records: downstream sampling operates on occurrences, and dataset
statistics are raw totals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence
from urllib.parse import unquote

from .errors import DataError


def encode_token(raw: str) -> str:
    """Percent-encode '%' and internal whitespace so tokens are
    whitespace-free (the embedding file format requires it)."""
    if not any(ch == "%" or ch.isspace() for ch in raw):
        return raw
    out = []
    for ch in raw:
        if ch == "%" or ch.isspace():
            out.append("".join("%%%02X" % b for b in ch.encode("utf-8")))
        else:
            out.append(ch)
    return "".join(out)


def decode_token(token: str) -> str:
    """Inverse of :func:`encode_token`."""
    return unquote(token)


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: str


@dataclass
class TripleSet:
    """All triples of a dataset, in file order."""

    triples: list[Triple]
    entities: frozenset[str] = field(init=False)
    relations: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        ents: set[str] = set()
        rels: set[str] = set()
        for t in self.triples:
            ents.add(t.head)
            ents.add(t.tail)
            rels.add(t.relation)
        self.entities = frozenset(ents)
        self.relations = frozenset(rels)

    def __len__(self) -> int:
        return len(self.triples)


@dataclass
class TailClass:
    """One class: a tail entity and the (head, relation) pairs pointing at it."""

    tail: str
    pairs: list[tuple[str, str]]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class ClassIndex:
    """Classes ordered by first appearance of their tail in the triple set."""

    classes: list[TailClass]

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def tails(self) -> list[str]:
        return [c.tail for c in self.classes]

    def tokens(self) -> set[str]:
        """All head and relation tokens referenced by the classes."""
        toks: set[str] = set()
        for c in self.classes:
            for head, relation in c.pairs:
                toks.add(head)
                toks.add(relation)
        return toks


@dataclass(frozen=True)
class DatasetStats:
    entity_count: int
    relation_count: int
    triple_count: int
    class_count: int


def _parse_lines(lines: Iterable[str], source_name: str) -> list[Triple]:
    triples = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(
                f"{source_name}:{lineno}: expected 3 tab-separated fields, "
                f"got {len(fields)}"
            )
        stripped = [f.strip() for f in fields]
        if any(not f for f in stripped):
            raise DataError(f"{source_name}:{lineno}: empty field in triple")
        head, relation, tail = (encode_token(f) for f in stripped)
        triples.append(Triple(head, relation, tail))
    return triples


def parse_triples(source: IO[str] | str | Path, name: str | None = None) -> TripleSet:
    """Parse one TSV triple file (path or open text stream).

    Raises :class:`DataError` on malformed lines (with the line number)
    and when the file contains no triples at all.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with open(path, encoding="utf-8") as fh:
                triples = _parse_lines(fh, name or str(path))
        except OSError as e:
            raise DataError(f"cannot read triples file: {e}") from None
        source_name = name or str(path)
    else:
        source_name = name or getattr(source, "name", "<stream>")
        triples = _parse_lines(source, source_name)
    if not triples:
        raise DataError(f"{source_name}: no triples")
    return TripleSet(triples)


def parse_triple_files(paths: Sequence[str | Path]) -> TripleSet:
    """Parse and concatenate several split files (train/valid/test) in order."""
    if not paths:
        raise DataError("no triple files given")
    all_triples: list[Triple] = []
    for path in paths:
        all_triples.extend(parse_triples(path).triples)
    return TripleSet(all_triples)


def group_by_tail(ts: TripleSet) -> ClassIndex:
    """Group (head, relation) pairs by their tail entity.

    Classes are ordered by first appearance of the tail; pair lists keep
    triple order, so the result is fully determined by the input bytes.
    """
    if not ts.triples:
        raise DataError("cannot group an empty triple set")
    by_tail: dict[str, list[tuple[str, str]]] = {}
    for t in ts.triples:
        by_tail.setdefault(t.tail, []).append((t.head, t.relation))
    return ClassIndex([TailClass(tail, pairs) for tail, pairs in by_tail.items()])


def dataset_stats(ts: TripleSet) -> DatasetStats:
    """Counts computed from actual content, never from header metadata."""
    unique_tails = {t.tail for t in ts.triples}
    return DatasetStats(
        entity_count=len(ts.entities),
        relation_count=len(ts.relations),
        triple_count=len(ts.triples),
        class_count=len(unique_tails),
    )


def filter_classes(
    ci: ClassIndex, min_pairs: int = 1, max_classes: int | None = None
) -> ClassIndex:
    """Drop classes with fewer than ``min_pairs`` pairs, then optionally keep
    only the ``max_classes`` largest ones (ties resolved by class order).
    Relative class order is preserved either way."""
    if min_pairs < 1:
        raise DataError(f"min_pairs must be >= 1, got {min_pairs}")
    if max_classes is not None and max_classes < 1:
        raise DataError(f"max_classes must be >= 1, got {max_classes}")
    survivors = [c for c in ci.classes if len(c) >= min_pairs]
    if max_classes is not None and len(survivors) > max_classes:
        ranked = sorted(range(len(survivors)), key=lambda i: (-len(survivors[i]), i))
        keep = set(ranked[:max_classes])
        survivors = [c for i, c in enumerate(survivors) if i in keep]
    if not survivors:
        raise DataError("no classes survive filter")
    return ClassIndex(survivors)
