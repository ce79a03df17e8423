"""Token embedding store, file format, fallback embedder and composition.

File format (text): line 1 is ``<token_count> <dim>``; each following line
is ``<token> <v_1> ... <v_dim>``. Tokens must not contain whitespace
(the triple parser percent-encodes it away). Floats are serialized with
shortest round-trip precision, so write → read is bit-exact.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import DataError
from .triples import ClassIndex

_HASH_EMBED_TAG = b"kgcsg.hash_embed.v1"


@dataclass
class EmbeddingStore:
    """Immutable token -> vector table; every vector has ``dim`` finite floats."""

    dim: int
    table: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.table)

    def __contains__(self, token: str) -> bool:
        return token in self.table

    def vector(self, token: str, role: str = "token") -> np.ndarray:
        try:
            return self.table[token]
        except KeyError:
            raise DataError(f"no embedding for {role} token '{token}'") from None


def load_embeddings(source: IO[str] | str | Path) -> EmbeddingStore:
    """Load a store from the embedding file format, validating the header,
    per-row dimensions, duplicates and finiteness."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                return load_embeddings(fh)
        except OSError as e:
            raise DataError(f"cannot read embedding file: {e}") from None
    header = source.readline()
    parts = header.split()
    if len(parts) != 2:
        raise DataError("embedding file: header must be '<token_count> <dim>'")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise DataError("embedding file: non-integer header") from None
    if count < 0 or dim < 1:
        raise DataError(f"embedding file: invalid header ({count}, {dim})")
    table: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(source, start=2):
        if not line.strip():
            continue
        fields = line.split()
        token = fields[0]
        if len(fields) - 1 != dim:
            raise DataError(
                f"embedding file line {lineno}: token '{token}' has "
                f"{len(fields) - 1} components, header says {dim}"
            )
        if token in table:
            raise DataError(f"embedding file line {lineno}: duplicate token '{token}'")
        try:
            vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
        except ValueError:
            raise DataError(
                f"embedding file line {lineno}: non-numeric component for '{token}'"
            ) from None
        if not np.all(np.isfinite(vec)):
            raise DataError(
                f"embedding file line {lineno}: non-finite value for '{token}'"
            )
        table[token] = vec
    if len(table) != count:
        raise DataError(
            f"embedding file: header declares {count} tokens, found {len(table)}"
        )
    return EmbeddingStore(dim=dim, table=table)


def save_embeddings(store: EmbeddingStore, sink: IO[str] | str | Path) -> None:
    """Write the file format; floats use repr() so a reload is bit-identical."""
    if isinstance(sink, (str, Path)):
        try:
            with open(sink, "w", encoding="utf-8") as fh:
                save_embeddings(store, fh)
        except OSError as e:
            raise DataError(f"cannot write embedding file: {e}") from None
        return
    sink.write(f"{len(store.table)} {store.dim}\n")
    for token, vec in store.table.items():
        if any(ch.isspace() for ch in token):
            raise DataError(f"token '{token}' contains whitespace")
        sink.write(token)
        for x in vec:
            sink.write(" " + repr(float(x)))
        sink.write("\n")


def _token_rng(token: str, seed: int) -> np.random.Generator:
    key = _HASH_EMBED_TAG + struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF)
    digest = hashlib.blake2b(token.encode("utf-8"), key=key, digest_size=32).digest()
    words = struct.unpack("<4Q", digest)
    return np.random.default_rng(list(words))


def hash_embed(tokens: Iterable[str], dim: int, seed: int) -> EmbeddingStore:
    """Deterministic fallback embedder: each token gets a vector drawn
    uniformly from [-1, 1]^dim by a generator keyed on (seed, token).
    Identical inputs give a bit-identical store."""
    if dim < 1:
        raise DataError(f"embedding dim must be >= 1, got {dim}")
    table = {}
    for token in sorted(set(tokens)):
        table[token] = _token_rng(token, seed).uniform(-1.0, 1.0, size=dim)
    return EmbeddingStore(dim=dim, table=table)


def normalize_store(store: EmbeddingStore) -> EmbeddingStore:
    """L2-normalize every vector; zero vectors are left unchanged."""
    table = {}
    for token, vec in store.table.items():
        norm = float(np.linalg.norm(vec))
        table[token] = vec / norm if norm > 0.0 else vec.copy()
    return EmbeddingStore(dim=store.dim, table=table)


def compose(store: EmbeddingStore, head: str, relation: str) -> np.ndarray:
    """Head vector followed by relation vector: a 2*dim composite."""
    e_h = store.vector(head, role="head")
    e_r = store.vector(relation, role="relation")
    return np.concatenate([e_h, e_r])


@dataclass
class ClassVectors:
    """Per-class composite vectors, (n_i, 2*dim) arrays in pair-list order."""

    width: int
    classes: list[tuple[str, np.ndarray]]

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def tails(self) -> list[str]:
        return [tail for tail, _ in self.classes]

    def total_vectors(self) -> int:
        return sum(arr.shape[0] for _, arr in self.classes)


def materialize_class_vectors(store: EmbeddingStore, ci: ClassIndex) -> ClassVectors:
    """Build every class's composite vectors, preserving pair order exactly."""
    width = 2 * store.dim
    out: list[tuple[str, np.ndarray]] = []
    for cls in ci.classes:
        rows = np.empty((len(cls.pairs), width), dtype=np.float64)
        for j, (head, relation) in enumerate(cls.pairs):
            try:
                rows[j, : store.dim] = store.vector(head, role="head")
                rows[j, store.dim :] = store.vector(relation, role="relation")
            except DataError as e:
                raise DataError(f"class '{cls.tail}': {e}") from None
        out.append((cls.tail, rows))
    return ClassVectors(width=width, classes=out)
