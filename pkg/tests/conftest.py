from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from kgcsg import EmbeddingStore, parse_triples

DATA_DIR = Path(__file__).parent / "data"
TINY = DATA_DIR / "tiny" / "train.tsv"

_SPLIT_NAMES = ("train", "valid", "test")
_SPLIT_EXTS = (".txt", ".tsv", ".del")


def find_dataset(name: str) -> list[Path] | None:
    """Locate a public benchmark's split files under tests/data/<name>/ or
    $KGCSG_DATA/<name>/. Returns None when the files were not provided."""
    roots = [DATA_DIR]
    env = os.environ.get("KGCSG_DATA")
    if env:
        roots.insert(0, Path(env))
    for root in roots:
        d = root / name
        if not d.is_dir():
            continue
        paths = []
        for split in _SPLIT_NAMES:
            for ext in _SPLIT_EXTS:
                p = d / f"{split}{ext}"
                if p.is_file():
                    paths.append(p)
                    break
        if paths:
            return paths
    return None


def require_dataset(name: str) -> list[Path]:
    paths = find_dataset(name)
    if paths is None:
        pytest.skip(
            f"public dataset '{name}' not provided "
            f"(place its splits under tests/data/{name}/ or $KGCSG_DATA/{name}/)"
        )
    return paths


@pytest.fixture
def tiny_path() -> Path:
    return TINY


@pytest.fixture
def tiny_tripleset():
    return parse_triples(TINY)


def synthetic_corpus(
    rng: np.random.Generator,
    n_classes: int,
    min_pairs: int = 3,
    max_pairs: int = 30,
    n_heads: int = 40,
    n_relations: int = 8,
) -> str:
    """Random TSV corpus: per class a random number of (head, relation)
    pairs drawn with replacement, so duplicates occur naturally."""
    lines = []
    for c in range(n_classes):
        size = int(rng.integers(min_pairs, max_pairs + 1))
        for _ in range(size):
            h = int(rng.integers(n_heads))
            r = int(rng.integers(n_relations))
            lines.append(f"h{h:03d}\trel{r:02d}\ttail{c:03d}")
    order = rng.permutation(len(lines))
    return "\n".join(lines[i] for i in order) + "\n"


def clustered_corpus_and_store(
    n_classes: int,
    pairs_per_class: int = 40,
    dim: int = 8,
    separation: float = 100.0,
    jitter: float = 0.5,
    seed: int = 0,
) -> tuple[str, EmbeddingStore]:
    """A dataset whose composite vectors form one tight, far-apart cluster
    per class: heads of class c sit at separation*c + jitter noise, and a
    single shared zero relation vector contributes nothing."""
    rng = np.random.default_rng(seed)
    lines = []
    table: dict[str, np.ndarray] = {"rel": np.zeros(dim)}
    for c in range(n_classes):
        center = np.zeros(dim)
        center[0] = separation * c
        for p in range(pairs_per_class):
            head = f"h{c:02d}_{p:03d}"
            table[head] = center + rng.uniform(-jitter, jitter, size=dim)
            lines.append(f"{head}\trel\tcls{c:02d}")
    return "\n".join(lines) + "\n", EmbeddingStore(dim=dim, table=table)


def write_corpus(tmp_path: Path, text: str, name: str = "corpus.tsv") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def random_row_stochastic(rng: np.random.Generator, c: int, dense: bool = True) -> np.ndarray:
    """Random nonnegative matrix with unit row sums; strictly positive when
    dense (hence a connected class graph after symmetrization)."""
    if dense:
        a = rng.uniform(0.05, 1.0, size=(c, c))
    else:
        a = rng.uniform(0.0, 1.0, size=(c, c)) * (rng.random((c, c)) < 0.4)
        a[np.arange(c), np.arange(c)] += 0.2  # keep every degree positive
    return a / a.sum(axis=1, keepdims=True)
