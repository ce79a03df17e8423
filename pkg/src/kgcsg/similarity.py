"""Monte-Carlo class sampling, exact k-NN search and the class similarity matrix.

The whole path is a pure function of (class vectors, M, k, seed): per-class
draws come from generators keyed on (seed, tail token), so reordering the
classes permutes the result without changing any draw, and the blocked k-NN
search reproduces the brute-force neighbor sets bit for bit, ties included.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .embeddings import ClassVectors
from .errors import ConfigError, DataError

_SAMPLE_TAG = b"kgcsg.sample_pool.v1"

# elementwise temp budget (floats) for one query block of the k-NN search
_BLOCK_BUDGET = 8_000_000


@dataclass
class SampledPool:
    """Sampled composite vectors, grouped contiguously by class."""

    vectors: np.ndarray  # (n, width) float64
    class_of: np.ndarray  # (n,) int64, class index per pool row
    per_class_counts: list[int]  # realized M_i = min(M, |class i|)
    tails: list[str]
    m: int  # configured cap
    seed: int

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def class_count(self) -> int:
        return len(self.per_class_counts)


def _class_rng(seed: int, tail: str) -> np.random.Generator:
    key = _SAMPLE_TAG + struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF)
    digest = hashlib.blake2b(tail.encode("utf-8"), key=key, digest_size=32).digest()
    return np.random.default_rng(list(struct.unpack("<4Q", digest)))


def sample_pool(class_vectors: ClassVectors, m: int, seed: int) -> SampledPool:
    """Draw min(m, |class|) vectors per class, uniformly without replacement.

    Each class uses an independent generator keyed on (seed, tail token),
    so draws do not depend on class order. Draw order is recorded: pool
    rows follow the per-class permutation prefix.
    """
    if m < 1:
        raise ConfigError(f"sample cap M must be >= 1, got {m}")
    if len(class_vectors) < 2:
        raise DataError("similarity undefined for C < 2")
    blocks: list[np.ndarray] = []
    counts: list[int] = []
    labels: list[np.ndarray] = []
    for idx, (tail, arr) in enumerate(class_vectors.classes):
        n_i = arr.shape[0]
        if n_i == 0:
            raise DataError(f"class '{tail}' has no vectors")
        take = min(m, n_i)
        order = _class_rng(seed, tail).permutation(n_i)[:take]
        blocks.append(arr[order])
        counts.append(take)
        labels.append(np.full(take, idx, dtype=np.int64))
    return SampledPool(
        vectors=np.ascontiguousarray(np.concatenate(blocks, axis=0)),
        class_of=np.concatenate(labels),
        per_class_counts=counts,
        tails=class_vectors.tails,
        m=m,
        seed=seed,
    )


def l2_distance_sq(a: np.ndarray, b: np.ndarray) -> float:
    """Exact sum of squared componentwise differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"vector length mismatch: {a.shape} vs {b.shape}")
    return float(np.sum((a - b) ** 2))


def _select_k(dists: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries, ordered by (distance, index)."""
    n = dists.shape[0]
    if k < n:
        rough = np.argpartition(dists, k - 1)[:k]
        cutoff = dists[rough].max()
        candidates = np.flatnonzero(dists <= cutoff)
    else:
        candidates = np.arange(n)
    order = np.argsort(dists[candidates], kind="stable")
    return candidates[order[:k]]


def knn_exact(
    pool: SampledPool, k: int, include_self: bool = False
) -> np.ndarray:
    """Exact k nearest neighbors of every pool vector under squared L2.

    Returns an (n, k) index array; row q lists q's neighbors by ascending
    distance, ties broken by ascending pool index. The query itself is
    excluded unless ``include_self`` is set.
    """
    n = len(pool)
    limit = n if include_self else n - 1
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if k > limit:
        raise ConfigError(
            f"k={k} too large for pool of size {n}"
            + ("" if include_self else " with self excluded")
        )
    vectors = pool.vectors
    width = vectors.shape[1]
    block = max(1, _BLOCK_BUDGET // max(1, n * width))
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        queries = vectors[start:stop]
        # same elementwise arithmetic as l2_distance_sq, blocked over queries
        dists = ((vectors[None, :, :] - queries[:, None, :]) ** 2).sum(axis=2)
        if not include_self:
            for row, q in enumerate(range(start, stop)):
                dists[row, q] = np.inf
        for row, q in enumerate(range(start, stop)):
            out[q] = _select_k(dists[row], k)
    return out


@dataclass
class SimilarityMatrix:
    """C x C matrix; entry (i, j) is the fraction of class-i queries' neighbor
    slots landing in class j."""

    entries: np.ndarray  # (C, C) float64
    tails: list[str]
    m: int
    k: int
    seed: int
    symmetrized: bool = False

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def build_similarity(
    pool: SampledPool, neighbor_lists: np.ndarray, k: int
) -> SimilarityMatrix:
    """Count neighbor hits per (query class, neighbor class) and normalize
    row i by M_i * k, so every row sums to 1 regardless of class sizes."""
    n = len(pool)
    if neighbor_lists.shape != (n, k):
        raise ConfigError(
            f"neighbor lists shape {neighbor_lists.shape} does not match "
            f"pool size {n} and k={k}"
        )
    c = pool.class_count
    counts = np.zeros((c, c), dtype=np.int64)
    query_class = np.repeat(pool.class_of, k)
    neighbor_class = pool.class_of[neighbor_lists].ravel()
    np.add.at(counts, (query_class, neighbor_class), 1)
    norm = np.array(pool.per_class_counts, dtype=np.float64) * float(k)
    entries = counts / norm[:, None]
    return SimilarityMatrix(
        entries=entries,
        tails=list(pool.tails),
        m=pool.m,
        k=k,
        seed=pool.seed,
        symmetrized=False,
    )
