"""End-to-end CSG runs and (M, k) sweep grids.

Every numeric output is a pure function of (dataset bytes, embedding bytes
or hash seed, M, k, seed, flags); wall-clock fields are the only
nondeterministic part of a report.
"""

from __future__ import annotations

import hashlib
import struct
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from . import embeddings as emb
from . import similarity as sim
from . import spectral
from . import triples as tri
from .errors import ConfigError, KgcsgError

_CELL_SEED_TAG = b"kgcsg.sweep_cell.v1"


@dataclass
class RunConfig:
    """Everything a single CSG computation depends on."""

    triples: list[str | Path]
    embeddings_path: str | Path | None = None
    hash_dim: int | None = None
    hash_seed: int = 0
    m: int = 120
    k: int = 50
    k_c: int | None = None
    seed: int = 0
    normalize_embeddings: bool = False
    include_self: bool = False
    symmetrize: bool = True
    min_pairs: int = 1
    max_classes: int | None = None
    dataset_name: str | None = None

    def validate(self) -> None:
        if not self.triples:
            raise ConfigError("at least one triples file is required")
        if (self.embeddings_path is None) == (self.hash_dim is None):
            raise ConfigError(
                "exactly one embedding source is required: "
                "an embeddings file or a hash dimension"
            )
        if self.hash_dim is not None and self.hash_dim < 1:
            raise ConfigError(f"hash dim must be >= 1, got {self.hash_dim}")
        if self.m < 1:
            raise ConfigError(f"M must be >= 1, got {self.m}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.min_pairs < 1:
            raise ConfigError(f"min-pairs must be >= 1, got {self.min_pairs}")
        if self.max_classes is not None and self.max_classes < 1:
            raise ConfigError(f"max-classes must be >= 1, got {self.max_classes}")

    @property
    def name(self) -> str:
        if self.dataset_name:
            return self.dataset_name
        return derive_dataset_name(self.triples)


def derive_dataset_name(paths: list[str | Path]) -> str:
    """Dataset label: the common parent directory when several split files
    share one, else the first file's stem."""
    ps = [Path(p) for p in paths]
    parents = {p.resolve().parent for p in ps}
    if len(ps) > 1 and len(parents) == 1:
        parent = ps[0].resolve().parent.name
        if parent:
            return parent
    return ps[0].stem


@contextmanager
def _stage(name: str):
    try:
        yield
    except KgcsgError as e:
        raise type(e)(f"{name}: {e}") from None


@dataclass
class _PreparedDataset:
    """Parsed triples, class index and composite vectors, shared by sweep cells."""

    stats: tri.DatasetStats
    class_vectors: emb.ClassVectors
    store_dim: int

    def pool_size(self, m: int) -> int:
        return sum(min(m, arr.shape[0]) for _, arr in self.class_vectors.classes)


def _prepare(config: RunConfig) -> _PreparedDataset:
    with _stage("parse"):
        ts = tri.parse_triple_files(config.triples)
        stats = tri.dataset_stats(ts)
    with _stage("group"):
        ci = tri.group_by_tail(ts)
        if config.min_pairs > 1 or config.max_classes is not None:
            ci = tri.filter_classes(ci, config.min_pairs, config.max_classes)
    with _stage("embed"):
        if config.embeddings_path is not None:
            store = emb.load_embeddings(config.embeddings_path)
        else:
            store = emb.hash_embed(ci.tokens(), config.hash_dim, config.hash_seed)
        if config.normalize_embeddings:
            store = emb.normalize_store(store)
    with _stage("materialize"):
        class_vectors = emb.materialize_class_vectors(store, ci)
    return _PreparedDataset(stats=stats, class_vectors=class_vectors, store_dim=store.dim)


def _check_pool(config: RunConfig, pool_size: int) -> None:
    limit = pool_size if config.include_self else pool_size - 1
    if config.k > limit:
        raise ConfigError(
            f"k={config.k} exceeds pool size {pool_size}"
            + ("" if config.include_self else " with self excluded")
        )


def _run_prepared(
    config: RunConfig,
    prepared: _PreparedDataset,
    dump_similarity: str | Path | None = None,
    dump_spectrum: str | Path | None = None,
) -> spectral.CsgReport:
    t0 = time.perf_counter()
    pool_size = prepared.pool_size(config.m)
    _check_pool(config, pool_size)
    with _stage("sample"):
        pool = sim.sample_pool(prepared.class_vectors, config.m, config.seed)
    with _stage("knn"):
        neighbors = sim.knn_exact(pool, config.k, include_self=config.include_self)
    with _stage("similarity"):
        s = sim.build_similarity(pool, neighbors, config.k)
    if dump_similarity is not None:
        from .reports import write_similarity_csv

        write_similarity_csv(s, dump_similarity)
    with _stage("spectrum"):
        if config.symmetrize:
            w = spectral.symmetrize(s)
            lap = spectral.normalized_laplacian(w)
            spectrum = spectral.eigenvalues_symmetric(lap)
        else:
            spectrum = spectral.eigenvalues_general(s)
    if dump_spectrum is not None:
        from .reports import write_spectrum

        write_spectrum(spectrum, dump_spectrum)
    with _stage("csg"):
        report = spectral.csg(spectrum, config.k_c)
    wall_ms = (time.perf_counter() - t0) * 1000.0

    params = {
        "dataset": config.name,
        "triples": [str(p) for p in config.triples],
        "entity_count": prepared.stats.entity_count,
        "relation_count": prepared.stats.relation_count,
        "triple_count": prepared.stats.triple_count,
        "class_count": prepared.stats.class_count,
        "classes_used": len(prepared.class_vectors),
        "embedding_source": (
            str(config.embeddings_path)
            if config.embeddings_path is not None
            else "hash"
        ),
        "embedding_dim": prepared.store_dim,
        "hash_seed": config.hash_seed if config.embeddings_path is None else None,
        "m": config.m,
        "k": config.k,
        "k_c": config.k_c,
        "seed": config.seed,
        "normalize_embeddings": config.normalize_embeddings,
        "include_self": config.include_self,
        "symmetrize": config.symmetrize,
        "min_pairs": config.min_pairs,
        "max_classes": config.max_classes,
        "pool_size": pool_size,
        "max_imag": spectrum.max_imag,
        "wall_ms": wall_ms,
    }
    params.update(report.parameters)  # keeps "c" from the csg step
    report.parameters = params
    return report


def run_csg(
    config: RunConfig,
    dump_similarity: str | Path | None = None,
    dump_spectrum: str | Path | None = None,
) -> spectral.CsgReport:
    """Run the whole pipeline: parse -> group -> embed -> sample -> knn ->
    similarity -> Laplacian -> spectrum -> CSG. The report carries every
    parameter and the dataset statistics."""
    config.validate()
    prepared = _prepare(config)
    return _run_prepared(config, prepared, dump_similarity, dump_spectrum)


def derive_cell_seed(seed: int, m: int, k: int) -> int:
    """Deterministic per-cell sampling seed so sweep cells are individually
    reproducible by a standalone run with the same derived seed."""
    digest = hashlib.blake2b(
        struct.pack("<Qqq", seed & 0xFFFFFFFFFFFFFFFF, m, k),
        key=_CELL_SEED_TAG,
        digest_size=8,
    ).digest()
    return struct.unpack("<Q", digest)[0]


@dataclass
class SweepCell:
    m: int
    k: int
    csg: float | None
    pool_size: int
    wall_ms: float
    status: str  # "ok" or the reason the cell was skipped


@dataclass
class SweepGrid:
    m_values: list[int]
    k_values: list[int]
    cells: list[SweepCell]
    parameters: dict = field(default_factory=dict)


def run_sweep(
    config: RunConfig, m_values: list[int], k_values: list[int]
) -> SweepGrid:
    """One CSG run per (M, k) cell over a shared parsed dataset and store.

    Each cell re-seeds sampling from (seed, M, k), so cells are independent
    of sweep order and individually reproducible. A cell whose k exceeds
    its realized pool size becomes an error cell instead of aborting.
    """
    config.validate()
    if not m_values or not k_values:
        raise ConfigError("sweep needs at least one M and one k value")
    if any(m < 1 for m in m_values) or any(k < 1 for k in k_values):
        raise ConfigError("sweep M and k values must be >= 1")
    m_values = sorted(set(m_values))
    k_values = sorted(set(k_values))

    prepared = _prepare(config)
    cells = []
    for m in m_values:
        for k in k_values:
            cell_config = RunConfig(
                triples=config.triples,
                embeddings_path=config.embeddings_path,
                hash_dim=config.hash_dim,
                hash_seed=config.hash_seed,
                m=m,
                k=k,
                k_c=config.k_c,
                seed=derive_cell_seed(config.seed, m, k),
                normalize_embeddings=config.normalize_embeddings,
                include_self=config.include_self,
                symmetrize=config.symmetrize,
                min_pairs=config.min_pairs,
                max_classes=config.max_classes,
                dataset_name=config.name,
            )
            pool_size = prepared.pool_size(m)
            t0 = time.perf_counter()
            try:
                _check_pool(cell_config, pool_size)
            except ConfigError:
                cells.append(
                    SweepCell(
                        m=m,
                        k=k,
                        csg=None,
                        pool_size=pool_size,
                        wall_ms=(time.perf_counter() - t0) * 1000.0,
                        status=f"k exceeds pool size {pool_size}",
                    )
                )
                continue
            report = _run_prepared(cell_config, prepared)
            cells.append(
                SweepCell(
                    m=m,
                    k=k,
                    csg=report.csg_full,
                    pool_size=pool_size,
                    wall_ms=report.parameters["wall_ms"],
                    status="ok",
                )
            )

    params = {
        "dataset": config.name,
        "triples": [str(p) for p in config.triples],
        "entity_count": prepared.stats.entity_count,
        "relation_count": prepared.stats.relation_count,
        "triple_count": prepared.stats.triple_count,
        "class_count": prepared.stats.class_count,
        "classes_used": len(prepared.class_vectors),
        "embedding_source": (
            str(config.embeddings_path)
            if config.embeddings_path is not None
            else "hash"
        ),
        "embedding_dim": prepared.store_dim,
        "hash_seed": config.hash_seed if config.embeddings_path is None else None,
        "seed": config.seed,
        "normalize_embeddings": config.normalize_embeddings,
        "include_self": config.include_self,
        "symmetrize": config.symmetrize,
        "min_pairs": config.min_pairs,
        "max_classes": config.max_classes,
    }
    return SweepGrid(
        m_values=m_values, k_values=k_values, cells=cells, parameters=params
    )
