"""Degree matrix, normalized graph Laplacian, eigenspectrum and the CSG value.

The default pipeline symmetrizes the similarity matrix first: a raw
neighbor-count matrix is row-stochastic but not symmetric, and only the
symmetric normalized Laplacian is guaranteed a real spectrum inside
[0, 2]. An escape hatch computes the general (possibly complex)
eigenvalues of I - S directly and records how far they stray from the
real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .similarity import SimilarityMatrix

TELESCOPE_TOL = 1e-12


@dataclass
class Laplacian:
    entries: np.ndarray  # (C, C) float64
    symmetric: bool

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass
class Spectrum:
    """Eigenvalues sorted ascending; ``max_imag`` is 0 on the symmetric path."""

    eigenvalues: np.ndarray
    max_imag: float = 0.0

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass
class CsgReport:
    """CSG values plus the parameters that produced them (provenance)."""

    csg_full: float
    csg_at: list[tuple[int, float]] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)


def symmetrize(s: SimilarityMatrix) -> SimilarityMatrix:
    """W = (S + S^T) / 2."""
    a = s.entries
    if a.shape[0] != a.shape[1]:
        raise ConfigError(f"similarity matrix must be square, got {a.shape}")
    return SimilarityMatrix(
        entries=(a + a.T) / 2.0,
        tails=list(s.tails),
        m=s.m,
        k=s.k,
        seed=s.seed,
        symmetrized=True,
    )


def degree_matrix(w: SimilarityMatrix) -> np.ndarray:
    """Row sums of W. A zero degree means an isolated class, which leaves
    the normalized Laplacian undefined."""
    entries = w.entries
    if np.any(entries < 0):
        raise ConfigError("similarity entries must be nonnegative")
    degrees = entries.sum(axis=1)
    zero = np.flatnonzero(degrees == 0.0)
    if zero.size:
        tail = w.tails[zero[0]] if w.tails else str(zero[0])
        raise NumericError(f"isolated class '{tail}' has zero degree")
    return degrees


def normalized_laplacian(w: SimilarityMatrix) -> Laplacian:
    """L_ij = delta_ij - W_ij / sqrt(D_ii * D_jj), exactly symmetric by
    construction (one triangle is computed and mirrored)."""
    if not w.symmetrized:
        raise ConfigError("normalized_laplacian requires a symmetrized matrix")
    degrees = degree_matrix(w)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    scaled = w.entries * inv_sqrt[:, None] * inv_sqrt[None, :]
    upper = np.triu(np.eye(w.order) - scaled)
    return Laplacian(entries=upper + np.triu(upper, 1).T, symmetric=True)


def eigenvalues_symmetric(lap: Laplacian) -> Spectrum:
    """All eigenvalues of a symmetric Laplacian, ascending."""
    if not lap.symmetric:
        raise ConfigError("eigenvalues_symmetric requires a symmetric Laplacian")
    try:
        vals = np.linalg.eigvalsh(lap.entries)
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"eigensolver failed on order-{lap.order} Laplacian: {e}"
        ) from None
    return Spectrum(eigenvalues=np.sort(vals), max_imag=0.0)


def eigenvalues_general(s: SimilarityMatrix) -> Spectrum:
    """Eigenvalues of I - S without symmetrization; returns the real parts
    sorted ascending and records the largest imaginary magnitude."""
    a = np.eye(s.order) - s.entries
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"general eigensolver failed on order {s.order}: {e}") from None
    return Spectrum(
        eigenvalues=np.sort(vals.real),
        max_imag=float(np.abs(vals.imag).max(initial=0.0)),
    )


def csg(spectrum: Spectrum, k_c: int | None = None) -> CsgReport:
    """Cumulative spectral gradient: the sum of consecutive eigenvalue gaps
    up to a cutoff, which telescopes to lambda_{k_c} - lambda_0.

    Both forms are computed and must agree within ``TELESCOPE_TOL``; the
    closed form is returned. The full value uses k_c = C - 1.
    """
    vals = np.asarray(spectrum.eigenvalues, dtype=np.float64)
    c = vals.shape[0]
    if c < 2:
        raise ConfigError(f"CSG needs at least 2 eigenvalues, got {c}")
    if np.any(np.diff(vals) < 0):
        raise ConfigError("spectrum must be sorted ascending")

    def both_forms(cut: int) -> float:
        gap_sum = math.fsum(float(vals[i + 1] - vals[i]) for i in range(cut))
        closed = float(vals[cut] - vals[0])
        if abs(gap_sum - closed) > TELESCOPE_TOL:
            raise NumericError(
                f"gap sum {gap_sum!r} and closed form {closed!r} disagree "
                f"beyond {TELESCOPE_TOL} at cutoff {cut}"
            )
        return closed

    report = CsgReport(csg_full=both_forms(c - 1), parameters={"c": c})
    if k_c is not None:
        if not 1 <= k_c <= c - 1:
            raise ConfigError(f"k_c must be in [1, {c - 1}], got {k_c}")
        report.csg_at = [(k_c, both_forms(k_c))]
    return report
