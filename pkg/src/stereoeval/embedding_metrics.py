"""Frechet distance between Gaussian fits of embedding sets.

This is the engine behind both the audio-quality score (real audio
embeddings vs generated audio embeddings) and the cross-modal alignment
score (video embeddings vs audio embeddings): both are the same closed-form
distance over different embedding pairs. Embeddings are produced offline by
external encoders and enter as EMB1 files (see load_embeddings).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_EMB1_MAGIC = b"EMB1"

SYMMETRY_TOL = 1e-4


class EmbeddingFormatError(Exception):
    """Bad magic, truncated payload, or inconsistent EMB1 header."""


@dataclass(frozen=True)
class EmbeddingSet:
    """N x D matrix of embeddings from one modality or source."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("embedding data must be a 2-D matrix")
        if not np.isfinite(data).all():
            raise ValueError("embedding data contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray


def fit_gaussian(emb: EmbeddingSet) -> GaussianStats:
    """Sample mean and unbiased (N-1) covariance, explicitly symmetrized."""
    if emb.n < 2:
        raise ValueError(f"need at least 2 embeddings to fit covariance, got {emb.n}")
    mean = emb.data.mean(axis=0)
    centered = emb.data - mean
    cov = centered.T @ centered / (emb.n - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, cov=cov)


def _regularize_psd(m: np.ndarray) -> np.ndarray:
    # nudge onto the PSD cone only when sampling noise pushed an eigenvalue
    # below zero; epsilon scales with the matrix itself
    eigvals = np.linalg.eigvalsh(m)
    if eigvals[0] >= 0:
        return m
    d = m.shape[0]
    eps = 1e-6 * np.trace(m) / d
    return m + eps * np.eye(d)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Negative eigenvalues (round-off) are clamped to zero. Raises ValueError
    if the input is asymmetric beyond tolerance.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("input must be a square matrix")
    asym = np.abs(m - m.T).max() if m.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix asymmetry {asym:.3g} exceeds {SYMMETRY_TOL}")
    sym = (m + m.T) / 2.0
    w, v = np.linalg.eigh(sym)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """Closed-form Frechet distance between two Gaussians.

    ||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^{1/2}), with the trace
    term computed through the congruent symmetric product
    sqrt(C_a) C_b sqrt(C_a) for numerical robustness. Tiny negative results
    from round-off are clamped to 0.
    """
    if a.mean.shape != b.mean.shape:
        raise ValueError(
            f"dimension mismatch: {a.mean.shape[0]} vs {b.mean.shape[0]}"
        )
    cov_a = _regularize_psd(a.cov)
    cov_b = _regularize_psd(b.cov)
    diff = a.mean - b.mean
    sqrt_a = sqrtm_psd(cov_a)
    cross = sqrtm_psd(sqrt_a @ cov_b @ sqrt_a)
    dist = diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross)
    return max(float(dist), 0.0)


def load_embeddings(path) -> EmbeddingSet:
    """Load an EMB1 file: magic "EMB1", u32 LE N, u32 LE D, N*D f32 LE row-major."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 12 or raw[:4] != _EMB1_MAGIC:
        raise EmbeddingFormatError(f"{path}: not an EMB1 file")
    n, d = struct.unpack_from("<II", raw, 4)
    if n < 1 or d < 1:
        raise EmbeddingFormatError(f"{path}: invalid shape {n}x{d}")
    expected = 12 + 4 * n * d
    if len(raw) < expected:
        raise EmbeddingFormatError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    data = np.frombuffer(raw, dtype="<f4", count=n * d, offset=12)
    return EmbeddingSet(data=data.reshape(n, d).astype(np.float64))


def save_embeddings(emb: EmbeddingSet, path) -> None:
    with open(path, "wb") as f:
        f.write(_EMB1_MAGIC)
        f.write(struct.pack("<II", emb.n, emb.d))
        f.write(emb.data.astype("<f4").tobytes())
