"""Tolerance policy for the floating backend.

All zero tests share one scheme: a value is treated as zero when it falls
inside a band whose width scales with the size of the data, and values close
to the band edge are flagged as marginal instead of silently classified.
The exact backend never consults these numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    # relative half-width of the zero band for eigenvalues and evaluations
    null_band: float = 1e-9
    # relative residual threshold for accepting a dual solve
    residual: float = 1e-8
    # relative pivot cutoff for rank decisions (QR with column pivoting)
    rank: float = 1e-10
    # relative asymmetry allowed before input is rejected
    symmetry: float = 1e-12
    # values within this factor of a decision edge are marginal
    marginal_factor: float = 10.0

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT = Tolerances()


def spectral_scale(eigenvalues: np.ndarray) -> float:
    """max(1, spectral radius) from an array of eigenvalues."""
    if eigenvalues.size == 0:
        return 1.0
    return max(1.0, float(np.max(np.abs(eigenvalues))))


def zero_band(eigenvalues: np.ndarray, tol: Tolerances) -> float:
    """Half-width of the zero band for this spectrum."""
    return tol.null_band * spectral_scale(eigenvalues)


def classify_spectrum(eigenvalues: np.ndarray, tol: Tolerances) -> tuple[int, int, int, bool]:
    """Counts (negative, zero, positive) plus a marginal flag.

    An eigenvalue is marginal when its distance to the nearest band edge
    (+tau or -tau) is at most marginal_factor * tau; every eigenvalue inside
    the band is therefore marginal as well, since a true zero cannot be told
    apart from a small nonzero at working precision.
    """
    w = np.asarray(eigenvalues, dtype=float)
    tau = zero_band(w, tol)
    neg = int(np.sum(w < -tau))
    zero = int(np.sum(np.abs(w) <= tau))
    pos = int(w.size) - neg - zero
    marginal = bool(np.any(np.abs(np.abs(w) - tau) <= tol.marginal_factor * tau))
    return neg, zero, pos, marginal
