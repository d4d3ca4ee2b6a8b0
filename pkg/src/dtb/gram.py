"""Mass (``P^T P``) and stiffness (``P^T P P``) matrices assembled from data frames.

Both follow from the Chebyshev product rule ``T_j T_k = (T_{j+k} + T_{|j-k|})/2``
and need only the measured frames, never the snapshots themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientFrames, ValidationError
from .forward import DataSet
from .linalg import BlockMatrix


@dataclass
class GramPair:
    mass: BlockMatrix
    stiff: BlockMatrix

    @property
    def n(self) -> int:
        return self.mass.n

    @property
    def m(self) -> int:
        return self.mass.m


def _resolve_n(data: DataSet, n: int | None, extra: int) -> int:
    if n is None:
        n = data.two_n // 2
    if n < 1:
        raise ValidationError("ROM order n must be at least 1")
    needed = 2 * n - 1 + extra
    if data.two_n < needed:
        raise InsufficientFrames(f"n={n} needs {needed} frames, data has {data.two_n}")
    return n


def mass_from_data(data: DataSet, n: int | None = None) -> BlockMatrix:
    """Block ``(i, j)`` (1-based) equals ``(D_{i+j-2} + D_{|i-j|}) / 2``."""
    n = _resolve_n(data, n, 0)
    D, m = data.frames, data.m
    out = BlockMatrix.zeros(n, m)
    for i in range(n):
        for j in range(n):
            # 0-based i, j: D_{i+j} and D_{|i-j|}
            out.set_block(i, j, 0.5 * (D[i + j] + D[abs(i - j)]))
    return out


def stiff_from_data(data: DataSet, n: int | None = None) -> BlockMatrix:
    """Block ``(i, j)`` (1-based) equals ``(D_{i+j-1} + D_{|j-i+1|} + D_{|j-i-1|} + D_{|j+i-3|}) / 4``."""
    n = _resolve_n(data, n, 1)
    D, m = data.frames, data.m
    out = BlockMatrix.zeros(n, m)
    for i in range(n):
        for j in range(n):
            # 0-based shift: i+j-1 -> i+j+1, |j+i-3| -> |i+j-1|
            # the middle pair is summed in a fixed order so (i, j) and (j, i) round identically
            near, far = sorted((abs(j - i + 1), abs(j - i - 1)))
            out.set_block(i, j, 0.25 * (D[i + j + 1] + D[near] + D[far] + D[abs(i + j - 1)]))
    return out


def gram_from_data(data: DataSet, n: int | None = None) -> GramPair:
    return GramPair(mass_from_data(data, n), stiff_from_data(data, n))


def gram_from_snapshots(snapshots: np.ndarray, propagator_snapshots: np.ndarray) -> GramPair:
    """Brute-force Gram pair from explicit snapshots.

    ``snapshots[k]`` is ``P_k`` (``N x m``) and ``propagator_snapshots[k]`` is
    ``P P_k``; used only as an independent check of the data formulas.
    """
    n, N, m = snapshots.shape
    big = snapshots.transpose(1, 0, 2).reshape(N, n * m)
    pbig = propagator_snapshots.transpose(1, 0, 2).reshape(N, n * m)
    return GramPair(BlockMatrix(big.T @ big, m), BlockMatrix(big.T @ pbig, m))
