"""Dense symmetric / SPD kernels used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Block matrices
(``nm x nm`` with ``m x m`` blocks) are wrapped in :class:`BlockMatrix`, which
only adds block addressing on top of the backing array. Block indices are
0-based in code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DomainError, NonSymmetric, NotPositiveDefinite, ShapeMismatch, Singular

SYMMETRY_TOL = 1e-12


@dataclass
class BlockMatrix:
    """An ``nm x nm`` matrix addressed by ``m x m`` blocks."""

    data: np.ndarray
    m: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        rows, cols = self.data.shape
        if rows != cols or rows % self.m:
            raise ShapeMismatch(f"{self.data.shape} is not a square matrix of {self.m}x{self.m} blocks")

    @property
    def n(self) -> int:
        return self.data.shape[0] // self.m

    @classmethod
    def zeros(cls, n: int, m: int) -> "BlockMatrix":
        return cls(np.zeros((n * m, n * m)), m)

    def block(self, i: int, j: int) -> np.ndarray:
        m = self.m
        return self.data[i * m:(i + 1) * m, j * m:(j + 1) * m]

    def set_block(self, i: int, j: int, value) -> None:
        m = self.m
        self.data[i * m:(i + 1) * m, j * m:(j + 1) * m] = value

    @property
    def T(self) -> "BlockMatrix":
        return BlockMatrix(self.data.T.copy(), self.m)

    def band_mass(self, bandwidth: int = 1) -> float:
        """Largest |entry| among blocks farther than ``bandwidth`` from the block diagonal."""
        worst = 0.0
        for i in range(self.n):
            for j in range(self.n):
                if abs(i - j) > bandwidth:
                    worst = max(worst, float(np.max(np.abs(self.block(i, j)))))
        return worst

    def zero_outside_band(self, bandwidth: int = 1) -> None:
        for i in range(self.n):
            for j in range(self.n):
                if abs(i - j) > bandwidth:
                    self.set_block(i, j, 0.0)


def symmetrize(x, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return ``(x + x.T)/2`` after checking ``x`` is symmetric to ``tol`` (relative, inf-norm)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("matrix has non-finite entries")
    scale = np.max(np.abs(x)) if x.size else 0.0
    asym = np.max(np.abs(x - x.T)) if x.size else 0.0
    if asym > tol * max(scale, np.finfo(float).tiny):
        raise NonSymmetric(f"asymmetry {asym:.3e} exceeds {tol:.1e} relative to {scale:.3e}")
    return 0.5 * (x + x.T)


def cholesky_upper(x, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Upper triangular ``R`` with positive diagonal and ``x = R.T @ R``.

    Raises NotPositiveDefinite with the (0-based) failing pivot in ``.index``.
    """
    x = symmetrize(x, tol)
    r, info = lapack.dpotrf(x, lower=0, clean=1)
    if info > 0:
        raise NotPositiveDefinite(f"non-positive pivot at row {info - 1}", index=info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return r


def sym_eig(x, tol: float = SYMMETRY_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    x = symmetrize(x, tol)
    return np.linalg.eigh(x)


def apply_spectral_fn(x, f, v=None, *, eig=None, tol: float = SYMMETRY_TOL):
    """Evaluate ``Y f(Lambda) Y^T v`` for symmetric ``x = Y Lambda Y^T``.

    ``v`` defaults to the identity (returns the matrix function itself).
    A precomputed ``eig = (lam, Y)`` skips the decomposition.
    """
    lam, y = sym_eig(x, tol) if eig is None else eig
    with np.errstate(all="ignore"):
        flam = np.asarray(f(lam), dtype=float)
    if flam.shape != lam.shape:
        flam = np.broadcast_to(flam, lam.shape)
    if not np.all(np.isfinite(flam)):
        raise DomainError("function is not finite on the spectrum")
    if v is None:
        return (y * flam) @ y.T
    v = np.asarray(v, dtype=float)
    coef = y.T @ v
    if v.ndim == 1:
        return y @ (flam * coef)
    return y @ (flam[:, None] * coef)


def spd_sqrt(x, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Principal square root of an SPD matrix."""
    lam, y = sym_eig(x, tol)
    if lam.size and lam[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.3e} is not positive")
    s = (y * np.sqrt(lam)) @ y.T
    return 0.5 * (s + s.T)


def spd_inv_sqrt(x, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Inverse of the principal square root of an SPD matrix."""
    lam, y = sym_eig(x, tol)
    if lam.size and lam[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.3e} is not positive")
    s = (y / np.sqrt(lam)) @ y.T
    return 0.5 * (s + s.T)


def spd_inv(x, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Inverse of an SPD matrix, symmetrized."""
    r = cholesky_upper(x, tol)
    rinv = scipy.linalg.solve_triangular(r, np.eye(len(r)), lower=False)
    out = rinv @ rinv.T
    return 0.5 * (out + out.T)


def polar_left(mat, floor: float = 1e-10):
    """Left polar decomposition ``mat = S @ Q`` with ``S = (mat mat^T)^{1/2}`` SPD, ``Q`` orthogonal.

    Raises Singular when the smallest singular value is below ``floor * ||mat||_2``.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {mat.shape}")
    u, s, vt = np.linalg.svd(mat)
    if s[-1] <= floor * s[0] or s[0] == 0.0:
        raise Singular(f"smallest singular value {s[-1]:.3e} below floor (largest {s[0]:.3e})")
    spd = (u * s) @ u.T
    return 0.5 * (spd + spd.T), u @ vt
