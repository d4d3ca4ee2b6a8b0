"""Block (multi-sensor) ROM and its block-bidiagonal factorization.

The block Cholesky factor of the mass matrix is unique only up to an
orthogonal rotation of each diagonal block. ``block_cholesky`` exposes that
freedom through ``q_policy``; the ROM itself is built with identity rotations,
and :func:`consistent_factor` later selects the rotations that make the
block-bidiagonal factor of ``(2/tau^2)(I - P~)`` carry symmetric positive
coefficients ``gamma_j``, ``gamma_hat_j``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import gram, linalg
from .errors import NonContractive, NotPositiveDefinite, ShapeMismatch, ValidationError
from .forward import DataSet
from .linalg import BlockMatrix
from .siso import chebyshev_moments

log = logging.getLogger(__name__)

Q_POLICIES = ("identity", "triangular")


@dataclass(frozen=True)
class MimoRom:
    tau: float
    p_tilde: BlockMatrix
    d0_sqrt: np.ndarray
    off_band: float = 0.0

    @property
    def n(self) -> int:
        return self.p_tilde.n

    @property
    def m(self) -> int:
        return self.p_tilde.m

    @property
    def b_tilde(self) -> np.ndarray:
        """``E_1 D_0^{1/2}``: an ``nm x m`` block column, zero below the first block."""
        b = np.zeros((self.n * self.m, self.m))
        b[: self.m] = self.d0_sqrt
        return b

    def xi(self) -> BlockMatrix:
        return BlockMatrix((2.0 / self.tau**2) * (np.eye(self.n * self.m) - self.p_tilde.data), self.m)


@dataclass(frozen=True)
class MimoFactor:
    l_tilde: BlockMatrix
    gammas: list
    gamma_hats: list
    q_blocks: list
    p_tilde_q: BlockMatrix
    tau: float
    d0: np.ndarray

    @property
    def n(self) -> int:
        return self.l_tilde.n

    @property
    def m(self) -> int:
        return self.l_tilde.m

    def q_matrix(self) -> np.ndarray:
        return scipy.linalg.block_diag(*self.q_blocks)


def block_cholesky(x: BlockMatrix, q_policy: str = "identity") -> BlockMatrix:
    """Block upper-triangular ``R`` with ``x = R^T R``.

    ``q_policy='identity'`` uses the symmetric square root for each diagonal
    block; ``'triangular'`` uses the scalar upper Cholesky factor instead (an
    orthogonal rotation of the symmetric root), which reproduces the
    ordinary Cholesky factor entrywise.
    """
    if q_policy not in Q_POLICIES:
        raise ValidationError(f"unknown q_policy {q_policy!r}; expected one of {Q_POLICIES}")
    if not isinstance(x, BlockMatrix):
        raise ShapeMismatch("block_cholesky expects a BlockMatrix")
    linalg.symmetrize(x.data)
    n, m = x.n, x.m
    r = BlockMatrix.zeros(n, m)
    for k in range(n):
        s = x.block(k, k).copy()
        for i in range(k):
            rik = r.block(i, k)
            s -= rik.T @ rik
        s = 0.5 * (s + s.T)
        try:
            rkk = linalg.spd_sqrt(s, tol=1e-8) if q_policy == "identity" else linalg.cholesky_upper(s, tol=1e-8)
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(f"block {k}: {exc}", index=k) from exc
        r.set_block(k, k, rkk)
        if k + 1 == n:
            break
        # all blocks right of the diagonal at once
        rest = x.data[k * m:(k + 1) * m, (k + 1) * m:].copy()
        for i in range(k):
            rest -= r.block(i, k).T @ r.data[i * m:(i + 1) * m, (k + 1) * m:]
        r.data[k * m:(k + 1) * m, (k + 1) * m:] = np.linalg.solve(rkk.T, rest)
    return r


def _project(r: BlockMatrix, stiff: BlockMatrix) -> np.ndarray:
    # R is only block-triangular (full diagonal blocks), so use a general LU solve
    lu = scipy.linalg.lu_factor(r.data.T)
    tmp = scipy.linalg.lu_solve(lu, stiff.data)
    p = scipy.linalg.lu_solve(lu, tmp.T).T
    return 0.5 * (p + p.T)


def build_rom(data: DataSet, n: int | None = None, check_contraction: bool = True,
              q_policy: str = "identity") -> MimoRom:
    data.check_symmetric(1e-8)
    d0 = data.frames[0]
    pair = gram.gram_from_data(data, n)
    r = block_cholesky(pair.mass, q_policy)
    p = BlockMatrix(_project(r, pair.stiff), data.m)
    scale = np.max(np.abs(p.data)) or 1.0
    defect = p.band_mass(1) / scale
    log.debug("MIMO ROM off-band magnitude %.3e", defect)
    p.zero_outside_band(1)
    if check_contraction:
        norm = np.max(np.abs(np.linalg.eigvalsh(p.data)))
        if norm >= 1.0:
            raise NonContractive(f"ROM propagator has spectral norm {norm:.6f} >= 1")
    return MimoRom(data.tau, p, linalg.spd_sqrt(d0, tol=1e-8), float(defect))


def rom_data(rom: MimoRom, two_n: int) -> DataSet:
    frames = chebyshev_moments(rom.p_tilde.data, rom.b_tilde, two_n)
    return DataSet(0.5 * (frames + frames.transpose(0, 2, 1)), rom.tau)


def factor_from_gammas(gammas, gamma_hats) -> BlockMatrix:
    """Block-bidiagonal factor with diagonal ``-gh_j^{-1/2} g_j^{-1/2}`` and subdiagonal ``gh_{j+1}^{-1/2} g_j^{-1/2}``."""
    n, m = len(gammas), gammas[0].shape[0]
    L = BlockMatrix.zeros(n, m)
    g_is = [linalg.spd_inv_sqrt(g) for g in gammas]
    gh_is = [linalg.spd_inv_sqrt(g) for g in gamma_hats]
    for j in range(n):
        L.set_block(j, j, -gh_is[j] @ g_is[j])
        if j + 1 < n:
            L.set_block(j + 1, j, gh_is[j + 1] @ g_is[j])
    return L


def consistent_factor(rom: MimoRom) -> MimoFactor:
    """Rotations ``Q_j`` and SPD coefficients making ``Q xi(P~) Q^T = L L^T`` with ``L`` in gamma form.

    ``alpha_j`` are the diagonal blocks of ``xi(P~)`` and ``beta_{j+1}`` the
    negated block ``(j, j+1)``. The seed ``gamma_hat_1 = D_0^{-1}`` and
    ``Q_1 = I`` fix the remaining freedom.
    """
    n, m = rom.n, rom.m
    xi = rom.xi()
    d0 = rom.d0_sqrt @ rom.d0_sqrt
    d0 = 0.5 * (d0 + d0.T)
    gh = [linalg.spd_inv(d0)]
    qs = [np.eye(m)]
    gh_sqrt = linalg.spd_sqrt(gh[0])
    try:
        g = [linalg.spd_inv(gh_sqrt @ xi.block(0, 0) @ gh_sqrt, tol=1e-8)]
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"gamma_1 is not SPD: {exc}", index=0) from exc
    for i in range(n - 1):
        beta = -xi.block(i, i + 1)
        M = g[i] @ gh_sqrt @ qs[i] @ beta
        s, q_next = linalg.polar_left(M)
        gh_next = linalg.spd_inv(s @ s)
        gh_sqrt = linalg.spd_sqrt(gh_next)
        alpha = q_next @ xi.block(i + 1, i + 1) @ q_next.T
        inner = gh_sqrt @ alpha @ gh_sqrt - linalg.spd_inv(g[i])
        inner = 0.5 * (inner + inner.T)
        try:
            g_next = linalg.spd_inv(inner, tol=1e-8)
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(f"gamma_{i + 2} is not SPD: {exc}", index=i + 1) from exc
        gh.append(gh_next)
        qs.append(q_next)
        g.append(g_next)
    l_tilde = factor_from_gammas(g, gh)
    Q = scipy.linalg.block_diag(*qs)
    pq = Q @ rom.p_tilde.data @ Q.T
    return MimoFactor(l_tilde, g, gh, qs, BlockMatrix(0.5 * (pq + pq.T), m), rom.tau, d0)


def factor_residual(rom: MimoRom, factor: MimoFactor) -> float:
    """``||Q xi Q^T - L L^T|| / ||xi||`` in the Frobenius norm."""
    xi = rom.xi().data
    Q = factor.q_matrix()
    L = factor.l_tilde.data
    return float(np.linalg.norm(Q @ xi @ Q.T - L @ L.T) / np.linalg.norm(xi))


def factor_from_data(data: DataSet, n: int | None = None) -> MimoFactor:
    return consistent_factor(build_rom(data, n))
