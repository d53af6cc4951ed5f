"""Exact state-vector checks of linear network operations at toy sizes.

A state on an ``m x n`` grid of q-level systems is a complex vector indexed by
bit-basis labels X in F_q^{m x n}, flattened row-major and ordered
lexicographically (the first entry is the most significant digit).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, DimensionMismatch, Singular
from .gf import FieldCtx
from .linalg import Mat
from .network import NetworkSpec, compose_transfer, embed, phase_dual

DEFAULT_CAP = 1 << 16
TOL = 1e-9


def amplitude_cap() -> int:
    return int(os.environ.get("QLNC_CAP", DEFAULT_CAP))


def gl_order(k: int, q: int) -> int:
    out = 1
    for i in range(k):
        out *= q ** k - q ** i
    return out


class Grid:
    """Label tables for F_q^{m x n}: digits of every label plus field op tables."""

    def __init__(self, ctx: FieldCtx, m: int, n: int, cap: int | None = None):
        cap = amplitude_cap() if cap is None else cap
        q = ctx.q
        if q ** (m * n) > cap:
            raise CapExceeded(f"{q}^{m * n} amplitudes exceed cap {cap}")
        self.ctx, self.m, self.n, self.q = ctx, m, n, q
        self.size = q ** (m * n)
        F = ctx.base
        self.add = np.array([[F.add(x, y) for y in range(q)] for x in range(q)], dtype=np.int64)
        self.mul = np.array([[F.mul(x, y) for y in range(q)] for x in range(q)], dtype=np.int64)
        self.trmul = np.array([[ctx.trace(F.mul(x, y)) for y in range(q)] for x in range(q)], dtype=np.int64)
        idx = np.arange(self.size)
        digits = np.empty((self.size, m * n), dtype=np.int64)
        for k in range(m * n - 1, -1, -1):
            digits[:, k] = idx % q
            idx //= q
        self.labels = digits.reshape(self.size, m, n)
        self.weights = q ** np.arange(m * n - 1, -1, -1, dtype=np.int64)

    def index(self, labels: np.ndarray) -> np.ndarray:
        return labels.reshape(len(labels), -1) @ self.weights

    def index_of(self, X: Mat) -> int:
        return int(np.array(X.rows, dtype=np.int64).reshape(-1) @ self.weights)

    def left(self, A: Mat) -> np.ndarray:
        """Labels ``A X`` for every label X."""
        L, out = self.labels, np.zeros_like(self.labels)
        for i in range(A.nrows):
            for j in range(A.ncols):
                out[:, i, :] = self.add[out[:, i, :], self.mul[A.rows[i][j], L[:, j, :]]]
        return out

    def right(self, B: Mat) -> np.ndarray:
        """Labels ``X B`` for every label X."""
        L, out = self.labels, np.zeros_like(self.labels)
        for j in range(B.nrows):
            for k in range(B.ncols):
                out[:, :, k] = self.add[out[:, :, k], self.mul[L[:, :, j], B.rows[j][k]]]
        return out


@dataclass
class StateVec:
    grid: Grid
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def basis_state(grid: Grid, X: Mat) -> StateVec:
    amps = np.zeros(grid.size, dtype=complex)
    amps[grid.index_of(X)] = 1.0
    return StateVec(grid, amps)


def phase_basis_state(grid: Grid, Z: Mat) -> StateVec:
    """Amplitude of ``|X>_b`` is ``q^{-mn/2} w^{-sum tr(X_jk Z_jk)}`` with ``w = exp(2 pi i / p)``."""
    if Z.shape != (grid.m, grid.n):
        raise DimensionMismatch(f"label must be {grid.m}x{grid.n}")
    p = grid.ctx.p
    expo = np.zeros(grid.size, dtype=np.int64)
    for j in range(grid.m):
        for k in range(grid.n):
            expo += grid.trmul[grid.labels[:, j, k], Z.rows[j][k]]
    amps = np.exp(-2j * np.pi * (expo % p) / p) / np.sqrt(grid.size)
    return StateVec(grid, amps)


def apply_linear(side: str, M: Mat, s: StateVec) -> StateVec:
    """``L_A |X> = |AX>`` (side ``"left"``) or ``R_B |X> = |XB>`` (side ``"right"``)."""
    if not M.is_invertible():
        raise Singular("quantum linear operations need an invertible matrix", M.rank())
    g = s.grid
    if side == "left":
        if M.shape != (g.m, g.m):
            raise DimensionMismatch("left operand must be m x m")
        target = g.index(g.left(M))
    elif side == "right":
        if M.shape != (g.n, g.n):
            raise DimensionMismatch("right operand must be n x n")
        target = g.index(g.right(M))
    else:
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    out = np.zeros_like(s.amps)
    out[target] = s.amps
    return StateVec(g, out)


def states_equal(s: StateVec, t: StateVec, tol: float = TOL) -> bool:
    """Equality after aligning the phase of the first nonzero amplitude of ``s``."""
    nz = np.flatnonzero(np.abs(s.amps) > tol)
    if not len(nz):
        return bool(np.all(np.abs(t.amps) <= tol))
    i = nz[0]
    if abs(t.amps[i]) <= tol:
        return False
    rot = (s.amps[i] / abs(s.amps[i])) / (t.amps[i] / abs(t.amps[i]))
    return bool(np.allclose(s.amps, t.amps * rot, atol=tol, rtol=0))


def all_matrices(ctx: FieldCtx, rows: int, cols: int):
    F = ctx.base
    for flat in itertools.product(range(F.order), repeat=rows * cols):
        yield Mat(F, [flat[r * cols:(r + 1) * cols] for r in range(rows)], cols)


def invertible_matrices(ctx: FieldCtx, k: int):
    return (A for A in all_matrices(ctx, k, k) if A.is_invertible())


@dataclass
class OracleResult:
    passed: bool
    checked: int
    counterexample: dict | None = None


def verify_lemma1(ctx: FieldCtx, m: int, n: int, cap: int | None = None) -> OracleResult:
    """Check ``L_A|M>_p = |(A^T)^{-1} M>_p`` and ``R_B|M>_p = |M (B^T)^{-1}>_p`` for all A, B, M."""
    cap = amplitude_cap() if cap is None else cap
    q = ctx.q
    work = q ** (m * n) * (gl_order(m, q) + gl_order(n, q))
    if work > cap:
        raise CapExceeded(f"phase-rule check needs {work} state comparisons, cap is {cap}")
    grid = Grid(ctx, m, n, cap)
    labels = list(all_matrices(ctx, m, n))
    phase = {lab: phase_basis_state(grid, lab) for lab in labels}
    checked = 0
    for side, k in (("left", m), ("right", n)):
        for A in invertible_matrices(ctx, k):
            Ad = phase_dual(A)
            for lab in labels:
                got = apply_linear(side, A, phase[lab])
                want = phase[Ad @ lab if side == "left" else lab @ Ad]
                checked += 1
                if not states_equal(got, want):
                    return OracleResult(False, checked, {"side": side, "matrix": A.tolist(), "label": lab.tolist()})
    return OracleResult(True, checked)


def verify_shadow(spec: NetworkSpec, n: int, cap: int | None = None) -> OracleResult:
    """Node-by-node simulation agrees with the classical shadows K and K~ on every basis label."""
    ctx, m = spec.field, spec.m
    grid = Grid(ctx, m, n, cap)
    tp = compose_transfer(spec)
    ops = [embed(node, m) for node in spec.nodes]
    checked = 0
    for lab in all_matrices(ctx, m, n):
        for basis, prep, T in (("bit", basis_state, tp.K), ("phase", phase_basis_state, tp.K_phase)):
            s = prep(grid, lab)
            for A in ops:
                s = apply_linear("left", A, s)
            checked += 1
            if not states_equal(s, prep(grid, T @ lab)):
                return OracleResult(False, checked, {"basis": basis, "label": lab.tolist()})
    return OracleResult(True, checked)
