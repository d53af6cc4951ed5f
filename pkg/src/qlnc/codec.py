"""Encoder and decoder acting on one classical branch (bit or phase basis).

Column blocks of an ``m x n'`` codeword are written A | B | C with widths
``m``, ``m`` and ``n' - 2m``.  All matrices here live over the extension
field ``F_q'``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import ConfigInvalid, DecodingFailure, DimensionMismatch, InfeasibleConfig
from .gf import GF, FieldCtx
from .jsonio import encode_entry, mat_to_json
from .linalg import Mat, RowMask, hstack, sample_full_rank, sample_invertible, solve_projected, vstack
from .network import phase_dual


@dataclass(frozen=True)
class CodeConfig:
    m: int
    a: int
    a_phase: int
    n: int
    alpha: int = 1
    pair_index: int = 1

    def __post_init__(self):
        if self.m < 1 or self.a < 0 or self.a_phase < 0:
            raise ConfigInvalid("need m >= 1 and a, a' >= 0")
        if self.a + self.a_phase >= self.m:
            raise InfeasibleConfig(f"a + a' = {self.a + self.a_phase} is not below m = {self.m}")
        if self.alpha < 1 or self.n % self.alpha:
            raise ConfigInvalid(f"alpha = {self.alpha} does not divide n = {self.n}")
        if self.n_prime <= 2 * self.m:
            raise ConfigInvalid(f"n' = {self.n_prime} must exceed 2m = {2 * self.m}")

    @classmethod
    def from_nprime(cls, m: int, a: int, a_phase: int, n_prime: int, alpha: int = 1, pair_index: int = 1) -> CodeConfig:
        return cls(m, a, a_phase, n_prime * alpha, alpha, pair_index)

    @property
    def n_prime(self) -> int:
        return self.n // self.alpha

    @property
    def width_c(self) -> int:
        return self.n_prime - 2 * self.m

    @property
    def rate(self) -> int:
        return self.m - self.a - self.a_phase

    @property
    def message_shape(self) -> tuple[int, int]:
        return self.rate, self.width_c


def shared_randomness_size(cfg: CodeConfig, level: str = "base") -> int:
    """Number of field elements in ``SR = (R1, R2, V)``.

    ``level="extension"`` counts F_q' elements, ``"base"`` counts F_q elements.
    """
    k = cfg.m * (2 * cfg.m - cfg.a - cfg.a_phase + 4)
    if level == "extension":
        return k
    if level == "base":
        return cfg.alpha * k
    raise ValueError(f"unknown level {level!r}")


@dataclass(frozen=True)
class CodeRandomness:
    field: GF
    R1: Mat
    R2: Mat
    V: tuple[int, ...]
    U1: Mat

    def check(self, cfg: CodeConfig) -> None:
        m = cfg.m
        if self.R1.shape != (m - cfg.a, m) or self.R2.shape != (m - cfg.a_phase, m):
            raise DimensionMismatch("R1/R2 shapes do not match cfg")
        if len(self.V) != 4 * m or self.U1.shape != (m, m):
            raise DimensionMismatch("V must have 4m entries and U1 be m x m")


def sample_randomness(F: GF, cfg: CodeConfig, rng: random.Random) -> CodeRandomness:
    m = cfg.m
    R1 = sample_full_rank(F, m - cfg.a, m, rng)
    R2 = sample_full_rank(F, m - cfg.a_phase, m, rng)
    V = tuple(F.random(rng) for _ in range(4 * m))
    U1 = sample_invertible(F, m, rng)
    return CodeRandomness(F, R1, R2, V, U1)


def serialize_sr(ctx: FieldCtx, rand: CodeRandomness) -> list[int]:
    """``SR = (R1, R2, V)`` flattened to F_q elements, row-major then V."""
    ext = [x for r in rand.R1.rows for x in r] + [x for r in rand.R2.rows for x in r] + list(rand.V)
    return ctx.flatten(ext)


@dataclass(frozen=True)
class BitBranch:
    M: Mat
    E1: Mat
    E2: Mat

    def check(self, cfg: CodeConfig) -> None:
        if self.M.shape != cfg.message_shape or self.E1.shape != (cfg.m, cfg.m) \
                or self.E2.shape != (cfg.a_phase, cfg.width_c):
            raise DimensionMismatch("bit branch shapes do not match cfg")


@dataclass(frozen=True)
class PhaseBranch:
    Mp: Mat
    E1p: Mat
    E2p: Mat

    def check(self, cfg: CodeConfig) -> None:
        if self.Mp.shape != cfg.message_shape or self.E1p.shape != (cfg.m, cfg.m) \
                or self.E2p.shape != (cfg.a, cfg.width_c):
            raise DimensionMismatch("phase branch shapes do not match cfg")


def sample_bit_branch(F: GF, cfg: CodeConfig, rng: random.Random) -> BitBranch:
    r, c = cfg.message_shape
    return BitBranch(Mat.random(F, r, c, rng), Mat.random(F, cfg.m, cfg.m, rng), Mat.random(F, cfg.a_phase, c, rng))


def sample_phase_branch(F: GF, cfg: CodeConfig, rng: random.Random) -> PhaseBranch:
    r, c = cfg.message_shape
    return PhaseBranch(Mat.random(F, r, c, rng), Mat.random(F, cfg.m, cfg.m, rng), Mat.random(F, cfg.a, c, rng))


@dataclass(frozen=True)
class DecodeOutcome:
    status: str
    M_hat: Mat | None = None
    E2_hat: Mat | None = None
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# -- U2 ------------------------------------------------------------------------

def _check_v(V: Sequence[int], cfg: CodeConfig) -> None:
    if len(V) != 4 * cfg.m:
        raise ConfigInvalid(f"V has {len(V)} entries, expected {4 * cfg.m}")


def _power_matrix(F: GF, values: Sequence[int], rows: int) -> Mat:
    """Entry (j, k) is ``values[k] ** (j + 1)``."""
    out = []
    cur = list(values)
    for _ in range(rows):
        out.append(cur)
        cur = [F.mul(x, v) for x, v in zip(cur, values)]
    return Mat(F, out, len(values))


def q_blocks(F: GF, V: Sequence[int], cfg: CodeConfig) -> tuple[Mat, Mat, Mat, Mat]:
    """The Vandermonde-like blocks Q1, Q2 ((n'-2m) x m) and Q3, Q4 (m x m)."""
    _check_v(V, cfg)
    m, w = cfg.m, cfg.width_c
    return (
        _power_matrix(F, V[0:m], w),
        _power_matrix(F, V[m:2 * m], w),
        _power_matrix(F, V[2 * m:3 * m], m),
        _power_matrix(F, V[3 * m:4 * m], m),
    )


def _col_ranges(cfg: CodeConfig) -> dict[str, tuple[int, int]]:
    m = cfg.m
    return {"A": (0, m), "B": (m, 2 * m), "C": (2 * m, cfg.n_prime)}


# An elementary factor I + E where E holds block ``M`` at (row block src,
# column block tgt); right-multiplying by it adds ``X^src @ M`` to ``X^tgt``.
Factor = tuple[str, str, Mat]


def u2_factors(F: GF, V: Sequence[int], cfg: CodeConfig) -> list[Factor]:
    return list(_u2_factors(F, tuple(V), cfg))


@lru_cache(maxsize=16)
def _u2_factors(F: GF, V: tuple[int, ...], cfg: CodeConfig) -> tuple[Factor, ...]:
    Q1, Q2, Q3, Q4 = q_blocks(F, V, cfg)
    return ("A", "B", Q3.T @ Q4), ("C", "B", Q2.T), ("A", "C", Q1)


def invert_factors(fs: list[Factor]) -> list[Factor]:
    return [(t, s, -M) for t, s, M in reversed(fs)]


def transpose_factors(fs: list[Factor]) -> list[Factor]:
    return [(s, t, M.T) for t, s, M in reversed(fs)]


def _factor_matrix(F: GF, cfg: CodeConfig, f: Factor) -> Mat:
    t, s, M = f
    rng = _col_ranges(cfg)
    (r0, _), (c0, _) = rng[s], rng[t]
    rows = [[int(i == j) for j in range(cfg.n_prime)] for i in range(cfg.n_prime)]
    for i, row in enumerate(M.rows):
        for j, x in enumerate(row):
            rows[r0 + i][c0 + j] = x
    return Mat(F, rows, cfg.n_prime)


def apply_factors(X: Mat, fs: list[Factor], cfg: CodeConfig) -> Mat:
    """``X @ F_1 @ F_2 ...`` in O(m^2 n') without forming the n' x n' product."""
    if X.ncols != cfg.n_prime:
        raise DimensionMismatch(f"expected {cfg.n_prime} columns, got {X.ncols}")
    F = X.field
    add, mul = F.add, F.mul
    rng = _col_ranges(cfg)
    rows = [list(r) for r in X.rows]
    for t, s, M in fs:
        s0, s1 = rng[s]
        t0 = rng[t][0]
        mrows = M.rows
        for row in rows:
            src = row[s0:s1]
            for k, x in enumerate(src):
                if x:
                    for j, y in enumerate(mrows[k]):
                        if y:
                            row[t0 + j] = add(row[t0 + j], mul(x, y))
    return Mat(F, rows, X.ncols)


def build_U2(F: GF, V: Sequence[int], cfg: CodeConfig) -> Mat:
    """Dense ``U2 = F1 F2 F3``."""
    f1, f2, f3 = (_factor_matrix(F, cfg, f) for f in u2_factors(F, V, cfg))
    return f1 @ f2 @ f3


def build_U2_inv(F: GF, V: Sequence[int], cfg: CodeConfig) -> Mat:
    """Closed-form inverse: the negated factors in reverse order."""
    g3, g2, g1 = (_factor_matrix(F, cfg, f) for f in invert_factors(u2_factors(F, V, cfg)))
    return g3 @ g2 @ g1


def u2_inv_a_block(F: GF, V: Sequence[int], cfg: CodeConfig) -> Mat:
    """Columns A of ``U2^{-1}``, equal to ``[I; -Q3^T Q4; -Q1]``."""
    Q1, _, Q3, Q4 = q_blocks(F, V, cfg)
    return vstack(Mat.identity(F, cfg.m), -(Q3.T @ Q4), -Q1)


# -- encode / decode -----------------------------------------------------------

def encode_bit(branch: BitBranch, rand: CodeRandomness, cfg: CodeConfig) -> Mat:
    branch.check(cfg)
    rand.check(cfg)
    F = rand.field
    m, a, w = cfg.m, cfg.a, cfg.width_c
    S = hstack(
        vstack(Mat.zeros(F, a, m), rand.R1),
        branch.E1,
        vstack(Mat.zeros(F, a, w), branch.M, branch.E2),
    )
    return apply_factors(rand.U1 @ S, u2_factors(F, rand.V, cfg), cfg)


def encode_phase(branch: PhaseBranch, rand: CodeRandomness, cfg: CodeConfig) -> Mat:
    branch.check(cfg)
    rand.check(cfg)
    F = rand.field
    m, ap, w = cfg.m, cfg.a_phase, cfg.width_c
    S = hstack(
        branch.E1p,
        vstack(rand.R2, Mat.zeros(F, ap, m)),
        vstack(branch.E2p, branch.Mp, Mat.zeros(F, ap, w)),
    )
    # right factor (U2^T)^-1 = (U2^-1)^T
    fs = transpose_factors(invert_factors(u2_factors(F, rand.V, cfg)))
    return apply_factors(phase_dual(rand.U1) @ S, fs, cfg)


def _finish(D: Mat, Ybar: Mat, cfg: CodeConfig, msg_rows: tuple[int, int], extra_rows: tuple[int, int]) -> DecodeOutcome:
    C = D @ Ybar[:, 2 * cfg.m:]
    return DecodeOutcome("ok", C[msg_rows[0]:msg_rows[1], :], C[extra_rows[0]:extra_rows[1], :])


def decode_bit(Y: Mat, R1: Mat, V: Sequence[int], cfg: CodeConfig) -> DecodeOutcome:
    F = Y.field
    m, a, ap = cfg.m, cfg.a, cfg.a_phase
    Ybar = apply_factors(Y, invert_factors(u2_factors(F, V, cfg)), cfg)
    O = Ybar[:, 0:m]
    target = vstack(Mat.zeros(F, a, m), R1)
    try:
        D = solve_projected(O, target, RowMask.of(range(a)))
    except DecodingFailure as exc:
        return DecodeOutcome("failed", failure=type(exc).__name__)
    return _finish(D, Ybar, cfg, (a, m - ap), (m - ap, m))


def decode_phase(Yp: Mat, R2: Mat, V: Sequence[int], cfg: CodeConfig) -> DecodeOutcome:
    F = Yp.field
    m, a, ap = cfg.m, cfg.a, cfg.a_phase
    # inverse of (U2^-1)^T is U2^T
    Ybar = apply_factors(Yp, transpose_factors(u2_factors(F, V, cfg)), cfg)
    O = Ybar[:, m:2 * m]
    target = vstack(R2, Mat.zeros(F, ap, m))
    try:
        D = solve_projected(O, target, RowMask.of(range(m - ap, m)))
    except DecodingFailure as exc:
        return DecodeOutcome("failed", failure=type(exc).__name__)
    return _finish(D, Ybar, cfg, (a, m - ap), (0, a))


def css_membership(X: Mat, space: str, cfg: CodeConfig) -> bool:
    """Membership of a C-block matrix in C1, C2 or C2perp."""
    if X.shape != (cfg.m, cfg.width_c):
        raise DimensionMismatch(f"expected {(cfg.m, cfg.width_c)}, got {X.shape}")
    m, a, ap = cfg.m, cfg.a, cfg.a_phase
    if space == "C1":
        zero = range(a)
    elif space == "C2":
        zero = range(m - ap, m)
    elif space == "C2perp":
        zero = range(m - ap)
    else:
        raise ValueError(f"unknown space {space!r}")
    return not any(any(X.rows[i]) for i in zero)


def dump_test_vector(seed: int, ctx: FieldCtx, cfg: CodeConfig, rand: CodeRandomness,
                branch: BitBranch, X: Mat, outcome: DecodeOutcome) -> dict:
    """Deterministic JSON-ready record of one bit-side encode/decode."""
    return {
        "seed": seed,
        "field": ctx.to_json(),
        "cfg": {"m": cfg.m, "a": cfg.a, "a_phase": cfg.a_phase, "n": cfg.n, "alpha": cfg.alpha},
        "randomness": {
            "R1": mat_to_json(rand.R1),
            "R2": mat_to_json(rand.R2),
            "V": [encode_entry(rand.field, v) for v in rand.V],
            "U1": mat_to_json(rand.U1),
            "sr_flat": serialize_sr(ctx, rand),
        },
        "branch": {"M": mat_to_json(branch.M), "E1": mat_to_json(branch.E1), "E2": mat_to_json(branch.E2)},
        "codeword": mat_to_json(X),
        "outcome": {
            "status": outcome.status,
            "failure": outcome.failure,
            "M_hat": mat_to_json(outcome.M_hat) if outcome.M_hat is not None else None,
        },
    }

