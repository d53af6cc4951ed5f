"""Dense matrices over a :class:`~qlnc.gf.GF` with exact Gaussian elimination."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CannotComplete, DimensionMismatch, Inconsistent, Singular
from .gf import GF


class Mat:
    """Immutable ``nrows x ncols`` matrix with int-encoded entries over ``field``.

    Zero-sized shapes are allowed so that empty interference blocks
    (``a = 0``) slice and stack without special cases.
    """

    __slots__ = ("field", "rows", "nrows", "ncols")

    def __init__(self, field: GF, rows: Iterable[Sequence[int]], ncols: int | None = None):
        rows = tuple(tuple(r) for r in rows)
        if ncols is None:
            if not rows:
                raise DimensionMismatch("ncols is required for a matrix with no rows")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionMismatch("ragged rows")
        self.field = field
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    # -- constructors ------------------------------------------------------
    @classmethod
    def zeros(cls, field: GF, nrows: int, ncols: int) -> Mat:
        return cls(field, [[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, field: GF, n: int) -> Mat:
        return cls(field, [[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_ints(cls, field: GF, rows: Sequence[Sequence[int]], ncols: int | None = None) -> Mat:
        """Build from small signed ints, reduced into the prime subfield."""
        p = field.p
        return cls(field, [[x % p for x in r] for r in rows], ncols)

    @classmethod
    def random(cls, field: GF, nrows: int, ncols: int, rng: random.Random) -> Mat:
        n = field.order
        return cls(field, [[rng.randrange(n) for _ in range(ncols)] for _ in range(nrows)], ncols)

    # -- basics ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows and self.field == other.field

    def __hash__(self) -> int:
        return hash((self.shape, self.rows))

    def __repr__(self) -> str:
        return f"Mat({self.nrows}x{self.ncols}, {[list(r) for r in self.rows]})"

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def cast(self, field: GF) -> Mat:
        """Reinterpret entries in a field whose encoding contains this one."""
        if any(x >= field.order for r in self.rows for x in r):
            raise ValueError("entries do not fit the target field")
        return Mat(field, self.rows, self.ncols)

    def __getitem__(self, key):
        if isinstance(key, tuple):
            rs, cs = key
            rs = rs if isinstance(rs, slice) else slice(rs, rs + 1)
            cs = cs if isinstance(cs, slice) else slice(cs, cs + 1)
            cols = range(self.ncols)[cs]
            return Mat(self.field, [r[cs] for r in self.rows[rs]], len(cols))
        return self.rows[key]

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def block(self, r0: int, r1: int, c0: int, c1: int) -> Mat:
        return self[r0:r1, c0:c1]

    @property
    def T(self) -> Mat:
        rows = list(zip(*self.rows)) if self.nrows else [()] * self.ncols
        return Mat(self.field, rows, self.nrows)

    def _check_same(self, other: Mat) -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")
        if self.field != other.field:
            raise DimensionMismatch("matrices over different fields")

    def __add__(self, other: Mat) -> Mat:
        self._check_same(other)
        add = self.field.add
        return Mat(self.field, [[add(x, y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: Mat) -> Mat:
        self._check_same(other)
        sub = self.field.sub
        return Mat(self.field, [[sub(x, y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self) -> Mat:
        neg = self.field.neg
        return Mat(self.field, [[neg(x) for x in r] for r in self.rows], self.ncols)

    def scale(self, c: int) -> Mat:
        mul = self.field.mul
        return Mat(self.field, [[mul(c, x) for x in r] for r in self.rows], self.ncols)

    def __matmul__(self, other: Mat) -> Mat:
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.field != other.field:
            raise DimensionMismatch("matrices over different fields")
        F = self.field
        add, mul = F.add, F.mul
        orows = other.rows
        nc = other.ncols
        out = []
        for r in self.rows:
            acc = [0] * nc
            for k, x in enumerate(r):
                if x:
                    ok = orows[k]
                    for j in range(nc):
                        y = ok[j]
                        if y:
                            acc[j] = add(acc[j], mul(x, y))
            out.append(acc)
        return Mat(F, out, nc)

    def apply(self, v: Sequence[int]) -> list[int]:
        """Matrix-vector product ``self @ v``."""
        add, mul = self.field.add, self.field.mul
        out = []
        for r in self.rows:
            s = 0
            for x, y in zip(r, v):
                if x and y:
                    s = add(s, mul(x, y))
            out.append(s)
        return out

    # -- elimination -------------------------------------------------------
    def rref(self) -> tuple[list[list[int]], list[int]]:
        """Reduced row echelon form and pivot columns (pivot = first nonzero)."""
        F = self.field
        add, mul, neg, inv = F.add, F.mul, F.neg, F.inv
        a = [list(r) for r in self.rows]
        pivots: list[int] = []
        row = 0
        for col in range(self.ncols):
            piv = next((i for i in range(row, self.nrows) if a[i][col]), None)
            if piv is None:
                continue
            a[row], a[piv] = a[piv], a[row]
            pr = a[row]
            c = inv(pr[col])
            if c != 1:
                pr = a[row] = [mul(c, x) if x else 0 for x in pr]
            for i in range(self.nrows):
                if i != row:
                    f = a[i][col]
                    if f:
                        nf = neg(f)
                        ri = a[i]
                        for j in range(col, self.ncols):
                            if pr[j]:
                                ri[j] = add(ri[j], mul(nf, pr[j]))
            pivots.append(col)
            row += 1
            if row == self.nrows:
                break
        return a, pivots

    def rank(self) -> int:
        F = self.field
        add, mul, neg, inv = F.add, F.mul, F.neg, F.inv
        a = [list(r) for r in self.rows if any(r)]
        rank = 0
        nrows = len(a)
        for col in range(self.ncols):
            piv = next((i for i in range(rank, nrows) if a[i][col]), None)
            if piv is None:
                continue
            a[rank], a[piv] = a[piv], a[rank]
            pr = a[rank]
            c = neg(inv(pr[col]))
            for i in range(rank + 1, nrows):
                f = a[i][col]
                if f:
                    f = mul(f, c)
                    ri = a[i]
                    for j in range(col, self.ncols):
                        if pr[j]:
                            ri[j] = add(ri[j], mul(f, pr[j]))
            rank += 1
            if rank == nrows:
                break
        return rank

    def inv(self) -> Mat:
        if self.nrows != self.ncols:
            raise DimensionMismatch("only square matrices are invertible")
        n = self.nrows
        aug = hstack(self, Mat.identity(self.field, n))
        red, piv = aug.rref()
        if piv[:n] != list(range(n)):
            raise Singular(f"matrix of size {n} is singular (rank {self.rank()})", self.rank())
        return Mat(self.field, [r[n:] for r in red], n)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def kernel_basis(self) -> Mat:
        """Columns spanning the right kernel ``{x : self @ x = 0}``."""
        F = self.field
        red, piv = self.rref()
        free = [c for c in range(self.ncols) if c not in set(piv)]
        basis = []
        for fc in free:
            v = [0] * self.ncols
            v[fc] = 1
            for r, pc in enumerate(piv):
                v[pc] = F.neg(red[r][fc])
            basis.append(v)
        return Mat(F, basis, self.ncols).T if basis else Mat(F, [[] for _ in range(self.ncols)], 0)


def hstack(*mats: Mat) -> Mat:
    if not mats:
        raise DimensionMismatch("nothing to stack")
    n = mats[0].nrows
    if any(m.nrows != n for m in mats):
        raise DimensionMismatch("hstack needs equal row counts")
    ncols = sum(m.ncols for m in mats)
    rows = [sum((m.rows[i] for m in mats), ()) for i in range(n)]
    return Mat(mats[0].field, rows, ncols)


def vstack(*mats: Mat) -> Mat:
    if not mats:
        raise DimensionMismatch("nothing to stack")
    c = mats[0].ncols
    if any(m.ncols != c for m in mats):
        raise DimensionMismatch("vstack needs equal column counts")
    return Mat(mats[0].field, [r for m in mats for r in m.rows], c)


def rank(a: Mat) -> int:
    return a.rank()


def mat_inv(a: Mat) -> Mat:
    return a.inv()


def kernel_basis(a: Mat) -> Mat:
    return a.kernel_basis()


def draw_full_rank(field: GF, nrows: int, ncols: int, rng: random.Random) -> tuple[Mat, int]:
    """Uniform full-row-rank matrix by rejection; also returns the number of draws."""
    if nrows > ncols:
        raise DimensionMismatch(f"full row rank impossible for {nrows}x{ncols}")
    tries = 0
    while True:
        tries += 1
        m = Mat.random(field, nrows, ncols, rng)
        if m.rank() == nrows:
            return m, tries


def sample_full_rank(field: GF, nrows: int, ncols: int, rng: random.Random) -> Mat:
    return draw_full_rank(field, nrows, ncols, rng)[0]


def sample_invertible(field: GF, n: int, rng: random.Random) -> Mat:
    return draw_full_rank(field, n, n, rng)[0]


@dataclass(frozen=True)
class RowMask:
    """Projection that zeroes the listed rows (their complement is the kept subspace)."""

    zeroed_rows: frozenset[int]

    @classmethod
    def of(cls, rows: Iterable[int]) -> RowMask:
        return cls(frozenset(rows))

    def check(self, nrows: int) -> None:
        if any(not 0 <= i < nrows for i in self.zeroed_rows):
            raise DimensionMismatch(f"mask {sorted(self.zeroed_rows)} outside {nrows} rows")

    def apply(self, m: Mat) -> Mat:
        self.check(m.nrows)
        zero = (0,) * m.ncols
        return Mat(m.field, [zero if i in self.zeroed_rows else r for i, r in enumerate(m.rows)], m.ncols)


def solve_projected(O: Mat, target: Mat, mask: RowMask) -> Mat:
    """Find invertible D with ``mask.apply(D @ O) == mask.apply(target)``.

    Each kept row d of D solves ``d @ O = target_row``; we take the reduced
    echelon solution with free variables zero.  Masked rows are then filled,
    in increasing row order, with the first standard basis vectors that
    raise the rank.  Raises Inconsistent when a kept row has no solution and
    CannotComplete when the kept rows are linearly dependent.
    """
    m = O.nrows
    if O.shape != (m, m) or target.shape != (m, m):
        raise DimensionMismatch(f"O {O.shape} and target {target.shape} must be square and equal")
    mask.check(m)
    F = O.field
    kept = [i for i in range(m) if i not in mask.zeroed_rows]
    if any(any(target.rows[i]) for i in mask.zeroed_rows):
        raise DimensionMismatch("target must vanish on masked rows")

    # d @ O = t  <=>  O^T d^T = t^T; solve every kept row in one augmented system
    rhs = Mat(F, [[target.rows[i][c] for i in kept] for c in range(m)], len(kept))
    red, piv = hstack(O.T, rhs).rref()
    piv_left = [c for c in piv if c < m]
    for r in range(len(piv_left), m):
        if any(red[r][m:]):
            raise Inconsistent("projected system has no solution")
    D = [[0] * m for _ in range(m)]
    for k, i in enumerate(kept):
        for r, c in enumerate(piv_left):
            D[i][c] = red[r][m + k]

    chosen = [D[i] for i in kept]
    if Mat(F, chosen, m).rank() < len(kept):
        raise CannotComplete("solution rows are linearly dependent")
    masked = sorted(mask.zeroed_rows)
    cur_rank = len(kept)
    e = 0
    for i in masked:
        while e < m:
            cand = [int(j == e) for j in range(m)]
            e += 1
            if Mat(F, chosen + [cand], m).rank() > cur_rank:
                chosen.append(cand)
                D[i] = cand
                cur_rank += 1
                break
        else:
            raise CannotComplete("no invertible completion")  # pragma: no cover
    return Mat(F, D, m)
