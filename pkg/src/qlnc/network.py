"""Multiple-unicast networks of invertible linear nodes and their transfer matrices.

Nodes act in transmission order on ``m = sum(pair_sizes)`` parallel wires.
Sender ``S_i`` feeds, and receiver ``T_i`` reads, the ``i``-th contiguous
block of wires.  Pair indices are 1-based throughout the public API.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import IndexOutOfRange, InvalidBlocks, ParseError, SingularNode
from .gf import FieldCtx
from .jsonio import mat_from_json, mat_to_json
from .linalg import Mat, hstack


@dataclass(frozen=True)
class NodeOp:
    wires: tuple[int, ...]
    matrix: Mat

    def __post_init__(self):
        if len(set(self.wires)) != len(self.wires):
            raise ParseError(f"node wires {self.wires} are not distinct")
        k = len(self.wires)
        if self.matrix.shape != (k, k):
            raise ParseError(f"node on {k} wires needs a {k}x{k} matrix, got {self.matrix.shape}")


@dataclass(frozen=True)
class NetworkSpec:
    field: FieldCtx
    pair_sizes: tuple[int, ...]
    nodes: tuple[NodeOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pair_sizes", tuple(self.pair_sizes))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.pair_sizes or any(s < 1 for s in self.pair_sizes):
            raise ParseError("every pair needs at least one wire")
        for node in self.nodes:
            if any(not 0 <= w < self.m for w in node.wires):
                raise ParseError(f"node wires {node.wires} outside 0..{self.m - 1}")
            if node.matrix.field != self.field.base:
                raise ParseError("node matrices must be over the base field")

    @property
    def m(self) -> int:
        return sum(self.pair_sizes)

    @property
    def r(self) -> int:
        return len(self.pair_sizes)


def pair_offsets(pair_sizes: Sequence[int]) -> list[int]:
    out = [0]
    for s in pair_sizes:
        out.append(out[-1] + s)
    return out


def phase_dual(A: Mat) -> Mat:
    """``(A^T)^{-1}``, the action of ``L_A`` on phase-basis labels."""
    return A.T.inv()


def embed(node: NodeOp, m: int) -> Mat:
    """The node matrix acting on its wires, identity elsewhere."""
    F = node.matrix.field
    rows = [[int(i == j) for j in range(m)] for i in range(m)]
    for a, wa in enumerate(node.wires):
        for b, wb in enumerate(node.wires):
            rows[wa][wb] = node.matrix.rows[a][b]
    return Mat(F, rows, m)


@dataclass(frozen=True)
class TransferPair:
    K: Mat
    K_phase: Mat
    pair_sizes: tuple[int, ...]

    def _mat(self, basis: str) -> Mat:
        if basis == "bit":
            return self.K
        if basis == "phase":
            return self.K_phase
        raise ValueError(f"basis must be 'bit' or 'phase', not {basis!r}")

    def _range(self, i: int) -> range:
        r = len(self.pair_sizes)
        if not 1 <= i <= r:
            raise IndexOutOfRange(f"pair index {i} outside 1..{r}")
        off = pair_offsets(self.pair_sizes)
        return range(off[i - 1], off[i])

    def block(self, i: int, j: int, basis: str = "bit") -> Mat:
        """Block ``K_{i,j}`` (rows of receiver i, columns of sender j)."""
        ri, rj = self._range(i), self._range(j)
        return self._mat(basis).block(ri.start, ri.stop, rj.start, rj.stop)

    def complement(self, i: int, basis: str = "bit") -> Mat:
        """``K_{i^c}``: row block i with column block i removed."""
        ri = self._range(i)
        K = self._mat(basis)
        parts = [self.block(i, j, basis) for j in range(1, len(self.pair_sizes) + 1) if j != i]
        if not parts:
            return Mat.zeros(K.field, len(ri), 0)
        return hstack(*parts)


def compose_transfer(spec: NetworkSpec) -> TransferPair:
    """``K = A_c ... A_1`` and ``K~ = (K^T)^{-1}``, the latter computed two ways."""
    F = spec.field.base
    m = spec.m
    K = Mat.identity(F, m)
    Kp = Mat.identity(F, m)
    for idx, node in enumerate(spec.nodes):
        if not node.matrix.is_invertible():
            raise SingularNode(f"node {idx} on wires {node.wires} is not invertible")
        A = embed(node, m)
        K = A @ K
        Kp = phase_dual(A) @ Kp
    if phase_dual(K) != Kp:  # pragma: no cover - algebraic identity
        raise AssertionError("node-wise phase transfer disagrees with (K^T)^-1")
    return TransferPair(K, Kp, spec.pair_sizes)


def block(tp: TransferPair, i: int, j: int, basis: str = "bit") -> Mat:
    return tp.block(i, j, basis)


def complement_block(tp: TransferPair, i: int, basis: str = "bit") -> Mat:
    return tp.complement(i, basis)


@dataclass(frozen=True)
class PairRates:
    pair: int
    m: int
    rank_direct: int
    rank_direct_phase: int
    rank_interference: int
    rank_interference_phase: int

    @property
    def ok(self) -> bool:
        """Both direct blocks have full rank ``m_i``."""
        return self.rank_direct == self.m and self.rank_direct_phase == self.m

    def as_row(self) -> list[int]:
        return [self.m, self.rank_direct, self.rank_direct_phase,
                self.rank_interference, self.rank_interference_phase]


def rate_table(tp: TransferPair) -> list[PairRates]:
    return [
        PairRates(
            pair=i,
            m=mi,
            rank_direct=tp.block(i, i).rank(),
            rank_direct_phase=tp.block(i, i, "phase").rank(),
            rank_interference=tp.complement(i).rank(),
            rank_interference_phase=tp.complement(i, "phase").rank(),
        )
        for i, mi in enumerate(tp.pair_sizes, start=1)
    ]


def feasible(rates: PairRates, a: int, a_phase: int) -> bool:
    """Rate condition ``a + a' < m``; warns when a bound undercuts the measured rank."""
    if a < rates.rank_interference:
        warnings.warn(
            f"pair {rates.pair}: a = {a} below bit interference rank {rates.rank_interference}",
            stacklevel=2,
        )
    if a_phase < rates.rank_interference_phase:
        warnings.warn(
            f"pair {rates.pair}: a' = {a_phase} below phase interference rank "
            f"{rates.rank_interference_phase}",
            stacklevel=2,
        )
    return a + a_phase < rates.m


# -- examples ----------------------------------------------------------------

BUTTERFLY_K = [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
BUTTERFLY_K_PHASE = [[1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 1, 0], [0, 0, 0, 1]]

TWO_WAY_K = [
    [1, 0, 0, 1, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [-1, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
]
TWO_WAY_K_PHASE = [
    [2, 0, 0, 2, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [-2, 0, 0, 2, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
]


def butterfly(ctx: FieldCtx | None = None) -> NetworkSpec:
    """Two pairs of two wires; one node mixes wire 2 into wire 1 (0-based)."""
    ctx = ctx or FieldCtx(2)
    A1 = Mat.from_ints(ctx.base, [[1, 1], [0, 1]])
    return NetworkSpec(ctx, (2, 2), (NodeOp((1, 2), A1),))


def two_way(ctx: FieldCtx | None = None) -> NetworkSpec:
    """Two pairs of three wires over F_3 with bit interference both ways."""
    ctx = ctx or FieldCtx(3)
    if ctx.p != 3:
        raise InvalidBlocks("the two-way example is defined over characteristic 3")
    K = Mat.from_ints(ctx.base, TWO_WAY_K)
    return NetworkSpec(ctx, (3, 3), (NodeOp(tuple(range(6)), K),))


def one_sender(
    ctx: FieldCtx,
    diag_blocks: Sequence[Mat],
    interference_blocks: Sequence[Mat],
) -> NetworkSpec:
    """Interference only from S_1: K has diagonal blocks plus the row block ``K_{1,j}``.

    ``interference_blocks[j - 2]`` is ``K_{1,j}`` for j = 2..r.
    """
    sizes = [d.nrows for d in diag_blocks]
    if len(interference_blocks) != len(sizes) - 1:
        raise InvalidBlocks("need one interference block per pair after the first")
    for d in diag_blocks:
        if d.nrows != d.ncols or not d.is_invertible():
            raise InvalidBlocks("diagonal blocks must be square and invertible")
    for j, b in enumerate(interference_blocks, start=2):
        if b.shape != (sizes[0], sizes[j - 1]):
            raise InvalidBlocks(f"K_(1,{j}) must be {sizes[0]}x{sizes[j - 1]}, got {b.shape}")
    F = ctx.base
    m = sum(sizes)
    off = pair_offsets(sizes)
    rows = [[0] * m for _ in range(m)]
    for i, d in enumerate(diag_blocks):
        for a in range(sizes[i]):
            rows[off[i] + a][off[i]:off[i + 1]] = d.rows[a]
    for j, b in enumerate(interference_blocks, start=1):
        for a in range(sizes[0]):
            rows[a][off[j]:off[j + 1]] = b.rows[a]
    K = Mat(F, rows, m)
    return NetworkSpec(ctx, tuple(sizes), (NodeOp(tuple(range(m)), K),))


def _default_one_sender() -> NetworkSpec:
    ctx = FieldCtx(2)
    F = ctx.base
    eye = Mat.identity(F, 2)
    return one_sender(
        ctx,
        [Mat.from_ints(F, [[1, 1], [0, 1]]), eye, eye],
        [Mat.from_ints(F, [[0, 0], [1, 0]]), Mat.from_ints(F, [[0, 1], [0, 0]])],
    )


EXAMPLES = {
    "butterfly": butterfly,
    "two_way": two_way,
    "one_sender": _default_one_sender,
}


def builtin_example(name: str) -> NetworkSpec:
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise ParseError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


def identity_network(ctx: FieldCtx, pair_sizes: Sequence[int]) -> NetworkSpec:
    return NetworkSpec(ctx, tuple(pair_sizes), ())


# -- JSON --------------------------------------------------------------------

def parse_network(obj: dict) -> NetworkSpec:
    if not isinstance(obj, dict):
        raise ParseError("network description must be a JSON object")
    try:
        ctx = FieldCtx.from_json(obj["field"])
        pairs = tuple(int(x) for x in obj["pairs"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad network header: {exc}") from exc
    m = sum(pairs)
    F = ctx.base
    if "transfer" in obj:
        if "nodes" in obj:
            raise ParseError("give either 'nodes' or 'transfer', not both")
        K = mat_from_json(F, obj["transfer"])
        if K.shape != (m, m):
            raise ParseError(f"transfer must be {m}x{m}")
        return NetworkSpec(ctx, pairs, (NodeOp(tuple(range(m)), K),))
    nodes = []
    for nd in obj.get("nodes", []):
        try:
            wires = tuple(int(w) for w in nd["wires"])
            nodes.append(NodeOp(wires, mat_from_json(F, nd["matrix"], len(wires))))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad node: {exc}") from exc
    return NetworkSpec(ctx, pairs, tuple(nodes))


def load_network(path: str | Path) -> NetworkSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read network file {path}: {exc}") from exc
    return parse_network(obj)


def network_to_json(spec: NetworkSpec) -> dict:
    return {
        "field": spec.field.to_json(),
        "pairs": list(spec.pair_sizes),
        "nodes": [{"wires": list(n.wires), "matrix": mat_to_json(n.matrix)} for n in spec.nodes],
    }
