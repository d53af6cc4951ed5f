"""Simulator for a multiple-unicast quantum network code over finite fields."""

from __future__ import annotations

from .gf import GF, FieldCtx, FieldElem
from .linalg import Mat, RowMask, solve_projected
from .network import NetworkSpec, NodeOp, TransferPair, builtin_example, compose_transfer, rate_table

__all__ = [
    "GF",
    "FieldCtx",
    "FieldElem",
    "Mat",
    "RowMask",
    "solve_projected",
    "NetworkSpec",
    "NodeOp",
    "TransferPair",
    "builtin_example",
    "compose_transfer",
    "rate_table",
]
__version__ = "0.1.0"
