"""JSON encoding of field entries and matrices.

An entry is its flattened F_p coefficient vector (lowest power first, nested
through the tower).  When that vector has length one the bare integer is
used.  On input a bare integer always denotes a prime-field constant and is
reduced mod p, so the signed literals ``-1`` of hand-written networks work.
"""

from __future__ import annotations

from typing import Any

from .errors import ParseError
from .gf import GF
from .linalg import Mat


def encode_entry(F: GF, x: int) -> int | list[int]:
    coeffs = F.prime_coeffs(x)
    return coeffs[0] if len(coeffs) == 1 else coeffs


def decode_entry(F: GF, obj: Any) -> int:
    if isinstance(obj, bool):
        raise ParseError("booleans are not field entries")
    if isinstance(obj, int):
        return obj % F.p
    if isinstance(obj, list) and all(isinstance(c, int) and not isinstance(c, bool) for c in obj):
        width = len(F.prime_coeffs(0))
        if len(obj) != width:
            raise ParseError(f"coefficient vector of length {len(obj)}, expected {width}")
        return F.from_prime_coeffs(obj)
    raise ParseError(f"cannot read field entry {obj!r}")


def mat_to_json(m: Mat) -> list:
    return [[encode_entry(m.field, x) for x in r] for r in m.rows]


def mat_from_json(F: GF, obj: Any, ncols: int | None = None) -> Mat:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise ParseError("matrix must be a list of rows")
    try:
        return Mat(F, [[decode_entry(F, x) for x in r] for r in obj], ncols)
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"bad matrix: {exc}") from exc
