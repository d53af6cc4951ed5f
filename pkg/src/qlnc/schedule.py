"""Parameter schedules: the extension degree alpha and the asymptotic secret-sharing schedule."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import Infeasible, NTooSmall


@dataclass(frozen=True)
class QPrimeChoice:
    alpha: int
    q_prime: int
    n_requested: int
    n: int
    n_prime: int

    @property
    def padding(self) -> int:
        return self.n - self.n_requested

    def to_json(self) -> dict:
        return {**asdict(self), "padding": self.padding}


def _check_rates(m: int, a: int, a_phase: int) -> None:
    if m < 1 or a < 0 or a_phase < 0 or a + a_phase >= m:
        raise Infeasible(f"need a + a' < m, got m={m}, a={a}, a'={a_phase}")


def choose_qprime(n: int, q: int, m: int, a: int, a_phase: int) -> QPrimeChoice:
    """Smallest alpha with ``q^alpha >= n^{1 + (M+2)/(m-M)}``, ``M = max(a, a')``.

    The comparison is exact: ``q^{alpha (m-M)} >= n^{m+2}``.  The block length
    is then padded up to a multiple of alpha that also leaves ``n' > 2m``.
    """
    _check_rates(m, a, a_phase)
    if n < 1 or q < 2:
        raise Infeasible("need n >= 1 and q >= 2")
    big = max(a, a_phase)
    den = m - big
    target = n ** (m + 2)
    alpha = 1
    while q ** (alpha * den) < target:
        alpha += 1
    n_prime = max(-(-n // alpha), 2 * m + 1)
    return QPrimeChoice(alpha, q ** alpha, n, n_prime * alpha, n_prime)


def bound_ratio(n: int, n_prime: int, q_prime: int, m: int, a: int, a_phase: int) -> Fraction:
    """``n (n')^m / (q')^{m - max(a, a')}``, which the schedule drives to zero."""
    return Fraction(n * n_prime ** m, q_prime ** (m - max(a, a_phase)))


@dataclass(frozen=True)
class Theorem2Params:
    beta: int
    alpha: int
    k: int
    n1: int
    q1: int
    q2: int
    p_err_bound: float
    overhead: float

    def to_json(self) -> dict:
        return asdict(self)


def _floor_log(x: int, base: int) -> int:
    """Largest e with base^e <= x."""
    e = 0
    while base ** (e + 1) <= x:
        e += 1
    return e


def theorem2_params(n: int, q: int, m: int, a: int, a_phase: int) -> Theorem2Params:
    """Block lengths and bounds for the secure shared-randomness schedule.

    beta = floor(2 log2 log2 n / (m log2 q)), alpha = floor((m+2) log_q n),
    k = ceil(m (2m - a - a' + 4) log2 q'), n1 = m (m - a' + 1) k beta,
    q1 = q^beta, q2 = q1^m and the error bound k m / q2.
    """
    _check_rates(m, a, a_phase)
    if n < 4 or q < 2:
        raise NTooSmall(f"n = {n} too small for the schedule")
    beta = math.floor(2 * math.log2(math.log2(n)) / (m * math.log2(q)))
    if beta < 1:
        raise NTooSmall(f"beta = {beta} < 1 at n = {n}; increase n")
    alpha = _floor_log(n ** (m + 2), q)
    sr = m * (2 * m - a - a_phase + 4)
    # log2 q' = alpha log2 q; exact when q is a power of two
    if q & (q - 1) == 0:
        k = sr * alpha * (q.bit_length() - 1)
    else:
        k = math.ceil(sr * alpha * math.log2(q))
    n1 = m * (m - a_phase + 1) * k * beta
    q1 = q ** beta
    q2 = q1 ** m
    return Theorem2Params(beta, alpha, k, n1, q1, q2, k * m / q2, n1 / n)
