"""Seeded trial harness, decoding-condition instrumentation and subspace probability experiments."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .codec import (
    CodeConfig,
    apply_factors,
    decode_bit,
    decode_phase,
    encode_bit,
    encode_phase,
    invert_factors,
    sample_bit_branch,
    sample_phase_branch,
    sample_randomness,
    transpose_factors,
    u2_factors,
    u2_inv_a_block,
)
from .errors import DimensionInvalid, FieldTooLarge, InfeasibleConfig
from .gf import ENUM_CAP, FieldCtx, GF
from .linalg import Mat, hstack, sample_full_rank, vstack
from .network import TransferPair, feasible, phase_dual, rate_table

GAMMA_KEYS = ("g1", "g2", "g2prime", "g3")


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo configuration.

    ``interference`` is ``"zero"``, ``"uniform"`` or a fixed ``Mat`` Z of
    shape ``(m_total - m_i) x n'`` over F_q'.  The same Z is used for both
    bases in fixed mode.
    """

    transfer: TransferPair
    cfg: CodeConfig
    ctx: FieldCtx
    interference: str | Mat = "uniform"
    trials: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.ctx.alpha != self.cfg.alpha:
            raise ValueError("field extension degree differs from cfg.alpha")
        sizes = self.transfer.pair_sizes
        i = self.cfg.pair_index
        if not 1 <= i <= len(sizes) or sizes[i - 1] != self.cfg.m:
            raise ValueError(f"cfg.m = {self.cfg.m} does not match pair {i}")
        z = self.interference
        if isinstance(z, Mat):
            shape = (sum(sizes) - self.cfg.m, self.cfg.n_prime)
            if z.shape != shape or z.field != self.ctx.ext:
                raise ValueError(f"fixed Z must be {shape} over F_q'")
        elif z not in ("zero", "uniform"):
            raise ValueError(f"unknown interference mode {z!r}")


@dataclass
class TrialOutcome:
    success: bool
    strict: bool
    gamma: dict[str, bool]
    failure: str | None = None

    @property
    def violation(self) -> bool:
        return all(self.gamma.values()) and not self.success


@dataclass
class TrialReport:
    trials: int
    bit_failures: int = 0
    phase_failures: int = 0
    bit_strict_failures: int = 0
    phase_strict_failures: int = 0
    gamma_stats: dict[str, dict[str, int]] = field(
        default_factory=lambda: {"bit": dict.fromkeys(GAMMA_KEYS, 0), "phase": dict.fromkeys(GAMMA_KEYS, 0)}
    )
    bit_violations: int = 0
    phase_violations: int = 0

    @property
    def p_bit(self) -> float:
        return self.bit_failures / self.trials

    @property
    def p_phase(self) -> float:
        return self.phase_failures / self.trials

    @property
    def fidelity_lower_bound(self) -> float:
        return 1.0 - (self.p_bit + self.p_phase)

    @property
    def implication_violations(self) -> int:
        return self.bit_violations + self.phase_violations

    def add(self, bit: TrialOutcome, phase: TrialOutcome) -> None:
        self.bit_failures += not bit.success
        self.phase_failures += not phase.success
        self.bit_strict_failures += not bit.strict
        self.phase_strict_failures += not phase.strict
        for side, o in (("bit", bit), ("phase", phase)):
            for k, v in o.gamma.items():
                self.gamma_stats[side][k] += v
        self.bit_violations += bit.violation
        self.phase_violations += phase.violation

    def to_json(self) -> dict:
        d = asdict(self)
        d.update(
            p_bit=self.p_bit,
            p_phase=self.p_phase,
            fidelity_lower_bound=self.fidelity_lower_bound,
            implication_violations=self.implication_violations,
        )
        return d


def trial_rng(master_seed: int, index: int) -> random.Random:
    return random.Random(master_seed ^ index)


def _interference(tc: TrialConfig, rng: random.Random) -> Mat:
    F = tc.ctx.ext
    rows = sum(tc.transfer.pair_sizes) - tc.cfg.m
    z = tc.interference
    if isinstance(z, Mat):
        return z
    if z == "zero":
        return Mat.zeros(F, rows, tc.cfg.n_prime)
    return Mat.random(F, rows, tc.cfg.n_prime, rng)


def _blocks(tc: TrialConfig, basis: str) -> tuple[Mat, Mat]:
    F = tc.ctx.ext
    i = tc.cfg.pair_index
    return tc.transfer.block(i, i, basis).cast(F), tc.transfer.complement(i, basis).cast(F)


def gamma_flags(W1: Mat, W2: Mat, y: Mat, KicZ: Mat) -> dict[str, bool]:
    """Flags of the decoding conditions from the pieces of one instance.

    ``W1`` spans the own-signal subspace, ``W2`` the interference subspace,
    ``y`` is the interference restricted to the pilot columns (paired with
    the columns of W1) and ``KicZ`` the raw interference.
    """
    r1, r2 = W1.rank(), W2.rank()
    return {
        "g1": hstack(W1, W2).rank() == r1 + r2,
        "g2": vstack(W1, y).rank() == r1 + r2,
        "g2prime": y.rank() == KicZ.rank(),
        "g3": True,
    }


def check_gamma(Kii: Mat, Kic: Mat, U1: Mat, R1: Mat, V: Sequence[int], Z: Mat, cfg: CodeConfig) -> dict[str, bool]:
    """Bit-side conditions for one instance."""
    F = U1.field
    W1 = Kii @ U1 @ vstack(Mat.zeros(F, cfg.a, cfg.m), R1)
    KicZ = Kic @ Z
    W2 = apply_factors(KicZ, invert_factors(u2_factors(F, V, cfg)), cfg)
    return gamma_flags(W1, W2, W2[:, :cfg.m], KicZ)


def check_gamma_phase(Kii: Mat, Kic: Mat, U1: Mat, R2: Mat, V: Sequence[int], Z: Mat, cfg: CodeConfig) -> dict[str, bool]:
    """Phase-side conditions; ``Kii``/``Kic`` are the phase transfer blocks."""
    F = U1.field
    W1 = Kii @ phase_dual(U1) @ vstack(R2, Mat.zeros(F, cfg.a_phase, cfg.m))
    KicZ = Kic @ Z
    W2 = apply_factors(KicZ, transpose_factors(u2_factors(F, V, cfg)), cfg)
    return gamma_flags(W1, W2, W2[:, cfg.m:2 * cfg.m], KicZ)


def run_bit_trial(tc: TrialConfig, rng: random.Random) -> TrialOutcome:
    cfg, F = tc.cfg, tc.ctx.ext
    rand = sample_randomness(F, cfg, rng)
    branch = sample_bit_branch(F, cfg, rng)
    Z = _interference(tc, rng)
    Kii, Kic = _blocks(tc, "bit")
    Y = Kii @ encode_bit(branch, rand, cfg)
    if Kic.ncols:
        Y = Y + Kic @ Z
    out = decode_bit(Y, rand.R1, rand.V, cfg)
    ok = out.ok and out.M_hat == branch.M
    gamma = check_gamma(Kii, Kic, rand.U1, rand.R1, rand.V, Z, cfg)
    return TrialOutcome(ok, ok and out.E2_hat == branch.E2, gamma, out.failure)


def run_phase_trial(tc: TrialConfig, rng: random.Random) -> TrialOutcome:
    cfg, F = tc.cfg, tc.ctx.ext
    rand = sample_randomness(F, cfg, rng)
    branch = sample_phase_branch(F, cfg, rng)
    Z = _interference(tc, rng)
    Kii, Kic = _blocks(tc, "phase")
    Y = Kii @ encode_phase(branch, rand, cfg)
    if Kic.ncols:
        Y = Y + Kic @ Z
    out = decode_phase(Y, rand.R2, rand.V, cfg)
    ok = out.ok and out.M_hat == branch.Mp
    gamma = check_gamma_phase(Kii, Kic, rand.U1, rand.R2, rand.V, Z, cfg)
    return TrialOutcome(ok, ok and out.E2_hat == branch.E2p, gamma, out.failure)


def run_trial(tc: TrialConfig, index: int) -> tuple[TrialOutcome, TrialOutcome]:
    """Bit then phase trial, both drawn from the RNG of this trial index."""
    rng = trial_rng(tc.master_seed, index)
    return run_bit_trial(tc, rng), run_phase_trial(tc, rng)


def _run_chunk(tc: TrialConfig, start: int, stop: int) -> list[tuple[TrialOutcome, TrialOutcome]]:
    return [run_trial(tc, i) for i in range(start, stop)]


def check_feasible(tc: TrialConfig) -> None:
    rates = rate_table(tc.transfer)[tc.cfg.pair_index - 1]
    if not feasible(rates, tc.cfg.a, tc.cfg.a_phase):  # pragma: no cover - CodeConfig already refuses
        raise InfeasibleConfig("a + a' must be below m")


def estimate(tc: TrialConfig, jobs: int = 1) -> TrialReport:
    """Aggregate all trials in index order; ``jobs > 1`` runs chunks in worker processes."""
    check_feasible(tc)
    report = TrialReport(tc.trials)
    if jobs <= 1 or tc.trials < 2 * jobs:
        results = _run_chunk(tc, 0, tc.trials)
    else:
        step = -(-tc.trials // (4 * jobs))
        bounds = [(s, min(s + step, tc.trials)) for s in range(0, tc.trials, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(_run_chunk, [tc] * len(bounds), *zip(*bounds))
            results = [r for c in chunks for r in c]
    for bit, phase in results:
        report.add(bit, phase)
    return report


# -- probability experiments ----------------------------------------------------

def _all_matrices(F: GF, rows: int, cols: int, cap: int = ENUM_CAP):
    if F.order ** (rows * cols) > cap:
        raise FieldTooLarge(f"{F.order}^{rows * cols} matrices exceed cap {cap}")
    for flat in itertools.product(range(F.order), repeat=rows * cols):
        yield Mat(F, [flat[r * cols:(r + 1) * cols] for r in range(rows)], cols)


def _lemma3_hit(W: Mat, R: Mat, d_b: int, d_c: int) -> bool:
    return hstack(W, R).rank() == d_b + d_c


def lemma3_experiment(d_a: int, d_b: int, d_c: int, F: GF, trials: int = 0,
                      rng: random.Random | None = None, exhaustive: bool = False) -> Fraction | float:
    """Probability that a uniform d_c-dimensional subspace meets a fixed d_b-dimensional one trivially.

    The fixed subspace is spanned by the first ``d_b`` unit vectors.  The random
    one is the column span of a uniform full-rank ``d_a x d_c`` matrix; every
    subspace arises from the same number of such matrices, so exhaustive
    enumeration of matrices gives the exact subspace probability.
    """
    if min(d_a, d_b, d_c) < 0 or d_a < d_b + d_c:
        raise DimensionInvalid("need d_a >= d_b + d_c with nonnegative dimensions")
    if d_c == 0:
        return Fraction(1) if exhaustive else 1.0
    W = Mat(F, [[int(i == j) for j in range(d_b)] for i in range(d_a)], d_b)
    if exhaustive:
        hits = total = 0
        for R in _all_matrices(F, d_a, d_c):
            if R.rank() == d_c:
                total += 1
                hits += _lemma3_hit(W, R, d_b, d_c)
        return Fraction(hits, total)
    rng = rng or random.Random(0)
    hits = sum(_lemma3_hit(W, sample_full_rank(F, d_c, d_a, rng).T, d_b, d_c) for _ in range(trials))
    return hits / trials


def lemma3_exact(d_a: int, d_b: int, d_c: int, q: int) -> Fraction:
    """Closed form: q^{d_b d_c} [d_a - d_b choose d_c]_q / [d_a choose d_c]_q."""
    def gauss(n: int, k: int) -> Fraction:
        out = Fraction(1)
        for i in range(k):
            out *= Fraction(q ** (n - i) - 1, q ** (i + 1) - 1)
        return out
    return q ** (d_b * d_c) * gauss(d_a - d_b, d_c) / gauss(d_a, d_c)


def lemma3_bound(d_a: int, d_b: int, d_c: int, q: int, slack: float = 4.0) -> float:
    return 1.0 - slack * float(q) ** (d_b + d_c - d_a - 1)


def lemma4_experiment(d: int, d_prime: int, F: GF, trials: int = 0,
                      rng: random.Random | None = None, exhaustive: bool = False) -> Fraction | float:
    """Probability that a uniform ``d' x d`` matrix has full rank ``d'``."""
    if d_prime < 0 or d < d_prime:
        raise DimensionInvalid("need d >= d' >= 0")
    if d_prime == 0:
        return Fraction(1) if exhaustive else 1.0
    if exhaustive:
        mats = list(_all_matrices(F, d_prime, d))
        return Fraction(sum(A.rank() == d_prime for A in mats), len(mats))
    rng = rng or random.Random(0)
    return sum(Mat.random(F, d_prime, d, rng).rank() == d_prime for _ in range(trials)) / trials


def lemma4_exact(d: int, d_prime: int, q: int) -> Fraction:
    out = Fraction(1)
    for i in range(d_prime):
        out *= 1 - Fraction(q ** i, q ** d)
    return out


def lemma4_bound(q: int, slack: float = 2.0) -> float:
    return 1.0 - slack / q


def sample_nonzero_vector(F: GF, length: int, rng: random.Random) -> list[int]:
    """Random nonempty support, then uniform nonzero entries on it."""
    while True:
        support = [i for i in range(length) if rng.random() < 0.5]
        if support:
            break
    x = [0] * length
    for i in support:
        x[i] = F.random_nonzero(rng)
    return x


@dataclass
class Lemma5Result:
    max_probability: float
    per_x: list[float]
    bound: float
    xs: list[list[int]]


def lemma5_experiment(cfg: CodeConfig, F: GF, trials: int, x_samples: int,
                      rng: random.Random | None = None, slack: float = 5.0) -> Lemma5Result:
    """Max over sampled nonzero x of Pr_V[x^T (U2^{-1})^A = 0].

    The ``trials`` V-draws are shared across all x samples.
    """
    rng = rng or random.Random(0)
    m, npr = cfg.m, cfg.n_prime
    blocks = [u2_inv_a_block(F, [F.random(rng) for _ in range(4 * m)], cfg) for _ in range(trials)]
    xs = [sample_nonzero_vector(F, npr, rng) for _ in range(x_samples)]
    per_x = []
    for x in xs:
        X = Mat(F, [x], npr)
        per_x.append(sum((X @ A).is_zero() for A in blocks) / trials)
    bound = slack * (cfg.width_c / F.order) ** m
    return Lemma5Result(max(per_x), per_x, bound, xs)


def lemma5_exact_m1(F: GF, x_c: Sequence[int]) -> Fraction:
    """For m = 1 and x supported on the C block: Pr over v of sum_j x_j v^j = 0."""
    roots = 0
    for v in range(F.order):
        s, pw = 0, v
        for c in x_c:
            s = F.add(s, F.mul(c, pw))
            pw = F.mul(pw, v)
        roots += s == 0
    return Fraction(roots, F.order)
