from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from qlnc.codec import CodeConfig, sample_randomness, u2_inv_a_block
from qlnc.errors import DimensionInvalid, FieldTooLarge
from qlnc.gf import FieldCtx, gf
from qlnc.linalg import Mat, sample_invertible, vstack
from qlnc.montecarlo import (
    TrialConfig,
    TrialOutcome,
    TrialReport,
    check_gamma,
    check_gamma_phase,
    estimate,
    gamma_flags,
    lemma3_bound,
    lemma3_exact,
    lemma3_experiment,
    lemma4_bound,
    lemma4_exact,
    lemma4_experiment,
    lemma5_exact_m1,
    lemma5_experiment,
    run_bit_trial,
    run_phase_trial,
    sample_nonzero_vector,
    trial_rng,
)
from qlnc.network import butterfly, compose_transfer, identity_network, two_way


def _butterfly_tc(alpha=4, **kw):
    ctx = FieldCtx(2, 1, alpha)
    return TrialConfig(compose_transfer(butterfly(ctx)), CodeConfig.from_nprime(2, 1, 0, 6, alpha), ctx, **kw)


# -- configuration -------------------------------------------------------------

def test_trial_config_validation():
    ctx = FieldCtx(2, 1, 4)
    tp = compose_transfer(butterfly(ctx))
    cfg = CodeConfig.from_nprime(2, 1, 0, 6, 4)
    with pytest.raises(ValueError):
        TrialConfig(tp, cfg, ctx, trials=0)
    with pytest.raises(ValueError):
        TrialConfig(tp, CodeConfig.from_nprime(2, 1, 0, 6, 2), ctx)
    with pytest.raises(ValueError):
        TrialConfig(tp, CodeConfig.from_nprime(3, 1, 0, 7, 4), ctx)
    with pytest.raises(ValueError):
        TrialConfig(tp, cfg, ctx, interference="adversarial")
    with pytest.raises(ValueError):
        TrialConfig(tp, cfg, ctx, interference=Mat.zeros(ctx.ext, 2, 5))


# -- trials ----------------------------------------------------------------------

def test_zero_interference_never_fails():
    rep = estimate(_butterfly_tc(interference="zero", trials=200))
    assert rep.bit_failures == rep.phase_failures == 0
    assert rep.bit_strict_failures == rep.phase_strict_failures == 0
    assert rep.gamma_stats["bit"]["g1"] == 200
    assert rep.fidelity_lower_bound == 1.0


def test_single_trial_zero_interference():
    rep = estimate(_butterfly_tc(interference="zero", trials=1))
    assert (rep.p_bit, rep.p_phase, rep.fidelity_lower_bound) == (0.0, 0.0, 1.0)


def test_unicast_always_succeeds():
    ctx = FieldCtx(3, 1, 2)
    tp = compose_transfer(identity_network(ctx, [3]))
    for cfg in (CodeConfig.from_nprime(3, 0, 0, 7, 2), CodeConfig.from_nprime(3, 1, 1, 8, 2)):
        rep = estimate(TrialConfig(tp, cfg, ctx, trials=100, master_seed=5))
        assert rep.bit_failures == rep.phase_failures == rep.implication_violations == 0


def test_determinism_and_parallel_fold():
    tc = _butterfly_tc(alpha=2, trials=120, master_seed=99)
    a, b = estimate(tc), estimate(tc)
    assert a == b and a.to_json() == b.to_json()
    assert estimate(tc, jobs=2) == a
    assert a.bit_failures > 0  # q' = 4 is small enough that failures occur


def test_trial_outcome_is_seed_determined():
    tc = _butterfly_tc()
    one = run_bit_trial(tc, random.Random(3)), run_phase_trial(tc, random.Random(4))
    two = run_bit_trial(tc, random.Random(3)), run_phase_trial(tc, random.Random(4))
    assert one == two


def test_butterfly_phase_side_never_fails():
    rep = estimate(_butterfly_tc(trials=500, master_seed=1))
    assert rep.phase_failures == 0
    assert rep.implication_violations == 0


def test_two_way_no_violations():
    ctx = FieldCtx(3, 1, 2)
    rep = estimate(TrialConfig(compose_transfer(two_way(ctx)), CodeConfig.from_nprime(3, 1, 1, 7, 2), ctx,
                               trials=300, master_seed=2))
    assert rep.implication_violations == 0
    assert rep.bit_failures > 0  # tiny field, interference often breaks decoding


def test_fixed_interference_mode():
    ctx = FieldCtx(2, 1, 4)
    Z = Mat.random(ctx.ext, 2, 6, random.Random(0))
    rep = estimate(_butterfly_tc(interference=Z, trials=50))
    assert rep.trials == 50 and rep.implication_violations == 0
    zero = estimate(_butterfly_tc(interference=Mat.zeros(ctx.ext, 2, 6), trials=50))
    assert zero.bit_failures == 0


def test_report_json_fields():
    d = estimate(_butterfly_tc(trials=10)).to_json()
    for key in ("trials", "bit_failures", "phase_failures", "p_bit", "p_phase", "fidelity_lower_bound",
                "gamma_stats", "implication_violations"):
        assert key in d
    assert -1.0 <= d["fidelity_lower_bound"] <= 1.0


def test_report_counts_violation():
    rep = TrialReport(1)
    good = dict.fromkeys(("g1", "g2", "g2prime", "g3"), True)
    rep.add(TrialOutcome(False, False, good, "Inconsistent"), TrialOutcome(True, True, good))
    assert rep.bit_violations == 1 and rep.implication_violations == 1 and rep.p_bit == 1.0


# -- decoding conditions -------------------------------------------------------------

def test_gamma_zero_interference_all_true():
    F = FieldCtx(2, 1, 4).ext
    cfg = CodeConfig.from_nprime(2, 1, 0, 6, 4)
    rng = random.Random(0)
    rand = sample_randomness(F, cfg, rng)
    Kii, Kic = sample_invertible(F, 2, rng), Mat.random(F, 2, 1, rng)
    Z = Mat.zeros(F, 1, 6)
    assert all(check_gamma(Kii, Kic, rand.U1, rand.R1, rand.V, Z, cfg).values())
    assert all(check_gamma_phase(Kii, Kic, rand.U1, rand.R2, rand.V, Z, cfg).values())


def test_gamma_handcrafted_overlap():
    # choose K_ic as the own-signal direction so that W2 = W1
    F = FieldCtx(2, 1, 4).ext
    cfg = CodeConfig.from_nprime(2, 1, 0, 6, 4)
    rng = random.Random(1)
    rand = sample_randomness(F, cfg, rng)
    Kii = sample_invertible(F, 2, rng)
    W1 = Kii @ rand.U1 @ vstack(Mat.zeros(F, 1, 2), rand.R1)
    assert W1.rank() == 1
    col = 0 if not W1[:, :1].is_zero() else 1
    Kic = W1[:, col:col + 1]
    Z = Mat(F, [[1, 0, 0, 0, 0, 0]], 6)
    flags = check_gamma(Kii, Kic, rand.U1, rand.R1, rand.V, Z, cfg)
    assert flags["g1"] is False and flags["g3"] is True


def test_gamma_flags_direct():
    F = gf(2)
    W1 = Mat(F, [[1, 0], [0, 0]], 2)
    y = Mat(F, [[0, 0], [0, 1]], 2)
    assert gamma_flags(W1, y, y, y) == {"g1": True, "g2": True, "g2prime": True, "g3": True}
    assert gamma_flags(W1, W1, W1, W1)["g1"] is False
    assert gamma_flags(W1, y, Mat.zeros(F, 2, 2), y)["g2"] is False
    assert gamma_flags(W1, y, Mat.zeros(F, 2, 2), y)["g2prime"] is False


# -- probability experiments -----------------------------------------------------------

def test_subspace_small_cases():
    F2 = gf(2)
    assert lemma3_experiment(2, 1, 0, F2, exhaustive=True) == 1
    assert lemma3_experiment(2, 1, 1, F2, exhaustive=True) == Fraction(2, 3)
    with pytest.raises(DimensionInvalid):
        lemma3_experiment(2, 2, 1, F2)


@pytest.mark.parametrize("q", [2, 3])
def test_subspace_exhaustive_matches_closed_form(q):
    F = gf(q)
    for d_a in range(1, 4):
        for d_b, d_c in itertools.product(range(d_a + 1), repeat=2):
            if d_b + d_c <= d_a and q ** (d_a * d_c) <= 1 << 12:
                assert lemma3_experiment(d_a, d_b, d_c, F, exhaustive=True) == lemma3_exact(d_a, d_b, d_c, q)


def test_subspace_monte_carlo_bound():
    p = lemma3_experiment(4, 2, 2, gf(16), trials=10_000, rng=random.Random(0))
    assert p >= lemma3_bound(4, 2, 2, 16) == 0.75
    assert abs(p - float(lemma3_exact(4, 2, 2, 16))) < 0.02


def test_full_rank_small_cases():
    F2 = gf(2)
    assert lemma4_experiment(2, 0, F2, exhaustive=True) == 1
    assert lemma4_experiment(2, 2, F2, exhaustive=True) == Fraction(6, 16)
    with pytest.raises(DimensionInvalid):
        lemma4_experiment(1, 2, F2)
    with pytest.raises(FieldTooLarge):
        lemma4_experiment(5, 5, gf(16), exhaustive=True)


@pytest.mark.parametrize("q", [2, 3])
def test_full_rank_exhaustive_matches_closed_form(q):
    F = gf(q)
    for d in range(1, 4):
        for dp in range(d + 1):
            if q ** (d * dp) <= 1 << 12:
                assert lemma4_experiment(d, dp, F, exhaustive=True) == lemma4_exact(d, dp, q)


def test_full_rank_monte_carlo_bound():
    p = lemma4_experiment(5, 2, gf(16), trials=10_000, rng=random.Random(0))
    assert p >= lemma4_bound(16) == 1 - 2 / 16


def test_annihilation_bound_example():
    cfg = CodeConfig.from_nprime(1, 0, 0, 5)
    res = lemma5_experiment(cfg, gf(16), trials=2000, x_samples=50, rng=random.Random(0))
    assert res.max_probability <= res.bound == 5 * 3 / 16
    assert len(res.per_x) == 50 and all(any(v) for v in res.xs)


def test_annihilation_decays_with_field_size():
    cfg = CodeConfig.from_nprime(1, 0, 0, 5)
    small = lemma5_experiment(cfg, gf(4), 400, 20, random.Random(1)).max_probability
    big = lemma5_experiment(cfg, gf(1 << 12), 400, 20, random.Random(1)).max_probability
    assert big < small and big <= 0.01


@pytest.mark.parametrize("x_c", [(1, 0, 0), (0, 1, 1), (3, 2, 1), (0, 0, 5)])
def test_annihilation_m1_root_counting(x_c):
    # exact probability over every V for x supported on the C block
    F = gf(8)
    cfg = CodeConfig.from_nprime(1, 0, 0, 5)
    X = Mat(F, [[0, 0, *x_c]], 5)
    hits = sum((X @ u2_inv_a_block(F, list(V), cfg)).is_zero() for V in itertools.product(range(8), repeat=4))
    got = Fraction(hits, 8 ** 4)
    assert got == lemma5_exact_m1(F, x_c)
    assert got <= Fraction(3, 8)


def test_sample_nonzero_vector():
    rng = random.Random(0)
    F = gf(3)
    for _ in range(100):
        assert any(sample_nonzero_vector(F, 4, rng))


def test_gamma_hold_rate_scales_with_field():
    # fraction of trials with g1 and g2 both holding is at least 1 - c/q'
    for alpha in (4, 8):
        tc = _butterfly_tc(alpha=alpha, trials=1000)
        held = 0
        for i in range(tc.trials):
            g = run_bit_trial(tc, trial_rng(0, i)).gamma
            held += g["g1"] and g["g2"]
        assert held / tc.trials >= 1 - 10 / 2 ** alpha
