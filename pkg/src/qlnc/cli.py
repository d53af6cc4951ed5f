"""``qlnc`` command-line front end.

Exit codes: 0 success, 1 property violation, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path
from typing import Any

from . import montecarlo as mc
from .codec import CodeConfig, decode_bit, dump_test_vector, encode_bit, sample_bit_branch, sample_randomness
from .errors import InfeasibleConfig, QlncError
from .gf import FieldCtx, prime_power
from .jsonio import mat_from_json
from .network import builtin_example, compose_transfer, feasible, load_network, rate_table
from .oracle import verify_lemma1, verify_shadow
from .schedule import choose_qprime, theorem2_params

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _field_of_order(q: int) -> FieldCtx:
    try:
        p, t = prime_power(q)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return FieldCtx(p, t)


def _network(args):
    if bool(args.network) == bool(args.example):
        raise UsageError("give exactly one of --network or --example")
    if args.example:
        return builtin_example(args.example), {"example": args.example}
    return load_network(args.network), {"network": str(args.network)}


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, manifest: dict, rows: list[dict], payload: Any) -> None:
    """Write rows as CSV or payload as JSON to --out (or stdout), plus a manifest."""
    if args.format == "csv":
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
    else:
        text = _dump(payload)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        manifest = {**manifest, "output": str(out)}
        Path(str(out) + ".manifest.json").write_text(_dump(manifest))
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------

def cmd_rates(args) -> int:
    spec, src = _network(args)
    tp = compose_transfer(spec)
    table = rate_table(tp)
    if args.out or args.format == "json":
        rows = [{"pair": r.pair, "m": r.m, "rank_Kii": r.rank_direct, "rank_Kii_phase": r.rank_direct_phase,
                 "rank_Kic": r.rank_interference, "rank_Kic_phase": r.rank_interference_phase, "ok": r.ok}
                for r in table]
        _emit(args, {"command": "rates", **src}, rows, {"pairs": rows})
    else:
        print("pair m rank_Kii rank_Kii~ rank_Kic rank_Kic~")
        for r in table:
            print(r.pair, " ".join(map(str, r.as_row())))
    bad = [r.pair for r in table if not r.ok]
    if bad:
        print(f"pairs with rank-deficient direct block: {bad}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _parse_alphas(text: str) -> list[int] | None:
    if text == "auto":
        return None
    try:
        alphas = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--alpha must be 'auto' or comma-separated integers, not {text!r}") from None
    if any(a < 1 for a in alphas):
        raise UsageError("--alpha values must be positive")
    return alphas


def cmd_simulate(args) -> int:
    spec, src = _network(args)
    tp = compose_transfer(spec)
    if not 1 <= args.pair <= spec.r:
        raise UsageError(f"--pair must lie in 1..{spec.r}")
    m = spec.pair_sizes[args.pair - 1]
    if not feasible(rate_table(tp)[args.pair - 1], args.a, args.aphase):
        raise InfeasibleConfig(f"a + a' = {args.a + args.aphase} is not below m = {m}")
    alphas = _parse_alphas(args.alpha)
    runs = []
    if alphas is None:
        choice = choose_qprime(args.n, spec.field.q, m, args.a, args.aphase)
        runs.append((choice.alpha, choice.n, choice.padding))
    else:
        for al in alphas:
            if args.n % al:
                raise UsageError(f"alpha = {al} does not divide n = {args.n}")
            runs.append((al, args.n, 0))

    rows, reports, resolved = [], [], []
    violations = 0
    for al, n, pad in runs:
        cfg = CodeConfig(m, args.a, args.aphase, n, al, args.pair)
        ctx = spec.field.with_alpha(al)
        z = _interference(args.interference, ctx)
        tc = mc.TrialConfig(tp, cfg, ctx, z, args.trials, args.seed)
        rep = mc.estimate(tc, jobs=args.jobs)
        violations += rep.implication_violations
        rows.append({
            "q_prime": ctx.q_prime, "n_prime": cfg.n_prime, "trials": rep.trials,
            "bit_failures": rep.bit_failures, "phase_failures": rep.phase_failures,
            "fidelity_lower_bound": rep.fidelity_lower_bound, "violations": rep.implication_violations,
        })
        reports.append({"alpha": al, "n": n, "n_prime": cfg.n_prime, "q_prime": ctx.q_prime, **rep.to_json()})
        resolved.append({"alpha": al, "n": n, "padding": pad, "ext_poly": list(ctx.ext_poly)})
    manifest = {
        "command": "simulate", **src, "pair": args.pair, "a": args.a, "a_phase": args.aphase,
        "n_requested": args.n, "alpha": args.alpha, "trials": args.trials, "seed": args.seed,
        "interference": args.interference, "resolved": resolved,
    }
    _emit(args, manifest, rows, {"manifest": manifest, "reports": reports})
    if violations:
        print(f"{violations} implication violations", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _interference(text: str, ctx: FieldCtx):
    if text in ("zero", "uniform"):
        return text
    if text.startswith("fixed:"):
        path = Path(text[len("fixed:"):])
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read interference file {path}: {exc}") from exc
        return mat_from_json(ctx.ext, obj)
    raise UsageError(f"--interference must be zero, uniform or fixed:PATH, not {text!r}")


def cmd_params(args) -> int:
    if args.mode == "qprime":
        res = choose_qprime(args.n, args.q, args.m, args.a, args.aphase).to_json()
    else:
        res = theorem2_params(args.n, args.q, args.m, args.a, args.aphase).to_json()
    res = {"mode": args.mode, "n": args.n, "q": args.q, "m": args.m, "a": args.a, "a_phase": args.aphase, **res}
    _emit(args, {"command": "params", **res}, [res], res)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ctx = _field_of_order(args.q)
    results = {}
    if args.suite in ("lemma1", "all"):
        results["lemma1"] = verify_lemma1(ctx, args.m, args.n)
    if args.suite in ("shadow", "all"):
        if args.example or args.network:
            spec, _ = _network(args)
        else:
            spec = builtin_example("butterfly")
        results["shadow"] = verify_shadow(spec, args.n)
    ok = True
    for name, res in results.items():
        print(f"{name}: {'pass' if res.passed else 'FAIL'} ({res.checked} checks)")
        if not res.passed:
            ok = False
            print(f"  counterexample: {json.dumps(res.counterexample)}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_lemmas(args) -> int:
    F = _field_of_order(args.q).base
    rng = random.Random(args.seed)
    rows = []
    if args.which == 3:
        emp = mc.lemma3_experiment(args.da, args.db, args.dc, F, args.trials, rng, args.exhaustive)
        bound = mc.lemma3_bound(args.da, args.db, args.dc, args.q)
        exact = mc.lemma3_exact(args.da, args.db, args.dc, args.q)
        rows.append({"lemma": 3, "params": f"d_a={args.da} d_b={args.db} d_c={args.dc}", "q": args.q,
                     "empirical": str(emp), "exact": str(exact), "bound": bound, "pass": float(emp) >= bound})
    elif args.which == 4:
        emp = mc.lemma4_experiment(args.d, args.dprime, F, args.trials, rng, args.exhaustive)
        bound = mc.lemma4_bound(args.q)
        exact = mc.lemma4_exact(args.d, args.dprime, args.q)
        rows.append({"lemma": 4, "params": f"d={args.d} d'={args.dprime}", "q": args.q,
                     "empirical": str(emp), "exact": str(exact), "bound": bound, "pass": float(emp) >= bound})
    else:
        cfg = CodeConfig.from_nprime(args.m, 0, 0, args.nprime)
        res = mc.lemma5_experiment(cfg, F, args.trials, args.x_samples, rng)
        rows.append({"lemma": 5, "params": f"m={args.m} n'={args.nprime}", "q": args.q,
                     "empirical": res.max_probability, "exact": "", "bound": res.bound,
                     "pass": res.max_probability <= res.bound})
    manifest = {"command": "lemmas", "which": args.which, "seed": args.seed, "trials": args.trials,
                "q": args.q, "rows": rows}
    _emit(args, manifest, rows, {"rows": rows})
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_VIOLATION


def cmd_vector(args) -> int:
    ctx = _field_of_order(args.q).with_alpha(args.alpha)
    cfg = CodeConfig.from_nprime(args.m, args.a, args.aphase, args.nprime, args.alpha)
    rng = random.Random(args.seed)
    F = ctx.ext
    rand = sample_randomness(F, cfg, rng)
    branch = sample_bit_branch(F, cfg, rng)
    X = encode_bit(branch, rand, cfg)
    out = decode_bit(X, rand.R1, rand.V, cfg)
    vec = dump_test_vector(args.seed, ctx, cfg, rand, branch, X, out)
    _emit(args, {"command": "vector", "seed": args.seed}, [], vec)
    return EXIT_OK if out.ok and out.M_hat == branch.M else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------------

def _add_network(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", type=Path, help="network JSON file")
    p.add_argument("--example", choices=["butterfly", "one_sender", "two_way"], help="built-in network")


def _add_output(p: argparse.ArgumentParser, default: str = "csv") -> None:
    p.add_argument("--out", help="output path; a manifest is written to OUT.manifest.json")
    p.add_argument("--format", choices=["csv", "json"], default=default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlnc", description="Quantum multiple-unicast network code simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="print the per-pair rate table")
    _add_network(p)
    _add_output(p, "csv")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("simulate", help="Monte Carlo bit/phase error estimation")
    _add_network(p)
    p.add_argument("--pair", type=int, default=1)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--aphase", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="block length over F_q")
    p.add_argument("--alpha", default="auto", help="extension degree, 'auto' or a comma list")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interference", default="uniform", help="zero, uniform or fixed:PATH")
    p.add_argument("--jobs", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("params", help="parameter schedules")
    p.add_argument("--mode", choices=["qprime", "theorem2"], default="qprime")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--aphase", type=int, default=0)
    _add_output(p, "json")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("oracle", help="exhaustive state-vector checks")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--suite", choices=["lemma1", "shadow", "all"], default="lemma1")
    _add_network(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lemmas", help="subspace and rank probability experiments")
    p.add_argument("--which", type=int, choices=[3, 4, 5], required=True)
    p.add_argument("--q", type=int, default=16, help="field order q'")
    p.add_argument("--da", type=int, default=2)
    p.add_argument("--db", type=int, default=1)
    p.add_argument("--dc", type=int, default=1)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--dprime", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--nprime", type=int, default=5)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--x-samples", type=int, default=50)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("vector", help="dump a deterministic encode/decode test vector")
    p.add_argument("--q", type=int, default=2, help="base field order")
    p.add_argument("--alpha", type=int, default=4)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--aphase", type=int, default=0)
    p.add_argument("--nprime", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, "json")
    p.set_defaults(func=cmd_vector)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, QlncError, ValueError) as exc:
        print(f"qlnc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
