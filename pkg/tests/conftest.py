from __future__ import annotations

import random

from hypothesis import HealthCheck, settings

from qlnc.gf import FieldCtx
from qlnc.linalg import Mat, sample_invertible
from qlnc.network import NetworkSpec, NodeOp

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_network(rng: random.Random, ctx: FieldCtx, max_pairs: int = 3, max_m: int = 8,
                   max_nodes: int = 6) -> NetworkSpec:
    """Random pairs, random invertible nodes on random wire subsets."""
    r = rng.randint(1, max_pairs)
    sizes = [1] * r
    for _ in range(rng.randint(0, max_m - r)):
        sizes[rng.randrange(r)] += 1
    m = sum(sizes)
    nodes = []
    for _ in range(rng.randint(0, max_nodes)):
        k = rng.randint(1, m)
        wires = tuple(rng.sample(range(m), k))
        nodes.append(NodeOp(wires, sample_invertible(ctx.base, k, rng)))
    return NetworkSpec(ctx, tuple(sizes), tuple(nodes))


def random_mat(F, r, c, rng):
    return Mat.random(F, r, c, rng)
