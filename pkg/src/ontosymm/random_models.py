"""Seeded generators of random rational models, for property tests.

Distributions are drawn as small integer weights normalized to sum to
one, so tables are exact and zero cells occur often enough to exercise
the undefined-conditional paths.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .numerics import Scalar
from .ontological import Bijection, OntModel, model_from_tables


def random_distribution(rng: random.Random, n: int, max_weight: int = 4) -> list[Scalar]:
    while True:
        w = [rng.randint(0, max_weight) for _ in range(n)]
        s = sum(w)
        if s:
            return [Scalar.exact(Fraction(v, s)) for v in w]


def _labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def random_sizes(rng: random.Random, max_omega: int = 4, max_lambda: int = 6) -> dict[str, int]:
    return {
        "a": rng.randint(1, max_omega),
        "b": rng.randint(1, max_omega),
        "x": rng.randint(1, max_omega),
        "y": rng.randint(1, max_omega),
        "lambda": rng.randint(1, max_lambda),
    }


def random_ont_model(
    rng: random.Random, max_omega: int = 4, max_lambda: int = 6, name: str = "random"
) -> OntModel:
    """An arbitrary valid model; its experiment is whatever it predicts."""
    n = random_sizes(rng, max_omega, max_lambda)
    oa, ob, ox, oy = (_labels(k, n[k]) for k in "abxy")
    lam = _labels("l", n["lambda"])
    prep_out = {}
    for x in ox:
        prep_out.update(zip(((a, x) for a in oa), random_distribution(rng, len(oa))))
    prep_ontic = {}
    for a, x in itertools.product(oa, ox):
        prep_ontic.update(zip(((l, a, x) for l in lam), random_distribution(rng, len(lam))))
    meas = {}
    for l, y in itertools.product(lam, oy):
        meas.update(zip(((b, l, y) for b in ob), random_distribution(rng, len(ob))))
    return model_from_tables(name, oa, ob, ox, oy, lam, prep_out, prep_ontic, meas)


def random_reversible_model(
    rng: random.Random, max_omega: int = 4, max_lambda: int = 6, name: str = "reversible"
) -> OntModel:
    """A valid model that admits an ontological time reverse.

    The joint is built as ``p(lam) p(a | lam, x) p(b | lam, y)`` and then
    factored into preparation tables, so the ontic state is independent
    of x once a is averaged out.
    """
    n = random_sizes(rng, max_omega, max_lambda)
    oa, ob, ox, oy = (_labels(k, n[k]) for k in "abxy")
    lam = _labels("l", n["lambda"])
    p_lam = dict(zip(lam, random_distribution(rng, len(lam))))
    resp_a = {}
    for l, x in itertools.product(lam, ox):
        resp_a.update(zip(((a, l, x) for a in oa), random_distribution(rng, len(oa))))
    meas = {}
    for l, y in itertools.product(lam, oy):
        meas.update(zip(((b, l, y) for b in ob), random_distribution(rng, len(ob))))

    prep_out, prep_ontic = {}, {}
    for a, x in itertools.product(oa, ox):
        pa = sum((p_lam[l] * resp_a[(a, l, x)] for l in lam), Scalar.exact(0))
        prep_out[(a, x)] = pa
        for l in lam:
            if pa.is_zero():
                prep_ontic[(l, a, x)] = Scalar.exact(Fraction(1, len(lam)))
            else:
                prep_ontic[(l, a, x)] = p_lam[l] * resp_a[(a, l, x)] / pa
    return model_from_tables(name, oa, ob, ox, oy, lam, prep_out, prep_ontic, meas)


def random_bijection(rng: random.Random, source, target_prefix: str = "r") -> Bijection:
    """Random bijection onto freshly named states."""
    src = tuple(source)
    targets = [f"{target_prefix}{i}" for i in range(len(src))]
    rng.shuffle(targets)
    return Bijection(src, tuple(sorted(targets)), dict(zip(src, targets)))
