"""Theorem-level checkers that emit replayable certificates.

Every certificate is a plain record ``{kind, inputs, steps, scalars}``.
:func:`replay` re-derives the evidence from the raw conditional tables
of the models, without going through the search or marginal code that
produced it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping

from .numerics import Scalar, format_scalar, parse_scalar, total, unit
from .ontological import (
    Bijection,
    Ontic,
    OntModel,
    check_ontological_time_reverse,
    format_ontic,
    ontic_label,
    ontic_marginal,
    preparation_marginal,
    bayesian_inversion,
    time_reverse_search,
)
from .operational import Experiment, check_no_signalling, check_time_reverse_pair

VIOLATION_EXHAUSTIVE = "ViolationExhaustive"
TIME_REVERSE_WITNESS = "TimeReverseWitness"
LEMMA_VERIFIED = "LemmaVerified"
LEMMA_STEP_FAILED = "LemmaStepFailed"
NONCONTEXTUAL = "Noncontextual"
CONTEXTUAL = "Contextual"
CHSH = "CHSH"

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not_applicable"


class TheoremError(ValueError):
    pass


class NotSelfReverse(TheoremError):
    pass


class PreconditionFailed(TheoremError):
    pass


class SignallingPreparation(TheoremError):
    pass


class NonBinaryOutcomes(TheoremError):
    pass


def _jsonable(v: Any) -> Any:
    if isinstance(v, Scalar):
        return format_scalar(v)
    if isinstance(v, tuple):
        return [_jsonable(c) for c in v]
    if isinstance(v, list):
        return [_jsonable(c) for c in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(c) for k, c in v.items()}
    return v


@dataclass(frozen=True)
class Step:
    name: str
    status: str
    witness: Mapping[str, Any] | None = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "status": self.status}
        if self.witness is not None:
            d["witness"] = _jsonable(dict(self.witness))
        return d


@dataclass(frozen=True)
class Certificate:
    kind: str
    inputs: tuple[str, ...]
    steps: tuple[Step, ...] = ()
    scalars: Mapping[str, Any] = field(default_factory=dict)

    def step(self, name: str) -> Step:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": list(self.inputs),
            "steps": [s.to_dict() for s in self.steps],
            "scalars": _jsonable(dict(self.scalars)),
        }


# -- marginals ---------------------------------------------------------


@dataclass(frozen=True)
class MarginalFunction:
    """``values[(key, x, y)]``: joint summed over outcomes and every ontic
    component the projector forgets."""

    keys: tuple[Hashable, ...]
    omega_x: tuple[str, ...]
    omega_y: tuple[str, ...]
    values: Mapping[tuple[Hashable, str, str], Scalar]

    def __call__(self, key, x: str, y: str) -> Scalar:
        return self.values[(key, x, y)]

    def x_dependence(self):
        """First ``(key, x1, x2, y)`` at which the value changes with x."""
        for k, y in itertools.product(self.keys, self.omega_y):
            x0 = self.omega_x[0]
            for x in self.omega_x[1:]:
                if self.values[(k, x, y)] != self.values[(k, x0, y)]:
                    return k, x0, x, y
        return None

    def y_dependence(self):
        for k, x in itertools.product(self.keys, self.omega_x):
            y0 = self.omega_y[0]
            for y in self.omega_y[1:]:
                if self.values[(k, x, y)] != self.values[(k, x, y0)]:
                    return k, x, y0, y
        return None


def marginal_g(m: OntModel, projector: Callable[[Ontic], Hashable] | None = None) -> MarginalFunction:
    projector = projector or (lambda lam: lam)
    e, j = m.experiment, m.joint_table
    keys: list = []
    for lam in m.lambda_:
        k = projector(lam)
        if k not in keys:
            keys.append(k)
    values = {}
    for k, x, y in itertools.product(keys, e.omega_x, e.omega_y):
        values[(k, x, y)] = total(
            (
                j[(a, b, lam, x, y)]
                for lam in m.lambda_
                if projector(lam) == k
                for a in e.omega_a
                for b in e.omega_b
            ),
            m.mode,
        )
    return MarginalFunction(tuple(keys), e.omega_x, e.omega_y, values)


def first_component(lam: Ontic) -> Hashable:
    """Projector ``[lam1, lam2] -> lam1`` for structured ontic states."""
    return lam[0] if isinstance(lam, tuple) else lam


# -- time symmetry -----------------------------------------------------


def _cell_dict(cell) -> dict:
    a, b, x, y = cell
    return {"a": a, "b": b, "x": x, "y": y}


def certify_time_symmetry_violation(
    m: OntModel, cap: int | None = None, projector: Callable | None = None
) -> Certificate:
    """Search every ``f`` that could make ``m`` its own ontological time reverse.

    An empty search result is an exhaustive refutation. Alongside it, the
    marginal argument is reported: if ``p(lam | x, y)`` moves with x for
    some lam, no ``f`` can work, because the partner's marginal never
    depends on its measurement input.
    """
    w = check_time_reverse_pair(m.experiment, m.experiment)
    if not w:
        raise NotSelfReverse(f"{m.name!r} is not its own operational time reverse: {w.describe()}")
    search = time_reverse_search(m, m, cap)

    steps = [Step("operational_self_reverse", PASS)]
    separating = [
        {
            "lambda": lam,
            "partner": lam2,
            "cell": _cell_dict(cell),
            "value": v1,
            "reversed_value": v2,
        }
        for (lam, lam2), (cell, v1, v2) in search.separating.items()
    ]
    steps.append(
        Step(
            "exhaustive_search",
            PASS,
            {
                "compatible": [
                    {"lambda": lam, "partners": list(search.compatible[lam])}
                    for lam in search.source
                ],
                "separating": separating,
                "satisfying": [list(f.images()) for f in search.bijections],
            },
        )
    )

    marg = _marginal_argument(m, w)
    steps.append(marg)
    scalars: dict[str, Any] = {
        "bijections_total": search.total,
        "bijections_refuted": search.refuted,
        "bijections_satisfying": len(search.bijections),
    }
    if projector is not None:
        g = marginal_g(m, projector)
        for (k, x, y), v in g.values.items():
            scalars[f"g[{format_ontic(k)},{x},{y}]"] = v
    kind = VIOLATION_EXHAUSTIVE if not search.bijections else TIME_REVERSE_WITNESS
    return Certificate(kind, (m.name,), tuple(steps), scalars)


def _marginal_argument(m: OntModel, w) -> Step:
    e = m.experiment
    dep = None
    for lam, y in itertools.product(m.lambda_, e.omega_y):
        x0 = e.omega_x[0]
        v0 = ontic_marginal(m, lam, x0, y)
        for x in e.omega_x[1:]:
            v = ontic_marginal(m, lam, x, y)
            if v != v0:
                dep = {"lambda": lam, "x1": x0, "x2": x, "y": y, "value1": v0, "value2": v}
                break
        if dep:
            break
    if dep is None:
        return Step("marginal_contradiction", NOT_APPLICABLE)
    # partner marginal p'(lam' | X' = y', Y' = x') must be free of x'
    for lam2 in m.lambda_:
        for yp in e.omega_x:
            vals = {ontic_marginal(m, lam2, yp, xp) for xp in e.omega_y}
            if len(vals) > 1:
                return Step("marginal_contradiction", NOT_APPLICABLE, dep)
    return Step("marginal_contradiction", PASS, dep)


# -- the independence lemma -------------------------------------------


def verify_lemma_viii2(m1: OntModel, m2: OntModel, f: Bijection) -> Certificate:
    """Replay the proof that an ontological time reverse forces the ontic
    state to be independent of both inputs.

    Steps: conditional independence from y for ``m1`` (via Bayesian
    inversion), the same for ``m2``, equality of the two ontic marginals
    under ``f``, and the resulting independence from x. A failing step
    carries its first counterexample.
    """
    ok = check_ontological_time_reverse(m1, m2, f)
    if not ok:
        a, b, lam, x, y = ok.cell
        raise PreconditionFailed(
            f"{m2.name!r} is not an ontological time reverse of {m1.name!r} under f: "
            f"p(a={a},b={b},lam={format_ontic(lam)}|x={x},y={y}) = {ok.expected} "
            f"but the partner gives {ok.actual}"
        )
    w = check_time_reverse_pair(m1.experiment, m2.experiment)
    e1 = m1.experiment
    steps = [Step("precondition_ontological_time_reverse", PASS)]

    inv1 = bayesian_inversion(m1)
    steps.append(_ci_step("ci1", m1, inv1))
    inv2 = bayesian_inversion(m2)
    steps.append(_ci_step("ci2", m2, inv2))

    ltr = None
    for lam, x, y in itertools.product(m1.lambda_, e1.omega_x, e1.omega_y):
        v1 = ontic_marginal(m1, lam, x, y)
        v2 = ontic_marginal(m2, f(lam), w.y_to_x[y], w.x_to_y[x])
        if v1 != v2:
            ltr = {"lambda": lam, "x": x, "y": y, "value": v1, "reversed_value": v2}
            break
    steps.append(Step("ltr", FAIL if ltr else PASS, ltr))

    mi = None
    p_lambda = {}
    for lam in m1.lambda_:
        ref = inv1.prior[(lam, e1.omega_x[0])]
        p_lambda[lam] = ref
        for x in e1.omega_x[1:]:
            if inv1.prior[(lam, x)] != ref:
                mi = {"lambda": lam, "x1": e1.omega_x[0], "x2": x,
                      "value1": ref, "value2": inv1.prior[(lam, x)]}
                break
        if mi:
            break
        for x, y in itertools.product(e1.omega_x, e1.omega_y):
            if ontic_marginal(m1, lam, x, y) != ref:
                mi = {"lambda": lam, "x": x, "y": y, "value": ontic_marginal(m1, lam, x, y),
                      "p_lambda": ref}
                break
        if mi:
            break
    steps.append(Step("mi", FAIL if mi else PASS, mi))

    all_pass = all(s.status == PASS for s in steps)
    scalars = {f"p_lambda[{format_ontic(lam)}]": v for lam, v in p_lambda.items()} if not mi else {}
    kind = LEMMA_VERIFIED if all_pass else LEMMA_STEP_FAILED
    return Certificate(
        kind, (m1.name, m2.name), tuple(steps), {"bijection": f.describe(), **scalars}
    )


def _ci_step(name: str, m: OntModel, inv) -> Step:
    """``p(lam | x, y)`` from the joint equals ``p(lam | x)`` from the
    preparation, and the inverted factorization matches the forward one."""
    e = m.experiment
    for lam, a, x in itertools.product(m.lambda_, e.omega_a, e.omega_x):
        post = inv.posterior[(a, lam, x)]
        if post is None:
            continue
        fwd = m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)]
        if post * inv.prior[(lam, x)] != fwd:
            return Step(name, FAIL, {"bayes_cell": {"a": a, "lambda": lam, "x": x}})
    for lam, x, y in itertools.product(m.lambda_, e.omega_x, e.omega_y):
        v = ontic_marginal(m, lam, x, y)
        if v != inv.prior[(lam, x)]:
            return Step(name, FAIL, {"lambda": lam, "x": x, "y": y, "value": v,
                                     "prep_marginal": inv.prior[(lam, x)]})
    return Step(name, PASS)


# -- preparation noncontextuality -------------------------------------


def check_preparation_noncontextuality(m: OntModel) -> Certificate:
    """Is the outcome-averaged ontic distribution the same for every input x?"""
    ns = check_no_signalling(m.experiment)
    if not ns.to_past:
        b, y, x1, x2 = ns.past_witness
        raise SignallingPreparation(
            f"{m.name!r} signals to the past: p(b={b}|x,y={y}) differs at x={x1} and x={x2}"
        )
    e = m.experiment
    for lam in m.lambda_:
        ref = preparation_marginal(m, lam, e.omega_x[0])
        for x in e.omega_x[1:]:
            v = preparation_marginal(m, lam, x)
            if v != ref:
                wit = {"lambda": lam, "x1": e.omega_x[0], "x2": x, "value1": ref, "value2": v}
                return Certificate(
                    CONTEXTUAL, (m.name,), (Step("preparation_marginal_varies", PASS, wit),)
                )
    scalars = {
        f"p_lambda[{format_ontic(lam)}]": preparation_marginal(m, lam, e.omega_x[0])
        for lam in m.lambda_
    }
    return Certificate(
        NONCONTEXTUAL, (m.name,), (Step("preparation_marginal_constant", PASS),), scalars
    )


# -- CHSH --------------------------------------------------------------


def correlator(e: Experiment, x: str, y: str, values: Mapping[str, int] | None = None) -> Scalar:
    """``E(x, y) = sum_{a,b} ab p(a, b | x, y)``."""
    values = values or _binary_values(e)
    return total(
        (e.table[(a, b, x, y)] * (values[a] * values[b]) for a in e.omega_a for b in e.omega_b),
        e.mode,
    )


def _binary_values(e: Experiment) -> dict[str, int]:
    if set(e.omega_a) != {"+1", "-1"} or set(e.omega_b) != {"+1", "-1"}:
        raise NonBinaryOutcomes(
            f"CHSH needs outcomes {{+1, -1}}, got {list(e.omega_a)} and {list(e.omega_b)}"
        )
    return {"+1": 1, "-1": -1}


def chsh_value(
    e: Experiment, x0: str, x1: str, y0: str, y1: str, values: Mapping[str, int] | None = None
) -> Scalar:
    """``E(x0,y0) + E(x0,y1) + E(x1,y0) - E(x1,y1)``; local models stay within 2.

    ``values`` assigns +-1 to outcome labels when they are not already
    ``"+1"``/``"-1"``.
    """
    if values is not None:
        if set(values.values()) - {1, -1} or not set(e.omega_a) | set(e.omega_b) <= set(values):
            raise NonBinaryOutcomes("outcome values must map every outcome to +1 or -1")
    for s, omega in ((x0, e.omega_x), (x1, e.omega_x), (y0, e.omega_y), (y1, e.omega_y)):
        if s not in omega:
            raise KeyError(f"unknown setting {s!r}")
    E = lambda x, y: correlator(e, x, y, values)  # noqa: E731
    return E(x0, y0) + E(x0, y1) + E(x1, y0) - E(x1, y1)


def certify_chsh(e: Experiment, x0: str, x1: str, y0: str, y1: str, values=None) -> Certificate:
    s = chsh_value(e, x0, x1, y0, y1, values)
    two = unit(e.mode) * 2
    exceeds = s > two or s < -two
    scalars = {
        "E[x0,y0]": correlator(e, x0, y0, values),
        "E[x0,y1]": correlator(e, x0, y1, values),
        "E[x1,y0]": correlator(e, x1, y0, values),
        "E[x1,y1]": correlator(e, x1, y1, values),
        "chsh": s,
        "exceeds_local_bound": exceeds,
    }
    wit: dict[str, Any] = {"x0": x0, "x1": x1, "y0": y0, "y1": y1}
    if values is not None:
        wit["values"] = dict(values)
    step = Step("settings", PASS, wit)
    return Certificate(CHSH, (e.name,), (step,), scalars)


# -- replay ------------------------------------------------------------


def _raw_joint(m: OntModel, a, b, lam, x, y) -> Scalar:
    return m.meas[(b, lam, y)] * m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)]


def _positional_maps(e1: Experiment, e2: Experiment):
    return (
        dict(zip(e1.omega_a, e2.omega_b)),
        dict(zip(e1.omega_b, e2.omega_a)),
        dict(zip(e1.omega_x, e2.omega_y)),
        dict(zip(e1.omega_y, e2.omega_x)),
    )


def _scalar(v, mode):
    return parse_scalar(v, mode) if isinstance(v, str) else v


def replay(cert: Certificate | Mapping, m1: OntModel | Experiment, m2: OntModel | None = None) -> bool:
    """Re-check a certificate's evidence against the raw model tables.

    Returns True when every recorded witness holds and, for exhaustive
    refutations, when brute-force enumeration of all bijections confirms
    that each one sends some state to a recorded incompatible partner.
    """
    d = cert.to_dict() if isinstance(cert, Certificate) else cert
    kind = d["kind"]
    steps = {s["name"]: s for s in d["steps"]}

    if kind == CHSH:
        e = m1 if isinstance(m1, Experiment) else m1.experiment
        st = steps["settings"]["witness"]
        values = st.get("values")
        s = chsh_value(e, st["x0"], st["x1"], st["y0"], st["y1"], values)
        return format_scalar(s) == d["scalars"]["chsh"]

    assert isinstance(m1, OntModel)
    mode = m1.mode
    if kind in (VIOLATION_EXHAUSTIVE, TIME_REVERSE_WITNESS):
        partner = m2 or m1
        a_to_b, b_to_a, x_to_y, y_to_x = _positional_maps(m1.experiment, partner.experiment)
        ev = steps["exhaustive_search"]["witness"]
        bad_pairs = set()
        for rec in ev["separating"]:
            lam, lam2 = ontic_label(rec["lambda"]), ontic_label(rec["partner"])
            c = rec["cell"]
            v1 = _raw_joint(m1, c["a"], c["b"], lam, c["x"], c["y"])
            v2 = _raw_joint(
                partner, b_to_a[c["b"]], a_to_b[c["a"]], lam2, y_to_x[c["y"]], x_to_y[c["x"]]
            )
            if v1 == v2 or v1 != _scalar(rec["value"], mode) or v2 != _scalar(rec["reversed_value"], mode):
                return False
            bad_pairs.add((lam, lam2))
        satisfying = []
        count = 0
        for perm in itertools.permutations(partner.lambda_):
            count += 1
            if not any((lam, t) in bad_pairs for lam, t in zip(m1.lambda_, perm)):
                satisfying.append(perm)
        if count != d["scalars"]["bijections_total"]:
            return False
        recorded = [tuple(ontic_label(v) for v in imgs) for imgs in ev["satisfying"]]
        if kind == VIOLATION_EXHAUSTIVE:
            return not satisfying and not recorded
        # each recorded witness must satisfy the full condition cell by cell
        for imgs in recorded:
            f = dict(zip(m1.lambda_, imgs))
            for a, b, x, y in m1.experiment.cells():
                for lam in m1.lambda_:
                    if _raw_joint(m1, a, b, lam, x, y) != _raw_joint(
                        partner, b_to_a[b], a_to_b[a], f[lam], y_to_x[y], x_to_y[x]
                    ):
                        return False
        return bool(recorded) and set(recorded) <= set(satisfying)

    e = m1.experiment
    if kind == CONTEXTUAL:
        w = steps["preparation_marginal_varies"]["witness"]
        lam = ontic_label(w["lambda"])
        v1 = total((m1.prep_ontic[(lam, a, w["x1"])] * m1.prep_out[(a, w["x1"])] for a in e.omega_a), mode)
        v2 = total((m1.prep_ontic[(lam, a, w["x2"])] * m1.prep_out[(a, w["x2"])] for a in e.omega_a), mode)
        return v1 != v2 and format_scalar(v1) == w["value1"] and format_scalar(v2) == w["value2"]

    if kind == NONCONTEXTUAL:
        for lam in m1.lambda_:
            vals = {
                total((m1.prep_ontic[(lam, a, x)] * m1.prep_out[(a, x)] for a in e.omega_a), mode)
                for x in e.omega_x
            }
            if len(vals) != 1:
                return False
            if format_scalar(vals.pop()) != d["scalars"][f"p_lambda[{format_ontic(lam)}]"]:
                return False
        return True

    if kind == LEMMA_VERIFIED:
        if m2 is None:
            raise ValueError("lemma certificates replay against both models")
        for lam in m1.lambda_:
            want = d["scalars"][f"p_lambda[{format_ontic(lam)}]"]
            for x, y in itertools.product(e.omega_x, e.omega_y):
                got = total(
                    (_raw_joint(m1, a, b, lam, x, y) for a in e.omega_a for b in e.omega_b), mode
                )
                if format_scalar(got) != want:
                    return False
        return True

    raise ValueError(f"cannot replay certificate kind {kind!r}")

