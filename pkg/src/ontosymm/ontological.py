"""Finite ontological models and ontological time reversal.

A model factors every experiment through an ontic variable::

    p(a, b, lam | x, y) = meas(b | lam, y) * prep_ontic(lam | a, x) * prep_out(a | x)

The measurement table is keyed by ``(b, lam, y)`` only, so it cannot
depend on the preparation side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .numerics import Scalar, total, unit
from .operational import (
    Experiment,
    OperationalError,
    SpaceTooLarge,
    check_time_reverse_pair,
    time_reversed,
)

Ontic = Hashable  # str, or a tuple of str for structured states
JointCell = tuple[str, str, Ontic, str, str]  # (a, b, lam, x, y)

DEFAULT_CAP = 10


class OntologicalError(ValueError):
    pass


class DomainMismatch(OntologicalError):
    pass


class ExperimentsNotOperationalReverses(OntologicalError):
    pass


class NoOntologicalReverse(OntologicalError):
    """The swapped joint distribution does not factor as an ontological model."""


def ontic_label(v) -> Ontic:
    if isinstance(v, (list, tuple)):
        return tuple(str(c) for c in v)
    return str(v)


def ontic_space(labels: Iterable) -> tuple[Ontic, ...]:
    out = tuple(ontic_label(v) for v in labels)
    if not out:
        raise OntologicalError("ontic space must be nonempty")
    if len(set(out)) != len(out):
        raise OntologicalError(f"duplicate ontic states in {list(out)}")
    return out


def format_ontic(lam: Ontic) -> str:
    if isinstance(lam, tuple):
        return "[" + ",".join(lam) + "]"
    return str(lam)


@dataclass(frozen=True)
class OntModel:
    experiment: Experiment
    lambda_: tuple[Ontic, ...]
    prep_out: Mapping[tuple[str, str], Scalar]  # (a, x)
    prep_ontic: Mapping[tuple[Ontic, str, str], Scalar]  # (lam, a, x)
    meas: Mapping[tuple[str, Ontic, str], Scalar]  # (b, lam, y)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_", ontic_space(self.lambda_))
        e = self.experiment
        required = {
            "prep_out": set(itertools.product(e.omega_a, e.omega_x)),
            "prep_ontic": set(itertools.product(self.lambda_, e.omega_a, e.omega_x)),
            "meas": set(itertools.product(e.omega_b, self.lambda_, e.omega_y)),
        }
        for name, keys in required.items():
            tab = dict(getattr(self, name))
            missing = keys - set(tab)
            if missing:
                raise OntologicalError(f"{name} is missing cell {sorted(missing, key=str)[0]}")
            extra = set(tab) - keys
            if extra:
                raise OntologicalError(f"{name} has unknown cell {sorted(extra, key=str)[0]}")
            if {v.mode for v in tab.values()} != {e.mode}:
                raise OntologicalError(f"{name} entries must share the experiment's mode")
            object.__setattr__(self, name, tab)

    @property
    def name(self) -> str:
        return self.experiment.name

    @property
    def mode(self) -> str:
        return self.experiment.mode

    @cached_property
    def joint_table(self) -> dict[JointCell, Scalar]:
        e = self.experiment
        out = {}
        for a, x in itertools.product(e.omega_a, e.omega_x):
            pa = self.prep_out[(a, x)]
            for lam in self.lambda_:
                w = self.prep_ontic[(lam, a, x)] * pa
                for b, y in itertools.product(e.omega_b, e.omega_y):
                    out[(a, b, lam, x, y)] = self.meas[(b, lam, y)] * w
        return out

    def to_float(self) -> OntModel:
        return OntModel(
            self.experiment.to_float(),
            self.lambda_,
            {k: v.to_float() for k, v in self.prep_out.items()},
            {k: v.to_float() for k, v in self.prep_ontic.items()},
            {k: v.to_float() for k, v in self.meas.items()},
        )


@dataclass(frozen=True)
class ModelReport:
    ok: bool
    problems: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_model(m: OntModel) -> ModelReport:
    """Range and normalization of the three conditional tables."""
    e, one = m.experiment, unit(m.mode)
    problems = []
    for name in ("prep_out", "prep_ontic", "meas"):
        for k, v in getattr(m, name).items():
            if v < 0 or v > one:
                problems.append(f"{name}{k} = {v} outside [0, 1]")
    for x in e.omega_x:
        s = total((m.prep_out[(a, x)] for a in e.omega_a), m.mode)
        if s != one:
            problems.append(f"prep_out(.|x={x}) sums to {s}")
    for a, x in itertools.product(e.omega_a, e.omega_x):
        s = total((m.prep_ontic[(lam, a, x)] for lam in m.lambda_), m.mode)
        if s != one:
            problems.append(f"prep_ontic(.|a={a},x={x}) sums to {s}")
    for lam, y in itertools.product(m.lambda_, e.omega_y):
        s = total((m.meas[(b, lam, y)] for b in e.omega_b), m.mode)
        if s != one:
            problems.append(f"meas(.|lam={format_ontic(lam)},y={y}) sums to {s}")
    return ModelReport(not problems, tuple(problems))


def joint(m: OntModel) -> dict[JointCell, Scalar]:
    return m.joint_table


def ontic_marginal(m: OntModel, lam: Ontic, x: str, y: str) -> Scalar:
    """``p(lam | x, y)``: the joint summed over both outcomes."""
    e, j = m.experiment, m.joint_table
    return total((j[(a, b, lam, x, y)] for a in e.omega_a for b in e.omega_b), m.mode)


def preparation_marginal(m: OntModel, lam: Ontic, x: str) -> Scalar:
    """``p(lam | x)`` read off the preparation tables alone."""
    e = m.experiment
    return total(
        (m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)] for a in e.omega_a), m.mode
    )


@dataclass(frozen=True)
class CellCheck:
    ok: bool
    cell: tuple | None = None
    expected: Scalar | None = None
    actual: Scalar | None = None

    def __bool__(self) -> bool:
        return self.ok


def reproduces(m: OntModel) -> CellCheck:
    """Does summing the joint over lam give back the operational table?"""
    e, j = m.experiment, m.joint_table
    for a, b, x, y in e.cells():
        s = total((j[(a, b, lam, x, y)] for lam in m.lambda_), m.mode)
        if s != e.table[(a, b, x, y)]:
            return CellCheck(False, (a, b, x, y), e.table[(a, b, x, y)], s)
    return CellCheck(True)


@dataclass(frozen=True)
class Bijection:
    """One-to-one map between two ontic spaces of equal size."""

    source: tuple[Ontic, ...]
    target: tuple[Ontic, ...]
    mapping: Mapping[Ontic, Ontic] = field(compare=False, hash=False)

    def __post_init__(self) -> None:
        src, dst = ontic_space(self.source), ontic_space(self.target)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", dst)
        mp = {ontic_label(k): ontic_label(v) for k, v in dict(self.mapping).items()}
        if len(src) != len(dst):
            raise DomainMismatch(f"|source| = {len(src)} but |target| = {len(dst)}")
        if set(mp) != set(src):
            raise DomainMismatch("bijection must be defined on exactly the source space")
        if len(set(mp.values())) != len(dst) or set(mp.values()) != set(dst):
            raise DomainMismatch("bijection must hit every target state exactly once")
        object.__setattr__(self, "mapping", mp)

    @classmethod
    def identity(cls, space: Sequence) -> Bijection:
        return cls(tuple(space), tuple(space), {s: s for s in ontic_space(space)})

    @classmethod
    def from_images(cls, source: Sequence, target: Sequence, images: Sequence) -> Bijection:
        return cls(tuple(source), tuple(target), dict(zip(ontic_space(source), images)))

    def __call__(self, lam: Ontic) -> Ontic:
        return self.mapping[lam]

    def images(self) -> tuple[Ontic, ...]:
        """Images of the source states, in source order."""
        return tuple(self.mapping[s] for s in self.source)

    def target_indices(self) -> tuple[int, ...]:
        pos = {t: i for i, t in enumerate(self.target)}
        return tuple(pos[v] for v in self.images())

    def inverse(self) -> Bijection:
        return Bijection(self.target, self.source, {v: k for k, v in self.mapping.items()})

    def compose(self, other: Bijection) -> Bijection:
        """``self after other``."""
        if set(other.target) != set(self.source):
            raise DomainMismatch("cannot compose: spaces do not line up")
        return Bijection(other.source, self.target, {k: self(v) for k, v in other.mapping.items()})

    def is_identity(self) -> bool:
        return all(k == v for k, v in self.mapping.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bijection):
            return NotImplemented
        return set(self.source) == set(other.source) and self.mapping == other.mapping

    def __hash__(self) -> int:
        return hash(frozenset(self.mapping.items()))

    def describe(self) -> str:
        return ", ".join(f"{format_ontic(k)}->{format_ontic(v)}" for k, v in self.mapping.items())


def relabel(m: OntModel, f: Bijection) -> OntModel:
    """Push every lam-indexed table of ``m`` through ``f``."""
    if set(f.source) != set(m.lambda_):
        raise DomainMismatch("bijection source is not the model's ontic space")
    return OntModel(
        m.experiment,
        tuple(f(lam) for lam in m.lambda_),
        m.prep_out,
        {(f(lam), a, x): v for (lam, a, x), v in m.prep_ontic.items()},
        {(b, f(lam), y): v for (b, lam, y), v in m.meas.items()},
    )


def _reverse_maps(m1: OntModel, m2: OntModel):
    w = check_time_reverse_pair(m1.experiment, m2.experiment)
    if not w:
        raise ExperimentsNotOperationalReverses(
            f"{m2.name!r} is not an operational time reverse of {m1.name!r}: {w.describe()}"
        )
    return w


def _slice_mismatch(m1: OntModel, m2: OntModel, w, lam: Ontic, lam2: Ontic):
    """First cell where lam's slice of m1 and lam2's reversed slice of m2 differ."""
    e1, j1, j2 = m1.experiment, m1.joint_table, m2.joint_table
    for a, b, x, y in e1.cells():
        v1 = j1[(a, b, lam, x, y)]
        v2 = j2[(w.b_to_a[b], w.a_to_b[a], lam2, w.y_to_x[y], w.x_to_y[x])]
        if v1 != v2:
            return (a, b, x, y), v1, v2
    return None


def check_ontological_time_reverse(m1: OntModel, m2: OntModel, f: Bijection) -> CellCheck:
    """Is ``p1(a, b, lam | x, y) == p2(b, a, f[lam] | y, x)`` everywhere?

    A failing result carries the cell as ``(a, b, lam, x, y)``.
    """
    w = _reverse_maps(m1, m2)
    if set(f.source) != set(m1.lambda_) or set(f.target) != set(m2.lambda_):
        raise DomainMismatch("bijection does not map m1's ontic space onto m2's")
    for lam in m1.lambda_:
        bad = _slice_mismatch(m1, m2, w, lam, f(lam))
        if bad:
            (a, b, x, y), v1, v2 = bad
            return CellCheck(False, (a, b, lam, x, y), v1, v2)
    return CellCheck(True)


@dataclass(frozen=True)
class ReverseSearch:
    """Outcome of an exhaustive search for ontological time-reverse maps.

    ``compatible[lam]`` lists the partner states whose reversed slice
    equals lam's slice; ``separating[(lam, lam2)]`` holds a cell
    ``(a, b, x, y)`` proving the pair incompatible. Every bijection must
    send each lam into its compatible set, so ``bijections`` is complete.
    """

    source: tuple[Ontic, ...]
    target: tuple[Ontic, ...]
    compatible: Mapping[Ontic, tuple[Ontic, ...]]
    separating: Mapping[tuple[Ontic, Ontic], tuple[tuple[str, str, str, str], Scalar, Scalar]]
    bijections: tuple[Bijection, ...]

    @property
    def total(self) -> int:
        if len(self.source) != len(self.target):
            return 0
        return math.factorial(len(self.source))

    @property
    def refuted(self) -> int:
        return self.total - len(self.bijections)


def _cap_from(cap: int | None) -> int:
    return DEFAULT_CAP if cap is None else cap


def time_reverse_search(m1: OntModel, m2: OntModel, cap: int | None = None) -> ReverseSearch:
    cap = _cap_from(cap)
    w = _reverse_maps(m1, m2)
    n = len(m1.lambda_)
    if max(n, len(m2.lambda_)) > cap:
        raise SpaceTooLarge(f"|Lambda| = {max(n, len(m2.lambda_))} exceeds cap {cap}")
    compatible: dict[Ontic, tuple[Ontic, ...]] = {}
    separating = {}
    for lam in m1.lambda_:
        ok = []
        for lam2 in m2.lambda_:
            bad = _slice_mismatch(m1, m2, w, lam, lam2)
            if bad is None:
                ok.append(lam2)
            else:
                separating[(lam, lam2)] = bad
        compatible[lam] = tuple(ok)

    found: list[Bijection] = []
    if n == len(m2.lambda_):
        # lexicographic in target positions, matching itertools.permutations order
        order = {t: i for i, t in enumerate(m2.lambda_)}
        choices = [sorted(compatible[lam], key=order.__getitem__) for lam in m1.lambda_]

        def extend(i: int, used: set, images: list) -> None:
            if i == n:
                found.append(Bijection.from_images(m1.lambda_, m2.lambda_, images))
                return
            for t in choices[i]:
                if t not in used:
                    used.add(t)
                    images.append(t)
                    extend(i + 1, used, images)
                    images.pop()
                    used.discard(t)

        extend(0, set(), [])
    return ReverseSearch(m1.lambda_, m2.lambda_, compatible, separating, tuple(found))


def search_time_reverse_bijection(
    m1: OntModel, m2: OntModel, cap: int | None = None
) -> list[Bijection]:
    """Every ``f`` making ``m2`` an ontological time reverse of ``m1``.

    An empty list is an exhaustive refutation over all |Lambda|! maps.
    """
    return list(time_reverse_search(m1, m2, cap).bijections)


def iter_all_bijections(source: Sequence, target: Sequence) -> Iterable[Bijection]:
    """Plain enumeration of every bijection, in lexicographic order."""
    src, dst = ontic_space(source), ontic_space(target)
    if len(src) != len(dst):
        return
    for perm in itertools.permutations(dst):
        yield Bijection.from_images(src, dst, perm)


@dataclass(frozen=True)
class BayesianInversion:
    """``prior[(lam, x)] = p(lam | x)``; ``posterior[(a, lam, x)] = p(a | lam, x)``.

    Posterior entries are ``None`` where ``p(lam | x) = 0``.
    """

    prior: Mapping[tuple[Ontic, str], Scalar]
    posterior: Mapping[tuple[str, Ontic, str], Scalar | None]


def bayesian_inversion(m: OntModel) -> BayesianInversion:
    e = m.experiment
    prior = {}
    posterior: dict = {}
    for lam, x in itertools.product(m.lambda_, e.omega_x):
        px = preparation_marginal(m, lam, x)
        prior[(lam, x)] = px
        for a in e.omega_a:
            if px.is_zero():
                posterior[(a, lam, x)] = None
            else:
                posterior[(a, lam, x)] = m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)] / px
    return BayesianInversion(prior, posterior)


def swap_and_relabel(m: OntModel, f: Bijection | None = None, name: str | None = None) -> OntModel:
    """Build an ontological time reverse of ``m`` whose ontic space is ``f[Lambda]``.

    The partner's joint is ``p'(b, a, f[lam] | y, x) = p(a, b, lam | x, y)``,
    factored back into preparation and measurement tables. Raises
    :class:`NoOntologicalReverse` when that factorization does not exist,
    which is the case for any model whose ontic state carries information
    about the preparation input.
    """
    f = f or Bijection.identity(m.lambda_)
    if set(f.source) != set(m.lambda_):
        raise DomainMismatch("bijection source is not the model's ontic space")
    e, j, mode = m.experiment, m.joint_table, m.mode
    e2 = time_reversed(e, name)
    x0 = e.omega_x[0]

    # partner preparation: input y, outcome b
    prep_out2 = {}
    weight = {}
    for b, y in itertools.product(e.omega_b, e.omega_y):
        for lam in m.lambda_:
            q = total((j[(a, b, lam, x0, y)] for a in e.omega_a), mode)
            for x in e.omega_x[1:]:
                qx = total((j[(a, b, lam, x, y)] for a in e.omega_a), mode)
                if qx != q:
                    raise NoOntologicalReverse(
                        f"p(b={b}, lam={format_ontic(lam)} | x, y={y}) depends on x "
                        f"({x0}: {q}, {x}: {qx})"
                    )
            weight[(b, lam, y)] = q
        prep_out2[(b, y)] = total((weight[(b, lam, y)] for lam in m.lambda_), mode)

    n_lam = len(m.lambda_)
    prep_ontic2 = {}
    for b, y in itertools.product(e.omega_b, e.omega_y):
        pb = prep_out2[(b, y)]
        for lam in m.lambda_:
            if pb.is_zero():
                prep_ontic2[(f(lam), b, y)] = unit(mode) / n_lam
            else:
                prep_ontic2[(f(lam), b, y)] = weight[(b, lam, y)] / pb

    # partner measurement: input x, outcome a, read from any (b, y) with weight
    meas2 = {}
    n_a = len(e.omega_a)
    for lam, x in itertools.product(m.lambda_, e.omega_x):
        response = None
        for b, y in itertools.product(e.omega_b, e.omega_y):
            q = weight[(b, lam, y)]
            if q.is_zero():
                continue
            cand = {a: j[(a, b, lam, x, y)] / q for a in e.omega_a}
            if response is None:
                response = cand
            elif cand != response:
                raise NoOntologicalReverse(
                    f"response to x={x} at lam={format_ontic(lam)} depends on (b, y)"
                )
        if response is None:
            response = {a: unit(mode) / n_a for a in e.omega_a}
        for a in e.omega_a:
            meas2[(a, f(lam), x)] = response[a]

    partner = OntModel(e2, tuple(f(lam) for lam in m.lambda_), prep_out2, prep_ontic2, meas2)
    check = check_ontological_time_reverse(m, partner, f)
    if not check:
        raise NoOntologicalReverse(
            f"factored partner disagrees at {check.cell}: {check.expected} vs {check.actual}"
        )
    return partner


def model_from_tables(
    experiment_name: str,
    omega_a: Sequence[str],
    omega_b: Sequence[str],
    omega_x: Sequence[str],
    omega_y: Sequence[str],
    lambda_: Sequence,
    prep_out: Mapping,
    prep_ontic: Mapping,
    meas: Mapping,
    directions_x=None,
    directions_y=None,
) -> OntModel:
    """Assemble a model whose experiment is the table the model predicts."""
    lam_space = ontic_space(lambda_)
    mode = next(iter(prep_out.values())).mode
    table = {}
    for a, b, x, y in itertools.product(omega_a, omega_b, omega_x, omega_y):
        pa = prep_out[(a, x)]
        table[(a, b, x, y)] = total(
            (meas[(b, lam, y)] * prep_ontic[(lam, a, x)] * pa for lam in lam_space), mode
        )
    e = Experiment(
        experiment_name, tuple(omega_a), tuple(omega_b), tuple(omega_x), tuple(omega_y),
        table, directions_x, directions_y,
    )
    return OntModel(e, lam_space, prep_out, prep_ontic, meas)


def with_experiment(m: OntModel, e: Experiment) -> OntModel:
    if (e.omega_a, e.omega_b, e.omega_x, e.omega_y) != (
        m.experiment.omega_a, m.experiment.omega_b, m.experiment.omega_x, m.experiment.omega_y
    ):
        raise OperationalError("replacement experiment has different label sets")
    return OntModel(e, m.lambda_, m.prep_out, m.prep_ontic, m.meas)

