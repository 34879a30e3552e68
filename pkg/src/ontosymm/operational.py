"""Prepare-and-measure experiments as finite probability tables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .numerics import EXACT, Direction, Scalar, total, unit

Cell = tuple[str, str, str, str]  # (a, b, x, y)

# Label-bijection search is brute force over four permutation groups.
LABEL_SEARCH_MAX = 6
LABEL_SEARCH_BUDGET = 2_000_000


class OperationalError(ValueError):
    pass


class CardinalityMismatch(OperationalError):
    """No identification of label sets exists between two experiments."""


class SpaceTooLarge(OperationalError):
    pass


def label_set(labels: Iterable) -> tuple[str, ...]:
    """Validate an ordered label set: nonempty, no duplicates."""
    out = tuple(str(v) for v in labels)
    if not out:
        raise OperationalError("label set must be nonempty")
    if len(set(out)) != len(out):
        raise OperationalError(f"duplicate labels in {list(out)}")
    return out


@dataclass(frozen=True)
class Experiment:
    """Operational table ``p(a, b | x, y)`` over four finite label sets.

    ``directions_x`` / ``directions_y`` optionally record which physical
    direction each setting label stands for; they never enter any check.
    """

    name: str
    omega_a: tuple[str, ...]
    omega_b: tuple[str, ...]
    omega_x: tuple[str, ...]
    omega_y: tuple[str, ...]
    table: Mapping[Cell, Scalar]
    directions_x: Mapping[str, Direction] | None = field(default=None, compare=False)
    directions_y: Mapping[str, Direction] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for attr in ("omega_a", "omega_b", "omega_x", "omega_y"):
            object.__setattr__(self, attr, label_set(getattr(self, attr)))
        table = dict(self.table)
        missing = [c for c in self.cells() if c not in table]
        if missing:
            raise OperationalError(f"table of {self.name!r} is missing cell {missing[0]}")
        extra = set(table) - set(self.cells())
        if extra:
            raise OperationalError(f"table of {self.name!r} has unknown cell {sorted(extra)[0]}")
        modes = {v.mode for v in table.values()}
        if len(modes) > 1:
            raise OperationalError(f"table of {self.name!r} mixes exact and float entries")
        object.__setattr__(self, "table", table)

    @property
    def mode(self) -> str:
        return next(iter(self.table.values())).mode

    def cells(self) -> Iterable[Cell]:
        return itertools.product(self.omega_a, self.omega_b, self.omega_x, self.omega_y)

    def p(self, a: str, b: str, x: str, y: str) -> Scalar:
        return self.table[(a, b, x, y)]

    def to_float(self) -> Experiment:
        return Experiment(
            self.name,
            self.omega_a,
            self.omega_b,
            self.omega_x,
            self.omega_y,
            {c: v.to_float() for c, v in self.table.items()},
            _float_dirs(self.directions_x),
            _float_dirs(self.directions_y),
        )

    def renamed(self, name: str) -> Experiment:
        return Experiment(
            name, self.omega_a, self.omega_b, self.omega_x, self.omega_y, self.table,
            self.directions_x, self.directions_y,
        )


def _float_dirs(dirs):
    if dirs is None:
        return None
    return {k: d.to_float() for k, d in dirs.items()}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    out_of_range: tuple[Cell, ...] = ()
    unnormalized: tuple[tuple[tuple[str, str], Scalar], ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        parts = [f"entry outside [0, 1] at (a,b,x,y)={c}" for c in self.out_of_range]
        parts += [f"column (x,y)={xy} sums to {s}" for xy, s in self.unnormalized]
        return "; ".join(parts)


def validate(e: Experiment) -> ValidationReport:
    """Check every entry is in [0, 1] and every (x, y) column sums to one."""
    one = unit(e.mode)
    bad_range = tuple(c for c in e.cells() if e.table[c] < 0 or e.table[c] > one)
    bad_sums = []
    for x, y in itertools.product(e.omega_x, e.omega_y):
        s = total((e.table[(a, b, x, y)] for a in e.omega_a for b in e.omega_b), e.mode)
        if s != one:
            bad_sums.append(((x, y), s))
    return ValidationReport(not bad_range and not bad_sums, bad_range, tuple(bad_sums))


def marginal_b(e: Experiment, b: str, x: str, y: str) -> Scalar:
    return total((e.table[(a, b, x, y)] for a in e.omega_a), e.mode)


def marginal_a(e: Experiment, a: str, x: str, y: str) -> Scalar:
    return total((e.table[(a, b, x, y)] for b in e.omega_b), e.mode)


@dataclass(frozen=True)
class NoSignallingReport:
    """``to_past`` means B's marginal ignores x; ``to_future`` means A's ignores y.

    Witnesses are ``(outcome, setting, setting1, setting2)`` tuples: for
    ``past_witness`` that is ``(b, y, x1, x2)``; for ``future_witness``
    ``(a, x, y1, y2)``.
    """

    to_past: bool
    to_future: bool
    past_witness: tuple[str, str, str, str] | None = None
    future_witness: tuple[str, str, str, str] | None = None


def check_no_signalling(e: Experiment) -> NoSignallingReport:
    past = None
    for b, y in itertools.product(e.omega_b, e.omega_y):
        ref = marginal_b(e, b, e.omega_x[0], y)
        for x in e.omega_x[1:]:
            if marginal_b(e, b, x, y) != ref:
                past = (b, y, e.omega_x[0], x)
                break
        if past:
            break
    future = None
    for a, x in itertools.product(e.omega_a, e.omega_x):
        ref = marginal_a(e, a, x, e.omega_y[0])
        for y in e.omega_y[1:]:
            if marginal_a(e, a, x, y) != ref:
                future = (a, x, e.omega_y[0], y)
                break
        if future:
            break
    return NoSignallingReport(past is None, future is None, past, future)


@dataclass(frozen=True)
class TimeReverseWitness:
    """Identification of labels under which ``e2`` is the time reverse of ``e1``.

    ``a_to_b`` maps each outcome of e1's preparation to the corresponding
    outcome of e2's measurement, and so on for the other three sets.
    """

    partner: str
    a_to_b: Mapping[str, str]
    b_to_a: Mapping[str, str]
    x_to_y: Mapping[str, str]
    y_to_x: Mapping[str, str]
    self_reverse: bool

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class TimeReverseMismatch:
    partner: str
    cell: Cell
    value: Scalar
    reversed_value: Scalar

    def __bool__(self) -> bool:
        return False

    def describe(self) -> str:
        a, b, x, y = self.cell
        return (
            f"p(a={a},b={b}|x={x},y={y}) = {self.value} but the reversed cell of "
            f"{self.partner!r} has {self.reversed_value}"
        )


def _positional(src: tuple[str, ...], dst: tuple[str, ...]) -> dict[str, str]:
    return dict(zip(src, dst))


def _check_cardinalities(e1: Experiment, e2: Experiment) -> None:
    pairs = [
        ("A", len(e1.omega_a), "B'", len(e2.omega_b)),
        ("B", len(e1.omega_b), "A'", len(e2.omega_a)),
        ("X", len(e1.omega_x), "Y'", len(e2.omega_y)),
        ("Y", len(e1.omega_y), "X'", len(e2.omega_x)),
    ]
    for n1, k1, n2, k2 in pairs:
        if k1 != k2:
            raise CardinalityMismatch(
                f"|Omega_{n1}| = {k1} but |Omega_{n2}| = {k2}: no identification exists"
            )


def _compare(e1, e2, a_to_b, b_to_a, x_to_y, y_to_x):
    for a, b, x, y in e1.cells():
        v1 = e1.table[(a, b, x, y)]
        v2 = e2.table[(b_to_a[b], a_to_b[a], y_to_x[y], x_to_y[x])]
        if v1 != v2:
            return (a, b, x, y), v1, v2
    return None


def check_time_reverse_pair(
    e1: Experiment, e2: Experiment, search_labels: bool = False
) -> TimeReverseWitness | TimeReverseMismatch:
    """Decide whether ``e2`` is an operational time reverse of ``e1``.

    Labels are identified positionally: the i-th outcome of e1's
    preparation is the i-th outcome of e2's measurement. With
    ``search_labels`` every identification is tried (small sets only).
    """
    _check_cardinalities(e1, e2)
    identifications = _identifications(e1, e2, search_labels)
    first_failure = None
    for maps in identifications:
        bad = _compare(e1, e2, *maps)
        if bad is None:
            a_to_b, b_to_a, x_to_y, y_to_x = maps
            return TimeReverseWitness(e2.name, a_to_b, b_to_a, x_to_y, y_to_x, e1 == e2)
        if first_failure is None:
            first_failure = bad
    cell, v1, v2 = first_failure
    return TimeReverseMismatch(e2.name, cell, v1, v2)


def _identifications(e1: Experiment, e2: Experiment, search: bool):
    if not search:
        yield (
            _positional(e1.omega_a, e2.omega_b),
            _positional(e1.omega_b, e2.omega_a),
            _positional(e1.omega_x, e2.omega_y),
            _positional(e1.omega_y, e2.omega_x),
        )
        return
    sets = [(e1.omega_a, e2.omega_b), (e1.omega_b, e2.omega_a),
            (e1.omega_x, e2.omega_y), (e1.omega_y, e2.omega_x)]
    if max(len(s) for s, _ in sets) > LABEL_SEARCH_MAX:
        raise SpaceTooLarge(f"label search limited to {LABEL_SEARCH_MAX} labels per set")
    budget = math.prod(math.factorial(len(s)) for s, _ in sets)
    if budget > LABEL_SEARCH_BUDGET:
        raise SpaceTooLarge(f"{budget} label identifications exceed {LABEL_SEARCH_BUDGET}")
    perms = [list(itertools.permutations(dst)) for _, dst in sets]
    for choice in itertools.product(*perms):
        yield tuple(dict(zip(src, p)) for (src, _), p in zip(sets, choice))


def is_self_time_reverse(e: Experiment) -> bool:
    if len(e.omega_a) != len(e.omega_b) or len(e.omega_x) != len(e.omega_y):
        raise CardinalityMismatch(
            f"{e.name!r} has |A|={len(e.omega_a)}, |B|={len(e.omega_b)}, "
            f"|X|={len(e.omega_x)}, |Y|={len(e.omega_y)}"
        )
    return bool(check_time_reverse_pair(e, e))


def time_reversed(e: Experiment, name: str | None = None) -> Experiment:
    """The experiment with preparation and measurement roles exchanged.

    Its table is ``p'(b, a | y, x) = p(a, b | x, y)`` with the label sets
    swapped, so it is an operational time reverse of ``e`` by construction.
    """
    table = {(b, a, y, x): v for (a, b, x, y), v in e.table.items()}
    return Experiment(
        name or f"{e.name}~rev",
        e.omega_b,
        e.omega_a,
        e.omega_y,
        e.omega_x,
        table,
        e.directions_y,
        e.directions_x,
    )


def find_time_reverses(e: Experiment, candidates: Iterable[Experiment]) -> list[TimeReverseWitness]:
    """All operational time reverses of ``e`` among ``candidates``.

    Uniqueness is not assumed; partners with incompatible cardinalities
    are skipped.
    """
    found = []
    for c in candidates:
        try:
            r = check_time_reverse_pair(e, c)
        except CardinalityMismatch:
            continue
        if r:
            found.append(r)
    return found


def uniform_experiment(
    name: str, omega_a, omega_b, omega_x, omega_y, mode: str = EXACT
) -> Experiment:
    """Every cell equal to ``1/(|A||B|)``."""
    oa, ob = label_set(omega_a), label_set(omega_b)
    v = unit(mode) / (len(oa) * len(ob))
    cells = itertools.product(oa, ob, label_set(omega_x), label_set(omega_y))
    return Experiment(name, oa, ob, omega_x, omega_y, {c: v for c in cells})

