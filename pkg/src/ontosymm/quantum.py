"""Concrete experiments and models: qubit prepare-and-measure tables,
the model that takes the quantum state as ontic, Maudlin's two-setting
instance of it, and a classical channel used as a positive control.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .numerics import EXACT, FLOAT, HALF, HALF_SQRT3, ONE, ZERO, Direction, Scalar, dot, unit, zero
from .ontological import OntModel, model_from_tables
from .operational import Experiment

PLUS, MINUS = "+1", "-1"
SPIN = (PLUS, MINUS)
SIGN = {PLUS: 1, MINUS: -1}


class InexactDirection(ValueError):
    """Exact mode was requested for directions that are only known as floats."""


@dataclass(frozen=True)
class QubitPreparation:
    """Input x picks a direction; outcome a = +-1 is uniform and the
    system is left spin-a along that direction."""

    directions: tuple[Direction, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        _check_dirs(self, "n")


@dataclass(frozen=True)
class QubitMeasurement:
    """Input y picks a direction; outcome b = +-1 of the projective
    spin measurement along it."""

    directions: tuple[Direction, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        _check_dirs(self, "m")


def _check_dirs(obj, prefix: str) -> None:
    dirs = tuple(obj.directions)
    if not dirs:
        raise ValueError("at least one direction is required")
    labels = tuple(obj.labels) if obj.labels is not None else tuple(f"{prefix}{i}" for i in range(len(dirs)))
    if len(labels) != len(dirs) or len(set(labels)) != len(labels):
        raise ValueError("direction labels must be distinct and match the directions")
    object.__setattr__(obj, "directions", dirs)
    object.__setattr__(obj, "labels", labels)


def _resolve_mode(dirs: Sequence[Direction], mode: str | None) -> tuple[list[Direction], str]:
    modes = {d.mode for d in dirs}
    if mode is None:
        mode = FLOAT if FLOAT in modes else EXACT
    if mode == EXACT and FLOAT in modes:
        raise InexactDirection("exact mode needs directions with components in Q(sqrt3)")
    if mode == FLOAT:
        return [d.to_float() for d in dirs], mode
    return list(dirs), mode


def qubit_probability(a: str, b: str, n: Direction, m: Direction) -> Scalar:
    """``(1 + ab n.m) / 4``."""
    c = dot(n, m)
    one = unit(c.mode)
    return (one + c * SIGN[a] * SIGN[b]) / 4


def predict_qubit(
    prep: QubitPreparation, meas: QubitMeasurement, name: str = "qubit", mode: str | None = None
) -> Experiment:
    dirs, mode = _resolve_mode(prep.directions + meas.directions, mode)
    dx = dict(zip(prep.labels, dirs[: len(prep.directions)]))
    dy = dict(zip(meas.labels, dirs[len(prep.directions):]))
    table = {
        (a, b, x, y): qubit_probability(a, b, dx[x], dy[y])
        for a, b, x, y in itertools.product(SPIN, SPIN, prep.labels, meas.labels)
    }
    return Experiment(name, SPIN, SPIN, prep.labels, meas.labels, table, dx, dy)


def build_bb_model(
    prep: QubitPreparation, meas: QubitMeasurement, name: str = "bb", mode: str | None = None
) -> OntModel:
    """Ontic state = (preparation direction, preparation outcome).

    The sphere of the continuum model is restricted to the directions
    actually prepared, so the Dirac delta on directions becomes a
    Kronecker delta on setting labels.
    """
    dirs, mode = _resolve_mode(prep.directions + meas.directions, mode)
    dx = dict(zip(prep.labels, dirs[: len(prep.directions)]))
    dy = dict(zip(meas.labels, dirs[len(prep.directions):]))
    one, nil = unit(mode), zero(mode)
    half = one / 2
    lam_space = [(x, s) for x in prep.labels for s in SPIN]

    prep_out = {(a, x): half for a in SPIN for x in prep.labels}
    prep_ontic = {
        (lam, a, x): one if (lam[0] == x and lam[1] == a) else nil
        for lam in lam_space
        for a in SPIN
        for x in prep.labels
    }
    meas_tab = {
        (b, lam, y): (one + dot(dx[lam[0]], dy[y]) * (SIGN[lam[1]] * SIGN[b])) / 2
        for b in SPIN
        for lam in lam_space
        for y in meas.labels
    }
    m = model_from_tables(
        name, SPIN, SPIN, prep.labels, meas.labels, lam_space, prep_out, prep_ontic, meas_tab,
        dx, dy,
    )
    # the operational table comes from the quantum rule, not from the model
    e = predict_qubit(prep, meas, name, mode)
    return OntModel(e, m.lambda_, m.prep_out, m.prep_ontic, m.meas)


MAUDLIN_X = {
    "0": (ZERO, ZERO, ONE),
    "1": (HALF, ZERO, HALF_SQRT3),
}
MAUDLIN_Y = {
    "0": (ZERO, ZERO, ONE),
    "1": (-HALF, ZERO, HALF_SQRT3),
}


def maudlin_settings() -> tuple[QubitPreparation, QubitMeasurement]:
    """X = 1 and Y = 1 name different directions (+30 and -30 degrees)."""
    prep = QubitPreparation(tuple(Direction(*v) for v in MAUDLIN_X.values()), tuple(MAUDLIN_X))
    meas = QubitMeasurement(tuple(Direction(*v) for v in MAUDLIN_Y.values()), tuple(MAUDLIN_Y))
    return prep, meas


def build_maudlin(mode: str = EXACT) -> tuple[Experiment, OntModel]:
    prep, meas = maudlin_settings()
    m = build_bb_model(prep, meas, name="maudlin", mode=mode)
    return m.experiment, m


def build_classical_control(k: int, mode: str = EXACT) -> tuple[Experiment, OntModel]:
    """A perfect classical channel: lam = a and the measurement reads b = lam."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    labels = tuple(str(i) for i in range(1, k + 1))
    one, nil = unit(mode), zero(mode)
    star = ("*",)
    prep_out = {(a, "*"): one / k for a in labels}
    prep_ontic = {(lam, a, "*"): one if lam == a else nil for lam in labels for a in labels}
    meas = {(b, lam, "*"): one if b == lam else nil for b in labels for lam in labels}
    m = model_from_tables(
        f"classical{k}", labels, labels, star, star, labels, prep_out, prep_ontic, meas
    )
    return m.experiment, m


def directions_from_json(data, mode: str = EXACT) -> tuple[list[str], list[Direction]]:
    """Parse ``[[x, y, z], ...]`` or ``{"label": [x, y, z], ...}``.

    Components may be canonical scalar strings, integers or (float mode
    only) decimal numbers.
    """
    from .numerics import NumericsError, parse_scalar

    if isinstance(data, dict) and "directions" in data:
        data = data["directions"]
    if isinstance(data, dict):
        items = list(data.items())
    else:
        items = [(f"d{i}", v) for i, v in enumerate(data)]
    labels, dirs = [], []
    for label, comps in items:
        if len(comps) != 3:
            raise ValueError(f"direction {label!r} needs three components")
        try:
            scalars = [parse_scalar(c, mode) for c in comps]
        except NumericsError as exc:
            if mode == EXACT:
                raise InexactDirection(f"direction {label!r}: {exc}") from exc
            raise
        labels.append(str(label))
        dirs.append(Direction(*scalars))
    return labels, dirs


def exact_direction(x: Fraction | int, y: Fraction | int, z: Fraction | int) -> Direction:
    return Direction(Scalar.exact(x), Scalar.exact(y), Scalar.exact(z))
