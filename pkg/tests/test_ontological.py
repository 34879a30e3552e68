import itertools
import random
from fractions import Fraction

import pytest

from ontosymm.numerics import HALF, ONE, QUARTER, ZERO, Scalar
from ontosymm.ontological import (
    Bijection,
    DomainMismatch,
    ExperimentsNotOperationalReverses,
    NoOntologicalReverse,
    OntModel,
    OntologicalError,
    bayesian_inversion,
    check_ontological_time_reverse,
    iter_all_bijections,
    joint,
    ontic_label,
    relabel,
    reproduces,
    search_time_reverse_bijection,
    swap_and_relabel,
    time_reverse_search,
    validate_model,
)
from ontosymm.operational import SpaceTooLarge, check_time_reverse_pair, time_reversed
from ontosymm.quantum import QubitMeasurement, QubitPreparation, build_bb_model, build_classical_control
from ontosymm.random_models import random_bijection, random_ont_model, random_reversible_model

from .conftest import Z

R = Scalar.exact
P, M = "+1", "-1"


def brute_force(m1, m2):
    """Oracle: try every bijection cell by cell."""
    return [f for f in iter_all_bijections(m1.lambda_, m2.lambda_) if check_ontological_time_reverse(m1, m2, f)]


def lam_flip(m):
    """[l1, l2] -> [l1, -l2]"""
    other = {P: M, M: P}
    return Bijection(m.lambda_, m.lambda_, {lam: (lam[0], other[lam[1]]) for lam in m.lambda_})


# -- joint -------------------------------------------------------------


def test_maudlin_joint_cell(maudlin):
    assert joint(maudlin[1])[(P, P, ("0", P), "0", "0")] == HALF


def test_zero_prep_ontic_gives_zero(maudlin):
    m = maudlin[1]
    for (a, b, lam, x, y), v in joint(m).items():
        if m.prep_ontic[(lam, a, x)].is_zero():
            assert v.is_zero()


def test_bb_single_direction_anticorrelated_cell():
    m = build_bb_model(QubitPreparation((Z,), ("n",)), QubitMeasurement((Z,), ("n",)))
    assert joint(m)[(P, M, ("n", P), "n", "n")] == ZERO
    assert joint(m)[(P, P, ("n", P), "n", "n")] == HALF


def test_joint_is_product_of_tables(maudlin):
    m = maudlin[1]
    for (a, b, lam, x, y), v in joint(m).items():
        assert v == m.meas[(b, lam, y)] * m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)]


# -- reproduces --------------------------------------------------------


def test_reproduces_examples(maudlin, bb_two, classical2):
    assert reproduces(maudlin[1])
    assert reproduces(bb_two)
    assert reproduces(classical2[1])


def test_broken_measurement_detected(maudlin):
    m = maudlin[1]
    meas = dict(m.meas)
    for b, l2 in itertools.product((P, M), (P, M)):
        meas[(b, ("1", l2), "1")] = HALF
    broken = OntModel(m.experiment, m.lambda_, m.prep_out, m.prep_ontic, meas)
    assert validate_model(broken)
    check = reproduces(broken)
    assert not check
    a, b, x, y = check.cell
    assert (x, y) == ("1", "1")
    assert check.actual == QUARTER  # the ab/2 term is gone


def test_model_tables_must_be_total(maudlin):
    m = maudlin[1]
    meas = dict(m.meas)
    meas.pop((P, ("0", P), "0"))
    with pytest.raises(OntologicalError, match="missing cell"):
        OntModel(m.experiment, m.lambda_, m.prep_out, m.prep_ontic, meas)


# -- relabel -----------------------------------------------------------


def test_relabel_identity(maudlin):
    m = maudlin[1]
    assert relabel(m, Bijection.identity(m.lambda_)) == m


def test_relabel_inverse(maudlin):
    m = maudlin[1]
    f = random_bijection(random.Random(3), m.lambda_)
    assert relabel(relabel(m, f), f.inverse()) == m


def test_lambda2_flip_on_maudlin(maudlin):
    m = maudlin[1]
    r = relabel(m, lam_flip(m))
    sign = {P: 1, M: -1}
    for (lam, a, x), v in r.prep_ontic.items():
        assert v == (ONE if lam[0] == x and lam[1] != a else ZERO)
    # meas terms carry -l2 now
    dots = {("0", "0"): ONE, ("0", "1"): m.meas[(P, ("0", P), "1")] * 2 - ONE,
            ("1", "0"): m.meas[(P, ("1", P), "0")] * 2 - ONE, ("1", "1"): HALF}
    for (b, lam, y), v in r.meas.items():
        assert v == (ONE - dots[(lam[0], y)] * (sign[lam[1]] * sign[b])) / 2
    assert reproduces(r)


def test_relabel_rejects_wrong_domain(maudlin, classical2):
    with pytest.raises(DomainMismatch):
        relabel(maudlin[1], Bijection.identity(classical2[1].lambda_))


def test_bijection_must_be_one_to_one():
    with pytest.raises(OntologicalError):
        Bijection(("a", "b"), ("c", "d"), {"a": "c", "b": "c"})


@pytest.mark.parametrize("seed", range(30))
def test_relabel_invariance(seed):
    rng = random.Random(seed)
    m1 = random_reversible_model(rng, max_omega=3, max_lambda=4)
    f = random_bijection(rng, m1.lambda_)
    m2 = swap_and_relabel(m1, f)
    g = random_bijection(rng, m1.lambda_, "s")
    h = random_bijection(rng, m2.lambda_, "t")
    r1, r2 = relabel(m1, g), relabel(m2, h)
    assert bool(reproduces(r1)) == bool(reproduces(m1))
    # conjugated bijection h o f o g^-1
    assert check_ontological_time_reverse(r1, r2, h.compose(f).compose(g.inverse()))


def test_compose_order():
    f = Bijection(("a", "b"), ("c", "d"), {"a": "c", "b": "d"})
    g = Bijection(("c", "d"), ("e", "f"), {"c": "f", "d": "e"})
    assert g.compose(f)("a") == "f"


# -- ontological time reverse ------------------------------------------


def test_classical_identity_is_reverse(classical2):
    m = classical2[1]
    assert check_ontological_time_reverse(m, m, Bijection.identity(m.lambda_))


def test_every_maudlin_bijection_fails(maudlin):
    m = maudlin[1]
    fs = list(iter_all_bijections(m.lambda_, m.lambda_))
    assert len(fs) == 24
    assert not any(check_ontological_time_reverse(m, m, f) for f in fs)


def test_needs_operational_reverse(maudlin, bb_two):
    with pytest.raises(ExperimentsNotOperationalReverses):
        check_ontological_time_reverse(maudlin[1], bb_two, Bijection.identity(maudlin[1].lambda_))


def test_search_maudlin_matches_oracle(maudlin):
    m = maudlin[1]
    assert search_time_reverse_bijection(m, m) == [] == brute_force(m, m)
    s = time_reverse_search(m, m)
    assert (s.total, s.refuted) == (24, 24)
    assert all(not v for v in s.compatible.values())
    assert len(s.separating) == 16


def test_search_bb_two(bb_two):
    assert search_time_reverse_bijection(bb_two, bb_two) == []


def test_search_classical(classical2):
    m = classical2[1]
    found = search_time_reverse_bijection(m, m)
    assert Bijection.identity(m.lambda_) in found
    assert found == brute_force(m, m)


def test_search_cap(maudlin):
    m = maudlin[1]
    with pytest.raises(SpaceTooLarge):
        search_time_reverse_bijection(m, m, cap=3)


@pytest.mark.parametrize("seed", range(40))
def test_search_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    m1 = random_reversible_model(rng, max_omega=2, max_lambda=4)
    m2 = swap_and_relabel(m1, random_bijection(rng, m1.lambda_))
    assert search_time_reverse_bijection(m1, m2) == brute_force(m1, m2)


@pytest.mark.parametrize("seed", range(40))
def test_search_finds_constructing_bijection(seed):
    rng = random.Random(seed)
    m1 = random_reversible_model(rng)
    f = random_bijection(rng, m1.lambda_)
    m2 = swap_and_relabel(m1, f)
    assert check_ontological_time_reverse(m1, m2, f)
    assert f in search_time_reverse_bijection(m1, m2)


@pytest.mark.parametrize("seed", range(40))
def test_ontological_reverse_implies_operational(seed):
    rng = random.Random(seed)
    m1 = random_reversible_model(rng)
    m2 = swap_and_relabel(m1, random_bijection(rng, m1.lambda_))
    assert check_time_reverse_pair(m1.experiment, m2.experiment)
    assert m2.experiment.table == time_reversed(m1.experiment).table


def test_maudlin_has_no_reverse_partner(maudlin):
    with pytest.raises(NoOntologicalReverse):
        swap_and_relabel(maudlin[1])


# -- Bayesian inversion ------------------------------------------------


def test_maudlin_inversion(maudlin):
    m = maudlin[1]
    inv = bayesian_inversion(m)
    for lam, x in itertools.product(m.lambda_, ("0", "1")):
        assert inv.prior[(lam, x)] == (HALF if lam[0] == x else ZERO)
        for a in (P, M):
            post = inv.posterior[(a, lam, x)]
            if lam[0] != x:
                assert post is None
            else:
                assert post == (ONE if a == lam[1] else ZERO)


def test_inversion_independent_prep():
    lab = ("0", "1")
    lam = ("l0", "l1", "l2")
    prep_out = {("0", "*"): R(Fraction(1, 3)), ("1", "*"): R(Fraction(2, 3))}
    prep_ontic = {(l, a, "*"): R(Fraction(1, 3)) for l in lam for a in lab}
    meas = {(b, l, "*"): HALF for b in lab for l in lam}
    from ontosymm.ontological import model_from_tables

    m = model_from_tables("ind", lab, lab, ("*",), ("*",), lam, prep_out, prep_ontic, meas)
    inv = bayesian_inversion(m)
    for l in lam:
        assert inv.prior[(l, "*")] == R(Fraction(1, 3))
        for a in lab:
            assert inv.posterior[(a, l, "*")] == prep_out[(a, "*")]


@pytest.mark.parametrize("seed", range(30))
def test_bayes_rule_holds(seed):
    m = random_ont_model(random.Random(seed))
    inv = bayesian_inversion(m)
    e = m.experiment
    for lam, a, x in itertools.product(m.lambda_, e.omega_a, e.omega_x):
        post = inv.posterior[(a, lam, x)]
        if post is None:
            assert inv.prior[(lam, x)].is_zero()
        else:
            assert post * inv.prior[(lam, x)] == m.prep_ontic[(lam, a, x)] * m.prep_out[(a, x)]


# -- properties over random models --------------------------------------


@pytest.mark.parametrize("seed", range(50))
def test_joint_normalized(seed):
    m = random_ont_model(random.Random(seed))
    e = m.experiment
    assert validate_model(m)
    for x, y in itertools.product(e.omega_x, e.omega_y):
        s = sum((v for (a, b, lam, xx, yy), v in joint(m).items() if (xx, yy) == (x, y)), ZERO)
        assert s == ONE


@pytest.mark.parametrize("seed", range(50))
def test_ci1_random(seed):
    m = random_ont_model(random.Random(1000 + seed))
    e = m.experiment
    j = joint(m)
    for lam, x in itertools.product(m.lambda_, e.omega_x):
        vals = {
            sum((j[(a, b, lam, x, y)] for a in e.omega_a for b in e.omega_b), ZERO)
            for y in e.omega_y
        }
        assert len(vals) == 1


def test_ontic_labels_from_lists():
    assert ontic_label(["0", "+1"]) == ("0", "+1")
    assert ontic_label("l0") == "l0"
