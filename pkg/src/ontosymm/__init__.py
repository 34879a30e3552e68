"""Operational and ontological models of prepare-and-measure experiments,
with exact checks of time symmetry."""

from .numerics import Direction, Scalar, dot, format_scalar, parse_scalar, scalar_cmp
from .ontological import (
    Bijection,
    OntModel,
    bayesian_inversion,
    check_ontological_time_reverse,
    joint,
    relabel,
    reproduces,
    search_time_reverse_bijection,
    swap_and_relabel,
)
from .operational import (
    Experiment,
    check_no_signalling,
    check_time_reverse_pair,
    is_self_time_reverse,
    validate,
)
from .quantum import build_bb_model, build_classical_control, build_maudlin, predict_qubit
from .theorems import (
    Certificate,
    certify_time_symmetry_violation,
    check_preparation_noncontextuality,
    chsh_value,
    marginal_g,
    replay,
    verify_lemma_viii2,
)

__version__ = "0.1.0"
