"""``onto-symm`` command line.

Exit codes: 0 definitive verdict, 1 usage or parse error, 2 a check
failed, 3 a precondition of the requested certificate does not hold.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import modelfile
from .numerics import DEFAULT_TOLERANCE, EXACT, FLOAT, NumericsError, tolerance
from .ontological import (
    DEFAULT_CAP,
    Bijection,
    ExperimentsNotOperationalReverses,
    OntologicalError,
    reproduces,
    time_reverse_search,
    validate_model,
)
from .operational import (
    CardinalityMismatch,
    SpaceTooLarge,
    check_no_signalling,
    check_time_reverse_pair,
    validate,
)
from .quantum import (
    InexactDirection,
    QubitMeasurement,
    QubitPreparation,
    build_bb_model,
    build_classical_control,
    build_maudlin,
    directions_from_json,
)
from .theorems import (
    NonBinaryOutcomes,
    NotSelfReverse,
    PreconditionFailed,
    SignallingPreparation,
    certify_chsh,
    certify_time_symmetry_violation,
    check_preparation_noncontextuality,
    first_component,
    verify_lemma_viii2,
)

log = logging.getLogger("ontosymm")

EXIT_OK, EXIT_USAGE, EXIT_CHECK_FAILED, EXIT_PRECONDITION = 0, 1, 2, 3

CAP_ENV = "ONTOSYMM_CAP"


@dataclass(frozen=True)
class RunConfig:
    mode: str = EXACT
    tol: float = DEFAULT_TOLERANCE
    cap: int = DEFAULT_CAP
    format: str = "text"

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")


class UsageError(Exception):
    pass


def _config(args) -> RunConfig:
    cap = args.cap
    if cap is None:
        env = os.environ.get(CAP_ENV)
        try:
            cap = int(env) if env else DEFAULT_CAP
        except ValueError:
            raise UsageError(f"{CAP_ENV}={env!r} is not an integer")
    try:
        return RunConfig(args.mode, args.tol, cap, args.format)
    except ValueError as exc:
        raise UsageError(str(exc))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str, cfg: RunConfig) -> modelfile.ModelFile:
    try:
        return modelfile.load(path, cfg.mode)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _require_model(mf: modelfile.ModelFile, path: str):
    if mf.model is None:
        raise UsageError(f"{path} has no ont_model entry")
    return mf.model


# -- build -------------------------------------------------------------


def cmd_build(args, cfg: RunConfig) -> int:
    if args.builder == "maudlin":
        e, m = build_maudlin(cfg.mode)
    elif args.builder == "classical":
        e, m = build_classical_control(args.k, cfg.mode)
    elif args.builder == "bb":
        if not args.directions:
            raise UsageError("build bb needs --directions FILE")
        prep_labels, prep_dirs = directions_from_json(_read_json(args.directions), cfg.mode)
        if args.meas_directions:
            meas_labels, meas_dirs = directions_from_json(_read_json(args.meas_directions), cfg.mode)
        else:
            meas_labels, meas_dirs = prep_labels, prep_dirs
        m = build_bb_model(
            QubitPreparation(tuple(prep_dirs), tuple(prep_labels)),
            QubitMeasurement(tuple(meas_dirs), tuple(meas_labels)),
            name=args.name or "bb",
            mode=cfg.mode,
        )
        e = m.experiment
    else:  # argparse restricts choices; kept for library callers
        raise UsageError(f"unknown builder {args.builder!r}")
    _emit(modelfile.dumps(e, m), args.output)
    return EXIT_OK


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise modelfile.ParseError(f"{path}: line {exc.lineno}: {exc.msg}")


# -- check -------------------------------------------------------------


def cmd_check(args, cfg: RunConfig) -> int:
    mf = _load(args.model, cfg)
    e, m = mf.experiment, mf.model
    results = []
    rep = validate(e)
    results.append(("normalization", bool(rep), rep.describe()))
    if rep:
        ns = check_no_signalling(e)
        results.append(("no_signalling_to_past", ns.to_past, _ns_detail(ns.past_witness, "b", "y", "x")))
        results.append(("no_signalling_to_future", ns.to_future, _ns_detail(ns.future_witness, "a", "x", "y")))
    if m is not None:
        mrep = validate_model(m)
        results.append(("model_normalization", bool(mrep), "; ".join(mrep.problems) or "ok"))
        if mrep:
            r = reproduces(m)
            detail = "ok" if r else f"cell {r.cell}: table {r.expected}, model {r.actual}"
            results.append(("reproduces", bool(r), detail))
    if args.partner:
        other = _load(args.partner, cfg).experiment
        w = check_time_reverse_pair(e, other, search_labels=args.search_labels)
        if w:
            maps = ", ".join(f"{k}->{v}" for d in (w.a_to_b, w.x_to_y) for k, v in d.items())
            results.append(("operational_time_reverse", True, f"{other.name!r} via {maps}"))
        else:
            results.append(("operational_time_reverse", False, w.describe()))

    if cfg.format == "json":
        _emit(modelfile.canonical_json(
            {"file": args.model, "checks": [{"name": n, "pass": ok, "detail": d} for n, ok, d in results]},
            sort_keys=False,
        ), None)
    else:
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


def _ns_detail(w, outcome, fixed, varied) -> str:
    if w is None:
        return "ok"
    o, s, s1, s2 = w
    return f"marginal of {outcome}={o} at {fixed}={s} differs between {varied}={s1} and {varied}={s2}"


# -- certify -----------------------------------------------------------


def _parse_settings(text: str | None):
    if not text:
        raise UsageError("--kind chsh needs --settings x0,x1,y0,y1")
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--settings takes four comma-separated labels")
    return parts


def cmd_certify(args, cfg: RunConfig) -> int:
    mf = _load(args.model, cfg)
    kind = args.kind
    if kind == "chsh":
        x0, x1, y0, y1 = _parse_settings(args.settings)
        try:
            cert = certify_chsh(mf.experiment, x0, x1, y0, y1)
        except KeyError as exc:
            raise UsageError(f"unknown setting {exc.args[0]}")
    else:
        m = _require_model(mf, args.model)
        if kind == "time-symmetry":
            cert = certify_time_symmetry_violation(m, cfg.cap, first_component)
        elif kind == "noncontextuality":
            cert = check_preparation_noncontextuality(m)
        elif kind == "lemma":
            partner = _require_model(_load(args.partner, cfg), args.partner) if args.partner else m
            found = time_reverse_search(m, partner, cfg.cap).bijections
            if not found:
                raise PreconditionFailed(
                    f"no ontological time reverse of {m.name!r} exists in {partner.name!r}; "
                    "the lemma's hypothesis is unmet"
                )
            cert = verify_lemma_viii2(m, partner, found[0])
        else:
            raise UsageError(f"unknown certificate kind {kind!r}")

    d = cert.to_dict()
    if cfg.format == "json" or args.output:
        _emit(modelfile.canonical_json(d, sort_keys=False), args.output)
    if cfg.format == "text":
        print(_summary(d))
    return EXIT_OK


def _summary(d: dict) -> str:
    sc = d["scalars"]
    if d["kind"] == "CHSH":
        return f"CHSH {sc['chsh']} (exceeds 2: {str(sc['exceeds_local_bound']).lower()})"
    if "bijections_total" in d["scalars"]:
        if d["kind"] == "ViolationExhaustive":
            return f"ViolationExhaustive ({sc['bijections_refuted']} refuted of {sc['bijections_total']})"
        sat = next(s for s in d["steps"] if s["name"] == "exhaustive_search")["witness"]["satisfying"]
        return f"{d['kind']}: {len(sat)} bijection(s), first {sat[0]}"
    lines = [d["kind"]]
    for s in d["steps"]:
        lines.append(f"  {s['name']}: {s['status']}" + (f" {s['witness']}" if "witness" in s else ""))
    return "\n".join(lines)


# -- reverse-search ----------------------------------------------------


def cmd_reverse_search(args, cfg: RunConfig) -> int:
    m = _require_model(_load(args.model, cfg), args.model)
    partner = _require_model(_load(args.partner, cfg), args.partner) if args.partner else m
    search = time_reverse_search(m, partner, cfg.cap)
    maps = [_bijection_json(f) for f in search.bijections]
    if cfg.format == "json":
        _emit(modelfile.canonical_json({
            "model": m.name,
            "partner": partner.name,
            "bijections_total": search.total,
            "bijections": maps,
        }, sort_keys=False), args.output)
    else:
        print(f"{len(maps)} of {search.total} bijections satisfy the ontological time-reverse condition")
        for f in search.bijections:
            print(f"  {f.describe()}")
    return EXIT_OK


def _bijection_json(f: Bijection) -> list:
    return [[_j(k), _j(v)] for k, v in f.mapping.items()]


def _j(lam):
    return list(lam) if isinstance(lam, tuple) else lam


# -- entry point -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[EXACT, FLOAT], default=EXACT)
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                        help="float-mode equality tolerance")
    common.add_argument("--cap", type=int, default=None,
                        help=f"largest ontic space to search (default {DEFAULT_CAP}, or ${CAP_ENV})")
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("-o", "--output", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="onto-symm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="emit a model file")
    b.add_argument("builder", choices=["maudlin", "bb", "classical"])
    b.add_argument("--directions", help="JSON list or map of preparation directions")
    b.add_argument("--meas-directions", help="measurement directions (default: same as --directions)")
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--name", default=None)
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", parents=[common], help="validate a model file")
    c.add_argument("model")
    c.add_argument("--partner", help="also check this file's experiment as the time reverse")
    c.add_argument("--search-labels", action="store_true",
                   help="try every label identification (at most 6 labels per set)")
    c.set_defaults(func=cmd_check)

    ce = sub.add_parser("certify", parents=[common], help="produce a certificate")
    ce.add_argument("model")
    ce.add_argument("--kind", required=True,
                    choices=["time-symmetry", "lemma", "noncontextuality", "chsh"])
    ce.add_argument("--settings", help="x0,x1,y0,y1 for --kind chsh")
    ce.add_argument("--partner", help="model file of the time-reversed experiment")
    ce.set_defaults(func=cmd_certify)

    r = sub.add_parser("reverse-search", parents=[common],
                       help="list every ontological time-reverse bijection")
    r.add_argument("model")
    r.add_argument("--partner")
    r.set_defaults(func=cmd_reverse_search)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        ctx = tolerance(cfg.tol) if cfg.mode == FLOAT else contextlib.nullcontext()
        with ctx:
            return args.func(args, cfg)
    except (UsageError, modelfile.ModelFileError, NonBinaryOutcomes, InexactDirection,
            NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotSelfReverse, PreconditionFailed, SpaceTooLarge, SignallingPreparation,
            ExperimentsNotOperationalReverses, CardinalityMismatch) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OntologicalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
