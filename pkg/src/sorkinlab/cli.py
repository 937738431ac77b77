"""Command-line interface.

Commands: validate, interference, prop1, tomography, experiment.
Exit codes: 0 success, 1 validation/verdict failure, 2 input error.
Output files contain only the deterministic payload; the timestamp is
logged to stderr so identical configs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import fixtures, serialize
from .gpt import (
    Effect,
    Measurement,
    ModelSpace,
    State,
    face_of,
    probability,
    random_effect,
    random_state,
    validate_filter,
)
from .interference import (
    PAIRS,
    SINGLES,
    TRIPLE,
    SlitSystem,
    i2_from_table,
    i3_from_table,
    i3_operator,
    ik_from_table,
    prop1_verify,
    slit_system,
    subset_key,
    table_from_system,
)
from .models import (
    build_classical_model,
    build_quantum_model,
    build_real_quantum_model,
    classical_subset_filters,
    effect_from_matrix,
    measurement_from_matrices,
    spin1_feynman_setup,
    state_from_matrix,
    subset_filters,
)
from .experiment import ExperimentPlan, estimate_i3, record_from_table, run_experiment
from .tomography import tomography_roundtrip


class InputError(Exception):
    pass


def thread_cap() -> int:
    """Worker cap from SORKIN_LAB_THREADS (0 = auto).  The current
    implementation is single-process; the cap is recorded, not enforced."""
    try:
        return int(os.environ.get("SORKIN_LAB_THREADS", "0"))
    except ValueError:
        return 0


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def resolve_model(spec: str) -> tuple[ModelSpace, dict]:
    """'quantum:3' / 'real_quantum:3' / 'classical:3' or a JSON model file."""
    if spec.endswith(".json"):
        try:
            return serialize.model_from_dict(_load_json(spec))
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad model file {spec}: {exc}") from exc
    kind, _, arg = spec.partition(":")
    try:
        n = int(arg)
    except ValueError:
        raise InputError(f"bad model spec {spec!r}")
    builders = {
        "quantum": build_quantum_model,
        "real_quantum": build_real_quantum_model,
        "classical": build_classical_model,
    }
    if kind not in builders:
        raise InputError(f"unknown model kind {kind!r}")
    try:
        return builders[kind](n), {}
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def resolve_slits(spec: str, model: ModelSpace, named_filters: dict) -> SlitSystem:
    """'basis', 'spin1:bx,by,bz', or filters carried by the model file."""
    if spec == "basis":
        if model.cone.kind == "classical":
            if model.cone.n < 3:
                raise InputError("classical basis slits need n >= 3")
            blocks = [[0], [1], [2]]
            return slit_system(model, classical_subset_filters(blocks, model))
        if model.cone.kind in ("quantum", "real_quantum"):
            d = model.cone.d
            if d < 3:
                raise InputError("basis slits need d >= 3")
            eye = np.eye(d, dtype=complex if model.cone.kind == "quantum" else float)
            pis = [np.outer(eye[:, i], eye[:, i].conj()) for i in range(3)]
            return slit_system(model, subset_filters(pis, model))
        raise InputError("basis slits are not defined for custom cones")
    if spec.startswith("spin1:"):
        axis = _parse_vec3(spec.split(":", 1)[1])
        setup = spin1_feynman_setup(axis, axis)
        return slit_system(model, subset_filters(list(setup.slit_projectors), model))
    if spec == "from-model":
        keys = {subset_key(J) for J in SINGLES + PAIRS + (TRIPLE,)}
        if not keys <= set(named_filters):
            raise InputError(
                "model file must name filters " + ", ".join(sorted(keys))
            )
        filters = {
            frozenset(int(c) for c in name): f
            for name, f in named_filters.items()
            if name in keys
        }
        return slit_system(model, filters)
    raise InputError(f"unknown slit spec {spec!r}")


def _parse_vec3(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError(f"expected three comma-separated numbers, got {text!r}")
    try:
        v = np.array([float(p) for p in parts])
    except ValueError:
        raise InputError(f"bad vector {text!r}")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InputError("axis must be nonzero")
    return v / norm


def resolve_state(spec: str, model: ModelSpace) -> State:
    if spec == "fixture:qutrit":
        return fixtures.qutrit_fixture()[2]
    if spec == "uniform":
        if model.cone.kind != "classical":
            raise InputError("'uniform' is a classical fixture")
        return State(model, np.full(model.dimension, 1.0 / model.dimension))
    if spec.startswith("random:"):
        return random_state(model, seed=int(spec.split(":", 1)[1]))
    if spec.endswith(".json"):
        d = _load_json(spec)
        if "coords" in d:
            return State(model, np.array(d["coords"], dtype=float))
        if "re" in d:
            return state_from_matrix(serialize.hermitian_from_dict(d), model)
        raise InputError(f"state file {spec} needs 'coords' or 're'/'im'")
    raise InputError(f"unknown state spec {spec!r}")


def resolve_effect(spec: str, model: ModelSpace) -> Effect:
    if spec == "fixture:qutrit":
        return fixtures.qutrit_fixture()[3]
    if spec.startswith("random:"):
        return random_effect(model, seed=int(spec.split(":", 1)[1]))
    if spec == "order-unit":
        return Effect(model, model.order_unit.copy())
    if spec.endswith(".json"):
        d = _load_json(spec)
        if "coords" in d:
            return Effect(model, np.array(d["coords"], dtype=float))
        if "re" in d:
            return effect_from_matrix(serialize.hermitian_from_dict(d), model)
        raise InputError(f"effect file {spec} needs 'coords' or 're'/'im'")
    raise InputError(f"unknown effect spec {spec!r}")


def resolve_table(spec: str):
    if spec == "fixture:0.6":
        return fixtures.table_06()
    try:
        return serialize.table_from_dict(_load_json(spec))
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad table file {spec}: {exc}") from exc


def emit(payload: dict, args) -> None:
    text = serialize.dumps(payload)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n")
        print(f"# wrote {args.out} at {time.strftime('%Y-%m-%dT%H:%M:%S')}", file=sys.stderr)
    else:
        print(text)


def cmd_validate(args) -> int:
    model, named = resolve_model(args.model)
    try:
        ss = resolve_slits(args.slits, model, named)
    except ValueError as exc:
        # constructed but invalid filters: a validation failure, not bad input
        print(serialize.dumps({"passed": False, "error": str(exc)}))
        return 1
    reports = [ss.validate().to_dict()]
    for J in SINGLES + PAIRS + (TRIPLE,):
        rep = validate_filter(ss.derived[J], model, n_samples=args.samples, seed=args.seed)
        d = rep.to_dict()
        d["subject"] = f"filter_{subset_key(J)}"
        reports.append(d)
    passed = all(r["passed"] for r in reports)
    emit({"passed": passed, "reports": reports}, args)
    return 0 if passed else 1


def cmd_interference(args) -> int:
    if args.table:
        t = resolve_table(args.table)
        payload = {"source": "table", "k": t.k}
        if t.k == 3:
            payload["i3"] = i3_from_table(t)
        payload["ik"] = ik_from_table(t)
        emit(payload, args)
        return 0
    model, named = resolve_model(args.model)
    ss = resolve_slits(args.slits, model, named)
    if args.sweep:
        sup_i3 = 0.0
        max_i2 = 0.0
        for i in range(args.sweep):
            s = random_state(model, seed=[args.seed, i, 0])
            r = random_effect(model, seed=[args.seed, i, 1])
            t = table_from_system(r, ss, s)
            sup_i3 = max(sup_i3, abs(i3_from_table(t)))
            for a, b in ((1, 2), (1, 3), (2, 3)):
                max_i2 = max(
                    max_i2, abs(i2_from_table(t[{a, b}], t[{a}], t[{b}]))
                )
        emit({"sweep": args.sweep, "seed": args.seed,
              "sup_abs_i3": sup_i3, "max_abs_i2": max_i2}, args)
        return 0
    s = resolve_state(args.state, model)
    r = resolve_effect(args.effect, model)
    t = table_from_system(r, ss, s)
    payload = {
        "i2": {
            f"{a}{b}": i2_from_table(t[{a, b}], t[{a}], t[{b}])
            for a, b in ((1, 2), (1, 3), (2, 3))
        },
        "i3_table": i3_from_table(t),
        "i3_operator": i3_operator(r, ss, s),
        "table": serialize.table_to_dict(t),
    }
    emit(payload, args)
    return 0


def cmd_prop1(args) -> int:
    model, named = resolve_model(args.model)
    ss = resolve_slits(args.slits, model, named)
    report = prop1_verify(ss, n_samples=args.samples, seed=args.seed)
    emit(report.to_dict(), args)
    return 0 if report.consistent else 1


def cmd_tomography(args) -> int:
    model, named = resolve_model(args.model)
    ss = resolve_slits(args.slits, model, named)
    s = resolve_state(args.state, model)
    result = tomography_roundtrip(
        model, ss, s, mode=args.mode, shots=args.shots, seed=args.seed
    )
    emit(result.to_dict(), args)
    return 0


def cmd_experiment(args) -> int:
    if args.table:
        t = resolve_table(args.table)
        record = record_from_table(t, args.shots, args.seed)
        est = estimate_i3(record)
        payload = {"estimate": est.to_dict(), "record": serialize.record_to_dict(record)}
        _write_record_csv(args, record)
        emit(payload, args)
        return 0
    model, named = resolve_model(args.model)
    if args.spin1:
        if model.cone.kind != "quantum" or model.cone.d != 3:
            raise InputError("--spin1 requires --model quantum:3")
        setup = spin1_feynman_setup(_parse_vec3(args.b), _parse_vec3(args.d))
        ss = slit_system(model, subset_filters(list(setup.slit_projectors), model))
        detector = measurement_from_matrices(list(setup.detector_effects), model)
    else:
        ss = resolve_slits(args.slits, model, named)
        if model.cone.kind == "classical":
            eye = np.eye(model.dimension)
            detector = Measurement(
                model, tuple(Effect(model, eye[i]) for i in range(model.dimension))
            )
        else:
            d = model.cone.d
            eye = np.eye(d, dtype=complex)
            detector = measurement_from_matrices(
                [np.outer(eye[:, i], eye[:, i].conj()) for i in range(d)], model
            )
    s = resolve_state(args.state, model)
    plan = ExperimentPlan(
        model=model,
        slits=ss,
        detector_measurement=detector,
        source_state=s,
        shots_per_setting=args.shots,
        seed=args.seed,
    )
    record = run_experiment(plan)
    est = estimate_i3(record)
    _write_record_csv(args, record)
    emit({"estimate": est.to_dict(), "record": serialize.record_to_dict(record)}, args)
    return 0


def _write_record_csv(args, record) -> None:
    if getattr(args, "csv_out", None):
        Path(args.csv_out).write_text(serialize.record_to_csv(record))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sorkinlab",
        description="Third-order interference and two-slit-filtering tomography",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", default="quantum:3")
        sp.add_argument("--slits", default="basis")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = sub.add_parser("validate", help="check filter axioms and product relations")
    common(sp)
    sp.add_argument("--samples", type=int, default=200)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("interference", help="I2 / I3 / Ik from a system or a raw table")
    common(sp)
    sp.add_argument("--state", default="fixture:qutrit")
    sp.add_argument("--effect", default="fixture:qutrit")
    sp.add_argument("--table", help="raw probability table (JSON path or fixture:0.6)")
    sp.add_argument("--sweep", type=int, help="number of random (state, effect) pairs")
    sp.set_defaults(func=cmd_interference)

    sp = sub.add_parser("prop1", help="three-way no-third-order equivalence check")
    common(sp)
    sp.add_argument("--samples", type=int, default=500)
    sp.set_defaults(func=cmd_prop1)

    sp = sub.add_parser("tomography", help="two-slit-filtering state reconstruction")
    common(sp)
    sp.add_argument("--state", default="fixture:qutrit")
    sp.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    sp.add_argument("--shots", type=int, default=100000)
    sp.set_defaults(func=cmd_tomography)

    sp = sub.add_parser("experiment", help="seeded Monte Carlo seven-setting run")
    common(sp)
    sp.add_argument("--state", default="random:0")
    sp.add_argument("--shots", type=int, default=100000)
    sp.add_argument("--spin1", action="store_true")
    sp.add_argument("--b", default="0,0,1", help="filter axis bx,by,bz")
    sp.add_argument("--d", default="0,0,1", help="detector axis dx,dy,dz")
    sp.add_argument("--table", help="synthetic record from a raw table")
    sp.add_argument("--csv-out", dest="csv_out")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _ = thread_cap()
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
