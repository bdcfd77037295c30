"""Command-line entry point.

Inputs are circuit text files (``qubits <n>`` header plus one gate per line),
operator JSON (``{"n", "A", "B"}`` with ``[re, im]`` pairs) or state JSON
(``{"n", "amps"}``). Every JSON result carries the seed, tool version and
tolerance, and is written with sorted keys so equal inputs give equal bytes.

Exit codes: 0 success, 1 validation error, 2 failed numerical check.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .circuit import (
    Circuit,
    counts,
    expand_single_ancilla,
    exact_distribution,
    measure,
    parse_circuit,
    rebit_circuit,
    run_logical,
    run_physical,
    zero_state,
)
from .codec import (
    decode_state,
    encode_operator,
    encode_state,
    qubit_state_to_json,
    real_operator_to_json,
    rebit_state_to_json,
    state_from_json,
)
from .gates import GateSyntaxError
from .rlinear import DEFAULT_TOL, RLinearOp, is_partial_antiunitary, is_r_unitary

COMMANDS = ("simulate", "encode", "compile", "factor", "sample", "tomo", "check")
ENGINES = ("dense", "stabilizer", "auto")
CHECKS = ("r-unitary", "partial-antiunitary", "r-pauli", "r-clifford", "level", "all")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2


class NumericalCheckFailed(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str
    out: Optional[str]
    seed: int
    shots: int
    engine: str
    tol: float
    what: str
    state: Optional[str]


# --------------------------------------------------------------------------
# input handling


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def load_input(path: str):
    """Return ``("circuit", Circuit)``, ``("operator", RLinearOp)`` or ``("qubit"|"rebit", state)``."""
    text = _read(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
        if "A" in doc:
            return "operator", RLinearOp.from_json(doc)
        if "amps" in doc:
            return state_from_json(doc)
        if "M" in doc:
            from .codec import decode_operator

            return "operator", decode_operator(np.asarray(doc["M"], dtype=float))
        raise ValueError(f"{path}: unrecognized JSON document")
    return "circuit", parse_circuit(text, name=path)


def _resolve_seed(seed: int) -> int:
    if seed != 0:
        return seed
    derived = int(np.random.SeedSequence().entropy % (1 << 63)) or 1
    print(f"seed: {derived}", file=sys.stderr)
    return derived


def _envelope(cfg: RunConfig, seed: Optional[int], body: dict) -> dict:
    doc = {"version": __version__, "tol": cfg.tol, "seed": seed, "command": cfg.command}
    doc.update(body)
    return doc


def _emit(cfg: RunConfig, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: RunConfig) -> dict:
    kind, obj = load_input(cfg.input)
    if kind != "circuit":
        raise ValueError("simulate expects a circuit file")
    psi0 = zero_state(obj.n)
    if cfg.state:
        skind, state = load_input(cfg.state)
        if skind == "rebit":
            state = decode_state(state)
        elif skind != "qubit":
            raise ValueError("--state expects a state JSON file")
        psi0 = state
    logical = run_logical(obj, psi0)
    physical = run_physical(obj, psi0)
    disc = float(np.max(np.abs(logical - physical), initial=0.0))
    doc = _envelope(
        cfg,
        None,
        {
            "final_state": qubit_state_to_json(logical),
            "discrepancy": disc,
            "probs": exact_distribution(logical, cutoff=1e-15),
        },
    )
    if disc > cfg.tol:
        _emit(cfg, doc)
        raise NumericalCheckFailed(f"dual-path discrepancy {disc:.3e} exceeds {cfg.tol}")
    return doc


def cmd_encode(cfg: RunConfig):
    kind, obj = load_input(cfg.input)
    if kind == "circuit":
        return Circuit(obj.n + 1, rebit_circuit(obj), name=obj.name).to_text()
    if kind == "operator":
        return _envelope(cfg, None, {"operator": real_operator_to_json(encode_operator(obj))})
    if kind == "qubit":
        return _envelope(cfg, None, {"state": rebit_state_to_json(encode_state(obj))})
    raise ValueError("encode expects a circuit, operator or qubit state")


def cmd_compile(cfg: RunConfig):
    from .stabilizer import compile_rclifford

    kind, obj = load_input(cfg.input)
    if kind == "circuit":
        if cfg.what == "clifford":
            return compile_rclifford(obj.rlinear(), cfg.tol).to_text()
        return expand_single_ancilla(obj).to_text()
    if kind == "operator":
        return compile_rclifford(obj, cfg.tol).to_text()
    raise ValueError("compile expects a circuit or operator")


def cmd_factor(cfg: RunConfig) -> dict:
    from .compiler import factor_r_unitary, length_bound

    kind, obj = load_input(cfg.input)
    op = obj.rlinear() if kind == "circuit" else obj
    if kind not in ("circuit", "operator"):
        raise ValueError("factor expects a circuit or operator")
    try:
        fac = factor_r_unitary(op, cfg.tol)
    except ArithmeticError as exc:
        raise NumericalCheckFailed(str(exc)) from None
    return _envelope(
        cfg,
        None,
        {
            "n": op.n,
            "num_KL": fac.num_kl,
            "length": fac.length,
            "length_bound": length_bound(op.n),
            "residual": fac.residual(op),
            "factors": fac.to_json(),
        },
    )


def _engine_for(cfg: RunConfig, circ: Circuit) -> str:
    from .stabilizer import is_stabilizer_circuit

    if cfg.engine == "stabilizer":
        if not is_stabilizer_circuit(circ):
            bad = sorted({g.kind for g in circ.gates} - {"H", "S", "K", "CX", "CK", "X", "Z", "CZ"})
            raise ValueError(f"stabilizer engine cannot run gate kinds {bad}")
        return "stabilizer"
    if cfg.engine == "auto":
        return "stabilizer" if is_stabilizer_circuit(circ) else "dense"
    return "dense"


def cmd_sample(cfg: RunConfig) -> dict:
    from . import stabilizer

    kind, circ = load_input(cfg.input)
    if kind != "circuit":
        raise ValueError("sample expects a circuit file")
    engine = _engine_for(cfg, circ)
    seed = _resolve_seed(cfg.seed)
    if engine == "stabilizer":
        t = stabilizer.simulate(circ, seed)
        shots = stabilizer.sample(t, cfg.shots, seed)
        tally: dict[str, int] = {}
        for s in shots:
            tally[s] = tally.get(s, 0) + 1
        probs = stabilizer.strong_probabilities(t) if circ.n <= stabilizer.MAX_STRONG_QUBITS else None
        body = {"counts": dict(sorted(tally.items())), "probs": probs}
    else:
        psi = run_logical(circ, zero_state(circ.n))
        records = measure(psi, cfg.shots, seed)
        body = {"counts": counts(records), "probs": exact_distribution(psi, cutoff=1e-15)}
    body.update({"engine": engine, "shots": cfg.shots})
    return _envelope(cfg, seed, body)


def cmd_tomo(cfg: RunConfig) -> dict:
    from .tomography import report

    kind, obj = load_input(cfg.input)
    if kind == "circuit":
        phi = encode_state(run_logical(obj, zero_state(obj.n)))
    elif kind == "qubit":
        phi = encode_state(obj)
    elif kind == "rebit":
        phi = obj
    else:
        raise ValueError("tomo expects a circuit or state")
    doc = report(phi)
    if doc["reconstruction_overlap"] < 1 - cfg.tol:
        raise NumericalCheckFailed(f"reconstruction overlap {doc['reconstruction_overlap']}")
    return _envelope(cfg, None, doc)


def cmd_check(cfg: RunConfig) -> dict:
    from . import hierarchy

    kind, obj = load_input(cfg.input)
    op = obj.rlinear() if kind == "circuit" else obj
    if kind not in ("circuit", "operator"):
        raise ValueError("check expects a circuit or operator")
    what = cfg.what or "all"
    if what not in CHECKS:
        raise ValueError(f"--what must be one of {CHECKS}")
    results: dict = {}
    unitary = is_r_unitary(op, cfg.tol)
    if what in ("r-unitary", "all"):
        results["r-unitary"] = unitary
    if what in ("partial-antiunitary", "all"):
        results["partial-antiunitary"] = is_partial_antiunitary(op, cfg.tol) is not None
    if what in ("r-pauli", "all"):
        rp = hierarchy.is_r_pauli(op, cfg.tol)
        results["r-pauli"] = rp is not None
        results["decomposition"] = rp.to_json() if rp is not None else None
    if what in ("r-clifford", "all"):
        if not unitary and what == "r-clifford":
            raise ValueError("operator is not R-unitary")
        results["r-clifford"] = bool(unitary and hierarchy.is_r_clifford(op, cfg.tol))
    if what in ("level", "all"):
        if not unitary and what == "level":
            raise ValueError("operator is not R-unitary")
        results["level"] = hierarchy.hierarchy_level(op, 3, cfg.tol) if unitary else None
    body = {"what": what, "results": results}
    if what != "all":
        key = what
        body["result"] = results[key]
    return _envelope(cfg, None, body)


_HANDLERS = {
    "simulate": cmd_simulate,
    "encode": cmd_encode,
    "compile": cmd_compile,
    "factor": cmd_factor,
    "sample": cmd_sample,
    "tomo": cmd_tomo,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rebitsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rebitsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input", help="circuit, operator or state file")
        p.add_argument("--out", default=None, help="write the result here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="RNG seed; 0 derives one and prints it")
        p.add_argument("--shots", type=int, default=1024)
        p.add_argument("--engine", choices=ENGINES, default="auto")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--what", default=None, help="check: " + ", ".join(CHECKS) + "; compile: clifford")
        p.add_argument("--state", default=None, help="simulate: initial state JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        input=args.input,
        out=args.out,
        seed=args.seed,
        shots=args.shots,
        engine=args.engine,
        tol=args.tol,
        what=args.what,
        state=args.state,
    )
    if cfg.shots < 0:
        print("error: --shots must be non-negative", file=sys.stderr)
        return EXIT_INVALID
    if cfg.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        result = _HANDLERS[cfg.command](cfg)
    except NumericalCheckFailed as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, KeyError, ValueError, GateSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(cfg, result)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
