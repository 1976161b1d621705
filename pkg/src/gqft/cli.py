"""Command-line entry point: ``gqft bratteli|synth|simulate|verify|costs``.

Exit codes: 0 pass, 1 verification failure, 2 capability or input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import deserialize, serialize, to_dot
from .errors import GqftError
from .groups import CyclicGroup, GroupFamily, SymmetricGroup, dihedral, group_from_json
from .reps import build_reps, format_label
from .simulator import DEFAULT_MAX_DIM, apply, decode_output, encode_input
from .synth import PLANS, synthesize
from .verify import circuit_stats, cost_report, polynomial_bound, to_csv, verify_group

EXIT_PASS, EXIT_FAIL, EXIT_CAPABILITY = 0, 1, 2

_SHORT = re.compile(r"^([SZD])(\d+)$")


def parse_group(text: str) -> GroupFamily:
    """A group from a JSON file, an inline JSON object, or shorthand ``S4``/``Z6``/``D5``."""
    m = _SHORT.match(text.strip())
    if m:
        fam, n = m.group(1), int(m.group(2))
        return {"S": SymmetricGroup, "Z": CyclicGroup, "D": dihedral}[fam](n)
    if text.lstrip().startswith("{"):
        return group_from_json(json.loads(text))
    path = Path(text)
    if not path.exists():
        raise GqftError(f"group file {text!r} not found")
    return group_from_json(json.loads(path.read_text()))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_default)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o))


# ----------------------------------------------------------------- commands


def cmd_bratteli(args) -> int:
    group = parse_group(args.group)
    reps = build_reps(_tower(group))
    _emit(_json({"group": group.label, **reps.diagram.to_json()}), args.out)
    return EXIT_PASS


def _tower(group):
    from .groups import build_tower

    return build_tower(group)


def cmd_synth(args) -> int:
    group = parse_group(args.group)
    syn = synthesize(group, args.plan)
    blob = serialize(syn.circuit, indent=None)
    if args.out:
        Path(args.out).write_bytes(blob)
    if args.dot:
        Path(args.dot).write_text(to_dot(syn.circuit))
    if args.stats:
        stats = circuit_stats(syn.circuit)
        stats["group"] = group.label
        stats["strategies"] = syn.strategies
        print(_json(stats))
    elif not args.out:
        sys.stdout.write(blob.decode() + "\n")
    return EXIT_PASS


def _input_function(args, group, rng_seed):
    els = group.elements()
    spec = args.input
    if spec == "delta":
        g = group.parse(args.element) if args.element else group.identity()
        return {g: 1.0}
    if spec == "uniform":
        return {g: 1 / np.sqrt(len(els)) for g in els}
    if spec == "random":
        rng = np.random.default_rng(rng_seed)
        x = rng.normal(size=len(els)) + 1j * rng.normal(size=len(els))
        x /= np.linalg.norm(x)
        return dict(zip(els, x))
    data = json.loads(Path(spec).read_text()) if Path(spec).exists() else json.loads(spec)
    if not isinstance(data, dict):
        raise GqftError("input function must be a JSON object mapping elements to [re, im]")
    out = {}
    for key, val in data.items():
        re_, im_ = (val, 0.0) if isinstance(val, (int, float)) else val
        out[group.parse(key)] = complex(re_, im_)
    return out


def cmd_simulate(args) -> int:
    if args.circuit:
        circuit = deserialize(Path(args.circuit).read_bytes())
        spec = circuit.notes.get("group_spec")
        if args.group:
            group = parse_group(args.group)
        elif spec:
            group = group_from_json(spec)
        else:
            raise GqftError("circuit has no group spec; pass --group")
        tower = _tower(group)
        reps = build_reps(tower)
    else:
        if not args.group:
            raise GqftError("pass --circuit or --group")
        syn = synthesize(parse_group(args.group), args.plan)
        circuit, tower, reps, group = syn.circuit, syn.tower, syn.reps, syn.tower.group
    f = _input_function(args, group, args.seed)
    state = encode_input(f, tower, circuit.layout, args.backend, args.max_dim)
    apply(circuit, state)
    decoded, leak = decode_output(state, reps)
    amps = []
    for (sp, tp), amp in decoded.items():
        if abs(amp) > args.threshold:
            rho, j = reps.diagram.path_to_index(sp)
            _, k = reps.diagram.path_to_index(tp)
            amps.append(
                {"rho": format_label(rho), "row": j, "col": k, "s": list(sp), "t": list(tp), "amp": [amp.real, amp.imag]}
            )
    _emit(_json({"group": group.label, "leakage": leak, "norm": state.norm(), "amplitudes": amps}), args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    group = parse_group(args.group)
    report = verify_group(
        group, args.plan, args.tol, args.leakage, args.seed, backend=args.backend, max_dim=args.max_dim
    )
    _emit(_json(report.to_json()), args.out)
    print(
        f"{report.group} plan={args.plan}: max deviation {report.max_deviation:.3e}, "
        f"leakage {report.max_leakage:.3e} -> {'PASS' if report.passed else 'FAIL'}",
        file=sys.stderr,
    )
    return report.exit_code


_FAMILIES = {
    "symmetric": SymmetricGroup,
    "cyclic": CyclicGroup,
    "cyclic2": lambda n: CyclicGroup(2**n),
    "dihedral": dihedral,
}


def _params(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def cmd_costs(args) -> int:
    if args.group:
        groups = [(0, parse_group(args.group))]
    else:
        make = _FAMILIES[args.family]
        groups = [(n, make(n)) for n in _params(args.params)]
    rows = cost_report(groups, args.plan)
    _emit(to_csv(rows), args.out)
    if args.fit and len(rows) >= 2:
        bound = polynomial_bound([r["param"] for r in rows], [r["cost"] for r in rows])
        print(
            f"fit: exponent {bound.exponent:.3f}, bound {bound.coefficient:.4g} * n^{bound.degree}, "
            f"monotone {bound.monotone}",
            file=sys.stderr,
        )
    return EXIT_PASS


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gqft", description="Quantum Fourier transforms over finite groups.")
    p.add_argument("--version", action="version", version=f"gqft {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, group_required=True):
        sp.add_argument("--group", required=group_required, help="group JSON file, inline JSON, or S4/Z6/D5")
        sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("bratteli", help="emit the Bratteli diagram as JSON")
    common(sp)
    sp.set_defaults(func=cmd_bratteli)

    sp = sub.add_parser("synth", help="synthesize a circuit and emit its JSON")
    common(sp)
    sp.add_argument("--plan", choices=PLANS, default="auto")
    sp.add_argument("--stats", action="store_true", help="print I, D, M and per-stage gate counts")
    sp.add_argument("--dot", help="also write a DOT rendering here")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("simulate", help="run a circuit on an input function and dump amplitudes")
    common(sp, group_required=False)
    sp.add_argument("--circuit", help="circuit JSON (default: synthesize from --group)")
    sp.add_argument("--plan", choices=PLANS, default="auto")
    sp.add_argument("--input", default="delta", help="delta | uniform | random | JSON map element -> [re, im]")
    sp.add_argument("--element", help="element for the delta input (default identity)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=1e-12, help="omit amplitudes below this magnitude")
    sp.add_argument("--backend", choices=("auto", "dense", "sparse"), default="auto")
    sp.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="check a synthesized circuit against the dense reference")
    common(sp)
    sp.add_argument("--plan", choices=PLANS, default="auto")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--leakage", type=float, default=1e-12)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--backend", choices=("auto", "dense", "sparse"), default="auto")
    sp.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("costs", help="cost table as CSV")
    common(sp, group_required=False)
    sp.add_argument("--family", choices=sorted(_FAMILIES), default="symmetric")
    sp.add_argument("--params", default="3-6", help="parameter list, e.g. 3-6 or 2,4,8")
    sp.add_argument("--plan", choices=PLANS, default="auto")
    sp.add_argument("--fit", action="store_true", help="report a power-law bound on stderr")
    sp.set_defaults(func=cmd_costs)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GqftError as exc:
        print(f"gqft: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (OSError, json.JSONDecodeError) as exc:
        print(f"gqft: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY


if __name__ == "__main__":
    sys.exit(main())
