"""Mixed-radix circuit intermediate representation.

A circuit is a :class:`RegisterLayout` plus an ordered gate list.  Registers
are named ``alpha[i]``, ``s[i]`` and ``t[i]`` for tower level ``i``.  The gate
set is the granularity the synthesizer emits: conditioned small unitaries,
classical permutations, phase tables, primitive cyclic Fourier transforms and
Schur-certified structured unitaries on the row-path register.

Conditions (``when``) are a list of alternative assignments
``{register: value}``; a gate branch fires when any alternative matches.
``None`` means unconditional.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Union

import numpy as np

from .errors import ParseError, ValidationError
from .reps import SchurBlock, reconstruct_certified

UNITARY_TOL = 1e-12
CERT_TOL = 1e-10

Assignment = dict[str, int]
When = Union[list[Assignment], None]


@dataclass(frozen=True)
class Register:
    role: str
    level: int
    radix: int

    @property
    def name(self) -> str:
        return f"{self.role}[{self.level}]"


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    @classmethod
    def standard(cls, alpha_radices: list[int], edge_radices: list[int]) -> "RegisterLayout":
        """``alpha[1..m]`` then ``s[1..m]`` then ``t[1..m]``."""
        regs = [Register("alpha", i + 1, r) for i, r in enumerate(alpha_radices)]
        regs += [Register("s", i + 1, r) for i, r in enumerate(edge_radices)]
        regs += [Register("t", i + 1, r) for i, r in enumerate(edge_radices)]
        return cls(tuple(regs))

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.registers]

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(r.radix for r in self.registers)

    @property
    def dimension(self) -> int:
        return math.prod(self.radices)

    @property
    def num_levels(self) -> int:
        return sum(1 for r in self.registers if r.role == "alpha")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def radix(self, name: str) -> int:
        return self.registers[self.axis(name)].radix

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def to_json(self) -> list[dict]:
        return [{"role": r.role, "level": r.level, "radix": r.radix} for r in self.registers]

    @classmethod
    def from_json(cls, data) -> "RegisterLayout":
        return cls(tuple(Register(str(d["role"]), int(d["level"]), int(d["radix"])) for d in data))


# ------------------------------------------------------------------- gates


@dataclass(eq=False)
class Branch:
    when: When
    matrix: np.ndarray


@dataclass(eq=False)
class ConditionedUnitary:
    targets: list[str]
    branches: list[Branch]
    stage: str = ""
    kind = "conditioned_unitary"

    def registers(self) -> list[str]:
        return list(self.targets) + _when_regs(b.when for b in self.branches)

    def adjoint(self):
        return ConditionedUnitary(
            self.targets, [Branch(b.when, b.matrix.conj().T) for b in self.branches], self.stage
        )


@dataclass(eq=False)
class ClassicalPermutation:
    """Relabels basis values of ``registers``; ``mapping`` lists moved labels only."""

    registers_: list[str]
    mapping: dict[tuple[int, ...], tuple[int, ...]]
    stage: str = ""
    kind = "classical_permutation"

    def registers(self) -> list[str]:
        return list(self.registers_)

    def adjoint(self):
        return ClassicalPermutation(
            self.registers_, {v: k for k, v in self.mapping.items()}, self.stage
        )


@dataclass(eq=False)
class Phase:
    """Multiplies by ``exp(2 pi i table[values] / modulus)``; missing entries are 0."""

    registers_: list[str]
    table: dict[tuple[int, ...], int]
    modulus: int
    stage: str = ""
    kind = "phase"

    def registers(self) -> list[str]:
        return list(self.registers_)

    def adjoint(self):
        return Phase(
            self.registers_, {k: (-v) % self.modulus for k, v in self.table.items()}, self.modulus, self.stage
        )


@dataclass(eq=False)
class PrimitiveCyclicQFT:
    """``|offset+x> -> N^-1/2 sum_y w_N^{xy} |offset+y>`` for ``x < N = order``;
    other values of the target are left alone."""

    target: str
    order: int
    offset: int = 0
    when: When = None
    inverse: bool = False
    stage: str = ""
    kind = "primitive_cyclic_qft"

    def registers(self) -> list[str]:
        return [self.target] + _when_regs([self.when])

    def matrix(self) -> np.ndarray:
        n = self.order
        k = np.arange(n)
        sign = -1 if self.inverse else 1
        return np.exp(sign * 2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)

    def adjoint(self):
        return PrimitiveCyclicQFT(
            self.target, self.order, self.offset, self.when, not self.inverse, self.stage
        )


@dataclass(eq=False)
class StructuredUnitary:
    """``⊕_rho rho(gamma)`` on the row paths ``s[1..level]``.

    ``paths[r]`` is the register assignment of row ``r``; rows not listed are
    left alone.  ``blocks``/``row_keys`` carry the Schur certificate.
    """

    level: int
    paths: list[tuple[int, ...]]
    matrix: np.ndarray
    blocks: list[SchurBlock]
    row_keys: list[tuple[int, int, int, int]]
    generator: str = ""
    stage: str = ""
    kind = "structured_unitary"

    def registers(self) -> list[str]:
        return [f"s[{i}]" for i in range(1, self.level + 1)]

    def adjoint(self):
        return StructuredUnitary(
            self.level,
            self.paths,
            self.matrix.conj().T,
            [SchurBlock(b.eta, b.zeta, b.m, b.d, b.matrix.conj().T) for b in self.blocks],
            self.row_keys,
            self.generator + "^-1",
            self.stage,
        )

    def distinct_blocks(self) -> list[SchurBlock]:
        seen = {}
        for b in self.blocks:
            seen.setdefault((str(b.eta), str(b.zeta)), b)
        return list(seen.values())


Gate = Union[ConditionedUnitary, ClassicalPermutation, Phase, PrimitiveCyclicQFT, StructuredUnitary]


def _when_regs(whens: Iterable[When]) -> list[str]:
    out: list[str] = []
    for when in whens:
        for alt in when or []:
            for reg in alt:
                if reg not in out:
                    out.append(reg)
    return out


@dataclass(eq=False)
class Circuit:
    layout: RegisterLayout
    gates: list[Gate] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.gates)

    def without(self, index: int) -> "Circuit":
        return Circuit(self.layout, self.gates[:index] + self.gates[index + 1 :], dict(self.notes))

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.layout != self.layout:
            raise ValidationError("cannot concatenate circuits with different layouts")
        return Circuit(self.layout, self.gates + other.gates, dict(self.notes))

    def adjoint(self) -> "Circuit":
        return Circuit(self.layout, [g.adjoint() for g in reversed(self.gates)], dict(self.notes))

    def stage_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.stage] = out.get(g.stage, 0) + 1
        return out


# -------------------------------------------------------------- validation


def _check_unitary(mat: np.ndarray, dim: int, where: str, out: list[str]) -> None:
    if mat.shape != (dim, dim):
        out.append(f"{where}: matrix shape {mat.shape}, expected {(dim, dim)}")
        return
    err = np.abs(mat.conj().T @ mat - np.eye(dim)).max() if dim else 0.0
    if err > UNITARY_TOL:
        out.append(f"{where}: matrix not unitary (residual {err:.2e})")


def validate(circuit: Circuit) -> list[str]:
    """Return diagnostics (empty when the circuit is valid)."""
    layout = circuit.layout
    diags: list[str] = []
    if any(r.radix < 2 for r in layout.registers):
        diags.append("layout: register radix below 2")
    if len(set(layout.names)) != len(layout.names):
        diags.append("layout: duplicate register")
    for n, gate in enumerate(circuit.gates):
        where = f"gate {n} ({gate.kind})"
        missing = [r for r in gate.registers() if r not in layout]
        if missing:
            diags.append(f"{where}: unknown register {missing[0]!r}")
            continue
        diags.extend(_validate_values(gate, layout, where))
        if isinstance(gate, ConditionedUnitary):
            if set(gate.targets) & set(_when_regs(b.when for b in gate.branches)):
                diags.append(f"{where}: condition on a target register")
            dim = math.prod(layout.radix(t) for t in gate.targets)
            for b in gate.branches:
                _check_unitary(b.matrix, dim, where, diags)
            alts = [alt for b in gate.branches for alt in (b.when or [{}])]
            if _overlapping(alts):
                diags.append(f"{where}: overlapping condition alternatives")
        elif isinstance(gate, ClassicalPermutation):
            keys = set(gate.mapping)
            vals = list(gate.mapping.values())
            if len(set(vals)) != len(vals) or set(vals) != keys:
                diags.append(f"{where}: mapping is not a bijection")
        elif isinstance(gate, Phase):
            if gate.modulus < 1:
                diags.append(f"{where}: modulus must be positive")
        elif isinstance(gate, PrimitiveCyclicQFT):
            if gate.order < 1 or gate.offset < 0 or gate.offset + gate.order > layout.radix(gate.target):
                diags.append(f"{where}: order/offset exceed register radix")
            if gate.when and any(gate.target in alt for alt in gate.when):
                diags.append(f"{where}: condition on a target register")
        elif isinstance(gate, StructuredUnitary):
            _check_unitary(gate.matrix, len(gate.paths), where, diags)
            if len(gate.row_keys) != len(gate.paths):
                diags.append(f"{where}: certificate size mismatch")
            elif gate.matrix.shape == (len(gate.paths),) * 2:
                try:
                    expect = reconstruct_certified(gate.blocks, gate.row_keys)
                    resid = float(np.abs(expect - gate.matrix).max()) if gate.paths else 0.0
                except (IndexError, KeyError):
                    resid = float("inf")
                if resid > CERT_TOL:
                    diags.append(f"{where}: certificate violated (residual {resid:.2e})")
    return diags


def _overlapping(alts: list[Assignment]) -> bool:
    # two assignments overlap unless they disagree on some shared register
    for n, a in enumerate(alts):
        for b in alts[n + 1 :]:
            if all(b.get(r, v) == v for r, v in a.items()):
                return True
    return False


def _validate_values(gate, layout, where) -> list[str]:
    out = []

    def check(reg, val):
        if not 0 <= val < layout.radix(reg):
            out.append(f"{where}: value {val} out of range for {reg}")

    whens = []
    if isinstance(gate, ConditionedUnitary):
        whens = [b.when for b in gate.branches]
    elif isinstance(gate, PrimitiveCyclicQFT):
        whens = [gate.when]
    for when in whens:
        for alt in when or []:
            for reg, val in alt.items():
                check(reg, val)
    if isinstance(gate, (ClassicalPermutation, Phase)):
        regs = gate.registers_
        entries = gate.mapping.items() if isinstance(gate, ClassicalPermutation) else gate.table.items()
        for key, val in entries:
            labels = [key, val] if isinstance(gate, ClassicalPermutation) else [key]
            for lab in labels:
                if len(lab) != len(regs):
                    out.append(f"{where}: label {lab} has wrong length")
                    return out
                for reg, v in zip(regs, lab):
                    check(reg, v)
    if isinstance(gate, StructuredUnitary):
        regs = gate.registers()
        for path in gate.paths:
            if len(path) != len(regs):
                out.append(f"{where}: path {path} has wrong length")
                return out
            for reg, v in zip(regs, path):
                check(reg, v)
    return out


def check_valid(circuit: Circuit) -> None:
    diags = validate(circuit)
    if diags:
        raise ValidationError("; ".join(diags))


# -------------------------------------------------------------------- cost


def qft_cost(order: int) -> int:
    if order <= 1:
        return 0
    return math.ceil(math.log2(order)) * math.ceil(math.log2(math.log2(order + 2)))


def gate_cost(gate: Gate, layout: RegisterLayout) -> int:
    if isinstance(gate, ConditionedUnitary):
        dim = math.prod(layout.radix(t) for t in gate.targets)
        return len(gate.branches) * dim * dim
    if isinstance(gate, ClassicalPermutation):
        return len(gate.mapping)
    if isinstance(gate, Phase):
        return len(gate.table)
    if isinstance(gate, PrimitiveCyclicQFT):
        return qft_cost(gate.order)
    if isinstance(gate, StructuredUnitary):
        return sum(b.m**2 for b in gate.distinct_blocks())
    raise TypeError(type(gate))


def cost(circuit: Circuit) -> int:
    """Elementary-operation count under the package cost model."""
    check_valid(circuit)
    return sum(gate_cost(g, circuit.layout) for g in circuit.gates)


def cost_by_stage(circuit: Circuit) -> dict[str, int]:
    out: dict[str, int] = {}
    for g in circuit.gates:
        out[g.stage] = out.get(g.stage, 0) + gate_cost(g, circuit.layout)
    return out


# ----------------------------------------------------------- serialization


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _mat_json(mat: np.ndarray) -> list:
    return [[_cplx(z) for z in row] for row in np.asarray(mat)]


def _mat_from(data) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError(f"matrix must be a 2-D array of [re, im] pairs, got shape {arr.shape}")
    out = np.empty(arr.shape[:2], dtype=complex)
    # assign parts separately: re + 1j*im would drop signed zeros
    out.real = arr[..., 0]
    out.imag = arr[..., 1]
    return out


def _label_json(label) -> Any:
    return list(label) if isinstance(label, tuple) else label


def _label_from(data) -> Any:
    return tuple(data) if isinstance(data, list) else data


def gate_to_json(gate: Gate) -> dict:
    d: dict[str, Any] = {"type": gate.kind, "stage": gate.stage}
    if isinstance(gate, ConditionedUnitary):
        d["targets"] = list(gate.targets)
        d["branches"] = [{"when": b.when, "matrix": _mat_json(b.matrix)} for b in gate.branches]
    elif isinstance(gate, ClassicalPermutation):
        d["registers"] = list(gate.registers_)
        d["mapping"] = [[list(k), list(v)] for k, v in gate.mapping.items()]
    elif isinstance(gate, Phase):
        d["registers"] = list(gate.registers_)
        d["modulus"] = gate.modulus
        d["table"] = [[list(k), v] for k, v in gate.table.items()]
    elif isinstance(gate, PrimitiveCyclicQFT):
        d.update(target=gate.target, order=gate.order, offset=gate.offset, when=gate.when, inverse=gate.inverse)
    elif isinstance(gate, StructuredUnitary):
        d.update(
            level=gate.level,
            generator=gate.generator,
            paths=[list(p) for p in gate.paths],
            matrix=_mat_json(gate.matrix),
            certificate={
                "blocks": [
                    {"eta": _label_json(b.eta), "zeta": _label_json(b.zeta), "m": b.m, "d": b.d, "matrix": _mat_json(b.matrix)}
                    for b in gate.blocks
                ],
                "rows": [list(k) for k in gate.row_keys],
            },
        )
    return d


def _when_from(data) -> When:
    if data is None:
        return None
    return [{str(k): int(v) for k, v in alt.items()} for alt in data]


def gate_from_json(d: dict) -> Gate:
    kind = d["type"]
    stage = d.get("stage", "")
    if kind == "conditioned_unitary":
        return ConditionedUnitary(
            list(d["targets"]),
            [Branch(_when_from(b["when"]), _mat_from(b["matrix"])) for b in d["branches"]],
            stage,
        )
    if kind == "classical_permutation":
        return ClassicalPermutation(
            list(d["registers"]), {tuple(k): tuple(v) for k, v in d["mapping"]}, stage
        )
    if kind == "phase":
        return Phase(list(d["registers"]), {tuple(k): int(v) for k, v in d["table"]}, int(d["modulus"]), stage)
    if kind == "primitive_cyclic_qft":
        return PrimitiveCyclicQFT(
            d["target"], int(d["order"]), int(d.get("offset", 0)), _when_from(d.get("when")), bool(d.get("inverse", False)), stage
        )
    if kind == "structured_unitary":
        cert = d["certificate"]
        return StructuredUnitary(
            int(d["level"]),
            [tuple(p) for p in d["paths"]],
            _mat_from(d["matrix"]) if d["paths"] else np.zeros((0, 0), dtype=complex),
            [
                SchurBlock(_label_from(b["eta"]), _label_from(b["zeta"]), int(b["m"]), int(b["d"]), _mat_from(b["matrix"]))
                for b in cert["blocks"]
            ],
            [tuple(k) for k in cert["rows"]],
            d.get("generator", ""),
            stage,
        )
    raise ParseError(f"unknown gate type {kind!r}")


def circuit_to_json(circuit: Circuit) -> dict:
    return {
        "format": "gqft-circuit/1",
        "layout": circuit.layout.to_json(),
        "gates": [gate_to_json(g) for g in circuit.gates],
        "notes": circuit.notes,
    }


def serialize(circuit: Circuit, indent: int | None = None) -> bytes:
    return json.dumps(circuit_to_json(circuit), indent=indent).encode()


def circuit_from_json(data: dict) -> Circuit:
    if not isinstance(data, dict) or "layout" not in data or "gates" not in data:
        raise ParseError("circuit document needs 'layout' and 'gates'")
    layout = RegisterLayout.from_json(data["layout"])
    gates = []
    for n, g in enumerate(data["gates"]):
        try:
            gates.append(gate_from_json(g))
        except ParseError as exc:
            raise ParseError(f"gates[{n}]: {exc}") from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"gates[{n}]: malformed gate ({exc!r})") from None
    return Circuit(layout, gates, dict(data.get("notes", {})))


def deserialize(blob: bytes | str) -> Circuit:
    try:
        data = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return circuit_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed circuit document: {exc!r}") from None


def to_dot(circuit: Circuit) -> str:
    """Gate sequence as a Graphviz digraph, one node per gate."""
    lines = ["digraph circuit {", "  rankdir=LR;", '  node [shape=box, fontsize=10];']
    for n, g in enumerate(circuit.gates):
        regs = ",".join(g.registers())
        label = f"{n}: {g.kind}\\n{g.stage}\\n[{regs}]"
        lines.append(f'  g{n} [label="{label}"];')
        if n:
            lines.append(f"  g{n - 1} -> g{n};")
    lines.append("}")
    return "\n".join(lines) + "\n"
