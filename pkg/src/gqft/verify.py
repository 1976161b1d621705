"""End-to-end checks of synthesized circuits and cost-scaling reports."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .circuit import Circuit, cost, cost_by_stage, gate_cost
from .groups import GroupFamily
from .simulator import DEFAULT_MAX_DIM, apply, encode_input, fourier_vector
from .synth import Synthesis, synthesize

EXHAUSTIVE_LIMIT = 30
SAMPLE_SIZE = 24


@dataclass
class ColumnResult:
    input: str
    deviation: float
    leakage: float


@dataclass
class VerificationReport:
    group: str
    plan: str
    strategies: list[str]
    tolerance: float
    leakage_bound: float
    backend: str
    columns: list[ColumnResult] = field(default_factory=list)
    reference_unitarity: float = 0.0
    stats: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.columns), default=0.0)

    @property
    def max_leakage(self) -> float:
        return max((c.leakage for c in self.columns), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance and self.max_leakage <= self.leakage_bound

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(
            max_deviation=self.max_deviation,
            max_leakage=self.max_leakage,
            passed=self.passed,
        )
        return out


def circuit_stats(circuit: Circuit) -> dict[str, Any]:
    per_stage: dict[str, dict[str, int]] = {}
    costs = cost_by_stage(circuit)
    for g in circuit.gates:
        row = per_stage.setdefault(g.stage, {"gates": 0, "cost": 0})
        row["gates"] += 1
    for stage, c in costs.items():
        per_stage[stage]["cost"] = c
    notes = circuit.notes
    return {
        "I": notes.get("I"),
        "D": notes.get("D"),
        "M": notes.get("M"),
        "per_stage": per_stage,
        "gates": len(circuit.gates),
        "cost": cost(circuit),
    }


def select_inputs(order: int, seed: int = 0, sample: int = SAMPLE_SIZE) -> list[int | str]:
    """Column indices to check: every column for small groups, otherwise a
    seeded sample plus the identity column and the uniform function."""
    if order <= EXHAUSTIVE_LIMIT:
        return list(range(order))
    rng = np.random.default_rng(seed)
    picks = sorted(int(c) for c in rng.choice(order, size=min(sample, order), replace=False))
    return picks + ["identity", "uniform"]


def run_input(syn: Synthesis, x: np.ndarray, backend: str = "auto", max_dim: int = DEFAULT_MAX_DIM):
    """Run the circuit on the function with values ``x`` (aligned with the
    group's element order); return the decoded Fourier vector and leakage."""
    els = syn.reps.elements()
    f = {g: complex(v) for g, v in zip(els, x) if v != 0}
    state = encode_input(f, syn.tower, syn.circuit.layout, backend, max_dim)
    apply(syn.circuit, state)
    return fourier_vector(state, syn.reps)


def _input_vector(syn: Synthesis, which) -> np.ndarray:
    els = syn.reps.elements()
    x = np.zeros(len(els), dtype=complex)
    if which == "uniform":
        x[:] = 1 / math.sqrt(len(els))
    elif which == "identity":
        x[els.index(syn.tower.group.identity())] = 1
    else:
        x[which] = 1
    return x


def verify_synthesis(
    syn: Synthesis,
    tol: float = 1e-8,
    leakage_bound: float = 1e-12,
    seed: int = 0,
    inputs: Sequence | None = None,
    backend: str = "auto",
    max_dim: int = DEFAULT_MAX_DIM,
    plan: str = "auto",
) -> VerificationReport:
    start = time.perf_counter()
    reps = syn.reps
    ref = reps.dense_qft_matrix()
    report = VerificationReport(
        syn.tower.group.label, plan, syn.strategies, tol, leakage_bound, backend
    )
    report.reference_unitarity = float(np.abs(ref.conj().T @ ref - np.eye(len(ref))).max())
    report.stats = circuit_stats(syn.circuit)
    els = reps.elements()
    if inputs is None:
        inputs = select_inputs(len(els), seed)
    for which in inputs:
        x = _input_vector(syn, which)
        vec, leak = run_input(syn, x, backend, max_dim)
        dev = float(np.abs(vec - ref @ x).max())
        name = which if isinstance(which, str) else syn.tower.group.format(els[which])
        report.columns.append(ColumnResult(name, dev, float(leak)))
    report.seconds = time.perf_counter() - start
    return report


def verify_group(
    group: GroupFamily,
    plan: str = "auto",
    tol: float = 1e-8,
    leakage_bound: float = 1e-12,
    seed: int = 0,
    inputs: Sequence | None = None,
    backend: str = "auto",
    max_dim: int = DEFAULT_MAX_DIM,
) -> VerificationReport:
    """Synthesize and check against the dense reference matrix."""
    syn = synthesize(group, plan)
    return verify_synthesis(syn, tol, leakage_bound, seed, inputs, backend, max_dim, plan)


def plan_agreement(group: GroupFamily, plan_a: str, plan_b: str, inputs=None, seed: int = 0, backend: str = "auto") -> float:
    """Max difference between decoded outputs of two plans over the selected inputs."""
    a, b = synthesize(group, plan_a), synthesize(group, plan_b)
    if inputs is None:
        inputs = select_inputs(group.order, seed)
    worst = 0.0
    for which in inputs:
        x = _input_vector(a, which)
        va, _ = run_input(a, x, backend)
        vb, _ = run_input(b, x, backend)
        worst = max(worst, float(np.abs(va - vb).max()))
    return worst


# --------------------------------------------------------------- costs


COST_FIELDS = ["group", "param", "order", "I", "D", "M", "log2_order", "gates", "cost"]


def cost_row(group: GroupFamily, param: int, plan: str = "auto") -> dict[str, Any]:
    syn = synthesize(group, plan)
    c = syn.circuit
    return {
        "group": group.label,
        "param": param,
        "order": group.order,
        "I": c.notes["I"],
        "D": c.notes["D"],
        "M": c.notes["M"],
        "log2_order": round(math.log2(group.order), 6) if group.order > 1 else 0.0,
        "gates": len(c.gates),
        "cost": sum(gate_cost(g, c.layout) for g in c.gates),
    }


def cost_report(groups: Sequence[tuple[int, GroupFamily]], plan: str = "auto") -> list[dict[str, Any]]:
    return [cost_row(g, param, plan) for param, g in groups]


def to_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COST_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


@dataclass
class PolynomialBound:
    exponent: float  # least-squares log-log slope
    degree: int
    coefficient: float  # smallest c with cost <= c * n^degree at every sample
    monotone: bool


def polynomial_bound(ns: Sequence[int], costs: Sequence[float]) -> PolynomialBound:
    """Fit ``cost ~ n^k`` on log-log axes and bound the data by ``c n^ceil(k)``."""
    ln = np.log(np.asarray(ns, dtype=float))
    lc = np.log(np.asarray(costs, dtype=float))
    k = float(np.polyfit(ln, lc, 1)[0])
    deg = max(0, math.ceil(k - 1e-9))
    c = max(ci / n**deg for n, ci in zip(ns, costs))
    mono = all(b >= a for a, b in zip(costs, costs[1:]))
    return PolynomialBound(k, deg, c, mono)


def quadratic_fit(ns: Sequence[int], costs: Sequence[float]) -> tuple[np.ndarray, float]:
    """Least-squares quadratic and its max relative residual."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(costs, dtype=float)
    coeffs = np.polyfit(x, y, 2)
    resid = float(np.max(np.abs(np.polyval(coeffs, x) - y) / y))
    return coeffs, resid
