"""State-vector execution of circuits over the mixed-radix register space.

The dense backend stores every amplitude (capped by ``max_dim``).  The sparse
backend stores only nonzero amplitudes keyed by register-value tuples; it
exists for circuits whose register space is far larger than their support,
such as the ``Z_{2^n}`` towers, and doubles as an independent cross-check of
the dense gate kernels.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterator, Mapping

import numpy as np

from .circuit import (
    Circuit,
    ClassicalPermutation,
    ConditionedUnitary,
    Gate,
    Phase,
    PrimitiveCyclicQFT,
    RegisterLayout,
    StructuredUnitary,
)
from .errors import ExecutionError, NormalizationError
from .groups import Element, Tower
from .reps import BratteliDiagram, RepresentationSystem

DEFAULT_MAX_DIM = 2**24
PRUNE = 1e-30  # squared magnitude below which sparse amplitudes are dropped


class DenseState:
    backend = "dense"

    def __init__(self, layout: RegisterLayout, data: np.ndarray | None = None, max_dim: int = DEFAULT_MAX_DIM):
        if layout.dimension > max_dim:
            raise ExecutionError(
                f"dense state needs {layout.dimension} amplitudes, cap is {max_dim}; use the sparse backend"
            )
        self.layout = layout
        if data is None:
            data = np.zeros(layout.radices, dtype=complex)
        self.data = data.reshape(layout.radices)

    def copy(self) -> "DenseState":
        return DenseState(self.layout, self.data.copy(), max_dim=self.layout.dimension)

    def __setitem__(self, label: tuple[int, ...], value: complex) -> None:
        self.data[tuple(label)] = value

    def __getitem__(self, label: tuple[int, ...]) -> complex:
        return complex(self.data[tuple(label)])

    def items(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        for idx in zip(*np.nonzero(self.data)):
            yield tuple(int(i) for i in idx), complex(self.data[idx])

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def vector(self) -> np.ndarray:
        return self.data.reshape(-1)

    # ---- gate kernels

    def _axes(self, names) -> list[int]:
        return [self.layout.axis(n) for n in names]

    def _views(self, when):
        """Yield ``(view, remaining_axes)`` for each alternative assignment."""
        for alt in when or [{}]:
            idx: list = [slice(None)] * self.data.ndim
            for reg, val in alt.items():
                idx[self.layout.axis(reg)] = val
            remaining = [a for a in range(self.data.ndim) if not isinstance(idx[a], int)]
            yield self.data[tuple(idx)], remaining

    def _apply_matrix(self, when, target_axes, mat, lo=0, hi=None):
        for view, remaining in self._views(when):
            pos = [remaining.index(a) for a in target_axes]
            moved = np.moveaxis(view, pos, range(len(pos)))
            if hi is not None:
                moved = moved[lo:hi]
            shape = moved.shape
            d = mat.shape[0]
            flat = moved.reshape(d, -1)
            moved[...] = (mat @ flat).reshape(shape)

    def apply_gate(self, gate: Gate) -> None:
        if isinstance(gate, ConditionedUnitary):
            axes = self._axes(gate.targets)
            for b in gate.branches:
                self._apply_matrix(b.when, axes, b.matrix)
        elif isinstance(gate, PrimitiveCyclicQFT):
            axis = self.layout.axis(gate.target)
            self._apply_matrix(gate.when, [axis], gate.matrix(), gate.offset, gate.offset + gate.order)
        elif isinstance(gate, ClassicalPermutation):
            if not gate.mapping:
                return
            axes = self._axes(gate.registers_)
            moved = np.moveaxis(self.data, axes, range(len(axes)))
            src = tuple(np.array(c) for c in zip(*gate.mapping.keys()))
            dst = tuple(np.array(c) for c in zip(*gate.mapping.values()))
            vals = moved[src]
            moved[dst] = vals
        elif isinstance(gate, Phase):
            if not gate.table:
                return
            axes = self._axes(gate.registers_)
            moved = np.moveaxis(self.data, axes, range(len(axes)))
            keys = tuple(np.array(c) for c in zip(*gate.table.keys()))
            exps = np.array(list(gate.table.values()))
            phases = np.exp(2j * np.pi * (exps % gate.modulus) / gate.modulus)
            sub = moved[keys]
            moved[keys] = sub * phases.reshape((-1,) + (1,) * (sub.ndim - 1))
        elif isinstance(gate, StructuredUnitary):
            if not gate.paths:
                return
            axes = self._axes(gate.registers())
            moved = np.moveaxis(self.data, axes, range(len(axes)))
            coords = np.array(gate.paths)
            for rows in _components(gate):
                idx = tuple(coords[rows, k] for k in range(coords.shape[1]))
                sub = moved[idx]
                mat = gate.matrix[np.ix_(rows, rows)]
                moved[idx] = (mat @ sub.reshape(len(rows), -1)).reshape(sub.shape)
        else:
            raise ExecutionError(f"unknown gate {gate!r}")


def _components(gate: StructuredUnitary) -> list[np.ndarray]:
    cached = getattr(gate, "_components", None)
    if cached is not None:
        return cached
    n = len(gate.paths)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    nz = np.argwhere(np.abs(gate.matrix) > 0)
    for a, b in nz:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = defaultdict(list)
    for a in range(n):
        groups[find(a)].append(a)
    comps = [np.array(g) for g in groups.values()]
    gate._components = comps
    return comps


class SparseState:
    backend = "sparse"

    def __init__(self, layout: RegisterLayout, amps: Mapping[tuple[int, ...], complex] | None = None):
        self.layout = layout
        self.amps: dict[tuple[int, ...], complex] = dict(amps or {})

    def copy(self) -> "SparseState":
        return SparseState(self.layout, self.amps)

    def __setitem__(self, label, value) -> None:
        self.amps[tuple(label)] = complex(value)

    def __getitem__(self, label) -> complex:
        return self.amps.get(tuple(label), 0j)

    def items(self):
        return iter(list(self.amps.items()))

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def vector(self) -> np.ndarray:
        out = np.zeros(self.layout.radices, dtype=complex)
        for lab, a in self.amps.items():
            out[lab] = a
        return out.reshape(-1)

    def _matches(self, label, when) -> bool:
        if when is None:
            return True
        for alt in when:
            if all(label[self.layout.axis(r)] == v for r, v in alt.items()):
                return True
        return False

    def _apply_local(self, axes, select, transform):
        """Group amplitudes by the non-``axes`` part; ``transform(local_vector_dict)``
        returns the new local dict for each group passing ``select``."""
        groups: dict[tuple, dict[tuple, complex]] = defaultdict(dict)
        out: dict[tuple, complex] = {}
        axset = set(axes)
        rest_axes = [a for a in range(len(self.layout.radices)) if a not in axset]
        for lab, amp in self.amps.items():
            if not select(lab):
                out[lab] = amp
                continue
            rest = tuple(lab[a] for a in rest_axes)
            local = tuple(lab[a] for a in axes)
            groups[rest][local] = amp
        n = len(self.layout.radices)
        for rest, local in groups.items():
            for loc, amp in transform(local).items():
                if abs(amp) ** 2 < PRUNE:
                    continue
                lab = [0] * n
                for a, v in zip(rest_axes, rest):
                    lab[a] = v
                for a, v in zip(axes, loc):
                    lab[a] = v
                lab = tuple(lab)
                out[lab] = out.get(lab, 0j) + amp
        self.amps = out

    def apply_gate(self, gate: Gate) -> None:
        lay = self.layout
        if isinstance(gate, ConditionedUnitary):
            axes = [lay.axis(t) for t in gate.targets]
            radices = [lay.radices[a] for a in axes]
            for b in gate.branches:
                mat = b.matrix

                def transform(local, mat=mat):
                    vec = np.zeros(mat.shape[0], dtype=complex)
                    for loc, amp in local.items():
                        vec[np.ravel_multi_index(loc, radices)] = amp
                    new = mat @ vec
                    return {
                        tuple(int(x) for x in np.unravel_index(i, radices)): new[i]
                        for i in np.nonzero(new)[0]
                    }

                self._apply_local(axes, lambda lab, w=b.when: self._matches(lab, w), transform)
        elif isinstance(gate, PrimitiveCyclicQFT):
            axis = lay.axis(gate.target)
            mat = gate.matrix()
            lo, n = gate.offset, gate.order

            def transform(local):
                out = {}
                vec = np.zeros(n, dtype=complex)
                for (v,), amp in local.items():
                    if lo <= v < lo + n:
                        vec[v - lo] += amp
                    else:
                        out[(v,)] = amp
                if vec.any():
                    new = mat @ vec
                    for i in range(n):
                        out[(lo + i,)] = out.get((lo + i,), 0j) + new[i]
                return out

            self._apply_local([axis], lambda lab: self._matches(lab, gate.when), transform)
        elif isinstance(gate, ClassicalPermutation):
            axes = [lay.axis(r) for r in gate.registers_]
            out = {}
            for lab, amp in self.amps.items():
                key = tuple(lab[a] for a in axes)
                new = gate.mapping.get(key)
                if new is not None:
                    lab = list(lab)
                    for a, v in zip(axes, new):
                        lab[a] = v
                    lab = tuple(lab)
                out[lab] = amp
            self.amps = out
        elif isinstance(gate, Phase):
            axes = [lay.axis(r) for r in gate.registers_]
            for lab in list(self.amps):
                e = gate.table.get(tuple(lab[a] for a in axes))
                if e:
                    self.amps[lab] *= np.exp(2j * np.pi * (e % gate.modulus) / gate.modulus)
        elif isinstance(gate, StructuredUnitary):
            axes = [lay.axis(r) for r in gate.registers()]
            where = {tuple(p): r for r, p in enumerate(gate.paths)}
            mat = gate.matrix
            paths = gate.paths

            def transform(local):
                out = {}
                vec = np.zeros(len(paths), dtype=complex)
                for loc, amp in local.items():
                    r = where.get(loc)
                    if r is None:
                        out[loc] = amp
                    else:
                        vec[r] = amp
                new = mat @ vec
                for r in np.nonzero(new)[0]:
                    out[tuple(paths[r])] = new[r]
                return out

            self._apply_local(axes, lambda lab: True, transform)
        else:
            raise ExecutionError(f"unknown gate {gate!r}")


State = DenseState | SparseState


def new_state(layout: RegisterLayout, backend: str = "auto", max_dim: int = DEFAULT_MAX_DIM) -> State:
    if backend == "auto":
        backend = "dense" if layout.dimension <= max_dim else "sparse"
    if backend == "dense":
        return DenseState(layout, max_dim=max_dim)
    if backend == "sparse":
        return SparseState(layout)
    raise ExecutionError(f"unknown backend {backend!r}")


def apply(circuit: Circuit, state: State, check_norm: bool = False, tol: float = 1e-10) -> State:
    """Apply the gates of ``circuit`` to ``state`` in place and return it."""
    if state.layout != circuit.layout:
        raise ExecutionError("state layout does not match circuit layout")
    ref = state.norm() if check_norm else None
    for n, gate in enumerate(circuit.gates):
        state.apply_gate(gate)
        if check_norm and abs(state.norm() - ref) > tol:
            raise ExecutionError(f"norm drift after gate {n}")
    return state


# ------------------------------------------------------------ encode/decode


def input_label(tower: Tower, layout: RegisterLayout, g: Element) -> tuple[int, ...]:
    m = tower.num_levels
    digits = tower.coset_digits(g)  # (k_m, ..., k_1)
    label = [0] * len(layout.registers)
    for n, k in enumerate(digits):
        label[layout.axis(f"alpha[{m - n}]")] = k + 1
    return tuple(label)


def encode_input(
    f: Mapping[Element, complex],
    tower: Tower,
    layout: RegisterLayout,
    backend: str = "auto",
    max_dim: int = DEFAULT_MAX_DIM,
    tol: float = 1e-10,
) -> State:
    """Amplitude ``f(g)`` on the transversal-digit label of ``g`` with empty paths."""
    norm = math.sqrt(sum(abs(v) ** 2 for v in f.values()))
    if abs(norm - 1) > tol:
        raise NormalizationError(f"input function has norm {norm:.12g}, expected 1")
    state = new_state(layout, backend, max_dim)
    for g, v in f.items():
        if v != 0:
            state[input_label(tower, layout, g)] = v
    return state


def output_labels(diagram: BratteliDiagram, layout: RegisterLayout) -> dict[tuple[int, ...], tuple]:
    """Map of valid output labels to ``(rho, j, k)``."""
    m = diagram.depth
    out = {}
    s_axes = [layout.axis(f"s[{i}]") for i in range(1, m + 1)]
    t_axes = [layout.axis(f"t[{i}]") for i in range(1, m + 1)]
    n = len(layout.registers)
    for rho in diagram.labels(m):
        rows = diagram.rows[m][rho]
        for j, sp in enumerate(rows):
            for k, tp in enumerate(rows):
                lab = [0] * n
                for a, v in zip(s_axes, sp):
                    lab[a] = v
                for a, v in zip(t_axes, tp):
                    lab[a] = v
                out[tuple(lab)] = (rho, j, k)
    return out


def decode_output(state: State, reps: RepresentationSystem) -> tuple[dict[tuple, complex], float]:
    """Amplitudes keyed by ``(s_path, t_path)`` on the alpha=0 subspace and the
    probability mass outside it."""
    diagram = reps.diagram
    m = diagram.depth
    labels = output_labels(diagram, state.layout)
    out = {}
    for lab, (rho, j, k) in labels.items():
        out[(diagram.rows[m][rho][j], diagram.rows[m][rho][k])] = state[lab]
    if isinstance(state, DenseState):
        probs = np.abs(state.data) ** 2
        if labels:
            probs[tuple(np.array(list(labels)).T)] = 0.0
        leak = float(probs.sum())
    else:
        leak = sum(abs(a) ** 2 for lab, a in state.amps.items() if lab not in labels)
    return out, leak


def fourier_vector(state: State, reps: RepresentationSystem) -> tuple[np.ndarray, float]:
    """Decoded output arranged like a column of the dense reference matrix."""
    decoded, leak = decode_output(state, reps)
    m = reps.top
    vec = np.zeros(reps.tower.group.order, dtype=complex)
    for (sp, tp), amp in decoded.items():
        rho, j = reps.diagram.path_to_index(sp)
        _, k = reps.diagram.path_to_index(tp)
        vec[reps.fourier_row(rho, j, k, m)] = amp
    return vec, leak


def stage_leakage(state: State, diagram: BratteliDiagram, level: int) -> float:
    """Mass outside the valid pattern after the stage for ``level``: alpha[1..level]
    zero, higher alphas nonzero, paths of length ``level`` valid and co-terminal,
    longer path registers empty."""
    layout = state.layout
    m = diagram.depth
    a_ax = [layout.axis(f"alpha[{i}]") for i in range(1, m + 1)]
    s_ax = [layout.axis(f"s[{i}]") for i in range(1, m + 1)]
    t_ax = [layout.axis(f"t[{i}]") for i in range(1, m + 1)]
    lookup = diagram._path_lookup
    bad = 0.0
    for lab, amp in state.items():
        ok = all(lab[a] == 0 for a in a_ax[:level]) and all(lab[a] != 0 for a in a_ax[level:])
        ok = ok and all(lab[a] == 0 for a in s_ax[level:] + t_ax[level:])
        if ok:
            sp = tuple(lab[a] for a in s_ax[:level])
            tp = tuple(lab[a] for a in t_ax[:level])
            ok = sp in lookup and tp in lookup and lookup[sp][0] == lookup[tp][0]
        if not ok:
            bad += abs(amp) ** 2
    return bad
