"""Separation-of-variables synthesis of Fourier circuits.

Level ``i`` of the tower is handled by one stage that consumes the coset digit
``alpha[i]`` and extends the row and column paths by one edge each.  Three
stage strategies exist:

``beals``
    Loop over the transversal: twiddle by ``rho(alpha^-1)``, swap the digit
    into the work slot, embed with a Householder reflection, twiddle back by
    ``rho(alpha)``.  Works for every tower.
``homothetic``
    For a normal step with cyclic transversal ``gamma^a`` and one-dimensional
    lower irreducibles whose extensions are induced with trivial phase
    (metacyclic level 2 and any level 1 cyclic step).  Uses a cyclic Fourier
    transform instead of the transversal loop.
``nonsplit``
    For an index-2 cyclic step ``Z_{n_{i-1}} < Z_{n_i}``: phase kickback from the
    earlier edge registers followed by a cyclic Fourier transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (
    Branch,
    Circuit,
    ClassicalPermutation,
    ConditionedUnitary,
    Gate,
    Phase,
    PrimitiveCyclicQFT,
    RegisterLayout,
    StructuredUnitary,
    check_valid,
)
from .errors import CapabilityError, PlanError, SynthesisError
from .groups import CyclicGroup, GroupFamily, MetacyclicGroup, Tower, build_tower
from .reps import RepresentationSystem, SchurBlock, build_reps, metacyclic_orbits

PLANS = ("auto", "beals", "homothetic")
STRATEGIES = ("beals", "homothetic", "nonsplit")

A = "alpha[{}]"
S = "s[{}]"
T = "t[{}]"


@dataclass
class Synthesis:
    """A synthesized circuit together with the objects it was built from."""

    circuit: Circuit
    tower: Tower
    reps: RepresentationSystem
    strategies: list[str]  # strategies[i-1] is the stage strategy for level i


# ------------------------------------------------------------------ layout


def make_layout(reps: RepresentationSystem) -> RegisterLayout:
    tower, diag = reps.tower, reps.diagram
    m = tower.num_levels
    alpha = [tower.index(i) + 1 for i in range(1, m + 1)]
    edges = [max(2, diag.max_out_degree(i - 1) + 1) for i in range(1, m + 1)]
    return RegisterLayout.standard(alpha, edges)


def _prefix(regs: str, path) -> dict[str, int]:
    return {regs.format(l): v for l, v in enumerate(path, start=1)}


def coterminal_pairs(reps: RepresentationSystem, level: int, sigma):
    paths = reps.diagram.rows[level][sigma]
    return [(sp, tp) for sp in paths for tp in paths]


# ------------------------------------------------------------ beals pieces


def householder(a: np.ndarray) -> np.ndarray:
    """Real reflection exchanging ``e_0`` and the unit vector ``a``."""
    e0 = np.zeros_like(a)
    e0[0] = 1.0
    v = e0 - a
    nv = float(np.vdot(v, v).real)
    mat = np.eye(len(a), dtype=complex)
    if nv > 1e-30:
        mat -= 2.0 * np.outer(v, v.conj()) / nv
    return mat


def synth_embedding(reps: RepresentationSystem, layout: RegisterLayout, level: int, stage: str) -> ConditionedUnitary:
    """``|0,0> -> sum_e A_e |e,e>`` on ``(s[level], t[level])`` for each lower irreducible."""
    diag = reps.diagram
    r = layout.radix(S.format(level))
    table = reps.scale_factor_table(level)
    branches = []
    for sigma in diag.labels(level - 1):
        a = np.zeros(r * r, dtype=complex)
        for e in range(1, diag.out_degree(level - 1, sigma) + 1):
            a[e * r + e] = table[(sigma, e)]
        if abs(np.linalg.norm(a) - 1) > 1e-10:
            raise SynthesisError(f"scale factors at level {level} are not unit norm")
        when = [
            {A.format(level): 0, **_prefix(S, sp), **_prefix(T, tp)}
            for sp, tp in coterminal_pairs(reps, level - 1, sigma)
        ]
        branches.append(Branch(when, householder(a)))
    return ConditionedUnitary([S.format(level), T.format(level)], branches, stage)


def synth_swap_in(level: int, digit: int, stage: str) -> ClassicalPermutation:
    """Move coset digit ``digit`` into the work slot while the edge registers are empty."""
    z = (0, 0, 0)
    d = (digit, 0, 0)
    return ClassicalPermutation([A.format(level), S.format(level), T.format(level)], {d: z, z: d}, stage)


def letter_gate(reps: RepresentationSystem, level: int, letter, stage: str) -> StructuredUnitary:
    """``⊕_rho rho(letter)`` over the level-``level`` irreducibles on ``s[1..level]``."""
    idx, inv = letter
    gen = reps.tower.generators[idx]
    diag = reps.diagram
    paths, mats, blocks, keys = [], [], [], []
    nb = no = 0
    for rho in reps.irreps(level):
        cert = reps.schur_blocks(rho, gen)
        mat = rho.images[idx]
        if inv:
            mat = mat.conj().T
            cblocks = [SchurBlock(b.eta, b.zeta, b.m, b.d, b.matrix.conj().T) for b in cert.blocks]
        else:
            cblocks = list(cert.blocks)
        paths.extend(diag.rows[level][rho.label])
        mats.append(mat)
        blocks.extend(cblocks)
        shifted = cert.shifted(nb, no)
        keys.extend(shifted.row_keys)
        nb += len(cblocks)
        no += 1 + max((k[1] for k in cert.row_keys), default=-1)
    n = len(paths)
    full = np.zeros((n, n), dtype=complex)
    off = 0
    for mat in mats:
        d = mat.shape[0]
        full[off : off + d, off : off + d] = mat
        off += d
    name = gen.name + ("^-1" if inv else "")
    return StructuredUnitary(level, [tuple(p) for p in paths], full, blocks, keys, name, stage)


def synth_twiddle(reps: RepresentationSystem, level: int, alpha, inverse: bool, stage: str) -> list[Gate]:
    """Gates applying ``⊕ rho(alpha)`` (or its inverse) on the row paths of ``level``."""
    word = reps.tower.transversal_word(alpha, level)
    # rho(alpha) = rho(w_1) ... rho(w_L): the last letter acts first
    if inverse:
        return [letter_gate(reps, level, (i, not inv), stage) for i, inv in word]
    return [letter_gate(reps, level, letter, stage) for letter in reversed(word)]


def synth_beals_stage(reps: RepresentationSystem, layout: RegisterLayout, level: int) -> list[Gate]:
    stage = f"level{level}:beals"
    gates: list[Gate] = []
    embed = synth_embedding(reps, layout, level, stage)
    for k, alpha in enumerate(reps.tower.transversals[level]):
        gates += synth_twiddle(reps, level, alpha, True, stage)
        gates.append(synth_swap_in(level, k + 1, stage))
        gates.append(embed)
        gates += synth_twiddle(reps, level, alpha, False, stage)
    return gates


# ------------------------------------------------------- homothetic stage


def _homothetic_data(reps: RepresentationSystem, level: int):
    """Per lower irreducible ``sigma``: orbit size, and the conjugate
    ``sigma^(gamma^k)`` for each ``k`` below the orbit size.  Raises
    :class:`PlanError` when the level is not of homothetic type."""
    grp = reps.tower.group
    n = reps.tower.index(level)
    labels = reps.diagram.labels(level - 1)
    if level == 1:
        return n, {labels[0]: (1, [labels[0]])}
    if isinstance(grp, MetacyclicGroup) and level == 2:
        rinv = pow(grp.r, -1, grp.p)
        out = {}
        for orbit in metacyclic_orbits(grp):
            for c in orbit:
                out[c] = (len(orbit), [(c * pow(rinv, k, grp.p)) % grp.p for k in range(len(orbit))])
        return n, out
    raise PlanError(f"level {level} of {grp.label} is not of homothetic type")


def synth_homothetic_stage(reps: RepresentationSystem, layout: RegisterLayout, level: int) -> list[Gate]:
    stage = f"level{level}:homothetic"
    diag = reps.diagram
    n, data = _homothetic_data(reps, level)
    a_reg, s_reg, t_reg = A.format(level), S.format(level), T.format(level)
    s_pre = [S.format(l) for l in range(1, level)]
    t_pre = [T.format(l) for l in range(1, level)]
    transfer: dict = {}
    qfts: dict[int, list] = {}
    phase: dict = {}
    orbit_perm: dict = {}
    for sigma, (o, conj) in data.items():
        if diag.dim(level - 1, sigma) != 1:
            raise PlanError(f"homothetic stage needs one-dimensional irreducibles below level {level}")
        kdim = n // o
        if diag.out_degree(level - 1, sigma) != kdim:
            raise PlanError(f"unexpected branching at level {level}")
        (sp,) = diag.rows[level - 1][sigma]
        for a in range(n):
            j, k = divmod(a, o)
            src = (a + 1, *sp, 0)
            dst = (k + 1, *sp, j + 1)
            if src != dst:
                transfer[src] = dst
                transfer[dst] = src
        qfts.setdefault(kdim, []).append(_prefix(S, sp))
        for k in range(o):
            for e in range(1, kdim + 1):
                ex = ((e - 1) * k) % n
                if ex:
                    phase[(k + 1, e)] = ex
            (target,) = diag.rows[level - 1][conj[k]]
            src = (k + 1, *sp, *sp)
            dst = (0, *target, *sp)
            transfer_key = src
            orbit_perm[transfer_key] = dst
            orbit_perm[dst] = src
    gates: list[Gate] = [ClassicalPermutation([a_reg, *s_pre, s_reg], transfer, stage)]
    for kdim, whens in sorted(qfts.items()):
        if kdim > 1:
            when = whens if level > 1 else None
            gates.append(PrimitiveCyclicQFT(s_reg, kdim, 1, when, False, stage))
    r = layout.radix(s_reg)
    gates.append(ClassicalPermutation([s_reg, t_reg], _copy_map(r), stage))
    if phase:
        gates.append(Phase([a_reg, s_reg], phase, n, stage))
    gates.append(ClassicalPermutation([a_reg, *s_pre, *t_pre], orbit_perm, stage))
    return gates


def _copy_map(radix: int) -> dict:
    out = {}
    for e in range(1, radix):
        out[(e, 0)] = (e, e)
        out[(e, e)] = (e, 0)
    return out


# --------------------------------------------------------- nonsplit stage


def synth_nonsplit_stage(reps: RepresentationSystem, layout: RegisterLayout, level: int) -> list[Gate]:
    grp = reps.tower.group
    if not isinstance(grp, CyclicGroup):
        raise PlanError(f"nonsplit stage needs a cyclic group, got {grp.label}")
    f = grp.factors[level - 1]
    if f != 2:
        raise PlanError(f"nonsplit stage needs an index-2 cyclic step, level {level} has index {f}")
    stage = f"level{level}:nonsplit"
    ni = grp.level_orders[level]
    a_reg, s_reg, t_reg = A.format(level), S.format(level), T.format(level)
    gates: list[Gate] = []
    # omega_{n_i}^{a c} with c = sum_l (e_l - 1) n_{l-1}
    for l in range(1, level):
        table = {}
        for a in range(f):
            for e in range(1, grp.factors[l - 1] + 1):
                ex = (a * (e - 1) * grp.level_orders[l - 1]) % ni
                if ex:
                    table[(a + 1, e)] = ex
        if table:
            gates.append(Phase([a_reg, S.format(l)], table, ni, stage))
    transfer = {}
    for a in range(f):
        transfer[(a + 1, 0)] = (0, a + 1)
        transfer[(0, a + 1)] = (a + 1, 0)
    gates.append(ClassicalPermutation([a_reg, s_reg], transfer, stage))
    gates.append(PrimitiveCyclicQFT(s_reg, f, 1, None, False, stage))
    gates.append(ClassicalPermutation([s_reg, t_reg], _copy_map(layout.radix(s_reg)), stage))
    return gates


# -------------------------------------------------------------------- plans


def stage_strategies(tower: Tower, plan: str = "auto") -> list[str]:
    """Strategy per level (index ``i-1`` for level ``i``)."""
    grp = tower.group
    m = tower.num_levels
    if plan not in PLANS:
        raise PlanError(f"unknown plan {plan!r}; choose from {', '.join(PLANS)}")
    if plan == "beals" or m == 0:
        return ["beals"] * m
    if isinstance(grp, MetacyclicGroup):
        return ["homothetic"] * m
    if isinstance(grp, CyclicGroup):
        if plan == "homothetic" and m > 1:
            raise PlanError(f"{grp.label}: homothetic stages exist only at level 1 of a cyclic tower")
        return ["homothetic"] + ["nonsplit" if f == 2 else "beals" for f in grp.factors[1:]]
    if plan == "homothetic":
        raise PlanError(f"{grp.label} has no homothetic levels")
    return ["beals"] * m


_STAGES = {
    "beals": synth_beals_stage,
    "homothetic": synth_homothetic_stage,
    "nonsplit": synth_nonsplit_stage,
}


def synthesize(
    group: GroupFamily | Tower | RepresentationSystem,
    plan: str = "auto",
    strategies: list[str] | None = None,
) -> Synthesis:
    """Build the Fourier circuit for ``group`` under ``plan`` (or explicit
    per-level ``strategies``)."""
    if isinstance(group, RepresentationSystem):
        reps = group
    else:
        tower = group if isinstance(group, Tower) else build_tower(group)
        reps = build_reps(tower)
    tower = reps.tower
    m = tower.num_levels
    if strategies is None:
        strategies = stage_strategies(tower, plan)
    if len(strategies) != m or any(s not in STRATEGIES for s in strategies):
        raise PlanError(f"need {m} strategies from {STRATEGIES}, got {strategies}")
    layout = make_layout(reps)
    gates: list[Gate] = []
    for level in range(1, m + 1):
        gates += _STAGES[strategies[level - 1]](reps, layout, level)
    fast = [i for i, s in enumerate(strategies, start=1) if s != "beals"]
    notes = {
        "group": tower.group.label,
        "group_spec": tower.group.to_json(),
        "plan": plan,
        "strategies": list(strategies),
        "I": tower.max_index(),
        "D": tower.adapted_diameter(),
        "M": reps.max_multiplicity(exclude_levels=fast),
    }
    circuit = Circuit(layout, gates, notes)
    check_valid(circuit)
    return Synthesis(circuit, tower, reps, list(strategies))


def synth_qft(group, plan: str = "auto") -> Circuit:
    return synthesize(group, plan).circuit


synth_embedding_U = synth_embedding
synth_Valpha = synth_swap_in
synth_nonsplit_cyclic_stage = synth_nonsplit_stage


def require_supported(group: GroupFamily) -> None:
    from .reps import _BUILDERS

    if type(group) not in _BUILDERS:
        raise CapabilityError(f"no synthesis support for family {group.family!r}")
