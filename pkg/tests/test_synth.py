import numpy as np
import pytest

from gqft.circuit import Circuit, Phase, PrimitiveCyclicQFT, StructuredUnitary, validate
from gqft.errors import PlanError
from gqft.groups import CyclicGroup, MetacyclicGroup, SymmetricGroup, build_tower, dihedral
from gqft.reps import build_reps
from gqft.simulator import SparseState, apply, encode_input, fourier_vector, stage_leakage
from gqft.synth import (
    _homothetic_data,
    make_layout,
    synth_beals_stage,
    synth_embedding_U,
    synth_nonsplit_cyclic_stage,
    synth_twiddle,
    synth_Valpha,
    synthesize,
)
from gqft.verify import plan_agreement


def run_all_columns(syn):
    reps = syn.reps
    ref = reps.dense_qft_matrix()
    worst = 0.0
    for c, g in enumerate(reps.elements()):
        state = encode_input({g: 1}, syn.tower, syn.circuit.layout, "sparse")
        apply(syn.circuit, state)
        vec, leak = fourier_vector(state, reps)
        worst = max(worst, float(np.abs(vec - ref[:, c]).max()), leak)
    return worst


def test_trivial_group_gives_empty_circuit():
    for g in (SymmetricGroup(1), CyclicGroup(1)):
        assert len(synthesize(g).circuit.gates) == 0


@pytest.mark.parametrize(
    "group", [SymmetricGroup(4), CyclicGroup(6), CyclicGroup(16), dihedral(7), MetacyclicGroup(7, 3, 2)], ids=lambda g: g.label
)
def test_embedding_writes_scale_vector(group):
    reps = build_reps(build_tower(group))
    layout = make_layout(reps)
    diag = reps.diagram
    for level in range(1, reps.top + 1):
        gate = synth_embedding_U(reps, layout, level, "test")
        table = reps.scale_factor_table(level)
        for sigma in diag.labels(level - 1):
            for sp in diag.rows[level - 1][sigma]:
                for tp in diag.rows[level - 1][sigma]:
                    label = [0] * len(layout.registers)
                    for l in range(level + 1, reps.top + 1):
                        label[layout.axis(f"alpha[{l}]")] = 1
                    for l, (a, b) in enumerate(zip(sp, tp), start=1):
                        label[layout.axis(f"s[{l}]")] = a
                        label[layout.axis(f"t[{l}]")] = b
                    state = SparseState(layout, {tuple(label): 1.0})
                    state.apply_gate(gate)
                    expect = {}
                    for e in range(1, diag.out_degree(level - 1, sigma) + 1):
                        lab = list(label)
                        lab[layout.axis(f"s[{level}]")] = e
                        lab[layout.axis(f"t[{level}]")] = e
                        expect[tuple(lab)] = table[(sigma, e)]
                    got = {k: v for k, v in state.amps.items() if abs(v) > 1e-14}
                    assert got.keys() == expect.keys()
                    assert all(abs(got[k] - expect[k]) < 1e-12 for k in got)


def test_embedding_example_z6():
    reps = build_reps(build_tower(CyclicGroup(6)))
    table = reps.scale_factor_table(2)
    assert len(table) == 6
    assert all(abs(a - 1 / np.sqrt(2)) < 1e-15 for a in table.values())


def test_valpha_swaps_digit():
    gate = synth_Valpha(2, 1, "test")
    assert gate.mapping == {(1, 0, 0): (0, 0, 0), (0, 0, 0): (1, 0, 0)}
    assert synth_Valpha(2, 2, "test").mapping[(2, 0, 0)] == (0, 0, 0)
    assert gate.adjoint().mapping == gate.mapping


def _twiddle_product(gates, n):
    out = np.eye(n, dtype=complex)
    for g in gates:
        out = g.matrix @ out
    return out


@pytest.mark.parametrize("group", [SymmetricGroup(4), SymmetricGroup(5), dihedral(5)], ids=lambda g: g.label)
def test_twiddle_products_match_evaluate(group):
    reps = build_reps(build_tower(group))
    for level in range(1, reps.top + 1):
        paths = reps.diagram.paths(level)
        for alpha in reps.tower.transversals[level]:
            expect = np.zeros((len(paths), len(paths)), dtype=complex)
            off = 0
            for rho in reps.irreps(level):
                expect[off : off + rho.dim, off : off + rho.dim] = reps.evaluate(rho, alpha)
                off += rho.dim
            for inverse in (False, True):
                gates = synth_twiddle(reps, level, alpha, inverse, "t")
                prod = _twiddle_product(gates, len(paths))
                target = expect.conj().T if inverse else expect
                assert np.abs(prod - target).max() < 1e-10


def test_twiddle_examples_s4():
    g = SymmetricGroup(4)
    reps = build_reps(build_tower(g))
    assert synth_twiddle(reps, 3, g.identity(), False, "t") == []
    one = synth_twiddle(reps, 3, g.parse("(3 4)"), False, "t")
    assert len(one) == 1 and max(b.m for b in one[0].blocks) <= 2
    # (1 4) has five inversions: a length-5 word over three distinct generators
    gates = synth_twiddle(reps, 3, g.parse("(1 4)"), False, "t")
    assert len(gates) == 5
    assert sorted({x.generator for x in gates}) == ["(1 2)", "(2 3)", "(3 4)"]


def test_beals_orthogonality_invariant_s3():
    """After r coset iterations the alpha=0 part is the transform of f restricted to the processed cosets."""
    g = SymmetricGroup(3)
    reps = build_reps(build_tower(g))
    tower = reps.tower
    layout = make_layout(reps)
    ref = reps.dense_qft_matrix()
    els = reps.elements()
    rng = np.random.default_rng(3)
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    x /= np.linalg.norm(x)
    state = encode_input(dict(zip(els, x)), tower, layout, "dense")
    apply(Circuit(layout, synth_beals_stage(reps, layout, 1)), state)
    stage = synth_beals_stage(reps, layout, 2)
    # split the stage at the swap gates: each iteration ends right before the next inverse twiddle
    bounds, n = [], 0
    for alpha in tower.transversals[2]:
        n += 2 * len(tower.transversal_word(alpha, 2)) + 2
        bounds.append(n)
    assert bounds[-1] == len(stage)
    start = 0
    for r, end in enumerate(bounds, start=1):
        apply(Circuit(layout, stage[start:end]), state)
        start = end
        done = set(tower.transversals[2][:r])
        mask = np.array([tower.coset_factorize(el)[0] in done for el in els])
        expect = ref @ (x * mask)
        got, _ = fourier_vector(state, reps)
        assert np.abs(got - expect).max() <= 1e-10


def test_homothetic_orbit_data():
    reps = build_reps(build_tower(dihedral(5)))
    n, data = _homothetic_data(reps, 2)
    assert n == 2
    assert data[1] == (2, [1, 4])
    assert data[0][0] == 1


def test_homothetic_d3_trivial_character_is_two_point_transform():
    syn = synthesize(dihedral(3))
    level2 = [g for g in syn.circuit.gates if g.stage == "level2:homothetic"]
    qfts = [g for g in level2 if isinstance(g, PrimitiveCyclicQFT)]
    assert len(qfts) == 1 and qfts[0].order == 2
    assert qfts[0].when == [{"s[1]": 1}]


def test_direct_product_z3_z2_matches_dft6():
    syn = synthesize(MetacyclicGroup(3, 2, 1))
    assert run_all_columns(syn) < 1e-12
    f = syn.reps.dense_qft_matrix()
    els = syn.reps.elements()
    # Z_3 x Z_2 -> Z_6, (a, b) -> 2a + 3b
    cols = [(2 * a + 3 * b) % 6 for a, b in els]
    dft = np.exp(2j * np.pi * np.outer(range(6), range(6)) / 6) / np.sqrt(6)
    dft = dft[:, cols]
    for row in f:
        assert min(np.abs(dft - row).max(axis=1)) < 1e-12


def test_nonsplit_stage_examples():
    reps = build_reps(build_tower(CyclicGroup(4)))
    layout = make_layout(reps)
    g1 = synth_nonsplit_cyclic_stage(reps, layout, 1)
    assert [g.order for g in g1 if isinstance(g, PrimitiveCyclicQFT)] == [2]
    g2 = synth_nonsplit_cyclic_stage(reps, layout, 2)
    phases = [g for g in g2 if isinstance(g, Phase)]
    assert len(phases) == 1 and phases[0].table == {(2, 2): 1} and phases[0].modulus == 4


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_cyclic_power_of_two_equals_dft(n):
    syn = synthesize(CyclicGroup(2**n))
    f = syn.reps.dense_qft_matrix()
    size = 2**n
    dft = np.exp(2j * np.pi * np.outer(range(size), range(size)) / size) / np.sqrt(size)
    assert np.abs(f - dft).max() < 1e-12
    assert run_all_columns(syn) < 1e-9


def test_plan_selection():
    assert synthesize(SymmetricGroup(4)).strategies == ["beals"] * 3
    assert synthesize(dihedral(7)).strategies == ["homothetic", "homothetic"]
    assert synthesize(CyclicGroup(8)).strategies == ["homothetic", "nonsplit", "nonsplit"]
    assert synthesize(CyclicGroup(9)).strategies == ["homothetic", "beals"]
    assert synthesize(dihedral(7), "beals").strategies == ["beals", "beals"]


def test_plan_errors():
    with pytest.raises(PlanError):
        synthesize(SymmetricGroup(3), "homothetic")
    with pytest.raises(PlanError):
        synthesize(CyclicGroup(9), strategies=["homothetic", "nonsplit"])
    with pytest.raises(PlanError):
        synthesize(SymmetricGroup(3), strategies=["beals", "homothetic"])
    with pytest.raises(PlanError):
        synthesize(SymmetricGroup(3), "fastest")
    with pytest.raises(PlanError):
        synthesize(dihedral(5), strategies=["nonsplit", "beals"])


@pytest.mark.parametrize(
    "group,plan",
    [
        (SymmetricGroup(3), "auto"),
        (SymmetricGroup(4), "auto"),
        (CyclicGroup(12), "auto"),
        (CyclicGroup(12, [2, 2, 3]), "auto"),
        (CyclicGroup(9), "auto"),
        (dihedral(7), "auto"),
        (dihedral(7), "beals"),
        (MetacyclicGroup(7, 3, 2), "auto"),
        (MetacyclicGroup(13, 4, 5), "auto"),
        (MetacyclicGroup(7, 6, 3), "auto"),
    ],
    ids=lambda v: getattr(v, "label", v),
)
def test_end_to_end_against_dense_reference(group, plan):
    syn = synthesize(group, plan)
    assert validate(syn.circuit) == []
    assert run_all_columns(syn) < 1e-9


@pytest.mark.parametrize("group", [SymmetricGroup(4), dihedral(7), CyclicGroup(16), MetacyclicGroup(7, 3, 2)], ids=lambda g: g.label)
def test_stage_boundary_confinement(group):
    syn = synthesize(group)
    circ = syn.circuit
    els = syn.reps.elements()
    rng = np.random.default_rng(0)
    x = rng.normal(size=len(els)) + 1j * rng.normal(size=len(els))
    x /= np.linalg.norm(x)
    state = encode_input(dict(zip(els, x)), syn.tower, circ.layout, "sparse")
    assert stage_leakage(state, syn.reps.diagram, 0) <= 1e-12
    for level in range(1, syn.tower.num_levels + 1):
        gates = [g for g in circ.gates if g.stage.startswith(f"level{level}:")]
        apply(Circuit(circ.layout, gates), state)
        assert stage_leakage(state, syn.reps.diagram, level) <= 1e-12


def test_metacyclic_plans_agree():
    assert plan_agreement(MetacyclicGroup(7, 3, 2), "beals", "homothetic") < 1e-9


def test_notes_report_tower_statistics():
    notes = synthesize(SymmetricGroup(4)).circuit.notes
    assert (notes["I"], notes["D"], notes["M"]) == (4, 9, 2)
    assert synthesize(dihedral(13)).circuit.notes["M"] == 1
    assert synthesize(dihedral(13), "beals").circuit.notes["M"] == 2


def test_structured_gates_carry_certificates():
    circ = synthesize(SymmetricGroup(4)).circuit
    su = [g for g in circ.gates if isinstance(g, StructuredUnitary)]
    assert su and all(max(b.m for b in g.blocks) <= 2 for g in su)
