import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gqft.circuit import (
    Branch,
    Circuit,
    ClassicalPermutation,
    ConditionedUnitary,
    Phase,
    PrimitiveCyclicQFT,
    RegisterLayout,
    StructuredUnitary,
    check_valid,
    circuit_to_json,
    cost,
    deserialize,
    serialize,
    to_dot,
    validate,
)
from gqft.errors import ParseError, ValidationError
from gqft.groups import SymmetricGroup
from gqft.simulator import DenseState
from gqft.synth import synthesize

SCHEMA = Path(__file__).resolve().parents[1] / "docs" / "circuit.schema.json"

S3 = synthesize(SymmetricGroup(3))
LAYOUT = S3.circuit.layout
LETTERS = [g for g in S3.circuit.gates if isinstance(g, StructuredUnitary)]


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@st.composite
def gates(draw):
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    names = LAYOUT.names
    kind = draw(st.sampled_from(["cu", "perm", "phase", "qft", "su"]))
    if kind == "cu":
        target = draw(st.sampled_from(names))
        cond = draw(st.sampled_from([n for n in names if n != target]))
        values = draw(st.lists(st.integers(0, LAYOUT.radix(cond) - 1), min_size=1, max_size=3, unique=True))
        d = LAYOUT.radix(target)
        return ConditionedUnitary([target], [Branch([{cond: v}], random_unitary(rng, d)) for v in values], "rand")
    if kind == "perm":
        regs = draw(st.lists(st.sampled_from(names), min_size=1, max_size=2, unique=True))
        labels = [tuple(int(v) for v in lab) for lab in np.ndindex(*(LAYOUT.radix(r) for r in regs))]
        chosen = draw(st.lists(st.sampled_from(labels), min_size=0, max_size=len(labels), unique=True))
        images = list(chosen)
        rng.shuffle(images)
        return ClassicalPermutation(regs, {a: b for a, b in zip(chosen, images) if a != b}, "rand")
    if kind == "phase":
        reg = draw(st.sampled_from(names))
        modulus = draw(st.integers(1, 12))
        table = {(v,): int(rng.integers(0, modulus)) for v in range(LAYOUT.radix(reg))}
        return Phase([reg], table, modulus, "rand")
    if kind == "qft":
        reg = draw(st.sampled_from(names))
        r = LAYOUT.radix(reg)
        order = draw(st.integers(1, r))
        offset = draw(st.integers(0, r - order))
        return PrimitiveCyclicQFT(reg, order, offset, None, draw(st.booleans()), "rand")
    gate = draw(st.sampled_from(LETTERS))
    return gate if draw(st.booleans()) else gate.adjoint()


circuits = st.lists(gates(), max_size=6).map(lambda gs: Circuit(LAYOUT, gs, {"seed": "hypothesis"}))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(circuits)
def test_roundtrip_random_circuits(circ):
    assert validate(circ) == []
    blob = serialize(circ)
    back = deserialize(blob)
    assert serialize(back) == blob
    assert circuit_to_json(back) == circuit_to_json(circ)
    assert cost(back) == cost(circ)


@settings(max_examples=40, deadline=None)
@given(circuits, circuits)
def test_cost_additive(a, b):
    assert cost(a + b) == cost(a) + cost(b)


@settings(max_examples=40, deadline=None)
@given(gates(), st.integers(0, 2**32 - 1))
def test_gate_then_adjoint_is_identity(gate, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=LAYOUT.radices) + 1j * rng.normal(size=LAYOUT.radices)
    x /= np.linalg.norm(x)
    state = DenseState(LAYOUT, x.copy())
    state.apply_gate(gate)
    assert abs(state.norm() - 1) < 1e-10
    state.apply_gate(gate.adjoint())
    assert np.abs(state.data - x).max() < 1e-10


def test_empty_circuit():
    circ = Circuit(LAYOUT)
    assert validate(circ) == [] and cost(circ) == 0
    doc = json.loads(serialize(circ))
    assert doc["gates"] == [] and len(doc["layout"]) == 6


def test_cost_examples():
    lay = RegisterLayout.standard([2], [2])
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    cu = ConditionedUnitary(["s[1]"], [Branch([{"alpha[1]": 0, "t[1]": v}], h) for v in (0, 1)] + [Branch([{"alpha[1]": 1, "t[1]": 0}], h)])
    assert cost(Circuit(lay, [cu])) == 12
    lay8 = RegisterLayout.standard([8], [2])
    assert cost(Circuit(lay8, [PrimitiveCyclicQFT("alpha[1]", 8)])) == 6


def test_unknown_register_diagnostic():
    circ = Circuit(LAYOUT, [PrimitiveCyclicQFT("s[9]", 2)])
    diags = validate(circ)
    assert len(diags) == 1 and "gate 0" in diags[0] and "unknown register" in diags[0]
    with pytest.raises(ValidationError):
        cost(circ)


def test_certificate_violation_diagnostic():
    gate = next(g for g in LETTERS if g.matrix.shape[0] > 2)
    bad = StructuredUnitary(gate.level, gate.paths, gate.matrix.copy(), gate.blocks, gate.row_keys, gate.generator)
    # rotate a little mass between two different irreducible blocks
    eps = 1e-3
    rot = np.eye(len(gate.paths), dtype=complex)
    rot[[0, 0, 1, 1], [0, 1, 0, 1]] = [np.cos(eps), -np.sin(eps), np.sin(eps), np.cos(eps)]
    bad.matrix = rot @ bad.matrix
    diags = validate(Circuit(LAYOUT, [bad]))
    assert any("certificate violated" in d for d in diags)


def test_other_negative_cases():
    lay = RegisterLayout.standard([3], [3])
    bad_perm = ClassicalPermutation(["alpha[1]"], {(0,): (1,)})
    non_unitary = ConditionedUnitary(["s[1]"], [Branch(None, np.ones((3, 3)))])
    overlap = ConditionedUnitary(
        ["s[1]"], [Branch([{"alpha[1]": 0}], np.eye(3)), Branch([{"t[1]": 0}], np.eye(3))]
    )
    out_of_range = Phase(["alpha[1]"], {(5,): 1}, 3)
    qft_too_big = PrimitiveCyclicQFT("s[1]", 3, 1)
    for gate, text in [
        (bad_perm, "bijection"),
        (non_unitary, "not unitary"),
        (overlap, "overlapping"),
        (out_of_range, "out of range"),
        (qft_too_big, "exceed"),
    ]:
        diags = validate(Circuit(lay, [gate]))
        assert diags and text in diags[0], (text, diags)
    with pytest.raises(ValidationError):
        check_valid(Circuit(lay, [bad_perm]))


def test_truncated_document():
    blob = serialize(S3.circuit)
    with pytest.raises(ParseError, match="line 1 column"):
        deserialize(blob[: len(blob) // 2])
    with pytest.raises(ParseError):
        deserialize(b'{"layout": []}')
    with pytest.raises(ParseError):
        deserialize(b'{"layout": [], "gates": [{"type": "teleport"}]}')


def test_synthesized_circuit_roundtrip_is_bit_exact():
    blob = serialize(S3.circuit)
    back = deserialize(blob)
    for a, b in zip(S3.circuit.gates, back.gates):
        if isinstance(a, StructuredUnitary):
            assert np.array_equal(a.matrix, b.matrix)
    assert serialize(back) == blob


def test_schema_accepts_synthesized_documents():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(SCHEMA.read_text())
    for group in (SymmetricGroup(3),):
        jsonschema.validate(json.loads(serialize(synthesize(group).circuit)), schema)
    from gqft.groups import CyclicGroup, dihedral

    for group in (CyclicGroup(8), dihedral(5)):
        jsonschema.validate(json.loads(serialize(synthesize(group).circuit)), schema)


def test_dot_output():
    dot = to_dot(S3.circuit)
    assert dot.startswith("digraph circuit {")
    assert dot.count("->") == len(S3.circuit.gates) - 1
