import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gqft.errors import CapabilityError, DomainError, EncodingError
from gqft.groups import (
    CyclicGroup,
    MetacyclicGroup,
    SymmetricGroup,
    build_tower,
    dihedral,
    group_from_json,
    prime_factors,
)


def compose(g, h):
    # oracle: (g h)(x) = g(h(x)) computed directly on tuples
    return tuple(g[h[x]] for x in range(len(g)))


def test_symmetric_multiplication_table_matches_composition():
    g = SymmetricGroup(3)
    for a, b in itertools.product(g.elements(), repeat=2):
        assert g.mul(a, b) == compose(a, b)


def test_symmetric_examples():
    g = SymmetricGroup(3)
    p = g.parse
    assert g.mul(p("(1 2)"), g.identity()) == p("(1 2)")
    assert g.mul(p("(1 3)"), p("(1 2 3)")) == p("(1 2)")
    assert g.format(g.identity()) == "e"


def test_cyclic_multiplication():
    assert CyclicGroup(6).mul(4, 5) == 3


@pytest.mark.parametrize("group", [SymmetricGroup(4), CyclicGroup(12), dihedral(7), MetacyclicGroup(7, 3, 2)])
def test_group_axioms(group):
    els = group.elements()
    assert len(els) == group.order == len(set(els))
    e = group.identity()
    for a in els:
        assert group.mul(a, group.inverse(a)) == e
        assert group.mul(e, a) == a == group.mul(a, e)
        assert group.parse(group.format(a)) == a
    sample = els[:6]
    for a, b, c in itertools.product(sample, repeat=3):
        assert group.mul(group.mul(a, b), c) == group.mul(a, group.mul(b, c))


def test_metacyclic_relation():
    g = MetacyclicGroup(7, 3, 2)
    x, y = g.generators()
    lhs = g.mul(g.mul(y, x), g.inverse(y))
    assert lhs == (2, 0)  # y x y^-1 = x^r


@pytest.mark.parametrize("group", [SymmetricGroup(3), SymmetricGroup(4), CyclicGroup(6), CyclicGroup(8), dihedral(5)])
def test_coset_factorize_reassembles(group):
    tower = build_tower(group)
    for g in group.elements():
        alphas = tower.coset_factorize(g)
        prod = group.identity()
        for a in alphas:
            prod = group.mul(prod, a)
        assert prod == g
        for level, a in zip(range(tower.num_levels, 0, -1), alphas):
            assert a in tower.transversals[level]


def test_coset_factorize_examples():
    g = SymmetricGroup(3)
    tower = build_tower(g)
    assert [g.format(a) for a in tower.transversals[2]] == ["e", "(2 3)", "(1 3)"]
    assert tower.coset_factorize(g.parse("(1 2 3)")) == (g.parse("(1 3)"), g.parse("(1 2)"))
    assert tower.coset_factorize(g.identity()) == (g.identity(), g.identity())


def test_cyclic_tower_z6():
    tower = build_tower(CyclicGroup(6))
    assert tower.transversals[1] == [0, 2, 4]
    assert tower.transversals[2] == [0, 1]
    assert tower.coset_factorize(5) == (1, 4)


def test_transversal_words():
    g = SymmetricGroup(3)
    tower = build_tower(g)
    assert tower.transversal_word(g.identity(), 2) == ()
    w = tower.transversal_word(g.parse("(1 3)"), 2)
    assert len(w) == 3 and tower.evaluate_word(w) == g.parse("(1 3)")
    d = build_tower(dihedral(5))
    assert len(d.transversal_word((0, 1), 2)) == 1
    with pytest.raises(DomainError):
        tower.transversal_word(g.parse("(1 2)"), 2)


def _bfs_distance(group, gens, target):
    frontier, seen, dist = {group.identity()}, {group.identity()}, 0
    moves = gens + [group.inverse(s) for s in gens]
    while target not in frontier:
        frontier = {group.mul(a, s) for a in frontier for s in moves} - seen
        seen |= frontier
        dist += 1
    return dist


@pytest.mark.parametrize("group", [SymmetricGroup(4), dihedral(7), CyclicGroup(12)])
def test_words_are_shortest(group):
    tower = build_tower(group)
    for level in range(1, tower.num_levels + 1):
        gens = [s.element for s in tower.generators_in(level)]
        for a, w in tower.words[level].items():
            assert tower.evaluate_word(w) == a
            assert len(w) == _bfs_distance(group, gens, a)


@pytest.mark.parametrize("n,expected", [(2, (2, 1)), (3, (3, 4)), (4, (4, 9)), (5, (5, 16)), (6, (6, 25))])
def test_symmetric_tower_stats(n, expected):
    assert build_tower(SymmetricGroup(n)).tower_stats() == expected


def test_adapted_diameter_quadratic_in_n():
    ds = [build_tower(SymmetricGroup(n)).adapted_diameter() for n in range(2, 7)]
    assert ds == sorted(ds)
    assert all(d <= n * n for n, d in zip(range(2, 7), ds))


def test_small_tower_stats():
    assert build_tower(CyclicGroup(2)).tower_stats() == (2, 1)


def test_dihedral_generator_annotations():
    tower = build_tower(dihedral(5))
    rot, refl = tower.generators
    assert (rot.level, rot.centralized_level) == (1, 1)
    assert (refl.level, refl.centralized_level) == (2, 0)


def test_group_from_json():
    assert group_from_json({"family": "symmetric", "n": 4}).order == 24
    assert group_from_json({"family": "dihedral", "p": 5}).label == "D5"
    assert group_from_json({"family": "cyclic", "n": 12, "factors": [2, 2, 3]}).factors == [2, 2, 3]
    with pytest.raises(EncodingError):
        group_from_json({"n": 3})
    with pytest.raises(EncodingError):
        group_from_json({"family": "symmetric"})
    with pytest.raises(CapabilityError):
        group_from_json({"family": "lie", "n": 3})


def test_bad_encodings():
    with pytest.raises(EncodingError):
        MetacyclicGroup(7, 3, 3)
    with pytest.raises(EncodingError):
        CyclicGroup(12, [5, 2])
    with pytest.raises(EncodingError):
        SymmetricGroup(3).check((0, 0, 1))
    with pytest.raises(EncodingError):
        CyclicGroup(4).parse("x")


@given(st.integers(min_value=2, max_value=2000))
def test_prime_factors_multiply_back(n):
    fs = prime_factors(n)
    prod = 1
    for f in fs:
        prod *= f
        assert all(f % d for d in range(2, int(f**0.5) + 1))
    assert prod == n


@settings(max_examples=50)
@given(st.permutations(range(5)), st.permutations(range(5)))
def test_s5_inverse_of_product(a, b):
    g = SymmetricGroup(5)
    a, b = tuple(a), tuple(b)
    assert g.inverse(g.mul(a, b)) == g.mul(g.inverse(b), g.inverse(a))
