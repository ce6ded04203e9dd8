import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disjoint_kit.relcore import (
    CarrierMismatch,
    FiniteIndexedSet,
    NeighborhoodStructure,
    Relation,
    RelationMap,
    preserves,
    reflects,
    reflection_witness,
    reflexive_transitive_closure,
    relation_from_json,
    relation_to_json,
    symmetric_closure,
    topological_closure,
    transpose,
)


# oracles: plain loops over index pairs


def closure_oracle(R, N):
    n = R.size
    pairs = set(R.pairs())
    out = set()
    for x in range(n):
        for y in range(n):
            if all(any((a, b) in pairs for a in U for b in V) for U in N.basis[x] for V in N.basis[y]):
                out.add((x, y))
    return out


def preserves_oracle(a, RX, RY):
    return all((a[x], a[y]) in RY for (x, y) in RX)


def reflects_oracle(a, RX, RY, n):
    return all((x, y) in RX for x in range(n) for y in range(n) if (a[x], a[y]) in RY)


@st.composite
def relations(draw, max_n=7):
    n = draw(st.integers(0, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    return Relation(n, np.array(bits, dtype=bool).reshape(n, n))


@st.composite
def relation_and_basis(draw, max_n=6):
    R = draw(relations(max_n))
    n = R.size
    basis = []
    for p in range(n):
        k = draw(st.integers(1, 3))
        sets = []
        for _ in range(k):
            extra = draw(st.sets(st.integers(0, max(n - 1, 0)), max_size=n))
            sets.append(sorted(extra | {p}))
        basis.append(sets)
    return R, NeighborhoodStructure(R.carrier, tuple(tuple(tuple(s) for s in b) for b in basis))


def test_indexed_set_labels_distinct():
    with pytest.raises(ValueError):
        FiniteIndexedSet(2, ("a", "a"))
    s = FiniteIndexedSet(2, ("a", "b"))
    assert s.index("b") == 1 and s.label(0) == "a"


def test_transpose_single_pair():
    R = Relation.from_pairs(2, [(0, 1)])
    assert transpose(R).pairs() == [(1, 0)]


def test_transpose_symmetric_fixed():
    R = Relation.from_pairs(3, [(0, 1), (1, 0), (2, 2)])
    assert transpose(R) == R


def test_transpose_random_matches_index_swap(rng):
    m = rng.random((8, 8)) < 0.4
    T = transpose(Relation(8, m))
    for x, y in itertools.product(range(8), repeat=2):
        assert T.matrix[y, x] == m[x, y]


def test_symmetric_closure_examples(rng):
    assert symmetric_closure(Relation.from_pairs(2, [(0, 1)])).pairs() == [(0, 1), (1, 0)]
    assert symmetric_closure(Relation.empty(4)).pairs() == []
    m = rng.random((10, 10)) < 0.3
    S = symmetric_closure(Relation(10, m))
    for x, y in itertools.product(range(10), repeat=2):
        assert S.matrix[x, y] == (m[x, y] or m[y, x])


def test_closure_discrete_is_identity(rng):
    R = Relation(6, rng.random((6, 6)) < 0.4)
    assert topological_closure(R, NeighborhoodStructure.discrete(6)) == R


def test_closure_indiscrete_is_full():
    R = Relation.from_pairs(5, [(1, 3)])
    assert topological_closure(R, NeighborhoodStructure.indiscrete(5)).pairs() == list(itertools.product(range(5), repeat=2))


def test_closure_empty_carrier():
    R = Relation.empty(0)
    assert topological_closure(R, NeighborhoodStructure.discrete(0)).size == 0


def test_closure_carrier_mismatch():
    with pytest.raises(CarrierMismatch):
        topological_closure(Relation.empty(3), NeighborhoodStructure.discrete(4))


def test_basis_must_contain_point():
    with pytest.raises(ValueError):
        NeighborhoodStructure(FiniteIndexedSet(2), (((1,),), ((1,),)))
    with pytest.raises(ValueError):
        NeighborhoodStructure(FiniteIndexedSet(1), ((),))


@given(relation_and_basis())
def test_closure_matches_quantifier_oracle(rb):
    R, N = rb
    assert set(topological_closure(R, N).pairs()) == closure_oracle(R, N)


@given(relation_and_basis())
def test_closures_commute(rb):
    R, N = rb
    assert topological_closure(symmetric_closure(R), N) == symmetric_closure(topological_closure(R, N))


@given(relation_and_basis(), st.data())
def test_closure_extensive_and_monotone(rb, data):
    R, N = rb
    C = topological_closure(R, N)
    assert R <= C
    n = R.size
    extra = data.draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    R2 = R.union(Relation(n, np.array(extra, dtype=bool).reshape(n, n)))
    assert C <= topological_closure(R2, N)


@given(relations(6), st.data())
def test_closure_idempotent_for_preorder_neighbourhoods(R, data):
    n = R.size
    order = reflexive_transitive_closure(Relation(n, np.array(data.draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n)), dtype=bool).reshape(n, n)))
    # minimal open neighbourhood of p in the Alexandrov topology: its up-set
    N = NeighborhoodStructure(R.carrier, tuple(((tuple(q for q in range(n) if order.matrix[p, q])),) for p in range(n)))
    once = topological_closure(R, N)
    assert topological_closure(once, N) == once


@given(relations(6))
def test_symmetric_closure_idempotent_and_commutes_with_transpose(R):
    S = symmetric_closure(R)
    assert symmetric_closure(S) == S
    assert symmetric_closure(transpose(R)) == transpose(symmetric_closure(R))


def test_rt_closure_against_bfs(rng):
    for _ in range(20):
        n = int(rng.integers(0, 9))
        m = rng.random((n, n)) < 0.25
        C = reflexive_transitive_closure(Relation(n, m))
        for s in range(n):
            seen, todo = {s}, [s]
            while todo:
                u = todo.pop()
                for v in np.flatnonzero(m[u]):
                    if int(v) not in seen:
                        seen.add(int(v))
                        todo.append(int(v))
            assert set(np.flatnonzero(C.matrix[s])) == seen


def test_identity_preserves_and_reflects(rng):
    R = Relation(5, rng.random((5, 5)) < 0.5)
    f = RelationMap.identity(R.carrier)
    assert preserves(f, R, R) and reflects(f, R, R)


def test_constant_map_not_preserving():
    RX = Relation.from_pairs(3, [(0, 1)])
    RY = Relation.from_pairs(2, [(1, 1)])
    f = RelationMap(RX.carrier, RY.carrier, (0, 0, 0))
    assert not preserves(f, RX, RY)


def test_preserve_reflect_random_against_oracle(rng):
    for _ in range(200):
        mX, mY = rng.random((6, 6)) < 0.3, rng.random((6, 6)) < 0.3
        RX, RY = Relation(6, mX), Relation(6, mY)
        a = tuple(int(x) for x in rng.integers(0, 6, size=6))
        f = RelationMap(RX.carrier, RY.carrier, a)
        sX, sY = set(RX.pairs()), set(RY.pairs())
        assert preserves(f, RX, RY) == preserves_oracle(a, sX, sY)
        assert reflects(f, RX, RY) == reflects_oracle(a, sX, sY, 6)
        w = reflection_witness(f, RX, RY)
        assert (w is None) == reflects(f, RX, RY)
        if w is not None:
            assert (a[w[0]], a[w[1]]) in sY and w not in sX


@given(relations(5), st.data())
def test_maps_respect_relation_iff_they_respect_transpose(RX, data):
    n = RX.size
    RY = data.draw(relations(5).filter(lambda r: r.size > 0 or n == 0))
    a = tuple(data.draw(st.lists(st.integers(0, max(RY.size - 1, 0)), min_size=n, max_size=n)))
    f = RelationMap(RX.carrier, RY.carrier, a)
    assert preserves(f, RX, RY) == preserves(f, transpose(RX), transpose(RY))
    assert reflects(f, RX, RY) == reflects(f, transpose(RX), transpose(RY))


def test_relation_map_bounds():
    with pytest.raises(ValueError):
        RelationMap(FiniteIndexedSet(2), FiniteIndexedSet(2), (0, 2))
    with pytest.raises(ValueError):
        RelationMap(FiniteIndexedSet(2), FiniteIndexedSet(2), (0,))


def test_json_round_trip(rng):
    R = Relation(FiniteIndexedSet(4, ("a", "b", "c", "d")), rng.random((4, 4)) < 0.5)
    N = NeighborhoodStructure(R.carrier, (((0, 1),), ((1,), (1, 2)), ((2,),), ((3, 0),)))
    R2, N2 = relation_from_json(relation_to_json(R, N))
    assert R2 == R and N2.basis == N.basis
