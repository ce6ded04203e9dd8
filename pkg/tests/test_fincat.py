import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disjoint_kit.fincat import (
    UNDEFINED,
    Functor,
    build_concrete_category,
    build_free_category,
    build_poset_category,
    category_from_json,
    category_from_table,
    category_to_json,
    composition_triples,
    full_subcategory,
    identity_functor,
    is_essentially_surjective,
    is_full,
    is_isomorphism_morphism,
    validate_category,
    validate_concrete,
    validate_functor,
    wide_restriction,
)
from disjoint_kit.relcore import Relation, reflexive_transitive_closure


def chain(n):
    return Relation(n, np.triu(np.ones((n, n), dtype=bool)))


def laws_oracle(C):
    """Unfold the category laws with plain loops."""
    n = C.n_morphisms
    comp = {(g, f): int(C.comp[g, f]) for g in range(n) for f in range(n) if C.comp[g, f] != UNDEFINED}
    for g, f in itertools.product(range(n), repeat=2):
        if (C.target[f] == C.source[g]) != ((g, f) in comp):
            return False
    for (g, f), h in comp.items():
        if C.source[h] != C.source[f] or C.target[h] != C.target[g]:
            return False
    for f in range(n):
        if comp[(C.identities[C.target[f]], f)] != f or comp[(f, C.identities[C.source[f]])] != f:
            return False
    for (g, f), gf in comp.items():
        for h in range(n):
            if (h, g) in comp and comp[(h, gf)] != comp[(comp[(h, g)], f)]:
                return False
    return True


def random_preorder(rng, n, p=0.3):
    return reflexive_transitive_closure(Relation(n, rng.random((n, n)) < p))


def test_chain_three():
    C = build_poset_category(chain(3))
    assert C.n_morphisms == 6 and validate_category(C).ok


def test_seeded_wrong_composite_is_named():
    C = build_poset_category(chain(3))
    comp = np.array(C.comp)
    g, f = next((int(g), int(f)) for g, f in np.argwhere(comp != UNDEFINED) if not C.is_identity(g) and not C.is_identity(f))
    comp[g, f] = C.identities[C.source[f]]
    bad = category_from_table(C.objects, list(zip(C.source, C.target)), C.identities, [(a, b, int(comp[a, b])) for a, b in np.argwhere(comp != UNDEFINED)])
    report = validate_category(bad)
    assert not report.ok
    assert any(w[:2] == (g, f) for law, w in report.entries)


def test_monoid_tables_valid(rng):
    # transformation monoids are associative by construction
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        gens = [(0, 0, [int(x) for x in rng.integers(0, n, size=n)]) for _ in range(int(rng.integers(1, 3)))]
        C, _ = build_concrete_category([n], gens, closure=True)
        assert validate_category(C).ok
        assert laws_oracle(C)


def test_antichain_is_discrete():
    C = build_poset_category(Relation.diagonal(4))
    assert C.n_morphisms == 4 and all(C.is_identity(m) for m in range(4))


def test_chain_two_plus_one():
    assert build_poset_category(chain(3)).n_morphisms == 6
    assert build_poset_category(chain(2)).n_morphisms == 3


def test_poset_rejects_non_preorder():
    with pytest.raises(ValueError):
        build_poset_category(Relation.from_pairs(2, [(0, 1)]))


def test_random_preorder_counts(rng):
    for _ in range(30):
        R = random_preorder(rng, 6)
        C = build_poset_category(R)
        assert C.n_morphisms == int(R.matrix.sum())
        assert validate_category(C).ok and laws_oracle(C)


def test_poset_morphisms_monic_and_epic(rng):
    C = build_poset_category(random_preorder(rng, 5))
    n = C.n_morphisms
    for m in range(n):
        for a, b in itertools.product(range(n), repeat=2):
            if C.target[a] == C.source[m] == C.target[b] and C.source[a] == C.source[b]:
                if C.comp[m, a] == C.comp[m, b]:
                    assert a == b
            if C.source[a] == C.target[m] == C.source[b] and C.target[a] == C.target[b]:
                if C.comp[a, m] == C.comp[b, m]:
                    assert a == b


def test_identities_are_isomorphisms(rng):
    C = build_poset_category(random_preorder(rng, 5))
    assert all(is_isomorphism_morphism(C, i) for i in C.identities)


def test_concrete_two_singletons():
    C, S = build_concrete_category([1, 1, 2], [(0, 2, [0]), (1, 2, [1])], closure=False)
    assert C.n_objects == 3 and C.n_morphisms == 5
    assert validate_concrete(C, S).ok


def test_closed_family_size():
    # {swap} on 2 points is closed up to the identity
    C, _ = build_concrete_category([2], [(0, 0, [1, 0])], closure=False)
    assert C.n_morphisms == 2


def test_concrete_escape_rejected():
    with pytest.raises(ValueError):
        build_concrete_category([3], [(0, 0, [1, 2, 0])], closure=False)


def test_random_injective_maps_valid(rng):
    for _ in range(50):
        sizes = [int(x) for x in rng.integers(1, 4, size=4)]
        maps = []
        for _ in range(4):
            s, t = (int(x) for x in rng.integers(0, 4, size=2))
            if sizes[s] <= sizes[t]:
                maps.append((s, t, [int(x) for x in rng.permutation(sizes[t])[: sizes[s]]]))
        try:
            C, S = build_concrete_category(sizes, maps, closure=True, max_morphisms=300)
        except ValueError:
            continue
        assert validate_category(C).ok and validate_concrete(C, S).ok


def test_free_category():
    C = build_free_category(3, [(0, 1), (1, 2), (0, 2)])
    assert C.n_morphisms == 3 + 3 + 1
    assert validate_category(C).ok
    with pytest.raises(ValueError):
        build_free_category(2, [(0, 1), (1, 0)])


def test_identity_functor():
    C = build_poset_category(chain(3))
    F = identity_functor(C)
    assert validate_functor(F).ok and is_full(F) and is_essentially_surjective(F)


def test_non_full_inclusion():
    C = build_poset_category(chain(2))
    sub, F = wide_restriction(C, list(C.identities))
    assert validate_functor(F).ok
    assert not is_full(F)


def functor_oracle(F):
    C, D = F.source, F.target
    for m in range(C.n_morphisms):
        if D.source[F(m)] != F.object_map[C.source[m]] or D.target[F(m)] != F.object_map[C.target[m]]:
            return False
    for a, i in enumerate(C.identities):
        if F(i) != D.identities[F.object_map[a]]:
            return False
    for g, f in itertools.product(range(C.n_morphisms), repeat=2):
        if C.target[f] == C.source[g] and F(int(C.comp[g, f])) != D.comp[F(g), F(f)]:
            return False
    return True


def full_oracle(F):
    C, D = F.source, F.target
    for a, b in itertools.product(range(C.n_objects), repeat=2):
        got = {F(m) for m in C.hom(a, b)}
        if got != set(D.hom(F.object_map[a], F.object_map[b])):
            return False
    return True


def test_random_functors_against_oracle(rng):
    agree = valid = 0
    for _ in range(200):
        P, Q = random_preorder(rng, 5, 0.2), random_preorder(rng, 5, 0.4)
        C, D = build_poset_category(P), build_poset_category(Q)
        omap = [int(x) for x in rng.integers(0, 5, size=5)]
        idx = {(D.source[m], D.target[m]): m for m in range(D.n_morphisms)}
        mmap = []
        for m in range(C.n_morphisms):
            key = (omap[C.source[m]], omap[C.target[m]])
            mmap.append(idx.get(key, int(rng.integers(D.n_morphisms))))
        F = Functor(C, D, omap, mmap)
        ok = validate_functor(F).ok
        assert ok == functor_oracle(F)
        valid += ok
        if ok:
            assert is_full(F) == full_oracle(F)
            agree += 1
    assert valid > 0


def test_functor_composition_valid(rng):
    for _ in range(30):
        C = build_poset_category(random_preorder(rng, 4))
        sub, F = full_subcategory(C, [0, 1, 2])
        G = identity_functor(C)
        assert validate_functor(F.then(G)).ok


@given(st.integers(1, 5), st.integers(0, 10**6))
def test_builder_output_valid(n, seed):
    rng = np.random.default_rng(seed)
    C = build_poset_category(random_preorder(rng, n))
    assert validate_category(C).ok


def test_json_round_trip(rng):
    C = build_poset_category(random_preorder(rng, 4))
    D = category_from_json(category_to_json(C))
    assert composition_triples(D) == composition_triples(C)
    assert D.identities == C.identities
