import itertools

import numpy as np
import pytest

from disjoint_kit.disjoint import (
    DisjointnessTable,
    builtin_partition,
    builtin_pi0,
    builtin_sbin,
    builtin_setwise,
    closure_of_pairs,
    complement_conditions,
    functor_preserves_disjointness,
    functor_reflects_disjointness,
    is_orthogonal,
    is_overlap_monic,
    overlap_monic_subcategory,
    overlap_monics,
    pullback_extremality_experiment,
    pullback_relation,
    table_from_json,
    table_to_json,
    verify_complement_characterisation,
    verify_disjointness_axioms,
)
from disjoint_kit.fincat import (
    Functor,
    build_concrete_category,
    full_subcategory,
    identity_functor,
    is_essentially_surjective,
    is_full,
    is_isomorphism_morphism,
    validate_category,
)
from disjoint_kit.generators import (
    random_category,
    random_pi0_instance,
    random_sbin_instance,
    random_setwise_instance,
    random_table,
)
from disjoint_kit.relcore import Relation


# quantifier-unfolding oracles, written without numpy indexing


def _isos(C):
    out = []
    for m in range(C.n_morphisms):
        for g in range(C.n_morphisms):
            if C.source[g] == C.target[m] and C.target[g] == C.source[m]:
                if C.comp[g, m] == C.identities[C.source[m]] and C.comp[m, g] == C.identities[C.target[m]]:
                    out.append(m)
                    break
    return out


def axioms_oracle(C, M):
    n = C.n_morphisms
    rel = {(a, b) for a in range(n) for b in range(n) if M[a][b]}
    if any(C.target[a] != C.target[b] for a, b in rel):
        return False
    if any((b, a) not in rel for a, b in rel):
        return False
    for f1, f2 in rel:
        for g1 in range(n):
            for g2 in range(n):
                if C.target[g1] == C.source[f1] and C.target[g2] == C.source[f2]:
                    if (int(C.comp[f1, g1]), int(C.comp[f2, g2])) not in rel:
                        return False
    for f1, f2 in rel:
        for h in _isos(C):
            if C.source[h] == C.target[f1] and (int(C.comp[h, f1]), int(C.comp[h, f2])) not in rel:
                return False
    return True


def complement_oracle(C, M):
    n = C.n_morphisms
    N = {(a, b) for a in range(n) for b in range(n) if C.target[a] == C.target[b] and not M[a][b]}
    if any((b, a) not in N for a, b in N):
        return False
    for f1, f2 in itertools.product(range(n), repeat=2):
        if C.target[f1] != C.target[f2] or (f1, f2) in N:
            continue
        for g1 in range(n):
            for g2 in range(n):
                if C.target[g1] == C.source[f1] and C.target[g2] == C.source[f2]:
                    if (int(C.comp[f1, g1]), int(C.comp[f2, g2])) in N:
                        return False
    for f1, f2 in N:
        for h in _isos(C):
            if C.source[h] == C.target[f1] and (int(C.comp[h, f1]), int(C.comp[h, f2])) not in N:
                return False
    return True


def overlap_monic_oracle(C, M, h):
    fs = [f for f in range(C.n_morphisms) if C.target[f] == C.source[h]]
    return all(M[int(C.comp[h, a]), int(C.comp[h, b])] for a in fs for b in fs if M[a][b])


def injective_maps():
    # singletons 0, 1; a 2-set and a 3-set with an injection and a collapse
    return build_concrete_category(
        [1, 2, 3],
        [(0, 1, [0]), (0, 1, [1]), (0, 2, [0]), (0, 2, [1]), (0, 2, [2]), (1, 2, [0, 2]), (1, 2, [1, 1])],
        closure=True,
    )


def test_setwise_on_injective_maps_valid():
    C, S = build_concrete_category([1, 2, 3], [(0, 1, [0]), (0, 1, [1]), (1, 2, [0, 2])], closure=True)
    assert verify_disjointness_axioms(C, builtin_setwise(C, S)).ok


def test_seeded_precomposition_violation():
    C, S = build_concrete_category([1, 2], [(0, 1, [0]), (0, 1, [1]), (1, 1, [1, 0])], closure=True)
    pts = [m for m in range(C.n_morphisms) if C.source[m] == 0 and C.target[m] == 1]
    # relate the two points, but also relate id with nothing: then {swap∘p0, p1} must be related too
    swap = next(m for m in range(C.n_morphisms) if S.maps[m].assignment == (1, 0))
    ident = C.identities[1]
    T = DisjointnessTable.from_pairs(C, [(ident, swap)])
    report = verify_disjointness_axioms(C, T)
    assert not report.ok
    law, w = report.entries[0]
    assert law == "precomposition" and w[:2] in {(ident, swap), (swap, ident)}
    assert pts  # the generalized elements are present


def test_random_tables_agree_with_oracle(rng):
    hits = 0
    for _ in range(500):
        C, S = random_category(rng, 4, 20)
        M = random_table(rng, C, S)
        got = verify_disjointness_axioms(C, M, first_only=True).ok
        assert got == axioms_oracle(C, M.tolist())
        hits += got
    assert 0 < hits < 500


def test_complement_characterisation_examples():
    C, S = injective_maps()
    T = builtin_setwise(C, S)
    assert verify_disjointness_axioms(C, T).ok and complement_conditions(C, T).ok
    assert verify_complement_characterisation(C, T)
    # break only symmetry
    pairs = T.pairs()
    a, b = next((a, b) for a, b in pairs if a != b)
    M = T.matrix.copy()
    M[b, a] = False
    assert not verify_disjointness_axioms(C, M).ok
    assert not complement_conditions(C, M).ok
    assert verify_complement_characterisation(C, M)


def test_complement_characterisation_random(rng):
    for _ in range(500):
        C, S = random_category(rng, 4, 20)
        M = random_table(rng, C, S)
        assert verify_complement_characterisation(C, M)
        assert complement_conditions(C, M, first_only=True).ok == complement_oracle(C, M.tolist())


def test_pullback_identity_unchanged():
    C, S = injective_maps()
    T = builtin_setwise(C, S)
    assert pullback_relation(identity_functor(C), T) == T


def test_pullback_of_bin_along_diagonal_is_setwise(rng):
    for _ in range(20):
        C, S = random_setwise_instance(rng)
        sizes = [s.size for s in S.sets]
        maps = [(C.source[m], C.target[m], list(S.maps[m].assignment)) for m in range(C.n_morphisms)]
        D, SD = build_concrete_category(sizes, maps, closure=False, relations=[Relation.diagonal(n) for n in sizes])
        assert D.n_morphisms == C.n_morphisms
        F = Functor(C, D, tuple(range(C.n_objects)), tuple(range(C.n_morphisms)))
        pb = pullback_relation(F, builtin_sbin(D, SD))
        assert pb == builtin_setwise(C, S)
        assert functor_preserves_disjointness(F, pb, builtin_sbin(D, SD))
        assert functor_reflects_disjointness(F, pb, builtin_sbin(D, SD))


def test_pullback_along_inclusion_is_restriction():
    C, S = injective_maps()
    T = builtin_setwise(C, S)
    sub, inc = full_subcategory(C, [0, 2])
    pb = pullback_relation(inc, T)
    fm = inc.morphism_map
    for a, b in itertools.product(range(sub.n_morphisms), repeat=2):
        if sub.target[a] == sub.target[b]:
            assert pb.related(a, b) == T.related(fm[a], fm[b])


def test_isomorphisms_overlap_monic(rng):
    for _ in range(100):
        C, S = random_category(rng, 4, 20)
        M = random_table(rng, C, S)
        if not verify_disjointness_axioms(C, M, first_only=True).ok:
            continue
        monic = set(overlap_monics(C, M))
        for m in range(C.n_morphisms):
            if is_isomorphism_morphism(C, m):
                assert m in monic
        # closed under composition
        for g, f in itertools.product(monic, repeat=2):
            if C.target[f] == C.source[g]:
                assert int(C.comp[g, f]) in monic


def test_non_injective_setwise_witness():
    C, S = injective_maps()
    T = builtin_setwise(C, S)
    collapse = next(m for m in range(C.n_morphisms) if S.maps[m].assignment == (1, 1))
    check = is_overlap_monic(C, T, collapse)
    assert not check.ok
    f1, f2 = check.witness
    assert C.source[f1] == C.source[f2] == 0
    assert S.maps[f1].assignment != S.maps[f2].assignment


def test_setwise_monic_iff_injective(rng):
    for _ in range(30):
        C, S = random_setwise_instance(rng)
        T = builtin_setwise(C, S)
        for m in range(C.n_morphisms):
            assert is_overlap_monic(C, T, m).ok == S.maps[m].is_injective()
            assert is_overlap_monic(C, T, m).ok == overlap_monic_oracle(C, T.matrix, m)


def test_sbin_monic_iff_reflects(rng):
    for _ in range(30):
        C, S = random_sbin_instance(rng)
        T = builtin_sbin(C, S)
        for m in range(C.n_morphisms):
            Rs, Rt = S.relations[C.source[m]].matrix, S.relations[C.target[m]].matrix
            a = S.maps[m].assignment
            refl = all(Rs[x, y] for x in range(len(a)) for y in range(len(a)) if Rt[a[x], a[y]])
            assert is_overlap_monic(C, T, m).ok == refl


def test_pi0_monic_iff_component_injective(rng):
    for _ in range(30):
        C, S = random_pi0_instance(rng)
        T = builtin_pi0(C, S)
        for m in range(C.n_morphisms):
            cs, ct = S.components[C.source[m]], S.components[C.target[m]]
            a = S.maps[m].assignment
            induced = {}
            inj = True
            for x, y in enumerate(a):
                induced.setdefault(cs[x], set()).add(ct[y])
            images = [next(iter(v)) for v in induced.values()]
            inj = len(images) == len(set(images))
            assert is_overlap_monic(C, T, m).ok == inj


def test_subcategory_total_and_empty(rng):
    C, S = injective_maps()
    total = DisjointnessTable.total(C)
    assert verify_disjointness_axioms(C, total).ok
    assert overlap_monic_subcategory(C, total).category.n_morphisms == C.n_morphisms
    empty = DisjointnessTable.empty(C)
    assert overlap_monic_subcategory(C, empty).category.n_morphisms == C.n_morphisms


def test_subcategory_is_injective_maps_and_orthogonal(rng):
    for _ in range(20):
        C, S = random_setwise_instance(rng)
        T = builtin_setwise(C, S)
        oc = overlap_monic_subcategory(C, T)
        assert set(oc.morphisms_in_parent()) == {m for m in range(C.n_morphisms) if S.maps[m].is_injective()}
        assert validate_category(oc.category).ok
        assert is_orthogonal(oc.category, oc.relation).ok
        assert len(oc.certificate_json()) == oc.category.n_morphisms


def test_subcategory_rejects_invalid_table():
    C, S = injective_maps()
    swapped = DisjointnessTable.from_pairs(C, [(C.identities[1], C.identities[1])])
    with pytest.raises(ValueError):
        overlap_monic_subcategory(C, swapped)


def test_coarse_to_fine_preserves_not_reflects():
    # one graph with two path components that a coarser labelling glues
    C, S = build_concrete_category([1, 4], [(0, 1, [y]) for y in range(4)], closure=True)
    coarse = [[0], [0, 0, 0, 0]]
    fine = [[0], [0, 0, 1, 1]]
    Tc, Tf = builtin_partition(C, S, coarse), builtin_partition(C, S, fine)
    F = identity_functor(C)
    assert functor_preserves_disjointness(F, Tc, Tf)
    assert not functor_reflects_disjointness(F, Tc, Tf)


def test_functor_checks_against_oracle(rng):
    for _ in range(100):
        C, S = random_category(rng, 4, 20)
        A, B = random_table(rng, C, S), random_table(rng, C, S)
        F = identity_functor(C)
        n = C.n_morphisms
        pres = all(B[a, b] for a in range(n) for b in range(n) if A[a, b])
        refl = all(A[a, b] for a in range(n) for b in range(n) if B[a, b] and C.target[a] == C.target[b])
        assert functor_preserves_disjointness(F, A, B) == pres
        assert functor_reflects_disjointness(F, A, B) == refl


def test_functors_respect_overlap_monics(rng):
    for _ in range(40):
        C, S = random_setwise_instance(rng)
        T = builtin_setwise(C, S)
        sub, inc = full_subcategory(C, list(range(C.n_objects)))
        pb = pullback_relation(inc, T)
        assert is_full(inc) and is_essentially_surjective(inc)
        for h in range(sub.n_morphisms):
            assert is_overlap_monic(sub, pb, h).ok == is_overlap_monic(C, T, inc(h)).ok


def test_builtin_equal_images_unrelated():
    C, S = build_concrete_category([1, 1, 2], [(0, 2, [0]), (1, 2, [0])], closure=True, relations=[Relation.empty(1), Relation.empty(1), Relation.diagonal(2)], components=[[0], [0], [0, 1]])
    a, b = [m for m in range(C.n_morphisms) if not C.is_identity(m)]
    for T in (builtin_setwise(C, S), builtin_sbin(C, S), builtin_pi0(C, S)):
        assert not T.related(a, b)


def test_pi0_disjoint_components_related():
    C, S = build_concrete_category([1, 1, 2], [(0, 2, [0]), (1, 2, [1])], closure=True, components=[[0], [0], [0, 1]])
    a, b = [m for m in range(C.n_morphisms) if not C.is_identity(m)]
    assert builtin_pi0(C, S).related(a, b)


def test_builtins_match_definitions(rng):
    for _ in range(30):
        C, S = random_sbin_instance(rng)
        Tset, Tbin = builtin_setwise(C, S), builtin_sbin(C, S)
        for a, b in itertools.product(range(C.n_morphisms), repeat=2):
            if C.target[a] != C.target[b]:
                continue
            ia, ib = S.maps[a].image(), S.maps[b].image()
            R = S.relations[C.target[a]].matrix
            assert Tset.related(a, b) == (not ia & ib)
            assert Tbin.related(a, b) == (not any(R[x, y] for x in ia for y in ib))


def test_extremality_experiment_runs(rng):
    C, S = random_setwise_instance(rng)
    T = builtin_setwise(C, S)
    cands = [closure_of_pairs(C, []), T, DisjointnessTable.total(C)]
    out = pullback_extremality_experiment(identity_functor(C), T, cands)
    assert out["candidates"] == 3


def test_table_json_round_trip():
    C, S = injective_maps()
    T = builtin_setwise(C, S)
    assert table_from_json(C, table_to_json(T)) == T


def test_non_conterminous_rejected():
    C, S = injective_maps()
    a = next(m for m in range(C.n_morphisms) if C.target[m] == 1)
    b = next(m for m in range(C.n_morphisms) if C.target[m] == 2)
    with pytest.raises(ValueError):
        DisjointnessTable.from_pairs(C, [(a, b)])
