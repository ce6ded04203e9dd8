"""Seeded random instances for property checks and the acceptance suites."""

from __future__ import annotations

import numpy as np

from .causal_models import (
    CategoryTooLarge,
    InvalidMorphism,
    LatticePatch,
    PatchCategory,
    block,
    build_causal_category,
    cylinder,
    enumerate_morphisms,
    punctured_block,
)
from .disjoint import closure_of_pairs, conterminous_mask
from .fincat import (
    ConcreteStructure,
    FiniteCategory,
    build_concrete_category,
    build_free_category,
    build_poset_category,
)
from .relcore import FiniteIndexedSet, Relation, reflexive_transitive_closure


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# small abstract categories -----------------------------------------------------


def random_preorder(rng: np.random.Generator, n: int, density: float = 0.3) -> Relation:
    m = rng.random((n, n)) < density
    return reflexive_transitive_closure(Relation(FiniteIndexedSet(n), m))


def _random_map(rng, n_src: int, n_tgt: int, kind: str) -> list[int]:
    if kind == "injective" and n_src <= n_tgt:
        return [int(x) for x in rng.permutation(n_tgt)[:n_src]]
    return [int(x) for x in rng.integers(0, n_tgt, size=n_src)]


def random_category(rng: np.random.Generator, max_objects: int = 5, max_morphisms: int = 30) -> tuple[FiniteCategory, ConcreteStructure | None]:
    """A small valid category of one of four flavours, retrying until the size bound holds."""
    while True:
        kind = int(rng.integers(4))
        try:
            if kind == 0:
                C = build_poset_category(random_preorder(rng, int(rng.integers(1, max_objects + 1))))
                S = None
            elif kind == 1:
                k = int(rng.integers(1, min(4, max_objects) + 1))
                sizes = [int(x) for x in rng.integers(1, 4, size=k)]
                maps = []
                for _ in range(int(rng.integers(1, 5))):
                    s, t = (int(x) for x in rng.integers(0, k, size=2))
                    maps.append((s, t, _random_map(rng, sizes[s], sizes[t], "injective" if rng.random() < 0.6 else "any")))
                C, S = build_concrete_category(sizes, maps, closure=True, max_morphisms=max_morphisms)
            elif kind == 2:
                n = int(rng.integers(2, 4))
                gens = [(0, 0, _random_map(rng, n, n, "injective" if rng.random() < 0.5 else "any")) for _ in range(int(rng.integers(1, 3)))]
                C, S = build_concrete_category([n], gens, closure=True, max_morphisms=max_morphisms)
            else:
                k = int(rng.integers(1, max_objects + 1))
                edges = []
                for _ in range(int(rng.integers(0, 6))):
                    a, b = sorted(int(x) for x in rng.integers(0, k, size=2))
                    if a != b:
                        edges.append((a, b))
                C = build_free_category(k, edges)
                S = None
        except ValueError:
            continue
        if C.n_objects <= max_objects and C.n_morphisms <= max_morphisms:
            return C, S


def random_table(rng: np.random.Generator, C: FiniteCategory, S: ConcreteStructure | None = None) -> np.ndarray:
    """An ordered relation on conterminous pairs; some are valid disjointness relations, some are not."""
    cont = conterminous_mask(C)
    pairs = np.argwhere(np.triu(cont))
    mode = int(rng.integers(5))
    if mode == 0 or not len(pairs):
        M = (rng.random(cont.shape) < rng.uniform(0.05, 0.6)) & cont
        if rng.random() < 0.5:
            M |= M.T
        return M
    k = int(rng.integers(0, min(4, len(pairs)) + 1))
    seeds = [tuple(int(x) for x in pairs[i]) for i in rng.choice(len(pairs), size=k, replace=False)]
    M = closure_of_pairs(C, seeds).matrix.copy()
    if mode == 1:
        return M
    if mode == 2:
        a, b = pairs[int(rng.integers(len(pairs)))]
        M[a, b] = M[b, a] = not M[a, b]
        return M
    if mode == 3:
        on = np.argwhere(M)
        if len(on):
            a, b = on[int(rng.integers(len(on)))]
            M[a, b] = False
        return M
    if S is not None:
        from .disjoint import builtin_setwise

        return builtin_setwise(C, S).matrix.copy()
    return M


# concrete families -------------------------------------------------------------


def random_setwise_instance(rng: np.random.Generator, max_morphisms: int = 200):
    """Concrete category with singletons mapping onto every element of every set."""
    while True:
        n_single = int(rng.integers(1, 3))
        big = [int(x) for x in rng.integers(2, 4, size=int(rng.integers(1, 4)))]
        sizes = [1] * n_single + big
        maps = []
        for t, size in enumerate(sizes):
            for y in range(size):
                maps.append((0, t, [y]))
        k = len(sizes)
        for _ in range(int(rng.integers(1, 5))):
            s, t = (int(x) for x in rng.integers(n_single, k, size=2))
            maps.append((s, t, _random_map(rng, sizes[s], sizes[t], "injective" if rng.random() < 0.5 else "any")))
        try:
            return build_concrete_category(sizes, maps, closure=True, max_morphisms=max_morphisms)
        except ValueError:
            continue


def _random_symmetric(rng, n: int, density: float) -> Relation:
    m = np.triu(rng.random((n, n)) < density)
    return Relation(n, m | m.T)


def random_sbin_instance(rng: np.random.Generator, max_morphisms: int = 200):
    """Sets with symmetric relations, relation-preserving maps and relation-free singletons."""
    while True:
        big = [int(x) for x in rng.integers(2, 4, size=int(rng.integers(1, 4)))]
        sizes = [1] + big
        rels = [Relation.empty(1)] + [_random_symmetric(rng, n, 0.5) for n in big]
        maps = [(0, t, [y]) for t, size in enumerate(sizes) for y in range(size)]
        k = len(sizes)
        added = 0
        for _ in range(30):
            s, t = (int(x) for x in rng.integers(1, k, size=2))
            a = _random_map(rng, sizes[s], sizes[t], "injective" if rng.random() < 0.5 else "any")
            Rs, Rt = rels[s].matrix, rels[t].matrix
            if all(Rt[a[x], a[y]] for x, y in np.argwhere(Rs)):
                maps.append((s, t, a))
                added += 1
                if added >= 4:
                    break
        try:
            C, S = build_concrete_category(sizes, maps, closure=True, relations=rels, max_morphisms=max_morphisms)
        except ValueError:
            continue
        return C, S


def random_pi0_instance(rng: np.random.Generator, max_morphisms: int = 200):
    """Sets partitioned into components, component-respecting maps and singletons."""
    while True:
        big = [int(x) for x in rng.integers(2, 5, size=int(rng.integers(1, 4)))]
        sizes = [1] + big
        comps = [[0]] + [[int(c) for c in rng.integers(0, max(1, n - 1), size=n)] for n in big]
        maps = [(0, t, [y]) for t, size in enumerate(sizes) for y in range(size)]
        k = len(sizes)
        added = 0
        for _ in range(40):
            s, t = (int(x) for x in rng.integers(1, k, size=2))
            # pick a target component for each source component
            cs = sorted(set(comps[s]))
            choice = {c: int(rng.choice(sorted(set(comps[t])))) for c in cs}
            a = []
            for x in range(sizes[s]):
                options = [y for y in range(sizes[t]) if comps[t][y] == choice[comps[s][x]]]
                a.append(int(rng.choice(options)))
            maps.append((s, t, a))
            added += 1
            if added >= 4:
                break
        try:
            return build_concrete_category(sizes, maps, closure=True, components=comps, max_morphisms=max_morphisms)
        except ValueError:
            continue


# lattice patches ---------------------------------------------------------------


def random_subpatch(rng: np.random.Generator, h: int, w: int, drop: float = 0.25) -> LatticePatch:
    pts = [(i, j) for i in range(h) for j in range(w) if rng.random() >= drop]
    if not pts:
        pts = [(0, 0)]
    return LatticePatch(pts, name=f"sub{h}x{w}")


def random_patch(rng: np.random.Generator, allow_periodic: bool = True, allow_punctures: bool = True) -> LatticePatch:
    kinds = ["block", "sub", "two"]
    if allow_punctures:
        kinds.append("punct")
    if allow_periodic:
        kinds.append("cyl")
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "block":
        return block(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    if kind == "sub":
        return random_subpatch(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
    if kind == "two":
        a = block(int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        off = (int(rng.integers(-1, 4)), int(rng.integers(3, 5)))
        pts = list(a.points) + [(p + off[0], q + off[1]) for p, q in block(int(rng.integers(1, 3)), int(rng.integers(1, 3))).points]
        return LatticePatch(sorted(set(pts)), name="two")
    if kind == "punct":
        h, w = int(rng.integers(3, 5)), int(rng.integers(3, 5))
        hole = (int(rng.integers(1, h - 1)), int(rng.integers(1, w - 1)))
        return punctured_block(h, w, [hole])
    return cylinder(int(rng.integers(2, 4)), int(rng.integers(2, 4)), "plus" if rng.random() < 0.5 else "minus")


def random_causal_category(
    rng: np.random.Generator,
    max_points: int = 36,
    max_morphisms: int = 150,
    builder=build_causal_category,
    patch_source=None,
    reflections: bool = True,
) -> PatchCategory:
    """Two or three random patches, a few random morphisms between them, probes and composites."""
    patch_source = patch_source or random_patch
    while True:
        k = int(rng.integers(2, 4))
        patches = [patch_source(rng) for _ in range(k)]
        if any(len(p) > max_points for p in patches) or sum(len(p) for p in patches) > 40:
            continue
        gens = []
        for _ in range(int(rng.integers(1, 4))):
            s, t = (int(x) for x in rng.integers(0, k, size=2))
            if patches[s].is_periodic and s != t:
                continue
            options = enumerate_morphisms(patches[s], patches[t], reflections=reflections)
            if options:
                gens.append((s, t, options[int(rng.integers(len(options)))]))
        try:
            pc = builder(patches, gens, {"max_morphisms": max_morphisms})
        except (CategoryTooLarge, InvalidMorphism):
            continue
        if pc.category.n_morphisms <= max_morphisms:
            return pc


# chiral families -----------------------------------------------------------------


def random_staircase(rng: np.random.Generator, h: int | None = None) -> LatticePatch:
    """Rows of overlapping xp-intervals: connected, one run per row."""
    h = h or int(rng.integers(1, 5))
    lo, hi = 0, int(rng.integers(0, 4))
    pts = []
    for i in range(h):
        pts += [(i, j) for j in range(lo, hi + 1)]
        nlo = int(rng.integers(lo - 1, hi + 1))
        nhi = int(rng.integers(max(nlo, lo), hi + 3))
        lo, hi = nlo, min(nhi, nlo + 4)
    return LatticePatch(pts, name=f"stair{h}")


def random_chiral_patch(rng: np.random.Generator, initial_only: bool = False) -> LatticePatch:
    if initial_only or rng.random() < 0.4:
        if rng.random() < 0.5:
            return random_staircase(rng)
        return block(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    return random_patch(rng)


def random_chiral_category(
    rng: np.random.Generator, max_points: int = 36, max_morphisms: int = 150, initial_only: bool = False
) -> PatchCategory:
    from .chiral_models import build_chiral_category

    return random_causal_category(
        rng,
        max_points,
        max_morphisms,
        builder=build_chiral_category,
        patch_source=lambda r: random_chiral_patch(r, initial_only),
        reflections=False,
    )
