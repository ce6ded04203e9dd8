"""Right- and left-chiral structure on lattice patches.

``chi_plus`` relates points on one row (equal ``xm``) joined by a gap-free run
of increasing ``xp``; ``chi_minus`` is the same with the axes exchanged.
Chiral morphisms are the orientation-preserving patch morphisms: a translation
on every connected component.  The quotient by the symmetric relation sends a
patch to a disjoint union of finite chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .causal_models import (
    ComponentAction,
    InvalidMorphism,
    LatticePatch,
    PatchCategory,
    PatchMorphism,
    SuiteResult,
    _category_from_family,
    block,
    causal_relation,
    classify_causal,
    close_patch_family,
    declared_basis,
    enumerate_morphisms,
    identity_morphism,
    image_disjointness_table,
    is_cauchy_map,
)
from .disjoint import (
    DisjointnessTable,
    OrthogonalCategory,
    builtin_setwise,
    conterminous_mask,
    is_overlap_monic,
    overlap_monic_subcategory,
    verify_disjointness_axioms,
)
from .fincat import (
    ConcreteStructure,
    FiniteCategory,
    Functor,
    ValidationReport,
    build_concrete_category,
    full_subcategory,
    validate_functor,
)
from .relcore import (
    NeighborhoodStructure,
    Relation,
    reflects,
    reflexive_transitive_closure,
    symmetric_closure,
    topological_closure,
)

Point = tuple[int, int]
CHIRAL_LEVELS = ("none", "chi_causal", "chi_simple", "chi_initial", "globally_hyperbolic")


def _axes(sign: int) -> tuple[int, int]:
    """(fixed axis, run axis) for the chosen chirality."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return (0, 1) if sign == 1 else (1, 0)


def run_steps(patch: LatticePatch, sign: int = 1) -> Relation:
    """Unit steps along the run axis only."""
    _, run = _axes(sign)
    d = (0, 1) if run == 1 else (1, 0)
    pairs = []
    for i, p in enumerate(patch.points):
        j = patch.lookup((p[0] + d[0], p[1] + d[1]))
        if j is not None:
            pairs.append((i, j))
    return Relation.from_pairs(patch.carrier, pairs)


@dataclass(frozen=True, eq=False)
class ChiralStructure:
    """Both chiral relations on a patch; ``sign`` picks the one used by default."""

    patch: LatticePatch
    chi_plus: Relation
    chi_minus: Relation
    s_chi_plus: Relation
    s_chi_minus: Relation
    neighborhoods: NeighborhoodStructure
    sign: int = 1

    @property
    def chi(self) -> Relation:
        return self.chi_plus if self.sign == 1 else self.chi_minus

    @property
    def s_chi(self) -> Relation:
        return self.s_chi_plus if self.sign == 1 else self.s_chi_minus

    @property
    def fixed_axis(self) -> int:
        return _axes(self.sign)[0]

    @cached_property
    def closure_chi(self) -> Relation:
        return topological_closure(self.chi, self.neighborhoods)

    @cached_property
    def closure_s_chi(self) -> Relation:
        return topological_closure(self.s_chi, self.neighborhoods)

    @cached_property
    def classes(self) -> tuple:
        """Class label per point, labels sorted by (component, fixed coordinate)."""
        return chiral_classes(self.patch, self.sign)

    @property
    def n_classes(self) -> int:
        return max(self.classes, default=-1) + 1

    def members(self, c: int) -> list[int]:
        return [i for i, k in enumerate(self.classes) if k == c]

    def dual(self) -> "ChiralStructure":
        return ChiralStructure(
            self.patch, self.chi_plus, self.chi_minus, self.s_chi_plus, self.s_chi_minus, self.neighborhoods, -self.sign
        )


def chiral_relation(patch: LatticePatch, sign: int = 1) -> ChiralStructure:
    _axes(sign)
    plus = reflexive_transitive_closure(run_steps(patch, 1))
    minus = reflexive_transitive_closure(run_steps(patch, -1))
    return ChiralStructure(
        patch, plus, minus, symmetric_closure(plus), symmetric_closure(minus), declared_basis(patch), sign
    )


def chiral_classes(patch: LatticePatch, sign: int = 1) -> tuple:
    """Maximal runs by a single scan in each direction along the run axis."""
    fixed, run = _axes(sign)
    d = (0, 1) if run == 1 else (1, 0)
    raw = [-1] * len(patch)
    runs = []
    for s in range(len(patch)):
        if raw[s] >= 0:
            continue
        raw[s] = len(runs)
        members = [s]
        for direction in (1, -1):
            p = patch.points[s]
            while True:
                p = (p[0] + direction * d[0], p[1] + direction * d[1])
                j = patch.lookup(p)
                if j is None or raw[j] >= 0:
                    break
                raw[j] = len(runs)
                members.append(j)
        runs.append(members)
    comps = patch.components
    order = sorted(range(len(runs)), key=lambda r: (comps[runs[r][0]], patch.points[min(runs[r])][fixed], min(runs[r])))
    relabel = {r: k for k, r in enumerate(order)}
    return tuple(relabel[r] for r in raw)


# hierarchy -----------------------------------------------------------------------


def is_chi_causal(cs: ChiralStructure) -> bool:
    return cs.chi.is_antisymmetric()


def is_chi_closed(cs: ChiralStructure) -> bool:
    return cs.closure_chi == cs.chi


def is_transversal(cs: ChiralStructure) -> bool:
    """Each component has at most one class per value of the fixed coordinate."""
    seen = {}
    comps = cs.patch.components
    for i, c in enumerate(cs.classes):
        key = (comps[i], cs.patch.points[i][cs.fixed_axis])
        if seen.setdefault(key, c) != c:
            return False
    return True


def is_acyclic_quotient(cs: ChiralStructure) -> bool:
    return cs.patch.periods[cs.fixed_axis] is None


@dataclass(frozen=True)
class ChiralClass:
    level: str
    chi_causal: bool
    chi_simple: bool
    chi_initial: bool
    globally_hyperbolic: bool

    def __post_init__(self) -> None:
        if self.level not in CHIRAL_LEVELS:
            raise ValueError(f"unknown level {self.level}")

    def at_least(self, level: str) -> bool:
        return CHIRAL_LEVELS.index(self.level) >= CHIRAL_LEVELS.index(level)


def classify_chiral(cs: ChiralStructure) -> ChiralClass:
    """Highest level whose condition holds together with every lower one."""
    causal = is_chi_causal(cs)
    simple = causal and is_chi_closed(cs)
    initial = simple and is_acyclic_quotient(cs) and bool(chi_cauchy_sets(cs, limit=1))
    gh = classify_causal(causal_relation(cs.patch)).at_least("globally_hyperbolic")
    flags = [causal, simple, initial, gh]
    level = "none"
    for name, ok in zip(CHIRAL_LEVELS[1:], flags):
        if not ok:
            break
        level = name
    return ChiralClass(level, causal, simple, initial, gh)


# convexity and Cauchy sets -------------------------------------------------------


def is_chi_convex(cs: ChiralStructure, U: Iterable[int]) -> bool:
    """Every run segment with both endpoints in U stays in U."""
    return chi_convexity_witness(cs, U) is None


def chi_convexity_witness(cs: ChiralStructure, U: Iterable[int]) -> int | None:
    inside = np.zeros(len(cs.patch), dtype=bool)
    inside[list(U)] = True
    if not inside.any():
        return None
    M = cs.chi.matrix
    after = M[inside].any(axis=0)
    before = M[:, inside].any(axis=1)
    bad = np.flatnonzero(after & before & ~inside)
    return int(bad[0]) if bad.size else None


def is_chi_cauchy_set(cs: ChiralStructure, S: Iterable[int]) -> bool:
    """S meets every maximal run exactly once and the patch admits a transversal section."""
    if not (is_chi_causal(cs) and is_transversal(cs)):
        return False
    hits = [0] * cs.n_classes
    for i in set(S):
        hits[cs.classes[i]] += 1
    return all(h == 1 for h in hits)


def chi_cauchy_sets(cs: ChiralStructure, within: Iterable[int] | None = None, limit: int | None = None) -> list[frozenset]:
    """Sections of the class projection, optionally restricted to ``within``."""
    if not len(cs.patch):
        return [frozenset()]
    if not (is_chi_causal(cs) and is_transversal(cs)):
        return []
    allowed = set(range(len(cs.patch))) if within is None else set(within)
    choices = [[i for i in cs.members(c) if i in allowed] for c in range(cs.n_classes)]
    if any(not ch for ch in choices):
        return []
    out = []
    for pick in product(*choices):
        out.append(frozenset(pick))
        if limit is not None and len(out) >= limit:
            break
    return out


def is_chi_cauchy_map(f: PatchMorphism, tgt: ChiralStructure | None = None) -> bool:
    tgt = tgt or chiral_relation(f.target)
    return bool(chi_cauchy_sets(tgt, within=f.image(), limit=1))


def chi_chain_exists(cs: ChiralStructure, U: Iterable[int], V: Iterable[int]) -> bool:
    """Search along run-axis steps, in both directions, for a path from U to V."""
    steps = run_steps(cs.patch, cs.sign).matrix
    U, V = set(U), set(V)
    for start, goal in ((U, V), (V, U)):
        seen = set(start)
        frontier = list(start)
        while frontier:
            i = frontier.pop()
            if i in goal:
                return True
            for j in np.flatnonzero(steps[i]):
                j = int(j)
                if j not in seen:
                    seen.add(j)
                    frontier.append(j)
    return False


# morphisms ---------------------------------------------------------------------


def _require_orientation(f: PatchMorphism) -> PatchMorphism:
    """Reject reflections; a reflected single point is rewritten as a shift."""
    comps = f.source.components
    acts = []
    for c, a in enumerate(f.actions):
        if a.sign == 1:
            acts.append(a)
            continue
        if comps.count(c) > 1:
            raise InvalidMorphism("chiral morphisms must preserve both null directions")
        p = f.source.points[comps.index(c)]
        q = a(p)
        acts.append(ComponentAction(1, (q[0] - p[0], q[1] - p[1])))
    return PatchMorphism(f.source, f.target, tuple(acts))


def chiral_morphism(source: LatticePatch, target: LatticePatch, shifts: Sequence[Point]) -> PatchMorphism:
    return PatchMorphism(source, target, tuple(ComponentAction(1, s) for s in shifts))


def coordinate_tables(f: PatchMorphism) -> list[dict]:
    """Per component, the maps on each coordinate as ``{"minus": {x: g(x)}, "plus": {...}}``."""
    out = []
    for c, a in enumerate(f.actions):
        pts = [p for p, k in zip(f.source.points, f.source.components) if k == c]
        out.append(
            {
                "minus": {p[0]: p[0] + a.shift[0] for p in pts},
                "plus": {p[1]: p[1] + a.shift[1] for p in pts},
            }
        )
    return out


def morphism_from_tables(source: LatticePatch, target: LatticePatch, tables: Sequence[dict]) -> PatchMorphism:
    """Build a morphism from per-component coordinate maps.

    The maps must be strictly increasing; they must also send unit steps to
    unit steps, which on a connected component forces a translation.
    """
    if len(tables) != source.n_components:
        raise InvalidMorphism("one coordinate table per source component is required")
    shifts = []
    for c, tab in enumerate(tables):
        pts = [p for p, k in zip(source.points, source.components) if k == c]
        g = []
        for axis, name in ((0, "minus"), (1, "plus")):
            m = {int(k): int(v) for k, v in tab[name].items()}
            xs = sorted({p[axis] for p in pts})
            if any(x not in m for x in xs):
                raise InvalidMorphism(f"table {name} of component {c} misses a coordinate")
            vals = [m[x] for x in xs]
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise InvalidMorphism(f"table {name} of component {c} is not strictly increasing")
            offs = {m[x] - x for x in xs}
            if len(offs) != 1:
                raise InvalidMorphism(f"table {name} of component {c} does not send unit steps to unit steps")
            g.append(offs.pop())
        shifts.append(tuple(g))
    return chiral_morphism(source, target, shifts)


def enumerate_chiral_morphisms(source: LatticePatch, target: LatticePatch, require_open: bool = True) -> list[PatchMorphism]:
    return enumerate_morphisms(source, target, reflections=False, require_open=require_open)


def reflects_chi(f: PatchMorphism, src: ChiralStructure, tgt: ChiralStructure) -> bool:
    return reflects(f.as_map(), src.chi, tgt.chi)


def reflects_closure_s_chi(f: PatchMorphism, src: ChiralStructure, tgt: ChiralStructure) -> bool:
    return reflects(f.as_map(), src.closure_s_chi, tgt.closure_s_chi)


# categories ----------------------------------------------------------------------


def build_chiral_category(
    patches: Sequence[LatticePatch],
    morphisms: Sequence[tuple[int, int, PatchMorphism | Sequence]] = (),
    options: dict | None = None,
) -> PatchCategory:
    """Close a family under composition and attach the chiral disjointness table.

    ``options["sign"]`` selects the right (+1) or left (-1) chiral relation.
    """
    opts = {"probes": True, "max_morphisms": 1000, "require_open": True, "sign": 1}
    opts.update(options or {})
    gens = []
    for s, t, f in morphisms:
        if not isinstance(f, PatchMorphism):
            f = chiral_morphism(patches[s], patches[t], f)
        gens.append((s, t, _require_orientation(f)))
    objs, morphs = close_patch_family(patches, gens, opts["probes"], opts["max_morphisms"], opts["require_open"])
    C = _category_from_family(objs, morphs)
    structures = [chiral_relation(p, opts["sign"]) for p in objs]
    T = image_disjointness_table(C, morphs, [cs.s_chi.matrix for cs in structures])
    return PatchCategory(C, T, objs, [f for _, _, f in morphs], structures, "chiral" if opts["sign"] == 1 else "chiral_minus")


def chiral_table(pc: PatchCategory, sign: int) -> DisjointnessTable:
    """The chiral disjointness table of either chirality on an existing patch category."""
    rels = [chiral_relation(p, sign).s_chi.matrix for p in pc.patches]
    morphs = [(pc.category.source[i], pc.category.target[i], f) for i, f in enumerate(pc.morphisms)]
    return image_disjointness_table(pc.category, morphs, rels)


class NotChiInitial(ValueError):
    pass


@dataclass
class ChiLocCategory:
    """A chiral category on initial patches with its overlap-monic subcategory.

    Iterating yields ``(category, table, orthogonal)``.
    """

    patches: PatchCategory
    orthogonal: OrthogonalCategory

    def __iter__(self) -> Iterator:
        return iter((self.patches.category, self.patches.table, self.orthogonal))


def build_chiloc_category(
    patches: Sequence[LatticePatch],
    morphisms: Sequence[tuple[int, int, PatchMorphism | Sequence]] = (),
    options: dict | None = None,
) -> ChiLocCategory:
    for i, p in enumerate(patches):
        if not classify_chiral(chiral_relation(p)).chi_initial:
            raise NotChiInitial(f"patch {i} ({p.name or 'unnamed'}) is not chi-initial")
    pc = build_chiral_category(patches, morphisms, options)
    for i, cs in enumerate(pc.structures):
        if not classify_chiral(cs).chi_initial:
            raise NotChiInitial(f"probe object {i} ({pc.patches[i].name}) is not chi-initial")
    return ChiLocCategory(pc, overlap_monic_subcategory(pc.category, pc.table))


def initial_subcategory(pc: PatchCategory) -> tuple[PatchCategory, Functor]:
    """Full subcategory on the chi-initial objects, with the restricted table."""
    keep = [o for o, cs in enumerate(pc.structures) if classify_chiral(cs).chi_initial]
    sub, F = full_subcategory(pc.category, keep)
    fm = np.asarray(F.morphism_map, dtype=int)
    T = DisjointnessTable(sub, pc.table.matrix[np.ix_(fm, fm)]) if fm.size else DisjointnessTable.empty(sub)
    spc = PatchCategory(
        sub, T, [pc.patches[o] for o in keep], [pc.morphisms[m] for m in fm], [pc.structures[o] for o in keep], pc.relation_name
    )
    return spc, F


# quotient to chains -------------------------------------------------------------


@dataclass(frozen=True)
class LinearOrderBundle:
    """Finite disjoint union of chains on elements ``0..n-1``; each chain lists its elements in order."""

    chains: tuple
    labels: tuple = ()

    def __post_init__(self) -> None:
        chains = tuple(tuple(int(x) for x in c) for c in self.chains)
        flat = [x for c in chains for x in c]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("chains must partition 0..n-1")
        object.__setattr__(self, "chains", chains)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.chains)

    @cached_property
    def position(self) -> dict:
        """element -> (chain, rank)"""
        return {x: (k, r) for k, c in enumerate(self.chains) for r, x in enumerate(c)}

    def to_json(self) -> dict:
        out: dict = {"chains": [list(c) for c in self.chains]}
        if self.labels:
            out["labels"] = [list(x) if isinstance(x, tuple) else x for x in self.labels]
        return out

    @classmethod
    def from_json(cls, body: dict) -> "LinearOrderBundle":
        labels = [tuple(x) if isinstance(x, list) else x for x in body.get("labels", [])]
        return cls(tuple(tuple(c) for c in body["chains"]), tuple(labels))


@dataclass(frozen=True)
class BundleMorphism:
    """Each source chain goes into one target chain, strictly increasing."""

    source: LinearOrderBundle
    target: LinearOrderBundle
    mapping: tuple

    def __post_init__(self) -> None:
        m = tuple(int(x) for x in self.mapping)
        if len(m) != self.source.size or any(not 0 <= x < self.target.size for x in m):
            raise ValueError("mapping does not fit the bundles")
        pos = self.target.position
        for chain in self.source.chains:
            if not chain:
                continue
            ks = {pos[m[x]][0] for x in chain}
            if len(ks) != 1:
                raise ValueError("a chain is split across target chains")
            ranks = [pos[m[x]][1] for x in chain]
            if any(b <= a for a, b in zip(ranks, ranks[1:])):
                raise ValueError("map is not strictly increasing on a chain")
        object.__setattr__(self, "mapping", m)

    def then(self, other: "BundleMorphism") -> "BundleMorphism":
        """``other ∘ self``."""
        return BundleMorphism(self.source, other.target, tuple(other.mapping[x] for x in self.mapping))

    def is_injective(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)

    def is_bijective(self) -> bool:
        return self.is_injective() and len(self.mapping) == self.target.size

    def image(self) -> frozenset:
        return frozenset(self.mapping)


def identity_bundle_morphism(B: LinearOrderBundle) -> BundleMorphism:
    return BundleMorphism(B, B, tuple(range(B.size)))


def quotient_object(cs: ChiralStructure) -> LinearOrderBundle:
    """One chain per component, classes ordered by the fixed coordinate."""
    if not is_acyclic_quotient(cs):
        raise NotChiInitial("the fixed coordinate is periodic, so the class graph is a cycle")
    if not is_transversal(cs):
        raise NotChiInitial("a component has two classes on one row; the quotient branches")
    comps = cs.patch.components
    chains: dict[int, list[int]] = {}
    labels = [None] * cs.n_classes
    for i, c in enumerate(cs.classes):
        chains.setdefault(comps[i], [])
        if labels[c] is None:
            labels[c] = (comps[i], cs.patch.points[i][cs.fixed_axis])
            chains[comps[i]].append(c)
    ordered = [sorted(ch, key=lambda c: labels[c][1]) for _, ch in sorted(chains.items())]
    return LinearOrderBundle(tuple(tuple(ch) for ch in ordered), tuple(labels))


def quotient_morphism(
    f: PatchMorphism,
    src: ChiralStructure | None = None,
    tgt: ChiralStructure | None = None,
    bundles: tuple[LinearOrderBundle, LinearOrderBundle] | None = None,
) -> BundleMorphism:
    """The induced map on classes; raises if f is not constant on a class."""
    src = src or chiral_relation(f.source)
    tgt = tgt or chiral_relation(f.target)
    B, B2 = bundles or (quotient_object(src), quotient_object(tgt))
    mapping = [-1] * src.n_classes
    for i, c in enumerate(src.classes):
        d = tgt.classes[f.point_map[i]]
        if mapping[c] == -1:
            mapping[c] = d
        elif mapping[c] != d:
            raise ValueError(f"morphism splits class {c}")
    return BundleMorphism(B, B2, tuple(mapping))


@dataclass
class QuotientData:
    """Bundles, the bundle category (with one-point probes) and the quotient functor."""

    bundles: list
    morphisms: list
    category: FiniteCategory
    structure: ConcreteStructure
    table: DisjointnessTable
    functor: Functor


def quotient_data(pc: PatchCategory) -> QuotientData:
    C = pc.category
    for o, cs in enumerate(pc.structures):
        if not classify_chiral(cs).chi_initial:
            raise NotChiInitial(f"object {o} is not chi-initial")
    bundles = [quotient_object(cs) for cs in pc.structures]
    qms = [
        quotient_morphism(f, pc.structures[C.source[m]], pc.structures[C.target[m]], (bundles[C.source[m]], bundles[C.target[m]]))
        for m, f in enumerate(pc.morphisms)
    ]
    point = len(bundles)
    sizes = [B.size for B in bundles] + [1]
    maps = [(C.source[m], C.target[m], q.mapping) for m, q in enumerate(qms)]
    maps += [(point, o, [x]) for o, B in enumerate(bundles) for x in range(B.size)]
    BC, BS = build_concrete_category(sizes, maps, closure=True)
    index = {(BC.source[i], BC.target[i], BS.maps[i].assignment): i for i in range(BC.n_morphisms)}
    mm = [index[(C.source[m], C.target[m], q.mapping)] for m, q in enumerate(qms)]
    F = Functor(C, BC, tuple(range(C.n_objects)), tuple(mm))
    return QuotientData(bundles, qms, BC, BS, builtin_setwise(BC, BS), F)


def _bundle_of(qd: QuotientData, obj: int) -> LinearOrderBundle:
    return qd.bundles[obj] if obj < len(qd.bundles) else LinearOrderBundle(((0,),))


def verify_Q_properties(C: FiniteCategory, T: DisjointnessTable, qd: QuotientData, pc: PatchCategory | None = None) -> ValidationReport:
    """Functoriality, disjointness, overlap-monic, Cauchy and 2-of-6 checks for the quotient."""
    rep = ValidationReport()
    fr = validate_functor(qd.functor)
    for law, w in fr.entries:
        rep.add("functor_" + law, *w)
    rep.count("functor", C.n_morphisms)

    BC, BT = qd.category, qd.table
    for b in range(BC.n_morphisms):
        rep.count("bundle_morphism_valid")
        try:
            BundleMorphism(_bundle_of(qd, BC.source[b]), _bundle_of(qd, BC.target[b]), qd.structure.maps[b].assignment)
        except ValueError:
            rep.add("bundle_morphism_valid", b)

    fm = qd.functor.morphism_map
    cont = conterminous_mask(C)
    for f1, f2 in np.argwhere(np.triu(cont)):
        rep.count("disjointness")
        lhs = T.related(int(f1), int(f2))
        rhs = not (qd.morphisms[f1].image() & qd.morphisms[f2].image())
        if lhs != rhs or BT.related(fm[f1], fm[f2]) != rhs:
            rep.add("disjointness", f1, f2)

    bundle_monic = [is_overlap_monic(BC, BT, b).ok for b in range(BC.n_morphisms)]
    for b in range(BC.n_morphisms):
        rep.count("bundle_overlap_monic_iff_injective")
        if bundle_monic[b] != qd.structure.maps[b].is_injective():
            rep.add("bundle_overlap_monic_iff_injective", b)

    monic = [is_overlap_monic(C, T, h).ok for h in range(C.n_morphisms)]
    for h in range(C.n_morphisms):
        if monic[h]:
            rep.count("preserves_overlap_monics")
            if not bundle_monic[fm[h]]:
                rep.add("preserves_overlap_monics", h)

    if pc is not None:
        cauchy = [is_chi_cauchy_map(f, pc.structures[C.target[m]]) for m, f in enumerate(pc.morphisms)]
    else:
        cauchy = [qd.morphisms[m].is_bijective() for m in range(C.n_morphisms)]
    for h in range(C.n_morphisms):
        if monic[h]:
            rep.count("cauchy_iff_iso")
            if cauchy[h] != qd.morphisms[h].is_bijective():
                rep.add("cauchy_iff_iso", h)

    rep.extend(two_of_six_report(C, monic, cauchy))
    return rep


def two_of_six_report(C: FiniteCategory, keep: Sequence[bool], W: Sequence[bool]) -> ValidationReport:
    """Wide-subcategory and 2-of-6 checks for the class W inside the morphisms marked ``keep``."""
    rep = ValidationReport()
    keep = np.asarray(keep, dtype=bool)
    W = np.asarray(W, dtype=bool) & keep
    for i in C.identities:
        rep.count("weq_identities")
        if not W[i]:
            rep.add("weq_identities", i)
    for g in np.flatnonzero(W):
        fs = [int(f) for f in C.into(C.source[g]) if W[f]]
        for f in fs:
            rep.count("weq_composition")
            if not W[C.comp[g, f]]:
                rep.add("weq_composition", f, g)
    for g in np.flatnonzero(keep):
        fs = [int(f) for f in C.into(C.source[g]) if keep[f] and W[C.comp[g, f]]]
        hs = [int(h) for h in C.out_of(C.target[g]) if keep[h] and W[C.comp[h, g]]]
        for f in fs:
            for h in hs:
                rep.count("two_of_six")
                hgf = C.comp[h, C.comp[g, f]]
                if not (W[f] and W[g] and W[h] and W[hgf]):
                    rep.add("two_of_six", f, g, h)
    return rep


# toy observables on bundles ------------------------------------------------------


def solution_space_map(q: BundleMorphism) -> np.ndarray:
    """Pushforward on per-element scalars: basis vector i goes to basis vector q(i)."""
    M = np.zeros((q.target.size, q.source.size), dtype=np.int64)
    for i, j in enumerate(q.mapping):
        M[j, i] = 1
    return M


def compose_with_Q(C: FiniteCategory, T: DisjointnessTable, qd: QuotientData, pc: PatchCategory, keep: Sequence[bool] | None = None) -> ValidationReport:
    """Checks of the solution-space functor composed with the quotient."""
    rep = ValidationReport()
    keep = [True] * C.n_morphisms if keep is None else list(keep)
    mats = [solution_space_map(q) for q in qd.morphisms]
    for i in C.identities:
        rep.count("identity")
        if not np.array_equal(mats[i], np.eye(mats[i].shape[0], dtype=np.int64)):
            rep.add("identity", i)
    for g in range(C.n_morphisms):
        for f in C.into(C.source[g]):
            rep.count("functorial")
            if not np.array_equal(mats[C.comp[g, f]], mats[g] @ mats[int(f)]):
                rep.add("functorial", f, g)
    for h, f in enumerate(pc.morphisms):
        if keep[h] and is_chi_cauchy_map(f, pc.structures[C.target[h]]):
            rep.count("cauchy_invertible")
            M = mats[h]
            if M.shape[0] != M.shape[1] or np.linalg.matrix_rank(M) != M.shape[0]:
                rep.add("cauchy_invertible", h)
    for f1, f2 in T.pairs():
        if keep[f1] and keep[f2]:
            rep.count("related_supports_disjoint")
            s1 = set(np.flatnonzero(mats[f1].any(axis=1)))
            s2 = set(np.flatnonzero(mats[f2].any(axis=1)))
            if s1 & s2:
                rep.add("related_supports_disjoint", f1, f2)
    return rep


# free fermion transport -----------------------------------------------------------


@dataclass(frozen=True)
class FermionField:
    """One value per point, constant along every maximal run."""

    patch: LatticePatch
    values: tuple

    def at(self, p: Point):
        i = self.patch.lookup(p)
        if i is None:
            raise KeyError(f"{p} is not in the patch")
        return self.values[i]

    def restrict(self, S: Iterable[int]) -> dict:
        return {self.patch.points[i]: self.values[i] for i in S}

    def to_json(self) -> list:
        return [[p[0], p[1], v] for p, v in zip(self.patch.points, self.values)]


class NotCauchy(ValueError):
    pass


def fermion_transport(cs: ChiralStructure, cauchy_set: Iterable, initial) -> FermionField:
    """Spread initial data on a Cauchy set along the runs.

    ``cauchy_set`` holds points or indices; ``initial`` is a mapping keyed the
    same way, or a sequence aligned with ``cauchy_set``.
    """
    patch = cs.patch
    items = list(cauchy_set)
    idx = [i if isinstance(i, (int, np.integer)) else patch.lookup(tuple(i)) for i in items]
    if any(i is None for i in idx):
        raise NotCauchy("a Cauchy point is not in the patch")
    if isinstance(initial, dict):
        vals = [initial[k if isinstance(k, (int, np.integer)) else tuple(k)] for k in items]
    else:
        vals = list(initial)
        if len(vals) != len(idx):
            raise ValueError("initial data and Cauchy set differ in length")
    if not is_chi_cauchy_set(cs, idx):
        hits: dict = {}
        for i in idx:
            hits[cs.classes[i]] = hits.get(cs.classes[i], 0) + 1
        missing = [c for c in range(cs.n_classes) if c not in hits]
        double = [c for c, n in hits.items() if n > 1]
        raise NotCauchy(f"not a Cauchy set: unvalued classes {missing}, doubly valued classes {double}")
    by_class = {cs.classes[i]: v for i, v in zip(idx, vals)}
    return FermionField(patch, tuple(by_class[c] for c in cs.classes))


# orientation reversal ------------------------------------------------------------


def reverse_morphism(f: PatchMorphism, source: LatticePatch | None = None, target: LatticePatch | None = None) -> PatchMorphism:
    """The same map with coordinates exchanged on both ends."""
    src = source or f.source.swapped()
    tgt = target or f.target.swapped()
    acts = []
    for c in range(src.n_components):
        q = src.points[src.components.index(c)]
        a = f.actions[f.source.components[f.source.lookup((q[1], q[0]))]]
        acts.append(ComponentAction(a.sign, (a.shift[1], a.shift[0])))
    return PatchMorphism(src, tgt, tuple(acts))


def orientation_reversal(x):
    """Swap coordinates of a patch, a morphism or a whole patch category."""
    if isinstance(x, LatticePatch):
        return x.swapped()
    if isinstance(x, PatchMorphism):
        return reverse_morphism(x)
    if isinstance(x, PatchCategory):
        return reverse_category(x)[0]
    raise TypeError(f"cannot reverse {type(x).__name__}")


def _graph(f: PatchMorphism) -> tuple:
    return tuple(sorted((p, f.target.points[j]) for p, j in zip(f.source.points, f.point_map)))


def reverse_category(pc: PatchCategory, sign: int = 1) -> tuple[PatchCategory, Functor]:
    """Rebuild the category on swapped patches and return the induced isomorphism."""
    C = pc.category
    patches = [p.swapped() for p in pc.patches]
    gens = [(C.source[m], C.target[m], reverse_morphism(f, patches[C.source[m]], patches[C.target[m]])) for m, f in enumerate(pc.morphisms)]
    rev = build_chiral_category(patches, gens, {"max_morphisms": max(1000, 2 * C.n_morphisms), "sign": sign})
    if len(rev.patches) != len(patches):
        raise ValueError("reversal produced new probe objects")
    index = {}
    for m, f in enumerate(rev.morphisms):
        index[(rev.category.source[m], rev.category.target[m], _graph(f))] = m
    mm = []
    for m, f in enumerate(pc.morphisms):
        g = gens[m][2]
        mm.append(index[(C.source[m], C.target[m], _graph(g))])
    return rev, Functor(C, rev.category, tuple(range(C.n_objects)), tuple(mm))


def orientation_reversal_checks(pc: PatchCategory) -> dict[str, SuiteResult]:
    """Reversal exchanges the two chiralities in classification, tables and overlap-monics."""
    res = {k: SuiteResult(k) for k in ("involution", "isomorphism", "classification_swap", "relation_swap", "table_swap", "overlap_monic_swap")}
    for p in pc.patches:
        res["involution"].checked += 1
        if p.swapped().swapped().key() != p.key():
            res["involution"].fail(p.name)
    rev, F = reverse_category(pc)
    res["isomorphism"].checked += 1
    if not validate_functor(F).ok or sorted(F.morphism_map) != list(range(rev.category.n_morphisms)):
        res["isomorphism"].fail("not bijective or not functorial")
        return res
    for o, p in enumerate(pc.patches):
        q = rev.patches[o]
        minus = chiral_relation(p, -1)
        plus_rev = rev.structures[o]
        res["classification_swap"].checked += 1
        a, b = classify_chiral(minus), classify_chiral(plus_rev)
        if a.level != b.level:
            res["classification_swap"].fail(o, a.level, b.level)
        res["relation_swap"].checked += 1
        perm = [q.index[(x[1], x[0])] for x in p.points]
        if not np.array_equal(plus_rev.chi_plus.matrix[np.ix_(perm, perm)], minus.chi_minus.matrix):
            res["relation_swap"].fail(o)
    T_minus = chiral_table(pc, -1)
    fm = np.asarray(F.morphism_map, dtype=int)
    res["table_swap"].checked += 1
    if not np.array_equal(rev.table.matrix[np.ix_(fm, fm)], T_minus.matrix):
        res["table_swap"].fail("tables differ")
    for h in range(pc.category.n_morphisms):
        res["overlap_monic_swap"].checked += 1
        if is_overlap_monic(pc.category, T_minus, h).ok != is_overlap_monic(rev.category, rev.table, int(fm[h])).ok:
            res["overlap_monic_swap"].fail(h)
    return res


# theorem suites ------------------------------------------------------------------


def chiral_theorem_suites(pc: PatchCategory) -> dict[str, SuiteResult]:
    C, T = pc.category, pc.table
    st = pc.structures
    classes = [classify_chiral(cs) for cs in st]
    monic = [is_overlap_monic(C, T, h).ok for h in range(C.n_morphisms)]
    res = {k: SuiteResult(k) for k in ("A_closure", "B_simple", "C_initial", "separation_views", "union_stability", "axioms")}
    res["axioms"].checked += 1
    rep = verify_disjointness_axioms(C, T, first_only=True)
    if not rep.ok:
        res["axioms"].fail(*rep.entries[0])

    for h, f in enumerate(pc.morphisms):
        s, t = C.source[h], C.target[h]
        src, tgt = st[s], st[t]
        res["A_closure"].checked += 1
        if monic[h] != reflects_closure_s_chi(f, src, tgt):
            res["A_closure"].fail(h, monic[h])
        convex = f.is_injective() and is_chi_convex(tgt, f.image())
        if classes[s].chi_simple and classes[t].chi_simple:
            res["B_simple"].checked += 1
            if not (monic[h] == reflects_chi(f, src, tgt) == convex):
                res["B_simple"].fail(h, monic[h])
        else:
            res["B_simple"].skipped += 1
        if classes[s].chi_initial and classes[t].chi_initial:
            res["C_initial"].checked += 1
            if monic[h] != convex:
                res["C_initial"].fail(h, monic[h])
        else:
            res["C_initial"].skipped += 1

    images = [f.image() for f in pc.morphisms]
    cont = conterminous_mask(C)
    for f1, f2 in np.argwhere(np.triu(cont)):
        cs = st[C.target[f1]]
        a, b = sorted(images[f1]), sorted(images[f2])
        via_s = not (a and b and cs.s_chi.matrix[np.ix_(a, b)].any())
        via_chain = not chi_chain_exists(cs, a, b)
        res["separation_views"].checked += 1
        if via_s != via_chain or via_s != T.related(f1, f2):
            res["separation_views"].fail(int(f1), int(f2))
        covers = [g for g in C.into(C.source[f1]) if not C.is_identity(g) and pc.morphisms[g].is_injective()]
        covered = set().union(*(images[g] for g in covers)) if covers else set()
        if len(covered) < len(pc.patches[C.source[f1]]):
            res["union_stability"].skipped += 1
        elif all(T.related(C.comp[f1, g], f2) for g in covers):
            res["union_stability"].checked += 1
            if not T.related(f1, f2):
                res["union_stability"].fail(int(f1), int(f2))
    return res


def chiral_hierarchy_checks(pc: PatchCategory) -> dict[str, SuiteResult]:
    """Nesting of the chiral levels, the causal-to-chiral inclusion, and restriction stability."""
    C, T = pc.category, pc.table
    classes = [classify_chiral(cs) for cs in pc.structures]
    nest = SuiteResult("nesting")
    for o, cls in enumerate(classes):
        nest.checked += 1
        ok = (not cls.chi_simple or cls.chi_causal) and (not cls.chi_initial or cls.chi_simple)
        ok = ok and (not cls.globally_hyperbolic or cls.chi_initial)
        if not ok:
            nest.fail(o, cls.level)
    inc = SuiteResult("inclusion_stability")
    for flag in ("chi_simple", "chi_initial"):
        objs = [o for o, c in enumerate(classes) if getattr(c, flag)]
        if not objs:
            continue
        sub, F = full_subcategory(C, objs)
        fm = np.asarray(F.morphism_map, dtype=int)
        subT = DisjointnessTable(sub, T.matrix[np.ix_(fm, fm)]) if fm.size else DisjointnessTable.empty(sub)
        for h in range(sub.n_morphisms):
            inc.checked += 1
            if is_overlap_monic(sub, subT, h).ok != is_overlap_monic(C, T, int(fm[h])).ok:
                inc.fail(flag, int(fm[h]))
    return {"nesting": nest, "inclusion_stability": inc}


def quotient_suites(pc: PatchCategory) -> dict[str, SuiteResult]:
    """Quotient-functor and solution-space checks on the chi-initial part of a category."""
    sub, _ = initial_subcategory(pc)
    out = {k: SuiteResult(k) for k in ("quotient", "solution_space")}
    if not sub.category.n_morphisms:
        out["quotient"].skipped += 1
        out["solution_space"].skipped += 1
        return out
    qd = quotient_data(sub)
    for name, rep in (
        ("quotient", verify_Q_properties(sub.category, sub.table, qd, sub)),
        ("solution_space", compose_with_Q(sub.category, sub.table, qd, sub, [is_overlap_monic(sub.category, sub.table, h).ok for h in range(sub.category.n_morphisms)])),
    ):
        out[name].checked += sum(rep.checks.values())
        for law, w in rep.entries:
            out[name].fail(law, *w)
    return out


def causal_to_chiral_cauchy(pc: PatchCategory) -> SuiteResult:
    """Causal Cauchy maps into globally hyperbolic targets, tested for the chiral Cauchy property.

    Failures are expected: a finite Cauchy antichain in a block taller than
    it is wide misses some rows (see the module tests).
    """
    res = SuiteResult("causal_cauchy_is_chi_cauchy")
    for h, f in enumerate(pc.morphisms):
        t = pc.category.target[h]
        cs = causal_relation(pc.patches[t])
        if not classify_causal(cs).at_least("globally_hyperbolic"):
            continue
        if is_cauchy_map(f, cs):
            res.checked += 1
            if not is_chi_cauchy_map(f, chiral_relation(pc.patches[t])):
                res.fail(h)
    return res


def simple_not_initial_search(max_size: int = 3) -> dict:
    """Experiment: count small patches that are chi-simple but not chi-initial.

    Reported only; nothing here is asserted.
    """
    counts = {"patches": 0, "chi_simple": 0, "chi_simple_not_initial": 0}
    examples = []
    cells = [(i, j) for i in range(max_size) for j in range(max_size)]
    for mask in range(1, 1 << len(cells)):
        pts = [c for k, c in enumerate(cells) if mask >> k & 1]
        cls = classify_chiral(chiral_relation(LatticePatch(pts)))
        counts["patches"] += 1
        if cls.chi_simple:
            counts["chi_simple"] += 1
            if not cls.chi_initial:
                counts["chi_simple_not_initial"] += 1
                if len(examples) < 5:
                    examples.append(pts)
    counts["examples"] = examples
    return counts


def column_fixture(n: int = 4) -> PatchCategory:
    """An n by n block, one full interior column and its inclusion.

    The column avoids the corners, so no single point of it is a causal
    Cauchy antichain; it is still a chiral Cauchy set.
    """
    B = block(n, n, name="block")
    col = LatticePatch([(i, 0) for i in range(n)], name="column")
    return build_chiral_category([col, B], [(0, 1, chiral_morphism(col, B, [(0, n // 2)]))])

