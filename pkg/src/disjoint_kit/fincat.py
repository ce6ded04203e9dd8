"""Explicitly tabulated finite categories and functors."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .relcore import FiniteIndexedSet, Relation, RelationMap

UNDEFINED = -1


@dataclass
class ValidationReport:
    """A list of ``(law, witness)`` entries; empty means every law held."""

    entries: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def add(self, law: str, *witness) -> None:
        self.entries.append((law, tuple(int(w) if isinstance(w, (int, np.integer)) else w for w in witness)))

    def count(self, law: str, n: int = 1) -> None:
        self.checks[law] = self.checks.get(law, 0) + n

    @property
    def ok(self) -> bool:
        return not self.entries

    def __bool__(self) -> bool:
        return self.ok

    def laws(self) -> set:
        return {law for law, _ in self.entries}

    def first(self, law: str):
        for name, w in self.entries:
            if name == law:
                return w
        return None

    def extend(self, other: "ValidationReport") -> None:
        self.entries.extend(other.entries)
        for k, v in other.checks.items():
            self.count(k, v)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"law": law, "witness": list(w)} for law, w in self.entries],
            "checks": dict(sorted(self.checks.items())),
        }


@dataclass(frozen=True, eq=False)
class FiniteCategory:
    """Objects, morphisms as (source, target) pairs and a composition table.

    ``comp[g, f]`` is the index of ``g ∘ f`` when ``target(f) == source(g)``
    and ``UNDEFINED`` otherwise.
    """

    objects: tuple
    source: tuple
    target: tuple
    identities: tuple
    comp: np.ndarray
    labels: tuple | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "source", tuple(int(s) for s in self.source))
        object.__setattr__(self, "target", tuple(int(t) for t in self.target))
        object.__setattr__(self, "identities", tuple(int(i) for i in self.identities))
        n = len(self.source)
        if len(self.target) != n:
            raise ValueError("source and target lists differ in length")
        if len(self.identities) != len(self.objects):
            raise ValueError("one identity per object is required")
        comp = np.array(self.comp, dtype=np.int64).reshape(n, n) if n else np.zeros((0, 0), dtype=np.int64)
        comp.setflags(write=False)
        object.__setattr__(self, "comp", comp)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        for m in (*self.source, *self.target):
            if not 0 <= m < len(self.objects):
                raise ValueError(f"object index {m} out of range")
        object.__setattr__(self, "_src", np.array(self.source, dtype=np.int64))
        object.__setattr__(self, "_tgt", np.array(self.target, dtype=np.int64))

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_morphisms(self) -> int:
        return len(self.source)

    def src_array(self) -> np.ndarray:
        return self._src

    def tgt_array(self) -> np.ndarray:
        return self._tgt

    def label(self, m: int) -> str:
        return str(self.labels[m]) if self.labels is not None else f"m{m}"

    def compose(self, g: int, f: int) -> int:
        """Return ``g ∘ f``."""
        if self.target[f] != self.source[g]:
            raise ValueError(f"morphisms {g} and {f} are not composable")
        return int(self.comp[g, f])

    def hom(self, a: int, b: int) -> list[int]:
        return [int(m) for m in np.flatnonzero((self._src == a) & (self._tgt == b))]

    def into(self, b: int) -> np.ndarray:
        return np.flatnonzero(self._tgt == b)

    def out_of(self, a: int) -> np.ndarray:
        return np.flatnonzero(self._src == a)

    def is_identity(self, m: int) -> bool:
        return self.identities[self.source[m]] == m


def _composable(C: FiniteCategory) -> np.ndarray:
    """Boolean matrix: ``[g, f]`` true iff ``target(f) == source(g)``."""
    return C.src_array()[:, None] == C.tgt_array()[None, :]


def validate_category(C: FiniteCategory, limit: int | None = None) -> ValidationReport:
    report = ValidationReport()
    n = C.n_morphisms
    src, tgt = C.src_array(), C.tgt_array()

    def full() -> bool:
        return limit is not None and len(report.entries) >= limit

    for a, i in enumerate(C.identities):
        report.count("identity_endpoints")
        if not 0 <= i < n or C.source[i] != a or C.target[i] != a:
            report.add("identity_endpoints", a, i)
    if not report.ok:
        return report

    composable = _composable(C)
    comp = C.comp
    for g, f in np.argwhere(composable & (comp == UNDEFINED)):
        report.add("closure_missing", g, f)
        if full():
            return report
    for g, f in np.argwhere(~composable & (comp != UNDEFINED)):
        report.add("closure_spurious", g, f)
        if full():
            return report
    report.count("closure", int(composable.sum()))
    if not report.ok:
        return report
    for g, f in np.argwhere(composable):
        h = comp[g, f]
        if not 0 <= h < n or src[h] != src[f] or tgt[h] != tgt[g]:
            report.add("closure_endpoints", g, f)
            if full():
                return report
    if not report.ok:
        return report

    for f in range(n):
        report.count("identity_law", 2)
        if comp[C.identities[C.target[f]], f] != f:
            report.add("left_identity", f)
        if comp[f, C.identities[C.source[f]]] != f:
            report.add("right_identity", f)
        if full():
            return report

    # h ∘ (g ∘ f) == (h ∘ g) ∘ f, vectorised over f
    for g in range(n):
        fs = np.flatnonzero(tgt == src[g])
        if fs.size == 0:
            continue
        gf = comp[g, fs]
        for h in np.flatnonzero(src == tgt[g]):
            left = comp[h, gf]
            right = comp[comp[h, g], fs]
            report.count("associativity", int(fs.size))
            for k in np.flatnonzero(left != right):
                report.add("associativity", h, g, fs[k])
                if full():
                    return report
    return report


def is_valid_category(C: FiniteCategory) -> bool:
    return validate_category(C, limit=1).ok


def category_from_table(objects, morphisms: Sequence[tuple[int, int]], identities, triples: Iterable[tuple[int, int, int]], labels=None) -> FiniteCategory:
    """Build from ``(g, f, g∘f)`` triples; missing entries stay undefined."""
    n = len(morphisms)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for g, f, h in triples:
        comp[g, f] = h
    return FiniteCategory(tuple(objects), [s for s, _ in morphisms], [t for _, t in morphisms], tuple(identities), comp, labels)


def composition_triples(C: FiniteCategory) -> list[tuple[int, int, int]]:
    return [(int(g), int(f), int(C.comp[g, f])) for g, f in np.argwhere(C.comp != UNDEFINED)]


def build_poset_category(order: Relation) -> FiniteCategory:
    """Thin category with one morphism per related pair of a preorder."""
    if not (order.is_reflexive() and order.is_transitive()):
        raise ValueError("order must be reflexive and transitive")
    pairs = order.pairs()
    index = {p: i for i, p in enumerate(pairs)}
    n = len(pairs)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for (x, y), f in index.items():
        for (y2, z), g in index.items():
            if y2 == y:
                comp[g, f] = index[(x, z)]
    objects = tuple(order.carrier.label(i) for i in range(order.size))
    ids = tuple(index[(x, x)] for x in range(order.size))
    labels = tuple(f"{order.carrier.label(x)}<={order.carrier.label(y)}" for x, y in pairs)
    return FiniteCategory(objects, [x for x, _ in pairs], [y for _, y in pairs], ids, comp, labels)


def build_free_category(n_objects: int, edges: Sequence[tuple[int, int]]) -> FiniteCategory:
    """Path category of a finite DAG; morphisms are paths, identities are empty paths."""
    for s, t in edges:
        if not (0 <= s < n_objects and 0 <= t < n_objects):
            raise ValueError("edge endpoint out of range")
    paths: list[tuple[int, tuple]] = [(a, ()) for a in range(n_objects)]
    frontier = list(paths)
    bound = len(edges) + 1
    while frontier:
        nxt = []
        for start, path in frontier:
            end = edges[path[-1]][1] if path else start
            for e, (s, t) in enumerate(edges):
                if s == end:
                    if len(path) >= bound:
                        raise ValueError("edge graph has a cycle; free category would be infinite")
                    nxt.append((start, path + (e,)))
        paths.extend(nxt)
        frontier = nxt
    index = {p: i for i, p in enumerate(paths)}

    def end_of(p):
        start, path = p
        return edges[path[-1]][1] if path else start

    n = len(paths)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for f, pf in enumerate(paths):
        for g, pg in enumerate(paths):
            if pg[0] == end_of(pf):
                comp[g, f] = index[(pf[0], pf[1] + pg[1])]
    labels = tuple(f"{p[0]}:" + ".".join(str(e) for e in p[1]) for p in paths)
    return FiniteCategory(tuple(range(n_objects)), [p[0] for p in paths], [end_of(p) for p in paths], tuple(range(n_objects)), comp, labels)


@dataclass(frozen=True)
class ConcreteStructure:
    """Underlying sets and maps of a concrete category, plus optional decorations.

    ``relations`` holds one symmetric relation per object (for sBin-like use);
    ``components`` holds one component label per element (for the π₀ example).
    """

    sets: tuple
    maps: tuple
    relations: tuple | None = None
    components: tuple | None = None


def _as_set(s) -> FiniteIndexedSet:
    return s if isinstance(s, FiniteIndexedSet) else FiniteIndexedSet(int(s))


def build_concrete_category(
    sets: Sequence,
    maps: Sequence[tuple[int, int, Sequence[int]]],
    closure: bool = True,
    relations: Sequence[Relation] | None = None,
    components: Sequence[Sequence[int]] | None = None,
    max_morphisms: int = 5000,
) -> tuple[FiniteCategory, ConcreteStructure]:
    """Category whose morphisms are the given maps, identities and (optionally) all composites.

    Maps with equal endpoints and equal assignments are the same morphism.
    """
    carriers = tuple(_as_set(s) for s in sets)
    keys: list[tuple[int, int, tuple]] = []
    index: dict = {}

    def add(s: int, t: int, a) -> int:
        key = (s, t, tuple(int(x) for x in a))
        if key not in index:
            if len(key[2]) != carriers[s].size or any(not 0 <= x < carriers[t].size for x in key[2]):
                raise ValueError(f"map {key} does not fit its endpoints")
            index[key] = len(keys)
            keys.append(key)
        return index[key]

    ids = tuple(add(o, o, range(c.size)) for o, c in enumerate(carriers))
    for s, t, a in maps:
        add(int(s), int(t), a)

    def composite(g, f):
        return (keys[f][0], keys[g][1], tuple(keys[g][2][x] for x in keys[f][2]))

    if closure:
        done = 0
        while done < len(keys):
            # every pair involving at least one new morphism
            n = len(keys)
            for f in range(n):
                for g in range(n):
                    if (f >= done or g >= done) and keys[f][1] == keys[g][0]:
                        add(*composite(g, f))
                        if len(keys) > max_morphisms:
                            raise ValueError("composition closure exceeds the morphism bound")
            done = n
    n = len(keys)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for f in range(n):
        for g in range(n):
            if keys[f][1] == keys[g][0]:
                key = composite(g, f)
                if key not in index:
                    raise ValueError(f"composite of morphisms {g} and {f} escapes the family")
                comp[g, f] = index[key]
    C = FiniteCategory(tuple(range(len(carriers))), [k[0] for k in keys], [k[1] for k in keys], ids, comp)
    rmaps = tuple(RelationMap(carriers[s], carriers[t], a) for s, t, a in keys)
    S = ConcreteStructure(
        carriers,
        rmaps,
        tuple(relations) if relations is not None else None,
        tuple(tuple(int(c) for c in comps) for comps in components) if components is not None else None,
    )
    return C, S


def validate_concrete(C: FiniteCategory, S: ConcreteStructure) -> ValidationReport:
    report = ValidationReport()
    for f in range(C.n_morphisms):
        m = S.maps[f]
        if m.domain.size != S.sets[C.source[f]].size or m.codomain.size != S.sets[C.target[f]].size:
            report.add("map_endpoints", f)
    for g, f in np.argwhere(C.comp != UNDEFINED):
        report.count("map_composition")
        if S.maps[f].then(S.maps[g]).assignment != S.maps[int(C.comp[g, f])].assignment:
            report.add("map_composition", g, f)
    if S.relations is not None:
        from .relcore import preserves

        for o, R in enumerate(S.relations):
            if not R.is_symmetric():
                report.add("relation_symmetric", o)
        for f in range(C.n_morphisms):
            report.count("relation_preserved")
            if not preserves(S.maps[f], S.relations[C.source[f]], S.relations[C.target[f]]):
                report.add("relation_preserved", f)
    if S.components is not None:
        for f in range(C.n_morphisms):
            cs, ct = S.components[C.source[f]], S.components[C.target[f]]
            seen: dict = {}
            for x, y in enumerate(S.maps[f].assignment):
                if seen.setdefault(cs[x], ct[y]) != ct[y]:
                    report.add("components_preserved", f, x)
                    break
    return report


@dataclass(frozen=True)
class Functor:
    source: FiniteCategory
    target: FiniteCategory
    object_map: tuple
    morphism_map: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "object_map", tuple(int(x) for x in self.object_map))
        object.__setattr__(self, "morphism_map", tuple(int(x) for x in self.morphism_map))
        if len(self.object_map) != self.source.n_objects or len(self.morphism_map) != self.source.n_morphisms:
            raise ValueError("functor maps must be total")

    def __call__(self, m: int) -> int:
        return self.morphism_map[m]

    def then(self, other: "Functor") -> "Functor":
        """Composite ``other ∘ self``."""
        return Functor(
            self.source,
            other.target,
            tuple(other.object_map[o] for o in self.object_map),
            tuple(other.morphism_map[m] for m in self.morphism_map),
        )


def identity_functor(C: FiniteCategory) -> Functor:
    return Functor(C, C, tuple(range(C.n_objects)), tuple(range(C.n_morphisms)))


def validate_functor(F: Functor) -> ValidationReport:
    report = ValidationReport()
    C, D = F.source, F.target
    for m, fm in enumerate(F.morphism_map):
        report.count("endpoints")
        if not 0 <= fm < D.n_morphisms:
            report.add("morphism_range", m)
            continue
        if D.source[fm] != F.object_map[C.source[m]] or D.target[fm] != F.object_map[C.target[m]]:
            report.add("endpoints", m)
    if not report.ok:
        return report
    for o, i in enumerate(C.identities):
        report.count("identities")
        if F.morphism_map[i] != D.identities[F.object_map[o]]:
            report.add("identities", o)
    fmap = np.array(F.morphism_map, dtype=np.int64)
    for g, f in np.argwhere(C.comp != UNDEFINED):
        report.count("composition")
        if D.comp[fmap[g], fmap[f]] != fmap[C.comp[g, f]]:
            report.add("composition", g, f)
    return report


def fullness_witness(F: Functor) -> tuple[int, int] | None:
    """Lowest object pair whose hom-set map misses something, or None when F is full."""
    C, D = F.source, F.target
    for a, b in product(range(C.n_objects), repeat=2):
        hit = {F.morphism_map[m] for m in C.hom(a, b)}
        if set(D.hom(F.object_map[a], F.object_map[b])) - hit:
            return (a, b)
    return None


def is_full(F: Functor) -> bool:
    return fullness_witness(F) is None


def inverse_of(C: FiniteCategory, m: int) -> int | None:
    a, b = C.source[m], C.target[m]
    for g in C.hom(b, a):
        if C.comp[g, m] == C.identities[a] and C.comp[m, g] == C.identities[b]:
            return g
    return None


def is_isomorphism_morphism(C: FiniteCategory, m: int) -> bool:
    return inverse_of(C, m) is not None


def isomorphisms(C: FiniteCategory) -> list[int]:
    return [m for m in range(C.n_morphisms) if is_isomorphism_morphism(C, m)]


def is_essentially_surjective(F: Functor) -> bool:
    D = F.target
    image = set(F.object_map)
    iso = set(isomorphisms(D))
    for b in range(D.n_objects):
        if b in image:
            continue
        if not any(D.source[m] in image and D.target[m] == b for m in iso):
            return False
    return True


def full_subcategory(C: FiniteCategory, objects: Sequence[int]) -> tuple[FiniteCategory, Functor]:
    """Full subcategory on the given objects together with its inclusion functor."""
    keep_obj = sorted(set(int(o) for o in objects))
    omap = {o: i for i, o in enumerate(keep_obj)}
    keep = [m for m in range(C.n_morphisms) if C.source[m] in omap and C.target[m] in omap]
    return wide_restriction(C, keep, keep_obj)


def wide_restriction(C: FiniteCategory, morphisms: Sequence[int], objects: Sequence[int] | None = None) -> tuple[FiniteCategory, Functor]:
    """Subcategory on a composition-closed morphism set (must contain the kept identities)."""
    keep_obj = list(range(C.n_objects)) if objects is None else sorted(set(objects))
    omap = {o: i for i, o in enumerate(keep_obj)}
    keep = sorted(set(int(m) for m in morphisms))
    mmap = {m: i for i, m in enumerate(keep)}
    n = len(keep)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for i, f in enumerate(keep):
        for j, g in enumerate(keep):
            if C.target[f] == C.source[g]:
                h = int(C.comp[g, f])
                if h not in mmap:
                    raise ValueError(f"morphism set not closed: {g} ∘ {f} = {h} missing")
                comp[j, i] = mmap[h]
    try:
        ids = tuple(mmap[C.identities[o]] for o in keep_obj)
    except KeyError as exc:
        raise ValueError("identity missing from morphism set") from exc
    sub = FiniteCategory(
        tuple(C.objects[o] for o in keep_obj),
        [omap[C.source[m]] for m in keep],
        [omap[C.target[m]] for m in keep],
        ids,
        comp,
        tuple(C.labels[m] for m in keep) if C.labels is not None else tuple(f"m{m}" for m in keep),
    )
    return sub, Functor(sub, C, tuple(keep_obj), tuple(keep))


def category_to_json(C: FiniteCategory) -> dict:
    body = {
        "objects": [str(o) for o in C.objects],
        "morphisms": [{"source": s, "target": t} for s, t in zip(C.source, C.target)],
        "identities": list(C.identities),
        "composition": [list(t) for t in composition_triples(C)],
    }
    if C.labels is not None:
        for m, lab in zip(body["morphisms"], C.labels):
            m["label"] = str(lab)
    return body


def category_from_json(body: dict) -> FiniteCategory:
    morphisms = [(int(m["source"]), int(m["target"])) for m in body["morphisms"]]
    labels = None
    if morphisms and all("label" in m for m in body["morphisms"]):
        labels = tuple(m["label"] for m in body["morphisms"])
    return category_from_table(body["objects"], morphisms, body["identities"], (tuple(t) for t in body.get("composition", [])), labels)
