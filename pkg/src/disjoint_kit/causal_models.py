"""Lightcone-lattice patches with their causal order.

Points are integer pairs ``(xm, xp)`` in lightcone coordinates.  A unit step
raises one coordinate by one; J is the reflexive-transitive closure of the
in-patch steps.  Morphisms act on each connected component by a translation
or by the total reflection ``(xm, xp) -> (-xm, -xp)``, which reverses time
orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .disjoint import DisjointnessTable, conterminous_mask, is_overlap_monic
from .fincat import UNDEFINED, FiniteCategory, full_subcategory
from .relcore import (
    FiniteIndexedSet,
    NeighborhoodStructure,
    Relation,
    RelationMap,
    reflects,
    reflexive_transitive_closure,
    symmetric_closure,
    topological_closure,
)

Point = tuple[int, int]
STEPS: tuple[Point, Point] = ((1, 0), (0, 1))
UNIT: tuple[Point, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))
LEVELS = ("none", "causal", "causally_simple", "globally_hyperbolic")


def _reduce(p: Point, periods) -> Point:
    a, b = p
    if periods[0] is not None:
        a %= periods[0]
    if periods[1] is not None:
        b %= periods[1]
    return (a, b)


@dataclass(frozen=True)
class LatticePatch:
    """A finite set of lattice points, optionally periodic in either coordinate.

    ``punctures`` are lattice points removed from the patch whose null lines
    carry coarser neighbourhoods (see :func:`declared_basis`).
    """

    points: tuple
    periods: tuple = (None, None)
    punctures: tuple = ()
    name: str = ""

    def __post_init__(self) -> None:
        periods = tuple(None if m is None else int(m) for m in self.periods)
        if len(periods) != 2 or any(m is not None and m < 2 for m in periods):
            raise ValueError("periods must be a pair of moduli >= 2 or None")
        pts = [_reduce((int(a), int(b)), periods) for a, b in self.points]
        if len(set(pts)) != len(pts):
            raise ValueError("points must be distinct after periodic reduction")
        holes = sorted({_reduce((int(a), int(b)), periods) for a, b in self.punctures})
        if set(holes) & set(pts):
            raise ValueError("a puncture cannot also be a point")
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "points", tuple(sorted(pts)))
        object.__setattr__(self, "punctures", tuple(holes))

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @property
    def is_periodic(self) -> bool:
        return self.periods != (None, None)

    def reduce(self, p: Point) -> Point:
        return _reduce(p, self.periods)

    def lookup(self, p: Point) -> int | None:
        return self.index.get(self.reduce(p))

    def neighbours(self, i: int) -> list[int]:
        a, b = self.points[i]
        out = []
        for da, db in UNIT:
            j = self.lookup((a + da, b + db))
            if j is not None and j != i:
                out.append(j)
        return sorted(set(out))

    def step_successors(self, i: int) -> list[int]:
        a, b = self.points[i]
        out = []
        for da, db in STEPS:
            j = self.lookup((a + da, b + db))
            if j is not None:
                out.append(j)
        return out

    @cached_property
    def components(self) -> tuple:
        """Component label per point (labels ordered by lowest point index)."""
        label = [-1] * len(self.points)
        c = 0
        for s in range(len(self.points)):
            if label[s] >= 0:
                continue
            stack = [s]
            label[s] = c
            while stack:
                i = stack.pop()
                for j in self.neighbours(i):
                    if label[j] < 0:
                        label[j] = c
                        stack.append(j)
            c += 1
        return tuple(label)

    @property
    def n_components(self) -> int:
        return max(self.components, default=-1) + 1

    @property
    def carrier(self) -> FiniteIndexedSet:
        return FiniteIndexedSet(len(self.points), tuple(self.points))

    def key(self) -> tuple:
        return (self.points, self.periods, self.punctures)

    def translated(self, shift: Point) -> "LatticePatch":
        a, b = shift
        return LatticePatch(
            [(p + a, q + b) for p, q in self.points], self.periods, [(p + a, q + b) for p, q in self.punctures], self.name
        )

    def swapped(self) -> "LatticePatch":
        """Exchange the two lightcone coordinates."""
        return LatticePatch(
            [(q, p) for p, q in self.points],
            (self.periods[1], self.periods[0]),
            [(q, p) for p, q in self.punctures],
            self.name + "~" if self.name else "",
        )

    def to_json(self) -> dict:
        out: dict = {"points": [list(p) for p in self.points]}
        if self.is_periodic:
            out["periods"] = list(self.periods)
        if self.punctures:
            out["punctures"] = [list(p) for p in self.punctures]
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, body: dict) -> "LatticePatch":
        periods = tuple(body.get("periods", (None, None)))
        name = body.get("name", "")
        punctures = [tuple(p) for p in body.get("punctures", [])]
        if "block" in body:
            h, w = body["block"]
            a, b = body.get("origin", (0, 0))
            holes = {tuple(p) for p in body.get("holes", [])}
            pts = [(a + i, b + j) for i in range(h) for j in range(w) if (a + i, b + j) not in holes]
            if body.get("puncture_holes", False):
                punctures = sorted(set(punctures) | holes)
            return cls(pts, periods, punctures, name)
        return cls([tuple(p) for p in body["points"]], periods, punctures, name)


def block(h: int, w: int, origin: Point = (0, 0), name: str = "") -> LatticePatch:
    """``h`` values of xm by ``w`` values of xp."""
    a, b = origin
    return LatticePatch([(a + i, b + j) for i in range(h) for j in range(w)], name=name or f"block{h}x{w}")


def punctured_block(h: int, w: int, holes: Sequence[Point], origin: Point = (0, 0), name: str = "") -> LatticePatch:
    a, b = origin
    hs = {tuple(p) for p in holes}
    pts = [(a + i, b + j) for i in range(h) for j in range(w) if (a + i, b + j) not in hs]
    return LatticePatch(pts, punctures=sorted(hs), name=name or f"punctured{h}x{w}")


def cylinder(h: int, w: int, axis: str = "plus", name: str = "") -> LatticePatch:
    """Full ``h`` by ``w`` block made periodic in xp (axis='plus') or xm (axis='minus')."""
    periods = (None, w) if axis == "plus" else (h, None)
    return LatticePatch([(i, j) for i in range(h) for j in range(w)], periods, name=name or f"cyl{axis}{h}x{w}")


# neighbourhoods ----------------------------------------------------------------


def diamond(patch: LatticePatch, i: int) -> frozenset:
    return frozenset([i, *patch.neighbours(i)])


def diamond_basis(patch: LatticePatch) -> NeighborhoodStructure:
    """Radius-one diamond around every point, cut to the patch."""
    return NeighborhoodStructure(patch.carrier, tuple((diamond(patch, i),) for i in range(len(patch))))


def shadowed(patch: LatticePatch) -> list[bool]:
    """Points sharing a null line with some puncture."""
    ms = {r[0] for r in patch.punctures}
    ps = {r[1] for r in patch.punctures}
    return [p[0] in ms or p[1] in ps for p in patch.points]


def declared_basis(patch: LatticePatch) -> NeighborhoodStructure:
    """Smallest open set at each point of the topology generated by the model's neighbourhoods.

    Points on a null line through a puncture get their radius-one diamond;
    every other point is isolated.  The sets are then closed under the
    containment rule ``q in U => U_q subset U`` so the result is an honest
    (Alexandrov) topology basis.
    """
    shade = shadowed(patch)
    raw = [diamond(patch, i) if shade[i] else frozenset([i]) for i in range(len(patch))]
    basis = []
    for i in range(len(patch)):
        acc = set(raw[i])
        stack = list(acc)
        while stack:
            q = stack.pop()
            for r in raw[q]:
                if r not in acc:
                    acc.add(r)
                    stack.append(r)
        basis.append((frozenset(acc),))
    return NeighborhoodStructure(patch.carrier, tuple(basis))


def minimal_open_sets(patch: LatticePatch) -> list[frozenset]:
    return [sets[0] for sets in declared_basis(patch).basis]


# causal structure --------------------------------------------------------------


def step_relation(patch: LatticePatch) -> Relation:
    pairs = [(i, j) for i in range(len(patch)) for j in patch.step_successors(i)]
    return Relation.from_pairs(patch.carrier, pairs)


@dataclass(frozen=True, eq=False)
class CausalStructure:
    patch: LatticePatch
    J: Relation
    sJ: Relation
    neighborhoods: NeighborhoodStructure

    @cached_property
    def closure_J(self) -> Relation:
        return topological_closure(self.J, self.neighborhoods)

    @cached_property
    def closure_sJ(self) -> Relation:
        return topological_closure(self.sJ, self.neighborhoods)


def causal_relation(patch: LatticePatch) -> CausalStructure:
    J = reflexive_transitive_closure(step_relation(patch))
    return CausalStructure(patch, J, symmetric_closure(J), declared_basis(patch))


def bfs_reachable(patch: LatticePatch, p: Point, q: Point) -> bool:
    """Independent check of J by breadth-first search over unit steps."""
    s, t = patch.lookup(p), patch.lookup(q)
    if s is None or t is None:
        raise KeyError("point not in patch")
    seen = {s}
    frontier = [s]
    while frontier:
        nxt = []
        for i in frontier:
            if i == t:
                return True
            for j in patch.step_successors(i):
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    return t in seen


def closure_gap_pairs(cs: CausalStructure) -> list[tuple[Point, Point]]:
    """Pairs in the closure of J that are not related by sJ."""
    gap = cs.closure_J.matrix & ~cs.sJ.matrix
    pts = cs.patch.points
    return [(pts[i], pts[j]) for i, j in np.argwhere(gap)]


def is_causal(cs: CausalStructure) -> bool:
    return cs.J.is_antisymmetric()


def is_J_closed(cs: CausalStructure) -> bool:
    return cs.closure_J == cs.J


def diamonds_complete(cs: CausalStructure) -> bool:
    """Every lattice point between two related points belongs to the patch.

    This is the finite stand-in for compact causal diamonds; periodic patches
    never qualify.
    """
    patch = cs.patch
    if patch.is_periodic:
        return False
    pts = patch.points
    index = patch.index
    for i, j in np.argwhere(cs.J.matrix):
        (a, b), (c, d) = pts[i], pts[j]
        for x in range(a, c + 1):
            for y in range(b, d + 1):
                if (x, y) not in index:
                    return False
    return True


def _topological_order(patch: LatticePatch) -> list[int] | None:
    n = len(patch)
    indeg = [0] * n
    succ = [[j for j in patch.step_successors(i) if j != i] for i in range(n)]
    for i in range(n):
        for j in succ[i]:
            indeg[j] += 1
    order = []
    ready = [i for i in range(n) if indeg[i] == 0]
    while ready:
        ready.sort()
        i = ready.pop(0)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return order if len(order) == n else None


def maximal_chains(cs: CausalStructure, limit: int | None = None) -> list[tuple[int, ...]]:
    """Saturated step paths from a minimal to a maximal point (causal patches only)."""
    patch = cs.patch
    if not is_causal(cs):
        raise ValueError("maximal chains are only enumerated on causal patches")
    n = len(patch)
    succ = [[j for j in patch.step_successors(i) if j != i] for i in range(n)]
    has_pred = [False] * n
    for i in range(n):
        for j in succ[i]:
            has_pred[j] = True
    out: list[tuple[int, ...]] = []

    def walk(path: list[int]) -> bool:
        nxt = succ[path[-1]]
        if not nxt:
            out.append(tuple(path))
            return limit is not None and len(out) >= limit
        for j in nxt:
            path.append(j)
            if walk(path):
                return True
            path.pop()
        return False

    for s in range(n):
        if not has_pred[s] and walk([s]):
            break
    return out


def _uncovered_chain(patch: LatticePatch, order: list[int], chosen: set) -> list[int] | None:
    """A maximal chain avoiding ``chosen``, or None when every maximal chain meets it."""
    n = len(patch)
    succ = [[j for j in patch.step_successors(i) if j != i] for i in range(n)]
    pred: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in succ[i]:
            pred[j].append(i)
    parent = [-2] * n  # -2: unreachable, -1: start of chain
    for v in order:
        if v in chosen:
            continue
        if not pred[v]:
            parent[v] = -1
        else:
            for u in pred[v]:
                if parent[u] != -2:
                    parent[v] = u
                    break
        if parent[v] != -2 and not succ[v]:
            path = [v]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            return path[::-1]
    return None


def cauchy_antichains(cs: CausalStructure, within: Iterable[int] | None = None, limit: int | None = None) -> list[frozenset]:
    """Antichains meeting every maximal chain exactly once, optionally drawn from ``within``."""
    if not is_causal(cs):
        return []
    patch = cs.patch
    order = _topological_order(patch)
    if order is None:
        return []
    allowed = set(range(len(patch))) if within is None else set(within)
    comparable = cs.sJ.matrix
    found: list[frozenset] = []
    seen: set = set()

    def search(chosen: frozenset) -> bool:
        if chosen in seen:
            return False
        seen.add(chosen)
        path = _uncovered_chain(patch, order, set(chosen))
        if path is None:
            found.append(chosen)
            return limit is not None and len(found) >= limit
        for v in path:
            if v in allowed and not any(comparable[v, u] for u in chosen):
                if search(chosen | {v}):
                    return True
        return False

    search(frozenset())
    return sorted(found, key=lambda s: sorted(s))


def is_cauchy_antichain(cs: CausalStructure, S: Iterable[int]) -> bool:
    """Direct check against the enumerated maximal chains."""
    S = set(S)
    return all(sum(1 for v in chain if v in S) == 1 for chain in maximal_chains(cs))


def is_causally_convex(cs: CausalStructure, U: Iterable[int]) -> bool:
    return convexity_witness(cs, U) is None


def convexity_witness(cs: CausalStructure, U: Iterable[int]) -> int | None:
    """Lowest point between two points of U that lies outside U."""
    u = np.zeros(len(cs.patch), dtype=bool)
    u[list(U)] = True
    if not u.any():
        return None
    J = cs.J.matrix
    above = J[u].any(axis=0)
    below = J[:, u].any(axis=1)
    bad = np.flatnonzero(above & below & ~u)
    return int(bad[0]) if bad.size else None


@dataclass(frozen=True)
class CausalClass:
    level: str
    causal: bool = False
    J_closed: bool = False
    diamonds_complete: bool = False
    cauchy_antichain: bool = False

    def __post_init__(self) -> None:
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level}")

    def at_least(self, level: str) -> bool:
        return LEVELS.index(self.level) >= LEVELS.index(level)


def classify_causal(cs: CausalStructure) -> CausalClass:
    """Highest level of the discrete hierarchy whose conditions and all lower ones hold.

    globally hyperbolic = causally simple, causal diamonds complete, and a
    Cauchy antichain exists.
    """
    causal = is_causal(cs)
    closed = is_J_closed(cs)
    complete = diamonds_complete(cs) if causal else False
    cauchy = bool(cauchy_antichains(cs, limit=1)) if causal else False
    level = "none"
    if causal:
        level = "causal"
        if closed:
            level = "causally_simple"
            if complete and cauchy:
                level = "globally_hyperbolic"
    return CausalClass(level, causal, closed, complete, cauchy)


# morphisms ---------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentAction:
    """``p -> sign * p + shift``; sign -1 is the total reflection."""

    sign: int = 1
    shift: tuple = (0, 0)

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "shift", (int(self.shift[0]), int(self.shift[1])))

    def __call__(self, p: Point) -> Point:
        return (self.sign * p[0] + self.shift[0], self.sign * p[1] + self.shift[1])

    def then(self, other: "ComponentAction") -> "ComponentAction":
        """``other ∘ self``."""
        return ComponentAction(
            self.sign * other.sign,
            (other.sign * self.shift[0] + other.shift[0], other.sign * self.shift[1] + other.shift[1]),
        )

    def to_json(self) -> dict:
        return {"sign": self.sign, "shift": list(self.shift)}


class InvalidMorphism(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PatchMorphism:
    source: LatticePatch
    target: LatticePatch
    actions: tuple

    def __post_init__(self) -> None:
        acts = tuple(a if isinstance(a, ComponentAction) else ComponentAction(*a) for a in self.actions)
        if len(acts) != self.source.n_components:
            raise InvalidMorphism("one action per source component is required")
        object.__setattr__(self, "actions", acts)
        pm = []
        for i, p in enumerate(self.source.points):
            j = self.target.lookup(acts[self.source.components[i]](p))
            if j is None:
                raise InvalidMorphism(f"point {p} leaves the target")
            pm.append(j)
        object.__setattr__(self, "point_map", tuple(pm))
        self._check_steps()

    def _check_steps(self) -> None:
        src, tgt = self.source, self.target
        for i in range(len(src)):
            s = self.actions[src.components[i]].sign
            for j in src.step_successors(i):
                a, b = self.point_map[i], self.point_map[j]
                if s == 1 and b not in tgt.step_successors(a):
                    raise InvalidMorphism("a unit step is not sent to a unit step")
                if s == -1 and a not in tgt.step_successors(b):
                    raise InvalidMorphism("a unit step is not sent to a reversed unit step")

    def __call__(self, i: int) -> int:
        return self.point_map[i]

    def as_map(self) -> RelationMap:
        return RelationMap(self.source.carrier, self.target.carrier, self.point_map)

    def image(self) -> frozenset:
        return frozenset(self.point_map)

    def is_injective(self) -> bool:
        return len(set(self.point_map)) == len(self.point_map)

    def key(self) -> tuple:
        signs = tuple(
            self.actions[c].sign if self.source.components.count(c) > 1 else 1 for c in range(self.source.n_components)
        )
        return (self.point_map, signs)

    def then(self, other: "PatchMorphism") -> "PatchMorphism":
        """``other ∘ self``."""
        acts = []
        for c in range(self.source.n_components):
            first = self.source.components.index(c)
            tc = self.target.components[self.point_map[first]]
            acts.append(self.actions[c].then(other.actions[tc]))
        return PatchMorphism(self.source, other.target, tuple(acts))

    def to_json(self) -> dict:
        return {"actions": [a.to_json() for a in self.actions]}


def identity_morphism(patch: LatticePatch) -> PatchMorphism:
    return PatchMorphism(patch, patch, tuple(ComponentAction() for _ in range(patch.n_components)))


def components_separated(f: PatchMorphism) -> bool:
    """Images of distinct source components are never unit-step neighbours."""
    src, tgt = f.source, f.target
    if src.n_components < 2:
        return True
    comps_at: dict[int, set] = {}
    for i, j in enumerate(f.point_map):
        comps_at.setdefault(j, set()).add(src.components[i])
    for i, j in enumerate(f.point_map):
        for k in tgt.neighbours(j):
            if comps_at.get(k, set()) - {src.components[i]}:
                return False
    return True


def is_open_map(f: PatchMorphism, src_open: Sequence[frozenset] | None = None, tgt_open: Sequence[frozenset] | None = None) -> bool:
    """Smallest open set at f(p) lies inside the image of the smallest open set at p."""
    so = src_open if src_open is not None else minimal_open_sets(f.source)
    to = tgt_open if tgt_open is not None else minimal_open_sets(f.target)
    for i in range(len(f.source)):
        img = {f.point_map[k] for k in so[i]}
        if not to[f.point_map[i]] <= img:
            return False
    return True


def _shift_range(lo: int, hi: int, tlo: int, thi: int, period) -> range:
    if period is not None:
        return range(period)
    return range(tlo - lo, thi - hi + 1)


def enumerate_morphisms(
    source: LatticePatch,
    target: LatticePatch,
    reflections: bool = True,
    require_open: bool = True,
    require_separated: bool = True,
) -> list[PatchMorphism]:
    """All per-component translation/reflection morphisms within the target's bounding box."""
    if not len(source):
        return [PatchMorphism(source, target, ())]
    if not len(target):
        return []
    tm = [p[0] for p in target.points]
    tp = [p[1] for p in target.points]
    per_comp: list[list[ComponentAction]] = []
    for c in range(source.n_components):
        pts = [p for p, k in zip(source.points, source.components) if k == c]
        options = []
        for sign in ((1, -1) if reflections else (1,)):
            xs = [sign * p[0] for p in pts]
            ys = [sign * p[1] for p in pts]
            for a in _shift_range(min(xs), max(xs), min(tm), max(tm), target.periods[0]):
                for b in _shift_range(min(ys), max(ys), min(tp), max(tp), target.periods[1]):
                    act = ComponentAction(sign, (a, b))
                    if all(target.lookup(act(p)) is not None for p in pts):
                        options.append(act)
        per_comp.append(options)
    so = minimal_open_sets(source)
    to = minimal_open_sets(target)
    out, keys = [], set()
    for acts in product(*per_comp):
        try:
            f = PatchMorphism(source, target, tuple(acts))
        except InvalidMorphism:
            continue
        if require_separated and not components_separated(f):
            continue
        if require_open and not is_open_map(f, so, to):
            continue
        if f.key() not in keys:
            keys.add(f.key())
            out.append(f)
    return out


def reflects_J_up_to_reversal(f: PatchMorphism, src: CausalStructure | None = None, tgt: CausalStructure | None = None) -> bool:
    return reversal_witness(f, src, tgt) is None


def reversal_witness(f: PatchMorphism, src: CausalStructure | None = None, tgt: CausalStructure | None = None):
    src = src or causal_relation(f.source)
    tgt = tgt or causal_relation(f.target)
    comps = f.source.components
    signs = [f.actions[c].sign for c in comps]
    pm = np.asarray(f.point_map, dtype=int)
    if pm.size == 0:
        return None
    pulled = tgt.J.matrix[np.ix_(pm, pm)]
    Js = src.J.matrix
    for p, q in np.argwhere(pulled):
        if comps[p] != comps[q]:
            return (int(p), int(q))
        ok = Js[p, q] if signs[p] == 1 else Js[q, p]
        if not ok:
            return (int(p), int(q))
    return None


def reflects_closure_sJ(f: PatchMorphism, src: CausalStructure, tgt: CausalStructure) -> bool:
    return reflects(f.as_map(), src.closure_sJ, tgt.closure_sJ)


def reflects_sJ(f: PatchMorphism, src: CausalStructure, tgt: CausalStructure) -> bool:
    return reflects(f.as_map(), src.sJ, tgt.sJ)


def is_cauchy_map(f: PatchMorphism, tgt: CausalStructure | None = None) -> bool:
    tgt = tgt or causal_relation(f.target)
    return bool(cauchy_antichains(tgt, within=f.image(), limit=1))


# categories --------------------------------------------------------------------


def _probe_key(patch: LatticePatch, members: frozenset) -> tuple[LatticePatch, Point]:
    pts = sorted(patch.points[i] for i in members)
    # corner of the bounding box, so the shape is stable under swapping coordinates
    base = (min(a for a, _ in pts), min(b for _, b in pts))
    rel = [(a - base[0], b - base[1]) for a, b in pts]
    ms = {p[0] for p in pts}
    ps = {p[1] for p in pts}
    holes = [(a - base[0], b - base[1]) for a, b in patch.punctures if a in ms or b in ps]
    return LatticePatch(rel, punctures=holes, name=f"probe{len(rel)}"), base


@dataclass
class PatchCategory:
    """A finite category of patches, its geometric morphisms and its disjointness table.

    Iterating yields ``(category, table)``.
    """

    category: FiniteCategory
    table: DisjointnessTable
    patches: list
    morphisms: list
    structures: list = field(default_factory=list)
    relation_name: str = "causal"

    def __iter__(self) -> Iterator:
        return iter((self.category, self.table))

    def structure(self, obj: int):
        return self.structures[obj]


class CategoryTooLarge(ValueError):
    pass


def close_patch_family(
    patches: Sequence[LatticePatch],
    generators: Sequence[tuple[int, int, PatchMorphism]],
    probes: bool = True,
    max_morphisms: int = 1000,
    require_open: bool = True,
) -> tuple[list[LatticePatch], list[tuple[int, int, PatchMorphism]]]:
    """Add identities, probe inclusions for every point, and all composites."""
    objs = list(patches)
    obj_index = {p.key(): i for i, p in enumerate(objs)}
    morphs: list[tuple[int, int, PatchMorphism]] = []
    mkeys: dict = {}

    def add(s: int, t: int, f: PatchMorphism) -> None:
        k = (s, t, f.key())
        if k not in mkeys:
            if require_open and not is_open_map(f):
                raise InvalidMorphism(f"morphism {s}->{t} is not open")
            mkeys[k] = len(morphs)
            morphs.append((s, t, f))
            if len(morphs) > max_morphisms:
                raise CategoryTooLarge(f"more than {max_morphisms} morphisms")

    for i, p in enumerate(objs):
        add(i, i, identity_morphism(p))
    for s, t, f in generators:
        add(s, t, f)
    if probes:
        o = 0
        while o < len(objs):
            patch = objs[o]
            for members in sorted(set(minimal_open_sets(patch)), key=lambda m: sorted(m)):
                shape, base = _probe_key(patch, members)
                if shape.key() not in obj_index:
                    obj_index[shape.key()] = len(objs)
                    objs.append(shape)
                    add(len(objs) - 1, len(objs) - 1, identity_morphism(shape))
                pi = obj_index[shape.key()]
                add(pi, o, PatchMorphism(shape, patch, tuple(ComponentAction(1, base) for _ in range(shape.n_components))))
            o += 1
    done = 0
    while done < len(morphs):
        n = len(morphs)
        for a in range(n):
            for b in range(n):
                if a < done and b < done:
                    continue
                s1, t1, f = morphs[a]
                s2, t2, g = morphs[b]
                if t1 == s2:
                    add(s1, t2, f.then(g))
        done = n
    return objs, morphs


def _category_from_family(objs, morphs) -> FiniteCategory:
    keys = {(s, t, f.key()): i for i, (s, t, f) in enumerate(morphs)}
    n = len(morphs)
    comp = np.full((n, n), UNDEFINED, dtype=np.int64)
    for a, (s1, t1, f) in enumerate(morphs):
        for b, (s2, t2, g) in enumerate(morphs):
            if t1 == s2:
                comp[b, a] = keys[(s1, t2, f.then(g).key())]
    ids = [keys[(i, i, identity_morphism(p).key())] for i, p in enumerate(objs)]
    labels = [f"{objs[s].name or s}->{objs[t].name or t}#{i}" for i, (s, t, _) in enumerate(morphs)]
    return FiniteCategory(tuple(p.name or f"obj{i}" for i, p in enumerate(objs)), [m[0] for m in morphs], [m[1] for m in morphs], ids, comp, labels)


def image_disjointness_table(C: FiniteCategory, morphs, relations: Sequence[np.ndarray]) -> DisjointnessTable:
    """Related iff the target relation misses image(f1) x image(f2)."""
    cont = conterminous_mask(C)
    m = np.zeros_like(cont)
    images = [np.asarray(sorted(f.image()), dtype=int) for _, _, f in morphs]
    for f1, f2 in np.argwhere(np.triu(cont)):
        R = relations[C.target[f1]]
        a, b = images[f1], images[f2]
        m[f1, f2] = not (a.size and b.size and R[np.ix_(a, b)].any())
    return DisjointnessTable(C, m)


def build_causal_category(
    patches: Sequence[LatticePatch],
    morphisms: Sequence[tuple[int, int, PatchMorphism | Sequence]] = (),
    options: dict | None = None,
) -> PatchCategory:
    """Close a family of patches and morphisms under composition and attach the causal disjointness table."""
    opts = {"probes": True, "max_morphisms": 1000, "require_open": True}
    opts.update(options or {})
    gens = []
    for s, t, f in morphisms:
        if not isinstance(f, PatchMorphism):
            f = PatchMorphism(patches[s], patches[t], tuple(f))
        gens.append((s, t, f))
    objs, morphs = close_patch_family(patches, gens, opts["probes"], opts["max_morphisms"], opts["require_open"])
    C = _category_from_family(objs, morphs)
    structures = [causal_relation(p) for p in objs]
    T = image_disjointness_table(C, morphs, [cs.sJ.matrix for cs in structures])
    return PatchCategory(C, T, objs, [f for _, _, f in morphs], structures, "causal")


def connecting_chain_exists(cs: CausalStructure, U: Iterable[int], V: Iterable[int]) -> bool:
    """Search for a step chain in either direction between U and V."""
    U, V = set(U), set(V)
    patch = cs.patch
    for start, goal in ((U, V), (V, U)):
        seen = set(start)
        frontier = list(start)
        while frontier:
            nxt = []
            for i in frontier:
                if i in goal:
                    return True
                for j in patch.step_successors(i):
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
    return False


def causal_separation_views(cs: CausalStructure, U: Iterable[int], V: Iterable[int]) -> tuple[bool, bool, bool]:
    """Three independent readings of 'U and V are causally disjoint'."""
    U, V = sorted(set(U)), sorted(set(V))
    if not U or not V:
        return True, True, True
    via_sJ = not cs.sJ.matrix[np.ix_(U, V)].any()
    via_J = not cs.J.matrix[np.ix_(U, V)].any() and not cs.J.matrix[np.ix_(V, U)].any()
    via_chain = not connecting_chain_exists(cs, U, V)
    return via_sJ, via_J, via_chain


# theorem suites ------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, *witness) -> None:
        self.failures.append(tuple(witness))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": "pass" if self.ok else "fail",
            "checked": self.checked,
            "skipped": self.skipped,
            "witnesses": [list(map(_plain, w)) for w in self.failures[:20]],
        }


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    return x


def causal_theorem_suites(pc: PatchCategory) -> dict[str, SuiteResult]:
    C, T = pc.category, pc.table
    st = pc.structures
    classes = [classify_causal(cs) for cs in st]
    monic = [is_overlap_monic(C, T, h).ok for h in range(C.n_morphisms)]
    res = {k: SuiteResult(k) for k in ("A_closure", "B_simple", "C_hyperbolic", "codomain_causal", "domain_causal_injective", "separation_views", "union_stability", "axioms")}

    from .disjoint import verify_disjointness_axioms

    res["axioms"].checked += 1
    rep = verify_disjointness_axioms(C, T, first_only=True)
    if not rep.ok:
        res["axioms"].fail(*rep.entries[0])

    for h, f in enumerate(pc.morphisms):
        s, t = C.source[h], C.target[h]
        src, tgt = st[s], st[t]
        res["A_closure"].checked += 1
        if monic[h] != reflects_closure_sJ(f, src, tgt):
            res["A_closure"].fail(h, monic[h])
        rev = reflects_J_up_to_reversal(f, src, tgt)
        if classes[s].at_least("causally_simple") and classes[t].at_least("causally_simple"):
            res["B_simple"].checked += 1
            if monic[h] != rev:
                res["B_simple"].fail(h, monic[h])
        else:
            res["B_simple"].skipped += 1
        if classes[s].at_least("globally_hyperbolic") and classes[t].at_least("globally_hyperbolic"):
            res["C_hyperbolic"].checked += 1
            rhs = f.is_injective() and is_causally_convex(tgt, f.image())
            if monic[h] != rhs:
                res["C_hyperbolic"].fail(h, monic[h])
        else:
            res["C_hyperbolic"].skipped += 1
        if classes[t].causal:
            res["codomain_causal"].checked += 1
            if reflects_sJ(f, src, tgt) != rev:
                res["codomain_causal"].fail(h)
        if classes[s].causal and rev:
            res["domain_causal_injective"].checked += 1
            if not f.is_injective():
                res["domain_causal_injective"].fail(h)

    images = [f.image() for f in pc.morphisms]
    cont = conterminous_mask(C)
    for f1, f2 in np.argwhere(np.triu(cont)):
        views = causal_separation_views(st[C.target[f1]], images[f1], images[f2])
        res["separation_views"].checked += 1
        if len(set(views)) != 1 or views[0] != T.related(f1, f2):
            res["separation_views"].fail(int(f1), int(f2))
        # union stability over the proper injective morphisms covering the source of f1
        covers = [g for g in C.into(C.source[f1]) if not C.is_identity(g) and pc.morphisms[g].is_injective()]
        covered = set().union(*(images[g] for g in covers)) if covers else set()
        if len(covered) < len(pc.patches[C.source[f1]]):
            res["union_stability"].skipped += 1
        elif all(T.related(C.comp[f1, g], f2) for g in covers):
            res["union_stability"].checked += 1
            if not T.related(f1, f2):
                res["union_stability"].fail(int(f1), int(f2))
    return res


def hierarchy_checks(pc: PatchCategory) -> dict[str, SuiteResult]:
    """Level nesting and overlap-monic invariance under full-subcategory restriction."""
    C, T = pc.category, pc.table
    classes = [classify_causal(cs) for cs in pc.structures]
    nest = SuiteResult("nesting")
    for cls in classes:
        nest.checked += 1
        ok = (not cls.at_least("causally_simple") or (cls.causal and cls.J_closed)) and (
            not cls.at_least("globally_hyperbolic") or cls.at_least("causally_simple")
        )
        if not ok:
            nest.fail(cls.level)
    inc = SuiteResult("inclusion_stability")
    for level in ("causally_simple", "globally_hyperbolic"):
        objs = [o for o, c in enumerate(classes) if c.at_least(level)]
        if not objs:
            continue
        sub, F = full_subcategory(C, objs)
        fm = np.asarray(F.morphism_map, dtype=int)
        subT = DisjointnessTable(sub, T.matrix[np.ix_(fm, fm)]) if fm.size else DisjointnessTable.empty(sub)
        for h in range(sub.n_morphisms):
            inc.checked += 1
            if is_overlap_monic(sub, subT, h).ok != is_overlap_monic(C, T, int(fm[h])).ok:
                inc.fail(level, int(fm[h]))
    return {"nesting": nest, "inclusion_stability": inc}


def punctured_fixture(size: int = 5) -> PatchCategory:
    """Block with its centre removed, included into the full block."""
    r = size // 2
    U = punctured_block(size, size, [(0, 0)], origin=(-r, -r), name="punctured")
    B = block(size, size, origin=(-r, -r), name="block")
    inc = PatchMorphism(U, B, (ComponentAction(),))
    return build_causal_category([U, B], [(0, 1, inc)])


def hasse_dot(cs: CausalStructure, highlight: Iterable[int] = ()) -> str:
    """DOT digraph of unit steps with highlighted points filled."""
    hi = set(highlight)
    lines = ["digraph hasse {", "  rankdir=BT;"]
    for i, p in enumerate(cs.patch.points):
        style = ', style=filled, fillcolor="lightblue"' if i in hi else ""
        lines.append(f'  p{i} [label="{p[0]},{p[1]}"{style}];')
    for i in range(len(cs.patch)):
        for j in cs.patch.step_successors(i):
            if j != i:
                lines.append(f"  p{i} -> p{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
