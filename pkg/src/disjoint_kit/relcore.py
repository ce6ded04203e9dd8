"""Finite binary relations stored as dense boolean matrices.

A relation lives on a :class:`FiniteIndexedSet`; neighbourhood bases give a
finite stand-in for a topology, which is all the closure operator needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_DENSE_SIZE = 512


class CarrierMismatch(ValueError):
    """Raised when two objects that must share a carrier do not."""


@dataclass(frozen=True)
class FiniteIndexedSet:
    size: int
    labels: tuple | None = None

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("size must be non-negative")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size:
                raise ValueError("one label per index is required")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be pairwise distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, i: int):
        return self.labels[i] if self.labels is not None else i

    def index(self, label) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)

    def __len__(self) -> int:
        return self.size


def _frozen(matrix: np.ndarray) -> np.ndarray:
    m = np.array(matrix, dtype=bool, copy=True)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Relation:
    carrier: FiniteIndexedSet
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if isinstance(self.carrier, int):
            object.__setattr__(self, "carrier", FiniteIndexedSet(self.carrier))
        n = self.carrier.size
        m = np.asarray(self.matrix, dtype=bool)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match carrier size {n}")
        if n > MAX_DENSE_SIZE:
            raise ValueError(f"carrier size {n} exceeds dense limit {MAX_DENSE_SIZE}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_pairs(cls, carrier: FiniteIndexedSet | int, pairs: Iterable[tuple[int, int]]) -> "Relation":
        if isinstance(carrier, int):
            carrier = FiniteIndexedSet(carrier)
        m = np.zeros((carrier.size, carrier.size), dtype=bool)
        for x, y in pairs:
            m[x, y] = True
        return cls(carrier, m)

    @classmethod
    def empty(cls, carrier: FiniteIndexedSet | int) -> "Relation":
        return cls.from_pairs(carrier, ())

    @classmethod
    def diagonal(cls, carrier: FiniteIndexedSet | int) -> "Relation":
        if isinstance(carrier, int):
            carrier = FiniteIndexedSet(carrier)
        return cls(carrier, np.eye(carrier.size, dtype=bool))

    @property
    def size(self) -> int:
        return self.carrier.size

    def pairs(self) -> list[tuple[int, int]]:
        xs, ys = np.nonzero(self.matrix)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool(self.matrix[x, y])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.carrier.size == other.carrier.size and bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self) -> int:
        return hash((self.carrier.size, self.matrix.tobytes()))

    def __le__(self, other: "Relation") -> bool:
        _same_carrier(self.carrier, other.carrier)
        return not bool(np.any(self.matrix & ~other.matrix))

    def union(self, other: "Relation") -> "Relation":
        _same_carrier(self.carrier, other.carrier)
        return Relation(self.carrier, self.matrix | other.matrix)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))

    def is_reflexive(self) -> bool:
        return bool(np.all(np.diagonal(self.matrix)))

    def is_antisymmetric(self) -> bool:
        both = self.matrix & self.matrix.T
        np.fill_diagonal(both, False)
        return not bool(both.any())

    def is_transitive(self) -> bool:
        m = self.matrix.astype(np.int32)
        return not bool(np.any(((m @ m) > 0) & ~self.matrix))


def _same_carrier(a: FiniteIndexedSet, b: FiniteIndexedSet) -> None:
    if a.size != b.size:
        raise CarrierMismatch(f"carrier sizes differ: {a.size} vs {b.size}")


@dataclass(frozen=True)
class NeighborhoodStructure:
    """Per-point list of basis neighbourhoods; each must contain its point."""

    carrier: FiniteIndexedSet
    basis: tuple

    def __post_init__(self) -> None:
        if len(self.basis) != self.carrier.size:
            raise ValueError("one basis list per point is required")
        normalised = []
        for p, sets in enumerate(self.basis):
            sets = tuple(frozenset(int(i) for i in s) for s in sets)
            if not sets:
                raise ValueError(f"basis of point {p} is empty")
            for s in sets:
                if p not in s:
                    raise ValueError(f"basis set {sorted(s)} of point {p} does not contain it")
                if any(i < 0 or i >= self.carrier.size for i in s):
                    raise ValueError(f"basis set of point {p} leaves the carrier")
            normalised.append(sets)
        object.__setattr__(self, "basis", tuple(normalised))

    @classmethod
    def discrete(cls, carrier: FiniteIndexedSet | int) -> "NeighborhoodStructure":
        if isinstance(carrier, int):
            carrier = FiniteIndexedSet(carrier)
        return cls(carrier, tuple(((p,),) for p in range(carrier.size)))

    @classmethod
    def indiscrete(cls, carrier: FiniteIndexedSet | int) -> "NeighborhoodStructure":
        if isinstance(carrier, int):
            carrier = FiniteIndexedSet(carrier)
        whole = tuple(range(carrier.size))
        return cls(carrier, tuple((whole,) for _ in range(carrier.size)))

    def generates_topology(self) -> bool:
        """Check the basis axiom: every basis set of p contains some basis set of each of its points."""
        for sets in self.basis:
            for s in sets:
                for q in s:
                    if not any(t <= s for t in self.basis[q]):
                        return False
        return True

    def minimal_neighborhoods(self) -> list[frozenset]:
        """Intersection of all basis sets at each point (the smallest one, when it exists)."""
        out = []
        for sets in self.basis:
            acc = set(sets[0])
            for s in sets[1:]:
                acc &= s
            out.append(frozenset(acc))
        return out


@dataclass(frozen=True)
class RelationMap:
    domain: FiniteIndexedSet
    codomain: FiniteIndexedSet
    assignment: tuple

    def __post_init__(self) -> None:
        a = tuple(int(i) for i in self.assignment)
        if len(a) != self.domain.size:
            raise ValueError("assignment must be total on the domain")
        if any(i < 0 or i >= self.codomain.size for i in a):
            raise ValueError("assignment leaves the codomain")
        object.__setattr__(self, "assignment", a)

    def __call__(self, i: int) -> int:
        return self.assignment[i]

    def image(self) -> frozenset:
        return frozenset(self.assignment)

    def is_injective(self) -> bool:
        return len(set(self.assignment)) == len(self.assignment)

    def then(self, other: "RelationMap") -> "RelationMap":
        """Composite ``other ∘ self``."""
        _same_carrier(self.codomain, other.domain)
        return RelationMap(self.domain, other.codomain, tuple(other.assignment[i] for i in self.assignment))

    @classmethod
    def identity(cls, carrier: FiniteIndexedSet) -> "RelationMap":
        return cls(carrier, carrier, tuple(range(carrier.size)))


def transpose(R: Relation) -> Relation:
    return Relation(R.carrier, R.matrix.T)


def symmetric_closure(R: Relation) -> Relation:
    return Relation(R.carrier, R.matrix | R.matrix.T)


def reflexive_transitive_closure(R: Relation) -> Relation:
    """Warshall's algorithm with whole-row boolean updates."""
    m = np.array(R.matrix, dtype=bool, copy=True)
    np.fill_diagonal(m, True)
    for k in range(m.shape[0]):
        col = m[:, k]
        if col.any():
            m[col] |= m[k]
    return Relation(R.carrier, m)


def _basis_incidence(N: NeighborhoodStructure) -> tuple[np.ndarray, np.ndarray]:
    owners, rows = [], []
    n = N.carrier.size
    for p, sets in enumerate(N.basis):
        for s in sets:
            row = np.zeros(n, dtype=bool)
            row[list(s)] = True
            rows.append(row)
            owners.append(p)
    if not rows:
        return np.zeros((0, n), dtype=bool), np.zeros(0, dtype=int)
    return np.array(rows), np.array(owners)


def topological_closure(R: Relation, N: NeighborhoodStructure) -> Relation:
    """Pairs (x, y) such that every basis set at x times every basis set at y meets R."""
    _same_carrier(R.carrier, N.carrier)
    n = R.size
    if n == 0:
        return R
    inc, owners = _basis_incidence(N)
    b = inc.astype(np.int32)
    # hits[i, j]: basis set i times basis set j meets R
    hits = ((b @ R.matrix.astype(np.int32)) @ b.T) > 0
    starts = _owner_starts(owners)
    per_target = np.logical_and.reduceat(hits, starts, axis=1)
    out = np.logical_and.reduceat(per_target, starts, axis=0)
    return Relation(R.carrier, out)


def _owner_starts(owners: np.ndarray) -> np.ndarray:
    # owners is sorted by construction and every point owns at least one set
    return np.flatnonzero(np.r_[True, owners[1:] != owners[:-1]])


def _check_map(f: RelationMap, R_X: Relation, R_Y: Relation) -> np.ndarray:
    _same_carrier(f.domain, R_X.carrier)
    _same_carrier(f.codomain, R_Y.carrier)
    a = np.asarray(f.assignment, dtype=int)
    return R_Y.matrix[np.ix_(a, a)] if a.size else np.zeros((0, 0), dtype=bool)


def preserves(f: RelationMap, R_X: Relation, R_Y: Relation) -> bool:
    pulled = _check_map(f, R_X, R_Y)
    return not bool(np.any(R_X.matrix & ~pulled))


def reflects(f: RelationMap, R_X: Relation, R_Y: Relation) -> bool:
    pulled = _check_map(f, R_X, R_Y)
    return not bool(np.any(pulled & ~R_X.matrix))


def reflection_witness(f: RelationMap, R_X: Relation, R_Y: Relation) -> tuple[int, int] | None:
    """Lowest-index pair (x, y) with (f x, f y) in R_Y but (x, y) not in R_X."""
    bad = np.argwhere(_check_map(f, R_X, R_Y) & ~R_X.matrix)
    return (int(bad[0][0]), int(bad[0][1])) if len(bad) else None


def preservation_witness(f: RelationMap, R_X: Relation, R_Y: Relation) -> tuple[int, int] | None:
    bad = np.argwhere(R_X.matrix & ~_check_map(f, R_X, R_Y))
    return (int(bad[0][0]), int(bad[0][1])) if len(bad) else None


def pullback(f: RelationMap, R_Y: Relation) -> Relation:
    """The largest relation on the domain that f preserves into R_Y."""
    return Relation(f.domain, _check_map(f, Relation.empty(f.domain), R_Y))


def relation_to_json(R: Relation, N: NeighborhoodStructure | None = None) -> dict:
    out: dict = {"carrier": R.size, "pairs": [list(p) for p in R.pairs()]}
    if R.carrier.labels is not None:
        out["labels"] = list(R.carrier.labels)
    if N is not None:
        out["basis"] = [[sorted(s) for s in sets] for sets in N.basis]
    return out


def relation_from_json(body: dict) -> tuple[Relation, NeighborhoodStructure | None]:
    labels = body.get("labels")
    carrier = FiniteIndexedSet(int(body["carrier"]), tuple(labels) if labels is not None else None)
    R = Relation.from_pairs(carrier, (tuple(p) for p in body.get("pairs", [])))
    N = None
    if "basis" in body:
        basis = body["basis"]
        # a flat list per point means a single basis set
        if basis and all(isinstance(x, int) for sets in basis for x in sets):
            basis = [[sets] for sets in basis]
        N = NeighborhoodStructure(carrier, tuple(tuple(tuple(s) for s in sets) for sets in basis))
    return R, N


def subsets_as_masks(subsets: Sequence[Iterable[int]], n: int) -> np.ndarray:
    out = np.zeros((len(subsets), n), dtype=bool)
    for i, s in enumerate(subsets):
        out[i, list(s)] = True
    return out
