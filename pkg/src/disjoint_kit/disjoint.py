"""Disjointness relations on finite categories and their overlap-monic morphisms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fincat import (
    UNDEFINED,
    ConcreteStructure,
    FiniteCategory,
    Functor,
    ValidationReport,
    inverse_of,
    wide_restriction,
)


def conterminous_mask(C: FiniteCategory) -> np.ndarray:
    t = C.tgt_array()
    return t[:, None] == t[None, :]


@dataclass(frozen=True, eq=False)
class DisjointnessTable:
    """Unordered conterminous pairs ``{f1, f2}``, stored as a symmetric boolean matrix."""

    category: FiniteCategory
    matrix: np.ndarray

    def __post_init__(self) -> None:
        n = self.category.n_morphisms
        m = np.asarray(self.matrix, dtype=bool)
        if m.shape != (n, n):
            raise ValueError("table shape does not match the morphism count")
        m = m | m.T
        bad = np.argwhere(m & ~conterminous_mask(self.category))
        if len(bad):
            f1, f2 = bad[0]
            raise ValueError(f"pair ({f1}, {f2}) is not conterminous")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pairs(cls, C: FiniteCategory, pairs: Iterable[tuple[int, int]]) -> "DisjointnessTable":
        m = np.zeros((C.n_morphisms, C.n_morphisms), dtype=bool)
        for a, b in pairs:
            m[a, b] = m[b, a] = True
        return cls(C, m)

    @classmethod
    def empty(cls, C: FiniteCategory) -> "DisjointnessTable":
        return cls.from_pairs(C, ())

    @classmethod
    def total(cls, C: FiniteCategory) -> "DisjointnessTable":
        return cls(C, conterminous_mask(C))

    def related(self, f1: int, f2: int) -> bool:
        return bool(self.matrix[f1, f2])

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in np.argwhere(np.triu(self.matrix))]

    def __len__(self) -> int:
        return int(np.triu(self.matrix).sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DisjointnessTable):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(np.array_equal(self.matrix, other.matrix))

    __hash__ = None  # type: ignore[assignment]


def _as_matrix(C: FiniteCategory, T) -> np.ndarray:
    if isinstance(T, DisjointnessTable):
        return T.matrix
    m = np.asarray(T, dtype=bool)
    if m.shape != (C.n_morphisms, C.n_morphisms):
        raise ValueError("relation shape does not match the morphism count")
    return m


def _iso_inverses(C: FiniteCategory) -> dict[int, int]:
    out = {}
    for m in range(C.n_morphisms):
        g = inverse_of(C, m)
        if g is not None:
            out[m] = g
    return out


def verify_disjointness_axioms(C: FiniteCategory, T, first_only: bool = False) -> ValidationReport:
    """Check symmetry, stability under pre-composition and under post-composition by isomorphisms.

    ``T`` may be a :class:`DisjointnessTable` (symmetry is then structural and
    only counted) or an ordered boolean matrix on morphism pairs.
    """
    report = ValidationReport()
    M = _as_matrix(C, T)
    comp = C.comp

    off = np.argwhere(M & ~conterminous_mask(C))
    for f1, f2 in off:
        report.add("conterminous", f1, f2)
    if len(off):
        return report

    if isinstance(T, DisjointnessTable):
        report.count("symmetry_structural")
    else:
        for f1, f2 in np.argwhere(M & ~M.T):
            report.add("symmetry", f1, f2)
            if first_only:
                return report
        report.count("symmetry", int(M.sum()))

    for f1, f2 in np.argwhere(M):
        g1s = C.into(C.source[f1])
        g2s = C.into(C.source[f2])
        sub = M[np.ix_(comp[f1, g1s], comp[f2, g2s])]
        report.count("precomposition", int(sub.size))
        if not sub.all():
            i, j = np.argwhere(~sub)[0]
            report.add("precomposition", f1, f2, g1s[i], g2s[j])
            if first_only:
                return report

    isos = _iso_inverses(C)
    for f1, f2 in np.argwhere(M):
        for h in sorted(isos):
            if C.source[h] != C.target[f1]:
                continue
            report.count("iso_postcomposition")
            if not M[comp[h, f1], comp[h, f2]]:
                report.add("iso_postcomposition", f1, f2, h)
                if first_only:
                    return report
    return report


def complement_conditions(C: FiniteCategory, T, first_only: bool = False) -> ValidationReport:
    """Check the complement relation for symmetry, pre-cancellation and iso post-composition stability."""
    report = ValidationReport()
    cont = conterminous_mask(C)
    N = cont & ~_as_matrix(C, T)
    comp = C.comp

    for f1, f2 in np.argwhere(N & ~N.T):
        report.add("complement_symmetry", f1, f2)
        if first_only:
            return report

    # pre-cancellation: N[f1 g1, f2 g2] implies N[f1, f2]
    for f1, f2 in np.argwhere(cont & ~N):
        g1s = C.into(C.source[f1])
        g2s = C.into(C.source[f2])
        sub = N[np.ix_(comp[f1, g1s], comp[f2, g2s])]
        report.count("complement_precancellation", int(sub.size))
        if sub.any():
            i, j = np.argwhere(sub)[0]
            report.add("complement_precancellation", f1, f2, g1s[i], g2s[j])
            if first_only:
                return report

    isos = _iso_inverses(C)
    for f1, f2 in np.argwhere(N):
        for h in sorted(isos):
            if C.source[h] != C.target[f1]:
                continue
            report.count("complement_iso_postcomposition")
            if not N[comp[h, f1], comp[h, f2]]:
                report.add("complement_iso_postcomposition", f1, f2, h)
                if first_only:
                    return report
    return report


def is_disjointness_relation(C: FiniteCategory, T) -> bool:
    return verify_disjointness_axioms(C, T, first_only=True).ok


def verify_complement_characterisation(C: FiniteCategory, T) -> bool:
    """True iff the axioms for T and the complement conditions hold or fail together."""
    return verify_disjointness_axioms(C, T, first_only=True).ok == complement_conditions(C, T, first_only=True).ok


def is_orthogonal(C: FiniteCategory, T) -> ValidationReport:
    """Stability of a relation under post-composition by every morphism."""
    report = ValidationReport()
    M = _as_matrix(C, T)
    comp = C.comp
    for f1, f2 in np.argwhere(np.triu(M)):
        hs = C.out_of(C.target[f1])
        report.count("postcomposition", int(hs.size))
        ok = M[comp[hs, f1], comp[hs, f2]]
        if not ok.all():
            report.add("postcomposition", f1, f2, hs[np.flatnonzero(~ok)[0]])
    return report


def pullback_relation(F: Functor, T_D: DisjointnessTable) -> DisjointnessTable:
    """Pairs whose images under F are related in T_D."""
    if T_D.category is not F.target and T_D.matrix.shape[0] != F.target.n_morphisms:
        raise ValueError("table does not live on the functor's target")
    fm = np.array(F.morphism_map, dtype=np.int64)
    C = F.source
    if fm.size == 0:
        return DisjointnessTable.empty(C)
    return DisjointnessTable(C, conterminous_mask(C) & T_D.matrix[np.ix_(fm, fm)])


@dataclass(frozen=True)
class MonicCheck:
    ok: bool
    witness: tuple | None
    pairs_checked: int

    def __bool__(self) -> bool:
        return self.ok


def is_overlap_monic(C: FiniteCategory, T, h: int) -> MonicCheck:
    """Does ``f1 ⋈ f2`` imply ``h∘f1 ⋈ h∘f2`` for all pairs into the source of h?"""
    M = _as_matrix(C, T)
    fs = C.into(C.source[h])
    if fs.size == 0:
        return MonicCheck(True, None, 0)
    before = M[np.ix_(fs, fs)]
    hf = C.comp[h, fs]
    after = M[np.ix_(hf, hf)]
    bad = np.argwhere(before & ~after)
    checked = int(before.sum())
    if len(bad):
        i, j = bad[0]
        return MonicCheck(False, (int(fs[i]), int(fs[j])), checked)
    return MonicCheck(True, None, checked)


def overlap_monics(C: FiniteCategory, T) -> list[int]:
    return [h for h in range(C.n_morphisms) if is_overlap_monic(C, T, h).ok]


@dataclass(frozen=True)
class OrthogonalCategory:
    """Wide subcategory of overlap-monics with the restricted relation and a per-morphism certificate."""

    category: FiniteCategory
    relation: DisjointnessTable
    inclusion: Functor
    certificate: tuple = field(default=())

    def morphisms_in_parent(self) -> tuple:
        return self.inclusion.morphism_map

    def certificate_json(self) -> list[dict]:
        return [dict(c) for c in self.certificate]


def overlap_monic_subcategory(C: FiniteCategory, T) -> OrthogonalCategory:
    if not verify_disjointness_axioms(C, T, first_only=True).ok:
        raise ValueError("table does not satisfy the disjointness axioms")
    M = _as_matrix(C, T)
    checks = [is_overlap_monic(C, M, h) for h in range(C.n_morphisms)]
    keep = [h for h, c in enumerate(checks) if c.ok]
    sub, inc = wide_restriction(C, keep)
    fm = np.array(inc.morphism_map, dtype=np.int64)
    rel = DisjointnessTable(sub, M[np.ix_(fm, fm)])
    cert = tuple({"morphism": int(h), "pairs_checked": checks[h].pairs_checked} for h in keep)
    return OrthogonalCategory(sub, rel, inc, cert)


def _functor_check(F: Functor, T_C, T_D, direction: str) -> tuple[int, int] | None:
    C = F.source
    MC = _as_matrix(C, T_C)
    MD = _as_matrix(F.target, T_D)
    fm = np.array(F.morphism_map, dtype=np.int64)
    if fm.size == 0:
        return None
    pulled = MD[np.ix_(fm, fm)] & conterminous_mask(C)
    bad = np.argwhere(MC & ~pulled) if direction == "preserve" else np.argwhere(pulled & ~MC)
    return (int(bad[0][0]), int(bad[0][1])) if len(bad) else None


def functor_preserves_disjointness(F: Functor, T_C, T_D) -> bool:
    return _functor_check(F, T_C, T_D, "preserve") is None


def functor_reflects_disjointness(F: Functor, T_C, T_D) -> bool:
    return _functor_check(F, T_C, T_D, "reflect") is None


def preservation_failure(F: Functor, T_C, T_D):
    return _functor_check(F, T_C, T_D, "preserve")


def reflection_failure(F: Functor, T_C, T_D):
    return _functor_check(F, T_C, T_D, "reflect")


def _images(S: ConcreteStructure) -> list[frozenset]:
    return [m.image() for m in S.maps]


def builtin_setwise(C: FiniteCategory, S: ConcreteStructure) -> DisjointnessTable:
    """Related iff the images are disjoint."""
    imgs = _images(S)
    cont = conterminous_mask(C)
    m = np.zeros_like(cont)
    for f1, f2 in np.argwhere(np.triu(cont)):
        m[f1, f2] = not (imgs[f1] & imgs[f2])
    return DisjointnessTable(C, m)


def builtin_sbin(C: FiniteCategory, S: ConcreteStructure) -> DisjointnessTable:
    """Related iff no pair of the target relation runs between the two images."""
    if S.relations is None:
        raise ValueError("concrete structure carries no object relations")
    cont = conterminous_mask(C)
    m = np.zeros_like(cont)
    for f1, f2 in np.argwhere(np.triu(cont)):
        R = S.relations[C.target[f1]].matrix
        a1 = list(S.maps[f1].image())
        a2 = list(S.maps[f2].image())
        m[f1, f2] = not (a1 and a2 and R[np.ix_(a1, a2)].any())
    return DisjointnessTable(C, m)


def builtin_partition(C: FiniteCategory, S: ConcreteStructure, labelling: Sequence[Sequence[int]]) -> DisjointnessTable:
    """Related iff the images share no block of the given per-object partition."""
    cont = conterminous_mask(C)
    m = np.zeros_like(cont)
    blocks = []
    for f, mp in enumerate(S.maps):
        lab = labelling[C.target[f]]
        blocks.append({lab[y] for y in mp.image()})
    for f1, f2 in np.argwhere(np.triu(cont)):
        m[f1, f2] = not (blocks[f1] & blocks[f2])
    return DisjointnessTable(C, m)


def builtin_pi0(C: FiniteCategory, S: ConcreteStructure) -> DisjointnessTable:
    """Related iff the images meet no common component."""
    if S.components is None:
        raise ValueError("concrete structure carries no component labelling")
    return builtin_partition(C, S, S.components)


def pullback_extremality_experiment(F: Functor, T_D: DisjointnessTable, candidates: Sequence[DisjointnessTable]) -> dict:
    """Compare candidate relations on the source with the pullback relation.

    For every candidate that satisfies the axioms, records whether F preserves
    (resp. reflects) it and whether it sits below (resp. above) the pullback.
    Nothing here is asserted; the counts are reported as found.
    """
    pb = pullback_relation(F, T_D).matrix
    out = {"candidates": 0, "valid": 0, "preserving": 0, "preserving_below_pullback": 0, "reflecting": 0, "reflecting_above_pullback": 0}
    for T in candidates:
        out["candidates"] += 1
        if not is_disjointness_relation(F.source, T):
            continue
        out["valid"] += 1
        if functor_preserves_disjointness(F, T, T_D):
            out["preserving"] += 1
            out["preserving_below_pullback"] += int(not np.any(T.matrix & ~pb))
        if functor_reflects_disjointness(F, T, T_D):
            out["reflecting"] += 1
            out["reflecting_above_pullback"] += int(not np.any(pb & ~T.matrix))
    return out


def closure_of_pairs(C: FiniteCategory, seeds: Iterable[tuple[int, int]]) -> DisjointnessTable:
    """Smallest relation containing the seeds that satisfies the disjointness axioms."""
    M = np.zeros((C.n_morphisms, C.n_morphisms), dtype=bool)
    for a, b in seeds:
        if C.target[a] != C.target[b]:
            raise ValueError(f"seed ({a}, {b}) is not conterminous")
        M[a, b] = M[b, a] = True
    isos = _iso_inverses(C)
    comp = C.comp
    changed = True
    while changed:
        before = int(M.sum())
        for f1, f2 in np.argwhere(M):
            g1s = C.into(C.source[f1])
            g2s = C.into(C.source[f2])
            M[np.ix_(comp[f1, g1s], comp[f2, g2s])] = True
            for h in isos:
                if C.source[h] == C.target[f1]:
                    M[comp[h, f1], comp[h, f2]] = True
        M |= M.T
        changed = int(M.sum()) != before
    return DisjointnessTable(C, M)


def table_to_json(T: DisjointnessTable) -> list[list[int]]:
    return [list(p) for p in T.pairs()]


def table_from_json(C: FiniteCategory, pairs: Sequence[Sequence[int]]) -> DisjointnessTable:
    return DisjointnessTable.from_pairs(C, ((int(a), int(b)) for a, b in pairs))


__all__ = [
    "UNDEFINED",
    "DisjointnessTable",
    "MonicCheck",
    "OrthogonalCategory",
    "builtin_partition",
    "builtin_pi0",
    "builtin_sbin",
    "builtin_setwise",
    "closure_of_pairs",
    "complement_conditions",
    "conterminous_mask",
    "functor_preserves_disjointness",
    "functor_reflects_disjointness",
    "is_disjointness_relation",
    "is_orthogonal",
    "is_overlap_monic",
    "overlap_monic_subcategory",
    "overlap_monics",
    "pullback_extremality_experiment",
    "pullback_relation",
    "verify_complement_characterisation",
    "verify_disjointness_axioms",
]
