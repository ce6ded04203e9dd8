"""Named, seeded verification suites and the manifest runner behind ``disjoint-kit suite``.

Every suite returns a list of check records ``{"name", "status", "checked",
"skipped", "witnesses"}``.  Records depend only on the parameters, so two runs
produce identical reports; wall-clock durations are kept apart.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import causal_models as cm
from . import chiral_models as xm
from .disjoint import (
    builtin_pi0,
    builtin_sbin,
    builtin_setwise,
    complement_conditions,
    is_overlap_monic,
    overlap_monics,
    verify_disjointness_axioms,
)
from .generators import (
    random_category,
    random_causal_category,
    random_chiral_category,
    random_pi0_instance,
    random_sbin_instance,
    random_setwise_instance,
    random_table,
    rng_for,
)

SUITES: dict[str, Callable] = {}


def suite(name: str):
    def register(fn):
        SUITES[name] = fn
        return fn

    return register


def check(name: str, checked: int, witnesses=(), skipped: int = 0) -> dict:
    witnesses = [list(map(_plain, w)) if isinstance(w, (tuple, list)) else _plain(w) for w in witnesses]
    return {
        "name": name,
        "status": "fail" if witnesses else "pass",
        "checked": int(checked),
        "skipped": int(skipped),
        "witnesses": witnesses[:20],
    }


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    return x


def _from_results(results: dict, prefix: str = "") -> list[dict]:
    return [check(prefix + k, r.checked, r.failures, r.skipped) for k, r in results.items()]


def _merge(records: list[dict]) -> list[dict]:
    """Sum records that share a name, keeping first-seen order."""
    out: dict[str, dict] = {}
    for r in records:
        if r["name"] not in out:
            out[r["name"]] = dict(r, witnesses=list(r["witnesses"]))
            continue
        m = out[r["name"]]
        m["checked"] += r["checked"]
        m["skipped"] += r["skipped"]
        m["witnesses"] = (m["witnesses"] + r["witnesses"])[:20]
        m["status"] = "fail" if m["witnesses"] else "pass"
    return list(out.values())


# abstract disjointness -----------------------------------------------------------


@suite("axiom_complement")
def axiom_complement(instances: int = 500, seed: int = 0, max_objects: int = 5, max_morphisms: int = 30) -> list[dict]:
    """The axioms and the complement conditions accept exactly the same tables."""
    rng = rng_for(seed)
    bad, valid = [], 0
    for k in range(instances):
        C, S = random_category(rng, max_objects, max_morphisms)
        M = random_table(rng, C, S)
        a = verify_disjointness_axioms(C, M, first_only=True).ok
        b = complement_conditions(C, M, first_only=True).ok
        valid += a
        if a != b:
            bad.append((k, a, b))
    return [check("agreement", instances, bad), check("valid_tables", valid, [] if 0 < valid < instances else [("degenerate sample", valid)])]


@suite("setwise")
def setwise(instances: int = 50, seed: int = 1) -> list[dict]:
    rng = rng_for(seed)
    bad, total = [], 0
    for k in range(instances):
        C, S = random_setwise_instance(rng)
        T = builtin_setwise(C, S)
        got = overlap_monics(C, T)
        want = [m for m in range(C.n_morphisms) if S.maps[m].is_injective()]
        total += C.n_morphisms
        if got != want:
            bad.append((k, sorted(set(got) ^ set(want))[:5]))
    return [check("overlap_monic_iff_injective", total, bad)]


def _reflects_relation(Rs: np.ndarray, Rt: np.ndarray, a) -> bool:
    a = np.asarray(a, dtype=int)
    return not np.any(Rt[np.ix_(a, a)] & ~Rs) if a.size else True


def _component_map_injective(cs: tuple, ct: tuple, a) -> bool:
    seen: dict = {}
    for x, y in enumerate(a):
        if seen.setdefault(ct[y], cs[x]) != cs[x]:
            return False
    return True


@suite("sbin_pi0")
def sbin_pi0(instances: int = 50, seed: int = 2) -> list[dict]:
    rng = rng_for(seed)
    bad_b, bad_p, nb, np_ = [], [], 0, 0
    for k in range(instances):
        C, S = random_sbin_instance(rng)
        T = builtin_sbin(C, S)
        for m in range(C.n_morphisms):
            rhs = _reflects_relation(S.relations[C.source[m]].matrix, S.relations[C.target[m]].matrix, S.maps[m].assignment)
            nb += 1
            if is_overlap_monic(C, T, m).ok != rhs:
                bad_b.append((k, m))
        C, S = random_pi0_instance(rng)
        T = builtin_pi0(C, S)
        for m in range(C.n_morphisms):
            rhs = _component_map_injective(S.components[C.source[m]], S.components[C.target[m]], S.maps[m].assignment)
            np_ += 1
            if is_overlap_monic(C, T, m).ok != rhs:
                bad_p.append((k, m))
    return [check("sbin_overlap_monic_iff_reflects", nb, bad_b), check("pi0_overlap_monic_iff_component_injective", np_, bad_p)]


# causal --------------------------------------------------------------------------


@suite("causal_theorems")
def causal_theorems(instances: int = 100, seed: int = 3, max_points: int = 36, max_morphisms: int = 150) -> list[dict]:
    rng = rng_for(seed)
    records = []
    for _ in range(instances):
        pc = random_causal_category(rng, max_points, max_morphisms)
        records += _from_results(cm.causal_theorem_suites(pc))
    return _merge(records)


@suite("punctured_fixture")
def punctured_fixture(size: int = 5) -> list[dict]:
    pc = cm.punctured_fixture(size)
    U, B = pc.structures[0], pc.structures[1]
    gaps = cm.closure_gap_pairs(U)
    want = ((0, -1), (0, 1))
    inc = next(m for m in range(pc.category.n_morphisms) if pc.category.source[m] == 0 and pc.category.target[m] == 1)
    f = pc.morphisms[inc]
    out = [
        check("closure_gap_pair", 1, [] if want in gaps else [("missing", list(want))]),
        check("gap_not_in_sJ", 1, [] if not U.sJ.matrix[U.patch.index[want[0]], U.patch.index[want[1]]] else [want]),
        check("inclusion_overlap_monic", 1, [] if is_overlap_monic(pc.category, pc.table, inc).ok else [inc]),
        check("inclusion_reflects_closure", 1, [] if cm.reflects_closure_sJ(f, U, B) else [inc]),
        check("inclusion_does_not_reflect_J", 1, [] if not cm.reflects_J_up_to_reversal(f, U, B) else [inc]),
    ]
    return out + _from_results(cm.causal_theorem_suites(pc), "suite_")


@suite("hierarchy")
def hierarchy(instances: int = 100, seed: int = 4) -> list[dict]:
    rng = rng_for(seed)
    records = []
    for k in range(instances):
        if k % 2 == 0:
            pc = random_causal_category(rng)
            records += _from_results(cm.hierarchy_checks(pc), "causal_")
        else:
            pc = random_chiral_category(rng)
            records += _from_results(xm.chiral_hierarchy_checks(pc), "chiral_")
    return _merge(records)


# chiral --------------------------------------------------------------------------


@suite("chiral_theorems")
def chiral_theorems(instances: int = 100, seed: int = 5, max_points: int = 36, max_morphisms: int = 150) -> list[dict]:
    rng = rng_for(seed)
    records = []
    for k in range(instances):
        pc = random_chiral_category(rng, max_points, max_morphisms, initial_only=k % 2 == 1)
        records += _from_results(xm.chiral_theorem_suites(pc))
        records += _from_results(xm.quotient_suites(pc))
    return _merge(records)


@suite("orientation_reversal")
def orientation_reversal(instances: int = 50, seed: int = 6) -> list[dict]:
    rng = rng_for(seed)
    records = []
    for _ in range(instances):
        records += _from_results(xm.orientation_reversal_checks(random_chiral_category(rng)))
    return _merge(records)


@suite("fermion")
def fermion(n: int = 5, column: int = 0) -> list[dict]:
    B = cm.block(n, n)
    cs = xm.chiral_relation(B)
    S = [(i, column) for i in range(n)]
    field = xm.fermion_transport(cs, S, {p: p[0] for p in S})
    bad = [list(p) for p in B.points if field.at(p) != p[0]]
    pc = xm.column_fixture(n)
    rep = xm.compose_with_Q(pc.category, pc.table, xm.quotient_data(pc), pc)
    cauchy = [m for m, f in enumerate(pc.morphisms) if xm.is_chi_cauchy_map(f, pc.structures[pc.category.target[m]])]
    inv_bad = [w for law, w in rep.entries if law == "cauchy_invertible"]
    return [
        check("transport_equals_initial_value", len(B), bad),
        check("cauchy_morphisms_invertible", len(cauchy), inv_bad),
        check("solution_space_other", sum(rep.checks.values()), [(law, *w) for law, w in rep.entries if law != "cauchy_invertible"]),
    ]


# runner --------------------------------------------------------------------------


def run_member(member: dict) -> tuple[dict, float]:
    name = member.get("name") or member["suite"]
    start = time.perf_counter()
    if member["suite"] not in SUITES:
        records = [check("unknown_suite", 0, [member["suite"]])]
    else:
        records = SUITES[member["suite"]](**member.get("params", {}))
    elapsed = time.perf_counter() - start
    status = "fail" if any(r["status"] == "fail" for r in records) else "pass"
    return {"name": name, "suite": member["suite"], "status": status, "checks": records}, elapsed


def worker_count() -> int:
    try:
        cap = int(os.environ.get("DISJOINT_KIT_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, cap)


def run_manifest(members: list[dict]) -> dict:
    """Run every member and return ``{"report": ..., "timing": ...}``; only ``report`` is deterministic."""
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        outcomes = list(pool.map(run_member, members))
    results = [o[0] for o in outcomes]
    report = {
        "status": "fail" if any(r["status"] == "fail" for r in results) else "pass",
        "members": results,
        "totals": {
            "members": len(results),
            "checks": sum(len(r["checks"]) for r in results),
            "instances_checked": sum(c["checked"] for r in results for c in r["checks"]),
            "failed_checks": sum(c["status"] == "fail" for r in results for c in r["checks"]),
        },
    }
    timing = {"members": {r["name"]: round(t, 3) for r, t in zip(results, (o[1] for o in outcomes))}, "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    return {"report": report, "timing": timing}
