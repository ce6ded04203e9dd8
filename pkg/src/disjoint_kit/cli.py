"""Command-line front end: ``disjoint-kit <command> FILE [options]``.

Model files are JSON objects ``{"kind": ..., "version": "1", "body": ...}``.
Every command prints a report (JSON by default, ``--format text`` for a
summary) and exits 0 iff the report has no failing check.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

from . import causal_models as cm
from . import chiral_models as xm
from .disjoint import (
    complement_conditions,
    is_overlap_monic,
    table_from_json,
    verify_disjointness_axioms,
)
from .fincat import category_from_json, validate_category
from .suites import check, run_manifest

FORMAT_VERSION = "1"
KINDS = ("relation", "category", "disjointness", "causal_patch", "chiral_patch", "bundle", "suite")


class ModelError(ValueError):
    """A model file that cannot be read; the message names the offending field."""


def load_model(path: str | Path, kinds: tuple[str, ...]) -> dict:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: top level must be an object")
    for key in ("kind", "version", "body"):
        if key not in doc:
            raise ModelError(f"{path}: missing field '{key}'")
    if doc["version"] != FORMAT_VERSION:
        raise ModelError(f"{path}: field 'version': unsupported version {doc['version']!r}")
    if doc["kind"] not in KINDS:
        raise ModelError(f"{path}: field 'kind': unknown kind {doc['kind']!r}")
    if doc["kind"] not in kinds:
        raise ModelError(f"{path}: field 'kind': expected one of {list(kinds)}, got {doc['kind']!r}")
    return doc


def _read(path: str | Path) -> str:
    """Read a file, falling back to the bundled data directory for bare names."""
    p = Path(path)
    if p.exists():
        return p.read_text()
    bundled = resources.files("disjoint_kit") / "data" / str(path)
    if bundled.is_file():
        return bundled.read_text()
    raise ModelError(f"{path}: no such file")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _report(command: str, checks: list[dict], extra: dict | None = None) -> dict:
    body = {"command": command, "status": "fail" if any(c["status"] == "fail" for c in checks) else "pass", "checks": checks}
    if extra:
        body.update(extra)
    return body


# categories with a table -------------------------------------------------------


def _category_and_table(doc: dict):
    body = doc["body"]
    try:
        C = category_from_json(body["category"])
    except KeyError as e:
        raise ModelError(f"field 'body.category': missing {e}") from None
    except ValueError as e:
        raise ModelError(f"field 'body.category': {e}") from None
    rep = validate_category(C)
    if not rep.ok:
        law, w = rep.entries[0]
        raise ModelError(f"field 'body.category': not a category ({law} at {list(w)})")
    try:
        T = table_from_json(C, body.get("pairs", []))
    except ValueError as e:
        raise ModelError(f"field 'body.pairs': {e}") from None
    return C, T


def cmd_verify_axioms(args) -> dict:
    C, T = _category_and_table(load_model(args.input, ("disjointness",)))
    ax = verify_disjointness_axioms(C, T)
    co = complement_conditions(C, T)
    checks = [
        check("axioms", sum(ax.checks.values()) or 1, [[law, *w] for law, w in ax.entries]),
        check("complement_agreement", 1, [] if ax.ok == co.ok else [["axioms", ax.ok, "complement", co.ok]]),
    ]
    return _report("verify-axioms", checks, {"complement_conditions_hold": co.ok})


def category_dot(C, highlight) -> str:
    hi = set(highlight)
    lines = ["digraph category {"]
    for o, name in enumerate(C.objects):
        lines.append(f'  o{o} [label="{name}"];')
    for m in range(C.n_morphisms):
        if C.is_identity(m):
            continue
        style = ", color=blue, penwidth=2" if m in hi else ""
        lines.append(f'  o{C.source[m]} -> o{C.target[m]} [label="{C.label(m)}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_overlap_monics(args) -> dict:
    C, T = _category_and_table(load_model(args.input, ("disjointness",)))
    ax = verify_disjointness_axioms(C, T, first_only=True)
    monics = [m for m in range(C.n_morphisms) if is_overlap_monic(C, T, m).ok]
    if args.dot:
        Path(args.dot).write_text(category_dot(C, monics))
    checks = [check("axioms", 1, [[law, *w] for law, w in ax.entries])]
    return _report("overlap-monics", checks, {"overlap_monics": monics, "labels": [C.label(m) for m in monics]})


# patches -----------------------------------------------------------------------


def _patches_and_morphisms(doc: dict):
    body = doc["body"]
    raw = body["patches"] if "patches" in body else [body]
    try:
        patches = [cm.LatticePatch.from_json(p) for p in raw]
    except (KeyError, ValueError, TypeError) as e:
        raise ModelError(f"field 'body.patches': {e}") from None
    gens = []
    for k, m in enumerate(body.get("morphisms", [])):
        try:
            s, t = int(m["source"]), int(m["target"])
            if "tables" in m:
                f = xm.morphism_from_tables(patches[s], patches[t], m["tables"])
            else:
                acts = [cm.ComponentAction(a.get("sign", 1), tuple(a["shift"])) for a in m["actions"]]
                f = cm.PatchMorphism(patches[s], patches[t], tuple(acts))
        except (KeyError, IndexError, ValueError, TypeError) as e:
            raise ModelError(f"field 'body.morphisms[{k}]': {e}") from None
        gens.append((s, t, f))
    return patches, gens


def _indices(patch: cm.LatticePatch, points) -> list[int]:
    out = []
    for p in points:
        i = patch.lookup(tuple(p))
        if i is None:
            raise ModelError(f"point {list(p)} is not in the patch")
        out.append(i)
    return out


def _parse_points(text: str):
    try:
        pts = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"--convex: {e.msg}") from None
    return [tuple(p) for p in pts]


def _pts(patch, idx) -> list:
    return [list(patch.points[i]) for i in sorted(idx)]


def cmd_causal(args) -> dict:
    patches, gens = _patches_and_morphisms(load_model(args.input, ("causal_patch",)))
    checks, extra = [], {}
    structures = [cm.causal_relation(p) for p in patches]
    if args.classify:
        extra["classification"] = [cm.classify_causal(cs).level for cs in structures]
    if args.convex is not None:
        U = _indices(patches[0], _parse_points(args.convex))
        w = cm.convexity_witness(structures[0], U)
        extra["convex"] = {"convex": w is None, "witness": None if w is None else list(patches[0].points[w])}
    if args.cauchy:
        extra["cauchy"] = [[_pts(p, S) for S in cm.cauchy_antichains(cs, limit=1)] for p, cs in zip(patches, structures)]
    if args.dot:
        hi = next(iter(cm.cauchy_antichains(structures[0], limit=1)), frozenset())
        Path(args.dot).write_text(cm.hasse_dot(structures[0], hi))
    if args.theorems:
        pc = cm.build_causal_category(patches, gens)
        res = {**cm.causal_theorem_suites(pc), **cm.hierarchy_checks(pc)}
        checks += [check(k, r.checked, r.failures, r.skipped) for k, r in res.items()]
        extra["closure_gap_pairs"] = [[[list(a), list(b)] for a, b in cm.closure_gap_pairs(cs)] for cs in structures]
        extra["category"] = {"objects": pc.category.n_objects, "morphisms": pc.category.n_morphisms}
    return _report("causal", checks, extra)


def cmd_chiral(args) -> dict:
    patches, gens = _patches_and_morphisms(load_model(args.input, ("chiral_patch", "causal_patch")))
    checks, extra = [], {}
    structures = [xm.chiral_relation(p) for p in patches]
    if args.classify:
        extra["classification"] = [xm.classify_chiral(cs).level for cs in structures]
        extra["classification_minus"] = [xm.classify_chiral(cs.dual()).level for cs in structures]
    if args.convex is not None:
        U = _indices(patches[0], _parse_points(args.convex))
        w = xm.chi_convexity_witness(structures[0], U)
        extra["convex"] = {"convex": w is None, "witness": None if w is None else list(patches[0].points[w])}
    if args.cauchy:
        extra["cauchy"] = [[_pts(p, S) for S in xm.chi_cauchy_sets(cs, limit=1)] for p, cs in zip(patches, structures)]
    if args.theorems:
        pc = xm.build_chiral_category(patches, gens)
        res = {**xm.chiral_theorem_suites(pc), **xm.chiral_hierarchy_checks(pc), **xm.quotient_suites(pc), **xm.orientation_reversal_checks(pc)}
        checks += [check(k, r.checked, r.failures, r.skipped) for k, r in res.items()]
        extra["category"] = {"objects": pc.category.n_objects, "morphisms": pc.category.n_morphisms}
    if args.quotient:
        try:
            bundles = [xm.quotient_object(cs).to_json() for cs in structures]
        except xm.NotChiInitial as e:
            raise ModelError(f"--quotient: {e}") from None
        Path(args.quotient).write_text(dump_json({"kind": "bundle", "version": FORMAT_VERSION, "body": {"bundles": bundles}}))
        extra["quotient"] = {"written": str(args.quotient), "chains": [len(b["chains"]) for b in bundles]}
    if args.fermion:
        data = json.loads(_read(args.fermion))
        init = data.get("body", data)
        S = [tuple(p) for p in init["points"]]
        try:
            field = xm.fermion_transport(structures[0], S, init["values"])
        except xm.NotCauchy as e:
            raise ModelError(f"--fermion: {e}") from None
        out = {"kind": "fermion_field", "version": FORMAT_VERSION, "body": {"field": field.to_json()}}
        if args.output:
            Path(args.output).write_text(dump_json(out))
        extra["fermion"] = out["body"]
    return _report("chiral", checks, extra)


# suite ---------------------------------------------------------------------------


def cmd_suite(args) -> dict:
    doc = load_model(args.manifest, ("suite",))
    members = doc["body"].get("members", [])
    for k, m in enumerate(members):
        if "suite" not in m:
            raise ModelError(f"field 'body.members[{k}].suite': missing")
    out = run_manifest(members)
    if args.output:
        Path(args.output).write_text(dump_json(out["report"]))
    if args.timing:
        Path(args.timing).write_text(dump_json(out["timing"]))
    return dict(out["report"], command="suite")


# output --------------------------------------------------------------------------


def _checks_of(report: dict) -> list[dict]:
    if "members" in report:
        return [dict(c, name=f"{m['name']}.{c['name']}") for m in report["members"] for c in m["checks"]]
    return report.get("checks", [])


def render_text(report: dict) -> str:
    lines = [f"{report.get('command', 'report')}: {report['status']}"]
    for c in _checks_of(report):
        line = f"  {c['status']:4}  {c['name']}  checked={c['checked']}"
        if c.get("skipped"):
            line += f" skipped={c['skipped']}"
        if c["witnesses"]:
            line += f"  witness={json.dumps(c['witnesses'][0])}"
        lines.append(line)
    for key in sorted(k for k in report if k not in ("command", "status", "checks", "members", "totals")):
        lines.append(f"  {key}: {json.dumps(report[key], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="disjoint-kit", description="Check disjointness relations and overlap-monic morphisms on finite models.")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-axioms", help="check the disjointness axioms and the complement conditions")
    p.add_argument("input")
    p.set_defaults(run=cmd_verify_axioms)

    p = sub.add_parser("overlap-monics", help="list overlap-monic morphisms")
    p.add_argument("input")
    p.add_argument("--dot", metavar="FILE", help="write the category as DOT with overlap-monics highlighted")
    p.set_defaults(run=cmd_overlap_monics)

    for name, fn in (("causal", cmd_causal), ("chiral", cmd_chiral)):
        p = sub.add_parser(name, help=f"{name} analyses of lattice patches")
        p.add_argument("input")
        p.add_argument("--classify", action="store_true")
        p.add_argument("--convex", metavar="POINTS", help='JSON point list, e.g. "[[0,0],[1,1]]", tested in the first patch')
        p.add_argument("--cauchy", action="store_true")
        p.add_argument("--theorems", action="store_true")
        if name == "causal":
            p.add_argument("--dot", metavar="FILE", help="Hasse diagram of the first patch with a Cauchy antichain highlighted")
        else:
            p.add_argument("--quotient", metavar="FILE", help="write the quotient bundles")
            p.add_argument("--fermion", metavar="DATA", help="initial data file with 'points' and 'values'")
            p.add_argument("--output", metavar="FILE", help="where to write the transported field")
        p.set_defaults(run=fn)

    p = sub.add_parser("suite", help="run a manifest of named suites")
    p.add_argument("manifest")
    p.add_argument("--output", metavar="FILE", help="write the deterministic report")
    p.add_argument("--timing", metavar="FILE", help="write wall-clock durations")
    p.set_defaults(run=cmd_suite)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report = args.run(args)
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = render_text(report) if args.format == "text" else dump_json(report)
    sys.stdout.write(text)
    print(f"elapsed {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0 if report["status"] == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
