"""Command-line front end.

Every verb prints a JSON report (or a DOT/text export with ``--out``) and
exits 0 when nothing was violated, 1 on a violation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import catalog, flows, limitbisim, limits, lts, maps, order
from .errors import PrefixLimError
from .family import (BUILTIN_NAMES, ChainFamily, FamilyKind, FiniteFamily, FiniteIndex, builtin_family,
                     steps_pass_both_validators, validate_family)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    text = text.strip()
    if not text:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid structured text: {exc}") from exc


def _resolve(ref: str, base: str | None) -> str:
    p = Path(ref)
    if not p.is_absolute() and base is not None:
        p = Path(base).parent / p
    return str(p)


def _load_order(path: str) -> order.PrefixOrder:
    return order.from_document(_read_json(path))


def _emit(report: dict, out=None) -> None:
    print(json.dumps(report, ensure_ascii=False, indent=2, default=str), file=out or sys.stdout)


def _export(o: order.PrefixOrder, fmt: str | None, node_name=None) -> None:
    if fmt == "dot" and node_name is not None:
        sys.stdout.write(order.to_dot(o, node_name=node_name))
    else:
        sys.stdout.write(order.export(o, fmt or "text"))


def _thread_name(key: tuple) -> str:
    # threads are determined by their value at the horizon
    start, _ = key[0]
    return f"{order.display(key[-1][1])}@{start}"


def _bounds(text: str | None) -> limitbisim.Bounds:
    if not text:
        return limitbisim.Bounds()
    try:
        a, b, n, d = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError("--bounds expects four integers a,b,N,D") from exc
    return limitbisim.Bounds(index=n, depth=d, stride=b, offset=a)


def _family(args) -> Any:
    if args.family is None:
        raise UsageError("--family is required")
    params: dict = {}
    if args.family in ("fan_strand", "fan_grow"):
        params["N"] = args.N
    elif args.family == "constant":
        if not args.order:
            raise UsageError("constant family needs --order PATH")
        params.update(order=_load_order(args.order), N=args.N)
    elif args.family == "dyadic_tower":
        params.update(K=args.N, flows=_load_flows(args.flows) if args.flows else None)
    return builtin_family(args.family, **params)


def _load_flows(path: str) -> flows.FlowSet:
    doc = _read_json(path)
    return flows.FlowSet(flows.Signal.from_document(d) for d in doc)


# -- verbs ----------------------------------------------------------------


def cmd_validate_order(args) -> int:
    o = _load_order(args.path)
    if args.out:
        _export(o, args.out)
    else:
        _emit({"result": "valid", "elements": len(o), "roots": len(o.roots())})
    return EXIT_OK


def cmd_validate_map(args) -> int:
    doc = _read_json(args.path) or {}
    src = args.source or (doc.get("source_ref") and _resolve(doc["source_ref"], args.path))
    tgt = args.target or (doc.get("target_ref") and _resolve(doc["target_ref"], args.path))
    if not src or not tgt:
        raise UsageError("source and target orders are required (--source/--target or refs in the document)")
    source, target = _load_order(src), _load_order(tgt)
    graph = maps.graph_from_document(doc)
    direct = maps.direct_violation(source, target, graph)
    thm = maps.theorem1_violation(source, target, graph)
    report = {
        "result": "valid" if direct is None else "violation",
        "direct": direct.to_report() if direct else "valid",
        "order_preserving_backward_simulation": thm.to_report() if thm else "valid",
        "validators_agree": (direct is None) == (thm is None),
    }
    if direct is None:
        f = maps.PhpMap(source, target, graph, check=False)
        report.update(total=f.is_total(), preserves_labels=f.preserves_labels())
    _emit(report)
    return EXIT_OK if direct is None and thm is None else EXIT_VIOLATION


def _family_from_document(path: str) -> Any:
    doc = _read_json(path) or {}
    index = doc.get("index", {})
    kind = FamilyKind(doc.get("kind", "explicit"))
    objects = [_load_order(_resolve(r, path)) for r in doc.get("objects", [])]
    if index.get("kind", "nat-chain") == "nat-chain":
        steps = []
        for n, ref in enumerate(doc.get("steps", [])):
            mdoc = _read_json(_resolve(ref, path))
            steps.append(maps.PhpMap(objects[n + 1], objects[n], maps.graph_from_document(mdoc), check=False))
        horizon = index.get("horizon", len(objects) - 1)
        return ChainFamily(objects[:horizon + 1], steps[:horizon], kind=kind, stable_from=doc.get("stable_from"))
    idx = FiniteIndex([order.decode_id(e) for e in index["elements"]],
                      [(order.decode_id(a), order.decode_id(b)) for a, b in index.get("relation", [])])
    objs = dict(zip(idx.elements, objects)) if isinstance(doc.get("objects"), list) else {}
    stored = {}
    for rec in doc.get("maps", []):
        i, j = order.decode_id(rec["i"]), order.decode_id(rec["j"])
        mdoc = _read_json(_resolve(rec["ref"], path))
        stored[(i, j)] = maps.PhpMap(objs[j], objs[i], maps.graph_from_document(mdoc), check=False)
    return FiniteFamily(idx, objs, stored, kind=kind)


def cmd_validate_family(args) -> int:
    fam = _family_from_document(args.path) if args.path else _family(args)
    validate_family(fam)
    _emit({"result": "valid", "kind": str(fam.kind), "indices": len(fam.indices)})
    return EXIT_OK


def cmd_limit(args) -> int:
    fam = _family(args)
    threads = limits.enumerate_threads(fam, args.horizon)
    if args.out:
        _export(threads.order, args.out, _thread_name)
        return EXIT_OK
    report = {
        "result": "valid",
        "family": args.family,
        "horizon": threads.horizon,
        "threads": len(threads),
        "certainty": sorted({t.certainty for t in threads.threads.values()}),
        "projection_violations": len(limits.projection_violations(threads)),
        "naturality_violations": len(limits.naturality_violations(threads)),
    }
    if fam.kind in (FamilyKind.INCREASING_PARTIAL_IDENTITY, FamilyKind.EXPLICIT_STABLE):
        report["isomorphic_to_exact_limit"] = order.is_isomorphic(threads.order, limits.exact_chain_limit(fam))
    _emit(report)
    bad = report["projection_violations"] or report["naturality_violations"]
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_universal(args) -> int:
    """Partial-identity cone from the exact limit for inclusion chains, the projection cone otherwise."""
    fam = _family(args)
    horizon = args.horizon if args.horizon is not None else fam.top
    idx = [i for i in fam.indices if fam.leq(i, horizon)]
    if fam.kind is FamilyKind.INCREASING_PARTIAL_IDENTITY:
        source = limits.exact_chain_limit(fam.truncate(horizon))
        cone = {i: maps.PhpMap(source, fam.obj(i), {u: u for u in source.elements if u in fam.obj(i)}) for i in idx}
    else:
        threads = limits.enumerate_threads(fam, horizon)
        source = threads.order
        cone = {i: limits.projection(threads, i) for i in idx}
    rep = limits.check_universal_property(fam, source, cone, horizon)
    _emit({"result": "valid", "mediating_defined": len(rep.mediating.graph), "source": len(source),
           "uniqueness": rep.uniqueness, "mediating_maps_found": rep.candidates})
    return EXIT_OK


def cmd_unfold(args) -> int:
    system = lts.Lts.from_document(_read_json(args.path))
    runs = lts.unfold(system, args.depth)
    if args.out:
        _export(runs.order, args.out)
    else:
        _emit({"result": "valid", "runs": len(runs.order), "depth": args.depth,
               "lambda_injective": runs.lam.is_injective(), "deterministic": system.deterministic})
    return EXIT_OK


def cmd_bisim(args) -> int:
    p = lts.Lts.from_document(_read_json(args.left))
    q = lts.Lts.from_document(_read_json(args.right))
    res = lts.bisimilar(p, q)
    _emit({"bisimilar": res.bisimilar, "distinguishing_level": res.level,
           "relation_size": len(res.relation)})
    return EXIT_OK


WITNESSES = {
    "fan-omega": lambda b: catalog.fan_omega_witness(b.index, b.depth),
    "fan-naive": lambda b: catalog.naive_fan_witness(b.index),
    "delayed-choice": lambda b: catalog.delayed_choice_witness(),
    "choice-constant": lambda b: catalog.choice_witness(),
}


def cmd_limit_bisim(args) -> int:
    b = _bounds(args.bounds)
    witness = WITNESSES[args.witness](b)
    rep = limitbisim.check_limit_bisim_witness(witness, b, reading=args.reading)
    _emit(rep.to_report())
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_flows_tower(args) -> int:
    fs = _load_flows(args.flows) if args.flows else flows.standard_flowset()
    tower = flows.dyadic_tower(fs, args.K, mode=args.mode)
    validate_family(tower)
    bad = [{"step": n, "validator": v} for n, v in steps_pass_both_validators(tower)]
    sizes = [len(tower.obj(n)) for n in tower.indices]
    _emit({"result": "valid" if not bad else "violation", "mode": args.mode, "levels": args.K,
           "object_sizes": sizes, "failing_steps": bad})
    return EXIT_OK if not bad else EXIT_VIOLATION


def cmd_flows_roundtrip(args) -> int:
    fs = _load_flows(args.flows) if args.flows else flows.standard_flowset()
    tower = flows.dyadic_tower(fs, args.K, mode=args.mode)
    rows, ok = [], True
    for f in fs:
        thread = flows.thread_of_flow(f, tower)
        mism = 0
        for d in range(min(args.depth, args.K) + 1):
            rec = flows.reconstruct(thread, d)
            mism += sum(1 for t, v in rec.samples.items() if f(t) != v)
        rec = flows.reconstruct(thread, min(args.depth, args.K))
        rows.append({"flow": f.name, "mismatches": mism, "domain_end": str(rec.domain_end),
                     "points": len(rec.samples)})
        ok = ok and mism == 0
    _emit({"result": "valid" if ok else "violation", "mode": args.mode, "flows": rows})
    return EXIT_OK if ok else EXIT_VIOLATION


# -- demos ----------------------------------------------------------------


def demo_fan_two_limits(args) -> dict:
    n = args.N if args.N is not None else 6
    out: dict = {"N": n}
    ok = True
    for name, expected in (("fan_strand", catalog.fan_strand_order), ("fan_grow", catalog.fan_grow_order)):
        fam = builtin_family(name, N=n)
        threads = limits.enumerate_threads(fam)
        exact = limits.exact_chain_limit(fam)
        strand0 = [sum(1 for u in fam.obj(h).elements if isinstance(u, tuple) and u[0] == 0) for h in fam.indices]
        row = {
            "threads": len(threads),
            "threads_match_exact_limit": order.is_isomorphic(threads.order, exact),
            "exact_limit_matches_closed_form": order.is_isomorphic(exact, expected(n)),
            "strand_0_length_by_index": strand0,
        }
        ok = ok and row["threads_match_exact_limit"] and row["exact_limit_matches_closed_form"]
        out[name] = row
    out["objects_isomorphic_as_orders"] = all(
        order.is_isomorphic(catalog.fan_strand_order(i), catalog.fan_grow_order(i)) for i in range(n + 1))
    out["result"] = "pass" if ok and out["objects_isomorphic_as_orders"] else "violation"
    return out


def demo_constant_identity(args) -> dict:
    u = catalog.choice_order()
    fam = builtin_family("constant", order=u, N=args.N if args.N is not None else 5)
    threads = limits.enumerate_threads(fam)
    iso = order.is_isomorphic(threads.order, u, use_labels=True)
    certainty = sorted({t.certainty for t in threads.threads.values()})
    return {"threads": len(threads), "isomorphic_to_object": iso, "certainty": certainty,
            "result": "pass" if iso and certainty == [limits.EXACT] else "violation"}


def demo_delayed_choice(args) -> dict:
    src, tgt = catalog.delayed_choice_order(), catalog.choice_order()
    labelled = sum(1 for _ in maps.enumerate_php_maps(src, tgt, preserve_labels=True, required=catalog.DAGGER))
    unlabelled = [f for f in maps.enumerate_php_maps(src, tgt, required=catalog.DAGGER)]
    collapse = [f for f in unlabelled if f("ab_dag") == f("ac_dag")]
    example = maps.to_document(collapse[0]) if collapse else None
    ok = labelled == 0 and len(unlabelled) >= 1
    return {"label_preserving_maps_defined_on_dagger": labelled,
            "maps_defined_on_dagger_ignoring_labels": len(unlabelled),
            "example_collapse": example, "result": "pass" if ok else "violation"}


def demo_fan_witness(args) -> dict:
    b = _bounds(args.bounds) if args.bounds else limitbisim.Bounds(32, 6, 4)
    good = limitbisim.check_limit_bisim_witness(catalog.fan_omega_witness(b.index, b.depth), b)
    naive = limitbisim.check_limit_bisim_witness(catalog.naive_fan_witness(b.index), b)
    ok = good.passed and not naive.passed and naive.violation.clause == 3
    return {"fan_with_omega_strand": good.to_report(), "fan_naive_relation": naive.to_report(),
            "result": "pass" if ok else "violation"}


def demo_delayed_witness(args) -> dict:
    b = _bounds(args.bounds) if args.bounds else limitbisim.Bounds(32, 6, 4)
    witness = catalog.delayed_choice_witness()
    literal = limitbisim.check_limit_bisim_witness(witness, b, reading="literal")
    subnet = limitbisim.check_limit_bisim_witness(witness, b, reading="subnet")
    bis = lts.bisimilar(catalog.choice_lts(), catalog.delayed_choice_lts())
    return {"literal": literal.to_report(), "subnet": subnet.to_report(),
            "systems_bisimilar": bis.bisimilar, "distinguishing_level": bis.level,
            "result": "pass" if literal.passed else "violation"}


def demo_inclusion(args) -> dict:
    reports = [flows.inclusion_demo(k, k + 1, 8, seed=args.seed).to_report() for k in (1, 2, 3)]
    ok = all(r["result"] == "pass" for r in reports)
    return {"levels": reports, "result": "pass" if ok else "violation"}


DEMOS = {
    "fan-two-limits": demo_fan_two_limits,
    "constant-identity": demo_constant_identity,
    "delayed-choice-impossible": demo_delayed_choice,
    "ying-witness-1": demo_fan_witness,
    "ying-witness-2": demo_delayed_witness,
    "inclusion-closure": demo_inclusion,
}


def cmd_demo(args) -> int:
    report = DEMOS[args.name](args)
    _emit({"demo": args.name, **report})
    return EXIT_OK if report["result"] == "pass" else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prefixlim", description="Prefix orders, history preserving maps and their limits.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, family=False):
        sp.add_argument("--out", choices=["dot", "text"])
        sp.add_argument("--seed", type=int, default=0)
        if family:
            sp.add_argument("--family", choices=BUILTIN_NAMES)
            sp.add_argument("--N", type=int, default=4)
            sp.add_argument("--horizon", type=int)
            sp.add_argument("--order", help="order document for the constant family")
            sp.add_argument("--flows", help="signal list for the dyadic tower")

    sp = sub.add_parser("validate-order", help="validate an order document")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(func=cmd_validate_order)

    sp = sub.add_parser("validate-map", help="validate a map document with both characterisations")
    sp.add_argument("path")
    sp.add_argument("--source")
    sp.add_argument("--target")
    common(sp)
    sp.set_defaults(func=cmd_validate_map)

    sp = sub.add_parser("validate-family", help="validate a family document or builtin family")
    sp.add_argument("path", nargs="?")
    common(sp, family=True)
    sp.set_defaults(func=cmd_validate_family)

    for verb, func, hlp in (("limit", cmd_limit, "enumerate the threads of a builtin family"),
                            ("universal", cmd_universal, "check the universal property on the canonical cone")):
        sp = sub.add_parser(verb, help=hlp)
        common(sp, family=True)
        sp.set_defaults(func=func)

    sp = sub.add_parser("unfold", help="unfold an LTS document into its run order")
    sp.add_argument("path")
    sp.add_argument("--depth", type=int, default=3)
    common(sp)
    sp.set_defaults(func=cmd_unfold)

    sp = sub.add_parser("bisim", help="decide bisimilarity of two LTS documents")
    sp.add_argument("left")
    sp.add_argument("right")
    common(sp)
    sp.set_defaults(func=cmd_bisim)

    sp = sub.add_parser("limit-bisim", help="bounded check of a named witness relation")
    sp.add_argument("witness", choices=sorted(WITNESSES))
    sp.add_argument("--bounds", help="a,b,N,D: offset bound, step bound, index bound, depth")
    sp.add_argument("--reading", choices=["literal", "subnet"], default="literal")
    common(sp)
    sp.set_defaults(func=cmd_limit_bisim)

    for verb, func, hlp in (("flows-tower", cmd_flows_tower, "validate every refine step of the dyadic tower"),
                            ("flows-roundtrip", cmd_flows_roundtrip, "reconstruct each flow from its thread")):
        sp = sub.add_parser(verb, help=hlp)
        sp.add_argument("--K", type=int, default=6)
        sp.add_argument("--depth", type=int, default=6)
        sp.add_argument("--mode", choices=["recursion", "subsample"], default="recursion")
        sp.add_argument("--flows", help="JSON list of signal documents (default: 1, t, t^2 on [0,1])")
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("demo", help="run a named reproduction")
    sp.add_argument("name", choices=sorted(DEMOS))
    sp.add_argument("--N", type=int)
    sp.add_argument("--bounds")
    common(sp)
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit({"error": "usage", "message": str(exc)}, sys.stderr)
        return EXIT_USAGE
    except PrefixLimError as exc:
        _emit({"result": "violation", **exc.to_report()})
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
