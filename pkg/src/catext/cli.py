"""Command-line driver: ``catext <command> [file] [options]``.

Exit codes: 0 pass/yes, 1 fail/no, 2 indeterminate, 3 error.
"""
from __future__ import annotations

import argparse
import random
import sys

from . import algebras as Al
from . import formats as F
from . import graphs as G
from .collections import CatextError, Profile
from .operads import check_map_laws, check_operad_laws, composite_count, positive_map

EXIT = {"pass": 0, "yes": 0, "fail": 1, "no": 1, "indeterminate": 2, "error": 3}


class Report:
    """Ordered key/value pairs plus free text lines and a verdict."""

    def __init__(self, title: str):
        self.title = title
        self.pairs = []
        self.text = []
        self.verdict = "pass"

    def kv(self, key, value):
        self.pairs.append((key, value))

    def line(self, s: str):
        self.text.append(s)

    def render(self, fmt: str) -> str:
        if fmt == "machine":
            return F.machine_report([("command", self.title), *self.pairs], self.verdict)
        out = [f"== {self.title}"]
        out += [f"{k}: {v}" for k, v in self.pairs]
        out += self.text
        out.append(f"verdict: {self.verdict}")
        return "\n".join(out) + "\n"


def parse_window(s: str | None):
    if not s:
        return None
    vals = [int(v) for v in s.split(",")]
    if not 3 <= len(vals) <= 5:
        raise argparse.ArgumentTypeError("window is V,K,B[,E[,G]]")
    return G.GraphWindow(*vals)


def _load(args):
    with open(args.file, encoding="utf-8") as fh:
        return F.parse(fh.read(), window=parse_window(args.window))


def _pick(doc, kind: str, name: str | None):
    if name:
        return doc.get(name, kind)
    found = doc.of_kind(kind)
    if not found:
        raise CatextError(f"no {kind} section in {doc}")
    return found[0].value


def _expected(doc, command: str, target: str):
    for e in doc.expectations():
        if e.get("command") == command and e.get("target", target) == target:
            return e
    return None


def _profile_arg(s: str) -> Profile:
    try:
        return F.parse_profile(s)
    except ValueError:
        raise CatextError(f"bad profile {s!r}; write (c,...;c)") from None


# ---------------------------------------------------------------------------
# commands


def cmd_check_laws(args, rep: Report):
    targets = []
    if args.builtin:
        w = parse_window(args.window)
        maps = G.builtin_maps(w)
        seen = {}
        for phi in maps.values():
            for op in (phi.source, phi.target):
                seen.setdefault(op.name, op)
        targets += [("operad", n, op) for n, op in seen.items()]
        targets += [("map", n, phi) for n, phi in maps.items()]
    else:
        doc = _load(args)
        for s in doc.sections.values():
            if args.target and s.name != args.target:
                continue
            if s.kind in ("operad", "map", "algebra"):
                targets.append((s.kind, s.name, s.value))
        if args.target and not targets:
            raise F.UnknownReference(f"no operad, map or algebra named {args.target!r}")
    failed = 0
    for kind, name, v in targets:
        if kind == "operad":
            r = check_operad_laws(v, associativity=not args.no_associativity)
            if args.count:
                rep.kv(f"{name}.composites", composite_count(v))
        elif kind == "map":
            r = check_map_laws(v)
        else:
            r = Al.check_algebra_laws(v, associativity=not args.no_associativity)
        rep.kv(f"{name}.checked", r.checked)
        rep.kv(f"{name}.result", "pass" if r.ok else "fail")
        for viol in r.violations[:3]:
            rep.line(f"{name}: {viol[0]} {' '.join(map(str, viol[1:]))}")
        failed += not r.ok
    rep.kv("targets", len(targets))
    rep.kv("failed", failed)
    rep.verdict = "fail" if failed else "pass"


def cmd_check_extension(args, rep: Report):
    from .extension import is_categorical_extension

    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    r = is_categorical_extension(phi, materialize=False)
    for k, v in r.summary().items():
        if k != "verdict":  # rendered once, as the trailing line
            rep.kv(k, v)
    wit = r.witness_profiles()
    if wit:
        rep.kv("witness", F.format_profile(wit[0]))
        first = r.failures()[0]
        if first.unhit:
            rep.kv("unhit", F.format_element(first.unhit[0]))
        rep.kv("witnesses", " ".join(F.format_profile(p) for p in wit))
    e = _expected(doc, "check-extension", phi.name)
    if e:
        rep.kv("expected", e.get("verdict"))
        rep.kv("matches", e.get("verdict") == r.verdict)
        if e.get("witness"):
            rep.kv("witness_found", _profile_arg(e["witness"]) in wit)
    if args.verbose:
        rep.text += r.lines()
    rep.verdict = r.verdict


def cmd_factorize(args, rep: Report):
    from .extension import ExtensionMorphism

    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    tp = _profile_arg(args.profile)
    ext = ExtensionMorphism(phi)
    res = ext.result(tp)
    rep.kv("profile", F.format_profile(tp))
    rep.kv("status", res.status)
    rep.kv("classes", res.n_classes)
    rep.kv("targets", res.n_targets)
    if res.status != "bijective":
        rep.verdict = {"fails": "no", "incomplete": "indeterminate"}[res.status]
        return
    for e in ext.classes(tp):
        q = ext(e)
        if args.op and F.format_element(q) != args.op:
            continue
        inner = ",".join(F.format_element(y) for _, y in e.inners)
        rep.line(f"{F.format_element(q)} = {F.format_element(e.outer)} after ({inner})")
    rep.verdict = "yes"


def cmd_phi_star(args, rep: Report):
    from .adjoint import phi_star

    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    A = _pick(doc, "algebra", args.algebra)
    RA = phi_star(phi, A, max_arity=args.max_arity)
    for b in RA.operad.colors:
        rep.kv(f"carrier.{F.format_atom(b)}", len(RA.carrier(b)))
    if args.check:
        law = Al.check_algebra_laws(RA, associativity=False)
        rep.kv("laws", "pass" if law.ok else "fail")
        rep.verdict = "pass" if law.ok else "fail"
    RA.source_spec = ("explicit",)
    RA.operad.name = phi.target.name
    rep.text += F.dump_section("algebra", f"{A.name}_pushed", RA).rstrip("\n").split("\n")


def cmd_phi_shriek(args, rep: Report):
    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    A = _pick(doc, "algebra", args.algebra)
    I = Al.induce(phi, A, max_degree=args.max_degree)
    for b in phi.target.colors:
        rep.kv(f"carrier.{F.format_atom(b)}", len(I.carrier(b)))
    for b in phi.target.colors:
        elems = " ".join(F.format_element(x) for x in I.carrier(b))
        rep.line(f"carrier {F.format_atom(b)} : {elems}")


def cmd_coproduct(args, rep: Report):
    doc = _load(args)
    algs = [doc.get(n, "algebra") for n in args.algebras]
    C = Al.coproduct(algs, max_arity=args.max_arity)
    for a in C.operad.colors:
        rep.kv(f"carrier.{F.format_atom(a)}", len(C.carrier(a)))
    for a in C.operad.colors:
        rep.line(f"carrier {F.format_atom(a)} : " + " ".join(F.format_element(x) for x in C.carrier(a)))


def cmd_check_adjunction(args, rep: Report):
    from .adjoint import verify_adjunction

    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    pairs = []
    if args.algebra:
        A = doc.get(args.algebra, "algebra")
        B = doc.get(args.other, "algebra") if args.other else Al.terminal_algebra(phi.target)
        pairs.append((A, B))
    rng = random.Random(args.seed)
    for _ in range(args.random):
        pairs.append((Al.random_additive_algebra(phi.source, rng), Al.random_additive_algebra(phi.target, rng)))
    if not pairs:
        raise CatextError("give --algebra or --random N")
    failed = 0
    for i, (A, B) in enumerate(pairs):
        r = verify_adjunction(phi, A, B, underlying=args.underlying)
        rep.kv(f"pair{i}", "pass" if r.ok else "fail")
        rep.text += r.lines()
        failed += not r.ok
    rep.kv("pairs", len(pairs))
    rep.kv("failed", failed)
    rep.verdict = "fail" if failed else "pass"


def cmd_summand_check(args, rep: Report):
    doc = _load(args)
    phi = _pick(doc, "map", args.map)
    if not (phi.source.collection.is_positive() and phi.target.collection.is_positive()):
        phi = positive_map(phi)
        rep.kv("positivized", True)
    tp = _profile_arg(args.profile)
    r = Al.comparison_summand_check(phi, tp.inputs, tp.output)
    rep.kv("profile", F.format_profile(tp))
    rep.kv("status", r.status)
    rep.kv("classes", r.n_classes)
    rep.kv("targets", r.n_targets)
    rep.kv("unhit", len(r.unhit))
    rep.kv("agrees", r.agrees)
    rep.verdict = "pass" if r.agrees else "fail"


def cmd_graphs_enumerate(args, rep: Report):
    vals = tuple(int(v) for v in args.valences.split(",")) if args.valences else ()
    pred = G.kind_predicate(args.kind) if args.kind else None
    tree = args.kind not in (None, "M", "Mg")
    gs = G.enumerate_graphs(vals, args.boundary, pred, trees_only=tree)
    rep.kv("valences", ",".join(map(str, vals)))
    rep.kv("boundary", args.boundary)
    rep.kv("count", len(gs))
    for g in gs:
        rep.line(f"{g.key()} betti={G.first_betti(g)}")


def cmd_graphs_substitute(args, rep: Report):
    doc = _load(args)
    outer = doc.get(args.outer, "graph")
    inners = [doc.get(n, "graph") for n in args.inners]
    r = G.substitute(outer, inners)
    rep.kv("result", r.key())
    rep.kv("betti", G.first_betti(r))
    rep.text += F.dump_section("graph", "result", r).rstrip("\n").split("\n")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catext", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--window", help="graph window V,K,B[,E[,G]]")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, file=True, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        if file:
            p.add_argument("file")
        p.set_defaults(fn=fn)
        return p

    p = add("check-laws", cmd_check_laws, file=False)
    p.add_argument("file", nargs="?")
    p.add_argument("--builtin", action="store_true", help="all built-in graph operads and maps")
    p.add_argument("--target")
    p.add_argument("--no-associativity", action="store_true")
    p.add_argument("--count", action="store_true", help="report one-level composite counts")
    p = add("check-extension", cmd_check_extension)
    p.add_argument("--map")
    p.add_argument("-v", "--verbose", action="store_true")
    p = add("factorize", cmd_factorize)
    p.add_argument("--map")
    p.add_argument("--profile", required=True)
    p.add_argument("--op")
    p = add("phi-star", cmd_phi_star)
    p.add_argument("--map")
    p.add_argument("--algebra")
    p.add_argument("--max-arity", type=int)
    p.add_argument("--check", action="store_true")
    p = add("phi-shriek", cmd_phi_shriek)
    p.add_argument("--map")
    p.add_argument("--algebra")
    p.add_argument("--max-degree", type=int, default=2)
    p = add("coproduct", cmd_coproduct)
    p.add_argument("--algebras", nargs="+", required=True)
    p.add_argument("--max-arity", type=int, default=2)
    p = add("check-adjunction", cmd_check_adjunction)
    p.add_argument("--map")
    p.add_argument("--algebra")
    p.add_argument("--other")
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--underlying", action="store_true")
    p = add("summand-check", cmd_summand_check)
    p.add_argument("--map")
    p.add_argument("--profile", required=True)

    g = sub.add_parser("graphs").add_subparsers(dest="graphs_command", required=True)
    p = g.add_parser("enumerate", parents=[common])
    p.add_argument("--valences", default="")
    p.add_argument("--boundary", type=int, required=True)
    p.add_argument("--kind", choices=G.KINDS)
    p.set_defaults(fn=cmd_graphs_enumerate, command="graphs enumerate")
    p = g.add_parser("substitute", parents=[common])
    p.add_argument("file")
    p.add_argument("outer")
    p.add_argument("inners", nargs="*")
    p.set_defaults(fn=cmd_graphs_substitute, command="graphs substitute")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command)
    try:
        args.fn(args, rep)
    except (CatextError, OSError, argparse.ArgumentTypeError) as err:
        rep.kv("error", type(err).__name__)
        rep.kv("message", str(err))
        rep.verdict = "error"
    try:
        sys.stdout.write(rep.render(args.format))
        sys.stdout.flush()
    except BrokenPipeError:
        pass
    return EXIT[rep.verdict]


if __name__ == "__main__":
    sys.exit(main())
