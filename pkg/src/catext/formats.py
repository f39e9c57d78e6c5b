"""The ``.opx`` text format: ``section <kind> <name>`` ... ``end`` blocks.

Each line inside a section is a keyword followed by whitespace-separated
tokens.  ``#`` starts a comment.  Sections may refer to earlier sections by
name.  See ``docs/opx-grammar.md`` for the grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .collections import CatextError, ColorSet, ContractError, Profile, SymmetricCollection, TruncationWindow
from .operads import Operad, OperadMap

KINDS = ("colorset", "collection", "operad", "map", "algebra", "graph", "expect")


class FormatError(CatextError):
    category = "format"

    def __init__(self, message: str, line: int = 0, col: int = 0, expected=()):
        self.line, self.col, self.expected = line, col, tuple(expected)
        where = f"{line}:{col}: " if line else ""
        exp = f" (expected {' | '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{self.category} error: {where}{message}{exp}")


class LexicalError(FormatError):
    category = "lexical"


class GrammarError(FormatError):
    category = "syntax"


class UnknownReference(FormatError):
    category = "reference"


class SemanticError(FormatError):
    category = "semantic"


# ---------------------------------------------------------------------------
# tokens and atoms

_TOKEN = re.compile(r"\S+")
_INT = re.compile(r"-?\d+\Z")
_PAIRS = {"(": ")", "[": "]", "<": ">"}


def _check_token(tok: str, line: int, col: int):
    stack = []
    for i, ch in enumerate(tok):
        if ord(ch) < 32:
            raise LexicalError(f"control character {ch!r}", line, col + i)
        if ch in _PAIRS:
            stack.append(_PAIRS[ch])
        elif ch in ")]>" and not (ch == ">" and i > 0 and tok[i - 1] == "-"):
            if not stack or stack.pop() != ch:
                raise LexicalError(f"unbalanced {ch!r}", line, col + i)
    if stack:
        raise LexicalError(f"unclosed bracket in {tok!r}", line, col + len(tok), [repr(stack[-1])])


def tokenize(text: str):
    """(line number, [(column, token)]) for every non-empty line."""
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = []
        for m in _TOKEN.finditer(body):
            _check_token(m.group(), n, m.start() + 1)
            toks.append((m.start() + 1, m.group()))
        if toks:
            yield n, toks


def parse_atom(tok: str):
    if _INT.match(tok):
        return int(tok)
    if tok.startswith("<") and tok.endswith(">"):
        return tuple(parse_atom(t) for t in _split_top(tok[1:-1], "."))
    return tok


def format_atom(x) -> str:
    if isinstance(x, tuple):
        return "<" + ".".join(format_atom(t) for t in x) + ">"
    return str(x)


def _split_top(s: str, sep: str) -> list:
    """Split on ``sep`` outside brackets."""
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch in "([<":
            depth += 1
        elif ch in ")]>":
            depth -= 1
        if ch == sep and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur or out:
        out.append(cur)
    return out


def parse_profile(tok: str) -> Profile:
    if not (tok.startswith("(") and tok.endswith(")")) or ";" not in tok:
        raise ValueError(tok)
    ins, out = tok[1:-1].rsplit(";", 1)
    inputs = tuple(parse_atom(t) for t in _split_top(ins, ",")) if ins else ()
    return Profile(inputs, parse_atom(out))


def format_profile(p: Profile) -> str:
    return f"({','.join(format_atom(c) for c in p.inputs)};{format_atom(p.output)})"


def parse_call(tok: str):
    """``name(arg,...)`` -> (name, [args])."""
    depth = 0
    for i, ch in enumerate(tok):
        if ch in "[<":
            depth += 1
        elif ch in "]>":
            depth -= 1
        elif ch == "(" and depth == 0:
            if not tok.endswith(")"):
                raise ValueError(tok)
            inner = tok[i + 1:-1]
            return tok[:i], [t for t in _split_top(inner, ",")] if inner else []
    raise ValueError(tok)


def format_element(x) -> str:
    for attr in ("key", "name"):
        m = getattr(x, attr, None)
        if callable(m):
            return m()
    if isinstance(x, tuple):
        return format_atom(x)
    return str(x)


# ---------------------------------------------------------------------------
# documents


@dataclass
class Section:
    kind: str
    name: str
    line: int
    body: list = field(default_factory=list)  # (line, [(col, token)])
    value: object = None


@dataclass
class Document:
    sections: dict = field(default_factory=dict)

    def get(self, name: str, kind: str | None = None, line: int = 0, col: int = 0):
        s = self.sections.get(name)
        if s is None or (kind and s.kind != kind):
            raise UnknownReference(f"no {kind or 'section'} named {name!r}", line, col)
        return s.value

    def of_kind(self, kind: str) -> list:
        return [s for s in self.sections.values() if s.kind == kind]

    def expectations(self) -> list:
        return [s.value for s in self.of_kind("expect")]


def parse(text: str, window=None) -> Document:
    """Parse and build every section.  ``window`` overrides graph-operad windows."""
    doc = Document()
    current = None
    for n, toks in tokenize(text):
        (col, kw) = toks[0]
        if current is None:
            if kw != "section":
                raise GrammarError(f"unexpected {kw!r}", n, col, ["section"])
            if len(toks) != 3:
                raise GrammarError("section needs a kind and a name", n, col, ["section <kind> <name>"])
            kind, name = toks[1][1], toks[2][1]
            if kind not in KINDS:
                raise GrammarError(f"unknown section kind {kind!r}", n, toks[1][0], KINDS)
            if name in doc.sections:
                raise SemanticError(f"duplicate section name {name!r}", n, toks[2][0])
            current = Section(kind, name, n)
            continue
        if kw == "end":
            if len(toks) != 1:
                raise GrammarError("trailing tokens after end", n, toks[1][0], ["newline"])
            current.value = _BUILDERS[current.kind](doc, current, window)
            doc.sections[current.name] = current
            current = None
            continue
        if kw == "section":
            raise GrammarError("nested section", n, col, ["end"])
        current.body.append((n, toks))
    if current is not None:
        raise GrammarError(f"section {current.name!r} is not closed", current.line, 1, ["end"])
    return doc


def _fields(sec: Section, allowed: dict) -> dict:
    """keyword -> list of (line, tokens-after-keyword); checks keywords and arity."""
    out = {}
    for n, toks in sec.body:
        col, kw = toks[0]
        if kw not in allowed:
            raise GrammarError(f"unknown keyword {kw!r} in {sec.kind}", n, col, sorted(allowed))
        lo = allowed[kw]
        if len(toks) - 1 < lo:
            raise GrammarError(f"{kw} needs at least {lo} argument(s)", n, col + len(kw))
        out.setdefault(kw, []).append((n, toks[1:]))
    return out


def _one(fields: dict, kw: str, sec: Section, required: bool = True):
    v = fields.get(kw)
    if not v:
        if required:
            raise GrammarError(f"{sec.kind} {sec.name!r} needs a {kw} line", sec.line, 1, [kw])
        return None
    if len(v) > 1:
        raise SemanticError(f"repeated {kw}", v[1][0], 1)
    return v[0]


def _profile_tok(n, col_tok):
    col, tok = col_tok
    try:
        return parse_profile(tok)
    except ValueError:
        raise GrammarError(f"bad profile {tok!r}", n, col, ["(c,...;c)"]) from None


def _int_tok(n, col_tok):
    col, tok = col_tok
    if not _INT.match(tok):
        raise GrammarError(f"expected an integer, got {tok!r}", n, col, ["integer"])
    return int(tok)


# colorsets -----------------------------------------------------------------


def _build_colorset(doc, sec, window):
    f = _fields(sec, {"colors": 0})
    n, toks = _one(f, "colors", sec)
    return ColorSet(tuple(parse_atom(t) for _, t in toks))


def _colors_ref(doc, n, toks):
    if len(toks) == 1 and toks[0][1] in doc.sections:
        return doc.get(toks[0][1], "colorset", n, toks[0][0])
    return ColorSet(tuple(parse_atom(t) for _, t in toks))


# explicit collections and operads ------------------------------------------


def _explicit_collection(doc, sec, f):
    n, toks = _one(f, "colors", sec)
    colors = _colors_ref(doc, n, toks)
    wl = _one(f, "window", sec, False)
    max_arity, exact = 0, True
    carriers, where = {}, {}
    for n, toks in f.get("op", ()):
        p = _profile_tok(n, toks[0])
        for col, t in toks[1:]:
            if t in where:
                raise SemanticError(f"label {t!r} used twice", n, col)
            where[t] = p
            carriers.setdefault(p, []).append(t)
        max_arity = max(max_arity, p.arity)
    if wl is not None:
        n, toks = wl
        max_arity = _int_tok(n, toks[0])
        exact = len(toks) > 1 and toks[1][1] == "exact"
    acts = {}
    for n, toks in f.get("act", ()):
        # act 1,0: x -> y
        if len(toks) != 4 or not toks[0][1].endswith(":") or toks[2][1] != "->":
            raise GrammarError("act needs: act <perm>: <label> -> <label>", n, toks[0][0],
                               ["<perm>:", "->"])
        x, y = toks[1][1], toks[3][1]
        for col, t in (toks[1], toks[3]):
            if t not in where:
                raise UnknownReference(f"unknown operation {t!r}", n, col)
        try:
            s = tuple(int(c) for c in toks[0][1][:-1].split(","))
        except ValueError:
            raise GrammarError(f"bad permutation {toks[0][1]!r}", n, toks[0][0], ["i,j,..:"]) from None
        if sorted(s) != list(range(len(s))) or len(s) != where[x].arity:
            raise SemanticError(f"{toks[0][1][:-1]} is not a permutation of the inputs of {x}", n, toks[0][0])
        acts[(x, s)] = y
    win = TruncationWindow(colors, colors, max_arity, exact)
    for p in carriers:
        if not win.colors_ok(p):
            raise SemanticError(f"profile {format_profile(p)} uses unknown colors", sec.line, 1)

    def act(p, s, x):
        if s == tuple(range(len(s))):
            return x
        try:
            return acts[(x, tuple(s))]
        except KeyError:
            raise ContractError(f"no action entry for {x} under {s}") from None

    coll = SymmetricCollection(win, carriers, act if acts else None, sec.name)
    return coll, where


def _build_collection(doc, sec, window):
    f = _fields(sec, {"colors": 0, "window": 1, "op": 1, "act": 3})
    coll, where = _explicit_collection(doc, sec, f)
    coll.labels = where
    return coll


def _build_operad(doc, sec, window):
    f = _fields(sec, {"graphs": 1, "window": 1, "ell": 1, "palette": 1, "colors": 0,
                      "op": 1, "act": 3, "unit": 3, "sub": 3})
    if "graphs" in f:
        from .graphs import GraphWindow, build_operad

        n, toks = _one(f, "graphs", sec)
        kind = toks[0][1]
        wl = _one(f, "window", sec, False)
        w = None
        if wl is not None:
            w = GraphWindow(*[_int_tok(wl[0], t) for t in wl[1]])
        if window is not None:
            w = window
        ell = _one(f, "ell", sec, False)
        ell = _int_tok(ell[0], ell[1][0]) if ell else None
        pal = _one(f, "palette", sec, False)
        palette = tuple(parse_atom(t) for _, t in pal[1]) if pal else None
        try:
            op = build_operad(kind, w, ell=ell, palette=palette, name=sec.name)
        except ContractError as e:
            raise SemanticError(str(e), n, toks[0][0]) from None
        op.source_spec = ("graphs", kind, w, ell, palette)
        return op
    coll, where = _explicit_collection(doc, sec, f)
    units = {}
    for n, toks in f.get("unit", ()):
        if toks[1][1] != "=":
            raise GrammarError("unit needs: unit <color> = <label>", n, toks[1][0], ["="])
        units[parse_atom(toks[0][1])] = toks[2][1]
    table = {}
    for n, toks in f.get("sub", ()):
        if len(toks) != 3 or toks[1][1] != "=":
            raise GrammarError("sub needs: sub <outer>(<inner>,...) = <label>", n, toks[0][0])
        try:
            x, ys = parse_call(toks[0][1])
        except ValueError:
            raise GrammarError(f"bad call {toks[0][1]!r}", n, toks[0][0], ["name(arg,...)"]) from None
        for t in [x, *ys, toks[2][1]]:
            if t not in where:
                raise UnknownReference(f"unknown operation {t!r}", n, toks[0][0])
        inners = tuple((where[y], y) for y in ys)
        table[(where[x], x, inners)] = toks[2][1]
    op = Operad(coll, units, table, sec.name)
    op.labels = where
    op.source_spec = ("explicit",)
    return op


# maps ----------------------------------------------------------------------


def _build_map(doc, sec, window):
    from . import graphs as G

    f = _fields(sec, {"source": 1, "target": 1, "builtin": 1, "color": 3, "comp": 3})
    n, toks = _one(f, "source", sec)
    S = doc.get(toks[0][1], "operad", n, toks[0][0])
    n, toks = _one(f, "target", sec)
    T = doc.get(toks[0][1], "operad", n, toks[0][0])
    cmap = {}
    for n, toks in f.get("color", ()):
        if toks[1][1] != "->":
            raise GrammarError("color needs: color <a> -> <b>", n, toks[1][0], ["->"])
        cmap[parse_atom(toks[0][1])] = parse_atom(toks[2][1])
    b = _one(f, "builtin", sec, False)
    if b is not None:
        kind = b[1][0][1]
        if kind == "inclusion":
            phi = G.inclusion(S, T, sec.name)
        elif kind == "genus-zero":
            phi = G.genus_zero_map(S, T)
        elif kind == "genus-projection":
            phi = G.genus_projection(S, T)
        elif kind == "recolor":
            phi = G.recolor_map(S, T, cmap)
        else:
            raise GrammarError(f"unknown builtin map {kind!r}", b[0], b[1][0][0],
                               ["inclusion", "genus-zero", "genus-projection", "recolor"])
        phi.name = sec.name
        phi.source_spec = ("builtin", kind, cmap)
        return phi
    comps = {}
    for n, toks in f.get("comp", ()):
        if toks[1][1] != "->":
            raise GrammarError("comp needs: comp <label> -> <label>", n, toks[1][0], ["->"])
        x, y = toks[0][1], toks[2][1]
        if x not in getattr(S, "labels", {}) or y not in getattr(T, "labels", {}):
            raise UnknownReference(f"unknown operation in comp {x} -> {y}", n, toks[0][0])
        comps[(S.labels[x], x)] = y
    for a in S.colors:
        if a not in cmap:
            raise SemanticError(f"color {a} has no image", sec.line, 1)
    phi = OperadMap(S, T, cmap, comps, sec.name)
    phi.source_spec = ("explicit", cmap, comps)
    return phi


# algebras ------------------------------------------------------------------


def _build_algebra(doc, sec, window):
    from . import algebras as Al

    f = _fields(sec, {"operad": 1, "monoid": 1, "unit": 1, "mul": 4, "additive": 1,
                      "carrier": 2, "act": 3, "color": 1})
    n, toks = _one(f, "operad", sec)
    op = doc.get(toks[0][1], "operad", n, toks[0][0])
    if "monoid" in f:
        n, toks = _one(f, "monoid", sec)
        elems = tuple(parse_atom(t) for _, t in toks)
        un = _one(f, "unit", sec)
        e = parse_atom(un[1][0][1])
        table = {}
        for n, toks in f.get("mul", ()):
            if toks[2][1] != "=":
                raise GrammarError("mul needs: mul <x> <y> = <z>", n, toks[2][0], ["="])
            x, y, z = (parse_atom(toks[i][1]) for i in (0, 1, 3))
            for v, (col, _) in ((x, toks[0]), (y, toks[1]), (z, toks[3])):
                if v not in elems:
                    raise UnknownReference(f"{v} is not a monoid element", n, col)
            table[(x, y)] = z

        def mult(x, y):
            if x == e:
                return y
            if y == e:
                return x
            return table[(x, y)]

        missing = [(x, y) for x in elems for y in elems if e not in (x, y) and (x, y) not in table]
        if missing:
            raise SemanticError(f"multiplication table misses {missing[0]}", sec.line, 1)
        color = _one(f, "color", sec, False)
        color = parse_atom(color[1][0][1]) if color else 2
        A = Al.monoid_algebra(op, elems, mult, e, color, sec.name)
        A.source_spec = ("monoid", elems, e, table, color)
        return A
    if "additive" in f:
        n, toks = _one(f, "additive", sec)
        k, *cs = [_int_tok(n, t) for t in toks]
        c = cs[0] if cs else 0
        c2 = cs[1] if len(cs) > 1 else 0
        A = Al.additive_algebra(op, k, Al.graph_shift(c, c2), name=sec.name)
        A.source_spec = ("additive", k, c, c2)
        return A
    carriers = {}
    for n, toks in f.get("carrier", ()):
        if toks[1][1] != ":":
            raise GrammarError("carrier needs: carrier <color> : <elements>", n, toks[1][0], [":"])
        carriers[parse_atom(toks[0][1])] = tuple(parse_atom(t) for _, t in toks[2:])
    index = {format_element(x): (p, x) for p, x in op.elements()}
    index.update({k: (p, k) for k, p in getattr(op, "labels", {}).items()})
    table = {}
    for n, toks in f.get("act", ()):
        if len(toks) != 3 or toks[1][1] != "=":
            raise GrammarError("act needs: act <op>(<x>,...) = <y>", n, toks[0][0])
        try:
            name, args = parse_call(toks[0][1])
        except ValueError:
            raise GrammarError(f"bad call {toks[0][1]!r}", n, toks[0][0], ["op(x,...)"]) from None
        if name not in index:
            raise UnknownReference(f"unknown operation {name!r}", n, toks[0][0])
        p, x = index[name]
        table[(p, x, tuple(parse_atom(a) for a in args))] = parse_atom(toks[2][1])
    A = Al.FiniteAlgebra(op, carriers, table, sec.name)
    A.source_spec = ("explicit",)
    return A


# graphs and expectations ---------------------------------------------------


def _build_graph(doc, sec, window):
    from .graphs import OrderedGraph

    f = _fields(sec, {"valences": 0, "boundary": 1, "ends": 0, "circles": 1})
    n, toks = _one(f, "valences", sec)
    vals = [_int_tok(n, t) for t in toks]
    n, toks = _one(f, "boundary", sec)
    bnd = _int_tok(n, toks[0])
    n, toks = _one(f, "ends", sec)
    ends = [_int_tok(n, t) for t in toks]
    c = _one(f, "circles", sec, False)
    circles = _int_tok(c[0], c[1][0]) if c else 0
    try:
        return OrderedGraph(vals, bnd, ends, circles)
    except CatextError as e:
        raise SemanticError(str(e), sec.line, 1) from None


def _build_expect(doc, sec, window):
    out = {}
    for n, toks in sec.body:
        out[toks[0][1]] = " ".join(t for _, t in toks[1:])
    if "target" in out:
        doc.get(out["target"], None, sec.line, 1)
    return out


_BUILDERS = {
    "colorset": _build_colorset, "collection": _build_collection, "operad": _build_operad,
    "map": _build_map, "algebra": _build_algebra, "graph": _build_graph, "expect": _build_expect,
}


# ---------------------------------------------------------------------------
# printing


def dump(doc: Document) -> str:
    return "".join(dump_section(s.kind, s.name, s.value) for s in doc.sections.values())


def dump_section(kind: str, name: str, value) -> str:
    lines = _PRINTERS[kind](value)
    return f"section {kind} {name}\n" + "".join(f"  {ln}\n" for ln in lines) + "end\n"


def _print_colorset(cs):
    return ["colors " + " ".join(format_atom(c) for c in cs)]


def _print_collection_body(coll: SymmetricCollection, labels):
    out = ["colors " + " ".join(format_atom(c) for c in coll.window.colors_in)]
    out.append(f"window {coll.window.max_arity}" + (" exact" if coll.window.exact else ""))
    for p in coll.profiles():
        out.append(f"op {format_profile(p)} " + " ".join(map(str, coll.carrier(p))))
    from . import perm as P

    if coll._action is None and coll._table is None:
        return out
    for p, x in coll.elements():
        for s in P.all_perms(p.arity):
            if s != tuple(range(p.arity)):
                out.append(f"act {','.join(map(str, s))}: {x} -> {coll.act(p, s, x)}")
    return out


def _print_collection(coll):
    return _print_collection_body(coll, getattr(coll, "labels", {}))


def _print_operad(op):
    spec = getattr(op, "source_spec", ("explicit",))
    if spec[0] == "graphs":
        _, kind, w, ell, palette = spec
        out = [f"graphs {kind}"]
        if w is not None:
            vals = [w.max_vertices, w.max_valence, w.max_boundary]
            if w.max_edges is not None:
                vals.append(w.max_edges)
            out.append("window " + " ".join(map(str, vals)))
        if ell is not None:
            out.append(f"ell {ell}")
        if palette:
            out.append("palette " + " ".join(format_atom(c) for c in palette))
        return out
    out = _print_collection_body(op.collection, getattr(op, "labels", {}))
    for a in sorted(op.units, key=format_atom):
        out.append(f"unit {format_atom(a)} = {op.units[a]}")
    for (p, x, inners), r in sorted(op._table.items(), key=lambda kv: str(kv[0])):
        out.append(f"sub {x}({','.join(str(y) for _, y in inners)}) = {r}")
    return out


def _print_map(phi):
    spec = getattr(phi, "source_spec", None)
    out = [f"source {phi.source.name}", f"target {phi.target.name}"]
    if spec and spec[0] == "builtin":
        out.append(f"builtin {spec[1]}")
        for a, b in sorted(spec[2].items(), key=lambda kv: format_atom(kv[0])):
            out.append(f"color {format_atom(a)} -> {format_atom(b)}")
        return out
    for a in phi.source.colors:
        out.append(f"color {format_atom(a)} -> {format_atom(phi.f(a))}")
    for p, x in phi.source.elements():
        out.append(f"comp {x} -> {phi(p, x)}")
    return out


def _print_algebra(A):
    spec = getattr(A, "source_spec", ("explicit",))
    out = [f"operad {A.operad.name}"]
    if spec[0] == "monoid":
        _, elems, e, table, color = spec
        out.append("monoid " + " ".join(format_atom(x) for x in elems))
        out.append(f"unit {format_atom(e)}")
        if color != 2:
            out.append(f"color {format_atom(color)}")
        for (x, y), z in sorted(table.items(), key=lambda kv: format_atom(kv[0])):
            out.append(f"mul {format_atom(x)} {format_atom(y)} = {format_atom(z)}")
        return out
    if spec[0] == "additive":
        _, k, c, c2 = spec
        out.append(f"additive {k} {c} {c2}")
        return out
    return out + algebra_lines(A)


def algebra_lines(A) -> list:
    """Carrier blocks plus one ``act`` line per operation and argument tuple."""
    out = []
    for a in A.operad.colors:
        out.append(f"carrier {format_atom(a)} : " + " ".join(format_element(x) for x in A.carrier(a)))
    for p, x in A.operations():
        for elems in A.arguments(p):
            y = A.act(p, x, elems)
            args = ",".join(format_element(e) for e in elems)
            out.append(f"act {format_element(x)}({args}) = {format_element(y)}")
    return out


def _print_graph(g):
    out = ["valences " + " ".join(map(str, g.valences)), f"boundary {g.boundary}",
           "ends " + " ".join(map(str, g.ends))]
    if g.circles:
        out.append(f"circles {g.circles}")
    return out


def _print_expect(d):
    return [f"{k} {v}".rstrip() for k, v in d.items()]


_PRINTERS = {
    "colorset": _print_colorset, "collection": _print_collection, "operad": _print_operad,
    "map": _print_map, "algebra": _print_algebra, "graph": _print_graph, "expect": _print_expect,
}


# ---------------------------------------------------------------------------
# reports


def machine_report(pairs, verdict: str) -> str:
    """``key=value`` lines with a trailing ``verdict=`` line."""
    lines = [f"{k}={v}" for k, v in pairs]
    lines.append(f"verdict={verdict}")
    return "\n".join(lines) + "\n"
