"""Finite algebras over operads and the constructions between them."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Mapping

from networkx.utils import UnionFind

from . import perm as P
from .collections import (
    ContractError, DomainError, Profile, TruncationError, _by_output, _inner_choices,
)
from .operads import LawReport, Operad, OperadMap, concat_profile, unary_generators
from .perm import okey


class FiniteAlgebra:
    """Per-color finite carriers and an action of every in-window operation.

    ``action`` is a callable ``(profile, op, elements) -> element`` or a table
    keyed by ``(profile, op, elements)``.
    """

    def __init__(self, operad: Operad, carriers: Mapping, action, name: str = "",
                 max_arity: int | None = None):
        self.operad = operad
        self.carriers = {a: tuple(carriers.get(a, ())) for a in operad.colors}
        self.name = name or f"alg({operad.name})"
        self.max_arity = operad.window.max_arity if max_arity is None else max_arity
        if callable(action):
            self._fn, self._table = action, None
        else:
            self._fn, self._table = None, dict(action)
        self._cache = {}

    def carrier(self, a) -> tuple:
        return self.carriers.get(a, ())

    def size(self) -> int:
        return sum(len(v) for v in self.carriers.values())

    def act(self, p: Profile, x, elems):
        elems = tuple(elems)
        key = (p, x, elems)
        r = self._cache.get(key)
        if r is None:
            if len(elems) != p.arity:
                raise DomainError(f"{len(elems)} arguments for arity {p.arity}")
            r = self._fn(p, x, elems) if self._fn is not None else self._table[key]
            self._cache[key] = r
        return r

    def operations(self):
        for p, x in self.operad.elements():
            if p.arity <= self.max_arity:
                yield p, x

    def arguments(self, p: Profile):
        return itertools.product(*(self.carrier(c) for c in p.inputs))

    def table(self) -> dict:
        return {(p, x, e): self.act(p, x, e) for p, x in self.operations()
                for e in self.arguments(p)}

    def __repr__(self):
        return f"<FiniteAlgebra {self.name}>"


def check_algebra_laws(A: FiniteAlgebra, associativity: bool = True) -> LawReport:
    """Units, closure, equivariance and associativity over every in-window instance."""
    rep = LawReport()
    op = A.operad
    for a, u in op.units.items():
        up = op.unit_profile(a)
        for e in A.carrier(a):
            rep.checked += 1
            if A.act(up, u, (e,)) != e:
                rep.add("unit", a, e)
    by_out = _by_output(op.collection)
    for p, x in A.operations():
        for elems in A.arguments(p):
            r = A.act(p, x, elems)
            rep.checked += 1
            if r not in A.carrier(p.output):
                rep.add("closure", p, x, elems, r)
                continue
            for i in range(p.arity - 1):
                s = P.transposition(p.arity, i)
                if A.act(p.permuted(s), op.act(p, s, x), P.permute(elems, s)) != r:
                    rep.add("equivariance", p, x, elems, s)
        if not associativity:
            continue
        for inners in _inner_choices(by_out, p.inputs, A.max_arity):
            rp = concat_profile(p, inners)
            if not op.window.contains(rp):
                rep.overflow += 1
                continue
            whole = op.compose(p, x, inners)
            for elems in A.arguments(rp):
                k = 0
                mids = []
                for q, y in inners:
                    mids.append(A.act(q, y, elems[k:k + q.arity]))
                    k += q.arity
                rep.checked += 1
                if A.act(rp, whole, elems) != A.act(p, x, mids):
                    rep.add("associativity", p, x, inners, elems)
    return rep


@dataclass
class AlgebraMap:
    source: FiniteAlgebra
    target: FiniteAlgebra
    components: dict  # color -> {element: element}

    def __call__(self, a, x):
        return self.components[a][x]

    def key(self):
        return tuple((a, tuple(sorted(self.components.get(a, {}).items(), key=okey)))
                     for a in sorted(self.source.carriers, key=okey))

    def check(self) -> list:
        bad = []
        A, B = self.source, self.target
        for a in A.carriers:
            for x in A.carrier(a):
                if self.components.get(a, {}).get(x) not in B.carrier(a):
                    bad.append(("lands-outside", a, x))
        if bad:
            return bad
        for p, x in A.operations():
            for elems in A.arguments(p):
                lhs = self(p.output, A.act(p, x, elems))
                rhs = B.act(p, x, tuple(self(c, e) for c, e in zip(p.inputs, elems)))
                if lhs != rhs:
                    bad.append(("commute", p, x, elems))
        return bad

    def then(self, other: "AlgebraMap") -> "AlgebraMap":
        comps = {a: {x: other(a, y) for x, y in c.items()} for a, c in self.components.items()}
        return AlgebraMap(self.source, other.target, comps)


def identity_algebra_map(A: FiniteAlgebra) -> AlgebraMap:
    return AlgebraMap(A, A, {a: {x: x for x in A.carrier(a)} for a in A.carriers})


def hom_set(A: FiniteAlgebra, B: FiniteAlgebra, limit: int | None = None) -> list:
    """Every algebra map A -> B, by backtracking over elements with constraint pruning."""
    if A.operad is not B.operad and A.operad.colors != B.operad.colors:
        raise ContractError("algebras over different operads")
    variables = [(a, x) for a in sorted(A.carriers, key=okey) for x in A.carrier(a)]
    index = {v: i for i, v in enumerate(variables)}
    checks = [[] for _ in variables]
    nullary = []
    for p, x in A.operations():
        for elems in A.arguments(p):
            out = (p.output, A.act(p, x, elems))
            if out not in index:
                raise ContractError(f"{A.name} is not closed at {p}")
            deps = [index[(c, e)] for c, e in zip(p.inputs, elems)] + [index[out]]
            entry = (p, x, elems, out)
            if not elems:
                nullary.append(entry)
            checks[max(deps)].append(entry)
    choice = {}
    found = []

    def ok(entry):
        p, x, elems, out = entry
        rhs = B.act(p, x, tuple(choice[(c, e)] for c, e in zip(p.inputs, elems)))
        return choice[out] == rhs

    def go(i):
        if limit is not None and len(found) >= limit:
            return
        if i == len(variables):
            comps = {a: {} for a in A.carriers}
            for (a, x), y in choice.items():
                comps[a][x] = y
            found.append(AlgebraMap(A, B, comps))
            return
        a, x = variables[i]
        for y in B.carrier(a):
            choice[(a, x)] = y
            if all(ok(e) for e in checks[i]):
                go(i + 1)
        choice.pop((a, x), None)

    go(0)
    return found


# ---------------------------------------------------------------------------
# constructions


def initial_algebra(op: Operad) -> FiniteAlgebra:
    """Carrier at a is P(;a); the action is substitution."""
    carriers = {}
    for a in op.colors:
        p = Profile((), a)
        carriers[a] = op.carrier(p) if op.window.contains(p) else ()

    def act(p, x, elems):
        return op.compose(p, x, tuple((Profile((), c), e) for c, e in zip(p.inputs, elems)))

    return FiniteAlgebra(op, carriers, act, f"⊥_{op.name}")


def initial_map(A: FiniteAlgebra) -> AlgebraMap:
    """The unique map from the initial algebra."""
    I = initial_algebra(A.operad)
    comps = {a: {x: A.act(Profile((), a), x, ()) for x in I.carrier(a)} for a in I.carriers}
    return AlgebraMap(I, A, comps)


def terminal_algebra(op: Operad, point="*") -> FiniteAlgebra:
    return FiniteAlgebra(op, {a: (point,) for a in op.colors}, lambda p, x, e: point,
                         f"*_{op.name}")


def restrict(phi: OperadMap, B: FiniteAlgebra) -> FiniteAlgebra:
    """φ*B: carriers B_{f a}, acting through φ."""
    carriers = {a: B.carrier(phi.f(a)) for a in phi.source.colors}

    def act(p, x, elems):
        return B.act(phi.map_profile(p), phi(p, x), elems)

    return FiniteAlgebra(phi.source, carriers, act, f"φ*{B.name}",
                         min(B.max_arity, phi.source.window.max_arity))


def restrict_map(phi: OperadMap, h: AlgebraMap, source=None, target=None) -> AlgebraMap:
    S = source or restrict(phi, h.source)
    T = target or restrict(phi, h.target)
    return AlgebraMap(S, T, {a: dict(h.components[phi.f(a)]) for a in phi.source.colors})


# free algebras


@dataclass(frozen=True)
class Term:
    """An operation applied to generators, up to the symmetric relation."""

    profile: Profile
    op: object
    args: tuple  # generators, one per input

    def sort_key(self):
        return (okey(self.op), okey(self.args), self.profile.sort_key())

    def __str__(self):
        return f"{self.op}({','.join(map(str, self.args))})"

    __repr__ = __str__


def _normal_term(op: Operad, p: Profile, x, args) -> Term:
    """Least representative of (x, args) under (x·σ, args) ~ (x, σ·args)."""
    best = None
    for s in P.all_perms(p.arity):
        t = Term(p.permuted(s), op.act(p, s, x), P.permute(args, s))
        if best is None or t.sort_key() < best.sort_key():
            best = t
    return best


def _ordered_term(op: Operad, p: Profile, x, args) -> Term:
    """The representative of (x, args) with distinct args listed in increasing order."""
    s = tuple(sorted(range(len(args)), key=args.__getitem__))
    if s == P.identity(len(args)):
        return Term(p, x, tuple(args))
    return Term(p.permuted(s), op.act(p, s, x), P.permute(args, s))


class FreeAlgebra(FiniteAlgebra):
    """(Q ◁ X)(; b) for generators X, truncated to at most ``max_degree`` generators.

    ``degree_of`` maps a generator to a label; with ``multidegree`` set, only
    terms whose label counts stay below it are kept.  The action raises
    TruncationError when a result would exceed the truncation.
    """

    def __init__(self, op: Operad, generators: Mapping, max_degree: int | None = None,
                 multidegree: Mapping | None = None, degree_of=None, name: str = ""):
        self.generators = {a: tuple(v) for a, v in generators.items()}
        n_max = op.window.max_arity if max_degree is None else max_degree
        self.max_degree = n_max
        self.multidegree = dict(multidegree) if multidegree else None
        self.degree_of = degree_of or (lambda g: g)
        gens_by_color = {a: v for a, v in self.generators.items() if v}
        carriers = {a: set() for a in op.colors}
        self.truncated = not op.window.exact or n_max < op.window.max_arity
        for p, x in op.elements():
            if p.arity > n_max:
                continue
            pools = [gens_by_color.get(c, ()) for c in p.inputs]
            for args in itertools.product(*pools):
                if not self._degree_ok(args):
                    continue
                carriers[p.output].add(_normal_term(op, p, x, args))
        carriers = {a: sorted(v, key=Term.sort_key) for a, v in carriers.items()}
        super().__init__(op, carriers, self._act, name or f"F_{op.name}", op.window.max_arity)

    def _degree_ok(self, args) -> bool:
        if len(args) > self.max_degree:
            return False
        if self.multidegree is None:
            return True
        counts = {}
        for g in args:
            d = self.degree_of(g)
            counts[d] = counts.get(d, 0) + 1
        return all(counts[d] <= self.multidegree.get(d, 0) for d in counts)

    def degree(self, t: Term) -> dict:
        counts = {}
        for g in t.args:
            d = self.degree_of(g)
            counts[d] = counts.get(d, 0) + 1
        return counts

    def _act(self, p, x, elems):
        op = self.operad
        args = tuple(g for t in elems for g in t.args)
        if not self._degree_ok(args):
            raise TruncationError(p, "free algebra degree bound")
        inners = tuple((t.profile, t.op) for t in elems)
        rp = concat_profile(p, inners)
        if not op.window.contains(rp):
            raise TruncationError(rp, "free algebra term outside window")
        return _normal_term(op, rp, op.compose(p, x, inners), args)

    def generator(self, a, g) -> Term:
        op = self.operad
        return Term(op.unit_profile(a), op.units[a], (g,))

    def extend(self, B: FiniteAlgebra, assignment: Mapping) -> AlgebraMap:
        """The algebra map determined by generator values ``assignment[(a, g)]``."""
        comps = {}
        for a in self.carriers:
            comps[a] = {}
            for t in self.carrier(a):
                vals = tuple(assignment[(c, g)] for c, g in zip(t.profile.inputs, t.args))
                comps[a][t] = B.act(t.profile, t.op, vals)
        return AlgebraMap(self, B, comps)

    def arguments(self, p):
        for elems in super().arguments(p):
            args = tuple(g for t in elems for g in t.args)
            if self._degree_ok(args) and self.operad.window.contains(
                    concat_profile(p, tuple((t.profile, t.op) for t in elems))):
                yield elems


def free_algebra(op: Operad, generators: Mapping, max_degree: int | None = None, **kw):
    return FreeAlgebra(op, generators, max_degree, **kw)


# induced algebras φ_!


class InducedAlgebra(FiniteAlgebra):
    """φ_! A = (Q ◁ f) ◁_P A: terms q(x_1..x_n) with q ∈ Q(f a..; b), x_j ∈ A_{a_j},
    glued along q∘φ(p)(x..) ~ q(p(x..)) and the symmetric relation.

    Needs an exact window on Q so that every term and relation is finite.
    """

    def __init__(self, phi: OperadMap, A: FiniteAlgebra, max_degree: int | None = None):
        Q, Pp = phi.target, phi.source
        self.phi, self.A = phi, A
        n_max = Q.window.max_arity if max_degree is None else max_degree
        if not Q.window.exact and max_degree is None:
            raise TruncationError(Profile((), None), "induction needs an exact target window")
        self.complete = Q.window.exact and n_max >= Q.window.max_arity
        pool = [(a, x) for a in sorted(Pp.colors, key=okey) for x in A.carrier(a)]
        by_fcolor = {}
        for a, x in pool:
            by_fcolor.setdefault(phi.f(a), []).append((a, x))
        terms = []
        for qp, q in Q.elements():
            if qp.arity > n_max:
                continue
            for args in itertools.product(*(by_fcolor.get(c, ()) for c in qp.inputs)):
                terms.append((qp, q, args))
        termset = set(terms)
        uf = UnionFind(terms)
        by_out = _by_output(Pp.collection)
        for qp, q, args in terms:
            for i in range(qp.arity - 1):
                s = P.transposition(qp.arity, i)
                uf.union((qp, q, args), (qp.permuted(s), Q.act(qp, s, q), P.permute(args, s)))
        # q∘φ(p..)(x..) ~ q(p(x..))
        for qp, q in Q.elements():
            if qp.arity > n_max:
                continue
            # colors c_j of P over the inputs of q
            choices = [[c for c in Pp.colors if phi.f(c) == b] for b in qp.inputs]
            for cs in itertools.product(*choices):
                for inners in _inner_choices(by_out, cs, n_max):
                    rp = concat_profile(Profile(cs, qp.output), inners)
                    frp = Profile(tuple(phi.f(a) for a in rp.inputs), qp.output)
                    if not Q.window.contains(frp):
                        continue
                    left = Q.compose(qp, q, tuple((phi.map_profile(ip), phi(ip, y))
                                                  for ip, y in inners))
                    for xs in itertools.product(*(A.carrier(a) for a in rp.inputs)):
                        args = tuple(zip(rp.inputs, xs))
                        k = 0
                        mids = []
                        for (ip, y), c in zip(inners, cs):
                            mids.append((c, A.act(ip, y, xs[k:k + ip.arity])))
                            k += ip.arity
                        lt, rt = (frp, left, args), (qp, q, tuple(mids))
                        if lt not in termset or rt not in termset:
                            continue
                        uf.union(lt, rt)
        best = {}
        for t in terms:
            r = uf[t]
            if r not in best or okey(t) < okey(best[r]):
                best[r] = t
        self._class = {t: best[uf[t]] for t in terms}
        carriers = {b: set() for b in Q.colors}
        for t, c in self._class.items():
            carriers[t[0].output].add(c)
        carriers = {b: sorted(v, key=okey) for b, v in carriers.items()}
        super().__init__(Q, carriers, self._act, f"φ!{A.name}", n_max)

    def _act(self, p, x, elems):
        Q = self.operad
        inners = tuple((t[0], t[1]) for t in elems)
        args = tuple(a for t in elems for a in t[2])
        rp = concat_profile(p, inners)
        t = (rp, Q.compose(p, x, inners), args)
        if t not in self._class:
            raise TruncationError(rp, "induced term outside the computed range")
        return self._class[t]

    def unit_map(self) -> dict:
        """A -> φ*φ_! A on elements: x ↦ [1_{f a}(x)]."""
        Q = self.operad
        out = {}
        for a in self.phi.source.colors:
            fa = self.phi.f(a)
            for x in self.A.carrier(a):
                out[(a, x)] = self._class[(Q.unit_profile(fa), Q.units[fa], ((a, x),))]
        return out


def induce(phi: OperadMap, A: FiniteAlgebra, max_degree: int | None = None) -> InducedAlgebra:
    return InducedAlgebra(phi, A, max_degree)


def induced_hom_bijection(phi: OperadMap, A: FiniteAlgebra, B: FiniteAlgebra):
    """Hom_Q(φ_!A, B) -> Hom_P(A, φ*B) by precomposing with the unit, checked bijective."""
    L = induce(phi, A)
    R = restrict(phi, B)
    left = hom_set(L, B)
    right = hom_set(A, R)
    unit = L.unit_map()
    images = set()
    for h in left:
        comps = {a: {x: h(phi.f(a), unit[(a, x)]) for x in A.carrier(a)}
                 for a in phi.source.colors}
        images.add(AlgebraMap(A, R, comps).key())
    return len(left), len(right), images == {g.key() for g in right}


# ---------------------------------------------------------------------------
# coproducts


class Coproduct(FiniteAlgebra):
    """⨿ A_i by the reflexive coequalizer P ◁ (⨿ P ◁ A_i) ⇉ P ◁ (⨿ A_i).

    Elements are terms p((i_1, x_1), ..., (i_n, x_n)).  A ``degree`` function
    on summand elements, together with ``max_degree``, truncates the terms;
    with a truncation the result is exact on the kept degrees provided the
    relations are homogeneous, which holds for multilinear tags.
    """

    def __init__(self, algebras, max_arity: int | None = None, keep=None, name: str = ""):
        self.summands = list(algebras)
        if not self.summands:
            raise ContractError("coproduct of no algebras: use initial_algebra")
        op = self.summands[0].operad
        n_max = op.window.max_arity if max_arity is None else max_arity
        self.keep = keep or (lambda args: True)
        self.exact = op.window.exact and n_max >= op.window.max_arity
        pools = {a: [(i, x) for i, A in enumerate(self.summands) for x in A.carrier(a)]
                 for a in op.colors}
        terms = []
        for p, x in op.elements():
            if p.arity > n_max:
                continue
            for args in itertools.product(*(pools[c] for c in p.inputs)):
                if self.keep(args):
                    terms.append((p, x, args))
        termset = set(terms)
        uf = UnionFind(terms)
        for p, x, args in terms:
            for i in range(p.arity - 1):
                s = P.transposition(p.arity, i)
                t = (p.permuted(s), op.act(p, s, x), P.permute(args, s))
                if t in termset:
                    uf.union((p, x, args), t)
        by_out = _by_output(op.collection)
        for p, x in op.elements():
            if p.arity > n_max:
                continue
            for inners in _inner_choices(by_out, p.inputs, n_max):
                rp = concat_profile(p, inners)
                if not op.window.contains(rp):
                    continue
                whole = op.compose(p, x, inners)
                # each inner operation acts inside a single summand
                for idx in itertools.product(range(len(self.summands)), repeat=p.arity):
                    blocks = [itertools.product(*(self.summands[i].carrier(c) for c in q.inputs))
                              for i, (q, _) in zip(idx, inners)]
                    for xs in itertools.product(*blocks):
                        args = tuple((i, e) for i, blk in zip(idx, xs) for e in blk)
                        if not self.keep(args):
                            continue
                        try:
                            mids = tuple((i, self.summands[i].act(q, y, blk))
                                         for i, (q, y), blk in zip(idx, inners, xs))
                        except TruncationError:
                            continue
                        lt, rt = (rp, whole, args), (p, x, mids)
                        if lt in termset and rt in termset:
                            uf.union(lt, rt)
        best = {}
        for t in terms:
            r = uf[t]
            if r not in best or okey(t) < okey(best[r]):
                best[r] = t
        self._class = {t: best[uf[t]] for t in terms}
        carriers = {a: set() for a in op.colors}
        for t, c in self._class.items():
            carriers[t[0].output].add(c)
        carriers = {a: sorted(v, key=okey) for a, v in carriers.items()}
        super().__init__(op, carriers, self._act, name or "⨿", n_max)

    def classify(self, t):
        return self._class[t]

    def _act(self, p, x, elems):
        op = self.operad
        inners = tuple((t[0], t[1]) for t in elems)
        args = tuple(a for t in elems for a in t[2])
        rp = concat_profile(p, inners)
        t = (rp, op.compose(p, x, inners), args)
        if t not in self._class:
            raise TruncationError(rp, "coproduct term outside the computed range")
        return self._class[t]

    def injection(self, i: int) -> AlgebraMap:
        op = self.operad
        A = self.summands[i]
        comps = {a: {x: self._class[(op.unit_profile(a), op.units[a], ((i, x),))]
                     for x in A.carrier(a)} for a in op.colors}
        return AlgebraMap(A, self, comps)

    def mediate(self, maps) -> AlgebraMap:
        """The unique map out of the coproduct restricting to ``maps[i]`` on summand i."""
        C = maps[0].target
        comps = {a: {} for a in self.carriers}
        for t, c in self._class.items():
            p, x, args = t
            val = C.act(p, x, tuple(maps[i](a, e) for a, (i, e) in zip(p.inputs, args)))
            prev = comps[p.output].setdefault(c, val)
            if prev != val:
                raise ContractError("cocone does not respect the coproduct relations")
        return AlgebraMap(self, C, comps)


def coproduct(algebras, max_arity: int | None = None, keep=None) -> Coproduct:
    return Coproduct(algebras, max_arity, keep)


# ---------------------------------------------------------------------------
# multilinear tags


@dataclass(frozen=True)
class TaggedComposite:
    """x applied to blocks (i_j, y_j, z-list) with its multilinear tag."""

    outer: object
    blocks: tuple  # ((i, y_profile, y, zs), ...)
    tag: str

    def sort_key(self):
        return (okey(self.outer), okey(tuple((i, y, zs) for i, _, y, zs in self.blocks)))


def multilinear_tag(blocks, k: int) -> str:
    """mul iff every Y-factor is unary and the index map is a bijection onto range(k)."""
    idx = [i for i, _, _, _ in blocks]
    unary = all(yp.arity == 1 for _, yp, _, _ in blocks)
    return "mul" if unary and sorted(idx) == list(range(k)) else "non"


def multilinear_decompose(X, Y, Zs, max_arity: int | None = None) -> dict:
    """Classes of X ◁ ⨿_i (Y ◁ Z_i) at nullary profiles, split by tag.

    ``X`` and ``Y`` are SymmetricCollections, ``Zs`` a list of per-color sets.
    Returns {"mul": [...], "non": [...]} of least class representatives.
    """
    if not Y.is_positive():
        raise ContractError("the middle collection must be positive")
    k = len(Zs)
    n_max = Y.window.max_arity if max_arity is None else max_arity
    # elements of ⨿_i (Y ◁ Z_i): (i, y profile, y, zs) up to the symmetric relation
    inner = []
    for i, Z in enumerate(Zs):
        for yp, y in Y.elements():
            if yp.arity > n_max:
                continue
            for zs in itertools.product(*(Z.get(c, ()) for c in yp.inputs)):
                inner.append((i, yp, y, tuple(zs)))

    def normal_inner(i, yp, y, zs):
        best = None
        for s in P.all_perms(yp.arity):
            cand = (i, yp.permuted(s), Y.act(yp, s, y), P.permute(zs, s))
            if best is None or okey(cand) < okey(best):
                best = cand
        return best

    inner = sorted({normal_inner(*b) for b in inner}, key=okey)
    by_color = {}
    for b in inner:
        by_color.setdefault(b[1].output, []).append(b)
    out = {"mul": set(), "non": set()}
    for xp, x in X.elements():
        for blocks in itertools.product(*(by_color.get(c, ()) for c in xp.inputs)):
            best = None
            for s in P.all_perms(xp.arity):
                cand = (X.act(xp, s, x), P.permute(blocks, s))
                if best is None or okey(cand) < okey(best):
                    best = cand
            t = TaggedComposite(best[0], tuple(best[1]), multilinear_tag(best[1], k))
            out[t.tag].add(t)
    return {tag: sorted(v, key=TaggedComposite.sort_key) for tag, v in out.items()}


# ---------------------------------------------------------------------------
# random algebras for the sampled suites


def vertex_count(x) -> int:
    g = getattr(x, "graph", x)
    return len(getattr(g, "valences", ()))


def graph_shift(c: int = 1, c2: int = 0):
    """c·(vertices - 1) + c2·(first Betti number); additive along substitution."""
    from .graphs import first_betti

    def shift(x):
        g = getattr(x, "graph", x)
        return c * (vertex_count(g) - 1) + (c2 * first_betti(g) if c2 else 0)

    return shift


def additive_algebra(op: Operad, k: int, shift=None, colors=None, name: str = "") -> FiniteAlgebra:
    """Carriers Z/k; an operation x acts by summing and adding shift(x).

    ``shift`` must satisfy shift(x∘(y..)) = shift(x) + Σ shift(y) and vanish
    on units, so that the action is associative and unital.
    """
    shift = shift or graph_shift(0)
    colors = op.colors if colors is None else colors
    carriers = {a: tuple(range(k)) if a in colors else () for a in op.colors}

    def act(p, x, elems):
        return (sum(elems) + shift(x)) % k

    return FiniteAlgebra(op, carriers, act, name or f"Z{k}")


def random_additive_algebra(op: Operad, rng: random.Random, max_size: int = 3,
                            betti: bool = False) -> FiniteAlgebra:
    k = rng.randint(1, max_size)
    c, c2 = rng.randrange(k), rng.randrange(k) if betti else 0
    return additive_algebra(op, k, graph_shift(c, c2), name=f"Z{k}[{c},{c2}]")


def monoid_algebra(op: Operad, elements, mult, unit, color=2, name: str = "") -> FiniteAlgebra:
    """A monoid as an algebra over a linear-tree operad: multiply along the chain."""
    from .graphs import chain_order

    def act(p, x, elems):
        r = unit
        for v in chain_order(getattr(x, "graph", x)):
            r = mult(r, elems[v])
        return r

    return FiniteAlgebra(op, {color: tuple(elements)}, act, name or "monoid")


# ---------------------------------------------------------------------------
# the multilinear summand of the comparison map


@dataclass
class SummandResult:
    colors: tuple  # (b_1..b_n)
    output: object  # a
    status: str  # "bijective", "fails" or "incomplete"
    n_classes: int = 0
    n_targets: int = 0
    unhit: list = None
    collisions: list = None
    agrees: bool | None = None  # matches the extension morphism class by class
    reasons: list = None


def _multilinear_terms(phi: OperadMap, bs, a, all_wirings: bool = True):
    """Terms p((σ_1, t_1)..(σ_n, t_n)) of ⨿ φ*F_Q(b_i) at a of multidegree (1..1).

    Each t_j is a degree-one element of the free algebra on x_{σ_j}, that is
    a unary Q-operation b_{σ_j} -> f c_j applied to the generator.  With
    ``all_wirings`` false only σ = identity is kept.
    """
    Pp, Q = phi.source, phi.target
    n = len(bs)
    unary = {}
    for qp, q in Q.elements():
        if qp.arity == 1:
            unary.setdefault((qp.inputs[0], qp.output), []).append((qp, q))
    terms = []
    for pp in Pp.profiles():
        if pp.output != a or pp.arity != n:
            continue
        for s in (P.all_perms(n) if all_wirings else [tuple(range(n))]):
            pools = []
            for j, c in enumerate(pp.inputs):
                i = s[j]
                pools.append([(i, Term(qp, q, (i,))) for qp, q in unary.get((bs[i], phi.f(c)), ())])
            if any(not pool for pool in pools):
                continue
            for p in Pp.carrier(pp):
                for args in itertools.product(*pools):
                    terms.append((pp, p, args))
    return terms, unary


def comparison_summand_check(phi: OperadMap, bs, a, ext=None,
                              all_wirings: bool = False) -> SummandResult:
    """Compare the multilinear summand of ⨿ φ*F_Q(b_i) -> φ*⨿ F_Q(b_i) at a with
    the extension morphism at (b..; a).

    The coproduct classes are computed independently of the extension module:
    terms with every wiring are glued by the symmetric relation and by moving
    unary P-operations into the summands.  ``ext`` (an ExtensionMorphism) is
    only used for the class-by-class comparison at the end.

    Permuting inputs acts freely and transitively on the wirings of a term,
    and moving unary operations keeps the wiring, so by default only terms
    wired in order are built.  ``all_wirings`` builds every wiring and glues
    them by transpositions instead.
    """
    from .extension import ExtensionMorphism

    Pp, Q = phi.source, phi.target
    if any(pr.arity == 0 for pr in Pp.profiles()) or any(pr.arity == 0 for pr in Q.profiles()):
        raise ContractError("the comparison summand needs positive operads")
    bs = tuple(bs)
    n = len(bs)
    terms, unary = _multilinear_terms(phi, bs, a, all_wirings)
    index = {t: i for i, t in enumerate(terms)}
    reasons = []
    if not phi.colors_complete:
        reasons.append("source colors truncated")
    uf = UnionFind(range(len(terms)))
    unary_P = {}
    # moving a generating set of unary operations glues the same classes
    for pr, u in unary_generators(Pp):
        unary_P.setdefault(pr.output, []).append((pr, u))
    # (u, b) -> {φ(u)∘q: [q..]} over unary q: b -> f(source of u)
    factors = {}

    def preimages(up, u, b):
        key = (up, u, b)
        if key not in factors:
            fu, fp = phi(up, u), phi.map_profile(up)
            idx = {}
            for qp, q in unary.get((b, phi.f(up.inputs[0])), ()):
                idx.setdefault(Q.compose(fp, fu, ((qp, q),)), []).append((qp, q))
            factors[key] = idx
        return factors[key]

    for pp, p, args in terms:
        for k in range(n - 1 if all_wirings else 0):
            s = P.transposition(n, k)
            other = (pp.permuted(s), Pp.act(pp, s, p), P.permute(args, s))
            uf.union(index[(pp, p, args)], index[other])
        # p∘_j u applied to t ~ p applied to u·t
        for j, (i, t) in enumerate(args):
            c = pp.inputs[j]
            for up, u in unary_P.get(c, ()):
                c0 = up.inputs[0]
                pp0 = Profile(pp.inputs[:j] + (c0,) + pp.inputs[j + 1:], a)
                if not Pp.window.contains(pp0):
                    reasons.append(f"source profile {pp0} outside window")
                    continue
                for qp, q in preimages(up, u, bs[i]).get(t.op, ()):
                    lhs = (pp0, Pp.partial(pp, p, j, up, u),
                           args[:j] + ((i, Term(qp, q, (i,))),) + args[j + 1:])
                    if lhs not in index:
                        reasons.append(f"related term outside window at {pp0}")
                        continue
                    uf.union(index[lhs], index[(pp, p, args)])
    best = {}
    for i, t in enumerate(terms):
        # terms come in a fixed order, so the first one met is a stable representative
        best.setdefault(uf[i], t)
    classes = sorted(set(best.values()), key=okey)
    fa = phi.f(a)
    qp_target = Profile(bs, fa)
    gens = tuple(range(n))

    def image(t):
        pp, p, args = t
        inners = tuple((s.profile, s.op) for _, s in args)
        r = Q.compose(phi.map_profile(pp), phi(pp, p), inners)
        return _ordered_term(Q, Profile(tuple(bs[i] for i, _ in args), fa), r,
                            tuple(i for i, _ in args))

    targets = [_ordered_term(Q, qp_target, q, gens) for q in Q.carrier(qp_target)] \
        if Q.window.contains(qp_target) else []
    if not Q.window.contains(qp_target):
        reasons.append(f"target profile {qp_target} outside window")
    hits = {}
    for t in classes:
        hits.setdefault(image(t), []).append(t)
    unhit = sorted({x for x in targets if x not in hits}, key=Term.sort_key)
    coll = [(x, ts) for x, ts in hits.items() if len(ts) > 1]
    if reasons:
        status = "incomplete"
    else:
        status = "fails" if unhit or coll else "bijective"
    res = SummandResult(bs, a, status, len(classes), len(targets), unhit, coll, None,
                        sorted(set(reasons)))
    # class-by-class comparison with the extension morphism
    ext = ext or ExtensionMorphism(phi, profiles=[Profile(bs, a)])
    tp = Profile(bs, a)
    try:
        ext_classes = ext.classes(tp)
    except TruncationError:
        return res
    seen = set()
    agrees = True
    for e in ext_classes:
        t = (e.outer_profile, e.outer,
             tuple((j, Term(pr, q, (j,))) for j, (pr, q) in enumerate(e.inners)))
        if t not in index:
            agrees = False
            break
        cls = best[uf[index[t]]]
        if cls in seen or image(cls) != _ordered_term(Q, qp_target, ext(e), gens):
            agrees = False
            break
        seen.add(cls)
    res.agrees = agrees and len(seen) == len(classes)
    res.ext_unhit = None
    try:
        er = ext.result(tp)
        res.ext_unhit = sorted({_ordered_term(Q, qp_target, q, gens) for q in er.unhit},
                               key=Term.sort_key)
    except TruncationError:
        pass
    return res
