"""The right adjoint to restriction along a categorical extension.

An element of φ_*A at a color b is a family g = (g_a) of functions
Q(b; f a) -> A_a that is natural in the unary operations of P:
g_{a'}(φ(u)∘q) = u·g_a(q).  Families are stored as explicit tables.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .algebras import AlgebraMap, FiniteAlgebra, hom_set, restrict
from .collections import ContractError, DomainError, Profile, TruncationError
from .extension import ExtensionMorphism
from .operads import Operad, OperadMap, underlying_map
from .perm import okey


@dataclass(frozen=True)
class Family:
    base: object
    table: tuple  # (((a, q), value), ...) sorted by key
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(self.table))

    @classmethod
    def of(cls, base, values: dict) -> "Family":
        return cls(base, tuple(sorted(values.items(), key=lambda kv: okey(kv[0]))))

    def __call__(self, a, q):
        return self._lookup[(a, q)]

    def name(self) -> str:
        text = repr((self.base, [(str(a), str(q), str(v)) for (a, q), v in self.table]))
        return "fam" + hashlib.sha1(text.encode()).hexdigest()[:10]

    def __str__(self):
        return self.name()

    __repr__ = __str__


class UnaryData:
    """Unary structure used by the end condition for a map φ and a P-algebra A."""

    def __init__(self, phi: OperadMap, A: FiniteAlgebra):
        self.phi, self.A = phi, A
        P, Q = phi.source, phi.target
        self.unary_P = [(pr, u) for pr, u in P.elements() if pr.arity == 1]
        self.unary_Q = {}
        for pr, q in Q.elements():
            if pr.arity == 1:
                self.unary_Q.setdefault(pr.inputs[0], []).append((pr, q))

    def nodes(self, b) -> list:
        """(a, q) with q ∈ Q(b; f a), after checking the window holds all of them."""
        phi = self.phi
        _, ok = phi.target.unary_targets(b)
        if not ok:
            missing = phi.target.unary_missing(b)
            if missing is None or any(phi.may_hit(c) for c in missing):
                raise TruncationError(Profile((b,), None), "unary targets truncated")
        if not phi.colors_complete:
            raise TruncationError(Profile((b,), None), "source colors truncated")
        out = []
        for pr, q in self.unary_Q.get(b, ()):
            for a in phi.preimage(pr.output):
                out.append((a, q))
        return sorted(out, key=okey)

    def edges(self, b, nodes) -> dict:
        """node -> [(node', unary P-operation)] along q ↦ φ(u)∘q."""
        phi, Q = self.phi, self.phi.target
        present = set(nodes)
        out = {n: [] for n in nodes}
        for a, q in nodes:
            qp = Profile((b,), phi.f(a))
            for up, u in self.unary_P:
                if up.inputs[0] != a:
                    continue
                r = Q.compose(phi.map_profile(up), phi(up, u), ((qp, q),))
                m = (up.output, r)
                if m not in present:
                    raise TruncationError(up, "unary composite outside window")
                out[(a, q)].append((m, (up, u)))
        return out


def enumerate_families(data: UnaryData, b) -> list:
    """All families over b satisfying the end condition."""
    A = data.A
    nodes = data.nodes(b)
    edges = data.edges(b, nodes)
    found = []

    def propagate(assign, start):
        stack = [start]
        while stack:
            n = stack.pop()
            v = assign[n]
            for m, (up, u) in edges[n]:
                w = A.act(up, u, (v,))
                if m in assign:
                    if assign[m] != w:
                        return False
                else:
                    assign[m] = w
                    stack.append(m)
        return True

    def go(i, assign):
        while i < len(nodes) and nodes[i] in assign:
            i += 1
        if i == len(nodes):
            found.append(Family.of(b, assign))
            return
        n = nodes[i]
        for v in A.carrier(n[0]):
            trial = dict(assign)
            trial[n] = v
            if propagate(trial, n):
                go(i + 1, trial)

    go(0, {})
    return sorted(found, key=lambda g: okey(g.table))


def check_end_condition(data: UnaryData, g: Family) -> list:
    bad = []
    nodes = data.nodes(g.base)
    for n, outs in data.edges(g.base, nodes).items():
        for m, (up, u) in outs:
            if data.A.act(up, u, (g(*n),)) != g(*m):
                bad.append((n, m, u))
    return bad


class Factorizer:
    """Inverse of the extension morphism, profile by profile."""

    def __init__(self, phi: OperadMap, ext: ExtensionMorphism | None = None):
        self.phi = phi
        self.ext = ext or ExtensionMorphism(phi)
        self._inv = {}

    def __call__(self, tp: Profile, q):
        inv = self._inv.get(tp)
        if inv is None:
            res = self.ext.result(tp)
            if res.status != "bijective":
                raise ContractError(f"no factorization table at {tp}: {res.status}")
            inv = {self.ext(e): e for e in self.ext.classes(tp)}
            self._inv[tp] = inv
        try:
            return inv[q]
        except KeyError:
            raise DomainError(f"{q} is not an operation at {tp}") from None


def q_action(phi: OperadMap, fact: Factorizer, data: UnaryData, mup: Profile, mu, families):
    """The family μ·(g_1..g_n) on the output color of ``mup``.

    For q ∈ Q(b; f a), q∘μ factors as φ(p)∘(q_1..q_n) and the new value is
    p acting on (g_1(q_1)..g_n(q_n)).
    """
    Q, A = phi.target, data.A
    b = mup.output
    if len(families) != mup.arity:
        raise DomainError("one family per input of μ")
    values = {}
    for a, q in data.nodes(b):
        qp = Profile((b,), phi.f(a))
        rp = Profile(mup.inputs, phi.f(a))
        if not Q.window.contains(rp):
            raise TruncationError(rp, "q∘μ outside window")
        r = Q.compose(qp, q, ((mup, mu),))
        e = fact(Profile(mup.inputs, a), r)
        args = tuple(g(c, qj) for g, c, (_, qj) in zip(families, e.outer_profile.inputs, e.inners))
        values[(a, q)] = A.act(e.outer_profile, e.outer, args)
    return Family.of(b, values)


def _underlying_algebra(op_under: Operad, A: FiniteAlgebra) -> FiniteAlgebra:
    return FiniteAlgebra(op_under, A.carriers, lambda p, x, e: A.act(p, x, e),
                         f"⌞{A.name}⌟", 1)


def _precompose_action(phi: OperadMap, data: UnaryData):
    """Unary Q-operations act on families by precomposition."""
    Q = phi.target

    def act(p, v, elems):
        (g,) = elems
        b2 = p.output
        values = {}
        for a, q in data.nodes(b2):
            values[(a, q)] = g(a, Q.compose(Profile((b2,), phi.f(a)), q, ((p, v),)))
        return Family.of(b2, values)

    return act


def _families_algebra(phi: OperadMap, A: FiniteAlgebra, fact, max_arity=None):
    data = UnaryData(phi, A)
    carriers = {b: enumerate_families(data, b) for b in phi.target.colors}
    if fact is None:
        alg = FiniteAlgebra(phi.target, carriers, _precompose_action(phi, data),
                            f"⌞φ⌟*{A.name}", 1)
    else:
        def act(p, mu, elems):
            return q_action(phi, fact, data, p, mu, elems)

        n_max = phi.target.window.max_arity if max_arity is None else max_arity
        alg = FiniteAlgebra(phi.target, carriers, act, f"φ*{A.name}", n_max)
        alg.factorizer = fact
    alg.data = data
    return alg


def underlying_mapping(phi: OperadMap) -> OperadMap:
    uphi = underlying_map(phi)
    uphi.colors_complete = phi.colors_complete
    uphi.image_test = phi.image_test
    return uphi


def underlying_right_adjoint(phi: OperadMap, A: FiniteAlgebra, uphi: OperadMap | None = None):
    """⌞φ⌟_*A over the underlying category of Q; ``A`` is an algebra over P."""
    uphi = uphi or underlying_mapping(phi)
    return _families_algebra(uphi, _underlying_algebra(uphi.source, A), None)


def phi_star(phi: OperadMap, A: FiniteAlgebra, fact: Factorizer | None = None,
             max_arity: int | None = None) -> FiniteAlgebra:
    """φ_*A over Q: the families with the action through factorizations."""
    return _families_algebra(phi, A, fact or Factorizer(phi), max_arity)


# ---------------------------------------------------------------------------
# the adjunction


def counit(phi: OperadMap, A: FiniteAlgebra, RA: FiniteAlgebra) -> AlgebraMap:
    """ε: φ*φ_*A -> A, evaluation at the unit."""
    Q = phi.target
    src = restrict(phi, RA)
    comps = {a: {g: g(a, Q.units[phi.f(a)]) for g in src.carrier(a)} for a in phi.source.colors}
    return AlgebraMap(src, A, comps)


def unit(phi: OperadMap, B: FiniteAlgebra, RB: FiniteAlgebra, data: UnaryData) -> AlgebraMap:
    """η: B -> φ_*φ*B, y ↦ (q ↦ q·y)."""
    comps = {}
    for b in B.carriers:
        comps[b] = {}
        nodes = data.nodes(b)
        for y in B.carrier(b):
            vals = {(a, q): B.act(Profile((b,), phi.f(a)), q, (y,)) for a, q in nodes}
            comps[b][y] = Family.of(b, vals)
    return AlgebraMap(B, RB, comps)


def push_forward(h: AlgebraMap, RA: FiniteAlgebra, RA2: FiniteAlgebra) -> AlgebraMap:
    """φ_*(h) for a P-algebra map h: apply h to every value of a family."""
    comps = {b: {g: Family.of(b, {k: h(k[0], v) for k, v in g.table}) for g in RA.carrier(b)}
             for b in RA.carriers}
    return AlgebraMap(RA, RA2, comps)


@dataclass
class AdjunctionReport:
    name: str
    checks: dict = field(default_factory=dict)  # check name -> list of problems
    counts: tuple = (0, 0)

    @property
    def ok(self) -> bool:
        return all(not v for v in self.checks.values())

    def lines(self) -> list:
        out = [f"# adjunction for {self.name}"]
        for k, v in self.checks.items():
            out.append(f"{k} {'pass' if not v else 'fail'}" + (f" {v[0]}" if v else ""))
        out.append(f"hom-counts {self.counts[0]} {self.counts[1]}")
        return out


def _same(f: AlgebraMap, g: AlgebraMap) -> bool:
    return all(f.components[a].get(x) == g.components[a].get(x)
               for a in f.components for x in f.components[a])


def verify_adjunction(phi: OperadMap, A: FiniteAlgebra, B: FiniteAlgebra,
                      underlying: bool = False, fact: Factorizer | None = None,
                      limit: int | None = None) -> AdjunctionReport:
    """Counit and unit are algebra maps, the triangle identities hold, and the
    hom-sets Hom_P(φ*B, A) and Hom_Q(B, φ_*A) correspond through them."""
    if underlying:
        mp = underlying_mapping(phi)
        A = _underlying_algebra(mp.source, A)
        B = _underlying_algebra(mp.target, B)
        build = lambda X: _families_algebra(mp, X, None)
    else:
        mp = phi
        fact = fact or Factorizer(phi)
        build = lambda X: _families_algebra(phi, X, fact)
    rep = AdjunctionReport(phi.name + (" (underlying)" if underlying else ""))
    RA = build(A)
    eps = counit(mp, A, RA)
    rep.checks["counit"] = eps.check()
    fB = restrict(mp, B)
    RfB = build(fB)
    eta = unit(mp, B, RfB, RfB.data)
    rep.checks["unit"] = eta.check()
    # triangle identities
    eps_fB = counit(mp, fB, RfB)
    f_eta = AlgebraMap(fB, restrict(mp, RfB),
                       {a: dict(eta.components[mp.f(a)]) for a in mp.source.colors})
    tri1 = [(a, x) for a in fB.carriers for x in fB.carrier(a)
            if eps_fB(a, f_eta(a, x)) != x]
    RRA = build(restrict(mp, RA))
    eta_RA = unit(mp, RA, RRA, RRA.data)
    push_eps = push_forward(eps, RRA, RA)
    tri2 = [(b, g) for b in RA.carriers for g in RA.carrier(b)
            if push_eps(b, eta_RA(b, g)) != g]
    rep.checks["triangle"] = tri1 + tri2
    # hom-set bijection realized by the unit and counit
    left = hom_set(fB, A, limit)
    right = hom_set(B, RA, limit)
    rep.counts = (len(left), len(right))
    problems = []
    if len(left) != len(right):
        problems.append(("counts", len(left), len(right)))
    right_keys = {k.key() for k in right}
    for h in left:
        sharp = eta.then(push_forward(h, RfB, RA))
        if sharp.key() not in right_keys:
            problems.append(("sharp-missing", h.key()))
            continue
        back = AlgebraMap(fB, A, {a: {x: eps(a, sharp(mp.f(a), x)) for x in fB.carrier(a)}
                                  for a in mp.source.colors})
        if not _same(back, h):
            problems.append(("round-trip", h.key()))
    rep.checks["hom-bijection"] = problems
    return rep
