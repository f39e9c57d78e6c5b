"""Colored operads over finite sets, operad maps, and their law checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import perm as P
from .collections import (
    CollectionMap, ColorSet, CompositeElement, CompositeProduct, ContractError, DomainError,
    Profile, SymmetricCollection, TruncationError, TruncationWindow, _by_output,
    _inner_choices, associator, associator_inverse, whisker_left, whisker_right,
)


@dataclass(frozen=True)
class GradingCertificate:
    """A relation every nonempty carrier profile must satisfy."""

    description: str
    relation: Callable[[Profile], bool] = field(compare=False)

    def violations(self, operad: "Operad") -> list:
        return [p for p in operad.profiles() if not self.relation(p)]


@dataclass
class LawReport:
    violations: list = field(default_factory=list)
    overflow: int = 0
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind, *detail):
        self.violations.append((kind, *detail))

    def merge(self, other: "LawReport") -> "LawReport":
        self.violations.extend(other.violations)
        self.overflow += other.overflow
        self.checked += other.checked
        return self

    def summary(self) -> str:
        state = "pass" if self.ok else f"fail ({len(self.violations)} violations)"
        return f"{state}; {self.checked} instances; {self.overflow} beyond window"


def concat_profile(p: Profile, inners) -> Profile:
    return Profile(tuple(c for q, _ in inners for c in q.inputs), p.output)


class Operad:
    """An operad given by a collection, units and full simultaneous substitution.

    ``compose`` is either a callable ``(profile, outer, inners) -> element``
    where ``inners`` is a tuple of ``(profile, element)`` pairs, or a table
    keyed by ``(profile, outer, inners)``.
    """

    def __init__(self, collection: SymmetricCollection, units: Mapping, compose,
                 name: str = "", grading: GradingCertificate | None = None,
                 unary_info: Callable | None = None):
        self.collection = collection
        self.units = dict(units)
        self.name = name or collection.name
        self.grading = grading
        self._unary_info = unary_info
        if callable(compose):
            self._compose_fn, self._table = compose, None
        else:
            self._compose_fn, self._table = None, dict(compose)
        self._cache = {}

    # delegation to the collection
    @property
    def window(self) -> TruncationWindow:
        return self.collection.window

    @property
    def colors(self) -> ColorSet:
        return self.window.colors_in

    def carrier(self, p):
        return self.collection.carrier(p)

    def has(self, p, x):
        return self.collection.has(p, x)

    def act(self, p, s, x):
        return self.collection.act(p, s, x)

    def profiles(self):
        return self.collection.profiles()

    def elements(self):
        return self.collection.elements()

    def unit(self, a):
        return self.units[a]

    def unit_profile(self, a) -> Profile:
        return Profile((a,), a)

    # substitution
    def compose(self, p: Profile, x, inners) -> object:
        inners = tuple(inners)
        key = (p, x, inners)
        r = self._cache.get(key)
        if r is not None:
            return r
        if len(inners) != p.arity:
            raise DomainError(f"{len(inners)} inner operations for arity {p.arity}")
        for c, (q, _) in zip(p.inputs, inners):
            if q.output != c:
                raise DomainError(f"inner output {q.output} does not match input color {c}")
        rp = concat_profile(p, inners)
        if self.window.classify(rp) == "empty":
            raise ContractError(f"{self.name}: substitution leaves the exact window at {rp}")
        if self._compose_fn is not None:
            r = self._compose_fn(p, x, inners)
        else:
            r = self._table.get(key)
            if r is None:
                raise ContractError(f"{self.name}: no substitution entry for {x}{inners} at {p}")
        self._cache[key] = r
        return r

    def result_profile(self, p: Profile, inners) -> Profile:
        return concat_profile(p, inners)

    def partial(self, p: Profile, x, i: int, q: Profile, y):
        inners = [(self.unit_profile(c), self.units[c]) for c in p.inputs]
        inners[i] = (q, y)
        return self.compose(p, x, inners)

    def mu(self, e: CompositeElement):
        """Multiplication on a composite of this operad with itself."""
        r = self.compose(e.outer_profile, e.outer, e.inners)
        rp = concat_profile(e.outer_profile, e.inners)
        order = [pos for block in e.leaves for pos in block]
        return self.act(rp, P.inverse(order), r)

    # unary reachability, used to decide whether truncated computations are complete
    def unary_sources(self, color):
        """Colors ``c`` with a unary operation ``c -> color``, and a completeness flag."""
        if self._unary_info is not None:
            return self._unary_info(color, "in")
        found = {p.inputs[0] for p in self.profiles() if p.arity == 1 and p.output == color}
        return found, self.window.closed_colors

    def unary_targets(self, color):
        """Colors ``c`` with a unary operation ``color -> c``, and a completeness flag."""
        if self._unary_info is not None:
            return self._unary_info(color, "out")
        found = {p.output for p in self.profiles() if p.arity == 1 and p.inputs[0] == color}
        return found, self.window.closed_colors

    def unary_missing(self, color):
        """Colors reached from ``color`` by unary operations the window cuts off,
        or None when unknown."""
        if self._unary_info is not None:
            return self._unary_info(color, "missing")
        return set() if self.window.closed_colors else None

    def __repr__(self):
        return f"<Operad {self.name}>"


def _in_window(op: Operad, p: Profile) -> bool:
    return op.window.contains(p)


def check_operad_laws(op: Operad, associativity: bool = True) -> LawReport:
    """Exhaustive unit, equivariance and associativity check inside the window."""
    rep = LawReport()
    N = op.window.max_arity
    by_out = _by_output(op.collection)
    units = {a: (op.unit_profile(a), u) for a, u in op.units.items()}
    for a, (up, u) in units.items():
        if not op.has(up, u):
            rep.add("unit-missing", a, u)
    for p, x in op.elements():
        # unit laws
        try:
            ins = tuple(units[c] for c in p.inputs)
            rep.checked += 2
            if op.compose(p, x, ins) != x:
                rep.add("right-unit", p, x)
            if op.compose(units[p.output][0], units[p.output][1], ((p, x),)) != x:
                rep.add("left-unit", p, x)
        except KeyError as e:
            rep.add("unit-missing", e.args[0])
        except (ContractError, DomainError) as err:
            rep.add("undefined", p, x, str(err))
        for inners in _inner_choices(by_out, p.inputs, N):
            rp = concat_profile(p, inners)
            if not _in_window(op, rp):
                rep.overflow += 1
                continue
            rep.checked += 1
            try:
                r = op.compose(p, x, inners)
            except (ContractError, DomainError) as err:
                rep.add("undefined", p, x, inners, str(err))
                continue
            if not op.has(rp, r):
                rep.add("lands-outside", p, x, inners, r)
                continue
            sizes = [q.arity for q, _ in inners]
            # outer equivariance
            for i in range(p.arity - 1):
                s = P.transposition(p.arity, i)
                lhs = op.compose(p.permuted(s), op.act(p, s, x), P.permute(inners, s))
                rhs = op.act(rp, P.block_perm(sizes, s), r)
                if lhs != rhs:
                    rep.add("outer-equivariance", p, x, inners, s)
            # inner equivariance
            for j, (q, y) in enumerate(inners):
                for i in range(q.arity - 1):
                    t = P.transposition(q.arity, i)
                    moved = list(inners)
                    moved[j] = (q.permuted(t), op.act(q, t, y))
                    lhs = op.compose(p, x, tuple(moved))
                    perms = [tuple(range(k)) for k in sizes]
                    perms[j] = t
                    rhs = op.act(rp, P.block_sum(perms), r)
                    if lhs != rhs:
                        rep.add("inner-equivariance", p, x, inners, j, t)
            if not associativity:
                continue
            for outers in _inner_choices(by_out, rp.inputs, N):
                fp = concat_profile(rp, outers)
                if not _in_window(op, fp):
                    rep.overflow += 1
                    continue
                mids = []
                k = 0
                fine = True
                for (q, y) in inners:
                    block = outers[k:k + q.arity]
                    k += q.arity
                    mp = concat_profile(q, block)
                    if not _in_window(op, mp):
                        fine = False
                        break
                    mids.append((mp, block))
                if not fine:
                    rep.overflow += 1
                    continue
                rep.checked += 1
                try:
                    lhs = op.compose(rp, r, outers)
                    mids = [(mp, op.compose(q, y, block)) for (q, y), (mp, block) in zip(inners, mids)]
                    rhs = op.compose(p, x, tuple(mids))
                except (ContractError, DomainError) as err:
                    rep.add("undefined", p, x, inners, outers, str(err))
                    continue
                if lhs != rhs:
                    rep.add("associativity", p, x, inners, outers)
    if op.grading is not None:
        for bad in op.grading.violations(op):
            rep.add("grading", bad)
    for bad in op.collection.check_action_laws(exhaustive_pairs=False):
        rep.add("action", *bad)
    return rep


# ---------------------------------------------------------------------------
# maps


class OperadMap:
    """A color function plus componentwise maps ``P(a..; a) -> Q(f a..; f a)``."""

    def __init__(self, source: Operad, target: Operad, color_map, component, name: str = ""):
        self.source = source
        self.target = target
        self._cmap = color_map if callable(color_map) else dict(color_map).__getitem__
        if callable(component):
            self._fn, self._table = component, None
        else:
            self._fn, self._table = None, dict(component)
        self.name = name or f"{source.name}->{target.name}"
        self._cache = {}
        # whether every source color over an in-window target color lies in
        # the source window; builders that know better override this
        self.colors_complete = source.window.closed_colors
        # whether a target color may lie in the image of the color function;
        # None means unknown, so any color might
        self.image_test = None

    def f(self, a):
        return self._cmap(a)

    def map_profile(self, p: Profile) -> Profile:
        return Profile(tuple(self._cmap(a) for a in p.inputs), self._cmap(p.output))

    def __call__(self, p: Profile, x):
        key = (p, x)
        r = self._cache.get(key)
        if r is None:
            if not self.source.has(p, x):
                raise DomainError(f"{x!r} is not in {self.source.name}{p}")
            r = self._fn(p, x) if self._fn is not None else self._table[key]
            self._cache[key] = r
        return r

    def color_table(self) -> dict:
        return {a: self.f(a) for a in self.source.colors}

    def is_color_injective(self) -> bool:
        vals = [self.f(a) for a in self.source.colors]
        return len(set(vals)) == len(vals)

    def may_hit(self, b) -> bool:
        if b in self.target.colors:
            return bool(self.preimage(b)) or not self.colors_complete
        return self.image_test is None or self.image_test(b)

    def preimage(self, b):
        return [a for a in self.source.colors if self.f(a) == b]

    def __repr__(self):
        return f"<OperadMap {self.name}>"


def identity_map(op: Operad) -> OperadMap:
    return OperadMap(op, op, lambda a: a, lambda p, x: x, f"id_{op.name}")


def compose_maps(phi: OperadMap, psi: OperadMap) -> OperadMap:
    """``psi ∘ phi``."""
    return OperadMap(phi.source, psi.target, lambda a: psi.f(phi.f(a)),
                     lambda p, x: psi(phi.map_profile(p), phi(p, x)), f"{psi.name}∘{phi.name}")


def check_map_laws(phi: OperadMap) -> LawReport:
    rep = LawReport()
    S, T = phi.source, phi.target
    N = S.window.max_arity
    by_out = _by_output(S.collection)
    for a, u in S.units.items():
        rep.checked += 1
        if phi(S.unit_profile(a), u) != T.units.get(phi.f(a)):
            rep.add("unit", a)
    for p, x in S.elements():
        fp = phi.map_profile(p)
        y = phi(p, x)
        try:
            T.window.classify(fp)
        except TruncationError:
            rep.overflow += 1
            continue
        if not T.has(fp, y):
            rep.add("lands-outside", p, x, y)
            continue
        for i in range(p.arity - 1):
            s = P.transposition(p.arity, i)
            rep.checked += 1
            if phi(p.permuted(s), S.act(p, s, x)) != T.act(fp, s, y):
                rep.add("equivariance", p, x, s)
        for inners in _inner_choices(by_out, p.inputs, N):
            rp = concat_profile(p, inners)
            if not S.window.contains(rp):
                rep.overflow += 1
                continue
            frp = phi.map_profile(rp)
            if not T.window.contains(frp):
                rep.overflow += 1
                continue
            lhs = phi(rp, S.compose(p, x, inners))
            rhs = T.compose(fp, y, tuple((phi.map_profile(q), phi(q, z)) for q, z in inners))
            rep.checked += 1
            if lhs != rhs:
                rep.add("composition", p, x, inners)
    return rep


# ---------------------------------------------------------------------------
# derived operads


def underlying_category(op: Operad) -> Operad:
    """The arity-one part, as an operad with nothing outside arity one."""
    w = op.window
    win = TruncationWindow(w.colors_in, w.colors_out, 1, True, w.closed_colors,
                           w.max_weight, w.weight)
    carriers = {p: op.carrier(p) for p in op.profiles() if p.arity == 1}
    coll = SymmetricCollection(win, carriers, None, f"⌞{op.name}⌟")
    return Operad(coll, op.units, op.compose, f"⌞{op.name}⌟", unary_info=op._unary_info
                  if op._unary_info is not None else None)


def unary_generators(op: Operad) -> list:
    """Unary operations generating all others under composition, identities left out.

    Composites that fall outside the window are not elements, so they are skipped."""
    reached = {(op.unit_profile(a), op.unit(a)) for a in op.colors}
    by_input, by_output = {}, {}
    for p, u in reached:
        by_input.setdefault(p.inputs[0], []).append((p, u))
        by_output.setdefault(p.output, []).append((p, u))
    gens = []

    def add(p, u):
        reached.add((p, u))
        by_input.setdefault(p.inputs[0], []).append((p, u))
        by_output.setdefault(p.output, []).append((p, u))

    for p, u in op.elements():
        if p.arity != 1 or (p, u) in reached:
            continue
        gens.append((p, u))
        add(p, u)
        frontier = [(p, u)]
        while frontier:
            y = frontier.pop()
            pairs = [(y, z) for z in list(by_output.get(y[0].inputs[0], ()))]
            pairs += [(z, y) for z in list(by_input.get(y[0].output, ()))]
            for (po, o), (pi, i) in pairs:
                try:
                    r = op.compose(po, o, ((pi, i),))
                except TruncationError:
                    continue
                key = (Profile(pi.inputs, po.output), r)
                if key not in reached:
                    add(*key)
                    frontier.append(key)
    return gens


def positivize(op: Operad):
    """The positive part and its inclusion map."""
    w = op.window
    carriers = {p: op.carrier(p) for p in op.profiles() if p.arity > 0}
    coll = SymmetricCollection(w, carriers, op.collection._act, f"{op.name}+")
    pos = Operad(coll, op.units, op.compose, f"{op.name}+", op.grading, op._unary_info)
    return pos, OperadMap(pos, op, lambda a: a, lambda p, x: x, f"ι_{op.name}")


def underlying_map(phi: OperadMap) -> OperadMap:
    return OperadMap(underlying_category(phi.source), underlying_category(phi.target),
                     phi.f, phi.__call__, f"⌞{phi.name}⌟")


# ---------------------------------------------------------------------------
# induced modules


class FBarQ(SymmetricCollection):
    """f̄ ◁ Q in strict form: (b..; a) holds Q(b..; f a)."""

    def __init__(self, phi: OperadMap, arity_one: bool = False):
        S, T = phi.source, phi.target
        self.phi = phi
        tw = T.window
        outs = S.colors
        win = TruncationWindow(tw.colors_in, outs, 1 if arity_one else tw.max_arity,
                               tw.exact or arity_one, tw.closed_colors and S.window.closed_colors)
        carriers = {}
        for a in outs:
            fa = phi.f(a)
            for q in T.profiles():
                if q.output == fa and (not arity_one or q.arity == 1):
                    carriers[Profile(q.inputs, a)] = T.carrier(q)
        super().__init__(win, carriers, lambda p, s, x: T.act(Profile(p.inputs, phi.f(p.output)), s, x),
                         f"f̄◁{'⌞' + T.name + '⌟' if arity_one else T.name}")

    def target_profile(self, p: Profile) -> Profile:
        return Profile(p.inputs, self.phi.f(p.output))


class QF(SymmetricCollection):
    """Q ◁ f in strict form: (a..; b) holds Q(f a..; b)."""

    def __init__(self, phi: OperadMap, max_arity: int | None = None):
        S, T = phi.source, phi.target
        self.phi = phi
        n_max = S.window.max_arity if max_arity is None else max_arity
        win = TruncationWindow(S.colors, T.window.colors_out, n_max, False,
                               T.window.closed_colors and S.window.closed_colors)
        carriers = {}
        by_inputs = {}
        for q in T.profiles():
            by_inputs.setdefault(q.inputs, []).append(q)
        for n in range(n_max + 1):
            for ins in itertools.product(S.colors.colors, repeat=n):
                fins = tuple(phi.f(a) for a in ins)
                for q in by_inputs.get(fins, ()):
                    carriers[Profile(ins, q.output)] = T.carrier(q)
        super().__init__(win, carriers,
                         lambda p, s, x: T.act(Profile(tuple(phi.f(a) for a in p.inputs), p.output), s, x),
                         f"{T.name}◁f")


def left_action(phi: OperadMap, M: FBarQ):
    """λ_φ: p, (q_j) -> μ_Q(φ p; q..)."""
    T = phi.target

    def lam(p: Profile, x, inners):
        return T.compose(phi.map_profile(p), phi(p, x),
                         tuple((M.target_profile(q), y) for q, y in inners))

    return lam


def right_action(phi: OperadMap, N: QF):
    """ρ_φ: q, (p_j) -> μ_Q(q; φ p..)."""
    T = phi.target

    def rho(p: Profile, x, inners):
        fp = Profile(tuple(phi.f(a) for a in p.inputs), p.output)
        return T.compose(fp, x, tuple((phi.map_profile(q), phi(q, y)) for q, y in inners))

    return rho


def inner_profile_for(M, p: Profile, inners) -> Profile:
    return concat_profile(p, inners)


def check_left_module(op: Operad, M: SymmetricCollection, lam) -> LawReport:
    """Unit and associativity of a left action ``op ◁ M -> M``."""
    rep = LawReport()
    N = M.window.max_arity
    byM = _by_output(M)
    byP = _by_output(op.collection)
    for q, m in M.elements():
        rep.checked += 1
        if lam(op.unit_profile(q.output), op.units[q.output], ((q, m),)) != m:
            rep.add("unit", q, m)
    for p, x in op.elements():
        if p.arity > N:
            continue
        for ms in _inner_choices(byM, p.inputs, N):
            rp = concat_profile(p, ms)
            if not M.window.contains(rp):
                rep.overflow += 1
                continue
            r = lam(p, x, ms)
            rep.checked += 1
            if not M.has(rp, r):
                rep.add("lands-outside", p, x, ms)
        # associativity: lam(mu(p; p..), m..) == lam(p; lam(p_j; m..))
        for ps in _inner_choices(byP, p.inputs, N):
            pp = concat_profile(p, ps)
            if not op.window.contains(pp):
                rep.overflow += 1
                continue
            px = op.compose(p, x, ps)
            for ms in _inner_choices(byM, pp.inputs, N):
                rp = concat_profile(pp, ms)
                if not M.window.contains(rp):
                    rep.overflow += 1
                    continue
                lhs = lam(pp, px, ms)
                mids = []
                k = 0
                fine = True
                for q, y in ps:
                    block = ms[k:k + q.arity]
                    k += q.arity
                    mp = concat_profile(q, block)
                    if not M.window.contains(mp):
                        fine = False
                        break
                    mids.append((mp, lam(q, y, block)))
                if not fine:
                    rep.overflow += 1
                    continue
                rep.checked += 1
                if lhs != lam(p, x, tuple(mids)):
                    rep.add("associativity", p, x, ps, ms)
    return rep


def check_right_module(N: SymmetricCollection, op: Operad, rho) -> LawReport:
    """Unit and associativity of a right action ``N ◁ op -> N``."""
    rep = LawReport()
    n_max = N.window.max_arity
    byP = _by_output(op.collection)
    for q, m in N.elements():
        rep.checked += 1
        units = tuple((op.unit_profile(a), op.units[a]) for a in q.inputs)
        if rho(q, m, units) != m:
            rep.add("unit", q, m)
        for ps in _inner_choices(byP, q.inputs, n_max):
            rp = concat_profile(q, ps)
            if not N.window.contains(rp):
                rep.overflow += 1
                continue
            r = rho(q, m, ps)
            if not N.has(rp, r):
                rep.add("lands-outside", q, m, ps)
                continue
            for rs in _inner_choices(byP, rp.inputs, n_max):
                fp = concat_profile(rp, rs)
                if not N.window.contains(fp):
                    rep.overflow += 1
                    continue
                lhs = rho(rp, r, rs)
                mids = []
                k = 0
                fine = True
                for pq, y in ps:
                    block = rs[k:k + pq.arity]
                    k += pq.arity
                    mp = concat_profile(pq, block)
                    if not op.window.contains(mp):
                        fine = False
                        break
                    mids.append((mp, op.compose(pq, y, block)))
                if not fine:
                    rep.overflow += 1
                    continue
                rep.checked += 1
                if lhs != rho(q, m, tuple(mids)):
                    rep.add("associativity", q, m, ps, rs)
    return rep


def check_bimodule_interchange(phi: OperadMap, M: FBarQ) -> LawReport:
    """λ_φ commutes with the right action of ⌞Q⌟ on f̄ ◁ Q by precomposition."""
    rep = LawReport()
    S, T = phi.source, phi.target
    lam = left_action(phi, M)
    n_max = M.window.max_arity
    unary = {}
    for q in T.profiles():
        if q.arity == 1:
            unary.setdefault(q.output, []).append(q)
    byM = _by_output(M)

    def right(q: Profile, m, us):
        return T.compose(M.target_profile(q), m, us)

    for p, x in S.elements():
        if p.arity > n_max:
            continue
        for ms in _inner_choices(byM, p.inputs, n_max):
            rp = concat_profile(p, ms)
            if not M.window.contains(rp):
                rep.overflow += 1
                continue
            whole = lam(p, x, ms)
            # act on one input at a time by each unary operation
            for pos, c in enumerate(rp.inputs):
                for up in unary.get(c, ()):
                    for u in T.carrier(up):
                        us = [(Profile((d,), d), T.units[d]) for d in rp.inputs]
                        us[pos] = (up, u)
                        lhs_p = Profile(tuple(q.inputs[0] for q, _ in us), rp.output)
                        if not M.window.contains(lhs_p):
                            rep.overflow += 1
                            continue
                        lhs = right(rp, whole, tuple(us))
                        k = 0
                        new_ms = []
                        for q, m in ms:
                            sub = tuple(us[k:k + q.arity])
                            k += q.arity
                            mp = Profile(tuple(s[0].inputs[0] for s in sub), q.output)
                            new_ms.append((mp, right(q, m, sub)))
                        rhs = lam(p, x, tuple(new_ms))
                        rep.checked += 1
                        if lhs != rhs:
                            rep.add("interchange", p, x, ms, pos, u)
    return rep


# ---------------------------------------------------------------------------
# the two other presentations of a map


@dataclass
class Presentations:
    """χ: P -> f̄ ◁ Q ◁ f and ψ: P ◁ f̄ -> f̄ ◁ Q, each computed directly and
    through the unit or counit of f ⊣ f̄."""

    chi: CollectionMap
    psi: CollectionMap
    chi_from_psi: CollectionMap
    psi_from_chi: CollectionMap
    PF: CompositeProduct  # P ◁ f̄
    FQ: CompositeProduct  # f̄ ◁ Q
    FQF: CompositeProduct  # (f̄ ◁ Q) ◁ f


def _fq_value(phi: OperadMap, c: CompositeElement):
    """The Q-operation of a class of f̄ ◁ Q, at a profile over A-colored output."""
    (q, y), = c.inners
    s = P.inverse(c.leaves[0])
    return q.permuted(s), phi.target.act(q, s, y)


def _fqf_value(phi: OperadMap, e: CompositeElement):
    """The Q-operation of a class of (f̄ ◁ Q) ◁ f with its inputs in leaf order."""
    qp, q = _fq_value(phi, e.outer)
    order = [pos for block in e.leaves for pos in block]
    s = P.inverse(order)
    return qp.permuted(s), phi.target.act(qp, s, q)


def adjoint_presentations(phi: OperadMap, max_arity: int | None = None) -> Presentations:
    from .collections import (
        function_collections, right_unitor, right_unitor_inverse, unit_collection,
    )

    S, T = phi.source, phi.target
    n = S.window.max_arity if max_arity is None else max_arity
    A, B = S.colors, T.colors
    fc = function_collections(phi.f, A, B)
    PF = CompositeProduct(S.collection, fc.fbar, n)
    FQ = CompositeProduct(fc.fbar, T.collection, n)
    FQF = CompositeProduct(FQ, fc.f, n)

    def fq_class(qp, q, a):
        inner = Profile(qp.inputs, phi.f(a))
        return FQ.classify(CompositeElement(Profile((phi.f(a),), a), "1", ((inner, q),),
                                            (tuple(range(qp.arity)),)))

    def chi_fn(p, x):
        fp = phi.map_profile(p)
        outer = fq_class(fp, phi(p, x), p.output)
        inners = tuple((Profile((a,), phi.f(a)), "1") for a in p.inputs)
        return FQF.classify(CompositeElement(outer.profile(), outer, inners,
                                             tuple((j,) for j in range(p.arity))))

    def psi_fn(pr, e):
        # e is p with an f̄ unit on every input, arranged by its leaves
        order = [pos for block in e.leaves for pos in block]
        s = P.inverse(order)
        fp = phi.map_profile(e.outer_profile)
        y = T.act(fp, s, phi(e.outer_profile, e.outer))
        return fq_class(fp.permuted(s), y, pr.output)

    chi = CollectionMap(S.collection, FQF, chi_fn, "χ")
    psi = CollectionMap(PF, FQ, psi_fn, "ψ")

    # ψ from χ: P◁f̄ -> (f̄◁Q◁f)◁f̄ -> (f̄◁Q)◁(f◁f̄) -> (f̄◁Q)◁1 -> f̄◁Q
    FQF_Fb = CompositeProduct(FQF, fc.fbar, n)
    FQ_FF = CompositeProduct(FQ, fc.f_fbar, n)
    FQ_1 = CompositeProduct(FQ, unit_collection(B), n)
    steps_psi = [whisker_right(PF, FQF_Fb, chi), associator(FQF_Fb, FQ_FF),
                 whisker_left(FQ_FF, FQ_1, fc.counit), right_unitor(FQ_1)]

    def psi2_fn(p, e):
        for m in steps_psi:
            e = m(p, e)
        return e

    # χ from ψ: P -> P◁1 -> P◁(f̄◁f) -> (P◁f̄)◁f -> (f̄◁Q)◁f
    P1 = CompositeProduct(S.collection, unit_collection(A), n)
    P_BF = CompositeProduct(S.collection, fc.fbar_f, n)
    PF_F = CompositeProduct(PF, fc.f, n)
    steps_chi = [right_unitor_inverse(S.collection, P1), whisker_left(P1, P_BF, fc.unit),
                 associator_inverse(P_BF, PF_F), whisker_right(PF_F, FQF, psi)]

    def chi2_fn(p, x):
        for m in steps_chi:
            x = m(p, x)
        return x

    return Presentations(chi, psi, CollectionMap(S.collection, FQF, chi2_fn, "χ'"),
                         CollectionMap(PF, FQ, psi2_fn, "ψ'"), PF, FQ, FQF)


def check_presentations(phi: OperadMap, pres: Presentations) -> LawReport:
    """Both routes agree, χ and ψ satisfy their unit and multiplication
    diagrams, and φ is recovered from χ."""
    rep = LawReport()
    S, T = phi.source, phi.target
    n = pres.FQF.window.max_arity
    for p, x in S.elements():
        if p.arity > n:
            continue
        rep.checked += 1
        c = pres.chi(p, x)
        if pres.chi_from_psi(p, x) != c:
            rep.add("chi-routes", p, x)
        qp, q = _fqf_value(phi, c)
        if qp != phi.map_profile(p) or q != phi(p, x):
            rep.add("round-trip", p, x)
    for pr, e in pres.PF.elements():
        rep.checked += 1
        if pres.psi_from_chi(pr, e) != pres.psi(pr, e):
            rep.add("psi-routes", pr, e)
    # unit diagrams
    for a, u in S.units.items():
        up = S.unit_profile(a)
        fa = phi.f(a)
        qp, q = _fqf_value(phi, pres.chi(up, u))
        rep.checked += 1
        if q != T.units[fa]:
            rep.add("chi-unit", a)
        e = pres.PF.classify(CompositeElement(up, u, ((Profile((fa,), a), "1"),), ((0,),)))
        qp, q = _fq_value(phi, pres.psi(e.profile(), e))
        rep.checked += 1
        if q != T.units[fa]:
            rep.add("psi-unit", a)
    # multiplication diagrams, on two-level composites inside the window
    by_out = _by_output(S.collection)
    for p, x in S.elements():
        if p.arity > n:
            continue
        for inners in _inner_choices(by_out, p.inputs, n):
            rp = concat_profile(p, inners)
            if not S.window.contains(rp) or not T.window.contains(phi.map_profile(rp)):
                rep.overflow += 1
                continue
            # χ: compose the Q-parts of χ(p) and χ(p_j) in f̄ ◁ Q ◁ f
            _, q0 = _fqf_value(phi, pres.chi(p, x))
            qs = []
            for ip, y in inners:
                _, qy = _fqf_value(phi, pres.chi(ip, y))
                qs.append((phi.map_profile(ip), qy))
            lhs = T.compose(phi.map_profile(p), q0, tuple(qs))
            _, whole = _fqf_value(phi, pres.chi(rp, S.compose(p, x, inners)))
            rep.checked += 1
            if lhs != whole:
                rep.add("chi-multiplication", p, x, inners)
            # ψ: P◁P◁f̄ -> P◁f̄◁Q -> f̄◁Q◁Q -> f̄◁Q against P◁P◁f̄ -> P◁f̄ -> f̄◁Q
            qs = []
            for ip, y in inners:
                e = pres.PF.classify(CompositeElement(
                    ip, y, tuple((Profile((phi.f(c),), c), "1") for c in ip.inputs),
                    tuple((j,) for j in range(ip.arity))))
                qs.append(_fq_value(phi, pres.psi(e.profile(), e)))
            e0 = pres.PF.classify(CompositeElement(
                p, x, tuple((Profile((phi.f(c),), c), "1") for c in p.inputs),
                tuple((j,) for j in range(p.arity))))
            _, q0 = _fq_value(phi, pres.psi(e0.profile(), e0))
            lhs = T.compose(phi.map_profile(p), q0, tuple(qs))
            ew = pres.PF.classify(CompositeElement(
                rp, S.compose(p, x, inners),
                tuple((Profile((phi.f(c),), c), "1") for c in rp.inputs),
                tuple((j,) for j in range(rp.arity))))
            _, rhs = _fq_value(phi, pres.psi(ew.profile(), ew))
            rep.checked += 1
            if lhs != rhs:
                rep.add("psi-multiplication", p, x, inners)
    return rep


def composite_count(op: Operad) -> int:
    """Number of one-level composites (outer, inners) within the arity bound.

    This is the number of substitutions the law checker would evaluate before
    associativity; it is computed by convolution without enumerating them.
    """
    N = op.window.max_arity
    gen = {}
    for p, _ in op.elements():
        g = gen.setdefault(p.output, [0] * (N + 1))
        g[p.arity] += 1
    total = 0
    for p, _ in op.elements():
        poly = [1] + [0] * N
        for b in p.inputs:
            g = gen.get(b, [0] * (N + 1))
            poly = [sum(poly[i] * g[k - i] for i in range(k + 1)) for k in range(N + 1)]
        total += sum(poly)
    return total


def positive_map(phi: OperadMap) -> OperadMap:
    """The restriction of a map to the positive parts of both operads."""
    S, _ = positivize(phi.source)
    T, _ = positivize(phi.target)
    psi = OperadMap(S, T, phi.f, phi.__call__, f"{phi.name}+")
    psi.colors_complete = phi.colors_complete
    psi.image_test = phi.image_test
    return psi
