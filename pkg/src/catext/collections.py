"""Finite symmetric colored collections and the composition product.

Collections are finite tables indexed by profiles inside a truncation window.
Products, Day powers and relative products are computed at the element level:
composites are enumerated and glued into coend classes with a union-find over
the generating symmetric-group moves.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from networkx.utils import UnionFind

from . import perm as P
from .perm import okey


class CatextError(Exception):
    """Base class for library errors."""


class DomainError(CatextError):
    """An element, color or profile that does not belong where it was used."""


class ContractError(CatextError):
    """A precondition of an operation was violated."""


class TruncationError(CatextError):
    """A computation needed data outside the finite window it was given."""

    def __init__(self, profile, reason: str = "outside window"):
        self.profile = profile
        self.reason = reason
        super().__init__(f"{reason}: {profile}")


@dataclass(frozen=True)
class ColorSet:
    colors: tuple

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(self.colors))
        if len(set(self.colors)) != len(self.colors):
            raise ContractError("repeated color")

    def __iter__(self):
        return iter(self.colors)

    def __len__(self):
        return len(self.colors)

    def __contains__(self, c):
        return c in self._set

    @property
    def _set(self):
        s = self.__dict__.get("_cache")
        if s is None:
            s = frozenset(self.colors)
            object.__setattr__(self, "_cache", s)
        return s


@dataclass(frozen=True, order=False)
class Profile:
    inputs: tuple
    output: object

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def permuted(self, s) -> "Profile":
        return Profile(P.permute(self.inputs, s), self.output)

    def sort_key(self):
        return (len(self.inputs), okey(self.inputs), okey(self.output))

    def __str__(self):
        ins = " ".join(map(str, self.inputs))
        return f"({ins}; {self.output})"


def prof(inputs: Iterable, output) -> Profile:
    return Profile(tuple(inputs), output)


@dataclass(frozen=True)
class TruncationWindow:
    """Finite part of the profile space that a collection stores.

    ``exact`` means every profile with valid colors beyond the bounds is
    empty; ``closed_colors`` means the color sets are complete rather than a
    truncation of an infinite set.  ``weight`` is an optional extra bound on a
    profile (for example the number of edges of a graph).
    """

    colors_in: ColorSet
    colors_out: ColorSet
    max_arity: int
    exact: bool = False
    closed_colors: bool = True
    max_weight: int | None = None
    weight: Callable[[Profile], int] | None = field(default=None, compare=False)

    def colors_ok(self, p: Profile) -> bool:
        return p.output in self.colors_out and all(a in self.colors_in for a in p.inputs)

    def contains(self, p: Profile) -> bool:
        if not self.colors_ok(p) or p.arity > self.max_arity:
            return False
        if self.max_weight is not None and self.weight(p) > self.max_weight:
            return False
        return True

    def classify(self, p: Profile) -> str:
        """'in', 'empty' (known empty outside the bounds) or raises."""
        if not self.colors_ok(p):
            if self.closed_colors:
                raise DomainError(f"profile {p} has colors outside the color sets")
            raise TruncationError(p, "color outside window")
        if self.contains(p):
            return "in"
        if self.exact:
            return "empty"
        raise TruncationError(p)

    def profiles(self, max_arity: int | None = None) -> Iterable[Profile]:
        n_max = self.max_arity if max_arity is None else max_arity
        for n in range(n_max + 1):
            for ins in itertools.product(self.colors_in.colors, repeat=n):
                for c in self.colors_out:
                    p = Profile(ins, c)
                    if self.contains(p):
                        yield p

    def with_arity(self, n: int, exact: bool | None = None) -> "TruncationWindow":
        return TruncationWindow(self.colors_in, self.colors_out, n,
                                self.exact if exact is None else exact,
                                self.closed_colors, self.max_weight, self.weight)


def decompose(s: Sequence[int]) -> list:
    """Adjacent transposition indices ``i_1..i_k`` with ``s = t_{i_1} ... t_{i_k}``.

    Acting by ``s`` equals acting by ``t_{i_1}`` first, then ``t_{i_2}`` and so on.
    """
    cur = list(range(len(s)))
    out = []
    for i, target in enumerate(s):
        j = cur.index(target)
        while j > i:
            cur[j - 1], cur[j] = cur[j], cur[j - 1]
            out.append(j - 1)
            j -= 1
    return out


class SymmetricCollection:
    """Profile-indexed finite sets with a right symmetric-group action.

    ``action(profile, s, x)`` returns the image of ``x`` in the carrier of
    ``profile.permuted(s)``.  A mapping ``{(profile, i, x): y}`` giving the
    adjacent transpositions is also accepted.
    """

    def __init__(self, window: TruncationWindow, carriers: Mapping[Profile, Iterable],
                 action=None, name: str = ""):
        self.window = window
        self.name = name
        self._carriers = {}
        for p, xs in carriers.items():
            xs = tuple(xs)
            if not xs:
                continue
            if window.classify(p) != "in":
                raise DomainError(f"stored profile {p} lies outside the window")
            self._carriers[p] = xs
        self._sets = {p: frozenset(xs) for p, xs in self._carriers.items()}
        if action is None or callable(action):
            self._action = action
            self._table = None
        else:
            self._action = None
            self._table = dict(action)

    # -- carriers -------------------------------------------------------
    def carrier(self, p: Profile) -> tuple:
        if self.window.classify(p) == "empty":
            return ()
        return self._carriers.get(p, ())

    def has(self, p: Profile, x) -> bool:
        s = self._sets.get(p)
        return s is not None and x in s

    def profiles(self) -> list:
        return sorted(self._carriers, key=Profile.sort_key)

    def elements(self):
        for p in self.profiles():
            for x in self._carriers[p]:
                yield p, x

    def size(self) -> int:
        return sum(len(v) for v in self._carriers.values())

    def profiles_with_output(self, c) -> list:
        return [p for p in self.profiles() if p.output == c]

    @property
    def is_arity_one(self) -> bool:
        return self.window.exact and all(p.arity == 1 for p in self._carriers)

    def is_positive(self) -> bool:
        return all(p.arity > 0 for p in self._carriers)

    # -- action ---------------------------------------------------------
    def act(self, p: Profile, s, x):
        s = tuple(s)
        if not P.is_permutation(s, p.arity):
            raise DomainError(f"{s} does not permute the inputs of {p}")
        if not self.has(p, x):
            self.carrier(p)  # raises for truncated profiles
            raise DomainError(f"{x!r} is not an element of {p}")
        return self._act(p, s, x)

    def _act(self, p: Profile, s, x):
        if s == tuple(range(len(s))):
            return x
        if self._action is not None:
            return self._action(p, s, x)
        if self._table is None:
            raise ContractError(f"no symmetric action on {self.name or 'collection'}")
        for i in decompose(s):
            key = (p, i, x)
            if key not in self._table:
                raise DomainError(f"missing action entry for transposition {i} on {x!r} at {p}")
            x = self._table[key]
            p = p.permuted(P.transposition(p.arity, i))
        return x

    def check_action_laws(self, exhaustive_pairs: bool = True) -> list:
        """Violations of the action laws on every stored element."""
        bad = []
        for p, x in self.elements():
            n = p.arity
            perms = list(P.all_perms(n))
            if tuple(range(n)) and self._act(p, tuple(range(n)), x) != x:
                bad.append(("identity", p, x))
            images = {}
            for s in perms:
                y = self._act(p, s, x)
                if not self.has(p.permuted(s), y):
                    bad.append(("lands-outside", p, x, s))
                    continue
                images[s] = y
            if not exhaustive_pairs:
                continue
            for t in perms:
                if t not in images:
                    continue
                pt = p.permuted(t)
                for s in perms:
                    lhs = self._act(pt, s, images[t])
                    rhs = images.get(P.compose(t, s))
                    if lhs != rhs:
                        bad.append(("composition", p, x, s, t))
        return bad

    def __repr__(self):
        return f"<SymmetricCollection {self.name} {self.size()} elements>"


class CollectionMap:
    """A componentwise map between collections, given by a function."""

    def __init__(self, source: SymmetricCollection, target: SymmetricCollection,
                 fn: Callable[[Profile, object], object], name: str = ""):
        self.source = source
        self.target = target
        self.fn = fn
        self.name = name
        self._cache = {}

    def __call__(self, p: Profile, x):
        key = (p, x)
        if key not in self._cache:
            self._cache[key] = self.fn(p, x)
        return self._cache[key]

    def table(self) -> dict:
        return {(p, x): self(p, x) for p, x in self.source.elements()}

    def check(self) -> list:
        """Elements landing outside the target and equivariance failures."""
        bad = []
        for p, x in self.source.elements():
            y = self(p, x)
            if not self.target.has(p, y):
                bad.append(("lands-outside", p, x, y))
                continue
            for i in range(p.arity - 1):
                s = P.transposition(p.arity, i)
                lhs = self(p.permuted(s), self.source.act(p, s, x))
                rhs = self.target.act(p, s, y)
                if lhs != rhs:
                    bad.append(("equivariance", p, x, s))
        return bad

    def is_bijection(self) -> bool:
        src = {p for p in self.source.profiles()} | {p for p in self.target.profiles()}
        for p in src:
            xs = self.source.carrier(p)
            img = {self(p, x) for x in xs}
            if len(img) != len(xs) or img != set(self.target.carrier(p)):
                return False
        return True

    def then(self, other: "CollectionMap") -> "CollectionMap":
        return CollectionMap(self.source, other.target, lambda p, x: other(p, self(p, x)))


def identity_map(X: SymmetricCollection) -> CollectionMap:
    return CollectionMap(X, X, lambda p, x: x, "id")


def unit_collection(colors: ColorSet) -> SymmetricCollection:
    """The unit for the composition product: one element ``"1"`` in each (a; a)."""
    w = TruncationWindow(colors, colors, 1, exact=True)
    return SymmetricCollection(w, {Profile((a,), a): ("1",) for a in colors}, None, "1")


# ---------------------------------------------------------------------------
# composites


@dataclass(frozen=True)
class CompositeElement:
    """Outer element, inner elements per outer input, and the leaf matching.

    ``leaves[j][s]`` is the position in the composite's input list of slot
    ``s`` of inner element ``j``.
    """

    outer_profile: Profile | None
    outer: object
    inners: tuple  # ((Profile, element), ...)
    leaves: tuple  # ((position, ...), ...)

    def sort_key(self):
        return (okey(self.outer), okey(self.leaves),
                okey(tuple(y for _, y in self.inners)),
                okey(tuple(q.inputs for q, _ in self.inners)))

    def profile(self, colors_of=None) -> Profile:
        n = sum(len(b) for b in self.leaves)
        ins = [None] * n
        for (q, _), block in zip(self.inners, self.leaves):
            for s, pos in enumerate(block):
                ins[pos] = q.inputs[s]
        out = self.outer_profile.output if self.outer_profile is not None else None
        return Profile(tuple(ins), out)

    def acted(self, s) -> "CompositeElement":
        """Representative of the action of ``s`` on the input list."""
        inv = P.inverse(s)
        return CompositeElement(self.outer_profile, self.outer, self.inners,
                                tuple(tuple(inv[t] for t in b) for b in self.leaves))

    def __str__(self):
        inner = ", ".join(f"{y}" for _, y in self.inners)
        lv = "|".join(",".join(map(str, b)) for b in self.leaves)
        return f"{self.outer}[{inner}]<{lv}>"


def outer_move(X: SymmetricCollection, e: CompositeElement, s) -> CompositeElement:
    x = X.act(e.outer_profile, s, e.outer)
    return CompositeElement(e.outer_profile.permuted(s), x,
                            P.permute(e.inners, s), P.permute(e.leaves, s))


def inner_move(Y: SymmetricCollection, e: CompositeElement, j: int, t) -> CompositeElement:
    q, y = e.inners[j]
    inners = list(e.inners)
    leaves = list(e.leaves)
    inners[j] = (q.permuted(t), Y.act(q, t, y))
    leaves[j] = P.permute(e.leaves[j], t)
    return CompositeElement(e.outer_profile, e.outer, tuple(inners), tuple(leaves))


def generator_moves(X, Y, e: CompositeElement, outer: bool = True):
    """Neighbours of ``e`` under adjacent transpositions (outer and inner)."""
    if outer and X is not None:
        for i in range(len(e.inners) - 1):
            yield outer_move(X, e, P.transposition(len(e.inners), i))
    for j, (q, _) in enumerate(e.inners):
        for i in range(q.arity - 1):
            yield inner_move(Y, e, j, P.transposition(q.arity, i))


def all_moves(X, Y, e: CompositeElement, outer: bool = True):
    """Every single relation move: any outer permutation, any inner permutation."""
    if outer and X is not None:
        for s in P.all_perms(len(e.inners)):
            yield outer_move(X, e, s)
    for j, (q, _) in enumerate(e.inners):
        for t in P.all_perms(q.arity):
            yield inner_move(Y, e, j, t)


def union_find_classes(elements: Iterable, neighbours: Callable) -> dict:
    """Map every element to the least member of its class."""
    elements = list(elements)
    uf = UnionFind(elements)
    for e in elements:
        for f in neighbours(e):
            uf.union(e, f)
    best = {}
    for e in elements:
        r = uf[e]
        b = best.get(r)
        if b is None or e.sort_key() < b.sort_key():
            best[r] = e
    return {e: best[uf[e]] for e in elements}


def closure_classes(elements: Iterable, neighbours: Callable) -> dict:
    """Breadth-first closure oracle: element -> frozenset of its class."""
    out = {}
    for e in elements:
        if e in out:
            continue
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for a in frontier:
                for b in neighbours(a):
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        cls = frozenset(seen)
        for a in cls:
            out[a] = cls
    return out


def _by_output(Y: SymmetricCollection) -> dict:
    idx = {}
    for q, y in Y.elements():
        idx.setdefault(q.output, []).append((q, y))
    return idx


def _inner_choices(by_out: dict, bs: Sequence, budget: int):
    """Tuples of inner elements with outputs ``bs`` and total arity ``<= budget``."""
    if not bs:
        yield ()
        return
    for q, y in by_out.get(bs[0], ()):
        if q.arity <= budget:
            for rest in _inner_choices(by_out, bs[1:], budget - q.arity):
                yield ((q, y),) + rest


def _leaf_assignments(sizes: Sequence[int]):
    n = sum(sizes)
    for s in P.all_perms(n):
        blocks = []
        k = 0
        for m in sizes:
            blocks.append(tuple(s[k:k + m]))
            k += m
        yield tuple(blocks)


class CompositeProduct(SymmetricCollection):
    """X ◁ Y: coend classes of composites, with canonical least representatives.

    ``X`` is a (B, C)-collection and ``Y`` an (A, B)-collection.
    """

    def __init__(self, X: SymmetricCollection, Y: SymmetricCollection,
                 max_arity: int | None = None, name: str = "", max_outer: int | None = None):
        self.X, self.Y = X, Y
        wx, wy = X.window, Y.window
        y_nullary = any(p.arity == 0 for p in Y.profiles())
        if max_arity is None:
            if wx.exact and wy.exact:
                max_arity = wx.max_arity * wy.max_arity
            else:
                max_arity = wy.max_arity
        if max_arity > wy.max_arity and not wy.exact:
            raise TruncationError(f"arity {max_arity} inputs of {Y.name}", "inner window too small")
        # ``partial`` products keep only composites whose outer arity is at most
        # ``max_outer``; their classes are correct but some classes are missing.
        self.partial = False
        if max_outer is not None:
            m_max = min(max_outer, wx.max_arity)
            self.partial = not (wx.exact and m_max >= wx.max_arity) and (y_nullary or m_max < max_arity)
        elif y_nullary:
            if not wx.exact:
                raise TruncationError(f"outer {X.name} of unbounded arity",
                                      "nullary inner elements need an exact outer window")
            m_max = wx.max_arity
        else:
            if max_arity > wx.max_arity and not wx.exact:
                raise TruncationError(f"arity {max_arity} outer {X.name}", "outer window too small")
            m_max = min(max_arity, wx.max_arity)
        exact = (wx.exact and wy.exact and max_arity >= wx.max_arity * wy.max_arity
                 and not self.partial)
        window = TruncationWindow(wy.colors_in, wx.colors_out, max_arity, exact,
                                  wx.closed_colors and wy.closed_colors)
        by_out = _by_output(Y)
        reps = []
        for xp, x in X.elements():
            if xp.arity > m_max:
                continue
            for inners in _inner_choices(by_out, xp.inputs, max_arity):
                sizes = [q.arity for q, _ in inners]
                for leaves in _leaf_assignments(sizes):
                    reps.append(CompositeElement(xp, x, inners, leaves))
        self._class_of = union_find_classes(reps, lambda e: generator_moves(X, Y, e))
        carriers = {}
        for e, c in self._class_of.items():
            if e is c:
                carriers.setdefault(e.profile(), []).append(e)
        for p in carriers:
            carriers[p].sort(key=CompositeElement.sort_key)
        super().__init__(window, carriers, self._act_class, name or f"({X.name}◁{Y.name})")

    def _act_class(self, p, s, e):
        return self._class_of[e.acted(s)]

    def classify(self, e: CompositeElement) -> CompositeElement:
        try:
            return self._class_of[e]
        except KeyError:
            p = e.profile()
            self.window.classify(p)
            raise DomainError(f"{e} is not a composite of {self.name}") from None

    def representatives(self):
        return self._class_of.keys()


def compose_product(X, Y, max_arity=None, max_outer=None) -> CompositeProduct:
    return CompositeProduct(X, Y, max_arity, max_outer=max_outer)


def day_power(Y: SymmetricCollection, bs: Sequence, as_: Sequence) -> list:
    """Classes of the Day power Y^bs evaluated at the input list ``as_``."""
    n = len(as_)
    by_out = _by_output(Y)
    reps = []
    for inners in _inner_choices(by_out, tuple(bs), n):
        sizes = [q.arity for q, _ in inners]
        if sum(sizes) != n:
            continue
        for leaves in _leaf_assignments(sizes):
            e = CompositeElement(None, None, inners, leaves)
            if e.profile().inputs == tuple(as_):
                reps.append(e)
    if n > Y.window.max_arity and not Y.window.exact:
        raise TruncationError(Profile(tuple(as_), None), "Day power needs larger inner window")
    cls = union_find_classes(reps, lambda e: generator_moves(None, Y, e, outer=False))
    return sorted({c for c in cls.values()}, key=CompositeElement.sort_key)


def arity_one_product_formula(X: SymmetricCollection, Y: SymmetricCollection, p: Profile) -> list:
    """Pairs (x, y) with x in X(b; c) and y in Y(a; b), for X of arity one."""
    out = []
    for xp in X.profiles_with_output(p.output):
        for x in X.carrier(xp):
            for y in Y.carrier(Profile(p.inputs, xp.inputs[0])):
                out.append((xp, x, y))
    return out


def normalize_arity_one(Y: SymmetricCollection, e: CompositeElement):
    """For an outer of arity one, move the leaf matching into the inner element."""
    (q, y), = e.inners
    L = e.leaves[0]
    s = P.inverse(L)
    return q.permuted(s), Y.act(q, s, y)


# ---------------------------------------------------------------------------
# angle hom


class AngleHom(SymmetricCollection):
    """⟨X, Z⟩ for X of arity one: tuples of function tables per output color."""

    def __init__(self, X: SymmetricCollection, Z: SymmetricCollection, name=""):
        if not X.is_arity_one:
            raise ContractError("angle hom needs an arity-one first argument")
        self.X, self.Z = X, Z
        wz = Z.window
        B = X.window.colors_in
        window = TruncationWindow(wz.colors_in, B, wz.max_arity, wz.exact, wz.closed_colors)
        carriers = {}
        for n in range(wz.max_arity + 1):
            for ins in itertools.product(wz.colors_in.colors, repeat=n):
                for b in B:
                    keys = []
                    choices = []
                    for xp in X.profiles():
                        if xp.inputs[0] != b:
                            continue
                        zs = Z.carrier(Profile(ins, xp.output))
                        for x in X.carrier(xp):
                            keys.append((xp.output, x))
                            choices.append(zs)
                    elems = [tuple(zip(keys, vals)) for vals in itertools.product(*choices)]
                    if elems:
                        carriers[Profile(ins, b)] = elems
        super().__init__(window, carriers, self._act_fn, name or f"<{X.name},{Z.name}>")

    def _act_fn(self, p, s, h):
        return tuple((k, self.Z.act(Profile(p.inputs, k[0]), s, z)) for k, z in h)


def angle_hom(X, Z) -> AngleHom:
    return AngleHom(X, Z)


def adjunction_flat(XY: CompositeProduct, H: AngleHom, Y: SymmetricCollection, alpha: Callable):
    """Transpose ``alpha: X◁Y -> Z`` to a map ``Y -> ⟨X, Z⟩``."""
    X = XY.X

    def fn(p, y):
        table = []
        for xp in X.profiles():
            if xp.inputs[0] != p.output:
                continue
            for x in X.carrier(xp):
                e = XY.classify(CompositeElement(xp, x, ((p, y),), (tuple(range(p.arity)),)))
                table.append(((xp.output, x), alpha(e.profile(), e)))
        return tuple(table)

    return CollectionMap(Y, H, fn, "flat")


def adjunction_sharp(XY: CompositeProduct, Z: SymmetricCollection, beta: Callable):
    """Transpose ``beta: Y -> ⟨X, Z⟩`` back to a map ``X◁Y -> Z``."""

    def fn(p, e):
        q, y = normalize_arity_one(XY.Y, e)
        return dict(beta(q, y))[(e.outer_profile.output, e.outer)]

    return CollectionMap(XY, Z, fn, "sharp")


# ---------------------------------------------------------------------------
# hom enumeration


def equivariant_maps(S: SymmetricCollection, T: SymmetricCollection, limit: int | None = None):
    """All equivariant componentwise maps S -> T, as dicts {(profile, x): y}."""
    orbits = []
    seen = set()
    for p, x in S.elements():
        if (p, x) in seen:
            continue
        orbit = []
        stab = []
        for s in P.all_perms(p.arity):
            ps, xs = p.permuted(s), S.act(p, s, x)
            orbit.append((s, ps, xs))
            seen.add((ps, xs))
            if ps == p and xs == x:
                stab.append(s)
        cands = [y for y in T.carrier(p) if all(T.act(p, s, y) == y for s in stab)]
        orbits.append((p, orbit, cands))
    count = 0
    for choice in itertools.product(*[c for _, _, c in orbits]):
        table = {}
        for (p, orbit, _), y in zip(orbits, choice):
            for s, ps, xs in orbit:
                table[(ps, xs)] = T.act(p, s, y)
        yield table
        count += 1
        if limit is not None and count >= limit:
            return


def map_from_table(S, T, table, name="") -> CollectionMap:
    return CollectionMap(S, T, lambda p, x: table[(p, x)], name)


# ---------------------------------------------------------------------------
# coequalizers


class Quotient(SymmetricCollection):
    """Carrier-wise quotient of ``T`` by the relation generated by pairs."""

    def __init__(self, T: SymmetricCollection, pairs: Iterable, name=""):
        self.T = T
        uf = UnionFind(list(T.elements()))
        for (p, a), (q, b) in pairs:
            if p != q:
                raise ContractError(f"relation pair across profiles {p} and {q}")
            uf.union((p, a), (p, b))
        best = {}
        for pe in T.elements():
            r = uf[pe]
            if r not in best or okey(pe[1]) < okey(best[r][1]):
                best[r] = pe
        self._rep = {pe: best[uf[pe]][1] for pe in T.elements()}
        carriers = {}
        for (p, x), r in self._rep.items():
            if x == r:
                carriers.setdefault(p, []).append(x)
        for p in carriers:
            carriers[p].sort(key=okey)
        super().__init__(T.window, carriers, self._act_fn, name or f"{T.name}/~")

    def _act_fn(self, p, s, x):
        return self.classify(p.permuted(s), self.T.act(p, s, x))

    def classify(self, p, x):
        return self._rep[(p, x)]

    def projection(self) -> CollectionMap:
        return CollectionMap(self.T, self, self.classify, "projection")

    def mediate(self, h: CollectionMap) -> CollectionMap:
        """The map out of the quotient induced by a cocone ``h`` on ``T``."""
        for (p, x), r in self._rep.items():
            if h(p, x) != h(p, r):
                raise ContractError(f"cocone does not coequalize at {p}: {x!r} vs {r!r}")
        return CollectionMap(self, h.target, h, "mediating")


def coequalize(f: CollectionMap, g: CollectionMap, section: CollectionMap | None = None):
    """Coequalizer of a parallel pair, with its projection."""
    if f.source is not g.source or f.target is not g.target:
        raise ContractError("maps are not parallel")
    if section is not None:
        for p, t in f.target.elements():
            s = section(p, t)
            if f(p, s) != t or g(p, s) != t:
                raise ContractError(f"section is not common at {p}")
    pairs = (((p, f(p, x)), (p, g(p, x))) for p, x in f.source.elements())
    Qt = Quotient(f.target, pairs)
    return Qt, Qt.projection()


# ---------------------------------------------------------------------------
# structure maps on products


def whisker_left(XY: CompositeProduct, XY2: CompositeProduct, beta: Callable) -> CollectionMap:
    """X ◁ β for ``beta(profile, y)`` a map Y -> Y'."""

    def fn(p, e):
        inners = tuple((q, beta(q, y)) for q, y in e.inners)
        return XY2.classify(CompositeElement(e.outer_profile, e.outer, inners, e.leaves))

    return CollectionMap(XY, XY2, fn, "whisker-left")


def whisker_right(XY: CompositeProduct, X2Y: CompositeProduct, alpha: Callable) -> CollectionMap:
    """α ◁ Y for ``alpha(profile, x)`` a map X -> X'."""

    def fn(p, e):
        return X2Y.classify(CompositeElement(e.outer_profile, alpha(e.outer_profile, e.outer),
                                             e.inners, e.leaves))

    return CollectionMap(XY, X2Y, fn, "whisker-right")


def _regroup_left_to_right(e: CompositeElement, YZ: CompositeProduct):
    """[[x; ys]; zs] -> [x; [y_j; zs]] on representatives."""
    mid = e.outer  # composite of X◁Y
    zs = e.inners
    zleaves = e.leaves
    inners = []
    leaves = []
    for (q, y), block in zip(mid.inners, mid.leaves):
        sub_inners = tuple(zs[t] for t in block)
        sub_sizes = [z[0].arity for z in sub_inners]
        local = []
        k = 0
        for m in sub_sizes:
            local.append(tuple(range(k, k + m)))
            k += m
        inner = CompositeElement(q, y, sub_inners, tuple(local))
        inners.append((inner.profile(), YZ.classify(inner)))
        leaves.append(tuple(pos for t in block for pos in zleaves[t]))
    return CompositeElement(mid.outer_profile, mid.outer, tuple(inners), tuple(leaves))


def associator(XY_Z: CompositeProduct, X_YZ: CompositeProduct) -> CollectionMap:
    """(X◁Y)◁Z -> X◁(Y◁Z)."""
    YZ = X_YZ.Y

    def fn(p, e):
        return X_YZ.classify(_regroup_left_to_right(e, YZ))

    return CollectionMap(XY_Z, X_YZ, fn, "associator")


def associator_inverse(X_YZ: CompositeProduct, XY_Z: CompositeProduct) -> CollectionMap:
    """X◁(Y◁Z) -> (X◁Y)◁Z."""
    XY = XY_Z.X

    def fn(p, e):
        ys, mid_leaves, zs, zleaves = [], [], [], []
        for (q, inner), block in zip(e.inners, e.leaves):
            ys.append((inner.outer_profile, inner.outer))
            idx = []
            for zpair, zl in zip(inner.inners, inner.leaves):
                idx.append(len(zs))
                zs.append(zpair)
                zleaves.append(tuple(block[t] for t in zl))
            mid_leaves.append(tuple(idx))
        raw = CompositeElement(e.outer_profile, e.outer, tuple(ys), tuple(mid_leaves))
        top = CompositeElement(raw.profile(), XY.classify(raw), tuple(zs), tuple(zleaves))
        return XY_Z.classify(top)

    return CollectionMap(X_YZ, XY_Z, fn, "associator-inverse")


# ---------------------------------------------------------------------------
# unitors, function collections and relative products


def _flatten_class(e: CompositeElement, act, value):
    """Undo the leaf matching of a composite after evaluating it with identity wiring."""
    order = [pos for block in e.leaves for pos in block]
    p = Profile(tuple(c for q, _ in e.inners for c in q.inputs), e.outer_profile.output)
    return act(p, P.inverse(order), value)


def right_unitor(X1: CompositeProduct) -> CollectionMap:
    """X ◁ 1 -> X."""
    X = X1.X
    return CollectionMap(X1, X, lambda p, e: _flatten_class(e, X.act, e.outer), "right-unitor")


def right_unitor_inverse(X: SymmetricCollection, X1: CompositeProduct) -> CollectionMap:
    def fn(p, x):
        inners = tuple((Profile((c,), c), "1") for c in p.inputs)
        return X1.classify(CompositeElement(p, x, inners, tuple((j,) for j in range(p.arity))))

    return CollectionMap(X, X1, fn, "right-unitor-inverse")


def left_unitor(OneX: CompositeProduct) -> CollectionMap:
    """1 ◁ X -> X."""
    X = OneX.Y

    def fn(p, e):
        (q, y), = e.inners
        return X.act(q, P.inverse(e.leaves[0]), y)

    return CollectionMap(OneX, X, fn, "left-unitor")


def left_unitor_inverse(X: SymmetricCollection, OneX: CompositeProduct) -> CollectionMap:
    def fn(p, x):
        return OneX.classify(CompositeElement(Profile((p.output,), p.output), "1", ((p, x),),
                                              (tuple(range(p.arity)),)))

    return CollectionMap(X, OneX, fn, "left-unitor-inverse")


@dataclass
class FunctionCollections:
    """f as an (A, B)-collection, f̄ as a (B, A)-collection, with unit and counit."""

    f: SymmetricCollection
    fbar: SymmetricCollection
    unit: CollectionMap  # 1_A -> f̄ ◁ f
    counit: CollectionMap  # f ◁ f̄ -> 1_B
    f_fbar: CompositeProduct
    fbar_f: CompositeProduct


def function_collections(fn, A: ColorSet, B: ColorSet) -> FunctionCollections:
    fn = fn if callable(fn) else dict(fn).__getitem__
    for a in A:
        if fn(a) not in B:
            raise DomainError(f"{a} maps to {fn(a)}, which is not a color of the target")
    F = SymmetricCollection(TruncationWindow(A, B, 1, exact=True),
                            {Profile((a,), fn(a)): ("1",) for a in A}, None, "f")
    Fbar = SymmetricCollection(TruncationWindow(B, A, 1, exact=True),
                               {Profile((fn(a),), a): ("1",) for a in A}, None, "f̄")
    FF = CompositeProduct(F, Fbar, 1)
    BF = CompositeProduct(Fbar, F, 1)
    oneA, oneB = unit_collection(A), unit_collection(B)
    eps = CollectionMap(FF, oneB, lambda p, e: "1", "counit")

    def eta_fn(p, x):
        a = p.output
        e = CompositeElement(Profile((fn(a),), a), "1", ((Profile((a,), fn(a)), "1"),), ((0,),))
        return BF.classify(e)

    eta = CollectionMap(oneA, BF, eta_fn, "unit")
    return FunctionCollections(F, Fbar, eta, eps, FF, BF)


def triangle_identities(fc: FunctionCollections) -> list:
    """Failures of (ε ◁ f)(f ◁ η) = id_f and (f̄ ◁ ε)(η ◁ f̄) = id_f̄."""
    F, Fbar = fc.f, fc.fbar
    A, B = F.window.colors_in, F.window.colors_out
    oneA, oneB = unit_collection(A), unit_collection(B)
    bad = []
    # f -> f ◁ 1 -> f ◁ (f̄ ◁ f) -> (f ◁ f̄) ◁ f -> 1 ◁ f -> f
    F1 = CompositeProduct(F, oneA, 1)
    F_BF = CompositeProduct(F, fc.fbar_f, 1)
    FF_F = CompositeProduct(fc.f_fbar, F, 1)
    oneF = CompositeProduct(oneB, F, 1)
    steps = [right_unitor_inverse(F, F1), whisker_left(F1, F_BF, fc.unit),
             associator_inverse(F_BF, FF_F), whisker_right(FF_F, oneF, fc.counit),
             left_unitor(oneF)]
    for p, x in F.elements():
        y = x
        for m in steps:
            y = m(p, y)
        if y != x:
            bad.append(("f", p, x, y))
    # f̄ -> 1 ◁ f̄ -> (f̄ ◁ f) ◁ f̄ -> f̄ ◁ (f ◁ f̄) -> f̄ ◁ 1 -> f̄
    oneFb = CompositeProduct(oneA, Fbar, 1)
    BF_Fb = CompositeProduct(fc.fbar_f, Fbar, 1)
    Fb_FF = CompositeProduct(Fbar, fc.f_fbar, 1)
    Fb1 = CompositeProduct(Fbar, oneB, 1)
    steps = [left_unitor_inverse(Fbar, oneFb), whisker_right(oneFb, BF_Fb, fc.unit),
             associator(BF_Fb, Fb_FF), whisker_left(Fb_FF, Fb1, fc.counit), right_unitor(Fb1)]
    for p, x in Fbar.elements():
        y = x
        for m in steps:
            y = m(p, y)
        if y != x:
            bad.append(("fbar", p, x, y))
    return bad


def relative_product(X: SymmetricCollection, Qc: SymmetricCollection, Y: SymmetricCollection,
                     rho: Callable, lam: Callable, max_arity: int | None = None):
    """X ◁_Q Y as the coequalizer of X ◁ Q ◁ Y ⇉ X ◁ Y.

    ``rho(p, x, inners)`` is the right Q-action on X and ``lam(q, y, inners)`` the
    left Q-action on Y, both with identity wiring.  Returns (quotient, projection, X ◁ Y).
    """
    XY = CompositeProduct(X, Y, max_arity)
    XQ = CompositeProduct(X, Qc, max_arity)
    XQ_Y = CompositeProduct(XQ, Y, max_arity)
    QY = CompositeProduct(Qc, Y, max_arity)
    X_QY = CompositeProduct(X, QY, max_arity)
    assoc = associator(XQ_Y, X_QY)

    def act_right(e):
        return _flatten_class(e, X.act, rho(e.outer_profile, e.outer, e.inners))

    def act_left(e):
        return _flatten_class(e, Y.act, lam(e.outer_profile, e.outer, e.inners))

    def first(p, e):
        mid = e.outer
        x = act_right(mid)
        return XY.classify(CompositeElement(mid.profile(), x, e.inners, e.leaves))

    def second(p, e):
        r = assoc(p, e)
        inners = tuple((q, act_left(c)) for q, c in r.inners)
        return XY.classify(CompositeElement(r.outer_profile, r.outer, inners, r.leaves))

    f = CollectionMap(XQ_Y, XY, first, "ρ◁Y")
    g = CollectionMap(XQ_Y, XY, second, "X◁λ")
    quot, proj = coequalize(f, g)
    return quot, proj, XY
