"""Graphs with loose ends, ordered graphs, substitution and the graph operads.

An :class:`OrderedGraph` is stored in canonical compact form.  Endpoints are
scanned in a fixed order (the germs of vertex 1 in order, then those of
vertex 2, and so on, then the boundary in order) and ``ends[i]`` is the edge
of endpoint ``i``.  Edges are numbered by first occurrence in this scan, and
free circles are only counted.  Two ordered graphs are isomorphic (respecting
every order) exactly when their compact forms agree.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import perm as P
from .collections import (
    ColorSet, ContractError, DomainError, Profile, SymmetricCollection, TruncationWindow,
)
from .operads import GradingCertificate, Operad, OperadMap


def _relabel(ends: Sequence) -> tuple:
    seen = {}
    out = []
    for e in ends:
        if e not in seen:
            seen[e] = len(seen)
        out.append(seen[e])
    return tuple(out)


class OrderedGraph:
    __slots__ = ("valences", "boundary", "ends", "circles", "_hash", "_offsets", "_nodes",
                 "_partners")

    def __init__(self, valences, boundary: int, ends, circles: int = 0, canonical: bool = False):
        self.valences = tuple(valences)
        self.boundary = boundary
        self.ends = tuple(ends) if canonical else _relabel(ends)
        self.circles = circles
        self._hash = None
        self._offsets = None
        self._nodes = None
        self._partners = None
        if len(self.ends) != sum(self.valences) + boundary:
            raise DomainError("endpoint count does not match valences and boundary")

    # identity
    def _tuple(self):
        return (self.valences, self.boundary, self.ends, self.circles)

    def __eq__(self, other):
        return isinstance(other, OrderedGraph) and self._tuple() == other._tuple()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._tuple())
        return self._hash

    def sort_key(self):
        return (len(self.valences), self.valences, self.boundary, self.ends, self.circles)

    def key(self) -> str:
        v = ",".join(map(str, self.valences))
        e = ".".join(map(str, self.ends))
        return f"g[{v}|{self.boundary}|{e}|{self.circles}]"

    __str__ = key

    def __repr__(self):
        return self.key()

    # structure
    @property
    def n_vertices(self) -> int:
        return len(self.valences)

    @property
    def n_germs(self) -> int:
        return len(self.ends) - self.boundary

    @property
    def n_edges(self) -> int:
        return len(self.ends) // 2 + self.circles

    def offsets(self) -> tuple:
        if self._offsets is None:
            self._offsets = tuple(itertools.accumulate([0, *self.valences]))
        return self._offsets

    def germ_end(self, v: int, i: int) -> int:
        return self.offsets()[v] + i

    def boundary_end(self, b: int) -> int:
        return self.n_germs + b

    def nodes(self) -> tuple:
        """Per endpoint: its vertex, or ``n_vertices + b`` for boundary ``b``."""
        if self._nodes is None:
            out = [v for v, k in enumerate(self.valences) for _ in range(k)]
            n = len(self.valences)
            out.extend(range(n, n + self.boundary))
            self._nodes = tuple(out)
        return self._nodes

    def owner(self, idx: int):
        """('v', vertex, germ) or ('b', position) for an endpoint index."""
        node = self.nodes()[idx]
        if node >= len(self.valences):
            return ("b", node - len(self.valences))
        return ("v", node, idx - self.offsets()[node])

    def edge_ends(self) -> list:
        pairs = [[] for _ in range(len(self.ends) // 2)]
        for i, e in enumerate(self.ends):
            pairs[e].append(i)
        return pairs

    def partner(self, idx: int) -> int:
        if self._partners is None:
            first = {}
            part = [None] * len(self.ends)
            for j, e in enumerate(self.ends):
                if e in first:
                    part[j] = first[e]
                    part[first[e]] = j
                else:
                    first[e] = j
            self._partners = tuple(part)
        j = self._partners[idx]
        if j is None:
            raise DomainError("dangling endpoint")
        return j

    def acted(self, s) -> "OrderedGraph":
        """Vertex ``i`` of the result is vertex ``s[i]`` of this graph."""
        offs = self.offsets()
        ends = []
        for v in s:
            ends.extend(self.ends[offs[v]:offs[v + 1]])
        ends.extend(self.ends[self.n_germs:])
        return OrderedGraph(P.permute(self.valences, s), self.boundary, ends, self.circles)

    def to_loose(self) -> "LooseGraph":
        verts = tuple(f"v{v + 1}" for v in range(self.n_vertices))
        nbhd = {}
        inc = {}
        edges = [f"e{e}" for e in range(len(self.ends) // 2)]
        edges += [f"c{c}" for c in range(self.circles)]
        for v in range(self.n_vertices):
            germs = tuple(f"v{v + 1}.{i + 1}" for i in range(self.valences[v]))
            nbhd[verts[v]] = germs
            for i, g in enumerate(germs):
                inc[g] = f"e{self.ends[self.germ_end(v, i)]}"
        bnd = tuple(f"b{b + 1}" for b in range(self.boundary))
        for b, name in enumerate(bnd):
            inc[name] = f"e{self.ends[self.boundary_end(b)]}"
        return LooseGraph(verts, nbhd, bnd, tuple(edges), inc)


def corolla(k: int) -> OrderedGraph:
    """One vertex of valence ``k`` whose germs are the boundary, in order."""
    return OrderedGraph((k,), k, tuple(range(k)) * 2)


EDGE = OrderedGraph((), 2, (0, 0))
CIRCLE = OrderedGraph((), 0, (), 1)


# ---------------------------------------------------------------------------
# general loose graphs


@dataclass
class LooseGraph:
    """Named vertices, germs, boundary and edges with an incidence map."""

    vertices: tuple
    nbhd: dict
    boundary: tuple
    edges: tuple
    incidence: dict = field(default_factory=dict)

    def endpoints(self) -> list:
        return [g for v in self.vertices for g in self.nbhd[v]] + list(self.boundary)

    def validate(self) -> list:
        problems = []
        eset = set(self.edges)
        if len(eset) != len(self.edges):
            problems.append("repeated edge name")
        germ_fiber = {e: 0 for e in self.edges}
        bnd_fiber = {e: 0 for e in self.edges}
        for v in self.vertices:
            for g in self.nbhd.get(v, ()):
                e = self.incidence.get(g)
                if e not in eset:
                    problems.append(f"germ {g} has no edge")
                    continue
                germ_fiber[e] += 1
        for b in self.boundary:
            e = self.incidence.get(b)
            if e not in eset:
                problems.append(f"boundary {b} has no edge")
                continue
            bnd_fiber[e] += 1
        for e in self.edges:
            if germ_fiber[e] > 2 or bnd_fiber[e] > 2:
                problems.append(f"edge {e} has a fiber of size three or more")
            if germ_fiber[e] + bnd_fiber[e] not in (0, 2):
                problems.append(f"edge {e} has {germ_fiber[e] + bnd_fiber[e]} ends")
        return problems

    def to_ordered(self) -> OrderedGraph:
        if self.validate():
            raise DomainError("; ".join(self.validate()))
        ends = [self.incidence[x] for x in self.endpoints()]
        used = set(ends)
        circles = sum(1 for e in self.edges if e not in used)
        return OrderedGraph(tuple(len(self.nbhd[v]) for v in self.vertices),
                            len(self.boundary), ends, circles)


def validate(G: LooseGraph) -> list:
    return G.validate()


def _components(G: OrderedGraph):
    """Union-find over vertices, loose boundary ends and circles; returns count."""
    n = G.n_vertices
    parent = list(range(n + G.boundary))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    node = G.nodes()
    for a, b in G.edge_ends():
        ra, rb = find(node[a]), find(node[b])
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n + G.boundary)}) + G.circles


def is_connected(G: OrderedGraph) -> bool:
    return _components(G) == 1


def first_betti(G: OrderedGraph) -> int:
    """Internal edges minus vertices plus vertex components, plus circles."""
    n = G.n_vertices
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    internal = 0
    node = G.nodes()
    for a, b in G.edge_ends():
        if node[a] < n and node[b] < n:
            internal += 1
            ra, rb = find(node[a]), find(node[b])
            if ra != rb:
                parent[ra] = rb
    comps = len({find(i) for i in range(n)})
    return internal - n + comps + G.circles


def betti_by_rank(G: LooseGraph) -> int:
    """Cycle-space rank of the realization, from the rank of the incidence matrix."""
    cells = list(G.vertices)
    loose = {}
    for b in G.boundary:
        loose[b] = len(cells)
        cells.append(("end", b))
    where = {}
    for v in G.vertices:
        for g in G.nbhd[v]:
            where[g] = G.vertices.index(v)
    for b in G.boundary:
        where[b] = loose[b]
    fibers = {e: [] for e in G.edges}
    for x, e in G.incidence.items():
        fibers[e].append(where[x])
    cols = []
    for e in G.edges:
        ends = fibers[e]
        col = np.zeros(len(cells) + len(G.edges))
        if not ends:
            continue  # a circle contributes one cycle on its own 0-cell
        if ends[0] != ends[1]:
            col[ends[0]] += 1
            col[ends[1]] -= 1
        cols.append(col)
    circles = sum(1 for e in G.edges if not fibers[e])
    if not cols:
        return circles
    rank = np.linalg.matrix_rank(np.array(cols).T)
    return len(cols) - int(rank) + circles


def isomorphic(G: LooseGraph, H: LooseGraph) -> bool:
    """Backtracking search for an edge bijection respecting all orders."""
    if len(G.vertices) != len(H.vertices) or len(G.boundary) != len(H.boundary):
        return False
    if len(G.edges) != len(H.edges):
        return False
    if [len(G.nbhd[v]) for v in G.vertices] != [len(H.nbhd[v]) for v in H.vertices]:
        return False
    ptsG, ptsH = G.endpoints(), H.endpoints()
    corr = dict(zip(ptsG, ptsH))
    fibG = {e: [] for e in G.edges}
    for x in ptsG:
        fibG[G.incidence[x]].append(x)
    used = set()
    emap = {}
    edges = list(G.edges)

    def extend(i):
        if i == len(edges):
            return True
        e = edges[i]
        for f in H.edges:
            if f in used:
                continue
            if any(H.incidence[corr[x]] != f for x in fibG[e]):
                continue
            fib_f = [y for y in ptsH if H.incidence[y] == f]
            if len(fib_f) != len(fibG[e]):
                continue
            used.add(f)
            emap[e] = f
            if extend(i + 1):
                return True
            used.discard(f)
            del emap[e]
        return False

    return extend(0)


def canonicalize(G: LooseGraph | OrderedGraph):
    g = G.to_ordered() if isinstance(G, LooseGraph) else G
    return g, g.key()


# ---------------------------------------------------------------------------
# substitution


def substitute(G: OrderedGraph, Hs: Sequence[OrderedGraph], colorings=None):
    """Replace vertex ``j`` of ``G`` by ``Hs[j]``.

    ``colorings`` is an optional sequence ``(color of G, colors of H_1, ...)``
    of per-edge colors; the result is then a pair ``(graph, colors)``.
    """
    if len(Hs) != G.n_vertices:
        raise ContractError(f"{len(Hs)} graphs for {G.n_vertices} vertices")
    for k, H in zip(G.valences, Hs):
        if H.boundary != k:
            raise ContractError(f"boundary {H.boundary} glued to a vertex of valence {k}")
    base = [len(G.ends) // 2]
    for H in Hs:
        base.append(base[-1] + len(H.ends) // 2)
    parent = list(range(base[-1]))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    offs = G.offsets()
    for j, H in enumerate(Hs):
        hg = H.n_germs
        for i in range(G.valences[j]):
            a = find(G.ends[offs[j] + i])
            b = find(base[j] + H.ends[hg + i])
            if a != b:
                parent[a] = b
    ends = []
    for j, H in enumerate(Hs):
        ends.extend(find(base[j] + e) for e in H.ends[:H.n_germs])
    ends.extend(find(e) for e in G.ends[G.n_germs:])
    roots = {find(i) for i in range(base[-1])}
    circles = len(roots - set(ends)) + G.circles + sum(H.circles for H in Hs)
    out = OrderedGraph(tuple(k for H in Hs for k in H.valences), G.boundary, ends, circles)
    if colorings is None:
        return out
    color_of = {}
    cols = [colorings[0]] + list(colorings[1:])
    for e, c in enumerate(cols[0]):
        _set_color(color_of, find(e), c)
    for j, H in enumerate(Hs):
        for e, c in enumerate(cols[j + 1]):
            _set_color(color_of, find(base[j] + e), c)
    seen = []
    for r in ends:
        if r not in seen:
            seen.append(r)
    return out, tuple(color_of[r] for r in seen)


def _set_color(table, r, c):
    old = table.setdefault(r, c)
    if old != c:
        raise ContractError(f"edge colors {old} and {c} glued together")


# ---------------------------------------------------------------------------
# predicates


def is_tree(G: OrderedGraph) -> bool:
    return G.circles == 0 and is_connected(G) and first_betti(G) == 0


def _upward(G: OrderedGraph):
    """For a tree with nonempty boundary, the germ through which each vertex
    points toward the root, or None if the root is not the first boundary."""
    n = G.n_vertices
    node = G.nodes()
    offs = G.offsets()
    toward = {}
    stack = [G.partner(G.boundary_end(0))]
    while stack:
        idx = stack.pop()
        v = node[idx]
        if v >= n:
            continue
        if v in toward:
            return None
        i = idx - offs[v]
        toward[v] = i
        for k in range(offs[v], offs[v + 1]):
            if k != idx:
                stack.append(G.partner(k))
    if len(toward) != n:
        return None
    return toward


def is_rooted(G: OrderedGraph) -> bool:
    return is_tree(G) and _rooted_tree(G)


def _rooted_tree(G: OrderedGraph) -> bool:
    if G.boundary == 0:
        return False
    if G.n_vertices and G.nodes()[G.partner(G.boundary_end(0))] >= G.n_vertices:
        return False
    toward = _upward(G)
    return toward is not None and all(i == 0 for i in toward.values())


def is_ns_rooted(G: OrderedGraph) -> bool:
    return is_rooted(G) and is_ns_compatible(G)


def _ns_rooted_tree(G: OrderedGraph) -> bool:
    return _rooted_tree(G) and is_ns_compatible(G)


def chain_order(G: OrderedGraph) -> list:
    """Vertices of a linear rooted tree, starting at the root."""
    order = []
    idx = G.partner(G.boundary_end(0))
    while G.nodes()[idx] < G.n_vertices:
        v = G.nodes()[idx]
        order.append(v)
        if G.valences[v] != 2:
            raise DomainError("not a linear tree")
        i = idx - G.offsets()[v]
        idx = G.partner(G.germ_end(v, 1 - i))
    return order


def leaves_above(G: OrderedGraph, v: int, i: int) -> list:
    """Boundary positions reached by leaving vertex ``v`` through germ ``i``."""
    out = []
    stack = [G.partner(G.germ_end(v, i))]
    while stack:
        o = G.owner(stack.pop())
        if o[0] == "b":
            out.append(o[1])
            continue
        _, w, k = o
        for m in range(G.valences[w]):
            if m != k:
                stack.append(G.partner(G.germ_end(w, m)))
    return out


def is_ns_compatible(G: OrderedGraph) -> bool:
    """Leaves above earlier non-root germs come before leaves above later ones."""
    for v, k in enumerate(G.valences):
        prev_max = -1
        for i in range(1, k):
            ls = leaves_above(G, v, i)
            if not ls:
                continue
            if min(ls) < prev_max:
                return False
            prev_max = max(ls)
    return True


def oplus_grading(p: Profile) -> bool:
    return p.output == 2 + sum(k - 2 for k in p.inputs)


# ---------------------------------------------------------------------------
# enumeration


def _matchings(n_ends: int, owner, n_vertices: int, forest: bool, allow_bb: bool):
    """Perfect matchings of endpoints, pruned for loops in forests."""
    match = [-1] * n_ends
    parent = list(range(n_vertices))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    def rec():
        try:
            a = match.index(-1)
        except ValueError:
            yield tuple(match)
            return
        oa = owner[a]
        for b in range(a + 1, n_ends):
            if match[b] != -1:
                continue
            ob = owner[b]
            undo = None
            if oa is None and ob is None and not allow_bb:
                continue
            if forest and oa is not None and ob is not None:
                ra, rb = find(oa), find(ob)
                if ra == rb:
                    continue
                parent[ra] = rb
                undo = ra
            match[a], match[b] = b, a
            yield from rec()
            match[a] = match[b] = -1
            if undo is not None:
                parent[undo] = undo

    yield from rec()


def _labelled_trees(n: int) -> list:
    """Edge lists of all trees on the vertex set ``range(n)``."""
    if n <= 1:
        return [()]
    out = []
    all_edges = list(itertools.combinations(range(n), 2))
    for es in itertools.combinations(all_edges, n - 1):
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        ok = True
        for a, b in es:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            out.append(es)
    return out


def _trees(valences: tuple, boundary: int):
    """Every ordered tree with these valences and boundary size, once each."""
    n = len(valences)
    offs = list(itertools.accumulate([0, *valences]))
    germs_total = offs[-1]
    for es in _labelled_trees(n):
        inc = [[] for _ in range(n)]
        for idx, (a, b) in enumerate(es):
            inc[a].append(idx)
            inc[b].append(idx)
        if any(len(inc[v]) > valences[v] for v in range(n)):
            continue
        per_vertex = [list(itertools.permutations(range(valences[v]), len(inc[v])))
                      for v in range(n)]
        for choice in itertools.product(*per_vertex):
            ends = [None] * (germs_total + boundary)
            for v in range(n):
                for slot, germ in zip(inc[v], choice[v]):
                    ends[offs[v] + germ] = slot
            free = [i for i in range(germs_total) if ends[i] is None]
            if len(free) != boundary:
                continue
            base = n - 1
            for order in itertools.permutations(range(boundary)):
                e = list(ends)
                for b, i in enumerate(order):
                    e[free[i]] = base + b
                    e[germs_total + b] = base + b
                yield OrderedGraph(valences, boundary, e)


def enumerate_graphs(valences: Sequence[int], boundary: int,
                     predicate: Callable[[OrderedGraph], bool] | None = None,
                     trees_only: bool = False, allow_circle: bool = True) -> list:
    """All connected ordered graphs with the given profile, canonical and sorted."""
    valences = tuple(valences)
    n = len(valences)
    if n == 0:
        out = []
        if boundary == 2:
            out = [EDGE]
        elif boundary == 0 and allow_circle and not trees_only:
            out = [CIRCLE]
        return [g for g in out if predicate is None or predicate(g)]
    n_ends = sum(valences) + boundary
    if n_ends % 2:
        return []
    if trees_only:
        if sum(valences) != 2 * (n - 1) + boundary:
            return []
        out = [g for g in _trees(valences, boundary) if predicate is None or predicate(g)]
        return sorted(out, key=OrderedGraph.sort_key)
    owner = []
    for v, k in enumerate(valences):
        owner.extend([v] * k)
    owner.extend([None] * boundary)
    out = set()
    for m in _matchings(n_ends, owner, n, False, allow_bb=False):
        ends = [min(i, m[i]) for i in range(n_ends)]
        g = OrderedGraph(valences, boundary, ends)
        if not is_connected(g):
            continue
        if predicate is None or predicate(g):
            out.add(g)
    return sorted(out, key=OrderedGraph.sort_key)


def enumerate_by_matchings(valences: Sequence[int], boundary: int,
                           predicate: Callable[[OrderedGraph], bool] | None = None) -> list:
    """Unpruned reference enumeration: every matching, then filter."""
    valences = tuple(valences)
    n = len(valences)
    if n == 0:
        return enumerate_graphs(valences, boundary, predicate)
    n_ends = sum(valences) + boundary
    if n_ends % 2:
        return []
    owner = [v for v, k in enumerate(valences) for _ in range(k)] + [None] * boundary
    out = set()
    for m in _matchings(n_ends, owner, n, False, allow_bb=True):
        g = OrderedGraph(valences, boundary, [min(i, m[i]) for i in range(n_ends)])
        if is_connected(g) and (predicate is None or predicate(g)):
            out.add(g)
    return sorted(out, key=OrderedGraph.sort_key)


def involution_count(k: int, p: int) -> int:
    """Closed count of one-vertex graphs: fixed-point-free pairings of the
    loop germs times bijections of the remaining germs with the boundary."""
    if p > k or (k - p) % 2:
        return 0
    loops = (k - p) // 2
    choose = len(list(itertools.combinations(range(k), 2 * loops)))
    pairings = 1
    for i in range(2 * loops - 1, 0, -2):
        pairings *= i
    fact = 1
    for i in range(2, p + 1):
        fact *= i
    return choose * pairings * fact


# ---------------------------------------------------------------------------
# operads


KINDS = ("M", "Mg", "C", "CGK", "O", "Ons", "Oplus", "OplusTrunc", "As", "OColored")


@dataclass(frozen=True)
class GraphWindow:
    """Bounds for enumerating graph operads.

    ``max_edges`` limits the number of edges of every stored graph; the
    modular kinds need it to stay finite in practice.
    """

    max_vertices: int = 3
    max_valence: int = 5
    max_boundary: int = 5
    max_edges: int | None = None
    max_genus: int = 2


DEFAULT_WINDOW = GraphWindow()
MODULAR_WINDOW = GraphWindow(max_edges=5)


@dataclass(frozen=True)
class ColoredTree:
    """A rooted tree whose edges carry colors, indexed by canonical edge label."""

    graph: OrderedGraph
    colors: tuple

    def sort_key(self):
        return (self.graph.sort_key(), self.colors)

    def key(self) -> str:
        return f"{self.graph.key()}:{'.'.join(map(str, self.colors))}"

    __str__ = key

    def __repr__(self):
        return self.key()

    def vertex_colors(self) -> tuple:
        g = self.graph
        return tuple(tuple(self.colors[g.ends[g.germ_end(v, i)]] for i in range(k))
                     for v, k in enumerate(g.valences))

    def boundary_colors(self) -> tuple:
        g = self.graph
        return tuple(self.colors[g.ends[g.boundary_end(b)]] for b in range(g.boundary))

    def acted(self, s) -> "ColoredTree":
        h = self.graph.acted(s)
        # recolor along the relabeling: match endpoints
        old = self.graph
        offs = old.offsets()
        order = [i for v in s for i in range(offs[v], offs[v + 1])]
        order += list(range(old.n_germs, len(old.ends)))
        colors = {}
        for new_idx, old_idx in enumerate(order):
            colors[h.ends[new_idx]] = self.colors[old.ends[old_idx]]
        return ColoredTree(h, tuple(colors[e] for e in range(len(h.ends) // 2)))


def _predicate(kind: str):
    """Membership test for enumerated graphs; tree kinds receive only trees."""
    if kind in ("M", "Mg", "C"):
        return None
    if kind == "CGK":
        return lambda g: g.boundary > 0
    if kind in ("O", "Oplus", "OplusTrunc", "As", "OColored"):
        return _rooted_tree
    if kind == "Ons":
        return _ns_rooted_tree
    raise ContractError(f"unknown graph operad kind {kind}")


def kind_predicate(kind: str):
    """Full membership test for an arbitrary ordered graph."""
    inner = _predicate(kind)
    if kind in ("M", "Mg"):
        return is_connected
    return lambda g: is_tree(g) and (inner is None or inner(g))


def _color_range(kind: str, window: GraphWindow, ell: int | None):
    top = max(window.max_valence, window.max_boundary)
    if kind in ("M", "C"):
        return list(range(0, top + 1))
    if kind in ("CGK", "O", "Ons", "OColored"):
        return list(range(1, top + 1))
    if kind == "Oplus":
        return list(range(2, top + 1))
    if kind == "OplusTrunc":
        return list(range(2, min(top, ell + 1) + 1))
    if kind == "As":
        return [2]
    if kind == "Mg":
        return [(k, g) for k in range(0, top + 1) for g in range(window.max_genus + 1)]
    raise ContractError(kind)


def _shapes(colors: list, window: GraphWindow, tree: bool):
    """Valence tuples and boundary sizes worth enumerating."""
    for n in range(window.max_vertices + 1):
        for vals in itertools.product(colors, repeat=n):
            for p in colors:
                total = sum(vals) + p
                if total % 2:
                    continue
                if window.max_edges is not None and total // 2 > window.max_edges:
                    continue
                if tree and total // 2 != n - 1 + p and not (n == 0 and p == 2):
                    continue
                yield vals, p


def build_operad(kind: str, window: GraphWindow | None = None, ell: int | None = None,
                 palette: Sequence | None = None, name: str | None = None) -> Operad:
    """Enumerate a graph operad inside a window and wrap it as an :class:`Operad`."""
    if kind not in KINDS:
        raise ContractError(f"unknown graph operad kind {kind}")
    if window is None:
        window = MODULAR_WINDOW if kind in ("M", "Mg") else DEFAULT_WINDOW
    if kind == "OplusTrunc" and ell is None:
        raise ContractError("OplusTrunc needs ell")
    if kind == "OColored":
        return _build_colored(tuple(palette or ("x",)), window, name)
    pred = _predicate(kind)
    tree = kind not in ("M", "Mg")
    cols = _color_range(kind, window, ell)
    base = [c for c in cols] if kind != "Mg" else sorted({k for k, _ in cols})
    carriers = {}
    for vals, p in _shapes(base, window, tree):
        graphs = enumerate_graphs(vals, p, pred, trees_only=tree)
        if not graphs:
            continue
        if kind != "Mg":
            carriers[Profile(vals, p)] = graphs
            continue
        for g in graphs:
            b = first_betti(g)
            for gens in itertools.product(range(window.max_genus + 1), repeat=len(vals)):
                total = b + sum(gens)
                if total > window.max_genus:
                    continue
                prof_ = Profile(tuple(zip(vals, gens)), (p, total))
                carriers.setdefault(prof_, []).append(g)
    cs = ColorSet(tuple(cols))
    if kind == "Mg":
        weight = lambda pr: (sum(k for k, _ in pr.inputs) + pr.output[0]) // 2
    else:
        weight = lambda pr: (sum(pr.inputs) + pr.output) // 2
    win = TruncationWindow(cs, cs, window.max_vertices, exact=False, closed_colors=(kind == "As"),
                           max_weight=window.max_edges, weight=weight if window.max_edges else None)
    coll = SymmetricCollection(win, carriers, lambda pr, s, g: g.acted(s), name or kind)
    if kind == "Mg":
        units = {c: corolla(c[0]) for c in cols}
    else:
        units = {c: corolla(c) for c in cols}

    def compose(pr, x, inners):
        return substitute(x, [y for _, y in inners])

    grading = None
    if kind in ("Oplus", "OplusTrunc", "As"):
        grading = GradingCertificate("p = 2 + sum(k_i - 2)", oplus_grading)
    op = Operad(coll, units, compose, name or (kind if ell is None else f"{kind}{ell}"),
                grading, _unary_info(kind, cs, window))
    op.graph_kind = kind
    op.graph_window = window
    return op


def _unary_info(kind: str, cs: ColorSet, window: GraphWindow):
    """Exact knowledge of which unary profiles are inhabited."""

    def edges_ok(k, p):
        return window.max_edges is None or (k + p) // 2 <= window.max_edges

    def info(color, direction):
        if direction == "missing":
            # target colors whose unary operations the window cuts off
            if kind not in ("M", "Mg"):
                return set()
            found, _ = info(color, "out")
            if kind == "M":
                want = set(range(color, -1, -2))
            else:
                k, g = color
                want = {(p, g + (k - p) // 2) for p in range(k, -1, -2)}
            return want - found
        if kind == "M":
            if direction == "out":
                found = {p for p in range(color, -1, -2)}
                return {p for p in found if p in cs and edges_ok(color, p)}, all(
                    p in cs and edges_ok(color, p) for p in found)
            found = {k for k in cs if k >= color and (k - color) % 2 == 0 and edges_ok(k, color)}
            return found, False
        if kind == "Mg":
            k, g = color
            if direction == "out":
                want = {(p, g + (k - p) // 2) for p in range(k, -1, -2)}
                ok = {c for c in want if c in cs and edges_ok(k, c[0])}
                return ok, ok == want
            found = {(m, h) for (m, h) in cs if m >= k and (m - k) % 2 == 0
                     and h == g - (m - k) // 2 and edges_ok(m, k)}
            return found, False
        if kind == "OColored":
            return {color} if color in cs else set(), True
        # tree kinds: unary operations only between equal colors
        return ({color} if color in cs else set()), True

    return info


def _build_colored(palette: tuple, window: GraphWindow, name: str | None) -> Operad:
    top = max(window.max_valence, window.max_boundary)
    cols = [c for n in range(1, top + 1) for c in itertools.product(palette, repeat=n)]
    cs = ColorSet(tuple(cols))
    carriers = {}
    for vals, p in _shapes(list(range(1, top + 1)), window, True):
        for g in enumerate_graphs(vals, p, _rooted_tree, trees_only=True):
            for colors in itertools.product(palette, repeat=len(g.ends) // 2):
                t = ColoredTree(g, colors)
                carriers.setdefault(Profile(t.vertex_colors(), t.boundary_colors()), []).append(t)
    win = TruncationWindow(cs, cs, window.max_vertices, exact=False, closed_colors=False)
    coll = SymmetricCollection(win, carriers, lambda pr, s, t: t.acted(s), name or "OColored")
    units = {}
    for c in cols:
        units[c] = ColoredTree(corolla(len(c)), tuple(c))

    def compose(pr, x, inners):
        g, colors = substitute(x.graph, [y.graph for _, y in inners],
                               [x.colors] + [y.colors for _, y in inners])
        return ColoredTree(g, colors)

    op = Operad(coll, units, compose, name or f"O^{{{','.join(map(str, palette))}}}",
                None, _unary_info("OColored", cs, window))
    op.graph_kind = "OColored"
    op.graph_window = window
    op.palette = palette
    return op


# ---------------------------------------------------------------------------
# maps


# Graph operads built from matching windows carry every source color over an
# in-window target color, so the maps below mark their color data complete.


def _complete(phi: OperadMap) -> OperadMap:
    phi.colors_complete = True
    return phi


def inclusion(P_: Operad, Q: Operad, name: str | None = None) -> OperadMap:
    return _complete(OperadMap(P_, Q, lambda a: a, lambda p, x: x, name or f"{P_.name}->{Q.name}"))


def genus_zero_map(C: Operad, Mg: Operad) -> OperadMap:
    phi = _complete(OperadMap(C, Mg, lambda n: (n, 0), lambda p, x: x, f"{C.name}->{Mg.name}"))
    phi.image_test = lambda c: c[1] == 0
    return phi


def genus_projection(Mg: Operad, M: Operad) -> OperadMap:
    # every genus lies over a valence, so the color data is not complete here
    return OperadMap(Mg, M, lambda c: c[0], lambda p, x: x, f"{Mg.name}->{M.name}")


def recolor_map(OA: Operad, OB: Operad, h: dict) -> OperadMap:
    def comp(p, t):
        return ColoredTree(t.graph, tuple(h[c] for c in t.colors))

    return _complete(OperadMap(OA, OB, lambda c: tuple(h[x] for x in c), comp,
                               f"{OA.name}->{OB.name}"))


def builtin_maps(window: GraphWindow | None = None, ell: int = 2, m: int = 3,
                 h: dict | None = None) -> dict:
    """The standard maps between graph operads, keyed by a short name."""
    w = window or DEFAULT_WINDOW
    mw = window or MODULAR_WINDOW
    ops = {k: build_operad(k, w) for k in ("C", "CGK", "O", "Ons", "Oplus", "As")}
    ops["M"] = build_operad("M", mw)
    ops["Mg"] = build_operad("Mg", mw)
    trunc_l = build_operad("OplusTrunc", w, ell=ell)
    trunc_m = build_operad("OplusTrunc", w, ell=m)
    h = h or {"a1": "b1", "a2": "b2"}
    cw = GraphWindow(max_vertices=2, max_valence=3, max_boundary=3)
    OA = build_operad("OColored", cw, palette=tuple(sorted(set(h))), name="O^A")
    OB = build_operad("OColored", cw, palette=tuple(sorted(set(h.values()))), name="O^B")
    return {
        "O->CGK": inclusion(ops["O"], ops["CGK"]),
        "CGK->C": inclusion(ops["CGK"], ops["C"]),
        "C->M": inclusion(ops["C"], ops["M"]),
        "C->Mg": genus_zero_map(ops["C"], ops["Mg"]),
        "Mg->M": genus_projection(ops["Mg"], ops["M"]),
        "Ons->O": inclusion(ops["Ons"], ops["O"]),
        "As->Oplus": inclusion(ops["As"], ops["Oplus"]),
        "As->O": inclusion(ops["As"], ops["O"]),
        f"Oplus{ell}->Oplus{m}": inclusion(trunc_l, trunc_m),
        "OA->OB": recolor_map(OA, OB, h),
    }
