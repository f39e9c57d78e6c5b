"""Shared builders and independent oracles for the test suite."""
import itertools
import math
import random

import networkx as nx

from catext.collections import ColorSet, Profile, SymmetricCollection, TruncationWindow
from catext.graphs import GraphWindow, OrderedGraph, build_operad
from catext.operads import Operad, OperadMap

SMALL = GraphWindow(2, 3, 3)
TINY = GraphWindow(2, 3, 3, max_edges=4)
MOD = GraphWindow(2, 3, 2, max_edges=3)

# criterion number -> result line, printed at the end of the run
ACCEPTANCE = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def perfect_matchings(points):
    """All fixed-point-free involutions of a list, as lists of pairs."""
    points = list(points)
    if not points:
        yield []
        return
    a = points[0]
    for i in range(1, len(points)):
        rest = points[1:i] + points[i + 1:]
        for m in perfect_matchings(rest):
            yield [(a, points[i])] + m


def matching_graph(valences, boundary, m, circles=0) -> OrderedGraph:
    ends = [0] * (sum(valences) + boundary)
    for e, (a, b) in enumerate(m):
        ends[a] = ends[b] = e
    return OrderedGraph(valences, boundary, ends, circles)


def small_graphs(max_vertices=2, max_edges=5, connected=False):
    """Every ordered graph with at most the given vertices and edges (circles count as edges)."""
    from catext.graphs import is_connected

    out = []
    for n in range(max_vertices + 1):
        for vals in itertools.product(range(2 * max_edges + 1), repeat=n):
            for b in range(2 * max_edges + 1):
                total = sum(vals) + b
                if total % 2 or total // 2 > max_edges:
                    continue
                for m in perfect_matchings(range(total)):
                    for c in range(max_edges - total // 2 + 1):
                        g = matching_graph(vals, b, m, c)
                        if connected and not is_connected(g):
                            continue
                        out.append(g)
    return out


def nx_betti(g: OrderedGraph) -> int:
    """Edges minus a spanning forest, plus free circles, via networkx."""
    G = nx.MultiGraph()
    G.add_nodes_from(("v", v) for v in range(g.n_vertices))
    owner = [("v", v) for v, k in enumerate(g.valences) for _ in range(k)]
    owner += [("b", i) for i in range(g.boundary)]
    G.add_nodes_from(o for o in owner if o[0] == "b")
    pairs = {}
    for i, e in enumerate(g.ends):
        pairs.setdefault(e, []).append(owner[i])
    for a, b in pairs.values():
        G.add_edge(a, b)
    forest = nx.minimum_spanning_tree(G)
    return G.number_of_edges() - forest.number_of_edges() + g.circles


# ---------------------------------------------------------------------------
# tree-count formulas (counted by hand from the definitions)


def count_C(valences, p):
    if len(valences) == 1:
        return math.factorial(p) if valences[0] == p else 0
    k1, k2 = valences
    return k1 * k2 * math.factorial(p) if p == k1 + k2 - 2 else 0


def count_O(valences, p):
    if len(valences) == 1:
        return math.factorial(p - 1) if valences[0] == p else 0
    k1, k2 = valences
    if p != k1 + k2 - 2:
        return 0
    # either vertex may hold the root; the other hangs off a non-root germ
    return ((k1 - 1) + (k2 - 1)) * math.factorial(p - 1)


def count_Ons(valences, p):
    if len(valences) == 1:
        return 1 if valences[0] == p else 0
    k1, k2 = valences
    return (k1 - 1) + (k2 - 1) if p == k1 + k2 - 2 else 0


# ---------------------------------------------------------------------------
# monochrome operads of a monoid acting on a set (arity at most one)


def action_operad(elements, mult, unit, points, act, name="MX"):
    col = ColorSet(("*",))
    win = TruncationWindow(col, col, 1, exact=True)
    carriers = {Profile(("*",), "*"): tuple(elements)}
    if points:
        carriers[Profile((), "*")] = tuple(points)
    coll = SymmetricCollection(win, carriers, None, name)

    def compose(p, x, inners):
        if p.arity == 0:
            return x
        (q, y), = inners
        return mult(x, y) if q.arity == 1 else act(x, y)

    return Operad(coll, {"*": unit}, compose, name)


def cyclic_action_operad(n, orbits, name):
    """Z/n acting on a union of orbits Z/n / dZ for d in ``orbits`` (each d divides n)."""
    points = [(i, r) for i, d in enumerate(orbits) for r in range(d)]
    dmap = dict(enumerate(orbits))

    def act(m, x):
        i, r = x
        return (i, (r + m) % dmap[i])

    return action_operad(tuple(range(n)), lambda a, b: (a + b) % n, 0, points, act, name)


def random_monochrome_map(rng: random.Random):
    """A homomorphism Z/n -> Z/m with an equivariant map of orbit sets.

    Returns (map, expected verdict); the extension is an isomorphism exactly
    when the map of points is a bijection (the unary part always matches).
    """
    n = rng.choice([1, 2, 3, 4])
    m = rng.choice([1, 2, 3, 4, 6])
    cs = [c for c in range(m) if (n * c) % m == 0]
    c = rng.choice(cs)
    divs_n = [d for d in range(1, n + 1) if n % d == 0]
    divs_m = [d for d in range(1, m + 1) if m % d == 0]
    src_orbits = [rng.choice(divs_n) for _ in range(rng.randint(0, 2))]
    tgt_orbits = [rng.choice(divs_m) for _ in range(rng.randint(0, 2))]
    S = cyclic_action_operad(n, src_orbits, f"Z{n}")
    T = cyclic_action_operad(m, tgt_orbits, f"Z{m}")
    tpoints = T.carrier(Profile((), "*"))
    table = {}
    for i, d in enumerate(src_orbits):
        # the generator of an orbit Z/n / dZ may go to any point fixed by h(d)
        ok = [y for y in tpoints if (y[1] + d * c) % tgt_orbits[y[0]] == y[1]]
        if not ok:
            return random_monochrome_map(rng)
        y = rng.choice(ok)
        for r in range(d):
            table[(i, r)] = (y[0], (y[1] + r * c) % tgt_orbits[y[0]])

    def comp(p, x):
        return (x * c) % m if p.arity == 1 else table[x]

    phi = OperadMap(S, T, lambda a: a, comp, f"Z{n}->Z{m}")
    phi.colors_complete = True
    bijective = len(set(table.values())) == len(table) == len(tpoints)
    return phi, ("yes" if bijective else "no")


def operad(kind, window=SMALL, **kw):
    return build_operad(kind, window, **kw)


# ---------------------------------------------------------------------------
# symmetric collections


def species(kind: str, n_max: int, positive=False, color="*", name=None):
    """Monochrome collections: "E" one point per arity, "L" linear orders."""
    from catext import perm as P

    col = ColorSet((color,))
    win = TruncationWindow(col, col, n_max, exact=True)
    carriers = {}
    for n in range(1 if positive else 0, n_max + 1):
        p = Profile((color,) * n, color)
        carriers[p] = ("e",) if kind == "E" else tuple(P.all_perms(n))
    act = (lambda p, s, x: x) if kind == "E" else (lambda p, s, x: P.permute(x, s))
    return SymmetricCollection(win, carriers, act, name or kind)


def random_collection(rng: random.Random, colors=("a", "b"), max_arity=2, n_orbits=3,
                      positive=False, exact=True, name="X"):
    """Unions of free and trivial orbits over random profiles."""
    from catext import perm as P

    cs = ColorSet(colors)
    carriers = {}
    table = {}
    for k in range(n_orbits):
        n = rng.randint(1 if positive else 0, max_arity)
        ins = tuple(rng.choice(colors) for _ in range(n))
        p = Profile(ins, rng.choice(colors))
        if len(set(ins)) <= 1 and rng.random() < 0.4:
            x = (f"t{k}", None)
            carriers.setdefault(p, []).append(x)
            continue
        for s in P.all_perms(n):
            carriers.setdefault(p.permuted(s), []).append((f"f{k}", s))

    def act(p, s, x):
        tag, base = x
        return x if base is None else (tag, P.compose(base, s))

    win = TruncationWindow(cs, cs, max_arity, exact=exact)
    return SymmetricCollection(win, carriers, act, name)
