"""One test per acceptance criterion; each records a PASS or FAIL line."""
import itertools
import random
import subprocess
import sys
import time

import networkx as nx
import pytest

from catext import graphs as G
from catext.adjoint import phi_star, verify_adjunction
from catext.algebras import (
    additive_algebra, check_algebra_laws, comparison_summand_check, graph_shift,
    monoid_algebra, random_additive_algebra,
)
from catext.collections import (
    ColorSet, Profile, TruncationError, all_moves, closure_classes, compose_product,
    function_collections, triangle_identities,
)
from catext.extension import ExtensionMorphism, is_categorical_extension, is_monoidal_extension
from catext.operads import check_operad_laws, composite_count, positive_map

from support import (
    MOD, SMALL, nx_betti, random_collection, random_monochrome_map, record, small_graphs,
)

pytestmark = pytest.mark.slow


# ---------------------------------------------------------------------------
# 1. law suite at the default window


def test_criterion_1_law_suite():
    budget = 60
    t = time.time()
    try:
        proc = subprocess.run([sys.executable, "-m", "catext.cli", "check-laws", "--builtin",
                               "--format", "machine"], capture_output=True, text=True,
                              timeout=budget)
        finished = True
        verdict = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else "no output"
    except subprocess.TimeoutExpired:
        finished, verdict = False, "timeout"
    elapsed = time.time() - t
    # evidence at reduced windows, every instance checked
    reduced = []
    for kind in ("C", "CGK", "O", "Ons", "Oplus", "As"):
        reduced.append((kind, check_operad_laws(G.build_operad(kind, SMALL)).ok))
    reduced.append(("OplusTrunc", check_operad_laws(G.build_operad("OplusTrunc", SMALL, ell=2)).ok))
    reduced.append(("OColored", check_operad_laws(
        G.build_operad("OColored", SMALL, palette=("a1", "a2"))).ok))
    for kind in ("M", "Mg"):
        reduced.append((kind, check_operad_laws(G.build_operad(kind, MOD)).ok))
    reduced_ok = all(ok for _, ok in reduced)
    # one-level composites the default window would need for C alone
    n_c = composite_count(G.build_operad("C", G.DEFAULT_WINDOW))
    ok = finished and verdict == "verdict=pass"
    record(1, ok, f"default window: {verdict} after {elapsed:.0f}s (budget {budget}s); "
                  f"C alone has {n_c} one-level composites; "
                  f"reduced windows {'all pass' if reduced_ok else 'FAIL'} "
                  f"({', '.join(k for k, _ in reduced)})")
    assert reduced_ok
    assert ok, "exhaustive default-window law check does not fit the budget"


# ---------------------------------------------------------------------------
# 2. the verdict table at the default window


def test_criterion_2_verdict_table():
    t = time.time()
    maps = G.builtin_maps()
    cw = G.GraphWindow(2, 3, 3)
    OA = G.build_operad("OColored", cw, palette=("a1", "a2"), name="O^A")
    OB = G.build_operad("OColored", cw, palette=("b",), name="O^B")
    table = {name: maps[name] for name in ("O->CGK", "CGK->C", "C->Mg", "As->Oplus",
                                           "Ons->O", "C->M", "As->O")}
    table["OA->OB merge"] = G.recolor_map(OA, OB, {"a1": "b", "a2": "b"})
    for lo in range(1, 5):
        for hi in range(lo, 5):
            table[f"Oplus{lo}->Oplus{hi}"] = G.inclusion(
                G.build_operad("OplusTrunc", G.DEFAULT_WINDOW, ell=lo),
                G.build_operad("OplusTrunc", G.DEFAULT_WINDOW, ell=hi))
    expected = {name: "no" if name in ("Ons->O", "C->M", "As->O", "OA->OB merge") else "yes"
                for name in table}
    got, bad = {}, []
    for name, phi in table.items():
        rep = is_categorical_extension(phi, materialize=False)
        got[name] = rep.verdict
        if rep.verdict != expected[name]:
            bad.append(name)
        if rep.verdict == "no":
            # every failing profile is a witness free of truncation reasons
            for r in rep.failures():
                if r.reasons:
                    bad.append(f"{name} witness {r.profile} touches the window edge")
    elapsed = time.time() - t
    ok = not bad and elapsed < 120
    record(2, ok, f"{len(table)} maps in {elapsed:.0f}s; "
                  + " ".join(f"{k}={v}" for k, v in got.items())
                  + (f"; mismatches {bad}" if bad else ""))
    assert not bad
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 3. monochrome coherence


def test_criterion_3_monochrome_coherence():
    rng = random.Random(2024)
    agree = 0
    verdicts = []
    for _ in range(50):
        phi, oracle = random_monochrome_map(rng)
        mono = is_monoidal_extension(phi)
        cat = is_categorical_extension(phi).verdict
        verdicts.append(cat)
        agree += mono == cat == oracle
    ok = agree == 50
    record(3, ok, f"{agree}/50 agree (yes={verdicts.count('yes')}, no={verdicts.count('no')})")
    assert ok


# ---------------------------------------------------------------------------
# 4. shapes of the right adjoint


def test_criterion_4_pushforward_shapes():
    # a window with valence 6 so that arities 1..5 (colors 2..6) are all present
    w = G.GraphWindow(3, 6, 6)
    As, Oplus = G.build_operad("As", w), G.build_operad("Oplus", w)
    phi = G.inclusion(As, Oplus)
    A = monoid_algebra(As, range(3), lambda a, b: (a + b) % 3, 0, name="Z3")
    R = phi_star(phi, A)
    sizes = {b: len(R.carrier(b)) for b in R.carriers}
    shape_as = sizes[2] == 3 and all(sizes[c] == 1 for c in range(3, 7))
    laws_as = check_algebra_laws(R, associativity=False).ok
    # C -> Mg with toy cyclic operads: Z/k carriers with a vertex shift
    maps = G.builtin_maps()
    psi = maps["C->Mg"]
    shape_mg = True
    for k, c in ((2, 1), (3, 0), (3, 2)):
        B = additive_algebra(psi.source, k, graph_shift(c), name=f"Z{k}")
        RB = phi_star(psi, B)
        for (n, g), elems in RB.carriers.items():
            want = len(B.carrier(n)) if g == 0 else 1
            shape_mg &= len(elems) == want
    ok = shape_as and laws_as and shape_mg
    record(4, ok, f"As->Oplus carriers {dict(sorted(sizes.items()))}; "
                  f"C->Mg genus-0 copies and points elsewhere: {shape_mg}")
    assert ok


# ---------------------------------------------------------------------------
# 5. adjunction suite


def test_criterion_5_adjunction_suite():
    t = time.time()
    maps = G.builtin_maps(SMALL)
    names = ["O->CGK", "CGK->C", "C->Mg", "As->Oplus", "Oplus2->Oplus3", "OA->OB"]
    failures, pairs, largest = [], 0, 0
    for name in names:
        phi = maps[name]
        rng = random.Random(names.index(name))
        for i in range(20):
            A = random_additive_algebra(phi.source, rng, 3)
            B = random_additive_algebra(phi.target, rng, 3)
            rep = verify_adjunction(phi, A, B)
            pairs += 1
            largest = max(largest, rep.counts[0])
            if not rep.ok:
                failures.append((name, i, rep.lines()))
    elapsed = time.time() - t
    ok = not failures and elapsed < 300
    record(5, ok, f"{pairs} pairs over {len(names)} maps at window {SMALL.max_vertices},"
                  f"{SMALL.max_valence},{SMALL.max_boundary} in {elapsed:.0f}s; "
                  f"largest hom-set {largest}; failures {len(failures)}")
    assert not failures
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 6. multilinear summands against the extension morphism


def test_criterion_6_summand_cross_check():
    maps = G.builtin_maps()
    phi = positive_map(maps["O->CGK"])
    ext = ExtensionMorphism(phi)
    colors = sorted(phi.target.colors)
    checked = disagreements = 0
    for n in range(1, 4):
        for bs in itertools.product(colors, repeat=n):
            out = sum(bs) - 2 * (n - 1)
            if out not in phi.source.colors or not phi.target.window.contains(Profile(bs, out)):
                continue
            res = comparison_summand_check(phi, bs, out, ext)
            er = ext.result(Profile(bs, out))
            checked += 1
            if not res.agrees or res.status != er.status:
                disagreements += 1
    # the failing map: the same witnesses from both sides
    psi = positive_map(maps["Ons->O"])
    ext2 = ExtensionMorphism(psi)
    rep = is_categorical_extension(psi, materialize=False)
    summand_fail = []
    for r in rep.profiles:
        res = comparison_summand_check(psi, r.profile.inputs, r.profile.output, ext2)
        if res.status == "fails":
            summand_fail.append(r.profile)
    same = set(summand_fail) == set(rep.witness_profiles()) and Profile((3, 3), 4) in summand_fail
    ok = checked > 0 and disagreements == 0 and same
    record(6, ok, f"O+->CGK+ {checked} profiles (length <= 3), {disagreements} disagreements; "
                  f"Ons+->O+ witnesses {'match' if same else 'differ'} "
                  f"({len(summand_fail)} profiles incl. (3,3;4))")
    assert ok


# ---------------------------------------------------------------------------
# 7. union-find against relation closure


def test_criterion_7_coend_classes():
    rng = random.Random(7)
    done = mismatches = 0
    sizes = []
    while done < 100:
        X = random_collection(rng, max_arity=rng.randint(1, 3), n_orbits=rng.randint(1, 4), name="X")
        Y = random_collection(rng, positive=rng.random() < 0.5, max_arity=2,
                              n_orbits=rng.randint(1, 4), name="Y")
        try:
            XY = compose_product(X, Y, max_arity=3)
        except TruncationError:  # windows too small for this pair: draw again
            continue
        reps = list(XY.representatives())
        if len(reps) > 200:
            continue
        oracle = closure_classes(reps, lambda e: all_moves(X, Y, e))
        for e in reps:
            if oracle[e] != frozenset(f for f in reps if XY.classify(f) == XY.classify(e)):
                mismatches += 1
                break
        sizes.append(len(reps))
        done += 1
    ok = mismatches == 0
    record(7, ok, f"100 instances, {sum(sizes)} composites (max {max(sizes)}), "
                  f"{mismatches} mismatching instances")
    assert ok


# ---------------------------------------------------------------------------
# 8. graph kernel


def _wl_hash(g):
    """Weisfeiler-Lehman hash of the incidence structure with positional labels."""
    H = nx.Graph()
    L = g.to_loose()
    for v in L.vertices:
        H.add_node(v, label="v")
        for i, x in enumerate(L.nbhd[v]):
            H.add_node(x, label=f"germ{i}")
            H.add_edge(v, x)
    for i, b in enumerate(L.boundary):
        H.add_node(b, label=f"b{i}")
    for e in L.edges:
        H.add_node(("e", e), label="e")
    for x, e in L.incidence.items():
        H.add_edge(x, ("e", e))
    return (g.valences, g.boundary, g.circles,
            nx.weisfeiler_lehman_graph_hash(H, node_attr="label", iterations=3))


def _assoc_instances(gs, max_vertices, max_edges):
    """Every (G, Hs, Ks) with all graphs and both composites inside the bounds."""
    byb = {}
    for h in gs:
        byb.setdefault(h.boundary, []).append(h)

    def fillings(g):
        budget = 2 * max_edges - g.boundary - 2 * g.circles
        out = []

        def go(i, chosen, nv, used):
            if i == len(g.valences):
                out.append(list(chosen))
                return
            for h in byb.get(g.valences[i], ()):
                n2, u2 = nv + h.n_vertices, used + sum(h.valences) + 2 * h.circles
                if n2 <= max_vertices and u2 <= budget:
                    chosen.append(h)
                    go(i + 1, chosen, n2, u2)
                    chosen.pop()

        go(0, [], 0, 0)
        return out

    for g in gs:
        for hs in fillings(g):
            gh = G.substitute(g, hs)
            if gh.n_edges > max_edges:
                continue
            for ks in fillings(gh):
                yield g, hs, ks


def test_criterion_8_graph_kernel():
    t = time.time()
    gs = small_graphs(2, 5)
    rng = random.Random(8)
    # isomorphic copies (edges renamed) share the key
    iso_ok = True
    for g in gs:
        L = g.to_loose()
        names = [f"x{i}" for i in range(len(L.edges))]
        rng.shuffle(names)
        ren = dict(zip(L.edges, names))
        L2 = G.LooseGraph(L.vertices, L.nbhd, L.boundary, tuple(names),
                          {x: ren[e] for x, e in L.incidence.items()})
        if not G.isomorphic(L, L2) or G.canonicalize(L2)[1] != g.key():
            iso_ok = False
            break
    # distinct keys are never isomorphic: pairwise search inside invariant buckets
    buckets = {}
    for g in gs:
        buckets.setdefault(_wl_hash(g), []).append(g)
    keys = {g.key() for g in gs}
    pair_checks = 0
    noniso_ok = len(keys) == len(gs)
    for group in buckets.values():
        for a, b in itertools.combinations(group, 2):
            pair_checks += 1
            if G.isomorphic(a.to_loose(), b.to_loose()):
                noniso_ok = False
    # Betti numbers against the spanning-forest oracle
    betti_ok = all(G.first_betti(g) == nx_betti(g) for g in gs)
    # unitality, every graph
    unit_ok = all(G.substitute(g, [G.corolla(k) for k in g.valences]) == g
                  and G.substitute(G.corolla(g.boundary), [g]) == g for g in gs)
    # associativity: exhaustive where the instance count allows, sampled at 5 edges
    exhaustive_edges = 2
    n_assoc = 0
    assoc_ok = True
    for g, hs, ks in _assoc_instances(small_graphs(2, exhaustive_edges), 2, exhaustive_edges):
        n_assoc += 1
        inner, i = [], 0
        for h in hs:
            inner.append(G.substitute(h, ks[i:i + h.n_vertices]))
            i += h.n_vertices
        if G.substitute(G.substitute(g, hs), ks) != G.substitute(g, inner):
            assoc_ok = False
    by_b = {}
    for h in gs:
        by_b.setdefault(h.boundary, []).append(h)
    n_sampled = 0
    while n_sampled < 20000:
        g = rng.choice(gs)
        hs = [rng.choice(by_b[k]) for k in g.valences]
        if sum(h.n_vertices for h in hs) > 2:
            continue
        gh = G.substitute(g, hs)
        ks = [rng.choice(by_b[k]) for k in gh.valences]
        inner, i = [], 0
        for h in hs:
            inner.append(G.substitute(h, ks[i:i + h.n_vertices]))
            i += h.n_vertices
        if G.substitute(gh, ks) != G.substitute(g, inner):
            assoc_ok = False
        n_sampled += 1
    elapsed = time.time() - t
    # the criterion asks for exhaustive associativity at 5 edges; that set has
    # about 5e10 (outer, inner) pairs alone, so it is reported as not met
    exhaustive_met = exhaustive_edges >= 5
    ok = iso_ok and noniso_ok and betti_ok and unit_ok and assoc_ok and exhaustive_met
    record(8, ok, f"{len(gs)} graphs: key<->iso {iso_ok and noniso_ok} ({pair_checks} bucket pairs), "
                  f"Betti {betti_ok}, units {unit_ok}; associativity exhaustive to "
                  f"{exhaustive_edges} edges ({n_assoc} triples) and {n_sampled} sampled at 5 edges "
                  f"{'pass' if assoc_ok else 'FAIL'}; exhaustive at 5 edges not attempted "
                  f"(~5e10 pairs); {elapsed:.0f}s")
    assert iso_ok and noniso_ok and betti_ok and unit_ok and assoc_ok
    assert exhaustive_met, "associativity is exhaustive only up to 2 edges"


# ---------------------------------------------------------------------------
# 9. triangle identities for color functions


def test_criterion_9_color_function_triangles():
    n = bad = 0
    for na in range(0, 5):
        for nb in range(0, 5):
            A = ColorSet(tuple(f"a{i}" for i in range(na)))
            B = ColorSet(tuple(f"b{i}" for i in range(nb)))
            for images in itertools.product(B.colors, repeat=na):
                fc = function_collections(dict(zip(A.colors, images)), A, B)
                n += 1
                bad += bool(triangle_identities(fc))
    ok = bad == 0
    record(9, ok, f"{n} functions between color sets of size <= 4, {bad} failures")
    assert ok
