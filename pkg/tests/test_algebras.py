import itertools
import random

import pytest

from catext import graphs as G
from catext.algebras import (
    AlgebraMap, FiniteAlgebra, additive_algebra, check_algebra_laws, coproduct, free_algebra,
    hom_set, identity_algebra_map, induce, induced_hom_bijection, initial_algebra, initial_map,
    monoid_algebra, random_additive_algebra, restrict, terminal_algebra,
)
from catext.collections import ContractError, Profile, TruncationError
from catext.operads import OperadMap, identity_map

from support import SMALL, action_operad, cyclic_action_operad


def regular_algebra(op, n, name="R"):
    """Z/n acting on itself by translation."""
    return FiniteAlgebra(op, {"*": tuple(range(n))},
                         lambda p, x, e: (x + e[0]) % n if p.arity else x, name)


def cyclic_map(n, m, c):
    S = cyclic_action_operad(n, [], f"Z{n}")
    T = cyclic_action_operad(m, [], f"Z{m}")
    phi = OperadMap(S, T, lambda a: a, lambda p, x: (x * c) % m, f"Z{n}->Z{m}")
    phi.colors_complete = True
    return phi


def brute_homs(A, B):
    """Every function A -> B colorwise, filtered by the commuting squares."""
    cols = sorted(A.carriers, key=repr)
    keys = [(a, x) for a in cols for x in A.carrier(a)]
    out = []
    for vals in itertools.product(*(B.carrier(a) for a, _ in keys)):
        comps = {a: {} for a in cols}
        for (a, x), y in zip(keys, vals):
            comps[a][x] = y
        h = AlgebraMap(A, B, comps)
        if not h.check():
            out.append(h.key())
    return sorted(out, key=repr)


def test_additive_algebras_satisfy_laws():
    rng = random.Random(2)
    for kind in ("C", "O", "Ons", "As"):
        op = G.build_operad(kind, SMALL)
        for _ in range(3):
            assert check_algebra_laws(random_additive_algebra(op, rng)).ok


def test_mutated_table_is_caught():
    op = G.build_operad("As", SMALL)
    A = additive_algebra(op, 3)
    table = A.table()
    key = next(k for k in table if k[0].arity == 2)
    table[key] = (table[key] + 1) % 3
    assert not check_algebra_laws(FiniteAlgebra(op, A.carriers, table)).ok


def test_monoid_algebra_over_as():
    op = G.build_operad("As", SMALL)
    A = monoid_algebra(op, range(3), lambda a, b: (a * b) % 3, 1)
    assert check_algebra_laws(A).ok
    # a noncommutative monoid: strings over {a, b} of length at most 1 with truncating product
    B = monoid_algebra(op, ("", "a", "b"), lambda x, y: (x + y)[:1], "")
    assert check_algebra_laws(B).ok
    assert {B.act(p, x, ("a", "b")) for p, x in op.elements() if p.arity == 2} == {"a", "b"}


def test_hom_set_matches_brute_force():
    rng = random.Random(4)
    op = G.build_operad("Ons", SMALL)
    for _ in range(6):
        A, B = random_additive_algebra(op, rng), random_additive_algebra(op, rng)
        assert sorted((h.key() for h in hom_set(A, B)), key=repr) == brute_homs(A, B)
    op = cyclic_action_operad(4, [2, 4], "Z4")
    A = FiniteAlgebra(op, {"*": op.carrier(Profile((), "*"))},
                      lambda p, x, e: x if not p.arity else (e[0][0], (e[0][1] + x) % (2, 4)[e[0][0]]))
    assert check_algebra_laws(A).ok
    assert len(hom_set(A, A)) == len(brute_homs(A, A))


def test_hom_set_rejects_foreign_operads():
    A = additive_algebra(G.build_operad("As", SMALL), 2)
    B = additive_algebra(G.build_operad("C", SMALL), 2)
    with pytest.raises(ContractError):
        hom_set(A, B)


def test_identity_and_composition_of_maps():
    op = G.build_operad("O", SMALL)
    A = additive_algebra(op, 4)
    B = additive_algebra(op, 2)
    h = next(h for h in hom_set(A, B) if any(h(a, 1) == 1 for a in A.carriers if A.carrier(a)))
    assert not identity_algebra_map(A).then(h).check()
    assert identity_algebra_map(A).then(h).key() == h.key()


def test_initial_algebra_maps_uniquely():
    op = cyclic_action_operad(3, [1, 3], "Z3")
    I = initial_algebra(op)
    assert check_algebra_laws(I).ok
    assert len(I.carrier("*")) == 4
    rng = random.Random(0)
    for _ in range(5):
        orbits = [rng.choice([1, 3]) for _ in range(2)]
        pts = [(i, r) for i, d in enumerate(orbits) for r in range(d)]
        # a target algebra where every point of the initial algebra lands on the first orbit
        B = FiniteAlgebra(op, {"*": pts},
                          lambda p, x, e, o=orbits: (0, 0) if not p.arity else (e[0][0], (e[0][1] + x) % o[e[0][0]]))
        if not check_algebra_laws(B).ok:
            continue
        homs = hom_set(I, B)
        assert len(homs) == 1
        assert homs[0].key() == initial_map(B).key()


def test_terminal_algebra():
    op = G.build_operad("C", SMALL)
    T = terminal_algebra(op)
    assert check_algebra_laws(T).ok
    A = random_additive_algebra(op, random.Random(1))
    assert len(hom_set(A, T)) == 1


def test_restriction_along_a_map():
    phi = G.builtin_maps(SMALL)["O->CGK"]
    B = additive_algebra(phi.target, 3, name="Z3")
    R = restrict(phi, B)
    assert check_algebra_laws(R).ok
    for a in phi.source.colors:
        assert R.carrier(a) == B.carrier(phi.f(a))
    # restriction along the identity is the same algebra
    R2 = restrict(identity_map(phi.target), B)
    assert R2.table() == B.table()


def test_free_algebra_universal_property():
    op = G.build_operad("As", SMALL)
    F = free_algebra(op, {2: ("g",)}, max_degree=3)
    # one word of each length in one generator, up to two vertices: g^0 .. g^2
    assert len(F.carrier(2)) == 3
    assert check_algebra_laws(F).ok
    A = monoid_algebra(op, range(4), lambda a, b: (a + b) % 4, 0)
    maps = [F.extend(A, {(2, "g"): v}) for v in range(4)]
    assert all(not h.check() for h in maps)
    assert len(hom_set(F, A)) == 4


def test_free_algebra_on_two_generators_counts_words():
    op = G.build_operad("As", SMALL)
    F = free_algebra(op, {2: ("g", "h")}, max_degree=3)
    assert len(F.carrier(2)) == 1 + 2 + 4


def test_free_algebra_symmetric_quotient():
    # over the commutative operad words collapse to multisets
    op = G.build_operad("C", G.GraphWindow(3, 2, 2))
    F = free_algebra(op, {2: ("g", "h")}, max_degree=2)
    two = [t for t in F.carrier(2) if len(t.args) == 2]
    assert {tuple(sorted(t.args)) for t in two} == {("g", "g"), ("g", "h"), ("h", "h")}
    # the vertex swap acts freely on C(2,2;2): mixed words keep every tree, squares keep orbits
    n = len(op.carrier(Profile((2, 2), 2)))
    assert len(two) == n + 2 * (n // 2)


def test_free_algebra_degree_truncation_raises():
    op = G.build_operad("As", SMALL)
    F = free_algebra(op, {2: ("g",)}, max_degree=1)
    g = F.generator(2, "g")
    p, x = next((p, x) for p, x in op.elements() if p.arity == 2)
    with pytest.raises(TruncationError):
        F.act(p, x, (g, g))


@pytest.mark.parametrize("n,m,c", [(1, 3, 0), (2, 4, 2), (3, 3, 1), (2, 2, 0), (4, 2, 1)])
def test_induction_along_cyclic_maps(n, m, c):
    phi = cyclic_map(n, m, c)
    A = regular_algebra(phi.source, n)
    L = induce(phi, A)
    assert check_algebra_laws(L).ok
    # inducing the regular action gives the regular action of the target
    assert len(L.carrier("*")) == m
    for d in (d for d in range(1, m + 1) if m % d == 0):
        B = regular_algebra(phi.target, d)
        nl, nr, same = induced_hom_bijection(phi, A, B)
        assert same and nl == nr


def test_induction_needs_an_exact_window():
    phi = G.builtin_maps(SMALL)["As->Oplus"]
    with pytest.raises(TruncationError):
        induce(phi, additive_algebra(phi.source, 2))


def test_coproduct_universal_property():
    rng = random.Random(9)
    op = cyclic_action_operad(2, [1], "Z2")
    algs = []
    for k in (1, 2):
        pts = [(0, 0)] + [(1, r) for r in range(k)]
        algs.append(FiniteAlgebra(
            op, {"*": pts},
            lambda p, x, e, k=k: (0, 0) if not p.arity else (e[0][0], (e[0][1] + x) % (1, k)[e[0][0]])))
    assert all(check_algebra_laws(A).ok for A in algs)
    Cp = coproduct(algs)
    assert check_algebra_laws(Cp).ok
    # the single constant is shared, the free parts add up
    assert len(Cp.carrier("*")) == 1 + 1 + 2
    for _ in range(4):
        k = rng.choice([1, 2])
        D = algs[k - 1]
        homs_each = [hom_set(A, D) for A in algs]
        assert len(hom_set(Cp, D)) == len(homs_each[0]) * len(homs_each[1])
        for f, g in itertools.product(*homs_each):
            h = Cp.mediate([f, g])
            assert not h.check()
            assert Cp.injection(0).then(h).key() == f.key()
            assert Cp.injection(1).then(h).key() == g.key()


def test_coproduct_with_degree_truncation():
    op = G.build_operad("As", SMALL)
    A = monoid_algebra(op, range(2), lambda a, b: a ^ b, 0, name="A")
    B = monoid_algebra(op, range(2), lambda a, b: a | b, 0, name="B")
    full = coproduct([A, B])
    kept = coproduct([A, B], keep=lambda args: len(args) <= 2)
    assert set(kept.carrier(2)) <= set(full.carrier(2))
    assert all(len(t[2]) <= 2 for t in kept.carrier(2))
    with pytest.raises(ContractError):
        coproduct([])


def test_monoid_action_operad_algebra():
    op = action_operad((0, 1), lambda a, b: a * b, 1, (), None, "M2")
    A = FiniteAlgebra(op, {"*": (0, 1, 2)}, lambda p, x, e: e[0] if x == 1 else 0)
    assert check_algebra_laws(A).ok
