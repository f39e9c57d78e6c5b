import itertools
import math
import random

import pytest

from catext import graphs as G
from catext.adjoint import (
    counit, phi_star, underlying_mapping, underlying_right_adjoint, verify_adjunction,
)
from catext.algebras import (
    FiniteAlgebra, additive_algebra, check_algebra_laws, comparison_summand_check,
    monoid_algebra, random_additive_algebra, restrict,
)
from catext.collections import ContractError, Profile, TruncationError
from catext.operads import positive_map, unary_generators

from support import SMALL, TINY

YES = ["O->CGK", "CGK->C", "C->Mg", "As->Oplus", "Oplus2->Oplus3", "OA->OB"]
LIMIT = 20000


@pytest.fixture(scope="module")
def maps():
    return G.builtin_maps(SMALL)


def brute_family_count(phi, A, b):
    """Assignments (a, q) -> A_a over unary q: b -> f a, kept when
    g(a', φ(u)∘q) = u·g(a, q) for every unary u: a -> a'."""
    P, Q = phi.source, phi.target
    nodes = [(a, q) for a in P.colors for q in Q.carrier(Profile((b,), phi.f(a)))]
    unary = [(p, u) for p, u in P.elements() if p.arity == 1]
    if math.prod(len(A.carrier(a)) for a, _ in nodes) > LIMIT:
        return None
    count = 0
    for vals in itertools.product(*(A.carrier(a) for a, _ in nodes)):
        g = dict(zip(nodes, vals))
        count += all(
            g[(p.output, Q.compose(phi.map_profile(p), phi(p, u), ((Profile((b,), phi.f(a)), q),)))]
            == A.act(p, u, (g[(a, q)],))
            for p, u in unary for a, q in nodes if a == p.inputs[0])
    return count


def test_pushforward_along_as_into_oplus(maps):
    phi = maps["As->Oplus"]
    A = monoid_algebra(phi.source, range(3), lambda a, b: (a + b) % 3, 0, name="Z3")
    R = phi_star(phi, A)
    assert check_algebra_laws(R).ok
    # the image color keeps A; colors with no unary maps into the image are points
    assert len(R.carrier(2)) == 3
    assert all(len(R.carrier(b)) == 1 for b in R.carriers if b != 2)


def test_pushforward_along_genus_inclusion(maps):
    phi = maps["C->Mg"]
    R = phi_star(phi, additive_algebra(phi.source, 3))
    assert check_algebra_laws(R).ok
    for (k, g), elems in R.carriers.items():
        assert len(elems) == (3 if g == 0 else 1)


@pytest.mark.parametrize("name", YES)
def test_family_counts_match_brute_force(maps, name):
    phi = maps[name]
    A = additive_algebra(phi.source, 2)
    R = phi_star(phi, A)
    checked = 0
    for b in phi.target.colors:
        n = brute_family_count(phi, A, b)
        if n is not None:
            assert len(R.carrier(b)) == n, b
            checked += 1
    assert checked


@pytest.mark.parametrize("name", YES)
def test_adjunction_on_random_pairs(maps, name):
    phi = maps[name]
    rng = random.Random(11)
    nontrivial = 0
    for _ in range(5):
        A = random_additive_algebra(phi.source, rng, 3)
        B = random_additive_algebra(phi.target, rng, 3)
        rep = verify_adjunction(phi, A, B)
        assert rep.ok, rep.lines()
        nontrivial += rep.counts[0] > 1
    assert nontrivial


@pytest.mark.parametrize("name,ka,kb", [("O->CGK", 2, 2), ("C->Mg", 2, 2), ("C->Mg", 3, 1),
                                         ("As->Oplus", 3, 3)])
def test_underlying_adjunction(maps, name, ka, kb):
    # with only unary constraints the hom-sets grow fast, so the algebras stay small
    phi = maps[name]
    A = additive_algebra(phi.source, ka)
    B = additive_algebra(phi.target, kb)
    rep = verify_adjunction(phi, A, B, underlying=True)
    assert rep.ok and rep.counts[0] > 1
    U = underlying_right_adjoint(phi, A)
    R = phi_star(phi, A)
    # the underlying carriers agree with the full right adjoint
    for b in R.carriers:
        assert len(U.carrier(b)) == len(R.carrier(b))


def test_counit_is_an_algebra_map(maps):
    phi = maps["CGK->C"]
    A = additive_algebra(phi.source, 3)
    R = phi_star(phi, A)
    assert not counit(phi, A, R).check()


@pytest.mark.parametrize("name,prof", [("C->M", ((), 0)), ("Ons->O", ((1, 3), 2)),
                                       ("As->O", ((1, 3), 2))])
def test_no_maps_refuse_to_act_where_extension_fails(maps, name, prof):
    phi = maps[name]
    R = phi_star(phi, additive_algebra(phi.source, 2))
    p = Profile(*prof)
    q = phi.target.carrier(p)[0]
    args = tuple(R.carrier(c)[0] for c in p.inputs)
    with pytest.raises(ContractError):
        R.act(p, q, args)


def test_truncated_source_colors_are_refused():
    phi = G.builtin_maps(TINY)["Mg->M"]
    with pytest.raises(TruncationError):
        phi_star(phi, additive_algebra(phi.source, 2))


def test_restriction_of_pushforward_counit_triangle(maps):
    phi = maps["Oplus2->Oplus3"]
    A = additive_algebra(phi.source, 2)
    R = phi_star(phi, A)
    fR = restrict(phi, R)
    assert check_algebra_laws(fR).ok


def test_mutated_algebra_breaks_adjunction_inputs(maps):
    phi = maps["As->Oplus"]
    A = additive_algebra(phi.source, 3)
    table = A.table()
    key = next(k for k in table if k[0].arity == 2)
    table[key] = (table[key] + 1) % 3
    bad = FiniteAlgebra(phi.source, A.carriers, table)
    assert not check_algebra_laws(bad).ok


# ---------------------------------------------------------------------------
# multilinear summands of the comparison map


@pytest.fixture(scope="module")
def wide():
    return G.builtin_maps(G.GraphWindow(2, 4, 4))


@pytest.mark.parametrize("bs,a", [((2,), 2), ((3,), 3), ((2, 3), 3), ((3, 3), 4), ((2, 2), 2)])
def test_summand_bijective_for_planar_into_cyclic(wide, bs, a):
    res = comparison_summand_check(positive_map(wide["O->CGK"]), bs, a)
    assert res.status == "bijective"
    assert res.n_classes == res.n_targets
    assert res.agrees


def test_summand_fails_for_nonsymmetric_into_planar(wide):
    res = comparison_summand_check(positive_map(wide["Ons->O"]), (3, 3), 4)
    assert res.status == "fails"
    assert (res.n_classes, res.n_targets, len(res.unhit)) == (16, 24, 8)
    assert res.agrees
    assert res.ext_unhit == res.unhit


@pytest.mark.parametrize("name,bs,a", [("O->CGK", (2, 3), 3), ("O->CGK", (1, 2, 3), 2),
                                        ("Ons->O", (3, 3), 4), ("Ons->O", (1, 3), 2)])
def test_summand_ordered_wirings_match_all_wirings(wide, name, bs, a):
    phi = positive_map(wide[name])
    fast = comparison_summand_check(phi, bs, a)
    full = comparison_summand_check(phi, bs, a, all_wirings=True)
    assert (fast.status, fast.n_classes, fast.n_targets) == (full.status, full.n_classes, full.n_targets)
    assert fast.unhit == full.unhit and len(fast.collisions) == len(full.collisions)
    assert fast.agrees and full.agrees


def test_unary_generators_generate():
    op = G.build_operad("O", G.GraphWindow(2, 4, 4))
    gens = unary_generators(op)
    unary = {(p, u) for p, u in op.elements() if p.arity == 1}
    assert set(gens) <= unary and len(gens) < len(unary)
    reached = {(op.unit_profile(a), op.unit(a)) for a in op.colors}
    while True:
        new = {(Profile(g[0].inputs, r[0].output), op.compose(r[0], r[1], (g,)))
               for r in reached for g in gens if g[0].output == r[0].inputs[0]} - reached
        if not new:
            break
        reached |= new
    assert reached == unary


def test_summand_collision_on_unary_color(wide):
    res = comparison_summand_check(positive_map(wide["Ons->O"]), (1, 3), 2)
    assert res.status == "fails" and res.collisions


def test_summand_outside_window_is_incomplete(maps):
    res = comparison_summand_check(positive_map(maps["O->CGK"]), (3, 3), 4)
    assert res.status == "incomplete"


def test_summand_needs_positive_operads(maps):
    with pytest.raises(ContractError):
        comparison_summand_check(maps["O->CGK"], (2,), 2)


def test_underlying_mapping_keeps_color_flag(maps):
    phi = maps["O->CGK"]
    assert underlying_mapping(phi).colors_complete == phi.colors_complete
