import random

import pytest

from catext import graphs as G
from catext.collections import ContractError, DomainError, Profile, TruncationError
from catext.extension import (ExtensionMorphism, check_maximal_sieve, factorize,
                              full_wiring_classes, is_categorical_extension, is_monoidal_extension)

from support import SMALL, TINY, random_monochrome_map


@pytest.fixture(scope="module")
def maps():
    ops = {k: G.build_operad(k, SMALL) for k in ("C", "CGK", "O", "Ons", "Oplus", "As")}
    M, Mg, C4 = G.build_operad("M", TINY), G.build_operad("Mg", TINY), G.build_operad("C", TINY)
    t2, t3 = G.build_operad("OplusTrunc", SMALL, ell=2), G.build_operad("OplusTrunc", SMALL, ell=3)
    OA = G.build_operad("OColored", SMALL, palette=("a1", "a2"))
    OB = G.build_operad("OColored", SMALL, palette=("b",))
    OB2 = G.build_operad("OColored", SMALL, palette=("b1", "b2"))
    return {
        "O->CGK": (G.inclusion(ops["O"], ops["CGK"]), "yes"),
        "CGK->C": (G.inclusion(ops["CGK"], ops["C"]), "yes"),
        "C->Mg": (G.genus_zero_map(C4, Mg), "yes"),
        "As->Oplus": (G.inclusion(ops["As"], ops["Oplus"]), "yes"),
        "Oplus2->Oplus3": (G.inclusion(t2, t3), "yes"),
        "OA->OB2": (G.recolor_map(OA, OB2, {"a1": "b1", "a2": "b2"}), "yes"),
        "Ons->O": (G.inclusion(ops["Ons"], ops["O"]), "no"),
        "C->M": (G.inclusion(C4, M), "no"),
        "As->O": (G.inclusion(ops["As"], ops["O"]), "no"),
        "OA->OB": (G.recolor_map(OA, OB, {"a1": "b", "a2": "b"}), "no"),
    }


@pytest.mark.parametrize("name", ["O->CGK", "CGK->C", "C->Mg", "As->Oplus", "Oplus2->Oplus3",
                                  "OA->OB2", "Ons->O", "C->M", "As->O", "OA->OB"])
def test_verdicts_at_small_windows(maps, name):
    phi, expected = maps[name]
    rep = is_categorical_extension(phi, materialize=False)
    assert rep.verdict == expected
    for w in rep.witness_profiles():
        assert phi.target.window.contains(Profile(w.inputs, phi.f(w.output)))


@pytest.mark.parametrize("name", ["As->O", "Ons->O", "As->Oplus", "OA->OB", "C->Mg"])
def test_classes_match_relation_chasing_oracle(maps, name):
    phi, _ = maps[name]
    ext = ExtensionMorphism(phi)
    for tp in ext.target_profiles()[:12]:
        if tp.arity > 2:
            continue
        try:
            mine = set(ext.classes(tp))
        except TruncationError:  # truncated profiles carry no classes to compare
            continue
        oracle = full_wiring_classes(phi, tp)
        assert {ext.classify(e) for e in oracle} == mine
        for rep_, members in oracle.items():
            assert {ext.classify(f) for f in members} == {ext.classify(rep_)}


@pytest.mark.parametrize("name", ["O->CGK", "Ons->O", "As->O", "OA->OB"])
def test_transversal_and_union_find_agree(maps, name):
    phi, _ = maps[name]
    a = ExtensionMorphism(phi, "transversal")
    b = ExtensionMorphism(phi, "union-find")
    for tp in a.target_profiles():
        ra, rb = a.result(tp), b.result(tp)
        assert (ra.status, ra.n_classes, ra.n_targets) == (rb.status, rb.n_classes, rb.n_targets)
        assert set(ra.unhit) == set(rb.unhit)


def test_unknown_method_rejected(maps):
    with pytest.raises(ContractError):
        ExtensionMorphism(maps["As->O"][0], "guess")


def test_factorization_inverts_extension(maps):
    phi, _ = maps["O->CGK"]
    rep = is_categorical_extension(phi)
    ext = rep.morphism
    for tp in ext.target_profiles():
        for q in phi.target.carrier(Profile(tp.inputs, phi.f(tp.output))):
            assert ext(factorize(rep, tp, q)) == q
    with pytest.raises(DomainError):
        factorize(rep, ext.target_profiles()[0], "not-an-operation")


def test_factorization_needs_yes(maps):
    rep = is_categorical_extension(maps["As->O"][0])
    with pytest.raises(ContractError):
        factorize(rep, rep.profiles[0].profile, None)


def test_as_to_o_misses_a_tree():
    As, O = G.build_operad("As", SMALL), G.build_operad("O", SMALL)
    rep = is_categorical_extension(G.inclusion(As, O), materialize=False)
    bad = rep.failures()[0]
    assert bad.unhit and bad.n_classes < bad.n_targets


@pytest.mark.parametrize("name", list(["O->CGK", "CGK->C", "As->Oplus", "Oplus2->Oplus3",
                                       "Ons->O", "C->M", "As->O", "OA->OB2"]))
def test_maximal_sieve_implies_extension(maps, name):
    phi, expected = maps[name]
    if not phi.is_color_injective():
        with pytest.raises(ContractError):
            check_maximal_sieve(phi)
        return
    sieve = check_maximal_sieve(phi)
    if sieve.verdict == "yes":
        assert expected == "yes"


def test_sieve_failures_name_the_condition(maps):
    s = check_maximal_sieve(maps["As->O"][0])
    assert s.verdict == "no" and s.failed in ("ideal", "fully-faithful")
    assert check_maximal_sieve(maps["Oplus2->Oplus3"][0]).verdict == "yes"


def test_monoidal_equals_categorical_on_random_monochrome_maps():
    rng = random.Random(20)
    for _ in range(20):
        phi, oracle = random_monochrome_map(rng)
        assert is_monoidal_extension(phi) == oracle
        assert is_categorical_extension(phi).verdict == oracle


def test_monoidal_needs_one_color(maps):
    with pytest.raises(ContractError):
        is_monoidal_extension(maps["As->O"][0])


def test_report_lines_and_summary(maps):
    rep = is_categorical_extension(maps["As->O"][0], materialize=False)
    lines = rep.lines()
    assert lines[0].startswith("#")
    assert any("fails" in ln for ln in lines)
    assert rep.summary()["verdict"] == "no"
