"""The extension morphism P ◁_⌞P⌟ (f̄ ◁ ⌞Q⌟) -> f̄ ◁ Q and the verdicts built on it.

Source classes are stored on the identity-wiring transversal: a composite with
unary inner operations is equivalent under the symmetric relation to exactly
one composite whose leaf matching is the identity, so a class is a pair
``(p, (q_1, ..., q_n))`` modulo moving unary P-operations across through φ.

Two routes compute the classes.  When ⌞P⌟ is a groupoid acting freely on
the unary Q-operations through φ, each class has exactly one representative
whose unary parts are orbit minima.  Otherwise every representative is
enumerated and glued with a union-find.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from networkx.utils import UnionFind

from . import perm as Pm
from .collections import (
    CompositeElement, ContractError, DomainError, Profile, Quotient, TruncationError,
    closure_classes, compose_product,
)
from .operads import FBarQ, OperadMap
from .perm import okey

HYPOTHESIS = "ground category: finite sets (coproducts are conservative)"


def source_element(pp: Profile, p, inners) -> CompositeElement:
    return CompositeElement(pp, p, tuple(inners), tuple((j,) for j in range(len(inners))))


@dataclass
class ProfileResult:
    profile: Profile  # (b..; a) with b.. colors of Q and a a color of P
    status: str  # "bijective", "fails" or "incomplete"
    n_classes: int = 0
    n_targets: int = 0
    unhit: list = field(default_factory=list)
    collisions: list = field(default_factory=list)  # (target, [classes])
    reasons: list = field(default_factory=list)


@dataclass
class ExtensionReport:
    name: str
    verdict: str  # "yes", "no" or "indeterminate"
    profiles: list
    method: str
    factorization: dict | None = None

    def failures(self) -> list:
        return [r for r in self.profiles if r.status == "fails"]

    def incomplete(self) -> list:
        return [r for r in self.profiles if r.status == "incomplete"]

    def witness_profiles(self) -> list:
        return [r.profile for r in self.failures()]

    def lines(self) -> list:
        out = [f"# {HYPOTHESIS}", f"# extension morphism of {self.name} ({self.method})"]
        for r in self.profiles:
            line = f"profile {r.profile} {r.status} classes={r.n_classes} targets={r.n_targets}"
            if r.unhit:
                line += " unhit=" + ",".join(str(t) for t in r.unhit[:4])
            if r.collisions:
                t, cls = r.collisions[0]
                line += f" collision={t}<-" + ";".join(str(c) for c in cls)
            if r.reasons:
                line += " reason=" + "; ".join(r.reasons)
            out.append(line)
        return out

    def summary(self) -> dict:
        return {
            "map": self.name,
            "profiles": len(self.profiles),
            "bijective": sum(r.status == "bijective" for r in self.profiles),
            "failing": len(self.failures()),
            "incomplete": len(self.incomplete()),
            "method": self.method,
            "verdict": self.verdict,
        }


class ExtensionMorphism:
    """Per-profile source classes and their images in f̄ ◁ Q."""

    def __init__(self, phi: OperadMap, method: str = "auto", profiles=None):
        self.phi = phi
        self.P, self.Q = phi.source, phi.target
        self._unary_P = {}
        for pr, u in self.P.elements():
            if pr.arity == 1:
                self._unary_P.setdefault(pr.output, []).append((pr, u))
        self._unary_Q = {}
        for pr, q in self.Q.elements():
            if pr.arity == 1:
                self._unary_Q.setdefault(pr.inputs[0], []).append((pr, q))
        self._orbits = {}
        if method == "auto":
            method = "transversal" if self._groupoid_ok() else "union-find"
        if method not in ("transversal", "union-find"):
            raise ContractError(f"unknown method {method}")
        self.method = method
        self._classes = {}
        self._class_of = {}
        self._image = {}
        self._results = {}
        self._only = None if profiles is None else set(profiles)

    # ------------------------------------------------------------------
    # structure of the unary parts

    def _unary_from(self, b):
        """Unary Q-operations with input ``b``, grouped by P-color over their output."""
        out = {}
        for pr, q in self._unary_Q.get(b, ()):
            for c in self._preimage(pr.output):
                out.setdefault(c, []).append((pr, q))
        return out

    def _preimage(self, d):
        return [c for c in self.P.colors if self.phi.f(c) == d]

    def _groupoid_ok(self) -> bool:
        """Every unary P-operation is invertible and φ is injective on unary hom-sets."""
        P = self.P
        for a, us in self._unary_P.items():
            images = {}
            for pr, u in us:
                c = pr.inputs[0]
                back = [(vp, v) for vp, v in self._unary_P.get(c, ()) if vp.inputs[0] == a]
                if not any(P.compose(pr, u, ((vp, v),)) == P.units[a]
                           and P.compose(vp, v, ((pr, u),)) == P.units[c] for vp, v in back):
                    return False
                key = (c, self.phi(pr, u))
                if key in images:
                    return False
                images[key] = u
        return True

    def _orbit_table(self, b):
        """For a Q-color ``b``: node (c, q) -> (transversal node, g) with q = φ(g)∘t.

        Returns None when the action is not free.
        """
        if b in self._orbits:
            return self._orbits[b]
        nodes = []
        for c, qs in self._unary_from(b).items():
            nodes.extend((c, pr, q) for pr, q in qs)
        nodes.sort(key=lambda n: (okey(n[0]), okey(n[2])))
        table = {}
        for c, pr, q in nodes:
            if (c, q) in table:
                continue
            for up, u in self._all_unary_out(c):
                a = up.output
                fu = self.phi(up, u)
                r = self.Q.compose(self.phi.map_profile(up), fu, ((pr, q),))
                if (a, r) in table:
                    self._orbits[b] = None
                    return None
                table[(a, r)] = ((c, pr, q), (up, u))
        self._orbits[b] = table
        return table

    def _all_unary_out(self, c):
        return [(pr, u) for a, us in self._unary_P.items() for pr, u in us if pr.inputs[0] == c]

    # ------------------------------------------------------------------
    # profiles

    def target_profiles(self) -> list:
        out = []
        for qp in self.Q.profiles():
            for a in self._preimage(qp.output):
                tp = Profile(qp.inputs, a)
                if self._only is None or tp in self._only:
                    out.append(tp)
        return sorted(set(out), key=Profile.sort_key)

    def _source_profiles(self, tp: Profile):
        """Input color lists over ``tp`` plus the reasons the data may be truncated."""
        reasons = []
        if not self.phi.colors_complete:
            reasons.append("source colors truncated")
        cands = []
        for b in tp.inputs:
            _, ok = self.Q.unary_targets(b)
            if not ok:
                reasons.append(f"unary targets of {b} truncated")
            cands.append(sorted(self._unary_from(b), key=okey))
        profiles = []
        for ins in itertools.product(*cands):
            pp = Profile(ins, tp.output)
            try:
                if self.P.window.classify(pp) == "empty":
                    continue
            except TruncationError as e:
                reasons.append(f"source profile {pp} {e.reason}")
                continue
            for c in set(ins):
                _, ok = self.P.unary_sources(c)
                if not ok:
                    reasons.append(f"unary sources of {c} truncated")
            profiles.append(pp)
        return profiles, sorted(set(reasons))

    # ------------------------------------------------------------------
    # classes

    def classes(self, tp: Profile) -> list:
        if tp not in self._classes:
            self._compute(tp)
        return self._classes[tp]

    def _compute(self, tp: Profile):
        pps, _ = self._source_profiles(tp)
        if self.method == "transversal":
            classes = self._transversal_classes(tp, pps)
        else:
            classes = self._union_find_classes(tp, pps)
        self._classes[tp] = classes

    def _transversal_classes(self, tp, pps):
        per_slot = []
        for b in tp.inputs:
            table = self._orbit_table(b)
            if table is None:
                raise ContractError("unary action is not free; use the union-find route")
            reps = {}
            for node, (t, _) in table.items():
                reps.setdefault(t[0], set()).add(t)
            per_slot.append({c: sorted(ts, key=lambda n: okey(n[2])) for c, ts in reps.items()})
        out = []
        for pp in pps:
            choices = [per_slot[j].get(c, []) for j, c in enumerate(pp.inputs)]
            for p in self.P.carrier(pp):
                for ts in itertools.product(*choices):
                    out.append(source_element(pp, p, tuple((pr, q) for _, pr, q in ts)))
        return out

    def _all_reps(self, tp, pps):
        for pp in pps:
            choices = []
            for b, c in zip(tp.inputs, pp.inputs):
                fc = self.phi.f(c)
                choices.append([(pr, q) for pr, q in self._unary_Q.get(b, ()) if pr.output == fc])
            for p in self.P.carrier(pp):
                for qs in itertools.product(*choices):
                    yield source_element(pp, p, qs)

    def _union_find_classes(self, tp, pps):
        reps = list(self._all_reps(tp, pps))
        repset = set(reps)
        uf = UnionFind(reps)
        pre = {}
        for e in reps:
            for j, ((pr, q), c) in enumerate(zip(e.inners, e.outer_profile.inputs)):
                for up, u in self._unary_P.get(c, ()):
                    key = (up, u, pr.inputs[0], q)
                    if key not in pre:
                        pre[key] = self._preimages(up, u, pr.inputs[0], pr, q)
                    for qp2, q2 in pre[key]:
                        moved = self.P.partial(e.outer_profile, e.outer, j, up, u)
                        pp2 = Profile(e.outer_profile.inputs[:j] + (up.inputs[0],)
                                      + e.outer_profile.inputs[j + 1:], tp.output)
                        inners = list(e.inners)
                        inners[j] = (qp2, q2)
                        other = source_element(pp2, moved, tuple(inners))
                        if other not in repset:
                            raise TruncationError(pp2, "related representative outside window")
                        uf.union(e, other)
        best = {}
        for e in reps:
            r = uf[e]
            if r not in best or e.sort_key() < best[r].sort_key():
                best[r] = e
        for e in reps:
            self._class_of[e] = best[uf[e]]
        return sorted(set(best.values()), key=CompositeElement.sort_key)

    def _preimages(self, up, u, b, pr, q):
        """Unary q' with input ``b`` and φ(u)∘q' = q."""
        c = up.inputs[0]
        fc = self.phi.f(c)
        fu = self.phi(up, u)
        out = []
        for pr2, q2 in self._unary_Q.get(b, ()):
            if pr2.output == fc and self.Q.compose(self.phi.map_profile(up), fu, ((pr2, q2),)) == q:
                out.append((pr2, q2))
        return out

    def classify(self, e: CompositeElement) -> CompositeElement:
        """Canonical representative of the class of an identity-wired composite."""
        tp = Profile(tuple(pr.inputs[0] for pr, _ in e.inners), e.outer_profile.output)
        if self.method == "union-find":
            self.classes(tp)
            return self._class_of[e]
        moved_inners = []
        ts = []
        for (pr, q), c in zip(e.inners, e.outer_profile.inputs):
            table = self._orbit_table(pr.inputs[0])
            t, g = table[(c, q)]
            ts.append((t[1], t[2]))
            moved_inners.append(g)
        pp = Profile(tuple(g[0].inputs[0] for g in moved_inners), e.outer_profile.output)
        p = self.P.compose(e.outer_profile, e.outer, tuple(moved_inners))
        return source_element(pp, p, tuple(ts))

    # ------------------------------------------------------------------
    # the morphism

    def __call__(self, e: CompositeElement):
        r = self._image.get(e)
        if r is None:
            phi = self.phi
            r = self.Q.compose(phi.map_profile(e.outer_profile), phi(e.outer_profile, e.outer),
                               e.inners)
            self._image[e] = r
        return r

    def result(self, tp: Profile) -> ProfileResult:
        if tp in self._results:
            return self._results[tp]
        qp = Profile(tp.inputs, self.phi.f(tp.output))
        targets = self.Q.carrier(qp) if self.Q.window.contains(qp) else ()
        _, reasons = self._source_profiles(tp)
        if reasons:
            # no failure here could count as a witness, so skip the classes
            res = ProfileResult(tp, "incomplete", 0, len(targets), reasons=reasons)
            self._results[tp] = res
            return res
        cls = self.classes(tp)
        hits = {}
        for e in cls:
            hits.setdefault(self(e), []).append(e)
        unhit = [t for t in targets if t not in hits]
        coll = [(t, es) for t, es in hits.items() if len(es) > 1]
        coll.sort(key=lambda te: okey(te[0]))
        status = "fails" if unhit or coll else "bijective"
        res = ProfileResult(tp, status, len(cls), len(targets), unhit, coll, reasons)
        self._results[tp] = res
        return res

    def table(self, tp: Profile) -> dict:
        """class representative -> target element."""
        return {e: self(e) for e in self.classes(tp)}


def is_categorical_extension(phi: OperadMap, method: str = "auto", profiles=None,
                             materialize: bool = True) -> ExtensionReport:
    """Decide whether the extension morphism is a bijection at every window profile."""
    ext = ExtensionMorphism(phi, method, profiles)
    results = []
    for tp in ext.target_profiles():
        try:
            results.append(ext.result(tp))
        except TruncationError as err:
            results.append(ProfileResult(tp, "incomplete", reasons=[f"{err.profile} {err.reason}"]))
    if any(r.status == "fails" for r in results):
        verdict = "no"
    elif any(r.status == "incomplete" for r in results):
        verdict = "indeterminate"
    else:
        verdict = "yes"
    rep = ExtensionReport(phi.name, verdict, results, ext.method)
    rep.morphism = ext
    if verdict == "yes" and materialize:
        fact = {}
        for r in results:
            for e in ext.classes(r.profile):
                fact[(r.profile, ext(e))] = e
        rep.factorization = fact
    return rep


def factorize(report: ExtensionReport, tp: Profile, q) -> CompositeElement:
    """The unique class over ``q`` in Q(b..; f a), as its canonical representative."""
    if report.verdict != "yes" or report.factorization is None:
        raise ContractError("factorization needs a yes verdict")
    try:
        return report.factorization[(tp, q)]
    except KeyError:
        raise DomainError(f"{q} is not an operation at {tp}") from None


# ---------------------------------------------------------------------------
# the brute-force oracle over all wirings


def full_wiring_classes(phi: OperadMap, tp: Profile) -> dict:
    """Classes of every composite (p, σ, q..) at ``tp`` by relation chasing.

    Returns a dict from identity-wired representatives to frozensets of the
    identity-wired members of their class.
    """
    ext = ExtensionMorphism(phi, "union-find", [tp])
    P_ = phi.source
    pps, _ = ext._source_profiles(tp)
    n = tp.arity
    elems = []
    for e in ext._all_reps(tp, pps):
        for s in Pm.all_perms(n):
            # the element with leaf matching s and inputs rearranged to match
            x = P_.act(e.outer_profile, s, e.outer)
            elems.append(CompositeElement(e.outer_profile.permuted(s), x,
                                          Pm.permute(e.inners, s), tuple((s[j],) for j in range(n))))
    elem_set = set(elems)

    def neighbours(e):
        out = []
        for s in Pm.all_perms(n):
            x = P_.act(e.outer_profile, s, e.outer)
            out.append(CompositeElement(e.outer_profile.permuted(s), x, Pm.permute(e.inners, s),
                                        Pm.permute(e.leaves, s)))
        for j, ((pr, q), c) in enumerate(zip(e.inners, e.outer_profile.inputs)):
            for up, u in ext._unary_P.get(c, ()):
                for qp2, q2 in ext._preimages(up, u, pr.inputs[0], pr, q):
                    moved = P_.partial(e.outer_profile, e.outer, j, up, u)
                    pp2 = Profile(e.outer_profile.inputs[:j] + (up.inputs[0],)
                                  + e.outer_profile.inputs[j + 1:], tp.output)
                    inners = list(e.inners)
                    inners[j] = (qp2, q2)
                    out.append(CompositeElement(pp2, moved, tuple(inners), e.leaves))
        return [f for f in out if f in elem_set]

    # unary moves are only generated in one direction; add their reverses
    rev = {}
    for e in elems:
        for f in neighbours(e):
            rev.setdefault(f, []).append(e)

    def both(e):
        return neighbours(e) + rev.get(e, [])

    closed = closure_classes(elems, both)
    ident = tuple((j,) for j in range(n))
    out = {}
    for e, cls in closed.items():
        if e.leaves == ident:
            out[e] = frozenset(f for f in cls if f.leaves == ident)
    return out


# ---------------------------------------------------------------------------
# monochrome monoidal extensions through the generic relative product


def is_monoidal_extension(phi: OperadMap) -> str:
    """P ◁_⌞P⌟ ⌞Q⌟ -> Q built from the general composite product and a quotient."""
    P_, Q = phi.source, phi.target
    if len(P_.colors) != 1 or len(Q.colors) != 1:
        raise ContractError("monoidal extensions need one color on each side")
    M = FBarQ(phi, arity_one=True)
    n_max = Q.window.max_arity
    incomplete = not (phi.colors_complete and P_.window.closed_colors)
    try:
        PM = compose_product(P_.collection, M, max_arity=n_max)
    except TruncationError:
        return "indeterminate"
    unary = [(pr, u) for pr, u in P_.elements() if pr.arity == 1]
    pairs = []
    for p_, e in PM.elements():
        for j, (mp, m) in enumerate(e.inners):
            for up, u in unary:
                if up.output != e.outer_profile.inputs[j]:
                    continue
                fu = phi(up, u)
                for mp2, m2 in M.elements():
                    if mp2.output != up.inputs[0] or mp2.inputs != mp.inputs:
                        continue
                    if Q.compose(phi.map_profile(up), fu, ((M.target_profile(mp2), m2),)) != m:
                        continue
                    moved = P_.partial(e.outer_profile, e.outer, j, up, u)
                    pp2 = Profile(e.outer_profile.inputs[:j] + (up.inputs[0],)
                                  + e.outer_profile.inputs[j + 1:], e.outer_profile.output)
                    inners = list(e.inners)
                    inners[j] = (mp2, m2)
                    raw = CompositeElement(pp2, moved, tuple(inners), e.leaves)
                    try:
                        other = PM.classify(raw)
                    except (DomainError, TruncationError):
                        incomplete = True
                        continue
                    pairs.append(((p_, e), (p_, other)))
    quot = Quotient(PM, pairs)
    hits = {}
    for p_, e in quot.elements():
        image = CompositeElement(phi.map_profile(e.outer_profile),
                                 phi(e.outer_profile, e.outer),
                                 tuple((M.target_profile(mp), m) for mp, m in e.inners), e.leaves)
        qp = Profile(p_.inputs, phi.f(p_.output))
        hits.setdefault((qp, Q.mu(image)), []).append(e)
    if any(len(v) > 1 for v in hits.values()):
        return "no"
    if any((qp, q) not in hits for qp, q in Q.elements() if qp.arity <= n_max):
        return "no"
    return "indeterminate" if incomplete else "yes"


# ---------------------------------------------------------------------------
# maximal sieves


@dataclass
class SieveReport:
    verdict: str  # "yes" or "no", for the profiles inside both windows
    failed: str | None = None  # "fully-faithful" or "ideal"
    witness: object = None
    checked: int = 0

    def lines(self) -> list:
        out = [f"# maximal sieve check ({self.checked} profiles)"]
        if self.failed:
            out.append(f"failed {self.failed} at {self.witness}")
        out.append(f"verdict {self.verdict}")
        return out


def check_maximal_sieve(phi: OperadMap) -> SieveReport:
    """Fully faithful on the image colors, and no operation with an output in
    the image takes an input outside it."""
    if not phi.is_color_injective():
        raise ContractError("the maximal sieve test needs an injective color map")
    P_, Q = phi.source, phi.target
    back = {phi.f(a): a for a in P_.colors}
    rep = SieveReport("yes")
    for qp in Q.profiles():
        if qp.output not in back:
            continue
        rep.checked += 1
        if any(b not in back for b in qp.inputs):
            if Q.carrier(qp):
                rep.verdict, rep.failed, rep.witness = "no", "ideal", (qp, Q.carrier(qp)[0])
                return rep
            continue
        pp = Profile(tuple(back[b] for b in qp.inputs), back[qp.output])
        if not P_.window.contains(pp):
            continue
        images = {phi(pp, x) for x in P_.carrier(pp)}
        if len(images) != len(P_.carrier(pp)) or images != set(Q.carrier(qp)):
            rep.verdict, rep.failed, rep.witness = "no", "fully-faithful", qp
            return rep
    return rep
