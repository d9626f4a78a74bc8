"""Cut elimination for the primed stoup calculi.

Cuts are removed innermost first. A single cut whose premises are cut-free
is reduced by :meth:`_Eliminator.reduce`, which dispatches on the lowermost
rules of both premises:

* an axiom premise: the cut disappears;
* left premise ends in a left rule: the cut moves into its premise(s);
* right premise non-principal for the cut formula: the cut moves up there;
* both principal, not ``!``: cuts on the immediate subformulae;
* ``!R'`` against ``!L``: the deep step. The stoup occurrence created by
  ``!L`` is traced upwards, replaced by the left stoup, and every ``!P``
  that releases it becomes a cut on the smaller formula.

Where the cut formula goes in a premise is found by replacing it with a
marker and re-running the rule. After a context change the rule parameters
are recomputed by :func:`refit`, which looks for an application of the same
rule with the expected premises.

Every reduction records ``(kappa, sigma)``: the size of the cut formula
and the total size of both premise derivations. Each recorded step must be
strictly below the step that spawned it (lexicographically), otherwise
:class:`MeasureError` is raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calculi import Calculus, RuleApp, RuleError, candidate_apps, get_calculus, premises_of
from .kernel import Derivation, check, cut_count
from .syntax import (
    Bracketed,
    Formula,
    MetaFormula,
    Sequent,
    Stoup,
    Var,
    formula_size,
    replace_zone,
    zone_at,
    zones,
)

MARK = Var("⟨occurrence⟩")
TRACE = Var("⟨traced⟩")

LEFT_RULES = frozenset({
    "\\L", "/L", "*L", "1L", "&L1", "&L2", "|L", "<>L", "[]L",
    "!L", "!P", "!P1", "!P2", "!C", "!C'", "!NC1", "!NC2", "!W",
})

INF = (float("inf"), float("inf"))


class CutElimError(RuntimeError):
    pass


class MeasureError(CutElimError):
    pass


class UnsupportedCalculus(ValueError):
    pass


@dataclass
class Step:
    case: str
    kappa: int
    sigma: int
    parent: tuple
    detail: dict = field(default_factory=dict)

    @property
    def measure(self) -> tuple[int, int]:
        return (self.kappa, self.sigma)

    def __str__(self) -> str:
        par = "-" if self.parent == INF else f"({self.parent[0]},{self.parent[1]})"
        extra = "".join(f" {k}={v}" for k, v in self.detail.items())
        return f"{self.case}: ({self.kappa},{self.sigma}) < {par}{extra}"


# ---------------------------------------------------------------------------
# Sequent surgery


def _find_items(s: Sequent, f: Formula) -> list[tuple[tuple[int, ...], int]]:
    return [(p, i) for p, z in zones(s.antecedent) for i, it in enumerate(z.items) if it == f]


def _set_item(s: Sequent, path, idx: int, new) -> Sequent:
    z = zone_at(s, path)
    return replace_zone(s, path, z.with_items(z.items[:idx] + (new,) + z.items[idx + 1:]))


def plug(s: Sequent, path, idx: int, sub: MetaFormula) -> tuple[Sequent, tuple[int, ...]]:
    """Replace the item at (path, idx) by ``sub``; its stoup joins the zone stoup.

    Returns the new sequent and the positions of ``sub``'s stoup in the zone.
    """
    z = zone_at(s, path)
    n = len(z.stoup)
    nz = MetaFormula(z.stoup.union(sub.stoup), z.items[:idx] + sub.items + z.items[idx + 1:])
    return replace_zone(s, path, nz), tuple(range(n, n + len(sub.stoup)))


def cut_node(left: Derivation, right: Derivation, path, idx: int) -> Derivation:
    """A cut of ``left`` into the item at (path, idx) of ``right``."""
    a = left.sequent.succedent
    z = zone_at(right.sequent, path)
    if not (0 <= idx < len(z.items)) or z.items[idx] != a:
        raise CutElimError(f"no occurrence of {a} at {list(path)}:{idx} in {right.sequent}")
    sub = left.sequent.antecedent
    concl, sel = plug(right.sequent, tuple(path), idx, sub)
    app = RuleApp("cut", path=tuple(path), span=(idx, len(sub.items)), stoup=sel, cut_formula=a)
    return Derivation(concl, app, (left, right))


def _map_stoups(m: MetaFormula, fn) -> MetaFormula:
    items = tuple(Bracketed(_map_stoups(it.meta, fn)) if isinstance(it, Bracketed) else it for it in m.items)
    return MetaFormula(fn(m.stoup), items)


def _count_traced(m: MetaFormula) -> int:
    return sum(1 for _ in _traced_zones(m))


def _traced_zones(m: MetaFormula):
    for p, z in zones(m):
        for f in z.stoup:
            if f == TRACE:
                yield p


def _replace_traced(s: Sequent, xi: Stoup) -> Sequent:
    def fn(st: Stoup) -> Stoup:
        k = sum(1 for f in st if f == TRACE)
        if not k:
            return st
        return Stoup(tuple(f for f in st if f != TRACE) + tuple(xi) * k)
    return Sequent(_map_stoups(s.antecedent, fn), s.succedent)


def _transfer(target: MetaFormula, marked: MetaFormula, a: Formula) -> MetaFormula:
    """Mark as many copies of ``a`` in each stoup of ``target`` as ``marked``
    has traced entries in the corresponding zone."""
    k = sum(1 for f in marked.stoup if f == TRACE)
    els = list(target.stoup)
    for j in range(len(els) - 1, -1, -1):
        if k == 0:
            break
        if els[j] == a:
            els[j] = TRACE
            k -= 1
    if k:
        raise CutElimError("traced stoup occurrence lost")
    if len(target.items) != len(marked.items):
        raise CutElimError("zone shapes diverge while tracing")
    items = []
    for t, m in zip(target.items, marked.items):
        if isinstance(t, Bracketed):
            if not isinstance(m, Bracketed):
                raise CutElimError("zone shapes diverge while tracing")
            items.append(Bracketed(_transfer(t.meta, m.meta, a)))
        else:
            items.append(t)
    return MetaFormula(Stoup(tuple(els)), tuple(items))


def refit(c: Calculus, concl: Sequent, rule: str, expected: list[Sequent],
          hint: RuleApp | None = None) -> RuleApp:
    """An application of ``rule`` to ``concl`` with exactly ``expected`` premises."""
    def works(app):
        try:
            return premises_of(c, concl, app) == expected
        except RuleError:
            return False
    if hint is not None and hint.rule == rule and works(hint):
        return hint
    for app in candidate_apps(c, concl):
        if app.rule == rule and works(app):
            return app
    raise CutElimError(f"cannot re-apply {rule} to {concl} with premises {[str(p) for p in expected]}")


# ---------------------------------------------------------------------------


class _Eliminator:
    def __init__(self, c: Calculus):
        self.c = c
        self.log: list[Step] = []

    def record(self, case, a, left, right, bound, **detail) -> tuple[int, int]:
        m = (formula_size(a), left.size() + right.size())
        if not m < bound:
            raise MeasureError(f"{case}: measure {m} does not decrease below {bound}")
        self.log.append(Step(case, m[0], m[1], bound, detail))
        return m

    def eliminate(self, d: Derivation) -> Derivation:
        kids = tuple(self.eliminate(ch) for ch in d.children)
        d = Derivation(d.sequent, d.rule, kids)
        if d.rule.rule == "cut":
            return self.reduce(d, INF)
        return d

    # -- one cut with cut-free premises ------------------------------------

    def reduce(self, d: Derivation, bound) -> Derivation:
        left, right = d.children
        app = d.rule
        a = app.cut_formula
        path, st = app.path, app.span[0]
        lr, rr = left.rule.rule, right.rule.rule

        if lr == "id":
            self.record("axiom-left", a, left, right, bound)
            return right
        if rr == "id":
            self.record("axiom-right", a, left, right, bound)
            return left
        if lr in LEFT_RULES:
            m = self.record("left-permute:" + lr, a, left, right, bound)
            return self._permute_left(d, m)
        marked = _set_item(right.sequent, path, st, MARK)
        try:
            pm = premises_of(self.c, marked, right.rule)
        except RuleError:
            pm = None
        if pm is not None and any(_find_items(p, MARK) for p in pm):
            m = self.record("right-permute:" + rr, a, left, right, bound)
            return self._permute_right(d, pm, m)
        return self._principal(d, bound)

    def _permute_left(self, d: Derivation, m) -> Derivation:
        left, right = d.children
        path, st = d.rule.path, d.rule.span[0]
        carriers = (1,) if left.rule.rule in ("\\L", "/L") else tuple(range(len(left.children)))
        cuts, expected = {}, []
        for i, li in enumerate(left.children):
            if i in carriers:
                cuts[i] = cut_node(li, right, path, st)
                expected.append(cuts[i].sequent)
            else:
                expected.append(li.sequent)
        app = refit(self.c, d.sequent, left.rule.rule, expected, _shift_hint(left.rule, path, st))
        kids = tuple(self.reduce(cuts[i], m) if i in cuts else li for i, li in enumerate(left.children))
        return Derivation(d.sequent, app, kids)

    def _permute_right(self, d: Derivation, pm: list[Sequent], m) -> Derivation:
        left, right = d.children
        cuts, expected = {}, []
        for i, (ri, p) in enumerate(zip(right.children, pm)):
            locs = _find_items(p, MARK)
            if len(locs) > 1:
                raise CutElimError("cut formula duplicated by " + right.rule.rule)
            if locs:
                q, k = locs[0]
                cuts[i] = cut_node(left, ri, q, k)
                expected.append(cuts[i].sequent)
            else:
                expected.append(ri.sequent)
        app = refit(self.c, d.sequent, right.rule.rule, expected, right.rule)
        kids = tuple(self.reduce(cuts[i], m) if i in cuts else ri for i, ri in enumerate(right.children))
        return Derivation(d.sequent, app, kids)

    def _principal(self, d: Derivation, bound) -> Derivation:
        left, right = d.children
        app = d.rule
        a = app.cut_formula
        path, st = app.path, app.span[0]
        lr, rr = left.rule.rule, right.rule.rule
        ra = right.rule
        pair = (lr, rr)
        if pair == ("\\R", "\\L"):
            m = self.record("principal:\\", a, left, right, bound)
            s = ra.split
            r1, r2 = right.children
            inner = self.reduce(cut_node(left.children[0], r2, path, s), m)
            return self.reduce(cut_node(r1, inner, path, s), m)
        if pair == ("/R", "/L"):
            m = self.record("principal:/", a, left, right, bound)
            r1, r2 = right.children
            l1 = left.children[0]
            inner = self.reduce(cut_node(l1, r2, path, st), m)
            shift = len(l1.sequent.antecedent.items) - 1
            return self.reduce(cut_node(r1, inner, path, st + shift), m)
        if pair == ("*R", "*L"):
            m = self.record("principal:*", a, left, right, bound)
            l1, l2 = left.children
            inner = self.reduce(cut_node(l2, right.children[0], path, st + 1), m)
            return self.reduce(cut_node(l1, inner, path, st), m)
        if pair == ("1R", "1L"):
            self.record("principal:1", a, left, right, bound)
            return right.children[0]
        if lr in ("|R1", "|R2") and rr == "|L":
            m = self.record("principal:|", a, left, right, bound)
            i = 0 if lr == "|R1" else 1
            return self.reduce(cut_node(left.children[0], right.children[i], path, st), m)
        if lr == "&R" and rr in ("&L1", "&L2"):
            m = self.record("principal:&", a, left, right, bound)
            j = 0 if rr == "&L1" else 1
            return self.reduce(cut_node(left.children[j], right.children[0], path, st), m)
        if pair == ("<>R", "<>L"):
            m = self.record("principal:<>", a, left, right, bound)
            return self.reduce(cut_node(left.children[0], right.children[0], path + (st,), 0), m)
        if pair == ("[]R", "[]L"):
            m = self.record("principal:[]", a, left, right, bound)
            return self.reduce(cut_node(left.children[0], right.children[0], ra.path, ra.index), m)
        if pair == ("!R'", "!L"):
            return self._deep(d, bound)
        raise CutElimError(f"no reduction for a cut between {lr} and {rr} on {a}")

    # -- the deep step -----------------------------------------------------

    def _deep(self, d: Derivation, bound) -> Derivation:
        left, right = d.children
        a = d.rule.cut_formula.body
        xi = left.sequent.antecedent.stoup
        proof_a = left.children[0]
        m = (formula_size(d.rule.cut_formula), left.size() + right.size())
        if not m < bound:
            raise MeasureError(f"deep: measure {m} does not decrease below {bound}")
        step = Step("deep:!", m[0], m[1], bound)
        self.log.append(step)

        above = right.children[0]
        z = zone_at(above.sequent, right.rule.path)
        js = [j for j, f in enumerate(z.stoup) if f == a]
        if not js:
            raise CutElimError("!L premise lacks the stoup occurrence")
        els = list(z.stoup)
        els[js[-1]] = TRACE
        start = replace_zone(above.sequent, right.rule.path, MetaFormula(Stoup(tuple(els)), z.items))

        new_cuts: list[int] = []
        traced = self._trace(above, start, a, xi, proof_a, new_cuts)
        step.detail.update(endpoints=len(new_cuts))
        introduced = [0]
        out = self._resolve(traced, set(new_cuts), m, introduced)
        step.detail.update(new_cuts=introduced[0], cut_formula=str(a))
        if introduced[0] != len(new_cuts):
            raise CutElimError("deep step: cut count does not match the traced endpoints")
        return out

    def _trace(self, dv: Derivation, marked: Sequent, a, xi, proof_a, new_cuts) -> Derivation:
        if not _count_traced(marked.antecedent):
            return dv
        app = dv.rule
        concl = _replace_traced(marked, xi)
        if app.rule == "!P":
            z = zone_at(marked, app.path)
            if z.stoup[app.stoup_index] == TRACE:
                (pm,) = premises_of(self.c, marked, app)
                pm = _set_item(pm, app.path, app.split, a)
                child_m = Sequent(_transfer(dv.children[0].sequent.antecedent, pm.antecedent, a),
                                  dv.children[0].sequent.succedent)
                sub = self._trace(dv.children[0], child_m, a, xi, proof_a, new_cuts)
                node = cut_node(proof_a, sub, app.path, app.split)
                new_cuts.append(id(node))
                return node
        pm = premises_of(self.c, marked, app)
        kids = []
        for ch, p in zip(dv.children, pm):
            ch_m = Sequent(_transfer(ch.sequent.antecedent, p.antecedent, a), ch.sequent.succedent)
            kids.append(self._trace(ch, ch_m, a, xi, proof_a, new_cuts))
        expected = [k.sequent for k in kids]
        app2 = refit(self.c, concl, app.rule, expected, app)
        return Derivation(concl, app2, tuple(kids))

    def _resolve(self, dv: Derivation, marks: set[int], m, counter) -> Derivation:
        is_new = id(dv) in marks
        kids = tuple(self._resolve(ch, marks, m, counter) for ch in dv.children)
        node = Derivation(dv.sequent, dv.rule, kids)
        if is_new:
            counter[0] += 1
            return self.reduce(node, m)
        return node


def _shift_hint(app: RuleApp, path, st: int) -> RuleApp:
    """Best guess for a left-premise rule moved into the cut context."""
    from dataclasses import replace as dc_replace

    if app.path:
        return dc_replace(app, path=tuple(path) + (app.path[0] + st,) + app.path[1:])
    kw = {"path": tuple(path)}
    for name in ("index", "split", "target"):
        v = getattr(app, name)
        if v is not None:
            kw[name] = v + st
    if app.span is not None:
        kw["span"] = (app.span[0] + st, app.span[1])
    return dc_replace(app, **kw)


# ---------------------------------------------------------------------------


def _supported(c: Calculus):
    f = c.features
    if f.has_stoups and f.bang_profile in ("primed2015", "primed2018"):
        return
    if f.has_stoups:
        witness = ("'!p, q => q*!p'" if f.bang_profile == "morrill2018" else "'q => <>q'")
        raise UnsupportedCalculus(
            f"{c.name} does not admit cut: {witness} is derivable with cut but has no cut-free "
            "derivation; use the primed variant")
    raise UnsupportedCalculus(f"cut elimination is implemented only for the primed stoup calculi, not {c.name}")


def eliminate_cuts(c: Calculus | str, d: Derivation, trace: list | None = None) -> Derivation:
    """A cut-free derivation of ``d``'s end-sequent in ``c`` (without cut)."""
    if isinstance(c, str):
        c = get_calculus(c)
    _supported(c)
    with_cut = c.with_cut(True)
    res = check(with_cut, d)
    if not res.ok:
        raise CutElimError(f"input derivation does not check in {with_cut.name}: {res.error}")
    eng = _Eliminator(with_cut)
    out = eng.eliminate(d)
    if trace is not None:
        trace.extend(eng.log)
    if cut_count(out):
        raise CutElimError("cuts remain after elimination")
    return out


def eliminate_topmost_cut(c: Calculus | str, d: Derivation, trace: list | None = None) -> Derivation:
    """Remove one cut whose premises are cut-free; other cuts are left alone."""
    if isinstance(c, str):
        c = get_calculus(c)
    _supported(c)
    eng = _Eliminator(c.with_cut(True))
    done = [False]

    def walk(n: Derivation) -> Derivation:
        kids = tuple(walk(ch) for ch in n.children)
        n = Derivation(n.sequent, n.rule, kids)
        if not done[0] and n.rule.rule == "cut" and all(cut_count(ch) == 0 for ch in kids):
            done[0] = True
            return eng.reduce(n, INF)
        return n

    out = walk(d)
    if trace is not None:
        trace.extend(eng.log)
    return out


def measure_log_decreasing(log: list[Step]) -> bool:
    return all(s.measure < s.parent for s in log)
