"""Bracket-forgetting projections and the stoup / no-stoup translations."""

from __future__ import annotations

from dataclasses import replace as dc_replace

from .calculi import (
    PRIMED_PARTNER,
    STOUP_FREE_PARTNER,
    Calculus,
    RuleApp,
    get_calculus,
    premises_of,
)
from .cutelim import refit
from .kernel import Derivation, check
from .syntax import (
    EMPTY_STOUP,
    Bang,
    BoxInv,
    Bracketed,
    Conj,
    Diamond,
    Disj,
    Formula,
    LeftDiv,
    MetaFormula,
    Product,
    RightDiv,
    Sequent,
    Stoup,
    Unit,
    Var,
    has_stoups,
    zone_at,
    replace_zone,
)

UNIT = Unit()


class TranslationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Projections


def project_formula(f: Formula, q: str | None = None) -> Formula:
    """Erase bracket modalities; with ``q`` given, that variable becomes 1."""
    if isinstance(f, Var):
        return UNIT if q is not None and f.name == q else f
    if isinstance(f, Unit):
        return f
    if isinstance(f, (Diamond, BoxInv)):
        return project_formula(f.body, q)
    if isinstance(f, Bang):
        return Bang(project_formula(f.body, q))
    if isinstance(f, (LeftDiv, RightDiv, Product, Conj, Disj)):
        return type(f)(project_formula(f.left, q), project_formula(f.right, q))
    raise TypeError(f"not a formula: {f!r}")


def _flat_items(m: MetaFormula, q: str | None) -> list[Formula]:
    out = [Bang(project_formula(a, q)) for a in m.stoup]
    for it in m.items:
        if isinstance(it, Bracketed):
            out.extend(_flat_items(it.meta, q))
        else:
            out.append(project_formula(it, q))
    return out


def project_sequent(s: Sequent, q: str | None = None) -> Sequent:
    """Brackets vanish; stoup members become !-formulae in front of their zone."""
    return Sequent(MetaFormula(EMPTY_STOUP, tuple(_flat_items(s.antecedent, q))),
                   project_formula(s.succedent, q))


def project(x, mode: str = "pi", q: str | None = None):
    """``mode`` is ``pi`` or ``pi_q``; ``pi_q`` needs the variable ``q``."""
    if mode not in ("pi", "pi_q"):
        raise ValueError("mode must be pi or pi_q")
    if mode == "pi_q" and not q:
        raise ValueError("pi_q needs the designated variable q")
    qq = q if mode == "pi_q" else None
    if isinstance(x, Sequent):
        return project_sequent(x, qq)
    if isinstance(x, Formula):
        return project_formula(x, qq)
    raise TypeError("project takes a formula or a sequent")


def _flat_len(it) -> int:
    if isinstance(it, Bracketed):
        return len(it.meta.stoup) + sum(_flat_len(x) for x in it.meta.items)
    return 1


def flat_offset(s: Sequent, path, idx: int) -> int:
    """Position, after flattening, of item ``idx`` of the zone at ``path``."""
    m = s.antecedent
    off = 0
    for step in tuple(path) + (idx,):
        off += len(m.stoup) + sum(_flat_len(x) for x in m.items[:step])
        if step < len(m.items) and isinstance(m.items[step], Bracketed):
            m = m.items[step].meta
    return off


_BRACKET_RULES = {"<>L", "<>R", "[]L", "[]R"}


def project_derivation(d: Derivation, mode: str = "pi", q: str | None = None) -> Derivation:
    """Map a no-stoup bracketed derivation into the full-exponential calculus."""
    qq = q if mode == "pi_q" else None
    if mode == "pi_q" and not q:
        raise ValueError("pi_q needs the designated variable q")
    for _, n in d.nodes():
        if has_stoups(n.sequent.antecedent):
            raise TranslationError("project_derivation takes stoup-free derivations; destoup first")
    uses_cut = any(n.rule.rule == "cut" for _, n in d.nodes())
    target = get_calculus("!malc*" + ("+cut" if uses_cut else ""))

    def tr(n: Derivation) -> Derivation:
        kids = [tr(ch) for ch in n.children]
        concl = project_sequent(n.sequent, qq)
        app = n.rule
        rule = app.rule
        if rule in _BRACKET_RULES:
            return kids[0]
        if rule == "cut":
            st, ln = app.span
            off = flat_offset(n.sequent, app.path, st)
            width = sum(_flat_len(x) for x in zone_at(n.sequent, app.path).items[st:st + ln])
            app2 = RuleApp("cut", span=(off, width), cut_formula=project_formula(app.cut_formula, qq))
            return Derivation(concl, app2, tuple(kids))
        if rule == "!C" and app.span is None:
            # 2018 shape: the copy lands at the front of the island
            i = flat_offset(n.sequent, app.path, app.index)
            e = flat_offset(n.sequent, app.path, app.target)
            return Derivation(concl, RuleApp("!NC2", index=i, split=e), tuple(kids))
        if rule == "!C":
            # 2015 shape: a block of copies lands at the start of the span
            b = flat_offset(n.sequent, app.path, app.index)
            f = flat_offset(n.sequent, app.path, app.span[0])
            block = list(concl.antecedent.items[b:b + app.target])
            items = list(concl.antecedent.items)
            cur = kids[0]
            for k in range(len(block) - 1, -1, -1):
                s_k = Sequent(MetaFormula(EMPTY_STOUP, tuple(items[:f] + block[:k] + items[f:])),
                              concl.succedent)
                cur = Derivation(s_k, RuleApp("!NC2", index=b + k, split=f + k), (cur,))
            return cur
        expected = [k.sequent for k in kids]
        app2 = refit(target, concl, rule, expected)
        return Derivation(concl, app2, tuple(kids))

    return tr(d)


# ---------------------------------------------------------------------------
# Permutation chains between arrangements of !-formulae


def _shape(it):
    """Comparison key invariant under moving !-items inside zones."""
    if isinstance(it, Bracketed):
        return ("[", _zone_shape(it.meta))
    return it


def _zone_shape(m: MetaFormula):
    bangs = sorted(repr(x) for x in m.items if isinstance(x, Bang))
    rest = tuple(_shape(x) for x in m.items if not isinstance(x, Bang))
    return (tuple(bangs), rest)


def permute_to(target: Sequent, d: Derivation) -> Derivation:
    """Derive ``target`` from ``d`` by !P1/!P2 steps only.

    ``d.sequent`` must differ from ``target`` only by the positions of
    !-formulae inside their zones. The chain is built from the conclusion
    upwards, fixing positions left to right.
    """
    if d.sequent == target:
        return d
    if _zone_shape(d.sequent.antecedent) != _zone_shape(target.antecedent) or \
            d.sequent.succedent != target.succedent:
        raise TranslationError(f"{d.sequent} is not a rearrangement of {target}")
    steps: list[tuple[Sequent, RuleApp]] = []
    cur = target
    goal = d.sequent

    def fix_zone(path):
        nonlocal cur
        want = zone_at(goal, path).items
        p = 0
        while True:
            have = zone_at(cur, path).items
            if p >= len(have):
                break
            if have[p] == want[p]:
                p += 1
                continue
            j = next((j for j in range(p + 1, len(have)) if have[j] == want[p] and isinstance(have[j], Bang)), None)
            if j is not None:
                app = RuleApp("!P1", path=path, index=j, split=p)
            else:
                if not isinstance(have[p], Bang):
                    # bracketed items that differ only inside: handled on recursion
                    if _shape(have[p]) == _shape(want[p]):
                        p += 1
                        continue
                    raise TranslationError("cannot align arrangement")
                app = RuleApp("!P2", path=path, index=p, split=p + 2)
            z = zone_at(cur, path)
            (nxt,) = _perm_premise(z, app)
            steps.append((cur, app))
            cur = replace_zone(cur, path, nxt)
        for i, it in enumerate(zone_at(cur, path).items):
            if isinstance(it, Bracketed):
                fix_zone(tuple(path) + (i,))

    fix_zone(())
    if cur != goal:
        raise TranslationError("permutation chain did not converge")
    out = d
    for s, app in reversed(steps):
        out = Derivation(s, app, (out,))
    return out


def _perm_premise(z: MetaFormula, app: RuleApp) -> list[MetaFormula]:
    items = z.items
    i, k = app.index, app.split
    f = items[i]
    if app.rule == "!P1":
        return [z.with_items(items[:k] + (f,) + items[k:i] + items[i + 1:])]
    return [z.with_items(items[:i] + items[i + 1:k] + (f,) + items[k:])]


# ---------------------------------------------------------------------------
# Stoups -> no stoups


def flatten_meta(m: MetaFormula) -> MetaFormula:
    items = [Bang(a) for a in m.stoup]
    for it in m.items:
        items.append(Bracketed(flatten_meta(it.meta)) if isinstance(it, Bracketed) else it)
    return MetaFormula(EMPTY_STOUP, tuple(items))


def flatten(s: Sequent) -> Sequent:
    return Sequent(flatten_meta(s.antecedent), s.succedent)


def _flat_path(s: Sequent, path) -> tuple[int, ...]:
    m = s.antecedent
    out = []
    for step in path:
        out.append(step + len(m.stoup))
        m = m.items[step].meta
    return tuple(out)


def _zone_with(s: Sequent, path, items) -> Sequent:
    return replace_zone(s, path, MetaFormula(EMPTY_STOUP, tuple(items)))


def destoup_derivation(d: Derivation, source: Calculus | str, target: Calculus | str | None = None) -> Derivation:
    """Rewrite a cut-free stoup derivation without stoups."""
    if isinstance(source, str):
        source = get_calculus(source)
    if not source.features.has_stoups:
        raise TranslationError(f"{source.name} has no stoups")
    if target is None:
        target = get_calculus(STOUP_FREE_PARTNER[source.name.split("+")[0]])
    elif isinstance(target, str):
        target = get_calculus(target)
    if has_stoups(d.sequent.antecedent):
        raise TranslationError("the end-sequent has a non-empty stoup")
    if any(n.rule.rule == "cut" for _, n in d.nodes()):
        raise TranslationError("destoup takes cut-free derivations; eliminate cuts first")

    def tr(n: Derivation) -> Derivation:
        kids = [tr(ch) for ch in n.children]
        s = n.sequent
        app = n.rule
        rule = app.rule
        fs = flatten(s)
        if rule == "!L":
            return permute_to(fs, kids[0])
        x, app2 = _flat_step(s, app, fs)
        q = premises_of(target, x, app2)
        tops = tuple(permute_to(p, k) for p, k in zip(q, kids))
        return permute_to(fs, Derivation(x, app2, tops))

    out = tr(d)
    return out


def _flat_step(s: Sequent, app: RuleApp, fs: Sequent) -> tuple[Sequent, RuleApp]:
    """An arrangement of ``flatten(s)`` and the no-stoup rule applied to it."""
    rule = app.rule
    z = zone_at(s, app.path)
    fpath = _flat_path(s, app.path)
    n0 = len(z.stoup)
    bangs = [Bang(a) for a in z.stoup]
    items = list(z.items)

    def shifted(**extra):
        kw = {"path": fpath}
        for name in ("index", "split", "target"):
            v = getattr(app, name)
            if v is not None:
                kw[name] = v + n0
        if app.span is not None:
            kw["span"] = (app.span[0] + n0, app.span[1])
        kw.update(stoup=None, stoup2=None, stoup_index=None)
        kw.update(extra)
        return dc_replace(app, **kw)

    if rule in ("\\L", "/L", "*R"):
        sel = tuple(app.stoup or ())
        left = [bangs[j] for j in sel]
        rest = [bangs[j] for j in range(n0) if j not in sel]
        if rule == "\\L":
            st, i = app.split, app.index
            arr = rest + items[:st] + left + items[st:]
            a2 = dc_replace(app, path=fpath, index=i + n0, split=st + len(rest), stoup=None)
        elif rule == "/L":
            i, e = app.index, app.split
            arr = rest + items[:i + 1] + left + items[i + 1:]
            a2 = dc_replace(app, path=fpath, index=i + len(rest), split=e + n0, stoup=None)
        else:
            k = app.split
            arr = left + items[:k] + rest + items[k:]
            a2 = dc_replace(app, split=k + len(left), stoup=None)
        return _zone_with(fs, fpath, _flat_zone_items(arr)), a2
    if rule == "!P":
        j, k = app.stoup_index, app.split
        moved = bangs[j]
        others = [b for i, b in enumerate(bangs) if i != j]
        arr = others + items[:k] + [moved] + items[k:]
        a2 = RuleApp("!L", path=fpath, index=len(others) + k)
        return _zone_with(fs, fpath, _flat_zone_items(arr)), a2
    if rule in ("!R", "!R'"):
        if not z.stoup and not items:
            raise TranslationError("!R with an empty stoup has no stoup-free counterpart")
        return fs, RuleApp("!R")
    if rule in ("!C", "!C'") and app.stoup_index is not None:
        j, t = app.stoup_index, app.target
        a2 = RuleApp("!C", path=fpath, index=j, target=t + n0)
        return fs, a2
    if rule in ("!C", "!C'"):
        # 2015 family: contracted block first, then the rest, island material
        sel = tuple(app.stoup or ())
        mv = tuple(app.stoup2 or ())
        zeta2 = [bangs[j] for j in sel]
        zeta_p = [bangs[j] for j in mv]
        zeta1 = [bangs[j] for j in range(n0) if j not in sel and j not in mv]
        st, ln = app.span
        arr = zeta2 + zeta1 + items[:st] + zeta_p + items[st:]
        start = len(zeta2) + len(zeta1) + st
        a2 = RuleApp("!C", path=fpath, index=0, target=len(zeta2), span=(start, len(zeta_p) + ln))
        return _zone_with(fs, fpath, _flat_zone_items(arr)), a2
    if rule in ("id", "1R"):
        return fs, app
    if rule in ("B", "B'"):
        return fs, app
    return fs, shifted()


def _flat_zone_items(arr):
    return [Bracketed(flatten_meta(x.meta)) if isinstance(x, Bracketed) else x for x in arr]


# ---------------------------------------------------------------------------
# No stoups -> stoups (with cut)


def promotion(a: Formula) -> Derivation:
    """``A; => !A`` by !R' over !P over the axiom."""
    ax = Derivation(Sequent(MetaFormula(EMPTY_STOUP, (a,)), a), RuleApp("id"))
    mid = Derivation(Sequent(MetaFormula(Stoup((a,)), ()), a), RuleApp("!P", stoup_index=0, split=0), (ax,))
    return Derivation(Sequent(MetaFormula(Stoup((a,)), ()), Bang(a)), RuleApp("!R'"), (mid,))


def _cut_in(left: Derivation, right: Derivation, path, idx: int) -> Derivation:
    from .cutelim import cut_node
    return cut_node(left, right, path, idx)


def _bang_L(concl: Sequent, path, idx: int, child: Derivation) -> Derivation:
    return Derivation(concl, RuleApp("!L", path=tuple(path), index=idx), (child,))


def _strip_to_stoup(s: Sequent, path, idxs) -> Sequent:
    """Move the !-formulae at ``idxs`` of a zone into its stoup, as bodies."""
    z = zone_at(s, path)
    moved = [z.items[i].body for i in idxs]
    keep = [it for i, it in enumerate(z.items) if i not in set(idxs)]
    return replace_zone(s, path, MetaFormula(z.stoup.union(moved), tuple(keep)))


def enstoup_derivation(d: Derivation, source: Calculus | str, target: Calculus | str | None = None) -> Derivation:
    """Simulate a no-stoup derivation (cuts allowed) in the primed stoup calculus."""
    if isinstance(source, str):
        source = get_calculus(source)
    base = source.name.split("+")[0]
    if target is None:
        target = get_calculus(PRIMED_PARTNER[base] + "+cut")
    elif isinstance(target, str):
        target = get_calculus(target)
    profile = source.features.bang_profile

    def tr(n: Derivation) -> Derivation:
        kids = [tr(ch) for ch in n.children]
        s = n.sequent
        app = n.rule
        rule = app.rule
        path = app.path
        if rule in ("!P1", "!P2"):
            # !L, then a cut putting the !-formula back where the premise has it
            z = zone_at(s, path)
            i = app.index
            a = z.items[i].body
            (child,) = kids
            pz = zone_at(child.sequent, path)
            pos = app.split if rule == "!P1" else app.split - 1
            cut = _cut_in(promotion(a), child, path, pos)
            return _bang_L(s, path, i, cut)
        if rule == "!L":
            z = zone_at(s, path)
            i = app.index
            mid = _strip_to_stoup(s, path, [i])
            p = Derivation(mid, RuleApp("!P", path=path, stoup_index=len(z.stoup), split=i), tuple(kids))
            return _bang_L(s, path, i, p)
        if rule == "!R":
            (child,) = kids
            bang_items = list(s.antecedent.items)
            bodies = [b.body for b in bang_items]
            # cut the promotions in, last formula first
            cur = child
            for k in range(len(bodies) - 1, -1, -1):
                cur = _cut_in(promotion(bodies[k]), cur, (), k)
            prom = Derivation(Sequent(cur.sequent.antecedent, s.succedent), RuleApp("!R'"), (cur,))
            out = prom
            for k in range(len(bodies) - 1, -1, -1):
                concl = Sequent(MetaFormula(Stoup(tuple(bodies[:k])), tuple(bang_items[k:])), s.succedent)
                out = _bang_L(concl, (), 0, out)
            return out
        if rule == "!C" and profile == "morrill2018":
            (child,) = kids
            i, t = app.index, app.target
            z = zone_at(s, path)
            a = z.items[i].body
            # premise of the cuts: the island copy first, then the outer one
            inner = tuple(path) + (t,)
            c1 = _cut_in(promotion(a), child, inner, 0)
            c2 = _cut_in(promotion(a), c1, path, i)
            stouped = _strip_to_stoup(s, path, [i])
            tz = zone_at(stouped, path)
            t2 = t - 1
            jdx = len(tz.stoup) - 1
            contr = Derivation(stouped, RuleApp("!C'", path=path, stoup_index=jdx, target=t2), (c2,))
            return _bang_L(s, path, i, contr)
        if rule == "!C":
            (child,) = kids
            i, m = app.index, app.target
            st, ln = app.span
            z = zone_at(s, path)
            bodies = [z.items[i + k].body for k in range(m)]
            cur = child
            # island copies sit at the front of the new island, at index st
            for k in range(m - 1, -1, -1):
                cur = _cut_in(promotion(bodies[k]), cur, tuple(path) + (st,), k)
            for k in range(m - 1, -1, -1):
                cur = _cut_in(promotion(bodies[k]), cur, path, i + k)
            stouped = _strip_to_stoup(s, path, list(range(i, i + m)))
            sz = zone_at(stouped, path)
            n0 = len(sz.stoup)
            sel = tuple(range(n0 - m, n0))
            contr = Derivation(stouped, RuleApp("!C'", path=path, stoup=sel, span=(st - m, ln)), (cur,))
            out = contr
            for k in range(m - 1, -1, -1):
                concl = _strip_to_stoup(s, path, list(range(i, i + k)))
                out = _bang_L(concl, path, i, out)
            return out
        if rule == "cut":
            return Derivation(s, dc_replace(app, stoup=()), tuple(kids))
        return Derivation(s, app, tuple(kids))

    out = tr(d)
    return out


def roundtrip_ok(d: Derivation, calculus: Calculus | str) -> bool:
    """destoup, enstoup and cut elimination give a checked derivation back."""
    from .cutelim import eliminate_cuts

    if isinstance(calculus, str):
        calculus = get_calculus(calculus)
    flat = destoup_derivation(d, calculus)
    src = get_calculus(STOUP_FREE_PARTNER[calculus.name.split("+")[0]])
    back = enstoup_derivation(flat, src)
    out = eliminate_cuts(calculus.with_cut(False), back)
    return out.sequent == d.sequent and check(calculus.with_cut(False), out).ok
