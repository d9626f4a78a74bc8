"""Type-0 grammars, their encodings as sequents, and B-rules.

A grammar production ``x1..xk -> y1..ym`` becomes the formula
``(x1*...*xk)/(y1*...*ym)`` (just ``x1*...*xk`` when the right side is
empty). An internaliser packs a finite set of such formulas into a
meta-formula ``Phi`` placed in front of the word; derivations of
``Phi, a1..an => s`` are synthesised from rewriting traces by the
landing templates below, and rewriting traces are read back from
derivations in the full-exponential calculus.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .calculi import BRule, Calculus, RuleApp, extend_with_b_rules, get_calculus
from .kernel import Derivation, check
from .syntax import (
    EMPTY_STOUP,
    Bang,
    BoxInv,
    Bracketed,
    Diamond,
    Formula,
    LeftDiv,
    MetaFormula,
    Product,
    RightDiv,
    Sequent,
    Stoup,
    Unit,
    Var,
    lambek_restriction_holds,
    UNIT,
    product_of,
    replace_zone,
    variables,
    zone_at,
)

RESERVED = ("#", "~")
SCHEMES = ("malc", "relevant", "b2015", "b2018", "b2018st", "buszkowski")

# the calculus each scheme's derivations are checked in
SCHEME_CALCULUS = {
    "malc": "!malc*",
    "relevant": "!r-malc*",
    "b2015": "b2015",
    "b2018": "b2018",
    "b2018st": "b2018st",
    "buszkowski": "b2018",
}


class GrammarError(ValueError):
    pass


class EncodingShapeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Grammars and rewriting


@dataclass(frozen=True)
class Production:
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(self.lhs))
        object.__setattr__(self, "rhs", tuple(self.rhs))

    def __str__(self) -> str:
        return " ".join(self.lhs) + " -> " + " ".join(self.rhs)


@dataclass(frozen=True)
class Type0Grammar:
    productions: tuple[Production, ...]
    start: str = "s"
    terminals: frozenset = frozenset()
    alphabet: frozenset = frozenset()

    def __post_init__(self):
        prods = tuple(p if isinstance(p, Production) else Production(*p) for p in self.productions)
        object.__setattr__(self, "productions", prods)
        syms = {self.start} | set(self.terminals) | set(self.alphabet)
        for p in prods:
            if not p.lhs:
                raise GrammarError(f"production {p} has an empty left-hand side")
            syms.update(p.lhs)
            syms.update(p.rhs)
        for x in syms:
            if any(ch in x for ch in RESERVED) or not x or not (x[0].isalpha() or x[0] == "_"):
                raise GrammarError(f"bad symbol {x!r} (reserved spellings use # and ~)")
        object.__setattr__(self, "alphabet", frozenset(syms))
        object.__setattr__(self, "terminals", frozenset(self.terminals))

    def symbols(self) -> list[str]:
        return sorted(self.alphabet)

    def noncontracting(self) -> bool:
        return all(len(p.rhs) >= len(p.lhs) for p in self.productions)


def parse_grammar(text: str) -> Type0Grammar:
    """Lines ``x1 x2 -> y1 y2``, ``start: s`` and ``terminals: a b``."""
    prods, start, terms = [], "s", set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if raw.lstrip().startswith("#") else raw.strip()
        if not line:
            continue
        if "->" in line:
            lhs, rhs = line.split("->", 1)
            prods.append(Production(tuple(lhs.split()), tuple(rhs.split())))
        elif line.startswith("start:"):
            start = line[len("start:"):].strip()
        elif line.startswith("terminals:"):
            terms.update(line[len("terminals:"):].split())
        else:
            raise GrammarError(f"line {n}: cannot read {raw!r}")
    return Type0Grammar(tuple(prods), start, frozenset(terms))


def load_grammar(path: str | Path) -> Type0Grammar:
    return parse_grammar(Path(path).read_text())


def word_of(w: str | Sequence[str]) -> tuple[str, ...]:
    return tuple(w.split()) if isinstance(w, str) else tuple(w)


@dataclass(frozen=True)
class RewriteStep:
    word: tuple[str, ...]
    production: int
    position: int


@dataclass(frozen=True)
class RewriteTrace:
    """``start`` rewritten by each step in turn; ``word`` is the result of the step."""

    start: tuple[str, ...]
    steps: tuple[RewriteStep, ...] = ()

    @property
    def final(self) -> tuple[str, ...]:
        return self.steps[-1].word if self.steps else self.start

    def words(self) -> list[tuple[str, ...]]:
        return [self.start] + [st.word for st in self.steps]


def apply_production(g: Type0Grammar, word, k: int, pos: int) -> tuple[str, ...]:
    p = g.productions[k]
    word = tuple(word)
    if tuple(word[pos:pos + len(p.lhs)]) != p.lhs:
        raise GrammarError(f"production {k} ({p}) does not apply at {pos} in {' '.join(word)}")
    return word[:pos] + p.rhs + word[pos + len(p.lhs):]


def validate_trace(g: Type0Grammar, tr: RewriteTrace) -> bool:
    w = tr.start
    for st in tr.steps:
        try:
            w = apply_production(g, w, st.production, st.position)
        except (GrammarError, IndexError):
            return False
        if w != st.word:
            return False
    return True


def one_step(g: Type0Grammar, word):
    word = tuple(word)
    for k, p in enumerate(g.productions):
        n = len(p.lhs)
        for pos in range(len(word) - n + 1):
            if word[pos:pos + n] == p.lhs:
                yield k, pos, word[:pos] + p.rhs + word[pos + n:]


@dataclass
class Membership:
    """``member`` is True, False, or None when a cap stopped the search."""

    member: bool | None
    trace: RewriteTrace | None = None
    explored: int = 0


def rewrite_search(g: Type0Grammar, target, max_len: int | None = None,
                   max_steps: int = 200_000, start=None) -> Membership:
    """Breadth-first search for a rewriting of ``start`` (default the start symbol) into ``target``.

    Words longer than ``max_len`` are dropped. For a non-contracting grammar
    the default cap is the target length and the answer is exact.
    """
    target = word_of(target)
    src = (g.start,) if start is None else word_of(start)
    exact = max_len is None and g.noncontracting()
    cap = max_len if max_len is not None else (len(target) if exact else len(target) + 4)
    parent: dict[tuple, tuple | None] = {src: None}
    queue = deque([src])
    capped = False
    while queue:
        w = queue.popleft()
        if w == target:
            steps = []
            while parent[w] is not None:
                prev, k, pos = parent[w]
                steps.append(RewriteStep(w, k, pos))
                w = prev
            return Membership(True, RewriteTrace(src, tuple(reversed(steps))), len(parent))
        if len(parent) > max_steps:
            return Membership(None, None, len(parent))
        for k, pos, nw in one_step(g, w):
            if len(nw) > cap:
                capped = True
                continue
            if nw not in parent:
                parent[nw] = (w, k, pos)
                queue.append(nw)
    return Membership(None if capped and not exact else False, None, len(parent))


def language_upto(g: Type0Grammar, n: int, max_steps: int = 200_000) -> set[tuple[str, ...]]:
    """Terminal words of length at most ``n`` (exact for non-contracting grammars)."""
    seen = {(g.start,)}
    queue = deque(seen)
    cap = n if g.noncontracting() else n + 4
    while queue and len(seen) <= max_steps:
        w = queue.popleft()
        for _, _, nw in one_step(g, w):
            if len(nw) <= cap and nw not in seen:
                seen.add(nw)
                queue.append(nw)
    terms = g.terminals or (g.alphabet - {g.start})
    return {w for w in seen if len(w) <= n and all(x in terms for x in w)}


# ---------------------------------------------------------------------------
# Formulas


def _vars(ws: Sequence[str]) -> list[Formula]:
    return [Var(x) for x in ws]


def production_formula(p: Production) -> Formula:
    x = product_of(_vars(p.lhs))
    return RightDiv(x, product_of(_vars(p.rhs))) if p.rhs else x


def grammar_formulas(g: Type0Grammar) -> list[Formula]:
    return [production_formula(p) for p in g.productions]


def _ss(s: str) -> Formula:
    return RightDiv(Var(s), Var(s))


def _ddq(q: str) -> Formula:
    return Diamond(Diamond(Var(q)))


def _island_q(q: str) -> Bracketed:
    return Bracketed(MetaFormula(EMPTY_STOUP, (Bracketed(MetaFormula(EMPTY_STOUP, (Var(q),))),)))


def z_formula(a: Formula, q: str = "q") -> Formula:
    """``([](!A * <><>q))/q``"""
    return RightDiv(BoxInv(Product(Bang(a), _ddq(q))), Var(q))


def zv_formula(b: Formula, t: str, q: str = "q") -> Formula:
    """``([](t/((t/!B)/!<><>q)))/q``"""
    inner = RightDiv(Var(t), RightDiv(RightDiv(Var(t), Bang(b)), Bang(_ddq(q))))
    return RightDiv(BoxInv(inner), Var(q))


def _check_fresh(forms: Iterable[Formula], q: str):
    for f in forms:
        if q in variables(f):
            raise ValueError(f"the unit variable {q!r} occurs in {f}")


@dataclass(frozen=True)
class Internalization:
    """A meta-formula together with what it internalises."""

    scheme: str
    formulas: tuple[Formula, ...]
    meta: MetaFormula
    s: str = "s"
    q: str = "q"
    variables: tuple[str, ...] = ()

    @property
    def width(self) -> int:
        return len(self.meta.items)


def internalizer(A: Sequence[Formula], scheme: str, q: str = "q", s: str = "s",
                 variables_: Sequence[str] = ()) -> Internalization:
    """The meta-formula internalising ``A`` under ``scheme``.

    ``buszkowski`` is the variable-indexed variant; ``variables_`` lists the
    succedent variables it has to support.
    """
    A = tuple(A)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; known: {', '.join(SCHEMES)}")
    if scheme not in ("malc", "relevant"):
        _check_fresh(A, q)
    ss = _ss(s)
    items: list = []
    stoup: list[Formula] = []
    if scheme == "malc":
        items = [Bang(a) for a in A]
    elif scheme == "relevant":
        for a in A:
            items += [RightDiv(Unit(), Bang(a)), Bang(a)]
    elif scheme == "b2015":
        for a in A:
            items += [Bang(RightDiv(ss, Bang(BoxInv(a)))), Bang(BoxInv(a))]
    elif scheme == "b2018":
        for a in A:
            z = z_formula(a, q)
            items += [Bang(RightDiv(ss, Bang(z))), Bang(z)]
        items += [Bang(RightDiv(ss, _ddq(q))), _island_q(q)]
    elif scheme == "b2018st":
        for a in A:
            z = z_formula(a, q)
            stoup += [RightDiv(ss, Bang(z)), Bang(z)]
        stoup.append(RightDiv(ss, _ddq(q)))
        items = [_island_q(q)]
    else:
        if not variables_:
            raise ValueError("the buszkowski scheme needs the set of succedent variables")
        if any(q == t for t in variables_):
            raise ValueError(f"the unit variable {q!r} is among the variables")
        for t in variables_:
            for b in A:
                z = zv_formula(b, t, q)
                items += [Bang(RightDiv(ss, Bang(z))), Bang(z)]
        items += [Bang(RightDiv(ss, _ddq(q))), Bang(_ddq(q))]
    return Internalization(scheme, A, MetaFormula(Stoup(tuple(stoup)), tuple(items)), s, q, tuple(variables_))


# ---------------------------------------------------------------------------
# Derivation building blocks


def _seq(items, succ, stoup=()) -> Sequent:
    return Sequent(MetaFormula(Stoup(tuple(stoup)), tuple(items)), succ)


def _node(items, succ, rule, *kids, stoup=(), **params) -> Derivation:
    return Derivation(_seq(items, succ, stoup), RuleApp(rule, **params), tuple(kids))


def _ax(f: Formula) -> Derivation:
    return _node([f], f, "id")


def _with_items(s: Sequent, items) -> Sequent:
    return Sequent(MetaFormula(s.antecedent.stoup, tuple(items)), s.succedent)


def product_right(fs: Sequence[Formula]) -> Derivation:
    """``f1, ..., fn => f1*...*fn`` by *R over axioms (n >= 1)."""
    fs = list(fs)
    if len(fs) == 1:
        return _ax(fs[0])
    return _node(fs, product_of(fs), "*R", product_right(fs[:-1]), _ax(fs[-1]), split=len(fs) - 1)


def product_left(d: Derivation, index: int, fs: Sequence[Formula]) -> Derivation:
    """From ``.., f1, ..., fk, .. => C`` derive ``.., f1*...*fk, .. => C`` by *L."""
    fs = list(fs)
    items = list(d.sequent.antecedent.items)
    assert tuple(items[index:index + len(fs)]) == tuple(fs)
    cur = d
    for j in range(2, len(fs) + 1):
        new = items[:index] + [product_of(fs[:j])] + items[index + j:]
        cur = Derivation(_with_items(d.sequent, new), RuleApp("*L", index=index), (cur,))
    return cur


def _ss_chain(n: int, s: str, prefix=()) -> Derivation:
    """``prefix, s/s (n times), s => s``"""
    ss = _ss(s)
    cur = _ax(Var(s))
    for k in range(1, n + 1):
        items = list(prefix) + [ss] * k + [Var(s)]
        cur = _node(items, Var(s), "/L", _ax(Var(s)), cur, index=len(prefix) + k - 1,
                    split=len(prefix) + k + 1)
    return cur


# ---------------------------------------------------------------------------
# Item 1: Phi, s => s


def base_derivation(it: Internalization) -> Derivation:
    """A derivation of ``Phi, s => s``."""
    sc, s = it.scheme, Var(it.s)
    items = list(it.meta.items)
    if sc == "malc":
        cur = _ax(s)
        for k in range(len(items) - 1, -1, -1):
            cur = _node(items[k:] + [s], s, "!W", cur, index=0)
        return cur
    if sc == "relevant":
        cur = _ax(s)
        for k in range(len(items) - 2, -1, -2):
            cur = _node([Unit()] + items[k + 2:] + [s], s, "1L", cur, index=0)
            cur = _node(items[k:] + [s], s, "/L", _ax(items[k + 1]), cur, index=0, split=2)
        return cur
    if sc == "b2018st":
        zeta = list(it.meta.stoup)
        cur = _head_chain(zeta, items[0], it)
        # land the stoup members at the front, first member first
        for k in range(len(zeta)):
            concl = _seq(zeta[k + 1:] + items + [s], s, stoup=zeta[:k + 1])
            cur = Derivation(concl, RuleApp("!P", stoup_index=k, split=0), (cur,))
        return cur
    # the no-stoup brackets schemes: every head is !((s/s)/X)
    heads = list(range(0, len(items), 2))
    bodies = list(items)
    for h in heads:
        bodies[h] = items[h].body
    if sc in ("b2018", "buszkowski"):
        cur = _head_chain(bodies[:-1], bodies[-1], it)
    else:
        cur = _head_chain(bodies, None, it)
    stage = list(bodies)
    for h in heads:
        stage[h] = items[h]
        cur = _node(stage + [s], s, "!L", cur, index=h)
    return cur


def _head_chain(fs: list, closer, it: Internalization) -> Derivation:
    """``G1, X1, ..., Gn, Xn[, H, closer], s => s`` with G = (s/s)/X and H = (s/s)/<><>q."""
    s = Var(it.s)
    pairs = len(fs) // 2
    n_ss = pairs + (1 if closer is not None else 0)
    cur = _ss_chain(n_ss, it.s)
    pre = [_ss(it.s)] * pairs
    if closer is not None:
        ddq = _ddq(it.q)
        if isinstance(closer, Bracketed):
            left = _node([closer], ddq, "<>R",
                         _node([closer.meta.items[0]], Diamond(Var(it.q)), "<>R", _ax(Var(it.q))))
        else:
            left = _node([closer], ddq, "!L", _ax(ddq), index=0)
        cur = _node(pre + [fs[-1], closer, s], s, "/L", left, cur, index=pairs, split=pairs + 2)
    for k in range(pairs - 1, -1, -1):
        concl = [_ss(it.s)] * k + list(fs[2 * k:]) + ([closer] if closer is not None else []) + [s]
        cur = _node(concl, s, "/L", _ax(fs[2 * k + 1]), cur, index=k, split=k + 2)
    return cur


# ---------------------------------------------------------------------------
# Item 2: landing


def land(it: Internalization, d: Derivation, i: int, pos: int) -> Derivation:
    """From ``d`` of ``Phi, D1, A_i, D2 => C`` (A_i at item ``pos``) derive ``Phi, D1, D2 => C``."""
    sc = it.scheme
    a = it.formulas[i]
    prem = d.sequent
    items = list(prem.antecedent.items)
    if items[pos] != a:
        raise EncodingShapeError(f"item {pos} of {prem} is not {a}")
    c = prem.succedent
    concl_items = items[:pos] + items[pos + 1:]
    if sc in ("malc", "relevant"):
        bi = i if sc == "malc" else 2 * i + 1
        mid = items[:pos] + [Bang(a)] + items[pos + 1:]
        cur = _node(mid, c, "!L", d, index=pos)
        return _node(concl_items, c, "!NC2", cur, index=bi, split=pos)
    if sc == "b2015":
        bi = 2 * i + 1
        box = BoxInv(a)
        s1 = items[:pos] + [Bracketed(MetaFormula(EMPTY_STOUP, (box,)))] + items[pos + 1:]
        cur = _node(s1, c, "[]L", d, index=pos)
        s2 = items[:pos] + [Bracketed(MetaFormula(EMPTY_STOUP, (Bang(box),)))] + items[pos + 1:]
        cur = _node(s2, c, "!L", cur, path=(pos,), index=0)
        return _node(concl_items, c, "!C", cur, index=bi, target=1, span=(pos, 0))
    if sc == "b2018":
        n = len(it.formulas)
        t = 2 * n + 1
        return _land_2018(it, d, i, pos, t, zindex=2 * i + 1)
    if sc == "b2018st":
        return _land_2018st(it, d, i, pos)
    raise ValueError(f"the {sc} scheme lands B-formulas by land_t")


def _land_2018(it, d, i, pos, t, zindex):
    q = Var(it.q)
    a = it.formulas[i]
    items = list(d.sequent.antecedent.items)
    c = d.sequent.succedent
    phi1 = items[:t]
    d1 = items[t + 1:pos]
    d2 = items[pos + 1:]
    ddq = _ddq(it.q)
    # Phi', [[q]], D1, A, D2  <-  <>L twice from  Phi', <><>q, D1, A, D2
    cur = _node(phi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (Diamond(q),)))] + d1 + [a] + d2, c, "<>L", d,
                path=(t,), index=0)
    cur = _node(phi1 + [ddq] + d1 + [a] + d2, c, "<>L", cur, index=t)
    cur = _node(phi1 + [ddq] + d1 + [Bang(a)] + d2, c, "!L", cur, index=pos)
    cur = _node(phi1 + [Bang(a), ddq] + d1 + d2, c, "!P2", cur, index=t, split=pos + 1)
    prod = Product(Bang(a), ddq)
    cur = _node(phi1 + [prod] + d1 + d2, c, "*L", cur, index=t)
    box = BoxInv(prod)
    cur = _node(phi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (box,)))] + d1 + d2, c, "[]L", cur, index=t)
    z = z_formula(a, it.q)
    cur = _node(phi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (z, q)))] + d1 + d2, c, "/L", _ax(q), cur,
                path=(t,), index=0, split=2)
    cur = _node(phi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (Bang(z), q)))] + d1 + d2, c, "!L", cur,
                path=(t,), index=0)
    return _node(phi1 + [_island_q(it.q)] + d1 + d2, c, "!C", cur, index=zindex, target=t)


def _land_2018st(it, d, i, pos):
    q = Var(it.q)
    a = it.formulas[i]
    zeta = list(it.meta.stoup)
    items = list(d.sequent.antecedent.items)
    c = d.sequent.succedent
    d1 = items[1:pos]
    d2 = items[pos + 1:]
    ddq = _ddq(it.q)
    z = z_formula(a, it.q)

    def isl(st, *xs):
        return Bracketed(MetaFormula(Stoup(tuple(st)), tuple(xs)))

    cur = _node([isl((), Diamond(q))] + d1 + [a] + d2, c, "<>L", d, stoup=zeta, path=(0,), index=0)
    cur = _node([ddq] + d1 + [a] + d2, c, "<>L", cur, stoup=zeta, index=0)
    cur = _node([ddq] + d1 + d2, c, "!P", cur, stoup=zeta + [a], stoup_index=len(zeta), split=pos)
    cur = _node([Bang(a), ddq] + d1 + d2, c, "!L", cur, stoup=zeta, index=0)
    prod = Product(Bang(a), ddq)
    cur = _node([prod] + d1 + d2, c, "*L", cur, stoup=zeta, index=0)
    cur = _node([isl((), BoxInv(prod))] + d1 + d2, c, "[]L", cur, stoup=zeta, index=0)
    cur = _node([isl((), z, q)] + d1 + d2, c, "/L", _ax(q), cur, stoup=zeta, path=(0,), index=0, split=2)
    cur = _node([isl((z,), q)] + d1 + d2, c, "!P", cur, stoup=zeta, path=(0,), stoup_index=0, split=0)
    cur = _node([isl((), Bang(z), q)] + d1 + d2, c, "!L", cur, stoup=zeta, path=(0,), index=0)
    cur = _node([isl((Bang(z),), q)] + d1 + d2, c, "!P", cur, stoup=zeta, path=(0,), stoup_index=0, split=0)
    return _node([_island_q(it.q)] + d1 + d2, c, "!C", cur, stoup=zeta, stoup_index=2 * i + 1, target=0)


def land_t(it: Internalization, d: Derivation, i: int, j: int, pos: int) -> Derivation:
    """Variable-indexed landing: ``d`` proves ``Psi, D1, B_i, D2 => t_j``; derive it without B_i."""
    if it.scheme != "buszkowski":
        raise ValueError("land_t belongs to the buszkowski scheme")
    b = it.formulas[i]
    t = it.variables[j]
    tv = Var(t)
    q = Var(it.q)
    ddq = _ddq(it.q)
    items = list(d.sequent.antecedent.items)
    if d.sequent.succedent != tv or items[pos] != b:
        raise EncodingShapeError("premise is not Psi, D1, B, D2 => t")
    r = len(it.meta.items) - 1          # position of !<><>q
    psi1 = items[:r]
    d1 = items[r + 1:pos]
    d2 = items[pos + 1:]
    nb = len(it.formulas)
    zindex = 2 * (j * nb + i) + 1
    # left premise of the /L on t/((t/!B)/!<><>q), built top-down
    cur = _node(psi1 + d1 + [b] + d2 + [Bang(ddq)], tv, "!P1", d, index=len(psi1) + len(d1) + 1 + len(d2),
                split=len(psi1))
    cur = _node(psi1 + d1 + [Bang(b)] + d2 + [Bang(ddq)], tv, "!L", cur, index=len(psi1) + len(d1))
    cur = _node(psi1 + d1 + d2 + [Bang(ddq), Bang(b)], tv, "!P1", cur,
                index=len(psi1) + len(d1) + len(d2) + 1, split=len(psi1) + len(d1))
    tb = RightDiv(tv, Bang(b))
    cur = _node(psi1 + d1 + d2 + [Bang(ddq)], tb, "/R", cur)
    arg = RightDiv(tb, Bang(ddq))
    cur = _node(psi1 + d1 + d2, arg, "/R", cur)
    head = RightDiv(tv, arg)
    rest = psi1 + d1 + d2
    cur = _node([head] + rest, tv, "/L", cur, _ax(tv), index=0, split=1 + len(rest))
    # move the !-formulas of Psi' back in front of the head, rightmost first
    for k in range(len(psi1)):
        concl = psi1[:k] + [psi1[k], head] + psi1[k + 1:] + d1 + d2
        cur = _node(concl, tv, "!P2", cur, index=k, split=k + 2)
    cur = _node(psi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (BoxInv(head),)))] + d1 + d2, tv, "[]L", cur, index=r)
    z = zv_formula(b, t, it.q)
    cur = _node(psi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (z, q)))] + d1 + d2, tv, "/L", _ax(q), cur,
                path=(r,), index=0, split=2)
    cur = _node(psi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (Bang(z), q)))] + d1 + d2, tv, "!L", cur,
                path=(r,), index=0)
    cur = _node(psi1 + [_island_q(it.q)] + d1 + d2, tv, "!C", cur, index=zindex, target=r)
    cur = _node(psi1 + [Bracketed(MetaFormula(EMPTY_STOUP, (Diamond(q),)))] + d1 + d2, tv, "<>L", cur,
                path=(r,), index=0)
    cur = _node(psi1 + [ddq] + d1 + d2, tv, "<>L", cur, index=r)
    return _node(psi1 + [Bang(ddq)] + d1 + d2, tv, "!L", cur, index=r)


# ---------------------------------------------------------------------------
# Item 3: !A1..!AN => prod pi_q(Phi), in the full-exponential calculus


def _projected(it: Internalization) -> list[Formula]:
    from .translate import project_sequent

    return list(project_sequent(Sequent(it.meta, Var(it.s)), it.q).antecedent.items)


def back_sequent(it: Internalization) -> Sequent:
    return _seq([Bang(a) for a in it.formulas], product_of(_projected(it)))


def _prove_head(f: Formula) -> Derivation:
    """``=> !((s/s)/Y)`` with Y a !-formula (weakened) or the unit."""
    g = f.body
    ss, y = g.left, g.right
    inner = _node([], ss, "/R", _ax(ss.left))
    if isinstance(y, Bang):
        top = _node([y], ss, "!W", inner, index=0)
    elif isinstance(y, Unit):
        top = _node([y], ss, "1L", inner, index=0)
    else:
        raise EncodingShapeError(f"unexpected head {f}")
    return _node([], f, "!R", _node([], g, "/R", top))


def _prove_bang_unit() -> Derivation:
    return _node([], Bang(Unit()), "!R", _node([], Unit(), "1R"))


def _prove_owned(ba: Bang, f: Formula) -> Derivation:
    """``!A => f`` where f is the projection of the item carrying A."""
    if f == ba:
        return _ax(ba)
    one = Unit()
    body = f.body
    if body == RightDiv(Product(ba, one), one):
        # !A => !((!A*1)/1)
        inner = _node([ba, one], Product(ba, one), "*R", _ax(ba), _node([one], one, "1L", _node([], one, "1R"),
                                                                         index=0), split=1)
        return _node([ba], f, "!R", _node([ba], body, "/R", inner))
    # !B => !((t/((t/!B)/!1))/1)
    t = body.left.left
    tb = RightDiv(t, ba)
    arg = RightDiv(tb, Bang(one))
    swap = _node([tb, ba], t, "/L", _ax(ba), _ax(t), index=0, split=2)
    swap = _node([ba, tb], t, "!P2", swap, index=0, split=2)
    core = _node([ba, arg], t, "/L", _prove_bang_unit(), swap, index=1, split=2)
    core = _node([ba], body.left, "/R", core)
    core = _node([ba, one], body.left, "1L", core, index=1)
    return _node([ba], f, "!R", _node([ba], body, "/R", core))


def rearrange_bangs(d: Derivation, target: Sequence[Formula]) -> Derivation:
    """Derive ``target => C`` from ``d`` of ``M => C`` by !P1 and local !C.

    Both lists consist of !-formulae and every member of ``target`` occurs in ``M``.
    """
    want = list(d.sequent.antecedent.items)
    cur_items = list(target)
    steps: list[tuple[list, RuleApp]] = []
    # contract until every formula has the multiplicity the derivation uses
    for f in dict.fromkeys(want):
        have = [j for j, x in enumerate(cur_items) if x == f]
        if not have:
            raise EncodingShapeError(f"{f} does not occur in the target")
        for _ in range(want.count(f) - len(have)):
            j0 = have[0]
            steps.append((list(cur_items), RuleApp("!C", index=j0)))
            cur_items = cur_items[:j0 + 1] + cur_items[j0:]
    if sorted(map(str, cur_items)) != sorted(map(str, want)):
        raise EncodingShapeError("target has more copies than the derivation uses")
    # then move each formula left into place
    for p in range(len(want)):
        if cur_items[p] == want[p]:
            continue
        j = next(j for j in range(p + 1, len(cur_items)) if cur_items[j] == want[p])
        steps.append((list(cur_items), RuleApp("!P1", index=j, split=p)))
        cur_items = cur_items[:p] + [cur_items[j]] + cur_items[p:j] + cur_items[j + 1:]
    succ = d.sequent.succedent
    for items, app in reversed(steps):
        d = Derivation(_seq(items, succ), app, (d,))
    return d


def back_derivation(it: Internalization) -> Derivation:
    """The item-3 derivation, piece by piece and joined by *R."""
    goal = back_sequent(it)
    flat = _projected(it)
    sc = it.scheme
    n = len(it.formulas)
    pairs = 2 * n * (len(it.variables) if sc == "buszkowski" else 1)
    pieces, ants = [], []
    for k, f in enumerate(flat):
        owner = None
        if sc == "malc":
            owner = k
        elif sc in ("relevant", "b2015", "b2018", "buszkowski") and k < pairs and k % 2 == 1:
            owner = (k // 2) % n
        elif sc == "b2018st":
            raise ValueError("no item-3 claim for the stoup scheme")
        if owner is not None:
            ba = Bang(it.formulas[owner])
            pieces.append(_prove_owned(ba, f))
            ants.append([ba])
        elif isinstance(f, Unit):
            pieces.append(_node([], f, "1R"))
            ants.append([])
        elif f == Bang(Unit()):
            pieces.append(_prove_bang_unit())
            ants.append([])
        elif sc == "relevant":
            # => 1/!A by /R, !W, 1R
            pieces.append(_node([], f, "/R", _node([f.right], f.left, "!W", _node([], f.left, "1R"), index=0)))
            ants.append([])
        else:
            pieces.append(_prove_head(f))
            ants.append([])
    cur, acc = pieces[0], list(ants[0])
    for k in range(1, len(pieces)):
        ant = acc + ants[k]
        cur = _node(ant, product_of(flat[:k + 1]), "*R", cur, pieces[k], split=len(acc))
        acc = ant
    return rearrange_bangs(cur, goal.antecedent.items)



# ---------------------------------------------------------------------------
# Self-test of an internalisation


@dataclass
class SelftestResult:
    ok: bool
    item: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return "ok" if self.ok else f"failure(item {self.item}: {self.detail})"


def _fresh(k: int) -> Var:
    return Var(f"d#{k}")


def internalization_selftest(it: Internalization, calculus: Calculus | str | None = None,
                             search_time: float | None = 2.0) -> SelftestResult:
    """Check the three internalisation items for ``it``."""
    from .search import Derivable, SearchBudget, search

    c = get_calculus(calculus or SCHEME_CALCULUS[it.scheme])
    s = Var(it.s)
    # item 1
    try:
        base = base_derivation(it)
        want = Sequent(MetaFormula(it.meta.stoup, it.meta.items + (s,)), s)
        if base.sequent != want:
            return SelftestResult(False, "1", f"template proves {base.sequent}, not {want}")
        res = check(c, base)
        if not res.ok:
            return SelftestResult(False, "1", str(res.error))
    except (EncodingShapeError, IndexError, AttributeError, AssertionError) as e:
        return SelftestResult(False, "1", f"no derivation of Phi, s => s: {e}")
    # item 2, on a few instances of D1, D2 and C
    w = it.width
    lr = c.features.lambek_restricted
    for i, a in enumerate(it.formulas):
        cases = [([], [], Var("c#0")), ([_fresh(1)], [_fresh(2)], Var("c#0")), ([_fresh(1), _fresh(2)], [], Var("c#0"))]
        targets = range(len(it.variables)) if it.scheme == "buszkowski" else [None]
        for d1, d2, cc in cases:
            for j in targets:
                succ = cc if j is None else Var(it.variables[j])
                pos = w + len(d1)
                prem = Sequent(MetaFormula(it.meta.stoup, it.meta.items + tuple(d1) + (a,) + tuple(d2)), succ)
                hyp = Derivation(prem, RuleApp("hyp"))
                try:
                    d = land(it, hyp, i, pos) if j is None else land_t(it, hyp, i, j, pos)
                except (EncodingShapeError, IndexError, AttributeError) as e:
                    return SelftestResult(False, "2", f"landing {a}: {e}")
                concl = Sequent(MetaFormula(it.meta.stoup, it.meta.items + tuple(d1) + tuple(d2)), succ)
                if d.sequent != concl:
                    return SelftestResult(False, "2", f"landing {a} proves {d.sequent}")
                res = check(c, d, assumptions=[prem])
                if not res.ok:
                    return SelftestResult(False, "2", f"landing {a}: {res.error}")
                if lr and not all(lambek_restriction_holds(n.sequent) for _, n in d.nodes()):
                    return SelftestResult(False, "2", "landing breaks the Lambek restriction")
    # item 3 (not claimed for the stoup variant): a short search, then the transcribed template
    if it.scheme == "b2018st":
        return SelftestResult(True)
    full = get_calculus("!malc*+additives=off")
    goal = back_sequent(it)
    if search_time:
        v = search(full, goal, SearchBudget(max_depth=60, max_contractions=2, max_sequent_size=400,
                                            time_limit=search_time))
        if isinstance(v, Derivable):
            return SelftestResult(True, detail="item 3 by search")
    try:
        d = back_derivation(it)
    except (ValueError, AttributeError) as e:
        return SelftestResult(False, "3", str(e))
    if d.sequent != goal:
        return SelftestResult(False, "3", f"template proves {d.sequent}, not {goal}")
    res = check(full, d)
    if not res.ok:
        return SelftestResult(False, "3", str(res.error))
    return SelftestResult(True, detail="item 3 by template")


# ---------------------------------------------------------------------------
# Synthesis: rewriting trace -> derivation


def grammar_internalization(g: Type0Grammar, scheme: str, q: str = "q") -> Internalization:
    if scheme == "buszkowski":
        rules = buszkowski_rules(g)
        forms = [b_formula(r) for r in rules]
        vs = sorted({v for f in forms for v in variables(f)})
        return internalizer(forms, scheme, q=q, s=g.start, variables_=vs)
    return internalizer(grammar_formulas(g), scheme, q=q, s=g.start)


def find_trace(g: Type0Grammar, word, max_len: int | None = None, max_steps: int = 200_000) -> RewriteTrace | None:
    m = rewrite_search(g, word, max_len=max_len, max_steps=max_steps)
    return m.trace


def synthesize_sequent_derivation(g: Type0Grammar, word, scheme: str, q: str = "q",
                                  trace: RewriteTrace | None = None, max_steps: int = 200_000) -> Derivation:
    """A derivation of ``Phi_G, a1..an => s`` (B-rule form for ``buszkowski``).

    For ``b2018st`` the stoup is emptied at the end by !L, giving the
    doubly-banged stoup-free sequent.
    """
    word = word_of(word)
    if trace is None:
        trace = find_trace(g, word, max_steps=max_steps)
        if trace is None:
            raise GrammarError(f"no rewriting of {g.start} into {' '.join(word)} within the bounds")
    if trace.start != (g.start,) or trace.final != word or not validate_trace(g, trace):
        raise GrammarError("the trace does not rewrite the start symbol into the word")
    if scheme == "buszkowski":
        return _synthesize_brules(g, trace)
    it = grammar_internalization(g, scheme, q)
    off = it.width
    forms = grammar_formulas(g)
    cur = base_derivation(it)
    prev = trace.start
    for st in trace.steps:
        p = g.productions[st.production]
        pos = off + st.position
        xs, ys = _vars(p.lhs), _vars(p.rhs)
        cur = product_left(cur, pos, xs)
        a = forms[st.production]
        if ys:
            items = list(cur.sequent.antecedent.items)
            new = items[:pos] + [a] + ys + items[pos + 1:]
            cur = Derivation(_with_items(cur.sequent, new), RuleApp("/L", index=pos, split=pos + 1 + len(ys)),
                             (product_right(ys), cur))
        cur = land(it, cur, st.production, pos)
        prev = st.word
    if scheme == "b2018st":
        cur = unstoup_phi(cur)
    return cur


def unstoup_phi(d: Derivation) -> Derivation:
    """Empty the root stoup by !L, stoup members going in front in stoup order."""
    zeta = list(d.sequent.antecedent.stoup)
    items = list(d.sequent.antecedent.items)
    cur = d
    for k in range(len(zeta) - 1, -1, -1):
        concl = _seq([Bang(x) for x in zeta[k:k + 1]] + items, d.sequent.succedent, stoup=zeta[:k])
        cur = Derivation(concl, RuleApp("!L", index=0), (cur,))
        items = [Bang(zeta[k])] + items
    return cur


def encoding_sequent(g: Type0Grammar, word, scheme: str, q: str = "q") -> Sequent:
    """The end-sequent that synthesis derives, without running it."""
    word = word_of(word)
    if scheme == "buszkowski":
        return _seq(_vars(word), Var(g.start))
    it = grammar_internalization(g, scheme, q)
    if scheme == "b2018st":
        pre = [Bang(x) for x in it.meta.stoup] + list(it.meta.items)
        return _seq(pre + _vars(word), Var(g.start))
    return _seq(list(it.meta.items) + _vars(word), Var(g.start))


# ---------------------------------------------------------------------------
# Extraction: derivation in the full calculus -> rewriting trace


def _visible(f) -> list[str] | None:
    """Atoms of an antecedent formula after hiding / and ! and opening products."""
    if isinstance(f, Var):
        return [f.name]
    if isinstance(f, Product):
        a, b = _visible(f.left), _visible(f.right)
        if a is None or b is None:
            return None
        return a + b
    if isinstance(f, Unit):
        return []
    return None


def _word(items) -> list[str]:
    out = []
    for it in items:
        if isinstance(it, Bracketed):
            raise EncodingShapeError("brackets have no place in the full-exponential calculus")
        v = _visible(it)
        if v is not None:
            out.extend(v)
    return out


def _offset(items, idx: int) -> int:
    return len(_word(items[:idx]))


def extract_rewriting(d: Derivation, g: Type0Grammar) -> RewriteTrace:
    """Read a rewriting of ``s`` into the word off a cut-free derivation of
    ``!A1, ..., !AN, a1, ..., an => s`` in the full-exponential calculus."""
    forms = {f: k for k, f in enumerate(grammar_formulas(g))}
    if any(n.rule.rule == "cut" for _, n in d.nodes()):
        raise EncodingShapeError("extraction needs a cut-free derivation")
    if d.sequent.succedent != Var(g.start):
        raise EncodingShapeError("the succedent must be the start symbol")

    def vis(f) -> tuple[str, ...]:
        v = _visible(f)
        return () if v is None else tuple(v)

    def rec(n: Derivation) -> tuple[tuple[str, ...], list[tuple[int, int]]]:
        """(succedent word, steps rewriting it into the antecedent word)."""
        items = list(n.sequent.antecedent.items)
        goal = vis(n.sequent.succedent)
        rule, app = n.rule.rule, n.rule
        if rule in ("id", "1R"):
            if tuple(_word(items)) != goal:
                raise EncodingShapeError(f"axiom {n.sequent} hides unevenly")
            return goal, []
        if rule in ("*L", "!W", "!C", "!NC1", "!NC2", "!P1", "!P2", "1L"):
            return rec(n.children[0])
        if rule == "!L":
            body = items[app.index].body
            g0, steps = rec(n.children[0])
            if _visible(body) is not None and vis(body):
                k = forms.get(body)
                if k is None:
                    raise EncodingShapeError(f"dereliction of {body}, which is not a grammar formula")
                steps = steps + [(k, _offset(items, app.index))]
            return g0, steps
        if rule == "*R":
            g1, s1 = rec(n.children[0])
            g2, s2 = rec(n.children[1])
            w1 = len(_word(n.children[0].sequent.antecedent.items))
            return g1 + g2, s1 + [(k, p + w1) for k, p in s2]
        if rule == "/L":
            f = items[app.index]
            left, right = n.children
            gl, sl = rec(left)
            gr, sr = rec(right)
            at = _offset(items, app.index)
            k = forms.get(f)
            if k is not None:
                mid = [(k, at)]
            elif vis(f.left) == vis(f.right):
                mid = []
            else:
                raise EncodingShapeError(f"/L on {f}, which is not a grammar formula")
            return gr, sr + mid + [(kk, p + at) for kk, p in sl]
        raise EncodingShapeError(f"rule {rule} does not occur in encoding derivations")

    goal, steps = rec(d)
    word = tuple(goal)
    out = []
    for k, pos in steps:
        word = apply_production(g, word, k, pos)
        out.append(RewriteStep(word, k, pos))
    tr = RewriteTrace(tuple(goal), tuple(out))
    final = tuple(_word(d.sequent.antecedent.items))
    if tr.final != final:
        raise EncodingShapeError("replayed trace does not end in the antecedent word")
    return tr


# ---------------------------------------------------------------------------
# One-division B-rule encoding


def _sym(kind: str, k: int) -> str:
    return f"{kind}#{k}"


def _bar(y: str, k: int) -> str:
    return f"{y}~#{k}"


def buszkowski_rules(g: Type0Grammar) -> list[BRule]:
    """Seven families of B-rules per production, ordered (1), (2)_y, (3), (4)_y, (5), (6)_y, (7)."""
    out = []
    ys = g.symbols()
    s = g.start
    for k, p in enumerate(g.productions):
        a, b, c, e, f = (_sym(x, k) for x in "abcef")
        out.append(BRule(qs=(), r=s, ps=(e,), t=a))
        out += [BRule(qs=(y,), r=a, ps=(_bar(y, k),), t=a) for y in ys]
        out.append(BRule(qs=p.lhs, r=a, ps=tuple(_bar(w, k) for w in p.rhs), t=b))
        out += [BRule(qs=(y,), r=b, ps=(_bar(y, k),), t=b) for y in ys]
        out.append(BRule(qs=(e,), r=b, ps=(f,), t=c))
        out += [BRule(qs=(_bar(y, k),), r=c, ps=(y,), t=c) for y in ys]
        out.append(BRule(qs=(f,), r=c, ps=(), t=s))
    return out


def b_formula(r: BRule) -> Formula:
    """``(t/(r/q1..qm))/p1..pk`` with ``E/F1..Fn`` read as ``(E/Fn)/.../F1``."""
    x: Formula = Var(r.r)
    for qv in reversed(r.qs):
        x = RightDiv(x, Var(qv))
    y: Formula = RightDiv(Var(r.t), x)
    for pv in reversed(r.ps):
        y = RightDiv(y, Var(pv))
    return y


def brule_calculus(rules: Sequence[BRule], primed: bool = False) -> Calculus:
    return extend_with_b_rules(get_calculus("l*(/)"), list(rules), primed)


def _rule_index(rules: Sequence[BRule]) -> dict[BRule, int]:
    out = {}
    for k, r in enumerate(rules):
        out.setdefault(r, k)
    return out


def _synthesize_brules(g: Type0Grammar, trace: RewriteTrace) -> Derivation:
    rules = buszkowski_rules(g)
    idx = _rule_index(rules)
    s = g.start
    cur = _ax(Var(s))

    def b(rule: BRule, items, succ, child):
        return _node(items, Var(succ), "B", child, brule=idx[rule])

    word = list(trace.start)
    for st in trace.steps:
        k = st.production
        p = g.productions[k]
        pos = st.position
        zi = word[:pos]
        v = list(p.lhs)
        zj = word[pos + len(v):]
        w = list(p.rhs)
        a, bb, c, e, f = (_sym(x, k) for x in "abcef")
        bar = lambda y: _bar(y, k)  # noqa: E731
        V = lambda xs: [Var(x) for x in xs]  # noqa: E731
        # (1)
        items = [e] + zi + v + zj
        cur = b(BRule((), s, (e,), a), V(items), a, cur)
        # (2) moves zj to the front, last symbol first
        tail = list(zj)
        front: list[str] = []
        while tail:
            y = tail.pop()
            front.insert(0, bar(y))
            cur = b(BRule((y,), a, (bar(y),), a), V(front + [e] + zi + v + tail), a, cur)
        # (3)
        items = [bar(x) for x in w] + front + [e] + zi
        cur = b(BRule(tuple(v), a, tuple(bar(x) for x in w), bb), V(items), bb, cur)
        # (4) moves zi to the front
        tail = list(zi)
        pre = [bar(x) for x in w] + front + [e]
        while tail:
            y = tail.pop()
            pre = [bar(y)] + pre
            cur = b(BRule((y,), bb, (bar(y),), bb), V(pre + tail), bb, cur)
        # (5)
        body = [bar(x) for x in zi] + [bar(x) for x in w] + front
        cur = b(BRule((e,), bb, (f,), c), V([f] + body), c, cur)
        # (6) unbars from the right
        plain: list[str] = []
        rest = [f] + body
        full_word = zi + w + zj
        for y in reversed(full_word):
            rest = rest[:-1]
            plain.insert(0, y)
            cur = b(BRule((bar(y),), c, (y,), c), V(plain + rest), c, cur)
        # (7)
        word = full_word
        cur = b(BRule((f,), c, (), s), V(word), s, cur)
    return cur


def brules_derivation_calculus(g: Type0Grammar) -> Calculus:
    return brule_calculus(buszkowski_rules(g))


@dataclass
class BSelftest:
    ok: bool
    failed: list[tuple[int, str, str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _slash_chain(base: Formula, args: Sequence[str]) -> Formula:
    x = base
    for a in reversed(args):
        x = RightDiv(x, Var(a))
    return x


def bformula_axiom_derivation(r: BRule, rules: Sequence[BRule], k: int, formula=b_formula) -> Derivation:
    """``=> B`` from B-rule ``k`` (the B-axiom template)."""
    bf = formula(r)
    x = _slash_chain(Var(r.r), r.qs)
    ps, qs = list(r.ps), list(r.qs)
    # X, q1..qm => r by /L over axioms
    cur = _ax(Var(r.r))
    for j in range(len(qs) - 1, -1, -1):
        head = _slash_chain(Var(r.r), qs[j:])
        cur = _node([head] + _vars(qs[j:]), Var(r.r), "/L", _ax(Var(qs[j])), cur, index=0, split=2)
    cur = _node(_vars(ps) + [x], Var(r.t), "B", cur, brule=k)
    tx = RightDiv(Var(r.t), x)
    cur = _node(_vars(ps), tx, "/R", cur)
    for j in range(len(ps) - 1, -1, -1):
        cur = _node(_vars(ps[:j]), _slash_chain(tx, ps[j:]), "/R", cur)
    if cur.sequent.succedent != bf:
        # the formula given does not match the rule; keep the claimed succedent so check fails
        cur = Derivation(Sequent(cur.sequent.antecedent, bf), cur.rule, cur.children)
    return cur


def bprime_from_brule(r: BRule, k: int) -> tuple[Derivation, Sequent]:
    """B-rule k modelled by its B'-rule with axiom left premises."""
    dv = Var("d#0")
    prem = _seq([dv] + _vars(r.qs), Var(r.r))
    hyp = Derivation(prem, RuleApp("hyp"))
    kids = [_ax(Var(p)) for p in r.ps] + [hyp]
    d = _node(_vars(r.ps) + [dv], Var(r.t), "B'", *kids, brule=k, splits=tuple(range(1, len(r.ps) + 1)))
    return d, prem


def bprime_by_axiom(r: BRule, formula=b_formula) -> tuple[Derivation, list[Sequent]]:
    """B'-rule instance from the B-axiom by /L, /R and one cut."""
    dv = Var("d#0")
    pis = [Var(f"pi#{j}") for j in range(len(r.ps))]
    hyps = [_seq([pi], Var(p)) for pi, p in zip(pis, r.ps)]
    main = _seq([dv] + _vars(r.qs), Var(r.r))
    bf = formula(r)
    hyps_all = hyps + [main, _seq([], bf)]
    # d => r/q1..qm by /R from d, q1..qm => r
    cur = Derivation(main, RuleApp("hyp"))
    qs = list(r.qs)
    for j in range(len(qs) - 1, -1, -1):
        cur = _node([dv] + _vars(qs[:j]), _slash_chain(Var(r.r), qs[j:]), "/R", cur)
    x = _slash_chain(Var(r.r), qs)
    tx = RightDiv(Var(r.t), x)
    cur = _node([tx, dv], Var(r.t), "/L", cur, _ax(Var(r.t)), index=0, split=2)
    ps = list(r.ps)
    for j in range(len(ps) - 1, -1, -1):
        head = _slash_chain(tx, ps[j:])
        items = [head] + pis[j:] + [dv]
        cur = _node(items, Var(r.t), "/L", Derivation(hyps[j], RuleApp("hyp")), cur, index=0, split=2)
    top = cur
    root = _node(pis + [dv], Var(r.t), "cut", Derivation(_seq([], bf), RuleApp("hyp")), top,
                 span=(0, 0), cut_formula=bf)
    return root, hyps_all


def brule_equivalence_selftest(rules: Sequence[BRule], formula=b_formula) -> BSelftest:
    """Check the three translation templates between B-rules, B'-rules and B-axioms."""
    rules = list(rules)
    cb = brule_calculus(rules)
    cbp = brule_calculus(rules, primed=True)
    ccut = get_calculus("l*(/)+cut")
    failed = []
    for k, r in enumerate(rules):
        d, prem = bprime_from_brule(r, k)
        res = check(cbp, d, assumptions=[prem])
        if not res.ok:
            failed.append((k, "B to B'", str(res.error)))
        d, hyps = bprime_by_axiom(r, formula)
        res = check(ccut, d, assumptions=hyps)
        want = _seq([Var(f"pi#{j}") for j in range(len(r.ps))] + [Var("d#0")], Var(r.t))
        if not res.ok or d.sequent != want:
            failed.append((k, "B' from B-axiom", str(res.error) if not res.ok else "wrong end-sequent"))
        d = bformula_axiom_derivation(r, rules, k, formula)
        res = check(cb, d)
        if not res.ok or d.sequent != _seq([], formula(r)):
            failed.append((k, "B-axiom from B", str(res.error) if not res.ok else "wrong end-sequent"))
    return BSelftest(not failed, failed)


def brules_to_json(rules: Sequence[BRule]) -> str:
    return json.dumps([{"qs": list(r.qs), "r": r.r, "ps": list(r.ps), "t": r.t} for r in rules], indent=1)


def load_brules(path: str | Path) -> list[BRule]:
    """A JSON list of ``{qs, r, ps, t}`` objects, or a grammar file (its B-rules)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("["):
        return [BRule(tuple(o["qs"]), o["r"], tuple(o["ps"]), o["t"]) for o in json.loads(text)]
    return buszkowski_rules(parse_grammar(text))


# ---------------------------------------------------------------------------
# Grammar for the r.e. language of g


def _meta_product(m: MetaFormula) -> list[Formula]:
    out = []
    for x in m.items:
        if isinstance(x, Bracketed):
            out.append(Diamond(product_of(_meta_product(x.meta))))
        else:
            out.append(x)
    return out


def build_grammar_from_type0(g: Type0Grammar, scheme: str, q: str = "q"):
    """Identity lexicon and goal ``(prod Phi_G)\\s`` with prod[G] = <>prod G."""
    from .grammar import Lexicon

    if scheme == "buszkowski":
        raise ValueError("the buszkowski scheme yields B-rule derivations, not a lexicon")
    it = grammar_internalization(g, scheme, q)
    if scheme == "b2018st":
        meta = MetaFormula(EMPTY_STOUP, tuple(Bang(x) for x in it.meta.stoup) + it.meta.items)
    else:
        meta = it.meta
    goal = LeftDiv(product_of(_meta_product(meta)), Var(g.start))
    terms = sorted(g.terminals or (g.alphabet - {g.start}))
    lex = Lexicon({a: (Var(a),) for a in terms}, goal)
    return lex, goal


def recognition_derivation(g: Type0Grammar, word, scheme: str, q: str = "q") -> Derivation:
    """``a1..an => (prod Phi)\\s`` by <>L, *L and \\R on top of synthesis."""
    d = synthesize_sequent_derivation(g, word, scheme, q)
    _, goal = build_grammar_from_type0(g, scheme, q)
    n_phi = len(d.sequent.antecedent.items) - len(word_of(word))
    for k in range(n_phi):
        if isinstance(d.sequent.antecedent.items[k], Bracketed):
            d = _close_item(d, (), k)
    phi = list(d.sequent.antecedent.items[:n_phi])
    if not phi:
        d = _node([UNIT] + list(d.sequent.antecedent.items), d.sequent.succedent, "1L", d, index=0)
    elif len(phi) > 1:
        d = product_left(d, 0, phi)
    return _node(list(d.sequent.antecedent.items[1:]), goal, "\\R", d)


def _in_zone(d: Derivation, path, items, rule: str, **params) -> Derivation:
    z = zone_at(d.sequent, path)
    concl = replace_zone(d.sequent, path, MetaFormula(z.stoup, tuple(items)))
    return Derivation(concl, RuleApp(rule, path=tuple(path), **params), (d,))


def _close_item(d: Derivation, path, k: int) -> Derivation:
    """Turn the bracketed item ``k`` of zone ``path`` into a diamond formula."""
    inner = tuple(path) + (k,)
    for j, x in enumerate(zone_at(d.sequent, inner).items):
        if isinstance(x, Bracketed):
            d = _close_item(d, inner, j)
    xs = list(zone_at(d.sequent, inner).items)
    if not xs:
        d = _in_zone(d, inner, [UNIT], "1L", index=0)
        xs = [UNIT]
    for j in range(2, len(xs) + 1):
        d = _in_zone(d, inner, [product_of(xs[:j])] + xs[j:], "*L", index=0)
    outer = list(zone_at(d.sequent, path).items)
    outer[k] = Diamond(product_of(xs))
    return _in_zone(d, path, outer, "<>L", index=k)
