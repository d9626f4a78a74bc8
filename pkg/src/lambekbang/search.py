"""Bounded backward proof search, cut-free, with three-valued verdicts.

The engine is an iterative-deepening AND-OR depth-first search over
:func:`~lambekbang.calculi.enumerate_backward`. A branch is pruned when a
premise repeats a sequent already on the current path; minimal derivations
never repeat a sequent along a branch, so pruning loses nothing.

``Underivable`` is returned only when an iteration finished without any
budget cap firing. Failures are memoised only when they are absolute: no
cap fired and no ancestor prune happened anywhere below.
"""

from __future__ import annotations

import contextlib
import gc
import time
from dataclasses import dataclass, field
from functools import lru_cache

from .calculi import Calculus, RuleApp, enumerate_backward, get_calculus
from .kernel import Derivation
from .syntax import (
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
    Unit,
    Var,
    parse_sequent,
    sequent_size,
)

CONTRACTION_RULES = frozenset({"!C", "!C'", "!NC1", "!NC2"})

_PRIORITY = {
    "id": 0, "1R": 0,
    "1L": 1, "*L": 1, "!L": 1, "[]L": 1, "<>L": 1, "\\R": 1, "/R": 1, "[]R": 1,
    "\\L": 2, "/L": 2, "|L": 2, "&L1": 2, "&L2": 2, "B": 2, "B'": 2,
    "*R": 3, "&R": 3, "|R1": 3, "|R2": 3, "<>R": 3, "!R": 3, "!R'": 3,
    "!P": 4, "!P1": 4, "!P2": 4, "!W": 4,
    "!C": 5, "!C'": 5, "!NC1": 5, "!NC2": 5,
}


@lru_cache(maxsize=None)
def bracket_charge(f: Formula) -> int | None:
    """Net bracket count of ``f``: +1 per <>, -1 per []; arguments of divisions count negatively.

    None when additive branches disagree or a ! guards a charged formula.
    """
    if isinstance(f, (Diamond, BoxInv)):
        b = bracket_charge(f.body)
        return None if b is None else b + (1 if isinstance(f, Diamond) else -1)
    if isinstance(f, Bang):
        return 0 if bracket_charge(f.body) == 0 else None
    if isinstance(f, (LeftDiv, RightDiv)):
        res, arg = (f.right, f.left) if isinstance(f, LeftDiv) else (f.left, f.right)
        a, b = bracket_charge(res), bracket_charge(arg)
        return None if a is None or b is None else a - b
    if isinstance(f, Product):
        a, b = bracket_charge(f.left), bracket_charge(f.right)
        return None if a is None or b is None else a + b
    if isinstance(f, (Conj, Disj)):
        a, b = bracket_charge(f.left), bracket_charge(f.right)
        return a if a is not None and a == b else None
    return 0


def _meta_charge(m: MetaFormula) -> int | None:
    total = 0
    for f in m.stoup:
        b = bracket_charge(f)
        if b is None:
            return None
        total += b
    for it in m.items:
        if isinstance(it, Bracketed):
            b = _meta_charge(it.meta)
            b = None if b is None else b + 1
        else:
            b = bracket_charge(it)
        if b is None:
            return None
        total += b
    return total


def contraction_demand(c: Calculus, s: Sequent) -> int | None:
    """How many contractions every cut-free derivation of ``s`` uses, or None when unknown.

    Every rule except contraction keeps bracket pairs plus formula charges of
    the antecedent equal to the succedent charge; a 2018-family contraction
    removes one pair, a 2015-family one adds one. This needs every !-formula
    to carry zero charge.
    """
    if not c.features.has_brackets:
        return None
    a, b = _meta_charge(s.antecedent), bracket_charge(s.succedent)
    if a is None or b is None:
        return None
    bp = c.features.bang_profile
    if bp in ("morrill2018", "primed2018"):
        return a - b
    if bp in ("morrill2015", "primed2015"):
        return b - a
    return a - b if bp is None else None


@lru_cache(maxsize=None)
def atom_balance(f: Formula, pol: int) -> tuple[tuple, tuple] | None:
    """Signed atom counts of ``f`` at polarity ``pol`` outside negative !-bodies,
    and the counts of each negative !-body (usable any number of times).

    None when additives or nested negative ! make the count ambiguous.
    """
    if isinstance(f, Var):
        return ((f.name, pol),), ()
    if isinstance(f, (Conj, Disj)):
        return None
    if isinstance(f, Bang):
        inner = atom_balance(f.body, pol)
        if inner is None or pol > 0:
            return inner
        if inner[1]:
            return None
        return (), (inner[0],) if inner[0] else ()
    if isinstance(f, (Diamond, BoxInv)):
        return atom_balance(f.body, pol)
    if isinstance(f, (LeftDiv, RightDiv, Product)):
        if isinstance(f, Product):
            parts = ((f.left, pol), (f.right, pol))
        else:
            res, arg = (f.right, f.left) if isinstance(f, LeftDiv) else (f.left, f.right)
            parts = ((res, pol), (arg, -pol))
        got = [atom_balance(g, q) for g, q in parts]
        if None in got:
            return None
        return _merge(got[0][0], got[1][0]), got[0][1] + got[1][1]
    return (), ()


def _merge(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for k, v in b:
        d[k] = d.get(k, 0) + v
    return tuple(sorted((k, v) for k, v in d.items() if v))


def _meta_balance(m: MetaFormula):
    """Summed :func:`atom_balance` of a meta-formula, cached on it; stoup members are !-bodies."""
    got = m.__dict__.get("_bal", False)
    if got is not False:
        return got
    total: dict = {}
    bodies: set = set()
    parts = [atom_balance(Bang(f), -1) for f in m.stoup]
    for it in m.items:
        parts.append(_meta_balance(it.meta) if isinstance(it, Bracketed) else atom_balance(it, -1))
    got = None
    if None not in parts:
        for vec, bs in parts:
            for a, v in vec:
                total[a] = total.get(a, 0) + v
            bodies.update(bs)
        got = (tuple(sorted((a, v) for a, v in total.items() if v)), frozenset(bodies))
    object.__setattr__(m, "_bal", got)
    return got


def count_feasible(s: Sequent) -> bool:
    """Necessary condition from atom counts: the outside balance must be
    cancelled by non-negative multiples of the negative !-bodies.

    Every rule but cut and hypothesis rules keeps each atom's signed count,
    except that !-rules copy or drop negative !-bodies. With several distinct
    bodies only the atoms they cannot touch are checked.
    """
    a, b = _meta_balance(s.antecedent), atom_balance(s.succedent, 1)
    if a is None or b is None:
        return True
    total = _merge(a[0], b[0])
    bodies = a[1] | set(b[1])
    if not total:
        return True
    if not bodies:
        return False
    if len(bodies) == 1:
        (b,) = bodies
        bd = dict(b)
        if set(dict(total)) - set(bd):
            return False
        ks = [-v / bd[k] for k, v in total]
        return ks[0] > 0 and ks[0] == int(ks[0]) and all(k == ks[0] for k in ks) and all(
            -dict(total).get(k, 0) == ks[0] * v for k, v in b)
    touched = {k for b in bodies for k, _ in b}
    return all(k in touched for k, _ in total)


@lru_cache(maxsize=None)
def _bang_atoms(f: Formula) -> frozenset:
    if isinstance(f, Bang):
        return frozenset(_atoms(f.body))
    if isinstance(f, (Diamond, BoxInv)):
        return _bang_atoms(f.body)
    if isinstance(f, (LeftDiv, RightDiv, Product, Conj, Disj)):
        return _bang_atoms(f.left) | _bang_atoms(f.right)
    return frozenset()


@lru_cache(maxsize=None)
def _atoms(f: Formula) -> frozenset:
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, (Bang, Diamond, BoxInv)):
        return _atoms(f.body)
    if isinstance(f, (LeftDiv, RightDiv, Product, Conj, Disj)):
        return _atoms(f.left) | _atoms(f.right)
    return frozenset()


def _outside(f: Formula) -> tuple | None:
    got = atom_balance(f, -1)
    return None if got is None else got[0]


@lru_cache(maxsize=None)
def _targets(f: Formula, pol: int) -> tuple[tuple, tuple, tuple, tuple] | None:
    """Ways a bracket pair could be removed, from the subformulae of ``f``.

    Returns (box, dia, bang_box, bang_dia) of (charge, atoms) targets:
    ``box`` has (ch(A), atoms of A) for each negative []A, ``dia`` has
    (1 + ch(A), atoms of A) for each positive <>A; the bang_ parts collect
    the same under a !, which may be copied anywhere.
    """
    if isinstance(f, Bang):
        inner = _targets(f.body, pol)
        if inner is None or bracket_charge(f.body) != 0:
            return None
        box, dia, bb, bd = inner
        return (), (), box + bb, dia + bd
    if isinstance(f, (Diamond, BoxInv)):
        inner = _targets(f.body, pol)
        c = bracket_charge(f.body)
        if inner is None or c is None:
            return None
        box, dia, bb, bd = inner
        if isinstance(f, BoxInv) and pol < 0:
            box = box + ((c, _outside(f.body)),)
        if isinstance(f, Diamond) and pol > 0:
            dia = dia + ((1 + c, _outside(f.body)),)
        return box, dia, bb, bd
    if isinstance(f, (LeftDiv, RightDiv)):
        res, arg = (f.right, f.left) if isinstance(f, LeftDiv) else (f.left, f.right)
        parts = ((res, pol), (arg, -pol))
    elif isinstance(f, (Product, Conj, Disj)):
        parts = ((f.left, pol), (f.right, pol))
    else:
        return (), (), (), ()
    got = [_targets(g, q) for g, q in parts]
    if None in got:
        return None
    return tuple(sum((x[i] for x in got), ()) for i in range(4))


def _lone_island(m: MetaFormula) -> bool:
    # the other items could never be used up
    isl = [it for it in m.items if isinstance(it, Bracketed)]
    return len(isl) == 1 and all(isinstance(it, (Bracketed, Bang, Unit)) for it in m.items)


def _summary(m: MetaFormula):
    """Bracket data of a meta-formula, cached on it, or None when charges are undefined.

    (charge, atoms, box, dia, bang targets, !-touched atoms, records), one
    record (charge, atoms, box inside, dia inside, lone, parent lone, direct)
    per bracket pair in the tree; ``direct`` marks the children of ``m``.
    """
    got = m.__dict__.get("_brk", False)
    if got is not False:
        return got
    total, atoms = 0, ()
    box: list = []
    dia: list = []
    bang: list = []
    touched: set = set()
    records: list = []
    lone = _lone_island(m)
    ok = True
    for f in m.stoup:
        t = _targets(Bang(f), -1)
        if t is None:
            ok = False
            break
        bang.extend(t[2] + t[3])
        touched.update(_atoms(f))
    for it in m.items if ok else ():
        if isinstance(it, Bracketed):
            sub = _summary(it.meta)
            if sub is None:
                ok = False
                break
            ch_in, at_in, b_in, d_in, bg, tc, recs = sub
            records.extend(r[:6] + (False,) for r in recs)
            records.append((ch_in + 1, at_in, b_in, d_in, _lone_island(it.meta), lone, True))
            total += ch_in + 1
            atoms = None if atoms is None or at_in is None else _merge(atoms, at_in)
            box.extend(b_in)
            dia.extend(d_in)
            bang.extend(bg)
            touched.update(tc)
            continue
        t = _targets(it, -1)
        ch = bracket_charge(it)
        if t is None or ch is None:
            ok = False
            break
        total += ch
        o = _outside(it)
        atoms = None if atoms is None or o is None else _merge(atoms, o)
        touched.update(_bang_atoms(it))
        box.extend(t[0])
        dia.extend(t[1])
        bang.extend(t[2] + t[3])
    got = (total, atoms, tuple(box), tuple(dia), tuple(bang), frozenset(touched), tuple(records)) if ok else None
    object.__setattr__(m, "_brk", got)
    return got


def bracket_feasible(c: Calculus, s: Sequent, budget: float) -> bool:
    """Necessary condition on each bracket pair of ``s``.

    Going up a derivation the charge of a bracket pair (1 plus its content)
    only moves in one direction, by at most the contractions spent, and its
    atoms change only by copies of !-bodies. The pair disappears through []L
    into A or <>R onto A, which fixes both, or else through a 2018-style
    contraction merging it with its only member.
    """
    bp = c.features.bang_profile
    if bp in ("morrill2015", "primed2015"):
        sgn, merges = -1, False
    elif bp in ("morrill2018", "primed2018", None):
        sgn, merges = 1, bp is not None
    else:
        return True
    avail = budget if bp is not None else 0
    got = _summary(s.antecedent)
    if got is None or not got[6]:
        return True
    t = _targets(s.succedent, 1)
    if t is None:
        return True
    _, _, _, dia, bang, touched, records = got
    touched = touched | _bang_atoms(s.succedent)
    all_dia = list(dia) + list(t[1])
    glob = set(bang) | set(t[2]) | set(t[3])

    def strip(v):
        return tuple(x for x in v if x[0] not in touched)

    bad = 0
    for charge, atoms, b_in, d_in, lone, parent_lone, direct in records:
        mine = None if atoms is None else strip(atoms)

        def fits(x):
            ch, v = x
            return 0 <= sgn * (charge - ch) <= avail and (mine is None or v is None or strip(v) == mine)

        if any(fits(x) for x in glob) or any(fits(x) for x in b_in):
            continue
        outside = list(all_dia)
        for x in d_in:
            outside.remove(x)
        if any(fits(x) for x in outside):
            continue
        bad += 1
        if not (merges and (lone or (parent_lone and not direct))) or bad > avail:
            return False
    return True


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 40
    max_contractions: int = 2
    max_sequent_size: int = 80
    time_limit: float | None = None

    def __post_init__(self):
        for name in ("max_depth", "max_contractions", "max_sequent_size"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class SearchStats:
    expanded: int = 0
    iterations: int = 0
    elapsed: float = 0.0


@dataclass
class Derivable:
    derivation: Derivation
    stats: SearchStats = field(default_factory=SearchStats)
    verdict = "Derivable"


@dataclass
class Underivable:
    stats: SearchStats = field(default_factory=SearchStats)
    verdict = "Underivable"


@dataclass
class Unknown:
    caps: tuple[str, ...]
    stats: SearchStats = field(default_factory=SearchStats)
    verdict = "Unknown"


SearchVerdict = Derivable | Underivable | Unknown


class _Timeout(Exception):
    pass


class _Engine:
    def __init__(self, c: Calculus, budget: SearchBudget, prune: bool):
        self.c = c
        self.b = budget
        self.prune = prune
        self.proved: dict[Sequent, Derivation] = {}
        self.refuted: set[Sequent] = set()
        self.steps_cache: dict[Sequent, list[tuple[RuleApp, list[Sequent], int]]] = {}
        self.caps: set[str] = set()
        self.filters = c.features.b_rules is None
        self.demand: dict[Sequent, int | None] = {}
        self.stats = SearchStats()
        self.deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit

    def steps(self, s: Sequent):
        got = self.steps_cache.get(s)
        if got is None:
            seen = set()
            got = []
            for app, prem in enumerate_backward(self.c, s):
                key = (app.rule in CONTRACTION_RULES, tuple(prem))
                if key in seen:
                    continue
                seen.add(key)
                got.append((app, prem, max((sequent_size(p) for p in prem), default=0)))
            got.sort(key=lambda ap: (_PRIORITY[ap[0].rule], len(ap[1])))
            self.steps_cache[s] = got
        return got

    def _dead(self, s: Sequent) -> bool:
        """Cheap budget-independent refutation, checked on all premises before any is searched."""
        if s in self.demand:
            return s in self.refuted
        k = contraction_demand(self.c, s)
        self.demand[s] = k
        # with a known demand exactly k contractions are spent
        dead = k is not None and (k < 0 or (k > 0 and self.c.features.bang_profile is None))
        if not dead and self.filters:
            dead = not count_feasible(s) or not bracket_feasible(self.c, s, float("inf") if k is None else k)
        if dead:
            self.refuted.add(s)
        return dead

    def prove(self, s: Sequent, depth: int, contr: int, path: frozenset) -> tuple[Derivation | None, bool]:
        """(derivation or None, failure is absolute)."""
        d = self.proved.get(s)
        if d is not None:
            return d, True
        if self._dead(s):
            return None, True
        if depth <= 0:
            self.caps.add("max_depth")
            return None, False
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout
        k = self.demand[s]
        if k is not None and k > contr:
            self.caps.add("max_contractions")
            return None, False
        if k is None and self.filters and not bracket_feasible(self.c, s, contr):
            self.caps.add("max_contractions")
            return None, False
        self.stats.expanded += 1
        absolute = True
        below = path | {s}
        size_cap = self.b.max_sequent_size
        for app, prem, size in self.steps(s):
            is_contr = app.rule in CONTRACTION_RULES
            if is_contr and contr <= 0:
                # with a known demand the premise would need -1 contractions
                if k is None:
                    self.caps.add("max_contractions")
                    absolute = False
                continue
            if size > size_cap:
                self.caps.add("max_sequent_size")
                absolute = False
                continue
            if self.prune and any(p in below for p in prem):
                absolute = False
                continue
            if any(self._dead(p) for p in prem):
                continue
            kids = []
            for p in prem:
                sub, abs_fail = self.prove(p, depth - 1, contr - is_contr, below)
                if sub is None:
                    absolute = absolute and abs_fail
                    break
                kids.append(sub)
            else:
                d = Derivation(s, app, tuple(kids))
                self.proved[s] = d
                return d, True
        if absolute:
            self.refuted.add(s)
        return None, absolute


@contextlib.contextmanager
def paused_gc():
    """Search allocates many small acyclic objects; the cyclic collector only slows it down."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


class Searcher:
    """Runs several searches in one calculus, sharing proved and absolutely refuted sequents."""

    def __init__(self, c: Calculus | str, budget: SearchBudget | None = None, prune_ancestors: bool = True):
        if isinstance(c, str):
            c = get_calculus(c)
        if c.features.cut_enabled:
            raise ValueError("search is cut-free; use the calculus without +cut")
        self.budget = budget or SearchBudget()
        self.engine = _Engine(c, self.budget, prune_ancestors)

    def run(self, goal: Sequent | str) -> SearchVerdict:
        if isinstance(goal, str):
            goal = parse_sequent(goal)
        with paused_gc():
            return self._run(goal)

    def _run(self, goal: Sequent) -> SearchVerdict:
        eng, budget = self.engine, self.budget
        eng.stats = SearchStats()
        eng.deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
        t0 = time.monotonic()
        depth = 1
        try:
            while True:
                eng.caps.clear()
                eng.stats.iterations += 1
                d, _ = eng.prove(goal, depth, budget.max_contractions, frozenset())
                if d is not None:
                    eng.stats.elapsed = time.monotonic() - t0
                    return Derivable(d, eng.stats)
                if not eng.caps:
                    eng.stats.elapsed = time.monotonic() - t0
                    return Underivable(eng.stats)
                if "max_depth" not in eng.caps or depth >= budget.max_depth:
                    break
                depth = min(budget.max_depth, depth + 1 + depth // 4)
        except _Timeout:
            eng.caps.add("time_limit")
        eng.stats.elapsed = time.monotonic() - t0
        return Unknown(tuple(sorted(eng.caps)), eng.stats)


def search(c: Calculus | str, goal: Sequent | str, budget: SearchBudget | None = None,
           prune_ancestors: bool = True) -> SearchVerdict:
    """Cut-free backward search for ``goal`` in ``c``."""
    return Searcher(c, budget, prune_ancestors).run(goal)


def is_derivable(c, goal, budget: SearchBudget | None = None) -> bool | None:
    """True, False, or None when the budget ran out."""
    v = search(c, goal, budget)
    if isinstance(v, Derivable):
        return True
    if isinstance(v, Underivable):
        return False
    return None
