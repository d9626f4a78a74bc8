"""Independent reference computations used to cross-check the package."""

from __future__ import annotations

from itertools import combinations, product

from lambekbang.calculi import Calculus, RuleApp, RuleError, premises_of
from lambekbang.syntax import (
    Bang,
    Bracketed,
    Formula,
    MetaFormula,
    Sequent,
    Unit,
    Var,
)


def closure_by_descent(s: Sequent) -> set[Formula]:
    out: set[Formula] = set()

    def add(f):
        if f in out:
            return
        out.add(f)
        for name in getattr(f, "__dataclass_fields__", {}):
            sub = getattr(f, name)
            if isinstance(sub, Formula):
                add(sub)

    def walk(m: MetaFormula):
        for f in m.stoup:
            add(f)
        for it in m.items:
            walk(it.meta) if isinstance(it, Bracketed) else add(it)

    walk(s.antecedent)
    add(s.succedent)
    return out


def restriction_by_hand(s: Sequent) -> bool:
    def zone_ok(m: MetaFormula) -> bool:
        if not m.stoup and not m.items:
            return False
        return all(zone_ok(it.meta) for it in m.items if isinstance(it, Bracketed))

    return zone_ok(s.antecedent) and not any(isinstance(f, Unit) for f in closure_by_descent(s))


def _zone_list(m: MetaFormula, path=()):
    yield path, m
    for i, it in enumerate(m.items):
        if isinstance(it, Bracketed):
            yield from _zone_list(it.meta, path + (i,))


def _all_subsets(n: int):
    for k in range(n + 1):
        yield from combinations(range(n), k)


# parameter fields each rule reads; !C/!C' differ by profile so every shape is tried
_FIELDS = {
    "id": [()], "1R": [()], "\\R": [()], "/R": [()], "&R": [()], "|R1": [()], "|R2": [()],
    "<>R": [()], "[]R": [()], "!R": [()], "!R'": [()],
    "*R": [("split", "stoup")],
    "\\L": [("path", "index", "split", "stoup")], "/L": [("path", "index", "split", "stoup")],
    "*L": [("path", "index")], "1L": [("path", "index")], "&L1": [("path", "index")],
    "&L2": [("path", "index")], "|L": [("path", "index")], "<>L": [("path", "index")],
    "[]L": [("path", "index")], "!L": [("path", "index")], "!W": [("path", "index")],
    "!P1": [("path", "index", "split")], "!P2": [("path", "index", "split")],
    "!NC1": [("path", "index", "split")], "!NC2": [("path", "index", "split")],
    "!P": [("path", "stoup_index", "split")],
    "!C": [("path", "index"), ("path", "index", "target"), ("path", "index", "target", "span"),
           ("path", "stoup_index", "target"), ("path", "stoup", "span")],
    "!C'": [("path", "stoup_index", "target"), ("path", "stoup", "span"), ("path", "stoup", "stoup2", "span")],
}


def brute_force_steps(c: Calculus, goal: Sequent) -> list[tuple[RuleApp, list[Sequent]]]:
    """Every (app, premises) accepted by premises_of over a blind parameter grid."""
    out = []
    for path, z in _zone_list(goal.antecedent):
        n, m = len(z.items), len(z.stoup)
        subsets = list(_all_subsets(m))
        dom = {
            "path": [path],
            "index": list(range(n)),
            "split": list(range(n + 1)),
            "target": list(range(n + 1)),
            "span": [(a, b) for a in range(n + 1) for b in range(n + 1 - a)],
            "stoup": subsets,
            "stoup2": [None] + [s for s in subsets if s],
            "stoup_index": list(range(m)),
        }
        for rule in sorted(c.rules):
            for fields in _FIELDS.get(rule, ()):
                if "path" not in fields and path != ():
                    continue
                grids = [dom[f] for f in fields]
                for values in product(*grids):
                    app = RuleApp(rule, **dict(zip(fields, values)))
                    try:
                        prem = premises_of(c, goal, app)
                    except RuleError:
                        continue
                    out.append((app, prem))
    return out


def is_anbn(word) -> bool:
    n = len(word) // 2
    return n >= 1 and list(word) == ["a"] * n + ["b"] * n


def bang_free(f: Formula) -> bool:
    return not any(isinstance(g, Bang) for g in closure_by_descent(Sequent(MetaFormula(), f)))


def atoms_of(s: Sequent) -> set[str]:
    return {f.name for f in closure_by_descent(s) if isinstance(f, Var)}
