"""Calculus variants as feature vectors, and their rule schemas.

Every rule is implemented once, in the backward direction: given a
conclusion and a :class:`RuleApp` (rule name plus instantiation
parameters) it returns the premises. Checking is a call to
:func:`premises_of`; backward enumeration generates candidate parameter
sets and keeps those that :func:`premises_of` accepts, so the two agree by
construction.

Parameters of a RuleApp:

``path``
    zone path (bracket indices from the root) of the active zone.
``index``
    item index of the principal formula (or of the !-formula for !P1/!P2,
    !NC, no-stoup !C).
``split``
    an item position: start of the left-premise block for ``\\L``, end of it
    for ``/L``, the cut point for ``*R``, the landing position for ``!P``,
    the other end of the permuted block for ``!P1``/``!P2``/``!NC``.
``span``
    ``(start, length)`` item block: the cut material, or the contracted
    block of the 2015-family ``!C``.
``stoup``
    stoup indices of the active zone going to the left premise (``\\L``,
    ``/L``, ``*R``, cut) or contracted (2015-family ``!C``).
``stoup2``
    stoup indices moved into the new island by the primed 2015 ``!C'``.
``stoup_index``
    the stoup member moved by ``!P`` or contracted by 2018-family ``!C``.
``target``
    item index of the double-bracketed island for 2018-family ``!C``; for
    the no-stoup 2015 ``!C`` it is the length of the !-block at ``index``.
``cut_formula``
    the cut formula.
``brule`` / ``splits``
    which attached B-rule, and block ends for a B'-rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterator, Sequence

from .syntax import (
    BINARY,
    Bang,
    BoxInv,
    Bracketed,
    Conj,
    Diamond,
    Disj,
    EMPTY_STOUP,
    Formula,
    LeftDiv,
    MetaFormula,
    PathError,
    Product,
    RightDiv,
    Sequent,
    Stoup,
    Unit,
    Var,
    bracket_count,
    has_stoups,
    lambek_restriction_holds,
    parse_formula,
    render_formula,
    replace_zone,
    zone_at,
    zones,
)


class RuleError(ValueError):
    """Base class for rule-application failures."""


class RuleNotInCalculus(RuleError):
    pass


class ParameterMismatch(RuleError):
    pass


class SideConditionViolation(RuleError):
    pass


# ---------------------------------------------------------------------------
# Rule names

RULE_NAMES = (
    "id", "\\L", "\\R", "/L", "/R", "*L", "*R", "1L", "1R",
    "&L1", "&L2", "&R", "|L", "|R1", "|R2",
    "<>L", "<>R", "[]L", "[]R",
    "!L", "!R", "!R'", "!P", "!P1", "!P2", "!C", "!C'", "!NC1", "!NC2", "!W",
    "cut", "B", "B'", "hyp",
)

_ALIASES = {
    "·L": "*L", "·R": "*R", "∧L1": "&L1", "∧L2": "&L2", "∧R": "&R",
    "∨L": "|L", "∨R1": "|R1", "∨R2": "|R2", "⟨⟩L": "<>L", "⟨⟩R": "<>R",
    "[]⁻¹L": "[]L", "[]⁻¹R": "[]R", "[]^-1L": "[]L", "[]^-1R": "[]R",
    "!R′": "!R'", "!C′": "!C'", "B′": "B'", "1l": "1L", "1r": "1R",
    "!P_1": "!P1", "!P_2": "!P2", "!NC_1": "!NC1", "!NC_2": "!NC2",
}


def normalize_rule(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in RULE_NAMES:
        raise ValueError(f"unknown rule {name!r}")
    return name


@dataclass(frozen=True)
class RuleApp:
    rule: str
    path: tuple[int, ...] = ()
    index: int | None = None
    split: int | None = None
    span: tuple[int, int] | None = None
    stoup: tuple[int, ...] | None = None
    stoup2: tuple[int, ...] | None = None
    stoup_index: int | None = None
    target: int | None = None
    cut_formula: Formula | None = None
    brule: int | None = None
    splits: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "rule", normalize_rule(self.rule))
        object.__setattr__(self, "path", tuple(self.path))
        for name in ("span", "stoup", "stoup2", "splits"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))
        if isinstance(self.cut_formula, str):
            object.__setattr__(self, "cut_formula", parse_formula(self.cut_formula))

    def to_json(self) -> dict:
        out: dict = {}
        for name in ("path", "index", "split", "span", "stoup", "stoup2",
                     "stoup_index", "target", "brule", "splits"):
            v = getattr(self, name)
            if name == "path" and not v:
                continue
            if v is not None:
                out[name] = list(v) if isinstance(v, tuple) else v
        if self.cut_formula is not None:
            out["cut_formula"] = render_formula(self.cut_formula)
        return out

    @classmethod
    def from_json(cls, rule: str, params: dict | None) -> "RuleApp":
        params = dict(params or {})
        if "cut_formula" in params and isinstance(params["cut_formula"], str):
            params["cut_formula"] = parse_formula(params["cut_formula"])
        if "side" in params:
            side = params.pop("side")
            rule = normalize_rule(rule)
            if rule in ("&L", "|R") or rule + str(side) in RULE_NAMES:
                rule = rule.rstrip("12") + str(side)
        if "stoup_indices" in params:
            params["stoup"] = params.pop("stoup_indices")
        return cls(rule, **params)


# ---------------------------------------------------------------------------
# Calculi

BANG_PROFILES = ("full", "relevant", "morrill2015", "morrill2018", "primed2015", "primed2018")


@dataclass(frozen=True)
class BRule:
    """``p1..pk, D => t`` from ``D, q1..qm => r`` (all variables)."""

    qs: tuple[str, ...]
    r: str
    ps: tuple[str, ...]
    t: str

    def __post_init__(self):
        object.__setattr__(self, "qs", tuple(self.qs))
        object.__setattr__(self, "ps", tuple(self.ps))


@dataclass(frozen=True)
class Features:
    has_stoups: bool = False
    has_brackets: bool = False
    has_additives: bool = True
    has_unit: bool = True
    lambek_restricted: bool = False
    bang_profile: str | None = None
    cut_enabled: bool = False
    b_rules: tuple[BRule, ...] | None = None
    b_primed: bool = False
    one_division: bool = False

    def __post_init__(self):
        if self.lambek_restricted and self.has_unit:
            raise ValueError("a Lambek-restricted calculus has no unit")
        if self.has_stoups and not self.has_brackets:
            raise ValueError("stoups require brackets")
        if self.bang_profile is not None and self.bang_profile not in BANG_PROFILES:
            raise ValueError(f"unknown bang profile {self.bang_profile!r}")


@dataclass(frozen=True)
class Calculus:
    name: str
    features: Features
    _rules: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_rules", frozenset(_compute_rules(self.features)))

    @property
    def rules(self) -> frozenset:
        return self._rules

    def with_cut(self, enabled: bool = True) -> "Calculus":
        if enabled == self.features.cut_enabled:
            return self
        base = self.name.replace("+cut", "")
        return Calculus(base + ("+cut" if enabled else ""), replace(self.features, cut_enabled=enabled))

    def without_additives(self) -> "Calculus":
        return Calculus(self.name + "+additives=off", replace(self.features, has_additives=False))

    def __str__(self) -> str:
        return self.name


def _compute_rules(f: Features) -> set[str]:
    if f.one_division:
        rules = {"id", "/L", "/R"}
    else:
        rules = {"id", "\\L", "\\R", "/L", "/R", "*L", "*R"}
        if f.has_unit:
            rules |= {"1L", "1R"}
        if f.has_additives:
            rules |= {"&L1", "&L2", "&R", "|L", "|R1", "|R2"}
        if f.has_brackets:
            rules |= {"<>L", "<>R", "[]L", "[]R"}
    bp = f.bang_profile
    if bp in ("full", "relevant"):
        rules |= {"!L", "!R", "!P1", "!P2", "!C", "!NC1", "!NC2"}
        if bp == "full":
            rules.add("!W")
    elif bp is not None:
        if f.has_stoups:
            rules |= {"!L", "!P"}
            rules |= {"!R'", "!C'"} if bp.startswith("primed") else {"!R", "!C"}
        else:
            rules |= {"!L", "!P1", "!P2", "!R", "!C"}
    if f.cut_enabled:
        rules.add("cut")
    if f.b_rules:
        rules.add("B'" if f.b_primed else "B")
    return rules


def rules_of(c: Calculus) -> frozenset:
    return c.rules


_BASE = {
    "malc*": Features(),
    "!malc*": Features(bang_profile="full"),
    "!r-malc*": Features(bang_profile="relevant"),
    "l*(/)": Features(has_additives=False, has_unit=False, one_division=True),
    "b2015st": Features(has_stoups=True, has_brackets=True, bang_profile="morrill2015"),
    "b2018st": Features(has_stoups=True, has_brackets=True, bang_profile="morrill2018"),
    "b2015st-prime": Features(has_stoups=True, has_brackets=True, bang_profile="primed2015"),
    "b2018st-prime": Features(has_stoups=True, has_brackets=True, bang_profile="primed2018"),
    "b2018st-prime-lr": Features(has_stoups=True, has_brackets=True, bang_profile="primed2018",
                                 has_unit=False, lambek_restricted=True),
    "b2015": Features(has_brackets=True, bang_profile="morrill2015"),
    "b2018": Features(has_brackets=True, bang_profile="morrill2018"),
    "b2018-lr": Features(has_brackets=True, bang_profile="morrill2018", has_unit=False,
                         lambek_restricted=True),
}

CALCULUS_NAMES = tuple(_BASE)

# the matching no-stoup / stoup partners used by the translations
STOUP_FREE_PARTNER = {
    "b2015st": "b2015", "b2018st": "b2018", "b2015st-prime": "b2015",
    "b2018st-prime": "b2018", "b2018st-prime-lr": "b2018-lr",
}
PRIMED_PARTNER = {"b2015": "b2015st-prime", "b2018": "b2018st-prime", "b2018-lr": "b2018st-prime-lr"}


def get_calculus(name: str) -> Calculus:
    """Resolve a CLI calculus name, with ``+cut``, ``+additives=off`` and
    ``+brules=<file>[:prime]`` suffixes."""
    parts = name.strip().split("+")
    base = parts[0].strip().lower()
    if base not in _BASE:
        raise ValueError(f"unknown calculus {parts[0]!r}; known: {', '.join(CALCULUS_NAMES)}")
    feats = _BASE[base]
    for suffix in parts[1:]:
        s = suffix.strip()
        if s == "cut":
            feats = replace(feats, cut_enabled=True)
        elif s in ("additives=off", "additives=false"):
            feats = replace(feats, has_additives=False)
        elif s.startswith("brules="):
            spec = s[len("brules="):]
            primed = spec.endswith(":prime")
            if primed:
                spec = spec[: -len(":prime")]
            from .encodings import load_brules

            rules = load_brules(spec)
            return extend_with_b_rules(Calculus(parts[0], feats), rules, primed)
        else:
            raise ValueError(f"unknown calculus suffix {suffix!r}")
    return Calculus(name.strip(), feats)


def extend_with_b_rules(base: Calculus, rules: Sequence[BRule], primed: bool = False) -> Calculus:
    if not base.features.one_division:
        raise ValueError("B-rules attach only to the one-division calculus l*(/)")
    feats = replace(base.features, b_rules=tuple(rules), b_primed=primed)
    tag = "+brules" + (":prime" if primed else "")
    return Calculus(base.name + tag, feats)


# ---------------------------------------------------------------------------
# Helpers


def _req(cond: bool, msg: str):
    if not cond:
        raise ParameterMismatch(msg)


def _side(cond: bool, msg: str):
    if not cond:
        raise SideConditionViolation(msg)


def _zone(concl: Sequent, app: RuleApp) -> MetaFormula:
    try:
        return zone_at(concl, app.path)
    except PathError as e:
        raise ParameterMismatch(str(e)) from None


def _formula_at(z: MetaFormula, i: int | None, kind=None) -> Formula:
    _req(i is not None, "missing index")
    _req(0 <= i < len(z.items), f"index {i} out of range")
    f = z.items[i]
    _req(isinstance(f, Formula), f"item {i} is a bracket, not a formula")
    if kind is not None:
        _req(isinstance(f, kind), f"item {i} is not a {kind.__name__}")
    return f


def _stoup_sel(z: MetaFormula, sel: tuple[int, ...] | None) -> tuple[int, ...]:
    sel = tuple(sel or ())
    _req(len(set(sel)) == len(sel), "repeated stoup index")
    _req(all(0 <= j < len(z.stoup) for j in sel), "stoup index out of range")
    return sel


def _put(concl: Sequent, app: RuleApp, z: MetaFormula, succ: Formula | None = None) -> Sequent:
    s = replace_zone(concl, app.path, z)
    return s if succ is None else Sequent(s.antecedent, succ)


def _top(app: RuleApp):
    _req(not app.path, "rule acts on the whole antecedent")


def _is_double_island(it) -> bool:
    return (
        isinstance(it, Bracketed)
        and not it.meta.stoup
        and len(it.meta.items) == 1
        and isinstance(it.meta.items[0], Bracketed)
    )


# ---------------------------------------------------------------------------
# Rule implementations (conclusion -> premises)


def _r_id(c, s, a):
    _top(a)
    ant = s.antecedent
    _req(not ant.stoup and len(ant.items) == 1 and ant.items[0] == s.succedent, "not an axiom A => A")
    return []


def _r_1R(c, s, a):
    _top(a)
    _req(s.antecedent.is_empty() and isinstance(s.succedent, Unit), "not the axiom => 1")
    return []


def _r_leftdiv_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, LeftDiv)
    st = a.split
    _req(st is not None and 0 <= st <= a.index, "split must precede the principal formula")
    sel = _stoup_sel(z, a.stoup)
    left = Sequent(MetaFormula(z.stoup.pick(sel), z.items[st:a.index]), f.left)
    rest = MetaFormula(z.stoup.without(sel), z.items[:st] + (f.right,) + z.items[a.index + 1:])
    return [left, _put(s, a, rest)]


def _r_rightdiv_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, RightDiv)
    e = a.split
    _req(e is not None and a.index + 1 <= e <= len(z.items), "split must follow the principal formula")
    sel = _stoup_sel(z, a.stoup)
    left = Sequent(MetaFormula(z.stoup.pick(sel), z.items[a.index + 1:e]), f.right)
    rest = MetaFormula(z.stoup.without(sel), z.items[:a.index] + (f.left,) + z.items[e:])
    return [left, _put(s, a, rest)]


def _restricted_right(c, s):
    if c.features.lambek_restricted:
        _side(not s.antecedent.is_empty(), "Lambek restriction: empty antecedent for a right division rule")


def _r_leftdiv_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, LeftDiv), "succedent is not A\\B")
    _restricted_right(c, s)
    ant = s.antecedent
    return [Sequent(MetaFormula(ant.stoup, (s.succedent.left,) + ant.items), s.succedent.right)]


def _r_rightdiv_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, RightDiv), "succedent is not B/A")
    _restricted_right(c, s)
    ant = s.antecedent
    return [Sequent(MetaFormula(ant.stoup, ant.items + (s.succedent.right,)), s.succedent.left)]


def _r_prod_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, Product)
    return [_put(s, a, z.with_items(z.items[:a.index] + (f.left, f.right) + z.items[a.index + 1:]))]


def _r_prod_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, Product), "succedent is not a product")
    ant = s.antecedent
    k = a.split
    _req(k is not None and 0 <= k <= len(ant.items), "bad split")
    sel = _stoup_sel(ant, a.stoup)
    return [
        Sequent(MetaFormula(ant.stoup.pick(sel), ant.items[:k]), s.succedent.left),
        Sequent(MetaFormula(ant.stoup.without(sel), ant.items[k:]), s.succedent.right),
    ]


def _r_1L(c, s, a):
    z = _zone(s, a)
    _formula_at(z, a.index, Unit)
    return [_put(s, a, z.with_items(z.items[:a.index] + z.items[a.index + 1:]))]


def _r_conj_L(side):
    def rule(c, s, a):
        z = _zone(s, a)
        f = _formula_at(z, a.index, Conj)
        part = f.left if side == 1 else f.right
        return [_put(s, a, z.with_items(z.items[:a.index] + (part,) + z.items[a.index + 1:]))]
    return rule


def _r_conj_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, Conj), "succedent is not a conjunction")
    return [Sequent(s.antecedent, s.succedent.left), Sequent(s.antecedent, s.succedent.right)]


def _r_disj_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, Disj)
    return [
        _put(s, a, z.with_items(z.items[:a.index] + (f.left,) + z.items[a.index + 1:])),
        _put(s, a, z.with_items(z.items[:a.index] + (f.right,) + z.items[a.index + 1:])),
    ]


def _r_disj_R(side):
    def rule(c, s, a):
        _top(a)
        _req(isinstance(s.succedent, Disj), "succedent is not a disjunction")
        return [Sequent(s.antecedent, s.succedent.left if side == 1 else s.succedent.right)]
    return rule


def _r_dia_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, Diamond)
    new = Bracketed(MetaFormula(EMPTY_STOUP, (f.body,)))
    return [_put(s, a, z.with_items(z.items[:a.index] + (new,) + z.items[a.index + 1:]))]


def _r_dia_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, Diamond), "succedent is not <>A")
    ant = s.antecedent
    _req(not ant.stoup and len(ant.items) == 1 and isinstance(ant.items[0], Bracketed),
         "antecedent must be a single bracket with empty outer stoup")
    return [Sequent(ant.items[0].meta, s.succedent.body)]


def _r_box_L(c, s, a):
    z = _zone(s, a)
    i = a.index
    _req(i is not None and 0 <= i < len(z.items), "index out of range")
    it = z.items[i]
    _req(isinstance(it, Bracketed), "item is not a bracket")
    inner = it.meta
    _req(not inner.stoup and len(inner.items) == 1 and isinstance(inner.items[0], BoxInv),
         "bracket must hold exactly one []A and an empty stoup")
    return [_put(s, a, z.with_items(z.items[:i] + (inner.items[0].body,) + z.items[i + 1:]))]


def _r_box_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, BoxInv), "succedent is not []A")
    return [Sequent(MetaFormula(EMPTY_STOUP, (Bracketed(s.antecedent),)), s.succedent.body)]


def _r_bang_L(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, Bang)
    if c.features.has_stoups:
        rest = MetaFormula(z.stoup.union((f.body,)), z.items[:a.index] + z.items[a.index + 1:])
    else:
        rest = z.with_items(z.items[:a.index] + (f.body,) + z.items[a.index + 1:])
    return [_put(s, a, rest)]


def _r_bang_P(c, s, a):
    z = _zone(s, a)
    j = a.stoup_index
    _req(j is not None and 0 <= j < len(z.stoup), "bad stoup index")
    k = a.split
    _req(k is not None and 0 <= k <= len(z.items), "bad landing position")
    f = z.stoup[j]
    return [_put(s, a, MetaFormula(z.stoup.without((j,)), z.items[:k] + (f,) + z.items[k:]))]


def _r_bang_P1(c, s, a):
    # D1, Phi, !A, D2  from  D1, !A, Phi, D2
    z = _zone(s, a)
    i = a.index
    f = _formula_at(z, i, Bang)
    st = a.split
    _req(st is not None and 0 <= st < i, "Phi must be a non-empty block before !A")
    items = z.items
    return [_put(s, a, z.with_items(items[:st] + (f,) + items[st:i] + items[i + 1:]))]


def _r_bang_P2(c, s, a):
    # D1, !A, Phi, D2  from  D1, Phi, !A, D2
    z = _zone(s, a)
    i = a.index
    f = _formula_at(z, i, Bang)
    e = a.split
    _req(e is not None and i + 1 < e <= len(z.items), "Phi must be a non-empty block after !A")
    items = z.items
    return [_put(s, a, z.with_items(items[:i] + items[i + 1:e] + (f,) + items[e:]))]


def _r_bang_C_local(c, s, a):
    z = _zone(s, a)
    f = _formula_at(z, a.index, Bang)
    return [_put(s, a, z.with_items(z.items[:a.index] + (f, f) + z.items[a.index + 1:]))]


def _r_bang_NC1(c, s, a):
    # D1, Phi, !A, D2  from  D1, !A, Phi, !A, D2
    z = _zone(s, a)
    i = a.index
    f = _formula_at(z, i, Bang)
    st = a.split
    _req(st is not None and 0 <= st <= i, "bad split")
    items = z.items
    return [_put(s, a, z.with_items(items[:st] + (f,) + items[st:i + 1] + items[i + 1:]))]


def _r_bang_NC2(c, s, a):
    # D1, !A, Phi, D2  from  D1, !A, Phi, !A, D2
    z = _zone(s, a)
    i = a.index
    f = _formula_at(z, i, Bang)
    e = a.split
    _req(e is not None and i + 1 <= e <= len(z.items), "bad split")
    items = z.items
    return [_put(s, a, z.with_items(items[:e] + (f,) + items[e:]))]


def _r_bang_W(c, s, a):
    z = _zone(s, a)
    _formula_at(z, a.index, Bang)
    return [_put(s, a, z.with_items(z.items[:a.index] + z.items[a.index + 1:]))]


def _r_bang_R(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, Bang), "succedent is not !B")
    ant = s.antecedent
    bp = c.features.bang_profile
    if bp in ("full", "relevant"):
        _req(not ant.stoup and all(isinstance(x, Bang) for x in ant.items),
             "antecedent must consist of !-formulae")
    elif c.features.has_stoups and bp == "morrill2015":
        _req(not ant.items, "antecedent must be a bare stoup")
    elif c.features.has_stoups and bp == "morrill2018":
        _req(not ant.stoup and len(ant.items) == 1 and isinstance(ant.items[0], Bang),
             "antecedent must be a single !-formula")
    elif bp == "morrill2015":
        _req(not ant.stoup and ant.items and all(isinstance(x, Bang) for x in ant.items),
             "antecedent must be n >= 1 !-formulae")
    elif bp == "morrill2018":
        _req(not ant.stoup and len(ant.items) == 1 and isinstance(ant.items[0], Bang),
             "antecedent must be a single !-formula")
    else:
        raise ParameterMismatch("no !R in this calculus")
    return [Sequent(ant, s.succedent.body)]


def _r_bang_Rp(c, s, a):
    _top(a)
    _req(isinstance(s.succedent, Bang), "succedent is not !B")
    ant = s.antecedent
    _req(not ant.items, "antecedent must be a bare stoup")
    if c.features.bang_profile == "primed2018":
        _side(len(ant.stoup) == 1, "stoup must hold exactly one formula")
    else:
        _side(len(ant.stoup) >= 1, "stoup must be non-empty")
    return [Sequent(ant, s.succedent.body)]


def _r_bang_C(c, s, a):
    z = _zone(s, a)
    bp = c.features.bang_profile
    if c.features.has_stoups:
        if bp in ("morrill2018", "primed2018"):
            j = a.stoup_index
            _req(j is not None and 0 <= j < len(z.stoup), "bad stoup index")
            t = a.target
            _req(t is not None and 0 <= t < len(z.items), "bad island index")
            isl = z.items[t]
            _req(_is_double_island(isl), "target must be a double-bracketed island [[...]]")
            inner = isl.meta.items[0].meta
            if bp == "morrill2018":
                _req(not inner.stoup, "inner island must have an empty stoup")
            elif c.features.lambek_restricted:
                _side(bool(inner.items) or bool(inner.stoup),
                      "Lambek restriction: contracted island must be non-empty")
            new = Bracketed(MetaFormula(inner.stoup.union((z.stoup[j],)), inner.items))
            return [_put(s, a, z.with_items(z.items[:t] + (new,) + z.items[t + 1:]))]
        # 2015 family
        sel = _stoup_sel(z, a.stoup)
        _side(len(sel) >= 1, "contracted stoup part must be non-empty")
        _req(a.span is not None, "missing span")
        st, ln = a.span
        _req(0 <= st and 0 <= ln and st + ln <= len(z.items), "span out of range")
        moved = _stoup_sel(z, a.stoup2) if bp == "primed2015" else ()
        _req(not set(moved) & set(sel), "moved and contracted stoup parts overlap")
        if bp != "primed2015":
            _req(not a.stoup2, "stoup2 is only used by the primed rule")
        isl = Bracketed(MetaFormula(z.stoup.pick(moved).union(z.stoup.pick(sel)), z.items[st:st + ln]))
        outer = z.stoup.without(moved)
        return [_put(s, a, MetaFormula(outer, z.items[:st] + (isl,) + z.items[st + ln:]))]
    if bp in ("full", "relevant"):
        return _r_bang_C_local(c, s, a)
    if bp == "morrill2018":
        i = a.index
        f = _formula_at(z, i, Bang)
        t = a.target
        _req(t is not None and i < t < len(z.items), "island must follow the !-formula")
        isl = z.items[t]
        _req(_is_double_island(isl) and not isl.meta.items[0].meta.stoup, "target must be [[...]]")
        inner = isl.meta.items[0].meta
        if c.features.lambek_restricted:
            _side(bool(inner.items), "Lambek restriction: contracted island must be non-empty")
        new = Bracketed(MetaFormula(EMPTY_STOUP, (f,) + inner.items))
        return [_put(s, a, z.with_items(z.items[:t] + (new,) + z.items[t + 1:]))]
    if bp == "morrill2015":
        i = a.index
        _req(a.target is not None and a.target >= 1, "missing block length (target)")
        n = a.target
        _req(i is not None and 0 <= i and i + n <= len(z.items), "bad !-block")
        bangs = z.items[i:i + n]
        _req(all(isinstance(x, Bang) for x in bangs), "block must consist of !-formulae")
        _req(a.span is not None, "missing span")
        st, ln = a.span
        _req(st >= i + n and ln >= 0 and st + ln <= len(z.items), "span must follow the !-block")
        isl = Bracketed(MetaFormula(EMPTY_STOUP, tuple(bangs) + z.items[st:st + ln]))
        return [_put(s, a, z.with_items(z.items[:st] + (isl,) + z.items[st + ln:]))]
    raise ParameterMismatch("no contraction in this calculus")


def _r_cut(c, s, a):
    z = _zone(s, a)
    _req(a.cut_formula is not None, "missing cut formula")
    _req(a.span is not None, "missing span")
    st, ln = a.span
    _req(0 <= st and 0 <= ln and st + ln <= len(z.items), "span out of range")
    sel = _stoup_sel(z, a.stoup)
    left = Sequent(MetaFormula(z.stoup.pick(sel), z.items[st:st + ln]), a.cut_formula)
    rest = MetaFormula(z.stoup.without(sel), z.items[:st] + (a.cut_formula,) + z.items[st + ln:])
    return [left, _put(s, a, rest)]


def _brule(c, a) -> BRule:
    rules = c.features.b_rules or ()
    _req(a.brule is not None and 0 <= a.brule < len(rules), "bad B-rule index")
    return rules[a.brule]


def _r_B(c, s, a):
    _top(a)
    r = _brule(c, a)
    ant = s.antecedent
    k = len(r.ps)
    _req(not ant.stoup and s.succedent == Var(r.t), "succedent does not match the rule")
    _req(tuple(ant.items[:k]) == tuple(Var(p) for p in r.ps), "antecedent prefix does not match")
    delta = ant.items[k:]
    return [Sequent(MetaFormula(EMPTY_STOUP, delta + tuple(Var(q) for q in r.qs)), Var(r.r))]


def _r_Bp(c, s, a):
    _top(a)
    r = _brule(c, a)
    ant = s.antecedent
    _req(not ant.stoup and s.succedent == Var(r.t), "succedent does not match the rule")
    cuts = tuple(a.splits or ())
    _req(len(cuts) == len(r.ps), "need one block end per p_i")
    prev = 0
    out = []
    for p, e in zip(r.ps, cuts):
        _req(prev <= e <= len(ant.items), "block ends must be non-decreasing")
        out.append(Sequent(MetaFormula(EMPTY_STOUP, ant.items[prev:e]), Var(p)))
        prev = e
    out.append(Sequent(MetaFormula(EMPTY_STOUP, ant.items[prev:] + tuple(Var(q) for q in r.qs)), Var(r.r)))
    return out


_IMPL = {
    "id": _r_id, "1R": _r_1R,
    "\\L": _r_leftdiv_L, "/L": _r_rightdiv_L, "\\R": _r_leftdiv_R, "/R": _r_rightdiv_R,
    "*L": _r_prod_L, "*R": _r_prod_R, "1L": _r_1L,
    "&L1": _r_conj_L(1), "&L2": _r_conj_L(2), "&R": _r_conj_R,
    "|L": _r_disj_L, "|R1": _r_disj_R(1), "|R2": _r_disj_R(2),
    "<>L": _r_dia_L, "<>R": _r_dia_R, "[]L": _r_box_L, "[]R": _r_box_R,
    "!L": _r_bang_L, "!P": _r_bang_P, "!P1": _r_bang_P1, "!P2": _r_bang_P2,
    "!C": _r_bang_C, "!C'": _r_bang_C, "!NC1": _r_bang_NC1, "!NC2": _r_bang_NC2,
    "!W": _r_bang_W, "!R": _r_bang_R, "!R'": _r_bang_Rp,
    "cut": _r_cut, "B": _r_B, "B'": _r_Bp,
}


def _shape_ok(c: Calculus, s: Sequent):
    f = c.features
    if not f.has_stoups and has_stoups(s.antecedent):
        raise ParameterMismatch("stoups are not part of this calculus")
    if not f.has_brackets and bracket_count(s.antecedent):
        raise ParameterMismatch("brackets are not part of this calculus")


def premises_of(c: Calculus, conclusion: Sequent, app: RuleApp) -> list[Sequent]:
    """Premises of ``app`` applied backwards to ``conclusion`` in ``c``.

    Raises RuleNotInCalculus, ParameterMismatch or SideConditionViolation.
    """
    if app.rule not in c.rules:
        raise RuleNotInCalculus(f"rule {app.rule} is not in {c.name}")
    _shape_ok(c, conclusion)
    prem = _IMPL[app.rule](c, conclusion, app)
    if c.features.lambek_restricted:
        for p in prem:
            _side(lambek_restriction_holds(p), f"Lambek restriction violated by premise {p}")
    return prem


# ---------------------------------------------------------------------------
# Backward enumeration


def _subsets(n: int, min_size: int = 0) -> Iterator[tuple[int, ...]]:
    for k in range(min_size, n + 1):
        yield from combinations(range(n), k)


def _stoup_subsets(st: Stoup, min_size: int = 0) -> Iterator[tuple[int, ...]]:
    """Index subsets of a stoup, one representative per sub-multiset."""
    seen = set()
    for sel in _subsets(len(st), min_size):
        key = st.pick(sel)
        if key in seen:
            continue
        seen.add(key)
        yield sel


def candidate_apps(c: Calculus, goal: Sequent) -> Iterator[RuleApp]:
    """Parameter sets worth trying (a superset of the valid ones, no cut)."""
    rules = c.rules
    ant = goal.antecedent
    succ = goal.succedent
    has_st = c.features.has_stoups
    bp = c.features.bang_profile
    if "id" in rules:
        yield RuleApp("id")
    if "1R" in rules and isinstance(succ, Unit):
        yield RuleApp("1R")
    top_sel = list(_stoup_subsets(ant.stoup)) if has_st else [()]
    # right rules
    if isinstance(succ, LeftDiv) and "\\R" in rules:
        yield RuleApp("\\R")
    if isinstance(succ, RightDiv) and "/R" in rules:
        yield RuleApp("/R")
    if isinstance(succ, Product) and "*R" in rules:
        for k in range(len(ant.items) + 1):
            for sel in top_sel:
                yield RuleApp("*R", split=k, stoup=sel)
    if isinstance(succ, Conj) and "&R" in rules:
        yield RuleApp("&R")
    if isinstance(succ, Disj) and "|R1" in rules:
        yield RuleApp("|R1")
        yield RuleApp("|R2")
    if isinstance(succ, Diamond) and "<>R" in rules:
        yield RuleApp("<>R")
    if isinstance(succ, BoxInv) and "[]R" in rules:
        yield RuleApp("[]R")
    if isinstance(succ, Bang):
        if "!R" in rules:
            yield RuleApp("!R")
        if "!R'" in rules:
            yield RuleApp("!R'")
    # B-rules
    for k, r in enumerate(c.features.b_rules or ()):
        if succ != Var(r.t):
            continue
        if "B" in rules:
            yield RuleApp("B", brule=k)
        if "B'" in rules:
            n = len(ant.items)
            for cuts in _monotone(len(r.ps), n):
                yield RuleApp("B'", brule=k, splits=cuts)
    # left rules, zone by zone
    for path, z in zones(ant):
        items = z.items
        n = len(items)
        sels = list(_stoup_subsets(z.stoup)) if has_st else [()]
        for i, it in enumerate(items):
            if isinstance(it, Bracketed):
                if "[]L" in rules:
                    yield RuleApp("[]L", path=path, index=i)
                if "!C" in rules or "!C'" in rules:
                    name = "!C'" if "!C'" in rules else "!C"
                    if has_st and bp in ("morrill2018", "primed2018") and _is_double_island(it):
                        for j in _distinct_stoup_indices(z.stoup):
                            yield RuleApp(name, path=path, stoup_index=j, target=i)
                continue
            if isinstance(it, LeftDiv) and "\\L" in rules:
                for st in range(i + 1):
                    for sel in sels:
                        yield RuleApp("\\L", path=path, index=i, split=st, stoup=sel)
            elif isinstance(it, RightDiv) and "/L" in rules:
                for e in range(i + 1, n + 1):
                    for sel in sels:
                        yield RuleApp("/L", path=path, index=i, split=e, stoup=sel)
            elif isinstance(it, Product) and "*L" in rules:
                yield RuleApp("*L", path=path, index=i)
            elif isinstance(it, Unit) and "1L" in rules:
                yield RuleApp("1L", path=path, index=i)
            elif isinstance(it, Conj) and "&L1" in rules:
                yield RuleApp("&L1", path=path, index=i)
                yield RuleApp("&L2", path=path, index=i)
            elif isinstance(it, Disj) and "|L" in rules:
                yield RuleApp("|L", path=path, index=i)
            elif isinstance(it, Diamond) and "<>L" in rules:
                yield RuleApp("<>L", path=path, index=i)
            elif isinstance(it, Bang):
                if "!L" in rules:
                    yield RuleApp("!L", path=path, index=i)
                if "!W" in rules:
                    yield RuleApp("!W", path=path, index=i)
                if "!P1" in rules:
                    for st in range(i):
                        yield RuleApp("!P1", path=path, index=i, split=st)
                if "!P2" in rules:
                    for e in range(i + 2, n + 1):
                        yield RuleApp("!P2", path=path, index=i, split=e)
                if "!NC1" in rules:
                    for st in range(i + 1):
                        yield RuleApp("!NC1", path=path, index=i, split=st)
                if "!NC2" in rules:
                    for e in range(i + 1, n + 1):
                        yield RuleApp("!NC2", path=path, index=i, split=e)
                if "!C" in rules and not has_st:
                    if bp in ("full", "relevant"):
                        yield RuleApp("!C", path=path, index=i)
                    elif bp == "morrill2018":
                        for t in range(i + 1, n):
                            if _is_double_island(items[t]):
                                yield RuleApp("!C", path=path, index=i, target=t)
                    elif bp == "morrill2015":
                        for m in range(1, n - i + 1):
                            if not isinstance(items[i + m - 1], Bang):
                                break
                            for st in range(i + m, n + 1):
                                for ln in range(0, n - st + 1):
                                    yield RuleApp("!C", path=path, index=i, target=m, span=(st, ln))
        if has_st:
            if "!P" in rules:
                for j in _distinct_stoup_indices(z.stoup):
                    for k in range(n + 1):
                        yield RuleApp("!P", path=path, stoup_index=j, split=k)
            if bp in ("morrill2015", "primed2015") and ("!C" in rules or "!C'" in rules):
                name = "!C'" if bp == "primed2015" else "!C"
                for sel in _stoup_subsets(z.stoup, 1):
                    rest = [j for j in range(len(z.stoup)) if j not in sel]
                    movers = [()]
                    if bp == "primed2015":
                        movers = [tuple(rest[j] for j in m) for m in _subsets(len(rest))]
                        movers = _dedup_selections(z.stoup, movers)
                    for mv in movers:
                        for st in range(n + 1):
                            for ln in range(n - st + 1):
                                yield RuleApp(name, path=path, stoup=sel, stoup2=mv or None, span=(st, ln))


def _dedup_selections(st: Stoup, sels):
    seen = set()
    out = []
    for sel in sels:
        key = st.pick(sel)
        if key not in seen:
            seen.add(key)
            out.append(sel)
    return out


def _distinct_stoup_indices(st: Stoup) -> list[int]:
    seen = set()
    out = []
    for j, f in enumerate(st):
        if f not in seen:
            seen.add(f)
            out.append(j)
    return out


def _monotone(k: int, n: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return

    def rec(prefix, lo, left):
        if left == 0:
            yield tuple(prefix)
            return
        for e in range(lo, n + 1):
            yield from rec(prefix + [e], e, left - 1)

    yield from rec([], 0, k)


def enumerate_backward(c: Calculus, goal: Sequent) -> list[tuple[RuleApp, list[Sequent]]]:
    """All valid cut-free backward steps from ``goal``.

    Stoup occurrences that are multiset-equal are represented once (by the
    lowest index), so each distinct instance is listed once.
    """
    out = []
    try:
        _shape_ok(c, goal)
    except ParameterMismatch:
        return out
    for app in candidate_apps(c, goal):
        try:
            prem = premises_of(c, goal, app)
        except RuleError:
            continue
        out.append((app, prem))
    return out
