"""Formulae, meta-formulae and sequents, with a text syntax.

Formula trees are immutable dataclasses. An antecedent is a
:class:`MetaFormula`: a stoup (a multiset of formulae, stored in order so
that occurrences can be addressed by index) followed by a sequence of tree
terms. A tree term is either a bare :class:`Formula` (the leaf case) or a
:class:`Bracketed` meta-formula.

Text syntax::

    formula    := atom | "1" | "!" f | "<>" f | "[]" f | "(" f ")" | f bin f
    bin        := "\\" | "/"            (loosest, left-associative)
                | "*" | "&" | "|"       (tighter, left-associative)
    antecedent := [stoup] [item ("," item)*]
    stoup      := "{" [f ("," f)*] "}" ";"
    item       := formula | "[" antecedent "]"
    sequent    := [antecedent] "=>" formula

An empty bracket is written with a space, ``[ ]``, because ``[]`` is the
box-inverse prefix.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Iterator, Sequence, Union


class SyntaxError_(ValueError):
    """Raised on malformed text; ``offset`` is the character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


ParseError = SyntaxError_


class PathError(ValueError):
    """Raised when a zone path does not address an existing zone."""


# ---------------------------------------------------------------------------
# Formulae


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Unit(Formula):
    pass


@dataclass(frozen=True)
class LeftDiv(Formula):
    """``left \\ right``: looks for ``left`` on its left."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class RightDiv(Formula):
    """``left / right``: looks for ``right`` on its right."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class Product(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Conj(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Disj(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Bang(Formula):
    body: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    body: Formula


@dataclass(frozen=True)
class BoxInv(Formula):
    body: Formula


UNIT = Unit()


def _cached_hash(self) -> int:
    try:
        return self._h
    except AttributeError:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        object.__setattr__(self, "_h", h)
        return h


def _rebuild(self):
    # pickle through the constructor so no cached hash crosses processes
    return type(self), tuple(getattr(self, f.name) for f in fields(self) if f.init)


for _cls in (Var, Unit, LeftDiv, RightDiv, Product, Conj, Disj, Bang, Diamond, BoxInv):
    _cls.__hash__ = _cached_hash
    _cls.__reduce__ = _rebuild
BINARY = (LeftDiv, RightDiv, Product, Conj, Disj)
UNARY = (Bang, Diamond, BoxInv)
_BIN_SYMBOL = {LeftDiv: "\\", RightDiv: "/", Product: "*", Conj: "&", Disj: "|"}
_UN_SYMBOL = {Bang: "!", Diamond: "<>", BoxInv: "[]"}


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, UNARY):
        return (f.body,)
    return ()


@lru_cache(maxsize=None)
def formula_size(f: Formula) -> int:
    # iterative: encoding goals are products hundreds of factors deep
    n, stack = 0, [f]
    while stack:
        n += 1
        stack.extend(children(stack.pop()))
    return n


@lru_cache(maxsize=None)
def formula_depth(f: Formula) -> int:
    return 1 + max((formula_depth(c) for c in children(f)), default=0)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def variables(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Var)}


def product_of(fs: Sequence[Formula]) -> Formula:
    """Left-nested product of a non-empty list; the unit for an empty one."""
    if not fs:
        return UNIT
    acc = fs[0]
    for f in fs[1:]:
        acc = Product(acc, f)
    return acc


# ---------------------------------------------------------------------------
# Stoups, tree terms, meta-formulae, sequents


@lru_cache(maxsize=None)
def _fkey(f: Formula) -> str:
    return render_formula(f)


@dataclass(frozen=True, eq=False)
class Stoup:
    """Multiset of formulae; order is kept only for addressing."""

    elements: tuple[Formula, ...] = ()
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "_key", tuple(sorted(self.elements, key=_fkey)))

    def __eq__(self, other):
        return isinstance(other, Stoup) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __bool__(self):
        return bool(self.elements)

    def counter(self) -> Counter:
        return Counter(self.elements)

    def union(self, other: "Stoup | Sequence[Formula]") -> "Stoup":
        return Stoup(self.elements + tuple(other))

    def without(self, indices: Sequence[int]) -> "Stoup":
        drop = set(indices)
        return Stoup(tuple(f for i, f in enumerate(self.elements) if i not in drop))

    def pick(self, indices: Sequence[int]) -> "Stoup":
        return Stoup(tuple(self.elements[i] for i in indices))


EMPTY_STOUP = Stoup(())


@dataclass(frozen=True, eq=False)
class MetaFormula:
    """``stoup ; items`` where each item is a Formula or a Bracketed."""

    stoup: Stoup = EMPTY_STOUP
    items: tuple = ()
    _key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.stoup, Stoup):
            object.__setattr__(self, "stoup", Stoup(tuple(self.stoup)))
        object.__setattr__(self, "items", tuple(self.items))
        key = (self.stoup._key, self.items)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, MetaFormula)
            and self._hash == other._hash
            and self._key == other._key
        )

    def __hash__(self):
        return self._hash

    def is_empty(self) -> bool:
        return not self.stoup and not self.items

    def with_items(self, items: Sequence) -> "MetaFormula":
        return MetaFormula(self.stoup, tuple(items))

    def with_stoup(self, stoup: "Stoup | Sequence[Formula]") -> "MetaFormula":
        return MetaFormula(stoup if isinstance(stoup, Stoup) else Stoup(tuple(stoup)), self.items)

    def __str__(self) -> str:
        return render_meta(self)


@dataclass(frozen=True)
class Bracketed:
    """A bracketed tree term ``[ meta ]``."""

    meta: MetaFormula

    def __str__(self) -> str:
        return "[" + (render_meta(self.meta) or " ") + "]"


Bracketed.__hash__ = _cached_hash
Bracketed.__reduce__ = _rebuild

Item = Union[Formula, Bracketed]
EMPTY_META = MetaFormula()


def meta(*items: Item, stoup: Sequence[Formula] = ()) -> MetaFormula:
    return MetaFormula(Stoup(tuple(stoup)), tuple(items))


def bracket(*items: Item, stoup: Sequence[Formula] = ()) -> Bracketed:
    return Bracketed(meta(*items, stoup=stoup))


@dataclass(frozen=True)
class Sequent:
    antecedent: MetaFormula
    succedent: Formula

    def __str__(self) -> str:
        return render_sequent(self)


Sequent.__hash__ = _cached_hash
Sequent.__reduce__ = _rebuild
MetaFormula.__reduce__ = _rebuild
Stoup.__reduce__ = _rebuild


@dataclass(frozen=True)
class ZonePath:
    """Address of a zone: bracket indices from the root, then an optional
    item span ``(start, length)`` and stoup index inside that zone."""

    steps: tuple[int, ...] = ()
    span: tuple[int, int] | None = None
    stoup_index: int | None = None


# ---------------------------------------------------------------------------
# Walking the structure


def meta_formulas(m: MetaFormula) -> Iterator[Formula]:
    """All formula occurrences in ``m``, stoups included, at every depth."""
    yield from m.stoup
    for it in m.items:
        if isinstance(it, Bracketed):
            yield from meta_formulas(it.meta)
        else:
            yield it


def sequent_formulas(s: Sequent) -> Iterator[Formula]:
    yield from meta_formulas(s.antecedent)
    yield s.succedent


def zones(m: MetaFormula, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], MetaFormula]]:
    """Every zone of ``m`` (itself first) with its path."""
    yield prefix, m
    for i, it in enumerate(m.items):
        if isinstance(it, Bracketed):
            yield from zones(it.meta, prefix + (i,))


def meta_size(m: MetaFormula) -> int:
    total = m.__dict__.get("_size")
    if total is None:
        total = sum(formula_size(f) for f in m.stoup)
        for it in m.items:
            total += 1 + meta_size(it.meta) if isinstance(it, Bracketed) else formula_size(it)
        object.__setattr__(m, "_size", total)
    return total


def sequent_size(s: Sequent) -> int:
    """Total formula-node count (each bracket pair counts one)."""
    return meta_size(s.antecedent) + formula_size(s.succedent)


def bracket_count(m: MetaFormula) -> int:
    n = 0
    for it in m.items:
        if isinstance(it, Bracketed):
            n += 1 + bracket_count(it.meta)
    return n


def has_stoups(m: MetaFormula) -> bool:
    return any(bool(z.stoup) for _, z in zones(m))


def erase_brackets(m: MetaFormula) -> list[Formula]:
    """Flatten away brackets (stoups are dropped; modalities kept)."""
    out: list[Formula] = []
    for it in m.items:
        if isinstance(it, Bracketed):
            out.extend(erase_brackets(it.meta))
        else:
            out.append(it)
    return out


def zone_at(s: "Sequent | MetaFormula", p: "ZonePath | Sequence[int]") -> MetaFormula:
    steps = p.steps if isinstance(p, ZonePath) else tuple(p)
    m = s.antecedent if isinstance(s, Sequent) else s
    for k, i in enumerate(steps):
        if not (0 <= i < len(m.items)) or not isinstance(m.items[i], Bracketed):
            raise PathError(f"step {k} (index {i}) does not address a bracket")
        m = m.items[i].meta
    if isinstance(p, ZonePath):
        if p.span is not None:
            start, length = p.span
            if start < 0 or length < 0 or start + length > len(m.items):
                raise PathError(f"span {p.span} out of bounds")
        if p.stoup_index is not None and not (0 <= p.stoup_index < len(m.stoup)):
            raise PathError(f"stoup index {p.stoup_index} out of bounds")
    return m


def _replace_meta(m: MetaFormula, steps: tuple[int, ...], new: MetaFormula) -> MetaFormula:
    if not steps:
        return new
    i = steps[0]
    if not (0 <= i < len(m.items)) or not isinstance(m.items[i], Bracketed):
        raise PathError(f"index {i} does not address a bracket")
    items = list(m.items)
    items[i] = Bracketed(_replace_meta(m.items[i].meta, steps[1:], new))
    return MetaFormula(m.stoup, tuple(items))


def replace_zone(s: "Sequent | MetaFormula", p: "ZonePath | Sequence[int]", new: MetaFormula):
    steps = p.steps if isinstance(p, ZonePath) else tuple(p)
    if isinstance(s, Sequent):
        return Sequent(_replace_meta(s.antecedent, steps, new), s.succedent)
    return _replace_meta(s, steps, new)


def subformula_closure(s: Sequent) -> set[Formula]:
    out: set[Formula] = set()
    for f in sequent_formulas(s):
        out.update(subformulas(f))
    return out


def _contains_unit(f: Formula) -> bool:
    return any(isinstance(g, Unit) for g in subformulas(f))


def lambek_restriction_holds(s: Sequent) -> bool:
    """Every zone non-empty (stoup or items) and no unit anywhere."""
    if any(z.is_empty() for _, z in zones(s.antecedent)):
        return False
    return not any(_contains_unit(f) for f in sequent_formulas(s))


# ---------------------------------------------------------------------------
# Rendering


def _wrap(f: Formula) -> str:
    text = render_formula(f)
    return f"({text})" if isinstance(f, BINARY) else text


@lru_cache(maxsize=None)
def render_formula(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Unit):
        return "1"
    if isinstance(f, BINARY):
        return _wrap(f.left) + _BIN_SYMBOL[type(f)] + _wrap(f.right)
    if isinstance(f, UNARY):
        return _UN_SYMBOL[type(f)] + _wrap(f.body)
    raise TypeError(f"not a formula: {f!r}")


def render_item(it: Item) -> str:
    if isinstance(it, Bracketed):
        return "[" + (render_meta(it.meta) or " ") + "]"
    return render_formula(it)


def render_meta(m: MetaFormula) -> str:
    body = ", ".join(render_item(it) for it in m.items)
    if m.stoup:
        head = "{" + ", ".join(render_formula(f) for f in m.stoup) + "};"
        return head + (" " + body if body else "")
    return body


def render_sequent(s: Sequent) -> str:
    ant = render_meta(s.antecedent)
    return (ant + " => " if ant else "=> ") + render_formula(s.succedent)


def render(x) -> str:
    """Render a formula, meta-formula, sequent or derivation node."""
    if isinstance(x, Formula):
        return render_formula(x)
    if isinstance(x, Sequent):
        return render_sequent(x)
    if isinstance(x, MetaFormula):
        return render_meta(x)
    if isinstance(x, Bracketed):
        return render_item(x)
    if hasattr(x, "sequent") and hasattr(x, "rule"):
        return f"{render_sequent(x.sequent)}  [{x.rule.rule}]"
    raise TypeError(f"cannot render {type(x).__name__}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>=>)|(?P<box>\[\])|(?P<dia><>)|(?P<ident>[A-Za-z_][A-Za-z0-9_#~']*)"
    r"|(?P<one>1(?![0-9]))|(?P<sym>[()\[\]{}\\/*&|!,;]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SyntaxError_(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        value = m.group(kind)
        out.append((value if kind == "sym" else kind, value, start))
        pos = m.end()
    out.append(("eof", "", n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> str:
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self) -> int:
        return self.toks[self.i][2]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise SyntaxError_(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def error(self, msg: str):
        tok = self.toks[self.i]
        what = "end of input" if tok[0] == "eof" else repr(tok[1])
        raise SyntaxError_(f"{msg}, found {what}", tok[2])

    # formula levels
    def formula(self) -> Formula:
        acc = self.prod()
        while self.peek() in ("\\", "/"):
            op = self.take(self.peek())[0]
            rhs = self.prod()
            acc = LeftDiv(acc, rhs) if op == "\\" else RightDiv(acc, rhs)
        return acc

    def prod(self) -> Formula:
        acc = self.unary()
        while self.peek() in ("*", "&", "|"):
            op = self.take(self.peek())[0]
            rhs = self.unary()
            acc = {"*": Product, "&": Conj, "|": Disj}[op](acc, rhs)
        return acc

    def unary(self) -> Formula:
        k = self.peek()
        if k == "!":
            self.take("!")
            return Bang(self.unary())
        if k == "dia":
            self.take("dia")
            return Diamond(self.unary())
        if k == "box":
            self.take("box")
            return BoxInv(self.unary())
        if k == "ident":
            return Var(self.take("ident")[1])
        if k == "one":
            self.take("one")
            return UNIT
        if k == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        self.error("expected a formula")

    # antecedents
    def antecedent(self, closers: tuple[str, ...]) -> MetaFormula:
        stoup: tuple[Formula, ...] = ()
        if self.peek() == "{":
            self.take("{")
            elems = []
            if self.peek() != "}":
                elems.append(self.formula())
                while self.peek() == ",":
                    self.take(",")
                    elems.append(self.formula())
            self.take("}")
            self.take(";")
            stoup = tuple(elems)
        items: list[Item] = []
        if self.peek() not in closers:
            items.append(self.item())
            while self.peek() == ",":
                self.take(",")
                items.append(self.item())
        return MetaFormula(Stoup(stoup), tuple(items))

    def item(self) -> Item:
        if self.peek() == "[":
            self.take("[")
            m = self.antecedent(("]",))
            self.take("]")
            return Bracketed(m)
        return self.formula()


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "eof":
        p.error("unexpected trailing input")
    return f


def parse_meta(text: str) -> MetaFormula:
    p = _Parser(text)
    m = p.antecedent(("eof",))
    p.take("eof")
    return m


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    ant = p.antecedent(("arrow",))
    p.take("arrow")
    succ = p.formula()
    if p.peek() != "eof":
        p.error("unexpected trailing input")
    return Sequent(ant, succ)


def seq(text: "str | Sequent") -> Sequent:
    """Convenience coercion used throughout the package and tests."""
    return text if isinstance(text, Sequent) else parse_sequent(text)


def fml(text: "str | Formula") -> Formula:
    return text if isinstance(text, Formula) else parse_formula(text)
