"""Categorial-grammar recognition over the calculi.

A word sequence is s-recognised when some type assignment makes
``A1, ..., An => goal`` derivable, and t-recognised when some bracketing of
the assigned types is. Bracketings are enumerated up to a bound on the
number of bracket pairs, fewest pairs first.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

from .calculi import Calculus, get_calculus
from .kernel import Derivation
from .search import Derivable, SearchBudget, Searcher, Unknown, paused_gc
from .syntax import (
    EMPTY_STOUP,
    Bracketed,
    Formula,
    MetaFormula,
    Sequent,
    erase_brackets,
    parse_formula,
)

LEXICON_NAMES = ("plain", "bracketed")


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    entries: dict
    goal: Formula

    def __post_init__(self):
        norm = {}
        for w, fs in self.entries.items():
            fs = tuple(fs) if not isinstance(fs, Formula) else (fs,)
            if not fs:
                raise LexiconError(f"word {w!r} has no type")
            norm[w] = fs
        object.__setattr__(self, "entries", norm)
        if self.goal is None:
            raise LexiconError("a lexicon needs a goal formula")

    def types(self, word: str) -> tuple[Formula, ...]:
        try:
            return self.entries[word]
        except KeyError:
            raise LexiconError(f"unknown word {word!r}") from None

    def assignments(self, words: Sequence[str]) -> Iterator[tuple[Formula, ...]]:
        return itertools.product(*(self.types(w) for w in words))


def parse_lexicon(text: str) -> Lexicon:
    """Lines ``word: Formula`` (repeatable, also ``w1, w2: Formula``) and ``goal: Formula``."""
    entries: dict[str, list[Formula]] = {}
    goal = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise LexiconError(f"line {n}: expected 'word: Formula'")
        head, body = line.split(":", 1)
        try:
            f = parse_formula(body.strip())
        except ValueError as e:
            raise LexiconError(f"line {n}: {e}") from None
        if head.strip() == "goal":
            goal = f
            continue
        for w in head.split(","):
            w = w.strip()
            if not w:
                raise LexiconError(f"line {n}: empty word")
            entries.setdefault(w, [])
            if f not in entries[w]:
                entries[w].append(f)
    if goal is None:
        raise LexiconError("missing 'goal:' line")
    return Lexicon(entries, goal)


def load_lexicon(path: str | Path) -> Lexicon:
    """A lexicon file, or one of the bundled names ``plain`` and ``bracketed``."""
    if str(path) in LEXICON_NAMES:
        text = resources.files("lambekbang").joinpath(f"data/lexicons/{path}.lex").read_text()
        return parse_lexicon(text)
    return parse_lexicon(Path(path).read_text())


def with_goal(lex: Lexicon, goal: Formula | str) -> Lexicon:
    return Lexicon(lex.entries, parse_formula(goal) if isinstance(goal, str) else goal)


# ---------------------------------------------------------------------------
# Bracketings


# a bracketing term is a tuple whose members are word positions or ("b", term)
Term = tuple


def _inserts(term: Term, allow_empty: bool) -> Iterator[Term]:
    n = len(term)
    for i in range(n + 1):
        for j in range(i if allow_empty else i + 1, n + 1):
            yield term[:i] + (("b", term[i:j]),) + term[j:]
    for k, x in enumerate(term):
        if isinstance(x, tuple):
            for sub in _inserts(x[1], allow_empty):
                yield term[:k] + (("b", sub),) + term[k + 1:]


def bracketings(n: int, max_pairs: int, allow_empty: bool = True) -> Iterator[tuple[int, Term]]:
    """Well-nested bracketings of ``n`` positions with at most ``max_pairs`` pairs,
    as ``(pairs, term)``, deduplicated and fewest pairs first."""
    level = [tuple(range(n))]
    yield 0, level[0]
    for k in range(1, max_pairs + 1):
        seen = set()
        nxt = []
        for t in level:
            for u in _inserts(t, allow_empty):
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        level = nxt
        for t in level:
            yield k, t


def term_to_meta(term: Term, types: Sequence[Formula], memo: dict | None = None) -> MetaFormula:
    """``memo`` shares the meta-formulae of repeated sub-terms (same ``types`` only)."""
    if memo is not None and term in memo:
        return memo[term]
    items = []
    for x in term:
        if isinstance(x, tuple):
            items.append(Bracketed(term_to_meta(x[1], types, memo)))
        else:
            items.append(types[x])
    m = MetaFormula(EMPTY_STOUP, tuple(items))
    if memo is not None:
        memo[term] = m
    return m


def render_bracketing(term: Term, words: Sequence[str]) -> str:
    out = []
    for x in term:
        out.append(f"[{render_bracketing(x[1], words)}]" if isinstance(x, tuple) else words[x])
    return " ".join(out) if out else " "


# ---------------------------------------------------------------------------
# Recognition


@dataclass
class Recognition:
    """Outcome of recognition. ``verdict`` is Derivable, Underivable or Unknown."""

    verdict: str
    derivation: Derivation | None = None
    types: tuple[Formula, ...] | None = None
    bracketing: str | None = None
    tried: int = 0
    caps: tuple[str, ...] = ()
    by_bound: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.verdict == "Derivable"


def _calc(c: Calculus | str) -> Calculus:
    return get_calculus(c) if isinstance(c, str) else c


def s_recognize(c: Calculus | str, lex: Lexicon, words: Sequence[str] | str,
                budget: SearchBudget | None = None) -> Recognition:
    """Search ``A1, ..., An => goal`` for every type assignment."""
    c = _calc(c)
    words = words.split() if isinstance(words, str) else list(words)
    assigns = list(lex.assignments(words))
    eng = Searcher(c, budget)
    t0 = time.monotonic()
    caps: set[str] = set()
    for k, types in enumerate(assigns, 1):
        v = eng.run(Sequent(MetaFormula(EMPTY_STOUP, tuple(types)), lex.goal))
        if isinstance(v, Derivable):
            return Recognition("Derivable", v.derivation, tuple(types), " ".join(words), k,
                               elapsed=time.monotonic() - t0)
        if isinstance(v, Unknown):
            caps.update(v.caps)
    verdict = "Unknown" if caps else "Underivable"
    return Recognition(verdict, tried=len(assigns), caps=tuple(sorted(caps)), elapsed=time.monotonic() - t0)


def t_recognize(c: Calculus | str, lex: Lexicon, words: Sequence[str] | str,
                budget: SearchBudget | None = None, max_bracket_pairs: int = 2,
                time_limit: float | None = None) -> Recognition:
    """Search every bracketing with up to ``max_bracket_pairs`` pairs and every assignment.

    ``by_bound`` records the verdict at each bracket count fully explored.
    Empty islands are tried only when the calculus is not Lambek-restricted.
    """
    c = _calc(c)
    if not c.features.has_brackets:
        raise ValueError(f"{c.name} has no brackets; use s-recognition")
    if max_bracket_pairs < 0:
        raise ValueError("the bracket bound must be non-negative")
    words = words.split() if isinstance(words, str) else list(words)
    assigns = list(lex.assignments(words))
    memos: list[dict] = [{} for _ in assigns]
    eng = Searcher(c, budget)
    t0 = time.monotonic()
    allow_empty = not c.features.lambek_restricted
    caps: set[str] = set()
    level_caps: set[str] = set()
    by_bound: dict[int, str] = {}
    cur_level = 0
    tried = 0
    with paused_gc():
        for pairs, term in bracketings(len(words), max_bracket_pairs, allow_empty):
            if pairs != cur_level:
                by_bound[cur_level] = "Unknown" if level_caps else "Underivable"
                cur_level, level_caps = pairs, set()
            if time_limit is not None and time.monotonic() - t0 > time_limit:
                caps.add("time_limit")
                break
            for types, memo in zip(assigns, memos):
                tried += 1
                ant = term_to_meta(term, types, memo)
                v = eng.run(Sequent(ant, lex.goal))
                if isinstance(v, Derivable):
                    by_bound[pairs] = "Derivable"
                    return Recognition("Derivable", v.derivation, tuple(types), render_bracketing(term, words),
                                       tried, by_bound=by_bound, elapsed=time.monotonic() - t0)
                if isinstance(v, Unknown):
                    caps.update(v.caps)
                    level_caps.update(v.caps)
        else:
            by_bound[cur_level] = "Unknown" if level_caps else "Underivable"
        verdict = "Unknown" if caps else "Underivable"
        return Recognition(verdict, tried=tried, caps=tuple(sorted(caps)), by_bound=by_bound,
                           elapsed=time.monotonic() - t0)


def erases_to(s: Sequent, types: Sequence[Formula]) -> bool:
    """Whether removing brackets from the antecedent gives exactly ``types``."""
    return not s.antecedent.stoup and erase_brackets(s.antecedent) == list(types)

